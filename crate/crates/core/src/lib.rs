//! Certify linear order isomorphisms between finite function-space models and
//! recover their weighted-composition form `Tf = T1 · f∘σ`.

pub mod adequacy;
pub mod classify;
pub mod compact;
pub mod cone;
pub mod error;
pub mod example_space;
pub mod fuzz;
pub mod io;
pub mod lp;
pub mod matrix;
pub mod operator;
pub mod par;
pub mod recovery;
pub mod scalar;
pub mod space;

pub use cone::{cone_rep, is_order_isomorphism, Certificate, ConeOptions, ConeRep};
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use operator::{Basis, OperatorModel};
pub use recovery::{decompose, Decomposition, RecoveryOptions};
pub use scalar::{Mode, Rational, Scalar, DEFAULT_TOL};
pub use space::{FunctionFamily, FunctionVec, PointSpace, ZeroSet};
