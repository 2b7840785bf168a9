//! Versioned JSON documents for spaces, families, operators and sampled
//! compactification models.
//!
//! Every top-level document carries `"schema": "oiso/1"`. A space or family
//! may be given inline, as a path (resolved against the referring file's
//! directory) or as the shorthand `"points:N"`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::compact::{Generator, SampledModel, SequenceSpec};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::operator::{Basis, OperatorModel};
use crate::scalar::{scalar_from_json, Scalar};
use crate::space::{build_lipschitz_family, FunctionFamily, FunctionVec, PointSpace};

pub const SCHEMA: &str = "oiso/1";

fn check_schema(found: &Option<String>, what: &str) -> Result<()> {
    match found.as_deref() {
        Some(SCHEMA) => Ok(()),
        Some(other) => Err(Error::Input(format!("{what}: unsupported schema `{other}`, expected `{SCHEMA}`"))),
        None => Err(Error::Input(format!("{what}: missing \"schema\": \"{SCHEMA}\""))),
    }
}

fn points_shorthand(s: &str) -> Option<Result<usize>> {
    s.strip_prefix("points:")
        .map(|n| n.trim().parse::<usize>().map_err(|_| Error::Input(format!("bad point count in `{s}`"))))
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<f64>>>,
}

impl SpaceDoc {
    pub fn build(&self) -> Result<PointSpace> {
        let labels = match (&self.labels, self.points) {
            (Some(l), None) => l.clone(),
            (None, Some(n)) => (1..=n).map(|i| format!("x{i}")).collect(),
            (Some(l), Some(n)) if l.len() == n => l.clone(),
            (Some(_), Some(_)) => return Err(Error::Input("`labels` and `points` disagree".into())),
            (None, None) if self.metric.is_some() => {
                (1..=self.metric.as_ref().unwrap().len()).map(|i| format!("x{i}")).collect()
            }
            (None, None) => return Err(Error::Input("a space needs `labels`, `points` or `metric`".into())),
        };
        match &self.metric {
            Some(m) => PointSpace::with_metric(labels, m.clone()),
            None => PointSpace::new(labels),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceRef {
    Named(String),
    Inline(SpaceDoc),
}

impl SpaceRef {
    pub fn resolve(&self, base: &Path) -> Result<PointSpace> {
        match self {
            SpaceRef::Inline(doc) => doc.build(),
            SpaceRef::Named(s) => match points_shorthand(s) {
                Some(n) => PointSpace::unlabeled(n?),
                None => {
                    let path = base.join(s);
                    let doc: SpaceDoc = serde_json::from_value(read_json(&path)?)?;
                    check_schema(&doc.schema, &path.display().to_string())?;
                    doc.build()
                }
            },
        }
    }
}

/// Generators: `"full"`, `"lipschitz"` or explicit value rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeneratorsDoc {
    Keyword(String),
    Values(Vec<Vec<Value>>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub space: SpaceRef,
    pub generators: GeneratorsDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
    /// Extra candidate functions for `"lipschitz"` families.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<Vec<f64>>>,
}

impl FamilyDoc {
    pub fn build<S: Scalar>(&self, base: &Path, tol: f64) -> Result<FunctionFamily<S>> {
        let space = Arc::new(self.space.resolve(base)?);
        match &self.generators {
            GeneratorsDoc::Keyword(k) if k == "full" => Ok(FunctionFamily::full(space)),
            GeneratorsDoc::Keyword(k) if k == "lipschitz" => {
                let seeds =
                    self.seeds.iter().flatten().map(|s| FunctionVec::new(s.clone())).collect::<Result<Vec<_>>>()?;
                let fam = build_lipschitz_family(space.clone(), &seeds)?;
                let gens = fam
                    .generators()
                    .map(|g| {
                        g.iter()
                            .map(|v| {
                                S::from_f64_exact(*v)
                                    .ok_or_else(|| Error::Input(format!("non-finite generator value {v}")))
                            })
                            .collect::<Result<Vec<S>>>()
                            .and_then(FunctionVec::new)
                    })
                    .collect::<Result<Vec<_>>>()?;
                FunctionFamily::new(space, gens, fam.names().map(<[String]>::to_vec), tol)
            }
            GeneratorsDoc::Keyword(k) => Err(Error::Input(format!("unknown generator keyword `{k}`"))),
            GeneratorsDoc::Values(rows) => {
                let gens = rows
                    .iter()
                    .map(|r| r.iter().map(scalar_from_json).collect::<Result<Vec<S>>>().and_then(FunctionVec::new))
                    .collect::<Result<Vec<_>>>()?;
                FunctionFamily::new(space, gens, self.names.clone(), tol)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilyRef {
    Named(String),
    Inline(FamilyDoc),
}

impl FamilyRef {
    pub fn resolve<S: Scalar>(&self, base: &Path, tol: f64) -> Result<FunctionFamily<S>> {
        match self {
            FamilyRef::Inline(doc) => doc.build(base, tol),
            FamilyRef::Named(s) => match points_shorthand(s) {
                Some(n) => Ok(FunctionFamily::full(Arc::new(PointSpace::unlabeled(n?)?))),
                None => load_family(&base.join(s), tol),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub matrix: Vec<Vec<Value>>,
    #[serde(default = "default_basis")]
    pub basis: Basis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<FamilyRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codomain: Option<FamilyRef>,
}

fn default_basis() -> Basis {
    Basis::Point
}

pub fn parse_matrix<S: Scalar>(rows: &[Vec<Value>]) -> Result<Matrix<S>> {
    let rows =
        rows.iter().map(|r| r.iter().map(scalar_from_json).collect::<Result<Vec<S>>>()).collect::<Result<Vec<_>>>()?;
    Matrix::from_rows(rows).ok_or_else(|| Error::Dimension("matrix rows differ in length".into()))
}

impl OperatorDoc {
    pub fn build<S: Scalar>(&self, base: &Path, tol: f64) -> Result<OperatorModel<S>> {
        check_schema(&self.schema, "operator")?;
        let matrix = parse_matrix::<S>(&self.matrix)?;
        match (&self.domain, &self.codomain) {
            (None, None) if self.basis == Basis::Point => OperatorModel::point(matrix, tol),
            (Some(d), Some(c)) => {
                let domain = d.resolve(base, tol)?;
                let codomain = c.resolve(base, tol)?;
                OperatorModel::new(matrix, self.basis, domain, codomain, tol)
            }
            (Some(d), None) => {
                let domain = d.resolve(base, tol)?;
                OperatorModel::new(matrix, self.basis, domain.clone(), domain, tol)
            }
            _ => Err(Error::Input("operator needs a `domain` family (and optionally a `codomain`)".into())),
        }
    }
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

pub fn load_family<S: Scalar>(path: &Path, tol: f64) -> Result<FunctionFamily<S>> {
    let doc: FamilyDoc = serde_json::from_value(read_json(path)?)?;
    check_schema(&doc.schema, &path.display().to_string())?;
    doc.build(&base_dir(path), tol)
}

pub fn parse_family<S: Scalar>(text: &str, base: &Path, tol: f64) -> Result<FunctionFamily<S>> {
    let doc: FamilyDoc = serde_json::from_str(text)?;
    check_schema(&doc.schema, "family")?;
    doc.build(base, tol)
}

pub fn load_operator<S: Scalar>(path: &Path, tol: f64) -> Result<OperatorModel<S>> {
    let doc: OperatorDoc = serde_json::from_value(read_json(path)?)?;
    doc.build(&base_dir(path), tol)
}

pub fn parse_operator<S: Scalar>(text: &str, base: &Path, tol: f64) -> Result<OperatorModel<S>> {
    let doc: OperatorDoc = serde_json::from_str(text)?;
    doc.build(base, tol)
}

/// A symbolic generator (`"sin(1/t)"`) or a lookup table of `(t, value)` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeneratorDoc {
    Symbolic(String),
    Tabulated { name: String, table: Vec<(f64, f64)> },
}

impl GeneratorDoc {
    pub fn build(&self) -> Result<Generator> {
        match self {
            GeneratorDoc::Symbolic(text) => Generator::symbolic(text),
            GeneratorDoc::Tabulated { name, table } => Ok(Generator::tabulated(name, table.clone())),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub samples: Vec<f64>,
    pub generators: Vec<GeneratorDoc>,
    #[serde(default)]
    pub sequences: Vec<SequenceSpec>,
}

impl SampledDoc {
    pub fn build(&self) -> Result<SampledModel> {
        check_schema(&self.schema, "compactify input")?;
        if self.samples.is_empty() || self.generators.is_empty() {
            return Err(Error::Input("compactify input needs samples and generators".into()));
        }
        Ok(SampledModel {
            samples: self.samples.clone(),
            generators: self.generators.iter().map(GeneratorDoc::build).collect::<Result<_>>()?,
            sequences: self.sequences.clone(),
        })
    }
}

/// Operator on generator coefficients of a sampled model, acting from the
/// model to itself unless `codomain` gives another one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompactOperatorDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub matrix: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codomain: Option<SampledDoc>,
}

impl CompactOperatorDoc {
    pub fn matrix(&self) -> Result<Matrix<f64>> {
        check_schema(&self.schema, "compactify operator")?;
        Matrix::from_rows(self.matrix.clone()).ok_or_else(|| Error::Dimension("matrix rows differ in length".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn point_operator_from_json() {
        let t: OperatorModel<f64> =
            parse_operator(r#"{"schema":"oiso/1","matrix":[[0,2],[3,0]]}"#, Path::new("."), 1e-9).unwrap();
        assert_eq!(t.matrix()[(0, 1)], 2.0);
        assert_eq!(t.domain().space().label(0), "x1");
    }

    #[test]
    fn exact_mode_refuses_floats() {
        let text = r#"{"schema":"oiso/1","matrix":[[0.5,0],[0,1]]}"#;
        assert!(parse_operator::<Rational>(text, Path::new("."), 0.0).is_err());
        let text = r#"{"schema":"oiso/1","matrix":[["1/2",0],[0,1]]}"#;
        let t = parse_operator::<Rational>(text, Path::new("."), 0.0).unwrap();
        assert_eq!(t.matrix()[(0, 0)], Rational::from_ratio(1, 2));
    }

    #[test]
    fn schema_is_required() {
        assert!(parse_operator::<f64>(r#"{"matrix":[[1]]}"#, Path::new("."), 1e-9).is_err());
        assert!(parse_operator::<f64>(r#"{"schema":"oiso/2","matrix":[[1]]}"#, Path::new("."), 1e-9).is_err());
    }

    #[test]
    fn generator_basis_with_inline_family() {
        let text = r#"{"schema":"oiso/1","basis":"generator","matrix":[[1,0],[0,1]],
            "domain":{"space":"points:2","generators":[[1,1],[0,1]]}}"#;
        let t = parse_operator::<f64>(text, Path::new("."), 1e-9).unwrap();
        assert_eq!(t.basis(), Basis::Generator);
        assert_eq!(t.domain().dim(), 2);
    }

    #[test]
    fn lipschitz_family() {
        let text = r#"{"schema":"oiso/1","space":{"metric":[[0,1,2],[1,0,1],[2,1,0]]},"generators":"lipschitz"}"#;
        let fam = parse_family::<f64>(text, Path::new("."), 1e-9).unwrap();
        assert!(fam.is_full() && fam.contains_constants(1e-9));
        let exact = parse_family::<Rational>(text, Path::new("."), 0.0).unwrap();
        assert_eq!(exact.dim(), 3);
    }

    #[test]
    fn sampled_model() {
        let text = r#"{"schema":"oiso/1","samples":[0.5,1],"generators":["t",{"name":"g","table":[[0.5,1],[1,2]]}],
            "sequences":[{"rule":"1/k","prefix":100},{"points":[0.5,0.5,0.5,0.5]}]}"#;
        let doc: SampledDoc = serde_json::from_str(text).unwrap();
        let m = doc.build().unwrap();
        assert_eq!(m.generators.len(), 2);
        assert_eq!(m.generators[1].eval_many(&[1.0]).unwrap(), vec![2.0]);
        assert!(matches!(m.sequences[1], SequenceSpec::Points { .. }));
    }
}
