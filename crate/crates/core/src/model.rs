//! Factors, the candidate design space, and polynomial model terms.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Quantitative factors and their coded levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorSpec {
    levels: Vec<Vec<f64>>,
}

impl FactorSpec {
    pub fn new(levels: Vec<Vec<f64>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidModel("at least one factor is required".into()));
        }
        for (k, lv) in levels.iter().enumerate() {
            if lv.iter().any(|v| !v.is_finite() || !(-1.0..=1.0).contains(v)) {
                return Err(Error::InvalidModel(format!(
                    "factor {} has a level outside [-1, 1]",
                    k + 1
                )));
            }
            let mut sorted = lv.clone();
            sorted.sort_by(f64::total_cmp);
            sorted.dedup();
            if sorted.len() < 2 || sorted.len() != lv.len() {
                return Err(Error::InvalidModel(format!(
                    "factor {} needs at least two distinct levels",
                    k + 1
                )));
            }
        }
        Ok(Self { levels })
    }

    /// `count` factors, each at `{-1, 0, 1}`.
    pub fn three_level(count: usize) -> Self {
        Self {
            levels: vec![vec![-1.0, 0.0, 1.0]; count],
        }
    }

    /// `count` factors, each at `{-1, 1}`.
    pub fn two_level(count: usize) -> Self {
        Self {
            levels: vec![vec![-1.0, 1.0]; count],
        }
    }

    pub fn count(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }
}

/// The enumerated design space, in lexicographic order of level indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    factors: usize,
    points: Vec<Vec<f64>>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn factors(&self) -> usize {
        self.factors
    }

    pub fn point(&self, idx: usize) -> &[f64] {
        &self.points[idx]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Index of an exact coordinate match.
    pub fn index_of(&self, point: &[f64]) -> Option<usize> {
        self.points
            .iter()
            .position(|p| p.len() == point.len() && p.iter().zip(point).all(|(a, b)| a == b))
    }

    /// Candidate set restricted to the given indices, keeping their order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            factors: self.factors,
            points: indices.iter().map(|&i| self.points[i].clone()).collect(),
        }
    }
}

/// Full factorial enumeration; the last factor varies fastest.
pub fn enumerate_candidates(factors: &FactorSpec) -> CandidateSet {
    let mut points: Vec<Vec<f64>> = vec![Vec::new()];
    for lv in &factors.levels {
        let mut sorted = lv.clone();
        sorted.sort_by(f64::total_cmp);
        points = points
            .into_iter()
            .flat_map(|prefix| {
                sorted.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    CandidateSet {
        factors: factors.count(),
        points,
    }
}

/// Monomial regression functions, one exponent vector per column of the
/// model matrix. The first term is always the intercept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    name: String,
    factors: usize,
    terms: Vec<Vec<u8>>,
}

impl ModelSpec {
    pub fn new(name: impl Into<String>, factors: usize, terms: Vec<Vec<u8>>) -> Result<Self> {
        if terms.is_empty() || terms[0].iter().any(|&e| e != 0) {
            return Err(Error::InvalidModel("the first term must be the intercept".into()));
        }
        for (j, t) in terms.iter().enumerate() {
            if t.len() != factors {
                return Err(Error::InvalidModel(format!(
                    "term {} has {} exponents for {factors} factors",
                    j + 1,
                    t.len()
                )));
            }
            if t.iter().any(|&e| e > 2) {
                return Err(Error::InvalidModel(format!(
                    "term {} has an exponent above 2",
                    j + 1
                )));
            }
            if terms[..j].contains(t) {
                return Err(Error::InvalidModel(format!("term {} is repeated", j + 1)));
            }
        }
        Ok(Self {
            name: name.into(),
            factors,
            terms,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn factors(&self) -> usize {
        self.factors
    }

    pub fn terms(&self) -> &[Vec<u8>] {
        &self.terms
    }

    /// Number of parameters.
    pub fn p(&self) -> usize {
        self.terms.len()
    }

    /// Human-readable term labels such as `x1`, `x2^2`, `x1*x3`.
    pub fn term_labels(&self) -> Vec<String> {
        self.terms
            .iter()
            .map(|t| {
                let parts: Vec<String> = t
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(k, &e)| {
                        if e == 1 {
                            format!("x{}", k + 1)
                        } else {
                            format!("x{}^{e}", k + 1)
                        }
                    })
                    .collect();
                if parts.is_empty() {
                    "1".to_string()
                } else {
                    parts.join("*")
                }
            })
            .collect()
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.name, self.term_labels().join(", "))
    }
}

/// Built-in three-factor models.
///
/// Term order: intercept, linear, pure quadratic, then two-factor
/// interactions in lexicographic pair order.
pub fn builtin_model(name: &str) -> Result<ModelSpec> {
    let k = 3;
    let unit = |i: usize, e: u8| {
        let mut t = vec![0u8; k];
        t[i] = e;
        t
    };
    let linear: Vec<Vec<u8>> = (0..k).map(|i| unit(i, 1)).collect();
    let quadratic: Vec<Vec<u8>> = (0..k).map(|i| unit(i, 2)).collect();
    let mut interactions = Vec::new();
    for i in 0..k {
        for j in (i + 1)..k {
            let mut t = vec![0u8; k];
            t[i] = 1;
            t[j] = 1;
            interactions.push(t);
        }
    }
    let mut terms = vec![vec![0u8; k]];
    match name.to_ascii_uppercase().as_str() {
        "M1" => terms.extend(linear),
        "M2" => {
            terms.extend(linear);
            terms.extend(quadratic);
        }
        "M3" => {
            terms.extend(linear);
            terms.extend(interactions);
        }
        "M4" => {
            terms.extend(linear);
            terms.extend(quadratic);
            terms.extend(interactions);
        }
        _ => return Err(Error::UnknownModel(name.to_string())),
    }
    ModelSpec::new(name.to_ascii_uppercase(), k, terms)
}

/// One model-matrix row: entry `j` is `prod_k x_k^{e_jk}` with `0^0 = 1`.
pub fn expand_row(point: &[f64], model: &ModelSpec) -> Vec<f64> {
    assert_eq!(point.len(), model.factors, "point dimension mismatch");
    model
        .terms
        .iter()
        .map(|t| {
            t.iter()
                .zip(point)
                .map(|(&e, &x)| x.powi(e as i32))
                .product()
        })
        .collect()
}

/// Model-matrix rows for every candidate point, in candidate order.
pub fn candidate_rows(candidates: &CandidateSet, model: &ModelSpec) -> Vec<Vec<f64>> {
    candidates.points.iter().map(|p| expand_row(p, model)).collect()
}

/// The model matrix of the whole candidate set.
pub fn candidate_matrix(candidates: &CandidateSet, model: &ModelSpec) -> Matrix {
    Matrix::from_rows(&candidate_rows(candidates, model)).expect("rows share the model width")
}

/// Terms shared by both models, in `a`'s order.
pub fn common_submodel(a: &ModelSpec, b: &ModelSpec) -> Result<ModelSpec> {
    if a.factors != b.factors {
        return Err(Error::InvalidModel(format!(
            "models {} and {} have different factor counts",
            a.name, b.name
        )));
    }
    let terms: Vec<Vec<u8>> = a
        .terms
        .iter()
        .filter(|t| b.terms.contains(t))
        .cloned()
        .collect();
    ModelSpec::new(format!("{}&{}", a.name, b.name), a.factors, terms)
}

/// On-disk model description: either a built-in name (`"M3"`) or an explicit
/// object with factor levels and exponent vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelFile {
    Builtin(String),
    Custom {
        factors: usize,
        levels: Option<Vec<Vec<f64>>>,
        terms: Vec<Vec<u8>>,
        #[serde(default)]
        name: Option<String>,
    },
}

impl ModelFile {
    pub fn resolve(&self) -> Result<(FactorSpec, ModelSpec)> {
        match self {
            ModelFile::Builtin(name) => Ok((FactorSpec::three_level(3), builtin_model(name)?)),
            ModelFile::Custom {
                factors,
                levels,
                terms,
                name,
            } => {
                let fs = match levels {
                    Some(lv) => {
                        if lv.len() != *factors {
                            return Err(Error::InvalidModel(format!(
                                "{} level lists for {factors} factors",
                                lv.len()
                            )));
                        }
                        FactorSpec::new(lv.clone())?
                    }
                    None => FactorSpec::three_level(*factors),
                };
                let model = ModelSpec::new(
                    name.clone().unwrap_or_else(|| "custom".to_string()),
                    *factors,
                    terms.clone(),
                )?;
                Ok((fs, model))
            }
        }
    }
}

/// Resolves a model argument: a built-in name, or a path to a JSON model file.
pub fn load_model(arg: &str) -> Result<(FactorSpec, ModelSpec)> {
    if let Ok(m) = builtin_model(arg) {
        return Ok((FactorSpec::three_level(3), m));
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(Error::UnknownModel(arg.to_string()));
    }
    let text = std::fs::read_to_string(path)?;
    let file: ModelFile = serde_json::from_str(&text)?;
    file.resolve()
}
