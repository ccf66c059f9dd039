//! Exact designs as multisets over a candidate set.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{add_outer, Matrix};
use crate::model::{candidate_rows, CandidateSet, ModelSpec};

/// A candidate set together with a model and the model-matrix row of every
/// candidate.
#[derive(Debug, Clone)]
pub struct DesignSpace {
    candidates: CandidateSet,
    model: ModelSpec,
    rows: Vec<Vec<f64>>,
}

impl DesignSpace {
    pub fn new(candidates: CandidateSet, model: ModelSpec) -> Result<Self> {
        if candidates.factors() != model.factors() {
            return Err(Error::Dimension(format!(
                "model {} expects {} factors, candidate set has {}",
                model.name(),
                model.factors(),
                candidates.factors()
            )));
        }
        let rows = candidate_rows(&candidates, &model);
        Ok(Self {
            candidates,
            model,
            rows,
        })
    }

    pub fn candidates(&self) -> &CandidateSet {
        &self.candidates
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn p(&self) -> usize {
        self.model.p()
    }

    pub fn row(&self, candidate: usize) -> &[f64] {
        &self.rows[candidate]
    }

    /// Same candidates under a different model.
    pub fn with_model(&self, model: ModelSpec) -> Result<Self> {
        Self::new(self.candidates.clone(), model)
    }
}

/// An `n`-run exact design stored as candidate indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Design {
    refs: Vec<usize>,
}

/// Distinct candidate index to replicate count.
pub type ReplicationTable = BTreeMap<usize, usize>;

impl Design {
    pub fn new(refs: Vec<usize>, candidates: &CandidateSet) -> Result<Self> {
        if refs.is_empty() {
            return Err(Error::InvalidDesign("a design needs at least one run".into()));
        }
        if let Some(&bad) = refs.iter().find(|&&r| r >= candidates.len()) {
            return Err(Error::InvalidDesign(format!(
                "candidate index {bad} out of range (set has {})",
                candidates.len()
            )));
        }
        Ok(Self { refs })
    }

    /// Builds a design from `(candidate, reps)` pairs, expanding in order.
    pub fn from_counts(counts: &[(usize, usize)], candidates: &CandidateSet) -> Result<Self> {
        let refs = counts
            .iter()
            .flat_map(|&(c, r)| std::iter::repeat(c).take(r))
            .collect();
        Self::new(refs, candidates)
    }

    pub(crate) fn from_refs_unchecked(refs: Vec<usize>) -> Self {
        Self { refs }
    }

    pub fn n(&self) -> usize {
        self.refs.len()
    }

    pub fn refs(&self) -> &[usize] {
        &self.refs
    }

    pub(crate) fn refs_mut(&mut self) -> &mut [usize] {
        &mut self.refs
    }

    /// Distinct candidates with replicate counts, in order of first
    /// appearance.
    pub fn support(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &r in &self.refs {
            match out.iter_mut().find(|(c, _)| *c == r) {
                Some((_, k)) => *k += 1,
                None => out.push((r, 1)),
            }
        }
        out
    }

    /// Design with runs sorted by candidate index.
    pub fn canonical(&self) -> Self {
        let mut refs = self.refs.clone();
        refs.sort_unstable();
        Self { refs }
    }

    /// Keeps only the runs whose mask entry is `true`.
    pub fn subdesign(&self, keep: &[bool]) -> Vec<usize> {
        self.refs
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|(&r, _)| r)
            .collect()
    }
}

pub fn replication(design: &Design) -> ReplicationTable {
    let mut t = ReplicationTable::new();
    for &r in &design.refs {
        *t.entry(r).or_insert(0) += 1;
    }
    t
}

/// Pure-error degrees of freedom: runs minus distinct points.
pub fn pure_error_df(design: &Design) -> usize {
    design.n() - replication(design).len()
}

/// Share of runs not spent on pure error, `(n - d) / n`.
pub fn df_efficiency(design: &Design) -> f64 {
    let n = design.n() as f64;
    (n - pure_error_df(design) as f64) / n
}

pub fn model_matrix(design: &Design, space: &DesignSpace) -> Matrix {
    let rows: Vec<&[f64]> = design.refs.iter().map(|&r| space.row(r)).collect();
    Matrix::from_rows(&rows).expect("rows share the model width")
}

/// `X'X` accumulated over distinct support points weighted by replication.
pub fn info_matrix(design: &Design, space: &DesignSpace) -> Matrix {
    info_from_refs(design.refs(), space)
}

pub(crate) fn info_from_refs(refs: &[usize], space: &DesignSpace) -> Matrix {
    let p = space.p();
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &r in refs {
        *counts.entry(r).or_insert(0) += 1;
    }
    let mut data = vec![0.0; p * p];
    for (&c, &k) in &counts {
        add_outer(&mut data, space.row(c), k as f64);
    }
    Matrix::new(p, p, data).expect("finite square buffer")
}

/// Row-by-row `X'X`, used to cross-check [`info_matrix`].
pub fn info_matrix_by_rows(design: &Design, space: &DesignSpace) -> Matrix {
    crate::linalg::gram(&model_matrix(design, space))
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

/// One line of a design file: a point and how many runs it receives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignRow {
    pub point: Vec<f64>,
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignFile {
    pub factors: usize,
    pub runs: Vec<DesignRow>,
}

impl DesignFile {
    pub fn from_design(design: &Design, candidates: &CandidateSet) -> Self {
        let runs = design
            .support()
            .into_iter()
            .map(|(c, reps)| DesignRow {
                point: candidates.point(c).to_vec(),
                reps,
            })
            .collect();
        Self {
            factors: candidates.factors(),
            runs,
        }
    }

    /// Maps every row onto the candidate set. Rows are 1-based in errors
    /// (header excluded).
    pub fn to_design(&self, candidates: &CandidateSet) -> Result<Design> {
        let mut counts = Vec::with_capacity(self.runs.len());
        for (i, row) in self.runs.iter().enumerate() {
            if row.point.len() != candidates.factors() {
                return Err(Error::InvalidDesign(format!(
                    "row {} has {} coordinates, expected {}",
                    i + 1,
                    row.point.len(),
                    candidates.factors()
                )));
            }
            let idx = candidates.index_of(&row.point).ok_or_else(|| Error::UnknownPoint {
                row: i + 1,
                point: row.point.clone(),
            })?;
            counts.push((idx, row.reps));
        }
        Design::from_counts(&counts, candidates)
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = String::new();
        let header: Vec<String> = (1..=self.factors).map(|k| format!("x{k}")).collect();
        let _ = writeln!(s, "{},reps", header.join(","));
        for row in &self.runs {
            let coords: Vec<String> = row.point.iter().map(|&v| format_level(v)).collect();
            let _ = writeln!(s, "{},{}", coords.join(","), row.reps);
        }
        s
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = rdr.headers()?.clone();
        let cols: Vec<&str> = headers.iter().collect();
        let reps_col = cols
            .iter()
            .position(|h| h.eq_ignore_ascii_case("reps"))
            .ok_or_else(|| Error::InvalidDesign("design CSV needs a `reps` column".into()))?;
        let factor_cols: Vec<usize> = (0..cols.len()).filter(|&c| c != reps_col).collect();
        let mut runs = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse = |c: usize| -> Result<f64> {
                rec.get(c)
                    .unwrap_or("")
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidDesign(format!("row {}: bad number", i + 1)))
            };
            let point = factor_cols.iter().map(|&c| parse(c)).collect::<Result<Vec<_>>>()?;
            let reps = rec
                .get(reps_col)
                .unwrap_or("")
                .parse::<usize>()
                .map_err(|_| Error::InvalidDesign(format!("row {}: bad reps", i + 1)))?;
            if reps == 0 {
                return Err(Error::InvalidDesign(format!("row {}: reps must be >= 1", i + 1)));
            }
            runs.push(DesignRow { point, reps });
        }
        Ok(Self {
            factors: factor_cols.len(),
            runs,
        })
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads `.json` as JSON and anything else as CSV.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if is_json(path) {
            Self::from_json_str(&text)
        } else {
            Self::from_csv_str(&text)
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = if is_json(path) {
            self.to_json_string()?
        } else {
            self.to_csv_string()
        };
        std::fs::write(path, text)?;
        Ok(())
    }
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn format_level(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}
