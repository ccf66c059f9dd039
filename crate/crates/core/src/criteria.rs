//! Standard, modified and compound optimality criteria.
//!
//! All criteria are "larger is better". Raw values:
//!
//! * `D`  = `|X'X|`
//! * `A`  = `1 / tr(W (X'X)^-1)`
//! * `DP` = `|X'X| / F(q, d; 1-alpha)^q`
//! * `AP` = `1 / (F(1, d; 1-alpha) tr(W (X'X)^-1))`
//! * compound = `E_DP^k1 * E_AP^k2 * E_DF^k3`
//!
//! where `d` is the pure-error df and `q` the numerator df of the global
//! test (`p - 1` unless the intercept is counted). A singular information
//! matrix scores 0, and so does a modified criterion when `d = 0`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::design::{info_matrix, pure_error_df, Design, DesignSpace};
use crate::error::{Error, Result};
use crate::fdist::f_quantile;
use crate::linalg::{cholesky_in_place, cholesky_inverse_diag, cholesky_logdet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CriterionKind {
    D,
    A,
    DP,
    AP,
    Compound,
}

impl CriterionKind {
    /// Determinant-based criteria compare on the `1/p` power scale.
    pub fn is_determinant(self) -> bool {
        matches!(self, CriterionKind::D | CriterionKind::DP)
    }

    pub fn is_modified(self) -> bool {
        matches!(self, CriterionKind::DP | CriterionKind::AP)
    }

    /// Whether a zero-pedf design is unusable under this criterion.
    pub fn needs_pure_error(self) -> bool {
        self != CriterionKind::D && self != CriterionKind::A
    }
}

impl fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CriterionKind::D => "D",
            CriterionKind::A => "A",
            CriterionKind::DP => "DP",
            CriterionKind::AP => "AP",
            CriterionKind::Compound => "Compound",
        };
        f.write_str(s)
    }
}

/// Numerator df of the global F test inside DP.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestDfConvention {
    /// `q = p - 1`
    #[default]
    ExcludeIntercept,
    /// `q = p`
    IncludeIntercept,
}

/// Power applied to the F quantile in the DP denominator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DpExponent {
    /// Same as the numerator df `q`.
    #[default]
    TestDf,
    /// Number of parameters `p`.
    Parameters,
}

fn default_alpha() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionConfig {
    pub kind: CriterionKind,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Diagonal of `W`; all ones when absent.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    /// `(k_DP, k_AP, k_DF)`, compound only.
    #[serde(default)]
    pub kappa: Option<[f64; 3]>,
    #[serde(default)]
    pub test_df_convention: TestDfConvention,
    #[serde(default)]
    pub dp_exponent: DpExponent,
    /// Display label, e.g. `C1`.
    #[serde(default)]
    pub label: Option<String>,
}

impl CriterionConfig {
    pub fn new(kind: CriterionKind) -> Self {
        Self {
            kind,
            alpha: default_alpha(),
            weights: None,
            kappa: None,
            test_df_convention: TestDfConvention::default(),
            dp_exponent: DpExponent::default(),
            label: None,
        }
    }

    pub fn compound(kappa: [f64; 3]) -> Self {
        Self {
            kappa: Some(kappa),
            ..Self::new(CriterionKind::Compound)
        }
    }

    /// `kappa = (0.8, 0, 0.2)`.
    pub fn c1() -> Self {
        Self {
            label: Some("C1".into()),
            ..Self::compound([0.8, 0.0, 0.2])
        }
    }

    /// `kappa = (0, 0.8, 0.2)`.
    pub fn c2() -> Self {
        Self {
            label: Some("C2".into()),
            ..Self::compound([0.0, 0.8, 0.2])
        }
    }

    /// Name shown in tables.
    pub fn label(&self) -> String {
        match (&self.label, self.kind) {
            (Some(l), _) => l.clone(),
            (None, CriterionKind::Compound) => {
                let k = self.kappa.unwrap_or_default();
                format!("C({},{},{})", k[0], k[1], k[2])
            }
            (None, k) => k.to_string(),
        }
    }

    /// Same alpha, weights and conventions, different kind.
    pub fn with_kind(&self, kind: CriterionKind) -> Self {
        Self {
            kind,
            kappa: None,
            label: None,
            ..self.clone()
        }
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if let Some(w) = &self.weights {
            if w.len() != p {
                return Err(Error::InvalidArgument(format!(
                    "{} weights for {p} parameters",
                    w.len()
                )));
            }
            if w.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                return Err(Error::InvalidArgument("weights must be positive".into()));
            }
        }
        if self.kind == CriterionKind::Compound {
            let k = self
                .kappa
                .ok_or_else(|| Error::InvalidArgument("compound criterion needs kappa".into()))?;
            if k.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                return Err(Error::InvalidArgument("kappa entries must be non-negative".into()));
            }
            if (k.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument("kappa must sum to 1".into()));
            }
        }
        Ok(())
    }
}

impl FromStr for CriterionConfig {
    type Err = Error;

    /// Accepts `D`, `A`, `DP`, `AP`, `C1`, `C2` (case-insensitive).
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "D" => Ok(Self::new(CriterionKind::D)),
            "A" => Ok(Self::new(CriterionKind::A)),
            "DP" => Ok(Self::new(CriterionKind::DP)),
            "AP" => Ok(Self::new(CriterionKind::AP)),
            "C1" => Ok(Self::c1()),
            "C2" => Ok(Self::c2()),
            "C" | "COMPOUND" => Ok(Self::new(CriterionKind::Compound)),
            other => Err(Error::InvalidArgument(format!("unknown criterion `{other}`"))),
        }
    }
}

/// Raw criterion values of the DP and AP optima, needed by compound
/// criteria.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CompoundReferences {
    pub dp: Option<f64>,
    pub ap: Option<f64>,
}

/// Compound value together with its components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompoundParts {
    pub value: f64,
    pub e_dp: Option<f64>,
    pub e_ap: Option<f64>,
    pub e_df: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub criterion: String,
    pub raw_value: f64,
    /// `None` where the display value is undefined (modified criteria at
    /// `d = 0`).
    pub scaled_value: Option<f64>,
    pub pedf: usize,
    pub estimable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub components: Option<CompoundParts>,
}

/// Work buffers for evaluating one information matrix.
#[derive(Debug, Clone)]
pub struct Scratch {
    chol: Vec<f64>,
    diag: Vec<f64>,
    work: Vec<f64>,
}

impl Scratch {
    pub fn new(p: usize) -> Self {
        Self {
            chol: vec![0.0; p * p],
            diag: vec![0.0; p],
            work: vec![0.0; p],
        }
    }
}

/// Spectral summary of an information matrix used by every criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoSummary {
    pub singular: bool,
    /// `|X'X|`, 0 when singular.
    pub det: f64,
    /// `tr(W (X'X)^-1)`, infinite when singular.
    pub weighted_trace: f64,
}

/// A criterion bound to a model size, with F quantiles tabulated by pedf.
#[derive(Debug, Clone)]
pub struct Criterion {
    config: CriterionConfig,
    p: usize,
    q: usize,
    weights: Vec<f64>,
    /// `F(q, d; 1 - alpha)` indexed by `d` (entry 0 unused).
    f_global: Vec<f64>,
    /// `F(1, d; 1 - alpha)` indexed by `d`.
    f_single: Vec<f64>,
    refs: CompoundReferences,
}

impl Criterion {
    /// Tabulates quantiles for `d` up to `max_pedf`; larger `d` values are
    /// computed on demand.
    pub fn new(config: &CriterionConfig, p: usize, max_pedf: usize) -> Result<Self> {
        config.validate(p)?;
        let q = match config.test_df_convention {
            TestDfConvention::ExcludeIntercept => p.saturating_sub(1).max(1),
            TestDfConvention::IncludeIntercept => p,
        };
        let prob = 1.0 - config.alpha;
        let mut f_global = vec![f64::NAN];
        let mut f_single = vec![f64::NAN];
        for d in 1..=max_pedf {
            f_global.push(f_quantile(prob, q as u32, d as u32)?);
            f_single.push(f_quantile(prob, 1, d as u32)?);
        }
        Ok(Self {
            config: config.clone(),
            p,
            q,
            weights: config.weights.clone().unwrap_or_else(|| vec![1.0; p]),
            f_global,
            f_single,
            refs: CompoundReferences::default(),
        })
    }

    pub fn with_references(mut self, refs: CompoundReferences) -> Self {
        self.refs = refs;
        self
    }

    pub fn config(&self) -> &CriterionConfig {
        &self.config
    }

    pub fn kind(&self) -> CriterionKind {
        self.config.kind
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Numerator df of the global test.
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn references(&self) -> CompoundReferences {
        self.refs
    }

    /// `F(q, d; 1 - alpha)`; `None` for `d = 0`.
    pub fn f_global(&self, d: usize) -> Option<f64> {
        match d {
            0 => None,
            d if d < self.f_global.len() => Some(self.f_global[d]),
            d => f_quantile(1.0 - self.config.alpha, self.q as u32, d as u32).ok(),
        }
    }

    /// `F(1, d; 1 - alpha)`; `None` for `d = 0`.
    pub fn f_single(&self, d: usize) -> Option<f64> {
        match d {
            0 => None,
            d if d < self.f_single.len() => Some(self.f_single[d]),
            d => f_quantile(1.0 - self.config.alpha, 1, d as u32).ok(),
        }
    }

    fn dp_power(&self) -> f64 {
        match self.config.dp_exponent {
            DpExponent::TestDf => self.q as f64,
            DpExponent::Parameters => self.p as f64,
        }
    }

    /// Determinant and weighted trace of a row-major `p x p` information
    /// buffer.
    pub fn summarize(&self, info: &[f64], scratch: &mut Scratch) -> InfoSummary {
        let p = self.p;
        scratch.chol.copy_from_slice(info);
        if !cholesky_in_place(&mut scratch.chol, p) {
            return InfoSummary {
                singular: true,
                det: 0.0,
                weighted_trace: f64::INFINITY,
            };
        }
        let det = cholesky_logdet(&scratch.chol, p).exp();
        let needs_trace = !matches!(self.kind(), CriterionKind::D | CriterionKind::DP)
            || self.config.kappa.is_some_and(|k| k[1] > 0.0);
        let weighted_trace = if needs_trace {
            cholesky_inverse_diag(&scratch.chol, p, &mut scratch.diag, &mut scratch.work);
            scratch
                .diag
                .iter()
                .zip(&self.weights)
                .map(|(v, w)| v * w)
                .sum()
        } else {
            f64::NAN
        };
        InfoSummary {
            singular: false,
            det,
            weighted_trace,
        }
    }

    fn dp_from(&self, s: &InfoSummary, d: usize) -> f64 {
        match (s.singular, self.f_global(d)) {
            (false, Some(f)) => s.det / f.powf(self.dp_power()),
            _ => 0.0,
        }
    }

    fn ap_from(&self, s: &InfoSummary, d: usize) -> f64 {
        match (s.singular, self.f_single(d)) {
            (false, Some(f)) => 1.0 / (f * s.weighted_trace),
            _ => 0.0,
        }
    }

    fn compound_from(&self, s: &InfoSummary, d: usize, n: usize) -> CompoundParts {
        let kappa = self.config.kappa.unwrap_or([0.0; 3]);
        let e_df = (n - d) as f64 / n as f64;
        let e_dp = if kappa[0] > 0.0 {
            let v = self.dp_from(s, d);
            match self.refs.dp {
                Some(r) if v > 0.0 && r > 0.0 => Some((v / r).powf(1.0 / self.p as f64)),
                _ => None,
            }
        } else {
            None
        };
        let e_ap = if kappa[1] > 0.0 {
            let v = self.ap_from(s, d);
            match self.refs.ap {
                Some(r) if v > 0.0 && r > 0.0 => Some(v / r),
                _ => None,
            }
        } else {
            None
        };
        let mut value = 1.0;
        for (k, e) in [(kappa[0], e_dp), (kappa[1], e_ap), (kappa[2], Some(e_df))] {
            if k > 0.0 {
                value *= e.map_or(0.0, |e| e.powf(k));
            }
        }
        if s.singular {
            value = 0.0;
        }
        CompoundParts {
            value,
            e_dp,
            e_ap,
            e_df,
        }
    }

    /// Raw criterion value from a summary, pedf and run count.
    pub fn value_from_summary(&self, s: &InfoSummary, d: usize, n: usize) -> f64 {
        match self.kind() {
            CriterionKind::D => s.det,
            CriterionKind::A => {
                if s.singular {
                    0.0
                } else {
                    1.0 / s.weighted_trace
                }
            }
            CriterionKind::DP => self.dp_from(s, d),
            CriterionKind::AP => self.ap_from(s, d),
            CriterionKind::Compound => self.compound_from(s, d, n).value,
        }
    }

    /// Raw criterion value of an information buffer.
    pub fn value_from_info(&self, info: &[f64], d: usize, n: usize, scratch: &mut Scratch) -> f64 {
        let s = self.summarize(info, scratch);
        self.value_from_summary(&s, d, n)
    }

    pub fn value(&self, design: &Design, space: &DesignSpace) -> f64 {
        let info = info_matrix(design, space);
        let mut scratch = Scratch::new(self.p);
        self.value_from_info(info.as_slice(), pure_error_df(design), design.n(), &mut scratch)
    }

    pub fn evaluate(&self, design: &Design, space: &DesignSpace) -> EvalResult {
        let info = info_matrix(design, space);
        let mut scratch = Scratch::new(self.p);
        let s = self.summarize(info.as_slice(), &mut scratch);
        let d = pure_error_df(design);
        let raw = self.value_from_summary(&s, d, design.n());
        let components = (self.kind() == CriterionKind::Compound)
            .then(|| self.compound_from(&s, d, design.n()));
        EvalResult {
            criterion: self.config.label(),
            raw_value: raw,
            scaled_value: self.scaled(raw, d),
            pedf: d,
            estimable: !s.singular,
            components,
        }
    }

    /// Table display value. D: `|X'X|^(1/p)`; A and AP: `p * raw`;
    /// DP: `|X'X|^(1/p) / F(q, d)`; compound: raw.
    pub fn scaled(&self, raw: f64, d: usize) -> Option<f64> {
        scaled_display(self, raw, d)
    }

    /// Efficiency of `value` relative to `reference`, on the `1/p` scale for
    /// determinant criteria. `None` when a modified or compound criterion
    /// scores 0.
    pub fn efficiency(&self, value: f64, reference: f64) -> Option<f64> {
        if value <= 0.0 {
            return if self.kind() == CriterionKind::D || self.kind() == CriterionKind::A {
                Some(0.0)
            } else {
                None
            };
        }
        if !(reference > 0.0) {
            return None;
        }
        let ratio = value / reference;
        Some(if self.kind().is_determinant() {
            ratio.powf(1.0 / self.p as f64)
        } else {
            ratio
        })
    }
}

/// Display scaling used in the criterion tables.
pub fn scaled_display(criterion: &Criterion, raw: f64, d: usize) -> Option<f64> {
    let p = criterion.p as f64;
    match criterion.kind() {
        CriterionKind::D => Some(raw.max(0.0).powf(1.0 / p)),
        CriterionKind::A | CriterionKind::AP => {
            if criterion.kind() == CriterionKind::AP && d == 0 {
                None
            } else {
                Some(p * raw)
            }
        }
        CriterionKind::DP => {
            let f = criterion.f_global(d)?;
            let det = raw * f.powf(criterion.dp_power());
            Some(det.powf(1.0 / p) / f)
        }
        CriterionKind::Compound => Some(raw),
    }
}

/// Convenience wrappers taking a design directly.
pub fn phi_d(design: &Design, space: &DesignSpace) -> f64 {
    crit(CriterionConfig::new(CriterionKind::D), design, space)
}

pub fn phi_a(design: &Design, space: &DesignSpace, weights: Option<Vec<f64>>) -> f64 {
    let cfg = CriterionConfig {
        weights,
        ..CriterionConfig::new(CriterionKind::A)
    };
    crit(cfg, design, space)
}

pub fn phi_dp(design: &Design, space: &DesignSpace, alpha: f64, convention: TestDfConvention) -> f64 {
    let cfg = CriterionConfig {
        alpha,
        test_df_convention: convention,
        ..CriterionConfig::new(CriterionKind::DP)
    };
    crit(cfg, design, space)
}

pub fn phi_ap(design: &Design, space: &DesignSpace, alpha: f64, weights: Option<Vec<f64>>) -> f64 {
    let cfg = CriterionConfig {
        alpha,
        weights,
        ..CriterionConfig::new(CriterionKind::AP)
    };
    crit(cfg, design, space)
}

fn crit(cfg: CriterionConfig, design: &Design, space: &DesignSpace) -> f64 {
    Criterion::new(&cfg, space.p(), design.n())
        .expect("valid default configuration")
        .value(design, space)
}

/// Efficiency of `design` against `reference` under `config`. For DF
/// efficiency use [`crate::design::df_efficiency`].
pub fn efficiency(
    design: &Design,
    space: &DesignSpace,
    config: &CriterionConfig,
    reference: Option<&Design>,
    refs: CompoundReferences,
) -> Result<Option<f64>> {
    let reference =
        reference.ok_or_else(|| Error::MissingReference(config.label()))?;
    let c = Criterion::new(config, space.p(), design.n().max(reference.n()))?
        .with_references(refs);
    Ok(c.efficiency(c.value(design, space), c.value(reference, space)))
}
