//! Exact optimal designs for factorial experiments.
//!
//! Designs are multisets of points from a finite candidate set (by default
//! the 27 points of a three-factor, three-level factorial). The crate
//! evaluates standard (D, A), pure-error-aware (DP, AP) and compound
//! criteria, searches for optimal `n`-run designs with a multi-start point
//! exchange, and measures how robust a design is to missing runs, to a change
//! of model, and to a change of criterion.
//!
//! With the default `parallel` feature, search restarts, Monte Carlo draws
//! and breakdown scans run on the rayon thread pool. Results are identical
//! with and without the feature.

pub mod criteria;
pub mod design;
pub mod error;
pub mod fdist;
pub mod linalg;
pub mod model;
pub mod published;
pub mod robustness;
pub mod search;
pub mod study;

pub use criteria::{Criterion, CriterionConfig, CriterionKind, EvalResult};
pub use design::{Design, DesignFile, DesignSpace};
pub use error::{Error, Result};
pub use model::{builtin_model, enumerate_candidates, CandidateSet, FactorSpec, ModelSpec};
pub use search::{optimize, SearchConfig, SearchResult};
