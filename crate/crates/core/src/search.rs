//! Multi-start point-exchange search for exact optimal designs.
//!
//! Each restart draws a random nonsingular `n`-run design and repeats
//! best-improvement exchange passes until no single swap of a run for a
//! candidate point raises the criterion. Restarts are independent: restart
//! `r` uses a ChaCha8 generator seeded with the user seed and switched to
//! stream `r`, so results do not depend on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::criteria::{CompoundReferences, Criterion, CriterionConfig, CriterionKind, Scratch};
use crate::design::{info_matrix, pure_error_df, Design, DesignFile, DesignSpace};
use crate::error::{Error, Result};
use crate::linalg::logdet_spd;

/// Minimum relative gain for a swap to count as an improvement.
pub const IMPROVEMENT_TOL: f64 = 1e-12;

const MAX_START_DRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub n: usize,
    pub restarts: usize,
    pub max_passes: usize,
    pub seed: u64,
}

impl SearchConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            restarts: 200,
            max_passes: 50,
            seed,
        }
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }
}

/// Per-restart outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartTrace {
    pub restart: usize,
    pub value: f64,
    pub passes: usize,
    pub pedf: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchResult {
    pub model: String,
    pub criterion: String,
    pub n: usize,
    pub seed: u64,
    pub best_design: Design,
    pub best_value: f64,
    pub scaled_value: Option<f64>,
    pub pedf: usize,
    pub best_restart: usize,
    pub restarts_hitting_best: usize,
    pub references: CompoundReferences,
    pub trace: Vec<RestartTrace>,
}

impl SearchResult {
    pub fn design_file(&self, space: &DesignSpace) -> DesignFile {
        DesignFile::from_design(&self.best_design, space.candidates())
    }
}

/// Generator for restart `restart`.
pub fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// Uniform draw of `n` candidates with replacement, redrawn until the
/// information matrix is nonsingular.
pub fn random_start<R: Rng + ?Sized>(
    space: &DesignSpace,
    n: usize,
    require_nonsingular: bool,
    rng: &mut R,
) -> Result<Design> {
    let size = space.candidates().len();
    if size == 0 || n == 0 {
        return Err(Error::Infeasible("empty candidate set or zero runs".into()));
    }
    for _ in 0..MAX_START_DRAWS {
        let refs: Vec<usize> = (0..n).map(|_| rng.gen_range(0..size)).collect();
        let design = Design::from_refs_unchecked(refs);
        if !require_nonsingular || !logdet_spd(&info_matrix(&design, space)).is_singular {
            return Ok(design);
        }
    }
    Err(Error::Infeasible(format!(
        "no nonsingular {n}-run start found in {MAX_START_DRAWS} draws for model {} (p = {})",
        space.model().name(),
        space.p()
    )))
}

/// Mutable search state: the design plus its information matrix and
/// replication counts.
struct ExchangeState {
    design: Design,
    info: Vec<f64>,
    counts: Vec<usize>,
    distinct: usize,
}

impl ExchangeState {
    fn new(design: Design, space: &DesignSpace) -> Self {
        let info = info_matrix(&design, space).as_slice().to_vec();
        let mut counts = vec![0; space.candidates().len()];
        for &r in design.refs() {
            counts[r] += 1;
        }
        let distinct = counts.iter().filter(|&&c| c > 0).count();
        Self {
            design,
            info,
            counts,
            distinct,
        }
    }

    fn pedf(&self) -> usize {
        self.design.n() - self.distinct
    }
}

fn improves(new: f64, old: f64) -> bool {
    if old <= 0.0 {
        new > 0.0
    } else {
        new > old * (1.0 + IMPROVEMENT_TOL)
    }
}

/// Best single swap over all (run, candidate) pairs.
fn best_swap(
    state: &ExchangeState,
    space: &DesignSpace,
    criterion: &Criterion,
    scratch: &mut Scratch,
) -> Option<(f64, usize, usize)> {
    let p = space.p();
    let n = state.design.n();
    let mut without = vec![0.0; p * p];
    let mut trial = vec![0.0; p * p];
    let mut best: Option<(f64, usize, usize)> = None;
    for (i, &old) in state.design.refs().iter().enumerate() {
        without.copy_from_slice(&state.info);
        add_sym_outer(&mut without, space.row(old), -1.0);
        let distinct_without = state.distinct - usize::from(state.counts[old] == 1);
        for c in 0..space.candidates().len() {
            if c == old {
                continue;
            }
            trial.copy_from_slice(&without);
            add_sym_outer(&mut trial, space.row(c), 1.0);
            let distinct = distinct_without + usize::from(state.counts[c] == 0);
            let value = criterion.value_from_info(&trial, n - distinct, n, scratch);
            if best.map_or(true, |(b, _, _)| value > b) {
                best = Some((value, i, c));
            }
        }
    }
    best
}

fn add_sym_outer(m: &mut [f64], v: &[f64], w: f64) {
    let p = v.len();
    for i in 0..p {
        let vi = w * v[i];
        if vi == 0.0 {
            continue;
        }
        for j in 0..p {
            m[i * p + j] += vi * v[j];
        }
    }
}

fn apply_swap(state: &mut ExchangeState, space: &DesignSpace, run: usize, candidate: usize) {
    let old = state.design.refs()[run];
    add_sym_outer(&mut state.info, space.row(old), -1.0);
    add_sym_outer(&mut state.info, space.row(candidate), 1.0);
    state.counts[old] -= 1;
    if state.counts[old] == 0 {
        state.distinct -= 1;
    }
    if state.counts[candidate] == 0 {
        state.distinct += 1;
    }
    state.counts[candidate] += 1;
    state.design.refs_mut()[run] = candidate;
}

/// One best-improvement pass. Ties between equal swaps go to the lowest
/// (run, candidate) pair. Returns the (possibly) updated design and whether
/// a swap was applied.
pub fn exchange_pass(
    design: &Design,
    space: &DesignSpace,
    criterion: &Criterion,
) -> (Design, bool) {
    let mut state = ExchangeState::new(design.clone(), space);
    let mut scratch = Scratch::new(space.p());
    let improved = pass_in_place(&mut state, space, criterion, &mut scratch);
    (state.design, improved)
}

fn pass_in_place(
    state: &mut ExchangeState,
    space: &DesignSpace,
    criterion: &Criterion,
    scratch: &mut Scratch,
) -> bool {
    let current = criterion.value_from_info(&state.info, state.pedf(), state.design.n(), scratch);
    match best_swap(state, space, criterion, scratch) {
        Some((value, run, cand)) if improves(value, current) => {
            apply_swap(state, space, run, cand);
            true
        }
        _ => false,
    }
}

/// Runs exchange passes from `start` until no swap improves or `max_passes`
/// is reached. Returns the final design and the number of passes that
/// applied a swap.
pub fn local_search(
    start: Design,
    space: &DesignSpace,
    criterion: &Criterion,
    max_passes: usize,
) -> (Design, usize) {
    let mut state = ExchangeState::new(start, space);
    let mut scratch = Scratch::new(space.p());
    let mut passes = 0;
    while passes < max_passes && pass_in_place(&mut state, space, criterion, &mut scratch) {
        passes += 1;
    }
    (state.design, passes)
}

fn run_restart(
    restart: usize,
    space: &DesignSpace,
    criterion: &Criterion,
    config: &SearchConfig,
) -> Option<(Design, RestartTrace)> {
    let mut rng = restart_rng(config.seed, restart);
    let start = random_start(space, config.n, true, &mut rng).ok()?;
    let (design, passes) = local_search(start, space, criterion, config.max_passes);
    let value = criterion.value(&design, space);
    let pedf = pure_error_df(&design);
    Some((
        design,
        RestartTrace {
            restart,
            value,
            passes,
            pedf,
        },
    ))
}

#[cfg(feature = "parallel")]
fn run_all(
    space: &DesignSpace,
    criterion: &Criterion,
    config: &SearchConfig,
) -> Vec<Option<(Design, RestartTrace)>> {
    use rayon::prelude::*;
    (0..config.restarts)
        .into_par_iter()
        .map(|r| run_restart(r, space, criterion, config))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn run_all(
    space: &DesignSpace,
    criterion: &Criterion,
    config: &SearchConfig,
) -> Vec<Option<(Design, RestartTrace)>> {
    (0..config.restarts)
        .map(|r| run_restart(r, space, criterion, config))
        .collect()
}

/// Reference values for the active components of a compound criterion,
/// found by searching the component criteria with the same settings.
pub fn compound_references(
    space: &DesignSpace,
    config: &CriterionConfig,
    search: &SearchConfig,
) -> Result<CompoundReferences> {
    let kappa = config.kappa.unwrap_or([0.0; 3]);
    let mut refs = CompoundReferences::default();
    if kappa[0] > 0.0 {
        refs.dp = Some(optimize(space, &config.with_kind(CriterionKind::DP), search)?.best_value);
    }
    if kappa[1] > 0.0 {
        refs.ap = Some(optimize(space, &config.with_kind(CriterionKind::AP), search)?.best_value);
    }
    Ok(refs)
}

/// Best design over all restarts.
pub fn optimize(
    space: &DesignSpace,
    config: &CriterionConfig,
    search: &SearchConfig,
) -> Result<SearchResult> {
    let refs = if config.kind == CriterionKind::Compound {
        compound_references(space, config, search)?
    } else {
        CompoundReferences::default()
    };
    optimize_with_references(space, config, search, refs)
}

/// Like [`optimize`] but with compound references supplied by the caller.
pub fn optimize_with_references(
    space: &DesignSpace,
    config: &CriterionConfig,
    search: &SearchConfig,
    refs: CompoundReferences,
) -> Result<SearchResult> {
    let p = space.p();
    if search.n < p {
        return Err(Error::Infeasible(format!(
            "{} runs cannot estimate {p} parameters of model {}",
            search.n,
            space.model().name()
        )));
    }
    if search.restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let criterion = Criterion::new(config, p, search.n.saturating_sub(1))?.with_references(refs);
    let outcomes = run_all(space, &criterion, search);

    let mut best: Option<(Design, RestartTrace)> = None;
    let mut trace = Vec::with_capacity(outcomes.len());
    for (design, t) in outcomes.into_iter().flatten() {
        trace.push(t.clone());
        // strict comparison keeps the lowest restart index on ties
        if best.as_ref().map_or(true, |(_, b)| improves(t.value, b.value)) {
            best = Some((design, t));
        }
    }
    let (design, best_trace) = best.ok_or_else(|| {
        Error::Infeasible(format!(
            "every restart failed to find a nonsingular {}-run design",
            search.n
        ))
    })?;
    if !(best_trace.value > 0.0) {
        return Err(Error::Infeasible(format!(
            "no {}-run design has a positive {} value",
            search.n,
            config.label()
        )));
    }
    let hits = trace
        .iter()
        .filter(|t| !improves(best_trace.value, t.value))
        .count();
    let best_value = criterion.value(&design, space);
    let pedf = pure_error_df(&design);
    Ok(SearchResult {
        model: space.model().name().to_string(),
        criterion: config.label(),
        n: search.n,
        seed: search.seed,
        best_design: design.canonical(),
        best_value,
        scaled_value: criterion.scaled(best_value, pedf),
        pedf,
        best_restart: best_trace.restart,
        restarts_hitting_best: hits,
        references: refs,
        trace,
    })
}
