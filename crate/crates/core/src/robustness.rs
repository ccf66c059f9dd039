//! Robustness of a design to missing runs, a change of model, and a change
//! of criterion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::criteria::{CompoundReferences, Criterion, CriterionConfig};
use crate::design::{info_from_refs, info_matrix, model_matrix, Design, DesignSpace};
use crate::error::{Error, Result};
use crate::linalg::{inverse_spd, rank, RANK_TOL};

/// Draws per Monte Carlo chunk. Chunk `k` uses the ChaCha8 stream `k` of the
/// seeded generator.
pub const MC_CHUNK: usize = 1000;

/// Whether all parameters stay estimable when only rows with
/// `keep[i] == true` are observed.
pub fn estimable_after(design: &Design, space: &DesignSpace, keep: &[bool]) -> bool {
    assert_eq!(keep.len(), design.n(), "mask length must equal the run count");
    estimable_refs(&design.subdesign(keep), space)
}

fn estimable_refs(refs: &[usize], space: &DesignSpace) -> bool {
    let p = space.p();
    if refs.len() < p {
        return false;
    }
    rank(&info_from_refs(refs, space), RANK_TOL) == p
}

/// Which quantifier the breakdown number uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BreakdownSemantics {
    /// Smallest `s` such that some removal of `s` runs breaks estimability.
    ExistsMin,
    /// Largest `s` such that every removal of `s` runs keeps estimability.
    GuaranteedMax,
}

/// Both breakdown numbers of a design. A design that is already singular
/// reports 0 for both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BreakdownNumbers {
    pub exists_min: usize,
    pub guaranteed_max: usize,
}

pub fn breakdown_number(design: &Design, space: &DesignSpace, semantics: BreakdownSemantics) -> usize {
    let b = breakdown_numbers(design, space);
    match semantics {
        BreakdownSemantics::ExistsMin => b.exists_min,
        BreakdownSemantics::GuaranteedMax => b.guaranteed_max,
    }
}

/// Exhaustive scan over removal sets of increasing size.
pub fn breakdown_numbers(design: &Design, space: &DesignSpace) -> BreakdownNumbers {
    let n = design.n();
    if !estimable_refs(design.refs(), space) {
        return BreakdownNumbers {
            exists_min: 0,
            guaranteed_max: 0,
        };
    }
    for s in 1..=n {
        if some_removal_breaks(design, space, s) {
            return BreakdownNumbers {
                exists_min: s,
                guaranteed_max: s - 1,
            };
        }
    }
    unreachable!("removing every run always breaks estimability")
}

/// Does any size-`s` removal set make the design inestimable?
fn some_removal_breaks(design: &Design, space: &DesignSpace, s: usize) -> bool {
    let n = design.n();
    let check_first = |first: usize| -> bool {
        let mut removed = vec![first];
        search_removals(design, space, s, first + 1, &mut removed)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().any(check_first)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).any(check_first)
    }
}

fn search_removals(
    design: &Design,
    space: &DesignSpace,
    s: usize,
    next: usize,
    removed: &mut Vec<usize>,
) -> bool {
    let n = design.n();
    if removed.len() == s {
        let kept: Vec<usize> = (0..n)
            .filter(|i| !removed.contains(i))
            .map(|i| design.refs()[i])
            .collect();
        return !estimable_refs(&kept, space);
    }
    let still_needed = s - removed.len();
    for i in next..=(n - still_needed) {
        removed.push(i);
        let hit = search_removals(design, space, s, i + 1, removed);
        removed.pop();
        if hit {
            return true;
        }
    }
    false
}

/// Monte Carlo breakdown probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakdownProbability {
    pub estimate: f64,
    pub stderr: f64,
    pub reps: usize,
    pub p_missing: f64,
    pub seed: u64,
}

/// Each run goes missing independently with probability `p_missing`; the
/// estimate is the share of draws that lose estimability.
pub fn breakdown_probability(
    design: &Design,
    space: &DesignSpace,
    p_missing: f64,
    reps: usize,
    seed: u64,
) -> Result<BreakdownProbability> {
    if !(p_missing > 0.0 && p_missing < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "missing probability {p_missing} outside (0, 1)"
        )));
    }
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be at least 1".into()));
    }
    let chunks = reps.div_ceil(MC_CHUNK);
    let run_chunk = |k: usize| -> usize {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let draws = MC_CHUNK.min(reps - k * MC_CHUNK);
        let mut keep = vec![true; design.n()];
        let mut broken = 0;
        for _ in 0..draws {
            for flag in keep.iter_mut() {
                *flag = rng.gen::<f64>() >= p_missing;
            }
            if !estimable_refs(&design.subdesign(&keep), space) {
                broken += 1;
            }
        }
        broken
    };
    #[cfg(feature = "parallel")]
    let broken: usize = {
        use rayon::prelude::*;
        (0..chunks).into_par_iter().map(run_chunk).sum()
    };
    #[cfg(not(feature = "parallel"))]
    let broken: usize = (0..chunks).map(run_chunk).sum();

    let est = broken as f64 / reps as f64;
    Ok(BreakdownProbability {
        estimate: est,
        stderr: (est * (1.0 - est) / reps as f64).sqrt(),
        reps,
        p_missing,
        seed,
    })
}

/// Leverages `H_ii` of the hat matrix `X (X'X)^-1 X'`.
pub fn leverages(design: &Design, space: &DesignSpace) -> Result<Vec<f64>> {
    let inv = inverse_spd(&info_matrix(design, space))?;
    let x = model_matrix(design, space);
    let p = space.p();
    Ok((0..x.rows())
        .map(|i| {
            let f = x.row(i);
            let mut h = 0.0;
            for a in 0..p {
                for b in 0..p {
                    h += f[a] * inv[(a, b)] * f[b];
                }
            }
            h
        })
        .collect())
}

/// Population variance of the leverages.
pub fn leverage_variance(design: &Design, space: &DesignSpace) -> Result<f64> {
    let v = leverages(design, space)?;
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    Ok(v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n)
}

/// Efficiency of `design` relative to `reference` under a criterion. Unlike
/// [`Criterion::efficiency`], a zero score is always `None`.
fn ratio(
    config: &CriterionConfig,
    design: &Design,
    reference: &Design,
    space: &DesignSpace,
    refs: CompoundReferences,
) -> Result<Option<f64>> {
    let c = Criterion::new(config, space.p(), design.n().max(reference.n()))?.with_references(refs);
    let v = c.value(design, space);
    if v <= 0.0 {
        return Ok(None);
    }
    Ok(c.efficiency(v, c.value(reference, space)))
}

/// Model-change robustness: a design built for a larger model, evaluated
/// under the submodel `eval_space`, relative to the submodel's own optimum.
/// Determinant criteria are compared on the `1/p` scale.
pub fn psi2(
    config: &CriterionConfig,
    design_for_m: &Design,
    eval_space: &DesignSpace,
    reference_optimum: Option<&Design>,
    refs: CompoundReferences,
) -> Result<Option<f64>> {
    let reference =
        reference_optimum.ok_or_else(|| Error::MissingReference(config.label()))?;
    ratio(config, design_for_m, reference, eval_space, refs)
}

/// Criterion-change robustness: design `k` scored by criterion `k'`
/// relative to the `k'`-optimum.
pub fn psi3(
    design_k: &Design,
    design_kprime: &Design,
    config_kprime: &CriterionConfig,
    space: &DesignSpace,
    refs: CompoundReferences,
) -> Result<Option<f64>> {
    ratio(config_kprime, design_k, design_kprime, space, refs)
}

/// Missing-observation robustness of one design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub bdn_exists: usize,
    pub bdn_guaranteed: usize,
    pub bdp_estimate: f64,
    pub bdp_mc_stderr: f64,
    /// `None` when the design is singular.
    pub sigma2_v: Option<f64>,
    pub reps: usize,
    pub p_missing: f64,
    pub seed: u64,
}

pub fn robustness_report(
    design: &Design,
    space: &DesignSpace,
    p_missing: f64,
    reps: usize,
    seed: u64,
) -> Result<RobustnessReport> {
    let bdn = breakdown_numbers(design, space);
    let bdp = breakdown_probability(design, space, p_missing, reps, seed)?;
    Ok(RobustnessReport {
        bdn_exists: bdn.exists_min,
        bdn_guaranteed: bdn.guaranteed_max,
        bdp_estimate: bdp.estimate,
        bdp_mc_stderr: bdp.stderr,
        sigma2_v: leverage_variance(design, space).ok(),
        reps,
        p_missing,
        seed,
    })
}
