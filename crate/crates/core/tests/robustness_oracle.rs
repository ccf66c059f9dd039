mod common;

use optdesign::criteria::{CompoundReferences, CriterionConfig, CriterionKind};
use optdesign::robustness::{
    breakdown_number, breakdown_numbers, breakdown_probability, estimable_after, leverage_variance,
    leverages, psi3, BreakdownSemantics,
};
use optdesign::search::{random_start, restart_rng};
use optdesign::{builtin_model, enumerate_candidates, optimize, Design, DesignSpace, FactorSpec, SearchConfig};
use proptest::prelude::*;

fn space(model: &str) -> DesignSpace {
    DesignSpace::new(enumerate_candidates(&FactorSpec::three_level(3)), builtin_model(model).unwrap()).unwrap()
}

fn int_rows(design: &Design, space: &DesignSpace) -> Vec<Vec<i128>> {
    design
        .refs()
        .iter()
        .map(|&i| common::int_row(&common::to_int(space.candidates().point(i)), space.model()))
        .collect()
}

fn kept_rank(rows: &[Vec<i128>], mask: u32) -> usize {
    let kept: Vec<Vec<i128>> = rows
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, r)| r.clone())
        .collect();
    if kept.is_empty() {
        0
    } else {
        common::int_rank(&kept)
    }
}

/// Probability that independent row loss leaves X'X singular, summed over
/// every keep mask.
fn exact_breakdown_probability(design: &Design, space: &DesignSpace, p_missing: f64) -> f64 {
    let rows = int_rows(design, space);
    let n = rows.len() as u32;
    let p = space.p();
    (0u32..1 << n)
        .filter(|&mask| kept_rank(&rows, mask) < p)
        .map(|mask| {
            let kept = mask.count_ones() as i32;
            (1.0 - p_missing).powi(kept) * p_missing.powi(n as i32 - kept)
        })
        .sum()
}

/// Smallest number of removed rows that can make X'X singular.
fn brute_force_bdn(design: &Design, space: &DesignSpace) -> usize {
    let rows = int_rows(design, space);
    let n = rows.len() as u32;
    let full = (1u32 << n) - 1;
    (0..=n)
        .find(|&s| {
            (0u32..1 << n)
                .filter(|m| (full ^ m).count_ones() == s)
                .any(|m| kept_rank(&rows, m) < space.p())
        })
        .unwrap() as usize
}

fn design(space: &DesignSpace, points: &[[f64; 3]]) -> Design {
    let refs = points.iter().map(|x| space.candidates().index_of(x).unwrap()).collect();
    Design::new(refs, space.candidates()).unwrap()
}

fn replicated_cube(space: &DesignSpace) -> Design {
    let mut pts = Vec::new();
    for _ in 0..2 {
        for a in [-1.0, 1.0] {
            for b in [-1.0, 1.0] {
                for c in [-1.0, 1.0] {
                    pts.push([a, b, c]);
                }
            }
        }
    }
    design(space, &pts)
}

#[test]
fn monte_carlo_breakdown_probability_matches_exact_masks() {
    let s = space("M1");
    let d = design(
        &s,
        &[
            [-1.0, -1.0, -1.0],
            [1.0, -1.0, -1.0],
            [-1.0, 1.0, -1.0],
            [-1.0, -1.0, 1.0],
            [1.0, 1.0, 1.0],
            [0.0, 0.0, 0.0],
            [1.0, 0.0, -1.0],
            [0.0, 1.0, 1.0],
            [-1.0, 0.0, 1.0],
            [1.0, 1.0, -1.0],
            [0.0, -1.0, 0.0],
            [1.0, -1.0, 1.0],
        ],
    );
    for p_missing in [0.2, 0.4] {
        let exact = exact_breakdown_probability(&d, &s, p_missing);
        let mc = breakdown_probability(&d, &s, p_missing, 40_000, 17).unwrap();
        let se = (exact * (1.0 - exact) / 40_000.0).sqrt();
        assert!(
            (mc.estimate - exact).abs() <= 3.0 * se,
            "p={p_missing}: {} vs exact {exact}",
            mc.estimate
        );
    }
}

#[test]
fn breakdown_probability_is_seeded() {
    let s = space("M1");
    let d = replicated_cube(&s);
    let a = breakdown_probability(&d, &s, 0.4, 5000, 3).unwrap();
    let b = breakdown_probability(&d, &s, 0.4, 5000, 3).unwrap();
    assert_eq!(a, b);
    assert!(breakdown_probability(&d, &s, 0.0, 10, 3).is_err());
    assert!(breakdown_probability(&d, &s, 0.5, 0, 3).is_err());
}

#[test]
fn breakdown_number_of_replicated_cube() {
    let s = space("M1");
    let d = replicated_cube(&s);
    assert_eq!(breakdown_number(&d, &s, BreakdownSemantics::ExistsMin), 8);
    assert_eq!(breakdown_number(&d, &s, BreakdownSemantics::GuaranteedMax), 7);
    let half: Vec<bool> = d.refs().iter().map(|&i| s.candidates().point(i)[0] < 0.0).collect();
    assert!(!estimable_after(&d, &s, &half));
}

#[test]
fn breakdown_numbers_match_brute_force() {
    for (model, n) in [("M1", 8), ("M1", 10), ("M3", 10), ("M2", 9)] {
        let s = space(model);
        for seed in 0..4 {
            let d = random_start(&s, n, true, &mut restart_rng(seed, 1)).unwrap();
            let got = breakdown_numbers(&d, &s);
            assert_eq!(got.exists_min, brute_force_bdn(&d, &s), "{model} n={n} seed={seed}");
            assert_eq!(got.guaranteed_max + 1, got.exists_min);
        }
    }
}

#[test]
fn leverage_variance_vanishes_on_orthogonal_factorials() {
    for model in ["M1", "M3"] {
        let s = space(model);
        let d = replicated_cube(&s);
        assert!(leverage_variance(&d, &s).unwrap().abs() < 1e-12);
        let lev = leverages(&d, &s).unwrap();
        assert!((lev.iter().sum::<f64>() - s.p() as f64).abs() < 1e-9);
    }
}

#[test]
fn optimum_scores_one_against_itself() {
    let s = space("M2");
    let search = SearchConfig::new(16, 2).with_restarts(10);
    let refs = CompoundReferences::default();
    for kind in [CriterionKind::D, CriterionKind::A, CriterionKind::DP, CriterionKind::AP] {
        let cfg = CriterionConfig::new(kind);
        let opt = optimize(&s, &cfg, &search).unwrap().best_design;
        assert!((psi3(&opt, &opt, &cfg, &s, refs).unwrap().unwrap() - 1.0).abs() < 1e-12);
        for seed in 0..5 {
            let other = random_start(&s, 16, true, &mut restart_rng(seed, 0)).unwrap();
            if let Some(v) = psi3(&other, &opt, &cfg, &s, refs).unwrap() {
                assert!(v <= 1.0 + 1e-12, "{kind}: {v}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn keeping_more_rows_preserves_estimability(seed in any::<u64>(), mask in any::<u16>(), extra in 0usize..16) {
        let s = space("M3");
        let d = random_start(&s, 16, true, &mut restart_rng(seed, 0)).unwrap();
        let keep: Vec<bool> = (0..16).map(|i| mask >> i & 1 == 1).collect();
        let mut more = keep.clone();
        more[extra] = true;
        if estimable_after(&d, &s, &keep) {
            prop_assert!(estimable_after(&d, &s, &more));
        }
    }

    #[test]
    fn leverage_variance_ignores_run_order(seed in any::<u64>(), rotate in 0usize..16) {
        let s = space("M2");
        let d = random_start(&s, 16, true, &mut restart_rng(seed, 0)).unwrap();
        let mut refs = d.refs().to_vec();
        refs.rotate_left(rotate);
        refs.reverse();
        let shuffled = Design::new(refs, s.candidates()).unwrap();
        let a = leverage_variance(&d, &s).unwrap();
        let b = leverage_variance(&shuffled, &s).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }
}
