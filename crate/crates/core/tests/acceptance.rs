//! Acceptance gate. Runs every exit criterion at its pinned tolerance and
//! prints one PASS/FAIL line each; exits non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use optdesign::criteria::{CompoundReferences, Criterion, CriterionConfig, CriterionKind};
use optdesign::fdist::{f_cdf, f_quantile};
use optdesign::linalg::{gram, inverse_spd, logdet_spd, Matrix};
use optdesign::published;
use optdesign::robustness::{breakdown_numbers, breakdown_probability, leverage_variance};
use optdesign::search::{exchange_pass, random_start, restart_rng};
use optdesign::study::{Study, StudyConfig};
use optdesign::{builtin_model, enumerate_candidates, optimize, Design, DesignSpace, FactorSpec, SearchConfig};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use statrs::distribution::{ContinuousCDF, StudentsT};

type Outcome = Result<String, String>;

fn approx(label: &str, got: Option<f64>, want: f64, tol: f64, fails: &mut Vec<String>) {
    match got {
        Some(g) if (g - want).abs() <= tol => {}
        Some(g) => fails.push(format!("{label} {g:.4} vs {want} (tol {tol})")),
        None => fails.push(format!("{label} NA vs {want}")),
    }
}

fn verdict(fails: Vec<String>, ok: String) -> Outcome {
    if fails.is_empty() {
        Ok(ok)
    } else {
        Err(fails.join("; "))
    }
}

fn pedf_table(study: &Study, search_secs: f64) -> Outcome {
    let mut fails = Vec::new();
    for (mi, model) in published::MODELS.iter().enumerate() {
        for (ci, crit) in published::CRITERIA.iter().enumerate() {
            let got = study.cell(model, crit).unwrap().result.pedf;
            let want = published::PEDF[ci][mi];
            if got != want {
                fails.push(format!("{model} {crit} {got} vs {want}"));
            }
        }
    }
    if search_secs >= 120.0 {
        fails.push(format!("search took {search_secs:.1}s"));
    }
    let n_fail = fails.len();
    verdict(fails, format!("24/24 cells, {search_secs:.1}s")).map_err(|e| format!("{n_fail} cell(s) differ: {e}"))
}

fn scaled(study: &Study, model: &str, crit: &str) -> Option<f64> {
    study.cell(model, crit).unwrap().result.scaled_value
}

fn standard_values(study: &Study) -> Outcome {
    let mut fails = Vec::new();
    for model in ["M1", "M3"] {
        for crit in ["D", "A"] {
            approx(&format!("{model} {crit}"), scaled(study, model, crit), 16.0, 0.005, &mut fails);
        }
    }
    verdict(fails, "M1/M3 D and A = 16.00".into())
}

fn modified_values(study: &Study) -> Outcome {
    let mut fails = Vec::new();
    let f = common::f_upper;
    let derived = [
        ("M1", "DP", 4.58, 16.0 / f(0.95, 3, 12)),
        ("M1", "AP", 3.37, 4.0 / (f(0.95, 1, 12) * 0.25)),
        ("M3", "DP", 4.47, 16.0 / f(0.95, 6, 8)),
        ("M3", "AP", 3.01, 7.0 / (f(0.95, 1, 8) * 0.4375)),
    ];
    for (model, crit, published, oracle) in derived {
        let got = scaled(study, model, crit);
        approx(&format!("{model} {crit}"), got, published, 0.01, &mut fails);
        approx(&format!("{model} {crit} derived"), got, oracle, 1e-9, &mut fails);
    }
    for (model, crit, published) in [("M2", "DP", 1.55), ("M2", "AP", 1.31), ("M4", "DP", 1.36), ("M4", "AP", 1.01)] {
        approx(&format!("{model} {crit}"), scaled(study, model, crit), published, 0.02, &mut fails);
    }
    verdict(fails, "M1/M3 DP, AP and M2/M4 DP, AP within tolerance".into())
}

fn f_kernel() -> Outcome {
    let mut fails = Vec::new();
    let q = f_quantile(0.95, 1, 12).unwrap();
    let t = StudentsT::new(0.0, 1.0, 12.0).unwrap().inverse_cdf(0.975);
    if (q - 4.7472).abs() > 1e-3 || (q - t * t).abs() > 1e-3 {
        fails.push(format!("F(1,12) {q} vs t^2 {}", t * t));
    }
    let mut worst: f64 = 0.0;
    for df1 in 1..=12 {
        for df2 in 1..=30 {
            for prob in [0.05, 0.5, 0.9, 0.95, 0.99] {
                let x = f_quantile(prob, df1, df2).unwrap();
                let back = (f_cdf(x, df1, df2).unwrap() - prob).abs();
                let recip = (x * f_quantile(1.0 - prob, df2, df1).unwrap() - 1.0).abs();
                worst = worst.max(back).max(recip);
            }
        }
    }
    if worst > 1e-7 {
        fails.push(format!("identity error {worst:e}"));
    }
    verdict(fails, format!("F(1,12;.95) = {q:.4}, identity error {worst:.1e}"))
}

fn leverage_zero(study: &Study) -> Outcome {
    let mut fails = Vec::new();
    let mut checked = 0;
    for (mi, model) in published::MODELS.iter().enumerate() {
        if *model != "M1" && *model != "M3" {
            continue;
        }
        for (ci, crit) in published::CRITERIA.iter().enumerate() {
            if published::MISSING[ci][mi].2 != 0.0 {
                continue;
            }
            let space = study.space(model).unwrap();
            let v = leverage_variance(study.design(model, crit).unwrap(), space).unwrap();
            checked += 1;
            if v.abs() > 1e-12 {
                fails.push(format!("{model} {crit} {v:e}"));
            }
        }
    }
    verdict(fails, format!("{checked} orthogonal designs"))
}

fn breakdown_probability_oracle(study: &Study) -> Outcome {
    let space = study.space("M1").unwrap();
    let design = study.design("M1", "D").unwrap();
    let rows: Vec<Vec<i128>> = design
        .refs()
        .iter()
        .map(|&i| common::int_row(&common::to_int(space.candidates().point(i)), space.model()))
        .collect();
    let p_missing: f64 = 0.40;
    let n = rows.len() as u32;
    let mut exact = 0.0;
    for mask in 0u32..1 << n {
        let kept: Vec<Vec<i128>> = (0..n as usize).filter(|i| mask >> i & 1 == 1).map(|i| rows[i].clone()).collect();
        if kept.is_empty() || common::int_rank(&kept) < space.p() {
            let k = mask.count_ones() as i32;
            exact += (1.0 - p_missing).powi(k) * p_missing.powi(n as i32 - k);
        }
    }
    let mc = breakdown_probability(design, space, p_missing, 100_000, 1).unwrap();
    let note = format!(
        "MC {:.4} +/- {:.4}, exact {exact:.4}, published 0.012 ({})",
        mc.estimate,
        mc.stderr,
        if (mc.estimate - 0.012).abs() <= 0.01 { "within 0.01" } else { "outside 0.01" }
    );
    if (mc.estimate - exact).abs() <= 3.0 * mc.stderr {
        Ok(note)
    } else {
        Err(note)
    }
}

fn breakdown_numbers_oracle(study: &Study) -> Outcome {
    let mut fails = Vec::new();
    let mut agree = 0;
    for (mi, model) in published::MODELS.iter().enumerate() {
        let space = study.space(model).unwrap();
        for (ci, crit) in published::CRITERIA.iter().enumerate() {
            let design = study.design(model, crit).unwrap();
            let got = breakdown_numbers(design, space);
            if got.guaranteed_max + 1 != got.exists_min {
                fails.push(format!("{model} {crit} semantics inconsistent"));
            }
            // smallest breaking removal per size, by exhaustive masks
            let rows: Vec<Vec<i128>> = design
                .refs()
                .iter()
                .map(|&i| common::int_row(&common::to_int(space.candidates().point(i)), space.model()))
                .collect();
            let n = rows.len();
            let mut breaks_at = vec![false; n + 1];
            for mask in 0u32..1 << n {
                let removed = n - mask.count_ones() as usize;
                if breaks_at[removed] {
                    continue;
                }
                let kept: Vec<Vec<i128>> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| rows[i].clone()).collect();
                if kept.is_empty() || common::int_rank(&kept) < space.p() {
                    breaks_at[removed] = true;
                }
            }
            let oracle = breaks_at.iter().position(|&b| b).unwrap();
            if got.exists_min != oracle {
                fails.push(format!("{model} {crit} {} vs oracle {oracle}", got.exists_min));
            }
            if !breaks_at[oracle..].iter().all(|&b| b) {
                fails.push(format!("{model} {crit} not monotone"));
            }
            if published::MISSING[ci][mi].1 == got.exists_min {
                agree += 1;
            }
        }
    }
    verdict(fails, format!("24 designs; published BdN equals exists-min in {agree}/24 (not asserted)"))
}

fn psi2_values(study: &Study) -> Outcome {
    let mut fails = Vec::new();
    for crit in ["A", "D"] {
        approx(&format!("{crit} M3->M1"), study.psi2(crit, "M3", "M1").unwrap(), 1.0, 1e-9, &mut fails);
    }
    let dp = study.psi2("DP", "M3", "M1").unwrap();
    approx("DP M3->M1", dp, 0.893, 0.005, &mut fails);
    verdict(fails, format!("A/D 1.000, DP {:.4}", dp.unwrap_or(f64::NAN)))
}

fn psi3_structure(study: &Study) -> Outcome {
    let mut fails = Vec::new();
    for model in ["M2", "M3", "M4"] {
        for crit in published::CRITERIA {
            approx(&format!("{model} {crit} self"), study.psi3(model, crit, crit).unwrap(), 1.0, 1e-12, &mut fails);
        }
    }
    for row in ["A", "D"] {
        for col in ["DP", "AP", "C1", "C2"] {
            if let Some(v) = study.psi3("M4", row, col).unwrap() {
                fails.push(format!("M4 {row}-design under {col} is {v:.3}, expected NA"));
            }
        }
    }
    for col in ["D", "DP", "AP"] {
        approx(&format!("M3 A-design under {col}"), study.psi3("M3", "A", col).unwrap(), 1.0, 0.005, &mut fails);
    }
    verdict(fails, "self-ratios 1, M4 A/D NA cells, M3 A row".into())
}

fn search_vs_enumeration() -> Outcome {
    let started = Instant::now();
    let space = DesignSpace::new(enumerate_candidates(&FactorSpec::two_level(3)), builtin_model("M1").unwrap()).unwrap();
    let rows: Vec<Vec<i128>> = (0..8)
        .map(|i| common::int_row(&common::to_int(space.candidates().point(i)), space.model()))
        .collect();
    let mut fails = Vec::new();
    for n in [4, 5, 6] {
        let (mut best_d, mut best_dp) = (0.0f64, 0.0f64);
        for ms in common::multisets(8, n) {
            let x: Vec<Vec<i128>> = ms.iter().map(|&i| rows[i].clone()).collect();
            let det = common::int_det(&common::int_gram(&x)) as f64;
            best_d = best_d.max(det);
            let d = common::pedf(&ms) as u32;
            if d > 0 {
                best_dp = best_dp.max(det / common::f_upper(0.95, 3, d).powi(3));
            }
        }
        let search = SearchConfig::new(n, 1);
        let d = optimize(&space, &CriterionConfig::new(CriterionKind::D), &search).unwrap().best_value;
        // no positive DP value exists when every design lacks pure error
        let dp = match optimize(&space, &CriterionConfig::new(CriterionKind::DP), &search) {
            Ok(r) => r.best_value,
            Err(optdesign::Error::Infeasible(_)) => 0.0,
            Err(e) => return Err(format!("n={n} DP: {e}")),
        };
        if (d - best_d).abs() > 1e-9 * best_d {
            fails.push(format!("n={n} D {d} vs {best_d}"));
        }
        if (dp - best_dp).abs() > 1e-9 * best_dp {
            fails.push(format!("n={n} DP {dp} vs {best_dp}"));
        }
    }
    let secs = started.elapsed().as_secs_f64();
    if secs >= 10.0 {
        fails.push(format!("took {secs:.1}s"));
    }
    verdict(fails, format!("n = 4, 5, 6 in {secs:.2}s"))
}

fn property_suites() -> Outcome {
    let mut fails = Vec::new();
    let mut runner = TestRunner::new(Config {
        cases: 32,
        failure_persistence: None,
        ..Config::default()
    });
    let three = |m: &str| {
        DesignSpace::new(enumerate_candidates(&FactorSpec::three_level(3)), builtin_model(m).unwrap()).unwrap()
    };

    let monotone = runner.run(
        &(any::<u64>(), prop::sample::select(vec!["M1", "M2", "M3", "M4"]), prop::sample::select(vec![
            CriterionKind::D,
            CriterionKind::A,
            CriterionKind::DP,
            CriterionKind::AP,
        ])),
        |(seed, model, kind)| {
            let space = three(model);
            let crit = Criterion::new(&CriterionConfig::new(kind), space.p(), 16).unwrap();
            let mut design = random_start(&space, 16, true, &mut restart_rng(seed, 0)).unwrap();
            let mut value = crit.value(&design, &space);
            loop {
                let (next, improved) = exchange_pass(&design, &space, &crit);
                let v = crit.value(&next, &space);
                prop_assert!(v >= value);
                if !improved {
                    break;
                }
                design = next;
                value = v;
            }
            Ok(())
        },
    );
    if let Err(e) = monotone {
        fails.push(format!("exchange monotonicity: {e}"));
    }

    let space = three("M4");
    let search = SearchConfig::new(16, 7).with_restarts(16);
    let json = || serde_json::to_string(&optimize(&space, &CriterionConfig::c2(), &search).unwrap()).unwrap();
    if json() != json() {
        fails.push("repeat search JSON differs".into());
    }

    let round_trip = runner.run(
        &(2usize..7).prop_flat_map(|c| prop::collection::vec(prop::collection::vec(-3.0f64..3.0, c), c + 3)),
        |rows| {
            let x = Matrix::from_rows(&rows).unwrap();
            let g = gram(&x);
            for i in 0..g.rows() {
                for j in 0..g.cols() {
                    prop_assert_eq!(g[(i, j)], g[(j, i)]);
                }
            }
            if logdet_spd(&g).logdet > -20.0 {
                let inv = inverse_spd(&g).unwrap();
                let back = inverse_spd(&inv).unwrap();
                let scale = g.max_abs();
                for i in 0..g.rows() {
                    for j in 0..g.cols() {
                        prop_assert!((back[(i, j)] - g[(i, j)]).abs() < 1e-6 * scale);
                    }
                }
            }
            Ok(())
        },
    );
    if let Err(e) = round_trip {
        fails.push(format!("gram/inverse: {e}"));
    }

    let space = three("M2");
    let dp = Criterion::new(&CriterionConfig::new(CriterionKind::DP), space.p(), 16).unwrap();
    let reference = dp.value(&random_start(&space, 16, true, &mut restart_rng(0, 9)).unwrap(), &space);
    let compound = Criterion::new(&CriterionConfig::compound([1.0, 0.0, 0.0]), space.p(), 16)
        .unwrap()
        .with_references(CompoundReferences { dp: Some(reference), ap: None });
    let degenerate = runner.run(&any::<u64>(), |seed| {
        let d: Design = random_start(&space, 16, true, &mut restart_rng(seed, 0)).unwrap();
        let v = dp.value(&d, &space);
        let expected = if v > 0.0 { (v / reference).powf(1.0 / space.p() as f64) } else { 0.0 };
        prop_assert!((compound.value(&d, &space) - expected).abs() <= 1e-12 * expected.max(1.0));
        Ok(())
    });
    if let Err(e) = degenerate {
        fails.push(format!("compound degeneracy: {e}"));
    }
    verdict(fails, "monotonicity, determinism, gram/inverse, compound degeneracy".into())
}

fn main() -> ExitCode {
    let started = Instant::now();
    let study = Study::run(StudyConfig::default()).expect("study runs");
    let search_secs = started.elapsed().as_secs_f64();

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("pure-error df of all 24 optima", Box::new(|| pedf_table(&study, search_secs))),
        ("standard criterion values", Box::new(|| standard_values(&study))),
        ("modified criterion values", Box::new(|| modified_values(&study))),
        ("F quantile kernel", Box::new(f_kernel)),
        ("zero leverage variance", Box::new(|| leverage_zero(&study))),
        ("breakdown probability vs exact masks", Box::new(|| breakdown_probability_oracle(&study))),
        ("breakdown numbers vs brute force", Box::new(|| breakdown_numbers_oracle(&study))),
        ("model-change robustness", Box::new(|| psi2_values(&study))),
        ("criterion-change robustness", Box::new(|| psi3_structure(&study))),
        ("search vs exhaustive enumeration", Box::new(search_vs_enumeration)),
        ("property suites", Box::new(property_suites)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(note) => println!("PASS {:>2} {name}: {note}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
