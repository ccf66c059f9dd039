use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use optdesign::criteria::{CompoundReferences, CriterionKind};
use optdesign::design::pure_error_df;
use optdesign::model::{builtin_model, common_submodel, load_model};
use optdesign::robustness::{psi2, psi3, robustness_report, RobustnessReport};
use optdesign::search::optimize_with_references;
use optdesign::study::{Study, StudyConfig, Table, TABLES};
use optdesign::{published, Criterion, CriterionConfig, Design, DesignFile, DesignSpace, SearchResult};

use crate::config::{Format, Options};
use crate::{CliError, Which};

const DEFAULT_RUNS: usize = 16;
const DEFAULT_REPS: usize = 10_000;

/// Every JSON document the tool writes.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    config_hash: String,
    result: T,
}

fn envelope<'a, T: Serialize>(command: &'a str, opts: &Options, result: T) -> Envelope<'a, T> {
    Envelope {
        tool: "optdesign",
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed: opts.seed(),
        config_hash: opts.hash(command),
        result,
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn out_dir(opts: &Options) -> Result<Option<&Path>, CliError> {
    match &opts.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            Ok(Some(dir))
        }
        None => Ok(None),
    }
}

fn emit(text: &str) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(text.as_bytes())?;
    Ok(())
}

fn load_design(opts: &Options, space: &DesignSpace) -> Result<Design, CliError> {
    let path = opts
        .design
        .as_ref()
        .ok_or_else(|| CliError::Config("--design FILE is required".into()))?;
    if !path.exists() {
        return Err(CliError::Io(format!("{}: no such file", path.display())));
    }
    Ok(DesignFile::load(path)?.to_design(space.candidates())?)
}

/// One of the six named criteria, with `--alpha` applied and `--kappa`
/// ignored.
fn preset(opts: &Options, name: &str) -> Result<CriterionConfig, CliError> {
    let mut cfg: CriterionConfig = name.parse()?;
    if let Some(a) = opts.alpha {
        cfg.alpha = a;
    }
    Ok(cfg)
}

/// Searches the DP and AP optima a compound criterion needs.
fn compound_refs(
    space: &DesignSpace,
    cfg: &CriterionConfig,
    opts: &Options,
    n: usize,
) -> Result<CompoundReferences, CliError> {
    let mut refs = CompoundReferences::default();
    if cfg.kind != CriterionKind::Compound {
        return Ok(refs);
    }
    let kappa = cfg.kappa.unwrap_or_default();
    let search = opts.search_config(n);
    if kappa[0] > 0.0 {
        let dp = cfg.with_kind(CriterionKind::DP);
        refs.dp = Some(optimize_with_references(space, &dp, &search, refs)?.best_value);
    }
    if kappa[1] > 0.0 {
        let ap = cfg.with_kind(CriterionKind::AP);
        refs.ap = Some(optimize_with_references(space, &ap, &search, refs)?.best_value);
    }
    Ok(refs)
}

fn search_optimum(
    space: &DesignSpace,
    cfg: &CriterionConfig,
    opts: &Options,
    n: usize,
) -> Result<SearchResult, CliError> {
    let refs = compound_refs(space, cfg, opts, n)?;
    Ok(optimize_with_references(space, cfg, &opts.search_config(n), refs)?)
}

pub fn search(opts: &Options) -> Result<(), CliError> {
    let space = opts.space()?;
    let cfg = opts.criterion_config()?;
    cfg.validate(space.p())?;
    let result = search_optimum(&space, &cfg, opts, DEFAULT_RUNS)?;
    let csv = result.design_file(&space).to_csv_string();
    let json = to_json(&envelope("search", opts, &result))?;
    match out_dir(opts)? {
        Some(dir) => {
            write_file(&dir.join("search.json"), &json)?;
            write_file(&dir.join("design.csv"), &csv)?;
            eprintln!(
                "{} {} n={}: value {} pedf {} ({} of {} restarts hit the best)",
                result.model,
                result.criterion,
                result.n,
                result.scaled_value.map_or("NA".into(), |v| format!("{v:.4}")),
                result.pedf,
                result.restarts_hitting_best,
                result.trace.len()
            );
            Ok(())
        }
        None => emit(match opts.format() {
            Format::Json => &json,
            Format::Csv => &csv,
        }),
    }
}

#[derive(Debug, Serialize)]
struct EvaluateRow {
    criterion: String,
    raw: Option<f64>,
    scaled: Option<f64>,
    optimum_raw: Option<f64>,
    efficiency: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Evaluation {
    model: String,
    n: usize,
    pedf: usize,
    estimable: bool,
    criteria: Vec<EvaluateRow>,
}

pub fn evaluate(opts: &Options) -> Result<(), CliError> {
    let space = opts.space()?;
    let design = load_design(opts, &space)?;
    let n = design.n();
    let mut configs = Vec::new();
    for name in published::CRITERIA {
        configs.push(preset(opts, name)?);
    }
    if opts.kappa.is_some() {
        configs.push(opts.criterion_named("C")?);
    }
    // restarts = 0 skips the reference searches
    let with_refs = opts.restarts != Some(0) && n >= space.p();

    let mut refs = CompoundReferences::default();
    let mut optima: Vec<Option<f64>> = Vec::new();
    for cfg in &configs {
        cfg.validate(space.p())?;
        let opt = if !with_refs {
            None
        } else if cfg.kind == CriterionKind::Compound {
            Some(optimize_with_references(&space, cfg, &opts.search_config(n), refs)?.best_value)
        } else {
            let v = optimize_with_references(&space, cfg, &opts.search_config(n), refs)?.best_value;
            match cfg.kind {
                CriterionKind::DP => refs.dp = Some(v),
                CriterionKind::AP => refs.ap = Some(v),
                _ => {}
            }
            Some(v)
        };
        optima.push(opt);
    }

    let mut rows = Vec::new();
    let mut estimable = false;
    for (cfg, opt) in configs.iter().zip(optima) {
        let crit = Criterion::new(cfg, space.p(), n)?.with_references(refs);
        let eval = crit.evaluate(&design, &space);
        estimable = eval.estimable;
        let (raw, scaled) = if cfg.kind == CriterionKind::Compound && !with_refs {
            (None, None)
        } else {
            (Some(eval.raw_value), eval.scaled_value)
        };
        rows.push(EvaluateRow {
            criterion: cfg.label(),
            raw,
            scaled,
            optimum_raw: opt,
            efficiency: raw.zip(opt).and_then(|(r, o)| crit.efficiency(r, o)),
        });
    }
    let result = Evaluation {
        model: space.model().name().to_string(),
        n,
        pedf: pure_error_df(&design),
        estimable,
        criteria: rows,
    };

    let json = to_json(&envelope("evaluate", opts, &result))?;
    let csv = evaluation_csv(&result);
    match out_dir(opts)? {
        Some(dir) => {
            write_file(&dir.join("evaluate.json"), &json)?;
            write_file(&dir.join("evaluate.csv"), &csv)
        }
        None => emit(match opts.format() {
            Format::Json => &json,
            Format::Csv => &csv,
        }),
    }
}

fn opt_cell(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), |x| format!("{x}"))
}

fn evaluation_csv(e: &Evaluation) -> String {
    let mut s = String::from("criterion,raw,scaled,pedf,estimable,optimum_raw,efficiency\n");
    for r in &e.criteria {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.criterion,
            opt_cell(r.raw),
            opt_cell(r.scaled),
            e.pedf,
            e.estimable,
            opt_cell(r.optimum_raw),
            opt_cell(r.efficiency)
        ));
    }
    s
}

#[derive(Debug, Serialize)]
struct Psi2Entry {
    criterion: String,
    submodel: String,
    value: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Psi3Entry {
    criterion: String,
    value: Option<f64>,
}

#[derive(Debug, Serialize)]
struct RobustnessOutput {
    model: String,
    n: usize,
    #[serde(flatten)]
    report: RobustnessReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    psi2: Option<Psi2Entry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    psi3: Vec<Psi3Entry>,
}

/// Default missing-run probability: 0.40 for M1, 0.20 otherwise.
fn default_p_missing(model: &str) -> f64 {
    match published::MODELS.iter().position(|m| *m == model) {
        Some(i) => published::P_MISSING[i],
        None => 0.20,
    }
}

pub fn robustness(opts: &Options, want_psi3: bool, submodel: Option<&str>) -> Result<(), CliError> {
    let space = opts.space()?;
    let design = load_design(opts, &space)?;
    let n = design.n();
    let p_missing = opts
        .p_missing
        .unwrap_or_else(|| default_p_missing(space.model().name()));
    let report = robustness_report(
        &design,
        &space,
        p_missing,
        opts.reps.unwrap_or(DEFAULT_REPS),
        opts.seed(),
    )?;

    let psi2_entry = match submodel {
        Some(sub) => {
            let cfg = opts.criterion_config()?;
            let small = match builtin_model(sub) {
                Ok(m) => m,
                Err(_) => load_model(sub)?.1,
            };
            let eval_space = space.with_model(common_submodel(space.model(), &small)?)?;
            let optimum = search_optimum(&eval_space, &cfg, opts, n)?;
            let value = psi2(
                &cfg,
                &design,
                &eval_space,
                Some(&optimum.best_design),
                optimum.references,
            )?;
            Some(Psi2Entry {
                criterion: cfg.label(),
                submodel: eval_space.model().name().to_string(),
                value,
            })
        }
        None => None,
    };

    let mut psi3_entries = Vec::new();
    if want_psi3 {
        let mut refs = CompoundReferences::default();
        for name in published::CRITERIA {
            let cfg = preset(opts, name)?;
            let optimum = optimize_with_references(&space, &cfg, &opts.search_config(n), refs)?;
            match cfg.kind {
                CriterionKind::DP => refs.dp = Some(optimum.best_value),
                CriterionKind::AP => refs.ap = Some(optimum.best_value),
                _ => {}
            }
            psi3_entries.push(Psi3Entry {
                criterion: cfg.label(),
                value: psi3(&design, &optimum.best_design, &cfg, &space, refs)?,
            });
        }
    }

    let result = RobustnessOutput {
        model: space.model().name().to_string(),
        n,
        report,
        psi2: psi2_entry,
        psi3: psi3_entries,
    };
    let json = to_json(&envelope("robustness", opts, &result))?;
    let csv = robustness_csv(&result);
    match out_dir(opts)? {
        Some(dir) => {
            write_file(&dir.join("robustness.json"), &json)?;
            write_file(&dir.join("robustness.csv"), &csv)
        }
        None => emit(match opts.format() {
            Format::Json => &json,
            Format::Csv => &csv,
        }),
    }
}

fn robustness_csv(r: &RobustnessOutput) -> String {
    let rep = &r.report;
    let mut rows = vec![
        ("bdn_exists".to_string(), rep.bdn_exists.to_string()),
        ("bdn_guaranteed".to_string(), rep.bdn_guaranteed.to_string()),
        ("bdp_estimate".to_string(), rep.bdp_estimate.to_string()),
        ("bdp_mc_stderr".to_string(), rep.bdp_mc_stderr.to_string()),
        ("sigma2_v".to_string(), opt_cell(rep.sigma2_v)),
        ("reps".to_string(), rep.reps.to_string()),
        ("p_missing".to_string(), rep.p_missing.to_string()),
        ("seed".to_string(), rep.seed.to_string()),
    ];
    if let Some(p) = &r.psi2 {
        rows.push((format!("psi2_{}_{}", p.criterion, p.submodel), opt_cell(p.value)));
    }
    for p in &r.psi3 {
        rows.push((format!("psi3_{}", p.criterion), opt_cell(p.value)));
    }
    let mut s = String::from("measure,value\n");
    for (k, v) in rows {
        s.push_str(&format!("{k},{v}\n"));
    }
    s
}

#[derive(Serialize)]
struct ReproduceOutput<'a> {
    study: &'a StudyConfig,
    tables: Vec<Table>,
}

pub fn reproduce(opts: &Options, which: Which) -> Result<(), CliError> {
    let mut cfg = StudyConfig {
        seed: opts.seed(),
        ..StudyConfig::default()
    };
    if let Some(n) = opts.n {
        cfg.n = n;
    }
    if let Some(r) = opts.restarts {
        cfg.restarts = r;
    }
    if let Some(m) = opts.max_passes {
        cfg.max_passes = m;
    }
    if let Some(r) = opts.reps {
        cfg.reps = r;
    }
    if let Some(p) = opts.p_missing {
        cfg.p_missing = [p; 4];
    }
    let names: Vec<&str> = match which {
        Which::Pedf => vec!["pedf"],
        Which::Designs => vec!["designs"],
        Which::Missing => vec!["missing"],
        Which::Psi2 => vec!["psi2"],
        Which::Psi3 => vec!["psi3"],
        Which::All => TABLES.to_vec(),
    };
    let study = Study::run(cfg)?;
    let tables = names
        .iter()
        .map(|n| study.table(n))
        .collect::<Result<Vec<_>, _>>()?;
    let command = "reproduce";
    let json = to_json(&envelope(
        command,
        opts,
        ReproduceOutput {
            study: &study.config,
            tables: tables.clone(),
        },
    ))?;

    match out_dir(opts)? {
        Some(dir) => {
            for t in &tables {
                write_file(&dir.join(format!("{}.csv", t.name)), &t.to_csv_string()?)?;
                write_file(&dir.join(format!("{}.txt", t.name)), &t.to_text())?;
            }
            write_file(&dir.join("reproduce.json"), &json)
        }
        None => match opts.format {
            Some(Format::Json) => emit(&json),
            Some(Format::Csv) => {
                let mut s = String::new();
                for t in &tables {
                    s.push_str(&format!("# {}\n", t.name));
                    s.push_str(&t.to_csv_string()?);
                }
                emit(&s)
            }
            None => {
                let mut s = format!(
                    "optdesign {} seed={} config={}\n",
                    env!("CARGO_PKG_VERSION"),
                    opts.seed(),
                    opts.hash(command)
                );
                for t in &tables {
                    s.push_str(&format!("\n[{}]\n{}", t.name, t.to_text()));
                }
                emit(&s)
            }
        },
    }
}
