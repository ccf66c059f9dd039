//! The full 4-model by 6-criterion comparison on the three-level cube.
//!
//! [`Study::run`] searches all 24 optimal 16-run designs once, then the table
//! builders score them and set each computed cell beside the published value
//! from [`crate::published`]. Compound cells reuse the DP and AP optima of the
//! same model as references, so each reference search runs only once.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::criteria::{CompoundReferences, Criterion, CriterionConfig, CriterionKind};
use crate::design::{pure_error_df, Design, DesignSpace};
use crate::error::{Error, Result};
use crate::model::{builtin_model, common_submodel, enumerate_candidates, FactorSpec};
use crate::published;
use crate::robustness::{breakdown_numbers, breakdown_probability, leverage_variance, psi2, psi3};
use crate::search::{optimize_with_references, SearchConfig, SearchResult};

/// Absolute tolerance for published display values printed to two decimals.
pub const VALUE_TOL: f64 = 0.01;
/// Absolute tolerance for published efficiency ratios printed to three decimals.
pub const RATIO_TOL: f64 = 0.005;
/// Absolute tolerance for published leverage variances.
pub const SIGMA2_TOL: f64 = 0.001;
/// Monte Carlo size behind the published breakdown probabilities.
pub const PUBLISHED_BDP_REPS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub n: usize,
    pub restarts: usize,
    pub max_passes: usize,
    pub seed: u64,
    pub reps: usize,
    /// Missing-run probability per model, in the order of
    /// [`published::MODELS`].
    pub p_missing: [f64; 4],
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            n: published::RUNS,
            restarts: 200,
            max_passes: 50,
            seed: 1,
            reps: 10_000,
            p_missing: published::P_MISSING,
        }
    }
}

impl StudyConfig {
    fn search(&self) -> SearchConfig {
        SearchConfig {
            n: self.n,
            restarts: self.restarts,
            max_passes: self.max_passes,
            seed: self.seed,
        }
    }
}

/// Agreement between a computed cell and the published one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Match,
    Tolerance,
    DocumentedDiscrepancy,
    Informational,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Match => "match",
            Status::Tolerance => "tolerance",
            Status::DocumentedDiscrepancy => "documented-discrepancy",
            Status::Informational => "informational",
        }
    }

    fn of_values(computed: Option<f64>, published: Option<f64>, tol: f64) -> Self {
        match (computed, published) {
            (None, None) => Status::Match,
            (Some(c), Some(p)) if (c - p).abs() <= 1e-9 => Status::Match,
            (Some(c), Some(p)) if (c - p).abs() <= tol => Status::Tolerance,
            _ => Status::DocumentedDiscrepancy,
        }
    }
}

/// Rendered comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Space-padded columns, numbers right aligned.
    pub fn to_text(&self) -> String {
        let widths: Vec<usize> = (0..self.header.len())
            .map(|c| {
                self.rows
                    .iter()
                    .map(|r| r[c].len())
                    .chain(std::iter::once(self.header[c].len()))
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        let mut line = |cells: &[String]| {
            let parts: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(s, &w)| {
                    if s.parse::<f64>().is_ok() {
                        format!("{s:>w$}")
                    } else {
                        format!("{s:<w$}")
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(&self.header);
        line(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>());
        for row in &self.rows {
            line(row);
        }
        out
    }
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.digits$}"))
}

/// One searched optimum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cell {
    pub model: String,
    pub criterion: String,
    pub result: SearchResult,
}

/// All 24 optima together with their design spaces.
#[derive(Debug, Clone)]
pub struct Study {
    pub config: StudyConfig,
    spaces: Vec<DesignSpace>,
    /// Indexed `[model][criterion]` in published order.
    cells: Vec<Vec<Cell>>,
}

fn model_index(model: &str) -> Result<usize> {
    published::MODELS
        .iter()
        .position(|m| *m == model)
        .ok_or_else(|| Error::UnknownModel(model.to_string()))
}

fn criterion_index(criterion: &str) -> Result<usize> {
    published::CRITERIA
        .iter()
        .position(|c| *c == criterion)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown criterion `{criterion}`")))
}

impl Study {
    pub fn run(config: StudyConfig) -> Result<Self> {
        let candidates = enumerate_candidates(&FactorSpec::three_level(3));
        let search = config.search();
        let mut spaces = Vec::new();
        let mut cells = Vec::new();
        for model in published::MODELS {
            let space = DesignSpace::new(candidates.clone(), builtin_model(model)?)?;
            let mut row: Vec<Cell> = Vec::new();
            let mut refs = CompoundReferences::default();
            for crit in published::CRITERIA {
                let cfg: CriterionConfig = crit.parse()?;
                let cell_refs = if cfg.kind == CriterionKind::Compound {
                    refs
                } else {
                    CompoundReferences::default()
                };
                let result = optimize_with_references(&space, &cfg, &search, cell_refs)?;
                match cfg.kind {
                    CriterionKind::DP => refs.dp = Some(result.best_value),
                    CriterionKind::AP => refs.ap = Some(result.best_value),
                    _ => {}
                }
                row.push(Cell {
                    model: model.to_string(),
                    criterion: crit.to_string(),
                    result,
                });
            }
            spaces.push(space);
            cells.push(row);
        }
        Ok(Self {
            config,
            spaces,
            cells,
        })
    }

    pub fn space(&self, model: &str) -> Result<&DesignSpace> {
        Ok(&self.spaces[model_index(model)?])
    }

    pub fn cell(&self, model: &str, criterion: &str) -> Result<&Cell> {
        Ok(&self.cells[model_index(model)?][criterion_index(criterion)?])
    }

    pub fn cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().flatten()
    }

    pub fn design(&self, model: &str, criterion: &str) -> Result<&Design> {
        Ok(&self.cell(model, criterion)?.result.best_design)
    }

    /// Raw DP and AP optimum values for a model.
    pub fn references(&self, model: &str) -> Result<CompoundReferences> {
        Ok(CompoundReferences {
            dp: Some(self.cell(model, "DP")?.result.best_value),
            ap: Some(self.cell(model, "AP")?.result.best_value),
        })
    }

    /// Published appendix design for a cell, on this study's candidate set.
    pub fn published_design(&self, model: &str, criterion: &str) -> Result<Design> {
        let space = self.space(model)?;
        let pts = published::design_points(model, criterion)
            .ok_or_else(|| Error::InvalidArgument(format!("no published design {model} {criterion}")))?;
        let counts = pts
            .iter()
            .map(|(x, r)| {
                space
                    .candidates()
                    .index_of(x)
                    .map(|i| (i, *r))
                    .ok_or_else(|| Error::InvalidDesign(format!("point {x:?} not a candidate")))
            })
            .collect::<Result<Vec<_>>>()?;
        Design::from_counts(&counts, space.candidates())
    }

    fn criterion(&self, model: &str, criterion: &str) -> Result<Criterion> {
        let cfg: CriterionConfig = criterion.parse()?;
        let space = self.space(model)?;
        Ok(Criterion::new(&cfg, space.p(), self.config.n)?.with_references(self.references(model)?))
    }

    /// Pure-error df of every optimum against the published table.
    pub fn pedf_table(&self) -> Result<Table> {
        let mut t = Table::new(
            "pedf",
            &["model", "criterion", "computed", "published", "appendix", "status"],
        );
        for (mi, model) in published::MODELS.iter().enumerate() {
            for (ci, crit) in published::CRITERIA.iter().enumerate() {
                let got = self.cell(model, crit)?.result.pedf;
                let want = published::PEDF[ci][mi];
                let appendix = pure_error_df(&self.published_design(model, crit)?);
                let status = if got == want {
                    Status::Match
                } else {
                    Status::DocumentedDiscrepancy
                };
                t.rows.push(vec![
                    model.to_string(),
                    crit.to_string(),
                    got.to_string(),
                    want.to_string(),
                    appendix.to_string(),
                    status.as_str().to_string(),
                ]);
            }
        }
        Ok(t)
    }

    /// Display values of the optima and of the published designs.
    pub fn designs_table(&self) -> Result<Table> {
        let mut t = Table::new(
            "designs",
            &[
                "model",
                "criterion",
                "support",
                "pedf",
                "raw",
                "computed",
                "published",
                "appendix_design",
                "status",
            ],
        );
        for (mi, model) in published::MODELS.iter().enumerate() {
            let space = self.space(model)?;
            for (ci, crit) in published::CRITERIA.iter().enumerate() {
                let cell = &self.cell(model, crit)?.result;
                let c = self.criterion(model, crit)?;
                let appendix = c.evaluate(&self.published_design(model, crit)?, space);
                let want = published::CRITERION_VALUES[mi][ci];
                let status = if c.kind() == CriterionKind::Compound {
                    Status::Informational
                } else {
                    Status::of_values(cell.scaled_value, Some(want), VALUE_TOL)
                };
                t.rows.push(vec![
                    model.to_string(),
                    crit.to_string(),
                    cell.best_design.support().len().to_string(),
                    cell.pedf.to_string(),
                    format!("{:.6e}", cell.best_value),
                    fmt_opt(cell.scaled_value, 4),
                    format!("{want:.2}"),
                    fmt_opt(appendix.scaled_value, 4),
                    status.as_str().to_string(),
                ]);
            }
        }
        Ok(t)
    }

    /// Breakdown numbers, breakdown probability and leverage variance.
    pub fn missing_table(&self) -> Result<Table> {
        let mut t = Table::new(
            "missing",
            &[
                "model",
                "criterion",
                "p_missing",
                "bdp",
                "bdp_stderr",
                "bdp_published",
                "bdp_status",
                "bdn_exists_min",
                "bdn_guaranteed_max",
                "bdn_published",
                "bdn_status",
                "sigma2_v",
                "sigma2_v_published",
                "sigma2_v_status",
            ],
        );
        for (mi, model) in published::MODELS.iter().enumerate() {
            let space = self.space(model)?;
            let pm = self.config.p_missing[mi];
            for (ci, crit) in published::CRITERIA.iter().enumerate() {
                let design = self.design(model, crit)?;
                let (bdp_pub, bdn_pub, s2_pub) = published::MISSING[ci][mi];
                let bdp = breakdown_probability(design, space, pm, self.config.reps, self.config.seed)?;
                let bdn = breakdown_numbers(design, space);
                let s2 = leverage_variance(design, space).ok();

                // both estimates carry Monte Carlo error
                let pub_se = (bdp_pub * (1.0 - bdp_pub) / PUBLISHED_BDP_REPS as f64).sqrt();
                let bdp_tol = 3.0 * (bdp.stderr.powi(2) + pub_se.powi(2)).sqrt();
                let bdp_status = Status::of_values(Some(bdp.estimate), Some(bdp_pub), bdp_tol);
                let bdn_status = if bdn.exists_min == bdn_pub || bdn.guaranteed_max == bdn_pub {
                    Status::Match
                } else {
                    Status::DocumentedDiscrepancy
                };
                let s2_status = Status::of_values(s2, Some(s2_pub), SIGMA2_TOL);
                t.rows.push(vec![
                    model.to_string(),
                    crit.to_string(),
                    format!("{pm:.2}"),
                    format!("{:.4}", bdp.estimate),
                    format!("{:.4}", bdp.stderr),
                    format!("{bdp_pub:.3}"),
                    bdp_status.as_str().to_string(),
                    bdn.exists_min.to_string(),
                    bdn.guaranteed_max.to_string(),
                    bdn_pub.to_string(),
                    bdn_status.as_str().to_string(),
                    fmt_opt(s2, 4),
                    format!("{s2_pub:.3}"),
                    s2_status.as_str().to_string(),
                ]);
            }
        }
        Ok(t)
    }

    /// Model-change robustness of one optimum: the `fitted`-model design
    /// scored under the common submodel with `eval`, relative to the
    /// `eval`-model optimum.
    pub fn psi2(&self, criterion: &str, fitted: &str, eval: &str) -> Result<Option<f64>> {
        let big = self.space(fitted)?;
        let small = self.space(eval)?;
        let sub = common_submodel(big.model(), small.model())?;
        let eval_space = big.with_model(sub)?;
        let cfg: CriterionConfig = criterion.parse()?;
        psi2(
            &cfg,
            self.design(fitted, criterion)?,
            &eval_space,
            Some(self.design(eval, criterion)?),
            self.references(eval)?,
        )
    }

    pub fn psi2_table(&self) -> Result<Table> {
        let mut t = Table::new(
            "psi2",
            &["panel", "criterion", "fitted", "evaluated", "computed", "published", "status"],
        );
        let mut push = |panel: &str, crit: &str, fitted: &str, eval: &str, want: f64| -> Result<()> {
            let got = self.psi2(crit, fitted, eval)?;
            t.rows.push(vec![
                panel.to_string(),
                crit.to_string(),
                fitted.to_string(),
                eval.to_string(),
                fmt_opt(got, 3),
                format!("{want:.3}"),
                Status::of_values(got, Some(want), RATIO_TOL).as_str().to_string(),
            ]);
            Ok(())
        };
        for (ri, crit) in published::PSI2_ORDER.iter().enumerate() {
            for (j, fitted) in ["M2", "M3", "M4"].iter().enumerate() {
                push("a", crit, fitted, "M1", published::PSI2_A[ri][j])?;
            }
            push("b", crit, "M4", "M2", published::PSI2_B[ri])?;
            push("c", crit, "M4", "M3", published::PSI2_C[ri])?;
        }
        Ok(t)
    }

    /// Criterion-change robustness of the `row`-optimum under `column`.
    pub fn psi3(&self, model: &str, row: &str, column: &str) -> Result<Option<f64>> {
        let cfg: CriterionConfig = column.parse()?;
        psi3(
            self.design(model, row)?,
            self.design(model, column)?,
            &cfg,
            self.space(model)?,
            self.references(model)?,
        )
    }

    pub fn psi3_table(&self) -> Result<Table> {
        let mut header = vec!["model", "design"];
        header.extend(published::PSI2_ORDER);
        header.push("status");
        let mut t = Table::new("psi3", &header);
        for (row, model, want) in published::PSI3 {
            let mut cells = vec![model.to_string(), row.to_string()];
            let mut worst = Status::Match;
            for (col, w) in published::PSI2_ORDER.iter().zip(want) {
                let got = self.psi3(model, row, col)?;
                // the published table leaves the diagonal blank
                let w = if col == row { Some(1.0) } else { *w };
                let s = Status::of_values(got, w, RATIO_TOL);
                if s as u8 > worst as u8 {
                    worst = s;
                }
                cells.push(fmt_opt(got, 3));
            }
            cells.push(worst.as_str().to_string());
            t.rows.push(cells);
        }
        Ok(t)
    }

    pub fn table(&self, which: &str) -> Result<Table> {
        match which {
            "pedf" => self.pedf_table(),
            "designs" => self.designs_table(),
            "missing" => self.missing_table(),
            "psi2" => self.psi2_table(),
            "psi3" => self.psi3_table(),
            other => Err(Error::InvalidArgument(format!("unknown table `{other}`"))),
        }
    }
}

pub const TABLES: [&str; 5] = ["pedf", "designs", "missing", "psi2", "psi3"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_rendering_aligns_columns() {
        let mut t = Table::new("x", &["name", "value"]);
        t.rows.push(vec!["a".into(), "1.5".into()]);
        t.rows.push(vec!["long".into(), "10.25".into()]);
        let text = t.to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "name  value");
        assert_eq!(lines[2], "a       1.5");
        assert_eq!(lines[3], "long  10.25");
        assert_eq!(t.to_csv_string().unwrap(), "name,value\na,1.5\nlong,10.25\n");
    }

    #[test]
    fn status_of_values() {
        assert_eq!(Status::of_values(Some(1.0), Some(1.0), 0.01), Status::Match);
        assert_eq!(Status::of_values(Some(1.004), Some(1.0), 0.01), Status::Tolerance);
        assert_eq!(Status::of_values(Some(1.1), Some(1.0), 0.01), Status::DocumentedDiscrepancy);
        assert_eq!(Status::of_values(None, None, 0.01), Status::Match);
        assert_eq!(Status::of_values(Some(0.5), None, 0.01), Status::DocumentedDiscrepancy);
    }
}
