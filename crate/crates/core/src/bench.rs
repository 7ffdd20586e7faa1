//! Size-reduction experiment: synthetic catalogs swept over input size and
//! dimension count, recording skyline and final-solution sizes per stage.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::catalog::{generate_synthetic, Schema};
use crate::electre::{self, ElectreSettings};
use crate::error::{Error, Result};
use crate::pipeline::Importance;
use crate::skyline::{self, DimensionView};

pub const REPORT_HEADER: &str = "n,d,seed,filtered,skyline,final,t_skyline_ms,t_electre_ms";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub sizes: Vec<usize>,
    pub dim_counts: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Cut level for the span-based default settings.
    #[serde(default = "default_cut")]
    pub cut_level: f64,
    /// Importance given to every dimension (equal weights).
    #[serde(default = "default_importance")]
    pub importance: Importance,
}

fn default_cut() -> f64 {
    electre::DEFAULT_CUT_LEVEL
}

fn default_importance() -> Importance {
    Importance::ModeratelyImportant
}

impl ExperimentPlan {
    pub fn new(sizes: Vec<usize>, dim_counts: Vec<usize>, seeds: Vec<u64>) -> Self {
        ExperimentPlan {
            sizes,
            dim_counts,
            seeds,
            cut_level: default_cut(),
            importance: default_importance(),
        }
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let plan: ExperimentPlan = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Ok(plan)
    }

    pub fn validate(&self, schema: &Schema) -> Result<()> {
        if self.sizes.is_empty() || self.seeds.is_empty() || self.dim_counts.is_empty() {
            return Err(Error::InvalidPlan("sizes, dim_counts and seeds must be non-empty".into()));
        }
        if self.sizes.contains(&0) {
            return Err(Error::InvalidPlan("sizes must be positive".into()));
        }
        let max = schema.dimensions.len().min(10);
        if let Some(d) = self.dim_counts.iter().find(|&&d| d == 0 || d > max) {
            return Err(Error::InvalidPlan(format!("dimension count {d} outside 1..={max}")));
        }
        if !(self.cut_level > 0.5 && self.cut_level <= 1.0) {
            return Err(Error::InvalidPlan(format!("cut level {} outside (0.5, 1]", self.cut_level)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub filtered: usize,
    pub skyline: usize,
    #[serde(rename = "final")]
    pub final_size: usize,
    pub t_skyline_ms: f64,
    pub t_electre_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<ExperimentRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    /// Mean and sample standard deviation (0 for a single observation).
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len() as f64;
        if values.is_empty() {
            return Stat { mean: f64::NAN, std: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Stat { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub n: usize,
    pub d: usize,
    pub runs: usize,
    pub skyline: Stat,
    #[serde(rename = "final")]
    pub final_size: Stat,
    pub t_skyline_ms: Stat,
    pub t_electre_ms: Stat,
}

impl ExperimentReport {
    /// Per-(n, d) mean and standard deviation across seeds, keyed `n=<n>,d=<d>`.
    pub fn summary(&self) -> BTreeMap<String, CellSummary> {
        let mut cells: BTreeMap<(usize, usize), Vec<&ExperimentRow>> = BTreeMap::new();
        for r in &self.rows {
            cells.entry((r.n, r.d)).or_default().push(r);
        }
        cells
            .into_iter()
            .map(|((n, d), rows)| {
                let col = |f: fn(&ExperimentRow) -> f64| Stat::of(&rows.iter().map(|r| f(r)).collect::<Vec<_>>());
                (
                    format!("n={n},d={d}"),
                    CellSummary {
                        n,
                        d,
                        runs: rows.len(),
                        skyline: col(|r| r.skyline as f64),
                        final_size: col(|r| r.final_size as f64),
                        t_skyline_ms: col(|r| r.t_skyline_ms),
                        t_electre_ms: col(|r| r.t_electre_ms),
                    },
                )
            })
            .collect()
    }

    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "{REPORT_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{:.3},{:.3}",
                r.n, r.d, r.seed, r.filtered, r.skyline, r.final_size, r.t_skyline_ms, r.t_electre_ms
            )?;
        }
        Ok(())
    }
}

/// Runs the plan against the built-in schema.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentReport> {
    run_experiment_with_schema(plan, &Schema::default())
}

/// One row per `(n, d, seed)`; `d` selects the first `d` schema dimensions.
/// Rows are ordered by `n`, then `d`, then `seed`. Timings exclude generation.
pub fn run_experiment_with_schema(plan: &ExperimentPlan, schema: &Schema) -> Result<ExperimentReport> {
    plan.validate(schema)?;
    let mut rows = Vec::with_capacity(plan.sizes.len() * plan.dim_counts.len() * plan.seeds.len());
    for &n in &plan.sizes {
        for &seed in &plan.seeds {
            let catalog = generate_synthetic(n, schema, seed)?;
            let services: Vec<_> = catalog.services().iter().collect();
            for &d in &plan.dim_counts {
                let view = DimensionView::leading(schema, d)?;

                let t = Instant::now();
                let sky = skyline::compute_skyline_bnl(&services, &view)?;
                let t_skyline_ms = t.elapsed().as_secs_f64() * 1e3;

                let t = Instant::now();
                let mut settings =
                    ElectreSettings::defaults_for(&sky, &view, &vec![plan.importance.weight(); d])?;
                settings.cut_level = plan.cut_level;
                let fin = electre::compute_solution(&sky, &settings, &view)?;
                let t_electre_ms = t.elapsed().as_secs_f64() * 1e3;

                rows.push(ExperimentRow {
                    n,
                    d,
                    seed,
                    filtered: services.len(),
                    skyline: sky.len(),
                    final_size: fin.len(),
                    t_skyline_ms,
                    t_electre_ms,
                });
            }
        }
    }
    rows.sort_by_key(|r| (r.n, r.d, r.seed));
    Ok(ExperimentReport { rows })
}

/// Writes the report as CSV with the fixed header.
pub fn emit_report(report: &ExperimentReport, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    report.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

/// Writes the per-cell summary as JSON.
pub fn emit_summary(report: &ExperimentReport, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, &report.summary())?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}
