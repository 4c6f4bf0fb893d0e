//! Experiment orchestration: seeded sweeps over horizons, estimator bias
//! studies over parameter grids, CSV emission/parsing, and log-log
//! convergence-rate fitting.
//!
//! CSV is the single output format: one header line, RFC-style quoting, `.`
//! decimals, fixed column order. Floats are written in shortest
//! round-trippable form, so `parse(emit(rows)) == rows`. Sweeps are
//! embarrassingly parallel across (horizon, seed) cells; every cell gets its
//! own sampler derived from its seed, so a cell's trace never depends on
//! which other cells run beside it. Output rows are merged in a fixed order.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::dirichlet::DirichletSampler;
use crate::estimator::{bias_check, BiasReport, EstimatorConfig};
use crate::objectives;
use crate::optimizer::{run, Algo, RunTrace, Schedule};
use crate::simplex::SimplexPoint;

/// Accepted slope band for the `T^{-1/4}` convergence claim: the analysis
/// gives an upper bound, so observed decay may be faster than `-1/4` but
/// must not be flat.
pub const SLOPE_BAND: (f64, f64) = (-0.55, -0.15);

/// Summary CSV column order.
pub const SUMMARY_HEADER: [&str; 9] = [
    "algo",
    "objective",
    "d",
    "alpha",
    "T",
    "seed",
    "avg_gap",
    "f_avg_iterate_minus_opt",
    "wall_time_s",
];

/// Bias-study CSV column order.
pub const BIAS_HEADER: [&str; 9] = [
    "d",
    "alpha",
    "delta",
    "objective_id",
    "n",
    "bias_norm",
    "bound",
    "std_err",
    "pass",
];

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("unknown objective id {0:?}")]
    ObjectiveUnknown(String),
    #[error("rate fit for group {group} needs at least 3 horizons, found {found}")]
    InsufficientHorizons { group: String, found: usize },
    #[error("i/o failure: {0}")]
    IoFailure(String),
    #[error("malformed CSV at line {line}: {message}")]
    MalformedCsv { line: usize, message: String },
    #[error(transparent)]
    Optimizer(#[from] crate::optimizer::OptimizerError),
    #[error(transparent)]
    Estimator(#[from] crate::estimator::EstimatorError),
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::IoFailure(e.to_string())
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::IoFailure(e.to_string())
    }
}

/// Parse a 64-bit seed given as decimal or 0x-prefixed hex.
pub fn parse_seed(s: &str) -> Result<u64, HarnessError> {
    let t = s.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => t.parse::<u64>(),
    };
    parsed.map_err(|_| {
        HarnessError::ConfigInvalid(format!(
            "cannot parse {s:?} as a decimal or 0x-hex u64 seed"
        ))
    })
}

/// Configuration of one experiment sweep: an algorithm and objective run at
/// every (horizon, seed) cell of the grid.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub algo: Algo,
    pub objective_id: String,
    pub d: usize,
    pub alpha: f64,
    pub c_eta: f64,
    pub c_delta: f64,
    pub horizons: Vec<usize>,
    pub n_seeds: u64,
    pub base_seed: u64,
    pub output_path: PathBuf,
    pub full_trace: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.d < 2 {
            return Err(HarnessError::ConfigInvalid(format!("d = {} < 2", self.d)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(HarnessError::ConfigInvalid(format!(
                "alpha = {} must be positive",
                self.alpha
            )));
        }
        if !(self.c_eta > 0.0 && self.c_eta.is_finite())
            || !(self.c_delta > 0.0 && self.c_delta.is_finite())
        {
            return Err(HarnessError::ConfigInvalid(
                "proportionality constants must be positive".to_string(),
            ));
        }
        if self.horizons.is_empty() {
            return Err(HarnessError::ConfigInvalid("no horizons given".to_string()));
        }
        if self.horizons[0] < 1 {
            return Err(HarnessError::ConfigInvalid(
                "horizons must be at least 1".to_string(),
            ));
        }
        if self.horizons.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HarnessError::ConfigInvalid(
                "horizons must be strictly increasing".to_string(),
            ));
        }
        if self.n_seeds < 1 {
            return Err(HarnessError::ConfigInvalid(
                "n_seeds must be at least 1".to_string(),
            ));
        }
        objectives::from_id(&self.objective_id, self.d)
            .map_err(|_| HarnessError::ObjectiveUnknown(self.objective_id.clone()))?;
        Ok(())
    }
}

/// One summary row of an experiment CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algo: String,
    pub objective: String,
    pub d: usize,
    pub alpha: f64,
    pub horizon: usize,
    pub seed: u64,
    pub avg_gap: f64,
    /// `f(x̄_T) - f(x*)` when the objective's minimizer is known.
    pub f_gap: Option<f64>,
    pub wall_time_s: f64,
}

/// Result of [`run_experiment`]: the rows written, plus bookkeeping.
#[derive(Debug)]
pub struct ExperimentOutcome {
    pub rows: Vec<SummaryRow>,
    pub stability_warnings: usize,
    pub csv_path: PathBuf,
    pub trace_path: Option<PathBuf>,
}

fn trace_path_for(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    let ext = path
        .extension()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".to_string());
    path.with_file_name(format!("{stem}_trace.{ext}"))
}

fn join_coords(coords: &[f64]) -> String {
    coords
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// Execute the sweep: for every horizon `T` and seed in
/// `base_seed..base_seed + n_seeds`, run the optimizer and emit one summary
/// row. With `full_trace`, per-iteration records go to a sibling
/// `<name>_trace.csv`.
///
/// Byte-identical summary bodies are produced by identical configs, wall
/// times excluded.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, HarnessError> {
    cfg.validate()?;
    let cells: Vec<(usize, u64)> = cfg
        .horizons
        .iter()
        .flat_map(|&t| (0..cfg.n_seeds).map(move |k| (t, cfg.base_seed + k)))
        .collect();

    let results: Vec<(SummaryRow, bool, Option<RunTrace>)> = cells
        .par_iter()
        .map(|&(horizon, seed)| -> Result<_, HarnessError> {
            let f = objectives::from_id(&cfg.objective_id, cfg.d)
                .map_err(|_| HarnessError::ObjectiveUnknown(cfg.objective_id.clone()))?;
            let schedule = Schedule::new(cfg.c_eta, cfg.c_delta, horizon, cfg.d, cfg.alpha)?;
            let mut sampler = DirichletSampler::new(cfg.d, cfg.alpha, seed)
                .map_err(crate::estimator::EstimatorError::from)?;
            let x1 =
                SimplexPoint::uniform(cfg.d).map_err(crate::estimator::EstimatorError::from)?;
            let started = Instant::now();
            let trace = run(cfg.algo, &f, &schedule, &mut sampler, &x1)?;
            let wall_time_s = started.elapsed().as_secs_f64();
            let row = SummaryRow {
                algo: cfg.algo.to_string(),
                objective: cfg.objective_id.clone(),
                d: cfg.d,
                alpha: cfg.alpha,
                horizon,
                seed,
                avg_gap: trace.avg_gap,
                f_gap: f.minimizer().map(|m| trace.f_average_iterate - m.value),
                wall_time_s,
            };
            let warning = trace.stability_warning;
            Ok((row, warning, cfg.full_trace.then_some(trace)))
        })
        .collect::<Result<_, _>>()?;

    let mut rows: Vec<SummaryRow> = Vec::with_capacity(results.len());
    let mut stability_warnings = 0;
    let mut traces = Vec::new();
    for (row, warning, trace) in results {
        if warning {
            stability_warnings += 1;
        }
        if let Some(t) = trace {
            traces.push((row.horizon, row.seed, t));
        }
        rows.push(row);
    }
    rows.sort_by_key(|a| (a.horizon, a.seed));

    write_summary_csv(&cfg.output_path, &rows)?;
    let trace_path = if cfg.full_trace {
        let path = trace_path_for(&cfg.output_path);
        traces.sort_by_key(|a| (a.0, a.1));
        let mut writer = csv::Writer::from_path(&path)?;
        writer.write_record([
            "algo",
            "objective",
            "d",
            "alpha",
            "T",
            "seed",
            "t",
            "f_value",
            "gap",
            "iterate",
            "query_point",
        ])?;
        for (horizon, seed, trace) in &traces {
            for rec in &trace.records {
                writer.write_record([
                    cfg.algo.to_string(),
                    cfg.objective_id.clone(),
                    cfg.d.to_string(),
                    cfg.alpha.to_string(),
                    horizon.to_string(),
                    seed.to_string(),
                    rec.t.to_string(),
                    rec.f_value.to_string(),
                    rec.gap.to_string(),
                    join_coords(rec.iterate.coords()),
                    join_coords(rec.query_point.coords()),
                ])?;
            }
        }
        writer.flush()?;
        Some(path)
    } else {
        None
    };

    Ok(ExperimentOutcome {
        rows,
        stability_warnings,
        csv_path: cfg.output_path.clone(),
        trace_path,
    })
}

/// Serialize summary rows in the fixed column order.
pub fn write_summary<W: Write>(w: W, rows: &[SummaryRow]) -> Result<(), HarnessError> {
    let mut writer = csv::Writer::from_writer(w);
    writer.write_record(SUMMARY_HEADER)?;
    for row in rows {
        writer.write_record([
            row.algo.clone(),
            row.objective.clone(),
            row.d.to_string(),
            row.alpha.to_string(),
            row.horizon.to_string(),
            row.seed.to_string(),
            row.avg_gap.to_string(),
            row.f_gap.map(|v| v.to_string()).unwrap_or_default(),
            row.wall_time_s.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<(), HarnessError> {
    let file = std::fs::File::create(path)?;
    write_summary(file, rows)
}

fn parse_field<T: std::str::FromStr>(
    record: &csv::StringRecord,
    idx: usize,
    line: usize,
) -> Result<T, HarnessError> {
    let raw = record.get(idx).ok_or(HarnessError::MalformedCsv {
        line,
        message: format!("missing column {idx}"),
    })?;
    raw.parse::<T>().map_err(|_| HarnessError::MalformedCsv {
        line,
        message: format!("cannot parse column {} value {raw:?}", SUMMARY_HEADER[idx]),
    })
}

/// Parse a summary CSV produced by [`write_summary`].
pub fn read_summary<R: std::io::Read>(r: R) -> Result<Vec<SummaryRow>, HarnessError> {
    let mut reader = csv::Reader::from_reader(r);
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let f_gap_raw = record.get(7).unwrap_or_default();
        rows.push(SummaryRow {
            algo: record.get(0).unwrap_or_default().to_string(),
            objective: record.get(1).unwrap_or_default().to_string(),
            d: parse_field(&record, 2, line)?,
            alpha: parse_field(&record, 3, line)?,
            horizon: parse_field(&record, 4, line)?,
            seed: parse_field(&record, 5, line)?,
            avg_gap: parse_field(&record, 6, line)?,
            f_gap: if f_gap_raw.is_empty() {
                None
            } else {
                Some(parse_field(&record, 7, line)?)
            },
            wall_time_s: parse_field(&record, 8, line)?,
        });
    }
    Ok(rows)
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>, HarnessError> {
    let file = std::fs::File::open(path)?;
    read_summary(file)
}

/// Ordinary-least-squares fit of `log(mean avg_gap)` against `log T`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    /// The fitted points `(ln T, ln mean_gap)`.
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Rate fit for one (algo, objective, d, alpha) group.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFitGroup {
    pub algo: String,
    pub objective: String,
    pub d: usize,
    pub alpha: f64,
    pub fit: RateFit,
}

type GapsByGroup = BTreeMap<(String, String, usize, u64), BTreeMap<usize, Vec<f64>>>;

fn ols(points: &[(f64, f64)]) -> RateFit {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    let r_squared = if ss_tot > 1e-30 {
        1.0 - ss_res / ss_tot
    } else if ss_res <= 1e-30 {
        1.0
    } else {
        0.0
    };
    RateFit {
        points: points.to_vec(),
        slope,
        intercept,
        r_squared,
    }
}

/// Fit one power law per (algo, objective, d, alpha) group: gaps are averaged
/// over seeds at each horizon, then regressed on `log T`. Each group needs at
/// least 3 horizons.
pub fn rate_fit(rows: &[SummaryRow]) -> Result<Vec<RateFitGroup>, HarnessError> {
    let mut groups = GapsByGroup::new();
    for row in rows {
        groups
            .entry((
                row.algo.clone(),
                row.objective.clone(),
                row.d,
                row.alpha.to_bits(),
            ))
            .or_default()
            .entry(row.horizon)
            .or_default()
            .push(row.avg_gap);
    }
    let mut fits = Vec::new();
    for ((algo, objective, d, alpha_bits), horizons) in groups {
        let alpha = f64::from_bits(alpha_bits);
        let label = format!("{algo}/{objective}/d={d}/alpha={alpha}");
        if horizons.len() < 3 {
            return Err(HarnessError::InsufficientHorizons {
                group: label,
                found: horizons.len(),
            });
        }
        let mut points = Vec::with_capacity(horizons.len());
        for (t, gaps) in horizons {
            let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
            if mean <= 0.0 {
                return Err(HarnessError::ConfigInvalid(format!(
                    "group {label} has nonpositive mean gap {mean} at T={t}"
                )));
            }
            points.push(((t as f64).ln(), mean.ln()));
        }
        fits.push(RateFitGroup {
            algo,
            objective,
            d,
            alpha,
            fit: ols(&points),
        });
    }
    Ok(fits)
}

/// Grid configuration of a bias study.
#[derive(Debug, Clone)]
pub struct BiasStudyConfig {
    pub objective_ids: Vec<String>,
    pub ds: Vec<usize>,
    pub alphas: Vec<f64>,
    pub deltas: Vec<f64>,
    pub n_samples: usize,
    pub base_seed: u64,
    /// CSV destination; skipped when `None`.
    pub output_path: Option<PathBuf>,
}

#[derive(Debug)]
pub struct BiasStudyOutcome {
    pub reports: Vec<BiasReport>,
    pub n_pass: usize,
    pub n_fail: usize,
}

/// Deterministic interior anchor used as the estimator's base point in bias
/// studies: coordinates proportional to `1..=d`.
pub fn bias_anchor(d: usize) -> SimplexPoint {
    let total = (d * (d + 1) / 2) as f64;
    SimplexPoint::new((1..=d).map(|i| i as f64 / total).collect())
        .expect("ramp coordinates form a simplex point")
}

/// Run [`bias_check`] on every cell of the grid. Cells use independent
/// streams of the base seed, so the grid composition never changes a cell's
/// verdict.
pub fn bias_study(cfg: &BiasStudyConfig) -> Result<BiasStudyOutcome, HarnessError> {
    if cfg.objective_ids.is_empty()
        || cfg.ds.is_empty()
        || cfg.alphas.is_empty()
        || cfg.deltas.is_empty()
    {
        return Err(HarnessError::ConfigInvalid(
            "bias study grid must be nonempty".to_string(),
        ));
    }
    if let Some(&d) = cfg.ds.iter().find(|&&d| d < 2) {
        return Err(HarnessError::ConfigInvalid(format!("d = {d} < 2")));
    }
    if let Some(&a) = cfg.alphas.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(HarnessError::ConfigInvalid(format!(
            "alpha = {a} must be positive"
        )));
    }
    if let Some(&delta) = cfg.deltas.iter().find(|d| !(**d > 0.0 && **d < 1.0)) {
        return Err(HarnessError::ConfigInvalid(format!(
            "delta = {delta} must lie in (0, 1)"
        )));
    }
    if cfg.n_samples < 1000 {
        return Err(HarnessError::ConfigInvalid(format!(
            "n_samples = {} is below the 1000-sample floor",
            cfg.n_samples
        )));
    }
    let mut cells = Vec::new();
    for id in &cfg.objective_ids {
        for &d in &cfg.ds {
            for &alpha in &cfg.alphas {
                for &delta in &cfg.deltas {
                    cells.push((id.clone(), d, alpha, delta, cells.len() as u64));
                }
            }
        }
    }
    let reports: Vec<BiasReport> = cells
        .par_iter()
        .map(|(id, d, alpha, delta, stream)| -> Result<_, HarnessError> {
            let f = objectives::from_id(id, *d)
                .map_err(|_| HarnessError::ObjectiveUnknown(id.clone()))?;
            let config = EstimatorConfig::new(*d, *alpha, *delta)?;
            let mut sampler = DirichletSampler::with_stream(*d, *alpha, cfg.base_seed, *stream)
                .map_err(crate::estimator::EstimatorError::from)?;
            let x = bias_anchor(*d);
            Ok(bias_check(&f, &x, &config, cfg.n_samples, &mut sampler)?)
        })
        .collect::<Result<_, _>>()?;

    let n_pass = reports.iter().filter(|r| r.pass).count();
    let n_fail = reports.len() - n_pass;
    if let Some(path) = &cfg.output_path {
        write_bias_csv(path, &reports)?;
    }
    Ok(BiasStudyOutcome {
        reports,
        n_pass,
        n_fail,
    })
}

/// Serialize bias reports in the fixed column order.
pub fn write_bias<W: Write>(w: W, reports: &[BiasReport]) -> Result<(), HarnessError> {
    let mut writer = csv::Writer::from_writer(w);
    writer.write_record(BIAS_HEADER)?;
    for r in reports {
        writer.write_record([
            r.d.to_string(),
            r.alpha.to_string(),
            r.delta.to_string(),
            r.objective_id.clone(),
            r.n.to_string(),
            r.bias_norm.to_string(),
            r.bound.to_string(),
            r.std_err.to_string(),
            r.pass.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_bias_csv(path: &Path, reports: &[BiasReport]) -> Result<(), HarnessError> {
    let file = std::fs::File::create(path)?;
    write_bias(file, reports)
}
