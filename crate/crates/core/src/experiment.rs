//! Benchmark runs: Halton data on a convex domain, Franke values, PU fit on
//! the reduced grid, error metrics and timings.

use std::fmt::{self, Write as _};
use std::fs::File;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{franke, ErrorReport};
use crate::geometry::{filter_points, grid_points, make_domain, ConvexDomain, GridLayout, PointSet, Shape};
use crate::halton::{halton_points, HaltonConfig};
use crate::partition::{
    assemble_indexed, evaluate, make_covering, max_overlap, AssembleOptions, Covering, CoveringOptions,
    Evaluation, PuModel, SpatialIndexes,
};
use crate::rbf::Kernel;

/// Hard cap on Halton candidates drawn when streaming towards an explicit `n`.
pub const MAX_CANDIDATES: usize = 100_000_000;

/// Default `--max-n` for tables in three dimensions.
pub const DEFAULT_MAX_N_3D: usize = 30_000;

#[derive(Clone, Debug, PartialEq)]
pub enum DomainSpec {
    Builtin(Shape),
    /// Halfspace file, written `hull:FILE` on the command line.
    Hull(PathBuf),
}

impl DomainSpec {
    pub fn build(&self, dim: usize) -> Result<ConvexDomain> {
        match self {
            DomainSpec::Builtin(shape) => make_domain(*shape, dim),
            DomainSpec::Hull(path) => {
                let domain = ConvexDomain::from_file(path)?;
                if domain.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: domain.dim(),
                    });
                }
                Ok(domain)
            }
        }
    }

    /// Dimension implied by the domain alone, if any.
    pub fn native_dim(&self) -> Option<usize> {
        match self {
            DomainSpec::Builtin(shape) => shape.native_dim(),
            DomainSpec::Hull(_) => None,
        }
    }
}

impl FromStr for DomainSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.strip_prefix("hull:") {
            Some("") => Err(Error::Config("`hull:` needs a file path".into())),
            Some(path) => Ok(DomainSpec::Hull(PathBuf::from(path))),
            None => s.parse().map(DomainSpec::Builtin),
        }
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainSpec::Builtin(shape) => write!(f, "{shape}"),
            DomainSpec::Hull(path) => write!(f, "hull:{}", path.display()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleSize {
    /// `(10 k)^dim` Halton candidates, `k` in `1..=5`.
    KLevel(u32),
    /// Exactly this many points kept inside the domain.
    Count(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub domain: DomainSpec,
    pub size: SampleSize,
    pub kernel_shape: f64,
    pub eval_per_axis: usize,
    pub grid_layout: GridLayout,
    pub radius_scale: f64,
    pub jitter: f64,
    /// Replace the Franke function by `f = 1`.
    pub constant_data: bool,
}

impl ExperimentConfig {
    pub fn new(domain: DomainSpec, dim: usize, size: SampleSize) -> Self {
        Self {
            dim,
            domain,
            size,
            kernel_shape: 0.1,
            eval_per_axis: 40,
            grid_layout: GridLayout::default(),
            radius_scale: 1.0,
            jitter: 0.0,
            constant_data: false,
        }
    }

    /// Built-in shape at its native dimension (2 for the cube).
    pub fn builtin(shape: Shape, k_level: u32) -> Self {
        Self::new(
            DomainSpec::Builtin(shape),
            shape.native_dim().unwrap_or(2),
            SampleSize::KLevel(k_level),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.dim) {
            return Err(Error::UnsupportedDimension {
                dim: self.dim,
                reason: "experiments run in 2 or 3 dimensions",
            });
        }
        match self.size {
            SampleSize::KLevel(k) if !(1..=5).contains(&k) => {
                return Err(Error::Config(format!("k-level must lie in 1..=5, got {k}")));
            }
            SampleSize::Count(0) => return Err(Error::Config("--n must be positive".into())),
            _ => {}
        }
        if !(self.kernel_shape > 0.0 && self.kernel_shape.is_finite()) {
            return Err(Error::Config(format!(
                "shape parameter must be positive, got {}",
                self.kernel_shape
            )));
        }
        if self.eval_per_axis < 2 {
            return Err(Error::Config(format!(
                "eval-per-axis must be at least 2, got {}",
                self.eval_per_axis
            )));
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return Err(Error::Config(format!("jitter must be nonnegative, got {}", self.jitter)));
        }
        if !(self.radius_scale > 0.0 && self.radius_scale.is_finite()) {
            return Err(Error::Config(format!(
                "radius scale must be positive, got {}",
                self.radius_scale
            )));
        }
        Ok(())
    }

    fn test_value(&self, p: &[f64]) -> Result<f64> {
        if self.constant_data {
            Ok(1.0)
        } else {
            franke(p)
        }
    }
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub domain: ConvexDomain,
    pub points: PointSet,
    pub values: Vec<f64>,
    /// Halton candidates drawn in the unit box.
    pub candidates: usize,
    /// Share of candidates kept.
    pub fraction: f64,
}

/// Number of Halton candidates for a k-level: `(10 k)^dim`.
pub fn candidate_count(k_level: u32, dim: usize) -> usize {
    (10 * k_level as usize).pow(dim as u32)
}

/// Halton points reduced to the domain, with test function values.
pub fn generate_dataset(config: &ExperimentConfig) -> Result<Dataset> {
    config.validate()?;
    let domain = config.domain.build(config.dim)?;
    let (points, candidates) = match config.size {
        SampleSize::KLevel(k) => {
            let candidates = candidate_count(k, config.dim);
            let (kept, _) = filter_points(&domain, &halton_points(candidates, config.dim)?)?;
            (kept, candidates)
        }
        SampleSize::Count(n) => stream_until(&domain, n)?,
    };
    if points.is_empty() {
        return Err(Error::Empty("no Halton candidate falls inside the domain"));
    }
    let values = points
        .iter()
        .map(|p| config.test_value(p))
        .collect::<Result<Vec<_>>>()?;
    let fraction = points.len() as f64 / candidates as f64;
    Ok(Dataset {
        domain,
        points,
        values,
        candidates,
        fraction,
    })
}

fn stream_until(domain: &ConvexDomain, n: usize) -> Result<(PointSet, usize)> {
    let halton = HaltonConfig::new(domain.dim())?;
    let mut kept = PointSet::with_capacity(domain.dim(), n);
    let mut drawn = 0;
    for p in halton.iter() {
        if kept.len() == n {
            break;
        }
        if drawn == MAX_CANDIDATES {
            return Err(Error::Config(format!(
                "only {} of {n} points found inside the domain after {MAX_CANDIDATES} candidates",
                kept.len()
            )));
        }
        drawn += 1;
        if domain.contains_unchecked(&p) {
            kept.push(&p)?;
        }
    }
    Ok((kept, drawn))
}

/// One row of a results table. Timings are in milliseconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub domain: String,
    pub dim: usize,
    pub candidates: usize,
    pub n: usize,
    /// Subdomains inside the domain.
    pub d: usize,
    /// Subdomain grid size before reduction to the domain.
    pub grid_total: usize,
    pub radius: f64,
    pub kernel_shape: f64,
    /// Evaluation points inside the domain.
    pub s: usize,
    pub mae: f64,
    pub rmse: f64,
    pub max_overlap: usize,
    pub empty_count: usize,
    pub uncovered_count: usize,
    pub generate_ms: f64,
    pub build_ms: f64,
    pub assemble_ms: f64,
    pub evaluate_ms: f64,
}

impl RunRecord {
    pub const HEADER: [&'static str; 18] = [
        "domain",
        "dim",
        "candidates",
        "n",
        "d",
        "grid_total",
        "radius",
        "kernel_shape",
        "s",
        "mae",
        "rmse",
        "max_overlap",
        "empty_count",
        "uncovered_count",
        "generate_ms",
        "build_ms",
        "assemble_ms",
        "evaluate_ms",
    ];

    pub fn total_ms(&self) -> f64 {
        self.generate_ms + self.build_ms + self.assemble_ms + self.evaluate_ms
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.domain.clone(),
            self.dim.to_string(),
            self.candidates.to_string(),
            self.n.to_string(),
            self.d.to_string(),
            self.grid_total.to_string(),
            full_precision(self.radius),
            full_precision(self.kernel_shape),
            self.s.to_string(),
            full_precision(self.mae),
            full_precision(self.rmse),
            self.max_overlap.to_string(),
            self.empty_count.to_string(),
            self.uncovered_count.to_string(),
            full_precision(self.generate_ms),
            full_precision(self.build_ms),
            full_precision(self.assemble_ms),
            full_precision(self.evaluate_ms),
        ]
    }
}

/// Everything produced by a run, kept for further analysis.
#[derive(Debug)]
pub struct ExperimentRun {
    pub dataset: Dataset,
    pub model: PuModel,
    pub eval_points: PointSet,
    pub truth: Vec<f64>,
    pub evaluation: Evaluation,
    pub record: RunRecord,
}

impl ExperimentRun {
    pub fn abs_errors(&self) -> Vec<f64> {
        self.truth
            .iter()
            .zip(&self.evaluation.values)
            .map(|(t, a)| (t - a).abs())
            .collect()
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunRecord> {
    run_experiment_detailed(config).map(|run| run.record)
}

pub fn run_experiment_detailed(config: &ExperimentConfig) -> Result<ExperimentRun> {
    let start = Instant::now();
    let dataset = generate_dataset(config)?;
    let generate_ms = elapsed_ms(start);
    run_with_dataset(config, dataset, generate_ms)
}

/// Runs the fit and evaluation stages on an existing dataset.
pub fn run_with_dataset(config: &ExperimentConfig, dataset: Dataset, generate_ms: f64) -> Result<ExperimentRun> {
    config.validate()?;
    if dataset.points.dim() != config.dim {
        return Err(Error::DimensionMismatch {
            expected: config.dim,
            found: dataset.points.dim(),
        });
    }
    let start = Instant::now();
    let covering = make_covering(
        &dataset.domain,
        dataset.points.len(),
        dataset.fraction,
        CoveringOptions {
            layout: config.grid_layout,
            radius_scale: config.radius_scale,
        },
    )?;
    let indexes = SpatialIndexes::build(&dataset.points, &covering)?;
    let (eval_points, _) = filter_points(
        &dataset.domain,
        &grid_points(config.dim, config.eval_per_axis, config.grid_layout)?,
    )?;
    if eval_points.is_empty() {
        return Err(Error::Empty("no evaluation grid point falls inside the domain"));
    }
    let truth = eval_points
        .iter()
        .map(|p| config.test_value(p))
        .collect::<Result<Vec<_>>>()?;
    let build_ms = elapsed_ms(start);

    fit_and_measure(config, dataset, covering, indexes, eval_points, truth, generate_ms, build_ms)
}

#[allow(clippy::too_many_arguments)]
fn fit_and_measure(
    config: &ExperimentConfig,
    dataset: Dataset,
    covering: Covering,
    indexes: SpatialIndexes,
    eval_points: PointSet,
    truth: Vec<f64>,
    generate_ms: f64,
    build_ms: f64,
) -> Result<ExperimentRun> {
    let start = Instant::now();
    let model = assemble_indexed(
        &dataset.domain,
        indexes,
        &dataset.values,
        covering,
        Kernel::new(config.kernel_shape)?,
        AssembleOptions { jitter: config.jitter },
    )?;
    let assemble_ms = elapsed_ms(start);

    let start = Instant::now();
    let evaluation = evaluate(&model, &eval_points)?;
    let report = ErrorReport::compute(&truth, &evaluation.values)?;
    let overlap = max_overlap(&model, &eval_points)?;
    let evaluate_ms = elapsed_ms(start);

    let record = RunRecord {
        domain: dataset.domain.label().to_string(),
        dim: config.dim,
        candidates: dataset.candidates,
        n: dataset.points.len(),
        d: model.covering().len(),
        grid_total: model.covering().grid_total(),
        radius: model.covering().radius(),
        kernel_shape: config.kernel_shape,
        s: report.s,
        mae: report.mae,
        rmse: report.rmse,
        max_overlap: overlap,
        empty_count: model.empty_count(),
        uncovered_count: evaluation.uncovered.len(),
        generate_ms,
        build_ms,
        assemble_ms,
        evaluate_ms,
    };
    info!(
        "{} n = {}: rmse {:.3e}, mae {:.3e}, {:.1} ms",
        record.domain,
        record.n,
        record.rmse,
        record.mae,
        record.total_ms()
    );
    Ok(ExperimentRun {
        dataset,
        model,
        eval_points,
        truth,
        evaluation,
        record,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRange {
    pub min: f64,
    pub max: f64,
    pub samples: usize,
}

impl Default for SweepRange {
    fn default() -> Self {
        Self {
            min: 0.1,
            max: 3.0,
            samples: 30,
        }
    }
}

impl SweepRange {
    /// Log-spaced shape parameters from `min` to `max`; a single sample is `min`.
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.min > 0.0 && self.max >= self.min && self.max.is_finite()) {
            return Err(Error::Config(format!(
                "sweep range needs 0 < min <= max, got [{}, {}]",
                self.min, self.max
            )));
        }
        if self.samples == 0 {
            return Err(Error::Config("sweep needs at least one sample".into()));
        }
        if self.samples == 1 {
            return Ok(vec![self.min]);
        }
        let (lo, hi) = (self.min.ln(), self.max.ln());
        let last = (self.samples - 1) as f64;
        Ok((0..self.samples)
            .map(|i| match i {
                0 => self.min,
                i if i == self.samples - 1 => self.max,
                i => (lo + (hi - lo) * i as f64 / last).exp(),
            })
            .collect())
    }
}

/// Runs the configuration once per shape parameter, reusing the data, the
/// covering, the kd-trees and the evaluation grid.
pub fn shape_sweep(config: &ExperimentConfig, range: SweepRange) -> Result<Vec<(f64, RunRecord)>> {
    let shapes = range.values()?;
    let first = ExperimentConfig {
        kernel_shape: shapes[0],
        ..config.clone()
    };
    let base = run_experiment_detailed(&first)?;
    let ExperimentRun {
        dataset,
        model,
        eval_points,
        truth,
        record,
        ..
    } = base;
    let covering = model.covering().clone();
    let indexes = SpatialIndexes::build(&dataset.points, &covering)?;
    drop(model);

    let mut out = vec![(shapes[0], record.clone())];
    for &shape in &shapes[1..] {
        let cfg = ExperimentConfig {
            kernel_shape: shape,
            ..config.clone()
        };
        let run = fit_and_measure(
            &cfg,
            dataset.clone(),
            covering.clone(),
            indexes.clone(),
            eval_points.clone(),
            truth.clone(),
            0.0,
            0.0,
        )?;
        out.push((shape, run.record));
    }
    Ok(out)
}

/// Runs k-levels `1..=5`, stopping before the first dataset larger than `max_n`.
pub fn run_table(config: &ExperimentConfig, max_n: Option<usize>) -> Result<Vec<RunRecord>> {
    let mut rows = Vec::new();
    for k in 1..=5 {
        let cfg = ExperimentConfig {
            size: SampleSize::KLevel(k),
            ..config.clone()
        };
        let start = Instant::now();
        let dataset = generate_dataset(&cfg)?;
        let generate_ms = elapsed_ms(start);
        if max_n.is_some_and(|cap| dataset.points.len() > cap) {
            info!("stopping at k = {k}: n = {} exceeds the cap", dataset.points.len());
            break;
        }
        rows.push(run_with_dataset(&cfg, dataset, generate_ms)?.record);
    }
    Ok(rows)
}

/// Mean distance to the boundary over the `top_fraction` evaluation points
/// with the largest absolute error, and over all evaluation points.
pub fn boundary_error_profile(run: &ExperimentRun, top_fraction: f64) -> Result<(f64, f64)> {
    if !(top_fraction > 0.0 && top_fraction <= 1.0) {
        return Err(Error::Config(format!(
            "top fraction must lie in (0, 1], got {top_fraction}"
        )));
    }
    let errors = run.abs_errors();
    if errors.is_empty() {
        return Err(Error::Empty("run has no evaluation points"));
    }
    let dist: Vec<f64> = run
        .eval_points
        .iter()
        .map(|p| run.dataset.domain.signed_boundary_distance(p))
        .collect();
    let mut order: Vec<usize> = (0..errors.len()).collect();
    order.sort_by(|&a, &b| errors[b].total_cmp(&errors[a]).then(a.cmp(&b)));
    let top = ((errors.len() as f64 * top_fraction).ceil() as usize).max(1);
    let mean = |idx: &mut dyn Iterator<Item = usize>, count: usize| idx.map(|i| dist[i]).sum::<f64>() / count as f64;
    let top_mean = mean(&mut order.iter().copied().take(top), top);
    let all_mean = mean(&mut (0..errors.len()), errors.len());
    Ok((top_mean, all_mean))
}

/// Runs `f` on a dedicated pool of `threads` workers (`0` keeps the global pool).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(f))
}

/// 17 significant digits: enough for an exact round trip.
pub fn full_precision(v: f64) -> String {
    format!("{v:.16e}")
}

/// Three significant digits with a signed two-digit exponent, e.g. `1.06E-02`.
pub fn sci3(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let s = format!("{v:.2E}");
    let (mantissa, exp) = s.split_once('E').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}E{sign}{:02}", exp.abs())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file))
}

fn csv_error(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_records(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(RunRecord::HEADER).map_err(csv_error(path))?;
    for r in records {
        w.write_record(r.fields()).map_err(csv_error(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_error(path))?;
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_error(path))
}

/// Two columns, `shape,rmse`.
pub fn write_sweep(path: &Path, sweep: &[(f64, RunRecord)]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["shape", "rmse"]).map_err(csv_error(path))?;
    for (shape, r) in sweep {
        w.write_record([full_precision(*shape), full_precision(r.rmse)])
            .map_err(csv_error(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One row per evaluation point: coordinates, `f`, `I` and `abserr`.
pub fn export_error_field(run: &ExperimentRun, path: &Path) -> Result<()> {
    let dim = run.eval_points.dim();
    let mut w = csv_writer(path)?;
    let mut header: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    header.extend(["f", "I", "abserr"].map(String::from));
    w.write_record(&header).map_err(csv_error(path))?;
    for (i, p) in run.eval_points.iter().enumerate() {
        let (f, a) = (run.truth[i], run.evaluation.values[i]);
        let row = p
            .iter()
            .copied()
            .chain([f, a, (f - a).abs()])
            .map(full_precision);
        w.write_record(row).map_err(csv_error(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Aligned table in the style `n  D  K  MAE  RMSE  time(s)`.
pub fn format_table(records: &[RunRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>8} {:>6} {:>3} {:>10} {:>10} {:>10}",
        "n",
        "D",
        "K",
        "MAE",
        "RMSE",
        "time(s)"
    );
    for r in records {
        let _ = writeln!(
            out,
            "{:>8} {:>6} {:>3} {:>10} {:>10} {:>10}",
            r.n,
            r.d,
            r.max_overlap,
            sci3(r.mae),
            sci3(r.rmse),
            sci3(r.total_ms() / 1e3)
        );
    }
    out
}
