//! Seeded ensemble studies.
//!
//! Every study draws one fBm realization per `(hurst, sample)` at the
//! reference resolution `2^reference_exponent` and restricts it to each
//! coarse grid, so all resolutions of a sample see the same path. Samples are
//! independent and run in parallel; results are gathered in
//! `(hurst, sample, k)` order, so output never depends on scheduling.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    default_beta, fit_rate, l1_distance, linear_fit, lip_bound_rhs, lip_plus, lip_plus_periodic,
    tv_of, tv_time_integral, BoundInputs,
};
use crate::error::{Error, Result};
use crate::flux::{FluxSpec, NumericalFluxKind};
use crate::initial_data::{
    fbm_initial_field, fbm_midpoint, normalize_to_unit, sample_seed, RngState, MAX_FBM_LEVEL,
};
use crate::mesh::{restrict, CellField, Grid};
use crate::solver::{evolve, evolve_observed, Boundary, SchemeConfig};

/// Support radius bound used by the sharpness study (half of `[0, 1]`).
pub const SUPPORT_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub equation: FluxSpec,
    pub numflux: NumericalFluxKind,
    pub hurst: Vec<f64>,
    /// Grid exponents `k` (grids of `2^k` cells on `[0, 1]`).
    pub resolutions: Vec<u32>,
    pub reference_exponent: u32,
    pub t_final: f64,
    pub n_samples: usize,
    pub base_seed: u64,
    pub cfl: f64,
    pub boundary: Boundary,
    pub snapshot_times: Vec<f64>,
    /// Lip⁺ decay rate for the sharpness study; defaults only for
    /// Burgers + Godunov.
    pub beta: Option<f64>,
}

impl StudyConfig {
    /// Desk-scale Burgers + Godunov defaults.
    pub fn desk_scale() -> Self {
        Self {
            equation: FluxSpec::Burgers,
            numflux: NumericalFluxKind::Godunov,
            hurst: vec![0.5],
            resolutions: (5..=9).collect(),
            reference_exponent: 11,
            t_final: 1.0,
            n_samples: 16,
            base_seed: 1,
            cfl: crate::solver::DEFAULT_CFL,
            boundary: Boundary::Outflow,
            snapshot_times: Vec::new(),
            beta: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::Validation(msg));
        if self.hurst.is_empty() {
            return invalid("hurst list is empty".into());
        }
        if let Some(h) = self.hurst.iter().find(|h| !(**h > 0.0 && **h < 1.0)) {
            return invalid(format!("Hurst exponent {h} outside (0, 1)"));
        }
        if self.resolutions.is_empty() {
            return invalid("resolution list is empty".into());
        }
        if let Some(k) = self.resolutions.iter().find(|&&k| k == 0) {
            return invalid(format!("resolution exponent {k} must be at least 1"));
        }
        if self.resolutions.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("resolutions must be strictly increasing".into());
        }
        if self.reference_exponent > MAX_FBM_LEVEL {
            return invalid(format!(
                "reference_exponent {} exceeds the maximum of {MAX_FBM_LEVEL}",
                self.reference_exponent
            ));
        }
        if let Some(k) = self.resolutions.iter().find(|&&k| k >= self.reference_exponent) {
            return invalid(format!(
                "resolution {k} is not below reference_exponent {}",
                self.reference_exponent
            ));
        }
        if self.n_samples == 0 {
            return invalid("samples must be at least 1".into());
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return invalid(format!("t_final must be finite and nonnegative, got {}", self.t_final));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return invalid(format!("cfl must lie in (0, 1], got {}", self.cfl));
        }
        if !self.numflux.supports(self.equation) {
            return invalid(format!(
                "numflux {} is only defined for the linear equation, not {}",
                self.numflux, self.equation
            ));
        }
        if self.snapshot_times.windows(2).any(|w| w[0] > w[1]) {
            return invalid("snapshot_times must be sorted".into());
        }
        if let Some(t) = self.snapshot_times.iter().find(|&&t| !(t >= 0.0 && t <= self.t_final)) {
            return invalid(format!("snapshot time {t} outside [0, {}]", self.t_final));
        }
        if let Some(b) = self.beta {
            if !(b > 0.0 && b.is_finite()) {
                return invalid(format!("beta must be positive, got {b}"));
            }
        }
        Ok(())
    }

    pub fn scheme(&self) -> Result<SchemeConfig> {
        SchemeConfig::new(self.equation, self.numflux, self.cfl, self.boundary, self.t_final)
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.n_samples).map(|i| sample_seed(self.base_seed, i)).collect()
    }

    fn reference_grid(&self) -> Result<Grid> {
        Grid::unit_dyadic(self.reference_exponent)
    }

    fn dx(k: u32) -> f64 {
        (-(k as f64)).exp2()
    }
}

/// One cell of a result table.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Text(String),
    Int(i64),
    Float(f64),
    Empty,
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_owned())
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<Option<f64>> for Value {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Value::Empty, Value::Float)
    }
}

impl Value {
    /// Float cell, empty when the value is not finite (e.g. an undefined mean).
    pub fn finite(v: f64) -> Value {
        if v.is_finite() {
            Value::Float(v)
        } else {
            Value::Empty
        }
    }
}

impl From<u32> for Value {
    fn from(v: u32) -> Self {
        Value::Int(v as i64)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

/// Sample column entry of a per-sample row.
fn sample_label(i: usize) -> Value {
    Value::Int(i as i64)
}

fn seed_value(seed: u64) -> Value {
    Value::Text(seed.to_string())
}

/// Tabular study output, ready for CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub study: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub seeds: Vec<u64>,
}

impl StudyResult {
    fn new(study: &'static str, columns: &[&'static str], seeds: Vec<u64>) -> Self {
        Self {
            study,
            columns: columns.to_vec(),
            rows: Vec::new(),
            seeds,
        }
    }

    fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Sample mean and (n−1)-normalized standard deviation; the deviation of a
/// single value is 0.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}

/// Runs `job(hurst, sample, seed)` for every `(hurst, sample)` pair on
/// `workers` threads (0 picks the number of available cores). Results come
/// back grouped per hurst in sample order.
pub fn run_samples_parallel<T, F>(cfg: &StudyConfig, workers: usize, job: F) -> Result<Vec<Vec<T>>>
where
    T: Send,
    F: Fn(f64, usize, u64) -> Result<T> + Sync,
{
    use rayon::prelude::*;

    if cfg.n_samples == 0 {
        return Err(Error::Validation("samples must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let tasks: Vec<(usize, usize)> = (0..cfg.hurst.len())
        .flat_map(|h| (0..cfg.n_samples).map(move |s| (h, s)))
        .collect();
    let results: Vec<Result<T>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(h, s)| {
                let seed = sample_seed(cfg.base_seed, s);
                job(cfg.hurst[h], s, seed).map_err(|e| Error::Sample {
                    sample: s,
                    seed,
                    source: Box::new(e),
                })
            })
            .collect()
    });
    let mut grouped: Vec<Vec<T>> = (0..cfg.hurst.len()).map(|_| Vec::with_capacity(cfg.n_samples)).collect();
    for ((h, _), r) in tasks.into_iter().zip(results) {
        grouped[h].push(r?);
    }
    Ok(grouped)
}

/// Normalized fBm for `(hurst, seed)` on the reference grid.
pub fn reference_initial(cfg: &StudyConfig, hurst: f64, seed: u64) -> Result<CellField> {
    fbm_initial_field(hurst, &cfg.reference_grid()?, seed)
}

/// Restriction of a reference field onto the `2^k` grid.
pub fn coarse_initial(reference: &CellField, k: u32) -> Result<CellField> {
    let n = reference.grid().n_cells();
    let target = 1usize << k;
    if target > n {
        return Err(Error::IncompatibleGrids(format!(
            "cannot restrict {n} cells onto {target}"
        )));
    }
    restrict(reference, n / target)
}

// ---------------------------------------------------------------------------
// convergence
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceSample {
    pub sample: usize,
    pub seed: u64,
    /// `(k, dx, L¹ error)` per resolution.
    pub errors: Vec<(u32, f64, f64)>,
    /// Rate between consecutive resolutions; `None` for the coarsest.
    pub pairwise: Vec<Option<f64>>,
    /// Least-squares rate over all resolutions.
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceSummary {
    pub hurst: f64,
    pub mean_rate: f64,
    pub std_rate: f64,
    pub min_rate: f64,
    pub max_rate: f64,
    /// Ensemble mean and standard deviation of the error per resolution.
    pub mean_error: Vec<f64>,
    pub std_error: Vec<f64>,
    pub mean_pairwise: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub resolutions: Vec<u32>,
    pub hurst: Vec<f64>,
    pub samples: Vec<Vec<ConvergenceSample>>,
    pub summaries: Vec<ConvergenceSummary>,
    pub seeds: Vec<u64>,
}

fn pairwise_rates(errors: &[(u32, f64, f64)]) -> Vec<Option<f64>> {
    std::iter::once(None)
        .chain(errors.windows(2).map(|w| {
            let (_, h0, e0) = w[0];
            let (_, h1, e1) = w[1];
            (e0 > 0.0 && e1 > 0.0).then(|| (e0 / e1).ln() / (h0 / h1).ln())
        }))
        .collect()
}

/// Per-sample convergence against a same-scheme reference solution.
pub fn convergence_sample(
    cfg: &StudyConfig,
    reference: &CellField,
    sample: usize,
    seed: u64,
) -> Result<ConvergenceSample> {
    let scheme = cfg.scheme()?;
    let reference_final = evolve(reference, &scheme, &[])?.final_field;
    let mut errors = Vec::with_capacity(cfg.resolutions.len());
    for &k in &cfg.resolutions {
        let coarse = coarse_initial(reference, k)?;
        let solution = evolve(&coarse, &scheme, &[])?.final_field;
        errors.push((k, StudyConfig::dx(k), l1_distance(&solution, &reference_final)?));
    }
    let pairwise = pairwise_rates(&errors);
    let pts: Vec<(f64, f64)> = errors.iter().map(|&(_, h, e)| (h, e)).collect();
    let rate = fit_rate(&pts).ok().map(|f| f.slope);
    Ok(ConvergenceSample {
        sample,
        seed,
        errors,
        pairwise,
        rate,
    })
}

pub fn convergence_study(cfg: &StudyConfig, workers: usize) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let samples = run_samples_parallel(cfg, workers, |hurst, sample, seed| {
        let reference = reference_initial(cfg, hurst, seed)?;
        convergence_sample(cfg, &reference, sample, seed)
    })?;
    let summaries = cfg
        .hurst
        .iter()
        .zip(&samples)
        .map(|(&hurst, per)| {
            let rates: Vec<f64> = per.iter().filter_map(|s| s.rate).collect();
            let (mean_rate, std_rate) = mean_std(&rates);
            let nres = cfg.resolutions.len();
            let mut mean_error = Vec::with_capacity(nres);
            let mut std_error = Vec::with_capacity(nres);
            let mut mean_pairwise = Vec::with_capacity(nres);
            for r in 0..nres {
                let errs: Vec<f64> = per.iter().map(|s| s.errors[r].2).collect();
                let (m, sd) = mean_std(&errs);
                mean_error.push(m);
                std_error.push(sd);
                let pw: Vec<f64> = per.iter().filter_map(|s| s.pairwise[r]).collect();
                mean_pairwise.push((!pw.is_empty()).then(|| mean_std(&pw).0));
            }
            ConvergenceSummary {
                hurst,
                mean_rate,
                std_rate,
                min_rate: rates.iter().copied().fold(f64::INFINITY, f64::min),
                max_rate: rates.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                mean_error,
                std_error,
                mean_pairwise,
            }
        })
        .collect();
    Ok(ConvergenceReport {
        resolutions: cfg.resolutions.clone(),
        hurst: cfg.hurst.clone(),
        samples,
        summaries,
        seeds: cfg.seeds(),
    })
}

impl ConvergenceReport {
    pub const COLUMNS: [&'static str; 9] = [
        "study", "hurst", "sample", "seed", "k", "dx", "l1_error", "rate_pairwise", "rate",
    ];

    pub fn to_result(&self) -> StudyResult {
        let mut out = StudyResult::new("converge", &Self::COLUMNS, self.seeds.clone());
        for (summary, per) in self.summaries.iter().zip(&self.samples) {
            let h = summary.hurst;
            for s in per {
                for (&(k, dx, e), pw) in s.errors.iter().zip(&s.pairwise) {
                    out.push(vec![
                        "converge".into(), h.into(), sample_label(s.sample), seed_value(s.seed),
                        k.into(), dx.into(), e.into(), (*pw).into(), Value::Empty,
                    ]);
                }
                out.push(vec![
                    "converge".into(), h.into(), sample_label(s.sample), seed_value(s.seed),
                    Value::Empty, Value::Empty, Value::Empty, Value::Empty, s.rate.into(),
                ]);
            }
            for (label, errs, rate) in [
                ("MEAN", &summary.mean_error, summary.mean_rate),
                ("STD", &summary.std_error, summary.std_rate),
            ] {
                for (r, &k) in self.resolutions.iter().enumerate() {
                    let pw = if label == "MEAN" { summary.mean_pairwise[r].into() } else { Value::Empty };
                    out.push(vec![
                        "converge".into(), h.into(), label.into(), Value::Empty,
                        k.into(), StudyConfig::dx(k).into(), errs[r].into(), pw, Value::Empty,
                    ]);
                }
                out.push(vec![
                    "converge".into(), h.into(), label.into(), Value::Empty,
                    Value::Empty, Value::Empty, Value::Empty, Value::Empty, Value::finite(rate),
                ]);
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// TV and Lip+ scaling of the initial data
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingMeasure {
    TotalVariation,
    LipPlus,
}

impl ScalingMeasure {
    fn study(self) -> &'static str {
        match self {
            ScalingMeasure::TotalVariation => "tvscale",
            ScalingMeasure::LipPlus => "lipscale",
        }
    }

    fn column(self) -> &'static str {
        match self {
            ScalingMeasure::TotalVariation => "tv",
            ScalingMeasure::LipPlus => "lip_plus",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSample {
    pub sample: usize,
    pub seed: u64,
    /// `(k, dx, measured value)`.
    pub values: Vec<(u32, f64, f64)>,
    /// Fitted slope of `ln value` against `ln dx`; `None` when fewer than
    /// two resolutions carry a positive value.
    pub slope: Option<f64>,
}

impl ScalingSample {
    /// Resolutions excluded from the fit (nonpositive measurement).
    pub fn flagged(&self) -> impl Iterator<Item = u32> + '_ {
        self.values.iter().filter(|v| !(v.2 > 0.0)).map(|v| v.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub measure: ScalingMeasure,
    pub hurst: Vec<f64>,
    pub samples: Vec<Vec<ScalingSample>>,
    /// `(mean slope, std slope, number of samples with a slope)` per hurst.
    pub summaries: Vec<(f64, f64, usize)>,
    pub seeds: Vec<u64>,
}

/// Scaling measurements of one reference field across `resolutions`.
pub fn scaling_sample(
    measure: ScalingMeasure,
    reference: &CellField,
    resolutions: &[u32],
    periodic: bool,
    sample: usize,
    seed: u64,
) -> Result<ScalingSample> {
    let mut values = Vec::with_capacity(resolutions.len());
    for &k in resolutions {
        let field = coarse_initial(reference, k)?;
        let v = match (measure, periodic) {
            (ScalingMeasure::TotalVariation, p) => tv_of(field.values(), p),
            (ScalingMeasure::LipPlus, false) => lip_plus(&field)?,
            (ScalingMeasure::LipPlus, true) => lip_plus_periodic(&field)?,
        };
        values.push((k, StudyConfig::dx(k), v));
    }
    let pts: Vec<(f64, f64)> = values.iter().filter(|v| v.2 > 0.0).map(|v| (v.1, v.2)).collect();
    let slope = if pts.len() >= 2 { fit_rate(&pts).ok().map(|f| f.slope) } else { None };
    Ok(ScalingSample {
        sample,
        seed,
        values,
        slope,
    })
}

fn scaling_study(measure: ScalingMeasure, cfg: &StudyConfig, workers: usize) -> Result<ScalingReport> {
    cfg.validate()?;
    let periodic = cfg.boundary.is_periodic();
    let samples = run_samples_parallel(cfg, workers, |hurst, sample, seed| {
        let reference = reference_initial(cfg, hurst, seed)?;
        scaling_sample(measure, &reference, &cfg.resolutions, periodic, sample, seed)
    })?;
    let summaries = samples
        .iter()
        .map(|per| {
            let slopes: Vec<f64> = per.iter().filter_map(|s| s.slope).collect();
            let (m, sd) = mean_std(&slopes);
            (m, sd, slopes.len())
        })
        .collect();
    Ok(ScalingReport {
        measure,
        hurst: cfg.hurst.clone(),
        samples,
        summaries,
        seeds: cfg.seeds(),
    })
}

/// Growth of `TV(v⁰)` as the mesh is refined.
pub fn tv_scaling_study(cfg: &StudyConfig, workers: usize) -> Result<ScalingReport> {
    scaling_study(ScalingMeasure::TotalVariation, cfg, workers)
}

/// Growth of the initial Lip⁺ seminorm as the mesh is refined.
pub fn lip_scaling_study(cfg: &StudyConfig, workers: usize) -> Result<ScalingReport> {
    scaling_study(ScalingMeasure::LipPlus, cfg, workers)
}

impl ScalingReport {
    pub fn mean_slope(&self, hurst_index: usize) -> f64 {
        self.summaries[hurst_index].0
    }

    pub fn to_result(&self) -> StudyResult {
        let study = self.measure.study();
        let columns = ["study", "hurst", "sample", "seed", "k", "dx", self.measure.column(), "slope", "flag"];
        let mut out = StudyResult::new(study, &columns, self.seeds.clone());
        for ((&h, per), &(mean, sd, _)) in self.hurst.iter().zip(&self.samples).zip(&self.summaries) {
            for s in per {
                for &(k, dx, v) in &s.values {
                    let flag = if v > 0.0 { Value::Empty } else { "excluded_nonpositive".into() };
                    out.push(vec![
                        study.into(), h.into(), sample_label(s.sample), seed_value(s.seed),
                        k.into(), dx.into(), v.into(), Value::Empty, flag,
                    ]);
                }
                let flag = if s.slope.is_some() { Value::Empty } else { "slope_undefined".into() };
                out.push(vec![
                    study.into(), h.into(), sample_label(s.sample), seed_value(s.seed),
                    Value::Empty, Value::Empty, Value::Empty, s.slope.into(), flag,
                ]);
            }
            for (label, v) in [("MEAN", mean), ("STD", sd)] {
                let flag = if v.is_finite() { Value::Empty } else { "slope_undefined".into() };
                let v = if v.is_finite() { Value::Float(v) } else { Value::Empty };
                out.push(vec![
                    study.into(), h.into(), label.into(), Value::Empty,
                    Value::Empty, Value::Empty, Value::Empty, v, flag,
                ]);
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// TV decay in time
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct DecaySeries {
    pub k: u32,
    /// `(recorded time, TV)` per snapshot.
    pub tv: Vec<(f64, f64)>,
    /// R² of the least-squares line through `(t, 1/TV)` over the positive
    /// snapshot times; `None` when fewer than two usable points.
    pub r_squared: Option<f64>,
    /// Largest step-to-step increase of TV over the whole run (≤ 0 for a
    /// TVD run).
    pub max_tv_increase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecaySample {
    pub sample: usize,
    pub seed: u64,
    pub series: Vec<DecaySeries>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub hurst: Vec<f64>,
    pub samples: Vec<Vec<DecaySample>>,
    pub seeds: Vec<u64>,
}

pub fn tv_decay_sample(
    cfg: &StudyConfig,
    reference: &CellField,
    sample: usize,
    seed: u64,
) -> Result<DecaySample> {
    let scheme = cfg.scheme()?;
    let mut series = Vec::with_capacity(cfg.resolutions.len());
    for &k in &cfg.resolutions {
        let initial = coarse_initial(reference, k)?;
        let traj = evolve(&initial, &scheme, &cfg.snapshot_times)?;
        let periodic = cfg.boundary.is_periodic();
        let tv: Vec<(f64, f64)> = traj
            .snapshots
            .iter()
            .map(|s| (s.time, tv_of(s.field.values(), periodic)))
            .collect();
        let pts: Vec<(f64, f64)> = tv
            .iter()
            .filter(|(t, v)| *t > 0.0 && *v > 0.0)
            .map(|&(t, v)| (t, 1.0 / v))
            .collect();
        let r_squared = linear_fit(&pts).ok().map(|f| f.r_squared);
        let max_tv_increase = traj
            .per_step_tv
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max);
        series.push(DecaySeries {
            k,
            tv,
            r_squared,
            max_tv_increase,
        });
    }
    Ok(DecaySample { sample, seed, series })
}

/// TV of the numerical solution at the configured snapshot times.
pub fn tv_decay_study(cfg: &StudyConfig, workers: usize) -> Result<DecayReport> {
    cfg.validate()?;
    if cfg.snapshot_times.is_empty() {
        return Err(Error::Validation("tvdecay needs snapshot_times".into()));
    }
    if cfg.snapshot_times.iter().any(|&t| t <= 0.0) {
        return Err(Error::Validation("tvdecay snapshot times must be positive".into()));
    }
    let samples = run_samples_parallel(cfg, workers, |hurst, sample, seed| {
        let reference = reference_initial(cfg, hurst, seed)?;
        tv_decay_sample(cfg, &reference, sample, seed)
    })?;
    Ok(DecayReport {
        hurst: cfg.hurst.clone(),
        samples,
        seeds: cfg.seeds(),
    })
}

impl DecayReport {
    pub const COLUMNS: [&'static str; 10] = [
        "study", "hurst", "sample", "seed", "k", "time", "tv", "inv_tv", "r_squared", "max_tv_increase",
    ];

    /// Median R² over samples for hurst index `h` and resolution index `r`.
    pub fn median_r_squared(&self, h: usize, r: usize) -> f64 {
        let values: Vec<f64> = self.samples[h].iter().filter_map(|s| s.series[r].r_squared).collect();
        median(&values)
    }

    pub fn to_result(&self) -> StudyResult {
        let mut out = StudyResult::new("tvdecay", &Self::COLUMNS, self.seeds.clone());
        for (&h, per) in self.hurst.iter().zip(&self.samples) {
            for s in per {
                for series in &s.series {
                    for &(t, tv) in &series.tv {
                        let inv = if tv > 0.0 { Value::Float(1.0 / tv) } else { Value::Empty };
                        out.push(vec![
                            "tvdecay".into(), h.into(), sample_label(s.sample), seed_value(s.seed),
                            series.k.into(), t.into(), tv.into(), inv, Value::Empty, Value::Empty,
                        ]);
                    }
                    out.push(vec![
                        "tvdecay".into(), h.into(), sample_label(s.sample), seed_value(s.seed),
                        series.k.into(), Value::Empty, Value::Empty, Value::Empty,
                        series.r_squared.into(), series.max_tv_increase.into(),
                    ]);
                }
            }
            let n_res = per.first().map_or(0, |s| s.series.len());
            for r in 0..n_res {
                let r2: Vec<f64> = per.iter().filter_map(|s| s.series[r].r_squared).collect();
                let worst = per.iter().map(|s| s.series[r].max_tv_increase).fold(f64::NEG_INFINITY, f64::max);
                let k = per[0].series[r].k;
                out.push(vec![
                    "tvdecay".into(), h.into(), "MEDIAN".into(), Value::Empty,
                    k.into(), Value::Empty, Value::Empty, Value::Empty,
                    (!r2.is_empty()).then(|| median(&r2)).into(), worst.into(),
                ]);
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// sharpness of the time-integrated TV bound
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessPoint {
    pub k: u32,
    pub dx: f64,
    pub lip_plus_0: f64,
    pub dt: f64,
    pub tv_integral: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessSample {
    pub sample: usize,
    pub seed: u64,
    pub points: Vec<SharpnessPoint>,
    /// Slope of `ln ratio` against `ln dx`.
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessReport {
    pub beta: f64,
    pub hurst: Vec<f64>,
    pub samples: Vec<Vec<SharpnessSample>>,
    /// `(mean slope, std slope, smallest ratio)` per hurst.
    pub summaries: Vec<(f64, f64, f64)>,
    pub seeds: Vec<u64>,
}

/// Resolve `β` for the configured scheme.
pub fn resolve_beta(cfg: &StudyConfig) -> Result<f64> {
    cfg.beta
        .or_else(|| default_beta(cfg.equation, cfg.numflux))
        .ok_or_else(|| {
            Error::Validation(format!(
                "no known Lip+ decay rate for {} with {}; set beta explicitly",
                cfg.equation, cfg.numflux
            ))
        })
}

pub fn sharpness_sample(
    cfg: &StudyConfig,
    beta: f64,
    reference: &CellField,
    sample: usize,
    seed: u64,
) -> Result<SharpnessSample> {
    let scheme = cfg.scheme()?;
    let mut points = Vec::with_capacity(cfg.resolutions.len());
    for &k in &cfg.resolutions {
        let initial = coarse_initial(reference, k)?;
        let lip0 = if cfg.boundary.is_periodic() {
            lip_plus_periodic(&initial)?
        } else {
            lip_plus(&initial)?
        };
        let traj = evolve(&initial, &scheme, &[])?;
        let inputs = BoundInputs {
            lip_plus_0: lip0,
            dt: traj.dt_used,
            dx: initial.grid().dx(),
            t_n: traj.t_final(),
            beta,
            m: SUPPORT_RADIUS,
            ..Default::default()
        };
        let bound = lip_bound_rhs(&inputs)?;
        let tv_integral = tv_time_integral(&traj);
        if !(tv_integral > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "time-integrated TV vanishes at k = {k}; sharpness ratio undefined"
            )));
        }
        points.push(SharpnessPoint {
            k,
            dx: initial.grid().dx(),
            lip_plus_0: lip0,
            dt: traj.dt_used,
            tv_integral,
            bound,
            ratio: bound / tv_integral,
        });
    }
    let pts: Vec<(f64, f64)> = points.iter().map(|p| (p.dx, p.ratio)).collect();
    let slope = fit_rate(&pts).ok().map(|f| f.slope);
    Ok(SharpnessSample {
        sample,
        seed,
        points,
        slope,
    })
}

/// Ratio of the Lip⁺-based bound on `Σ TV(vⁿ) Δt` to its measured value.
pub fn bound_sharpness_study(cfg: &StudyConfig, workers: usize) -> Result<SharpnessReport> {
    cfg.validate()?;
    let beta = resolve_beta(cfg)?;
    let samples = run_samples_parallel(cfg, workers, |hurst, sample, seed| {
        let reference = reference_initial(cfg, hurst, seed)?;
        sharpness_sample(cfg, beta, &reference, sample, seed)
    })?;
    let summaries = samples
        .iter()
        .map(|per| {
            let slopes: Vec<f64> = per.iter().filter_map(|s| s.slope).collect();
            let (m, sd) = mean_std(&slopes);
            let min_ratio = per
                .iter()
                .flat_map(|s| s.points.iter().map(|p| p.ratio))
                .fold(f64::INFINITY, f64::min);
            (m, sd, min_ratio)
        })
        .collect();
    Ok(SharpnessReport {
        beta,
        hurst: cfg.hurst.clone(),
        samples,
        summaries,
        seeds: cfg.seeds(),
    })
}

impl SharpnessReport {
    pub const COLUMNS: [&'static str; 12] = [
        "study", "hurst", "sample", "seed", "k", "dx", "lip_plus_0", "dt", "tv_integral", "bound", "ratio", "slope",
    ];

    pub fn to_result(&self) -> StudyResult {
        let mut out = StudyResult::new("sharpness", &Self::COLUMNS, self.seeds.clone());
        for ((&h, per), &(mean, sd, _)) in self.hurst.iter().zip(&self.samples).zip(&self.summaries) {
            for s in per {
                for p in &s.points {
                    out.push(vec![
                        "sharpness".into(), h.into(), sample_label(s.sample), seed_value(s.seed),
                        p.k.into(), p.dx.into(), p.lip_plus_0.into(), p.dt.into(),
                        p.tv_integral.into(), p.bound.into(), p.ratio.into(), Value::Empty,
                    ]);
                }
                let mut row = vec![Value::Empty; Self::COLUMNS.len()];
                row[0] = "sharpness".into();
                row[1] = h.into();
                row[2] = sample_label(s.sample);
                row[3] = seed_value(s.seed);
                row[11] = s.slope.into();
                out.push(row);
            }
            for (label, v) in [("MEAN", mean), ("STD", sd)] {
                let mut row = vec![Value::Empty; Self::COLUMNS.len()];
                row[0] = "sharpness".into();
                row[1] = h.into();
                row[2] = label.into();
                row[11] = Value::finite(v);
                out.push(row);
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// one-step Lip+ decay check
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipDecayReport {
    /// Steps where the previous Lip⁺ was positive and the bound applied.
    pub steps_checked: usize,
    /// Largest `Lip⁺(vⁿ⁺¹) − 1/(Lip⁺(vⁿ)⁻¹ + βΔt)` observed.
    pub worst_excess: f64,
}

/// Evolve `initial` and compare every step against the one-step bound
/// `Lip⁺(vⁿ⁺¹) ≤ 1/(Lip⁺(vⁿ)⁻¹ + βΔt)`.
pub fn lip_decay_check(initial: &CellField, scheme: &SchemeConfig, beta: f64) -> Result<LipDecayReport> {
    let dx = initial.grid().dx();
    let periodic = scheme.boundary.is_periodic();
    let lip = |v: &[f64]| -> f64 {
        let mut best = v.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        if periodic {
            best = best.max(v[0] - v[v.len() - 1]);
        }
        best / dx
    };
    let mut previous: Option<(f64, f64)> = None;
    let mut report = LipDecayReport {
        steps_checked: 0,
        worst_excess: f64::NEG_INFINITY,
    };
    evolve_observed(initial, scheme, &[], |_, t, values| {
        let current = lip(values);
        if let Some((t_prev, l_prev)) = previous {
            if l_prev > 0.0 {
                let bound = 1.0 / (1.0 / l_prev + beta * (t - t_prev));
                report.steps_checked += 1;
                report.worst_excess = report.worst_excess.max(current - bound);
            }
        }
        previous = Some((t, current));
    })?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// single runs for the `fbm` and `solve` commands
// ---------------------------------------------------------------------------

/// Normalized midpoint-displacement paths for every `(hurst, sample, k)`.
pub fn fbm_table(cfg: &StudyConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let columns = ["study", "hurst", "sample", "seed", "k", "j", "x", "value"];
    let mut out = StudyResult::new("fbm", &columns, cfg.seeds());
    for &h in &cfg.hurst {
        for (sample, seed) in cfg.seeds().into_iter().enumerate() {
            for &k in &cfg.resolutions {
                let path = normalize_to_unit(fbm_midpoint(h, k, &mut RngState::new(seed))?);
                let dx = StudyConfig::dx(k);
                for (j, &v) in path.points.iter().enumerate() {
                    out.push(vec![
                        "fbm".into(), h.into(), sample_label(sample), seed_value(seed),
                        k.into(), j.into(), (j as f64 * dx).into(), v.into(),
                    ]);
                }
            }
        }
    }
    Ok(out)
}

/// Evolve every `(hurst, sample)` at every resolution and tabulate the
/// initial field, the snapshots and the final field.
pub fn solve_table(cfg: &StudyConfig, workers: usize) -> Result<StudyResult> {
    cfg.validate()?;
    let scheme = cfg.scheme()?;
    let runs = run_samples_parallel(cfg, workers, |hurst, _, seed| {
        let reference = reference_initial(cfg, hurst, seed)?;
        cfg.resolutions
            .iter()
            .map(|&k| {
                let initial = coarse_initial(&reference, k)?;
                let traj = evolve(&initial, &scheme, &cfg.snapshot_times)?;
                let mut frames = vec![(0.0, initial)];
                frames.extend(traj.snapshots.into_iter().map(|s| (s.time, s.field)));
                frames.push((traj.times[traj.times.len() - 1], traj.final_field));
                Ok((k, frames))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let columns = ["study", "hurst", "sample", "seed", "k", "time", "i", "x", "value"];
    let mut out = StudyResult::new("solve", &columns, cfg.seeds());
    let seeds = cfg.seeds();
    for (&h, per) in cfg.hurst.iter().zip(&runs) {
        for (sample, per_k) in per.iter().enumerate() {
            for (k, frames) in per_k {
                for (t, field) in frames {
                    for (i, (&v, x)) in field.values().iter().zip(field.grid().midpoints()).enumerate() {
                        out.push(vec![
                            "solve".into(), h.into(), sample_label(sample), seed_value(seeds[sample]),
                            (*k).into(), (*t).into(), i.into(), x.into(), v.into(),
                        ]);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// The studies reachable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    Converge,
    TvScale,
    LipScale,
    TvDecay,
    Sharpness,
}

pub fn run_study(kind: StudyKind, cfg: &StudyConfig, workers: usize) -> Result<StudyResult> {
    Ok(match kind {
        StudyKind::Converge => convergence_study(cfg, workers)?.to_result(),
        StudyKind::TvScale => tv_scaling_study(cfg, workers)?.to_result(),
        StudyKind::LipScale => lip_scaling_study(cfg, workers)?.to_result(),
        StudyKind::TvDecay => tv_decay_study(cfg, workers)?.to_result(),
        StudyKind::Sharpness => bound_sharpness_study(cfg, workers)?.to_result(),
    })
}
