//! Physical-error-rate sweeps and the `p_log = p` crossing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::builders::{build_scheme, CodeKind};
use crate::circuit::Variant;
use crate::montecarlo::{estimate_logical_error_rate, Experiment, MonteCarloError, RateEstimate};
use crate::stats::{derive_seed, percentile_interval};

pub const CROSSING_BOOTSTRAP_RESAMPLES: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThresholdError {
    #[error("p_grid must be strictly increasing with values in (0, 1); offending value {0}")]
    BadGrid(f64),
    #[error("need at least two usable points, got {0}")]
    TooFewPoints(usize),
    #[error("p_log does not cross p within the grid")]
    NoCrossing,
    #[error(transparent)]
    MonteCarlo(#[from] MonteCarloError),
}

/// One grid point of a sweep. `all_censored` points carry no rate.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub p: f64,
    pub p_log: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_trials: usize,
    pub n_censored: usize,
    pub mean_cycles: f64,
    pub all_censored: bool,
    /// Uncensored cycles-to-failure, used to bootstrap the crossing.
    pub failure_cycles: Vec<u64>,
}

impl SweepPoint {
    pub fn n_failures(&self) -> usize {
        self.n_trials - self.n_censored
    }

    pub fn from_estimate(p: f64, est: RateEstimate) -> Self {
        Self {
            p,
            p_log: est.p_log,
            ci_low: est.ci_low,
            ci_high: est.ci_high,
            n_trials: est.n_trials,
            n_censored: est.n_censored,
            mean_cycles: est.mean_cycles,
            all_censored: false,
            failure_cycles: est.failure_cycles,
        }
    }

    pub fn censored(p: f64, n_trials: usize) -> Self {
        Self {
            p,
            p_log: 0.0,
            ci_low: 0.0,
            ci_high: 0.0,
            n_trials,
            n_censored: n_trials,
            mean_cycles: f64::NAN,
            all_censored: true,
            failure_cycles: Vec::new(),
        }
    }

    /// Point with a known rate and no samples.
    pub fn exact(p: f64, p_log: f64) -> Self {
        Self {
            p,
            p_log,
            ci_low: p_log,
            ci_high: p_log,
            n_trials: 0,
            n_censored: 0,
            mean_cycles: 1.0 / p_log,
            all_censored: false,
            failure_cycles: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdEstimate {
    pub p_th: f64,
    pub p_lo: f64,
    pub p_hi: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub fn validate_grid(p_grid: &[f64]) -> Result<(), ThresholdError> {
    for (i, &p) in p_grid.iter().enumerate() {
        if !(p > 0.0 && p < 1.0) || (i > 0 && p <= p_grid[i - 1]) {
            return Err(ThresholdError::BadGrid(p));
        }
    }
    Ok(())
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// One sweep point; a fully censored estimate becomes a flagged point.
pub fn sweep_point(
    code: CodeKind,
    variant: Option<Variant>,
    p: f64,
    trials: usize,
    seed: u64,
    max_cycles: u64,
) -> Result<SweepPoint, ThresholdError> {
    let exp = Experiment::new(build_scheme(code, variant), p)?;
    match estimate_logical_error_rate(&exp, trials, seed, max_cycles) {
        Ok(est) => Ok(SweepPoint::from_estimate(p, est)),
        Err(MonteCarloError::AllCensored { trials }) => Ok(SweepPoint::censored(p, trials)),
        Err(e) => Err(e.into()),
    }
}

/// Seed of grid point `index` under `master_seed`.
pub fn point_seed(master_seed: u64, index: usize) -> u64 {
    derive_seed(master_seed, index as u64)
}

pub fn sweep_physical_error_rates(
    code: CodeKind,
    variant: Option<Variant>,
    p_grid: &[f64],
    trials_per_point: usize,
    master_seed: u64,
    max_cycles: u64,
) -> Result<Vec<SweepPoint>, ThresholdError> {
    validate_grid(p_grid)?;
    p_grid
        .iter()
        .enumerate()
        .map(|(i, &p)| sweep_point(code, variant, p, trials_per_point, point_seed(master_seed, i), max_cycles))
        .collect()
}

/// Crossing of `(ln p, ln p_log)` with the identity, by log-log interpolation
/// at the first sign change of `ln p_log - ln p`. Returns `(p_th, p_lo, p_hi)`.
fn crossing(ps: &[f64], rates: &[f64]) -> Option<(f64, f64, f64)> {
    let d: Vec<f64> = ps.iter().zip(rates).map(|(p, r)| r.ln() - p.ln()).collect();
    if let Some(i) = d.iter().position(|&x| x == 0.0) {
        return Some((ps[i], ps[i], ps[i]));
    }
    (0..d.len().saturating_sub(1)).find(|&i| d[i] < 0.0 && d[i + 1] > 0.0).map(|i| {
        let (a, b) = (ps[i].ln(), ps[i + 1].ln());
        let t = -d[i] / (d[i + 1] - d[i]);
        ((a + t * (b - a)).exp().clamp(ps[i], ps[i + 1]), ps[i], ps[i + 1])
    })
}

/// Locates the threshold and bootstraps it by resampling every point's
/// failure times. Flagged (all-censored) points are skipped.
pub fn find_threshold_crossing(points: &[SweepPoint], seed: u64) -> Result<ThresholdEstimate, ThresholdError> {
    let usable: Vec<&SweepPoint> = points.iter().filter(|pt| !pt.all_censored && pt.p_log > 0.0).collect();
    if usable.len() < 2 {
        return Err(ThresholdError::TooFewPoints(usable.len()));
    }
    let ps: Vec<f64> = usable.iter().map(|pt| pt.p).collect();
    let rates: Vec<f64> = usable.iter().map(|pt| pt.p_log).collect();
    let (p_th, p_lo, p_hi) = crossing(&ps, &rates).ok_or(ThresholdError::NoCrossing)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut boot = Vec::with_capacity(CROSSING_BOOTSTRAP_RESAMPLES);
    let mut resampled = vec![0.0; usable.len()];
    for _ in 0..CROSSING_BOOTSTRAP_RESAMPLES {
        for (r, pt) in resampled.iter_mut().zip(&usable) {
            let xs = &pt.failure_cycles;
            *r = if xs.is_empty() {
                pt.p_log
            } else {
                let total: u64 = (0..xs.len()).map(|_| xs[rng.random_range(0..xs.len())]).sum();
                xs.len() as f64 / total as f64
            };
        }
        if let Some((c, _, _)) = crossing(&ps, &resampled) {
            boot.push(c);
        }
    }
    let (ci_low, ci_high) = if boot.is_empty() { (p_th, p_th) } else { percentile_interval(boot, 0.95) };
    Ok(ThresholdEstimate { p_th, p_lo, p_hi, ci_low, ci_high })
}
