//! Time-to-failure trials with skip sampling over clean cycles.
//!
//! A trial starts in the noiseless logical `|0⟩` with every ancilla in `|0⟩`
//! and runs correction cycles until logical Z flips sign. That start state
//! is the only `CleanZero` state, so any run of error-free cycles from it is
//! a no-op and can be skipped by drawing its geometric length directly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::builders::{build_scheme, CodeKind};
use crate::circuit::{enumerate_error_sites, Circuit, CircuitError, CycleSelector, ErrorSite, GateKind, Variant};
use crate::code::CodeSpec;
use crate::noise::{
    apply_event, sample_events, sample_site_error, CleanRunSampler, ErrorCountBinomial, ErrorCountDistribution,
    ErrorEvent, NoiseError,
};
use crate::pauli::PauliOperator;
use crate::stats::{bootstrap_means, derive_seed, mean, percentile_interval};
use crate::tableau::{Expectation, Tableau, TableauError};

pub const DEFAULT_MAX_CYCLES: u64 = 10_000_000;
pub const BOOTSTRAP_RESAMPLES: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonteCarloError {
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Tableau(#[from] TableauError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("cycles a and b have {a} and {b} error sites")]
    CycleSizeMismatch { a: usize, b: usize },
    #[error("all {trials} trials were censored")]
    AllCensored { trials: usize },
    #[error("at least one trial is required")]
    NoTrials,
    #[error("max_cycles must be at least 1")]
    ZeroMaxCycles,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    CleanZero,
    LogicalFlip,
    Residual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CycleOutcome {
    pub classification: Classification,
    pub events_applied: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialResult {
    pub cycles_to_failure: u64,
    pub censored: bool,
}

/// Generator, logical and ancilla checks over a full register.
#[derive(Clone, Debug)]
pub struct Classifier {
    generators: Vec<PauliOperator>,
    logical_z: PauliOperator,
    ancillas: std::ops::Range<usize>,
}

impl Classifier {
    pub fn new(code: &CodeSpec, n_qubits: usize) -> Self {
        Self {
            generators: code.generators().map(|g| code.embed(g, n_qubits)).collect(),
            logical_z: code.embed(&code.logical_z, n_qubits),
            ancillas: code.n_data..n_qubits,
        }
    }

    pub fn classify(&self, tab: &Tableau) -> Classification {
        let plus = |p: &PauliOperator| matches!(tab.deterministic_sign(p), Ok(Expectation::Plus));
        if !self.generators.iter().all(plus) {
            return Classification::Residual;
        }
        match tab.deterministic_sign(&self.logical_z) {
            Ok(Expectation::Minus) => Classification::LogicalFlip,
            Ok(Expectation::Plus) if self.ancillas.clone().all(|q| tab.z_expectation(q) == Expectation::Plus) => {
                Classification::CleanZero
            }
            _ => Classification::Residual,
        }
    }
}

/// Classifies the state; qubits from `code.n_data` upward are ancillas.
pub fn classify_state(tab: &Tableau, code: &CodeSpec) -> Classification {
    Classifier::new(code, tab.num_qubits()).classify(tab)
}

/// Noiseless logical `|0⟩` on the data qubits, ancillas in `|0⟩`.
pub fn prepare_logical_zero(code: &CodeSpec, n_qubits: usize) -> Tableau {
    let n = code.n_data;
    let mut rows: Vec<Vec<bool>> = code
        .x_generators
        .iter()
        .map(|g| (0..n).map(|q| g.get(q) != crate::pauli::Pauli::I).collect())
        .collect();
    // reduced row echelon form over GF(2)
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(sel) = (r..rows.len()).find(|&i| rows[i][col]) else { continue };
        rows.swap(r, sel);
        for i in 0..rows.len() {
            if i != r && rows[i][col] {
                let src = rows[r].clone();
                rows[i].iter_mut().zip(&src).for_each(|(a, b)| *a ^= b);
            }
        }
        pivots.push(col);
        r += 1;
    }
    let mut tab = Tableau::new(n_qubits);
    for &p in &pivots {
        tab.h(p);
    }
    for (row, &p) in rows.iter().zip(&pivots) {
        for q in (0..n).filter(|&q| q != p && row[q]) {
            tab.cnot(p, q);
        }
    }
    tab
}

/// Executes a cycle, then discards the qubits in `spent`. Those hold classical
/// leftovers that the next cycle resets before reading.
fn execute_cycle<R: rand::Rng + ?Sized>(
    tab: &mut Tableau,
    circuit: &Circuit,
    which: CycleSelector,
    events: &[ErrorEvent],
    spent: &[usize],
    rng: &mut R,
) -> Result<usize, TableauError> {
    let mut order: Vec<&ErrorEvent> = events.iter().collect();
    order.sort_by_key(|e| (e.site.step, e.site.slot));
    let mut next = order.into_iter().peekable();
    let mut applied = 0;
    for (s, step) in circuit.cycle(which).iter().enumerate() {
        for (slot, inst) in step.instructions.iter().enumerate() {
            let q = &inst.qubits;
            match inst.kind {
                GateKind::H => tab.h(q[0]),
                GateKind::Cnot => tab.cnot(q[0], q[1]),
                GateKind::Toffoli => tab.classical_toffoli(q[0], q[1], q[2])?,
                GateKind::Ccz => tab.classical_ccz(q[0], q[1], q[2])?,
                GateKind::Reset => tab.reset_zero(q[0], rng)?,
                GateKind::Idle => {}
            }
            while let Some(e) = next.next_if(|e| (e.site.step, e.site.slot) == (s, slot)) {
                apply_event(tab, e);
                applied += 1;
            }
        }
    }
    for &q in spent {
        tab.reset_zero(q, rng)?;
    }
    Ok(applied)
}

/// Runs one cycle, applying each event right after its instruction.
pub fn run_cycle<R: rand::Rng + ?Sized>(
    tab: &mut Tableau,
    circuit: &Circuit,
    which: CycleSelector,
    events: &[ErrorEvent],
    rng: &mut R,
) -> Result<CycleOutcome, TableauError> {
    let events_applied = execute_cycle(tab, circuit, which, events, &circuit.spent_after(which), rng)?;
    Ok(CycleOutcome { classification: classify_state(tab, &circuit.code), events_applied })
}

/// Parameters of a single trial. `variant: None` selects the uncorrected baseline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialConfig {
    pub code: CodeKind,
    pub variant: Option<Variant>,
    pub p: f64,
    pub seed: u64,
    pub max_cycles: u64,
}

pub fn run_trial(cfg: &TrialConfig) -> Result<TrialResult, MonteCarloError> {
    Experiment::new(build_scheme(cfg.code, cfg.variant), cfg.p)?.run_trial(cfg.seed, cfg.max_cycles)
}

#[derive(Clone, Debug)]
struct Samplers {
    clean_run: CleanRunSampler,
    given_any: ErrorCountDistribution,
    binomial: ErrorCountBinomial,
}

/// A circuit prepared for repeated trials at one physical error rate.
#[derive(Clone, Debug)]
pub struct Experiment {
    circuit: Circuit,
    sites_a: Vec<ErrorSite>,
    sites_b: Vec<ErrorSite>,
    spent: [Vec<usize>; 2],
    classifier: Classifier,
    initial: Tableau,
    p: f64,
    samplers: Option<Samplers>,
}

impl Experiment {
    pub fn new(circuit: Circuit, p: f64) -> Result<Self, MonteCarloError> {
        let sites_a = enumerate_error_sites(&circuit, CycleSelector::A)?;
        let sites_b = enumerate_error_sites(&circuit, CycleSelector::B)?;
        if sites_a.len() != sites_b.len() {
            return Err(MonteCarloError::CycleSizeMismatch { a: sites_a.len(), b: sites_b.len() });
        }
        let n_sites = sites_a.len();
        let samplers = if p == 0.0 {
            ErrorCountBinomial::new(p, n_sites)?;
            None
        } else {
            Some(Samplers {
                clean_run: CleanRunSampler::new(p, n_sites)?,
                given_any: ErrorCountDistribution::new(p, n_sites)?,
                binomial: ErrorCountBinomial::new(p, n_sites)?,
            })
        };
        let classifier = Classifier::new(&circuit.code, circuit.n_qubits());
        let initial = prepare_logical_zero(&circuit.code, circuit.n_qubits());
        let spent = [circuit.spent_after(CycleSelector::A), circuit.spent_after(CycleSelector::B)];
        Ok(Self { circuit, sites_a, sites_b, spent, classifier, initial, p, samplers })
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Error sites per cycle.
    pub fn n_sites(&self) -> usize {
        self.sites_a.len()
    }

    pub fn sites(&self, which: CycleSelector) -> &[ErrorSite] {
        match which {
            CycleSelector::A => &self.sites_a,
            CycleSelector::B => &self.sites_b,
        }
    }

    pub fn initial_state(&self) -> Tableau {
        self.initial.clone()
    }

    pub fn classify(&self, tab: &Tableau) -> Classification {
        self.classifier.classify(tab)
    }

    pub fn run_cycle<R: rand::Rng + ?Sized>(
        &self,
        tab: &mut Tableau,
        which: CycleSelector,
        events: &[ErrorEvent],
        rng: &mut R,
    ) -> Result<CycleOutcome, TableauError> {
        let spent = &self.spent[(which == CycleSelector::B) as usize];
        let events_applied = execute_cycle(tab, &self.circuit, which, events, spent, rng)?;
        Ok(CycleOutcome { classification: self.classifier.classify(tab), events_applied })
    }

    /// Skip-sampled trial. Clean stretches are jumped over; cycles that start
    /// from a non-clean state draw `Binomial(N, p)` errors.
    pub fn run_trial(&self, seed: u64, max_cycles: u64) -> Result<TrialResult, MonteCarloError> {
        if max_cycles == 0 {
            return Err(MonteCarloError::ZeroMaxCycles);
        }
        let censored = TrialResult { cycles_to_failure: max_cycles, censored: true };
        let Some(s) = &self.samplers else { return Ok(censored) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tab = self.initial.clone();
        let mut which = CycleSelector::A;
        let mut cycles = 0u64;
        let mut clean = true;
        loop {
            let events = if clean {
                let skip = s.clean_run.sample(&mut rng);
                if skip >= max_cycles - cycles {
                    return Ok(censored);
                }
                cycles += skip;
                which = which.advance(skip);
                let k = s.given_any.sample(&mut rng);
                sample_events(self.sites(which), k, &mut rng)
            } else {
                let k = s.binomial.sample(&mut rng);
                sample_events(self.sites(which), k, &mut rng)
            };
            let outcome = self.run_cycle(&mut tab, which, &events, &mut rng)?;
            cycles += 1;
            which = which.other();
            match outcome.classification {
                Classification::LogicalFlip => return Ok(TrialResult { cycles_to_failure: cycles, censored: false }),
                Classification::CleanZero => clean = true,
                Classification::Residual => clean = false,
            }
            if cycles >= max_cycles {
                return Ok(censored);
            }
        }
    }

    /// Reference trial: every site of every cycle draws its own Bernoulli error.
    pub fn run_trial_full(&self, seed: u64, max_cycles: u64) -> Result<TrialResult, MonteCarloError> {
        if max_cycles == 0 {
            return Err(MonteCarloError::ZeroMaxCycles);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tab = self.initial.clone();
        let mut which = CycleSelector::A;
        let mut events = Vec::new();
        for cycle in 1..=max_cycles {
            events.clear();
            for site in self.sites(which) {
                if let Some(e) = sample_site_error(site, self.p, &mut rng)? {
                    events.push(e);
                }
            }
            let outcome = self.run_cycle(&mut tab, which, &events, &mut rng)?;
            if outcome.classification == Classification::LogicalFlip {
                return Ok(TrialResult { cycles_to_failure: cycle, censored: false });
            }
            which = which.other();
        }
        Ok(TrialResult { cycles_to_failure: max_cycles, censored: true })
    }

    /// Runs `n_trials` skip-sampled trials in parallel; trial `i` uses seed
    /// `derive_seed(master_seed, i)` so results do not depend on scheduling.
    pub fn run_trials(&self, n_trials: usize, master_seed: u64, max_cycles: u64) -> Result<Vec<TrialResult>, MonteCarloError> {
        (0..n_trials as u64)
            .into_par_iter()
            .map(|i| self.run_trial(derive_seed(master_seed, i), max_cycles))
            .collect()
    }
}

/// Logical error rate from time-to-failure samples.
#[derive(Clone, Debug, PartialEq)]
pub struct RateEstimate {
    pub p_log: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_trials: usize,
    pub n_failures: usize,
    pub n_censored: usize,
    pub mean_cycles: f64,
    /// Cycles to failure of the uncensored trials, in trial order.
    pub failure_cycles: Vec<u64>,
}

/// `p_log = 1 / mean(cycles to failure)` over uncensored trials, with a 95%
/// percentile-bootstrap interval obtained by inverting the bootstrap means.
pub fn estimate_from_results(results: &[TrialResult], bootstrap_seed: u64) -> Result<RateEstimate, MonteCarloError> {
    if results.is_empty() {
        return Err(MonteCarloError::NoTrials);
    }
    let failure_cycles: Vec<u64> = results.iter().filter(|r| !r.censored).map(|r| r.cycles_to_failure).collect();
    if failure_cycles.is_empty() {
        return Err(MonteCarloError::AllCensored { trials: results.len() });
    }
    let xs: Vec<f64> = failure_cycles.iter().map(|&c| c as f64).collect();
    let mean_cycles = mean(&xs);
    let mut rng = ChaCha8Rng::seed_from_u64(bootstrap_seed);
    let (lo, hi) = percentile_interval(bootstrap_means(&xs, BOOTSTRAP_RESAMPLES, &mut rng), 0.95);
    Ok(RateEstimate {
        p_log: 1.0 / mean_cycles,
        ci_low: 1.0 / hi,
        ci_high: 1.0 / lo,
        n_trials: results.len(),
        n_failures: failure_cycles.len(),
        n_censored: results.len() - failure_cycles.len(),
        mean_cycles,
        failure_cycles,
    })
}

pub fn estimate_logical_error_rate(
    experiment: &Experiment,
    n_trials: usize,
    master_seed: u64,
    max_cycles: u64,
) -> Result<RateEstimate, MonteCarloError> {
    if n_trials == 0 {
        return Err(MonteCarloError::NoTrials);
    }
    let results = experiment.run_trials(n_trials, master_seed, max_cycles)?;
    estimate_from_results(&results, derive_seed(master_seed, u64::MAX))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{build_bf_circuit, build_surface17_circuit, build_unencoded_circuit};

    #[test]
    fn logical_zero_is_clean() {
        for c in [
            build_bf_circuit(Variant::Perfect),
            build_surface17_circuit(Variant::Perfect),
            build_unencoded_circuit(),
        ] {
            let tab = prepare_logical_zero(&c.code, c.n_qubits());
            assert_eq!(classify_state(&tab, &c.code), Classification::CleanZero);
        }
    }

    #[test]
    fn logical_x_flips_and_single_x_is_residual() {
        let c = build_surface17_circuit(Variant::Simplified);
        let mut tab = prepare_logical_zero(&c.code, c.n_qubits());
        let x5 = PauliOperator::x_on(c.n_qubits(), &[4]);
        let mut single = tab.clone();
        single.apply_pauli(&x5).unwrap();
        assert_eq!(classify_state(&single, &c.code), Classification::Residual);
        tab.apply_pauli(&c.code.embed(&c.code.logical_x, c.n_qubits())).unwrap();
        assert_eq!(classify_state(&tab, &c.code), Classification::LogicalFlip);
    }

    #[test]
    fn excited_ancilla_is_residual() {
        let c = build_bf_circuit(Variant::Simplified);
        let mut tab = prepare_logical_zero(&c.code, c.n_qubits());
        tab.x_flip(5);
        assert_eq!(classify_state(&tab, &c.code), Classification::Residual);
    }

    #[test]
    fn error_free_cycles_stay_clean() {
        let c = build_surface17_circuit(Variant::Perfect);
        let exp = Experiment::new(c, 0.01).unwrap();
        let mut tab = exp.initial_state();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for which in [CycleSelector::A, CycleSelector::B, CycleSelector::A] {
            let out = exp.run_cycle(&mut tab, which, &[], &mut rng).unwrap();
            assert_eq!(out, CycleOutcome { classification: Classification::CleanZero, events_applied: 0 });
        }
    }

    #[test]
    fn zero_rate_is_censored() {
        let exp = Experiment::new(build_bf_circuit(Variant::Perfect), 0.0).unwrap();
        assert_eq!(exp.run_trial(1, 50).unwrap(), TrialResult { cycles_to_failure: 50, censored: true });
    }

    #[test]
    fn trials_are_reproducible() {
        let cfg = TrialConfig { code: CodeKind::BitFlip, variant: Some(Variant::Simplified), p: 0.05, seed: 11, max_cycles: 1_000_000 };
        assert_eq!(run_trial(&cfg).unwrap(), run_trial(&cfg).unwrap());
    }

    #[test]
    fn constant_failure_time() {
        let results = vec![TrialResult { cycles_to_failure: 8, censored: false }; 20];
        let est = estimate_from_results(&results, 3).unwrap();
        assert_eq!((est.p_log, est.ci_low, est.ci_high), (0.125, 0.125, 0.125));
    }

    #[test]
    fn all_censored_is_an_error() {
        let results = vec![TrialResult { cycles_to_failure: 8, censored: true }; 3];
        assert_eq!(estimate_from_results(&results, 0), Err(MonteCarloError::AllCensored { trials: 3 }));
    }
}
