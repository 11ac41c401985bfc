//! Circuit-level Pauli noise and the skip-sampling distributions.
//!
//! Every error site fires with probability `p`. A firing Memory site applies
//! one of X, Y, Z; TwoQubit and ThreeQubit sites apply one of the 15 or 63
//! non-identity Pauli products on their operands; Init sites apply X.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use smallvec::SmallVec;
use statrs::function::factorial::ln_binomial;
use thiserror::Error;

use crate::circuit::{ErrorSite, SiteKind};
use crate::pauli::Pauli;
use crate::tableau::Tableau;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("physical error rate {0} must lie in [0, 1)")]
    InvalidRate(f64),
    #[error("zero error rate never produces an erroneous cycle")]
    DegenerateRate,
    #[error("a cycle needs at least one error site")]
    NoSites,
    #[error("{found} Pauli factors for a site on {expected} qubits")]
    FactorCount { expected: usize, found: usize },
    #[error("error event must not be the identity")]
    IdentityEvent,
    #[error("initialization sites only take X errors")]
    NonXInit,
}

fn check_rate(p: f64) -> Result<(), NoiseError> {
    if (0.0..1.0).contains(&p) {
        Ok(())
    } else {
        Err(NoiseError::InvalidRate(p))
    }
}

/// A non-identity Pauli acting on the operands of one site.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ErrorEvent {
    pub site: ErrorSite,
    paulis: SmallVec<[Pauli; 3]>,
}

impl ErrorEvent {
    pub fn new(site: ErrorSite, paulis: &[Pauli]) -> Result<Self, NoiseError> {
        if paulis.len() != site.qubits.len() {
            return Err(NoiseError::FactorCount { expected: site.qubits.len(), found: paulis.len() });
        }
        if paulis.iter().all(|&p| p == Pauli::I) {
            return Err(NoiseError::IdentityEvent);
        }
        if site.kind == SiteKind::Init && paulis[0] != Pauli::X {
            return Err(NoiseError::NonXInit);
        }
        Ok(Self { site, paulis: SmallVec::from_slice(paulis) })
    }

    /// Decodes `code ∈ 1..4^k` two bits per operand, first operand lowest.
    fn from_code(site: &ErrorSite, code: u32) -> Self {
        let paulis = (0..site.qubits.len())
            .map(|i| match (code >> (2 * i)) & 3 {
                0 => Pauli::I,
                1 => Pauli::X,
                2 => Pauli::Y,
                _ => Pauli::Z,
            })
            .collect();
        Self { site: site.clone(), paulis }
    }

    pub fn paulis(&self) -> &[Pauli] {
        &self.paulis
    }

    /// Every event allowed at `site`: 3, 15, 63 or 1 of them.
    pub fn all_for_site(site: &ErrorSite) -> Vec<ErrorEvent> {
        if site.kind == SiteKind::Init {
            return vec![Self { site: site.clone(), paulis: SmallVec::from_slice(&[Pauli::X]) }];
        }
        let k = site.qubits.len() as u32;
        (1..4u32.pow(k)).map(|c| Self::from_code(site, c)).collect()
    }
}

/// Error drawn at a site already known to fire.
pub fn sample_fired_error<R: Rng + ?Sized>(site: &ErrorSite, rng: &mut R) -> ErrorEvent {
    if site.kind == SiteKind::Init {
        return ErrorEvent { site: site.clone(), paulis: SmallVec::from_slice(&[Pauli::X]) };
    }
    let k = site.qubits.len() as u32;
    ErrorEvent::from_code(site, rng.random_range(1..4u32.pow(k)))
}

/// Independent draw: an event with probability `p`, otherwise `None`.
pub fn sample_site_error<R: Rng + ?Sized>(
    site: &ErrorSite,
    p: f64,
    rng: &mut R,
) -> Result<Option<ErrorEvent>, NoiseError> {
    check_rate(p)?;
    if rng.random::<f64>() < p {
        Ok(Some(sample_fired_error(site, rng)))
    } else {
        Ok(None)
    }
}

/// Applies the event's Pauli to the tableau.
pub fn apply_event(tab: &mut Tableau, event: &ErrorEvent) {
    for (&q, &p) in event.site.qubits.iter().zip(&event.paulis) {
        tab.apply_pauli_factor(q, p);
    }
}

/// `floor(ln(1 - r) / ln P)` where `ln_clean = ln P` is the log-probability
/// of a clean cycle. Saturates at `u64::MAX`.
pub fn clean_run_length(ln_clean: f64, r: f64) -> u64 {
    let n = (-r).ln_1p() / ln_clean;
    if n >= u64::MAX as f64 {
        u64::MAX
    } else {
        n.floor() as u64
    }
}

/// Geometric number of consecutive clean cycles before an erroneous one.
#[derive(Clone, Debug)]
pub struct CleanRunSampler {
    ln_clean: f64,
}

impl CleanRunSampler {
    pub fn new(p: f64, n_sites: usize) -> Result<Self, NoiseError> {
        check_rate(p)?;
        if n_sites == 0 {
            return Err(NoiseError::NoSites);
        }
        if p == 0.0 {
            return Err(NoiseError::DegenerateRate);
        }
        Ok(Self { ln_clean: n_sites as f64 * (-p).ln_1p() })
    }

    /// `ln P` with `P = (1 - p)^N`.
    pub fn ln_clean(&self) -> f64 {
        self.ln_clean
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        clean_run_length(self.ln_clean, rng.random::<f64>())
    }
}

pub fn sample_clean_run_length<R: Rng + ?Sized>(p: f64, n_sites: usize, rng: &mut R) -> Result<u64, NoiseError> {
    Ok(CleanRunSampler::new(p, n_sites)?.sample(rng))
}

/// Distribution of the number of errors in a cycle known to contain at least one:
/// `q(k) = C(N,k) p^k (1-p)^(N-k) / (1 - (1-p)^N)` for `k = 1..=N`.
#[derive(Clone, Debug)]
pub struct ErrorCountDistribution {
    pmf: Vec<f64>,
    cdf: Vec<f64>,
}

impl ErrorCountDistribution {
    pub fn new(p: f64, n_sites: usize) -> Result<Self, NoiseError> {
        check_rate(p)?;
        if n_sites == 0 {
            return Err(NoiseError::NoSites);
        }
        if p == 0.0 {
            return Err(NoiseError::DegenerateRate);
        }
        let n = n_sites as u64;
        let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
        let ln_norm = (-(n as f64 * ln_q).exp_m1()).ln();
        let pmf: Vec<f64> = (1..=n)
            .map(|k| (ln_binomial(n, k) + k as f64 * ln_p + (n - k) as f64 * ln_q - ln_norm).exp())
            .collect();
        let mut acc = 0.0;
        let cdf = pmf
            .iter()
            .map(|&q| {
                acc += q;
                acc
            })
            .collect();
        Ok(Self { pmf, cdf })
    }

    /// `q(k)`; zero outside `1..=N`.
    pub fn q(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.pmf.get(k - 1).copied().unwrap_or(0.0)
        }
    }

    pub fn n_sites(&self) -> usize {
        self.pmf.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cdf.last().expect("table is non-empty");
        let u = rng.random::<f64>() * total;
        let i = self.cdf.partition_point(|&c| c <= u);
        i.min(self.pmf.len() - 1) + 1
    }
}

pub fn sample_error_count_given_any<R: Rng + ?Sized>(p: f64, n_sites: usize, rng: &mut R) -> Result<usize, NoiseError> {
    Ok(ErrorCountDistribution::new(p, n_sites)?.sample(rng))
}

/// Unconditioned per-cycle error count, `Binomial(N, p)`.
#[derive(Clone, Debug)]
pub struct ErrorCountBinomial {
    dist: Binomial,
}

impl ErrorCountBinomial {
    pub fn new(p: f64, n_sites: usize) -> Result<Self, NoiseError> {
        check_rate(p)?;
        let dist = Binomial::new(n_sites as u64, p).map_err(|_| NoiseError::InvalidRate(p))?;
        Ok(Self { dist })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.dist.sample(rng) as usize
    }
}

/// Draws `k` distinct sites uniformly and an error at each, ordered by site index.
pub fn sample_events<R: Rng + ?Sized>(sites: &[ErrorSite], k: usize, rng: &mut R) -> Vec<ErrorEvent> {
    let mut idx = rand::seq::index::sample(rng, sites.len(), k).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| sample_fired_error(&sites[i], rng)).collect()
}
