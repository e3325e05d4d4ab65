//! Mixture-averaged observables for arbitrary seed fields.
//!
//! Only the diagonal photon statistics `p_{n′}` of the initial field state
//! enter photon-number observables, so an arbitrary seed reduces to a
//! weighted mixture of Fock-seeded propagations:
//! `⟨f(n̂)⟩ = Σ_{n′} p_{n′} ⟨f(n̂)⟩_{n′}`.

use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::config::SystemConfig;
use crate::dynamics::{evolve_observables, PhotonStatistics, Propagator};
use crate::error::Error;
use crate::Result;

/// Seed statistics of the laser field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialFieldState {
    /// Photon-number eigenstate; the only kind with an integer constraint.
    Fock { photons: u64 },
    /// Poissonian statistics with the given mean.
    Coherent { mean_photons: f64 },
    /// Bose–Einstein (geometric) statistics with the given mean.
    Thermal { mean_photons: f64 },
}

impl InitialFieldState {
    pub fn fock(photons: u64) -> Self {
        InitialFieldState::Fock { photons }
    }

    pub fn coherent(mean_photons: f64) -> Result<Self> {
        if !mean_photons.is_finite() || mean_photons < 0.0 {
            return Err(Error::config(format!(
                "coherent seed mean must be non-negative, got {mean_photons}"
            )));
        }
        Ok(InitialFieldState::Coherent { mean_photons })
    }

    pub fn thermal(mean_photons: f64) -> Result<Self> {
        if !mean_photons.is_finite() || mean_photons < 0.0 {
            return Err(Error::config(format!(
                "thermal seed mean must be non-negative, got {mean_photons}"
            )));
        }
        Ok(InitialFieldState::Thermal { mean_photons })
    }

    pub fn mean_photons(&self) -> f64 {
        match *self {
            InitialFieldState::Fock { photons } => photons as f64,
            InitialFieldState::Coherent { mean_photons }
            | InitialFieldState::Thermal { mean_photons } => mean_photons,
        }
    }
}

/// `ln n!` — exact accumulation for small `n`, Stirling series beyond.
fn ln_factorial(n: u64) -> f64 {
    if n < 16 {
        return (2..=n).map(|k| (k as f64).ln()).sum();
    }
    let x = (n + 1) as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x - 0.5) * x.ln() - x
        + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

/// Probability `p_n` of finding `n` photons in the seed state.
///
/// Coherent and thermal weights are evaluated in log space, so means and
/// indices far into the millions neither overflow nor underflow pairwise.
pub fn seed_probability(state: &InitialFieldState, n: u64) -> f64 {
    match *state {
        InitialFieldState::Fock { photons } => {
            if n == photons {
                1.0
            } else {
                0.0
            }
        }
        InitialFieldState::Coherent { mean_photons } => {
            if mean_photons == 0.0 {
                return if n == 0 { 1.0 } else { 0.0 };
            }
            (n as f64 * mean_photons.ln() - mean_photons - ln_factorial(n)).exp()
        }
        InitialFieldState::Thermal { mean_photons } => {
            if mean_photons == 0.0 {
                return if n == 0 { 1.0 } else { 0.0 };
            }
            let log_ratio = mean_photons.ln() - (mean_photons + 1.0).ln();
            (n as f64 * log_ratio - (mean_photons + 1.0).ln()).exp()
        }
    }
}

/// A finite window of seed weights covering all but `truncation_epsilon`
/// of the distribution. Weights are *not* renormalized; `captured_mass`
/// reports the represented probability.
#[derive(Debug, Clone)]
pub struct TruncatedDistribution {
    /// `(n′, p_{n′})` with strictly increasing `n′`.
    pub weights: Vec<(u64, f64)>,
    pub captured_mass: f64,
    pub truncation_epsilon: f64,
}

impl TruncatedDistribution {
    pub fn support(&self) -> std::ops::RangeInclusive<u64> {
        let lo = self.weights.first().map_or(0, |w| w.0);
        let hi = self.weights.last().map_or(0, |w| w.0);
        lo..=hi
    }

    pub fn mean(&self) -> f64 {
        self.weights.iter().map(|&(n, p)| n as f64 * p).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.weights
            .iter()
            .map(|&(n, p)| (n as f64) * (n as f64) * p)
            .sum()
    }
}

/// Smallest contiguous window of seed indices whose mass is at least
/// `1 − epsilon`.
pub fn truncate(state: &InitialFieldState, epsilon: f64) -> Result<TruncatedDistribution> {
    if !epsilon.is_finite() || epsilon <= 0.0 || epsilon >= 1.0 {
        return Err(Error::domain(format!(
            "truncation epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if let InitialFieldState::Fock { photons } = *state {
        return Ok(TruncatedDistribution {
            weights: vec![(photons, 1.0)],
            captured_mass: 1.0,
            truncation_epsilon: epsilon,
        });
    }
    if state.mean_photons() == 0.0 {
        return Ok(TruncatedDistribution {
            weights: vec![(0, 1.0)],
            captured_mass: 1.0,
            truncation_epsilon: epsilon,
        });
    }

    // Tabulate far enough that the discarded tail is negligible next to
    // epsilon, then pick the minimal covering window.
    let tail_budget = (epsilon * 1e-3).max(1e-15);
    let cap = tail_index(state, tail_budget);
    let mut probabilities = Vec::with_capacity(cap + 1);
    let mut total = KahanSum::default();
    for n in 0..=cap as u64 {
        let p = seed_probability(state, n);
        probabilities.push(p);
        total.add(p);
        if 1.0 - total.value() <= tail_budget {
            break;
        }
    }
    let mass = total.value();

    let target = 1.0 - epsilon;
    let mut best: Option<(usize, usize, f64)> = None;
    let mut window = KahanSum::default();
    let mut lo = 0usize;
    for hi in 0..probabilities.len() {
        window.add(probabilities[hi]);
        while window.value() - probabilities[lo] >= target {
            window.add(-probabilities[lo]);
            lo += 1;
        }
        if window.value() >= target {
            let better = match best {
                Some((blo, bhi, _)) => hi - lo < bhi - blo,
                None => true,
            };
            if better {
                best = Some((lo, hi, window.value()));
            }
        }
    }
    // The whole tabulated range is the fallback window when rounding keeps
    // the sliding sum a hair under the target.
    let (lo, hi, captured) = best.unwrap_or((0, probabilities.len() - 1, mass));
    if captured < target {
        return Err(Error::numeric(format!(
            "could not capture mass 1 - {epsilon} within {} seed components",
            probabilities.len()
        )));
    }
    let weights = (lo..=hi).map(|n| (n as u64, probabilities[n])).collect();
    Ok(TruncatedDistribution {
        weights,
        captured_mass: captured,
        truncation_epsilon: epsilon,
    })
}

/// Compensated accumulator; the window targets sit within rounding noise
/// of plain summation for small epsilons.
#[derive(Default)]
struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    fn add(&mut self, value: f64) {
        let y = value - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

/// Index beyond which the upper tail holds less than `budget` mass.
fn tail_index(state: &InitialFieldState, budget: f64) -> usize {
    match *state {
        InitialFieldState::Fock { photons } => photons as usize,
        InitialFieldState::Coherent { mean_photons } => {
            // Gaussian-with-safety bound on the Poisson upper tail.
            let sigma = mean_photons.sqrt().max(1.0);
            let z = (2.0 * (1.0 / budget).ln()).sqrt() + 4.0;
            (mean_photons + z * sigma + 16.0).ceil() as usize
        }
        InitialFieldState::Thermal { mean_photons } => {
            let ratio = mean_photons / (mean_photons + 1.0);
            (budget.ln() / ratio.ln()).ceil() as usize + 2
        }
    }
}

/// Per-length mixture moments, before conversion to [`PhotonStatistics`].
type MomentCurve = Vec<(f64, f64)>;

#[derive(Clone, PartialEq, Eq, Hash)]
struct MemoKey {
    n_electrons: u64,
    seed_photons: u64,
    detuning_bits: u64,
    alpha_bits: u64,
    grid_fingerprint: u64,
    backend: u8,
}

fn grid_fingerprint(lengths: &[f64]) -> u64 {
    let mut hasher = std::collections::hash_map::DefaultHasher::new();
    for l in lengths {
        l.to_bits().hash(&mut hasher);
    }
    hasher.finish()
}

/// Runs mixture averages, memoizing per-Fock propagations by
/// `(N, δ, α_N, n′)` and the length grid so repeated sweeps reuse them.
#[derive(Default)]
pub struct EnsembleRunner {
    memo: Mutex<HashMap<MemoKey, Arc<MomentCurve>>>,
}

impl EnsembleRunner {
    pub fn new() -> Self {
        Self::default()
    }

    /// Mixture-averaged photon statistics at every requested length.
    ///
    /// `template` fixes `N`, `δ`, and `α_N`; its seed is replaced by each
    /// `n′` in the truncated support of `state`. Components are propagated
    /// in parallel (largest seed first) and reduced in ascending component
    /// order, so results do not depend on thread count.
    pub fn mixed_moments(
        &self,
        state: &InitialFieldState,
        template: &SystemConfig,
        lengths: &[f64],
        epsilon: f64,
        backend: Propagator,
    ) -> Result<Vec<PhotonStatistics>> {
        let truncated = truncate(state, epsilon)?;
        self.moments_of_distribution(&truncated, template, lengths, backend)
    }

    /// Mixture average over an explicit weight table, for seed statistics
    /// not covered by [`InitialFieldState`].
    pub fn moments_of_distribution(
        &self,
        truncated: &TruncatedDistribution,
        template: &SystemConfig,
        lengths: &[f64],
        backend: Propagator,
    ) -> Result<Vec<PhotonStatistics>> {
        let fingerprint = grid_fingerprint(lengths);

        // Largest components first: the long-support tail then fills in
        // behind the expensive low-seed propagations.
        let mut order: Vec<usize> = (0..truncated.weights.len()).collect();
        order.sort_by(|&a, &b| truncated.weights[b].0.cmp(&truncated.weights[a].0));

        let outcomes: Vec<(usize, Result<Arc<MomentCurve>>)> = order
            .par_iter()
            .map(|&index| {
                let (seed, _) = truncated.weights[index];
                let curve = self.component_curve(template, seed, lengths, fingerprint, backend);
                (index, curve)
            })
            .collect();

        let mut curves: Vec<Option<Arc<MomentCurve>>> = vec![None; truncated.weights.len()];
        let mut failures: Vec<(u64, Error)> = Vec::new();
        for (index, outcome) in outcomes {
            match outcome {
                Ok(curve) => curves[index] = Some(curve),
                Err(error) => failures.push((truncated.weights[index].0, error)),
            }
        }
        if !failures.is_empty() {
            failures.sort_by_key(|&(seed, _)| seed);
            let summary: Vec<String> = failures
                .iter()
                .map(|(seed, error)| format!("n' = {seed}: {error}"))
                .collect();
            return Err(Error::numeric(format!(
                "{} mixture component(s) failed [{}]",
                failures.len(),
                summary.join("; ")
            )));
        }

        let mut series = Vec::with_capacity(lengths.len());
        for (t, &length) in lengths.iter().enumerate() {
            let mut mean = 0.0;
            let mut second = 0.0;
            for (component, curve) in curves.iter().enumerate() {
                let weight = truncated.weights[component].1;
                let (component_mean, component_second) =
                    curve.as_ref().expect("all components propagated")[t];
                mean += weight * component_mean;
                second += weight * component_second;
            }
            series.push(PhotonStatistics::from_moments(
                length,
                mean,
                second,
                truncated.captured_mass,
            ));
        }
        Ok(series)
    }

    fn component_curve(
        &self,
        template: &SystemConfig,
        seed: u64,
        lengths: &[f64],
        fingerprint: u64,
        backend: Propagator,
    ) -> Result<Arc<MomentCurve>> {
        let key = MemoKey {
            n_electrons: template.n_electrons,
            seed_photons: seed,
            detuning_bits: template.detuning.to_bits(),
            alpha_bits: template.quantum_parameter.to_bits(),
            grid_fingerprint: fingerprint,
            backend: backend as u8,
        };
        if let Some(curve) = self.memo.lock().unwrap().get(&key) {
            return Ok(Arc::clone(curve));
        }
        let config = template.with_initial_photons(seed);
        let stats = evolve_observables(&config, lengths, backend)?;
        let curve: Arc<MomentCurve> = Arc::new(
            stats
                .iter()
                .map(|s| (s.mean, s.variance + s.mean * s.mean))
                .collect(),
        );
        self.memo.lock().unwrap().insert(key, Arc::clone(&curve));
        Ok(curve)
    }
}

/// One-shot mixture average without a shared memo.
pub fn mixed_moments(
    state: &InitialFieldState,
    template: &SystemConfig,
    lengths: &[f64],
    epsilon: f64,
    backend: Propagator,
) -> Result<Vec<PhotonStatistics>> {
    EnsembleRunner::new().mixed_moments(state, template, lengths, epsilon, backend)
}
