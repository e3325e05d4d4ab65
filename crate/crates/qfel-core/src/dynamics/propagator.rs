//! Propagation of the Fock-seeded ladder state.
//!
//! Two backends:
//!
//! * [`Propagator::Spectral`] — diagonalize once, then evaluate
//!   `exp(−iHτ)` at every requested length through phase-weighted
//!   eigenvector sums, batched into real matrix products. Default, since
//!   observable curves sample many lengths from one Hamiltonian.
//! * [`Propagator::Lanczos`] — short-recurrence Krylov stepping with full
//!   reorthogonalization and adaptive substeps. Keeps O(m·N) memory, so it
//!   scales to ladders where storing the eigenvector matrix does not.

use ndarray::Array2;
use num_complex::Complex64;

use crate::config::SystemConfig;
use crate::error::Error;
use crate::Result;

use super::{
    observables, AmplitudeVector, ConservedCharges, PhotonStatistics, TridiagonalHamiltonian,
};

/// Propagation backend selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Propagator {
    #[default]
    Spectral,
    Lanczos,
}

/// Unitarity drift allowed per sample, by backend.
impl Propagator {
    fn norm_tolerance(self) -> f64 {
        match self {
            Propagator::Spectral => 1e-10,
            Propagator::Lanczos => 1e-8,
        }
    }
}

/// Largest ladder dimension for which the spectral backend will allocate
/// its dense eigenvector matrix.
const SPECTRAL_DIMENSION_LIMIT: usize = 20_000;

/// Energy-conservation drift allowed per sample, relative to `1 + |⟨Ĥ⟩(0)|`.
const ENERGY_TOLERANCE: f64 = 1e-8;

/// Propagates with the default (spectral) backend and collects the state at
/// every requested length `L/L_g`.
pub fn evolve(config: &SystemConfig, lengths: &[f64]) -> Result<Vec<AmplitudeVector>> {
    evolve_with(config, lengths, Propagator::Spectral)
}

/// Propagates with an explicit backend and collects every sampled state.
pub fn evolve_with(
    config: &SystemConfig,
    lengths: &[f64],
    backend: Propagator,
) -> Result<Vec<AmplitudeVector>> {
    let mut states = Vec::with_capacity(lengths.len());
    propagate(config, lengths, backend, |state| {
        states.push(state.clone());
        Ok(())
    })?;
    Ok(states)
}

/// Propagates and reduces each sampled state to its photon-number moments,
/// without retaining amplitude vectors.
pub fn evolve_observables(
    config: &SystemConfig,
    lengths: &[f64],
    backend: Propagator,
) -> Result<Vec<PhotonStatistics>> {
    let mut series = Vec::with_capacity(lengths.len());
    propagate(config, lengths, backend, |state| {
        series.push(observables(state, config)?);
        Ok(())
    })?;
    Ok(series)
}

fn validate_lengths(lengths: &[f64]) -> Result<()> {
    for pair in lengths.windows(2) {
        if pair[1] < pair[0] {
            return Err(Error::domain("lengths must be ascending"));
        }
    }
    if let Some(&first) = lengths.first() {
        if first < 0.0 {
            return Err(Error::domain("lengths must be non-negative"));
        }
    }
    if lengths.iter().any(|l| !l.is_finite()) {
        return Err(Error::domain("lengths must be finite"));
    }
    Ok(())
}

fn propagate(
    config: &SystemConfig,
    lengths: &[f64],
    backend: Propagator,
    mut sink: impl FnMut(&AmplitudeVector) -> Result<()>,
) -> Result<()> {
    validate_lengths(lengths)?;
    if lengths.is_empty() {
        return Ok(());
    }
    let hamiltonian = TridiagonalHamiltonian::build(config);
    let guard = InvariantGuard::new(config, &hamiltonian, backend.norm_tolerance());
    match backend {
        Propagator::Spectral => propagate_spectral(config, &hamiltonian, lengths, &guard, sink),
        Propagator::Lanczos => propagate_lanczos(config, &hamiltonian, lengths, &guard, &mut sink),
    }
}

/// Checks unitarity and energy conservation on every emitted sample.
struct InvariantGuard<'a> {
    hamiltonian: &'a TridiagonalHamiltonian,
    initial_energy: f64,
    norm_tolerance: f64,
}

impl<'a> InvariantGuard<'a> {
    fn new(
        config: &SystemConfig,
        hamiltonian: &'a TridiagonalHamiltonian,
        norm_tolerance: f64,
    ) -> Self {
        Self {
            hamiltonian,
            initial_energy: ConservedCharges::initial(config).energy,
            norm_tolerance,
        }
    }

    fn check(&self, state: &AmplitudeVector) -> Result<()> {
        let norm_drift = (state.norm_sq() - 1.0).abs();
        if norm_drift > self.norm_tolerance {
            return Err(Error::numeric(format!(
                "unitarity violated at L/L_g = {}: |norm^2 - 1| = {norm_drift:.3e} \
                 exceeds {:.1e}",
                state.length_over_gain(),
                self.norm_tolerance
            )));
        }
        let energy = self.hamiltonian.expectation(state.amplitudes());
        let drift = (energy - self.initial_energy).abs();
        if drift > ENERGY_TOLERANCE * (1.0 + self.initial_energy.abs()) {
            return Err(Error::numeric(format!(
                "energy conservation violated at L/L_g = {}: drift {drift:.3e}",
                state.length_over_gain()
            )));
        }
        Ok(())
    }
}

fn propagate_spectral(
    config: &SystemConfig,
    hamiltonian: &TridiagonalHamiltonian,
    lengths: &[f64],
    guard: &InvariantGuard,
    mut sink: impl FnMut(&AmplitudeVector) -> Result<()>,
) -> Result<()> {
    let dim = hamiltonian.dimension();
    if dim > SPECTRAL_DIMENSION_LIMIT {
        return Err(Error::numeric(format!(
            "ladder dimension {dim} exceeds the spectral backend limit \
             {SPECTRAL_DIMENSION_LIMIT}; use the Lanczos backend"
        )));
    }
    let spectrum = hamiltonian.diagonalize()?;
    // Overlap of the seed unit vector with each eigenvector.
    let seed_weights: Vec<f64> = (0..dim).map(|j| spectrum.eigenvectors_t[[j, 0]]).collect();

    let block = (2_000_000 / dim.max(1)).clamp(1, 512).min(lengths.len());
    let mut cos_part = Array2::<f64>::zeros((block, dim));
    let mut sin_part = Array2::<f64>::zeros((block, dim));

    for chunk in lengths.chunks(block) {
        let rows = chunk.len();
        for (t, &length) in chunk.iter().enumerate() {
            let tau = config.time_from_length(length);
            for j in 0..dim {
                let (sin, cos) = (spectrum.eigenvalues[j] * tau).sin_cos();
                cos_part[[t, j]] = seed_weights[j] * cos;
                sin_part[[t, j]] = -seed_weights[j] * sin;
            }
        }
        let re = cos_part
            .slice(ndarray::s![..rows, ..])
            .dot(&spectrum.eigenvectors_t);
        let im = sin_part
            .slice(ndarray::s![..rows, ..])
            .dot(&spectrum.eigenvectors_t);
        for (t, &length) in chunk.iter().enumerate() {
            // Zero length is the identity evolution; emit the exact seed
            // vector instead of its rounding-level reconstruction.
            let state = if length == 0.0 {
                AmplitudeVector::initial(config)
            } else {
                let amplitudes: Vec<Complex64> = (0..dim)
                    .map(|v| Complex64::new(re[[t, v]], im[[t, v]]))
                    .collect();
                AmplitudeVector::new(
                    amplitudes,
                    config.initial_photons,
                    config.time_from_length(length),
                    length,
                )
            };
            guard.check(&state)?;
            sink(&state)?;
        }
    }
    Ok(())
}

/// Krylov depth cap; substeps shrink instead of the basis growing further.
const LANCZOS_MAX_BASIS: usize = 40;
/// Per-substep truncation-error budget for the Krylov exponential.
const LANCZOS_STEP_TOLERANCE: f64 = 1e-12;

fn propagate_lanczos(
    config: &SystemConfig,
    hamiltonian: &TridiagonalHamiltonian,
    lengths: &[f64],
    guard: &InvariantGuard,
    sink: &mut dyn FnMut(&AmplitudeVector) -> Result<()>,
) -> Result<()> {
    let dim = hamiltonian.dimension();
    let mut psi = vec![Complex64::ZERO; dim];
    psi[0] = Complex64::ONE;
    let mut tau_now = 0.0_f64;

    for &length in lengths {
        let tau_target = config.time_from_length(length);
        let mut remaining = tau_target - tau_now;
        while remaining > f64::EPSILON * (1.0 + tau_target.abs()) {
            let advanced = lanczos_substep(hamiltonian, &mut psi, remaining)?;
            remaining -= advanced;
        }
        tau_now = tau_target;
        let state = AmplitudeVector::new(psi.clone(), config.initial_photons, tau_target, length);
        guard.check(&state)?;
        sink(&state)?;
    }
    Ok(())
}

/// Advances `psi` by at most `dt_max` using one Krylov subspace; returns the
/// time actually advanced. The basis is built once (it is independent of the
/// step size) and the step is halved until the a-posteriori residual
/// estimate meets the budget.
fn lanczos_substep(
    hamiltonian: &TridiagonalHamiltonian,
    psi: &mut [Complex64],
    dt_max: f64,
) -> Result<f64> {
    let dim = psi.len();
    let m_cap = LANCZOS_MAX_BASIS.min(dim);

    let beta0 = norm(psi);
    if beta0 == 0.0 {
        return Err(Error::numeric("cannot propagate the zero vector"));
    }
    let breakdown = 1e-13 * (1.0 + hamiltonian.spectral_bound());

    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m_cap);
    basis.push(psi.iter().map(|c| c / beta0).collect());
    let mut alphas: Vec<f64> = Vec::with_capacity(m_cap);
    let mut betas: Vec<f64> = Vec::with_capacity(m_cap);
    let mut work = vec![Complex64::ZERO; dim];
    let mut invariant_subspace = false;

    for j in 0..m_cap {
        hamiltonian.apply(&basis[j], &mut work);
        if j > 0 {
            let beta_prev = betas[j - 1];
            let prev = &basis[j - 1];
            for (w, p) in work.iter_mut().zip(prev) {
                *w -= p * beta_prev;
            }
        }
        let alpha = dot(&basis[j], &work).re;
        alphas.push(alpha);
        for (w, v) in work.iter_mut().zip(&basis[j]) {
            *w -= v * alpha;
        }
        // One full reorthogonalization pass keeps the small matrix honest.
        for v in &basis {
            let overlap = dot(v, &work);
            for (w, vi) in work.iter_mut().zip(v) {
                *w -= vi * overlap;
            }
        }
        let beta = norm(&work);
        if beta <= breakdown {
            invariant_subspace = true;
            break;
        }
        betas.push(beta);
        if basis.len() == m_cap {
            break;
        }
        // Stop growing once the basis already resolves the full step.
        if j >= 5 {
            let small = super::diagonalize_tridiagonal(&alphas, &betas[..j])?;
            let seed: Vec<f64> = (0..=j).map(|i| small.eigenvectors_t[[i, 0]]).collect();
            let projected = small_exponential(&small, &seed, dt_max);
            let estimate = beta * projected.last().map(|z| z.norm()).unwrap_or(0.0);
            if estimate <= LANCZOS_STEP_TOLERANCE {
                break;
            }
        }
        basis.push(work.iter().map(|c| c / beta).collect());
    }

    let m = alphas.len();
    let small = super::diagonalize_tridiagonal(&alphas, &betas[..m - 1])?;
    // Weight of the start vector in the small eigenbasis.
    let seed: Vec<f64> = (0..m).map(|i| small.eigenvectors_t[[i, 0]]).collect();
    let residual_scale = if invariant_subspace || m == dim {
        0.0
    } else {
        betas[m - 1]
    };

    let mut dt = dt_max;
    for _ in 0..64 {
        let projected = small_exponential(&small, &seed, dt);
        let estimate = residual_scale * projected.last().map(|z| z.norm()).unwrap_or(0.0);
        if estimate <= LANCZOS_STEP_TOLERANCE {
            for value in psi.iter_mut() {
                *value = Complex64::ZERO;
            }
            for (k, z) in projected.iter().enumerate() {
                let weight = z * beta0;
                for (target, v) in psi.iter_mut().zip(&basis[k]) {
                    *target += v * weight;
                }
            }
            return Ok(dt);
        }
        dt *= 0.5;
    }
    Err(Error::numeric(
        "Lanczos substep failed to meet its error budget even after 64 halvings",
    ))
}

/// Coefficients of `exp(−i·T·dt)·e₁` in the Lanczos basis.
fn small_exponential(small: &super::Spectrum, seed: &[f64], dt: f64) -> Vec<Complex64> {
    let m = seed.len();
    let mut out = vec![Complex64::ZERO; m];
    for (i, &weight) in seed.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -small.eigenvalues[i] * dt) * weight;
        for (k, value) in out.iter_mut().enumerate() {
            *value += phase * small.eigenvectors_t[[i, k]];
        }
    }
    out
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn config(n: u64, n0: u64, delta: f64, alpha: f64) -> SystemConfig {
        SystemConfig::new(n, n0, delta, alpha).unwrap()
    }

    #[test]
    fn zero_length_is_the_seed_state() {
        let cfg = config(8, 3, 0.2, 0.1);
        for backend in [Propagator::Spectral, Propagator::Lanczos] {
            let states = evolve_with(&cfg, &[0.0], backend).unwrap();
            let stats = observables(&states[0], &cfg).unwrap();
            assert_abs_diff_eq!(stats.mean, 3.0, epsilon = 1e-12);
            assert_abs_diff_eq!(stats.variance, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_electron_rabi_oscillation() {
        // N = 1, delta = 0: n(tau) = sin^2(alpha*tau), i.e. sin^2(L/(2Lg)).
        let cfg = config(1, 0, 0.0, 0.1);
        let lengths: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        for backend in [Propagator::Spectral, Propagator::Lanczos] {
            let series = evolve_observables(&cfg, &lengths, backend).unwrap();
            for (stats, &l) in series.iter().zip(&lengths) {
                let expected = (0.5 * l).sin().powi(2);
                assert_abs_diff_eq!(stats.mean, expected, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn two_level_moments_at_quarter_period() {
        // alpha*tau = pi/4: p1 = 1/2, so mean 0.5 and variance 0.25.
        let alpha = 0.1;
        let cfg = config(1, 0, 0.0, alpha);
        let length = 2.0 * alpha * (std::f64::consts::FRAC_PI_4 / alpha);
        let series = evolve_observables(&cfg, &[length], Propagator::Spectral).unwrap();
        assert_abs_diff_eq!(series[0].mean, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(series[0].variance, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(series[0].fano_factor.unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn backends_agree_on_a_detuned_ladder() {
        let cfg = config(40, 5, 0.1, 0.2);
        let lengths: Vec<f64> = (0..=60).map(|i| i as f64 * 0.25).collect();
        let spectral = evolve_observables(&cfg, &lengths, Propagator::Spectral).unwrap();
        let lanczos = evolve_observables(&cfg, &lengths, Propagator::Lanczos).unwrap();
        for (s, l) in spectral.iter().zip(&lanczos) {
            assert_abs_diff_eq!(s.mean, l.mean, epsilon = 1e-6 * (1.0 + s.mean));
        }
    }

    #[test]
    fn rejects_descending_lengths() {
        let cfg = config(4, 0, 0.0, 0.1);
        assert!(evolve(&cfg, &[1.0, 0.5]).is_err());
        assert!(evolve(&cfg, &[-1.0, 0.5]).is_err());
        assert!(evolve(&cfg, &[0.0, f64::NAN]).is_err());
    }

    #[test]
    fn unitarity_and_energy_hold_along_the_curve() {
        let cfg = config(60, 10, 0.15, 0.12);
        let lengths: Vec<f64> = (0..=100).map(|i| i as f64 * 0.15).collect();
        let states = evolve(&cfg, &lengths).unwrap();
        let h = TridiagonalHamiltonian::build(&cfg);
        let e0 = ConservedCharges::initial(&cfg).energy;
        for state in &states {
            assert!((state.norm_sq() - 1.0).abs() <= 1e-10);
            let drift = (h.expectation(state.amplitudes()) - e0).abs();
            assert!(drift <= 1e-8 * (1.0 + e0.abs()));
        }
    }
}
