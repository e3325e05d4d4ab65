//! Exact quantum dynamics on the collective ladder.
//!
//! The state of `N` electrons (all initially excited) and the laser mode
//! with Fock seed `n₀` lives on the ladder `ν = n₀ … n₀ + N`; the
//! Schrödinger equation reduces to a three-term recurrence whose matrix is
//! real symmetric tridiagonal. Everything here — Hamiltonian assembly,
//! diagonalization, propagation, observables — works on that ladder.

mod eigen;
mod propagator;

pub use eigen::{diagonalize_tridiagonal, Spectrum};
pub use propagator::{evolve, evolve_observables, evolve_with, Propagator};

use num_complex::Complex64;

use crate::config::SystemConfig;
use crate::error::Error;
use crate::Result;

/// Ladder coupling coefficient
/// `a(ν) = √(ν(ν − n₀)) · √(1 − (ν − n₀ − 1)/N)`.
///
/// Vanishes at both closures `ν = n₀` and `ν = n₀ + N + 1`, which is what
/// confines the dynamics to the ladder.
pub fn coupling_coefficient(nu: u64, config: &SystemConfig) -> Result<f64> {
    let n0 = config.initial_photons;
    let n = config.n_electrons;
    if nu < n0 || nu > n0 + n + 1 {
        return Err(Error::domain(format!(
            "ladder index {nu} outside [{}, {}]",
            n0,
            n0 + n + 1
        )));
    }
    let steps = (nu - n0) as f64;
    let photon_factor = (nu as f64 * steps).sqrt();
    let inversion_factor = (1.0 - (steps - 1.0) / n as f64).sqrt();
    Ok(photon_factor * inversion_factor)
}

/// The `(N+1)`-dimensional symmetric tridiagonal ladder Hamiltonian.
///
/// Diagonal entry at ladder index `ν` is `−δ·ν`; the coupling between `ν`
/// and `ν + 1` is `α_N · a(ν + 1)`.
#[derive(Debug, Clone)]
pub struct TridiagonalHamiltonian {
    ladder_offset: u64,
    diagonal: Vec<f64>,
    off_diagonal: Vec<f64>,
}

impl TridiagonalHamiltonian {
    /// Assembles the Hamiltonian for a validated configuration.
    pub fn build(config: &SystemConfig) -> Self {
        let dim = config.dimension();
        let n0 = config.initial_photons;
        let delta = config.detuning;
        let alpha = config.quantum_parameter;
        let diagonal = (0..dim).map(|i| -delta * (n0 + i as u64) as f64).collect();
        let off_diagonal = (0..dim - 1)
            .map(|i| {
                alpha
                    * coupling_coefficient(n0 + i as u64 + 1, config)
                        .expect("interior ladder index")
            })
            .collect();
        Self {
            ladder_offset: n0,
            diagonal,
            off_diagonal,
        }
    }

    pub fn dimension(&self) -> usize {
        self.diagonal.len()
    }

    /// Ladder index of the first basis state, i.e. `n₀`.
    pub fn ladder_offset(&self) -> u64 {
        self.ladder_offset
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off_diagonal
    }

    /// Full eigendecomposition; eigenvalues ascending.
    pub fn diagonalize(&self) -> Result<Spectrum> {
        diagonalize_tridiagonal(&self.diagonal, &self.off_diagonal)
    }

    /// `y = H x` for a complex state vector.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.dimension();
        debug_assert_eq!(x.len(), n);
        debug_assert_eq!(y.len(), n);
        for i in 0..n {
            let mut acc = x[i] * self.diagonal[i];
            if i > 0 {
                acc += x[i - 1] * self.off_diagonal[i - 1];
            }
            if i + 1 < n {
                acc += x[i + 1] * self.off_diagonal[i];
            }
            y[i] = acc;
        }
    }

    /// Real quadratic form `⟨x|H|x⟩`.
    pub fn expectation(&self, x: &[Complex64]) -> f64 {
        let n = self.dimension();
        let mut acc = 0.0;
        for i in 0..n {
            acc += self.diagonal[i] * x[i].norm_sqr();
            if i + 1 < n {
                acc += 2.0 * self.off_diagonal[i] * (x[i].conj() * x[i + 1]).re;
            }
        }
        acc
    }

    /// Gershgorin bound on the spectral radius.
    pub fn spectral_bound(&self) -> f64 {
        let n = self.dimension();
        let mut bound = 0.0_f64;
        for i in 0..n {
            let mut row = self.diagonal[i].abs();
            if i > 0 {
                row += self.off_diagonal[i - 1].abs();
            }
            if i + 1 < n {
                row += self.off_diagonal[i].abs();
            }
            bound = bound.max(row);
        }
        bound
    }
}

/// Complex probability amplitudes `c_ν` on the ladder at one interaction
/// length.
///
/// The global phase follows the raw Hamiltonian including the seed energy
/// `−δ·n₀`; only `|c_ν|²` is observable.
#[derive(Debug, Clone)]
pub struct AmplitudeVector {
    amplitudes: Vec<Complex64>,
    ladder_offset: u64,
    time: f64,
    length_over_gain: f64,
}

impl AmplitudeVector {
    pub(crate) fn new(
        amplitudes: Vec<Complex64>,
        ladder_offset: u64,
        time: f64,
        length_over_gain: f64,
    ) -> Self {
        Self {
            amplitudes,
            ladder_offset,
            time,
            length_over_gain,
        }
    }

    /// The Fock-seed unit vector at `τ = 0`.
    pub fn initial(config: &SystemConfig) -> Self {
        let mut amplitudes = vec![Complex64::ZERO; config.dimension()];
        amplitudes[0] = Complex64::ONE;
        Self::new(amplitudes, config.initial_photons, 0.0, 0.0)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Ladder index of the first amplitude, i.e. `n₀`.
    pub fn ladder_offset(&self) -> u64 {
        self.ladder_offset
    }

    /// Dimensionless time `τ`.
    pub fn time(&self) -> f64 {
        self.time
    }

    /// Interaction length in gain-length units, `L/L_g`.
    pub fn length_over_gain(&self) -> f64 {
        self.length_over_gain
    }

    /// Total probability `Σ_ν |c_ν|²`.
    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// The photon-number distribution `p_ν = |c_ν|²`.
    pub fn photon_distribution(&self) -> PhotonDistribution {
        PhotonDistribution {
            offset: self.ladder_offset,
            probabilities: self.amplitudes.iter().map(|c| c.norm_sqr()).collect(),
        }
    }
}

/// Probabilities over photon numbers `ν = offset … offset + len − 1`.
#[derive(Debug, Clone)]
pub struct PhotonDistribution {
    pub offset: u64,
    pub probabilities: Vec<f64>,
}

impl PhotonDistribution {
    pub fn mean(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(i, p)| (self.offset + i as u64) as f64 * p)
            .sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let nu = (self.offset + i as u64) as f64;
                nu * nu * p
            })
            .sum()
    }
}

/// Photon-number moments at one interaction length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonStatistics {
    pub length_over_gain: f64,
    pub mean: f64,
    pub variance: f64,
    /// `Δn²/⟨n̂⟩`; `None` when the mean vanishes.
    pub fano_factor: Option<f64>,
    /// Seed-distribution mass represented in these moments (1 for a pure
    /// Fock seed, `≥ 1 − ε` for truncated mixtures).
    pub captured_mass: f64,
}

impl PhotonStatistics {
    pub(crate) fn from_moments(
        length_over_gain: f64,
        mean: f64,
        second_moment: f64,
        captured_mass: f64,
    ) -> Self {
        // Clamp the tiny negative values produced by rounding of
        // second_moment - mean^2 for near-delta distributions.
        let variance = (second_moment - mean * mean).max(0.0);
        let fano_factor = (mean > 0.0).then(|| variance / mean);
        Self {
            length_over_gain,
            mean,
            variance,
            fano_factor,
            captured_mass,
        }
    }
}

/// Moments of the photon distribution of a single propagated state.
pub fn observables(state: &AmplitudeVector, config: &SystemConfig) -> Result<PhotonStatistics> {
    if state.ladder_offset != config.initial_photons || state.amplitudes.len() != config.dimension()
    {
        return Err(Error::domain(
            "state ladder does not match the configuration",
        ));
    }
    let distribution = state.photon_distribution();
    Ok(PhotonStatistics::from_moments(
        state.length_over_gain,
        distribution.mean(),
        distribution.second_moment(),
        1.0,
    ))
}

/// The three conserved charges of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedCharges {
    /// `⟨Ĵ²⟩ = r(r+1)` with `r = N/2`; fixed by the representation.
    pub total_angular_momentum: f64,
    /// `⟨n̂ + Ĵ_z⟩ = n₀ + N/2`; fixed by the ladder construction.
    pub total_excitations: f64,
    /// `⟨Ĥ⟩`, equal to `−δ·n₀` at `τ = 0`.
    pub energy: f64,
}

impl ConservedCharges {
    /// Charges of the initial fully excited Fock-seeded state.
    pub fn initial(config: &SystemConfig) -> Self {
        let r = config.n_electrons as f64 / 2.0;
        Self {
            total_angular_momentum: r * (r + 1.0),
            total_excitations: config.initial_photons as f64 + r,
            energy: -config.detuning * config.initial_photons as f64,
        }
    }

    /// Charges evaluated on a propagated state. The first two are exact by
    /// representation; the energy is the quadratic form of the Hamiltonian.
    pub fn of_state(state: &AmplitudeVector, config: &SystemConfig) -> Self {
        let initial = Self::initial(config);
        let hamiltonian = TridiagonalHamiltonian::build(config);
        Self {
            energy: hamiltonian.expectation(state.amplitudes()),
            ..initial
        }
    }
}

/// Locates the first interior local maximum of a sampled curve and refines
/// it by parabolic interpolation through the peak sample and its neighbors.
///
/// Returns the refined `(abscissa, ordinate)`. Fails when the series is
/// too short or contains no interior maximum (e.g. still rising at the
/// end of the scan).
pub fn find_first_maximum(series: &[(f64, f64)]) -> Result<(f64, f64)> {
    if series.len() < 3 {
        return Err(Error::analysis(format!(
            "need at least 3 samples to locate a maximum, got {}",
            series.len()
        )));
    }
    let peak = (1..series.len() - 1).find(|&i| {
        let (_, prev) = series[i - 1];
        let (_, here) = series[i];
        let (_, next) = series[i + 1];
        here >= prev && here > next
    });
    let Some(i) = peak else {
        return Err(Error::analysis(
            "no interior maximum found; extend the scan to longer lengths",
        ));
    };

    let (x0, y0) = series[i - 1];
    let (x1, y1) = series[i];
    let (x2, y2) = series[i + 1];
    // Vertex of the Lagrange parabola through the three samples.
    let d01 = (x1 - x0) * (y1 - y2);
    let d21 = (x1 - x2) * (y1 - y0);
    let denominator = d01 - d21;
    if denominator.abs() < f64::EPSILON * (y1.abs() + 1.0) {
        return Ok((x1, y1));
    }
    let x_star = x1 - 0.5 * ((x1 - x0) * d01 - (x1 - x2) * d21) / denominator;

    // Evaluate the same parabola at the vertex.
    let l0 = (x_star - x1) * (x_star - x2) / ((x0 - x1) * (x0 - x2));
    let l1 = (x_star - x0) * (x_star - x2) / ((x1 - x0) * (x1 - x2));
    let l2 = (x_star - x0) * (x_star - x1) / ((x2 - x0) * (x2 - x1));
    let y_star = y0 * l0 + y1 * l1 + y2 * l2;
    Ok((x_star, y_star))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn config(n: u64, n0: u64, delta: f64, alpha: f64) -> SystemConfig {
        SystemConfig::new(n, n0, delta, alpha).unwrap()
    }

    #[test]
    fn coupling_vanishes_at_ladder_ends() {
        let cfg = config(5, 3, 0.0, 0.1);
        assert_eq!(coupling_coefficient(3, &cfg).unwrap(), 0.0);
        assert_eq!(coupling_coefficient(9, &cfg).unwrap(), 0.0);
        assert!(coupling_coefficient(2, &cfg).is_err());
        assert!(coupling_coefficient(10, &cfg).is_err());
    }

    #[test]
    fn coupling_single_electron() {
        let cfg = config(1, 0, 0.0, 0.1);
        assert_abs_diff_eq!(coupling_coefficient(1, &cfg).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn coupling_interior_value() {
        // N = 4, n0 = 2, nu = 4: sqrt(4*2)*sqrt(1 - 1/4) = sqrt(6).
        // Cross-checked by scripts evaluating the defining formula directly.
        let cfg = config(4, 2, 0.0, 0.1);
        assert_abs_diff_eq!(
            coupling_coefficient(4, &cfg).unwrap(),
            6.0_f64.sqrt(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            coupling_coefficient(4, &cfg).unwrap(),
            2.449489743,
            epsilon = 1e-9
        );
    }

    #[test]
    fn hamiltonian_two_level() {
        let cfg = config(1, 0, 0.0, 0.1);
        let h = TridiagonalHamiltonian::build(&cfg);
        assert_eq!(h.dimension(), 2);
        assert_eq!(h.diagonal(), &[0.0, 0.0]);
        assert_abs_diff_eq!(h.off_diagonal()[0], 0.1, epsilon = 1e-15);
    }

    #[test]
    fn hamiltonian_detuned_three_level() {
        // N = 2, n0 = 0, delta = 0.5, alpha = 0.2. Diagonal is -delta*nu;
        // couplings are alpha*a(1) = 0.2 and alpha*a(2) = 0.2*sqrt(2).
        let cfg = config(2, 0, 0.5, 0.2);
        let h = TridiagonalHamiltonian::build(&cfg);
        assert_eq!(h.diagonal(), &[0.0, -0.5, -1.0]);
        assert_abs_diff_eq!(h.off_diagonal()[0], 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(
            h.off_diagonal()[1],
            0.2 * std::f64::consts::SQRT_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn spectrum_of_three_level_resonant_ladder() {
        // Couplings alpha*(1, sqrt(2)) on a zero diagonal: eigenvalues
        // 0, ±alpha*sqrt(3), from the characteristic polynomial by hand.
        let alpha = 0.2;
        let cfg = config(2, 0, 0.0, alpha);
        let spectrum = TridiagonalHamiltonian::build(&cfg).diagonalize().unwrap();
        let expected = alpha * 3.0_f64.sqrt();
        assert_abs_diff_eq!(spectrum.eigenvalues[0], -expected, epsilon = 1e-13);
        assert_abs_diff_eq!(spectrum.eigenvalues[1], 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(spectrum.eigenvalues[2], expected, epsilon = 1e-13);
    }

    #[test]
    fn trace_is_preserved_by_diagonalization() {
        let cfg = config(40, 7, 0.3, 0.15);
        let h = TridiagonalHamiltonian::build(&cfg);
        let spectrum = h.diagonalize().unwrap();
        let trace_d: f64 = h.diagonal().iter().sum();
        let trace_lambda: f64 = spectrum.eigenvalues.iter().sum();
        assert_abs_diff_eq!(
            trace_d,
            trace_lambda,
            epsilon = 1e-10 * (1.0 + trace_d.abs())
        );
    }

    #[test]
    fn initial_state_observables() {
        let cfg = config(10, 4, 0.1, 0.2);
        let state = AmplitudeVector::initial(&cfg);
        let stats = observables(&state, &cfg).unwrap();
        assert_eq!(stats.mean, 4.0);
        assert_eq!(stats.variance, 0.0);
        assert_eq!(stats.fano_factor, Some(0.0));
        assert_eq!(stats.captured_mass, 1.0);
    }

    #[test]
    fn vacuum_initial_state_has_undefined_fano() {
        let cfg = config(10, 0, 0.0, 0.2);
        let state = AmplitudeVector::initial(&cfg);
        let stats = observables(&state, &cfg).unwrap();
        assert_eq!(stats.mean, 0.0);
        assert_eq!(stats.fano_factor, None);
    }

    #[test]
    fn conserved_charges_of_initial_state() {
        let cfg = config(6, 2, 0.25, 0.1);
        let charges = ConservedCharges::initial(&cfg);
        assert_eq!(charges.total_angular_momentum, 12.0); // r(r+1) = 3*4
        assert_eq!(charges.total_excitations, 5.0); // n0 + N/2
        assert_eq!(charges.energy, -0.5); // -delta*n0
        let state = AmplitudeVector::initial(&cfg);
        let on_state = ConservedCharges::of_state(&state, &cfg);
        assert_abs_diff_eq!(on_state.energy, charges.energy, epsilon = 1e-14);
    }

    #[test]
    fn first_maximum_of_sampled_sine_squared() {
        let series: Vec<(f64, f64)> = (0..=300)
            .map(|i| {
                let x = i as f64 * 0.01;
                (x, x.sin().powi(2))
            })
            .collect();
        let (x_max, v_max) = find_first_maximum(&series).unwrap();
        assert!((x_max - std::f64::consts::FRAC_PI_2).abs() < 1e-3);
        assert!((v_max - 1.0).abs() < 1e-6);
    }

    #[test]
    fn monotone_series_is_an_analysis_error() {
        let series: Vec<(f64, f64)> = (0..50).map(|i| (i as f64, i as f64)).collect();
        assert!(matches!(
            find_first_maximum(&series),
            Err(Error::Analysis(_))
        ));
    }

    #[test]
    fn too_few_samples_is_an_analysis_error() {
        assert!(find_first_maximum(&[(0.0, 0.0), (1.0, 1.0)]).is_err());
    }
}
