//! Dimensionless model parameters of one collective two-level ladder problem.

use crate::error::Error;
use crate::Result;

/// Parameters `(N, n₀, δ, α_N)` defining the ladder problem.
///
/// * `n_electrons` — number of electrons `N ≥ 1`; fixes the ladder length.
/// * `initial_photons` — Fock seed `n₀` of the ladder.
/// * `detuning` — scaled momentum detuning `δ = (p − q/2)/(q/2)`; the model
///   is only valid for `|δ| < 1`.
/// * `quantum_parameter` — coupling-to-recoil ratio `α_N = g√N/ω_r`; values
///   approaching one leave the quantum regime (a caller-level warning, not
///   an error — see [`SystemConfig::is_quantum_regime`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub n_electrons: u64,
    pub initial_photons: u64,
    pub detuning: f64,
    pub quantum_parameter: f64,
}

impl SystemConfig {
    pub fn new(
        n_electrons: u64,
        initial_photons: u64,
        detuning: f64,
        quantum_parameter: f64,
    ) -> Result<Self> {
        let config = Self {
            n_electrons,
            initial_photons,
            detuning,
            quantum_parameter,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if self.n_electrons < 1 {
            return Err(Error::config("n_electrons must be at least 1"));
        }
        if !self.detuning.is_finite() || self.detuning.abs() >= 1.0 {
            return Err(Error::config(format!(
                "detuning must satisfy |delta| < 1, got {}",
                self.detuning
            )));
        }
        if !self.quantum_parameter.is_finite() || self.quantum_parameter <= 0.0 {
            return Err(Error::config(format!(
                "quantum_parameter must be positive and finite, got {}",
                self.quantum_parameter
            )));
        }
        Ok(())
    }

    /// Whether `α_N < 1`, i.e. the effective two-level description applies.
    ///
    /// Configurations with `α_N ≥ 1` are still accepted so the classical
    /// crossover can be explored; front ends should surface a warning.
    pub fn is_quantum_regime(&self) -> bool {
        self.quantum_parameter < 1.0
    }

    /// Ladder dimension `N + 1`.
    pub fn dimension(&self) -> usize {
        self.n_electrons as usize + 1
    }

    /// Detuning in units of the quantum parameter, `δ/α_N`.
    pub fn detuning_ratio(&self) -> f64 {
        self.detuning / self.quantum_parameter
    }

    /// Converts a wiggler length in gain-length units to dimensionless time,
    /// `τ = (L/L_g)/(2 α_N)`.
    pub fn time_from_length(&self, length_over_gain: f64) -> f64 {
        0.5 * length_over_gain / self.quantum_parameter
    }

    /// Returns a copy with the Fock seed replaced (used by mixture averaging).
    pub fn with_initial_photons(&self, initial_photons: u64) -> Self {
        Self {
            initial_photons,
            ..*self
        }
    }
}
