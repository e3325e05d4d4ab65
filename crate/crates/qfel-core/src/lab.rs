//! Laboratory-frame parameter conversion and feasibility budgeting.
//!
//! Maps the five adjustable experiment parameters (wiggler wavelength and
//! strength, electron density, beam energy and spread) to the dimensionless
//! model quantities, evaluates the beam-quality and decoherence bounds, and
//! compares the decoherence-limited interaction length against the
//! saturation length for SASE and seeded operation.

use serde::{Deserialize, Serialize};

use crate::analytic::{saturation_length, SaturationMode};
use crate::config::SystemConfig;
use crate::error::Error;
use crate::Result;

/// CODATA-2018 constants; overridable for testing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    /// Classical electron radius `r_e` in meters.
    pub classical_electron_radius: f64,
    /// Compton wavelength `λ_C = h/(m_e c)` in meters.
    pub compton_wavelength: f64,
    /// Speed of light in m/s.
    pub speed_of_light: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            classical_electron_radius: 2.817_940_326_2e-15,
            compton_wavelength: 2.426_310_238_67e-12,
            speed_of_light: 299_792_458.0,
        }
    }
}

impl PhysicalConstants {
    /// Fine-structure quantity `α_f = 2π r_e / λ_C` (derived, not stored).
    pub fn fine_structure(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.classical_electron_radius / self.compton_wavelength
    }
}

/// Laboratory-frame experiment parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabParams {
    /// Wiggler wavelength `λ_W` in meters.
    pub wiggler_wavelength: f64,
    /// Dimensionless wiggler amplitude `a₀`.
    pub wiggler_parameter: f64,
    /// Electron density `n_e` in 1/m³.
    pub electron_density: f64,
    /// Beam energy over rest energy, `γ₀ > 1`.
    pub gamma0: f64,
    /// Relative energy spread `Δγ₀/γ₀`.
    pub relative_energy_spread: f64,
    /// Optional wiggler length `L` in meters for the decoherence flags.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction_length: Option<f64>,
    /// Optional electron count `N` for saturation estimates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub electron_count: Option<u64>,
    /// Optional seed ratio `n₀/N`; zero encodes SASE.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_ratio: Option<f64>,
}

impl LabParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("wiggler_wavelength", self.wiggler_wavelength),
            ("electron_density", self.electron_density),
        ];
        for (name, value) in positive {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::config(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if !self.wiggler_parameter.is_finite() || self.wiggler_parameter < 0.0 {
            return Err(Error::config(format!(
                "wiggler_parameter must be non-negative, got {}",
                self.wiggler_parameter
            )));
        }
        if !self.gamma0.is_finite() || self.gamma0 <= 1.0 {
            return Err(Error::config(format!(
                "gamma0 must exceed 1, got {}",
                self.gamma0
            )));
        }
        if !self.relative_energy_spread.is_finite() || self.relative_energy_spread < 0.0 {
            return Err(Error::config(format!(
                "relative_energy_spread must be non-negative, got {}",
                self.relative_energy_spread
            )));
        }
        if let Some(l) = self.interaction_length {
            if !l.is_finite() || l <= 0.0 {
                return Err(Error::config(format!(
                    "interaction_length must be positive, got {l}"
                )));
            }
        }
        if let Some(n) = self.electron_count {
            if n == 0 {
                return Err(Error::config("electron_count must be positive"));
            }
        }
        if let Some(r) = self.seed_ratio {
            if !r.is_finite() || r < 0.0 {
                return Err(Error::config(format!(
                    "seed_ratio must be non-negative, got {r}"
                )));
            }
        }
        Ok(())
    }
}

/// Model quantities derived from [`LabParams`], all in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParams {
    /// Quantum parameter `α_N`.
    pub quantum_parameter: f64,
    /// Longitudinal energy `γ = γ₀ (1 + a₀²)^{-1/2}`.
    pub longitudinal_gamma: f64,
    /// Quantum gain length `L_g` in meters.
    pub quantum_gain_length: f64,
    /// Classical gain length in meters, for comparison.
    pub classical_gain_length: f64,
    /// Plasma wavenumber `k_p` in 1/m.
    pub plasma_wavenumber: f64,
    /// Spontaneous-scattering rate `R_sp` in 1/m.
    pub spontaneous_rate: f64,
    /// Recoil-scaled efficiency parameter `ρ̄ = α_N^{2/3}`.
    pub rho_bar: f64,
    /// Two-level bound on `Δγ₀/γ₀`.
    pub spread_bound_loose: f64,
    /// Momentum-selectivity bound, `2 α_N` times the loose one.
    pub spread_bound_strict: f64,
}

/// Converts lab parameters to model quantities with the default constants.
pub fn derive(params: &LabParams) -> Result<DerivedParams> {
    derive_with(params, &PhysicalConstants::default())
}

/// Converts lab parameters to model quantities.
pub fn derive_with(params: &LabParams, constants: &PhysicalConstants) -> Result<DerivedParams> {
    params.validate()?;
    let r_e = constants.classical_electron_radius;
    let lambda_c = constants.compton_wavelength;
    let lambda_w = params.wiggler_wavelength;
    let n_e = params.electron_density;
    let a0 = params.wiggler_parameter;
    let gamma0 = params.gamma0;
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let a0_sq1 = 1.0 + a0 * a0;

    let quantum_parameter = (r_e * n_e).sqrt() / (32.0 * gamma0.powi(3) * sqrt_pi)
        * (lambda_w / lambda_c).powf(2.5)
        * lambda_c
        * a0
        * a0_sq1.powf(1.5);
    let quantum_gain_length = gamma0 * gamma0 / (sqrt_pi * a0 * a0_sq1.sqrt())
        * ((lambda_c / lambda_w) / (r_e * n_e)).sqrt();
    let classical_gain_length = gamma0 * lambda_w.powf(1.0 / 3.0)
        / (3.0_f64.sqrt()
            * 2.0
            * std::f64::consts::PI.powf(2.0 / 3.0)
            * (a0 * a0 * r_e * n_e).powf(1.0 / 3.0));
    let plasma_wavenumber = (4.0 * std::f64::consts::PI * r_e * n_e / gamma0.powi(3)).sqrt();
    let spontaneous_rate =
        (2.0 * std::f64::consts::PI).powi(2) / 3.0 * a0 * a0 * r_e / (lambda_w * lambda_c);
    let spread_bound_loose = 4.0 * gamma0 / a0_sq1 * lambda_c / lambda_w;

    Ok(DerivedParams {
        quantum_parameter,
        longitudinal_gamma: gamma0 / a0_sq1.sqrt(),
        quantum_gain_length,
        classical_gain_length,
        plasma_wavenumber,
        spontaneous_rate,
        rho_bar: quantum_parameter.powf(2.0 / 3.0),
        spread_bound_loose,
        spread_bound_strict: 2.0 * quantum_parameter * spread_bound_loose,
    })
}

/// Decoherence-limited interaction length in gain lengths,
/// `L/L_g = [12 (α_N/α_f)(R_sp L)(k_p L)²]^{1/3}`.
pub fn budget_length(derived: &DerivedParams, r_sp_l: f64, k_p_l: f64) -> Result<f64> {
    budget_length_with(derived, r_sp_l, k_p_l, &PhysicalConstants::default())
}

pub fn budget_length_with(
    derived: &DerivedParams,
    r_sp_l: f64,
    k_p_l: f64,
    constants: &PhysicalConstants,
) -> Result<f64> {
    if !(r_sp_l > 0.0 && r_sp_l <= 0.5) {
        return Err(Error::domain(format!(
            "R_sp*L must lie in (0, 0.5], got {r_sp_l}"
        )));
    }
    if !(k_p_l > 0.0 && k_p_l <= 1.0) {
        return Err(Error::domain(format!(
            "k_p*L must lie in (0, 1], got {k_p_l}"
        )));
    }
    let alpha_f = constants.fine_structure();
    Ok((12.0 * derived.quantum_parameter / alpha_f * r_sp_l * k_p_l * k_p_l).powf(1.0 / 3.0))
}

/// BR-frame collective coupling `g√N = a₀ π c √(2 r_e n_e/(λ_C k))` with the
/// BR wavenumber `k` supplied by the caller.
pub fn coupling_from_br_wavenumber(
    params: &LabParams,
    br_wavenumber: f64,
    constants: &PhysicalConstants,
) -> f64 {
    params.wiggler_parameter
        * std::f64::consts::PI
        * constants.speed_of_light
        * (2.0 * constants.classical_electron_radius * params.electron_density
            / (constants.compton_wavelength * br_wavenumber))
            .sqrt()
}

/// Gain length from the collective coupling, `L_g = c/(2 g√N)`.
pub fn gain_length_from_coupling(coupling: f64, constants: &PhysicalConstants) -> f64 {
    constants.speed_of_light / (2.0 * coupling)
}

/// The BR wavenumber at which the footnote coupling reproduces the
/// laboratory-frame gain length.
pub fn br_wavenumber_matching_gain_length(
    params: &LabParams,
    derived: &DerivedParams,
    constants: &PhysicalConstants,
) -> f64 {
    // From c/(2 g sqrt(N)) = L_g with the coupling formula above.
    8.0 * constants.classical_electron_radius
        * params.electron_density
        * params.wiggler_parameter.powi(2)
        * std::f64::consts::PI.powi(2)
        * derived.quantum_gain_length.powi(2)
        / constants.compton_wavelength
}

/// Assumed operating point for the decoherence budget and the
/// quantum-regime thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Assumptions {
    /// `R_sp·L` occupancy, at most 0.5.
    pub r_sp_length: f64,
    /// `k_p·L` occupancy, at most 1.
    pub k_p_length: f64,
    /// `α_N` below this passes the quantum-regime check.
    pub quantum_pass_threshold: f64,
    /// `α_N` at or above this fails it; between the two warns.
    pub quantum_fail_threshold: f64,
}

impl Default for Assumptions {
    fn default() -> Self {
        Self {
            r_sp_length: 0.5,
            k_p_length: 1.0,
            quantum_pass_threshold: 0.3,
            quantum_fail_threshold: 1.0,
        }
    }
}

/// A single pass/fail constraint with its relative margin
/// (`(bound − value)/bound`; positive when satisfied).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintFlag {
    pub satisfied: bool,
    pub margin: f64,
}

impl ConstraintFlag {
    fn from_bound(value: f64, bound: f64) -> Self {
        Self {
            satisfied: value <= bound,
            margin: (bound - value) / bound,
        }
    }
}

/// Three-level quantum-regime status: the model only requires `α_N ≪ 1`,
/// so the band between the pass and fail thresholds warns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantumRegimeStatus {
    Pass,
    Warn,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantumRegimeFlag {
    pub status: QuantumRegimeStatus,
    /// `(pass_threshold − α_N)/pass_threshold`.
    pub margin: f64,
}

/// Overall outcome of the comparison between saturation and budget lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// Both SASE and seeded operation saturate within the budget.
    BothFeasible,
    /// Only the seeded saturation length fits the budget.
    SeededFeasible,
    /// SASE does not fit and no seeded operation was requested.
    SaseInfeasible,
    /// Neither assessed mode fits the budget.
    NeitherFeasible,
}

/// Full feasibility assessment of one parameter set.
#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityReport {
    pub derived: DerivedParams,
    pub assumptions: Assumptions,
    /// Decoherence-limited `L/L_g`.
    pub budget_length_over_gain: f64,
    /// Asymptotic SASE saturation length, when `electron_count` is known.
    pub sase_saturation_over_gain: Option<f64>,
    /// Asymptotic seeded saturation length, when `seed_ratio > 0`.
    pub seeded_saturation_over_gain: Option<f64>,
    pub quantum_regime: QuantumRegimeFlag,
    pub spread_loose: ConstraintFlag,
    pub spread_strict: ConstraintFlag,
    pub space_charge: ConstraintFlag,
    pub spontaneous: ConstraintFlag,
    pub verdict: Verdict,
}

/// Assesses feasibility with the default constants.
pub fn assess(params: &LabParams, assumptions: &Assumptions) -> Result<FeasibilityReport> {
    assess_with(params, assumptions, &PhysicalConstants::default())
}

pub fn assess_with(
    params: &LabParams,
    assumptions: &Assumptions,
    constants: &PhysicalConstants,
) -> Result<FeasibilityReport> {
    let derived = derive_with(params, constants)?;
    if params.electron_count.is_none() && params.seed_ratio.is_none() {
        return Err(Error::config(
            "missing fields for saturation estimates: provide electron_count or seed_ratio",
        ));
    }
    let budget = budget_length_with(
        &derived,
        assumptions.r_sp_length,
        assumptions.k_p_length,
        constants,
    )?;

    let sase_saturation = params
        .electron_count
        .map(|n| asymptotic_saturation(n, 0, derived.quantum_parameter))
        .transpose()?;
    // A zero ratio encodes SASE; only true seeds are assessed.
    let seed_ratio = params.seed_ratio.filter(|&ratio| ratio > 0.0);
    let seeded_saturation = match (seed_ratio, params.electron_count) {
        (Some(ratio), Some(n)) => Some(asymptotic_saturation(
            n,
            (ratio * n as f64).round() as u64,
            derived.quantum_parameter,
        )?),
        // Large-N limit: L_max depends only on the seed ratio.
        (Some(ratio), None) => Some(2.0 * (4.0 / ratio.sqrt()).ln()),
        (None, _) => None,
    };

    let alpha = derived.quantum_parameter;
    let quantum_regime = QuantumRegimeFlag {
        status: if alpha < assumptions.quantum_pass_threshold {
            QuantumRegimeStatus::Pass
        } else if alpha < assumptions.quantum_fail_threshold {
            QuantumRegimeStatus::Warn
        } else {
            QuantumRegimeStatus::Fail
        },
        margin: (assumptions.quantum_pass_threshold - alpha) / assumptions.quantum_pass_threshold,
    };

    let spread = params.relative_energy_spread;
    let spread_loose = ConstraintFlag::from_bound(spread, derived.spread_bound_loose);
    let spread_strict = ConstraintFlag::from_bound(spread, derived.spread_bound_strict);

    // With an explicit wiggler length the decoherence occupancies are
    // checked against their hard bounds; otherwise the assumed occupancies
    // stand in (at the defaults they sit exactly on the bounds).
    let (space_charge, spontaneous) = match params.interaction_length {
        Some(length) => (
            ConstraintFlag::from_bound(derived.plasma_wavenumber * length, 1.0),
            ConstraintFlag::from_bound(derived.spontaneous_rate * length, 0.5),
        ),
        None => (
            ConstraintFlag::from_bound(assumptions.k_p_length, 1.0),
            ConstraintFlag::from_bound(assumptions.r_sp_length, 0.5),
        ),
    };

    let sase_ok = sase_saturation.map(|s| s <= budget);
    let seeded_ok = seeded_saturation.map(|s| s <= budget);
    let verdict = match (sase_ok, seeded_ok) {
        (Some(true), _) => Verdict::BothFeasible,
        (_, Some(true)) => Verdict::SeededFeasible,
        (Some(false), Some(false)) => Verdict::NeitherFeasible,
        (None, Some(false)) => Verdict::NeitherFeasible,
        (Some(false), None) => Verdict::SaseInfeasible,
        (None, None) => unreachable!("saturation inputs validated above"),
    };

    Ok(FeasibilityReport {
        derived,
        assumptions: *assumptions,
        budget_length_over_gain: budget,
        sase_saturation_over_gain: sase_saturation,
        seeded_saturation_over_gain: seeded_saturation,
        quantum_regime,
        spread_loose,
        spread_strict,
        space_charge,
        spontaneous,
        verdict,
    })
}

fn asymptotic_saturation(n_electrons: u64, seed: u64, alpha: f64) -> Result<f64> {
    let config = SystemConfig::new(n_electrons, seed, 0.0, alpha)?;
    saturation_length(&config, SaturationMode::Asymptotic)
}
