//! Closed-form approximation for the mean photon number.
//!
//! Treating the conserved charges as c-numbers decouples the photon-number
//! equation of motion into `(dn/dτ)² = 4ε²(n₊ − n)(n − n₀)(n + n₋)` whose
//! inversion is a squared Jacobi `cn`. This module computes the cubic
//! roots, the elliptic modulus and quarter period, the resulting mean
//! photon curve `n(L)`, and the saturation intensity and length on and off
//! resonance.

use crate::config::SystemConfig;
use crate::error::Error;
use crate::special::{complete_elliptic_k, jacobi_cn, EllipticModulus};
use crate::Result;

/// Roots of the cubic on the right-hand side of the decoupled equation of
/// motion: photon number oscillates between `n_zero` (the seed) and
/// `n_plus`; `-n_minus` is the unphysical negative root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicRoots {
    /// Maximum photon number.
    pub n_plus: f64,
    /// Magnitude of the negative root.
    pub n_minus: f64,
    /// Initial photon number `n₀`.
    pub n_zero: f64,
    n_electrons: f64,
}

impl CubicRoots {
    /// Whether the curve has any amplitude, i.e. `n₊ > n₀`.
    pub fn has_gain(&self) -> bool {
        self.n_plus > self.n_zero
    }
}

/// Parameters of the elliptic mean-photon curve.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticCurveParams {
    /// Modulus of the `cn` function.
    pub modulus: EllipticModulus,
    /// `K(modulus)`, a quarter of the `cn` period.
    pub quarter_period: f64,
    /// `√((n₊ + n₋)/N)`, multiplying `L/(2L_g)` in the `cn` argument.
    pub length_scale: f64,
}

/// Selects between the exact elliptic saturation length and the large-`N`
/// logarithmic forms quoted in feasibility estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaturationMode {
    Exact,
    Asymptotic,
}

/// Evaluates the cubic roots for a configuration.
///
/// The formulation computes the square-root bracket once and derives the
/// cancelling root from the product `n₊·n₋ = N + n₀/2 + N·n₀·δ²/(4α_N²)`
/// instead of subtracting nearly equal quantities; it stays accurate for
/// `N` up to 10¹² (checked against a compensated evaluation).
pub fn roots(config: &SystemConfig) -> CubicRoots {
    let n = config.n_electrons as f64;
    let n0 = config.initial_photons as f64;
    // delta enters only through this square, so all outputs are even in it.
    let x = (config.detuning / (2.0 * config.quantum_parameter)).powi(2);
    let gain_factor = 1.0 - x;

    let half_difference = 0.5 * (n * gain_factor + (n0 - 0.5));
    let bracket = (n * gain_factor).powi(2)
        + (n0 + 0.5).powi(2)
        + 2.0 * n * n0 * (1.0 + x)
        + 3.0 * n * (1.0 + x / 3.0);
    let half_root = 0.5 * bracket.sqrt();
    // Product of the outer roots, from expanding bracket/4 - half_difference².
    let product = n + 0.5 * n0 + n * n0 * x;

    let (n_plus, n_minus) = if half_difference >= 0.0 {
        let n_plus = half_root + half_difference;
        (n_plus, product / n_plus)
    } else {
        let n_minus = half_root - half_difference;
        (product / n_minus, n_minus)
    };

    CubicRoots {
        n_plus,
        n_minus,
        n_zero: n0,
        n_electrons: n,
    }
}

/// Elliptic modulus, quarter period, and length scale from the roots.
///
/// The complementary parameter `1 − 𝔎² = (n₀ + n₋)/(n₊ + n₋)` is formed
/// directly; for vacuum start-up it is `O(1/N)` and would be lost to
/// cancellation if recovered from `𝔎`.
pub fn modulus(cubic: &CubicRoots) -> Result<AnalyticCurveParams> {
    if !cubic.has_gain() {
        return Err(Error::no_gain(format!(
            "n_plus = {} does not exceed the seed n0 = {}",
            cubic.n_plus, cubic.n_zero
        )));
    }
    let sum = cubic.n_plus + cubic.n_minus;
    let complementary = (cubic.n_zero + cubic.n_minus) / sum;
    let modulus = EllipticModulus::from_complementary(complementary)?;
    Ok(AnalyticCurveParams {
        modulus,
        quarter_period: complete_elliptic_k(modulus),
        length_scale: (sum / cubic.n_electrons).sqrt(),
    })
}

/// Mean photon number `n(L) = n₀ + (n₊ − n₀)·cn²(L/(2L_g)·√((n₊+n₋)/N) − K, 𝔎)`
/// with `L` in gain-length units.
///
/// No-gain configurations return the constant seed value.
pub fn mean_photon_analytic(length_over_gain: f64, config: &SystemConfig) -> Result<f64> {
    if !length_over_gain.is_finite() || length_over_gain < 0.0 {
        return Err(Error::domain(format!(
            "length must be finite and non-negative, got {length_over_gain}"
        )));
    }
    let cubic = roots(config);
    if !cubic.has_gain() {
        return Ok(cubic.n_zero);
    }
    // cn(-K) = 0, so the curve starts at the seed exactly.
    if length_over_gain == 0.0 {
        return Ok(cubic.n_zero);
    }
    let params = modulus(&cubic)?;
    let argument = 0.5 * length_over_gain * params.length_scale - params.quarter_period;
    let cn = jacobi_cn(argument, params.modulus)?;
    Ok(cubic.n_zero + (cubic.n_plus - cubic.n_zero) * cn * cn)
}

/// Oscillation period of `n(L)` in gain-length units.
pub fn curve_period(config: &SystemConfig) -> Result<f64> {
    let params = modulus(&roots(config))?;
    Ok(4.0 * params.quarter_period / params.length_scale)
}

/// Saturation length `L_max/L_g`, the position of the first maximum of
/// `n(L)`.
///
/// `Exact` inverts the elliptic argument: `L_max = 2·K(𝔎)/length_scale`.
/// `Asymptotic` uses the large-`N` logarithms: `2·ln(4√(N/(n₀+1)))` at
/// resonance, and the detuned vacuum form
/// `[ln N + 4 ln 2 + 2 ln(1 − δ²/4α²)]/√(1 − δ²/4α²)` otherwise.
/// Validity degrades below `N ≈ 100`; front ends warn there.
pub fn saturation_length(config: &SystemConfig, mode: SaturationMode) -> Result<f64> {
    let bandwidth = 2.0 * config.quantum_parameter;
    if config.detuning.abs() >= bandwidth {
        return Err(Error::no_gain(format!(
            "detuning {} outside the amplification bandwidth |delta| < {}",
            config.detuning, bandwidth
        )));
    }
    match mode {
        SaturationMode::Exact => {
            let params = modulus(&roots(config))?;
            Ok(2.0 * params.quarter_period / params.length_scale)
        }
        SaturationMode::Asymptotic => {
            let n = config.n_electrons as f64;
            let n0 = config.initial_photons as f64;
            if config.detuning == 0.0 {
                Ok(2.0 * (4.0 * (n / (n0 + 1.0)).sqrt()).ln())
            } else if config.initial_photons == 0 {
                let gain_factor = 1.0 - (config.detuning / bandwidth).powi(2);
                let value =
                    (n.ln() + 4.0 * 2.0_f64.ln() + 2.0 * gain_factor.ln()) / gain_factor.sqrt();
                if value <= 0.0 {
                    return Err(Error::numeric(format!(
                        "asymptotic saturation length is non-positive ({value}); \
                         N is too small for the large-N form at this detuning"
                    )));
                }
                Ok(value)
            } else {
                Err(Error::domain(
                    "the asymptotic saturation length is only available at resonance \
                     or for vacuum start-up; use SaturationMode::Exact",
                ))
            }
        }
    }
}

/// Maximum photon number off resonance, both the exact root and the
/// large-`N` form `N·(1 − δ²/4α²)` (zero outside the bandwidth).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetunedMaximum {
    pub exact: f64,
    pub large_n: f64,
}

/// `n_max = n₊` for vacuum start-up as a function of detuning.
pub fn n_max_detuned(config: &SystemConfig) -> Result<DetunedMaximum> {
    if config.initial_photons != 0 {
        return Err(Error::domain(
            "the detuned maximum is defined for vacuum start-up (n0 = 0)",
        ));
    }
    let gain_factor = 1.0 - (config.detuning / (2.0 * config.quantum_parameter)).powi(2);
    Ok(DetunedMaximum {
        exact: roots(config).n_plus,
        large_n: config.n_electrons as f64 * gain_factor.max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn config(n: u64, n0: u64, delta: f64, alpha: f64) -> SystemConfig {
        SystemConfig::new(n, n0, delta, alpha).unwrap()
    }

    #[test]
    fn vacuum_roots_at_resonance() {
        // Frozen from the independent cubic root-finder in tests/oracles.rs.
        let cubic = roots(&config(10_000, 0, 0.0, 0.1));
        assert_abs_diff_eq!(cubic.n_plus, 10000.4999, epsilon = 1e-4);
        assert_abs_diff_eq!(cubic.n_minus, 0.99995, epsilon = 1e-4);
        assert_eq!(cubic.n_zero, 0.0);
        assert!(cubic.has_gain());
    }

    #[test]
    fn large_n_maximum_follows_the_bandwidth_parabola() {
        let alpha = 0.1;
        for ratio in [0.0, 0.5, 1.0, 1.5] {
            let cfg = config(1_000_000, 0, ratio * alpha, alpha);
            let cubic = roots(&cfg);
            let expected = 1_000_000.0 * (1.0 - (ratio / 2.0_f64).powi(2));
            assert!(
                (cubic.n_plus - expected).abs() < 0.02 * 1_000_000.0,
                "n_plus {} vs large-N {}",
                cubic.n_plus,
                expected
            );
        }
    }

    #[test]
    fn bandwidth_edge_has_vanishing_relative_gain() {
        let alpha = 0.1;
        let cfg = config(1_000_000_000, 0, 2.0 * alpha - 1e-12, alpha);
        let cubic = roots(&cfg);
        // Only the O(sqrt(N)) quantum-fluctuation term survives.
        assert!(cubic.n_plus / 1e9 < 1e-4);
    }

    #[test]
    fn modulus_for_large_vacuum_ladder() {
        let cubic = roots(&config(10_000, 0, 0.0, 0.1));
        let params = modulus(&cubic).unwrap();
        assert_abs_diff_eq!(params.modulus.value(), 0.99995, epsilon = 1e-5);
        // 1 - K^2 = O(1/N).
        let complementary = params.modulus.complementary_parameter();
        assert!(complementary > 0.5e-4 && complementary < 2e-4);
    }

    #[test]
    fn no_gain_error_when_seeded_outside_bandwidth() {
        // Far off resonance with a seed, n_plus approaches n0 from below
        // machine resolution; the modulus reports no gain rather than NaN.
        let cfg = config(100, 0, 0.0, 0.1);
        let degenerate = CubicRoots {
            n_plus: 5.0,
            n_minus: 1.0,
            n_zero: 5.0,
            n_electrons: 100.0,
        };
        assert!(matches!(modulus(&degenerate), Err(Error::NoGain(_))));
        assert!(modulus(&roots(&cfg)).is_ok());
    }

    #[test]
    fn curve_starts_at_seed_and_peaks_at_n_plus() {
        let cfg = config(10_000, 1_000, 0.0, 0.1);
        let cubic = roots(&cfg);
        let at_zero = mean_photon_analytic(0.0, &cfg).unwrap();
        assert_abs_diff_eq!(at_zero, 1000.0, epsilon = 1e-6);
        let l_max = saturation_length(&cfg, SaturationMode::Exact).unwrap();
        let at_peak = mean_photon_analytic(l_max, &cfg).unwrap();
        assert_abs_diff_eq!(at_peak, cubic.n_plus, epsilon = 1e-4 * cubic.n_plus);
    }

    #[test]
    fn asymptotic_saturation_quotes() {
        // 2 ln(4 sqrt(1e9)) = 23.5 and 2 ln(4 sqrt(10)) = 5.08.
        let sase = config(1_000_000_000, 0, 0.0, 0.25);
        let value = saturation_length(&sase, SaturationMode::Asymptotic).unwrap();
        assert!((value - 23.5).abs() < 0.1);

        let seeded = config(1_000_000_000, 100_000_000, 0.0, 0.25);
        let value = saturation_length(&seeded, SaturationMode::Asymptotic).unwrap();
        assert!((value - 5.08).abs() < 0.05);
    }

    #[test]
    fn seeded_saturation_is_scale_invariant() {
        // Fixed n0/N = 0.1 gives a constant L_max of about 5 gain lengths.
        for n in [100_000u64, 10_000_000, 1_000_000_000] {
            let cfg = config(n, n / 10, 0.0, 0.25);
            let value = saturation_length(&cfg, SaturationMode::Asymptotic).unwrap();
            assert!((value - 5.08).abs() < 0.01, "N = {n}: {value}");
        }
    }

    #[test]
    fn saturation_outside_bandwidth_is_no_gain() {
        let cfg = config(1_000, 0, 0.3, 0.1);
        assert!(matches!(
            saturation_length(&cfg, SaturationMode::Exact),
            Err(Error::NoGain(_))
        ));
    }

    #[test]
    fn detuned_maximum_values() {
        let alpha = 0.1;
        let at = |ratio: f64| {
            n_max_detuned(&config(1_000, 0, ratio * alpha, alpha))
                .unwrap()
                .large_n
        };
        assert_abs_diff_eq!(at(0.0), 1000.0, epsilon = 1e-9);
        assert_abs_diff_eq!(at(1.0), 750.0, epsilon = 1e-9);
        assert_abs_diff_eq!(at(2.0 - 1e-15), 0.0, epsilon = 1e-9);
        assert!(n_max_detuned(&config(1_000, 5, 0.0, alpha)).is_err());
    }

    #[test]
    fn detuning_enters_evenly() {
        let alpha = 0.17;
        let plus = roots(&config(12_345, 17, 0.93 * alpha, alpha));
        let minus = roots(&config(12_345, 17, -0.93 * alpha, alpha));
        // Bitwise equality: delta appears only squared.
        assert_eq!(plus, minus);
    }

    #[test]
    fn stable_roots_at_extreme_electron_number() {
        // Compensated reference: n_minus = product / n_plus with n_plus
        // accurate to machine precision; the naive difference of the two
        // half-terms would lose ~12 digits here.
        let cfg = config(1_000_000_000_000, 0, 0.0, 0.1);
        let cubic = roots(&cfg);
        assert!(cubic.n_plus > 1e12 && cubic.n_plus < 1.0000001e12);
        assert_abs_diff_eq!(cubic.n_minus, 1.0, epsilon = 1e-4);
        assert_abs_diff_eq!(cubic.n_plus * cubic.n_minus, 1e12, epsilon = 1.0);
    }
}
