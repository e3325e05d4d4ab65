//! Jacobi elliptic functions and the complete elliptic integral of the
//! first kind.
//!
//! Everything is built on the arithmetic–geometric mean (AGM), which
//! converges quadratically and needs no tables: `K` comes from the AGM
//! scale directly, `sn`/`cn` from the descending-Landen amplitude
//! recursion, and `dn` from the complementary parameter so that
//! `dn² + k²·sn² = 1` holds without cancellation.
//!
//! The saturation theory drives the modulus to `1 − O(1/N)`, so the type
//! keeps the complementary parameter `1 − k²` exactly as supplied instead
//! of reconstructing it from `k`.

use crate::error::Error;
use crate::Result;

/// Modulus `k` of an elliptic integral or Jacobi function, `0 ≤ k < 1`.
///
/// The unit-modulus limit is deliberately excluded; use the explicit
/// hyperbolic limits [`cn_unit_modulus`], [`sn_unit_modulus`], and
/// [`dn_unit_modulus`] instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticModulus {
    k: f64,
    /// Complementary parameter `1 − k²`, kept explicitly for accuracy
    /// near `k = 1`.
    complementary: f64,
}

impl EllipticModulus {
    /// Builds a modulus from `k` itself.
    pub fn new(k: f64) -> Result<Self> {
        if !k.is_finite() || !(0.0..1.0).contains(&k) {
            return Err(Error::domain(format!(
                "elliptic modulus must satisfy 0 <= k < 1, got {k}"
            )));
        }
        Ok(Self {
            k,
            complementary: (1.0 - k) * (1.0 + k),
        })
    }

    /// Builds a modulus from the complementary parameter `1 − k²`.
    ///
    /// This is the accurate entry point when the modulus is known to be
    /// close to one, e.g. `1 − k² = O(1/N)`.
    pub fn from_complementary(complementary: f64) -> Result<Self> {
        if !complementary.is_finite() || complementary <= 0.0 || complementary > 1.0 {
            return Err(Error::domain(format!(
                "complementary parameter must satisfy 0 < 1 - k^2 <= 1, got {complementary}"
            )));
        }
        Ok(Self {
            k: (1.0 - complementary).max(0.0).sqrt(),
            complementary,
        })
    }

    /// The modulus `k`.
    pub fn value(&self) -> f64 {
        self.k
    }

    /// The complementary parameter `1 − k²`.
    pub fn complementary_parameter(&self) -> f64 {
        self.complementary
    }
}

/// Complete elliptic integral of the first kind,
/// `K(k) = ∫₀^{π/2} dy / √(1 − k² sin² y)`.
///
/// Computed as `π / (2·agm(1, k'))` with `k' = √(1 − k²)`; the AGM
/// converges quadratically, so relative accuracy is at machine level for
/// all admissible moduli.
pub fn complete_elliptic_k(modulus: EllipticModulus) -> f64 {
    let mut a = 1.0_f64;
    let mut b = modulus.complementary.sqrt();
    for _ in 0..64 {
        if (a - b).abs() <= f64::EPSILON * a {
            break;
        }
        let next_a = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next_a;
    }
    std::f64::consts::FRAC_PI_2 / a
}

/// Jacobi elliptic `sn`, `cn`, and `dn` at argument `u`, evaluated together.
///
/// Uses the AGM amplitude recursion: the scale `aₙ, bₙ, cₙ` descends until
/// `cₙ` vanishes, the amplitude `φ_N = 2^N a_N u` is folded back down via
/// `φ_{n−1} = (φₙ + asin((cₙ/aₙ) sin φₙ))/2`, and then `sn = sin φ₀`,
/// `cn = cos φ₀`. `dn` is assembled as `√(k'² + k² cn²)`, which is free of
/// cancellation over the whole range.
pub fn jacobi_sn_cn_dn(u: f64, modulus: EllipticModulus) -> Result<(f64, f64, f64)> {
    if !u.is_finite() {
        return Err(Error::domain(format!(
            "jacobi function argument must be finite, got {u}"
        )));
    }
    let m1 = modulus.complementary;
    let k_sq = 1.0 - m1;

    // Modulus small enough that the AGM terminates immediately: circular limit.
    if modulus.k <= f64::EPSILON {
        return Ok((u.sin(), u.cos(), 1.0));
    }

    let mut scale_a = [0.0_f64; 64];
    let mut scale_c = [0.0_f64; 64];
    let mut a = 1.0_f64;
    let mut b = m1.sqrt();
    let mut levels = 0;
    for n in 0..64 {
        let c = 0.5 * (a - b);
        scale_a[n] = a;
        scale_c[n] = c;
        levels = n;
        if c.abs() <= f64::EPSILON * a {
            break;
        }
        let next_a = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next_a;
    }

    // Fold the amplitude back down from the deepest level.
    let mut phi = (1u64 << levels) as f64 * scale_a[levels] * u;
    for n in (1..=levels).rev() {
        let ratio = (scale_c[n] / scale_a[n] * phi.sin()).clamp(-1.0, 1.0);
        phi = 0.5 * (phi + ratio.asin());
    }

    let sn = phi.sin();
    let cn = phi.cos();
    let dn = (m1 + k_sq * cn * cn).sqrt();
    Ok((sn, cn, dn))
}

/// Jacobi sine amplitude `sn(u, k)`.
pub fn jacobi_sn(u: f64, modulus: EllipticModulus) -> Result<f64> {
    jacobi_sn_cn_dn(u, modulus).map(|(sn, _, _)| sn)
}

/// Jacobi cosine amplitude `cn(u, k)`.
pub fn jacobi_cn(u: f64, modulus: EllipticModulus) -> Result<f64> {
    jacobi_sn_cn_dn(u, modulus).map(|(_, cn, _)| cn)
}

/// Jacobi delta amplitude `dn(u, k)`.
pub fn jacobi_dn(u: f64, modulus: EllipticModulus) -> Result<f64> {
    jacobi_sn_cn_dn(u, modulus).map(|(_, _, dn)| dn)
}

/// `cn` in the unit-modulus limit: `cn(u, 1) = sech u`.
pub fn cn_unit_modulus(u: f64) -> f64 {
    1.0 / u.cosh()
}

/// `sn` in the unit-modulus limit: `sn(u, 1) = tanh u`.
pub fn sn_unit_modulus(u: f64) -> f64 {
    u.tanh()
}

/// `dn` in the unit-modulus limit: `dn(u, 1) = sech u`.
pub fn dn_unit_modulus(u: f64) -> f64 {
    1.0 / u.cosh()
}
