//! Independent oracles for frozen expected values.
//!
//! Each oracle recomputes a quantity through a route disjoint from the
//! implementation it checks: quadrature of the defining integral for `K`,
//! dense scaling-and-squaring exponentials for small-ladder propagation,
//! and Vieta's formulas on the conserved-charge cubic for the analytic
//! roots.

use num_complex::Complex64;
use qfel_core::analytic;
use qfel_core::dynamics::{evolve, Propagator, TridiagonalHamiltonian};
use qfel_core::special::{complete_elliptic_k, jacobi_cn, EllipticModulus};
use qfel_core::SystemConfig;

/// Adaptive Simpson quadrature with interval bisection.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tolerance: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        tolerance: f64,
        depth: u32,
    ) -> f64 {
        let mid = 0.5 * (a + b);
        let left = simpson(f, a, mid);
        let right = simpson(f, mid, b);
        let refined = left + right;
        if depth == 0 || (refined - whole).abs() <= 15.0 * tolerance {
            return refined + (refined - whole) / 15.0;
        }
        recurse(f, a, mid, left, tolerance / 2.0, depth - 1)
            + recurse(f, mid, b, right, tolerance / 2.0, depth - 1)
    }
    recurse(f, a, b, simpson(f, a, b), tolerance, 48)
}

/// `K(k)` straight from the defining integral.
fn elliptic_k_by_quadrature(k: f64) -> f64 {
    let integrand = move |y: f64| 1.0 / (1.0 - (k * y.sin()).powi(2)).sqrt();
    adaptive_simpson(&integrand, 0.0, std::f64::consts::FRAC_PI_2, 1e-14)
}

#[test]
fn agm_k_matches_quadrature() {
    for k in [0.1, 0.5, 0.9, 0.99] {
        let agm = complete_elliptic_k(EllipticModulus::new(k).unwrap());
        let quadrature = elliptic_k_by_quadrature(k);
        assert!(
            (agm - quadrature).abs() < 1e-10,
            "K({k}): AGM {agm} vs quadrature {quadrature}"
        );
    }
}

#[test]
fn frozen_k_at_inverse_sqrt_two_comes_from_quadrature() {
    let quadrature = elliptic_k_by_quadrature(std::f64::consts::FRAC_1_SQRT_2);
    assert!((quadrature - 1.854074677301372).abs() < 1e-12);
}

#[test]
fn cn_vanishes_at_the_quadrature_quarter_period() {
    // The argument comes from quadrature, so this exercises cn away from
    // any AGM-internal consistency.
    let modulus = EllipticModulus::new(0.5).unwrap();
    let quarter = elliptic_k_by_quadrature(0.5);
    let cn = jacobi_cn(quarter, modulus).unwrap();
    assert!(cn.abs() < 1e-10, "cn(K, 0.5) = {cn}");
}

/// `exp(-iHτ)·e₀` by scaling-and-squaring with a Taylor kernel, dense.
fn dense_expm_seed_column(h: &TridiagonalHamiltonian, tau: f64) -> Vec<Complex64> {
    let n = h.dimension();
    let mut a = vec![vec![Complex64::ZERO; n]; n];
    for i in 0..n {
        a[i][i] = Complex64::new(0.0, -h.diagonal()[i] * tau);
        if i + 1 < n {
            a[i][i + 1] = Complex64::new(0.0, -h.off_diagonal()[i] * tau);
            a[i + 1][i] = Complex64::new(0.0, -h.off_diagonal()[i] * tau);
        }
    }
    let norm: f64 = a
        .iter()
        .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = norm.log2().ceil().max(0.0) as u32 + 1;
    let scale = 0.5_f64.powi(squarings as i32);
    for row in &mut a {
        for z in row.iter_mut() {
            *z *= scale;
        }
    }

    let matmul = |x: &[Vec<Complex64>], y: &[Vec<Complex64>]| -> Vec<Vec<Complex64>> {
        let mut out = vec![vec![Complex64::ZERO; n]; n];
        for i in 0..n {
            for k in 0..n {
                let xik = x[i][k];
                for j in 0..n {
                    out[i][j] += xik * y[k][j];
                }
            }
        }
        out
    };

    // Taylor series of exp at the scaled matrix.
    let mut exp = vec![vec![Complex64::ZERO; n]; n];
    let mut term = vec![vec![Complex64::ZERO; n]; n];
    for i in 0..n {
        exp[i][i] = Complex64::ONE;
        term[i][i] = Complex64::ONE;
    }
    for order in 1..=30 {
        term = matmul(&term, &a);
        let inv = 1.0 / order as f64;
        for row in &mut term {
            for z in row.iter_mut() {
                *z *= inv;
            }
        }
        for i in 0..n {
            for j in 0..n {
                exp[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        exp = matmul(&exp, &exp);
    }
    (0..n).map(|i| exp[i][0]).collect()
}

#[test]
fn small_ladders_match_dense_matrix_exponential() {
    let lengths: Vec<f64> = (0..=40).map(|i| i as f64 * 0.35).collect();
    for (n, n0, delta, alpha) in [
        (1u64, 0u64, 0.0, 0.1),
        (2, 0, 0.0, 0.2),
        (3, 0, 0.4, 0.15),
        (3, 5, -0.3, 0.12),
    ] {
        let config = SystemConfig::new(n, n0, delta, alpha).unwrap();
        let hamiltonian = TridiagonalHamiltonian::build(&config);
        for backend in [Propagator::Spectral, Propagator::Lanczos] {
            let states = qfel_core::dynamics::evolve_with(&config, &lengths, backend).unwrap();
            for state in &states {
                let reference = dense_expm_seed_column(&hamiltonian, state.time());
                let worst = state
                    .amplitudes()
                    .iter()
                    .zip(&reference)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                assert!(
                    worst < 1e-9,
                    "N={n} n0={n0} delta={delta} tau={}: max amplitude deviation {worst}",
                    state.time()
                );
            }
        }
    }
}

#[test]
fn two_level_rabi_oracle_on_a_fine_grid() {
    let alpha = 0.1;
    let config = SystemConfig::new(1, 0, 0.0, alpha).unwrap();
    let lengths: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.005).collect();
    let states = evolve(&config, &lengths).unwrap();
    let mut worst = 0.0_f64;
    for state in &states {
        let expected = (alpha * state.time()).sin().powi(2);
        let mean = state.photon_distribution().mean();
        worst = worst.max((mean - expected).abs());
    }
    assert!(worst < 1e-10, "max |n - sin^2| = {worst}");
}

/// Outer roots of the conserved-charge cubic via Vieta's formulas: the sum
/// and pairwise-product coefficients come from the c-number charges
/// `A = r(r+1)`, `B = n₀ + N/2`, `C = −δn₀`, the seed root is deflated
/// synthetically, and the remaining quadratic is solved with the stable
/// sign trick. No expression from the implementation is reused.
fn cubic_roots_by_charges(n: u64, n0: u64, delta: f64, alpha: f64) -> (f64, f64) {
    let n = n as f64;
    let n0 = n0 as f64;
    let epsilon_sq = alpha * alpha / n; // coupling-per-electron squared
    let r = n / 2.0;
    let charge_a = r * (r + 1.0);
    let charge_b = n0 + r;
    let charge_c = -delta * n0;

    let root_sum = 2.0 * charge_b - delta * delta / (4.0 * epsilon_sq) - 0.5;
    let pairwise =
        -(charge_a + charge_b - charge_b * charge_b - delta * charge_c / (2.0 * epsilon_sq));

    // Deflate the known root n0 from n^3 - root_sum n^2 + pairwise n - s3.
    let b = n0 - root_sum;
    let c = pairwise + n0 * b;
    let discriminant = (b * b - 4.0 * c).sqrt();
    let q = -0.5 * (b + discriminant.copysign(b));
    let (r1, r2) = (q, c / q);
    let n_plus = r1.max(r2);
    let n_minus = -r1.min(r2);
    (n_plus, n_minus)
}

#[test]
fn analytic_roots_match_the_charge_cubic() {
    let cases = [
        (10_000u64, 0u64, 0.0, 0.1),
        (1_000, 100, 0.0, 0.1),
        (1_000, 0, 0.15, 0.1),
        (500, 50, -0.08, 0.2),
        (100, 0, 0.19, 0.1),
    ];
    for (n, n0, delta, alpha) in cases {
        let config = SystemConfig::new(n, n0, delta, alpha).unwrap();
        let cubic = analytic::roots(&config);
        let (plus, minus) = cubic_roots_by_charges(n, n0, delta, alpha);
        let scale = plus.abs().max(1.0);
        assert!(
            (cubic.n_plus - plus).abs() < 1e-8 * scale,
            "N={n} n0={n0} delta={delta}: n_plus {} vs oracle {plus}",
            cubic.n_plus
        );
        assert!(
            (cubic.n_minus - minus).abs() < 1e-8 * minus.abs().max(1.0),
            "N={n} n0={n0} delta={delta}: n_minus {} vs oracle {minus}",
            cubic.n_minus
        );
    }
}

#[test]
fn frozen_vacuum_roots_come_from_the_oracle() {
    let (plus, minus) = cubic_roots_by_charges(10_000, 0, 0.0, 0.1);
    assert!((plus - 10000.4999).abs() < 1e-4);
    assert!((minus - 0.99995).abs() < 1e-4);
}

#[test]
fn root_residuals_on_the_cubic() {
    // Substituting the computed roots back into the monic cubic built from
    // the charges leaves residuals at rounding level relative to the
    // leading scale.
    for (n, n0, delta, alpha) in [
        (10_000u64, 0u64, 0.0, 0.1),
        (1_000, 100, 0.1, 0.1),
        (1_000_000, 0, 0.05, 0.05),
    ] {
        let config = SystemConfig::new(n, n0, delta, alpha).unwrap();
        let cubic = analytic::roots(&config);

        let nf = n as f64;
        let n0f = n0 as f64;
        let epsilon_sq = alpha * alpha / nf;
        let r = nf / 2.0;
        let root_sum = 2.0 * (n0f + r) - delta * delta / (4.0 * epsilon_sq) - 0.5;
        let pairwise = -(r * (r + 1.0) + (n0f + r) - (n0f + r) * (n0f + r)
            + delta * delta * n0f / (2.0 * epsilon_sq));
        let s3 = n0f * n0f * n0f - root_sum * n0f * n0f + pairwise * n0f;
        let poly = |x: f64| ((x - root_sum) * x + pairwise) * x - s3;

        let scale = cubic.n_plus.abs().max(cubic.n_minus.abs()).max(1.0).powi(3);
        for root in [cubic.n_plus, cubic.n_zero, -cubic.n_minus] {
            let residual = poly(root).abs() / scale;
            assert!(
                residual < 1e-8,
                "residual {residual} at root {root} for N={n} n0={n0}"
            );
        }
    }
}
