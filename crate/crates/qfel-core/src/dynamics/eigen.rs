//! Symmetric tridiagonal eigendecomposition by the implicit QL method with
//! Wilkinson shifts.
//!
//! This is the classic EISPACK `imtql2` scheme: per eigenvalue, implicit QL
//! sweeps with the shift taken from the trailing 2×2 block, rotations
//! accumulated into the eigenvector matrix. For the ladder Hamiltonians
//! here the matrix is already tridiagonal, so no Householder reduction is
//! needed and the full decomposition costs O(n³) only through the
//! eigenvector updates.

use ndarray::{Array2, ArrayView1};

use crate::error::Error;
use crate::Result;

/// Full eigendecomposition of a real symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as rows; row `j` pairs with
    /// `eigenvalues[j]`. Row storage keeps the QL rotations and the
    /// propagation matmuls cache-friendly.
    pub eigenvectors_t: Array2<f64>,
}

impl Spectrum {
    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvector paired with `eigenvalues[index]`.
    pub fn eigenvector(&self, index: usize) -> ArrayView1<'_, f64> {
        self.eigenvectors_t.row(index)
    }

    /// Materializes the conventional column-paired eigenvector matrix.
    pub fn eigenvector_columns(&self) -> Array2<f64> {
        self.eigenvectors_t.t().to_owned()
    }
}

const MAX_QL_ITERATIONS: usize = 50;

/// Diagonalizes the symmetric tridiagonal matrix with the given `diagonal`
/// (length `n`) and `off_diagonal` (length `n − 1`).
pub fn diagonalize_tridiagonal(diagonal: &[f64], off_diagonal: &[f64]) -> Result<Spectrum> {
    let n = diagonal.len();
    if n == 0 {
        return Err(Error::domain("cannot diagonalize an empty matrix"));
    }
    if off_diagonal.len() + 1 != n {
        return Err(Error::domain(format!(
            "off-diagonal length {} does not match dimension {}",
            off_diagonal.len(),
            n
        )));
    }

    let mut d = diagonal.to_vec();
    // e[i] couples rows i and i+1; e[n-1] is a zero sentinel.
    let mut e = vec![0.0_f64; n];
    e[..n - 1].copy_from_slice(off_diagonal);
    let mut z = Array2::<f64>::eye(n);

    for l in 0..n {
        let mut iterations = 0;
        loop {
            // Look for a negligible off-diagonal element to split the block.
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(Error::numeric(format!(
                    "eigenvalue {l} of a {n}-dimensional tridiagonal matrix did not \
                     converge within {MAX_QL_ITERATIONS} implicit QL iterations"
                )));
            }

            // Wilkinson shift from the leading 2x2 of the active block.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0_f64;
            let mut c = 1.0_f64;
            let mut p = 0.0_f64;
            let mut underflow = false;

            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = i > l;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;

                // Accumulate the rotation into eigenvector rows i and i+1.
                let (mut row_lo, mut row_hi) =
                    z.multi_slice_mut((ndarray::s![i, ..], ndarray::s![i + 1, ..]));
                let lo = row_lo.as_slice_mut().expect("row-major layout");
                let hi = row_hi.as_slice_mut().expect("row-major layout");
                for k in 0..n {
                    f = hi[k];
                    hi[k] = s * lo[k] + c * f;
                    lo[k] = c * lo[k] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    // Sort ascending, permuting eigenvector rows in place (cycle
    // following) so peak memory stays at a single dense matrix.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let data = z.as_slice_mut().expect("row-major layout");
    let mut visited = vec![false; n];
    let mut buffer = vec![0.0_f64; n];
    for start in 0..n {
        if visited[start] || order[start] == start {
            visited[start] = true;
            continue;
        }
        buffer.copy_from_slice(&data[start * n..(start + 1) * n]);
        let mut dst = start;
        loop {
            let src = order[dst];
            visited[dst] = true;
            if src == start {
                data[dst * n..(dst + 1) * n].copy_from_slice(&buffer);
                break;
            }
            data.copy_within(src * n..(src + 1) * n, dst * n);
            dst = src;
        }
    }

    Ok(Spectrum {
        eigenvalues,
        eigenvectors_t: z,
    })
}
