//! Dense linear-algebra kernels, backed by a pure-Rust implementation.
//!
//! Everything here runs in-process with no system BLAS/LAPACK: the hosts
//! this tool targets cannot be trusted to ship a correctly tuned library,
//! and a silently miscompiled `dgemm` corrupts eigenvectors while leaving
//! eigenvalues plausible. The reconstruction test below pins correctness.

use faer::linalg::solvers::{Qr, SelfAdjointEigen, Svd};
use faer::{Mat, Side};
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

fn to_faer_c(m: &Array2<C64>) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn to_faer_r(m: &Array2<f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Eigendecomposition of a complex Hermitian matrix: ascending eigenvalues,
/// eigenvectors as columns.
pub(crate) fn eigh_hermitian(m: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>), String> {
    let evd: SelfAdjointEigen<C64> = to_faer_c(m)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| format!("{e:?}"))?;
    let d = m.nrows();
    let values: Array1<f64> = evd.S().column_vector().iter().map(|x| x.re).collect();
    let vectors = Array2::from_shape_fn((d, d), |(i, j)| evd.U()[(i, j)]);
    Ok((values, vectors))
}

/// Eigendecomposition of a real symmetric matrix: ascending eigenvalues,
/// eigenvectors as columns.
pub(crate) fn eigh_real(m: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>), String> {
    let evd: SelfAdjointEigen<f64> = to_faer_r(m)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| format!("{e:?}"))?;
    let d = m.nrows();
    let values: Array1<f64> = evd.S().column_vector().iter().copied().collect();
    let vectors = Array2::from_shape_fn((d, d), |(i, j)| evd.U()[(i, j)]);
    Ok((values, vectors))
}

/// Ascending eigenvalues of a complex Hermitian matrix.
pub(crate) fn eigvalsh(m: &Array2<C64>) -> Result<Array1<f64>, String> {
    let vals = to_faer_c(m)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| format!("{e:?}"))?;
    Ok(Array1::from_vec(vals))
}

/// Singular values in nonincreasing order.
pub(crate) fn singular_values(m: &Array2<C64>) -> Result<Vec<f64>, String> {
    to_faer_c(m).singular_values().map_err(|e| format!("{e:?}"))
}

/// Thin QR of a tall matrix (`rows >= cols`): returns `(Q, R)` with `Q`
/// having orthonormal columns and `R` square upper triangular.
pub(crate) fn qr_thin(m: &Array2<C64>) -> (Array2<C64>, Array2<C64>) {
    let qr: Qr<C64> = to_faer_c(m).qr();
    let q = qr.compute_thin_Q();
    let r = qr.R();
    let k = m.ncols().min(m.nrows());
    (
        Array2::from_shape_fn((m.nrows(), k), |(i, j)| q[(i, j)]),
        Array2::from_shape_fn((k, m.ncols()), |(i, j)| r[(i, j)]),
    )
}

#[allow(dead_code)]
pub(crate) fn svd_full(m: &Array2<C64>) -> Result<(Array2<C64>, Vec<f64>, Array2<C64>), String> {
    let svd: Svd<C64> = to_faer_c(m).thin_svd().map_err(|e| format!("{e:?}"))?;
    let k = m.nrows().min(m.ncols());
    let u = Array2::from_shape_fn((m.nrows(), k), |(i, j)| svd.U()[(i, j)]);
    let s = svd.S().column_vector().iter().map(|x| x.re).collect();
    let v = Array2::from_shape_fn((m.ncols(), k), |(i, j)| svd.V()[(i, j)]);
    Ok((u, s, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvector_columns_reconstruct_the_input() {
        let c = |re, im| C64::new(re, im);
        let m = Array2::from_shape_vec(
            (3, 3),
            vec![
                c(1.0, 0.0),
                c(0.3, 0.4),
                c(-0.2, 0.1),
                c(0.3, -0.4),
                c(2.0, 0.0),
                c(0.0, -0.5),
                c(-0.2, -0.1),
                c(0.0, 0.5),
                c(0.7, 0.0),
            ],
        )
        .unwrap();
        let (w, u) = eigh_hermitian(&m).unwrap();
        assert!(w.windows(2).into_iter().all(|p| p[0] <= p[1]));
        let mut rec = Array2::<C64>::zeros((3, 3));
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    rec[(i, j)] += u[(i, k)] * w[k] * u[(j, k)].conj();
                }
            }
        }
        let worst = rec
            .iter()
            .zip(m.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-12, "reconstruction defect {worst:.3e}");
    }

    #[test]
    fn large_real_eigenvectors_have_small_residuals() {
        // Regression guard for the class of backend bug where eigenvalues
        // come out right but eigenvectors are garbage.
        let d = 512usize;
        let mut s = 1234567u64;
        let mut rng = move || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut m = Array2::<f64>::zeros((d, d));
        for i in 0..d {
            for j in i..d {
                let x = rng();
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
        let (w, v) = eigh_real(&m).unwrap();
        let v0 = v.column(0).to_owned();
        let hv = m.dot(&v0);
        let resid: f64 = hv
            .iter()
            .zip(v0.iter())
            .map(|(a, b)| (a - w[0] * b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(resid < 1e-11, "eigenvector residual {resid:.3e}");
    }

    #[test]
    fn qr_factors_multiply_back() {
        let c = |re, im| C64::new(re, im);
        let m = Array2::from_shape_fn((8, 3), |(i, j)| {
            c(
                ((i * 7 + j * 3) % 11) as f64 / 11.0,
                ((i * 5 + j * 2) % 13) as f64 / 13.0 - 0.4,
            )
        });
        let (q, r) = qr_thin(&m);
        // Q has orthonormal columns.
        for a in 0..3 {
            for b in 0..3 {
                let dot: C64 = (0..8).map(|i| q[(i, a)].conj() * q[(i, b)]).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((dot - C64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
        let rec = q.dot(&r);
        let worst = rec
            .iter()
            .zip(m.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-12, "QR reconstruction defect {worst:.3e}");
    }
}
