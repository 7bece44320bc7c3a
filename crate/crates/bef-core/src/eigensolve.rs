//! Sparse iterative ground-state computation with spectral gap, plus a dense
//! brute-force oracle for small systems.
//!
//! The Lanczos solver keeps the full Krylov basis and reorthogonalizes every
//! new vector against it, which avoids ghost copies of converged eigenvalues
//! that would corrupt gap detection. The spectral gap is computed from a
//! second run deflated against the ground vector, so an exactly two-fold
//! degenerate ground state is still detected. All reductions run over fixed
//! chunk boundaries with ordered combination, so a fixed seed reproduces the
//! Ritz sequence bitwise regardless of thread count.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{gather_bits, scatter_bits, HamiltonianOperator};

const CHUNK: usize = 1 << 13;

#[derive(Debug, Error)]
pub enum EigError {
    #[error("state vector has dimension {got}, operator expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("Lanczos did not converge within {max_iter} iterations")]
    NoConvergence { max_iter: usize },
    #[error("ground state is degenerate (gap {gap:.3e})")]
    DegenerateGround { gap: f64 },
    #[error("system of {n} sites exceeds the configured limit {max}")]
    TooLarge { n: usize, max: usize },
    #[error("dense eigensolver failed: {0}")]
    Backend(String),
}

/// Solver knobs. `degeneracy_tol` is relative to `max(1, |E0|)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LanczosOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub degeneracy_tol: f64,
    pub max_n: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 500,
            seed: 7,
            degeneracy_tol: 1e-8,
            max_n: 20,
        }
    }
}

/// Converged ground-state data.
#[derive(Clone, Debug)]
pub struct GroundSolution {
    /// Ground energy `E0`.
    pub energy: f64,
    /// Spectral gap `E1 - E0` from the deflated pass.
    pub gap: f64,
    /// `E2 - E0`, for callers that need the gap above a quasi-degenerate
    /// doublet.
    pub gap_second: f64,
    /// Unit-norm ground vector.
    pub state: Array1<C64>,
    /// Explicit `||H x - E0 x||` of the returned vector.
    pub residual: f64,
    /// Set when `gap < degeneracy_tol * max(1, |E0|)`.
    pub degenerate: bool,
    /// Total Lanczos iterations over both passes.
    pub iterations: usize,
    /// Lowest Ritz value after each iteration of the first pass.
    pub ritz_history: Vec<f64>,
}

// ---------------------------------------------------------------------------
// deterministic chunked vector kernels

pub(crate) fn cdot(a: &[C64], b: &[C64]) -> C64 {
    let partials: Vec<C64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(xa, xb)| {
            xa.iter()
                .zip(xb.iter())
                .map(|(x, y)| x.conj() * y)
                .fold(C64::new(0.0, 0.0), |s, z| s + z)
        })
        .collect();
    partials.into_iter().fold(C64::new(0.0, 0.0), |s, z| s + z)
}

pub(crate) fn norm2(a: &[C64]) -> f64 {
    let partials: Vec<f64> = a
        .par_chunks(CHUNK)
        .map(|xa| xa.iter().map(|x| x.norm_sqr()).sum::<f64>())
        .collect();
    partials.into_iter().sum::<f64>().sqrt()
}

fn axpy(y: &mut [C64], alpha: C64, x: &[C64]) {
    y.par_chunks_mut(CHUNK)
        .zip(x.par_chunks(CHUNK))
        .for_each(|(ya, xa)| {
            for (yi, xi) in ya.iter_mut().zip(xa.iter()) {
                *yi += alpha * xi;
            }
        });
}

fn scale(y: &mut [C64], c: f64) {
    y.par_chunks_mut(CHUNK).for_each(|ya| {
        for yi in ya.iter_mut() {
            *yi *= c;
        }
    });
}

// ---------------------------------------------------------------------------
// matrix-free application

struct AppliedTerm {
    mask: usize,
    bits: Vec<usize>,
    /// Per-row nonzero entries: `(value, scattered column bits)`.
    rows: Vec<Vec<(C64, usize)>>,
}

/// Precomputed bit tables for applying a Hamiltonian term-by-term.
pub(crate) struct SparseApplier {
    dim: usize,
    terms: Vec<AppliedTerm>,
}

impl SparseApplier {
    pub(crate) fn new(h: &HamiltonianOperator) -> Self {
        let terms = h
            .terms()
            .iter()
            .map(|t| {
                let bits: Vec<usize> = t.support().iter().map(|s| s - 1).collect();
                let mask: usize = bits.iter().map(|&b| 1usize << b).sum();
                let sdim = 1usize << bits.len();
                let rows = (0..sdim)
                    .map(|ap| {
                        (0..sdim)
                            .filter_map(|a| {
                                let v = t.block()[(ap, a)];
                                (v != C64::new(0.0, 0.0)).then_some((v, scatter_bits(a, &bits)))
                            })
                            .collect()
                    })
                    .collect();
                AppliedTerm { mask, bits, rows }
            })
            .collect();
        Self { dim: h.dim(), terms }
    }

    pub(crate) fn dim(&self) -> usize {
        self.dim
    }

    /// `out = H v`, accumulated output-centric so parallel chunks never
    /// overlap.
    pub(crate) fn apply_into(&self, v: &[C64], out: &mut [C64]) {
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, chunk)| {
            let base = ci * CHUNK;
            for (off, slot) in chunk.iter_mut().enumerate() {
                let b = base + off;
                let mut acc = C64::new(0.0, 0.0);
                for t in &self.terms {
                    let ap = gather_bits(b, &t.bits);
                    let rest = b & !t.mask;
                    for &(m, col_bits) in &t.rows[ap] {
                        acc += m * v[rest | col_bits];
                    }
                }
                *slot = acc;
            }
        });
    }
}

/// Apply `H` to a state vector without materializing a dense matrix.
pub fn apply_hamiltonian(
    h: &HamiltonianOperator,
    v: &Array1<C64>,
) -> Result<Array1<C64>, EigError> {
    if v.len() != h.dim() {
        return Err(EigError::DimensionMismatch {
            expected: h.dim(),
            got: v.len(),
        });
    }
    let applier = SparseApplier::new(h);
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    applier.apply_into(v.as_slice().expect("contiguous state"), &mut out);
    Ok(Array1::from_vec(out))
}

// ---------------------------------------------------------------------------
// Lanczos

struct LanczosRun {
    value: f64,
    second: f64,
    vector: Vec<C64>,
    iterations: usize,
    ritz_history: Vec<f64>,
}

fn tridiag_eigs(alphas: &[f64], betas: &[f64]) -> Result<(Array1<f64>, Array2<f64>), EigError> {
    let k = alphas.len();
    let mut t = Array2::<f64>::zeros((k, k));
    for (i, &a) in alphas.iter().enumerate() {
        t[(i, i)] = a;
    }
    for (i, &b) in betas.iter().enumerate() {
        t[(i, i + 1)] = b;
        t[(i + 1, i)] = b;
    }
    crate::linalg::eigh_real(&t).map_err(EigError::Backend)
}

fn random_unit_vector(rng: &mut ChaCha8Rng, dim: usize, against: &[&[C64]]) -> Vec<C64> {
    loop {
        let mut v: Vec<C64> = (0..dim)
            .map(|_| {
                C64::new(
                    rng.random::<f64>() * 2.0 - 1.0,
                    rng.random::<f64>() * 2.0 - 1.0,
                )
            })
            .collect();
        for d in against {
            let c = cdot(d, &v);
            axpy(&mut v, -c, d);
        }
        let n = norm2(&v);
        if n > 1e-8 {
            scale(&mut v, 1.0 / n);
            return v;
        }
    }
}

/// One Lanczos pass converging the two lowest Ritz values in the orthogonal
/// complement of `deflate`.
fn lanczos_lowest(
    applier: &SparseApplier,
    opts: &LanczosOptions,
    seed: u64,
    deflate: &[&[C64]],
) -> Result<LanczosRun, EigError> {
    let dim = applier.dim();
    let effective_dim = dim - deflate.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut basis: Vec<Vec<C64>> = vec![random_unit_vector(&mut rng, dim, deflate)];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut ritz_history: Vec<f64> = Vec::new();
    let mut w = vec![C64::new(0.0, 0.0); dim];

    for iter in 0..opts.max_iter {
        let v_k = basis.last().expect("nonempty basis");
        applier.apply_into(v_k, &mut w);
        let alpha = cdot(v_k, &w).re;
        alphas.push(alpha);
        // One full Gram-Schmidt pass against deflation vectors and the whole
        // basis, repeated once if the vector shrank enough to matter.
        for _pass in 0..2 {
            let before = norm2(&w);
            for d in deflate {
                let c = cdot(d, &w);
                axpy(&mut w, -c, d);
            }
            for v in &basis {
                let c = cdot(v, &w);
                axpy(&mut w, -c, v);
            }
            if norm2(&w) > 0.5 * before {
                break;
            }
        }
        let beta = norm2(&w);

        let (vals, vecs) = tridiag_eigs(&alphas, &betas)?;
        let k = alphas.len();
        ritz_history.push(vals[0]);
        let tscale = alphas
            .iter()
            .chain(betas.iter())
            .fold(1.0f64, |m, &x| m.max(x.abs()));
        let threshold = opts.tol * vals[0].abs().max(1.0);
        let resid = |i: usize| beta * vecs[(k - 1, i)].abs();
        let want = 2.min(effective_dim);
        let converged = k >= want && (0..want).all(|i| resid(i) <= threshold);
        let exhausted = basis.len() >= effective_dim;

        if converged || exhausted || iter + 1 == opts.max_iter {
            if !(converged || exhausted) {
                return Err(EigError::NoConvergence {
                    max_iter: opts.max_iter,
                });
            }
            let mut x = vec![C64::new(0.0, 0.0); dim];
            for (j, v) in basis.iter().enumerate() {
                axpy(&mut x, C64::new(vecs[(j, 0)], 0.0), v);
            }
            let n = norm2(&x);
            scale(&mut x, 1.0 / n);
            let second = if k >= 2 { vals[1] } else { vals[0] };
            return Ok(LanczosRun {
                value: vals[0],
                second,
                vector: x,
                iterations: k,
                ritz_history,
            });
        }

        if beta <= 1e-13 * tscale {
            // Invariant subspace hit before convergence: restart with a fresh
            // seeded direction orthogonal to everything seen so far.
            let refs: Vec<&[C64]> = deflate
                .iter()
                .copied()
                .chain(basis.iter().map(|v| v.as_slice()))
                .collect();
            basis.push(random_unit_vector(&mut rng, dim, &refs));
            betas.push(0.0);
        } else {
            scale(&mut w, 1.0 / beta);
            basis.push(w.clone());
            betas.push(beta);
        }
    }
    Err(EigError::NoConvergence {
        max_iter: opts.max_iter,
    })
}

/// Ground state, spectral gap, and diagnostics of `h`.
///
/// The gap comes from a second Lanczos pass deflated against the ground
/// vector; the solution is flagged degenerate when the gap falls below
/// `degeneracy_tol * max(1, |E0|)`. Callers that require a unique ground
/// state must treat the flag as fatal.
pub fn ground_lanczos(
    h: &HamiltonianOperator,
    opts: &LanczosOptions,
) -> Result<GroundSolution, EigError> {
    let n = h.n_sites();
    if n > opts.max_n {
        return Err(EigError::TooLarge { n, max: opts.max_n });
    }
    let applier = SparseApplier::new(h);
    let run0 = lanczos_lowest(&applier, opts, opts.seed, &[])?;
    let (e1, e2, extra_iters) = if applier.dim() >= 2 {
        let run1 = lanczos_lowest(
            &applier,
            opts,
            opts.seed ^ 0x9e37_79b9_7f4a_7c15,
            &[&run0.vector],
        )?;
        (run1.value, run1.second, run1.iterations)
    } else {
        (run0.value, run0.value, 0)
    };
    let energy = run0.value;
    let mut hx = vec![C64::new(0.0, 0.0); applier.dim()];
    applier.apply_into(&run0.vector, &mut hx);
    axpy(&mut hx, C64::new(-energy, 0.0), &run0.vector);
    let residual = norm2(&hx);
    let gap = (e1 - energy).max(0.0);
    let gap_second = (e2 - energy).max(0.0);
    let degenerate = gap < opts.degeneracy_tol * energy.abs().max(1.0);
    Ok(GroundSolution {
        energy,
        gap,
        gap_second,
        state: Array1::from_vec(run0.vector),
        residual,
        degenerate,
        iterations: run0.iterations + extra_iters,
        ritz_history: run0.ritz_history,
    })
}

/// The `k` lowest eigenvalues by repeated deflation, counting multiplicity.
pub fn lowest_k_deflated(
    h: &HamiltonianOperator,
    k: usize,
    opts: &LanczosOptions,
) -> Result<Vec<f64>, EigError> {
    let n = h.n_sites();
    if n > opts.max_n {
        return Err(EigError::TooLarge { n, max: opts.max_n });
    }
    let applier = SparseApplier::new(h);
    let mut vectors: Vec<Vec<C64>> = Vec::new();
    let mut values = Vec::new();
    for j in 0..k.min(h.dim()) {
        let refs: Vec<&[C64]> = vectors.iter().map(|v| v.as_slice()).collect();
        let run = lanczos_lowest(&applier, opts, opts.seed.wrapping_add(j as u64), &refs)?;
        values.push(run.value);
        vectors.push(run.vector);
    }
    Ok(values)
}

/// Dense spectrum oracle: the `k` lowest eigenpairs, ascending. Capped at 12
/// sites; uses the real symmetric path whenever every term block is real.
pub fn spectrum_dense(
    h: &HamiltonianOperator,
    k: usize,
) -> Result<Vec<(f64, Array1<C64>)>, EigError> {
    const MAX_DENSE_N: usize = 12;
    let n = h.n_sites();
    if n > MAX_DENSE_N {
        return Err(EigError::TooLarge {
            n,
            max: MAX_DENSE_N,
        });
    }
    let k = k.min(h.dim());
    if h.is_real() {
        let dense = h
            .dense_real()
            .expect("real blocks imply a real dense matrix");
        let (w, v) = crate::linalg::eigh_real(&dense).map_err(EigError::Backend)?;
        Ok((0..k)
            .map(|i| {
                let col = v.column(i).mapv(|x| C64::new(x, 0.0));
                (w[i], col)
            })
            .collect())
    } else {
        let dense = h.dense();
        let (w, v) = crate::linalg::eigh_hermitian(&dense).map_err(EigError::Backend)?;
        Ok((0..k).map(|i| (w[i], v.column(i).to_owned())).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_hamiltonian, cluster_chain_spec, ModelSpec, SiteOrdering};

    fn plus_state(n: usize) -> Array1<C64> {
        let dim = 1usize << n;
        let amp = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Array1::from_elem(dim, amp)
    }

    fn random_state(n: usize, seed: u64) -> Array1<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Array1<C64> = (0..1usize << n)
            .map(|_| {
                C64::new(
                    rng.random::<f64>() * 2.0 - 1.0,
                    rng.random::<f64>() * 2.0 - 1.0,
                )
            })
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.mapv(|z| z / norm)
    }

    #[test]
    fn field_only_plus_state_is_an_eigenvector() {
        let n = 6;
        let g = 1.7;
        let h = build_hamiltonian(&ModelSpec::tfim(0.0, g), n, SiteOrdering::Append).unwrap();
        let v = plus_state(n);
        let hv = apply_hamiltonian(&h, &v).unwrap();
        for (a, b) in hv.iter().zip(v.iter()) {
            assert!((a - b * (-g * n as f64)).norm() < 1e-12);
        }
    }

    #[test]
    fn sparse_apply_matches_dense_multiply() {
        for spec in [ModelSpec::tfim(0.9, 1.4), ModelSpec::xxz(1.2, 0.3), cluster_chain_spec()] {
            let h = build_hamiltonian(&spec, 8, SiteOrdering::Append).unwrap();
            let v = random_state(8, 3);
            let sparse = apply_hamiltonian(&h, &v).unwrap();
            let dense = h.dense().dot(&v);
            let worst = sparse
                .iter()
                .zip(dense.iter())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0f64, f64::max);
            assert!(worst < 1e-12, "{}: worst {worst:.3e}", spec.display_id());
        }
    }

    #[test]
    fn apply_is_linear_at_zero() {
        let h = build_hamiltonian(&ModelSpec::tfim(1.0, 1.0), 5, SiteOrdering::Append).unwrap();
        let zero = Array1::from_elem(1 << 5, C64::new(0.0, 0.0));
        let hv = apply_hamiltonian(&h, &zero).unwrap();
        assert!(hv.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn apply_rejects_wrong_dimension() {
        let h = build_hamiltonian(&ModelSpec::tfim(1.0, 1.0), 5, SiteOrdering::Append).unwrap();
        let bad = Array1::from_elem(7, C64::new(0.0, 0.0));
        assert!(matches!(
            apply_hamiltonian(&h, &bad),
            Err(EigError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn lanczos_matches_dense_oracle_on_gapped_tfim() {
        let h = build_hamiltonian(&ModelSpec::tfim(1.0, 2.0), 8, SiteOrdering::Append).unwrap();
        let opts = LanczosOptions::default();
        let sol = ground_lanczos(&h, &opts).unwrap();
        let dense = spectrum_dense(&h, 2).unwrap();
        assert!((sol.energy - dense[0].0).abs() < 1e-10);
        assert!((sol.gap - (dense[1].0 - dense[0].0)).abs() < 1e-8);
        let overlap: C64 = sol
            .state
            .iter()
            .zip(dense[0].1.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        assert!(overlap.norm() > 1.0 - 1e-9);
        assert!(!sol.degenerate);
        assert!(sol.residual < 1e-9);
    }

    #[test]
    fn decoupled_field_model_has_gap_two_g() {
        let g = 1.3;
        let h = build_hamiltonian(&ModelSpec::tfim(0.0, g), 7, SiteOrdering::Append).unwrap();
        let sol = ground_lanczos(&h, &LanczosOptions::default()).unwrap();
        assert!((sol.energy + g * 7.0).abs() < 1e-10);
        assert!((sol.gap - 2.0 * g).abs() < 1e-8);
    }

    #[test]
    fn dense_spectrum_of_a_single_spin() {
        let g = 0.8;
        let h = build_hamiltonian(&ModelSpec::tfim(1.0, g), 1, SiteOrdering::Append).unwrap();
        let pairs = spectrum_dense(&h, 2).unwrap();
        assert!((pairs[0].0 + g).abs() < 1e-12);
        assert!((pairs[1].0 - g).abs() < 1e-12);
    }

    #[test]
    fn classical_ising_doublet_is_flagged_degenerate() {
        let h = build_hamiltonian(&ModelSpec::tfim(1.0, 0.0), 2, SiteOrdering::Append).unwrap();
        let sol = ground_lanczos(&h, &LanczosOptions::default()).unwrap();
        assert!(sol.degenerate, "gap {} should flag degeneracy", sol.gap);
        assert!(sol.gap < 1e-10);
        let dense = spectrum_dense(&h, 2).unwrap();
        assert!((dense[1].0 - dense[0].0).abs() < 1e-12);
    }

    #[test]
    fn deflated_levels_match_dense_spectrum() {
        // Fixed arbitrary couplings standing in for a random draw.
        let spec = ModelSpec::xxz(0.7321, 0.1618);
        let h = build_hamiltonian(&spec, 10, SiteOrdering::Append).unwrap();
        let lanczos = lowest_k_deflated(&h, 4, &LanczosOptions::default()).unwrap();
        let dense = spectrum_dense(&h, 4).unwrap();
        for (i, (lv, dv)) in lanczos.iter().zip(dense.iter()).enumerate() {
            assert!(
                (lv - dv.0).abs() < 1e-9,
                "level {i}: lanczos {lv} vs dense {}",
                dv.0
            );
        }
    }

    #[test]
    fn lanczos_energy_is_variational() {
        for (j, g, n) in [(1.0, 2.0, 8), (1.0, 1.0, 9), (1.0, 0.5, 8)] {
            let h = build_hamiltonian(&ModelSpec::tfim(j, g), n, SiteOrdering::Append).unwrap();
            let sol = ground_lanczos(&h, &LanczosOptions::default()).unwrap();
            if n <= 12 {
                let dense = spectrum_dense(&h, 1).unwrap();
                assert!(sol.energy >= dense[0].0 - 1e-10);
            }
        }
    }

    #[test]
    fn fixed_seed_reproduces_the_ritz_sequence_bitwise() {
        let h = build_hamiltonian(&ModelSpec::tfim(1.0, 1.3), 9, SiteOrdering::Append).unwrap();
        let opts = LanczosOptions::default();
        let a = ground_lanczos(&h, &opts).unwrap();
        let b = ground_lanczos(&h, &opts).unwrap();
        assert_eq!(a.ritz_history, b.ritz_history);
        assert_eq!(a.energy.to_bits(), b.energy.to_bits());
        let other = LanczosOptions {
            seed: 12345,
            ..opts
        };
        let c = ground_lanczos(&h, &other).unwrap();
        assert!((c.energy - a.energy).abs() < 1e-9);
    }

    #[test]
    fn critical_gap_shrinks_with_size() {
        let opts = LanczosOptions::default();
        let mut previous = f64::INFINITY;
        for n in [6usize, 8, 10] {
            let h =
                build_hamiltonian(&ModelSpec::tfim(1.0, 1.0), n, SiteOrdering::Append).unwrap();
            let dense = spectrum_dense(&h, 2).unwrap();
            let gap = dense[1].0 - dense[0].0;
            let sol = ground_lanczos(&h, &opts).unwrap();
            assert!((sol.gap - gap).abs() < 1e-8);
            assert!(gap > 0.0 && gap < previous, "gap sequence not decreasing");
            previous = gap;
        }
    }

    #[test]
    fn oversized_systems_are_refused() {
        let h = build_hamiltonian(&ModelSpec::tfim(1.0, 1.0), 13, SiteOrdering::Append).unwrap();
        assert!(matches!(
            spectrum_dense(&h, 1),
            Err(EigError::TooLarge { .. })
        ));
        let opts = LanczosOptions {
            max_n: 12,
            ..LanczosOptions::default()
        };
        assert!(matches!(
            ground_lanczos(&h, &opts),
            Err(EigError::TooLarge { .. })
        ));
    }
}
