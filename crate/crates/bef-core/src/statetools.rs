//! Bipartition reshapes, reduced density matrices, entropies, trace
//! distance, and two fidelity algorithms.
//!
//! Fidelity convention: `F(rho, sigma) = || sqrt(rho) sqrt(sigma) ||_1`, the
//! trace-norm (unsquared) form. Both conventions circulate; the unsquared one
//! is used throughout so that the boundary-effect identities
//! `mu^2 = 1 - F` and `1 - F <= D <= sqrt(1 - F^2)` hold exactly as written.
//! All entropies are in bits (log base 2).

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::model::{gather_bits, scatter_bits};

/// Largest region size for dense reduced-density and cross-fidelity paths.
pub const REGION_CAP: usize = 13;
/// Squared Schmidt values below this are dropped from entropy sums.
pub const SCHMIDT_CUTOFF: f64 = 1e-15;
const PSD_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum StateError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("region of {size} sites exceeds the dense cap of {cap}")]
    RegionTooLarge { size: usize, cap: usize },
    #[error("matrix is not a density matrix: {0}")]
    NotPsd(String),
    #[error("argument {0} outside the domain [0, 1]")]
    OutOfDomain(f64),
    #[error("invalid region: {0}")]
    BadRegion(String),
    #[error("dense linear algebra failed: {0}")]
    Backend(String),
}

/// A bipartition of `n` sites into a sorted region and its complement,
/// carrying the bit permutation that realizes the `(complement, region)`
/// index split.
#[derive(Clone, Debug)]
pub struct Bipartition {
    n: usize,
    region: Vec<usize>,
    complement: Vec<usize>,
    region_bits: Vec<usize>,
    complement_bits: Vec<usize>,
}

impl Bipartition {
    pub fn new(n: usize, region: &[usize]) -> Result<Self, StateError> {
        let mut region: Vec<usize> = region.to_vec();
        region.sort_unstable();
        region.dedup();
        if region.first().is_some_and(|&s| s == 0) || region.last().is_some_and(|&s| s > n) {
            return Err(StateError::BadRegion(format!(
                "region sites must lie in 1..={n}"
            )));
        }
        let complement: Vec<usize> = (1..=n).filter(|s| !region.contains(s)).collect();
        let region_bits = region.iter().map(|s| s - 1).collect();
        let complement_bits = complement.iter().map(|s| s - 1).collect();
        Ok(Self {
            n,
            region,
            complement,
            region_bits,
            complement_bits,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn region(&self) -> &[usize] {
        &self.region
    }

    pub fn complement(&self) -> &[usize] {
        &self.complement
    }

    pub fn region_dim(&self) -> usize {
        1 << self.region.len()
    }

    pub fn complement_dim(&self) -> usize {
        1 << self.complement.len()
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: Array2<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity and unit trace; positivity is enforced where an
    /// eigendecomposition happens anyway.
    pub fn new(matrix: Array2<C64>) -> Result<Self, StateError> {
        let d = matrix.nrows();
        if matrix.ncols() != d {
            return Err(StateError::DimensionMismatch {
                left: d,
                right: matrix.ncols(),
            });
        }
        let mut trace = C64::new(0.0, 0.0);
        for i in 0..d {
            trace += matrix[(i, i)];
        }
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(StateError::NotPsd(format!("trace {trace} is not 1")));
        }
        for i in 0..d {
            for j in i..d {
                if (matrix[(i, j)] - matrix[(j, i)].conj()).norm() > TRACE_TOL {
                    return Err(StateError::NotPsd("matrix is not Hermitian".into()));
                }
            }
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn purity(&self) -> f64 {
        let d = self.dim();
        let mut p = 0.0;
        for i in 0..d {
            for j in 0..d {
                p += (self.matrix[(i, j)] * self.matrix[(j, i)]).re;
            }
        }
        p
    }
}

/// Amplitude matrix of `state` with complement configurations as rows and
/// region configurations as columns.
pub fn bipartition_reshape(
    state: &Array1<C64>,
    part: &Bipartition,
) -> Result<Array2<C64>, StateError> {
    let dim = 1usize << part.n();
    if state.len() != dim {
        return Err(StateError::DimensionMismatch {
            left: state.len(),
            right: dim,
        });
    }
    let v = state.as_slice().expect("contiguous state");
    let mut m = Array2::<C64>::zeros((part.complement_dim(), part.region_dim()));
    for (b, &amp) in v.iter().enumerate() {
        let c = gather_bits(b, &part.complement_bits);
        let i = gather_bits(b, &part.region_bits);
        m[(c, i)] = amp;
    }
    Ok(m)
}

/// `out[i, j] = sum_c a[c, i] * conj(b[c, j])`.
fn cross_gram(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (rows, cols_a) = (a.nrows(), a.ncols());
    let cols_b = b.ncols();
    let mut out = Array2::<C64>::zeros((cols_a, cols_b));
    for c in 0..rows {
        let ar = a.row(c);
        let br = b.row(c);
        for i in 0..cols_a {
            let f = ar[i];
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            let mut row = out.row_mut(i);
            for j in 0..cols_b {
                row[j] += f * br[j].conj();
            }
        }
    }
    out
}

fn matmul(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (n, m) = (a.nrows(), b.ncols());
    let inner = a.ncols();
    let mut out = Array2::<C64>::zeros((n, m));
    for i in 0..n {
        for k in 0..inner {
            let f = a[(i, k)];
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            let br = b.row(k);
            let mut row = out.row_mut(i);
            for j in 0..m {
                row[j] += f * br[j];
            }
        }
    }
    out
}

/// Reduced density matrix of `state` on `region` (1-based site indices).
pub fn reduced_density(
    state: &Array1<C64>,
    n: usize,
    region: &[usize],
) -> Result<DensityMatrix, StateError> {
    if region.len() > REGION_CAP {
        return Err(StateError::RegionTooLarge {
            size: region.len(),
            cap: REGION_CAP,
        });
    }
    let part = Bipartition::new(n, region)?;
    let m = bipartition_reshape(state, &part)?;
    // rho[i, j] = sum_c M[c, i] conj(M[c, j])
    let rho = cross_gram(&m, &m);
    DensityMatrix::new(rho)
}

/// Entanglement entropy in bits across the cut defined by `region`,
/// computed from the singular values of the bipartition reshape. No cap on
/// either side of the cut.
pub fn entanglement_entropy(
    state: &Array1<C64>,
    n: usize,
    region: &[usize],
) -> Result<f64, StateError> {
    let part = Bipartition::new(n, region)?;
    if part.region().is_empty() || part.complement().is_empty() {
        return Ok(0.0);
    }
    let m = bipartition_reshape(state, &part)?;
    let sv = crate::linalg::singular_values(&m).map_err(StateError::Backend)?;
    let mut s = 0.0;
    for &sigma in sv.iter() {
        let p = sigma * sigma;
        if p >= SCHMIDT_CUTOFF {
            s -= p * p.log2();
        }
    }
    Ok(s)
}

/// `(1/2) || rho - sigma ||_1` via the eigenvalues of the difference.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, StateError> {
    if rho.dim() != sigma.dim() {
        return Err(StateError::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let diff = rho.matrix() - sigma.matrix();
    let w = crate::linalg::eigvalsh(&diff).map_err(StateError::Backend)?;
    let d = 0.5 * w.iter().map(|x| x.abs()).sum::<f64>();
    Ok(d.clamp(0.0, 1.0))
}

/// Hermitian square root from an eigendecomposition. Eigenvalues below the
/// noise threshold are zeroed: keeping them would turn `~1e-16` of spectral
/// noise into `~1e-8` entries of the root, which is exactly the error the
/// trace-norm sum must stay below.
fn psd_sqrt(m: &Array2<C64>) -> Result<Array2<C64>, StateError> {
    let (w, u) = crate::linalg::eigh_hermitian(m).map_err(StateError::Backend)?;
    if let Some(&min) = w.iter().min_by(|a, b| a.total_cmp(b)) {
        if min < -PSD_TOL {
            return Err(StateError::NotPsd(format!("min eigenvalue {min:.3e}")));
        }
    }
    let d = m.nrows();
    let wmax = w.iter().fold(0.0f64, |a, &b| a.max(b));
    let threshold = wmax * d as f64 * f64::EPSILON;
    let mut scaled = u.clone();
    for k in 0..d {
        let root = if w[k] > threshold { w[k].sqrt() } else { 0.0 };
        scaled.column_mut(k).mapv_inplace(|z| z * root);
    }
    // sqrt[i, j] = sum_k scaled[i, k] conj(u[j, k])
    Ok(cross_gram(&scaled.t().to_owned(), &u.t().to_owned()))
}

/// Uhlmann fidelity `|| sqrt(rho) sqrt(sigma) ||_1`: both roots come from
/// eigendecompositions and the trace norm from the singular values of their
/// product, which keeps near-null directions at absolute rather than
/// square-root accuracy.
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, StateError> {
    if rho.dim() != sigma.dim() {
        return Err(StateError::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let sqrt_rho = psd_sqrt(rho.matrix())?;
    let sqrt_sigma = psd_sqrt(sigma.matrix())?;
    let product = matmul(&sqrt_rho, &sqrt_sigma);
    let sv = crate::linalg::singular_values(&product).map_err(StateError::Backend)?;
    Ok(sv.iter().sum::<f64>().clamp(0.0, 1.0))
}

/// `|| Tr_{complement(R)} |phi><psi| ||_1`: the maximal overlap
/// `|<psi| U |phi>|` over unitaries `U` supported on region `R`, equal to
/// the Uhlmann fidelity of the two states reduced onto the complement of
/// `R`. Needs only an SVD of a `2^|R|`-dimensional operator.
pub fn cross_fidelity_pure(
    psi: &Array1<C64>,
    phi: &Array1<C64>,
    n: usize,
    region: &[usize],
) -> Result<f64, StateError> {
    if psi.len() != phi.len() {
        return Err(StateError::DimensionMismatch {
            left: psi.len(),
            right: phi.len(),
        });
    }
    let part = Bipartition::new(n, region)?;
    let small_side = part.region().len().min(part.complement().len());
    if small_side > REGION_CAP {
        return Err(StateError::RegionTooLarge {
            size: small_side,
            cap: REGION_CAP,
        });
    }
    let m_psi = bipartition_reshape(psi, &part)?;
    let m_phi = bipartition_reshape(phi, &part)?;
    let sv = if part.region_dim() <= part.complement_dim() {
        // X[i, j] = sum_c phi(c, i) conj(psi(c, j))
        let x = cross_gram(&m_phi, &m_psi);
        crate::linalg::singular_values(&x).map_err(StateError::Backend)?
    } else {
        // X = M_phi^T conj(M_psi) has rank at most the complement
        // dimension; reduce through two thin QRs so the SVD runs on a
        // complement-sized square factor instead of the full region space.
        let a_t = m_phi.t().to_owned();
        let (_, r1) = crate::linalg::qr_thin(&a_t);
        let w = matmul(&r1, &m_psi.mapv(|z| z.conj()));
        let w_adj = w.t().mapv(|z| z.conj());
        let (_, r2) = crate::linalg::qr_thin(&w_adj);
        crate::linalg::singular_values(&r2).map_err(StateError::Backend)?
    };
    Ok(sv.iter().sum::<f64>().min(1.0))
}

/// Binary entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64, StateError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(StateError::OutOfDomain(p));
    }
    let part = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    Ok(part(p) + part(1.0 - p))
}

/// Apply a dense operator `u` on the listed sites of `state`.
pub fn apply_on_region(
    state: &Array1<C64>,
    n: usize,
    sites: &[usize],
    u: &Array2<C64>,
) -> Result<Array1<C64>, StateError> {
    let dim = 1usize << n;
    if state.len() != dim {
        return Err(StateError::DimensionMismatch {
            left: state.len(),
            right: dim,
        });
    }
    let mut sorted: Vec<usize> = sites.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != sites.len() {
        return Err(StateError::BadRegion("duplicate sites".into()));
    }
    let sdim = 1usize << sorted.len();
    if u.nrows() != sdim || u.ncols() != sdim {
        return Err(StateError::DimensionMismatch {
            left: u.nrows(),
            right: sdim,
        });
    }
    let bits: Vec<usize> = sorted.iter().map(|s| s - 1).collect();
    let mask: usize = bits.iter().map(|&b| 1usize << b).sum();
    let v = state.as_slice().expect("contiguous state");
    let mut out = vec![C64::new(0.0, 0.0); dim];
    for (b, slot) in out.iter_mut().enumerate() {
        let ap = gather_bits(b, &bits);
        let rest = b & !mask;
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..sdim {
            let m = u[(ap, a)];
            if m != C64::new(0.0, 0.0) {
                acc += m * v[rest | scatter_bits(a, &bits)];
            }
        }
        *slot = acc;
    }
    Ok(Array1::from_vec(out))
}
