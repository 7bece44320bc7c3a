//! Declarative spin-chain models and incremental construction of local
//! Hamiltonians under the two supported site orderings.
//!
//! A model is a family plus named couplings; building it for `n` sites under
//! a [`SiteOrdering`] yields a [`HamiltonianOperator`]: a list of Hermitian
//! [`LocalTerm`]s over 1-based site indices. Growing the system from `n - 1`
//! to `n` sites only adds or replaces terms near the new site, and
//! [`increment_terms`] returns exactly that difference.

mod families;
mod geometry;

use std::collections::BTreeMap;
use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use families::{Placement, TermTemplate};
pub(crate) use families::{pauli_x, pauli_y, pauli_z};
pub use geometry::{ChainGeometry, SiteOrdering};

const HERMITICITY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unsupported family configuration: {0}")]
    UnsupportedFamily(String),
    #[error("bridge ordering with left segment {left} needs at least {} sites, got {n}", left + 2)]
    BridgeTooSmall { left: usize, n: usize },
    #[error("{what} {value} out of range (limit {limit})")]
    OutOfRange {
        what: &'static str,
        value: usize,
        limit: usize,
    },
    #[error("invalid local term: {0}")]
    InvalidTerm(String),
    #[error("unknown coupling '{0}' for this family")]
    UnknownCoupling(String),
}

/// Built-in model families. Sign conventions, with site couplings read from
/// the named-coupling map:
///
/// - `TransverseFieldIsing`: `H = -J_zz sum Z_i Z_{i+1} - g_x sum X_i`
///   (couplings `J_zz`, `g_x`, both default 1).
/// - `Xxz`: `H = sum (X_i X_{i+1} + Y_i Y_{i+1} + anisotropy Z_i Z_{i+1})
///   - h_z sum Z_i` (couplings `anisotropy` default 1, `h_z` default 0).
/// - `HeisenbergField`: `H = J sum (XX + YY + ZZ) - h_z sum Z_i`
///   (couplings `J` default 1, `h_z` default 0).
/// - `Custom`: terms stamped from [`TermTemplate`]s.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    #[serde(rename = "tfim", alias = "transverse_field_ising")]
    TransverseFieldIsing,
    Xxz,
    HeisenbergField,
    Custom,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::TransverseFieldIsing => write!(f, "tfim"),
            Family::Xxz => write!(f, "xxz"),
            Family::HeisenbergField => write!(f, "heisenberg_field"),
            Family::Custom => write!(f, "custom"),
        }
    }
}

/// Declarative description of a spin-chain model family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    /// Named real parameters in energy units; see [`Family`] for the keys
    /// each family reads.
    #[serde(default)]
    pub couplings: BTreeMap<String, f64>,
    /// Local Hilbert-space dimension per site. Fixed to 2 in this version;
    /// carried so qudit support stays a non-breaking extension.
    #[serde(default = "default_local_dim")]
    pub local_dim: u32,
    /// Graph-distance bound `k0` on term support: every generated term sits
    /// inside the ball of radius `< k0` around its anchor site.
    #[serde(default = "default_interaction_range")]
    pub interaction_range: u32,
    /// Term templates for the custom family.
    #[serde(default)]
    pub custom_terms: Vec<TermTemplate>,
    /// Short display identifier used in output files.
    #[serde(default)]
    pub id: String,
}

fn default_local_dim() -> u32 {
    2
}

fn default_interaction_range() -> u32 {
    2
}

impl ModelSpec {
    pub fn tfim(j_zz: f64, g_x: f64) -> Self {
        let mut couplings = BTreeMap::new();
        couplings.insert("J_zz".into(), j_zz);
        couplings.insert("g_x".into(), g_x);
        Self {
            family: Family::TransverseFieldIsing,
            couplings,
            local_dim: 2,
            interaction_range: 2,
            custom_terms: Vec::new(),
            id: format!("tfim_J{j_zz}_g{g_x}"),
        }
    }

    pub fn xxz(anisotropy: f64, h_z: f64) -> Self {
        let mut couplings = BTreeMap::new();
        couplings.insert("anisotropy".into(), anisotropy);
        couplings.insert("h_z".into(), h_z);
        Self {
            family: Family::Xxz,
            couplings,
            local_dim: 2,
            interaction_range: 2,
            custom_terms: Vec::new(),
            id: format!("xxz_d{anisotropy}_h{h_z}"),
        }
    }

    pub fn heisenberg_field(j: f64, h_z: f64) -> Self {
        let mut couplings = BTreeMap::new();
        couplings.insert("J".into(), j);
        couplings.insert("h_z".into(), h_z);
        Self {
            family: Family::HeisenbergField,
            couplings,
            local_dim: 2,
            interaction_range: 2,
            custom_terms: Vec::new(),
            id: format!("heis_J{j}_h{h_z}"),
        }
    }

    pub fn custom(id: &str, interaction_range: u32, custom_terms: Vec<TermTemplate>) -> Self {
        Self {
            family: Family::Custom,
            couplings: BTreeMap::new(),
            local_dim: 2,
            interaction_range,
            custom_terms,
            id: id.into(),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.local_dim != 2 {
            return Err(ModelError::UnsupportedFamily(format!(
                "local_dim {} (only qubit chains are supported)",
                self.local_dim
            )));
        }
        if self.interaction_range == 0 {
            return Err(ModelError::OutOfRange {
                what: "interaction range",
                value: 0,
                limit: 1,
            });
        }
        let known = families::known_couplings(self.family);
        if !known.is_empty() {
            for key in self.couplings.keys() {
                if !known.contains(&key.as_str()) {
                    return Err(ModelError::UnknownCoupling(key.clone()));
                }
            }
        }
        if self.family == Family::Custom {
            for template in &self.custom_terms {
                let span = template.span();
                if span == 0 {
                    return Err(ModelError::InvalidTerm("empty Pauli string".into()));
                }
                // Anchor sits at the middle of the window; its farthest
                // support site must stay within graph distance < k0.
                let anchor_offset = span / 2;
                let radius = anchor_offset.max(span - 1 - anchor_offset);
                if radius >= self.interaction_range as usize {
                    return Err(ModelError::InvalidTerm(format!(
                        "template '{}' spans {span} sites, outside interaction range {}",
                        template.paulis, self.interaction_range
                    )));
                }
            }
        }
        Ok(())
    }

    /// Stable hash of the physical content, used as a cache key component.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.family.hash(&mut h);
        for (k, v) in &self.couplings {
            k.hash(&mut h);
            v.to_bits().hash(&mut h);
        }
        self.local_dim.hash(&mut h);
        self.interaction_range.hash(&mut h);
        for t in &self.custom_terms {
            t.coefficient.to_bits().hash(&mut h);
            t.paulis.hash(&mut h);
            (t.placement as u8).hash(&mut h);
        }
        h.finish()
    }

    /// Display identifier, falling back to the family name.
    pub fn display_id(&self) -> String {
        if self.id.is_empty() {
            self.family.to_string()
        } else {
            self.id.clone()
        }
    }
}

/// One Hermitian term of the Hamiltonian.
///
/// `support` lists the 1-based site indices ascending; local bit `t` of the
/// `block` index corresponds to `support[t]`. `anchor` is the site whose
/// radius-`< k0` ball contains the whole support.
#[derive(Clone, Debug)]
pub struct LocalTerm {
    support: Vec<usize>,
    block: Array2<C64>,
    anchor: usize,
}

impl LocalTerm {
    pub fn new(support: Vec<usize>, block: Array2<C64>, anchor: usize) -> Result<Self, ModelError> {
        let term = Self {
            support,
            block,
            anchor,
        };
        term.check()?;
        Ok(term)
    }

    fn check(&self) -> Result<(), ModelError> {
        let dim = 1usize << self.support.len();
        if self.block.nrows() != dim || self.block.ncols() != dim {
            return Err(ModelError::InvalidTerm(format!(
                "block is {}x{}, expected {dim}x{dim}",
                self.block.nrows(),
                self.block.ncols()
            )));
        }
        if !self.support.windows(2).all(|w| w[0] < w[1]) {
            return Err(ModelError::InvalidTerm(
                "support must be strictly ascending".into(),
            ));
        }
        if self.hermiticity_defect() > HERMITICITY_TOL {
            return Err(ModelError::InvalidTerm("block is not Hermitian".into()));
        }
        Ok(())
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn block(&self) -> &Array2<C64> {
        &self.block
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let dim = self.block.nrows();
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in 0..dim {
                worst = worst.max((self.block[(r, c)] - self.block[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_real(&self) -> bool {
        self.block.iter().all(|z| z.im == 0.0)
    }

    fn negated(&self) -> Self {
        Self {
            support: self.support.clone(),
            block: self.block.mapv(|z| -z),
            anchor: self.anchor,
        }
    }

    fn same_as(&self, other: &Self) -> bool {
        self.support == other.support
            && self
                .block
                .iter()
                .zip(other.block.iter())
                .all(|(a, b)| (a - b).norm() <= HERMITICITY_TOL)
    }

    /// Largest-magnitude eigenvalue of the block.
    pub fn operator_norm(&self) -> f64 {
        crate::linalg::eigvalsh(&self.block)
            .map(|w| w.iter().fold(0.0f64, |m, &x| m.max(x.abs())))
            .unwrap_or(0.0)
    }
}

/// A sum of local terms over `n` sites, applied sparsely to state vectors.
#[derive(Clone, Debug)]
pub struct HamiltonianOperator {
    geometry: ChainGeometry,
    ordering: SiteOrdering,
    terms: Vec<LocalTerm>,
}

impl HamiltonianOperator {
    pub fn n_sites(&self) -> usize {
        self.geometry.n_sites()
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_sites()
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    pub fn geometry(&self) -> &ChainGeometry {
        &self.geometry
    }

    pub fn ordering(&self) -> SiteOrdering {
        self.ordering
    }

    /// True when every block has exactly real entries, enabling the real
    /// symmetric dense path.
    pub fn is_real(&self) -> bool {
        self.terms.iter().all(LocalTerm::is_real)
    }

    /// Largest per-site term norm `J = max_s ||h_s||`, with `h_s` the sum of
    /// the terms anchored at site `s`.
    pub fn max_site_term_norm(&self) -> f64 {
        let mut by_anchor: BTreeMap<usize, Vec<&LocalTerm>> = BTreeMap::new();
        for t in &self.terms {
            by_anchor.entry(t.anchor).or_default().push(t);
        }
        let mut j = 0.0f64;
        for (_, terms) in by_anchor {
            // Embed the anchored terms into the union of their supports.
            let mut union: Vec<usize> = terms
                .iter()
                .flat_map(|t| t.support.iter().copied())
                .collect();
            union.sort_unstable();
            union.dedup();
            let dim = 1usize << union.len();
            let mut h = Array2::<C64>::zeros((dim, dim));
            for t in terms {
                let bit_of: Vec<usize> = t
                    .support
                    .iter()
                    .map(|s| union.iter().position(|u| u == s).unwrap())
                    .collect();
                let sdim = 1usize << t.support.len();
                let mask: usize = bit_of.iter().map(|&b| 1usize << b).sum();
                for full in 0..dim {
                    if full & mask != 0 {
                        continue;
                    }
                    for a in 0..sdim {
                        let col = full | scatter_bits(a, &bit_of);
                        for ap in 0..sdim {
                            let row = full | scatter_bits(ap, &bit_of);
                            h[(row, col)] += t.block[(ap, a)];
                        }
                    }
                }
            }
            if let Ok(w) = crate::linalg::eigvalsh(&h) {
                j = j.max(w.iter().fold(0.0f64, |m, &x| m.max(x.abs())));
            }
        }
        j
    }

    /// Dense matrix of the full operator. Intended for small systems; the
    /// dimension grows as `2^n`.
    pub fn dense(&self) -> Array2<C64> {
        let dim = self.dim();
        let mut h = Array2::<C64>::zeros((dim, dim));
        for t in &self.terms {
            let bits: Vec<usize> = t.support.iter().map(|s| s - 1).collect();
            let sdim = 1usize << bits.len();
            let mask: usize = bits.iter().map(|&b| 1usize << b).sum();
            for base in 0..dim {
                if base & mask != 0 {
                    continue;
                }
                for a in 0..sdim {
                    let col = base | scatter_bits(a, &bits);
                    for ap in 0..sdim {
                        let row = base | scatter_bits(ap, &bits);
                        h[(row, col)] += t.block[(ap, a)];
                    }
                }
            }
        }
        h
    }

    /// Dense real matrix, available when every block is exactly real.
    pub fn dense_real(&self) -> Option<Array2<f64>> {
        if !self.is_real() {
            return None;
        }
        let dim = self.dim();
        let mut h = Array2::<f64>::zeros((dim, dim));
        for t in &self.terms {
            let bits: Vec<usize> = t.support.iter().map(|s| s - 1).collect();
            let sdim = 1usize << bits.len();
            let mask: usize = bits.iter().map(|&b| 1usize << b).sum();
            for base in 0..dim {
                if base & mask != 0 {
                    continue;
                }
                for a in 0..sdim {
                    let col = base | scatter_bits(a, &bits);
                    for ap in 0..sdim {
                        let row = base | scatter_bits(ap, &bits);
                        h[(row, col)] += t.block[(ap, a)].re;
                    }
                }
            }
        }
        Some(h)
    }
}

pub(crate) fn scatter_bits(a: usize, bits: &[usize]) -> usize {
    bits.iter()
        .enumerate()
        .fold(0usize, |acc, (t, &b)| acc | (((a >> t) & 1) << b))
}

pub(crate) fn gather_bits(full: usize, bits: &[usize]) -> usize {
    bits.iter()
        .enumerate()
        .fold(0usize, |acc, (t, &b)| acc | (((full >> b) & 1) << t))
}

/// Build the `n`-site Hamiltonian of `spec` under `ordering`.
pub fn build_hamiltonian(
    spec: &ModelSpec,
    n: usize,
    ordering: SiteOrdering,
) -> Result<HamiltonianOperator, ModelError> {
    spec.validate()?;
    let geometry = ChainGeometry::full(ordering, n)?;
    let terms = families::generate_terms(spec, &geometry)?;
    Ok(HamiltonianOperator {
        geometry,
        ordering,
        terms,
    })
}

/// Build the `(n-1)`-site Hamiltonian whose geometry is inherited from the
/// `n`-site build: the system the `n`-th spin extends.
pub fn build_prior_hamiltonian(
    spec: &ModelSpec,
    n: usize,
    ordering: SiteOrdering,
) -> Result<HamiltonianOperator, ModelError> {
    spec.validate()?;
    let geometry = ChainGeometry::prior(ordering, n)?;
    let terms = families::generate_terms(spec, &geometry)?;
    Ok(HamiltonianOperator {
        geometry,
        ordering,
        terms,
    })
}

/// Terms `K_n` such that the `n`-site Hamiltonian equals the embedded
/// `(n-1)`-site Hamiltonian plus `K_n`. Replaced boundary terms appear as a
/// new term plus the negated old term.
pub fn increment_terms(
    spec: &ModelSpec,
    n: usize,
    ordering: SiteOrdering,
) -> Result<Vec<LocalTerm>, ModelError> {
    if n < 2 {
        return Err(ModelError::OutOfRange {
            what: "site count for increment",
            value: n,
            limit: 2,
        });
    }
    let full = build_hamiltonian(spec, n, ordering)?;
    let prior = build_prior_hamiltonian(spec, n, ordering)?;
    let mut increment: Vec<LocalTerm> = Vec::new();
    for t in &full.terms {
        if !prior.terms.iter().any(|p| p.same_as(t)) {
            increment.push(t.clone());
        }
    }
    for p in &prior.terms {
        if !full.terms.iter().any(|t| t.same_as(p)) {
            increment.push(p.negated());
        }
    }
    Ok(increment)
}

/// Sites at graph distance `< k` from `center` in the `n`-site geometry,
/// reported as ascending site indices.
pub fn graph_ball(
    n: usize,
    center: usize,
    k: usize,
    ordering: SiteOrdering,
) -> Result<Vec<usize>, ModelError> {
    ChainGeometry::full(ordering, n)?.ball(center, k)
}

/// The three-body chain with two-body segment-boundary corrections. Bulk
/// windows carry -ZXZ and each segment boundary carries the matching
/// two-site piece, so extending the chain replaces the old boundary term
/// (`k0 = 2`: every window stays within distance 1 of its centre).
pub fn cluster_chain_spec() -> ModelSpec {
    ModelSpec::custom(
        "cluster",
        2,
        vec![
            TermTemplate {
                coefficient: -1.0,
                paulis: "ZXZ".into(),
                placement: Placement::Bulk,
            },
            TermTemplate {
                coefficient: -1.0,
                paulis: "XZ".into(),
                placement: Placement::SegmentLeft,
            },
            TermTemplate {
                coefficient: -1.0,
                paulis: "ZX".into(),
                placement: Placement::SegmentRight,
            },
        ],
    )
}
