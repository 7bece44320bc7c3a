//! Local-term generation for the built-in model families and for custom
//! term templates.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::geometry::ChainGeometry;
use super::{Family, LocalTerm, ModelError, ModelSpec};

pub(crate) fn pauli_x() -> Array2<C64> {
    Array2::from_shape_vec(
        (2, 2),
        vec![
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
        ],
    )
    .unwrap()
}

pub(crate) fn pauli_y() -> Array2<C64> {
    Array2::from_shape_vec(
        (2, 2),
        vec![
            C64::new(0.0, 0.0),
            C64::new(0.0, -1.0),
            C64::new(0.0, 1.0),
            C64::new(0.0, 0.0),
        ],
    )
    .unwrap()
}

pub(crate) fn pauli_z() -> Array2<C64> {
    Array2::from_shape_vec(
        (2, 2),
        vec![
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(-1.0, 0.0),
        ],
    )
    .unwrap()
}

fn pauli_by_char(c: char) -> Result<Array2<C64>, ModelError> {
    match c.to_ascii_uppercase() {
        'X' => Ok(pauli_x()),
        'Y' => Ok(pauli_y()),
        'Z' => Ok(pauli_z()),
        'I' => Ok(Array2::eye(2)),
        other => Err(ModelError::InvalidTerm(format!(
            "unknown Pauli letter '{other}'"
        ))),
    }
}

/// Product block over `factors.len()` local bits, with `factors[t]` acting on
/// local bit `t`. Local basis index `a` encodes bit `t` of `a` as the state
/// of the `t`-th support site.
pub(crate) fn block_from_factors(factors: &[Array2<C64>]) -> Array2<C64> {
    let dim = 1usize << factors.len();
    Array2::from_shape_fn((dim, dim), |(row, col)| {
        factors
            .iter()
            .enumerate()
            .map(|(t, f)| f[((row >> t) & 1, (col >> t) & 1)])
            .product()
    })
}

/// Reorder the local bits of `block`: output bit `t` takes the role of input
/// bit `perm[t]`.
pub(crate) fn permute_block(block: &Array2<C64>, perm: &[usize]) -> Array2<C64> {
    let dim = block.nrows();
    let remap = |a: usize| -> usize {
        perm.iter()
            .enumerate()
            .fold(0usize, |acc, (t, &src)| acc | (((a >> t) & 1) << src))
    };
    // remap maps a new-order index to the old-order index it came from.
    let mut out = Array2::zeros((dim, dim));
    for row in 0..dim {
        for col in 0..dim {
            out[(row, col)] = block[(remap(row), remap(col))];
        }
    }
    out
}

/// Where a custom term template attaches within each contiguous segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Every window of `span` consecutive occupied positions.
    Bulk,
    /// Pinned to the left end of each segment.
    SegmentLeft,
    /// Pinned to the right end of each segment.
    SegmentRight,
}

/// A reusable local term: `coefficient` times a Pauli string, stamped onto
/// the chain according to its placement rule. The string is read left to
/// right along increasing chain position.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TermTemplate {
    pub coefficient: f64,
    pub paulis: String,
    pub placement: Placement,
}

impl TermTemplate {
    pub fn span(&self) -> usize {
        self.paulis.chars().count()
    }

    fn factors(&self) -> Result<Vec<Array2<C64>>, ModelError> {
        if self.paulis.is_empty() {
            return Err(ModelError::InvalidTerm(
                "empty Pauli string in term template".into(),
            ));
        }
        self.paulis.chars().map(pauli_by_char).collect()
    }
}

/// Build a term from a block whose local bit `t` corresponds to the `t`-th
/// entry of `sites_by_position` (the window read left-to-right along the
/// chain). The stored support is sorted by site index and the block bits are
/// permuted to match.
fn term_from_position_block(
    sites_by_position: &[usize],
    block_by_position: &Array2<C64>,
    anchor: usize,
) -> LocalTerm {
    let mut order: Vec<usize> = (0..sites_by_position.len()).collect();
    order.sort_by_key(|&t| sites_by_position[t]);
    let support: Vec<usize> = order.iter().map(|&t| sites_by_position[t]).collect();
    let block = if order.windows(2).all(|w| w[0] < w[1]) {
        block_by_position.clone()
    } else {
        permute_block(block_by_position, &order)
    };
    LocalTerm {
        support,
        block,
        anchor,
    }
}

/// Build a term from per-site operators given in chain-position order.
fn term_on_window(
    sites_by_position: &[usize],
    factors_by_position: &[Array2<C64>],
    coefficient: f64,
    anchor: usize,
) -> LocalTerm {
    let c = C64::new(coefficient, 0.0);
    let block = block_from_factors(factors_by_position).mapv(|z| z * c);
    term_from_position_block(sites_by_position, &block, anchor)
}

fn field_term(site: usize, op: Array2<C64>, coefficient: f64) -> LocalTerm {
    term_on_window(&[site], &[op], coefficient, site)
}

fn coupling(spec: &ModelSpec, key: &str, default: f64) -> f64 {
    spec.couplings.get(key).copied().unwrap_or(default)
}

pub(crate) fn known_couplings(family: Family) -> &'static [&'static str] {
    match family {
        Family::TransverseFieldIsing => &["J_zz", "g_x"],
        Family::Xxz => &["anisotropy", "h_z"],
        Family::HeisenbergField => &["J", "h_z"],
        Family::Custom => &[],
    }
}

/// Generate the local terms of the Hamiltonian on `geom`, ordered by anchor
/// site and support.
pub(crate) fn generate_terms(
    spec: &ModelSpec,
    geom: &ChainGeometry,
) -> Result<Vec<LocalTerm>, ModelError> {
    let mut terms = match spec.family {
        Family::TransverseFieldIsing => {
            let j_zz = coupling(spec, "J_zz", 1.0);
            let g_x = coupling(spec, "g_x", 1.0);
            let mut terms = Vec::new();
            for seg in geom.segments() {
                for &site in &seg {
                    if g_x != 0.0 {
                        terms.push(field_term(site, pauli_x(), -g_x));
                    }
                }
                for pair in seg.windows(2) {
                    if j_zz != 0.0 {
                        terms.push(term_on_window(
                            pair,
                            &[pauli_z(), pauli_z()],
                            -j_zz,
                            pair[0],
                        ));
                    }
                }
            }
            terms
        }
        Family::Xxz => {
            let delta = coupling(spec, "anisotropy", 1.0);
            let h_z = coupling(spec, "h_z", 0.0);
            xy_chain_terms(geom, 1.0, 1.0, delta, h_z)
        }
        Family::HeisenbergField => {
            let j = coupling(spec, "J", 1.0);
            let h_z = coupling(spec, "h_z", 0.0);
            xy_chain_terms(geom, j, j, j, h_z)
        }
        Family::Custom => {
            if spec.custom_terms.is_empty() {
                return Err(ModelError::UnsupportedFamily(
                    "custom family requires at least one term template".into(),
                ));
            }
            let mut terms = Vec::new();
            for template in &spec.custom_terms {
                stamp_template(template, geom, &mut terms)?;
            }
            terms
        }
    };
    terms.sort_by(|a, b| (a.anchor, &a.support).cmp(&(b.anchor, &b.support)));
    Ok(terms)
}

/// Bond XX + YY + delta ZZ with coefficient `j_xy` on XX/YY, plus a -h_z Z
/// field per site.
fn xy_chain_terms(
    geom: &ChainGeometry,
    j_x: f64,
    j_y: f64,
    j_z: f64,
    h_z: f64,
) -> Vec<LocalTerm> {
    let mut terms = Vec::new();
    for seg in geom.segments() {
        for &site in &seg {
            if h_z != 0.0 {
                terms.push(field_term(site, pauli_z(), -h_z));
            }
        }
        for pair in seg.windows(2) {
            let block = block_from_factors(&[pauli_x(), pauli_x()]).mapv(|z| z * j_x)
                + block_from_factors(&[pauli_y(), pauli_y()]).mapv(|z| z * j_y)
                + block_from_factors(&[pauli_z(), pauli_z()]).mapv(|z| z * j_z);
            terms.push(term_from_position_block(pair, &block, pair[0]));
        }
    }
    terms
}

fn stamp_template(
    template: &TermTemplate,
    geom: &ChainGeometry,
    out: &mut Vec<LocalTerm>,
) -> Result<(), ModelError> {
    let span = template.span();
    let factors = template.factors()?;
    if template.coefficient == 0.0 {
        return Ok(());
    }
    for seg in geom.segments() {
        if seg.len() < span {
            continue;
        }
        let windows: Vec<&[usize]> = match template.placement {
            Placement::Bulk => seg.windows(span).collect(),
            Placement::SegmentLeft => vec![&seg[..span]],
            Placement::SegmentRight => vec![&seg[seg.len() - span..]],
        };
        for window in windows {
            let anchor = window[span / 2];
            out.push(term_on_window(
                window,
                &factors,
                template.coefficient,
                anchor,
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_bit_convention() {
        // Z on bit 0, X on bit 1: entry (row, col) = Z[r0,c0] X[r1,c1].
        let b = block_from_factors(&[pauli_z(), pauli_x()]);
        // col = 0 (both bits 0): X flips bit 1 -> row 2, Z keeps +1.
        assert_eq!(b[(2, 0)], C64::new(1.0, 0.0));
        // col = 1 (bit0 = 1): Z gives -1, X flips bit 1 -> row 3.
        assert_eq!(b[(3, 1)], C64::new(-1.0, 0.0));
        assert_eq!(b[(0, 0)], C64::new(0.0, 0.0));
    }

    #[test]
    fn permute_block_swaps_bits() {
        let zx = block_from_factors(&[pauli_z(), pauli_x()]);
        let xz = block_from_factors(&[pauli_x(), pauli_z()]);
        assert_eq!(permute_block(&zx, &[1, 0]), xz);
    }
}
