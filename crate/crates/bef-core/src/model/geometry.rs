//! Placement of site indices on the 1D lattice.
//!
//! Sites are labelled by 1-based indices in the order they are added to the
//! system; the geometry maps each index to a 1-based chain position. Graph
//! distance is the position difference, so a geometry with an unoccupied
//! position in the middle describes two decoupled segments.

use serde::{Deserialize, Serialize};

use super::ModelError;

/// How site indices are laid out on the chain.
///
/// `Append` grows the chain at the right end: index `i` sits at position `i`.
/// `Bridge` keeps positions `1..=left` for the first `left` indices, places
/// the remaining indices except the last at positions `left + 2..`, and puts
/// the last index at position `left + 1`, joining the two segments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SiteOrdering {
    Append,
    Bridge { left: usize },
}

impl std::fmt::Display for SiteOrdering {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SiteOrdering::Append => write!(f, "append"),
            SiteOrdering::Bridge { left } => write!(f, "bridge[{left}]"),
        }
    }
}

/// Concrete placement of `n` site indices on chain positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChainGeometry {
    /// `positions[i - 1]` is the chain position of site index `i`.
    positions: Vec<usize>,
    /// `index_at[p - 1]` is the site index at position `p`, 0 if unoccupied.
    index_at: Vec<usize>,
}

impl ChainGeometry {
    /// Geometry of the complete `n`-site system under `ordering`.
    pub fn full(ordering: SiteOrdering, n: usize) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::OutOfRange {
                what: "site count",
                value: 0,
                limit: 1,
            });
        }
        let positions = match ordering {
            SiteOrdering::Append => (1..=n).collect(),
            SiteOrdering::Bridge { left } => {
                if left == 0 || n < left + 2 {
                    return Err(ModelError::BridgeTooSmall { left, n });
                }
                let mut p: Vec<usize> = Vec::with_capacity(n);
                p.extend(1..=left);
                p.extend(left + 2..=n);
                p.push(left + 1);
                p
            }
        };
        Ok(Self::from_positions(positions))
    }

    /// Geometry of the `(n-1)`-site system the full `n`-site system extends:
    /// the first `n - 1` indices keep the positions they have in
    /// [`ChainGeometry::full`]. Under `Bridge` this leaves the joining
    /// position unoccupied, so the two segments are decoupled.
    pub fn prior(ordering: SiteOrdering, n: usize) -> Result<Self, ModelError> {
        if n < 2 {
            return Err(ModelError::OutOfRange {
                what: "site count for prior geometry",
                value: n,
                limit: 2,
            });
        }
        let mut positions = Self::full(ordering, n)?.positions;
        positions.pop();
        Ok(Self::from_positions(positions))
    }

    fn from_positions(positions: Vec<usize>) -> Self {
        let max_pos = positions.iter().copied().max().unwrap_or(0);
        let mut index_at = vec![0usize; max_pos];
        for (i, &p) in positions.iter().enumerate() {
            index_at[p - 1] = i + 1;
        }
        Self {
            positions,
            index_at,
        }
    }

    /// Number of sites placed by this geometry.
    pub fn n_sites(&self) -> usize {
        self.positions.len()
    }

    /// Chain position of a 1-based site index.
    pub fn position_of(&self, index: usize) -> Result<usize, ModelError> {
        self.positions
            .get(index.wrapping_sub(1))
            .copied()
            .ok_or(ModelError::OutOfRange {
                what: "site index",
                value: index,
                limit: self.n_sites(),
            })
    }

    /// Site index occupying a chain position, if any.
    pub fn index_at(&self, position: usize) -> Option<usize> {
        match self.index_at.get(position.wrapping_sub(1)) {
            Some(&i) if i != 0 => Some(i),
            _ => None,
        }
    }

    /// Graph distance between two site indices (position difference).
    pub fn distance(&self, a: usize, b: usize) -> Result<usize, ModelError> {
        let pa = self.position_of(a)?;
        let pb = self.position_of(b)?;
        Ok(pa.abs_diff(pb))
    }

    /// Indices of the sites at graph distance `< k` from `center`, ascending.
    pub fn ball(&self, center: usize, k: usize) -> Result<Vec<usize>, ModelError> {
        if k == 0 {
            return Err(ModelError::OutOfRange {
                what: "ball radius",
                value: 0,
                limit: 1,
            });
        }
        let pc = self.position_of(center)?;
        let mut sites: Vec<usize> = self
            .positions
            .iter()
            .enumerate()
            .filter(|(_, &p)| p.abs_diff(pc) < k)
            .map(|(i, _)| i + 1)
            .collect();
        sites.sort_unstable();
        Ok(sites)
    }

    /// Maximal runs of consecutively occupied positions, each listed in
    /// position order.
    pub fn segments(&self) -> Vec<Vec<usize>> {
        let mut segments = Vec::new();
        let mut current: Vec<usize> = Vec::new();
        for p in 1..=self.index_at.len() {
            match self.index_at(p) {
                Some(i) => current.push(i),
                None => {
                    if !current.is_empty() {
                        segments.push(std::mem::take(&mut current));
                    }
                }
            }
        }
        if !current.is_empty() {
            segments.push(current);
        }
        segments
    }

    /// Stable fingerprint material: the raw position list.
    pub fn positions(&self) -> &[usize] {
        &self.positions
    }
}
