//! Exact-recovery distances: the zero-one cluster distance (invariant to
//! global label permutation) and the per-cluster group distance (invariant
//! to a right offset per cluster).

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, GroupElement};
use crate::model::Community;

/// Distances of an estimate from the truth. `dist_c` is 0 or 1; `dist_g`
/// counts clusters whose elements are not recovered up to an offset, so it
/// lies in `0..=2` for two communities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecoveryDistances {
    pub dist_c: u8,
    pub dist_g: usize,
}

/// Zero-one distance between two labelings: 0 iff some global permutation
/// of the two labels makes them agree everywhere.
pub fn dist_c(kappa: &[Community], kappa_star: &[Community]) -> Result<u8> {
    if kappa.len() != kappa_star.len() {
        return Err(Error::LengthMismatch { expected: kappa_star.len(), actual: kappa.len() });
    }
    let direct = kappa.iter().zip(kappa_star).all(|(a, b)| a == b);
    let swapped = kappa.iter().zip(kappa_star).all(|(a, b)| a.swapped() == *b);
    Ok(if direct || swapped { 0 } else { 1 })
}

/// Group-element distance: for each true cluster, the elements count as
/// recovered iff some offset `h` satisfies `g_star[i] = g[i] ∘ h` for every
/// node `i` of that cluster. Clusters are always the TRUE ones, even when
/// the estimated labeling is wrong.
pub fn dist_g(
    group: &FiniteGroup,
    g: &[GroupElement],
    g_star: &[GroupElement],
    kappa_star: &[Community],
) -> Result<usize> {
    if g.len() != kappa_star.len() {
        return Err(Error::LengthMismatch { expected: kappa_star.len(), actual: g.len() });
    }
    if g_star.len() != kappa_star.len() {
        return Err(Error::LengthMismatch { expected: kappa_star.len(), actual: g_star.len() });
    }
    let mut dist = 0;
    for cluster in [Community::One, Community::Two] {
        let recovered = group.elements().any(|offset| {
            kappa_star
                .iter()
                .enumerate()
                .filter(|(_, &k)| k == cluster)
                .all(|(i, _)| g_star[i] == group.compose(g[i], offset))
        });
        if !recovered {
            dist += 1;
        }
    }
    Ok(dist)
}

/// Success indicators: exact recovery means distance zero.
pub fn trial_success(distances: RecoveryDistances) -> (bool, bool) {
    (distances.dist_c == 0, distances.dist_g == 0)
}
