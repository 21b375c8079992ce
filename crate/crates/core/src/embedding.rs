//! H¹ ↪ L² compactness on the torus, made quantitative.
//!
//! Mode by mode, |û(ξ)|² ≤ (1+|ξ|²)^{-1}·(1+|ξ|²)|û(ξ)|², so the part of u
//! living outside the cube max_j |ξ_j| ≤ N satisfies
//!
//! ```text
//! ‖u - P_N u‖_{L²} ≤ (1 + (N+1)²)^{-1/2} ‖u‖_{H¹}
//! ```
//!
//! For the Euclidean ball the factor (N+1)² must be replaced by the first
//! level outside the ball, which is N² + 1 once n ≥ 2.
//!
//! An H¹-bounded family therefore has uniformly small tails, and what is left
//! is a bounded set in a finite-dimensional space. [`rellich_extract`] turns
//! that into an explicit cluster of pairwise ε-close items.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{first_level_outside, NormKind};
use crate::operators::{l2_distance, l2_norm, sobolev_norm, sobolev_norm_sq, SobolevOrder};
use crate::transform::SpectralField;

/// Slack used when comparing the two sides of the tail bound.
pub const TAIL_BOUND_SLACK: f64 = 1e-12;

/// P_N c: the coefficients on max_j |ξ_j| ≤ N.
pub fn ball_projection(c: &SpectralField, radius: u64) -> SpectralField {
    ball_projection_with(c, radius, NormKind::Sup)
}

pub fn ball_projection_with(c: &SpectralField, radius: u64, kind: NormKind) -> SpectralField {
    c.mask(|xi| kind.contains(xi, radius))
}

/// c - P_N c.
pub fn tail_projection(c: &SpectralField, radius: u64) -> SpectralField {
    tail_projection_with(c, radius, NormKind::Sup)
}

pub fn tail_projection_with(c: &SpectralField, radius: u64, kind: NormKind) -> SpectralField {
    c.mask(|xi| !kind.contains(xi, radius))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub truncation: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Compares ‖c - P_N c‖ with √(‖c‖²_{H¹} / (1 + (N+1)²)).
pub fn tail_bound_check(c: &SpectralField, radius: u64) -> TailBound {
    tail_bound_check_with(c, radius, NormKind::Sup)
}

/// Same comparison with (N+1)² replaced by the first level outside the
/// chosen truncation region.
pub fn tail_bound_check_with(c: &SpectralField, radius: u64, kind: NormKind) -> TailBound {
    let lhs = l2_norm(&tail_projection_with(c, radius, kind));
    let gap = first_level_outside(c.grid().dimension(), radius, kind) as f64;
    let rhs = (sobolev_norm_sq(c, SobolevOrder::H1) / (1.0 + gap)).sqrt();
    TailBound {
        truncation: radius,
        lhs,
        rhs,
        holds: lhs <= rhs + TAIL_BOUND_SLACK,
    }
}

/// Fields on a shared grid, all inside the H¹ ball of radius `h1_bound`.
#[derive(Debug, Clone)]
pub struct BoundedSequence {
    items: Vec<SpectralField>,
    h1_bound: f64,
}

impl BoundedSequence {
    /// Checks every item against `h1_bound` instead of trusting it.
    pub fn new(items: Vec<SpectralField>, h1_bound: f64) -> Result<Self> {
        if !(h1_bound.is_finite() && h1_bound > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "h1 bound must be positive and finite, got {h1_bound}"
            )));
        }
        let first = items
            .first()
            .ok_or_else(|| Error::InvalidArgument("sequence is empty".into()))?;
        let grid = *first.grid();
        for (i, item) in items.iter().enumerate() {
            if *item.grid() != grid {
                return Err(Error::GridMismatch);
            }
            let norm = sobolev_norm(item, SobolevOrder::H1);
            if norm > h1_bound * (1.0 + 1e-12) {
                return Err(Error::InvalidArgument(format!(
                    "item {i} has H1 norm {norm}, above the bound {h1_bound}"
                )));
            }
        }
        Ok(Self { items, h1_bound })
    }

    /// Uses the largest H¹ norm in the sequence as the bound.
    pub fn with_computed_bound(items: Vec<SpectralField>) -> Result<Self> {
        let bound = items
            .iter()
            .map(|c| sobolev_norm(c, SobolevOrder::H1))
            .fold(0.0, f64::max);
        if bound == 0.0 {
            // all-zero items: any positive bound works
            return Self::new(items, 1.0);
        }
        Self::new(items, bound)
    }

    pub fn items(&self) -> &[SpectralField] {
        &self.items
    }

    pub fn h1_bound(&self) -> f64 {
        self.h1_bound
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Outcome of [`rellich_extract`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    /// Increasing indices of the selected items.
    pub indices: Vec<usize>,
    /// Ball radius N used to split head and tail.
    pub truncation: u64,
    /// Number of clusters the greedy net needed.
    pub cluster_count: usize,
}

/// Smallest N with 2·bound/√(1 + (N+1)²) ≤ ε/2.
pub fn required_truncation(h1_bound: f64, epsilon: f64) -> u64 {
    let ratio = 4.0 * h1_bound / epsilon;
    let satisfied = |n: u64| {
        let next = (n + 1) as f64;
        2.0 * h1_bound / (1.0 + next * next).sqrt() <= epsilon / 2.0
    };
    let target = (ratio * ratio - 1.0).max(0.0).sqrt();
    let mut n = (target.ceil() as u64).saturating_sub(1);
    while n > 0 && satisfied(n - 1) {
        n -= 1;
    }
    while !satisfied(n) {
        n += 1;
    }
    n
}

/// Picks a subsequence whose members are pairwise within ε in L².
///
/// Tails beyond the ball of radius N (chosen by [`required_truncation`])
/// differ by at most ε/2 for any two items. The ball parts are grouped by
/// greedy leader clustering in storage order: an item joins the first
/// cluster whose leader is within ε/4, otherwise it leads a new cluster.
/// Each cluster has head diameter ≤ ε/2, and because head and tail are
/// orthogonal, members are within √((ε/2)² + (ε/2)²) < ε of each other.
/// The largest cluster (earliest on ties) is returned.
pub fn rellich_extract(seq: &BoundedSequence, epsilon: f64) -> Result<Extraction> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    let grid = *seq.items[0].grid();
    let truncation = required_truncation(seq.h1_bound, epsilon);
    if truncation > grid.radius() as u64 {
        return Err(Error::InsufficientResolution {
            required: truncation,
            available: grid.radius(),
        });
    }

    let heads: Vec<SpectralField> = seq
        .items
        .iter()
        .map(|c| ball_projection(c, truncation))
        .collect();
    let join_radius = epsilon / 4.0;
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, head) in heads.iter().enumerate() {
        let mut placed = false;
        for cluster in clusters.iter_mut() {
            if l2_distance(&heads[cluster[0]], head)? <= join_radius {
                cluster.push(i);
                placed = true;
                break;
            }
        }
        if !placed {
            clusters.push(vec![i]);
        }
    }

    let mut best = 0;
    for (k, cluster) in clusters.iter().enumerate() {
        if cluster.len() > clusters[best].len() {
            best = k;
        }
    }
    Ok(Extraction {
        indices: clusters[best].clone(),
        truncation,
        cluster_count: clusters.len(),
    })
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::transform::TorusGrid;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn tail_projection_examples() {
        let g = TorusGrid::new(2, 7).unwrap();
        let mut c = SpectralField::zeros(g);
        c.set(&[1, 1], one()).unwrap();
        c.set(&[-3, 2], Complex64::new(0.5, 0.5)).unwrap();
        assert!(tail_projection(&c, 5)
            .coefficients()
            .iter()
            .all(|v| v.norm() == 0.0));

        let d = SpectralField::delta(g, &[0, 0], one()).unwrap();
        assert_eq!(l2_norm(&tail_projection(&d, 0)), 0.0);

        let e = SpectralField::delta(g, &[1, 1], one()).unwrap();
        assert_eq!(tail_projection_with(&e, 1, NormKind::Euclidean), e);
        assert_eq!(l2_norm(&tail_projection(&e, 1)), 0.0);
    }

    #[test]
    fn euclidean_tail_needs_the_sharper_gap() {
        // (1,1) is outside the unit Euclidean ball but has |ξ|² = 2 < (1+1)²,
        // so the cube constant would be violated; the first-level constant is not.
        let g = TorusGrid::new(2, 7).unwrap();
        let c = SpectralField::delta(g, &[1, 1], one()).unwrap();
        let lhs = l2_norm(&tail_projection_with(&c, 1, NormKind::Euclidean));
        let cube_rhs = (sobolev_norm_sq(&c, SobolevOrder::H1) / 5.0).sqrt();
        assert!(lhs > cube_rhs);
        let b = tail_bound_check_with(&c, 1, NormKind::Euclidean);
        assert!(b.holds);
        assert!((b.rhs - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tail_bound_two_modes() {
        let g = TorusGrid::new(2, 7).unwrap();
        let mut c = SpectralField::delta(g, &[1, 0], one()).unwrap();
        c.set(&[0, 2], one()).unwrap();
        let b = tail_bound_check(&c, 1);
        assert_eq!(b.lhs, 1.0);
        assert!((b.rhs - (7.0f64 / 5.0).sqrt()).abs() < 1e-15);
        assert!(b.holds);

        let inside = tail_bound_check(&SpectralField::delta(g, &[1, 0], one()).unwrap(), 1);
        assert_eq!(inside.lhs, 0.0);
        assert!(inside.holds);
    }

    #[test]
    fn required_truncation_is_minimal() {
        for &(bound, eps) in &[(1.0, 0.5), (1.0, 2.0), (3.0, 0.1), (1.0, 100.0), (0.5, 0.3)] {
            let n = required_truncation(bound, eps);
            let ok = |n: u64| 2.0 * bound / (1.0 + ((n + 1) as f64).powi(2)).sqrt() <= eps / 2.0;
            assert!(ok(n));
            assert!(n == 0 || !ok(n - 1));
        }
        assert_eq!(required_truncation(1.0, 0.5), 7);
    }

    #[test]
    fn constant_sequence_is_one_cluster() {
        let g = TorusGrid::new(1, 17).unwrap();
        let item = SpectralField::delta(g, &[2], Complex64::new(0.2, 0.0)).unwrap();
        let seq = BoundedSequence::new(vec![item; 5], 1.0).unwrap();
        let ex = rellich_extract(&seq, 0.5).unwrap();
        assert_eq!(ex.indices, vec![0, 1, 2, 3, 4]);
        assert_eq!(ex.cluster_count, 1);
    }

    #[test]
    fn distinct_unit_modes_only_cluster_with_repeats() {
        // unit modes of H1 norm ≤ 1 would need |ξ| = 0; scale them instead
        let g = TorusGrid::new(1, 41).unwrap();
        let mode = |k: i64| SpectralField::delta(g, &[k], one()).unwrap();
        let items = vec![mode(0), mode(1), mode(2), mode(1), mode(3), mode(1)];
        let seq = BoundedSequence::with_computed_bound(items).unwrap();
        // bound √10; ε = 1.3 < √2 keeps distinct modes apart, needs N = 9
        let ex = rellich_extract(&seq, 1.3).unwrap();
        assert_eq!(ex.indices, vec![1, 3, 5]);
    }

    #[test]
    fn insufficient_resolution_names_required_truncation() {
        let g = TorusGrid::new(1, 9).unwrap();
        let seq = BoundedSequence::new(vec![SpectralField::zeros(g)], 1.0).unwrap();
        match rellich_extract(&seq, 0.5) {
            Err(Error::InsufficientResolution {
                required,
                available,
            }) => {
                assert_eq!(required, 7);
                assert_eq!(available, 4);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bound_is_checked_on_construction() {
        let g = TorusGrid::new(1, 9).unwrap();
        let big = SpectralField::delta(g, &[3], one()).unwrap();
        assert!(BoundedSequence::new(vec![big.clone()], 1.0).is_err());
        assert!(BoundedSequence::new(vec![], 1.0).is_err());
        assert!(BoundedSequence::new(vec![big.clone()], -1.0).is_err());
        let other = SpectralField::zeros(TorusGrid::new(1, 11).unwrap());
        assert!(matches!(
            BoundedSequence::new(vec![big, other], 10.0),
            Err(Error::GridMismatch)
        ));
    }
}
