//! The integer frequency lattice Z^n.
//!
//! Everything here is a plain scan over an integer box. Level multiplicities
//! (the number of lattice points on the sphere |ξ|² = k) are discovered by
//! counting, never from a closed form, so gaps such as k = 7 in two
//! dimensions show up simply because nothing lands there.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An integer multi-index ξ ∈ Z^n labelling the Fourier mode e^{iξ·x}.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Frequency(Vec<i64>);

impl Frequency {
    pub fn new(components: Vec<i64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::ZeroDimension);
        }
        Ok(Self(components))
    }

    pub fn zero(dimension: usize) -> Result<Self> {
        Self::new(vec![0; dimension])
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[i64] {
        &self.0
    }

    pub fn norm_sq(&self) -> u64 {
        norm_sq(&self.0)
    }
}

impl Deref for Frequency {
    type Target = [i64];

    fn deref(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// |ξ|² = Σ ξ_j².
pub fn norm_sq(xi: &[i64]) -> u64 {
    xi.iter()
        .map(|&c| c.unsigned_abs() * c.unsigned_abs())
        .sum()
}

/// Euclidean membership |ξ| ≤ radius, decided in integer arithmetic.
pub fn in_ball(xi: &[i64], radius: u64) -> bool {
    norm_sq(xi) <= radius * radius
}

/// Sup-norm membership max_j |ξ_j| ≤ radius.
pub fn in_cube(xi: &[i64], radius: u64) -> bool {
    xi.iter().all(|c| c.unsigned_abs() <= radius)
}

/// Which norm |ξ| ≤ N refers to when truncating.
///
/// Only the sup norm guarantees that every ξ outside the region has
/// |ξ|² ≥ (N+1)². Outside the Euclidean ball in n ≥ 2 dimensions the
/// smallest level is N² + 1, reached at (N, 1, 0, …).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Euclidean,
    #[default]
    Sup,
}

impl NormKind {
    pub fn contains(self, xi: &[i64], radius: u64) -> bool {
        match self {
            NormKind::Euclidean => in_ball(xi, radius),
            NormKind::Sup => in_cube(xi, radius),
        }
    }
}

/// min |ξ|² over ξ ∈ Z^n lying outside the region of radius N.
pub fn first_level_outside(dimension: usize, radius: u64, kind: NormKind) -> u64 {
    match kind {
        NormKind::Sup => (radius + 1) * (radius + 1),
        NormKind::Euclidean => {
            let mut k = radius * radius + 1;
            while level_multiplicity(dimension, k) == 0 {
                k += 1;
            }
            k
        }
    }
}

/// The closed ball {ξ ∈ Z^n : |ξ| ≤ radius} for the chosen norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeBall {
    pub dimension: usize,
    pub radius: u64,
    pub norm_kind: NormKind,
}

impl LatticeBall {
    pub fn new(dimension: usize, radius: u64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self {
            dimension,
            radius,
            norm_kind: NormKind::Euclidean,
        })
    }

    /// The cube max_j |ξ_j| ≤ radius.
    pub fn cube(dimension: usize, radius: u64) -> Result<Self> {
        Ok(Self {
            norm_kind: NormKind::Sup,
            ..Self::new(dimension, radius)?
        })
    }

    pub fn contains(&self, xi: &[i64]) -> bool {
        xi.len() == self.dimension && self.norm_kind.contains(xi, self.radius)
    }
}

/// Visits every point of the cube [-half_width, half_width]^n in
/// lexicographic order (first component slowest).
fn for_each_in_cube(dimension: usize, half_width: i64, mut visit: impl FnMut(&[i64])) {
    let mut point = vec![-half_width; dimension];
    loop {
        visit(&point);
        let mut axis = dimension;
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            if point[axis] < half_width {
                point[axis] += 1;
                break;
            }
            point[axis] = -half_width;
        }
    }
}

/// Smallest c with c² ≥ k.
fn ceil_sqrt(k: u64) -> u64 {
    let mut c = (k as f64).sqrt() as u64;
    while c * c < k {
        c += 1;
    }
    while c > 0 && (c - 1) * (c - 1) >= k {
        c -= 1;
    }
    c
}

/// All lattice points of the ball, sorted lexicographically.
pub fn enumerate_ball(ball: &LatticeBall) -> Result<Vec<Frequency>> {
    if ball.dimension == 0 {
        return Err(Error::ZeroDimension);
    }
    let mut out = Vec::new();
    for_each_in_cube(ball.dimension, ball.radius as i64, |xi| {
        if ball.norm_kind.contains(xi, ball.radius) {
            out.push(Frequency(xi.to_vec()));
        }
    });
    Ok(out)
}

/// r_n(k): how many ξ ∈ Z^n satisfy |ξ|² = k.
pub fn level_multiplicity(dimension: usize, level: u64) -> u64 {
    if dimension == 0 {
        return 0;
    }
    let half_width = ceil_sqrt(level) as i64;
    let mut count = 0;
    for_each_in_cube(dimension, half_width, |xi| {
        if norm_sq(xi) == level {
            count += 1;
        }
    });
    count
}

/// Every level k ≤ cap that is a sum of n squares, with its multiplicity,
/// in increasing order.
pub fn levels_up_to(dimension: usize, cap: u64) -> Vec<(u64, u64)> {
    if dimension == 0 {
        return Vec::new();
    }
    let half_width = ceil_sqrt(cap) as i64;
    let mut counts = BTreeMap::new();
    for_each_in_cube(dimension, half_width, |xi| {
        let k = norm_sq(xi);
        if k <= cap {
            *counts.entry(k).or_insert(0u64) += 1;
        }
    });
    counts.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn freqs(list: &[&[i64]]) -> Vec<Frequency> {
        list.iter().map(|c| Frequency(c.to_vec())).collect()
    }

    #[test]
    fn norm_sq_examples() {
        assert_eq!(norm_sq(&[0, 0]), 0);
        assert_eq!(norm_sq(&[1, 0]), 1);
        assert_eq!(norm_sq(&[2, -1, 2]), 9);
    }

    #[test]
    fn ball_examples() {
        let b = LatticeBall::new(1, 1).unwrap();
        assert_eq!(enumerate_ball(&b).unwrap(), freqs(&[&[-1], &[0], &[1]]));

        let b = LatticeBall::new(2, 1).unwrap();
        assert_eq!(
            enumerate_ball(&b).unwrap(),
            freqs(&[&[-1, 0], &[0, -1], &[0, 0], &[0, 1], &[1, 0]])
        );

        let b = LatticeBall::new(2, 2).unwrap();
        assert_eq!(enumerate_ball(&b).unwrap().len(), 13);
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(matches!(LatticeBall::new(0, 3), Err(Error::ZeroDimension)));
        let bad = LatticeBall {
            dimension: 0,
            radius: 1,
            norm_kind: NormKind::Euclidean,
        };
        assert!(enumerate_ball(&bad).is_err());
        assert!(Frequency::new(vec![]).is_err());
    }

    #[test]
    fn radius_zero_ball_is_origin() {
        let b = LatticeBall::new(3, 0).unwrap();
        assert_eq!(enumerate_ball(&b).unwrap(), freqs(&[&[0, 0, 0]]));
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(level_multiplicity(2, 0), 1);
        assert_eq!(level_multiplicity(2, 1), 4);
        assert_eq!(level_multiplicity(2, 5), 8);
        assert_eq!(level_multiplicity(2, 7), 0);
        assert_eq!(level_multiplicity(3, 7), 0);
        assert_eq!(level_multiplicity(1, 9), 2);
    }

    #[test]
    fn levels_examples() {
        assert_eq!(levels_up_to(1, 4), vec![(0, 1), (1, 2), (4, 2)]);
        assert_eq!(levels_up_to(2, 2), vec![(0, 1), (1, 4), (2, 4)]);
        assert_eq!(levels_up_to(3, 1), vec![(0, 1), (1, 6)]);
        assert!(levels_up_to(2, 10).iter().all(|&(k, _)| k != 7));
    }

    #[test]
    fn cube_enumeration() {
        let b = LatticeBall::cube(2, 1).unwrap();
        let pts = enumerate_ball(&b).unwrap();
        assert_eq!(pts.len(), 9);
        assert!(pts.contains(&Frequency(vec![1, 1])));
        assert!(!LatticeBall::new(2, 1).unwrap().contains(&[1, 1]));
        assert!(b.contains(&[1, -1]));
    }

    #[test]
    fn first_level_outside_examples() {
        assert_eq!(first_level_outside(1, 2, NormKind::Euclidean), 9);
        assert_eq!(first_level_outside(2, 2, NormKind::Euclidean), 5);
        assert_eq!(first_level_outside(3, 0, NormKind::Euclidean), 1);
        assert_eq!(first_level_outside(2, 2, NormKind::Sup), 9);
        for n in 2..=3 {
            for radius in 0..8u64 {
                assert_eq!(
                    first_level_outside(n, radius, NormKind::Euclidean),
                    radius * radius + 1
                );
            }
        }
    }

    #[test]
    fn ceil_sqrt_is_exact() {
        for k in 0..500u64 {
            let c = ceil_sqrt(k);
            assert!(c * c >= k);
            assert!(c == 0 || (c - 1) * (c - 1) < k);
        }
    }

    #[test]
    fn display_frequency() {
        assert_eq!(Frequency(vec![1, -2]).to_string(), "(1,-2)");
    }
}
