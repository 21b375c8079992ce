//! Diagonal Fourier multipliers and Sobolev norms.
//!
//! Δ here is the positive Laplacian -Σ ∂_j², whose symbol is |ξ|². With that
//! sign, Δ + 1 has symbol 1 + |ξ|² ≥ 1 and the resolvent T = (Δ + 1)^{-1}
//! acts by (1 + |ξ|²)^{-1}.
//!
//! Truncations T_N keep the frequencies with |ξ| ≤ N. By default |ξ| is the
//! sup norm, for which ‖T - T_N‖ = 1/((N+1)² + 1) in every dimension; the
//! Euclidean ball is available through the `_with` variants.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{norm_sq, NormKind};
use crate::transform::SpectralField;

type SymbolFn = dyn Fn(&[i64]) -> f64 + Send + Sync;

/// A real function of ξ defining the operator û(ξ) ↦ σ(ξ)û(ξ).
#[derive(Clone)]
pub struct MultiplierSymbol {
    name: String,
    eval: Arc<SymbolFn>,
}

impl fmt::Debug for MultiplierSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierSymbol")
            .field("name", &self.name)
            .finish()
    }
}

impl MultiplierSymbol {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(&[i64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn identity() -> Self {
        Self::new("identity", |_| 1.0)
    }

    /// |ξ|².
    pub fn laplacian() -> Self {
        Self::new("laplacian", |xi| norm_sq(xi) as f64)
    }

    /// 1 + |ξ|².
    pub fn shifted_laplacian() -> Self {
        Self::new("laplacian+1", |xi| 1.0 + norm_sq(xi) as f64)
    }

    /// (1 + |ξ|²)^{-1}.
    pub fn resolvent() -> Self {
        Self::new("resolvent", resolvent_weight)
    }

    /// (1 + |ξ|²)^{-1} on max_j |ξ_j| ≤ N, zero outside.
    pub fn truncated_resolvent(radius: u64) -> Self {
        Self::truncated_resolvent_with(radius, NormKind::Sup)
    }

    pub fn truncated_resolvent_with(radius: u64, kind: NormKind) -> Self {
        Self::new(
            format!("truncated_resolvent({radius},{kind:?})"),
            move |xi| {
                if kind.contains(xi, radius) {
                    resolvent_weight(xi)
                } else {
                    0.0
                }
            },
        )
    }

    /// Symbol of T - T_N: the resolvent restricted to |ξ| > N.
    pub fn resolvent_tail(radius: u64) -> Self {
        Self::resolvent_tail_with(radius, NormKind::Sup)
    }

    pub fn resolvent_tail_with(radius: u64, kind: NormKind) -> Self {
        Self::new(format!("resolvent_tail({radius},{kind:?})"), move |xi| {
            if kind.contains(xi, radius) {
                0.0
            } else {
                resolvent_weight(xi)
            }
        })
    }

    /// σ₁ - σ₂.
    pub fn difference(a: &Self, b: &Self) -> Self {
        let (fa, fb) = (a.eval.clone(), b.eval.clone());
        Self::new(format!("{}-{}", a.name, b.name), move |xi| fa(xi) - fb(xi))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, xi: &[i64]) -> f64 {
        (self.eval)(xi)
    }

    /// σ over every stored frequency, in storage order. Fails if any value
    /// is non-finite.
    pub fn table(&self, grid: &crate::transform::TorusGrid) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(grid.len());
        let mut bad = None;
        grid.for_each_frequency(|_, xi| {
            let v = self.eval(xi);
            if !v.is_finite() && bad.is_none() {
                bad = Some(xi.to_vec());
            }
            out.push(v);
        });
        match bad {
            Some(frequency) => Err(Error::NonFiniteSymbol {
                name: self.name.clone(),
                frequency,
            }),
            None => Ok(out),
        }
    }
}

fn resolvent_weight(xi: &[i64]) -> f64 {
    1.0 / (1.0 + norm_sq(xi) as f64)
}

/// Regularity exponent s of H^s. May be negative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SobolevOrder(pub f64);

impl SobolevOrder {
    pub const L2: SobolevOrder = SobolevOrder(0.0);
    pub const H1: SobolevOrder = SobolevOrder(1.0);
}

/// output(ξ) = σ(ξ)·c(ξ).
pub fn apply_multiplier(c: &SpectralField, symbol: &MultiplierSymbol) -> Result<SpectralField> {
    let mut out = Vec::with_capacity(c.coefficients().len());
    let mut bad = None;
    c.grid().for_each_frequency(|i, xi| {
        let s = symbol.eval(xi);
        if !s.is_finite() && bad.is_none() {
            bad = Some(xi.to_vec());
        }
        out.push(c.coefficients()[i] * s);
    });
    if let Some(frequency) = bad {
        return Err(Error::NonFiniteSymbol {
            name: symbol.name.clone(),
            frequency,
        });
    }
    SpectralField::new(*c.grid(), out)
}

pub fn laplacian(c: &SpectralField) -> Result<SpectralField> {
    apply_multiplier(c, &MultiplierSymbol::laplacian())
}

/// (Δ + 1)c.
pub fn shifted_laplacian(c: &SpectralField) -> Result<SpectralField> {
    apply_multiplier(c, &MultiplierSymbol::shifted_laplacian())
}

pub fn resolvent(c: &SpectralField) -> Result<SpectralField> {
    apply_multiplier(c, &MultiplierSymbol::resolvent())
}

/// T_N c: the resolvent on |ξ| ≤ N (sup norm), zero elsewhere.
pub fn truncated_resolvent(c: &SpectralField, radius: u64) -> Result<SpectralField> {
    apply_multiplier(c, &MultiplierSymbol::truncated_resolvent(radius))
}

pub fn truncated_resolvent_with(
    c: &SpectralField,
    radius: u64,
    kind: NormKind,
) -> Result<SpectralField> {
    apply_multiplier(c, &MultiplierSymbol::truncated_resolvent_with(radius, kind))
}

/// Σ_ξ (1 + |ξ|²)^s |c(ξ)|² over the stored box.
pub fn sobolev_norm_sq(c: &SpectralField, order: SobolevOrder) -> f64 {
    let mut sum = 0.0;
    c.grid().for_each_frequency(|i, xi| {
        let weight = if order.0 == 0.0 {
            1.0
        } else {
            (1.0 + norm_sq(xi) as f64).powf(order.0)
        };
        sum += weight * c.coefficients()[i].norm_sqr();
    });
    sum
}

pub fn sobolev_norm(c: &SpectralField, order: SobolevOrder) -> f64 {
    sobolev_norm_sq(c, order).sqrt()
}

pub fn l2_norm(c: &SpectralField) -> f64 {
    sobolev_norm_sq(c, SobolevOrder::L2).sqrt()
}

/// ℓ² distance between coefficient tables.
pub fn l2_distance(a: &SpectralField, b: &SpectralField) -> Result<f64> {
    Ok(l2_norm(&a.sub(b)?))
}

/// ξ^α û(ξ) for a multi-index α, i.e. the coefficients of D^α u with
/// D_j = (1/i)∂_j.
pub fn derivative(c: &SpectralField, alpha: &[u32]) -> Result<SpectralField> {
    if alpha.len() != c.grid().dimension() {
        return Err(Error::InvalidArgument(format!(
            "multi-index has {} entries, field dimension is {}",
            alpha.len(),
            c.grid().dimension()
        )));
    }
    let mut out = Vec::with_capacity(c.coefficients().len());
    c.grid().for_each_frequency(|i, xi| {
        let monomial: f64 = xi
            .iter()
            .zip(alpha)
            .map(|(&k, &a)| (k as f64).powi(a as i32))
            .product();
        out.push(c.coefficients()[i] * Complex64::new(monomial, 0.0));
    });
    SpectralField::new(*c.grid(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::TorusGrid;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    fn grid2() -> TorusGrid {
        TorusGrid::new(2, 7).unwrap()
    }

    #[test]
    fn identity_leaves_field_unchanged() {
        let c = SpectralField::delta(grid2(), &[1, -2], Complex64::new(0.3, -0.7)).unwrap();
        assert_eq!(
            apply_multiplier(&c, &MultiplierSymbol::identity()).unwrap(),
            c
        );
    }

    #[test]
    fn builtin_symbol_values() {
        let c = SpectralField::delta(grid2(), &[1, 0], one()).unwrap();
        assert_eq!(laplacian(&c).unwrap().get(&[1, 0]), Some(one()));

        let c = SpectralField::delta(grid2(), &[2, 0], one()).unwrap();
        let r = resolvent(&c).unwrap().get(&[2, 0]).unwrap();
        assert!((r.re - 0.2).abs() < 1e-16 && r.im == 0.0);
    }

    #[test]
    fn constant_mode() {
        let c = SpectralField::delta(grid2(), &[0, 0], one()).unwrap();
        assert!(laplacian(&c)
            .unwrap()
            .coefficients()
            .iter()
            .all(|v| v.norm() == 0.0));
        assert_eq!(resolvent(&c).unwrap(), c);
    }

    #[test]
    fn truncation_examples() {
        let g = grid2();
        let mut c = SpectralField::zeros(g);
        c.set(&[0, 0], Complex64::new(2.0, 1.0)).unwrap();
        c.set(&[1, 0], one()).unwrap();
        let t0 = truncated_resolvent(&c, 0).unwrap();
        assert_eq!(t0.get(&[0, 0]), Some(Complex64::new(2.0, 1.0)));
        assert_eq!(t0.get(&[1, 0]), Some(Complex64::new(0.0, 0.0)));

        assert_eq!(truncated_resolvent(&c, 3).unwrap(), resolvent(&c).unwrap());
        // radius 5 ≥ √(3²+3²) covers the whole 7×7 box
        assert_eq!(
            truncated_resolvent_with(&c, 5, NormKind::Euclidean).unwrap(),
            resolvent(&c).unwrap()
        );

        let d = SpectralField::delta(g, &[1, 1], one()).unwrap();
        assert!(truncated_resolvent_with(&d, 1, NormKind::Euclidean)
            .unwrap()
            .coefficients()
            .iter()
            .all(|v| v.norm() == 0.0));
        // (1,1) sits on the boundary of the unit cube
        let kept = truncated_resolvent(&d, 1).unwrap().get(&[1, 1]).unwrap();
        assert!((kept.re - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn sobolev_examples() {
        let g = grid2();
        let c = SpectralField::delta(g, &[1, 0], one()).unwrap();
        assert_eq!(sobolev_norm_sq(&c, SobolevOrder::H1), 2.0);

        let mut c2 = c.clone();
        c2.set(&[0, 2], one()).unwrap();
        assert_eq!(sobolev_norm_sq(&c2, SobolevOrder::H1), 7.0);
        assert_eq!(l2_norm(&SpectralField::zeros(g)), 0.0);
        assert_eq!(l2_norm(&c), 1.0);
    }

    #[test]
    fn non_finite_symbol_rejected() {
        let c = SpectralField::zeros(grid2());
        let inv_lap = MultiplierSymbol::new("inverse laplacian", |xi| 1.0 / norm_sq(xi) as f64);
        assert!(matches!(
            apply_multiplier(&c, &inv_lap),
            Err(Error::NonFiniteSymbol { .. })
        ));
        assert!(inv_lap.table(c.grid()).is_err());
    }

    #[test]
    fn derivative_of_plane_wave() {
        let g = grid2();
        let c = SpectralField::delta(g, &[2, -3], one()).unwrap();
        let d = derivative(&c, &[1, 2]).unwrap();
        assert_eq!(d.get(&[2, -3]), Some(Complex64::new(18.0, 0.0)));
        assert!(derivative(&c, &[1]).is_err());
    }

    #[test]
    fn tail_and_truncation_split_resolvent() {
        let g = grid2();
        let full = MultiplierSymbol::resolvent();
        for kind in [NormKind::Sup, NormKind::Euclidean] {
            let tail = MultiplierSymbol::resolvent_tail_with(2, kind);
            let trunc = MultiplierSymbol::truncated_resolvent_with(2, kind);
            g.for_each_frequency(|_, xi| {
                assert_eq!(tail.eval(xi) + trunc.eval(xi), full.eval(xi));
            });
        }
        let tail = MultiplierSymbol::resolvent_tail(2);
        let trunc = MultiplierSymbol::truncated_resolvent(2);
        let diff = MultiplierSymbol::difference(&full, &trunc);
        g.for_each_frequency(|_, xi| assert_eq!(diff.eval(xi), tail.eval(xi)));
    }
}
