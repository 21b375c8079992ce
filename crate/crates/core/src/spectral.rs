//! Spectra of Δ and T = (Δ + 1)^{-1}, the finite-rank truncation error, and
//! an operator-norm estimator that does not rely on the multiplier being
//! diagonal.
//!
//! The eigenfunctions of both operators are the plane waves e^{iξ·x}; Δ has
//! eigenvalue k = |ξ|² with multiplicity r_n(k) and T has 1/(1 + k). Since
//! those eigenvalues accumulate only at 0, T is the operator-norm limit of
//! the finite-rank T_N, with ‖T - T_N‖ = 1/((N+1)² + 1) attained at
//! ξ = (N+1, 0, …, 0) when T_N keeps the cube max_j |ξ_j| ≤ N.
//!
//! If T_N keeps the Euclidean ball instead, the first excluded level in
//! n ≥ 2 dimensions is N² + 1 (at (N, 1, 0, …)), so the norm is
//! 1/(N² + 2). [`truncation_error_exact_for`] covers both cases.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{first_level_outside, levels_up_to, norm_sq, NormKind};
use crate::operators::{resolvent, MultiplierSymbol};
use crate::sampling;
use crate::transform::{FourierTransform, GridField, SpectralField, TorusGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Laplacian,
    Resolvent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumLevel {
    pub eigenvalue: f64,
    pub multiplicity: u64,
}

/// Eigenvalue levels with lattice multiplicities up to a level cap K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub operator: OperatorKind,
    pub levels: Vec<SpectrumLevel>,
    pub truncation: u64,
}

impl SpectrumReport {
    /// Header `eigenvalue,multiplicity`, one row per level.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eigenvalue,multiplicity\n");
        for level in &self.levels {
            let _ = writeln!(out, "{},{}", level.eigenvalue, level.multiplicity);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    /// Eigenvalues repeated by multiplicity.
    pub fn flattened(&self) -> Vec<f64> {
        self.levels
            .iter()
            .flat_map(|l| std::iter::repeat_n(l.eigenvalue, l.multiplicity as usize))
            .collect()
    }
}

/// Δ-eigenvalues k ≤ cap in increasing order.
pub fn laplacian_spectrum(dimension: usize, cap: u64) -> Result<SpectrumReport> {
    if dimension == 0 {
        return Err(Error::ZeroDimension);
    }
    let levels = levels_up_to(dimension, cap)
        .into_iter()
        .map(|(k, multiplicity)| SpectrumLevel {
            eigenvalue: k as f64,
            multiplicity,
        })
        .collect();
    Ok(SpectrumReport {
        operator: OperatorKind::Laplacian,
        levels,
        truncation: cap,
    })
}

/// T-eigenvalues 1/(1+k) for the same levels, hence decreasing.
pub fn resolvent_spectrum(dimension: usize, cap: u64) -> Result<SpectrumReport> {
    if dimension == 0 {
        return Err(Error::ZeroDimension);
    }
    let levels = levels_up_to(dimension, cap)
        .into_iter()
        .map(|(k, multiplicity)| SpectrumLevel {
            eigenvalue: 1.0 / (1.0 + k as f64),
            multiplicity,
        })
        .collect();
    Ok(SpectrumReport {
        operator: OperatorKind::Resolvent,
        levels,
        truncation: cap,
    })
}

/// ‖T - T_N‖ = 1/((N+1)² + 1) for the sup-norm truncation.
pub fn truncation_error_exact(radius: u64) -> f64 {
    let next = (radius + 1) as f64;
    1.0 / (next * next + 1.0)
}

/// ‖T - T_N‖ = 1/(1 + k*) where k* is the smallest |ξ|² outside the
/// truncation region.
pub fn truncation_error_exact_for(dimension: usize, radius: u64, kind: NormKind) -> f64 {
    1.0 / (1.0 + first_level_outside(dimension, radius, kind) as f64)
}

/// Result of [`operator_norm_power_iteration`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub norm: f64,
    pub iterations: usize,
}

/// Estimates the ℓ² operator norm of the multiplier `symbol` on `grid`.
///
/// Runs power iteration on A*A where A = F^{-1} σ F acts on grid fields, so
/// every step goes through a forward and an inverse transform. The start
/// vector is seeded noise and has (almost surely) every mode in its support.
///
/// Stops once the residual r = A*A v - θ v satisfies ‖r‖ ≤ tol·√θ, which
/// places √θ within `tol` of a singular value of A.
pub fn operator_norm_power_iteration(
    symbol: &MultiplierSymbol,
    grid: TorusGrid,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<NormEstimate> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let transform = FourierTransform::new(grid);
    let table = symbol.table(&grid)?;
    let apply = |u: &GridField| -> Result<GridField> {
        let c = transform.forward(u)?;
        let scaled: Vec<Complex64> = c
            .coefficients()
            .iter()
            .zip(&table)
            .map(|(v, s)| v * s)
            .collect();
        transform.inverse(&SpectralField::new(grid, scaled)?)
    };
    let adjoint_apply = |u: &GridField| -> Result<GridField> {
        // σ is real, so A* = F^{-1} conj(σ) F = A.
        apply(u)
    };

    let mut v = sampling::random_grid_field(grid, &mut sampling::rng(seed));
    normalize(&mut v);
    let mut estimate = 0.0;
    for iteration in 1..=max_iter {
        let av = apply(&v)?;
        let theta = av.l2_norm().powi(2);
        if theta == 0.0 {
            return Ok(NormEstimate {
                norm: 0.0,
                iterations: iteration,
            });
        }
        estimate = theta.sqrt();
        let mut next = adjoint_apply(&av)?;
        let residual = next.axpby(Complex64::new(1.0, 0.0), &v, Complex64::new(-theta, 0.0))?;
        if residual.l2_norm() <= tol * estimate {
            return Ok(NormEstimate {
                norm: estimate,
                iterations: iteration,
            });
        }
        normalize(&mut next);
        v = next;
    }
    Err(Error::PowerIterationNotConverged {
        iterations: max_iter,
        estimate,
        last_iterate: Box::new(v),
    })
}

fn normalize(u: &mut GridField) {
    let norm = u.l2_norm();
    if norm > 0.0 {
        for value in u.values_mut() {
            *value /= norm;
        }
    }
}

/// Power-iteration estimate of ‖T - T_N‖ on `grid`.
///
/// The box must strictly contain the shell |ξ| = N + 1 or the discrete
/// supremum undershoots, so radius N + 2 is required.
pub fn truncation_error_power_iteration(
    grid: TorusGrid,
    radius: u64,
    kind: NormKind,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<NormEstimate> {
    let required = radius as usize + 2;
    if grid.radius() < required {
        return Err(Error::BoxTooSmall {
            required,
            available: grid.radius(),
        });
    }
    operator_norm_power_iteration(
        &MultiplierSymbol::resolvent_tail_with(radius, kind),
        grid,
        tol,
        max_iter,
        seed,
    )
}

/// The `count` largest |σ(ξ)| over the box, with multiplicity, descending.
pub fn singular_values(
    symbol: &MultiplierSymbol,
    grid: TorusGrid,
    count: usize,
) -> Result<Vec<f64>> {
    if count > grid.len() {
        return Err(Error::InvalidArgument(format!(
            "asked for {count} singular values, box holds {}",
            grid.len()
        )));
    }
    let mut values: Vec<f64> = symbol.table(&grid)?.into_iter().map(f64::abs).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values.truncate(count);
    Ok(values)
}

/// λ = (1 + μ)/μ, the T-eigenvalue matching eigenvalue μ of (T - id)^{-1}.
pub fn mu_to_lambda(mu: f64) -> Result<f64> {
    if mu == 0.0 {
        return Err(Error::Domain("mu = 0 has no matching resolvent eigenvalue"));
    }
    Ok((1.0 + mu) / mu)
}

/// μ = 1/(λ - 1). λ = 1 is the constant mode, where T - id is singular.
pub fn lambda_to_mu(lambda: f64) -> Result<f64> {
    if lambda == 1.0 {
        return Err(Error::Domain(
            "lambda = 1 (constant mode): T - id is not invertible there",
        ));
    }
    Ok(1.0 / (lambda - 1.0))
}

/// ‖Tψ_ξ - (1+|ξ|²)^{-1} ψ_ξ‖ with T applied through the transform pipeline.
pub fn verify_eigenpair(xi: &[i64], grid: TorusGrid) -> Result<f64> {
    let psi = GridField::plane_wave(grid, xi)?;
    let transform = FourierTransform::new(grid);
    let t_psi = transform.inverse(&resolvent(&transform.forward(&psi)?)?)?;
    let lambda = 1.0 / (1.0 + norm_sq(xi) as f64);
    let residual = t_psi.axpby(Complex64::new(1.0, 0.0), &psi, Complex64::new(-lambda, 0.0))?;
    Ok(residual.l2_norm())
}
