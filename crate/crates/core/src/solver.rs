//! Solving (Δ + 1)u = f on the torus.
//!
//! The direct route applies the resolvent multiplier. Conjugate gradient is
//! kept as an independent check: it only ever sees the grid-side operator
//! u ↦ F^{-1}(|ξ|² F u) + u and never divides by a symbol.

use std::fmt::Write as _;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{laplacian, resolvent};
use crate::sampling;
use crate::transform::{FourierTransform, GridField, TorusGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Multiplier,
    Cg,
}

impl SolveMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveMethod::Multiplier => "multiplier",
            SolveMethod::Cg => "cg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// ‖(Δ+1)u - f‖ in L².
    pub residual_l2: f64,
    pub method: SolveMethod,
    pub iterations: usize,
    pub wall_time: f64,
}

/// u ↦ (Δ + 1)u on grid fields.
pub fn apply_shifted_laplacian(transform: &FourierTransform, u: &GridField) -> Result<GridField> {
    let lap = transform.inverse(&laplacian(&transform.forward(u)?)?)?;
    lap.axpby(Complex64::new(1.0, 0.0), u, Complex64::new(1.0, 0.0))
}

fn residual_l2(transform: &FourierTransform, u: &GridField, f: &GridField) -> Result<f64> {
    let au = apply_shifted_laplacian(transform, u)?;
    au.l2_distance(f)
}

/// u = T f, computed as inverse ∘ (1+|ξ|²)^{-1} ∘ forward.
pub fn solve_multiplier(f: &GridField) -> Result<(GridField, SolveReport)> {
    let transform = FourierTransform::new(*f.grid());
    let start = Instant::now();
    let u = transform.inverse(&resolvent(&transform.forward(f)?)?)?;
    let wall_time = start.elapsed().as_secs_f64();
    let report = SolveReport {
        residual_l2: residual_l2(&transform, &u, f)?,
        method: SolveMethod::Multiplier,
        iterations: 0,
        wall_time,
    };
    Ok((u, report))
}

fn dot(a: &GridField, b: &GridField) -> Complex64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| x.conj() * y)
        .sum()
}

/// Unpreconditioned CG from u₀ = 0; stops when ‖r‖ ≤ tol·‖f‖.
pub fn solve_cg(f: &GridField, tol: f64, max_iter: usize) -> Result<(GridField, SolveReport)> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let grid = *f.grid();
    let transform = FourierTransform::new(grid);
    let start = Instant::now();

    let one = Complex64::new(1.0, 0.0);
    let f_norm = f.l2_norm();
    let mut u = GridField::zeros(grid);
    let mut r = f.clone();
    let mut p = r.clone();
    let mut rr = dot(&r, &r).re;
    let target = tol * f_norm;
    let mut iterations = 0;

    while r.l2_norm() > target {
        if iterations == max_iter {
            return Err(Error::CgNotConverged {
                iterations,
                residual: r.l2_norm(),
                last_iterate: Box::new(u),
            });
        }
        iterations += 1;
        let ap = apply_shifted_laplacian(&transform, &p)?;
        let alpha = rr / dot(&p, &ap).re;
        u = u.axpby(one, &p, Complex64::new(alpha, 0.0))?;
        r = r.axpby(one, &ap, Complex64::new(-alpha, 0.0))?;
        let rr_next = dot(&r, &r).re;
        let beta = rr_next / rr;
        rr = rr_next;
        p = r.axpby(one, &p, Complex64::new(beta, 0.0))?;
    }
    let wall_time = start.elapsed().as_secs_f64();
    let report = SolveReport {
        residual_l2: residual_l2(&transform, &u, f)?,
        method: SolveMethod::Cg,
        iterations,
        wall_time,
    };
    Ok((u, report))
}

/// Tolerance the benchmark hands to CG.
pub const BENCH_CG_TOL: f64 = 1e-12;
pub const BENCH_CG_MAX_ITER: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: SolveMethod,
    pub n: usize,
    #[serde(rename = "M")]
    pub points: usize,
    pub seed: u64,
    pub median_seconds: f64,
    pub residual_l2: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
    /// L² distance between the two methods' solutions.
    pub solution_difference: f64,
}

pub const BENCH_CSV_HEADER: &str = "method,n,M,seed,median_seconds,residual_l2,iterations";

impl BenchTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{BENCH_CSV_HEADER}\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                row.method.as_str(),
                row.n,
                row.points,
                row.seed,
                row.median_seconds,
                row.residual_l2,
                row.iterations
            );
        }
        out
    }
}

fn median(mut samples: Vec<f64>) -> f64 {
    samples.sort_by(f64::total_cmp);
    let mid = samples.len() / 2;
    if samples.len() % 2 == 1 {
        samples[mid]
    } else {
        0.5 * (samples[mid - 1] + samples[mid])
    }
}

/// Times both solvers on the same seeded right-hand side.
pub fn bench(dimension: usize, points: usize, repetitions: usize, seed: u64) -> Result<BenchTable> {
    if repetitions == 0 {
        return Err(Error::InvalidArgument(
            "repetitions must be at least 1".into(),
        ));
    }
    let grid = TorusGrid::new(dimension, points)?;
    let f = sampling::random_grid_field(grid, &mut sampling::rng(seed));

    let mut direct_times = Vec::with_capacity(repetitions);
    let mut direct = None;
    for _ in 0..repetitions {
        let (u, report) = solve_multiplier(&f)?;
        direct_times.push(report.wall_time);
        direct = Some((u, report));
    }
    let mut cg_times = Vec::with_capacity(repetitions);
    let mut cg = None;
    for _ in 0..repetitions {
        let (u, report) = solve_cg(&f, BENCH_CG_TOL, BENCH_CG_MAX_ITER)?;
        cg_times.push(report.wall_time);
        cg = Some((u, report));
    }
    let (u_direct, direct_report) = direct.expect("repetitions ≥ 1");
    let (u_cg, cg_report) = cg.expect("repetitions ≥ 1");

    let row = |report: &SolveReport, times: Vec<f64>| BenchRow {
        method: report.method,
        n: dimension,
        points,
        seed,
        median_seconds: median(times),
        residual_l2: report.residual_l2,
        iterations: report.iterations,
    };
    Ok(BenchTable {
        rows: vec![row(&direct_report, direct_times), row(&cg_report, cg_times)],
        solution_difference: u_direct.l2_distance(&u_cg)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_right_hand_side() {
        let g = TorusGrid::new(2, 5).unwrap();
        let f = GridField::new(g, vec![Complex64::new(1.0, 0.0); 25]).unwrap();
        let (u, report) = solve_multiplier(&f).unwrap();
        assert!(u.max_abs_diff(&f).unwrap() < 1e-15);
        assert_eq!(report.iterations, 0);

        let (u, report) = solve_cg(&f, 1e-12, 10).unwrap();
        assert!(u.max_abs_diff(&f).unwrap() < 1e-14);
        assert_eq!(report.iterations, 1);
    }

    #[test]
    fn plane_wave_right_hand_sides() {
        let g = TorusGrid::new(2, 9).unwrap();
        let wave = GridField::plane_wave(g, &[0, 2]).unwrap();
        let f = wave
            .axpby(Complex64::new(5.0, 0.0), &wave, Complex64::new(0.0, 0.0))
            .unwrap();
        let (u, _) = solve_multiplier(&f).unwrap();
        assert!(u.max_abs_diff(&wave).unwrap() < 1e-14);
        let (u, report) = solve_cg(&f, 1e-12, 10).unwrap();
        assert!(u.max_abs_diff(&wave).unwrap() < 1e-13);
        assert_eq!(report.iterations, 1);

        let g1 = TorusGrid::new(1, 7).unwrap();
        let f = GridField::from_fn(g1, |x| Complex64::new(2.0 * x[0].sin(), 0.0)).unwrap();
        let sine = GridField::from_fn(g1, |x| Complex64::new(x[0].sin(), 0.0)).unwrap();
        let (u, _) = solve_multiplier(&f).unwrap();
        assert!(u.max_abs_diff(&sine).unwrap() < 1e-15);
    }

    #[test]
    fn high_mode_is_one_cg_step() {
        let g = TorusGrid::new(2, 9).unwrap();
        let f = GridField::plane_wave(g, &[4, -4]).unwrap();
        let (_, report) = solve_cg(&f, 1e-12, 10).unwrap();
        assert_eq!(report.iterations, 1);
    }

    #[test]
    fn zero_right_hand_side() {
        let g = TorusGrid::new(1, 5).unwrap();
        let (u, report) = solve_cg(&GridField::zeros(g), 1e-10, 5).unwrap();
        assert_eq!(report.iterations, 0);
        assert_eq!(u.l2_norm(), 0.0);
    }

    #[test]
    fn cg_reports_non_convergence() {
        let g = TorusGrid::new(2, 9).unwrap();
        let f = sampling::random_grid_field(g, &mut sampling::rng(4));
        match solve_cg(&f, 1e-12, 2) {
            Err(Error::CgNotConverged {
                iterations,
                last_iterate,
                ..
            }) => {
                assert_eq!(iterations, 2);
                assert!(last_iterate.l2_norm() > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(solve_cg(&f, 0.0, 2).is_err());
    }

    #[test]
    fn bench_rows() {
        let table = bench(2, 9, 3, 11).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.rows[0].method, SolveMethod::Multiplier);
        assert_eq!(table.rows[0].iterations, 0);
        assert!(table.rows.iter().all(|r| r.residual_l2 <= 1e-9));
        assert!(table.solution_difference <= 1e-8);
        let csv = table.to_csv();
        assert!(csv.starts_with(
            "method,n,M,seed,median_seconds,residual_l2,iterations\nmultiplier,2,9,11,"
        ));
        assert!(bench(2, 9, 0, 1).is_err());
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
