//! One function per subcommand. Each writes its table or document through
//! [`emit`] and reports self-check failures as [`CliError::Check`].

use std::fmt::Write as _;
use std::fs;

use serde::Serialize;
use torus_spectral::embedding::{
    rellich_extract, tail_bound_check_with, BoundedSequence, TailBound,
};
use torus_spectral::lattice::NormKind;
use torus_spectral::operators::{sobolev_norm, MultiplierSymbol, SobolevOrder};
use torus_spectral::sampling::{
    random_grid_field, random_h1_sequence, random_smooth_field, random_spectral_field, rng,
};
use torus_spectral::solver::{bench, solve_cg, solve_multiplier, SolveReport};
use torus_spectral::spectral::{
    laplacian_spectrum, operator_norm_power_iteration, resolvent_spectrum,
    truncation_error_exact_for, truncation_error_power_iteration, verify_eigenpair, SpectrumReport,
};
use torus_spectral::transform::{
    naive_forward, naive_inverse, plancherel_defect, FieldDocument, FieldKind,
};
use torus_spectral::{Complex64, FourierTransform, GridField, SpectralField, TorusGrid};

use crate::{emit, CliError, Format, Norm, RunConfig};

pub const POWER_TOL: f64 = 1e-10;
pub const POWER_MAX_ITER: usize = 100_000;
/// Largest accepted |exact - power iteration| in `truncate`.
pub const TRUNCATE_TOL: f64 = 1e-8;
pub const SOLVE_CG_TOL: f64 = 1e-10;
pub const SOLVE_CG_MAX_ITER: usize = 1000;
pub const SOLVE_AGREEMENT_TOL: f64 = 1e-8;
pub const EMBED_SEQUENCE_LEN: usize = 64;
pub const EMBED_H1_BOUND: f64 = 1.0;

fn norm_kind(norm: Norm) -> NormKind {
    match norm {
        Norm::Sup => NormKind::Sup,
        Norm::Euclidean => NormKind::Euclidean,
    }
}

fn norm_name(norm: Norm) -> &'static str {
    match norm {
        Norm::Sup => "sup",
        Norm::Euclidean => "euclidean",
    }
}

/// False for NaN as well as for values above `tol`.
fn within(value: f64, tol: f64) -> bool {
    value <= tol
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Check(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

fn read_input(cfg: &RunConfig) -> Result<Option<String>, CliError> {
    cfg.input
        .as_ref()
        .map(|path| {
            fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
        })
        .transpose()
}

/// Rows `i_1,…,i_n,re,im`, with grid indices m or frequencies ξ as labels.
fn field_csv(grid: &TorusGrid, kind: FieldKind, values: &[Complex64]) -> String {
    let n = grid.dimension();
    let prefix = match kind {
        FieldKind::Grid => "m",
        FieldKind::Spectral => "xi",
    };
    let mut out = String::new();
    for axis in 1..=n {
        let _ = write!(out, "{prefix}_{axis},");
    }
    out.push_str("re,im\n");
    let mut point = vec![0usize; n];
    let mut xi = vec![0i64; n];
    for (i, v) in values.iter().enumerate() {
        match kind {
            FieldKind::Grid => {
                grid.point_at(i, &mut point);
                for p in &point {
                    let _ = write!(out, "{p},");
                }
            }
            FieldKind::Spectral => {
                grid.frequency_at(i, &mut xi);
                for x in &xi {
                    let _ = write!(out, "{x},");
                }
            }
        }
        let _ = writeln!(out, "{},{}", v.re, v.im);
    }
    out
}

/// Converts a field document to the other kind, or transforms a seeded
/// random grid field when no input is given. Reports the H^s norm on stderr.
pub fn cmd_transform(cfg: &RunConfig) -> Result<(), CliError> {
    let (spectral, grid_field) = match read_input(cfg)? {
        Some(text) => match FieldDocument::kind_of(&text)? {
            FieldKind::Grid => {
                let u = GridField::from_json(&text)?;
                (FourierTransform::new(*u.grid()).forward(&u)?, u)
            }
            FieldKind::Spectral => {
                let c = SpectralField::from_json(&text)?;
                let u = FourierTransform::new(*c.grid()).inverse(&c)?;
                let out = match cfg.format_or(Format::Json) {
                    Format::Json => u.to_json() + "\n",
                    Format::Csv => field_csv(u.grid(), FieldKind::Grid, u.values()),
                };
                emit(cfg, &out)?;
                report_sobolev(cfg, &c);
                return Ok(());
            }
        },
        None => {
            let grid = cfg.grid()?;
            let u = random_grid_field(grid, &mut rng(cfg.seed()?));
            (FourierTransform::new(grid).forward(&u)?, u)
        }
    };
    let back = FourierTransform::new(*grid_field.grid()).inverse(&spectral)?;
    let round_trip = back.max_abs_diff(&grid_field)?;
    let out = match cfg.format_or(Format::Json) {
        Format::Json => spectral.to_json() + "\n",
        Format::Csv => field_csv(
            spectral.grid(),
            FieldKind::Spectral,
            spectral.coefficients(),
        ),
    };
    emit(cfg, &out)?;
    report_sobolev(cfg, &spectral);
    if round_trip > 1e-12 {
        return Err(CliError::Check(format!(
            "round trip error {round_trip:e} > 1e-12"
        )));
    }
    Ok(())
}

fn report_sobolev(cfg: &RunConfig, c: &SpectralField) {
    eprintln!(
        "H^{} norm {} (sum over the stored frequency box |xi_j| <= {})",
        cfg.sobolev,
        sobolev_norm(c, SobolevOrder(cfg.sobolev)),
        c.grid().radius()
    );
}

#[derive(Serialize)]
struct SpectrumDocument {
    laplacian: SpectrumReport,
    resolvent: SpectrumReport,
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<(), CliError> {
    let cap = cfg
        .level_cap
        .ok_or_else(|| CliError::Usage("`spectrum` needs --level-cap".into()))?;
    let laplacian = laplacian_spectrum(cfg.dimension, cap)?;
    let resolvent = resolvent_spectrum(cfg.dimension, cap)?;
    let out = match cfg.format_or(Format::Csv) {
        Format::Json => to_json(&SpectrumDocument {
            laplacian,
            resolvent,
        })?,
        Format::Csv => {
            let mut out = String::from("operator,eigenvalue,multiplicity\n");
            for (name, report) in [("laplacian", &laplacian), ("resolvent", &resolvent)] {
                for level in &report.levels {
                    let _ = writeln!(out, "{name},{},{}", level.eigenvalue, level.multiplicity);
                }
            }
            out
        }
    };
    emit(cfg, &out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncateRow {
    #[serde(rename = "N")]
    pub truncation: u64,
    pub exact_error: f64,
    pub power_iteration_error: f64,
    pub abs_diff: f64,
}

#[derive(Serialize)]
struct TruncateDocument<'a> {
    dimension: usize,
    points_per_axis: usize,
    norm: &'static str,
    seed: u64,
    rows: &'a [TruncateRow],
}

/// ‖T - T_N‖ for N = 0..=truncation, closed form against power iteration.
pub fn truncation_table(cfg: &RunConfig) -> Result<Vec<TruncateRow>, CliError> {
    let max_n = cfg
        .truncation
        .ok_or_else(|| CliError::Usage("`truncate` needs --truncation".into()))?;
    let grid = cfg.grid()?;
    let required = max_n as usize + 2;
    if grid.radius() < required {
        return Err(CliError::Usage(format!(
            "--truncation {max_n} needs box radius {required} (--points {}), have radius {}",
            2 * required + 1,
            grid.radius()
        )));
    }
    let seed = cfg.seed()?;
    let kind = norm_kind(cfg.norm);
    (0..=max_n)
        .map(|n| {
            let exact = truncation_error_exact_for(cfg.dimension, n, kind);
            let est =
                truncation_error_power_iteration(grid, n, kind, POWER_TOL, POWER_MAX_ITER, seed)?;
            Ok(TruncateRow {
                truncation: n,
                exact_error: exact,
                power_iteration_error: est.norm,
                abs_diff: (exact - est.norm).abs(),
            })
        })
        .collect()
}

pub fn cmd_truncate(cfg: &RunConfig) -> Result<(), CliError> {
    let rows = truncation_table(cfg)?;
    let out = match cfg.format_or(Format::Csv) {
        Format::Json => to_json(&TruncateDocument {
            dimension: cfg.dimension,
            points_per_axis: cfg.points_per_axis,
            norm: norm_name(cfg.norm),
            seed: cfg.seed()?,
            rows: &rows,
        })?,
        Format::Csv => {
            let mut out = String::from("N,exact_error,power_iteration_error,abs_diff\n");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    r.truncation, r.exact_error, r.power_iteration_error, r.abs_diff
                );
            }
            out
        }
    };
    emit(cfg, &out)?;
    if let Some(bad) = rows.iter().find(|r| !within(r.abs_diff, TRUNCATE_TOL)) {
        return Err(CliError::Check(format!(
            "N = {}: |exact - power iteration| = {:e} > {TRUNCATE_TOL:e}",
            bad.truncation, bad.abs_diff
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct ExtractionSummary {
    epsilon: f64,
    h1_bound: f64,
    sequence_length: usize,
    truncation: u64,
    cluster_count: usize,
    indices: Vec<usize>,
    max_pairwise_distance: f64,
}

#[derive(Serialize)]
struct EmbedDocument {
    dimension: usize,
    points_per_axis: usize,
    seed: u64,
    tail_bounds: Vec<TailBound>,
    extraction: ExtractionSummary,
}

/// Tail bounds for one seeded smooth field at every N in the box, plus an
/// extraction from a seeded H¹-bounded sequence.
pub fn cmd_embed_demo(cfg: &RunConfig) -> Result<(), CliError> {
    let grid = cfg.grid()?;
    let seed = cfg.seed()?;
    let mut r = rng(seed);
    let field = random_smooth_field(grid, 2.0, EMBED_H1_BOUND, &mut r);
    let max_n = cfg.truncation.unwrap_or(grid.radius() as u64);
    let tail_bounds: Vec<TailBound> = (0..=max_n)
        .map(|n| tail_bound_check_with(&field, n, NormKind::Sup))
        .collect();

    let items = random_h1_sequence(grid, EMBED_SEQUENCE_LEN, EMBED_H1_BOUND, &mut r);
    let seq = BoundedSequence::new(items, EMBED_H1_BOUND)?;
    let extraction = rellich_extract(&seq, cfg.epsilon)?;
    let mut max_pairwise: f64 = 0.0;
    for (a, &i) in extraction.indices.iter().enumerate() {
        for &j in &extraction.indices[a + 1..] {
            let d = seq.items()[i].sub(&seq.items()[j])?;
            max_pairwise = max_pairwise.max(torus_spectral::operators::l2_norm(&d));
        }
    }

    let out = match cfg.format_or(Format::Csv) {
        Format::Json => to_json(&EmbedDocument {
            dimension: cfg.dimension,
            points_per_axis: cfg.points_per_axis,
            seed,
            tail_bounds: tail_bounds.clone(),
            extraction: ExtractionSummary {
                epsilon: cfg.epsilon,
                h1_bound: EMBED_H1_BOUND,
                sequence_length: seq.len(),
                truncation: extraction.truncation,
                cluster_count: extraction.cluster_count,
                indices: extraction.indices.clone(),
                max_pairwise_distance: max_pairwise,
            },
        })?,
        Format::Csv => {
            let mut out = String::from("N,tail_lhs,tail_rhs\n");
            for b in &tail_bounds {
                let _ = writeln!(out, "{},{},{}", b.truncation, b.lhs, b.rhs);
            }
            out
        }
    };
    emit(cfg, &out)?;
    eprintln!(
        "extracted {} of {} items at N = {}, max pairwise L2 distance {}",
        extraction.indices.len(),
        seq.len(),
        extraction.truncation,
        max_pairwise
    );
    if let Some(b) = tail_bounds.iter().find(|b| !b.holds) {
        return Err(CliError::Check(format!(
            "tail bound fails at N = {}: {} > {}",
            b.truncation, b.lhs, b.rhs
        )));
    }
    if !(max_pairwise.is_finite() && max_pairwise < cfg.epsilon) {
        return Err(CliError::Check(format!(
            "extracted items are {max_pairwise} apart, epsilon is {}",
            cfg.epsilon
        )));
    }
    Ok(())
}

/// Solves (Δ+1)u = f both ways. Writes the multiplier solution (json) or
/// one report row per method (csv).
pub fn cmd_solve(cfg: &RunConfig) -> Result<(), CliError> {
    let f = match read_input(cfg)? {
        Some(text) => GridField::from_json(&text)?,
        None => random_grid_field(cfg.grid()?, &mut rng(cfg.seed()?)),
    };
    let (u_direct, direct) = solve_multiplier(&f)?;
    let (u_cg, cg) = solve_cg(&f, SOLVE_CG_TOL, SOLVE_CG_MAX_ITER)?;
    let out = match cfg.format_or(Format::Json) {
        Format::Json => u_direct.to_json() + "\n",
        Format::Csv => {
            let mut out = String::from("method,residual_l2,iterations,wall_time\n");
            for r in [&direct, &cg] {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    r.method.as_str(),
                    r.residual_l2,
                    r.iterations,
                    r.wall_time
                );
            }
            out
        }
    };
    emit(cfg, &out)?;
    check_solve(&f, &u_direct, &u_cg, [&direct, &cg])
}

fn check_solve(
    f: &GridField,
    u_direct: &GridField,
    u_cg: &GridField,
    reports: [&SolveReport; 2],
) -> Result<(), CliError> {
    let limit = SOLVE_CG_TOL * f.l2_norm();
    for r in reports {
        if !within(r.residual_l2, limit) {
            return Err(CliError::Check(format!(
                "{} residual {:e} > {limit:e}",
                r.method.as_str(),
                r.residual_l2
            )));
        }
    }
    let gap = u_direct.l2_distance(u_cg)?;
    if !within(gap, SOLVE_AGREEMENT_TOL) {
        return Err(CliError::Check(format!(
            "solutions differ by {gap:e} > {SOLVE_AGREEMENT_TOL:e}"
        )));
    }
    Ok(())
}

pub fn cmd_bench(cfg: &RunConfig) -> Result<(), CliError> {
    let table = bench(
        cfg.dimension,
        cfg.points_per_axis,
        cfg.repetitions,
        cfg.seed()?,
    )?;
    let out = match cfg.format_or(Format::Csv) {
        Format::Json => to_json(&table)?,
        Format::Csv => table.to_csv(),
    };
    emit(cfg, &out)?;
    if !within(table.solution_difference, SOLVE_AGREEMENT_TOL) {
        return Err(CliError::Check(format!(
            "bench solutions differ by {:e}",
            table.solution_difference
        )));
    }
    Ok(())
}

/// Outcome of one invariant group in `verify`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("{tag} {}: {}", self.name, self.detail)
    }
}

/// 0 when every group passed, 1 otherwise.
pub fn verify_exit_code(results: &[CheckResult]) -> i32 {
    if results.iter().all(|r| r.passed) {
        crate::EXIT_OK
    } else {
        crate::EXIT_CHECK_FAILED
    }
}

fn check(name: &'static str, worst: Result<f64, CliError>, tol: f64) -> CheckResult {
    match worst {
        Ok(w) => CheckResult {
            name,
            passed: w <= tol,
            detail: format!("worst {w:e}, tolerance {tol:e}"),
        },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

fn worst_over<I>(cases: I) -> Result<f64, CliError>
where
    I: IntoIterator<Item = Result<f64, CliError>>,
{
    let mut worst: f64 = 0.0;
    for c in cases {
        let v = c?;
        if v.is_nan() {
            return Ok(f64::NAN);
        }
        worst = worst.max(v);
    }
    Ok(worst)
}

/// Grids above this size skip the O(len²) direct-sum comparison and check
/// eigenpairs only for |ξ_j| ≤ 4.
pub const VERIFY_FULL_SWEEP_LEN: usize = 4096;

/// Runs every invariant group on the configured grid plus a few small
/// fixed grids.
pub fn run_checks(grid: TorusGrid, seed: u64) -> Vec<CheckResult> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    let mut shapes = vec![(grid.dimension(), grid.points_per_axis())];
    for shape in [(1, 5), (1, 9), (2, 5), (2, 9), (3, 5)] {
        if !shapes.contains(&shape) {
            shapes.push(shape);
        }
    }

    out.push(check(
        "plancherel",
        worst_over(shapes.iter().flat_map(|&(n, m)| {
            let grid = TorusGrid::new(n, m).expect("validated shape");
            (0..10)
                .map(|_| Ok(plancherel_defect(&random_grid_field(grid, &mut r))?))
                .collect::<Vec<_>>()
        })),
        1e-12,
    ));

    out.push(check(
        "fast transform vs direct sum",
        worst_over(
            shapes
                .iter()
                .filter(|&&(n, m)| m.pow(n as u32) <= VERIFY_FULL_SWEEP_LEN)
                .map(|&(n, m)| {
                    let grid = TorusGrid::new(n, m).expect("validated shape");
                    let t = FourierTransform::new(grid);
                    let u = random_grid_field(grid, &mut r);
                    let c = t.forward(&u)?;
                    let fwd = c.max_abs_diff(&naive_forward(&u)?)?;
                    let inv = t.inverse(&c)?.max_abs_diff(&naive_inverse(&c)?)?;
                    Ok(fwd.max(inv))
                }),
        ),
        1e-10,
    ));

    out.push(check(
        "round trips",
        worst_over(shapes.iter().map(|&(n, m)| {
            let grid = TorusGrid::new(n, m).expect("validated shape");
            let t = FourierTransform::new(grid);
            let u = random_grid_field(grid, &mut r);
            let c = random_spectral_field(grid, &mut r);
            let a = t.inverse(&t.forward(&u)?)?.max_abs_diff(&u)?;
            let b = t.forward(&t.inverse(&c)?)?.max_abs_diff(&c)?;
            Ok(a.max(b))
        })),
        1e-12,
    ));

    out.push(check(
        "eigenpairs",
        {
            let mut cases = Vec::new();
            let full = grid.len() <= VERIFY_FULL_SWEEP_LEN;
            grid.for_each_frequency(|_, xi| {
                if full || xi.iter().all(|x| x.abs() <= 4) {
                    cases.push(verify_eigenpair(xi, grid).map_err(CliError::from));
                }
            });
            worst_over(cases)
        },
        1e-12,
    ));

    out.push(check(
        "spectrum multiplicities",
        worst_over((1..=3).map(|n| {
            let got: Vec<(f64, u64)> = laplacian_spectrum(n, 12)?
                .levels
                .iter()
                .map(|l| (l.eigenvalue, l.multiplicity))
                .collect();
            let expected: Vec<(f64, u64)> = (0..=12u64)
                .map(|k| (k as f64, brute_multiplicity(n, k)))
                .filter(|&(_, m)| m > 0)
                .collect();
            Ok(if got == expected { 0.0 } else { 1.0 })
        })),
        0.0,
    ));

    out.push(check(
        "resolvent norm",
        (|| {
            let est = operator_norm_power_iteration(
                &MultiplierSymbol::resolvent(),
                grid,
                POWER_TOL,
                POWER_MAX_ITER,
                seed,
            )?;
            Ok((est.norm - 1.0).abs())
        })(),
        1e-8,
    ));

    out.push(check(
        "truncation law",
        worst_over((1..=2).flat_map(|n| {
            (0..=2u64).map(move |big_n| {
                let grid = TorusGrid::with_radius(n, big_n as usize + 2)?;
                let est = truncation_error_power_iteration(
                    grid,
                    big_n,
                    NormKind::Sup,
                    POWER_TOL,
                    POWER_MAX_ITER,
                    seed,
                )?;
                Ok((est.norm - truncation_error_exact_for(n, big_n, NormKind::Sup)).abs())
            })
        })),
        1e-8,
    ));

    out.push(check(
        "tail bound",
        worst_over(shapes.iter().flat_map(|&(n, m)| {
            let grid = TorusGrid::new(n, m).expect("validated shape");
            (0..10)
                .flat_map(|_| {
                    let c = random_smooth_field(grid, 1.0, 1.0, &mut r);
                    (0..=grid.radius() as u64)
                        .map(|big_n| {
                            let b = tail_bound_check_with(&c, big_n, NormKind::Sup);
                            Ok((b.lhs - b.rhs).max(0.0))
                        })
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>()
        })),
        torus_spectral::embedding::TAIL_BOUND_SLACK,
    ));

    out.push(check(
        "solver agreement",
        worst_over((0..5).map(|_| {
            let f = random_grid_field(grid, &mut r);
            let (u1, a) = solve_multiplier(&f)?;
            let (u2, b) = solve_cg(&f, SOLVE_CG_TOL, SOLVE_CG_MAX_ITER)?;
            check_solve(&f, &u1, &u2, [&a, &b])?;
            Ok(u1.l2_distance(&u2)?)
        })),
        SOLVE_AGREEMENT_TOL,
    ));

    out
}

/// Counts ξ ∈ Z^n with |ξ|² = k by scanning the cube of side 2⌈√k⌉+1.
fn brute_multiplicity(n: usize, k: u64) -> u64 {
    let r = (k as f64).sqrt().ceil() as i64;
    let side = (2 * r + 1) as usize;
    let mut count = 0;
    for idx in 0..side.pow(n as u32) {
        let mut rest = idx;
        let mut sum = 0i64;
        for _ in 0..n {
            let c = (rest % side) as i64 - r;
            rest /= side;
            sum += c * c;
        }
        if sum as u64 == k {
            count += 1;
        }
    }
    count
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<(), CliError> {
    let results = run_checks(cfg.grid()?, cfg.seed()?);
    let mut out = String::new();
    for r in &results {
        out.push_str(&r.line());
        out.push('\n');
    }
    emit(cfg, &out)?;
    if verify_exit_code(&results) != crate::EXIT_OK {
        let failed = results.iter().filter(|r| !r.passed).count();
        return Err(CliError::Check(format!(
            "{failed} invariant group(s) failed"
        )));
    }
    Ok(())
}
