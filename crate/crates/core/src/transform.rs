//! Grid samples and Fourier coefficients on the torus [0, 2π)^n.
//!
//! The forward transform carries the M^{-n} factor so that
//!
//! ```text
//! û(ξ) = M^{-n} Σ_m u(x_m) e^{-iξ·x_m},     u(x_m) = Σ_ξ û(ξ) e^{iξ·x_m}
//! ```
//!
//! which is the discrete counterpart of û = (2π)^{-n} ∫ u e^{-iξ·x} dx and
//! keeps Σ|û|² = M^{-n} Σ|u|² (Plancherel) with the constant on the same side.
//!
//! M is always odd, so the stored frequency box ξ_j ∈ [-(M-1)/2, (M-1)/2] is
//! closed under ξ ↦ -ξ and there is no Nyquist mode to special-case.
//!
//! Both fields are stored row-major with the last axis fastest. Grid values
//! are indexed by m ∈ {0..M}^n; coefficients by the shifted index ξ + (M-1)/2.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform tensor grid with M points per axis, spacing 2π/M.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    dimension: usize,
    points_per_axis: usize,
}

impl TorusGrid {
    pub fn new(dimension: usize, points_per_axis: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::ZeroDimension);
        }
        if points_per_axis < 3 || points_per_axis.is_multiple_of(2) {
            return Err(Error::InvalidPoints(points_per_axis));
        }
        let grid = Self {
            dimension,
            points_per_axis,
        };
        if grid.checked_len().is_none() {
            return Err(Error::InvalidArgument(format!(
                "{points_per_axis}^{dimension} grid points overflow"
            )));
        }
        Ok(grid)
    }

    /// Smallest grid whose frequency box has the given sup-norm radius.
    pub fn with_radius(dimension: usize, radius: usize) -> Result<Self> {
        Self::new(dimension, 2 * radius.max(1) + 1)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// Sup-norm radius (M-1)/2 of the stored frequency box.
    pub fn radius(&self) -> usize {
        (self.points_per_axis - 1) / 2
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.points_per_axis as f64
    }

    fn checked_len(&self) -> Option<usize> {
        (0..self.dimension).try_fold(1usize, |acc, _| acc.checked_mul(self.points_per_axis))
    }

    /// M^n.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dimension as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Writes the frequency stored at `index` into `out`.
    pub fn frequency_at(&self, index: usize, out: &mut [i64]) {
        let m = self.points_per_axis;
        let h = self.radius() as i64;
        let mut rest = index;
        for slot in out.iter_mut().rev() {
            *slot = (rest % m) as i64 - h;
            rest /= m;
        }
    }

    pub fn frequency_vec(&self, index: usize) -> Vec<i64> {
        let mut out = vec![0; self.dimension];
        self.frequency_at(index, &mut out);
        out
    }

    /// Storage index of ξ, or `None` if ξ is outside the box.
    pub fn frequency_index(&self, xi: &[i64]) -> Option<usize> {
        if xi.len() != self.dimension {
            return None;
        }
        let h = self.radius() as i64;
        let mut index = 0usize;
        for &c in xi {
            if c.abs() > h {
                return None;
            }
            index = index * self.points_per_axis + (c + h) as usize;
        }
        Some(index)
    }

    /// Writes the multi-index m of grid point `index` into `out`.
    pub fn point_at(&self, index: usize, out: &mut [usize]) {
        let m = self.points_per_axis;
        let mut rest = index;
        for slot in out.iter_mut().rev() {
            *slot = rest % m;
            rest /= m;
        }
    }

    /// Visits every stored frequency in storage order.
    pub fn for_each_frequency(&self, mut visit: impl FnMut(usize, &[i64])) {
        let mut xi = vec![0i64; self.dimension];
        for index in 0..self.len() {
            self.frequency_at(index, &mut xi);
            visit(index, &xi);
        }
    }
}

fn check_finite(values: &[Complex64]) -> Result<()> {
    match values
        .iter()
        .position(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

fn check_len(grid: &TorusGrid, len: usize) -> Result<()> {
    if len != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            actual: len,
        });
    }
    Ok(())
}

/// Complex samples u(x_m) on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: TorusGrid,
    values: Vec<Complex64>,
}

impl GridField {
    pub fn new(grid: TorusGrid, values: Vec<Complex64>) -> Result<Self> {
        check_len(&grid, values.len())?;
        check_finite(&values)?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Samples `f(x)` at every grid point.
    pub fn from_fn(grid: TorusGrid, mut f: impl FnMut(&[f64]) -> Complex64) -> Result<Self> {
        let h = grid.spacing();
        let mut m = vec![0usize; grid.dimension()];
        let mut x = vec![0.0; grid.dimension()];
        let values = (0..grid.len())
            .map(|index| {
                grid.point_at(index, &mut m);
                for (xj, &mj) in x.iter_mut().zip(&m) {
                    *xj = h * mj as f64;
                }
                f(&x)
            })
            .collect();
        Self::new(grid, values)
    }

    /// Samples of e^{iξ·x}, with the phase reduced mod M so the samples are
    /// exact to the last bit of the twiddle.
    pub fn plane_wave(grid: TorusGrid, xi: &[i64]) -> Result<Self> {
        if grid.frequency_index(xi).is_none() {
            return Err(Error::OutsideBox {
                frequency: xi.to_vec(),
                radius: grid.radius(),
            });
        }
        let mm = grid.points_per_axis() as i64;
        let mut m = vec![0usize; grid.dimension()];
        let values = (0..grid.len())
            .map(|index| {
                grid.point_at(index, &mut m);
                let phase = xi
                    .iter()
                    .zip(&m)
                    .map(|(&k, &mj)| k * mj as i64)
                    .sum::<i64>()
                    .rem_euclid(mm);
                Complex64::from_polar(1.0, 2.0 * PI * phase as f64 / mm as f64)
            })
            .collect();
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Discrete L² norm √(M^{-n} Σ|u|²), equal to the coefficient ℓ² norm.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (sum / self.grid.len() as f64).sqrt()
    }

    /// L² distance between two fields on the same grid.
    pub fn l2_distance(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let sum: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((sum / self.grid.len() as f64).sqrt())
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(max_abs_diff(&self.values, &other.values))
    }

    /// a·self + b·other.
    pub fn axpby(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Self::new(self.grid, values)
    }

    pub fn to_json(&self) -> String {
        FieldDocument::encode(&self.grid, FieldKind::Grid, &self.values)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let (grid, values) = FieldDocument::decode(text, FieldKind::Grid)?;
        Self::new(grid, values)
    }
}

/// Fourier coefficients û(ξ) on the symmetric frequency box.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    coefficients: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: TorusGrid, coefficients: Vec<Complex64>) -> Result<Self> {
        check_len(&grid, coefficients.len())?;
        check_finite(&coefficients)?;
        Ok(Self { grid, coefficients })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            coefficients: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// A single coefficient `value` at ξ.
    pub fn delta(grid: TorusGrid, xi: &[i64], value: Complex64) -> Result<Self> {
        let mut field = Self::zeros(grid);
        field.set(xi, value)?;
        Ok(field)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<Complex64> {
        self.coefficients
    }

    pub fn get(&self, xi: &[i64]) -> Option<Complex64> {
        self.grid.frequency_index(xi).map(|i| self.coefficients[i])
    }

    pub fn set(&mut self, xi: &[i64], value: Complex64) -> Result<()> {
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::NonFinite { index: 0 });
        }
        let index = self
            .grid
            .frequency_index(xi)
            .ok_or_else(|| Error::OutsideBox {
                frequency: xi.to_vec(),
                radius: self.grid.radius(),
            })?;
        self.coefficients[index] = value;
        Ok(())
    }

    /// Keeps coefficients where `keep(ξ)` holds and zeroes the rest.
    pub fn mask(&self, mut keep: impl FnMut(&[i64]) -> bool) -> Self {
        let mut out = self.clone();
        self.grid.for_each_frequency(|i, xi| {
            if !keep(xi) {
                out.coefficients[i] = Complex64::new(0.0, 0.0);
            }
        });
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let coefficients = self
            .coefficients
            .iter()
            .zip(&other.coefficients)
            .map(|(a, b)| a + b)
            .collect();
        Self::new(self.grid, coefficients)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let coefficients = self
            .coefficients
            .iter()
            .zip(&other.coefficients)
            .map(|(a, b)| a - b)
            .collect();
        Self::new(self.grid, coefficients)
    }

    pub fn scale(&self, factor: Complex64) -> Result<Self> {
        Self::new(
            self.grid,
            self.coefficients.iter().map(|c| c * factor).collect(),
        )
    }

    /// Real-valued on the grid ⇔ û(-ξ) = conj(û(ξ)).
    pub fn is_conjugate_symmetric(&self, tol: f64) -> bool {
        self.conjugate_symmetry_defect() <= tol
    }

    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut neg = vec![0i64; self.grid.dimension()];
        self.grid.for_each_frequency(|i, xi| {
            for (n, &c) in neg.iter_mut().zip(xi) {
                *n = -c;
            }
            let j = self
                .grid
                .frequency_index(&neg)
                .expect("box is symmetric under negation");
            worst = worst.max((self.coefficients[j] - self.coefficients[i].conj()).norm());
        });
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(max_abs_diff(&self.coefficients, &other.coefficients))
    }

    pub fn to_json(&self) -> String {
        FieldDocument::encode(&self.grid, FieldKind::Spectral, &self.coefficients)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let (grid, values) = FieldDocument::decode(text, FieldKind::Spectral)?;
        Self::new(grid, values)
    }
}

fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Grid,
    Spectral,
}

/// On-disk form shared by both field types.
#[derive(Debug, Serialize, Deserialize)]
pub struct FieldDocument {
    pub dimension: usize,
    pub points_per_axis: usize,
    pub kind: FieldKind,
    pub values: Vec<[f64; 2]>,
}

impl FieldDocument {
    fn encode(grid: &TorusGrid, kind: FieldKind, values: &[Complex64]) -> String {
        let doc = FieldDocument {
            dimension: grid.dimension(),
            points_per_axis: grid.points_per_axis(),
            kind,
            values: values.iter().map(|v| [v.re, v.im]).collect(),
        };
        serde_json::to_string(&doc).expect("field documents always serialize")
    }

    fn decode(text: &str, expected: FieldKind) -> Result<(TorusGrid, Vec<Complex64>)> {
        let doc: FieldDocument = serde_json::from_str(text)?;
        if doc.kind != expected {
            return Err(Error::InvalidArgument(format!(
                "expected a {expected:?} document, found {:?}",
                doc.kind
            )));
        }
        let grid = TorusGrid::new(doc.dimension, doc.points_per_axis)?;
        let values = doc
            .values
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        Ok((grid, values))
    }

    /// Peeks at the kind without validating the payload.
    pub fn kind_of(text: &str) -> Result<FieldKind> {
        #[derive(Deserialize)]
        struct KindOnly {
            kind: FieldKind,
        }
        Ok(serde_json::from_str::<KindOnly>(text)?.kind)
    }
}

/// Runs `apply` on every 1-D line of `data` along `axis`.
fn for_each_line(
    data: &mut [Complex64],
    grid: &TorusGrid,
    axis: usize,
    scratch: &mut Vec<Complex64>,
    mut apply: impl FnMut(&mut [Complex64]),
) {
    let m = grid.points_per_axis();
    let stride = m.pow((grid.dimension() - 1 - axis) as u32);
    let block = stride * m;
    scratch.resize(m, Complex64::new(0.0, 0.0));
    for outer in (0..data.len()).step_by(block) {
        for inner in 0..stride {
            let base = outer + inner;
            for (k, slot) in scratch.iter_mut().enumerate() {
                *slot = data[base + k * stride];
            }
            apply(scratch);
            for (k, value) in scratch.iter().enumerate() {
                data[base + k * stride] = *value;
            }
        }
    }
}

/// Planned transforms for one grid, reusable across many calls.
pub struct FourierTransform {
    grid: TorusGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FourierTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierTransform")
            .field("grid", &self.grid)
            .finish_non_exhaustive()
    }
}

impl FourierTransform {
    pub fn new(grid: TorusGrid) -> Self {
        let mut planner = FftPlanner::new();
        let m = grid.points_per_axis();
        Self {
            grid,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// Grid samples → coefficients, axis by axis with a mixed-radix FFT.
    pub fn forward(&self, u: &GridField) -> Result<SpectralField> {
        if *u.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        check_finite(u.values())?;
        let grid = self.grid;
        let m = grid.points_per_axis();
        let h = grid.radius();
        let scale = 1.0 / m as f64;
        let mut data = u.values().to_vec();
        let mut scratch = Vec::new();
        let mut fft_scratch =
            vec![Complex64::new(0.0, 0.0); self.forward.get_inplace_scratch_len()];
        let mut line_out = vec![Complex64::new(0.0, 0.0); m];
        for axis in 0..grid.dimension() {
            for_each_line(&mut data, &grid, axis, &mut scratch, |line| {
                self.forward.process_with_scratch(line, &mut fft_scratch);
                // DFT bin k holds ξ ≡ k (mod M); shifted slot s holds ξ = s - h.
                for (s, out) in line_out.iter_mut().enumerate() {
                    *out = line[(s + h + 1) % m] * scale;
                }
                line.copy_from_slice(&line_out);
            });
        }
        SpectralField::new(grid, data)
    }

    /// Coefficients → grid samples.
    pub fn inverse(&self, c: &SpectralField) -> Result<GridField> {
        if *c.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        check_finite(c.coefficients())?;
        let grid = self.grid;
        let m = grid.points_per_axis();
        let h = grid.radius();
        let mut data = c.coefficients().to_vec();
        let mut scratch = Vec::new();
        let mut fft_scratch =
            vec![Complex64::new(0.0, 0.0); self.inverse.get_inplace_scratch_len()];
        let mut line_in = vec![Complex64::new(0.0, 0.0); m];
        for axis in 0..grid.dimension() {
            for_each_line(&mut data, &grid, axis, &mut scratch, |line| {
                for (k, slot) in line_in.iter_mut().enumerate() {
                    *slot = line[(k + h) % m];
                }
                line.copy_from_slice(&line_in);
                self.inverse.process_with_scratch(line, &mut fft_scratch);
            });
        }
        GridField::new(grid, data)
    }
}

/// Grid samples → coefficients. Plans a fresh transform; hold a
/// [`FourierTransform`] for repeated use.
pub fn forward(u: &GridField) -> Result<SpectralField> {
    FourierTransform::new(*u.grid()).forward(u)
}

/// Coefficients → grid samples.
pub fn inverse(c: &SpectralField) -> Result<GridField> {
    FourierTransform::new(*c.grid()).inverse(c)
}

/// Table of e^{-2πi r/M} for r = 0..M.
fn twiddles(m: usize, sign: f64) -> Vec<Complex64> {
    (0..m)
        .map(|r| Complex64::from_polar(1.0, sign * 2.0 * PI * r as f64 / m as f64))
        .collect()
}

/// Phase index (ξ·m) mod M.
fn phase_index(xi: &[i64], point: &[usize], m: usize) -> usize {
    xi.iter()
        .zip(point)
        .map(|(&k, &p)| k * p as i64)
        .sum::<i64>()
        .rem_euclid(m as i64) as usize
}

/// Direct O(M^{2n}) evaluation of `forward`.
pub fn naive_forward(u: &GridField) -> Result<SpectralField> {
    check_finite(u.values())?;
    let grid = *u.grid();
    let m = grid.points_per_axis();
    let table = twiddles(m, -1.0);
    let mut point = vec![0usize; grid.dimension()];
    let scale = 1.0 / grid.len() as f64;
    let mut coefficients = vec![Complex64::new(0.0, 0.0); grid.len()];
    grid.for_each_frequency(|i, xi| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, value) in u.values().iter().enumerate() {
            grid.point_at(p, &mut point);
            acc += value * table[phase_index(xi, &point, m)];
        }
        coefficients[i] = acc * scale;
    });
    SpectralField::new(grid, coefficients)
}

/// Direct O(M^{2n}) evaluation of `inverse`.
pub fn naive_inverse(c: &SpectralField) -> Result<GridField> {
    check_finite(c.coefficients())?;
    let grid = *c.grid();
    let m = grid.points_per_axis();
    let table = twiddles(m, 1.0);
    let mut point = vec![0usize; grid.dimension()];
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (p, value) in values.iter_mut().enumerate() {
        grid.point_at(p, &mut point);
        let mut acc = Complex64::new(0.0, 0.0);
        grid.for_each_frequency(|i, xi| {
            acc += c.coefficients()[i] * table[phase_index(xi, &point, m)];
        });
        *value = acc;
    }
    GridField::new(grid, values)
}

/// |Σ_ξ |û(ξ)|² − M^{-n} Σ_m |u(x_m)|²|.
pub fn plancherel_defect(u: &GridField) -> Result<f64> {
    let c = forward(u)?;
    let spectral: f64 = c.coefficients().iter().map(|v| v.norm_sqr()).sum();
    let grid_side = u.values().iter().map(|v| v.norm_sqr()).sum::<f64>() / u.grid().len() as f64;
    Ok((spectral - grid_side).abs())
}
