//! Seeded pseudo-random fields for tests, demos and benchmarks.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lattice::norm_sq;
use crate::operators::{sobolev_norm, SobolevOrder};
use crate::transform::{GridField, SpectralField, TorusGrid};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit_complex<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Entries with real and imaginary parts uniform on [-1, 1).
pub fn random_grid_field<R: Rng>(grid: TorusGrid, rng: &mut R) -> GridField {
    let values = (0..grid.len()).map(|_| unit_complex(rng)).collect();
    GridField::new(grid, values).expect("uniform samples are finite")
}

pub fn random_spectral_field<R: Rng>(grid: TorusGrid, rng: &mut R) -> SpectralField {
    let values = (0..grid.len()).map(|_| unit_complex(rng)).collect();
    SpectralField::new(grid, values).expect("uniform samples are finite")
}

/// A real-valued random grid field.
pub fn random_real_grid_field<R: Rng>(grid: TorusGrid, rng: &mut R) -> GridField {
    let values = (0..grid.len())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.0))
        .collect();
    GridField::new(grid, values).expect("uniform samples are finite")
}

/// Random coefficients with decay (1+|ξ|²)^{-decay/2}, rescaled so that the
/// H¹ norm is `h1_norm`.
pub fn random_smooth_field<R: Rng>(
    grid: TorusGrid,
    decay: f64,
    h1_norm: f64,
    rng: &mut R,
) -> SpectralField {
    let mut values = Vec::with_capacity(grid.len());
    grid.for_each_frequency(|_, xi| {
        let w = (1.0 + norm_sq(xi) as f64).powf(-decay / 2.0);
        values.push(unit_complex(rng) * w);
    });
    rescale_h1(SpectralField::new(grid, values).expect("finite"), h1_norm)
}

fn rescale_h1(c: SpectralField, h1_norm: f64) -> SpectralField {
    let current = sobolev_norm(&c, SobolevOrder::H1);
    if current == 0.0 {
        return c;
    }
    c.scale(Complex64::new(h1_norm / current, 0.0))
        .expect("finite scale")
}

/// A sequence whose items are bounded by `h1_bound` in H¹.
///
/// Item i picks a random frequency shell |ξ| ≈ k_i in [0, radius] and puts
/// random coefficients on the shell of width one, then rescales to an H¹ norm
/// drawn from [h1_bound/2, h1_bound]. High shells carry little L² mass, so
/// these items crowd together in L² while staying spread out in H¹.
pub fn random_h1_sequence<R: Rng>(
    grid: TorusGrid,
    count: usize,
    h1_bound: f64,
    rng: &mut R,
) -> Vec<SpectralField> {
    let radius = grid.radius() as f64;
    (0..count)
        .map(|_| {
            let shell = rng.random_range(0.0..=radius);
            let mut values = Vec::with_capacity(grid.len());
            grid.for_each_frequency(|_, xi| {
                let r = (norm_sq(xi) as f64).sqrt();
                let v = if (r - shell).abs() <= 1.0 {
                    unit_complex(rng)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                values.push(v);
            });
            let mut c = SpectralField::new(grid, values).expect("finite");
            if crate::operators::l2_norm(&c) == 0.0 {
                let mut xi = vec![0i64; grid.dimension()];
                xi[0] = shell.round() as i64;
                c.set(&xi, Complex64::new(1.0, 0.0)).expect("inside box");
            }
            let target = h1_bound * rng.random_range(0.5..=1.0);
            rescale_h1(c, target)
        })
        .collect()
}
