//! Seeded generators for random positive systems, measures and data.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::analysis::{dominant_real_root, nonnegative_spectral_radius};
use crate::model::{DelayMeasure, Field, HistoryBuffer, SystemSpec};
use crate::operators::loop_gain;
use crate::Result;

/// Dense nonnegative matrix with entries in `[0.05, 1)`, scaled to spectral
/// radius `radius`.
pub fn positive_matrix_with_radius<R: Rng>(rng: &mut R, n: usize, radius: f64) -> DMatrix<f64> {
    let raw = DMatrix::from_fn(n, n, |_, _| rng.random_range(0.05..1.0));
    let r = nonnegative_spectral_radius(&raw);
    raw * (radius / r)
}

pub fn velocities_from<R: Rng>(rng: &mut R, n: usize, choices: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|_| choices[rng.random_range(0..choices.len())])
        .collect()
}

/// Undelayed positive system with `r(K)` drawn uniformly from `radius`.
pub fn random_hyperbolic<R: Rng>(
    rng: &mut R,
    n: usize,
    velocity_choices: &[f64],
    radius: std::ops::Range<f64>,
) -> SystemSpec {
    let target = rng.random_range(radius);
    let velocities = velocities_from(rng, n, velocity_choices);
    SystemSpec::new(velocities, positive_matrix_with_radius(rng, n, target))
}

/// Nonnegative measure with one to three atoms in `[-1, -0.05]` and, half of
/// the time, a two-piece density; scaled so `r(μ([-1,0])) = radius`.
pub fn random_measure<R: Rng>(rng: &mut R, n: usize, radius: f64) -> DelayMeasure {
    let atoms = rng.random_range(1..=3);
    let mut thetas: Vec<f64> = (0..atoms).map(|_| rng.random_range(-1.0..-0.05)).collect();
    thetas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    thetas.dedup();
    let mut mu = DelayMeasure::empty(n);
    for theta in thetas {
        let w = DMatrix::from_fn(n, n, |_, _| rng.random_range(0.0..1.0));
        mu = mu.with_atom(theta, w);
    }
    if rng.random_bool(0.5) {
        let mid = rng.random_range(-0.8..-0.3);
        let values = (0..2)
            .map(|_| DMatrix::from_fn(n, n, |_, _| rng.random_range(0.0..1.0)))
            .collect();
        mu = mu.with_density(vec![-1.0, mid, -0.1], values);
    }
    let r = nonnegative_spectral_radius(&mu.total_mass());
    mu.scaled(radius / r)
}

/// Field with independent entries uniform in `[0, 1)`.
pub fn random_nonnegative_field<R: Rng>(rng: &mut R, m: usize, n: usize) -> Field {
    Field::from_fn(m, n, |_, _| rng.random_range(0.0..1.0))
}

/// History with an independent random nonnegative field at every lag.
pub fn random_nonnegative_history<R: Rng>(
    rng: &mut R,
    dt: f64,
    m: usize,
    n: usize,
) -> Result<HistoryBuffer> {
    HistoryBuffer::from_fn(dt, 0.0, |_| random_nonnegative_field(rng, m, n))
}

/// Initial field `x ↦ diag(e^{-λ*x/d_i}) u*` on the dominant real
/// eigenvalue `λ*`, with `u*` the kernel vector of `I - L(λ*)`.
///
/// It satisfies the boundary law and all its compatibility conditions, so
/// the exact solution is the smooth mode `e^{λ*t}·y0`. `None` if no real
/// root exists.
pub fn modal_initial_field(spec: &SystemSpec, m: usize) -> Option<Field> {
    let lambda = dominant_real_root(spec)?;
    let n = spec.n();
    let gain = loop_gain(Complex64::new(lambda, 0.0), spec).map(|z| z.re);
    let svd = (DMatrix::<f64>::identity(n, n) - gain).svd(false, true);
    let v_t = svd.v_t?;
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())?;
    let mut u: Vec<f64> = v_t.row(idx).iter().map(|v| v.abs()).collect();
    let scale = u.iter().cloned().fold(0.0, f64::max);
    u.iter_mut().for_each(|v| *v /= scale);
    Some(Field::from_fn(m, n, |x, i| {
        u[i] * (-lambda * x / spec.velocities[i]).exp()
    }))
}
