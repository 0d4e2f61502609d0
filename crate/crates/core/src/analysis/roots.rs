use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::model::SystemSpec;
use crate::operators::{loop_gain, ComplexMatrix};
use crate::{Error, Result};

use super::spectral::nonnegative_spectral_radius;

/// A closed-loop eigenvalue on the contour is assumed when `|det| < this`.
const ZERO_TOL: f64 = 1e-12;
const MAX_DEPTH: u32 = 40;
const MAX_EVALUATIONS: usize = 2_000_000;

/// `det(I - L(λ))` where `L` is the loop gain (`K e^{-λ/d}` or `μ̂(λ)G(λ)`).
///
/// Its zeros are the closed-loop eigenvalues.
pub fn characteristic_value(lambda: Complex64, spec: &SystemSpec) -> Complex64 {
    let n = spec.n();
    let m = ComplexMatrix::identity(n, n) - loop_gain(lambda, spec);
    m.determinant()
}

/// Axis-aligned rectangle in the complex plane, sampled `samples_per_side`
/// times per edge before adaptive refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSearchRegion {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub samples_per_side: usize,
}

impl RootSearchRegion {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Self {
            re_min,
            re_max,
            im_min,
            im_max,
            samples_per_side: 64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.re_min < self.re_max && self.im_min < self.im_max) {
            return Err(Error::InvalidArgument(format!(
                "degenerate rectangle {self:?}"
            )));
        }
        if self.samples_per_side < 16 {
            return Err(Error::InvalidArgument(
                "samples_per_side must be >= 16".into(),
            ));
        }
        Ok(())
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }
}

struct Winding<'a, F: Fn(Complex64) -> Complex64> {
    f: &'a F,
    evaluations: usize,
}

impl<F: Fn(Complex64) -> Complex64> Winding<'_, F> {
    fn eval(&mut self, z: Complex64) -> Result<Complex64> {
        self.evaluations += 1;
        if self.evaluations > MAX_EVALUATIONS {
            return Err(Error::NonConvergence(
                "contour refinement budget exhausted".into(),
            ));
        }
        let v = (self.f)(z);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonConvergence(format!("non-finite value at {z}")));
        }
        if v.norm() < ZERO_TOL {
            return Err(Error::RootOnBoundary(z));
        }
        Ok(v)
    }

    /// Phase change of `f` along the segment `[a, b]`, refined until every
    /// increment is below `π/2`.
    fn segment(
        &mut self,
        a: Complex64,
        fa: Complex64,
        b: Complex64,
        fb: Complex64,
        depth: u32,
    ) -> Result<f64> {
        let delta = (fb / fa).arg();
        if delta.abs() < PI / 2.0 {
            return Ok(delta);
        }
        if depth >= MAX_DEPTH {
            return Err(Error::NonConvergence(format!(
                "phase increment did not resolve between {a} and {b}"
            )));
        }
        let mid = (a + b) / 2.0;
        let fm = self.eval(mid)?;
        Ok(self.segment(a, fa, mid, fm, depth + 1)? + self.segment(mid, fm, b, fb, depth + 1)?)
    }
}

/// Winding number of `f` around zero along the positively oriented boundary
/// of `region`.
pub(crate) fn winding_number(
    region: &RootSearchRegion,
    f: impl Fn(Complex64) -> Complex64,
) -> Result<usize> {
    region.validate()?;
    let mut w = Winding {
        f: &f,
        evaluations: 0,
    };
    let corners = region.corners();
    let n = region.samples_per_side;
    let mut total = 0.0;
    let mut prev_z = corners[0];
    let mut prev_f = w.eval(prev_z)?;
    for side in 0..4 {
        let (a, b) = (corners[side], corners[(side + 1) % 4]);
        for s in 1..=n {
            let z = if s == n {
                b
            } else {
                a + (b - a) * (s as f64 / n as f64)
            };
            let fz = w.eval(z)?;
            total += w.segment(prev_z, prev_f, z, fz, 0)?;
            prev_z = z;
            prev_f = fz;
        }
    }
    let turns = total / (2.0 * PI);
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.1 || rounded < 0.0 {
        return Err(Error::NonConvergence(format!(
            "winding sum {turns} is not a nonnegative integer"
        )));
    }
    Ok(rounded as usize)
}

/// Number of closed-loop eigenvalues inside `region`, counted with
/// multiplicity by the argument principle.
pub fn count_roots(region: &RootSearchRegion, spec: &SystemSpec) -> Result<usize> {
    winding_number(region, |z| characteristic_value(z, spec))
}

/// Default half-height of the strip searched for the spectral abscissa.
///
/// Slightly above `4π·max d_i` so that the scalar root families
/// `d(ln k + 2πim)` never sit on the horizontal edges.
pub fn default_im_cap(spec: &SystemSpec) -> f64 {
    (4.0 * PI + 1.0) * spec.max_velocity()
}

/// Knobs for [`spectral_abscissa_bound_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbscissaSearch {
    pub re_max: f64,
    /// Left edge of the initial box; roots further left are not seen.
    pub re_min: f64,
    pub im_cap: f64,
    pub tol: f64,
    pub samples_per_side: usize,
}

impl AbscissaSearch {
    pub fn for_spec(spec: &SystemSpec, re_max: f64) -> Self {
        Self {
            re_max,
            re_min: -50.0 * spec.max_velocity(),
            im_cap: default_im_cap(spec),
            tol: 1e-6,
            samples_per_side: 64,
        }
    }
}

/// Largest real part of a characteristic root in the strip
/// `|Im λ| ≤ im_cap`, `Re λ ≤ re_max`, or `None` if the strip has no roots.
pub fn spectral_abscissa_bound(spec: &SystemSpec, re_max: f64) -> Result<Option<f64>> {
    spectral_abscissa_bound_with(spec, &AbscissaSearch::for_spec(spec, re_max))
}

pub fn spectral_abscissa_bound_with(
    spec: &SystemSpec,
    search: &AbscissaSearch,
) -> Result<Option<f64>> {
    let count_right_of = |c: f64| -> Result<usize> {
        let region = RootSearchRegion {
            re_min: c,
            re_max: search.re_max,
            im_min: -search.im_cap,
            im_max: search.im_cap,
            samples_per_side: search.samples_per_side,
        };
        // nudge the left edge off a root instead of failing
        let mut shift = 0.0;
        for attempt in 0..8 {
            let mut r = region;
            r.re_min = c + shift;
            match count_roots(&r, spec) {
                Err(Error::RootOnBoundary(_)) if attempt < 7 => {
                    shift += 0.173 * search.tol;
                }
                other => return other,
            }
        }
        unreachable!()
    };

    if count_right_of(search.re_min)? == 0 {
        return Ok(None);
    }
    let (mut lo, mut hi) = (search.re_min, search.re_max);
    while hi - lo > search.tol {
        let mid = 0.5 * (lo + hi);
        if count_right_of(mid)? > 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Real `λ` at which the nonnegative real loop gain has spectral radius one.
///
/// For positive systems the loop gain is entrywise decreasing in real `λ`, so
/// this root is found by bisection; it is the dominant closed-loop eigenvalue
/// (the spectral bound). Returns `None` when the loop gain at every real `λ`
/// has radius below one, as for nilpotent feedback.
pub fn dominant_real_root(spec: &SystemSpec) -> Option<f64> {
    let radius = |lam: f64| -> f64 {
        let g = loop_gain(Complex64::new(lam, 0.0), spec);
        let real: DMatrix<f64> = g.map(|z| z.re.max(0.0));
        nonnegative_spectral_radius(&real)
    };
    let dmax = spec.max_velocity();
    let (mut lo, mut hi) = (-dmax, dmax);
    let mut expand = 0;
    while radius(lo) < 1.0 {
        lo *= 2.0;
        expand += 1;
        if expand > 12 {
            return None;
        }
    }
    while radius(hi) >= 1.0 {
        hi *= 2.0;
        expand += 1;
        if expand > 40 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if radius(mid) >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DelayMeasure;

    #[test]
    fn characteristic_value_examples() {
        let k = 0.5f64;
        let spec = SystemSpec::scalar(1.0, k);
        assert!(characteristic_value(Complex64::new(k.ln(), 0.0), &spec).norm() < 1e-15);
        let zero = SystemSpec::new(vec![1.0, 2.0], DMatrix::zeros(2, 2));
        assert_eq!(
            characteristic_value(Complex64::new(0.3, 1.0), &zero),
            Complex64::new(1.0, 0.0)
        );
        let l = 0.7;
        let delayed = SystemSpec::with_delay(
            vec![1.0],
            DelayMeasure::single_atom(-1.0, DMatrix::from_element(1, 1, l)),
        );
        assert!(
            (characteristic_value(Complex64::new(0.0, 0.0), &delayed) - (1.0 - l)).norm() < 1e-15
        );
    }

    #[test]
    fn winding_of_polynomial() {
        // (z - 0.5)(z + 0.5i)^2 has three zeros inside the unit box
        let region = RootSearchRegion::new(-1.0, 1.0, -1.0, 1.0);
        let f = |z: Complex64| (z - 0.5) * (z + Complex64::new(0.0, 0.5)).powi(2);
        assert_eq!(winding_number(&region, f).unwrap(), 3);
        let right = RootSearchRegion::new(0.6, 2.0, -1.0, 1.0);
        assert_eq!(winding_number(&right, f).unwrap(), 0);
    }

    #[test]
    fn scalar_root_counts() {
        let spec = SystemSpec::scalar(1.0, 0.5);
        let around = RootSearchRegion::new(-1.0, -0.4, -1.0, 1.0);
        assert_eq!(count_roots(&around, &spec).unwrap(), 1);
        let right = RootSearchRegion::new(1.0, 2.0, -1.0, 1.0);
        assert_eq!(count_roots(&right, &spec).unwrap(), 0);
        let tall = RootSearchRegion::new(-1.0, -0.4, -7.0, 7.0);
        assert_eq!(count_roots(&tall, &spec).unwrap(), 3);
        let zero = SystemSpec::new(vec![1.0], DMatrix::zeros(1, 1));
        assert_eq!(count_roots(&around, &zero).unwrap(), 0);
    }

    #[test]
    fn root_on_contour_is_reported() {
        let spec = SystemSpec::scalar(1.0, 0.5);
        let ln = 0.5f64.ln();
        let region = RootSearchRegion {
            samples_per_side: 16,
            ..RootSearchRegion::new(ln, 1.0, -1.0, 1.0)
        };
        assert!(matches!(
            count_roots(&region, &spec),
            Err(Error::RootOnBoundary(_))
        ));
    }

    #[test]
    fn invalid_region_is_rejected() {
        let spec = SystemSpec::scalar(1.0, 0.5);
        let bad = RootSearchRegion::new(1.0, 0.0, -1.0, 1.0);
        assert!(count_roots(&bad, &spec).is_err());
        let few = RootSearchRegion {
            samples_per_side: 8,
            ..RootSearchRegion::new(0.0, 1.0, -1.0, 1.0)
        };
        assert!(count_roots(&few, &spec).is_err());
    }

    #[test]
    fn abscissa_for_scalar_gains() {
        for k in [0.5f64, 2.0] {
            let spec = SystemSpec::scalar(1.0, k);
            let c = spectral_abscissa_bound(&spec, 5.0).unwrap().unwrap();
            assert!((c - k.ln()).abs() < 1e-3, "k={k}: {c}");
        }
        let zero = SystemSpec::new(vec![1.0], DMatrix::zeros(1, 1));
        assert_eq!(spectral_abscissa_bound(&zero, 5.0).unwrap(), None);
    }

    #[test]
    fn dominant_root_matches_closed_form() {
        for k in [0.25f64, 0.5, 2.0] {
            let r = dominant_real_root(&SystemSpec::scalar(2.0, k)).unwrap();
            assert!((r - 2.0 * k.ln()).abs() < 1e-12);
        }
        assert_eq!(dominant_real_root(&SystemSpec::scalar(1.0, 0.0)), None);
    }

    #[test]
    fn delay_dominant_root_solves_characteristic_equation() {
        let spec = SystemSpec::with_delay(
            vec![1.0],
            DelayMeasure::single_atom(-1.0, DMatrix::from_element(1, 1, 1.5)),
        );
        let r = dominant_real_root(&spec).unwrap();
        assert!(r > 0.0);
        assert!(characteristic_value(Complex64::new(r, 0.0), &spec).norm() < 1e-12);
    }
}
