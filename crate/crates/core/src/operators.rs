//! Closed-form Dirichlet operators and boundary transfer functions.
//!
//! For the transport system the state lifted from a boundary value `u` at
//! spectral parameter `λ` is `x ↦ diag(e^{-λx/d_i}) u`. Closing the loop with
//! `K` (at `x = 1`) or with the delayed spatial mean (through `μ̂`) gives the
//! finite-dimensional loop gains whose spectral radius at `λ = 0` decides
//! stability. Everything here accepts complex `λ` so the same functions serve
//! the characteristic-root search.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::model::{DelayMeasure, SystemSpec};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Below this modulus `(e^z - 1)/z` is evaluated by its Taylor series.
const SERIES_CUTOFF: f64 = 1e-3;

/// Below this value of `√(λ/σ)·π` the heat lift switches to its Taylor series.
const HEAT_SERIES_CUTOFF: f64 = 1e-4;

pub fn to_complex(m: &DMatrix<f64>) -> ComplexMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

/// `(e^z - 1)/z`, continuous through `z = 0`.
pub(crate) fn exp_difference_quotient(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_CUTOFF {
        let one = Complex64::new(1.0, 0.0);
        one + z / 2.0 + z * z / 6.0 + z * z * z / 24.0 + z * z * z * z / 120.0
    } else {
        (z.exp() - 1.0) / z
    }
}

/// `diag(e^{-λx/d_i})`.
pub fn dirichlet_e(lambda: Complex64, x: f64, spec: &SystemSpec) -> ComplexMatrix {
    let diag: Vec<Complex64> = spec
        .velocities
        .iter()
        .map(|&d| (-lambda * x / d).exp())
        .collect();
    ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag))
}

/// Loop gain of the undelayed feedback, `K·diag(e^{-λ/d_i})`.
pub fn transfer_hyperbolic(lambda: Complex64, spec: &SystemSpec) -> ComplexMatrix {
    let n = spec.n();
    let mut out = to_complex(&spec.coupling);
    for (col, &d) in spec.velocities.iter().enumerate().take(n) {
        let e = (-lambda / d).exp();
        for row in 0..n {
            out[(row, col)] *= e;
        }
    }
    out
}

/// Dirichlet lift of the scalar transport `u_t = ρ u_x` on `[0, 1]`: `e^{(λ/ρ)(x-1)}`.
pub fn dirichlet_transport(lambda: Complex64, rho: f64, x: f64) -> Complex64 {
    (lambda / rho * (x - 1.0)).exp()
}

/// Dirichlet lift of the heat equation on `[0, π]` with a Neumann control at
/// `x = 0` and a homogeneous Dirichlet end at `x = π`.
///
/// `sinh(a(π-x)) / (a·cosh(aπ))` with `a = √(λ/σ)`, and `π - x` at `λ = 0`.
pub fn dirichlet_heat(lambda: f64, sigma: f64, x: f64) -> f64 {
    assert!(lambda >= 0.0 && sigma > 0.0, "need λ ≥ 0 and σ > 0");
    let pi = std::f64::consts::PI;
    let s = pi - x;
    if lambda == 0.0 {
        return s;
    }
    let a = (lambda / sigma).sqrt();
    if a * pi < HEAT_SERIES_CUTOFF {
        // product of the sinh(as)/a and sech(aπ) series, truncated after a⁶
        let (s2, p2) = (s * s, pi * pi);
        let c1 = s * (s2 / 6.0 - p2 / 2.0);
        let c2 = s * (s2 * s2 / 120.0 - s2 * p2 / 12.0 + 5.0 * p2 * p2 / 24.0);
        let c3 = s
            * (s2 * s2 * s2 / 5040.0 - s2 * s2 * p2 / 240.0 + 5.0 * s2 * p2 * p2 / 144.0
                - 61.0 * p2 * p2 * p2 / 720.0);
        let a2 = a * a;
        return s + a2 * (c1 + a2 * (c2 + a2 * c3));
    }
    (a * s).sinh() / (a * (a * pi).cosh())
}

/// Laplace transform of the delay measure, `μ̂(λ) = ∫₋₁⁰ e^{λθ} dμ(θ)`.
///
/// Each constant density piece on `[a, b]` contributes
/// `value · (e^{λb} - e^{λa})/λ`, evaluated in closed form.
pub fn mu_hat(lambda: Complex64, mu: &DelayMeasure) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(mu.dim, mu.dim);
    for atom in &mu.atoms {
        let e = (lambda * atom.theta).exp();
        out += to_complex(&atom.weight) * e;
    }
    if let Some(density) = &mu.density {
        for (a, b, value) in density.pieces() {
            let len = b - a;
            let integral = (lambda * a).exp() * exp_difference_quotient(lambda * len) * len;
            out += to_complex(value) * integral;
        }
    }
    out
}

/// `∫₀¹ diag(e^{-λx/d_i}) dx = diag((d_i/λ)(1 - e^{-λ/d_i}))`, identity at `λ = 0`.
pub fn g_integral(lambda: Complex64, spec: &SystemSpec) -> ComplexMatrix {
    let diag: Vec<Complex64> = spec
        .velocities
        .iter()
        .map(|&d| exp_difference_quotient(-lambda / d))
        .collect();
    ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag))
}

/// Loop gain of the delayed feedback, `μ̂(λ)·G(λ)`.
///
/// # Panics
///
/// Panics if `spec` carries no delay measure.
pub fn loop_gain_delay(lambda: Complex64, spec: &SystemSpec) -> ComplexMatrix {
    let mu = spec
        .delay
        .as_ref()
        .expect("loop_gain_delay requires a delay measure");
    mu_hat(lambda, mu) * g_integral(lambda, spec)
}

/// The loop gain that applies to `spec`: delayed if a measure is present,
/// otherwise the undelayed feedback.
pub fn loop_gain(lambda: Complex64, spec: &SystemSpec) -> ComplexMatrix {
    if spec.delay.is_some() {
        loop_gain_delay(lambda, spec)
    } else {
        transfer_hyperbolic(lambda, spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn close(a: Complex64, b: f64, tol: f64) -> bool {
        (a - c(b)).norm() <= tol
    }

    fn two_by_two() -> SystemSpec {
        SystemSpec::new(
            vec![1.0, 2.0],
            DMatrix::from_row_slice(2, 2, &[0.1, 0.7, 0.4, 0.2]),
        )
    }

    #[test]
    fn dirichlet_e_values() {
        let spec = two_by_two();
        assert_eq!(
            dirichlet_e(c(0.0), 0.37, &spec),
            ComplexMatrix::identity(2, 2)
        );
        let one = SystemSpec::scalar(1.0, 0.0);
        assert!(close(
            dirichlet_e(c(1.0), 1.0, &one)[(0, 0)],
            0.367879441171442,
            1e-14
        ));
        let e = dirichlet_e(c(2.0), 1.0, &spec);
        assert!(close(e[(0, 0)], (-2.0f64).exp(), 1e-15));
        assert!(close(e[(1, 1)], (-1.0f64).exp(), 1e-15));
        assert_eq!(e[(0, 1)], c(0.0));
    }

    #[test]
    fn transfer_at_zero_is_coupling() {
        let spec = two_by_two();
        assert_eq!(
            transfer_hyperbolic(c(0.0), &spec),
            to_complex(&spec.coupling)
        );
    }

    #[test]
    fn transfer_scalar_and_zero_coupling() {
        let k = 0.8;
        let spec = SystemSpec::scalar(1.0, k);
        for lam in [-1.0, 0.3, 2.5] {
            assert!(close(
                transfer_hyperbolic(c(lam), &spec)[(0, 0)],
                k * (-lam).exp(),
                1e-15
            ));
        }
        let zero = SystemSpec::new(vec![1.0, 3.0], DMatrix::zeros(2, 2));
        let h = transfer_hyperbolic(Complex64::new(0.4, 2.0), &zero);
        assert!(h.iter().all(|v| *v == c(0.0)));
    }

    #[test]
    fn transport_lift() {
        for x in [0.0, 0.5, 1.0] {
            assert_eq!(dirichlet_transport(c(0.0), 2.0, x), c(1.0));
        }
        assert_eq!(
            dirichlet_transport(Complex64::new(3.0, -1.0), 0.5, 1.0),
            c(1.0)
        );
        assert!(close(dirichlet_transport(c(1.0), 1.0, 0.0), 1.0 / E, 1e-15));
    }

    #[test]
    fn heat_lift_branches() {
        assert_eq!(dirichlet_heat(0.0, 1.0, 0.0), PI);
        assert_eq!(dirichlet_heat(0.0, 1.0, PI), 0.0);
        assert!((dirichlet_heat(1e-12, 1.0, 0.0) - PI).abs() < 1e-6);
        // direct formula at a moderate λ
        let a: f64 = 0.5;
        let expect = (a * (PI - 1.0)).sinh() / (a * (a * PI).cosh());
        assert!((dirichlet_heat(0.25, 1.0, 1.0) - expect).abs() < 1e-15);
    }

    #[test]
    fn heat_lift_is_continuous_across_series_seam() {
        let sigma = 2.0;
        let a_seam = HEAT_SERIES_CUTOFF / PI;
        let lam_seam = a_seam * a_seam * sigma;
        for x in [0.0, 1.0, 2.5] {
            let below = dirichlet_heat(lam_seam * (1.0 - 1e-9), sigma, x);
            let above = dirichlet_heat(lam_seam * (1.0 + 1e-9), sigma, x);
            assert!((below - above).abs() < 1e-10, "seam jump at x={x}");
        }
    }

    #[test]
    fn mu_hat_cases() {
        let l = DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.0, 0.5]);
        let mu = DelayMeasure::single_atom(-1.0, l.clone())
            .with_density(vec![-0.8, -0.3], vec![DMatrix::from_element(2, 2, 0.2)]);
        let at0 = mu_hat(c(0.0), &mu);
        let mass = mu.total_mass();
        for (a, b) in at0.iter().zip(mass.iter()) {
            assert!(close(*a, *b, 1e-15));
        }

        let atom = DelayMeasure::single_atom(-1.0, l.clone());
        let h = mu_hat(c(1.3), &atom);
        for (a, b) in h.iter().zip(l.iter()) {
            assert!(close(*a, (-1.3f64).exp() * b, 1e-15));
        }

        let empty = mu_hat(Complex64::new(0.2, 5.0), &DelayMeasure::empty(3));
        assert!(empty.iter().all(|v| *v == c(0.0)));
    }

    #[test]
    fn mu_hat_density_matches_quadrature() {
        // oracle: composite midpoint rule of ∫ e^{λθ} dθ on a fine grid
        let lam = Complex64::new(-0.7, 2.3);
        let (a, b) = (-0.9, -0.15);
        let mu =
            DelayMeasure::empty(1).with_density(vec![a, b], vec![DMatrix::from_element(1, 1, 1.0)]);
        let steps = 200_000;
        let h = (b - a) / steps as f64;
        let quad: Complex64 = (0..steps)
            .map(|k| (lam * (a + (k as f64 + 0.5) * h)).exp() * h)
            .sum();
        assert!((mu_hat(lam, &mu)[(0, 0)] - quad).norm() < 1e-9);
    }

    #[test]
    fn g_integral_cases() {
        let spec = two_by_two();
        assert_eq!(g_integral(c(0.0), &spec), ComplexMatrix::identity(2, 2));
        let one = SystemSpec::scalar(1.0, 0.0);
        assert!(close(
            g_integral(c(1.0), &one)[(0, 0)],
            0.632120558828558,
            1e-14
        ));
        assert!(close(g_integral(c(1e-10), &one)[(0, 0)], 1.0, 1e-8));
        // oracle: trapezoid of e^{-λx/d} on a fine grid
        let lam = Complex64::new(0.9, -1.7);
        let steps = 100_000;
        let quad: Complex64 = (0..=steps)
            .map(|k| {
                let x = k as f64 / steps as f64;
                let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
                (-lam * x / 2.0).exp() * w / steps as f64
            })
            .sum();
        assert!((g_integral(lam, &spec)[(1, 1)] - quad).norm() < 1e-9);
    }

    #[test]
    fn delay_loop_at_zero_is_total_mass() {
        let l = DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.2, 0.5]);
        let spec =
            SystemSpec::with_delay(vec![1.0, 4.0], DelayMeasure::single_atom(-1.0, l.clone()));
        assert_eq!(loop_gain_delay(c(0.0), &spec), to_complex(&l));
        let empty = SystemSpec::with_delay(vec![1.0], DelayMeasure::empty(1));
        assert_eq!(loop_gain_delay(c(3.0), &empty)[(0, 0)], c(0.0));
    }

    #[test]
    fn continuity_at_zero() {
        let lam = c(1e-10);
        assert!((dirichlet_heat(1e-10, 1.0, 0.5) - (PI - 0.5)).abs() < 1e-8);
        let mu = DelayMeasure::empty(1)
            .with_atom(-0.5, DMatrix::from_element(1, 1, 0.4))
            .with_density(vec![-1.0, 0.0], vec![DMatrix::from_element(1, 1, 0.3)]);
        assert!(close(mu_hat(lam, &mu)[(0, 0)], 0.7, 1e-8));
        assert!(close(mu_hat(-lam, &mu)[(0, 0)], 0.7, 1e-8));
        let spec = two_by_two();
        assert!(close(g_integral(lam, &spec)[(1, 1)], 1.0, 1e-8));
    }

    #[test]
    fn monotone_decay_and_vanishing_at_infinity() {
        let spec = two_by_two();
        let h1 = transfer_hyperbolic(c(0.5), &spec);
        let h2 = transfer_hyperbolic(c(1.5), &spec);
        for (a, b) in h1.iter().zip(h2.iter()) {
            assert!(b.re <= a.re && b.re >= 0.0);
        }
        let knorm = spec.coupling.norm();
        let far = 50.0 * spec.max_velocity() * (1.0 + (1.0 + knorm).ln());
        assert!(transfer_hyperbolic(c(far), &spec).norm() < 1e-6);

        let delayed = SystemSpec::with_delay(
            vec![1.0, 2.0],
            DelayMeasure::single_atom(-0.5, spec.coupling.clone()),
        );
        assert!(loop_gain_delay(c(far), &delayed).norm() < 1e-6);
    }
}
