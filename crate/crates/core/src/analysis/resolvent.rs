use nalgebra::DMatrix;

use crate::model::SystemSpec;
use crate::{Error, Result};

use super::spectral::spectral_radius_real;

const RESIDUAL_TOL: f64 = 1e-10;
const ORDER_TOL: f64 = 1e-12;
const NEUMANN_TERMS: usize = 50;
const NEUMANN_TOL: f64 = 1e-12;
const MAX_CELLS: usize = 512;

/// Upwind discretization of the boundary-controlled transport system on `m`
/// cells per component; the state index of cell `j` of component `i` is
/// `i·m + j`.
#[derive(Debug, Clone)]
pub struct DiscreteOperators {
    /// Open-loop generator with zero inflow.
    pub a: DMatrix<f64>,
    /// Injection of a boundary value into the first cell of each component.
    pub b: DMatrix<f64>,
    /// Read-out of the last cell of each component, times `K`.
    pub m: DMatrix<f64>,
}

impl DiscreteOperators {
    pub fn new(spec: &SystemSpec, m_cells: usize) -> Self {
        let n = spec.n();
        let size = n * m_cells;
        let h = 1.0 / m_cells as f64;
        let mut a = DMatrix::zeros(size, size);
        let mut b = DMatrix::zeros(size, n);
        let mut c = DMatrix::zeros(n, size);
        for (i, &d) in spec.velocities.iter().enumerate() {
            let rate = d / h;
            for j in 0..m_cells {
                let idx = i * m_cells + j;
                a[(idx, idx)] = -rate;
                if j > 0 {
                    a[(idx, idx - 1)] = rate;
                }
            }
            b[(i * m_cells, i)] = rate;
            c[(i, i * m_cells + m_cells - 1)] = 1.0;
        }
        let m = &spec.coupling * c;
        Self { a, b, m }
    }

    /// Closed-loop generator `A + B·M`.
    pub fn closed_loop(&self) -> DMatrix<f64> {
        &self.a + &self.b * &self.m
    }

    /// `R(λ, A) = (λ - A)^{-1}`.
    pub fn open_resolvent(&self, lambda: f64) -> Option<DMatrix<f64>> {
        shifted_inverse(&self.a, lambda)
    }

    /// Discrete Dirichlet lift `D_λ = R(λ, A)·B`; column `i` is the cell
    /// profile approximating `e^{-λx/d_i}`.
    pub fn dirichlet(&self, lambda: f64) -> Option<DMatrix<f64>> {
        self.open_resolvent(lambda).map(|r| r * &self.b)
    }
}

fn shifted_inverse(a: &DMatrix<f64>, lambda: f64) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    (DMatrix::identity(n, n) * lambda - a).try_inverse()
}

/// Outcome of [`verify_resolvent_identity`].
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventReport {
    pub lambda: f64,
    pub m_cells: usize,
    /// Spectral radius of the discrete loop gain `M·D_λ`.
    pub loop_radius: f64,
    /// `‖R(λ, A_cl) - (I - D_λ M)^{-1} R(λ, A)‖_∞` (max entry).
    pub max_abs_residual: f64,
    /// `R(λ, A_cl) ≥ R(λ, A)` entrywise.
    pub entrywise_order_ok: bool,
    /// `R(λ, A) ≥ 0` entrywise.
    pub positivity_ok: bool,
    /// `‖(I - M D_λ)^{-1} - Σ_{j≤50} (M D_λ)^j‖` (max entry).
    pub neumann_residual: f64,
}

impl ResolventReport {
    pub fn passed(&self) -> bool {
        self.max_abs_residual <= RESIDUAL_TOL
            && self.entrywise_order_ok
            && self.positivity_ok
            && self.neumann_residual <= NEUMANN_TOL
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// Checks the closed-loop resolvent factorization
/// `R(λ, A_cl) = (I - D_λ M)^{-1} R(λ, A)` and the order
/// `R(λ, A_cl) ≥ R(λ, A) ≥ 0` on the upwind discretization with `m_cells`
/// cells per component.
pub fn verify_resolvent_identity(
    spec: &SystemSpec,
    lambda: f64,
    m_cells: usize,
) -> Result<ResolventReport> {
    if spec.delay.is_some() {
        return Err(Error::InvalidArgument(
            "resolvent check covers undelayed systems only".into(),
        ));
    }
    crate::model::validate_system(spec).into_result()?;
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if !(1..=MAX_CELLS).contains(&m_cells) {
        return Err(Error::InvalidArgument(format!(
            "m_cells must lie in 1..={MAX_CELLS}"
        )));
    }
    let h = 1.0 / m_cells as f64;
    if spec
        .velocities
        .iter()
        .any(|&d| (lambda + d / h).abs() < 1e-8)
    {
        return Err(Error::SingularResolvent(lambda));
    }

    let ops = DiscreteOperators::new(spec, m_cells);
    let size = ops.a.nrows();
    let n = spec.n();
    let r_open = ops
        .open_resolvent(lambda)
        .ok_or(Error::SingularResolvent(lambda))?;
    let d_lambda = &r_open * &ops.b;
    let loop_gain = &ops.m * &d_lambda;
    let loop_radius = spectral_radius_real(&loop_gain)?;
    if loop_radius >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "discrete loop radius {loop_radius} at lambda = {lambda} is not below one"
        )));
    }

    let r_closed =
        shifted_inverse(&ops.closed_loop(), lambda).ok_or(Error::SingularResolvent(lambda))?;
    let factor = (DMatrix::identity(size, size) - &d_lambda * &ops.m)
        .try_inverse()
        .ok_or(Error::SingularResolvent(lambda))?;
    let factored = factor * &r_open;
    let max_abs_residual = max_abs(&(&r_closed - &factored));

    let entrywise_order_ok = (&r_closed - &r_open).iter().all(|&v| v >= -ORDER_TOL);
    let positivity_ok = r_open.iter().all(|&v| v >= -ORDER_TOL);

    let inv = (DMatrix::identity(n, n) - &loop_gain)
        .try_inverse()
        .ok_or(Error::SingularResolvent(lambda))?;
    let mut series = DMatrix::identity(n, n);
    let mut power = DMatrix::identity(n, n);
    for _ in 0..NEUMANN_TERMS {
        power = &power * &loop_gain;
        series += &power;
    }
    let neumann_residual = max_abs(&(inv - series));

    Ok(ResolventReport {
        lambda,
        m_cells,
        loop_radius,
        max_abs_residual,
        entrywise_order_ok,
        positivity_ok,
        neumann_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_half_gain_passes() {
        let rep = verify_resolvent_identity(&SystemSpec::scalar(1.0, 0.5), 1.0, 64).unwrap();
        assert!(rep.max_abs_residual <= 1e-10, "{rep:?}");
        assert!(rep.entrywise_order_ok && rep.positivity_ok);
        assert!(rep.neumann_residual <= 1e-12);
        assert!(rep.passed());
    }

    #[test]
    fn discrete_loop_approximates_continuous_gain() {
        // M D_λ → k e^{-λ/d} as the grid is refined
        let rep = verify_resolvent_identity(&SystemSpec::scalar(1.0, 0.5), 1.0, 512).unwrap();
        assert!((rep.loop_radius - 0.5 * (-1.0f64).exp()).abs() < 2e-3);
    }

    #[test]
    fn zero_coupling_gives_identical_resolvents() {
        let spec = SystemSpec::new(vec![1.0, 3.0], DMatrix::zeros(2, 2));
        let ops = DiscreteOperators::new(&spec, 16);
        let open = ops.open_resolvent(2.0).unwrap();
        let closed = shifted_inverse(&ops.closed_loop(), 2.0).unwrap();
        assert_eq!(open, closed);
        let rep = verify_resolvent_identity(&spec, 2.0, 16).unwrap();
        assert_eq!(rep.max_abs_residual, 0.0);
    }

    #[test]
    fn dirichlet_columns_are_geometric_profiles() {
        let spec = SystemSpec::scalar(2.0, 0.0);
        let m = 8;
        let ops = DiscreteOperators::new(&spec, m);
        let d = ops.dirichlet(1.0).unwrap();
        let rate = 2.0 * m as f64;
        let q = rate / (1.0 + rate);
        for j in 0..m {
            assert!((d[(j, 0)] - q.powi(j as i32 + 1)).abs() < 1e-14);
        }
    }

    #[test]
    fn argument_errors() {
        let spec = SystemSpec::scalar(1.0, 0.5);
        assert!(verify_resolvent_identity(&spec, 1.0, 1024).is_err());
        assert!(verify_resolvent_identity(&spec, -1.0, 16).is_err());
        let hot = SystemSpec::scalar(1.0, 5.0);
        assert!(verify_resolvent_identity(&hot, 0.1, 16).is_err());
    }
}
