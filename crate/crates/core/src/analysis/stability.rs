use nalgebra::DMatrix;

use crate::model::{
    positivity_violations, validate_system, Criterion, DelayMeasure, StabilityReport, SystemSpec,
    DEFAULT_TOL_MARGINAL,
};
use num_complex::Complex64;

use crate::operators::{dirichlet_heat, loop_gain_delay};
use crate::{Error, Result};

use super::spectral::{nonnegative_spectral_radius, spectral_radius, spectral_radius_real};

fn require_positive(spec: &SystemSpec) -> Result<()> {
    validate_system(spec).into_result()?;
    let v = positivity_violations(spec);
    if v.is_empty() {
        Ok(())
    } else {
        let msg = v
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        Err(Error::PositivityViolation(msg))
    }
}

/// Verdict for the undelayed feedback `y(0,t) = K y(1,t)`: stable iff `r(K) < 1`.
pub fn stability_hyperbolic(spec: &SystemSpec) -> Result<StabilityReport> {
    if spec.delay.is_some() {
        return Err(Error::InvalidArgument(
            "system has a delay measure; use stability_delay".into(),
        ));
    }
    require_positive(spec)?;
    let r = spectral_radius_real(&spec.coupling)?;
    Ok(StabilityReport::new(
        r,
        Criterion::HyperbolicFeedback,
        DEFAULT_TOL_MARGINAL,
    ))
}

/// Verdict for the delayed feedback: stable iff `r(μ([-1,0])) < 1`.
///
/// `μ([-1,0]) = μ̂(0)·G(0)` is the delay loop gain at `λ = 0`.
pub fn stability_delay(spec: &SystemSpec) -> Result<StabilityReport> {
    if spec.delay.is_none() {
        return Err(Error::InvalidArgument("system has no delay measure".into()));
    }
    require_positive(spec)?;
    let r = spectral_radius(&loop_gain_delay(Complex64::new(0.0, 0.0), spec))?;
    Ok(StabilityReport::new(
        r,
        Criterion::DelayedFeedback,
        DEFAULT_TOL_MARGINAL,
    ))
}

/// Dispatches to [`stability_delay`] or [`stability_hyperbolic`].
pub fn stability_report(spec: &SystemSpec) -> Result<StabilityReport> {
    if spec.delay.is_some() {
        stability_delay(spec)
    } else {
        stability_hyperbolic(spec)
    }
}

/// Sufficient test `r(|μ|([-1,0])) < 1`. A `false` answer says nothing about
/// instability.
pub fn small_delay_sufficient(mu: &DelayMeasure) -> bool {
    nonnegative_spectral_radius(&mu.total_variation()) < 1.0
}

/// Heat equation on `[0, π]` with boundary `u_x(0) + k u(0) = 0`, `u(π) = 0`:
/// the loop gain at `λ = 0` is `k·π`.
pub fn stability_heat_robin(k: f64, sigma: f64) -> Result<StabilityReport> {
    if !(k >= 0.0) || !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "heat analyzer needs k >= 0 and sigma > 0, got k={k}, sigma={sigma}"
        )));
    }
    let r = k * dirichlet_heat(0.0, sigma, 0.0);
    let loop_gain = DMatrix::from_element(1, 1, r);
    let r = spectral_radius_real(&loop_gain)?;
    Ok(StabilityReport::new(
        r,
        Criterion::HeatRobin,
        DEFAULT_TOL_MARGINAL,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Verdict;
    use std::f64::consts::PI;

    #[test]
    fn scalar_transport_gain_half_is_stable() {
        let r = stability_hyperbolic(&SystemSpec::scalar(1.0, 0.5)).unwrap();
        assert_eq!(r.verdict, Verdict::UniformlyExponentiallyStable);
        assert_eq!(r.margin, 0.5);
        assert_eq!(r.criterion, Criterion::HyperbolicFeedback);
    }

    #[test]
    fn identity_coupling_is_marginal() {
        let spec = SystemSpec::new(vec![1.0, 2.0, 3.0], DMatrix::identity(3, 3));
        assert_eq!(
            stability_hyperbolic(&spec).unwrap().verdict,
            Verdict::Marginal
        );
    }

    #[test]
    fn nilpotent_coupling_is_stable() {
        let spec = SystemSpec::new(
            vec![1.0, 1.0],
            DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 0.0, 0.0]),
        );
        let r = stability_hyperbolic(&spec).unwrap();
        assert!(r.verdict.is_stable());
        assert!(r.spectral_radius_loop < 1e-12);
    }

    #[test]
    fn negative_coupling_is_rejected() {
        let spec = SystemSpec::scalar(1.0, -0.5);
        assert!(matches!(
            stability_hyperbolic(&spec),
            Err(Error::PositivityViolation(_))
        ));
    }

    #[test]
    fn delay_atom_verdicts() {
        let stable = SystemSpec::with_delay(
            vec![1.0],
            DelayMeasure::single_atom(-1.0, DMatrix::from_element(1, 1, 0.5)),
        );
        assert!(stability_delay(&stable).unwrap().verdict.is_stable());
        let unstable = SystemSpec::with_delay(
            vec![1.0],
            DelayMeasure::single_atom(-1.0, DMatrix::from_element(1, 1, 1.5)),
        );
        assert_eq!(
            stability_delay(&unstable).unwrap().verdict,
            Verdict::Unstable
        );
        let empty = SystemSpec::with_delay(vec![2.0], DelayMeasure::empty(1));
        let r = stability_delay(&empty).unwrap();
        assert!(r.verdict.is_stable());
        assert_eq!(r.spectral_radius_loop, 0.0);
    }

    #[test]
    fn small_delay_predicate() {
        let half = DelayMeasure::single_atom(-1.0, DMatrix::from_element(1, 1, 0.5));
        assert!(small_delay_sufficient(&half));
        assert!(small_delay_sufficient(&DelayMeasure::empty(2)));
        let heavy = DelayMeasure::empty(1)
            .with_atom(-1.0, DMatrix::from_element(1, 1, 0.2))
            .with_atom(-0.5, DMatrix::from_element(1, 1, 0.9));
        assert!(!small_delay_sufficient(&heavy));
        // positive scalar case: r(μ̂(0)) is the same 1.1, so the system is unstable
        let spec = SystemSpec::with_delay(vec![1.0], heavy);
        let r = stability_delay(&spec).unwrap();
        assert!((r.spectral_radius_loop - 1.1).abs() < 1e-14);
        assert_eq!(r.verdict, Verdict::Unstable);
    }

    #[test]
    fn heat_robin_threshold() {
        let r = stability_heat_robin(0.1, 1.0).unwrap();
        assert!((r.spectral_radius_loop - 0.1 * PI).abs() < 1e-12);
        assert!(r.verdict.is_stable());
        assert_eq!(
            stability_heat_robin(1.0 / PI, 1.0).unwrap().verdict,
            Verdict::Marginal
        );
        let zero = stability_heat_robin(0.0, 3.0).unwrap();
        assert_eq!(zero.spectral_radius_loop, 0.0);
        assert_eq!(
            stability_heat_robin(0.5, 1.0).unwrap().verdict,
            Verdict::Unstable
        );
        assert!(stability_heat_robin(-1.0, 1.0).is_err());
    }
}
