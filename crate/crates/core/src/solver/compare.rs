//! Exact-vs-upwind error measurements.

use crate::model::{Field, HistoryBuffer, SystemSpec};
use crate::{Error, Result};

use super::fv::solve_fv_strided;
use super::moc::{solve_moc_delay_strided, solve_moc_strided};

/// `L²` distance at time `t` between the upwind solution on `m` cells and
/// the exact solution sampled at the cell centres.
pub fn fv_error_vs_exact(
    spec: &SystemSpec,
    y0: &Field,
    phi: Option<&HistoryBuffer>,
    t: f64,
    m: usize,
    cfl: f64,
) -> Result<f64> {
    let fv = solve_fv_strided(spec, y0, phi, t, m, cfl, usize::MAX)?;
    let state = fv.final_state();

    // exact solution on a grid whose odd nodes are the cell centres
    let fine = Field::from_fn(2 * m, spec.n(), |x, i| y0.sample(i, x));
    let dmax = spec.max_velocity();
    let dt0 = (0.25 / dmax).min(1.0 / (2.0 * m as f64 * dmax));
    let steps = (t / dt0 - 1e-9).ceil().max(1.0);
    let dt = t / steps;
    let exact = match (&spec.delay, phi) {
        (Some(_), Some(phi)) => solve_moc_delay_strided(spec, &fine, phi, t, dt, usize::MAX)?,
        (Some(_), None) => return Err(Error::HistoryGap("delayed closure needs a history".into())),
        (None, _) => solve_moc_strided(spec, &fine, t, dt, usize::MAX)?,
    };
    let field = exact.final_field();
    let mut acc = 0.0;
    for j in 0..m {
        for i in 0..spec.n() {
            let diff = state.cells[(j, i)] - field.get(2 * j + 1, i);
            acc += diff * diff;
        }
    }
    Ok((acc * state.dx).sqrt())
}

/// Least-squares slope of `ln(error)` against `ln(dx)` over `(m, error)` pairs.
pub fn loglog_slope(pairs: &[(usize, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = pairs
        .iter()
        .map(|&(m, e)| ((1.0 / m as f64).ln(), e.ln()))
        .collect();
    let k = pts.len() as f64;
    let xm = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - xm).powi(2)).sum();
    sxy / sxx
}

/// Errors of [`fv_error_vs_exact`] for each grid size and their fitted order.
pub fn convergence_study(
    spec: &SystemSpec,
    y0: &Field,
    phi: Option<&HistoryBuffer>,
    t: f64,
    grids: &[usize],
    cfl: f64,
) -> Result<(Vec<(usize, f64)>, f64)> {
    if grids.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two grid sizes".into(),
        ));
    }
    let errors = grids
        .iter()
        .map(|&m| fv_error_vs_exact(spec, y0, phi, t, m, cfl).map(|e| (m, e)))
        .collect::<Result<Vec<_>>>()?;
    let slope = loglog_slope(&errors);
    Ok((errors, slope))
}
