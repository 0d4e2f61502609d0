//! First-order upwind finite volumes.
//!
//! Under `d_i·dt/dx ≤ 1` each update is a convex combination of the old cell
//! and its upwind neighbour (or the inflow value), so nonnegative data stay
//! nonnegative exactly.

use nalgebra::DMatrix;

use crate::model::{Field, HistoryBuffer, SystemSpec};
use crate::{Error, Result};

use super::moc::{boundary_known_part, step_count, BoundaryTrace, MeanSeries};

/// Cell averages of all components at time `t`; `cells[(j, i)]` is cell `j`
/// of component `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FvState {
    pub cells: DMatrix<f64>,
    pub dx: f64,
    pub t: f64,
}

impl FvState {
    /// Midpoint sampling of `y0` on `m` cells.
    pub fn from_field(y0: &Field, m: usize) -> Self {
        let dx = 1.0 / m as f64;
        let cells = DMatrix::from_fn(m, y0.n(), |j, i| y0.sample(i, (j as f64 + 0.5) * dx));
        Self { cells, dx, t: 0.0 }
    }

    pub fn m(&self) -> usize {
        self.cells.nrows()
    }

    pub fn n(&self) -> usize {
        self.cells.ncols()
    }

    pub fn cell_center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dx
    }

    /// Exact `L²` norm of the piecewise-constant reconstruction.
    pub fn l2_norm(&self) -> f64 {
        (self.dx * self.cells.iter().map(|c| c * c).sum::<f64>()).sqrt()
    }

    pub fn linf_norm(&self) -> f64 {
        self.cells.iter().fold(0.0, |a, c| a.max(c.abs()))
    }

    pub fn mean(&self) -> Vec<f64> {
        (0..self.n())
            .map(|i| self.cells.column(i).sum() * self.dx)
            .collect()
    }

    pub fn min_value(&self) -> f64 {
        self.cells.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Last cell of every component, the upwind trace at `x = 1`.
    pub fn outflow(&self) -> Vec<f64> {
        let last = self.m() - 1;
        (0..self.n()).map(|i| self.cells[(last, i)]).collect()
    }
}

/// `dt = cfl·dx / max_i d_i` with `dx = 1/m`.
pub fn cfl_dt(spec: &SystemSpec, m: usize, cfl: f64) -> f64 {
    cfl / m as f64 / spec.max_velocity()
}

fn courant(d: f64, dt: f64, dx: f64) -> f64 {
    let nu = d * dt / dx;
    if (nu - 1.0).abs() < 1e-12 {
        1.0
    } else {
        nu
    }
}

/// One explicit upwind step with inflow `boundary_value` at `x = 0`.
pub fn step_upwind(
    state: &FvState,
    spec: &SystemSpec,
    dt: f64,
    boundary_value: &[f64],
) -> Result<FvState> {
    let m = state.m();
    let mut next = state.cells.clone();
    for (i, &d) in spec.velocities.iter().enumerate() {
        let nu = courant(d, dt, state.dx);
        if nu > 1.0 {
            return Err(Error::CflViolation {
                dt,
                max: state.dx / d,
            });
        }
        let keep = 1.0 - nu;
        next[(0, i)] = keep * state.cells[(0, i)] + nu * boundary_value[i];
        for j in 1..m {
            next[(j, i)] = keep * state.cells[(j, i)] + nu * state.cells[(j - 1, i)];
        }
    }
    Ok(FvState {
        cells: next,
        dx: state.dx,
        t: state.t + dt,
    })
}

/// Output of [`solve_fv`].
#[derive(Debug, Clone)]
pub struct FvSolution {
    pub dt: f64,
    pub states: Vec<FvState>,
    /// Inflow value applied during the step starting at `k·dt`.
    pub trace: BoundaryTrace,
}

impl FvSolution {
    pub fn l2_norms(&self) -> Vec<(f64, f64)> {
        self.states.iter().map(|s| (s.t, s.l2_norm())).collect()
    }

    pub fn final_state(&self) -> &FvState {
        self.states.last().expect("at least the initial state")
    }

    pub fn min_value(&self) -> f64 {
        self.states
            .iter()
            .map(FvState::min_value)
            .fold(self.trace.min_value(), f64::min)
    }
}

/// Upwind solution of the undelayed feedback system, every step emitted.
pub fn solve_fv(
    spec: &SystemSpec,
    y0: &Field,
    t_final: f64,
    m: usize,
    cfl: f64,
) -> Result<FvSolution> {
    if spec.delay.is_some() {
        return Err(Error::InvalidArgument(
            "system has a delay measure; pass a history".into(),
        ));
    }
    solve_fv_strided(spec, y0, None, t_final, m, cfl, 1)
}

/// Upwind solution with either closure; `phi` is required when `spec` has a
/// delay measure. Every `stride`-th state is emitted.
pub fn solve_fv_strided(
    spec: &SystemSpec,
    y0: &Field,
    phi: Option<&HistoryBuffer>,
    t_final: f64,
    m: usize,
    cfl: f64,
    stride: usize,
) -> Result<FvSolution> {
    crate::model::validate_system(spec).into_result()?;
    if m < 4 {
        return Err(Error::InvalidArgument(format!(
            "need at least 4 cells, got {m}"
        )));
    }
    if !(cfl > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cfl must be positive, got {cfl}"
        )));
    }
    if y0.n() != spec.n() {
        return Err(Error::InvalidArgument(
            "initial field has the wrong number of components".into(),
        ));
    }
    if cfl > 1.0 + 1e-12 {
        let dx = 1.0 / m as f64;
        return Err(Error::CflViolation {
            dt: cfl_dt(spec, m, cfl),
            max: dx / spec.max_velocity(),
        });
    }
    let mut dt = cfl_dt(spec, m, cfl);
    let steps = match step_count(t_final, dt) {
        Ok(s) => s,
        Err(_) => {
            let s = (t_final / dt).ceil() as usize;
            dt = t_final / s as f64;
            s
        }
    };
    let stride = stride.max(1);
    let n = spec.n();

    let mut state = FvState::from_field(y0, m);
    let mut means = match (&spec.delay, phi) {
        (Some(_), None) => {
            return Err(Error::HistoryGap("delayed closure needs a history".into()));
        }
        (Some(_), Some(phi)) => {
            if phi.span() < 1.0 - 1e-12 {
                return Err(Error::HistoryGap(format!(
                    "history spans only {}",
                    phi.span()
                )));
            }
            let lags = crate::model::ring_len(dt) - 1;
            let mut series = MeanSeries {
                dt,
                first: -(lags as i64),
                n,
                values: Vec::with_capacity((lags + steps + 1) * n),
            };
            for q in (1..=lags).rev() {
                let theta = (-(q as f64) * dt).max(-phi.span());
                series.push(&phi.query_mean(theta)?);
            }
            series.push(&state.mean());
            Some(series)
        }
        (None, _) => None,
    };

    let mut trace = BoundaryTrace::new(dt, n);
    let mut states = vec![state.clone()];
    for k in 0..steps {
        let t = k as f64 * dt;
        let inflow = match (&spec.delay, &means) {
            (Some(mu), Some(series)) => boundary_known_part(mu, series, t, k as i64 + 1),
            _ => {
                let out = state.outflow();
                (0..n)
                    .map(|r| (0..n).map(|c| spec.coupling[(r, c)] * out[c]).sum())
                    .collect()
            }
        };
        trace.push(&inflow);
        state = step_upwind(&state, spec, dt, &inflow)?;
        state.t = (k + 1) as f64 * dt;
        if let Some(series) = means.as_mut() {
            series.push(&state.mean());
        }
        if (k + 1) % stride == 0 || k + 1 == steps {
            states.push(state.clone());
        }
    }
    Ok(FvSolution { dt, states, trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cfl_examples() {
        let two = SystemSpec::new(vec![1.0, 2.0], DMatrix::zeros(2, 2));
        assert!((cfl_dt(&two, 100, 1.0) - 0.005).abs() < 1e-18);
        assert!((cfl_dt(&two, 100, 0.5) - 0.0025).abs() < 1e-18);
        assert!((cfl_dt(&SystemSpec::scalar(1.0, 0.0), 10, 1.0) - 0.1).abs() < 1e-17);
    }

    #[test]
    fn zero_stays_zero_and_constants_are_preserved() {
        let spec = SystemSpec::new(vec![1.0, 3.0], DMatrix::zeros(2, 2));
        let zero = FvState::from_field(&Field::zeros(10, 2), 10);
        let next = step_upwind(&zero, &spec, 0.01, &[0.0, 0.0]).unwrap();
        assert!(next.cells.iter().all(|&c| c == 0.0));

        let c = FvState::from_field(&Field::constant(10, &[2.5, -1.0]), 10);
        let next = step_upwind(&c, &spec, 0.02, &[2.5, -1.0]).unwrap();
        assert!(next
            .cells
            .column(0)
            .iter()
            .all(|&v| (v - 2.5).abs() < 1e-15));
        assert!(next
            .cells
            .column(1)
            .iter()
            .all(|&v| (v + 1.0).abs() < 1e-15));
    }

    #[test]
    fn unit_courant_is_an_exact_shift() {
        let spec = SystemSpec::scalar(1.0, 0.0);
        let m = 20;
        let mut state = FvState::from_field(&Field::from_fn(m, 1, |x, _| 1.0 + x), m);
        let dt = cfl_dt(&spec, m, 1.0);
        for _ in 0..m {
            state = step_upwind(&state, &spec, dt, &[0.0]).unwrap();
        }
        assert!(state.cells.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn courant_above_one_is_rejected() {
        let spec = SystemSpec::scalar(2.0, 0.0);
        let s = FvState::from_field(&Field::zeros(10, 1), 10);
        assert!(matches!(
            step_upwind(&s, &spec, 0.1, &[0.0]),
            Err(Error::CflViolation { .. })
        ));
        assert!(solve_fv(&spec, &Field::zeros(10, 1), 1.0, 10, 1.5).is_err());
    }

    #[test]
    fn nilpotent_at_unit_cfl() {
        let spec = SystemSpec::scalar(2.0, 0.0);
        let y0 = Field::from_fn(50, 1, |x, _| (3.0 * x).sin().abs() + 0.1);
        let sol = solve_fv(&spec, &y0, 1.0, 40, 1.0).unwrap();
        for s in sol.states.iter().filter(|s| s.t >= 0.5 - 1e-12) {
            assert!(s.cells.iter().all(|&c| c == 0.0), "t={}", s.t);
        }
    }

    #[test]
    fn delay_closure_needs_history() {
        let mu = crate::model::DelayMeasure::single_atom(-1.0, DMatrix::from_element(1, 1, 0.5));
        let spec = SystemSpec::with_delay(vec![1.0], mu);
        let y0 = Field::constant(10, &[1.0]);
        assert!(solve_fv(&spec, &y0, 1.0, 10, 1.0).is_err());
        assert!(matches!(
            solve_fv_strided(&spec, &y0, None, 1.0, 10, 1.0, 1),
            Err(Error::HistoryGap(_))
        ));
    }

    #[test]
    fn single_atom_delay_inflow_reads_history_mean() {
        let l = 0.5;
        let mu = crate::model::DelayMeasure::single_atom(-1.0, DMatrix::from_element(1, 1, l));
        let spec = SystemSpec::with_delay(vec![1.0], mu);
        let y0 = Field::constant(20, &[1.0]);
        let phi = HistoryBuffer::constant(0.05, 0.0, &Field::constant(20, &[2.0])).unwrap();
        let sol = solve_fv_strided(&spec, &y0, Some(&phi), 0.5, 20, 1.0, 1).unwrap();
        // for t < 1 the delayed mean is the history mean 2.0
        assert!(sol
            .trace
            .iter()
            .all(|(_, u)| (u[0] - l * 2.0).abs() < 1e-14));
    }
}
