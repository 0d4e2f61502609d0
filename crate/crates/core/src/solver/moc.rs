//! Method-of-characteristics solver.
//!
//! Component `i` is transported right at speed `d_i`, so
//! `y_i(x, t) = y0_i(x - d_i t)` ahead of the front and `u_i(t - x/d_i)`
//! behind it, where `u(t) = y(0, t)` is the boundary trace. The trace is
//! advanced on the `dt` grid from the feedback law; lookbacks that fall between
//! grid times are linearly interpolated.

use nalgebra::DMatrix;

use crate::model::{DelayMeasure, Field, HistoryBuffer, SystemSpec};
use crate::{Error, Result};

/// Tolerance used when comparing grid positions with characteristic fronts.
const FRONT_TOL: f64 = 1e-12;
const COMPAT_TOL: f64 = 1e-9;

/// Boundary values `u(k·dt) = y(0, k·dt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub dt: f64,
    n: usize,
    values: Vec<f64>,
}

impl BoundaryTrace {
    pub(crate) fn new(dt: f64, n: usize) -> Self {
        Self {
            dt,
            n,
            values: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, u: &[f64]) {
        debug_assert_eq!(u.len(), self.n);
        self.values.extend_from_slice(u);
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.n.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `u(k·dt)`.
    pub fn get(&self, k: usize) -> &[f64] {
        &self.values[k * self.n..(k + 1) * self.n]
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.values
            .chunks(self.n)
            .enumerate()
            .map(move |(k, u)| (k as f64 * self.dt, u))
    }

    /// Component `i` at time `s ≥ 0`, linear between recorded steps.
    pub fn at(&self, i: usize, s: f64) -> f64 {
        let p = (s / self.dt).max(0.0);
        let r = p.round();
        if (p - r).abs() < 1e-9 {
            return self.values[r as usize * self.n + i];
        }
        let k = p.floor() as usize;
        let w = p - k as f64;
        (1.0 - w) * self.values[k * self.n + i] + w * self.values[(k + 1) * self.n + i]
    }

    pub fn is_nonnegative(&self, tol: f64) -> bool {
        self.values.iter().all(|&v| v >= -tol)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Output of the exact solver.
#[derive(Debug, Clone)]
pub struct Solution {
    pub trajectory: Vec<(f64, Field)>,
    pub trace: BoundaryTrace,
    /// Fields covering the last unit of time, for restarting a delayed run.
    pub history: Option<HistoryBuffer>,
    pub warnings: Vec<String>,
}

impl Solution {
    pub fn final_field(&self) -> &Field {
        &self.trajectory.last().expect("trajectory is never empty").1
    }

    /// `(t, ‖y(t)‖_2)` pairs.
    pub fn l2_norms(&self) -> Vec<(f64, f64)> {
        self.trajectory
            .iter()
            .map(|(t, f)| (*t, f.l2_norm()))
            .collect()
    }

    pub fn min_value(&self) -> f64 {
        self.trajectory
            .iter()
            .map(|(_, f)| f.min_value())
            .fold(self.trace.min_value(), f64::min)
    }
}

pub(crate) fn step_count(t_final: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !(t_final >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need dt > 0 and t_final >= 0, got dt={dt}, t_final={t_final}"
        )));
    }
    let steps = (t_final / dt).round();
    if (steps * dt - t_final).abs() > 1e-9 * t_final.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "dt={dt} does not divide t_final={t_final}"
        )));
    }
    Ok(steps as usize)
}

fn check_common(spec: &SystemSpec, y0: &Field, dt: f64) -> Result<()> {
    crate::model::validate_system(spec).into_result()?;
    if y0.n() != spec.n() {
        return Err(Error::InvalidArgument(format!(
            "initial field has {} components, system has {}",
            y0.n(),
            spec.n()
        )));
    }
    let max = 0.25 / spec.max_velocity();
    if dt > max * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, max });
    }
    Ok(())
}

/// Evaluates the field at time `t` from the initial data and the trace.
fn field_at(y0: &Field, trace: &BoundaryTrace, velocities: &[f64], t: f64) -> Field {
    let m = y0.m();
    let mut out = Field::zeros(m, y0.n());
    for (i, &d) in velocities.iter().enumerate() {
        let front = d * t;
        for j in 0..=m {
            let x = y0.x(j);
            let v = if x > front + FRONT_TOL {
                y0.sample(i, x - front)
            } else {
                trace.at(i, (t - x / d).max(0.0))
            };
            out.set(j, i, v);
        }
    }
    out
}

/// Re-evaluates only the nodes whose value depends on the newest trace entry.
fn refresh_inflow_nodes(
    field: &mut Field,
    trace: &BoundaryTrace,
    velocities: &[f64],
    t: f64,
    dt: f64,
) {
    for (i, &d) in velocities.iter().enumerate() {
        for j in 0..=field.m() {
            let x = field.x(j);
            if x / d >= dt || x > d * t + FRONT_TOL {
                break;
            }
            field.set(j, i, trace.at(i, (t - x / d).max(0.0)));
        }
    }
}

/// Outgoing value `y_i(1, t)` from the characteristic arriving at `x = 1`.
fn outflow(y0: &Field, trace: &BoundaryTrace, d: f64, i: usize, t: f64) -> f64 {
    let transit = 1.0 / d;
    if t <= transit + FRONT_TOL {
        y0.sample(i, (1.0 - d * t).max(0.0))
    } else {
        trace.at(i, t - transit)
    }
}

/// Exact solution of the undelayed feedback system, every step emitted.
pub fn solve_moc(spec: &SystemSpec, y0: &Field, t_final: f64, dt: f64) -> Result<Solution> {
    solve_moc_strided(spec, y0, t_final, dt, 1)
}

/// As [`solve_moc`] but emitting every `stride`-th step (the last step is
/// always emitted).
pub fn solve_moc_strided(
    spec: &SystemSpec,
    y0: &Field,
    t_final: f64,
    dt: f64,
    stride: usize,
) -> Result<Solution> {
    if spec.delay.is_some() {
        return Err(Error::InvalidArgument(
            "system has a delay measure; use solve_moc_delay".into(),
        ));
    }
    check_common(spec, y0, dt)?;
    let steps = step_count(t_final, dt)?;
    let stride = stride.max(1);
    let n = spec.n();
    let k_mat = &spec.coupling;
    let mut trace = BoundaryTrace::new(dt, n);
    let mut trajectory = vec![(0.0, y0.clone())];
    let mut outgoing = vec![0.0; n];
    let mut u = vec![0.0; n];

    for k in 0..=steps {
        let t = k as f64 * dt;
        for (i, &d) in spec.velocities.iter().enumerate() {
            outgoing[i] = outflow(y0, &trace, d, i, t);
        }
        for (r, ur) in u.iter_mut().enumerate() {
            *ur = (0..n).map(|c| k_mat[(r, c)] * outgoing[c]).sum();
        }
        trace.push(&u);
        if k > 0 && (k % stride == 0 || k == steps) {
            trajectory.push((t, field_at(y0, &trace, &spec.velocities, t)));
        }
    }
    Ok(Solution {
        trajectory,
        trace,
        history: None,
        warnings: Vec::new(),
    })
}

/// Piecewise-linear spatial-mean series `X̄(k·dt)` for `k ≥ first`.
pub(crate) struct MeanSeries {
    pub(crate) dt: f64,
    pub(crate) first: i64,
    pub(crate) n: usize,
    pub(crate) values: Vec<f64>,
}

impl MeanSeries {
    pub(crate) fn push(&mut self, mean: &[f64]) {
        self.values.extend_from_slice(mean);
    }

    fn node(&self, k: i64, i: usize) -> f64 {
        self.values[(k - self.first) as usize * self.n + i]
    }

    /// Value at `s`, treating node `current` as zero (it is still unknown).
    fn at(&self, s: f64, i: usize, current: i64) -> f64 {
        let p = s / self.dt;
        let r = p.round();
        let (k, w) = if (p - r).abs() < 1e-9 {
            (r as i64, 0.0)
        } else {
            (p.floor() as i64, p - p.floor())
        };
        let k = k.max(self.first);
        let get = |q: i64| if q >= current { 0.0 } else { self.node(q, i) };
        if w == 0.0 {
            get(k)
        } else {
            (1.0 - w) * get(k) + w * get(k + 1)
        }
    }

    /// `∫_{s0}^{s1} X̄_i(s) ds`, exact for the piecewise-linear interpolant.
    fn integral(&self, s0: f64, s1: f64, i: usize, current: i64) -> f64 {
        if s1 <= s0 {
            return 0.0;
        }
        let mut acc = 0.0;
        let mut a = s0;
        while a < s1 {
            let cell_end = ((a / self.dt + 1e-9).floor() + 1.0) * self.dt;
            let b = cell_end.min(s1);
            acc += 0.5 * (b - a) * (self.at(a, i, current) + self.at(b, i, current));
            a = b;
        }
        acc
    }
}

/// Hat-function weight of the node at `t` evaluated at `t + θ`.
fn newest_weight(theta: f64, dt: f64) -> f64 {
    if theta > -dt {
        1.0 + theta / dt
    } else {
        0.0
    }
}

/// `∫_{a}^{b} newest_weight(θ) dθ`.
fn newest_weight_integral(a: f64, b: f64, dt: f64) -> f64 {
    let lo = a.max(-dt);
    let hi = b.min(0.0);
    if hi <= lo {
        return 0.0;
    }
    (hi - lo) + (hi * hi - lo * lo) / (2.0 * dt)
}

/// Coefficient matrix of the newest mean `X̄(t)` in the boundary functional.
fn newest_coefficient(mu: &DelayMeasure, dt: f64) -> DMatrix<f64> {
    let mut psi = DMatrix::zeros(mu.dim, mu.dim);
    for atom in &mu.atoms {
        let w = newest_weight(atom.theta, dt);
        if w != 0.0 {
            psi += &atom.weight * w;
        }
    }
    if let Some(density) = &mu.density {
        for (a, b, value) in density.pieces() {
            let w = newest_weight_integral(a, b, dt);
            if w != 0.0 {
                psi += value * w;
            }
        }
    }
    psi
}

/// Boundary functional with the newest mean set to zero.
pub(crate) fn boundary_known_part(
    mu: &DelayMeasure,
    means: &MeanSeries,
    t: f64,
    current: i64,
) -> Vec<f64> {
    let n = mu.dim;
    let mut out = vec![0.0; n];
    for atom in &mu.atoms {
        let s = t + atom.theta;
        let xbar: Vec<f64> = (0..n).map(|i| means.at(s, i, current)).collect();
        for (r, o) in out.iter_mut().enumerate() {
            *o += (0..n).map(|c| atom.weight[(r, c)] * xbar[c]).sum::<f64>();
        }
    }
    if let Some(density) = &mu.density {
        for (a, b, value) in density.pieces() {
            let ints: Vec<f64> = (0..n)
                .map(|i| means.integral(t + a, t + b, i, current))
                .collect();
            for r in 0..n {
                out[r] += (0..n).map(|c| value[(r, c)] * ints[c]).sum::<f64>();
            }
        }
    }
    out
}

/// Trapezoid weight of `u(t)` in the spatial mean of component `i` at time `t`.
fn inflow_mean_weight(m: usize, d: f64, t: f64, dt: f64) -> f64 {
    let h = 1.0 / m as f64;
    let mut w = 0.0;
    for j in 0..=m {
        let x = j as f64 * h;
        let lag = x / d;
        if lag >= dt || x > d * t + FRONT_TOL {
            break;
        }
        let node_w = if j == 0 || j == m { 0.5 * h } else { h };
        w += node_w * (1.0 - lag / dt);
    }
    w
}

/// Exact solution of the delayed spatial-mean feedback, every step emitted.
///
/// `phi` must cover the unit window ending at time 0. Its newest snapshot is
/// expected to agree with `y0`; a mismatch is recorded as a warning and `y0`
/// takes precedence at `θ = 0`.
pub fn solve_moc_delay(
    spec: &SystemSpec,
    y0: &Field,
    phi: &HistoryBuffer,
    t_final: f64,
    dt: f64,
) -> Result<Solution> {
    solve_moc_delay_strided(spec, y0, phi, t_final, dt, 1)
}

pub fn solve_moc_delay_strided(
    spec: &SystemSpec,
    y0: &Field,
    phi: &HistoryBuffer,
    t_final: f64,
    dt: f64,
    stride: usize,
) -> Result<Solution> {
    let mu = spec
        .delay
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("solve_moc_delay needs a delay measure".into()))?;
    check_common(spec, y0, dt)?;
    let steps = step_count(t_final, dt)?;
    let stride = stride.max(1);
    if phi.span() < 1.0 - 1e-12 {
        return Err(Error::HistoryGap(format!(
            "history spans only {}",
            phi.span()
        )));
    }
    if phi.newest().n() != spec.n() {
        return Err(Error::InvalidArgument(
            "history has the wrong number of components".into(),
        ));
    }
    let mut warnings = Vec::new();
    if spec.coupling.iter().any(|&v| v != 0.0) {
        warnings.push("coupling matrix is ignored when a delay measure is present".to_string());
    }
    if phi.newest().m() != y0.m() || phi.newest().max_abs_diff(y0) > COMPAT_TOL {
        warnings.push("initial field differs from the history at lag 0".to_string());
    }

    let n = spec.n();
    let m = y0.m();
    let lags = crate::model::ring_len(dt) - 1;
    let mut history = HistoryBuffer::from_fn(dt, 0.0, |theta| {
        if theta == 0.0 {
            y0.clone()
        } else {
            phi.query(theta.max(-phi.span()))
                .expect("lag inside the stored window")
        }
    })?;
    let mut means = MeanSeries {
        dt,
        first: -(lags as i64),
        n,
        values: Vec::with_capacity((lags + steps + 1) * n),
    };
    for q in (0..=lags).rev() {
        means.push(&history.lagged(q).mean());
    }

    let psi = newest_coefficient(mu, dt);
    let mut trace = BoundaryTrace::new(dt, n);
    let mut trajectory = vec![(0.0, y0.clone())];
    let zeros = vec![0.0; n];

    for k in 0..=steps {
        let t = k as f64 * dt;
        let known = boundary_known_part(mu, &means, t, if k == 0 { 1 } else { k as i64 });
        let field = if k == 0 {
            // at t = 0 the state is y0 and its mean is already in the series
            trace.push(&known);
            y0.clone()
        } else {
            // u(t) enters X̄(t), which may enter u(t): solve the n×n affine loop
            trace.push(&zeros);
            let mut field = field_at(y0, &trace, &spec.velocities, t);
            let base_mean = field.mean();
            let gamma: Vec<f64> = spec
                .velocities
                .iter()
                .map(|&d| inflow_mean_weight(m, d, t, dt))
                .collect();
            let mut lhs = DMatrix::<f64>::identity(n, n);
            for r in 0..n {
                for c in 0..n {
                    lhs[(r, c)] -= psi[(r, c)] * gamma[c];
                }
            }
            let rhs = nalgebra::DVector::from_iterator(
                n,
                (0..n).map(|r| known[r] + (0..n).map(|c| psi[(r, c)] * base_mean[c]).sum::<f64>()),
            );
            let b = if psi.iter().all(|&v| v == 0.0) {
                rhs
            } else {
                lhs.lu().solve(&rhs).ok_or_else(|| {
                    Error::NonConvergence("boundary loop at the current step is singular".into())
                })?
            };
            trace.set_last(b.as_slice());
            refresh_inflow_nodes(&mut field, &trace, &spec.velocities, t, dt);
            means.push(&field.mean());
            history.push(field.clone());
            field
        };
        if k > 0 && (k % stride == 0 || k == steps) {
            trajectory.push((t, field));
        }
    }

    Ok(Solution {
        trajectory,
        trace,
        history: Some(history),
        warnings,
    })
}

impl BoundaryTrace {
    pub(crate) fn set_last(&mut self, u: &[f64]) {
        let len = self.values.len();
        self.values[len - self.n..].copy_from_slice(u);
    }
}
