use std::fmt;

use nalgebra::DMatrix;

/// Point mass of a delay measure: `weight` placed at lag `theta ∈ [-1, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub theta: f64,
    pub weight: DMatrix<f64>,
}

/// Matrix-valued density that is constant on each interval
/// `[breakpoints[p], breakpoints[p + 1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseDensity {
    pub breakpoints: Vec<f64>,
    pub values: Vec<DMatrix<f64>>,
}

impl PiecewiseDensity {
    /// Iterates `(a, b, value)` over the constant pieces.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, &DMatrix<f64>)> {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, v)| (w[0], w[1], v))
    }
}

/// Matrix-valued measure on `[-1, 0]` made of finitely many atoms plus a
/// piecewise-constant density.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayMeasure {
    pub dim: usize,
    pub atoms: Vec<Atom>,
    pub density: Option<PiecewiseDensity>,
}

impl DelayMeasure {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            atoms: Vec::new(),
            density: None,
        }
    }

    pub fn single_atom(theta: f64, weight: DMatrix<f64>) -> Self {
        Self {
            dim: weight.nrows(),
            atoms: vec![Atom { theta, weight }],
            density: None,
        }
    }

    pub fn with_atom(mut self, theta: f64, weight: DMatrix<f64>) -> Self {
        self.atoms.push(Atom { theta, weight });
        self
    }

    pub fn with_density(mut self, breakpoints: Vec<f64>, values: Vec<DMatrix<f64>>) -> Self {
        self.density = Some(PiecewiseDensity {
            breakpoints,
            values,
        });
        self
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.density.as_ref().is_none_or(|d| d.values.is_empty())
    }

    /// Entrywise absolute mass `|μ|([-1, 0])`.
    pub fn total_variation(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for atom in &self.atoms {
            out += atom.weight.abs();
        }
        if let Some(density) = &self.density {
            for (a, b, value) in density.pieces() {
                out += value.abs() * (b - a);
            }
        }
        out
    }

    /// Signed total mass `μ([-1, 0])`, which is also `μ̂(0)`.
    pub fn total_mass(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for atom in &self.atoms {
            out += &atom.weight;
        }
        if let Some(density) = &self.density {
            for (a, b, value) in density.pieces() {
                out += value * (b - a);
            }
        }
        out
    }

    pub fn is_nonnegative(&self) -> bool {
        let atoms_ok = self
            .atoms
            .iter()
            .all(|a| a.weight.iter().all(|&w| w >= 0.0));
        let density_ok = self
            .density
            .as_ref()
            .is_none_or(|d| d.values.iter().all(|v| v.iter().all(|&w| w >= 0.0)));
        atoms_ok && density_ok
    }

    /// Multiplies every weight and density value by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    theta: a.theta,
                    weight: &a.weight * factor,
                })
                .collect(),
            density: self.density.as_ref().map(|d| PiecewiseDensity {
                breakpoints: d.breakpoints.clone(),
                values: d.values.iter().map(|v| v * factor).collect(),
            }),
        }
    }
}

/// The data `(D, K, μ)` of a transport system on `[0, 1]`.
///
/// Without a delay measure the boundary closure is `y(0,t) = K y(1,t)`; with
/// one it is the delayed spatial-mean feedback and `coupling` is ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub velocities: Vec<f64>,
    pub coupling: DMatrix<f64>,
    pub delay: Option<DelayMeasure>,
}

impl SystemSpec {
    pub fn new(velocities: Vec<f64>, coupling: DMatrix<f64>) -> Self {
        Self {
            velocities,
            coupling,
            delay: None,
        }
    }

    /// One component with velocity `d` and feedback gain `k`.
    pub fn scalar(d: f64, k: f64) -> Self {
        Self::new(vec![d], DMatrix::from_element(1, 1, k))
    }

    /// Pure delayed feedback: the coupling matrix is zero.
    pub fn with_delay(velocities: Vec<f64>, delay: DelayMeasure) -> Self {
        let n = velocities.len();
        Self {
            velocities,
            coupling: DMatrix::zeros(n, n),
            delay: Some(delay),
        }
    }

    pub fn n(&self) -> usize {
        self.velocities.len()
    }

    pub fn max_velocity(&self) -> f64 {
        self.velocities.iter().cloned().fold(0.0, f64::max)
    }

    pub fn min_velocity(&self) -> f64 {
        self.velocities
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// Longest transit time `max_i 1/d_i`.
    pub fn max_transit_time(&self) -> f64 {
        1.0 / self.min_velocity()
    }
}

/// One broken invariant, reported as data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationResult {
    pub violations: Vec<Violation>,
}

impl ValidationResult {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> crate::Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            let msg = self
                .violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; ");
            Err(crate::Error::InvalidSystem(msg))
        }
    }
}

fn check_matrix(out: &mut Vec<Violation>, name: &str, m: &DMatrix<f64>, n: usize) {
    if m.nrows() != n || m.ncols() != n {
        out.push(Violation::new(
            name,
            format!("must be {n}x{n}, got {}x{}", m.nrows(), m.ncols()),
        ));
    }
    if m.iter().any(|v| !v.is_finite()) {
        out.push(Violation::new(name, "entries must be finite"));
    }
}

/// Collects every structural invariant violation of `spec` and its delay measure.
pub fn validate_system(spec: &SystemSpec) -> ValidationResult {
    let mut out = Vec::new();
    let n = spec.n();
    if n == 0 {
        out.push(Violation::new(
            "velocities",
            "at least one component required",
        ));
    }
    for (i, &d) in spec.velocities.iter().enumerate() {
        if !(d > 0.0) || !d.is_finite() {
            out.push(Violation::new(
                format!("velocities[{i}]"),
                "velocity must be > 0",
            ));
        }
    }
    check_matrix(&mut out, "coupling", &spec.coupling, n);

    if let Some(mu) = &spec.delay {
        if mu.dim != n {
            out.push(Violation::new(
                "delay",
                format!("measure dimension {} does not match n = {n}", mu.dim),
            ));
        }
        let mut prev = f64::NEG_INFINITY;
        for (j, atom) in mu.atoms.iter().enumerate() {
            let name = format!("delay.atoms[{j}]");
            check_matrix(&mut out, &name, &atom.weight, n);
            if atom.theta == 0.0 {
                if atom.weight.iter().any(|&w| w != 0.0) {
                    out.push(Violation::new(
                        &name,
                        "μ(0)=0 required: no atom at theta = 0",
                    ));
                }
            } else if !(-1.0..0.0).contains(&atom.theta) {
                out.push(Violation::new(&name, "theta must lie in [-1, 0)"));
            }
            if atom.theta <= prev {
                out.push(Violation::new(
                    &name,
                    "atom positions must be strictly increasing",
                ));
            }
            prev = atom.theta;
        }
        if let Some(density) = &mu.density {
            let bp = &density.breakpoints;
            if bp.len() != density.values.len() + 1 {
                out.push(Violation::new(
                    "delay.density",
                    "need exactly one more breakpoint than values",
                ));
            }
            if bp.iter().any(|&b| !(-1.0..=0.0).contains(&b)) {
                out.push(Violation::new(
                    "delay.density",
                    "breakpoints must lie in [-1, 0]",
                ));
            }
            if bp.windows(2).any(|w| w[1] <= w[0]) {
                out.push(Violation::new(
                    "delay.density",
                    "breakpoints must be strictly increasing",
                ));
            }
            for (p, v) in density.values.iter().enumerate() {
                check_matrix(&mut out, &format!("delay.density.values[{p}]"), v, n);
            }
        }
    }
    ValidationResult { violations: out }
}

/// Sign violations that break positivity mode: negative coupling entries or a
/// measure with a negative weight.
pub fn positivity_violations(spec: &SystemSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    for ((r, c), &v) in spec.coupling.iter().enumerate().map(|(idx, v)| {
        (
            (idx % spec.coupling.nrows(), idx / spec.coupling.nrows()),
            v,
        )
    }) {
        if v < 0.0 {
            out.push(Violation::new(
                format!("coupling[{r}][{c}]"),
                format!("negative entry {v}"),
            ));
        }
    }
    if let Some(mu) = &spec.delay {
        if !mu.is_nonnegative() {
            out.push(Violation::new("delay", "measure has a negative weight"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_spec_is_valid() {
        assert!(validate_system(&SystemSpec::scalar(1.0, 0.5)).is_ok());
    }

    #[test]
    fn zero_velocity_is_flagged() {
        let res = validate_system(&SystemSpec::scalar(0.0, 0.5));
        assert_eq!(res.violations.len(), 1);
        assert_eq!(res.violations[0].message, "velocity must be > 0");
    }

    #[test]
    fn atom_at_zero_is_flagged() {
        let mu = DelayMeasure::single_atom(0.0, DMatrix::from_element(1, 1, 0.3));
        let spec = SystemSpec::with_delay(vec![1.0], mu);
        let res = validate_system(&spec);
        assert!(res
            .violations
            .iter()
            .any(|v| v.message.contains("μ(0)=0 required")));
    }

    #[test]
    fn unsorted_atoms_and_bad_density_are_flagged() {
        let one = DMatrix::from_element(1, 1, 0.1);
        let mu = DelayMeasure::empty(1)
            .with_atom(-0.2, one.clone())
            .with_atom(-0.5, one.clone())
            .with_density(vec![-0.5, -0.7], vec![one]);
        let res = validate_system(&SystemSpec::with_delay(vec![1.0], mu));
        assert!(res
            .violations
            .iter()
            .any(|v| v.message.contains("strictly increasing")));
        assert_eq!(res.violations.len(), 2);
    }

    #[test]
    fn shape_mismatch_is_flagged() {
        let spec = SystemSpec::new(vec![1.0, 2.0], DMatrix::zeros(1, 1));
        assert!(!validate_system(&spec).is_ok());
    }

    #[test]
    fn total_variation_of_single_atom_is_abs_weight() {
        let l = DMatrix::from_row_slice(2, 2, &[0.5, -0.25, 0.0, -1.0]);
        let mu = DelayMeasure::single_atom(-1.0, l.clone());
        assert_eq!(mu.total_variation(), l.abs());
    }

    #[test]
    fn total_mass_includes_density() {
        let mu = DelayMeasure::empty(1)
            .with_atom(-1.0, DMatrix::from_element(1, 1, 0.2))
            .with_density(
                vec![-1.0, -0.5, 0.0],
                vec![
                    DMatrix::from_element(1, 1, 0.4),
                    DMatrix::from_element(1, 1, -0.2),
                ],
            );
        assert!((mu.total_mass()[(0, 0)] - (0.2 + 0.2 - 0.1)).abs() < 1e-15);
        assert!((mu.total_variation()[(0, 0)] - (0.2 + 0.2 + 0.1)).abs() < 1e-15);
    }

    #[test]
    fn negative_coupling_breaks_positivity() {
        let spec = SystemSpec::new(
            vec![1.0, 1.0],
            DMatrix::from_row_slice(2, 2, &[0.1, -0.2, 0.0, 0.3]),
        );
        let v = positivity_violations(&spec);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "coupling[0][1]");
    }
}
