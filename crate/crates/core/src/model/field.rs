use nalgebra::DMatrix;

/// An `n`-component grid function on the uniform grid `x_j = j/m`, `j = 0..=m`.
///
/// `values[(j, i)]` holds `y_i(x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: DMatrix<f64>,
}

impl Field {
    pub fn zeros(m: usize, n: usize) -> Self {
        assert!(
            m >= 1 && n >= 1,
            "field needs at least one cell and one component"
        );
        Self {
            values: DMatrix::zeros(m + 1, n),
        }
    }

    /// Builds a field from `f(x, component)`.
    pub fn from_fn(m: usize, n: usize, mut f: impl FnMut(f64, usize) -> f64) -> Self {
        let mut field = Self::zeros(m, n);
        for j in 0..=m {
            let x = field.x(j);
            for i in 0..n {
                field.values[(j, i)] = f(x, i);
            }
        }
        field
    }

    pub fn constant(m: usize, values: &[f64]) -> Self {
        Self::from_fn(m, values.len(), |_, i| values[i])
    }

    /// Wraps an `(m+1) × n` matrix of nodal values.
    pub fn from_values(values: DMatrix<f64>) -> Self {
        assert!(values.nrows() >= 2 && values.ncols() >= 1);
        Self { values }
    }

    /// Number of cells.
    pub fn m(&self) -> usize {
        self.values.nrows() - 1
    }

    /// Number of components.
    pub fn n(&self) -> usize {
        self.values.ncols()
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 / self.m() as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..=self.m()).map(|j| self.x(j)).collect()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.values
    }

    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.values[(j, i)]
    }

    pub fn set(&mut self, j: usize, i: usize, v: f64) {
        self.values[(j, i)] = v;
    }

    /// Linear interpolation of component `i` at `x`, clamped to `[0, 1]`.
    pub fn sample(&self, i: usize, x: f64) -> f64 {
        let m = self.m();
        let p = x.clamp(0.0, 1.0) * m as f64;
        let r = p.round();
        if (p - r).abs() < 1e-9 {
            return self.values[(r as usize, i)];
        }
        let j = (p.floor() as usize).min(m - 1);
        let w = p - j as f64;
        (1.0 - w) * self.values[(j, i)] + w * self.values[(j + 1, i)]
    }

    /// Trapezoidal approximation of `(Σ_i ∫₀¹ y_i² dx)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        let m = self.m();
        let h = 1.0 / m as f64;
        let mut acc = 0.0;
        for j in 0..=m {
            let w = if j == 0 || j == m { 0.5 } else { 1.0 };
            acc += w * self.values.row(j).iter().map(|v| v * v).sum::<f64>();
        }
        (acc * h).sqrt()
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Trapezoidal spatial mean `∫₀¹ y_i dx` per component.
    pub fn mean(&self) -> Vec<f64> {
        let m = self.m();
        let h = 1.0 / m as f64;
        (0..self.n())
            .map(|i| {
                let col = self.values.column(i);
                let inner: f64 = col.iter().skip(1).take(m - 1).sum();
                h * (inner + 0.5 * (col[0] + col[m]))
            })
            .collect()
    }

    /// True iff every entry is `≥ -tol`.
    pub fn is_nonnegative(&self, tol: f64) -> bool {
        self.values.iter().all(|&v| v >= -tol)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: &self.values * c,
        }
    }

    /// `a·self + b·other`; both fields must share the grid.
    pub fn combine(&self, a: f64, other: &Field, b: f64) -> Self {
        assert_eq!(self.values.shape(), other.values.shape());
        Self {
            values: &self.values * a + &other.values * b,
        }
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        assert_eq!(self.values.shape(), other.values.shape());
        self.values
            .iter()
            .zip(other.values.iter())
            .fold(0.0, |a, (x, y)| a.max((x - y).abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_one_has_unit_norm() {
        for m in [1, 7, 100] {
            assert!((Field::constant(m, &[1.0]).l2_norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_field_has_zero_norm() {
        assert_eq!(Field::zeros(10, 3).l2_norm(), 0.0);
    }

    #[test]
    fn linear_profile_norm_matches_closed_form() {
        // ∫₀¹ x² dx = 1/3
        let f = Field::from_fn(1000, 1, |x, _| x);
        assert!((f.l2_norm() - (1.0f64 / 3.0).sqrt()).abs() < 1e-4);
    }

    #[test]
    fn nonnegativity_respects_tolerance() {
        let mut f = Field::zeros(4, 2);
        assert!(f.is_nonnegative(0.0));
        f.set(2, 1, -1e-14);
        assert!(f.is_nonnegative(1e-12));
        f.set(2, 1, -0.1);
        assert!(!f.is_nonnegative(1e-12));
    }

    #[test]
    fn sample_interpolates_linearly() {
        let f = Field::from_fn(4, 1, |x, _| 2.0 * x + 1.0);
        assert!((f.sample(0, 0.3) - 1.6).abs() < 1e-14);
        assert_eq!(f.sample(0, 0.5), 2.0);
        assert_eq!(f.sample(0, 1.5), 3.0);
    }

    #[test]
    fn mean_of_linear_profile() {
        let f = Field::from_fn(10, 2, |x, i| if i == 0 { x } else { 3.0 });
        let mean = f.mean();
        assert!((mean[0] - 0.5).abs() < 1e-15);
        assert!((mean[1] - 3.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn norm_is_absolutely_homogeneous(
            vals in proptest::collection::vec(-10.0f64..10.0, 2..40),
            c in -100.0f64..100.0,
        ) {
            let m = vals.len() - 1;
            let f = Field::from_fn(m, 1, |x, _| vals[(x * m as f64).round() as usize]);
            let lhs = f.scaled(c).l2_norm();
            let rhs = c.abs() * f.l2_norm();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }
    }
}
