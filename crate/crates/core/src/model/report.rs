use std::fmt;

use serde::{Deserialize, Serialize};

/// Width of the band around `r = 1` in which no verdict is claimed.
pub const DEFAULT_TOL_MARGINAL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    UniformlyExponentiallyStable,
    Unstable,
    Marginal,
}

impl Verdict {
    pub fn classify(spectral_radius: f64, tol_marginal: f64) -> Self {
        if spectral_radius < 1.0 - tol_marginal {
            Verdict::UniformlyExponentiallyStable
        } else if spectral_radius > 1.0 + tol_marginal {
            Verdict::Unstable
        } else {
            Verdict::Marginal
        }
    }

    pub fn is_stable(self) -> bool {
        self == Verdict::UniformlyExponentiallyStable
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::UniformlyExponentiallyStable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::Marginal => "marginal",
        })
    }
}

/// Which loop-gain test produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criterion {
    /// `r(K) < 1` for the undelayed feedback.
    HyperbolicFeedback,
    /// `r(μ([-1,0])) < 1` for the delayed spatial-mean feedback.
    DelayedFeedback,
    /// `k·π < 1` for the Robin-type heat boundary.
    HeatRobin,
}

impl Criterion {
    pub fn label(self) -> &'static str {
        match self {
            Criterion::HyperbolicFeedback => "hyperbolic r(K)<1",
            Criterion::DelayedFeedback => "delay r(mu[-1,0])<1",
            Criterion::HeatRobin => "heat-robin k*pi<1",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub spectral_radius_loop: f64,
    pub verdict: Verdict,
    pub margin: f64,
    pub criterion: Criterion,
    pub root_count: Option<usize>,
    pub spectral_abscissa: Option<f64>,
}

impl StabilityReport {
    pub fn new(spectral_radius_loop: f64, criterion: Criterion, tol_marginal: f64) -> Self {
        Self {
            spectral_radius_loop,
            verdict: Verdict::classify(spectral_radius_loop, tol_marginal),
            margin: 1.0 - spectral_radius_loop,
            criterion,
            root_count: None,
            spectral_abscissa: None,
        }
    }

    /// Re-applies the verdict band with a different tolerance.
    pub fn reclassify(&mut self, tol_marginal: f64) {
        self.verdict = Verdict::classify(self.spectral_radius_loop, tol_marginal);
    }
}
