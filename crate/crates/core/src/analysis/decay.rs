use crate::{Error, Result};

/// Default share of trailing samples used by [`fit_decay_rate`].
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.5;
const MIN_WINDOW_SAMPLES: usize = 10;
const UNDERFLOW: f64 = 1e-300;

/// Least-squares exponential rate of a norm series, `‖y(t)‖ ≈ C e^{rate·t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    /// Samples in the window dropped because the norm had underflowed.
    pub excluded: usize,
}

/// Either a fitted rate or an exactly annihilated trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayOutcome {
    Rate(DecayFit),
    Nilpotent,
}

impl DecayOutcome {
    /// `-∞` for a nilpotent trajectory.
    pub fn rate(&self) -> f64 {
        match self {
            DecayOutcome::Rate(f) => f.rate,
            DecayOutcome::Nilpotent => f64::NEG_INFINITY,
        }
    }

    pub fn from_series(norms: &[(f64, f64)], window_fraction: f64) -> Result<Self> {
        match fit_decay_rate(norms, window_fraction) {
            Ok(fit) => Ok(DecayOutcome::Rate(fit)),
            Err(Error::AllZero) => Ok(DecayOutcome::Nilpotent),
            Err(e) => Err(e),
        }
    }
}

/// Slope of `ln ‖y‖` against `t` over the trailing `window_fraction` of the
/// samples.
pub fn fit_decay_rate(norms: &[(f64, f64)], window_fraction: f64) -> Result<DecayFit> {
    if !(window_fraction > 0.0 && window_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "window fraction must lie in (0, 1), got {window_fraction}"
        )));
    }
    let take = ((norms.len() as f64) * window_fraction).ceil() as usize;
    if take < MIN_WINDOW_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "{take} samples in the window, need {MIN_WINDOW_SAMPLES}"
        )));
    }
    let window = &norms[norms.len() - take..];
    let t_start = window[0].0;
    let t_end = window[take - 1].0;
    if !(t_start < t_end) {
        return Err(Error::InsufficientData("window has zero length".into()));
    }

    let pts: Vec<(f64, f64)> = window
        .iter()
        .filter(|(_, v)| *v > UNDERFLOW)
        .map(|&(t, v)| (t, v.ln()))
        .collect();
    let excluded = take - pts.len();
    if pts.is_empty() {
        return Err(Error::AllZero);
    }
    if pts.len() < 2 {
        return Err(Error::InsufficientData(
            "fewer than two nonzero samples".into(),
        ));
    }

    let k = pts.len() as f64;
    let t_mean = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let y_mean = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - t_mean).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - t_mean) * (p.1 - y_mean)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData(
            "all nonzero samples share one time".into(),
        ));
    }
    let rate = sxy / sxx;
    let intercept = y_mean - rate * t_mean;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - y_mean).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - rate * p.0).powi(2))
        .sum();
    let r_squared = if ss_tot <= f64::EPSILON * k {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(DecayFit {
        rate,
        r_squared,
        window: (t_start, t_end),
        excluded,
    })
}
