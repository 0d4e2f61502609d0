//! Spectral radii, stability verdicts, characteristic roots, discrete
//! resolvent checks and empirical decay rates.

mod decay;
mod resolvent;
mod roots;
mod spectral;
mod stability;

pub use decay::{fit_decay_rate, DecayFit, DecayOutcome, DEFAULT_WINDOW_FRACTION};
pub use resolvent::{verify_resolvent_identity, DiscreteOperators, ResolventReport};
pub use roots::{
    characteristic_value, count_roots, default_im_cap, dominant_real_root, spectral_abscissa_bound,
    spectral_abscissa_bound_with, AbscissaSearch, RootSearchRegion,
};
pub use spectral::{nonnegative_spectral_radius, spectral_radius, spectral_radius_real};
pub use stability::{
    small_delay_sufficient, stability_delay, stability_heat_robin, stability_hyperbolic,
    stability_report,
};
