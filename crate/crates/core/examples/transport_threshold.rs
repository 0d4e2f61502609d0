//! Scalar transport `y_t + y_x = 0` with feedback `y(0,t) = k y(1,t)`.
//!
//! Sweeps the gain across the threshold `k = 1` and compares the fitted
//! decay rate of the exact solution with `ln k`.
//!
//! ```text
//! cargo run --example transport_threshold
//! ```

use hyperpos::analysis::{stability_hyperbolic, DecayOutcome};
use hyperpos::model::{Field, SystemSpec};
use hyperpos::solver::solve_moc;

fn main() -> hyperpos::Result<()> {
    println!(
        "{:>5} {:>10} {:>9} {:>10} {:>10}",
        "k", "verdict", "r(K)", "rate", "ln k"
    );
    for k in [0.0, 0.25, 0.5, 0.9, 1.0, 1.1, 2.0] {
        let spec = SystemSpec::scalar(1.0, k);
        let report = stability_hyperbolic(&spec)?;
        let sol = solve_moc(&spec, &Field::constant(100, &[1.0]), 20.0, 0.01)?;
        let rate = match DecayOutcome::from_series(&sol.l2_norms(), 0.5)? {
            DecayOutcome::Nilpotent => "nilpotent".to_string(),
            DecayOutcome::Rate(fit) => format!("{:.4}", fit.rate),
        };
        println!(
            "{k:>5} {:>10} {:>9.4} {rate:>10} {:>10.4}",
            report.verdict.to_string(),
            report.spectral_radius_loop,
            k.ln()
        );
    }
    Ok(())
}
