//! Three transport lines with speeds 1, 2, 4 coupled at the boundary.
//!
//! The stability verdict only depends on `r(K)`; the decay rate is the
//! dominant real root of `det(I - K E_λ(1)) = 0`.

use hyperpos::analysis::{dominant_real_root, fit_decay_rate, stability_hyperbolic};
use hyperpos::model::{Field, SystemSpec};
use hyperpos::solver::solve_moc_strided;
use nalgebra::dmatrix;

fn main() -> hyperpos::Result<()> {
    let k = dmatrix![
        0.1, 0.4, 0.2;
        0.3, 0.0, 0.3;
        0.2, 0.2, 0.1
    ];
    for scale in [1.0, 2.0] {
        let spec = SystemSpec::new(vec![1.0, 2.0, 4.0], &k * scale);
        let report = stability_hyperbolic(&spec)?;
        let y0 = Field::from_fn(200, 3, |x, i| 1.0 + (i as f64 + 1.0) * x * (1.0 - x));
        let sol = solve_moc_strided(&spec, &y0, 30.0, 0.005, 10)?;
        let fit = fit_decay_rate(&sol.l2_norms(), 0.5)?;
        println!(
            "scale {scale}: r(K) = {:.4} -> {}",
            report.spectral_radius_loop, report.verdict
        );
        println!(
            "  fitted rate {:.5}, dominant real root {:.5}, min value {:.3e}",
            fit.rate,
            dominant_real_root(&spec).unwrap_or(f64::NEG_INFINITY),
            sol.min_value()
        );
    }
    Ok(())
}
