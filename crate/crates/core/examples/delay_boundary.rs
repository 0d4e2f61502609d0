//! Boundary law `y(0,t) = ∫∫ dμ(θ) y(x, t+θ) dx`: the inflow is a weighted
//! sum of past spatial means.

use hyperpos::analysis::{fit_decay_rate, small_delay_sufficient, stability_delay};
use hyperpos::model::{DelayMeasure, Field, HistoryBuffer, SystemSpec};
use hyperpos::solver::solve_moc_delay_strided;
use nalgebra::DMatrix;

fn report(name: &str, spec: &SystemSpec) -> hyperpos::Result<()> {
    let dt = 0.01;
    let y0 = Field::constant(50, &vec![1.0; spec.n()]);
    let phi = HistoryBuffer::constant(dt, 0.0, &y0)?;
    let sol = solve_moc_delay_strided(spec, &y0, &phi, 40.0, dt, 10)?;
    let fit = fit_decay_rate(&sol.l2_norms(), 0.5)?;
    let verdict = stability_delay(spec)?;
    let mu = spec.delay.as_ref().unwrap();
    println!(
        "{name:<28} r = {:.3}  {:<9} rate {:+.4}  |mu| < 1: {}",
        verdict.spectral_radius_loop,
        verdict.verdict.to_string(),
        fit.rate,
        small_delay_sufficient(mu)
    );
    Ok(())
}

fn main() -> hyperpos::Result<()> {
    let scalar = |w: f64| DMatrix::from_element(1, 1, w);
    for l in [0.5, 0.9, 1.1, 1.5] {
        let spec = SystemSpec::with_delay(vec![1.0], DelayMeasure::single_atom(-1.0, scalar(l)));
        report(&format!("atom at -1, l = {l}"), &spec)?;
    }

    let two = DelayMeasure::single_atom(-1.0, scalar(0.2)).with_atom(-0.5, scalar(0.9));
    report(
        "atoms 0.2 @ -1, 0.9 @ -0.5",
        &SystemSpec::with_delay(vec![1.0], two),
    )?;

    let spread = DelayMeasure::single_atom(-0.25, DMatrix::identity(2, 2) * 0.3).with_density(
        vec![-1.0, -0.5, -0.1],
        vec![
            DMatrix::from_element(2, 2, 0.2),
            DMatrix::from_element(2, 2, 0.1),
        ],
    );
    report(
        "two lines, atom + density",
        &SystemSpec::with_delay(vec![1.0, 2.0], spread),
    )?;
    Ok(())
}
