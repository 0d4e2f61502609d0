//! First-order upwind scheme checked against the exact solver.

use hyperpos::model::{Field, SystemSpec};
use hyperpos::scenarios::modal_initial_field;
use hyperpos::solver::compare::convergence_study;

fn main() -> hyperpos::Result<()> {
    let spec = SystemSpec::scalar(1.0, 0.5);

    // smooth data that satisfies the boundary law
    let y0 = modal_initial_field(&spec, 800).expect("real dominant root");
    let (errors, slope) = convergence_study(&spec, &y0, None, 5.0, &[50, 100, 200, 400], 0.5)?;
    for (m, e) in &errors {
        println!("m = {m:>3}: L2 error {e:.3e}");
    }
    println!("observed order {slope:.3}");

    // y0 = 1 jumps against the feedback value at x = 0
    let ones = Field::constant(800, &[1.0]);
    let (_, rough) = convergence_study(&spec, &ones, None, 5.0, &[50, 100, 200, 400], 0.5)?;
    println!("observed order with incompatible data {rough:.3}");

    Ok(())
}
