//! Heat equation on `[0, π]` with `u_x(0) + k u(0) = 0`: stable iff `kπ < 1`.

use hyperpos::analysis::stability_heat_robin;
use std::f64::consts::PI;

fn main() -> hyperpos::Result<()> {
    for k in [0.0, 0.1, 0.3, 1.0 / PI, 0.5] {
        let r = stability_heat_robin(k, 1.0)?;
        println!(
            "k = {k:.6}: loop gain {:.12}, {}",
            r.spectral_radius_loop, r.verdict
        );
    }
    Ok(())
}
