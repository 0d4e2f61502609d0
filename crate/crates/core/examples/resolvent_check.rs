//! Closed-loop resolvent of the upwind discretization versus the
//! factorized form `(I - D_λ M)^{-1} R(λ, A)` on random positive systems.

use hyperpos::analysis::verify_resolvent_identity;
use hyperpos::scenarios::random_hyperbolic;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> hyperpos::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    println!(
        "{:>2} {:>6} {:>10} {:>10} {:>10} {:>6}",
        "n", "lambda", "loop r", "residual", "neumann", "order"
    );
    for _ in 0..5 {
        let n = rng.random_range(1..=4);
        let spec = random_hyperbolic(&mut rng, n, &[1.0, 2.0, 4.0], 0.05..0.5);
        for lambda in [0.5, 1.0, 2.0, 5.0] {
            let r = verify_resolvent_identity(&spec, lambda, 64)?;
            println!(
                "{n:>2} {lambda:>6} {:>10.4} {:>10.2e} {:>10.2e} {:>6}",
                r.loop_radius,
                r.max_abs_residual,
                r.neumann_residual,
                r.entrywise_order_ok && r.positivity_ok
            );
        }
    }
    Ok(())
}
