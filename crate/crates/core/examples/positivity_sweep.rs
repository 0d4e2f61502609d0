//! Random positive systems with random nonnegative data: both solvers keep
//! every value nonnegative.

use hyperpos::cli::positivity_sweep;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> hyperpos::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(
        std::env::args()
            .nth(1)
            .and_then(|s| s.parse().ok())
            .unwrap_or(1),
    );
    let (specs, min) = positivity_sweep(&mut rng, 30)?;
    println!("{specs} systems, smallest value {min:.3e}");
    Ok(())
}
