//! Roots of the characteristic function `det(I - K e^{-λ/d})` located with
//! the argument principle. For the scalar case they are `ln k + 2πij`.

use hyperpos::analysis::{count_roots, spectral_abscissa_bound, RootSearchRegion};
use hyperpos::model::SystemSpec;
use std::f64::consts::PI;

fn main() -> hyperpos::Result<()> {
    for k in [0.25, 0.5, 2.0] {
        let spec = SystemSpec::scalar(1.0, k);
        let a = spectral_abscissa_bound(&spec, 5.0)?.expect("scalar feedback has roots");
        println!("k = {k}: abscissa {a:.6} (ln k = {:.6})", k.ln());
        for j in 0..3 {
            let h = 2.0 * PI * j as f64;
            let region = RootSearchRegion::new(k.ln() - 0.5, k.ln() + 0.5, h - 1.0, h + 1.0);
            println!(
                "  box around Im = {h:6.3}: {} root(s)",
                count_roots(&region, &spec)?
            );
        }
        let empty = RootSearchRegion::new(k.ln() + 0.5, k.ln() + 2.0, -4.0, 4.0);
        println!(
            "  box right of the abscissa: {} root(s)",
            count_roots(&empty, &spec)?
        );
    }
    let open = SystemSpec::scalar(1.0, 0.0);
    println!("k = 0: abscissa {:?}", spectral_abscissa_bound(&open, 5.0)?);
    Ok(())
}
