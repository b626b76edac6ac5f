//! The three constructions of a resolvent family side by side.

use frares::operator::{laplacian_1d, LinOp};
use frares::resolvent::{coeff_table, family_explicit, family_recursive, family_series};

fn main() -> frares::Result<()> {
    // Backward Euler: S^n = (1 + tau)^-(n+1) for A = -1.
    let minus_one = LinOp::scalar(-1.0);
    let f = family_recursive(&minus_one, 1.0, 1.0, 0.1, 5)?;
    for n in 0..=5 {
        println!("S^{n} = {:.15}  (1.1)^-(n+1) = {:.15}", f.get(n).to_dense()[(0, 0)], 1.1_f64.powi(-(n as i32 + 1)));
    }

    let lap = laplacian_1d(16, 1.0 / 16.0)?;
    let table = coeff_table(1.5, 1.0, 0.1, 50)?;
    let explicit = family_explicit(&lap, &table, 50)?;
    let recursive = family_recursive(&lap, 1.5, 1.0, 0.1, 50)?;
    println!("laplacian: explicit vs recursive {:.2e}", explicit.relative_difference(&recursive));
    let worst = recursive.resolvent_equation_residuals()?.iter().map(|r| r.relative()).fold(0.0, f64::max);
    println!("laplacian: resolvent equation residual {worst:.2e}");

    let small = LinOp::scalar(0.3);
    let series = family_series(&small, 0.7, 0.7, 0.2, 30, 1e-12)?;
    let reference = family_recursive(&small, 0.7, 0.7, 0.2, 30)?;
    println!("scalar 0.3: series vs recursive {:.2e}", series.relative_difference(&reference));

    match family_series(&lap, 1.5, 1.0, 0.1, 10, 1e-12) {
        Ok(_) => println!("series accepted the laplacian"),
        Err(e) => println!("series refused the laplacian: {e}"),
    }
    Ok(())
}
