//! Scalar families against `t^(beta-1) E_{alpha,beta}(-rho t^alpha)`.

use frares::kernels::mittag_leffler;
use frares::resolvent::compare_mittag_leffler;

fn main() -> frares::Result<()> {
    let e = mittag_leffler(1.0, 1.0, -1.0)?;
    println!("E_1,1(-1) = {:.15} (exp(-1) = {:.15})", e.value, (-1.0_f64).exp());

    for (alpha, beta) in [(1.1, 0.1), (0.1, 0.9)] {
        let coarse = compare_mittag_leffler(1.0, alpha, beta, 100)?;
        let fine = compare_mittag_leffler(1.0, alpha, beta, 200)?;
        println!(
            "({alpha}, {beta}): max error N=100 {:.6}, N=200 on the same grid {:.6}",
            coarse.max_error(),
            fine.max_error_on_grid(100).unwrap_or(f64::NAN)
        );
        for row in coarse.rows.iter().step_by(25) {
            println!("  t={:.2}  S={:+.6}  e={:+.6}", row.t, row.discrete, row.exact);
        }
    }
    Ok(())
}
