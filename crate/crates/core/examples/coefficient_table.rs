//! Coefficients of the explicit representation and their row sums.

use frares::kernels::kernel_seq;
use frares::resolvent::coeff_table;

fn main() -> frares::Result<()> {
    let (alpha, beta, tau, n_max) = (1.5, 1.0, 0.1, 6);
    let t = coeff_table(alpha, beta, tau, n_max)?;
    println!("working precision: {} bits", t.precision());
    let k = kernel_seq(beta, tau, n_max)?;
    for n in 0..=n_max {
        let row: Vec<String> = (1..=n + 1).map(|l| format!("{:>10.5}", t.get(n, l))).collect();
        println!("n={n}: {}  | sum {:.12} vs k^beta {:.12}", row.join(" "), t.row_sum(n), k.get(n));
    }

    // Entries grow quickly when alpha is near 1 and beta is small.
    let wild = coeff_table(1.1, 0.1, 0.1, 200)?;
    let biggest = (0..=200).flat_map(|n| (1..=n + 1).map(move |l| (n, l))).map(|(n, l)| wild.get(n, l).abs()).fold(0.0, f64::max);
    println!("(1.1, 0.1), N=200: max |a| = {biggest:.3e} at {} bits", wild.precision());
    Ok(())
}
