//! Kernel sequences, the semigroup law and Poisson weights.

use frares::kernels::{conv, kernel_seq, poisson_weight, PoissonWeight};

fn main() -> frares::Result<()> {
    let tau = 0.1;
    let half = kernel_seq(0.5, tau, 8)?;
    let one = kernel_seq(1.0, tau, 8)?;
    println!("k^0.5: {:.6?}", half.values());

    // Two half sums make a full sum.
    let c = conv(half.values(), half.values())?;
    for (n, (x, y)) in c.iter().zip(one.values()).enumerate() {
        println!("n={n}  tau*(k^0.5 * k^0.5) = {:.15}  k^1 = {y}", tau * x);
    }

    let w = PoissonWeight::new(5, tau)?;
    println!("rho_5 at its mode t={:.2}: {:.6}", w.mode(), w.eval(w.mode())?);
    println!("rho_5(0.3) = {:.6}", poisson_weight(5, tau, 0.3)?);
    Ok(())
}
