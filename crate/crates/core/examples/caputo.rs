//! Fractional sums and Caputo differences of a sampled sequence.

use frares::calculus::{caputo_diff_anchored_seq, caputo_diff_seq, frac_sum, VecSeq};

fn main() -> frares::Result<()> {
    let tau = 0.05;
    let t: Vec<f64> = (0..=10).map(|n| (n as f64 * tau).powi(2)).collect();
    let v = VecSeq::scalar(tau, &t)?;

    let s = frac_sum(&v, 0.5)?;
    let d = caputo_diff_seq(&v, 1.5)?;
    let anchored = caputo_diff_anchored_seq(&v, 1.5, &v.entries()[0])?;
    println!("{:>3} {:>10} {:>14} {:>14} {:>14}", "n", "v", "sum^0.5", "caputo^1.5", "anchored");
    for n in 0..=v.horizon() {
        println!(
            "{n:>3} {:>10.6} {:>14.8} {:>14.8} {:>14.8}",
            t[n],
            s.entries()[n][0],
            d.entries()[n][0],
            anchored.entries()[n][0]
        );
    }
    Ok(())
}
