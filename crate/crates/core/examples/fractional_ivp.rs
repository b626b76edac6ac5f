//! A Caputo difference problem on a Laplacian, solved two ways.

use frares::operator::laplacian_1d;
use frares::solver::{solve_direct, solve_vop, FdeProblem, Forcing};
use nalgebra::DVector;

fn main() -> frares::Result<()> {
    let d = 16;
    let a = laplacian_1d(d, 1.0 / d as f64)?;
    let x0 = DVector::from_fn(d, |i, _| ((i + 1) as f64 * std::f64::consts::PI / (d + 1) as f64).sin());
    let p = FdeProblem::new(1.75, a, x0, Forcing::Constant(1.0), 0.05, 40)?;

    let vop = solve_vop(&p)?;
    let direct = solve_direct(&p)?;
    let (u, w) = (vop.family_trajectory.entries(), direct.family_trajectory.entries());
    let gap = u.iter().zip(w).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max);
    println!("vop vs direct: {gap:.2e}");
    println!("residuals: vop {:.2e}, direct {:.2e}", vop.max_residual(), direct.max_residual());
    for n in (0..=40).step_by(8) {
        println!("t={:.2}  utilde_mid={:+.8}", n as f64 * 0.05, u[n][d / 2]);
    }
    Ok(())
}
