//! Generators and the shifted resolvent `(tau^-alpha - A)^-1`.

use frares::operator::{laplacian_1d, OperatorDescriptor, ResolventHandle};
use nalgebra::DVector;

fn main() -> frares::Result<()> {
    let lap = laplacian_1d(8, 1.0 / 8.0)?;
    println!("{} of size {}, ||A||_inf = {}", lap.kind(), lap.dim(), lap.norm_inf());

    let h = ResolventHandle::new(&lap, 1.5, 0.1)?;
    println!("shift {:.4}, condition {:.3e}", h.shift(), h.condition());
    let x = DVector::from_element(8, 1.0);
    println!("R x = {:.6?}", h.resolvent_apply(&x)?.as_slice());

    for text in ["scalar:-2", "scalar:-1:3", "diag:-1,-4,-9", "laplacian:4:0.25"] {
        let op = text.parse::<OperatorDescriptor>()?.build()?;
        println!("{text:>18} -> {} x {}, max |a_ij| = {}", op.dim(), op.dim(), op.max_abs());
    }
    Ok(())
}
