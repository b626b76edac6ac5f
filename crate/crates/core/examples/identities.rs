//! Functional equation, Z-transforms and subordination.

use frares::operator::{laplacian_1d, LinOp};
use frares::resolvent::{
    check_ztransform, family_recursive, functional_equation_grid, kernel_ztransform, subordinate_exponential,
};
use nalgebra::DVector;

fn main() -> frares::Result<()> {
    let lap = laplacian_1d(8, 1.0 / 8.0)?;
    let f = family_recursive(&lap, 1.5, 1.0, 0.1, 16)?;
    let grid = functional_equation_grid(&f, 16)?;
    let worst = grid.iter().map(|(_, _, r)| r.relative()).fold(0.0, f64::max);
    println!("functional equation on {} pairs: max residual {worst:.2e}", grid.len());

    let k = kernel_ztransform(0.5, 0.1, 2.0, 200)?;
    println!("kernel Z-transform at z=2: partial {:.15}, closed {:.15}, tail {:?}", k.partial[0], k.closed[0], k.tail);

    let s = family_recursive(&LinOp::scalar(-1.0), 1.5, 1.0, 0.1, 200)?;
    let c = check_ztransform(&s, 2.0, &DVector::from_element(1, 1.0))?;
    println!("family Z-transform at z=2: residual {:.2e}, passed {}", c.residual, c.passed(1e-6));

    let sub = subordinate_exponential(-1.0, 0.1, 5)?;
    for (n, v) in sub.iter().enumerate() {
        println!("integral of rho_{n} e^-t = {v:.14}  vs {:.14}", 1.1_f64.powi(-(n as i32 + 1)));
    }
    Ok(())
}
