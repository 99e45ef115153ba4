//! Expansion of the fundamental solution in plasmons and the square-summable
//! coefficients at a fixed point.
//!
//! cargo run --example kernel_expansion

use np_plasmon::bem::{AssemblyOptions, OperatorPair};
use np_plasmon::geometry::{triangulate, ParametricSurface, Vec3};
use np_plasmon::plasmon::{kernel_expansion_residual, parseval_partial_sums};
use np_plasmon::solve_spectrum;

fn main() -> np_plasmon::Result<()> {
    let sphere = ParametricSurface::sphere(1.0)?;
    let mesh = triangulate(&sphere, 20, 40)?;
    let panels = AssemblyOptions::default().panels(&sphere, &mesh)?;
    let pair = OperatorPair::assemble_on(&panels)?;
    let spectrum = solve_spectrum(&pair)?;
    let z = Vec3::new(0.0, 0.0, 2.0);

    let residual = kernel_expansion_residual(&panels, &pair, &spectrum, &z, mesh.len() / 2, 0.1)?;
    for terms in [1, 4, 9, 16, 36, 100, spectrum.len()] {
        println!("J = {terms:>5}: relative residual {:.3e}", residual.relative(terms));
    }
    let (sums, bound) = parseval_partial_sums(&panels, &pair, &spectrum, &z, 0.1)?;
    println!("sum u_j(z)^2 = {:.6e}, bound {bound:.6e}", sums.last().copied().unwrap_or(0.0));
    Ok(())
}
