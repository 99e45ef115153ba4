//! Negative eigenvalues above the discretization noise floor: spheroid
//! against torus at matched resolution.
//!
//! cargo run --example convexity_sign_law -- 20 50

use np_plasmon::bem::{AssemblyOptions, OperatorPair};
use np_plasmon::geometry::{triangulate, ParametricSurface};
use np_plasmon::solve_spectrum;

fn main() -> np_plasmon::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (n_u, n_v) = (args.first().copied().unwrap_or(20), args.get(1).copied().unwrap_or(50));
    for surface in [ParametricSurface::oblate_spheroid(), ParametricSurface::clifford_torus()] {
        let mesh = triangulate(&surface, n_u, n_v)?;
        let pair = OperatorPair::assemble(&surface, &mesh, &AssemblyOptions::default())?;
        let floor = pair.calderon_residual();
        let spectrum = solve_spectrum(&pair)?;
        let most_negative = spectrum.eigenvalues.iter().cloned().fold(0.0, f64::min);
        println!(
            "{:<16} N = {}, residual {floor:.2e}, negatives {} ({} above residual), most negative {most_negative:.4}",
            surface.kind().name(),
            mesh.len(),
            spectrum.negative_indices().len(),
            spectrum.count_negative_above(floor)
        );
    }
    Ok(())
}
