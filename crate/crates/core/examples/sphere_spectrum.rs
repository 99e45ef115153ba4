//! NP eigenvalues of the unit sphere against 1/(2(2n+1)).
//!
//! cargo run --example sphere_spectrum -- 24 44

use np_plasmon::bem::{AssemblyOptions, OperatorPair};
use np_plasmon::geometry::{triangulate, ParametricSurface};
use np_plasmon::solve_spectrum;

fn main() -> np_plasmon::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (n_u, n_v) = (args.first().copied().unwrap_or(24), args.get(1).copied().unwrap_or(44));
    let sphere = ParametricSurface::sphere(1.0)?;
    let mesh = triangulate(&sphere, n_u, n_v)?;
    let pair = OperatorPair::assemble(&sphere, &mesh, &AssemblyOptions::default())?;
    let spectrum = solve_spectrum(&pair)?;
    println!("N = {}, Calderon residual {:.2e}", mesh.len(), pair.calderon_residual());

    let mut start = 0;
    for n in 0..6 {
        let exact = 0.5 / (2 * n + 1) as f64;
        let members = &spectrum.eigenvalues[start..start + 2 * n + 1];
        let mean = members.iter().sum::<f64>() / members.len() as f64;
        println!(
            "n = {n}: {} eigenvalues, mean {mean:.6}, exact {exact:.6}, rel. error {:.2e}",
            members.len(),
            (mean - exact).abs() / exact
        );
        start += 2 * n + 1;
    }
    println!("negative eigenvalues: {}", spectrum.negative_indices().len());
    Ok(())
}
