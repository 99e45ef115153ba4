//! Weyl constant of the positive spectrum for one surface.
//!
//! cargo run --example weyl_law -- clifford_torus 20 50

use np_plasmon::bem::{AssemblyOptions, OperatorPair};
use np_plasmon::geometry::{build_surface, triangulate, SurfaceKind, SurfaceParams};
use np_plasmon::{solve_spectrum, weyl_fit, WeylWindow};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let kind: SurfaceKind = serde_json::from_value(serde_json::Value::String(
        args.first().cloned().unwrap_or_else(|| "sphere".into()),
    ))?;
    let n_u = args.get(1).map(|a| a.parse()).transpose()?.unwrap_or(24);
    let n_v = args.get(2).map(|a| a.parse()).transpose()?.unwrap_or(44);
    let surface = build_surface(kind, &SurfaceParams::default())?;
    let mesh = triangulate(&surface, n_u, n_v)?;
    let pair = OperatorPair::assemble(&surface, &mesh, &AssemblyOptions::default())?;
    let spectrum = solve_spectrum(&pair)?;
    let fit = weyl_fit(&spectrum, &surface, &mesh, WeylWindow::default())?;
    println!("{}: N = {}, positive eigenvalues {}", kind.name(), mesh.len(), fit.positive_count);
    println!("Willmore energy {:.5}, Euler characteristic {}", fit.willmore_energy, fit.euler_characteristic);
    println!(
        "C estimated {:.4}, predicted {:.4}, deviation {:.1}% (window {:?})",
        fit.estimated,
        fit.theoretical,
        100.0 * fit.relative_deviation,
        fit.window
    );
    Ok(())
}
