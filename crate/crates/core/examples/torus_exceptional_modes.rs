//! Region norms of torus plasmons and the axisymmetric outliers among them.
//!
//! cargo run --example torus_exceptional_modes -- 20 50 150

use np_plasmon::bem::AssemblyOptions;
use np_plasmon::bem::OperatorPair;
use np_plasmon::geometry::{build_region, triangulate, ParametricSurface, RegionKind};
use np_plasmon::plasmon::{axisymmetry_score, cluster_rms_norms, decay_report, region_l2_norms, DEGENERACY_TOLERANCE};
use np_plasmon::solve_spectrum;

fn main() -> np_plasmon::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (n_u, n_v) = (args.first().copied().unwrap_or(20), args.get(1).copied().unwrap_or(50));
    let j_max = args.get(2).copied().unwrap_or(150);
    let torus = ParametricSurface::clifford_torus();
    let mesh = triangulate(&torus, n_u, n_v)?;
    let panels = AssemblyOptions::default().panels(&torus, &mesh)?;
    let spectrum = solve_spectrum(&OperatorPair::assemble_on(&panels)?)?;

    let epsilon = mesh.typical_side();
    let region = build_region(RegionKind::X, &torus, epsilon, 64)?;
    let indices: Vec<usize> = (0..=j_max).collect();
    let raw = region_l2_norms(&panels, &spectrum, &region, &indices, epsilon / 2.0)?;
    let lambda: Vec<f64> = indices.iter().map(|&k| spectrum.eigenvalues[k]).collect();
    let norms = cluster_rms_norms(&raw, &lambda, DEGENERACY_TOLERANCE)?;
    let report = decay_report(norms, 5.0)?;

    println!("N = {}, {} region points, epsilon {epsilon:.3}", mesh.len(), region.len());
    for &j in &report.outliers {
        println!(
            "outlier j = {j:>3} (label {:>4}) lambda {:+.5} norm {:.3e} axisymmetry {:.3}",
            spectrum.signed_label(j),
            spectrum.eigenvalues[j],
            report.norms[j],
            axisymmetry_score(&mesh, &spectrum.density(j))?
        );
    }
    if let Some(fit) = report.fit {
        println!("decay slope over non-outliers {:.3}", fit.slope);
    }
    Ok(())
}
