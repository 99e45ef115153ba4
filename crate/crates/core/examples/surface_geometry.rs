//! Curvature integrals and convexity of the three surfaces.
//!
//! cargo run --example surface_geometry -- 32 64

use np_plasmon::geometry::{symbol_positivity, total_gaussian_curvature, triangulate, willmore_energy, ParametricSurface};

fn main() -> np_plasmon::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (n_u, n_v) = (args.first().copied().unwrap_or(32), args.get(1).copied().unwrap_or(64));
    let surfaces = [
        ParametricSurface::sphere(1.0)?,
        ParametricSurface::oblate_spheroid(),
        ParametricSurface::clifford_torus(),
    ];
    println!("{:<16} {:>6} {:>4} {:>10} {:>10} {:>10} {:>7}", "surface", "panels", "chi", "area", "willmore", "int K", "convex");
    for s in surfaces {
        let mesh = triangulate(&s, n_u, n_v)?;
        let w = willmore_energy(&s, &mesh)?;
        let k = total_gaussian_curvature(&s, &mesh)?;
        let convex = symbol_positivity(&s, &mesh)?.strictly_convex;
        println!(
            "{:<16} {:>6} {:>4} {:>10.5} {:>10.5} {:>10.5} {:>7}",
            s.kind().name(),
            mesh.len(),
            mesh.euler_characteristic(),
            mesh.total_area(),
            w,
            k,
            convex
        );
    }
    Ok(())
}
