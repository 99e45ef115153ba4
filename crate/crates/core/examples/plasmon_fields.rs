//! Off-surface plasmon fields: radial decay on the sphere and a field dump
//! on the cross-section region.
//!
//! cargo run --example plasmon_fields -- /tmp/field.csv

use np_plasmon::bem::{AssemblyOptions, OperatorPair};
use np_plasmon::geometry::{build_region, triangulate, ParametricSurface, RegionKind, Vec3};
use np_plasmon::plasmon::{evaluate_plasmon, plasmon_values};
use np_plasmon::solve_spectrum;

fn main() -> np_plasmon::Result<()> {
    let sphere = ParametricSurface::sphere(1.0)?;
    let mesh = triangulate(&sphere, 16, 32)?;
    let panels = AssemblyOptions::default().panels(&sphere, &mesh)?;
    let spectrum = solve_spectrum(&OperatorPair::assemble_on(&panels)?)?;

    // first member of each degree-n cluster
    let direction = Vec3::new(1.0, 2.0, 2.0) / 3.0;
    for (n, j) in [(0, 0), (1, 1), (2, 4), (3, 9)] {
        let density = spectrum.density(j);
        let u = evaluate_plasmon(&panels, &density, &[direction * 1.5, direction * 3.0], 0.05)?;
        let slope = (u[1] / u[0]).abs().ln() / 2f64.ln();
        println!("n = {n}: radial log-slope {slope:+.3} (exact {})", -(n as f64 + 1.0));
    }

    let region = build_region(RegionKind::Y, &sphere, mesh.typical_side(), 48)?;
    let values = plasmon_values(&panels, &spectrum, &[1], &region.points, mesh.typical_side() / 2.0)?;
    let mut csv = String::from("x,z,value\n");
    for (k, p) in region.points.iter().enumerate() {
        csv.push_str(&format!("{},{},{:e}\n", p.x, p.z, values[(k, 0)]));
    }
    match std::env::args().nth(1) {
        Some(path) => {
            std::fs::write(&path, csv).expect("write field dump");
            println!("wrote {} points to {path}", region.len());
        }
        None => println!("{} region points; pass a path to write the field", region.len()),
    }
    Ok(())
}
