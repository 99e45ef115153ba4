//! Energy sweep for a dipole outside the unit sphere, with the two synthetic
//! coefficient laws for comparison.
//!
//! cargo run --example calr_sweep

use np_plasmon::bem::{AssemblyOptions, OperatorPair};
use np_plasmon::calr::{dipole_coefficients, sweep_and_classify, DipoleCoefficients, SweepSettings};
use np_plasmon::geometry::{triangulate, ParametricSurface, Vec3};
use np_plasmon::solve_spectrum;

fn synthetic(c: impl Fn(f64) -> f64) -> DipoleCoefficients {
    let js = (1..=2000).map(|j| j as f64);
    DipoleCoefficients {
        coefficients: js.clone().map(c).collect(),
        eigenvalues: js.map(|j| 0.25 / j.sqrt()).collect(),
    }
}

fn main() -> np_plasmon::Result<()> {
    let sphere = ParametricSurface::sphere(1.0)?;
    let mesh = triangulate(&sphere, 24, 44)?;
    let panels = AssemblyOptions::default().panels(&sphere, &mesh)?;
    let spectrum = solve_spectrum(&OperatorPair::assemble_on(&panels)?)?;
    let coeffs = dipole_coefficients(&panels, &spectrum, &Vec3::new(2.0, 0.0, 0.0), &Vec3::new(1.0, 0.0, 0.0), 0.05)?;
    let settings = SweepSettings::default();
    let sweep = sweep_and_classify(&coeffs, &settings)?;
    println!(
        "sphere: delta in [{:.2e}, {:.2e}], slope {:.3}, tail {:.1e}, {:?}",
        sweep.clamp_floor, sweep.clamp_ceiling, sweep.slope, sweep.tail_fraction, sweep.verdict
    );
    for (name, c) in [("c_j = j^-5", synthetic(|j| j.powi(-5))), ("c_j = 1", synthetic(|_| 1.0))] {
        let s = sweep_and_classify(&c, &settings)?;
        println!("{name:<12} slope {:+.3}, {:?}", s.slope, s.verdict);
    }
    Ok(())
}
