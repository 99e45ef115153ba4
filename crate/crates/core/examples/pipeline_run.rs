//! Runs the batch pipeline for a torus and a spheroid and compares them.
//!
//! cargo run --example pipeline_run -- /tmp/np-runs

use std::path::PathBuf;

use np_plasmon::geometry::SurfaceKind;
use np_plasmon::pipeline::{compare_report, run_pipeline, RunConfig, Stage};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "np-runs".into()));
    let mut dirs = Vec::new();
    for surface in [SurfaceKind::CliffordTorus, SurfaceKind::OblateSpheroid] {
        let config = RunConfig {
            surface,
            n_u: Some(20),
            n_v: Some(50),
            region: None,
            out: root.join(surface.name()),
            ..RunConfig::default()
        };
        let summary = run_pipeline(&config, Stage::Decay)?;
        println!("{}: {}", surface.name(), summary.manifest["summary"]);
        dirs.push(config.out);
    }
    println!("{}", serde_json::to_string_pretty(&compare_report(&dirs[0], &dirs[1])?)?);
    Ok(())
}
