use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use faer::Par;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bem::dump::{encode_matrix, read_matrix, write_matrix};
use crate::bem::{BoundaryPanels, OperatorPair};
use crate::calr::{dipole_coefficients, sweep_and_classify};
use crate::error::Error;
use crate::geometry::{
    build_region, symbol_positivity, total_gaussian_curvature, triangulate, willmore_energy, ParametricSurface,
};
use crate::numerics::median;
use crate::pipeline::config::{NormOrdering, RunConfig};
use crate::pipeline::{at, PipelineError, Stage};
use crate::plasmon::{
    axisymmetry_score, cluster_rms_norms, decay_report, plasmon_values, region_l2_norms, DEGENERACY_TOLERANCE,
};
use crate::spectrum::{solve_spectrum, weyl_fit, Spectrum};

/// Pins the dense linear algebra to one thread in deterministic mode, or to
/// `threads` otherwise. Assembly and evaluation are thread-count independent
/// by construction.
pub fn configure_parallelism(deterministic: bool, threads: Option<usize>) {
    if deterministic {
        faer::set_global_parallelism(Par::Seq);
    } else if let Some(t) = threads {
        faer::set_global_parallelism(if t <= 1 { Par::Seq } else { Par::rayon(t) });
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Files written by one run, removed again if a later stage fails.
struct Artifacts {
    dir: PathBuf,
    written: Vec<(String, String)>,
}

impl Artifacts {
    fn create(dir: &Path) -> Result<Self, PipelineError> {
        std::fs::create_dir_all(dir).map_err(|e| at("output")(Error::io(dir, e)))?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, stage: &'static str, name: &str, bytes: &[u8]) -> Result<(), PipelineError> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| at(stage)(Error::io(&path, e)))?;
        self.written.push((name.to_string(), sha256_hex(bytes)));
        Ok(())
    }

    fn discard(&self) {
        for (name, _) in &self.written {
            let _ = std::fs::remove_file(self.dir.join(name));
        }
    }

    fn listing(&self) -> Value {
        Value::Array(
            self.written
                .iter()
                .map(|(name, hash)| json!({ "name": name, "sha256": hash }))
                .collect(),
        )
    }
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub out: PathBuf,
    pub manifest: Value,
    /// `Some(true)` when the operators came from the cache.
    pub cache_hit: Option<bool>,
}

/// Runs `stage` and everything it depends on, writing artifacts and
/// `manifest.json` under `config.out`. On failure the files written so far
/// are removed.
pub fn run_pipeline(config: &RunConfig, stage: Stage) -> Result<RunSummary, PipelineError> {
    config.validate(stage)?;
    configure_parallelism(config.deterministic, config.threads);
    let mut artifacts = Artifacts::create(&config.out)?;
    match execute(config, stage, &mut artifacts) {
        Ok(summary) => Ok(summary),
        Err(e) => {
            artifacts.discard();
            Err(e)
        }
    }
}

fn operator_key(config: &RunConfig, surface: &ParametricSurface) -> String {
    let (n_u, n_v) = config.mesh_size();
    let subset = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "surface": surface,
        "n_u": n_u,
        "n_v": n_v,
        "quadrature_points": config.quadrature_points,
        "panel_geometry": config.panel_geometry,
        "singular_order": config.singular_order,
        "near_field_factor": config.near_field_factor,
        "max_subdivision": config.max_subdivision,
    });
    sha256_hex(subset.to_string().as_bytes())
}

fn load_or_assemble(config: &RunConfig, key: &str, panels: &BoundaryPanels) -> Result<(OperatorPair, &'static str), PipelineError> {
    if !config.cache {
        return Ok((OperatorPair::assemble_on(panels).map_err(at("assembly"))?, "disabled"));
    }
    let dir = config.cache_dir().join(key);
    let s_path = dir.join("single_layer.bin");
    let k_path = dir.join("np_adjoint.bin");
    if s_path.exists() && k_path.exists() {
        match (read_matrix(&s_path), read_matrix(&k_path)) {
            (Ok(s), Ok(k)) if s.nrows() == panels.len() && k.nrows() == panels.len() => {
                let pair = OperatorPair::from_cached(s, k, panels.weights.clone()).map_err(at("assembly"))?;
                return Ok((pair, "hit"));
            }
            _ => log::warn!("ignoring unreadable cache entry {}", dir.display()),
        }
    }
    let pair = OperatorPair::assemble_on(panels).map_err(at("assembly"))?;
    std::fs::create_dir_all(&dir).map_err(|e| at("cache")(Error::io(&dir, e)))?;
    for (path, m) in [(&s_path, &pair.single_layer), (&k_path, &pair.np_adjoint)] {
        // write then rename so an interrupted run never leaves a truncated entry
        let tmp = path.with_extension("tmp");
        write_matrix(&tmp, m).map_err(at("cache"))?;
        std::fs::rename(&tmp, path).map_err(|e| at("cache")(Error::io(path, e)))?;
    }
    Ok((pair, "miss"))
}

/// Spectrum indices of the first `j_max + 1` entries of `ordering`,
/// extended so that the last degenerate eigenspace is complete.
fn ordered_indices(spectrum: &Spectrum, ordering: NormOrdering, j_max: usize) -> (Vec<usize>, usize) {
    let order: Vec<usize> = match ordering {
        NormOrdering::Magnitude => (0..spectrum.len()).collect(),
        NormOrdering::Positive => spectrum.positive_indices(),
    };
    let keep = (j_max + 1).min(order.len());
    let mut count = keep;
    let lambda = &spectrum.eigenvalues;
    while count < order.len()
        && (lambda[order[count]] - lambda[order[count - 1]]).abs() <= DEGENERACY_TOLERANCE * lambda[order[count - 1]].abs()
    {
        count += 1;
    }
    (order[..count].to_vec(), keep)
}

fn csv_spectrum(spectrum: &Spectrum) -> String {
    let mut out = String::from("index,lambda,is_negative\n");
    for (k, l) in spectrum.eigenvalues.iter().enumerate() {
        let _ = writeln!(out, "{k},{l:e},{}", u8::from(*l < 0.0));
    }
    out
}

fn timed<T>(label: &str, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let value = f();
    log::info!("{label}: {:.2?}", start.elapsed());
    value
}

fn execute(config: &RunConfig, stage: Stage, artifacts: &mut Artifacts) -> Result<RunSummary, PipelineError> {
    let surface = config.surface()?;
    let (n_u, n_v) = config.mesh_size();
    let mesh = timed("mesh", || triangulate(&surface, n_u, n_v)).map_err(at("mesh"))?;
    artifacts.write("mesh", "mesh.txt", mesh.to_text().as_bytes())?;
    let convexity = symbol_positivity(&surface, &mesh).map_err(at("mesh"))?;
    let mut manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "stage": stage,
        "config": config,
        "mesh": {
            "n_u": n_u,
            "n_v": n_v,
            "panels": mesh.len(),
            "vertices": mesh.vertices.len(),
            "euler_characteristic": mesh.euler_characteristic(),
            "area": mesh.total_area(),
            "willmore_energy": willmore_energy(&surface, &mesh).map_err(at("mesh"))?,
            "total_gaussian_curvature": total_gaussian_curvature(&surface, &mesh).map_err(at("mesh"))?,
            "convexity": convexity,
        },
    });
    let mut summary = json!({ "surface": surface.kind(), "panels": mesh.len() });
    let mut cache_hit = None;

    if stage != Stage::Mesh {
        let opts = config.assembly_options()?;
        let panels = opts.panels(&surface, &mesh).map_err(at("assembly"))?;
        let key = operator_key(config, &surface);
        let (pair, cache) = timed("operators", || load_or_assemble(config, &key, &panels))?;
        cache_hit = Some(cache == "hit");
        let spectrum = timed("spectrum", || solve_spectrum(&pair)).map_err(at("spectrum"))?;
        artifacts.write("spectrum", "spectrum.csv", csv_spectrum(&spectrum).as_bytes())?;
        let dump = encode_matrix(&spectrum.eigenvectors).map_err(at("spectrum"))?;
        artifacts.write("spectrum", "eigenvectors.bin", &dump)?;

        let gram = pair.gram();
        let calderon = pair.calderon_residual();
        let residual = spectrum.eigen_residuals(&pair).into_iter().fold(0.0, f64::max);
        let negatives_above = spectrum.count_negative_above(calderon);
        let weyl = weyl_fit(&spectrum, &surface, &mesh, config.weyl_window);
        manifest["operators"] = json!({
            "key": key,
            "cache": cache,
            "diagnostics": pair.diagnostics,
            "gram_condition": pair.diagnostics.max_gram_eigenvalue / pair.diagnostics.min_gram_eigenvalue,
            "calderon_residual": calderon,
        });
        manifest["spectrum"] = json!({
            "count": spectrum.len(),
            "lambda_0": spectrum.eigenvalues[0],
            "negative_count": spectrum.negative_indices().len(),
            "negatives_above_calderon": negatives_above,
            "orthonormality_defect": spectrum.orthonormality_defect(&gram),
            "max_eigen_residual": residual,
            "discarded_antisymmetry": spectrum.discarded_antisymmetry,
            "weyl": weyl.as_ref().ok(),
            "weyl_error": weyl.as_ref().err().map(|e| e.to_string()),
        });
        summary["negative_count"] = json!(spectrum.negative_indices().len());
        summary["negatives_above_calderon"] = json!(negatives_above);
        summary["calderon_residual"] = json!(calderon);
        summary["weyl_relative_deviation"] = json!(weyl.as_ref().ok().map(|w| w.relative_deviation));

        let (indices, keep) = ordered_indices(&spectrum, config.ordering, config.j_max);
        if matches!(stage, Stage::Plasmon | Stage::Decay | Stage::Report) {
            let epsilon = config.epsilon.unwrap_or_else(|| mesh.typical_side());
            let min_distance = 0.5 * epsilon;
            let kind = config.region_kind();
            let region = timed("region", || build_region(kind, &surface, epsilon, config.grid_n)).map_err(at("region"))?;
            artifacts.write("region", "region.csv", region.to_csv().as_bytes())?;
            manifest["region"] = json!({ "kind": kind, "epsilon": epsilon, "grid_n": config.grid_n, "points": region.len() });

            let mut outliers = Vec::new();
            if matches!(stage, Stage::Decay | Stage::Report) {
                let raw = timed("norms", || region_l2_norms(&panels, &spectrum, &region, &indices, min_distance))
                    .map_err(at("decay"))?;
                let norms = if config.cluster_rms {
                    let lambda: Vec<f64> = indices.iter().map(|&k| spectrum.eigenvalues[k]).collect();
                    cluster_rms_norms(&raw, &lambda, DEGENERACY_TOLERANCE).map_err(at("decay"))?
                } else {
                    raw
                };
                let norms = norms[..keep].to_vec();
                let report = decay_report(norms, config.outlier_k).map_err(at("decay"))?;
                let scores = indices[..keep]
                    .iter()
                    .map(|&k| axisymmetry_score(&mesh, &spectrum.density(k)))
                    .collect::<Result<Vec<f64>, _>>()
                    .map_err(at("decay"))?;
                let mut csv = String::from("j,lambda,norm,log_norm,outlier,axisymmetry\n");
                for (j, &k) in indices[..keep].iter().enumerate() {
                    let norm = report.norms[j];
                    let _ = writeln!(
                        csv,
                        "{j},{:e},{norm:e},{:e},{},{:e}",
                        spectrum.eigenvalues[k],
                        norm.ln(),
                        u8::from(report.outliers.contains(&j)),
                        scores[j]
                    );
                }
                artifacts.write("decay", "norms.csv", csv.as_bytes())?;
                let rest: Vec<f64> = (0..keep).filter(|j| !report.outliers.contains(j)).map(|j| scores[j]).collect();
                let flagged: Vec<Value> = report
                    .outliers
                    .iter()
                    .map(|&j| {
                        json!({
                            "j": j,
                            "spectrum_index": indices[j],
                            "label": spectrum.signed_label(indices[j]),
                            "lambda": spectrum.eigenvalues[indices[j]],
                            "norm": report.norms[j],
                            "axisymmetry": scores[j],
                        })
                    })
                    .collect();
                let decay = json!({
                    "ordering": config.ordering,
                    "cluster_rms": config.cluster_rms,
                    "outlier_k": config.outlier_k,
                    "fit": report.fit,
                    "outlier_slope": report.outlier_slope,
                    "outliers": flagged,
                    "non_outlier_median_axisymmetry": median(&rest),
                    "almost_sure": report
                        .almost_sure
                        .iter()
                        .map(|&(delta, s, fraction)| json!({ "delta": delta, "s": s, "fraction": fraction }))
                        .collect::<Vec<_>>(),
                });
                artifacts.write("decay", "decay.json", serde_json::to_string_pretty(&decay).unwrap().as_bytes())?;
                summary["j_max"] = json!(keep - 1);
                summary["outlier_count"] = json!(report.outliers.len());
                summary["decay_slope"] = json!(report.fit.map(|f| f.slope));
                manifest["decay"] = decay;
                outliers = report.outliers;
            }

            if matches!(stage, Stage::Plasmon | Stage::Report) {
                let mut modes = config.field_modes.clone().unwrap_or_else(|| {
                    let mut m: Vec<usize> = (0..4).collect();
                    m.extend(&outliers);
                    m
                });
                modes.sort_unstable();
                modes.dedup();
                let (full, _) = ordered_indices(&spectrum, config.ordering, spectrum.len());
                if let Some(&bad) = modes.iter().find(|&&j| j >= full.len()) {
                    return Err(at("plasmon")(Error::InvalidParameter(format!(
                        "field mode {bad} beyond the {} available eigenpairs",
                        full.len()
                    ))));
                }
                let columns: Vec<usize> = modes.iter().map(|&j| full[j]).collect();
                let values = timed("fields", || plasmon_values(&panels, &spectrum, &columns, &region.points, min_distance))
                    .map_err(at("plasmon"))?;
                for (c, &j) in modes.iter().enumerate() {
                    let mut csv = String::from("x,z,value\n");
                    for (k, p) in region.points.iter().enumerate() {
                        let _ = writeln!(csv, "{},{},{:e}", p.x, p.z, values[(k, c)]);
                    }
                    artifacts.write("plasmon", &format!("field_j{j:04}.csv"), csv.as_bytes())?;
                }
                manifest["fields"] = json!(modes);
            }
        }

        if matches!(stage, Stage::Calr | Stage::Report) {
            let z = config.source_point(&surface);
            let a = config.dipole_direction()?;
            let min_distance = 0.5 * config.epsilon.unwrap_or_else(|| mesh.typical_side());
            let coeffs = dipole_coefficients(&panels, &spectrum, &z, &a, min_distance).map_err(at("calr"))?;
            let sweep = sweep_and_classify(&coeffs, &config.sweep_settings()).map_err(at("calr"))?;
            artifacts.write("calr", "calr.csv", sweep.to_csv().as_bytes())?;
            let mut verdict = sweep.verdict_json();
            artifacts.write("calr", "calr_verdict.json", serde_json::to_string_pretty(&verdict).unwrap().as_bytes())?;
            verdict["source"] = json!([z.x, z.y, z.z]);
            verdict["dipole"] = json!([a.x, a.y, a.z]);
            verdict["clamp_ceiling"] = json!(sweep.clamp_ceiling);
            verdict["clamped"] = json!(sweep.clamped);
            summary["calr_verdict"] = json!(sweep.verdict);
            summary["calr_slope"] = json!(sweep.slope);
            manifest["calr"] = verdict;
        }
    }

    manifest["summary"] = summary;
    manifest["files"] = artifacts.listing();
    let text = serde_json::to_string_pretty(&manifest).unwrap();
    let path = artifacts.dir.join("manifest.json");
    std::fs::write(&path, text).map_err(|e| at("manifest")(Error::io(&path, e)))?;
    Ok(RunSummary {
        out: artifacts.dir.clone(),
        manifest,
        cache_hit,
    })
}
