use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::error::Error;
use crate::pipeline::PipelineError;

fn manifest_path(run: &Path) -> PathBuf {
    if run.is_dir() {
        run.join("manifest.json")
    } else {
        run.to_path_buf()
    }
}

fn load(run: &Path) -> Result<(PathBuf, Value), PipelineError> {
    let path = manifest_path(run);
    let text = std::fs::read_to_string(&path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
    let value = serde_json::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
    Ok((path, value))
}

/// Outlier rows of a run's `norms.csv` with `j <= j_max`.
fn outliers_up_to(manifest: &Path, j_max: u64) -> Result<u64, PipelineError> {
    let path = manifest.with_file_name("norms.csv");
    let text = std::fs::read_to_string(&path).map_err(|e| crate::pipeline::at("compare")(Error::io(&path, e)))?;
    let mut count = 0;
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let j: u64 = fields[0]
            .parse()
            .map_err(|_| PipelineError::Config(format!("malformed row in {}: {line}", path.display())))?;
        if j <= j_max && fields.get(4) == Some(&"1") {
            count += 1;
        }
    }
    Ok(count)
}

const KEYS: [&str; 7] = [
    "surface",
    "panels",
    "outlier_count",
    "decay_slope",
    "negative_count",
    "negatives_above_calderon",
    "weyl_relative_deviation",
];

/// Side-by-side summary of two completed runs and the keys on which they
/// differ. Runs with different `j_max` are compared on the common range.
pub fn compare_report(run_a: &Path, run_b: &Path) -> Result<Value, PipelineError> {
    let (path_a, a) = load(run_a)?;
    let (path_b, b) = load(run_b)?;
    let (sa, sb) = (&a["summary"], &b["summary"]);
    if sa.is_null() || sb.is_null() {
        return Err(PipelineError::Config("both manifests need a summary section".into()));
    }
    let mut left = Map::new();
    let mut right = Map::new();
    for key in KEYS {
        left.insert(key.into(), sa[key].clone());
        right.insert(key.into(), sb[key].clone());
    }
    let mut warnings = Vec::new();
    let common = match (sa["j_max"].as_u64(), sb["j_max"].as_u64()) {
        (Some(ja), Some(jb)) => {
            if ja != jb {
                let j = ja.min(jb);
                warnings.push(format!("j_max differs ({ja} vs {jb}); outlier counts truncated to j <= {j}"));
                left.insert("outlier_count".into(), json!(outliers_up_to(&path_a, j)?));
                right.insert("outlier_count".into(), json!(outliers_up_to(&path_b, j)?));
            }
            Some(ja.min(jb))
        }
        _ => None,
    };
    for w in &warnings {
        log::warn!("{w}");
    }
    let mut differences = Map::new();
    for key in KEYS {
        if left[key] != right[key] {
            differences.insert(key.into(), json!({ "a": left[key], "b": right[key] }));
        }
    }
    Ok(json!({
        "a": path_a,
        "b": path_b,
        "j_max": common,
        "warnings": warnings,
        "side_by_side": { "a": left, "b": right },
        "differences": differences,
    }))
}
