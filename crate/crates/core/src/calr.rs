//! Spectral energy surrogate for cloaking by anomalous localized resonance.
//!
//! For a dipole source `a . grad delta_z` the gradient energy of the
//! quasi-static solution behaves like
//! `G(delta) = sum_{j >= 1} |a . grad u_j(z)|^2 / (delta^2 + lambda_j^2)`, and
//! resonance is diagnosed through `E(delta) = delta G(delta)` as `delta -> 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bem::BoundaryPanels;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::numerics::{linear_fit, logspace, pairwise_sum};
use crate::plasmon::directional_gradient_row;
use crate::spectrum::Spectrum;

/// Coefficients `c_j = a . grad u_j(z)` and eigenvalues `lambda_j` for
/// `j >= 1` in the spectrum's order; `j = 0` carries the constant mode.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DipoleCoefficients {
    pub coefficients: Vec<f64>,
    pub eigenvalues: Vec<f64>,
}

pub fn dipole_coefficients(
    panels: &BoundaryPanels,
    spectrum: &Spectrum,
    z: &Vec3,
    a: &Vec3,
    min_distance: f64,
) -> Result<DipoleCoefficients> {
    if (a.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("dipole direction must be a unit vector, |a| = {}", a.norm())));
    }
    if spectrum.len() < 2 {
        return Err(Error::InsufficientData("spectrum has no modes beyond j = 0".into()));
    }
    let row = directional_gradient_row(panels, z, a, min_distance)?;
    let coefficients: Vec<f64> = (1..spectrum.len())
        .into_par_iter()
        .map(|j| {
            let terms: Vec<f64> = (0..panels.len()).map(|p| row[p] * spectrum.eigenvectors[(p, j)]).collect();
            pairwise_sum(&terms)
        })
        .collect();
    Ok(DipoleCoefficients {
        coefficients,
        eigenvalues: spectrum.eigenvalues[1..].to_vec(),
    })
}

/// `(G, E)` at one `delta`, summed pairwise.
pub fn energy_series(coefficients: &[f64], eigenvalues: &[f64], delta: f64) -> Result<(f64, f64)> {
    if coefficients.len() != eigenvalues.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients for {} eigenvalues",
            coefficients.len(),
            eigenvalues.len()
        )));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let terms: Vec<f64> = coefficients
        .iter()
        .zip(eigenvalues)
        .map(|(c, l)| c * c / (delta * delta + l * l))
        .collect();
    let g = pairwise_sum(&terms);
    Ok((g, delta * g))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    BoundedEnergy,
    ResonanceIndicated,
    Inconclusive,
    /// The estimated truncation tail is too large to trust the slope.
    Withheld,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSettings {
    pub points_per_decade: usize,
    /// Slope tolerance: `>= 1 - tol` is bounded, `<= tol` is resonant.
    pub tolerance: f64,
    /// Largest tail fraction at the smallest `delta` that still permits a verdict.
    pub max_tail_fraction: f64,
    /// Requested `[lo, hi]`; the resolved range `[|lambda_J|, |lambda_1|]` when absent.
    pub delta_range: Option<[f64; 2]>,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            points_per_decade: 40,
            tolerance: 0.1,
            max_tail_fraction: 0.1,
            delta_range: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyPoint {
    pub delta: f64,
    pub g: f64,
    pub e: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CalrSweep {
    pub points: Vec<EnergyPoint>,
    /// Slope of `log E` against `log delta`.
    pub slope: f64,
    /// Lower end of the sweep after clamping to `|lambda_J|`.
    pub clamp_floor: f64,
    pub clamp_ceiling: f64,
    /// Whether the requested range had to be narrowed.
    pub clamped: bool,
    /// Estimated `sum_{j > J}` contribution relative to `G` at the smallest delta.
    pub tail_fraction: f64,
    pub verdict: Verdict,
}

impl CalrSweep {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,G,E\n");
        for p in &self.points {
            out.push_str(&format!("{:e},{:e},{:e}\n", p.delta, p.g, p.e));
        }
        out
    }

    pub fn verdict_json(&self) -> serde_json::Value {
        serde_json::json!({
            "slope": self.slope,
            "clamp_floor": self.clamp_floor,
            "tail_fraction": self.tail_fraction,
            "verdict": self.verdict,
        })
    }
}

/// Power-law fit `c_j^2 ~ A j^q` over the upper half of the coefficients,
/// integrated past `J` with `lambda = 0`; infinite when `q >= -1`.
///
/// Coefficients below `1e-12 max |c|` are rounding noise of the projection
/// and are left out of the fit.
fn tail_estimate(coefficients: &[f64], delta: f64) -> f64 {
    let n = coefficients.len();
    let noise = 1e-12 * coefficients.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let (xs, ys): (Vec<f64>, Vec<f64>) = (n / 2..n)
        .filter(|&i| coefficients[i].abs() > noise)
        .map(|i| (((i + 1) as f64).ln(), (coefficients[i] * coefficients[i]).ln()))
        .unzip();
    if xs.len() < 2 {
        return 0.0;
    }
    let (q, log_a) = linear_fit(&xs, &ys);
    if q >= -1.0 {
        return f64::INFINITY;
    }
    log_a.exp() * (n as f64).powf(q + 1.0) / (-(q + 1.0)) / (delta * delta)
}

/// Sweeps `delta` log-uniformly over the resolved range and classifies the
/// slope of `log E` against `log delta`.
///
/// Below `|lambda_J|` every term saturates and `E` is linear in `delta` for
/// any truncated series, so the sweep never goes there.
pub fn sweep_and_classify(coeffs: &DipoleCoefficients, settings: &SweepSettings) -> Result<CalrSweep> {
    let (c, lambda) = (&coeffs.coefficients, &coeffs.eigenvalues);
    if c.len() < 2 || c.len() != lambda.len() {
        return Err(Error::InsufficientData(format!(
            "{} coefficients for {} eigenvalues",
            c.len(),
            lambda.len()
        )));
    }
    if settings.points_per_decade < 2 || !(settings.tolerance > 0.0 && settings.tolerance < 0.5) {
        return Err(Error::InvalidParameter("sweep needs >= 2 points per decade and 0 < tol < 1/2".into()));
    }
    let floor = lambda.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min);
    let ceiling = lambda.iter().map(|l| l.abs()).fold(0.0, f64::max);
    if !(floor > 0.0) {
        return Err(Error::InvalidParameter("a resolved eigenvalue is exactly zero".into()));
    }
    let [lo, hi] = settings.delta_range.unwrap_or([floor, ceiling]);
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidParameter(format!("delta range [{lo}, {hi}] is not a positive interval")));
    }
    if hi <= floor {
        return Err(Error::TruncationDominated { hi, floor });
    }
    let (from, to) = (lo.max(floor), hi.min(ceiling));
    if !(to > from) {
        return Err(Error::InvalidParameter(format!(
            "delta range [{lo}, {hi}] misses the resolved range [{floor}, {ceiling}]"
        )));
    }
    let count = ((to / from).log10() * settings.points_per_decade as f64).ceil() as usize + 1;
    let deltas = logspace(from, to, count.max(2));
    let points = deltas
        .par_iter()
        .map(|&delta| energy_series(c, lambda, delta).map(|(g, e)| EnergyPoint { delta, g, e }))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = points.iter().map(|p| p.delta.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.e.ln()).collect();
    let (slope, _) = linear_fit(&xs, &ys);
    let tail_fraction = tail_estimate(c, from) / points[0].g;
    let verdict = if tail_fraction > settings.max_tail_fraction {
        Verdict::Withheld
    } else if slope >= 1.0 - settings.tolerance {
        Verdict::BoundedEnergy
    } else if slope <= settings.tolerance {
        Verdict::ResonanceIndicated
    } else {
        Verdict::Inconclusive
    };
    Ok(CalrSweep {
        points,
        slope,
        clamp_floor: from,
        clamp_ceiling: to,
        clamped: from != lo || to != hi,
        tail_fraction,
        verdict,
    })
}
