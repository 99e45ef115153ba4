//! Integrated curvature quantities over a panel mesh, evaluated with the
//! analytic chart curvatures at panel centroids.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::Result;
use crate::geometry::mesh::PanelMesh;
use crate::geometry::surface::{CurvatureSample, ParametricSurface};
use crate::numerics::pairwise_sum;

fn centroid_samples(surface: &ParametricSurface, mesh: &PanelMesh) -> Result<Vec<CurvatureSample>> {
    mesh.panel_params
        .iter()
        .map(|&[u, v]| surface.curvature_at(u, v))
        .collect()
}

/// Willmore energy `int H^2 dS` by centroid quadrature.
pub fn willmore_energy(surface: &ParametricSurface, mesh: &PanelMesh) -> Result<f64> {
    let samples = centroid_samples(surface, mesh)?;
    let terms: Vec<f64> = samples
        .iter()
        .zip(&mesh.areas)
        .map(|(c, a)| c.mean * c.mean * a)
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Total Gaussian curvature `int K dS`; `2 pi chi` for a closed surface.
pub fn total_gaussian_curvature(surface: &ParametricSurface, mesh: &PanelMesh) -> Result<f64> {
    let samples = centroid_samples(surface, mesh)?;
    let terms: Vec<f64> = samples
        .iter()
        .zip(&mesh.areas)
        .map(|(c, a)| c.gaussian * a)
        .collect();
    Ok(pairwise_sum(&terms))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SymbolPositivity {
    pub min_gaussian_curvature: f64,
    pub max_gaussian_curvature: f64,
    /// Smallest principal symbol over centroids and a fan of unit covectors.
    pub min_symbol: f64,
    pub strictly_convex: bool,
}

/// Sign check of the principal symbol of the Neumann-Poincare operator.
///
/// The symbol is positive definite exactly where the second fundamental form
/// is, so for these closed surfaces strict convexity is `min K > 0`.
pub fn symbol_positivity(surface: &ParametricSurface, mesh: &PanelMesh) -> Result<SymbolPositivity> {
    const DIRECTIONS: usize = 16;
    let samples = centroid_samples(surface, mesh)?;
    let mut min_k = f64::INFINITY;
    let mut max_k = f64::NEG_INFINITY;
    let mut min_symbol = f64::INFINITY;
    for c in &samples {
        min_k = min_k.min(c.gaussian);
        max_k = max_k.max(c.gaussian);
        for d in 0..DIRECTIONS {
            let (s, co) = (PI * d as f64 / DIRECTIONS as f64).sin_cos();
            min_symbol = min_symbol.min(c.np_symbol([co, s]));
        }
    }
    Ok(SymbolPositivity {
        min_gaussian_curvature: min_k,
        max_gaussian_curvature: max_k,
        min_symbol,
        strictly_convex: min_k > 0.0,
    })
}
