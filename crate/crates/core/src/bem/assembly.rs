//! Dense collocation matrices of the single layer and Neumann-Poincare
//! operators for piecewise-constant densities.
//!
//! Row `i` collocates at the point of panel `i`; column `j` integrates the
//! kernel over panel `j`. Panels closer than `near_field_factor` diameters to
//! the collocation point are split 4-fold, recursively up to
//! `max_subdivision` levels.

use faer::Mat;
use rayon::prelude::*;
use serde::Serialize;

use crate::bem::kernel::{gamma_at, np_kernel_at};
use crate::bem::panels::{BoundaryPanels, PanelGeometry};
use crate::bem::quadrature::{flat_triangle_inverse_distance, QuadratureRule};
use crate::error::{Error, Result};
use crate::geometry::{PanelMesh, ParametricSurface};
use crate::numerics::pairwise_sum;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

#[derive(Clone, Debug)]
pub struct AssemblyOptions {
    pub rule: QuadratureRule,
    pub geometry: PanelGeometry,
    /// Order of the collapsed Gauss rule on the self panel.
    pub singular_order: usize,
    pub near_field_factor: f64,
    pub max_subdivision: usize,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions {
            rule: QuadratureRule::seven_point(),
            geometry: PanelGeometry::Curved,
            singular_order: 8,
            near_field_factor: 2.0,
            max_subdivision: 3,
        }
    }
}

impl AssemblyOptions {
    pub fn validate(&self) -> Result<()> {
        if self.rule.degree < 2 {
            return Err(Error::InvalidParameter(format!(
                "assembly needs a quadrature rule of degree >= 2, got {}",
                self.rule.degree
            )));
        }
        if !(self.near_field_factor >= 0.0) {
            return Err(Error::InvalidParameter("near-field factor must be non-negative".into()));
        }
        Ok(())
    }

    /// Quadrature data for `mesh` under these options.
    pub fn panels(&self, surface: &ParametricSurface, mesh: &PanelMesh) -> Result<BoundaryPanels> {
        self.validate()?;
        BoundaryPanels::new(
            surface,
            mesh,
            self.geometry,
            &self.rule,
            self.singular_order,
            self.near_field_factor,
            self.max_subdivision,
        )
    }
}

fn rows_to_mat(n: usize, rows: Vec<Vec<f64>>) -> Mat<f64> {
    Mat::from_fn(n, n, |i, j| rows[i][j])
}

/// `S_h[i][j] = int_{panel j} Gamma(x_i - y) dS_y`; maps panel densities to
/// potentials at the collocation points. On flat panels the diagonal is the
/// closed-form planar integral, on curved panels a collapsed Gauss rule.
pub fn assemble_single_layer(panels: &BoundaryPanels) -> Mat<f64> {
    let n = panels.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = panels.collocation[i];
            (0..n)
                .map(|j| {
                    if i != j {
                        panels.integrate(j, &x, 0.0, |y, _| gamma_at(&(x - y)))
                    } else if let Some(tri) = panels.flat_triangle(i) {
                        flat_triangle_inverse_distance(&x, &tri) / FOUR_PI
                    } else {
                        panels.integrate_self(i, |y, _| gamma_at(&(x - y)))
                    }
                })
                .collect()
        })
        .collect();
    rows_to_mat(n, rows)
}

/// Collocation matrix of the Neumann-Poincare operator `K` with its
/// diagonal set so that every row sums to exactly 1/2 (`K[1] = 1/2`).
pub fn assemble_double_layer(panels: &BoundaryPanels) -> Mat<f64> {
    let n = panels.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = panels.collocation[i];
            let mut row: Vec<f64> = (0..n)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        panels.integrate(j, &x, 0.0, |y, normal| np_kernel_at(&(y - x), normal))
                    }
                })
                .collect();
            row[i] = 0.5 - pairwise_sum(&row);
            row
        })
        .collect();
    rows_to_mat(n, rows)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct AssemblyDiagnostics {
    /// `max |W S - (W S)^T| / max |W S|` before symmetrization.
    pub single_layer_asymmetry: f64,
    /// Largest `|D_ii|` produced by the row-sum identity.
    pub max_double_layer_diagonal: f64,
    /// Rows whose fixed diagonal exceeds 1/2 in magnitude.
    pub oversized_diagonals: usize,
    /// Smallest eigenvalue of the symmetrized single-layer Gram matrix.
    pub min_gram_eigenvalue: f64,
    pub max_gram_eigenvalue: f64,
}

/// Discrete single layer `S_h` and Neumann-Poincare adjoint
/// `K_h = W^-1 D_h^T W` on one mesh, with the panel areas `W`.
#[derive(Clone, Debug)]
pub struct OperatorPair {
    pub single_layer: Mat<f64>,
    pub np_adjoint: Mat<f64>,
    pub weights: Vec<f64>,
    pub diagnostics: AssemblyDiagnostics,
}

impl OperatorPair {
    pub fn assemble(surface: &ParametricSurface, mesh: &PanelMesh, opts: &AssemblyOptions) -> Result<Self> {
        let panels = opts.panels(surface, mesh)?;
        Self::assemble_on(&panels)
    }

    pub fn assemble_on(panels: &BoundaryPanels) -> Result<Self> {
        let single_layer = assemble_single_layer(panels);
        let double_layer = assemble_double_layer(panels);
        Self::from_parts(single_layer, &double_layer, panels.weights.clone())
    }

    /// Builds the pair from an assembled `S_h` and double layer `D_h`.
    pub fn from_parts(single_layer: Mat<f64>, double_layer: &Mat<f64>, weights: Vec<f64>) -> Result<Self> {
        let n = weights.len();
        if single_layer.nrows() != n || double_layer.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {}x{} operators",
                n,
                single_layer.nrows(),
                double_layer.nrows()
            )));
        }
        let np_adjoint = Mat::from_fn(n, n, |i, j| double_layer[(j, i)] * weights[j] / weights[i]);

        let mut max_diag = 0.0f64;
        let mut oversized = 0;
        for i in 0..n {
            let d = double_layer[(i, i)].abs();
            max_diag = max_diag.max(d);
            if d > 0.5 {
                oversized += 1;
            }
        }
        if oversized > 0 {
            log::warn!(
                "{oversized} double-layer diagonal entries exceed 1/2 (max {max_diag:.3}); mesh too coarse near high curvature"
            );
        }
        let mut pair = OperatorPair {
            single_layer,
            np_adjoint,
            weights,
            diagnostics: AssemblyDiagnostics {
                max_double_layer_diagonal: max_diag,
                oversized_diagonals: oversized,
                ..Default::default()
            },
        };
        pair.diagnostics.single_layer_asymmetry = pair.single_layer_asymmetry();
        pair.check_positive_definite()?;
        Ok(pair)
    }

    /// Builds the pair from `S_h` and an already transposed `K_h`, as loaded
    /// from a cache.
    pub fn from_cached(single_layer: Mat<f64>, np_adjoint: Mat<f64>, weights: Vec<f64>) -> Result<Self> {
        let n = weights.len();
        if single_layer.nrows() != n || np_adjoint.nrows() != n {
            return Err(Error::DimensionMismatch("cached operators do not match the mesh".into()));
        }
        let mut pair = OperatorPair {
            single_layer,
            np_adjoint,
            weights,
            diagnostics: AssemblyDiagnostics::default(),
        };
        let mut max_diag = 0.0f64;
        let mut oversized = 0;
        for i in 0..n {
            // D_ii = K_ii since the weight ratio cancels on the diagonal
            let d = pair.np_adjoint[(i, i)].abs();
            max_diag = max_diag.max(d);
            oversized += usize::from(d > 0.5);
        }
        pair.diagnostics.max_double_layer_diagonal = max_diag;
        pair.diagnostics.oversized_diagonals = oversized;
        pair.diagnostics.single_layer_asymmetry = pair.single_layer_asymmetry();
        pair.check_positive_definite()?;
        Ok(pair)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Discrete `H*` Gram matrix: symmetric part of `W S_h`, so that
    /// `<psi, phi>_{H*} ~ psi^T G phi`.
    pub fn gram(&self) -> Mat<f64> {
        let w = &self.weights;
        let s = &self.single_layer;
        Mat::from_fn(self.len(), self.len(), |i, j| 0.5 * (w[i] * s[(i, j)] + w[j] * s[(j, i)]))
    }

    pub fn single_layer_asymmetry(&self) -> f64 {
        let w = &self.weights;
        let s = &self.single_layer;
        let n = self.len();
        let mut defect = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let a = w[i] * s[(i, j)];
                defect = defect.max((a - w[j] * s[(j, i)]).abs());
                scale = scale.max(a.abs());
            }
        }
        defect / scale
    }

    fn check_positive_definite(&mut self) -> Result<()> {
        let gram = self.gram();
        let eigs = gram
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .map_err(|_| Error::EigenNoConvergence)?;
        let min = eigs.first().copied().unwrap_or(f64::NAN);
        let max = eigs.last().copied().unwrap_or(f64::NAN);
        self.diagnostics.min_gram_eigenvalue = min;
        self.diagnostics.max_gram_eigenvalue = max;
        if !(min > 0.0) {
            let pivot = match gram.llt(faer::Side::Lower) {
                Err(faer::linalg::cholesky::llt::factor::LltError::NonPositivePivot { index }) => index,
                Ok(_) => 0,
            };
            return Err(Error::NotPositiveDefinite {
                pivot,
                smallest_eigenvalue: min,
            });
        }
        Ok(())
    }

    /// Calderon defect of this pair, see [`calderon_residual`].
    pub fn calderon_residual(&self) -> f64 {
        calderon_residual(&self.gram(), &self.np_adjoint)
    }
}

/// `||A - A^T||_F / ||A||_F` for `A = G K_h`; zero exactly when `K_h` is
/// self-adjoint in the discrete `H*` inner product (`S K* = K S`).
pub fn calderon_residual(gram: &Mat<f64>, np_adjoint: &Mat<f64>) -> f64 {
    let product = gram * np_adjoint;
    antisymmetry(&product)
}

/// `||A - A^T||_F / ||A||_F`.
pub fn antisymmetry(a: &Mat<f64>) -> f64 {
    let n = a.nrows();
    let mut defect = 0.0;
    let mut norm = 0.0;
    for j in 0..n {
        for i in 0..n {
            let d = a[(i, j)] - a[(j, i)];
            defect += d * d;
            norm += a[(i, j)] * a[(i, j)];
        }
    }
    (defect / norm).sqrt()
}
