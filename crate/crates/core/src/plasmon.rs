//! Plasmons `u_j = S[phi_j]` off the surface: point values and gradients,
//! region norms, decay fits, outlier detection and axisymmetry scores.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use rayon::prelude::*;
use serde::Serialize;

use crate::bem::kernel::{gamma_at, grad_gamma_at};
use crate::bem::{BoundaryPanels, OperatorPair};
use crate::error::{Error, Result};
use crate::geometry::{CrossSectionRegion, PanelMesh, Vec3};
use crate::numerics::{linear_fit, median, pairwise_sum};
use crate::spectrum::{almost_sure_fraction, Spectrum};

/// Smallest distance from `z` to the quadrature nodes of any panel.
fn checked_point(panels: &BoundaryPanels, index: usize, z: &Vec3, min_distance: f64) -> Result<()> {
    let distance = (0..panels.len())
        .map(|j| panels.node_distance(j, z))
        .fold(f64::INFINITY, f64::min);
    if distance < min_distance {
        return Err(Error::PointTooClose {
            index,
            point: [z.x, z.y, z.z],
            distance,
            min_distance,
        });
    }
    Ok(())
}

/// `P[k][j] = int_{panel j} Gamma(z_k - y) dS_y`, so that `P phi` evaluates
/// the single layer potential of a panel density at the points.
///
/// Points closer than `min_distance` to the panels are rejected.
pub fn evaluation_matrix(panels: &BoundaryPanels, points: &[Vec3], min_distance: f64) -> Result<Mat<f64>> {
    let rows: Vec<Vec<f64>> = points
        .par_iter()
        .enumerate()
        .map(|(k, z)| {
            checked_point(panels, k, z, min_distance)?;
            Ok((0..panels.len())
                .map(|j| panels.integrate(j, z, 0.0, |y, _| gamma_at(&(z - y))))
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(Mat::from_fn(points.len(), panels.len(), |k, j| rows[k][j]))
}

/// Gradient counterpart of [`evaluation_matrix`]: one `Vec3` per point and
/// panel.
fn gradient_rows(panels: &BoundaryPanels, points: &[Vec3], min_distance: f64) -> Result<Vec<Vec<Vec3>>> {
    points
        .par_iter()
        .enumerate()
        .map(|(k, z)| {
            checked_point(panels, k, z, min_distance)?;
            Ok((0..panels.len())
                .map(|j| panels.integrate(j, z, Vec3::zeros(), |y, _| grad_gamma_at(&(z - y))))
                .collect())
        })
        .collect()
}

/// `a . int_{panel j} grad Gamma(z - y) dS_y` for every panel `j`.
pub(crate) fn directional_gradient_row(
    panels: &BoundaryPanels,
    z: &Vec3,
    a: &Vec3,
    min_distance: f64,
) -> Result<Vec<f64>> {
    let rows = gradient_rows(panels, std::slice::from_ref(z), min_distance)?;
    Ok(rows[0].iter().map(|g| a.dot(g)).collect())
}

fn check_density(panels: &BoundaryPanels, density: &[f64]) -> Result<()> {
    if density.len() != panels.len() {
        return Err(Error::DimensionMismatch(format!(
            "density has {} entries for {} panels",
            density.len(),
            panels.len()
        )));
    }
    Ok(())
}

/// Single layer potential `S[phi](z)` of a panel density.
pub fn evaluate_plasmon(
    panels: &BoundaryPanels,
    density: &[f64],
    points: &[Vec3],
    min_distance: f64,
) -> Result<Vec<f64>> {
    check_density(panels, density)?;
    let p = evaluation_matrix(panels, points, min_distance)?;
    Ok((0..points.len())
        .map(|k| pairwise_sum(&(0..panels.len()).map(|j| p[(k, j)] * density[j]).collect::<Vec<_>>()))
        .collect())
}

/// `grad S[phi](z)`.
pub fn evaluate_plasmon_gradient(
    panels: &BoundaryPanels,
    density: &[f64],
    points: &[Vec3],
    min_distance: f64,
) -> Result<Vec<Vec3>> {
    check_density(panels, density)?;
    let rows = gradient_rows(panels, points, min_distance)?;
    Ok(rows
        .iter()
        .map(|row| {
            let mut acc = Vec3::zeros();
            for (g, d) in row.iter().zip(density) {
                acc += g * *d;
            }
            acc
        })
        .collect())
}

/// Values `U[k][c] = u_{indices[c]}(z_k)` of several plasmons at once.
pub fn plasmon_values(
    panels: &BoundaryPanels,
    spectrum: &Spectrum,
    indices: &[usize],
    points: &[Vec3],
    min_distance: f64,
) -> Result<Mat<f64>> {
    if let Some(&bad) = indices.iter().find(|&&j| j >= spectrum.len()) {
        return Err(Error::InvalidParameter(format!(
            "eigen index {bad} out of range for {} eigenpairs",
            spectrum.len()
        )));
    }
    let p = evaluation_matrix(panels, points, min_distance)?;
    let v = Mat::from_fn(spectrum.len(), indices.len(), |i, c| spectrum.eigenvectors[(i, indices[c])]);
    Ok(&p * &v)
}

/// `||u_j||_{L^2(region)}` by the midpoint rule on the region grid, for the
/// eigenpairs in `indices`.
pub fn region_l2_norms(
    panels: &BoundaryPanels,
    spectrum: &Spectrum,
    region: &CrossSectionRegion,
    indices: &[usize],
    min_distance: f64,
) -> Result<Vec<f64>> {
    let values = plasmon_values(panels, spectrum, indices, &region.points, min_distance)?;
    Ok(column_l2_norms(&values, region.cell_area()))
}

pub(crate) fn column_l2_norms(values: &Mat<f64>, cell_area: f64) -> Vec<f64> {
    (0..values.ncols())
        .map(|c| {
            let squares: Vec<f64> = (0..values.nrows()).map(|k| values[(k, c)] * values[(k, c)]).collect();
            (pairwise_sum(&squares) * cell_area).sqrt()
        })
        .collect()
}

/// Relative gap below which neighbouring eigenvalues count as one
/// degenerate eigenspace.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

/// Replaces each norm by the root mean square over its run of consecutive
/// eigenvalues equal to relative tolerance `rel_tol`.
///
/// Inside a degenerate eigenspace the individual eigenvectors are an
/// arbitrary orthonormal basis, so only the mean square norm is meaningful.
pub fn cluster_rms_norms(norms: &[f64], eigenvalues: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
    if norms.len() != eigenvalues.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} norms for {} eigenvalues",
            norms.len(),
            eigenvalues.len()
        )));
    }
    let mut out = norms.to_vec();
    let mut a = 0;
    while a < norms.len() {
        let mut b = a + 1;
        while b < norms.len() && (eigenvalues[b] - eigenvalues[a]).abs() <= rel_tol * eigenvalues[a].abs() {
            b += 1;
        }
        let squares: Vec<f64> = norms[a..b].iter().map(|v| v * v).collect();
        let rms = (pairwise_sum(&squares) / (b - a) as f64).sqrt();
        out[a..b].fill(rms);
        a = b;
    }
    Ok(out)
}

/// Truncation error of `Gamma(x - z) = sum_j u_j(z) u_j(x)` at a
/// collocation point `x`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionResidual {
    pub exact: f64,
    /// Partial sums over the first `J` eigenpairs for `J = 1..=N`.
    pub partial: Vec<f64>,
}

impl ExpansionResidual {
    /// `|Gamma - sum_{j < terms}| / |Gamma|`.
    pub fn relative(&self, terms: usize) -> f64 {
        let approx = if terms == 0 { 0.0 } else { self.partial[terms - 1] };
        (self.exact - approx).abs() / self.exact.abs()
    }
}

/// Expansion of the fundamental solution in the plasmon basis, with
/// `u_j(x)` taken as `(S_h v_j)` at collocation point `panel` and `u_j(z)`
/// from the evaluation matrix. Terms follow the spectrum's order.
pub fn kernel_expansion_residual(
    panels: &BoundaryPanels,
    pair: &OperatorPair,
    spectrum: &Spectrum,
    z: &Vec3,
    panel: usize,
    min_distance: f64,
) -> Result<ExpansionResidual> {
    if panel >= panels.len() {
        return Err(Error::InvalidParameter(format!("panel {panel} out of range")));
    }
    let x = panels.collocation[panel];
    let n = spectrum.len();
    let p = evaluation_matrix(panels, std::slice::from_ref(z), min_distance)?;
    let uz = &p * &spectrum.eigenvectors;
    let s_row = pair.single_layer.row(panel);
    let ux = s_row * &spectrum.eigenvectors;
    let mut partial = Vec::with_capacity(n);
    let mut acc = 0.0;
    for j in 0..n {
        acc += uz[(0, j)] * ux[j];
        partial.push(acc);
    }
    Ok(ExpansionResidual {
        exact: gamma_at(&(x - z)),
        partial,
    })
}

/// Partial sums `sum_{1 <= j <= J} u_j(z)^2` for `J = 1..N-1`, together with
/// the discrete `H` norm of `Gamma(z - .)`, `p^T G^-1 p`, that bounds them
/// (the `j = 0` term is included in the bound, not in the sums).
pub fn parseval_partial_sums(
    panels: &BoundaryPanels,
    pair: &OperatorPair,
    spectrum: &Spectrum,
    z: &Vec3,
    min_distance: f64,
) -> Result<(Vec<f64>, f64)> {
    let p = evaluation_matrix(panels, std::slice::from_ref(z), min_distance)?;
    let uz = &p * &spectrum.eigenvectors;
    let mut sums = Vec::with_capacity(spectrum.len().saturating_sub(1));
    let mut acc = 0.0;
    for j in 1..spectrum.len() {
        acc += uz[(0, j)] * uz[(0, j)];
        sums.push(acc);
    }
    let gram = pair.gram();
    let llt = gram.llt(Side::Lower).map_err(|_| Error::NotPositiveDefinite {
        pivot: 0,
        smallest_eigenvalue: f64::NAN,
    })?;
    let rhs = p.transpose().to_owned();
    let sol = llt.solve(&rhs);
    let bound = (0..rhs.nrows()).map(|i| rhs[(i, 0)] * sol[(i, 0)]).sum();
    Ok((sums, bound))
}

/// Least-squares fit of `log ||u_j||` against `log j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Fits `norms[j]` for `j` in `[window[0], window[1])`, `j >= 1`, skipping
/// flagged indices and non-positive norms. `norms[j]` belongs to index `j`.
pub fn decay_fit(norms: &[f64], window: [usize; 2], excluded: &[usize]) -> Result<DecayFit> {
    let lo = window[0].max(1);
    let hi = window[1].min(norms.len());
    let (xs, ys): (Vec<f64>, Vec<f64>) = (lo..hi)
        .filter(|j| !excluded.contains(j) && norms[*j] > 0.0)
        .map(|j| ((j as f64).ln(), norms[j].ln()))
        .unzip();
    if xs.len() < 30 {
        return Err(Error::InsufficientData(format!(
            "decay fit needs 30 usable indices in [{lo}, {hi}), found {}",
            xs.len()
        )));
    }
    let (slope, intercept) = linear_fit(&xs, &ys);
    Ok(DecayFit {
        slope,
        intercept,
        points: xs.len(),
    })
}

/// Window of the moving median used by [`detect_outliers`].
pub const OUTLIER_WINDOW: usize = 21;

/// Indices whose log-norm exceeds the moving median of the log-norms (window
/// [`OUTLIER_WINDOW`]) by more than `k` times the median absolute deviation
/// of those residuals.
///
/// Past either end the log-norms are continued by point reflection about the
/// end value, so a monotone trend has zero residual up to the boundary.
pub fn detect_outliers(norms: &[f64], k: f64) -> Result<Vec<usize>> {
    if norms.len() < 50 {
        return Err(Error::InsufficientData(format!(
            "outlier detection needs at least 50 norms, got {}",
            norms.len()
        )));
    }
    let floor = norms.iter().cloned().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    let floor = if floor.is_finite() { floor * 1e-3 } else { f64::MIN_POSITIVE };
    let logs: Vec<f64> = norms.iter().map(|&v| v.max(floor).ln()).collect();
    let n = logs.len() as isize;
    let extended = |i: isize| {
        if i < 0 {
            2.0 * logs[0] - logs[(-i) as usize]
        } else if i >= n {
            2.0 * logs[(n - 1) as usize] - logs[(2 * (n - 1) - i) as usize]
        } else {
            logs[i as usize]
        }
    };
    let half = (OUTLIER_WINDOW / 2) as isize;
    let residuals: Vec<f64> = (0..n)
        .map(|j| {
            let window: Vec<f64> = (j - half..=j + half).map(extended).collect();
            logs[j as usize] - median(&window)
        })
        .collect();
    let centre = median(&residuals);
    let deviations: Vec<f64> = residuals.iter().map(|r| (r - centre).abs()).collect();
    let mad = median(&deviations).max(1e-9);
    Ok((0..residuals.len()).filter(|&j| residuals[j] > k * mad).collect())
}

/// `1 - (mean within-ring variance) / (total variance)` of a panel density,
/// using the rotation orbits recorded in the mesh labels.
pub fn axisymmetry_score(mesh: &PanelMesh, density: &[f64]) -> Result<f64> {
    let labels = mesh.labels.as_ref().ok_or(Error::Unstructured)?;
    if density.len() != mesh.len() {
        return Err(Error::DimensionMismatch(format!(
            "density has {} entries for {} panels",
            density.len(),
            mesh.len()
        )));
    }
    let variance = |values: &[f64]| {
        let mean = pairwise_sum(values) / values.len() as f64;
        pairwise_sum(&values.iter().map(|v| (v - mean) * (v - mean)).collect::<Vec<_>>()) / values.len() as f64
    };
    let total = variance(density);
    let scale = pairwise_sum(&density.iter().map(|v| v * v).collect::<Vec<_>>()) / density.len() as f64;
    if total <= 1e-24 * scale.max(f64::MIN_POSITIVE) {
        return Ok(1.0);
    }
    let mut rings: Vec<Vec<f64>> = vec![Vec::new(); mesh.n_rings];
    for (label, &d) in labels.iter().zip(density) {
        rings[label.ring].push(d);
    }
    let within: Vec<f64> = rings.iter().filter(|r| !r.is_empty()).map(|r| variance(r)).collect();
    let mean_within = pairwise_sum(&within) / within.len() as f64;
    Ok((1.0 - mean_within / total).clamp(0.0, 1.0))
}

/// Seven-point discrete Laplacian `(sum_k u(z +- h e_k) - 6 u(z)) / h^2` of
/// the single layer potential of `density` at each point.
pub fn discrete_laplacian(
    panels: &BoundaryPanels,
    density: &[f64],
    points: &[Vec3],
    h: f64,
    min_distance: f64,
) -> Result<Vec<f64>> {
    let offsets = [
        Vec3::zeros(),
        Vec3::new(h, 0.0, 0.0),
        Vec3::new(-h, 0.0, 0.0),
        Vec3::new(0.0, h, 0.0),
        Vec3::new(0.0, -h, 0.0),
        Vec3::new(0.0, 0.0, h),
        Vec3::new(0.0, 0.0, -h),
    ];
    let stencil: Vec<Vec3> = points.iter().flat_map(|z| offsets.iter().map(move |o| z + o)).collect();
    let values = evaluate_plasmon(panels, density, &stencil, min_distance)?;
    Ok(values
        .chunks(7)
        .map(|c| (c[1] + c[2] + c[3] + c[4] + c[5] + c[6] - 6.0 * c[0]) / (h * h))
        .collect())
}

/// Decay statistics of a sequence of region norms indexed from 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    pub norms: Vec<f64>,
    pub outliers: Vec<usize>,
    pub fit: Option<DecayFit>,
    /// Fit over the outlier indices alone, when there are at least two.
    pub outlier_slope: Option<f64>,
    /// `(delta, s, fraction)` triples of [`almost_sure_fraction`] over the
    /// norms from index 1.
    pub almost_sure: Vec<(f64, f64, f64)>,
}

pub fn decay_report(norms: Vec<f64>, outlier_k: f64) -> Result<DecayReport> {
    let outliers = detect_outliers(&norms, outlier_k)?;
    let fit = decay_fit(&norms, [1, norms.len()], &outliers).ok();
    let outlier_points: Vec<usize> = outliers.iter().copied().filter(|&j| j >= 1 && norms[j] > 0.0).collect();
    let outlier_slope = (outlier_points.len() >= 2).then(|| {
        let xs: Vec<f64> = outlier_points.iter().map(|&j| (j as f64).ln()).collect();
        let ys: Vec<f64> = outlier_points.iter().map(|&j| norms[j].ln()).collect();
        linear_fit(&xs, &ys).0
    });
    let tail = &norms[1..];
    let top = tail.iter().cloned().fold(0.0, f64::max);
    let mut almost_sure = Vec::new();
    if top > 0.0 {
        for s in [0.0, 0.5] {
            for scale in [1e-1, 1e-2, 1e-3] {
                let delta = top * scale;
                almost_sure.push((delta, s, almost_sure_fraction(tail, delta, s, tail.len())?));
            }
        }
    }
    Ok(DecayReport {
        norms,
        outliers,
        fit,
        outlier_slope,
        almost_sure,
    })
}
