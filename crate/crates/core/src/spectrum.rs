//! Eigenvalues and `H*`-normalized eigenfunctions of the discrete
//! Neumann-Poincare operator, and diagnostics on the computed spectrum.

use faer::linalg::triangular_solve::{solve_lower_triangular_in_place, solve_upper_triangular_in_place};
use faer::{Mat, Side};
use serde::Serialize;

use crate::bem::{antisymmetry, OperatorPair};
use crate::error::{Error, Result};
use crate::geometry::{willmore_energy, PanelMesh, ParametricSurface};
use crate::numerics::median;

/// Eigenpairs sorted by descending `|lambda|`; columns of `eigenvectors` are
/// panel densities with `V^T G V = I`.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Mat<f64>,
    /// Relative Frobenius norm of the antisymmetric part of `G K_h` that the
    /// symmetrization discarded.
    pub discarded_antisymmetry: f64,
}

/// Ties in `|lambda|` closer than this are ordered by signed value.
const TIE_TOLERANCE: f64 = 1e-12;

/// Solves `M v = lambda G v` with `M` the symmetric part of `G K_h` and `G`
/// the single-layer Gram matrix, through a Cholesky factor of `G` and a dense
/// symmetric eigensolver.
pub fn solve_spectrum(pair: &OperatorPair) -> Result<Spectrum> {
    let n = pair.len();
    let gram = pair.gram();
    let product = &gram * &pair.np_adjoint;
    let discarded = antisymmetry(&product);
    let sym = Mat::from_fn(n, n, |i, j| 0.5 * (product[(i, j)] + product[(j, i)]));

    let llt = gram.llt(Side::Lower).map_err(|e| {
        let faer::linalg::cholesky::llt::factor::LltError::NonPositivePivot { index } = e;
        let smallest = gram
            .self_adjoint_eigenvalues(Side::Lower)
            .ok()
            .and_then(|v| v.first().copied())
            .unwrap_or(f64::NAN);
        Error::NotPositiveDefinite {
            pivot: index,
            smallest_eigenvalue: smallest,
        }
    })?;
    let lower = llt.L();
    let par = faer::get_global_parallelism();

    // C = L^-1 M L^-T, formed as L^-1 (L^-1 M)^T using the symmetry of M
    let mut half = sym;
    solve_lower_triangular_in_place(lower, half.as_mut(), par);
    let mut whitened = half.transpose().to_owned();
    solve_lower_triangular_in_place(lower, whitened.as_mut(), par);
    let whitened = Mat::from_fn(n, n, |i, j| 0.5 * (whitened[(i, j)] + whitened[(j, i)]));

    let evd = whitened
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::EigenNoConvergence)?;
    let values: Vec<f64> = (0..n).map(|k| evd.S().column_vector()[k]).collect();
    let mut vectors = evd.U().to_owned();
    solve_upper_triangular_in_place(lower.transpose(), vectors.as_mut(), par);

    let order = descending_abs_order(&values);
    let eigenvalues: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    let eigenvectors = Mat::from_fn(n, n, |i, j| vectors[(i, order[j])]);
    let mut spectrum = Spectrum {
        eigenvalues,
        eigenvectors,
        discarded_antisymmetry: discarded,
    };
    spectrum.fix_signs();
    Ok(spectrum)
}

fn descending_abs_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()).then(a.cmp(&b)));
    // within runs of numerically tied magnitudes, larger signed value first
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len()
            && (values[order[end - 1]].abs() - values[order[end]].abs()).abs() < TIE_TOLERANCE
        {
            end += 1;
        }
        order[start..end].sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
        start = end;
    }
    order
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Density of eigenfunction `j` at the panel centroids.
    pub fn density(&self, j: usize) -> Vec<f64> {
        self.eigenvectors.col(j).iter().copied().collect()
    }

    /// Indices of positive eigenvalues in decreasing order of value; entry 0
    /// is the eigenvalue near 1/2.
    pub fn positive_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.eigenvalues[k] > 0.0).collect()
    }

    /// Indices of negative eigenvalues in decreasing order of magnitude.
    pub fn negative_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.eigenvalues[k] < 0.0).collect()
    }

    /// Negative eigenvalues whose magnitude exceeds `threshold`.
    pub fn count_negative_above(&self, threshold: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l < 0.0 && -l > threshold).count()
    }

    /// Position of eigenpair `k` within its sign class: `j >= 0` for the
    /// `j`-th positive eigenvalue (0 is the top one), `-m` for the `m`-th
    /// negative eigenvalue counted from 1.
    pub fn signed_label(&self, k: usize) -> i64 {
        let value = self.eigenvalues[k];
        let rank = self.eigenvalues[..k]
            .iter()
            .filter(|&&l| (l > 0.0) == (value > 0.0))
            .count() as i64;
        if value > 0.0 {
            rank
        } else {
            -(rank + 1)
        }
    }

    /// `max |V^T G V - I|`.
    pub fn orthonormality_defect(&self, gram: &Mat<f64>) -> f64 {
        let v = &self.eigenvectors;
        let prod = v.transpose() * (gram * v);
        let mut worst = 0.0f64;
        for j in 0..prod.ncols() {
            for i in 0..prod.nrows() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - target).abs());
            }
        }
        worst
    }

    /// `||K_h v_j - lambda_j v_j||_G / ||v_j||_G` for every eigenpair.
    pub fn eigen_residuals(&self, pair: &OperatorPair) -> Vec<f64> {
        let gram = pair.gram();
        let v = &self.eigenvectors;
        let mut r = &pair.np_adjoint * v;
        for j in 0..self.len() {
            let l = self.eigenvalues[j];
            for i in 0..self.len() {
                r[(i, j)] -= l * v[(i, j)];
            }
        }
        let gr = &gram * &r;
        (0..self.len())
            .map(|j| {
                let num: f64 = (0..self.len()).map(|i| r[(i, j)] * gr[(i, j)]).sum();
                num.max(0.0).sqrt()
            })
            .collect()
    }

    /// Makes the largest-magnitude entry of each eigenvector positive.
    fn fix_signs(&mut self) {
        let n = self.eigenvectors.nrows();
        for j in 0..self.eigenvectors.ncols() {
            let mut pivot = 0;
            for i in 1..n {
                if self.eigenvectors[(i, j)].abs() > self.eigenvectors[(pivot, j)].abs() {
                    pivot = i;
                }
            }
            if self.eigenvectors[(pivot, j)] < 0.0 {
                for i in 0..n {
                    self.eigenvectors[(i, j)] = -self.eigenvectors[(i, j)];
                }
            }
        }
    }
}

/// Asymptotic constant of the positive spectrum,
/// `sqrt((3 W - 2 pi chi) / (128 pi))`.
pub fn weyl_constant(willmore: f64, euler_characteristic: i64) -> f64 {
    let pi = std::f64::consts::PI;
    ((3.0 * willmore - 2.0 * pi * euler_characteristic as f64) / (128.0 * pi)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeylFit {
    pub estimated: f64,
    pub theoretical: f64,
    pub relative_deviation: f64,
    pub willmore_energy: f64,
    pub euler_characteristic: i64,
    /// Positive-spectrum indices `[first, last)` used for the estimate.
    pub window: [usize; 2],
    pub positive_count: usize,
}

/// Fraction window `[lo, hi)` of the positive spectrum used by [`weyl_fit`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct WeylWindow {
    pub lo: f64,
    pub hi: f64,
}

impl Default for WeylWindow {
    fn default() -> Self {
        WeylWindow { lo: 0.2, hi: 0.95 }
    }
}

/// Median of `lambda_j sqrt(j)` over a window of the positive eigenvalues in
/// decreasing order (`j = 0` is the top eigenvalue; the first ten indices are
/// always skipped), against the constant predicted from the Willmore energy
/// and Euler characteristic.
pub fn weyl_fit(
    spectrum: &Spectrum,
    surface: &ParametricSurface,
    mesh: &PanelMesh,
    window: WeylWindow,
) -> Result<WeylFit> {
    if !(0.0 <= window.lo && window.lo < window.hi && window.hi <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Weyl window must satisfy 0 <= lo < hi <= 1, got [{}, {}]",
            window.lo, window.hi
        )));
    }
    let positive: Vec<f64> = spectrum
        .positive_indices()
        .into_iter()
        .map(|k| spectrum.eigenvalues[k])
        .collect();
    if positive.len() < 100 {
        return Err(Error::InsufficientData(format!(
            "Weyl fit needs at least 100 positive eigenvalues, got {}",
            positive.len()
        )));
    }
    let count = positive.len();
    let first = ((window.lo * count as f64).floor() as usize).max(10);
    let last = ((window.hi * count as f64).ceil() as usize).min(count);
    if last <= first {
        return Err(Error::InsufficientData("empty Weyl window".into()));
    }
    let scaled: Vec<f64> = (first..last).map(|j| positive[j] * (j as f64).sqrt()).collect();
    let estimated = median(&scaled);
    let willmore = willmore_energy(surface, mesh)?;
    let chi = mesh.euler_characteristic();
    let theoretical = weyl_constant(willmore, chi);
    Ok(WeylFit {
        estimated,
        theoretical,
        relative_deviation: (estimated - theoretical).abs() / theoretical,
        willmore_energy: willmore,
        euler_characteristic: chi,
        window: [first, last],
        positive_count: count,
    })
}

/// `#{ j in 1..=N : |a_j| > delta j^-s } / N`, with `values[0] = a_1`.
pub fn almost_sure_fraction(values: &[f64], delta: f64, s: f64, n: usize) -> Result<f64> {
    if n == 0 || n > values.len() {
        return Err(Error::InvalidParameter(format!(
            "N = {n} must be in 1..={}",
            values.len()
        )));
    }
    if !(delta > 0.0) || !(s >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need delta > 0 and s >= 0, got delta = {delta}, s = {s}"
        )));
    }
    let count = values[..n]
        .iter()
        .enumerate()
        .filter(|(k, a)| a.abs() > delta * ((k + 1) as f64).powf(-s))
        .count();
    Ok(count as f64 / n as f64)
}
