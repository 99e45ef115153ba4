//! Laplace fundamental solution `1 / (4 pi |x - y|)` and its derivatives.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::Vec3;

const FOUR_PI: f64 = 4.0 * PI;

#[inline]
fn separation(x: &Vec3, y: &Vec3) -> Result<(Vec3, f64)> {
    let d = x - y;
    let r = d.norm();
    if r == 0.0 || !r.is_finite() {
        return Err(Error::CoincidentPoints);
    }
    Ok((d, r))
}

pub fn gamma(x: &Vec3, y: &Vec3) -> Result<f64> {
    let (_, r) = separation(x, y)?;
    Ok(1.0 / (FOUR_PI * r))
}

/// Gradient with respect to `x`: `-(x - y) / (4 pi |x - y|^3)`.
pub fn grad_gamma(x: &Vec3, y: &Vec3) -> Result<Vec3> {
    let (d, r) = separation(x, y)?;
    Ok(-d / (FOUR_PI * r * r * r))
}

/// Normal derivative in `y`: `(x - y) . nu_y / (4 pi |x - y|^3)`.
pub fn dlp_kernel(x: &Vec3, y: &Vec3, normal_y: &Vec3) -> Result<f64> {
    let (d, r) = separation(x, y)?;
    Ok(d.dot(normal_y) / (FOUR_PI * r * r * r))
}

// Unchecked variants for the assembly loops, where coincidence is excluded
// by construction.

#[inline]
pub(crate) fn gamma_at(d: &Vec3) -> f64 {
    1.0 / (FOUR_PI * d.norm())
}

#[inline]
pub(crate) fn grad_gamma_at(d: &Vec3) -> Vec3 {
    let r = d.norm();
    -d / (FOUR_PI * r * r * r)
}

/// Kernel of the Neumann-Poincare operator `K` at `x` for a source `y`
/// displaced by `d = y - x`: `d . nu_y / (4 pi |d|^3)`. Equal to
/// `-dlp_kernel(x, y, nu_y)`; this sign makes `K[1] = 1/2` on the boundary.
#[inline]
pub(crate) fn np_kernel_at(d: &Vec3, normal_y: &Vec3) -> f64 {
    let r = d.norm();
    d.dot(normal_y) / (FOUR_PI * r * r * r)
}
