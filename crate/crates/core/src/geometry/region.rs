use std::f64::consts::SQRT_2;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::surface::{ParametricSurface, Vec3};

/// The two planar integration regions in the `y = 0` half-plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionKind {
    /// `0 < x < 2 sqrt 2`, `0 < z < 2 sqrt 2`; used around the torus.
    X,
    /// `0 < x < 3 sqrt 2 / 2`, `0 < z < 2`; used around the spheroid.
    Y,
}

impl RegionKind {
    pub fn bounds(self) -> ([f64; 2], [f64; 2]) {
        match self {
            RegionKind::X => ([0.0, 2.0 * SQRT_2], [0.0, 2.0 * SQRT_2]),
            RegionKind::Y => ([0.0, 1.5 * SQRT_2], [0.0, 2.0]),
        }
    }
}

/// Uniform cell-centred grid on an axis-aligned rectangle of the `y = 0`
/// plane, keeping only cells whose centre is farther than `epsilon` from the
/// solid.
#[derive(Clone, Debug)]
pub struct CrossSectionRegion {
    pub x_range: [f64; 2],
    pub z_range: [f64; 2],
    pub epsilon: f64,
    pub grid_n: usize,
    pub dx: f64,
    pub dz: f64,
    pub points: Vec<Vec3>,
    /// `(ix, iz)` cell index of each retained point.
    pub cells: Vec<(usize, usize)>,
}

pub fn build_region(
    kind: RegionKind,
    surface: &ParametricSurface,
    epsilon: f64,
    grid_n: usize,
) -> Result<CrossSectionRegion> {
    let (x_range, z_range) = kind.bounds();
    CrossSectionRegion::rectangle(surface, x_range, z_range, epsilon, grid_n)
}

impl CrossSectionRegion {
    pub fn rectangle(
        surface: &ParametricSurface,
        x_range: [f64; 2],
        z_range: [f64; 2],
        epsilon: f64,
        grid_n: usize,
    ) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "exclusion margin must be positive, got {epsilon}"
            )));
        }
        if grid_n < 16 {
            return Err(Error::InvalidParameter(format!(
                "region grid needs at least 16 cells per side, got {grid_n}"
            )));
        }
        let dx = (x_range[1] - x_range[0]) / grid_n as f64;
        let dz = (z_range[1] - z_range[0]) / grid_n as f64;
        let mut points = Vec::new();
        let mut cells = Vec::new();
        for iz in 0..grid_n {
            for ix in 0..grid_n {
                let p = Vec3::new(
                    x_range[0] + (ix as f64 + 0.5) * dx,
                    0.0,
                    z_range[0] + (iz as f64 + 0.5) * dz,
                );
                if is_outside_tube(surface, &p, epsilon) {
                    points.push(p);
                    cells.push((ix, iz));
                }
            }
        }
        if points.is_empty() {
            return Err(Error::EmptyRegion { epsilon });
        }
        Ok(CrossSectionRegion {
            x_range,
            z_range,
            epsilon,
            grid_n,
            dx,
            dz,
            points,
            cells,
        })
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dz
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// CSV with header `x,z,cell_area`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,z,cell_area\n");
        let area = self.cell_area();
        for p in &self.points {
            let _ = writeln!(out, "{},{},{}", p.x, p.z, area);
        }
        out
    }
}

/// Distance to the solid exceeds `epsilon`: interior points never qualify.
pub fn is_outside_tube(surface: &ParametricSurface, p: &Vec3, epsilon: f64) -> bool {
    !surface.contains(p) && surface.distance(p) > epsilon
}
