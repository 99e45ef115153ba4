use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::surface::{ParametricSurface, Vec3};

/// Position of a panel in the structured `(u, v)` grid.
///
/// Panels sharing a `ring` are images of each other under rotation about
/// the z-axis by multiples of `2 pi / n_v`; `column` is the azimuthal slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PanelLabel {
    pub ring: usize,
    pub column: usize,
}

/// Flat-triangle discretization of a closed surface.
#[derive(Clone, Debug)]
pub struct PanelMesh {
    pub vertices: Vec<Vec3>,
    pub vertex_params: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub centroids: Vec<Vec3>,
    pub areas: Vec<f64>,
    pub normals: Vec<Vec3>,
    /// Chart parameters of each panel's collocation point, unwrapped across
    /// seams.
    pub panel_params: Vec<[f64; 2]>,
    /// Parameter-space triangles whose chart images tile the curved panel.
    /// Pole fans are the image of a rectangle and carry two pieces.
    pub param_pieces: Vec<Vec<[[f64; 2]; 3]>>,
    pub labels: Option<Vec<PanelLabel>>,
    pub n_rings: usize,
}

/// Structured product mesh of `surface` with `n_u` cells along `u` and `n_v`
/// along the azimuth, each quad split along one diagonal.
///
/// Periodic directions identify their seam vertices. For sphere-like charts
/// the pole rows become triangle fans, so those meshes have
/// `2 n_v (n_u - 1)` panels instead of `2 n_u n_v`.
pub fn triangulate(surface: &ParametricSurface, n_u: usize, n_v: usize) -> Result<PanelMesh> {
    if n_u < 4 || n_v < 4 {
        return Err(Error::InvalidParameter(format!(
            "mesh resolution must be at least 4 x 4, got {n_u} x {n_v}"
        )));
    }
    let du = surface.u_max() / n_u as f64;
    let dv = TAU / n_v as f64;
    let flip = surface.orientation() < 0.0;

    let mut builder = Builder {
        surface,
        vertices: Vec::new(),
        vertex_params: Vec::new(),
        triangles: Vec::new(),
        panel_params: Vec::new(),
        param_pieces: Vec::new(),
        labels: Vec::new(),
        flip,
    };

    let mut n_rings = 0;
    if surface.periodic_u() {
        let index = |i: usize, j: usize| (i % n_u) * n_v + (j % n_v);
        for i in 0..n_u {
            for j in 0..n_v {
                builder.push_vertex(i as f64 * du, j as f64 * dv);
            }
        }
        for i in 0..n_u {
            for j in 0..n_v {
                let (a, b, c, d) = (index(i, j), index(i + 1, j), index(i + 1, j + 1), index(i, j + 1));
                let (u0, v0) = (i as f64 * du, j as f64 * dv);
                let (u1, v1) = (u0 + du, v0 + dv);
                builder.push_panel([a, b, c], vec![[[u0, v0], [u1, v0], [u1, v1]]], 2 * i, j);
                builder.push_panel([a, c, d], vec![[[u0, v0], [u1, v1], [u0, v1]]], 2 * i + 1, j);
            }
        }
        n_rings = 2 * n_u;
    } else {
        // north pole, n_u - 1 interior rings, south pole
        builder.push_vertex(0.0, 0.0);
        for i in 1..n_u {
            for j in 0..n_v {
                builder.push_vertex(i as f64 * du, j as f64 * dv);
            }
        }
        let south = builder.push_vertex(surface.u_max(), 0.0);
        let ring = |i: usize, j: usize| 1 + (i - 1) * n_v + (j % n_v);

        for j in 0..n_v {
            let v0 = j as f64 * dv;
            let v1 = v0 + dv;
            builder.push_fan(
                [0, ring(1, j), ring(1, j + 1)],
                vec![[[0.0, v0], [du, v0], [du, v1]], [[0.0, v0], [du, v1], [0.0, v1]]],
                [2.0 * du / 3.0, v0 + dv / 2.0],
                0,
                j,
            );
        }
        n_rings += 1;
        for i in 1..n_u - 1 {
            for j in 0..n_v {
                let (a, b, c, d) = (ring(i, j), ring(i + 1, j), ring(i + 1, j + 1), ring(i, j + 1));
                let (u0, v0) = (i as f64 * du, j as f64 * dv);
                let (u1, v1) = (u0 + du, v0 + dv);
                builder.push_panel([a, b, c], vec![[[u0, v0], [u1, v0], [u1, v1]]], n_rings, j);
                builder.push_panel([a, c, d], vec![[[u0, v0], [u1, v1], [u0, v1]]], n_rings + 1, j);
            }
            n_rings += 2;
        }
        let last = n_u - 1;
        for j in 0..n_v {
            let v0 = j as f64 * dv;
            let u0 = last as f64 * du;
            let (u1, v1) = (surface.u_max(), v0 + dv);
            builder.push_fan(
                [ring(last, j), south, ring(last, j + 1)],
                vec![[[u0, v0], [u1, v0], [u0, v1]], [[u1, v0], [u1, v1], [u0, v1]]],
                [u0 + du / 3.0, v0 + dv / 2.0],
                n_rings,
                j,
            );
        }
        n_rings += 1;
    }

    builder.finish(n_rings)
}

struct Builder<'a> {
    surface: &'a ParametricSurface,
    vertices: Vec<Vec3>,
    vertex_params: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    panel_params: Vec<[f64; 2]>,
    param_pieces: Vec<Vec<[[f64; 2]; 3]>>,
    labels: Vec<PanelLabel>,
    flip: bool,
}

impl Builder<'_> {
    fn push_vertex(&mut self, u: f64, v: f64) -> usize {
        self.vertices.push(self.surface.point(u, v));
        self.vertex_params.push([u, v]);
        self.vertices.len() - 1
    }

    /// Panel over a single parameter triangle, collocated at its centroid.
    fn push_panel(&mut self, tri: [usize; 3], pieces: Vec<[[f64; 2]; 3]>, ring: usize, column: usize) {
        let [a, b, c] = pieces[0];
        let centroid = [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0];
        self.push_fan(tri, pieces, centroid, ring, column);
    }

    fn push_fan(
        &mut self,
        tri: [usize; 3],
        pieces: Vec<[[f64; 2]; 3]>,
        params: [f64; 2],
        ring: usize,
        column: usize,
    ) {
        let tri = if self.flip { [tri[0], tri[2], tri[1]] } else { tri };
        self.triangles.push(tri);
        self.panel_params.push(params);
        self.param_pieces.push(pieces);
        self.labels.push(PanelLabel { ring, column });
    }

    fn finish(self, n_rings: usize) -> Result<PanelMesh> {
        let scale = self.surface.bounding_radius();
        let mut centroids = Vec::with_capacity(self.triangles.len());
        let mut areas = Vec::with_capacity(self.triangles.len());
        let mut normals = Vec::with_capacity(self.triangles.len());
        for (index, tri) in self.triangles.iter().enumerate() {
            let [a, b, c] = tri.map(|k| self.vertices[k]);
            let cross = (b - a).cross(&(c - a));
            let area = 0.5 * cross.norm();
            if !(area > 1e-14 * scale * scale) {
                return Err(Error::DegeneratePanel { index, area });
            }
            centroids.push((a + b + c) / 3.0);
            areas.push(area);
            normals.push(cross / (2.0 * area));
        }
        Ok(PanelMesh {
            vertices: self.vertices,
            vertex_params: self.vertex_params,
            triangles: self.triangles,
            centroids,
            areas,
            normals,
            panel_params: self.panel_params,
            param_pieces: self.param_pieces,
            labels: Some(self.labels),
            n_rings,
        })
    }
}

impl PanelMesh {
    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn panel_vertices(&self, panel: usize) -> [Vec3; 3] {
        self.triangles[panel].map(|k| self.vertices[k])
    }

    pub fn total_area(&self) -> f64 {
        crate::numerics::pairwise_sum(&self.areas)
    }

    /// Longest edge of a panel.
    pub fn diameter(&self, panel: usize) -> f64 {
        let [a, b, c] = self.panel_vertices(panel);
        (b - a).norm().max((c - b).norm()).max((a - c).norm())
    }

    /// Mean edge length over all panels.
    pub fn typical_side(&self) -> f64 {
        let total: f64 = (0..self.len())
            .map(|p| {
                let [a, b, c] = self.panel_vertices(p);
                (b - a).norm() + (c - b).norm() + (a - c).norm()
            })
            .sum();
        total / (3 * self.len()) as f64
    }

    fn directed_edges(&self) -> HashMap<(usize, usize), usize> {
        let mut edges = HashMap::with_capacity(3 * self.len());
        for tri in &self.triangles {
            for k in 0..3 {
                *edges.entry((tri[k], tri[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        edges
    }

    pub fn edge_count(&self) -> usize {
        let mut undirected: Vec<(usize, usize)> = self
            .directed_edges()
            .into_keys()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        undirected.sort_unstable();
        undirected.dedup();
        undirected.len()
    }

    /// `V - E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.len() as i64
    }

    /// Checks that every edge is shared by exactly two panels traversing it
    /// in opposite directions.
    pub fn check_closed(&self) -> Result<()> {
        let edges = self.directed_edges();
        for (&(a, b), &count) in &edges {
            if count != 1 {
                return Err(Error::OpenMesh(format!(
                    "directed edge ({a}, {b}) used {count} times"
                )));
            }
            if edges.get(&(b, a)) != Some(&1) {
                return Err(Error::OpenMesh(format!("edge ({a}, {b}) has no opposite twin")));
            }
        }
        Ok(())
    }

    /// Plain-text export: `v x y z` lines then `f i j k` lines, 1-based.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(48 * (self.vertices.len() + self.len()));
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        out
    }

    pub fn write_text(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}
