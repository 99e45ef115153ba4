//! Integration of kernels over the panels of a mesh, either on the flat
//! triangles themselves or on their exact images on the parametric surface.

use std::ops::{AddAssign, Mul};

use serde::{Deserialize, Serialize};

use crate::bem::quadrature::QuadratureRule;
use crate::error::{Error, Result};
use crate::geometry::{PanelMesh, ParametricSurface, Vec3};

/// Geometry the boundary integrals are taken over.
///
/// `Curved` integrates over the chart image of each panel's parameter
/// triangles and collocates on the surface itself; `Flat` uses the planar
/// triangles and their centroids. Flat panels carry the spurious spectrum of
/// the polyhedron's edges, whose magnitude only decays like the dihedral
/// defect `O(h)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PanelGeometry {
    #[default]
    Curved,
    Flat,
}

#[derive(Clone, Copy, Debug)]
enum Piece {
    Flat { tri: [Vec3; 3], normal: Vec3 },
    Param([[f64; 2]; 3]),
}

#[derive(Clone, Copy, Debug)]
struct Node {
    y: Vec3,
    weight: f64,
    normal: Vec3,
}

/// Quadrature data of every panel: collocation points, areas and far-field
/// nodes, plus what is needed to refine near the evaluation point.
#[derive(Clone, Debug)]
pub struct BoundaryPanels {
    geometry: PanelGeometry,
    surface: ParametricSurface,
    rule: QuadratureRule,
    singular_rule: QuadratureRule,
    near_field_factor: f64,
    max_subdivision: usize,
    pieces: Vec<Vec<Piece>>,
    far_nodes: Vec<Vec<Node>>,
    centers: Vec<Vec3>,
    diameters: Vec<f64>,
    collocation_params: Vec<[f64; 2]>,
    /// Collocation point of each panel.
    pub collocation: Vec<Vec3>,
    /// Panel areas on the integration geometry.
    pub weights: Vec<f64>,
}

impl BoundaryPanels {
    pub fn new(
        surface: &ParametricSurface,
        mesh: &PanelMesh,
        geometry: PanelGeometry,
        rule: &QuadratureRule,
        singular_order: usize,
        near_field_factor: f64,
        max_subdivision: usize,
    ) -> Result<Self> {
        if singular_order < 2 {
            return Err(Error::InvalidParameter(format!(
                "singular quadrature order must be at least 2, got {singular_order}"
            )));
        }
        if mesh.param_pieces.len() != mesh.len() {
            return Err(Error::DimensionMismatch("mesh carries no parameter pieces".into()));
        }
        let n = mesh.len();
        let pieces: Vec<Vec<Piece>> = match geometry {
            PanelGeometry::Flat => (0..n)
                .map(|j| {
                    vec![Piece::Flat {
                        tri: mesh.panel_vertices(j),
                        normal: mesh.normals[j],
                    }]
                })
                .collect(),
            PanelGeometry::Curved => mesh
                .param_pieces
                .iter()
                .map(|ps| ps.iter().map(|&p| Piece::Param(p)).collect())
                .collect(),
        };
        let collocation = match geometry {
            PanelGeometry::Flat => mesh.centroids.clone(),
            PanelGeometry::Curved => mesh.panel_params.iter().map(|&[u, v]| surface.point(u, v)).collect(),
        };
        let mut panels = BoundaryPanels {
            geometry,
            surface: *surface,
            rule: rule.clone(),
            singular_rule: QuadratureRule::collapsed_gauss(singular_order),
            near_field_factor,
            max_subdivision,
            pieces,
            far_nodes: Vec::new(),
            centers: mesh.centroids.clone(),
            diameters: (0..n).map(|j| mesh.diameter(j)).collect(),
            collocation_params: mesh.panel_params.clone(),
            collocation,
            weights: Vec::new(),
        };
        panels.far_nodes = (0..n)
            .map(|j| {
                let mut nodes = Vec::new();
                for piece in &panels.pieces[j] {
                    panels.push_nodes(piece, &panels.rule, &mut nodes);
                }
                nodes
            })
            .collect();
        panels.weights = panels
            .far_nodes
            .iter()
            .map(|nodes| crate::numerics::pairwise_sum(&nodes.iter().map(|n| n.weight).collect::<Vec<_>>()))
            .collect();
        for (index, &area) in panels.weights.iter().enumerate() {
            if !(area > 0.0) {
                return Err(Error::DegeneratePanel { index, area });
            }
        }
        Ok(panels)
    }

    pub fn geometry(&self) -> PanelGeometry {
        self.geometry
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// The planar triangle of panel `j` when integrating on flat panels.
    pub fn flat_triangle(&self, j: usize) -> Option<[Vec3; 3]> {
        match self.pieces[j].as_slice() {
            [Piece::Flat { tri, .. }] => Some(*tri),
            _ => None,
        }
    }

    /// Smallest distance from `z` to the far-field quadrature nodes of panel
    /// `j`; within a fraction of the panel size of the true distance.
    pub fn node_distance(&self, j: usize, z: &Vec3) -> f64 {
        self.far_nodes[j]
            .iter()
            .map(|n| (n.y - z).norm())
            .fold((self.centers[j] - z).norm(), f64::min)
    }

    /// Center and longest edge of panel `j`, used by the near-field test.
    pub fn extent(&self, j: usize) -> (Vec3, f64) {
        (self.centers[j], self.diameters[j])
    }

    fn push_nodes(&self, piece: &Piece, rule: &QuadratureRule, out: &mut Vec<Node>) {
        match *piece {
            Piece::Flat { tri, normal } => {
                let [a, b, c] = tri;
                let (e1, e2) = (b - a, c - a);
                let jac = e1.cross(&e2).norm();
                for (node, w) in rule.nodes.iter().zip(&rule.weights) {
                    out.push(Node {
                        y: a + e1 * node[0] + e2 * node[1],
                        weight: w * jac,
                        normal,
                    });
                }
            }
            Piece::Param([a, b, c]) => {
                let e1 = [b[0] - a[0], b[1] - a[1]];
                let e2 = [c[0] - a[0], c[1] - a[1]];
                let jac = (e1[0] * e2[1] - e1[1] * e2[0]).abs();
                let orient = self.surface.orientation();
                for (node, w) in rule.nodes.iter().zip(&rule.weights) {
                    let u = a[0] + e1[0] * node[0] + e2[0] * node[1];
                    let v = a[1] + e1[1] * node[0] + e2[1] * node[1];
                    let jet = self.surface.jet(u, v);
                    let cross = jet.du.cross(&jet.dv);
                    let area = cross.norm();
                    out.push(Node {
                        y: jet.point,
                        weight: w * jac * area,
                        normal: cross * (orient / area),
                    });
                }
            }
        }
    }

    fn piece_extent(&self, piece: &Piece) -> (Vec3, f64) {
        let corners = match *piece {
            Piece::Flat { tri, .. } => tri,
            Piece::Param(p) => p.map(|q| self.surface.point(q[0], q[1])),
        };
        let [a, b, c] = corners;
        let diameter = (b - a).norm().max((c - b).norm()).max((a - c).norm());
        let center = match *piece {
            Piece::Flat { .. } => (a + b + c) / 3.0,
            Piece::Param([p, q, r]) => self
                .surface
                .point((p[0] + q[0] + r[0]) / 3.0, (p[1] + q[1] + r[1]) / 3.0),
        };
        (center, diameter)
    }

    fn integrate_piece<T, F>(&self, piece: &Piece, x: &Vec3, depth: usize, zero: T, f: &F) -> T
    where
        T: Copy + AddAssign + Mul<f64, Output = T>,
        F: Fn(&Vec3, &Vec3) -> T,
    {
        let (center, diameter) = self.piece_extent(piece);
        let mut acc = zero;
        if depth < self.max_subdivision && (x - center).norm() < self.near_field_factor * diameter {
            for sub in split4(piece) {
                acc += self.integrate_piece(&sub, x, depth + 1, zero, f);
            }
        } else {
            let mut nodes = Vec::with_capacity(self.rule.len());
            self.push_nodes(piece, &self.rule, &mut nodes);
            for node in &nodes {
                acc += f(&node.y, &node.normal) * node.weight;
            }
        }
        acc
    }

    /// `int_{panel j} f(y, nu_y) dS_y` for an evaluation point `x` off panel
    /// `j`, refining pieces within `near_field_factor` diameters of `x`.
    pub fn integrate<T, F>(&self, j: usize, x: &Vec3, zero: T, f: F) -> T
    where
        T: Copy + AddAssign + Mul<f64, Output = T>,
        F: Fn(&Vec3, &Vec3) -> T,
    {
        let mut acc = zero;
        if self.max_subdivision > 0 && (x - self.centers[j]).norm() < self.near_field_factor * self.diameters[j] {
            for piece in &self.pieces[j] {
                acc += self.integrate_piece(piece, x, 0, zero, &f);
            }
        } else {
            for node in &self.far_nodes[j] {
                acc += f(&node.y, &node.normal) * node.weight;
            }
        }
        acc
    }

    /// Integral over panel `i` itself for a kernel singular at its own
    /// collocation point: the piece holding that point is split into three
    /// triangles with the point as apex, each integrated by a collapsed
    /// Gauss rule whose Jacobian cancels a `1/r` singularity.
    pub fn integrate_self<F>(&self, i: usize, f: F) -> f64
    where
        F: Fn(&Vec3, &Vec3) -> f64,
    {
        let x = self.collocation[i];
        let apex = match self.geometry {
            PanelGeometry::Flat => None,
            PanelGeometry::Curved => {
                let c = self.collocation_params[i];
                self.pieces[i]
                    .iter()
                    .position(|piece| matches!(piece, Piece::Param(t) if contains_param(t, c)))
                    .map(|k| (k, c))
            }
        };
        let mut acc = 0.0;
        for (k, piece) in self.pieces[i].iter().enumerate() {
            let subs: Vec<Piece> = match (*piece, apex) {
                (Piece::Flat { tri, normal }, _) => {
                    let c = (tri[0] + tri[1] + tri[2]) / 3.0;
                    (0..3)
                        .map(|e| Piece::Flat {
                            tri: [tri[e], c, tri[(e + 1) % 3]],
                            normal,
                        })
                        .collect()
                }
                (Piece::Param(t), Some((holder, c))) if holder == k => {
                    (0..3).map(|e| Piece::Param([t[e], c, t[(e + 1) % 3]])).collect()
                }
                _ => {
                    acc += self.integrate_piece(piece, &x, 0, 0.0, &f);
                    continue;
                }
            };
            let mut nodes = Vec::new();
            for sub in &subs {
                self.push_nodes(sub, &self.singular_rule, &mut nodes);
            }
            for node in &nodes {
                acc += f(&node.y, &node.normal) * node.weight;
            }
        }
        acc
    }
}

fn contains_param(t: &[[f64; 2]; 3], p: [f64; 2]) -> bool {
    let cross = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let area = cross(t[0], t[1], t[2]);
    let tol = -1e-12 * area.abs();
    let s = area.signum();
    (0..3).all(|e| s * cross(t[e], t[(e + 1) % 3], p) >= tol)
}

fn split4(piece: &Piece) -> [Piece; 4] {
    match *piece {
        Piece::Flat { tri, normal } => {
            let [a, b, c] = tri;
            let (ab, bc, ca) = ((a + b) * 0.5, (b + c) * 0.5, (c + a) * 0.5);
            [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]].map(|tri| Piece::Flat { tri, normal })
        }
        Piece::Param([a, b, c]) => {
            let mid = |p: [f64; 2], q: [f64; 2]| [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
            let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
            [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]].map(Piece::Param)
        }
    }
}
