//! Quadrature on the reference triangle `{(s, t) : s, t >= 0, s + t <= 1}`
//! and the closed-form singular integral of `1/r` over a flat triangle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::numerics::gauss_legendre;

/// Nodes and weights on the reference triangle; weights sum to its area 1/2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// Total polynomial degree integrated exactly.
    pub degree: usize,
}

impl QuadratureRule {
    pub fn centroid() -> Self {
        QuadratureRule {
            nodes: vec![[1.0 / 3.0, 1.0 / 3.0]],
            weights: vec![0.5],
            degree: 1,
        }
    }

    /// Three interior points, degree 2.
    pub fn three_point() -> Self {
        let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
        QuadratureRule {
            nodes: vec![[b, b], [a, b], [b, a]],
            weights: vec![1.0 / 6.0; 3],
            degree: 2,
        }
    }

    /// Symmetric seven-point rule of degree 5 (Radon).
    pub fn seven_point() -> Self {
        let sq = 15f64.sqrt();
        let a1 = (6.0 - sq) / 21.0;
        let b1 = 1.0 - 2.0 * a1;
        let a2 = (6.0 + sq) / 21.0;
        let b2 = 1.0 - 2.0 * a2;
        let w1 = (155.0 - sq) / 2400.0;
        let w2 = (155.0 + sq) / 2400.0;
        QuadratureRule {
            nodes: vec![
                [1.0 / 3.0, 1.0 / 3.0],
                [a1, a1],
                [b1, a1],
                [a1, b1],
                [a2, a2],
                [b2, a2],
                [a2, b2],
            ],
            weights: vec![9.0 / 80.0, w1, w1, w1, w2, w2, w2],
            degree: 5,
        }
    }

    /// Collapsed (Duffy) tensor Gauss-Legendre rule with `n * n` points,
    /// exact to degree `2n - 2` (the collapse Jacobian costs one degree).
    pub fn collapsed_gauss(n: usize) -> Self {
        let line = gauss_legendre(n);
        let mut nodes = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for &(xs, ws) in &line {
            let s = 0.5 * (1.0 + xs);
            for &(xt, wt) in &line {
                let t = (1.0 - s) * 0.5 * (1.0 + xt);
                nodes.push([s, t]);
                weights.push(ws * wt * (1.0 - s) * 0.25);
            }
        }
        QuadratureRule {
            nodes,
            weights,
            degree: 2 * n - 2,
        }
    }

    /// Rule selected by point count: 1, 3 or 7, or a square `n * n`
    /// collapsed Gauss rule.
    pub fn with_points(points: usize) -> Result<Self> {
        match points {
            1 => Ok(Self::centroid()),
            3 => Ok(Self::three_point()),
            7 => Ok(Self::seven_point()),
            n => {
                let root = (n as f64).sqrt().round() as usize;
                if root >= 2 && root * root == n {
                    Ok(Self::collapsed_gauss(root))
                } else {
                    Err(Error::InvalidParameter(format!(
                        "no triangle rule with {n} points (use 1, 3, 7 or a square)"
                    )))
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `int_T f dS` over the flat triangle `[a, b, c]`.
    #[inline]
    pub fn integrate<F: FnMut(&Vec3) -> f64>(&self, tri: &[Vec3; 3], mut f: F) -> f64 {
        let [a, b, c] = tri;
        let (e1, e2) = (b - a, c - a);
        let jac = e1.cross(&e2).norm();
        let mut acc = 0.0;
        for (node, w) in self.nodes.iter().zip(&self.weights) {
            let y = a + e1 * node[0] + e2 * node[1];
            acc += w * f(&y);
        }
        acc * jac
    }

    /// Vector-valued counterpart of [`integrate`](Self::integrate).
    #[inline]
    pub fn integrate_vec<F: FnMut(&Vec3) -> Vec3>(&self, tri: &[Vec3; 3], mut f: F) -> Vec3 {
        let [a, b, c] = tri;
        let (e1, e2) = (b - a, c - a);
        let jac = e1.cross(&e2).norm();
        let mut acc = Vec3::zeros();
        for (node, w) in self.nodes.iter().zip(&self.weights) {
            let y = a + e1 * node[0] + e2 * node[1];
            acc += f(&y) * *w;
        }
        acc * jac
    }
}

/// `int_T 1 / |x - y| dS_y` for `x` in the plane of the flat triangle `T`.
///
/// Sums the signed fan of triangles `(x, p, q)` over the edges; each
/// contributes `h (asinh(s_q / h) - asinh(s_p / h))` where `h` is the
/// distance from `x` to the edge line and `s` the arclength coordinates of
/// the endpoints measured from the foot of the perpendicular.
pub fn flat_triangle_inverse_distance(x: &Vec3, tri: &[Vec3; 3]) -> f64 {
    let normal = (tri[1] - tri[0]).cross(&(tri[2] - tri[0])).normalize();
    let mut total = 0.0;
    for k in 0..3 {
        let p = tri[k];
        let q = tri[(k + 1) % 3];
        let edge = q - p;
        let len = edge.norm();
        let t = edge / len;
        // in-plane unit vector pointing from the edge toward the interior
        let inward = normal.cross(&t);
        let h = (x - p).dot(&inward);
        if h.abs() < 1e-15 * len {
            continue;
        }
        let sp = (p - x).dot(&t);
        let sq = (q - x).dot(&t);
        total += h * ((sq / h.abs()).asinh() - (sp / h.abs()).asinh());
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn monomial_exact(a: u32, b: u32) -> f64 {
        // int s^a t^b over the reference triangle = a! b! / (a + b + 2)!
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        fact(a) * fact(b) / fact(a + b + 2)
    }

    #[test]
    fn rules_are_exact_to_declared_degree() {
        let rules = [
            QuadratureRule::centroid(),
            QuadratureRule::three_point(),
            QuadratureRule::seven_point(),
            QuadratureRule::collapsed_gauss(4),
            QuadratureRule::collapsed_gauss(8),
        ];
        for rule in &rules {
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            let total: f64 = rule.weights.iter().sum();
            assert!((total - 0.5).abs() < 1e-14);
            for a in 0..=rule.degree as u32 {
                for b in 0..=(rule.degree as u32 - a) {
                    let approx: f64 = rule
                        .nodes
                        .iter()
                        .zip(&rule.weights)
                        .map(|(n, w)| w * n[0].powi(a as i32) * n[1].powi(b as i32))
                        .sum();
                    let exact = monomial_exact(a, b);
                    assert!(
                        (approx - exact).abs() <= 1e-12 * exact,
                        "degree {} rule, monomial s^{a} t^{b}",
                        rule.degree
                    );
                }
            }
        }
    }

    #[test]
    fn with_points_selection() {
        assert_eq!(QuadratureRule::with_points(7).unwrap().degree, 5);
        assert_eq!(QuadratureRule::with_points(16).unwrap().len(), 16);
        assert!(QuadratureRule::with_points(5).is_err());
    }

    // Oracle: fan of triangles with apex at x, each integrated with the
    // apex-collapsing substitution that cancels the 1/r singularity, leaving
    // 2 A int_0^1 dtau / |(1 - tau)(p - x) + tau (q - x)|. The line integral
    // is nearly singular when x is close to an edge, so it is split at the
    // closest point and graded geometrically toward it.
    fn duffy_oracle(x: &Vec3, tri: &[Vec3; 3]) -> f64 {
        let line = gauss_legendre(20);
        let mut total = 0.0;
        for k in 0..3 {
            let p = tri[k] - x;
            let q = tri[(k + 1) % 3] - x;
            let twice_area = p.cross(&q).norm();
            let sign = p.cross(&q).dot(&(tri[1] - tri[0]).cross(&(tri[2] - tri[0]))).signum();
            let e = q - p;
            let foot = (-p.dot(&e) / e.norm_squared()).clamp(0.0, 1.0);
            let f = |tau: f64| 1.0 / (p * (1.0 - tau) + q * tau).norm();
            let mut acc = 0.0;
            for (lo, hi) in [(foot, 0.0), (foot, 1.0)] {
                let mut breaks = vec![0.0];
                let mut r = 1e-14;
                while r < 1.0 {
                    breaks.push(r);
                    r *= 4.0;
                }
                breaks.push(1.0);
                for w2 in breaks.windows(2) {
                    let (a, b) = (lo + (hi - lo) * w2[0], lo + (hi - lo) * w2[1]);
                    let half = 0.5 * (b - a);
                    for &(s, w) in &line {
                        acc += (w * half).abs() * f(0.5 * (a + b) + half * s);
                    }
                }
            }
            total += sign * twice_area * acc;
        }
        total
    }

    #[test]
    fn self_integral_at_centroid_matches_oracle() {
        let tri = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.2, 0.1),
            Vec3::new(0.3, 0.9, -0.2),
        ];
        let x = (tri[0] + tri[1] + tri[2]) / 3.0;
        let closed = flat_triangle_inverse_distance(&x, &tri);
        let oracle = duffy_oracle(&x, &tri);
        assert!((closed - oracle).abs() < 1e-10 * oracle, "{closed} vs {oracle}");
    }

    proptest! {
        #[test]
        fn self_integral_for_random_triangles(
            ax in -1.0f64..1.0, ay in -1.0f64..1.0, bx in -1.0f64..1.0,
            by in -1.0f64..1.0, cx in -1.0f64..1.0, cy in -1.0f64..1.0,
            l1 in 0.05f64..1.0, l2 in 0.05f64..1.0,
        ) {
            let tri = [Vec3::new(ax, ay, 0.3), Vec3::new(bx, by, -0.1), Vec3::new(cx, cy, 0.5)];
            let area = 0.5 * (tri[1] - tri[0]).cross(&(tri[2] - tri[0])).norm();
            prop_assume!(area > 0.05);
            let l3 = 1.0 / (l1 + l2 + 1.0);
            let x = tri[0] * (l1 * l3) + tri[1] * (l2 * l3) + tri[2] * l3;
            let closed = flat_triangle_inverse_distance(&x, &tri);
            let oracle = duffy_oracle(&x, &tri);
            prop_assert!((closed - oracle).abs() < 1e-8 * oracle);
        }
    }
}
