//! Parametric charts for the closed surfaces we discretize.
//!
//! Every chart maps `(u, v)` to a point of the surface. `v` is always the
//! azimuthal angle about the z-axis, so all three surfaces are surfaces of
//! revolution and panels on the same `u`-ring are rotated copies of each other.

use std::f64::consts::{PI, SQRT_2, TAU};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Which closed surface a chart describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceKind {
    Sphere,
    OblateSpheroid,
    CliffordTorus,
}

impl SurfaceKind {
    pub fn name(self) -> &'static str {
        match self {
            SurfaceKind::Sphere => "sphere",
            SurfaceKind::OblateSpheroid => "oblate_spheroid",
            SurfaceKind::CliffordTorus => "clifford_torus",
        }
    }
}

/// Optional shape overrides. Missing values fall back to the defaults of
/// each surface: unit sphere, spheroid with semi-axes (sqrt 2, sqrt 2, 1),
/// torus with radii (sqrt 2, 1).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SurfaceParams {
    pub radius: Option<f64>,
    pub equatorial: Option<f64>,
    pub polar: Option<f64>,
    pub major: Option<f64>,
    pub minor: Option<f64>,
}

/// A closed surface of revolution given by an analytic chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParametricSurface {
    /// `u` is the polar angle in `[0, pi]`.
    Sphere { radius: f64 },
    /// Axis-aligned spheroid `(x^2 + y^2)/a^2 + z^2/c^2 = 1`, `u` polar.
    Spheroid { equatorial: f64, polar: f64 },
    /// `((R + r cos u) cos v, (R + r cos u) sin v, r sin u)`.
    Torus { major: f64, minor: f64 },
}

/// Chart value with first and second partial derivatives.
#[derive(Clone, Copy, Debug)]
pub struct ChartJet {
    pub point: Vec3,
    pub du: Vec3,
    pub dv: Vec3,
    pub duu: Vec3,
    pub duv: Vec3,
    pub dvv: Vec3,
}

/// First and second fundamental forms at a chart point, with the curvatures
/// derived from them. The second fundamental form is taken against the
/// inward normal so that convex surfaces have positive `l` and `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureSample {
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
    pub gaussian: f64,
    pub mean: f64,
}

impl CurvatureSample {
    pub fn metric_det(&self) -> f64 {
        self.g11 * self.g22 - self.g12 * self.g12
    }

    /// Principal symbol of the Neumann-Poincare operator at covector `xi`:
    /// `(L xi2^2 - 2 M xi1 xi2 + N xi1^2) / (4 det g |xi|_g^3)`.
    pub fn np_symbol(&self, xi: [f64; 2]) -> f64 {
        let det = self.metric_det();
        let [x1, x2] = xi;
        let numer = self.l * x2 * x2 - 2.0 * self.m * x1 * x2 + self.n * x1 * x1;
        // inverse metric applied to xi
        let norm2 = (self.g22 * x1 * x1 - 2.0 * self.g12 * x1 * x2 + self.g11 * x2 * x2) / det;
        numer / (4.0 * det * norm2.powf(1.5))
    }
}

pub fn build_surface(kind: SurfaceKind, params: &SurfaceParams) -> Result<ParametricSurface> {
    match kind {
        SurfaceKind::Sphere => ParametricSurface::sphere(params.radius.unwrap_or(1.0)),
        SurfaceKind::OblateSpheroid => ParametricSurface::spheroid(
            params.equatorial.unwrap_or(SQRT_2),
            params.polar.unwrap_or(1.0),
        ),
        SurfaceKind::CliffordTorus => {
            ParametricSurface::torus(params.major.unwrap_or(SQRT_2), params.minor.unwrap_or(1.0))
        }
    }
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

impl ParametricSurface {
    pub fn sphere(radius: f64) -> Result<Self> {
        check_positive("radius", radius)?;
        Ok(ParametricSurface::Sphere { radius })
    }

    pub fn spheroid(equatorial: f64, polar: f64) -> Result<Self> {
        check_positive("equatorial semi-axis", equatorial)?;
        check_positive("polar semi-axis", polar)?;
        Ok(ParametricSurface::Spheroid { equatorial, polar })
    }

    pub fn oblate_spheroid() -> Self {
        ParametricSurface::Spheroid {
            equatorial: SQRT_2,
            polar: 1.0,
        }
    }

    pub fn torus(major: f64, minor: f64) -> Result<Self> {
        check_positive("major radius", major)?;
        check_positive("minor radius", minor)?;
        if minor >= major {
            return Err(Error::InvalidParameter(format!(
                "torus minor radius {minor} must be below major radius {major}"
            )));
        }
        Ok(ParametricSurface::Torus { major, minor })
    }

    pub fn clifford_torus() -> Self {
        ParametricSurface::Torus {
            major: SQRT_2,
            minor: 1.0,
        }
    }

    pub fn kind(&self) -> SurfaceKind {
        match self {
            ParametricSurface::Sphere { .. } => SurfaceKind::Sphere,
            ParametricSurface::Spheroid { .. } => SurfaceKind::OblateSpheroid,
            ParametricSurface::Torus { .. } => SurfaceKind::CliffordTorus,
        }
    }

    /// Whether `u` wraps around. `v` always does.
    pub fn periodic_u(&self) -> bool {
        matches!(self, ParametricSurface::Torus { .. })
    }

    /// Upper end of the `u` interval; the lower end is 0.
    pub fn u_max(&self) -> f64 {
        if self.periodic_u() {
            TAU
        } else {
            PI
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        if self.periodic_u() {
            0
        } else {
            2
        }
    }

    /// Sign `s` such that `s * (du x dv)` points out of the solid.
    pub fn orientation(&self) -> f64 {
        if self.periodic_u() {
            -1.0
        } else {
            1.0
        }
    }

    pub fn point(&self, u: f64, v: f64) -> Vec3 {
        let (su, cu) = u.sin_cos();
        let (sv, cv) = v.sin_cos();
        match *self {
            ParametricSurface::Sphere { radius } => {
                Vec3::new(radius * su * cv, radius * su * sv, radius * cu)
            }
            ParametricSurface::Spheroid { equatorial, polar } => {
                Vec3::new(equatorial * su * cv, equatorial * su * sv, polar * cu)
            }
            ParametricSurface::Torus { major, minor } => {
                let rho = major + minor * cu;
                Vec3::new(rho * cv, rho * sv, minor * su)
            }
        }
    }

    pub fn jet(&self, u: f64, v: f64) -> ChartJet {
        let (su, cu) = u.sin_cos();
        let (sv, cv) = v.sin_cos();
        match *self {
            ParametricSurface::Sphere { radius } => {
                spheroid_jet(radius, radius, su, cu, sv, cv)
            }
            ParametricSurface::Spheroid { equatorial, polar } => {
                spheroid_jet(equatorial, polar, su, cu, sv, cv)
            }
            ParametricSurface::Torus { major, minor } => {
                let rho = major + minor * cu;
                ChartJet {
                    point: Vec3::new(rho * cv, rho * sv, minor * su),
                    du: Vec3::new(-minor * su * cv, -minor * su * sv, minor * cu),
                    dv: Vec3::new(-rho * sv, rho * cv, 0.0),
                    duu: Vec3::new(-minor * cu * cv, -minor * cu * sv, -minor * su),
                    duv: Vec3::new(minor * su * sv, -minor * su * cv, 0.0),
                    dvv: Vec3::new(-rho * cv, -rho * sv, 0.0),
                }
            }
        }
    }

    /// Unit outward normal; undefined at the poles of sphere-like charts.
    pub fn outward_normal(&self, u: f64, v: f64) -> Vec3 {
        let jet = self.jet(u, v);
        (jet.du.cross(&jet.dv) * self.orientation()).normalize()
    }

    /// Analytic fundamental forms and curvatures at `(u, v)`.
    ///
    /// Fails at chart singularities (the poles of the sphere and spheroid),
    /// where the first fundamental form degenerates.
    pub fn curvature_at(&self, u: f64, v: f64) -> Result<CurvatureSample> {
        let jet = self.jet(u, v);
        let g11 = jet.du.dot(&jet.du);
        let g12 = jet.du.dot(&jet.dv);
        let g22 = jet.dv.dot(&jet.dv);
        let det = g11 * g22 - g12 * g12;
        let scale = g11.max(g22);
        if !(det > 1e-14 * scale * scale) {
            return Err(Error::InvalidParameter(format!(
                "chart is singular at (u, v) = ({u}, {v})"
            )));
        }
        let inward = -(jet.du.cross(&jet.dv) * self.orientation()) / det.sqrt();
        let l = jet.duu.dot(&inward);
        let m = jet.duv.dot(&inward);
        let n = jet.dvv.dot(&inward);
        Ok(CurvatureSample {
            g11,
            g12,
            g22,
            l,
            m,
            n,
            gaussian: (l * n - m * m) / det,
            mean: (g11 * n - 2.0 * g12 * m + g22 * l) / (2.0 * det),
        })
    }

    /// Closed-form surface area.
    pub fn area(&self) -> f64 {
        match *self {
            ParametricSurface::Sphere { radius } => 4.0 * PI * radius * radius,
            ParametricSurface::Spheroid { equatorial: a, polar: c } => {
                if (a - c).abs() < 1e-14 * a {
                    4.0 * PI * a * a
                } else if c < a {
                    let e = (1.0 - c * c / (a * a)).sqrt();
                    2.0 * PI * a * a * (1.0 + (1.0 - e * e) / e * e.atanh())
                } else {
                    let e = (1.0 - a * a / (c * c)).sqrt();
                    2.0 * PI * a * a * (1.0 + c / (a * e) * e.asin())
                }
            }
            ParametricSurface::Torus { major, minor } => 4.0 * PI * PI * major * minor,
        }
    }

    /// Whether `p` lies strictly inside the solid bounded by the surface.
    pub fn contains(&self, p: &Vec3) -> bool {
        match *self {
            ParametricSurface::Sphere { radius } => p.norm() < radius,
            ParametricSurface::Spheroid { equatorial, polar } => {
                (p.x * p.x + p.y * p.y) / (equatorial * equatorial) + p.z * p.z / (polar * polar)
                    < 1.0
            }
            ParametricSurface::Torus { major, minor } => {
                let rho = p.x.hypot(p.y) - major;
                rho * rho + p.z * p.z < minor * minor
            }
        }
    }

    /// A point inside the solid from which sphere-like surfaces are star-shaped.
    pub fn interior_reference(&self) -> Option<Vec3> {
        match self {
            ParametricSurface::Torus { .. } => None,
            _ => Some(Vec3::zeros()),
        }
    }

    /// Largest distance of any surface point from the origin.
    pub fn bounding_radius(&self) -> f64 {
        match *self {
            ParametricSurface::Sphere { radius } => radius,
            ParametricSurface::Spheroid { equatorial, polar } => equatorial.max(polar),
            ParametricSurface::Torus { major, minor } => major + minor,
        }
    }

    /// Distance from `p` to the surface together with the parameters of the
    /// closest chart point.
    ///
    /// Multi-start damped Newton on `|chart(u, v) - p|^2`, seeded from a dense
    /// parameter sample; the best sample itself is kept as fallback.
    pub fn closest_point(&self, p: &Vec3) -> (f64, f64, f64) {
        const SAMPLES_U: usize = 48;
        const SAMPLES_V: usize = 96;
        const STARTS: usize = 6;

        let u_max = self.u_max();
        let mut samples = Vec::with_capacity((SAMPLES_U + 1) * SAMPLES_V);
        for i in 0..=SAMPLES_U {
            let u = u_max * i as f64 / SAMPLES_U as f64;
            for j in 0..SAMPLES_V {
                let v = TAU * j as f64 / SAMPLES_V as f64;
                samples.push(((self.point(u, v) - p).norm_squared(), u, v));
            }
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut best = samples[0];
        for &(_, u0, v0) in samples.iter().take(STARTS) {
            let (d2, u, v) = self.newton_closest(p, u0, v0);
            if d2 < best.0 {
                best = (d2, u, v);
            }
        }
        (best.0.sqrt(), best.1, best.2)
    }

    pub fn distance(&self, p: &Vec3) -> f64 {
        self.closest_point(p).0
    }

    fn newton_closest(&self, p: &Vec3, mut u: f64, mut v: f64) -> (f64, f64, f64) {
        let scale = self.bounding_radius();
        let mut f = (self.point(u, v) - p).norm_squared();
        let mut damping = 1e-8 * scale * scale;
        for _ in 0..100 {
            let jet = self.jet(u, v);
            let d = jet.point - p;
            let gu = jet.du.dot(&d);
            let gv = jet.dv.dot(&d);
            let huu = jet.du.dot(&jet.du) + jet.duu.dot(&d) + damping;
            let huv = jet.du.dot(&jet.dv) + jet.duv.dot(&d);
            let hvv = jet.dv.dot(&jet.dv) + jet.dvv.dot(&d) + damping;
            let det = huu * hvv - huv * huv;
            let (step_u, step_v) = if det > 0.0 && huu > 0.0 {
                ((hvv * gu - huv * gv) / det, (huu * gv - huv * gu) / det)
            } else {
                // indefinite: fall back to a scaled gradient step
                let h = huu.abs().max(hvv.abs()).max(scale * scale);
                (gu / h, gv / h)
            };
            let mut nu = u - step_u;
            let nv = v - step_v;
            if !self.periodic_u() {
                nu = nu.clamp(0.0, PI);
            }
            let nf = (self.point(nu, nv) - p).norm_squared();
            if nf <= f {
                let moved = (nu - u).abs() + (nv - v).abs();
                u = nu;
                v = nv;
                f = nf;
                damping = (damping * 0.1).max(1e-14 * scale * scale);
                if moved < 1e-13 {
                    break;
                }
            } else {
                damping *= 10.0;
                if damping > 1e8 * scale * scale {
                    break;
                }
            }
        }
        (f, u, v)
    }
}

fn spheroid_jet(a: f64, c: f64, su: f64, cu: f64, sv: f64, cv: f64) -> ChartJet {
    ChartJet {
        point: Vec3::new(a * su * cv, a * su * sv, c * cu),
        du: Vec3::new(a * cu * cv, a * cu * sv, -c * su),
        dv: Vec3::new(-a * su * sv, a * su * cv, 0.0),
        duu: Vec3::new(-a * su * cv, -a * su * sv, -c * cu),
        duv: Vec3::new(-a * cu * sv, a * cu * cv, 0.0),
        dvv: Vec3::new(-a * su * cv, -a * su * sv, 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn torus_chart_origin() {
        let t = ParametricSurface::clifford_torus();
        let p = t.point(0.0, 0.0);
        assert_relative_eq!(p, Vec3::new(SQRT_2 + 1.0, 0.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn sphere_north_pole() {
        let s = ParametricSurface::sphere(1.0).unwrap();
        assert_relative_eq!(s.point(0.0, 0.7), Vec3::new(0.0, 0.0, 1.0), epsilon = 1e-15);
    }

    #[test]
    fn spheroid_equator_point() {
        let e = ParametricSurface::oblate_spheroid();
        let p = e.point(PI / 2.0, 0.0);
        assert_relative_eq!(p.x, SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(p.x * p.x / 2.0 + p.y * p.y / 2.0 + p.z * p.z, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_bad_radii() {
        assert!(ParametricSurface::sphere(0.0).is_err());
        assert!(ParametricSurface::sphere(-1.0).is_err());
        assert!(ParametricSurface::spheroid(1.0, f64::NAN).is_err());
        assert!(ParametricSurface::torus(1.0, 2.0).is_err());
        let params = SurfaceParams {
            radius: Some(-2.0),
            ..Default::default()
        };
        assert!(build_surface(SurfaceKind::Sphere, &params).is_err());
    }

    #[test]
    fn unit_sphere_curvatures() {
        let s = ParametricSurface::sphere(1.0).unwrap();
        for &(u, v) in &[(0.3, 0.1), (1.5, 2.0), (2.9, 5.5)] {
            let c = s.curvature_at(u, v).unwrap();
            assert_relative_eq!(c.gaussian, 1.0, epsilon = 1e-12);
            assert_relative_eq!(c.mean, 1.0, epsilon = 1e-12);
        }
        assert!(s.curvature_at(0.0, 0.0).is_err());
    }

    // Standard torus curvature: K = cos u / (r (R + r cos u)).
    fn torus_gaussian_oracle(big_r: f64, r: f64, u: f64) -> f64 {
        u.cos() / (r * (big_r + r * u.cos()))
    }

    #[test]
    fn torus_curvature_sign_on_equators() {
        let t = ParametricSurface::clifford_torus();
        let inner = t.curvature_at(PI, 0.4).unwrap();
        assert_relative_eq!(inner.gaussian, torus_gaussian_oracle(SQRT_2, 1.0, PI), epsilon = 1e-12);
        assert!(inner.gaussian < 0.0);
        let outer = t.curvature_at(0.0, 1.1).unwrap();
        assert_relative_eq!(outer.gaussian, torus_gaussian_oracle(SQRT_2, 1.0, 0.0), epsilon = 1e-12);
        assert!(outer.gaussian > 0.0);
    }

    #[test]
    fn outer_equator_normal_points_outward() {
        let t = ParametricSurface::clifford_torus();
        let n = t.outward_normal(0.0, 0.3);
        assert_relative_eq!(n, Vec3::new(0.3f64.cos(), 0.3f64.sin(), 0.0), epsilon = 1e-14);
    }

    #[test]
    fn symbol_positive_on_sphere() {
        let s = ParametricSurface::sphere(1.0).unwrap();
        let c = s.curvature_at(1.0, 0.0).unwrap();
        assert_relative_eq!(c.np_symbol([1.0, 0.0]), 0.25, epsilon = 1e-12);
        assert!(c.np_symbol([0.3, -0.8]) > 0.0);
    }

    #[test]
    fn spheroid_area_formula_limits() {
        let nearly = ParametricSurface::spheroid(1.0, 1.0 - 1e-9).unwrap();
        assert_relative_eq!(nearly.area(), 4.0 * PI, max_relative = 1e-6);
        let prolate = ParametricSurface::spheroid(1.0, 1.0 + 1e-9).unwrap();
        assert_relative_eq!(prolate.area(), 4.0 * PI, max_relative = 1e-6);
    }

    #[test]
    fn distance_matches_closed_forms() {
        let t = ParametricSurface::clifford_torus();
        for p in [
            Vec3::new(0.1, 0.0, 0.2),
            Vec3::new(2.5, 0.0, 1.9),
            Vec3::new(SQRT_2, 0.0, 0.0),
            Vec3::new(0.7, 0.0, 1.2),
        ] {
            let exact = ((p.x.hypot(p.y) - SQRT_2).hypot(p.z) - 1.0).abs();
            assert!((t.distance(&p) - exact).abs() < 1e-6, "{p:?}");
        }
        let s = ParametricSurface::sphere(1.0).unwrap();
        for p in [Vec3::new(0.0, 0.0, 2.0), Vec3::new(0.3, 0.0, 0.1), Vec3::new(1.2, -0.4, 0.9)] {
            assert!((s.distance(&p) - (p.norm() - 1.0).abs()).abs() < 1e-6, "{p:?}");
        }
    }

    #[test]
    fn spheroid_distance_against_brute_force() {
        let e = ParametricSurface::oblate_spheroid();
        // in the y = 0 half plane the closest point lies on the v = 0 meridian
        for p in [Vec3::new(1.9, 0.0, 0.4), Vec3::new(0.2, 0.0, 1.6), Vec3::new(0.5, 0.0, 0.3)] {
            let n = 2_000_000;
            let brute = (0..=n)
                .map(|i| (e.point(PI * i as f64 / n as f64, 0.0) - p).norm())
                .fold(f64::INFINITY, f64::min);
            assert!((e.distance(&p) - brute).abs() < 1e-6, "{p:?}");
        }
    }

    fn centered_fd(s: &ParametricSurface, u: f64, v: f64) -> (Vec3, Vec3, Vec3) {
        let h = 1e-4;
        let f = |a: f64, b: f64| s.point(a, b);
        let duu = (f(u + h, v) - 2.0 * f(u, v) + f(u - h, v)) / (h * h);
        let dvv = (f(u, v + h) - 2.0 * f(u, v) + f(u, v - h)) / (h * h);
        let duv = (f(u + h, v + h) - f(u + h, v - h) - f(u - h, v + h) + f(u - h, v - h))
            / (4.0 * h * h);
        (duu, duv, dvv)
    }

    proptest! {
        #[test]
        fn second_fundamental_form_matches_finite_differences(
            u in 0.2f64..2.9, v in 0.0f64..6.2, which in 0usize..3,
        ) {
            let s = [
                ParametricSurface::sphere(1.3).unwrap(),
                ParametricSurface::oblate_spheroid(),
                ParametricSurface::clifford_torus(),
            ][which];
            let c = s.curvature_at(u, v).unwrap();
            let jet = s.jet(u, v);
            let inward = -(jet.du.cross(&jet.dv) * s.orientation()).normalize();
            let (duu, duv, dvv) = centered_fd(&s, u, v);
            let scale = c.l.abs().max(c.n.abs()).max(1.0);
            prop_assert!((duu.dot(&inward) - c.l).abs() / scale < 1e-4);
            prop_assert!((duv.dot(&inward) - c.m).abs() / scale < 1e-4);
            prop_assert!((dvv.dot(&inward) - c.n).abs() / scale < 1e-4);
            prop_assert!(c.metric_det() > 0.0);
            prop_assert!(c.mean * c.mean >= c.gaussian - 1e-12);
        }

        #[test]
        fn normals_have_unit_length(u in 0.1f64..3.0, v in 0.0f64..6.2) {
            for s in [ParametricSurface::oblate_spheroid(), ParametricSurface::clifford_torus()] {
                prop_assert!((s.outward_normal(u, v).norm() - 1.0).abs() < 1e-12);
            }
        }
    }
}
