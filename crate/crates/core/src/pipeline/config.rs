use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bem::{AssemblyOptions, PanelGeometry, QuadratureRule};
use crate::calr::SweepSettings;
use crate::geometry::{build_surface, ParametricSurface, RegionKind, SurfaceKind, SurfaceParams, Vec3};
use crate::pipeline::{PipelineError, Stage};
use crate::spectrum::WeylWindow;

/// Which eigenpairs the region norms run over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormOrdering {
    /// The spectrum's own order, descending `|lambda|`.
    #[default]
    Magnitude,
    /// Positive eigenvalues only, in decreasing order.
    Positive,
}

/// One flat JSON document; every key is optional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub surface: SurfaceKind,
    pub radius: Option<f64>,
    pub equatorial: Option<f64>,
    pub polar: Option<f64>,
    pub major: Option<f64>,
    pub minor: Option<f64>,
    /// Rings in the `u` direction; 24 for sphere and spheroid, 20 for the torus.
    pub n_u: Option<usize>,
    /// Columns in the azimuthal direction; 44, or 50 for the torus.
    pub n_v: Option<usize>,
    pub quadrature_points: usize,
    pub panel_geometry: PanelGeometry,
    pub singular_order: usize,
    pub near_field_factor: f64,
    pub max_subdivision: usize,
    /// `x` for the torus and `y` otherwise when absent.
    pub region: Option<RegionKind>,
    /// Exclusion tube around the surface; the mesh's typical side when absent.
    pub epsilon: Option<f64>,
    pub grid_n: usize,
    pub j_max: usize,
    pub ordering: NormOrdering,
    /// Replace norms inside degenerate eigenspaces by their RMS.
    pub cluster_rms: bool,
    pub outlier_k: f64,
    /// Indices (in `ordering`) of the field dumps; the first four plus any
    /// outliers when absent.
    pub field_modes: Option<Vec<usize>>,
    /// Dipole location; one unit beyond the bounding sphere on the x-axis when absent.
    pub source: Option<[f64; 3]>,
    /// Dipole direction, normalized on load.
    pub dipole: [f64; 3],
    pub delta_min: Option<f64>,
    pub delta_max: Option<f64>,
    pub points_per_decade: usize,
    pub weyl_window: WeylWindow,
    pub out: PathBuf,
    pub cache: bool,
    /// `<out>/cache` when absent.
    pub cache_dir: Option<PathBuf>,
    pub deterministic: bool,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let opts = AssemblyOptions::default();
        RunConfig {
            surface: SurfaceKind::Sphere,
            radius: None,
            equatorial: None,
            polar: None,
            major: None,
            minor: None,
            n_u: None,
            n_v: None,
            quadrature_points: opts.rule.len(),
            panel_geometry: opts.geometry,
            singular_order: opts.singular_order,
            near_field_factor: opts.near_field_factor,
            max_subdivision: opts.max_subdivision,
            region: None,
            epsilon: None,
            grid_n: 64,
            j_max: 150,
            ordering: NormOrdering::Magnitude,
            cluster_rms: true,
            outlier_k: 5.0,
            field_modes: None,
            source: None,
            dipole: [1.0, 0.0, 0.0],
            delta_min: None,
            delta_max: None,
            points_per_decade: 40,
            weyl_window: WeylWindow::default(),
            out: PathBuf::from("out"),
            cache: true,
            cache_dir: None,
            deterministic: false,
            threads: None,
        }
    }
}

fn invalid(msg: impl Into<String>) -> PipelineError {
    PipelineError::Config(msg.into())
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
    }

    pub fn surface(&self) -> Result<ParametricSurface, PipelineError> {
        let params = SurfaceParams {
            radius: self.radius,
            equatorial: self.equatorial,
            polar: self.polar,
            major: self.major,
            minor: self.minor,
        };
        build_surface(self.surface, &params).map_err(|e| invalid(e.to_string()))
    }

    pub fn mesh_size(&self) -> (usize, usize) {
        let (u, v) = match self.surface {
            SurfaceKind::CliffordTorus => (20, 50),
            _ => (24, 44),
        };
        (self.n_u.unwrap_or(u), self.n_v.unwrap_or(v))
    }

    pub fn region_kind(&self) -> RegionKind {
        self.region.unwrap_or(match self.surface {
            SurfaceKind::CliffordTorus => RegionKind::X,
            _ => RegionKind::Y,
        })
    }

    pub fn assembly_options(&self) -> Result<AssemblyOptions, PipelineError> {
        let rule = QuadratureRule::with_points(self.quadrature_points).map_err(|e| invalid(e.to_string()))?;
        let opts = AssemblyOptions {
            rule,
            geometry: self.panel_geometry,
            singular_order: self.singular_order,
            near_field_factor: self.near_field_factor,
            max_subdivision: self.max_subdivision,
        };
        opts.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(opts)
    }

    pub fn dipole_direction(&self) -> Result<Vec3, PipelineError> {
        let a = Vec3::from(self.dipole);
        let norm = a.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(invalid("dipole direction must be a nonzero vector"));
        }
        Ok(a / norm)
    }

    pub fn source_point(&self, surface: &ParametricSurface) -> Vec3 {
        self.source
            .map(Vec3::from)
            .unwrap_or_else(|| Vec3::new(surface.bounding_radius() + 1.0, 0.0, 0.0))
    }

    pub fn sweep_settings(&self) -> SweepSettings {
        let delta_range = match (self.delta_min, self.delta_max) {
            (None, None) => None,
            (lo, hi) => Some([lo.unwrap_or(f64::MIN_POSITIVE), hi.unwrap_or(f64::MAX)]),
        };
        SweepSettings {
            points_per_decade: self.points_per_decade,
            delta_range,
            ..SweepSettings::default()
        }
    }

    /// Checks everything `stage` will use before any heavy work starts.
    pub fn validate(&self, stage: Stage) -> Result<(), PipelineError> {
        let surface = self.surface()?;
        let (n_u, n_v) = self.mesh_size();
        if n_u < 2 || n_v < 3 {
            return Err(invalid(format!("mesh needs n_u >= 2 and n_v >= 3, got {n_u} x {n_v}")));
        }
        if stage == Stage::Mesh {
            return Ok(());
        }
        self.assembly_options()?;
        if let Some(t) = self.threads {
            if t == 0 {
                return Err(invalid("threads must be positive"));
            }
        }
        let w = self.weyl_window;
        if !(0.0 <= w.lo && w.lo < w.hi && w.hi <= 1.0) {
            return Err(invalid(format!("weyl_window must satisfy 0 <= lo < hi <= 1, got [{}, {}]", w.lo, w.hi)));
        }
        if matches!(stage, Stage::Plasmon | Stage::Decay | Stage::Report) {
            if let Some(eps) = self.epsilon {
                if !(eps > 0.0 && eps.is_finite()) {
                    return Err(invalid(format!("epsilon must be positive, got {eps}")));
                }
            }
            if self.grid_n < 2 {
                return Err(invalid("grid_n must be at least 2"));
            }
        }
        if matches!(stage, Stage::Decay | Stage::Report) {
            if self.j_max < 49 {
                return Err(invalid(format!("decay statistics need j_max >= 49, got {}", self.j_max)));
            }
            if !(self.outlier_k > 0.0) {
                return Err(invalid("outlier_k must be positive"));
            }
        }
        if matches!(stage, Stage::Calr | Stage::Report) {
            self.dipole_direction()?;
            let z = self.source_point(&surface);
            if !z.iter().all(|c| c.is_finite()) {
                return Err(invalid("source must be finite"));
            }
            if self.points_per_decade < 2 {
                return Err(invalid("points_per_decade must be at least 2"));
            }
            for d in [self.delta_min, self.delta_max].into_iter().flatten() {
                if !(d > 0.0) {
                    return Err(invalid(format!("delta bounds must be positive, got {d}")));
                }
            }
        }
        Ok(())
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.cache_dir.clone().unwrap_or_else(|| self.out.join("cache"))
    }
}
