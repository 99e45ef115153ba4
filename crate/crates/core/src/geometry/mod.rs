//! Surfaces, their panel meshes, curvature integrals and the planar
//! sampling regions.

pub mod curvature;
pub mod mesh;
pub mod region;
pub mod surface;

pub use curvature::{symbol_positivity, total_gaussian_curvature, willmore_energy, SymbolPositivity};
pub use mesh::{triangulate, PanelLabel, PanelMesh};
pub use region::{build_region, CrossSectionRegion, RegionKind};
pub use surface::{build_surface, CurvatureSample, ParametricSurface, SurfaceKind, SurfaceParams, Vec3};
