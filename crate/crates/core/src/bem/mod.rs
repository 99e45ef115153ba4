//! Laplace kernels, triangle quadrature and dense operator assembly.

pub mod assembly;
pub mod dump;
pub mod kernel;
pub mod panels;
pub mod quadrature;

pub use assembly::{
    antisymmetry, assemble_double_layer, assemble_single_layer, calderon_residual, AssemblyDiagnostics,
    AssemblyOptions, OperatorPair,
};
pub use kernel::{dlp_kernel, gamma, grad_gamma};
pub use panels::{BoundaryPanels, PanelGeometry};
pub use quadrature::QuadratureRule;
