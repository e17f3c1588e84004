//! Hawking-type functionals `H_L = W + ∫ L(x, ν) dμ` on small spheres in
//! coordinate charts of Riemannian 3-manifolds carrying a symmetric 2-tensor `K`.
//!
//! Surfaces are star-shaped radial graphs expanded in real spherical
//! harmonics and integrated with Gauss–Legendre × uniform quadrature.

pub mod ambient;
pub mod error;
pub mod expansion;
pub mod functionals;
pub mod jet;
pub mod moments;
pub mod optimizer;
pub mod surface;
pub mod tensor;
pub mod variation;

pub use ambient::{AffineK, AmbientEval, ManifoldModel, MetricKind};
pub use error::{Error, Result};
pub use functionals::{evaluate_functionals, FunctionalReport, LagrangianSpec};
pub use surface::{embed, QuadratureGrid, SurfaceGeometry, SurfaceShape};
