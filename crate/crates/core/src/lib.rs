//! Computational engine for Finsler-Randers geometrodynamics.
//!
//! From an analytic spacetime metric and electromagnetic potential this
//! crate evaluates the full tensor pipeline pointwise on the tangent
//! bundle: Randers data (Finsler function, fundamental tensor, Cartan
//! tensor), geodesic sprays by three routes, effective dynamics, Chern
//! connection and curvature, the Einstein tensor with its Cartan-tensor
//! correction, stress-energy, and generalized-Maxwell residuals. A
//! Runge-Kutta integrator traces timelike geodesics.
//!
//! Derivatives are never finite-differenced: every field is an analytic
//! expression evaluated over nested forward-mode jets ([`jet`]), so all
//! tensors are exact to roundoff.

pub mod background;
pub mod error;
pub mod expr;
pub mod fdcheck;
pub mod jet;
pub mod linalg;
pub mod maxwell;
pub mod randers;
pub mod riemann;
pub mod scalar;
pub mod spray;

pub mod curvature;

pub use background::{BackgroundAt, ScenarioBackground, SignatureReport};
pub use error::{DomainError, FrError, Result};
pub use jet::{Jet, JetSpace};
pub use randers::{FinslerEval, TangentPoint};
pub use scalar::Scalar;
