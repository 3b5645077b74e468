//! Discontinuous-Galerkin solver and analysis tools for the 1D1V
//! Vlasov–Poisson system.

pub mod basis;
pub mod config;
pub mod diagnostics;
pub mod dispersion;
pub mod error;
pub mod field;
pub mod integrator;
pub mod limiter;
pub mod mesh;
pub mod poisson;
pub mod poly;
pub mod quadrature;
pub mod recurrence;
pub mod rhs;
pub mod runner;
pub mod scenarios;

pub use basis::{BasisFamily, BasisSpec};
pub use error::{Error, Result};
pub use field::{DGField, DensityPoly};
pub use mesh::{build_mesh, Mesh};
pub use poisson::ElectricFieldPoly;
