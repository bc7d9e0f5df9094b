//! Reductive decompositions, Kostant-operator forms and canonical connections
//! for orbits of subgroups acting on homogeneous Riemannian manifolds.

pub mod connections;
pub mod decomposition;
pub mod error;
pub mod gallery;
pub mod kostant;
pub mod lie;
pub mod linalg;
pub mod mat;
pub mod ode;
pub mod report;
pub mod model;
pub mod scalar;
pub mod subspace;

pub use error::{Error, Result};
pub use lie::MatrixLieAlgebra;
pub use mat::Mat;
pub use model::{ChartedHomSpace, OrbitData};
pub use scalar::{Exact, Mode, Scalar};
pub use subspace::{GramForm, Subspace};
