//! Model domains, quadrature grids and Dirichlet eigensystems of `-L = -(Δ + ∇U·∇)`.

mod basis;
mod domain;
mod eigen;
mod grid;
mod io;
mod tensor;
pub(crate) mod tridiag;

pub use basis::{BasisKind, SpectralBasis};
pub use domain::{Domain, Potential};
pub use eigen::{eigensystem_closed_form, eigensystem_fd};
pub use grid::{build_grid, Axis, Grid};
pub use io::{read_basis, write_basis, BASIS_FORMAT};
pub use tensor::{tensor_basis, tensor_spectrum, TensorMode};

