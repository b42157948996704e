//! Indefinite linear algebra on the coordinate spaces of the sphere models:
//! the two-timelike-direction form on R^{n+3}, the Lorentz form on R^{n+2},
//! projective points and subspaces, polars, and the few dense-matrix kernels
//! the rest of the crate leans on.

mod form;
mod numeric;
mod projective;

pub use form::{BilinearForm, CausalType, FormKind};
pub use numeric::{jacobi_symmetric_eigen, matrix_exp, sym_generalized_eigen};
pub use projective::{
    orthonormalize, polar_subspace, projective_equal, projective_sin_distance,
    subspace_signature, unit, ProjectivePoint, ProjectiveSubspace, RowSpanSvd,
};
