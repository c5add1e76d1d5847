//! Quadratic-form toolkit for radial Dirac operators with Coulomb-like
//! potentials up to critical coupling.
//!
//! The numerics are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix `f64`, which is what the solvers are validated in.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bounds;
pub mod channel;
pub mod error;
pub mod extension;
pub mod form;
pub mod grid;
pub mod hardy;
pub mod oracle;
pub mod potential;
pub mod probe;
pub mod scalar;
pub mod spectrum;
pub mod tridiag;

pub use bounds::{
    certify_delta_bound, check_gamma_equivalence, delta_lower_bound, pointwise_gamma_bound, DeltaCertificate,
    EquivalenceCheck, PointwiseCheck,
};
pub use channel::{build_channel_operator, ChannelOperator};
pub use error::{Error, Result};
pub use extension::{
    apply_h, domain_diagnostics, solve_resolvent, symmetry_defect, DomainDiagnostics, SpinorPair, SymmetryReport,
};
pub use form::{assemble_form, lowest_eigenpairs, FormMatrix, OriginClosure};
pub use grid::{build_grid, default_grid, MeshInfo, MeshScheme, RadialGrid};
pub use hardy::{estimate_cv, verify_hardy, HardyReport, ShiftEstimate, Verdict};
pub use oracle::{analytic_oracle, shooting_eigenvalue, ShootingConfig};
pub use potential::{make_bounded_perturbed_coulomb, make_coulomb, RadialPotential};
pub use scalar::Real;
pub use spectrum::{eigenfunction_exponent, find_eigenvalue, RootFlag, SpectralResult};
pub use tridiag::{Eigenpair, SymTridiagonal};

pub type Grid = RadialGrid<f64>;
pub type Potential = RadialPotential<f64>;
pub type Channel = ChannelOperator<f64>;
pub type Form = FormMatrix<f64>;
pub type Spinor = SpinorPair<f64>;
pub type Spectrum = SpectralResult<f64>;
pub type Report = HardyReport<f64>;

pub type Grid32 = RadialGrid<f32>;
pub type Potential32 = RadialPotential<f32>;
pub type Form32 = FormMatrix<f32>;
