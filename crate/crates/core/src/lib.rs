//! Generalized alternating projections (GAP) between two linear subspaces.
//!
//! The crate covers four layers:
//!
//! * [`subspace`]: orthonormal bases, projections, principal angles.
//! * [`operators`]: relaxed projections, the GAP step and parameter presets.
//! * [`spectral`]: closed-form eigenvalue prediction and rate formulas.
//! * [`solvers`]: fixed-parameter and adaptive iteration with traces.
//!
//! On top of those, [`problem`], [`experiment`], [`rates`] and [`plot`]
//! make up the benchmark harness driven by the `gapbench` binary.

pub mod cli;
mod compensated;
pub mod error;
pub mod experiment;
pub mod operators;
pub mod plot;
pub mod problem;
pub mod rates;
pub mod solvers;
pub mod spectral;
pub mod subspace;

pub use error::{GapError, Result};

/// Common imports for applications.
pub mod prelude {
    pub use crate::error::{GapError, Result};
    pub use crate::operators::{
        build_dense_operator, gap_step, optimal_parameters, preset, relaxed_project, AssumptionCase,
        GapParameters, Preset,
    };
    pub use crate::solvers::{
        estimate_angle, fit_observed_rate, run_adaptive, run_fixed, SolverTrace, StoppingRule,
        SubspacePair, Termination, DEFAULT_EPSILON_CAP,
    };
    pub use crate::spectral::{
        classify_convergence, expected_iterations, gamma_star, predict_eigenvalues,
        subdominant_magnitude, theoretical_rate, EigenvaluePrediction, PairDims,
    };
    pub use crate::subspace::{
        intersection_subspace, nullspace_basis, principal_angles, PrincipalAngleSet, Subspace,
        DEFAULT_ZERO_TOL,
    };
}
