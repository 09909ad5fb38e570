//! Numerical laboratory for beta-ensembles (log-gases) with convex polynomial
//! potentials.
//!
//! The crate is organised bottom-up:
//!
//! * [`potential`]: convex external fields `V` and their convexity floor.
//! * [`equilibrium`]: the one-cut equilibrium density, its CDF, classical
//!   locations and Stieltjes transform.
//! * [`tridiag`]: a symmetric tridiagonal eigenvalue engine.
//! * [`sampler`]: exact Gaussian sampling through the tridiagonal model and
//!   MALA chains for composed targets.
//! * [`diagnostics`]: estimators turning sample sets into rigidity, loop
//!   equation, concentration and gap statistics.
//! * [`samples_io`]: the binary and CSV sample formats.

pub mod diagnostics;
pub mod equilibrium;
pub mod error;
pub mod potential;
pub mod quadrature;
pub mod sampler;
pub mod samples_io;
pub mod stats;
pub mod tridiag;

pub use equilibrium::{ClassicalLocations, EquilibriumMeasure, SolveOptions};
pub use error::{Error, Result};
pub use potential::{convexity_floor, ConvexityCertificate, Potential, PotentialKind};
pub use sampler::{
    ChainConfig, Configuration, SampleMeta, SampleSet, TargetSpec,
};
pub use tridiag::SymTridiagonal;
