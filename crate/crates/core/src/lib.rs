//! Exact numerics for resonating-valence-bond states on square lattices.
//!
//! The pipeline is: enumerate dimer coverings ([`lattice`]), build the sparse
//! singlet superposition ([`statevec`]), search bipartitions for the
//! generalized geometric measure ([`ggm`]), reach larger lattices through
//! column and row transfer contractions ([`dmrm`]), and extrapolate with a
//! power-law fit ([`scaling`]).

pub mod error;
pub mod dmrm;
pub mod ggm;
pub mod lattice;
pub mod scaling;
pub mod statevec;

pub use error::{Error, Result};
pub use ggm::{Bipartition, Family, GgmResult, SearchMode};
pub use lattice::{Boundary, DimerCovering, LatticeSpec, SiteId};
pub use scaling::{extrapolate, fit_scaling, ScalingFit, ScalingSample};
pub use statevec::{DensityMatrix, PureState};
