//! Diagonalization and ultraviolet renormalization of quadratic bosonic
//! Hamiltonians with a rank-one form factor, on a discretized one-body space.
//!
//! The one-body data are a dispersion `ω ≥ 1`, a form factor `f` and a
//! coupling `λ`. The Hamiltonian `dΓ(ω) + λ:(a*(f) + a(f))²:` is diagonalized
//! by the quasi-particle dispersion `ξ = (ω² + 4λ ω^{1/2}|f⟩⟨f|ω^{1/2})^{1/2}`.
//! Modules:
//!
//! - [`numerics`]: dense and rank-one eigensolvers, adaptive quadrature.
//! - [`model`]: scenarios, grids, cutoffs, regularity classification.
//! - [`rankone`]: resolvents and fractional powers of `A + α|ψ⟩⟨ψ|`.
//! - [`bogoliubov`]: `ξ`, the blocks `U`, `V` and the vacuum energy.
//! - [`renorm`]: regular and renormalized resolvents, cutoff flows, divergence probe.
//! - [`fock`]: truncated Fock space used as an independent oracle.

// `!(x > 0.0)` is how NaN gets rejected along with the wrong sign.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bogoliubov;
pub mod error;
pub mod fock;
pub mod model;
pub mod numerics;
pub mod rankone;
pub mod renorm;
pub mod report;

pub use bogoliubov::{BlockPair, BogoliubovBlocks, RootMethod, XiMode};
pub use error::{Error, Result};
pub use model::{build_model, DiscretizedModel, Regularity, RegularityReport, ScenarioConfig};
pub use rankone::{Exponent, Method, RankOneOp};
pub use renorm::{DivergenceProbe, FlowCase, FlowRecord};
pub use report::{Check, Status};
