//! Classify quantum channels by their ability to detect or create coherence
//! and quantify the detection capability with two measures:
//!
//! * the diamond-measure, the minimal diamond distance between the dephased
//!   channel and the dephased image of any detection-incoherent channel,
//!   computed by an explicit semidefinite program with a duality certificate
//!   ([`diamond`]);
//! * the nSID-measure, the same minimization under the induced trace norm,
//!   computed by an iterative lower/upper-bound scheme that alternates a
//!   linear program over a growing state set with a binary-enumerated
//!   semidefinite inner maximization ([`nsid`]).
//!
//! Supporting machinery: dense complex linear algebra and channel
//! representations ([`quantum`]), membership tests for the free classes
//! ([`classify`]), a backend-neutral conic problem description and solver
//! ([`conic`]), single-shot state discrimination under incoherent
//! measurements ([`discrim`]), a relative-entropy lower-bound estimator
//! ([`entropy`]), parameter sweeps over built-in channel families
//! ([`sweep`]), and random generators for states and channels ([`random`]).

pub mod classify;
pub mod conic;
pub mod diamond;
pub mod discrim;
pub mod entropy;
mod error;
pub mod nsid;
pub mod quantum;
pub mod random;
pub mod sweep;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
