//! Exact inference in discrete Bayes networks.
//!
//! Singly connected networks are solved by local π/λ message passing driven
//! to equilibrium by a relaxation scheduler ([`polytree`]). Networks with
//! undirected loops are handled by conditioning on a loop cutset
//! ([`cutset`], [`conditioning`]): each cutset assignment yields a polytree,
//! and the per-assignment beliefs are mixed by their exact likelihood
//! weights. A brute-force enumerator ([`oracle`]) serves as the reference
//! for all of it.

pub mod cli;
pub mod conditioning;
pub mod cutset;
pub mod dsep;
pub mod error;
pub mod fixtures;
pub mod generate;
pub mod model;
pub mod netformat;
pub mod oracle;
pub mod polytree;

pub use conditioning::{auto_infer, infer_conditioned, ConditioningOptions, MixedBelief};
pub use cutset::Cutset;
pub use error::{Error, Result};
pub use model::{ArcId, Cpt, Evidence, Network, NetworkBuilder, VarId, Variable};
pub use polytree::{BeliefVector, PolytreeEngine, PropagationOptions, Schedule};
