//! Compositional solvers for algebraic path problems and resource-net
//! reachability.
//!
//! Networks with input and output boundaries are glued by pushout
//! ([`cospan`]), solved by matrix closure ([`matrix`]) or bounded firing
//! enumeration ([`qnet`]), and black-boxed to their boundary behavior
//! ([`pathsolve`], [`netgraph`]). When the pieces are functional (inputs are
//! sources, outputs are sinks) the boundary behavior of a composite is the
//! product of the pieces' boundary behaviors.

pub mod cospan;
pub mod error;
pub mod gen;
pub mod io;
pub mod matrix;
pub mod netgraph;
pub mod par;
pub mod pathsolve;
pub mod qnet;
pub mod quantale;

pub use error::{Error, Result};
pub use matrix::{ClosureAlgorithm, FiniteFunction, RMatrix, VertexSet};
pub use par::Execution;
pub use quantale::{Boolean, Capacity, Quantale, TruncatedLanguage, Tropical, Viterbi};
