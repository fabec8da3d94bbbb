//! Diagrammatic calculus for teleportation-style protocols.
//!
//! The crate is organised bottom-up: dense linear algebra, single- and
//! two-qubit gates, Pauli strings and Clifford conjugation, string diagrams
//! with cups and caps, a rewrite engine over those diagrams, a small
//! state-vector simulator, and the protocol constructions built from them.

pub mod linalg;
pub mod gate;
pub mod pauli;
pub mod diagram;
pub mod rewrite;
pub mod statevec;
pub mod protocols;
pub mod corpus;
