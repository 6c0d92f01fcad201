//! Structural and spectral analysis of automatic sequences given by finite
//! m-automata: sparse/non-sparse classification, rank of sparseness, growth
//! exponent, and exact support counting.

pub mod arborescence;
pub mod automaton;
pub mod corpus;
pub mod counting;
pub mod random;
pub mod report;
pub mod sequence;
pub mod spectral;
pub mod structure;

pub use automaton::{parse_automaton, serialize_automaton, validate, Automaton, OutputLabel};
