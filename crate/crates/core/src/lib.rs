//! Randomized construction of Steiner systems in random hypergraphs.

pub mod absorb;
pub mod combin;
pub mod fractional;
pub mod gf;
pub mod harness;
pub mod hypergraph;
pub mod leave;
pub mod nibble;
pub mod operators;
pub mod rng;
pub mod template;
