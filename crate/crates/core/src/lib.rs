//! Complex-linearization analysis of systems of two second-order ODEs.

pub mod analyticity;
pub mod corpus;
pub mod expr;
pub mod linalg;
pub mod linearizability;
pub mod parser;
pub mod pipeline;
pub mod solve;
pub mod symmetry;
pub mod system;
pub mod verify;
