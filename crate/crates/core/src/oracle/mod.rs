//! Independent test oracles: grid-based checks of stabilising and
//! pre-stabilising signatures, a worklist relaxation for stable fields, and
//! probes for the convergence properties.

pub mod grid;
pub mod probes;
pub mod relax;
pub mod verify;

pub use grid::SampleGrid;
pub use relax::relaxation_fixpoint;
pub use verify::{verify_prestabilising, verify_stabilising, OracleVerdict, Witness};
