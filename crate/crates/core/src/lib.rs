//! Monochromatic path-forests in restricted two-colourings of the complete
//! graph on the positive integers, built online one vertex at a time, with
//! exact small-instance oracles and executable checks of the inequalities the
//! construction satisfies.

pub mod assembly;
pub mod cli;
pub mod colouring;
pub mod engine;
pub mod invariants;
pub mod oracle;
pub mod pathforest;

pub use colouring::{Colour, RestrictedColouring, Vertex};
pub use engine::{run, CheckLevel, EngineState, RoundTrace, VertexType};
pub use pathforest::PathForest;
