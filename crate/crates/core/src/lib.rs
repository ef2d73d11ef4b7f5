//! A Constraint Handling Rules runtime with an animation-aware operational
//! semantics, a source-to-source transformer and a differential equivalence
//! harness.
//!
//! The crate is organised around the execution pipeline:
//! [`syntax`] parses `.chr` programs (CHR rules plus annotation rules),
//! [`engine`] runs them under the refined stack-based semantics,
//! [`vis`] runs annotated programs while maintaining a [`graphics`] store,
//! [`transform`] compiles annotated programs back to plain CHR, and
//! [`equiv`] checks that all of those executions agree.

pub mod engine;
pub mod equiv;
pub mod graphics;
pub mod syntax;
pub mod term;
pub mod transform;
pub mod vis;

pub use engine::{run, EngineError, RunError, RunOutcome, StateR, TransitionLabel};
pub use equiv::{builtin_equiv, differential_check, seq_equiv, states_equivalent, EquivalenceReport};
pub use graphics::{GraphicalObject, GraphicalStore, VisualKind};
pub use syntax::{parse_program, parse_query, pretty_print, Program, SyntaxError};
pub use term::{BuiltinStore, Substitution, Term};
pub use transform::{strip_aux, transform, TransformError, TransformedProgram};
pub use vis::{run_vis, StateVis, VisLabel, VisRunOutcome};
