//! Decision procedures for timed behavioural relations between timed automata.
//!
//! The crate builds a pre-stable zone graph per automaton (no product
//! construction) and decides, between two designated states:
//!
//! * timed bisimulation, timed simulation and simulation equivalence,
//! * timed performance prebisimulation ("at least as fast as"),
//! * strong / delay / observational time-abstracted (bi)simulations,
//!
//! together with the matching challenger/defender games and, for states that
//! are not timed bisimilar, synthesis of a distinguishing formula in a
//! timed modal logic with formula clocks.

pub mod automaton;
pub mod corner;
pub mod formula;
pub mod game;
pub mod oracle;
pub mod relations;
pub mod samples;
pub mod zone;
pub mod zone_graph;

pub use automaton::{
    ClockConstraint, CmpOp, Edge, MaxConstants, TimedAutomaton, TimedState,
};
pub use corner::{CornerState, CpDelay, DelayKind, DeltaValue};
pub use formula::{FormulaError, MtFormula};
pub use game::{Alpha, Beta, Budget, GameConfig, GameOutcome, Winner};
pub use relations::{HierarchyReport, Instance, RelationKind, TaFlavor, Verdict};
pub use zone::Zone;
pub use zone_graph::{NodeId, ZoneGraph};

/// Exact rational scalar used for clock values and delays.
pub type Rat = num_rational::Rational64;
