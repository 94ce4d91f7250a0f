//! A finite-model workbench for team semantics: Tarskian FO(Q) evaluation,
//! dependence-logic and mt-logic satisfaction over explicit teams,
//! translations between the logics, and generalized-quantifier algebra
//! (iteration, branching, monotonicity, continuity) — all at desk scale,
//! with exhaustive verification of the underlying equivalences.

pub mod corpus;
pub mod dep;
pub mod error;
pub mod mt;
pub mod quantifier;
pub mod structure;
pub mod syntax;
pub mod team;
pub mod translate;
pub mod verify;

pub use error::{EvalError, LoadError, TeamError};
pub use quantifier::{
    branch, is_continuous, is_monotone_increasing, iterate, q_member, Quantifier,
    QuantifierRegistry,
};
pub use structure::{denotation, eval_term, tarski_sat, Assignment, Elem, Relation, Structure};
pub use syntax::{parse, print, Formula, LogicDialect, Term};
pub use team::{all_teams, Team};
