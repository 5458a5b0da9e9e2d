//! Reversible conditional term rewriting.
//!
//! Systems are read from a small `.trs` format ([`syntax`]), executed by a
//! conditional rewriting engine ([`rewrite`]), and run forward with traces or
//! backward by consuming them ([`reversible`]). [`transform`] compiles a
//! system into an injective forward system and its inverse.

pub mod reversible;
pub mod rewrite;
pub mod system;
pub mod syntax;
pub mod term;
pub mod transform;

pub use rewrite::{Bounds, Derivation, RewriteError, StepWitness, Strategy};
pub use syntax::{format_system, parse_ground_term, parse_system, parse_system_with, ParseError, ParseOptions};
pub use system::{alpha_equivalent, Condition, Property, RewriteSystem, Rule, SymbolKind, ValidationReport};
pub use term::{match_term, unify, Name, Position, Substitution, Term, TermError};
pub use reversible::{parse_trace, Pair, ReversibleError, Steps, Trace, TraceTerm};
pub use transform::{format_arguments, injectivize, injectivize_improved, invert, to_pcdctrs, view_update, Bidirectional, TransformError};
