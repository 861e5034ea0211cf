//! Workbench for nearlattices presented as ternary algebras `(L, m)`.
//!
//! * [`terms`]: terms, identities and the identity parser.
//! * [`catalog`]: named axiom systems, derived identities and the published
//!   independence witnesses.
//! * [`model`]: finite models, exhaustive identity checking, isomorphism.
//! * [`search`]: backtracking finite-model finder with unit propagation.
//! * [`order`]: conversion between ternary models and join semilattices
//!   with filter meets.
//! * [`verify`]: the end-to-end reproduction checks.

pub mod catalog;
pub mod model;
pub mod order;
pub mod search;
pub mod terms;
pub mod verify;

pub use catalog::{get_system, load_system, paper_examples, AxiomSystem, PaperExample};
pub use model::{canonical_form, counterexample, eval, holds, isomorphic, profile, Assignment, FiniteModel};
pub use terms::{parse_identity, parse_term, render_term, variables_of, Identity, Term};
