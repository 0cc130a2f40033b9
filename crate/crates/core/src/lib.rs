//! Computations on finite algebras around the term-condition commutator:
//! congruence lattices, the matrix relations `R`, `M` and `M*`, the
//! commutator and hypercommutator, difference and Kiss terms, and a suite
//! of executable checks for the statements that relate them.

pub mod algebra;
pub mod commutator;
pub mod congruence;
pub mod context;
pub mod corpus;
pub mod error;
pub mod limits;
pub mod special;
pub mod suite;
pub mod term;
pub mod theorems;
pub mod two_dim;

pub use algebra::{
    power, quotient, subalgebra, subuniverse_closure, Algebra, FiniteAlgebra, PowerAlgebra,
    Quotient, TupleVector,
};
pub use commutator::{
    commutator_is_zero, hypercommutator, is_saturated, tc_commutator, CommutatorTrace,
};
pub use congruence::{cg, con_lattice, is_congruence, ConLattice, Congruence};
pub use context::Context;
pub use error::{Error, Result};
pub use limits::Limits;
pub use term::{check_identity, evaluate_term, IdentityOutcome, Term};
pub use two_dim::{g_generators, glue_h, glue_v, m_rel, mstar, r_rel, Matrix2x2, TupleSet4};
