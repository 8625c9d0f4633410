//! Rank-5 quartic melonic tensor field theory, mechanized.
//!
//! The crate has three layers:
//!
//! * **Stranded graphs** ([`graph`], [`canon`], [`enumerate`]) — value-semantic
//!   Feynman graphs of the five quartic melonic interactions `V_c`, their faces,
//!   residues, Wick-contraction generation and canonical forms.
//! * **Topology and algebra** ([`topology`], [`hopf`], [`dyson`]) — colored
//!   extensions, jacket genera and the divergence degree by two independent
//!   routes; the Connes–Kreimer Hopf algebra of superficially divergent graphs
//!   with its grafting (`B+`) operators, Hochschild-cocycle and
//!   Dyson–Schwinger checks.
//! * **Cutoff numerics** ([`numerics`]) — exact lattice momentum sums, the
//!   melonic self-consistency solver, zero-momentum renormalization and the
//!   one-loop beta function. Generic over the floating scalar.
//!
//! All algebraic coefficients are exact rationals; no floating point enters the
//! combinatorial layers.

pub mod canon;
pub mod dyson;
pub mod enumerate;
pub mod graph;
pub mod hopf;
pub mod numerics;
pub mod sample;
pub mod schema;
pub mod topology;

/// Exact rational scalar used by the combinatorial layers.
pub type Rat = num_rational::BigRational;

/// Default floating scalar for the numerics layer.
pub type Real = f64;

pub use graph::{Color, Residue, TensorGraph};
