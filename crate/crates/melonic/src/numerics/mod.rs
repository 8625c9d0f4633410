//! Finite-cutoff numerics: exact lattice momentum sums, the melonic
//! self-consistency solver, zero-momentum renormalization and the one-loop
//! beta function.
//!
//! Everything is generic over the floating scalar through [`Scalar`]; the
//! crate-root alias [`crate::Real`] picks `f64`. Lattice combinatorics
//! (shell counts) are exact integers throughout, and floating accumulation
//! uses compensated summation in a fixed order, so results are reproducible
//! bit for bit at any thread count.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};
use thiserror::Error;

pub mod beta;
pub mod lattice;
pub mod solver;

pub use beta::{beta_one_loop, flow, BetaFit};
pub use lattice::{log_slope_fit, momentum_sum_s, momentum_sum_s_bruteforce, shell_counts_4d, Fit};
pub use solver::{
    chain_kernel, gamma4_melonic, renormalize, solve_melonic, CutoffParams, MelonicState,
    Renormalized, SolverOptions,
};

/// Floating scalar for the numerics layer.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("count fits the scalar")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumericsError {
    #[error("fit needs at least three strictly increasing cutoffs")]
    DegenerateFit,
    #[error("fixed point did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("four-point denominator crossed zero; coupling outside the convergent regime")]
    PoleCrossed,
}

/// Neumaier compensated accumulator.
#[derive(Clone, Copy, Debug)]
pub struct Compensated<F: Scalar> {
    sum: F,
    comp: F,
}

impl<F: Scalar> Default for Compensated<F> {
    fn default() -> Self {
        Compensated {
            sum: F::zero(),
            comp: F::zero(),
        }
    }
}

impl<F: Scalar> Compensated<F> {
    pub fn add(&mut self, x: F) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> F {
        self.sum + self.comp
    }
}
