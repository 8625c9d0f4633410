//! Melonic self-consistency at finite cutoff.
//!
//! The dressed two-point function and self-energy close on one profile
//! `Γ₂(n_c)` of a single integer momentum component:
//!
//! `G₂(p) = 1 / (Z(p² + m_b²) − Σ_c Γ₂(p_c))`,
//! `Γ₂(n) = −2 g_b Σ_{p : p_1 = n} G₂(p)`,
//!
//! solved by damped successive substitution. The four-dimensional sums over
//! the transverse components run over sorted multisets with exact
//! permutation and sign weights. Profiles are stored on `0..=N` (they are
//! even in `n`).

use rayon::prelude::*;

use super::{Compensated, NumericsError, Scalar};

/// Bare inputs at cutoff `N`: momenta live in `[-N, N]^5`.
#[derive(Clone, Copy, Debug)]
pub struct CutoffParams<F: Scalar> {
    pub n: u32,
    pub m_b2: F,
    pub g_b: F,
    pub z: F,
}

impl<F: Scalar> CutoffParams<F> {
    pub fn new(n: u32, g_b: F, m_b2: F) -> Self {
        CutoffParams {
            n,
            m_b2,
            g_b,
            z: F::one(),
        }
    }
}

/// Iteration controls for the fixed point.
#[derive(Clone, Copy, Debug)]
pub struct SolverOptions<F: Scalar> {
    pub tol: F,
    pub max_iter: usize,
    /// Successive-substitution damping; 1 is the plain iteration.
    pub damping: F,
}

impl<F: Scalar> Default for SolverOptions<F> {
    fn default() -> Self {
        SolverOptions {
            tol: F::from_f64(1e-12).unwrap(),
            max_iter: 2000,
            damping: F::one(),
        }
    }
}

/// Converged profile data.
#[derive(Clone, Debug)]
pub struct MelonicState<F: Scalar> {
    pub params: CutoffParams<F>,
    /// `Γ₂(n)` for `n = 0..=N` (even in `n`).
    pub gamma2: Vec<F>,
    /// `T(n) = Σ_{p : p_1 = n} G₂(p)`, the transverse sums at the fixed point.
    pub t_sums: Vec<F>,
    pub iterations: usize,
    pub residual: F,
}

/// Sorted multisets `(a ≤ b ≤ c ≤ d)` of transverse components with exact
/// permutation-and-sign weights.
struct TransverseTable {
    entries: Vec<([u16; 4], u64)>,
}

impl TransverseTable {
    fn new(n: u32) -> Self {
        let n = n as u16;
        let mut entries = Vec::new();
        for a in 0..=n {
            for b in a..=n {
                for c in b..=n {
                    for d in c..=n {
                        let vals = [a, b, c, d];
                        let mut mult = [0u64; 5];
                        let mut kinds = 0;
                        let mut i = 0;
                        while i < 4 {
                            let mut j = i;
                            while j < 4 && vals[j] == vals[i] {
                                j += 1;
                            }
                            mult[kinds] = (j - i) as u64;
                            kinds += 1;
                            i = j;
                        }
                        let mut perms = 24u64;
                        for &m in &mult[..kinds] {
                            perms /= (1..=m).product::<u64>();
                        }
                        let signs = 1u64 << vals.iter().filter(|&&v| v != 0).count();
                        entries.push((vals, perms * signs));
                    }
                }
            }
        }
        TransverseTable { entries }
    }
}

impl<F: Scalar> MelonicState<F> {
    /// `Γ₂(n)` for any `n` in `[-N, N]`.
    pub fn gamma2_at(&self, n: i64) -> F {
        self.gamma2[n.unsigned_abs() as usize]
    }

    /// Full self-energy `Σ_c Γ₂(p_c)`.
    pub fn gamma2_total(&self, p: [i64; 5]) -> F {
        p.iter().map(|&c| self.gamma2_at(c)).sum()
    }

    /// Dressed propagator at a five-momentum.
    pub fn g2(&self, p: [i64; 5]) -> F {
        let p2 = F::from_i64(p.iter().map(|&c| c * c).sum()).unwrap();
        F::one() / (self.params.z * (p2 + self.params.m_b2) - self.gamma2_total(p))
    }

    /// Transverse sum `T(n)`.
    pub fn t_sum(&self, n: i64) -> F {
        self.t_sums[n.unsigned_abs() as usize]
    }
}

fn transverse_sums<F: Scalar>(
    params: &CutoffParams<F>,
    table: &TransverseTable,
    gamma2: &[F],
) -> Vec<F> {
    (0..=params.n as usize)
        .into_par_iter()
        .map(|nc| {
            let head = F::from_usize_exact(nc * nc);
            let gamma_head = gamma2[nc];
            let mut acc = Compensated::default();
            for &(vals, weight) in &table.entries {
                let s = vals.iter().map(|&v| v as usize * v as usize).sum::<usize>();
                let gsum = vals
                    .iter()
                    .map(|&v| gamma2[v as usize])
                    .fold(F::zero(), |a, b| a + b);
                let denom =
                    params.z * (head + F::from_usize_exact(s) + params.m_b2) - gamma_head - gsum;
                acc.add(F::from_u64(weight).unwrap() / denom);
            }
            acc.value()
        })
        .collect()
}

/// Solve the closed melonic equations by damped successive substitution
/// until the sup-norm self-consistency residual drops below `tol`.
pub fn solve_melonic<F: Scalar>(
    params: CutoffParams<F>,
    opts: SolverOptions<F>,
) -> Result<MelonicState<F>, NumericsError> {
    let table = TransverseTable::new(params.n);
    let len = params.n as usize + 1;
    let mut gamma2 = vec![F::zero(); len];
    let two = F::from_f64(2.0).unwrap();
    for iter in 0..opts.max_iter {
        let t = transverse_sums(&params, &table, &gamma2);
        let proposed: Vec<F> = t.iter().map(|&tn| -two * params.g_b * tn).collect();
        let residual: F = proposed
            .iter()
            .zip(&gamma2)
            .map(|(p, g)| (*p - *g).abs())
            .fold(F::zero(), F::max);
        if !residual.is_finite() {
            return Err(NumericsError::NoConvergence(iter));
        }
        if residual < opts.tol {
            return Ok(MelonicState {
                params,
                t_sums: t,
                gamma2,
                iterations: iter,
                residual,
            });
        }
        for (g, p) in gamma2.iter_mut().zip(&proposed) {
            *g = *g + opts.damping * (*p - *g);
        }
    }
    Err(NumericsError::NoConvergence(opts.max_iter))
}

/// One-loop chain kernel with shared transverse momenta:
/// `K(n, m) = Σ_{r ∈ [-N,N]^4} G₂(r; n) G₂(r; m)`, where `G₂(r; x)` is the
/// dressed line at momentum `(x, r)`. With free lines `K(0,0)` reduces to
/// the lattice sum `S(N, m²)`.
pub fn chain_kernel<F: Scalar>(state: &MelonicState<F>, n: i64, m: i64) -> F {
    let table = TransverseTable::new(state.params.n);
    let params = &state.params;
    let head_n = F::from_i64(n * n).unwrap();
    let head_m = F::from_i64(m * m).unwrap();
    let gn = state.gamma2_at(n);
    let gm = state.gamma2_at(m);
    let mut acc = Compensated::default();
    for &(vals, weight) in &table.entries {
        let s = F::from_usize_exact(vals.iter().map(|&v| v as usize * v as usize).sum());
        let gsum = vals
            .iter()
            .map(|&v| state.gamma2[v as usize])
            .fold(F::zero(), |a, b| a + b);
        let dn = params.z * (head_n + s + params.m_b2) - gn - gsum;
        let dm = params.z * (head_m + s + params.m_b2) - gm - gsum;
        acc.add(F::from_u64(weight).unwrap() / (dn * dm));
    }
    acc.value()
}

/// Dressed four-point kernel `Γ₄(n, m) = 1 / (1 + 2 g_b K(n, m))`, the
/// resummed geometric series of melonic chain steps.
pub fn gamma4_melonic<F: Scalar>(
    state: &MelonicState<F>,
    n: i64,
    m: i64,
) -> Result<F, NumericsError> {
    let two = F::from_f64(2.0).unwrap();
    let denom = F::one() + two * state.params.g_b * chain_kernel(state, n, m);
    if denom <= F::zero() {
        return Err(NumericsError::PoleCrossed);
    }
    Ok(F::one() / denom)
}

/// Renormalized quantities from zero-momentum conditions.
#[derive(Clone, Copy, Debug)]
pub struct Renormalized<F: Scalar> {
    pub m_r2: F,
    /// wave-function normalization, from the discrete derivative at zero:
    /// `Z = 1 + Γ₂(1) − Γ₂(0)`.
    pub z: F,
    pub g_r: F,
    pub gamma4_00: F,
}

pub fn renormalize<F: Scalar>(state: &MelonicState<F>) -> Result<Renormalized<F>, NumericsError> {
    let five = F::from_f64(5.0).unwrap();
    let z = F::one() + (state.gamma2[1.min(state.gamma2.len() - 1)] - state.gamma2[0]);
    let m_r2 = z * state.params.m_b2 - five * state.gamma2[0];
    let gamma4_00 = gamma4_melonic(state, 0, 0)?;
    Ok(Renormalized {
        m_r2,
        z,
        g_r: state.params.g_b * gamma4_00,
        gamma4_00,
    })
}
