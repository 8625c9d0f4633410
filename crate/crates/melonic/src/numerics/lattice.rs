//! Exact lattice momentum sums over `[-N, N]^4` via radius-shell counting.

use super::{Compensated, NumericsError, Scalar};

/// Exact counts `r(s) = #{p in [-N,N]^4 : p^2 = s}` for `s = 0..=4N^2`,
/// built by iterated sparse convolution of the one-dimensional counts.
pub fn shell_counts_4d(n: u32) -> Vec<u64> {
    let n = n as usize;
    // one-dimensional counts: 1 at 0, 2 at every square
    let mut acc = vec![0u64; 1];
    acc[0] = 1;
    for _ in 0..4 {
        let mut next = vec![0u64; acc.len() + n * n];
        for (s, &w) in acc.iter().enumerate() {
            if w == 0 {
                continue;
            }
            next[s] += w;
            for j in 1..=n {
                next[s + j * j] += 2 * w;
            }
        }
        acc = next;
    }
    acc
}

/// `S(N, m²) = Σ_{p in [-N,N]^4} 1/(p² + m²)²`, evaluated shell by shell in
/// increasing radius with compensated summation.
pub fn momentum_sum_s<F: Scalar>(n: u32, m2: F) -> F {
    let counts = shell_counts_4d(n);
    let mut acc = Compensated::default();
    for (s, &w) in counts.iter().enumerate() {
        if w == 0 {
            continue;
        }
        let d = F::from_usize_exact(s) + m2;
        acc.add(F::from_u64(w).expect("count fits the scalar") / (d * d));
    }
    acc.value()
}

/// Brute-force quadruple loop, the oracle for the shell reduction.
pub fn momentum_sum_s_bruteforce<F: Scalar>(n: u32, m2: F) -> F {
    let n = n as i64;
    let mut acc = Compensated::default();
    for a in -n..=n {
        for b in -n..=n {
            for c in -n..=n {
                for d in -n..=n {
                    let s = F::from_i64(a * a + b * b + c * c + d * d).unwrap() + m2;
                    acc.add(F::one() / (s * s));
                }
            }
        }
    }
    acc.value()
}

/// Exact rational evaluation of the shell-reduced sum (test oracle).
pub fn momentum_sum_s_exact(n: u32, m2: &crate::Rat) -> crate::Rat {
    use num_traits::Zero;
    let mut acc = crate::Rat::zero();
    for (s, &w) in shell_counts_4d(n).iter().enumerate() {
        if w == 0 {
            continue;
        }
        let d = crate::Rat::from_integer(s.into()) + m2;
        acc += crate::Rat::from_integer(w.into()) / (&d * &d);
    }
    acc
}

/// Exact rational evaluation of the quadruple loop (test oracle).
pub fn momentum_sum_s_bruteforce_exact(n: u32, m2: &crate::Rat) -> crate::Rat {
    use num_traits::Zero;
    let n = n as i64;
    let mut acc = crate::Rat::zero();
    for a in -n..=n {
        for b in -n..=n {
            for c in -n..=n {
                for d in -n..=n {
                    let s = crate::Rat::from_integer((a * a + b * b + c * c + d * d).into()) + m2;
                    acc += crate::Rat::from_integer(1.into()) / (&s * &s);
                }
            }
        }
    }
    acc
}

/// Least-squares line fit of `y` against `ln N`.
#[derive(Clone, Copy, Debug)]
pub struct Fit<F: Scalar> {
    pub slope: F,
    pub intercept: F,
    /// root-mean-square residual of the fit.
    pub residual: F,
}

pub fn log_slope_fit<F: Scalar>(pairs: &[(u32, F)]) -> Result<Fit<F>, NumericsError> {
    if pairs.len() < 3 || pairs.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(NumericsError::DegenerateFit);
    }
    let m = F::from_usize_exact(pairs.len());
    let xs: Vec<F> = pairs
        .iter()
        .map(|&(n, _)| F::from_u32(n).unwrap().ln())
        .collect();
    let mean_x = xs.iter().copied().sum::<F>() / m;
    let mean_y = pairs.iter().map(|&(_, y)| y).sum::<F>() / m;
    let mut sxx = F::zero();
    let mut sxy = F::zero();
    for (x, &(_, y)) in xs.iter().zip(pairs) {
        sxx = sxx + (*x - mean_x) * (*x - mean_x);
        sxy = sxy + (*x - mean_x) * (y - mean_y);
    }
    if sxx.is_zero() {
        return Err(NumericsError::DegenerateFit);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut rss = F::zero();
    for (x, &(_, y)) in xs.iter().zip(pairs) {
        let e = y - (slope * *x + intercept);
        rss = rss + e * e;
    }
    Ok(Fit {
        slope,
        intercept,
        residual: (rss / m).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_cutoff_shells() {
        // [-1,1]^4: shells {0:1, 1:8, 2:24, 3:32, 4:16}
        let counts = shell_counts_4d(1);
        assert_eq!(counts, vec![1, 8, 24, 32, 16]);
        let s: f64 = momentum_sum_s(1, 1.0);
        let expect = 1.0 + 8.0 / 4.0 + 24.0 / 9.0 + 32.0 / 16.0 + 16.0 / 25.0;
        assert!((s - expect).abs() < 1e-14);
    }

    #[test]
    fn shell_reduction_matches_bruteforce_exactly() {
        for n in 1..=5u32 {
            let m2 = crate::Rat::from_integer(1.into());
            assert_eq!(
                momentum_sum_s_exact(n, &m2),
                momentum_sum_s_bruteforce_exact(n, &m2),
                "cutoff {n}"
            );
        }
    }

    #[test]
    fn doubling_slope_approaches_two_pi_squared() {
        let s1: f64 = momentum_sum_s(80, 1.0);
        let s2: f64 = momentum_sum_s(160, 1.0);
        let slope = (s2 - s1) / std::f64::consts::LN_2;
        let target = 2.0 * std::f64::consts::PI * std::f64::consts::PI;
        assert!((slope - target).abs() / target < 0.03, "slope {slope}");
    }

    #[test]
    fn fit_recovers_exact_line_and_flat_data() {
        let target = 2.0 * std::f64::consts::PI * std::f64::consts::PI;
        let pairs: Vec<(u32, f64)> = [10u32, 20, 40, 80]
            .iter()
            .map(|&n| (n, target * (n as f64).ln() + 0.25))
            .collect();
        let fit = log_slope_fit(&pairs).unwrap();
        assert!((fit.slope - target).abs() < 1e-9);
        assert!((fit.intercept - 0.25).abs() < 1e-9);
        let flat: Vec<(u32, f64)> = [10u32, 20, 40].iter().map(|&n| (n, 3.0)).collect();
        assert!(log_slope_fit(&flat).unwrap().slope.abs() < 1e-12);
        assert!(log_slope_fit(&pairs[..2]).is_err());
    }

    #[test]
    fn decay_in_mass() {
        let a: f64 = momentum_sum_s(6, 1.0);
        let b: f64 = momentum_sum_s(6, 10.0);
        let c: f64 = momentum_sum_s(6, 100.0);
        assert!(a > b && b > c && c > 0.0);
    }
}
