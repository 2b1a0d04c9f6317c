use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::kernel::SmoothingKernel;
use crate::error::{Error, Result};

/// Euler-Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Constant `c` in `|D(t) - t log t - (2 gamma - 1) t| <= c sqrt(t)`, where
/// `D(t) = sum_{n <= t} d(n)`. The best published value is 0.961; the test
/// suite confirms the bound numerically for `t <= 10^6`.
pub const DIVISOR_REMAINDER_CONSTANT: f64 = 1.0;

/// Step of the grid `T = 5, 10, 15, ...` over which cutoffs
/// `n_max = ceil(Q T / 2 pi)` are searched.
pub const CUTOFF_GRID_STEP: f64 = 5.0;

/// How far a smoothed sum is carried.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Certified bound on the omitted tail.
    pub tail_target: f64,
    /// Largest admissible term count.
    pub hard_cap: u64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            tail_target: 1e-12,
            hard_cap: 50_000_000,
        }
    }
}

impl TruncationPolicy {
    pub fn new(tail_target: f64, hard_cap: u64) -> Result<Self> {
        if !(tail_target > 0.0) || !tail_target.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "tail target must be positive, got {tail_target}"
            )));
        }
        Ok(TruncationPolicy {
            tail_target,
            hard_cap,
        })
    }
}

/// Upper bound for `sum_{n > m} d(n) n^{-1/2} V(2 pi n / Q)`, which dominates
/// the tail of every normalized sum since `|lambda(n)| <= d(n)`.
///
/// For `m >= 3`, partial summation against `D(t)` gives
/// `2 c V(y_m) + (log m + 2 gamma + c / (2 sqrt m)) m^{-1/2} (Q / 2 pi) I(y_m)`
/// with `y_m = 2 pi m / Q` and `I(y) = int_y^inf V`. The factor
/// `(log t + 2 gamma) t^{-1/2}` is decreasing for `t >= 3`, which is what
/// lets it leave the integral. Terms below 3 are added explicitly.
pub fn certified_tail(m: u64, q: f64, kernel: &SmoothingKernel) -> f64 {
    let c = DIVISOR_REMAINDER_CONSTANT;
    let scale = 2.0 * PI / q;
    let mut explicit = 0.0;
    let mut start = m;
    while start < 3 {
        start += 1;
        let divisors = if start == 1 { 1.0 } else { 2.0 };
        explicit += divisors / (start as f64).sqrt() * kernel.eval(scale * start as f64);
    }
    let mf = start as f64;
    let y = scale * mf;
    let slope = mf.ln() + 2.0 * EULER_GAMMA + c / (2.0 * mf.sqrt());
    explicit + 2.0 * c * kernel.eval(y) + slope / mf.sqrt() * kernel.upper_integral(y) / scale
}

/// Cutoff and its certified tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    pub n_max: u64,
    pub tail_bound: f64,
}

/// Smallest `n_max = ceil(Q T / 2 pi)` on the `T` grid whose certified tail
/// meets the policy target.
pub fn truncation_cutoff(q: f64, policy: &TruncationPolicy, k: u32) -> Result<Cutoff> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::InvalidArgument(format!("Q must be positive, got {q}")));
    }
    let kernel = SmoothingKernel::new(k)?;
    let mut t = CUTOFF_GRID_STEP;
    loop {
        let n_max = (q * t / (2.0 * PI)).ceil() as u64;
        let tail_bound = certified_tail(n_max, q, &kernel);
        if tail_bound <= policy.tail_target {
            if n_max > policy.hard_cap {
                return Err(Error::HardCapExceeded {
                    required: n_max,
                    cap: policy.hard_cap,
                });
            }
            return Ok(Cutoff { n_max, tail_bound });
        }
        t += CUTOFF_GRID_STEP;
        if t > 1e5 {
            return Err(Error::InvalidArgument(format!(
                "tail target {:e} cannot be met",
                policy.tail_target
            )));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn divisor_counts(limit: usize) -> Vec<u32> {
        let mut d = vec![0u32; limit + 1];
        for i in 1..=limit {
            for j in (i..=limit).step_by(i) {
                d[j] += 1;
            }
        }
        d
    }

    #[test]
    fn divisor_remainder_constant_holds_to_a_million() {
        let limit = 1_000_000usize;
        let d = divisor_counts(limit);
        let main = |t: f64| t * t.ln() + (2.0 * EULER_GAMMA - 1.0) * t;
        let mut partial = 0u64;
        let mut worst: f64 = 0.0;
        for n in 1..limit {
            partial += d[n] as u64;
            // D is constant on [n, n + 1) while the main term increases.
            let lo = (partial as f64 - main(n as f64)).abs() / (n as f64).sqrt();
            let hi = (partial as f64 - main((n + 1) as f64)).abs() / ((n + 1) as f64).sqrt();
            worst = worst.max(lo).max(hi);
        }
        assert!(worst <= DIVISOR_REMAINDER_CONSTANT, "worst ratio {worst}");
    }

    #[test]
    fn tail_bound_dominates_direct_sum() {
        let d = divisor_counts(200_000);
        for k in [1u32, 6] {
            let kernel = SmoothingKernel::new(k).unwrap();
            for q in [1.0, 17.0, 100.0, 2500.0] {
                for m in [0u64, 1, 2, 3, 10, 200, 1000] {
                    let direct: f64 = (m as usize + 1..=200_000)
                        .map(|n| d[n] as f64 / (n as f64).sqrt() * kernel.eval(2.0 * PI * n as f64 / q))
                        .sum();
                    let bound = certified_tail(m, q, &kernel);
                    assert!(direct <= bound, "k={k} q={q} m={m}: {direct} > {bound}");
                }
            }
        }
    }

    #[test]
    fn cutoff_examples() {
        let policy = TruncationPolicy::default();
        let c = truncation_cutoff(100.0, &policy, 1).unwrap();
        let t = c.n_max as f64 * 2.0 * PI / 100.0;
        assert!((25.0..=60.0 + 0.1).contains(&t), "T = {t}");
        let d = divisor_counts(5000);
        let kernel = SmoothingKernel::new(1).unwrap();
        let direct: f64 = (c.n_max as usize + 1..=5000)
            .map(|n| d[n] as f64 / (n as f64).sqrt() * kernel.eval(2.0 * PI * n as f64 / 100.0))
            .sum();
        assert!(direct <= policy.tail_target);

        let c2 = truncation_cutoff(200.0, &policy, 1).unwrap();
        let ratio = c2.n_max as f64 / c.n_max as f64;
        assert!((1.7..=2.3).contains(&ratio), "ratio {ratio}");

        let capped = TruncationPolicy::new(1e-12, 10).unwrap();
        match truncation_cutoff(1e6, &capped, 1) {
            Err(Error::HardCapExceeded { required, cap: 10 }) => assert!(required > 10),
            other => panic!("unexpected {other:?}"),
        }
        assert!(truncation_cutoff(0.0, &policy, 1).is_err());
    }

    #[test]
    fn tiny_q_needs_no_terms() {
        let c = truncation_cutoff(1e-3, &TruncationPolicy::default(), 6).unwrap();
        assert_eq!(c.n_max, 1);
        assert!(c.tail_bound < 1e-12);
    }
}
