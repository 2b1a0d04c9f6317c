use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::arith::{kronecker, prime_divisors, unit_square_classes};
use crate::error::{Error, Result};
use crate::forms::Eigenform;
use crate::lfunc::{truncation_cutoff, SmoothingKernel, TruncationPolicy};
use crate::numeric::{linear_fit, CompensatedSum};

/// How the `r | (4N)^inf` part of an index `n = r j^2` is weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexWeight {
    /// Mean of `chi_d(r)` over the residue classes of the family, refined
    /// modulo `lcm(4N, 8)`. For odd `N` this removes odd powers of 2, on
    /// which `chi_d(2) = ±1` averages to zero.
    #[default]
    FamilyAverage,
    /// Weight 1 for every admissible `r`.
    Literal,
}

/// One index `n = r j^2` with `r | (4N)^inf` and `gcd(j, 4N) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BIndex {
    pub n: u64,
    pub r: u64,
    pub j: u64,
    /// `weight(r) prod_{p | j} (1 + 1/p)^{-1}`.
    pub factor: f64,
}

/// The sparse index set of `B(x)` up to `n_max`, ascending in `n`.
pub fn b_index_set(level: u64, weight: IndexWeight, n_max: u64) -> Result<Vec<BIndex>> {
    let modulus = 4 * level;
    let bad_primes = prime_divisors(modulus)?;
    let family_residues = family_lifts(level)?;
    let mut rs = vec![1u64];
    for &p in &bad_primes {
        let mut next = Vec::new();
        for &r in &rs {
            let mut v = r;
            while v <= n_max {
                next.push(v);
                match v.checked_mul(p) {
                    Some(m) => v = m,
                    None => break,
                }
            }
        }
        rs = next;
    }
    let r_weights: Vec<(u64, f64)> = rs
        .into_iter()
        .map(|r| {
            let w = match weight {
                IndexWeight::Literal => 1.0,
                IndexWeight::FamilyAverage => {
                    let s: i64 = family_residues
                        .iter()
                        .map(|&c| kronecker(c as i64, r as i64) as i64)
                        .sum();
                    s as f64 / family_residues.len() as f64
                }
            };
            (r, w)
        })
        .filter(|&(_, w)| w != 0.0)
        .collect();
    let mut out = Vec::new();
    let mut j = 1u64;
    while j * j <= n_max {
        if num_integer::gcd(j, modulus) == 1 {
            let local: f64 = prime_divisors(j)?
                .iter()
                .map(|&p| p as f64 / (p as f64 + 1.0))
                .product();
            let jj = j * j;
            for &(r, w) in &r_weights {
                if let Some(n) = r.checked_mul(jj).filter(|&n| n <= n_max) {
                    out.push(BIndex {
                        n,
                        r,
                        j,
                        factor: w * local,
                    });
                }
            }
        }
        j += 1;
    }
    out.sort_by_key(|b| b.n);
    Ok(out)
}

/// Residues modulo `lcm(4N, 8)` lying over the family classes modulo `4N`.
fn family_lifts(level: u64) -> Result<Vec<u64>> {
    let m = 4 * level;
    let classes = unit_square_classes(m)?;
    let big = num_integer::lcm(m, 8);
    Ok((0..big).filter(|&c| classes.contains(&(c % m))).collect())
}

/// One value of `B(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BValue {
    pub x: f64,
    pub value: f64,
    pub tail_bound: f64,
    pub terms: u64,
}

/// `B(x) = sum_{n = r j^2} a_n n^{-k} weight(r) prod_{p|j} (1+1/p)^{-1} V(2 pi n / x)`.
///
/// Indices beyond the stored table use the Hecke recursion on prime
/// powers, so only primes up to `sqrt` of the cutoff need to be stored.
pub fn b_series(
    form: &Eigenform,
    x: f64,
    weight: IndexWeight,
    policy: &TruncationPolicy,
) -> Result<BValue> {
    let k = form.half_weight();
    // The index set is sparse, so the cap applies to its size rather than
    // to the cutoff.
    let uncapped = TruncationPolicy {
        hard_cap: u64::MAX,
        ..*policy
    };
    let cutoff = truncation_cutoff(x, &uncapped, k)?;
    let kernel = SmoothingKernel::new(k)?;
    let indices = b_index_set(form.level(), weight, cutoff.n_max)?;
    if indices.len() as u64 > policy.hard_cap {
        return Err(Error::HardCapExceeded {
            required: indices.len() as u64,
            cap: policy.hard_cap,
        });
    }
    let mut acc = CompensatedSum::new();
    for idx in &indices {
        let lambda = form.lambda_extended(idx.n)?;
        if lambda == 0.0 {
            continue;
        }
        let n = idx.n as f64;
        acc.add(lambda / n.sqrt() * idx.factor * kernel.eval(2.0 * PI * n / x));
    }
    Ok(BValue {
        x,
        value: acc.value(),
        tail_bound: cutoff.tail_bound,
        terms: indices.len() as u64,
    })
}

/// Default relative fit residual above which the extrapolation is rejected.
pub const LFK_FIT_LIMIT: f64 = 1e-2;

/// `L_f(k)` extrapolated from `B(x) = L + c x^{-1/5}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LfkEstimate {
    pub weight: IndexWeight,
    pub x_grid: Vec<f64>,
    pub b_values: Vec<f64>,
    pub value: f64,
    pub slope: f64,
    /// `max_i |B(x_i) - L - c x_i^{-1/5}| / |L|`.
    pub fit_residual: f64,
}

pub fn l_f_value(
    form: &Eigenform,
    x_grid: &[f64],
    weight: IndexWeight,
    policy: &TruncationPolicy,
) -> Result<LfkEstimate> {
    if x_grid.len() < 3 {
        return Err(Error::InvalidArgument(
            "the B(x) extrapolation needs at least three x values".into(),
        ));
    }
    if x_grid.windows(2).any(|w| !(w[0] < w[1])) || !(x_grid[0] > 0.0) {
        return Err(Error::InvalidArgument(
            "x grid must be positive and strictly increasing".into(),
        ));
    }
    let b_values = x_grid
        .iter()
        .map(|&x| b_series(form, x, weight, policy).map(|b| b.value))
        .collect::<Result<Vec<_>>>()?;
    let u: Vec<f64> = x_grid.iter().map(|x| x.powf(-0.2)).collect();
    let (value, slope) = linear_fit(&u, &b_values);
    let worst = u
        .iter()
        .zip(&b_values)
        .map(|(ui, bi)| (bi - value - slope * ui).abs())
        .fold(0.0, f64::max);
    let fit_residual = worst / value.abs();
    if !(fit_residual <= LFK_FIT_LIMIT) {
        return Err(Error::FitDiverged {
            relative: fit_residual,
            limit: LFK_FIT_LIMIT,
        });
    }
    Ok(LfkEstimate {
        weight,
        x_grid: x_grid.to_vec(),
        b_values,
        value,
        slope,
        fit_residual,
    })
}

/// Least-squares exponent `alpha` in `|B(x) - L| ~ C x^alpha`.
pub fn decay_exponent(xs: &[f64], bs: &[f64], limit: f64) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = bs.iter().map(|b| (b - limit).abs().ln()).collect();
    linear_fit(&lx, &ly).1
}
