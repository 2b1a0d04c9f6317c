use serde::{Deserialize, Serialize};

use super::sieve::shared_sieve;
use crate::error::{Error, Result};

/// Trial division runs through sieve primes up to this bound.
const TRIAL_BOUND: u64 = 1_000_000;

/// Largest accepted input, 2^63.
pub const FACTOR_LIMIT: u64 = 1 << 63;

/// A positive integer with its prime factorization, primes increasing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactoredInteger {
    n: u64,
    factors: Vec<(u64, u32)>,
}

impl FactoredInteger {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    /// Number of divisors.
    pub fn divisor_count(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| e as u64 + 1).product()
    }

    fn from_unsorted(n: u64, mut primes: Vec<u64>) -> Self {
        primes.sort_unstable();
        let mut factors: Vec<(u64, u32)> = Vec::new();
        for p in primes {
            match factors.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => factors.push((p, 1)),
            }
        }
        FactoredInteger { n, factors }
    }
}

/// Complete prime factorization of `1 <= n <= 2^63`.
///
/// Trial division by cached sieve primes, then a deterministic Miller-Rabin
/// test and Brent's variant of Pollard rho for what remains.
pub fn factorize(n: u64) -> Result<FactoredInteger> {
    if n == 0 {
        return Err(Error::InvalidArgument("cannot factor 0".into()));
    }
    if n > FACTOR_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "{n} exceeds the factorization limit 2^63"
        )));
    }
    let sieve = shared_sieve();
    if sieve.contains(n) {
        return Ok(FactoredInteger {
            n,
            factors: sieve.factor_small(n),
        });
    }

    let mut primes = Vec::new();
    let mut m = n;
    let trial = TRIAL_BOUND.min(sieve.bound());
    for &p in sieve.primes_up_to(trial) {
        let p = p as u64;
        if p * p > m {
            break;
        }
        while m.is_multiple_of(p) {
            primes.push(p);
            m /= p;
        }
    }
    if m > 1 {
        if m <= trial * trial || is_prime_u64(m) {
            primes.push(m);
        } else {
            split_composite(m, &mut primes);
        }
    }
    Ok(FactoredInteger::from_unsorted(n, primes))
}

fn split_composite(m: u64, out: &mut Vec<u64>) {
    if m == 1 {
        return;
    }
    if is_prime_u64(m) {
        out.push(m);
        return;
    }
    let mut c = 1;
    let d = loop {
        if let Some(d) = brent_rho(m, c) {
            break d;
        }
        c += 1;
    };
    split_composite(d, out);
    split_composite(m / d, out);
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// One Brent rho attempt with polynomial x^2 + c. Returns a nontrivial
/// divisor or None when the attempt cycles.
fn brent_rho(n: u64, c: u64) -> Option<u64> {
    if n.is_multiple_of(2) {
        return Some(2);
    }
    let f = |x: u64| (mul_mod(x, x, n) + c) % n;
    let (mut y, mut r, mut q) = (2u64, 1u64, 1u64);
    let mut g = 1u64;
    let mut x = y;
    let mut ys = y;
    const BATCH: u64 = 128;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            for _ in 0..BATCH.min(r - k) {
                y = f(y);
                q = mul_mod(q, x.abs_diff(y), n);
            }
            g = num_integer::gcd(q, n);
            k += BATCH;
        }
        r *= 2;
    }
    if g == n {
        loop {
            ys = f(ys);
            g = num_integer::gcd(x.abs_diff(ys), n);
            if g > 1 {
                break;
            }
        }
    }
    (g != n).then_some(g)
}
