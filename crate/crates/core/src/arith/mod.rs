//! Elementary number theory: sieve, factorization, the Kronecker symbol,
//! the Möbius function and unit-square residue classes.

mod factor;
mod sieve;

use std::collections::BTreeSet;

pub use factor::{factorize, is_prime_u64, FactoredInteger, FACTOR_LIMIT};
pub use sieve::{
    configure_shared_sieve, shared_sieve, sieve_covering, Sieve, DEFAULT_SIEVE_BOUND,
};

use crate::error::{Error, Result};

/// Kronecker symbol `(d / n)`, with the usual extension to even and
/// non-positive `n`.
pub fn kronecker(d: i64, n: i64) -> i8 {
    let mut d = d as i128;
    let mut n = n as i128;
    if n == 0 {
        return if d == 1 || d == -1 { 1 } else { 0 };
    }
    let mut result = 1i8;
    if n < 0 {
        n = -n;
        if d < 0 {
            result = -result;
        }
    }
    let twos = n.trailing_zeros();
    if twos > 0 {
        if d % 2 == 0 {
            return 0;
        }
        n >>= twos;
        // (d/2) = -1 exactly when d = ±3 mod 8
        if twos % 2 == 1 && matches!(d.rem_euclid(8), 3 | 5) {
            result = -result;
        }
    }
    // Jacobi symbol (d / n) for odd n > 0.
    d = d.rem_euclid(n);
    while d != 0 {
        let t = d.trailing_zeros();
        d >>= t;
        if t % 2 == 1 && matches!(n % 8, 3 | 5) {
            result = -result;
        }
        if d % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        std::mem::swap(&mut d, &mut n);
        d %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Möbius function.
pub fn moebius(n: u64) -> Result<i8> {
    let f = factorize(n)?;
    if !f.is_squarefree() {
        return Ok(0);
    }
    Ok(if f.factors().len() % 2 == 0 { 1 } else { -1 })
}

/// True iff no square of a prime divides `n`. Returns false for 0.
pub fn is_squarefree(n: u64) -> bool {
    match n {
        0 => false,
        _ => factorize(n).map(|f| f.is_squarefree()).unwrap_or(false),
    }
}

/// Number of divisors of `n >= 1`.
pub fn divisor_count(n: u64) -> Result<u64> {
    Ok(factorize(n)?.divisor_count())
}

pub fn euler_phi(n: u64) -> Result<u64> {
    let f = factorize(n)?;
    Ok(f.factors()
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1)))
}

/// `{ v^2 mod m : gcd(v, m) = 1 }`.
pub fn unit_square_classes(m: u64) -> Result<BTreeSet<u64>> {
    if m == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    if m == 1 {
        return Ok(BTreeSet::from([0]));
    }
    Ok((1..m)
        .filter(|&v| num_integer::gcd(v, m) == 1)
        .map(|v| ((v as u128 * v as u128) % m as u128) as u64)
        .collect())
}

/// Fundamental discriminants, with `1` accepted as the trivial one.
pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 1 {
        return true;
    }
    if d == 0 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => is_squarefree(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

/// Distinct primes dividing `n`.
pub fn prime_divisors(n: u64) -> Result<Vec<u64>> {
    Ok(factorize(n)?.primes().collect())
}
