//! The weight-2 newform of level 32 attached to `y^2 = x^3 - x`.

use super::eigenform::{hecke_extend, Eigenform};
use super::qseries::{eta_quotient, EtaFactor, IntegerQSeries};
use crate::arith::{is_prime_u64, kronecker};
use crate::error::{Error, Result};

pub const LEVEL32: u64 = 32;

/// `a_p` for the curve `y^2 = x^3 - x`.
///
/// For `p = 1 mod 4` write `p = a^2 + b^2` with `a` odd and `a + b = 1 mod 4`;
/// then `a_p = 2a`. Primes `p = 3 mod 4` and `p = 2` give `a_p = 0`.
pub fn level32_ap(p: u64) -> Result<i128> {
    if !is_prime_u64(p) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    if p % 4 != 1 {
        return Ok(0);
    }
    let (a, b) = two_squares(p);
    let (odd, even) = if a % 2 == 1 { (a, b) } else { (b, a) };
    let odd = odd as i128;
    // `even` is even, so its sign is irrelevant modulo 4.
    let signed = if (odd + even as i128).rem_euclid(4) == 1 {
        odd
    } else {
        -odd
    };
    Ok(2 * signed)
}

/// `p = a^2 + b^2` for a prime `p = 1 mod 4`, by Cornacchia's descent from a
/// square root of `-1`.
fn two_squares(p: u64) -> (u64, u64) {
    let root = sqrt_minus_one(p);
    let (mut r0, mut r1) = (p, root);
    let limit = (p as f64).sqrt() as u64;
    while r1 > limit || r1 * r1 > p {
        let next = r0 % r1;
        r0 = r1;
        r1 = next;
    }
    let rest = p - r1 * r1;
    let b = (rest as f64).sqrt().round() as u64;
    debug_assert_eq!(b * b, rest);
    (r1, b)
}

fn sqrt_minus_one(p: u64) -> u64 {
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % p as u128) as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        r
    };
    let c = (2..p)
        .find(|&c| kronecker(c as i64, p as i64) == -1)
        .expect("a non-residue exists below p");
    pow(c, (p - 1) / 4)
}

/// `a_p = -sum_x ((x^3 - x) / p)`, by direct point counting. Slow oracle.
pub fn level32_ap_by_counting(p: u64) -> Result<i128> {
    if !is_prime_u64(p) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    if p == 2 {
        // y^2 = x^3 - x has bad reduction at 2; the newform has a_2 = 0.
        return Ok(0);
    }
    let pi = p as i128;
    let s: i64 = (0..pi)
        .map(|x| kronecker(((x * x * x - x).rem_euclid(pi)) as i64, p as i64) as i64)
        .sum();
    Ok(-(s as i128))
}

/// `eta(4z)^2 eta(8z)^2` below `order`.
pub fn level32_series(order: u64) -> Result<IntegerQSeries> {
    eta_quotient(
        &[EtaFactor { scale: 4, power: 2 }, EtaFactor { scale: 8, power: 2 }],
        order,
    )
}

/// The level-32 eigenform with `a_n` for `n <= max_n`, from two-squares prime
/// values and the Hecke recursion.
pub fn level32_form(max_n: u64) -> Result<Eigenform> {
    if max_n == 0 {
        return Err(Error::InvalidArgument("max_n must be positive".into()));
    }
    hecke_extend(|p| level32_ap(p).ok(), LEVEL32, 1, 1, max_n, "two-squares")
}
