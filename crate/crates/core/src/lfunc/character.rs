use serde::{Deserialize, Serialize};

use crate::arith::{is_fundamental_discriminant, kronecker, sieve_covering};
use crate::error::{Error, Result};

/// Periods up to this size are tabulated in full.
pub const MEMO_PERIOD_LIMIT: u64 = 1_000_000;

/// The real character `n -> (-4/n)^e (d/n)` for a fundamental
/// discriminant `d` and `e` in {0, 1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistCharacter {
    d: i64,
    minus_four: bool,
}

impl TwistCharacter {
    /// The Kronecker character `chi_d`.
    pub fn kronecker(d: i64) -> Result<Self> {
        if !is_fundamental_discriminant(d) {
            return Err(Error::Inadmissible {
                d,
                reason: "not a fundamental discriminant".into(),
            });
        }
        Ok(TwistCharacter {
            d,
            minus_four: false,
        })
    }

    /// `(-4/n)^k chi_d(n)`; equal to `chi_d` for even `k`.
    pub fn composite(k: u32, d: i64) -> Result<Self> {
        let base = Self::kronecker(d)?;
        Ok(TwistCharacter {
            minus_four: k % 2 == 1,
            ..base
        })
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn has_minus_four(&self) -> bool {
        self.minus_four
    }

    /// A period: `|d|`, or `lcm(4, |d|)` with the `(-4/.)` factor.
    pub fn period(&self) -> u64 {
        let a = self.d.unsigned_abs();
        if self.minus_four {
            num_integer::lcm(4, a)
        } else {
            a
        }
    }

    #[inline]
    pub fn eval(&self, n: u64) -> i8 {
        let base = kronecker(self.d, n as i64);
        if self.minus_four {
            base * kronecker(-4, n as i64)
        } else {
            base
        }
    }

    /// Value table valid for every `n <= n_max`.
    pub fn table(&self, n_max: u64) -> CharacterTable {
        CharacterTable::new(*self, n_max)
    }
}

/// Memoized values of a [`TwistCharacter`].
///
/// Holds one full period when it is no longer than the requested range and
/// at most [`MEMO_PERIOD_LIMIT`]; otherwise the values `0..=n_max` directly.
/// Either way the table is filled multiplicatively from prime values.
#[derive(Debug, Clone)]
pub struct CharacterTable {
    chi: TwistCharacter,
    period: u64,
    periodic: bool,
    values: Vec<i8>,
}

impl CharacterTable {
    pub fn new(chi: TwistCharacter, n_max: u64) -> Self {
        let period = chi.period();
        let periodic = period <= MEMO_PERIOD_LIMIT && period <= n_max + 1;
        let len = if periodic { period } else { n_max + 1 };
        let sieve = sieve_covering(len);
        let mut values = vec![0i8; len as usize];
        if len > 1 {
            values[1] = 1;
        }
        for n in 2..len {
            let p = sieve.spf(n);
            values[n as usize] = if p == n {
                chi.eval(n)
            } else {
                values[p as usize] * values[(n / p) as usize]
            };
        }
        if periodic {
            values[0] = chi.eval(period);
        }
        CharacterTable {
            chi,
            period,
            periodic,
            values,
        }
    }

    pub fn character(&self) -> &TwistCharacter {
        &self.chi
    }

    /// Largest `n` answered by the table (unbounded when periodic).
    pub fn covers(&self, n_max: u64) -> bool {
        self.periodic || n_max < self.values.len() as u64
    }

    #[inline]
    pub fn get(&self, n: u64) -> i8 {
        if self.periodic {
            self.values[(n % self.period) as usize]
        } else {
            self.values[n as usize]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_matches_direct_evaluation() {
        for d in [1i64, -3, 5, -7, 8, -15, 17, -4, 12, 1001 * 4 + 1] {
            if !is_fundamental_discriminant(d) {
                continue;
            }
            for minus_four in [false, true] {
                let chi = TwistCharacter::composite(minus_four as u32, d).unwrap();
                for n_max in [10u64, 5000] {
                    let t = chi.table(n_max);
                    for n in 0..=n_max.max(3000) {
                        if t.covers(n) {
                            assert_eq!(t.get(n), chi.eval(n), "d={d} n={n}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn composite_examples() {
        let even = TwistCharacter::composite(6, -7).unwrap();
        let plain = TwistCharacter::kronecker(-7).unwrap();
        for n in 0..500 {
            assert_eq!(even.eval(n), plain.eval(n));
        }
        assert_eq!(TwistCharacter::composite(1, 1).unwrap().eval(3), -1);
        assert!(TwistCharacter::composite(1, 9).is_err());
    }

    #[test]
    fn composite_is_kronecker_of_minus_four_d() {
        for d in [1i64, 5, -3, -7, 13, -15, 21, 17, -19] {
            let chi = TwistCharacter::composite(1, d).unwrap();
            for n in 1..=1000u64 {
                assert_eq!(chi.eval(n), kronecker(-4 * d, n as i64), "d={d} n={n}");
            }
        }
    }
}
