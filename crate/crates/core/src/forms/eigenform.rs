use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::qseries::{eta_quotient, EtaFactor, IntegerQSeries};
use crate::arith::{factorize, sieve_covering};
use crate::error::{Error, Result};

/// Default table size for Ramanujan's Delta.
pub const DELTA_DEFAULT_CAP: u64 = 1_000_000;
/// Default table size for the level-32 weight-2 form.
pub const LEVEL32_DEFAULT_CAP: u64 = 4_000_000;

/// A normalized Hecke eigenform of level `N`, weight `2k`, trivial
/// nebentypus, with exact coefficients `a_n` for `n <= max_n`.
///
/// Alongside the exact table it keeps `lambda(n) = a_n / n^((2k-1)/2)` and
/// the Dirichlet weights `a_n / n^k = lambda(n) / sqrt(n)` used by the
/// smoothed sums.
#[derive(Debug, Clone)]
pub struct Eigenform {
    level: u64,
    half_weight: u32,
    root_number: i8,
    source: String,
    a: Arc<Vec<i128>>,
    lambda: Arc<Vec<f64>>,
    dirichlet: Arc<Vec<f64>>,
}

/// Static description of an eigenform, for reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormInfo {
    pub level: u64,
    pub weight: u32,
    pub root_number: i8,
    pub max_n: u64,
    pub source: String,
}

impl Eigenform {
    /// Build from an exact table indexed by `n` (index 0 ignored).
    pub fn from_table(
        level: u64,
        half_weight: u32,
        root_number: i8,
        source: impl Into<String>,
        mut a: Vec<i128>,
    ) -> Result<Self> {
        if level == 0 || half_weight == 0 {
            return Err(Error::InvalidArgument(
                "level and weight must be positive".into(),
            ));
        }
        if a.len() < 2 || a[1] != 1 {
            return Err(Error::InvalidArgument(
                "eigenform tables must start with a_1 = 1".into(),
            ));
        }
        if root_number != 1 && root_number != -1 {
            return Err(Error::InvalidArgument("root number must be ±1".into()));
        }
        a[0] = 0;
        let k = half_weight as i32;
        let mut lambda = vec![0.0; a.len()];
        let mut dirichlet = vec![0.0; a.len()];
        for n in 1..a.len() {
            if a[n] != 0 {
                let nf = n as f64;
                let d = a[n] as f64 / nf.powi(k);
                dirichlet[n] = d;
                lambda[n] = d * nf.sqrt();
            }
        }
        Ok(Eigenform {
            level,
            half_weight,
            root_number,
            source: source.into(),
            a: Arc::new(a),
            lambda: Arc::new(lambda),
            dirichlet: Arc::new(dirichlet),
        })
    }

    /// Build from a q-expansion starting at `q^1`.
    pub fn from_series(
        level: u64,
        half_weight: u32,
        root_number: i8,
        source: impl Into<String>,
        series: &IntegerQSeries,
    ) -> Result<Self> {
        let top = series.order().saturating_sub(1);
        let mut a = vec![0i128; top as usize + 1];
        for (n, c) in series.nonzero_terms() {
            a[n as usize] = c.to_i128().ok_or(Error::CoefficientOverflow(n))?;
        }
        Self::from_table(level, half_weight, root_number, source, a)
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    /// `k`, half of the weight `2k`.
    pub fn half_weight(&self) -> u32 {
        self.half_weight
    }

    pub fn weight(&self) -> u32 {
        2 * self.half_weight
    }

    /// Sign `w` of the untwisted functional equation.
    pub fn root_number(&self) -> i8 {
        self.root_number
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn max_n(&self) -> u64 {
        (self.a.len() - 1) as u64
    }

    pub fn info(&self) -> FormInfo {
        FormInfo {
            level: self.level,
            weight: self.weight(),
            root_number: self.root_number,
            max_n: self.max_n(),
            source: self.source.clone(),
        }
    }

    /// Exact `a_n`, `n <= max_n`.
    pub fn coefficient(&self, n: u64) -> Option<i128> {
        self.a.get(n as usize).copied().filter(|_| n >= 1)
    }

    pub fn coefficients(&self) -> &[i128] {
        &self.a
    }

    pub fn lambda(&self, n: u64) -> Option<f64> {
        self.lambda.get(n as usize).copied().filter(|_| n >= 1)
    }

    /// `a_n n^{-k}` for `n <= max_n`; index 0 holds 0.
    pub fn dirichlet_table(&self) -> &[f64] {
        &self.dirichlet
    }

    /// `lambda(n)` for any `n` whose prime factors all lie within the table,
    /// using multiplicativity and the normalized Hecke recursion
    /// `lambda(p^{r+1}) = lambda(p) lambda(p^r) - lambda(p^{r-1})` for `p ∤ N`.
    pub fn lambda_extended(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        if n <= self.max_n() {
            return Ok(self.lambda[n as usize]);
        }
        let mut value = 1.0;
        for &(p, e) in factorize(n)?.factors() {
            value *= self.lambda_prime_power(p, e)?;
            if value == 0.0 {
                break;
            }
        }
        Ok(value)
    }

    fn lambda_prime_power(&self, p: u64, e: u32) -> Result<f64> {
        if let Some(pe) = p.checked_pow(e) {
            if pe <= self.max_n() {
                return Ok(self.lambda[pe as usize]);
            }
        }
        if p > self.max_n() {
            return Err(Error::MissingPrime(p));
        }
        let lp = self.lambda[p as usize];
        if self.level.is_multiple_of(p) {
            return Ok(lp.powi(e as i32));
        }
        let (mut prev, mut cur) = (1.0, lp);
        for _ in 1..e {
            let next = lp * cur - prev;
            prev = cur;
            cur = next;
        }
        Ok(cur)
    }

    /// Primes `p <= bound`, `p ∤ N`, violating `|a_p| <= 2 p^((2k-1)/2)`,
    /// checked exactly as `a_p^2 <= 4 p^(2k-1)`.
    pub fn deligne_violations(&self, bound: u64) -> Vec<u64> {
        let bound = bound.min(self.max_n());
        let sieve = sieve_covering(bound);
        sieve
            .primes_up_to(bound)
            .iter()
            .map(|&p| p as u64)
            .filter(|&p| !self.level.is_multiple_of(p))
            .filter(|&p| {
                let ap = BigInt::from(self.a[p as usize]);
                let lhs = &ap * &ap;
                let rhs = BigInt::from(4) * BigInt::from(p).pow(2 * self.half_weight - 1);
                lhs > rhs
            })
            .collect()
    }

    /// The same table with a different functional-equation sign.
    pub fn with_root_number(mut self, root_number: i8) -> Result<Self> {
        if root_number != 1 && root_number != -1 {
            return Err(Error::InvalidArgument("root number must be ±1".into()));
        }
        self.root_number = root_number;
        Ok(self)
    }

    /// Replace the table by its prefix `n <= max_n`.
    pub fn truncated(&self, max_n: u64) -> Self {
        let m = (max_n.min(self.max_n()) + 1) as usize;
        Eigenform {
            level: self.level,
            half_weight: self.half_weight,
            root_number: self.root_number,
            source: self.source.clone(),
            a: Arc::new(self.a[..m].to_vec()),
            lambda: Arc::new(self.lambda[..m].to_vec()),
            dirichlet: Arc::new(self.dirichlet[..m].to_vec()),
        }
    }
}

/// Complete the table `a_n`, `n <= max_n`, from prime values through
/// multiplicativity and
/// `a_{p^{r+1}} = a_p a_{p^r} - 1_{p ∤ N} p^{2k-1} a_{p^{r-1}}`.
/// For `p | N` the local factor is linear and `a_{p^r} = a_p^r`.
pub fn hecke_extend<F>(
    prime_value: F,
    level: u64,
    half_weight: u32,
    root_number: i8,
    max_n: u64,
    source: &str,
) -> Result<Eigenform>
where
    F: Fn(u64) -> Option<i128>,
{
    let sieve = sieve_covering(max_n);
    let m = max_n.max(1) as usize;
    let mut a = vec![0i128; m + 1];
    a[1] = 1;
    let pow_weight = 2 * half_weight - 1;
    for n in 2..=m {
        let p = sieve.spf(n as u64) as usize;
        let mut rest = n / p;
        let mut pe = p;
        while rest.is_multiple_of(p) {
            rest /= p;
            pe *= p;
        }
        if rest > 1 {
            a[n] = a[pe]
                .checked_mul(a[rest])
                .ok_or(Error::CoefficientOverflow(n as u64))?;
        } else if pe == p {
            a[n] = prime_value(p as u64).ok_or(Error::MissingPrime(p as u64))?;
        } else {
            let prev = a[pe / p];
            let mut value = a[p]
                .checked_mul(prev)
                .ok_or(Error::CoefficientOverflow(n as u64))?;
            if !level.is_multiple_of(p as u64) {
                let scale = (p as i128)
                    .checked_pow(pow_weight)
                    .and_then(|s| s.checked_mul(a[pe / p / p]))
                    .ok_or(Error::CoefficientOverflow(n as u64))?;
                value = value
                    .checked_sub(scale)
                    .ok_or(Error::CoefficientOverflow(n as u64))?;
            }
            a[n] = value;
        }
    }
    Eigenform::from_table(level, half_weight, root_number, source, a)
}

/// The eta-quotient expansion of Delta = eta(z)^24 as a `q`-series to `q^order`.
pub fn delta_series(order: u64) -> Result<IntegerQSeries> {
    eta_quotient(&[EtaFactor { scale: 1, power: 24 }], order)
}

/// Ramanujan's Delta (level 1, weight 12) with `a_n = tau(n)`, `n <= max_n`.
pub fn delta_coefficients(max_n: u64, cap: u64) -> Result<Eigenform> {
    if max_n == 0 {
        return Err(Error::InvalidArgument("max_n must be positive".into()));
    }
    if max_n > cap {
        return Err(Error::InvalidArgument(format!(
            "requested {max_n} Delta coefficients, above the cap {cap}"
        )));
    }
    let series = delta_series(max_n + 1)?;
    Eigenform::from_series(1, 6, 1, "eta^24", &series)
}
