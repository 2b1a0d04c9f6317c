//! Exact truncated q-expansions.
//!
//! Products are formed by folding sparse factors (eta, eta cubed, theta) into
//! a dense accumulator one at a time. The fold runs on checked 128-bit
//! integers and falls back to arbitrary precision on overflow, so results are
//! always exact.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Exact q-series `sum_{i} coeffs[i] q^(offset + i)`, known for exponents
/// below `order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerQSeries {
    offset: u64,
    coeffs: Vec<BigInt>,
    order: u64,
}

/// A sparse series with small integer coefficients, `(exponent, coefficient)`
/// pairs in increasing exponent order, all exponents below `order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseQSeries {
    terms: Vec<(u64, i64)>,
    order: u64,
}

impl SparseQSeries {
    pub fn new(mut terms: Vec<(u64, i64)>, order: u64) -> Self {
        terms.retain(|&(e, c)| c != 0 && e < order);
        terms.sort_unstable_by_key(|&(e, _)| e);
        let mut merged: Vec<(u64, i64)> = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            match merged.last_mut() {
                Some((le, lc)) if *le == e => *lc += c,
                _ => merged.push((e, c)),
            }
        }
        merged.retain(|&(_, c)| c != 0);
        SparseQSeries {
            terms: merged,
            order,
        }
    }

    pub fn terms(&self) -> &[(u64, i64)] {
        &self.terms
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn support(&self) -> usize {
        self.terms.len()
    }

    pub fn to_dense(&self) -> IntegerQSeries {
        let mut coeffs = vec![BigInt::zero(); self.order as usize];
        for &(e, c) in &self.terms {
            coeffs[e as usize] = BigInt::from(c);
        }
        IntegerQSeries {
            offset: 0,
            coeffs,
            order: self.order,
        }
    }
}

/// `sum_{m in Z} (-1)^m q^(t m(3m-1)/2)` below `order`: the eta product
/// `prod (1 - q^(tn))` without its `q^(t/24)` prefactor.
pub fn eta_series(t: u64, order: u64) -> Result<SparseQSeries> {
    if order == 0 {
        return Err(Error::Series("order must be positive".into()));
    }
    if t == 0 {
        return Err(Error::Series("eta scale must be positive".into()));
    }
    let mut terms = Vec::new();
    for m in 0i64.. {
        let mut any = false;
        for mm in if m == 0 { vec![0] } else { vec![m, -m] } {
            let e = t as i128 * (mm as i128 * (3 * mm as i128 - 1) / 2);
            if e < order as i128 {
                terms.push((e as u64, if mm % 2 == 0 { 1 } else { -1 }));
                any = true;
            }
        }
        if !any {
            break;
        }
    }
    Ok(SparseQSeries::new(terms, order))
}

/// Jacobi's identity: `prod (1 - q^(tn))^3 = sum_{m>=0} (-1)^m (2m+1) q^(t m(m+1)/2)`.
pub fn eta_cube_series(t: u64, order: u64) -> Result<SparseQSeries> {
    if order == 0 || t == 0 {
        return Err(Error::Series("order and scale must be positive".into()));
    }
    let mut terms = Vec::new();
    let mut m = 0u64;
    loop {
        let e = t as u128 * (m as u128 * (m as u128 + 1) / 2);
        if e >= order as u128 {
            break;
        }
        let c = (2 * m + 1) as i64;
        terms.push((e as u64, if m.is_multiple_of(2) { c } else { -c }));
        m += 1;
    }
    Ok(SparseQSeries::new(terms, order))
}

/// `theta(tz) = 1 + 2 sum_{n>=1} q^(t n^2)` below `order`.
pub fn theta_series(t: u64, order: u64) -> Result<SparseQSeries> {
    if order == 0 || t == 0 {
        return Err(Error::Series("order and scale must be positive".into()));
    }
    let mut terms = vec![(0, 1)];
    let mut n = 1u64;
    while (t as u128) * (n as u128) * (n as u128) < order as u128 {
        terms.push((t * n * n, 2));
        n += 1;
    }
    Ok(SparseQSeries::new(terms, order))
}

/// One factor of an eta quotient: `eta(scale * z)^power`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EtaFactor {
    pub scale: u64,
    pub power: u32,
}

impl From<(u64, u32)> for EtaFactor {
    fn from((scale, power): (u64, u32)) -> Self {
        EtaFactor { scale, power }
    }
}

/// `prod eta(t_i z)^(r_i)` expanded below `order`.
///
/// The q-offset `sum t_i r_i / 24` must be integral. Powers are split into
/// eta-cube factors plus a remainder of plain eta factors, then folded in
/// smallest-support-first.
pub fn eta_quotient(parts: &[EtaFactor], order: u64) -> Result<IntegerQSeries> {
    let total: u64 = parts.iter().map(|f| f.scale * f.power as u64).sum();
    if !total.is_multiple_of(24) {
        return Err(Error::Series(format!(
            "eta quotient offset {total}/24 is not integral"
        )));
    }
    if parts.iter().any(|f| f.power == 0 || f.scale == 0) {
        return Err(Error::Series("eta factors need positive scale and power".into()));
    }
    let offset = total / 24;
    let inner = order.saturating_sub(offset).max(1);
    let mut factors = Vec::new();
    for f in parts {
        for _ in 0..f.power / 3 {
            factors.push(eta_cube_series(f.scale, inner)?);
        }
        for _ in 0..f.power % 3 {
            factors.push(eta_series(f.scale, inner)?);
        }
    }
    sparse_product(offset, factors, order)
}

/// Product of sparse factors times `q^offset`, valid below `order`.
pub fn sparse_product(
    offset: u64,
    mut factors: Vec<SparseQSeries>,
    order: u64,
) -> Result<IntegerQSeries> {
    if order <= offset {
        return Ok(IntegerQSeries {
            offset,
            coeffs: Vec::new(),
            order: offset,
        });
    }
    let len = (order - offset) as usize;
    factors.sort_by_key(|f| f.support());
    let mut acc = Accumulator::one(len);
    for f in &factors {
        acc = acc.fold(f);
    }
    Ok(IntegerQSeries {
        offset,
        coeffs: acc.into_big(),
        order,
    })
}

/// Dense coefficients during a product: 128-bit while everything fits.
enum Accumulator {
    Small(Vec<i128>),
    Big(Vec<BigInt>),
}

const CHUNK: usize = 1 << 14;

impl Accumulator {
    fn one(len: usize) -> Self {
        let mut v = vec![0i128; len];
        if len > 0 {
            v[0] = 1;
        }
        Accumulator::Small(v)
    }

    fn fold(self, factor: &SparseQSeries) -> Self {
        match self {
            Accumulator::Small(d) => match fold_small(&d, factor.terms()) {
                Some(out) => Accumulator::Small(out),
                None => Accumulator::Big(fold_big(
                    &d.into_iter().map(BigInt::from).collect::<Vec<_>>(),
                    factor.terms(),
                )),
            },
            Accumulator::Big(d) => Accumulator::Big(fold_big(&d, factor.terms())),
        }
    }

    fn into_big(self) -> Vec<BigInt> {
        match self {
            Accumulator::Small(d) => d.into_iter().map(BigInt::from).collect(),
            Accumulator::Big(d) => d,
        }
    }
}

/// `out[n] = sum c * dense[n - e]`; None on 128-bit overflow.
///
/// Overflow is tracked with flags instead of early exits so the inner loop
/// stays branch-free: `|v| <= i128::MAX / |c|` rules out a bad product and
/// the addition reports its own carry.
fn fold_small(dense: &[i128], terms: &[(u64, i64)]) -> Option<Vec<i128>> {
    let len = dense.len();
    let mut out = vec![0i128; len];
    let ok = out
        .par_chunks_mut(CHUNK)
        .enumerate()
        .all(|(ci, chunk)| {
            let start = ci * CHUNK;
            let end = start + chunk.len();
            let mut overflow = false;
            for &(e, c) in terms {
                let e = e as usize;
                if e >= end {
                    break;
                }
                let c = c as i128;
                let limit = (i128::MAX / c.abs()) as u128;
                let lo = start.max(e);
                let src = &dense[lo - e..end - e];
                let dst = &mut chunk[lo - start..];
                for (slot, &v) in dst.iter_mut().zip(src) {
                    overflow |= v.unsigned_abs() > limit;
                    let (sum, carry) = slot.overflowing_add(v.wrapping_mul(c));
                    overflow |= carry;
                    *slot = sum;
                }
            }
            !overflow
        });
    ok.then_some(out)
}

fn fold_big(dense: &[BigInt], terms: &[(u64, i64)]) -> Vec<BigInt> {
    let len = dense.len();
    let mut out = vec![BigInt::zero(); len];
    out.par_chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(ci, chunk)| {
            let start = ci * CHUNK;
            let end = start + chunk.len();
            for &(e, c) in terms {
                let e = e as usize;
                if e >= end {
                    break;
                }
                for n in start.max(e)..end {
                    let v = &dense[n - e];
                    if !v.is_zero() {
                        chunk[n - start] += v * c;
                    }
                }
            }
        });
    out
}

impl IntegerQSeries {
    pub fn new(offset: u64, coeffs: Vec<BigInt>, order: u64) -> Result<Self> {
        if offset + coeffs.len() as u64 != order {
            return Err(Error::Series(format!(
                "offset {offset} + {} coefficients does not reach order {order}",
                coeffs.len()
            )));
        }
        Ok(IntegerQSeries {
            offset,
            coeffs,
            order,
        })
    }

    pub fn from_i64(offset: u64, coeffs: &[i64]) -> Self {
        IntegerQSeries {
            offset,
            order: offset + coeffs.len() as u64,
            coeffs: coeffs.iter().map(|&c| BigInt::from(c)).collect(),
        }
    }

    pub fn one(order: u64) -> Self {
        SparseQSeries::new(vec![(0, 1)], order).to_dense()
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    /// Exclusive upper bound of known exponents.
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Coefficient of `q^n`; `None` at or beyond the truncation order.
    pub fn coeff(&self, n: u64) -> Option<BigInt> {
        if n >= self.order {
            None
        } else if n < self.offset {
            Some(BigInt::zero())
        } else {
            Some(self.coeffs[(n - self.offset) as usize].clone())
        }
    }

    /// Coefficient as `i128`, for series known to fit.
    pub fn coeff_i128(&self, n: u64) -> Option<i128> {
        self.coeff(n).and_then(|c| c.to_i128())
    }

    /// Nonzero `(exponent, coefficient)` pairs.
    pub fn nonzero_terms(&self) -> impl Iterator<Item = (u64, &BigInt)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.offset + i as u64, c))
    }

    pub fn truncate(&self, order: u64) -> Self {
        let order = order.min(self.order).max(self.offset);
        IntegerQSeries {
            offset: self.offset,
            coeffs: self.coeffs[..(order - self.offset) as usize].to_vec(),
            order,
        }
    }

    /// Product, valid below `min(order_a + offset_b, order_b + offset_a)`.
    /// The sparser operand is folded into the denser one.
    pub fn mul(&self, other: &IntegerQSeries) -> IntegerQSeries {
        let offset = self.offset + other.offset;
        let order = (self.order + other.offset).min(other.order + self.offset);
        let len = order.saturating_sub(offset) as usize;
        if len == 0 {
            return IntegerQSeries {
                offset,
                coeffs: Vec::new(),
                order: offset,
            };
        }
        let (dense, sparse) = if self.nonzero_terms().count() <= other.nonzero_terms().count() {
            (other, self)
        } else {
            (self, other)
        };
        let mut base: Vec<BigInt> = dense.coeffs.clone();
        base.resize(len, BigInt::zero());
        base.truncate(len);
        let mut out = vec![BigInt::zero(); len];
        for (i, c) in sparse.coeffs.iter().enumerate() {
            if c.is_zero() || i >= len {
                continue;
            }
            for n in i..len {
                let v = &base[n - i];
                if !v.is_zero() {
                    out[n] += v * c;
                }
            }
        }
        IntegerQSeries {
            offset,
            coeffs: out,
            order,
        }
    }
}
