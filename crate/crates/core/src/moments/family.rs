use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::arith::{is_squarefree, unit_square_classes};
use crate::error::{Error, Result};
use crate::forms::Eigenform;

/// The discriminants `d` with `(-1)^k d > 0` and `d = v^2 mod 4N` for a unit
/// `v`. The sign can be overridden to study the opposite family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscriminantFamily {
    level: u64,
    half_weight: u32,
    sign: i8,
    classes: BTreeSet<u64>,
}

impl DiscriminantFamily {
    pub fn new(level: u64, half_weight: u32) -> Result<Self> {
        if level == 0 || half_weight == 0 {
            return Err(Error::InvalidArgument(
                "level and weight must be positive".into(),
            ));
        }
        Ok(DiscriminantFamily {
            level,
            half_weight,
            sign: if half_weight.is_multiple_of(2) { 1 } else { -1 },
            classes: unit_square_classes(4 * level)?,
        })
    }

    pub fn for_form(form: &Eigenform) -> Result<Self> {
        Self::new(form.level(), form.half_weight())
    }

    /// The same residue classes with discriminants of sign `sign`.
    pub fn with_sign(mut self, sign: i8) -> Result<Self> {
        if sign != 1 && sign != -1 {
            return Err(Error::InvalidArgument("sign must be ±1".into()));
        }
        self.sign = sign;
        Ok(self)
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn half_weight(&self) -> u32 {
        self.half_weight
    }

    pub fn modulus(&self) -> u64 {
        4 * self.level
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// True when the sign is `(-1)^k`.
    pub fn is_standard(&self) -> bool {
        self.sign == if self.half_weight.is_multiple_of(2) { 1 } else { -1 }
    }

    /// `gamma(4N)`, the number of admissible residue classes.
    pub fn gamma(&self) -> u64 {
        self.classes.len() as u64
    }

    pub fn classes(&self) -> &BTreeSet<u64> {
        &self.classes
    }

    /// Sign and residue conditions, without square-freeness.
    pub fn contains(&self, d: i64) -> bool {
        d != 0
            && d.signum() as i8 == self.sign
            && self
                .classes
                .contains(&(d.rem_euclid(self.modulus() as i64) as u64))
    }

    /// Full membership check with a reason on failure.
    pub fn admit(&self, d: i64) -> Result<()> {
        let reject = |reason: String| Err(Error::Inadmissible { d, reason });
        if d == 0 || d.signum() as i8 != self.sign {
            return reject(format!(
                "sign must be {} for this family",
                if self.sign > 0 { "positive" } else { "negative" }
            ));
        }
        if !self.contains(d) {
            return reject(format!("not a unit square modulo {}", self.modulus()));
        }
        if !is_squarefree(d.unsigned_abs()) {
            return reject("not square-free".into());
        }
        Ok(())
    }

    /// Members with `lo <= |d| <= hi`, ascending in `|d|`.
    pub fn enumerate_abs(&self, lo: u64, hi: u64, squarefree_only: bool) -> Vec<i64> {
        (lo.max(1)..=hi)
            .map(|a| self.sign as i64 * a as i64)
            .filter(|&d| self.contains(d))
            .filter(|&d| !squarefree_only || is_squarefree(d.unsigned_abs()))
            .collect()
    }

    /// Members with `X <= |d| <= X + h`, decided on integers
    /// `ceil(X) <= |d| <= floor(X + h)`.
    pub fn enumerate(&self, x: f64, h: f64, squarefree_only: bool) -> Result<Vec<i64>> {
        let (lo, hi) = window_bounds(x, h)?;
        Ok(self.enumerate_abs(lo, hi, squarefree_only))
    }
}

/// Integer range `[ceil(X), floor(X + h)]` of `|d|`, validating `X >= 1`, `h >= 0`.
pub fn window_bounds(x: f64, h: f64) -> Result<(u64, u64)> {
    if !(x >= 1.0) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!("X must be at least 1, got {x}")));
    }
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("h must be nonnegative, got {h}")));
    }
    let lo = x.ceil() as u64;
    let hi = (x + h).floor() as u64;
    Ok((lo, hi))
}
