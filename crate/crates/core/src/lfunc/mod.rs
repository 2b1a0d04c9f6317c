//! Central values `L(k, f, chi_d)` from the smoothed functional-equation
//! sums `A(Q, chi_d) = sum_n a_n n^{-k} chi_d(n) V(2 pi n / Q)`.
//!
//! With `q = |d| sqrt(N)` and `w_d = w chi_d(-N)`,
//! `L = A(Q) + w_d A(q^2 / Q)` for every `Q > 0`. At `Q = q` this is
//! `2 A(q)` when `w_d = +1` and exactly zero when `w_d = -1`.

mod character;
mod kernel;
mod truncation;

use serde::{Deserialize, Serialize};

pub use character::{CharacterTable, TwistCharacter, MEMO_PERIOD_LIMIT};
pub use kernel::{kernel_v, SmoothingKernel};
pub use truncation::{
    certified_tail, truncation_cutoff, Cutoff, TruncationPolicy, CUTOFF_GRID_STEP,
    DIVISOR_REMAINDER_CONSTANT,
};

use crate::arith::kronecker;
use crate::error::{Error, Result};
use crate::forms::Eigenform;
use crate::moments::DiscriminantFamily;
use crate::numeric::CompensatedSum;
use std::f64::consts::PI;

/// Documented ceiling for the monitored ratio `|A(Q)| / Q^{1/2}`.
pub const ABEL_MONITOR_THRESHOLD: f64 = 4.0;

/// A truncated smoothed sum with its certified tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothedSum {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: u64,
}

/// `A(Q, chi)` for the character tabulated in `table`.
pub fn a_sum(
    form: &Eigenform,
    table: &CharacterTable,
    q: f64,
    policy: &TruncationPolicy,
) -> Result<SmoothedSum> {
    let k = form.half_weight();
    let cutoff = truncation_cutoff(q, policy, k)?;
    let n_max = cutoff.n_max;
    if n_max > form.max_n() {
        return Err(Error::InsufficientTable {
            required: n_max,
            available: form.max_n(),
        });
    }
    let rebuilt;
    let table = if table.covers(n_max) {
        table
    } else {
        rebuilt = table.character().table(n_max);
        &rebuilt
    };
    let kernel = SmoothingKernel::new(k)?;
    let scale = 2.0 * PI / q;
    let weights = &form.dirichlet_table()[..=n_max as usize];
    let mut acc = CompensatedSum::new();
    for (n, &w) in weights.iter().enumerate().skip(1) {
        if w == 0.0 {
            continue;
        }
        let s = table.get(n as u64);
        if s == 0 {
            continue;
        }
        acc.add(w * s as f64 * kernel.eval(scale * n as f64));
    }
    Ok(SmoothedSum {
        value: acc.value(),
        tail_bound: cutoff.tail_bound,
        terms: n_max,
    })
}

/// `A(Q, chi_d)` for a fundamental discriminant `d`.
pub fn a_sum_for(form: &Eigenform, d: i64, q: f64, policy: &TruncationPolicy) -> Result<SmoothedSum> {
    let chi = TwistCharacter::kronecker(d)?;
    let n_max = truncation_cutoff(q, policy, form.half_weight())?.n_max;
    a_sum(form, &chi.table(n_max), q, policy)
}

/// `w_d = w chi_d(-N)`.
pub fn twist_root_number(form: &Eigenform, d: i64) -> i8 {
    form.root_number() * kronecker(d, -(form.level() as i64))
}

/// A central twisted value with its error accounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LValueResult {
    pub d: i64,
    pub form: String,
    pub value: f64,
    pub tail_bound: f64,
    pub terms_used: u64,
    /// Sign of the twisted functional equation.
    pub root_number: i8,
    /// True when the value is zero because `root_number = -1`.
    pub forced_zero: bool,
    pub q_split_residual: Option<f64>,
}

pub fn form_label(form: &Eigenform) -> String {
    format!("N{}k{}", form.level(), form.weight())
}

/// `L(k, f, chi_d)` for `d` in the standard family of `form`.
pub fn central_l(form: &Eigenform, d: i64, policy: &TruncationPolicy) -> Result<LValueResult> {
    central_l_in(form, &DiscriminantFamily::for_form(form)?, d, policy)
}

/// `L(k, f, chi_d)` for `d` in `family`.
pub fn central_l_in(
    form: &Eigenform,
    family: &DiscriminantFamily,
    d: i64,
    policy: &TruncationPolicy,
) -> Result<LValueResult> {
    family.admit(d)?;
    let chi = TwistCharacter::kronecker(d)?;
    let q = symmetric_point(form, d);
    let n_max = truncation_cutoff(q, policy, form.half_weight())?.n_max;
    let a = a_sum(form, &chi.table(n_max), q, policy)?;
    let root_number = twist_root_number(form, d);
    let forced_zero = root_number < 0;
    Ok(LValueResult {
        d,
        form: form_label(form),
        value: if forced_zero { 0.0 } else { 2.0 * a.value },
        tail_bound: 2.0 * a.tail_bound,
        terms_used: a.terms,
        root_number,
        forced_zero,
        q_split_residual: None,
    })
}

/// `|d| sqrt(N)`.
pub fn symmetric_point(form: &Eigenform, d: i64) -> f64 {
    d.unsigned_abs() as f64 * (form.level() as f64).sqrt()
}

/// `A(Q) + w_d A(q^2/Q) - L` together with the tail budget it should respect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QSplit {
    pub q: f64,
    pub dual_q: f64,
    pub a_q: f64,
    pub a_dual: f64,
    pub residual: f64,
    /// Sum of the certified tails of both partial sums and of the value.
    pub tail_budget: f64,
}

pub fn q_split_residual(
    form: &Eigenform,
    central: &LValueResult,
    q: f64,
    policy: &TruncationPolicy,
) -> Result<QSplit> {
    let d = central.d;
    let chi = TwistCharacter::kronecker(d)?;
    let center = symmetric_point(form, d);
    let dual_q = center * center / q;
    let n_max = truncation_cutoff(q.max(dual_q), policy, form.half_weight())?.n_max;
    let table = chi.table(n_max);
    let a = a_sum(form, &table, q, policy)?;
    let b = a_sum(form, &table, dual_q, policy)?;
    Ok(QSplit {
        q,
        dual_q,
        a_q: a.value,
        a_dual: b.value,
        residual: a.value + central.root_number as f64 * b.value - central.value,
        tail_budget: a.tail_bound + b.tail_bound + central.tail_bound,
    })
}

/// Which sign makes `A(Q) + s A(q^2/Q)` independent of `Q`, judged at
/// `Q = q/2` and `Q = 2q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSign {
    pub sign: i8,
    /// `|A(q/2) + A(2q) - 2 A(q)|`.
    pub plus_residual: f64,
    /// `|A(q/2) - A(2q)|`.
    pub minus_residual: f64,
    /// Sum of the certified tails involved.
    pub tail_budget: f64,
    pub center: SmoothedSum,
}

impl SplitSign {
    /// Residual of the chosen sign.
    pub fn residual(&self) -> f64 {
        if self.sign > 0 {
            self.plus_residual
        } else {
            self.minus_residual
        }
    }

    /// Central value implied by the chosen sign.
    pub fn value(&self) -> f64 {
        if self.sign > 0 {
            2.0 * self.center.value
        } else {
            0.0
        }
    }
}

/// Determine the functional-equation sign numerically for a character whose
/// symmetric point is `q`.
pub fn split_sign(
    form: &Eigenform,
    chi: &TwistCharacter,
    q: f64,
    policy: &TruncationPolicy,
) -> Result<SplitSign> {
    let n_max = truncation_cutoff(2.0 * q, policy, form.half_weight())?.n_max;
    let table = chi.table(n_max);
    let lo = a_sum(form, &table, 0.5 * q, policy)?;
    let mid = a_sum(form, &table, q, policy)?;
    let hi = a_sum(form, &table, 2.0 * q, policy)?;
    let plus_residual = (lo.value + hi.value - 2.0 * mid.value).abs();
    let minus_residual = (lo.value - hi.value).abs();
    Ok(SplitSign {
        sign: if plus_residual <= minus_residual { 1 } else { -1 },
        plus_residual,
        minus_residual,
        tail_budget: lo.tail_bound + hi.tail_bound + 2.0 * mid.tail_bound,
        center: mid,
    })
}

/// The untwisted root number `w`, read off the split of `L(k, f)`.
pub fn infer_root_number(form: &Eigenform, policy: &TruncationPolicy) -> Result<i8> {
    let q = (form.level() as f64).sqrt();
    let s = split_sign(form, &TwistCharacter::kronecker(1)?, q, policy)?;
    Ok(s.sign)
}

/// `|A(Q, chi_d)| / Q^{1/2}`.
pub fn abel_ratio(form: &Eigenform, d: i64, q: f64, policy: &TruncationPolicy) -> Result<f64> {
    Ok(a_sum_for(form, d, q, policy)?.value.abs() / q.sqrt())
}

/// Monitoring record for the `A(Q) << Q^{1/2}` scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbelReport {
    pub max_ratio: f64,
    pub threshold: f64,
    /// `(d, Q, ratio)` above the threshold.
    pub exceeded: Vec<(i64, f64, f64)>,
}

/// Scan `|A(Q)|/Q^{1/2}` over `d` in `ds` and `Q = factor * |d| sqrt(N)`.
pub fn abel_monitor(
    form: &Eigenform,
    ds: &[i64],
    factors: &[f64],
    policy: &TruncationPolicy,
) -> Result<AbelReport> {
    let mut report = AbelReport {
        max_ratio: 0.0,
        threshold: ABEL_MONITOR_THRESHOLD,
        exceeded: Vec::new(),
    };
    for &d in ds {
        for &f in factors {
            let q = f * symmetric_point(form, d);
            let r = abel_ratio(form, d, q, policy)?;
            report.max_ratio = report.max_ratio.max(r);
            if r > ABEL_MONITOR_THRESHOLD {
                report.exceeded.push((d, q, r));
            }
        }
    }
    Ok(report)
}
