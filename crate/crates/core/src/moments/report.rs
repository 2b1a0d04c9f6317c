use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bseries::{l_f_value, IndexWeight, LfkEstimate};
use super::family::{window_bounds, DiscriminantFamily};
use crate::arith::prime_divisors;
use crate::error::{Error, Result};
use crate::forms::{Eigenform, FormInfo};
use crate::lfunc::{central_l_in, LValueResult, TruncationPolicy};
use crate::numeric::compensated_sum;

/// Version of the JSON report layouts.
pub const SCHEMA_VERSION: u32 = 1;

/// Smallest zero threshold ever used.
pub const MIN_ZERO_THRESHOLD: f64 = 1e-8;

/// Default `x` grid of the `B(x)` extrapolation.
pub const DEFAULT_LFK_GRID: [f64; 3] = [1e5, 2e5, 4e5];

/// `C_N = 3 gamma(4N) / (pi^2 N) prod_{p | 4N} (1 - p^{-2})^{-1}` and `gamma(4N)`.
pub fn constant_c_n(level: u64) -> Result<(f64, u64)> {
    let gamma = DiscriminantFamily::new(level, 1)?.gamma();
    let euler: f64 = prime_divisors(4 * level)?
        .iter()
        .map(|&p| 1.0 / (1.0 - 1.0 / (p * p) as f64))
        .product();
    Ok((3.0 * gamma as f64 / (PI * PI * level as f64) * euler, gamma))
}

/// Central values for every square-free member of `family` in `[lo, hi]`,
/// ascending in `|d|`. Evaluated in parallel; order does not depend on
/// scheduling.
pub fn scan_window(
    form: &Eigenform,
    family: &DiscriminantFamily,
    lo: u64,
    hi: u64,
    policy: &TruncationPolicy,
) -> Result<Vec<LValueResult>> {
    family
        .enumerate_abs(lo, hi, true)
        .into_par_iter()
        .map(|d| central_l_in(form, family, d, policy))
        .collect()
}

/// Default zero threshold: `max(1e-8, 1000 * max tail)`.
pub fn default_zero_threshold(records: &[LValueResult]) -> f64 {
    MIN_ZERO_THRESHOLD.max(1e3 * max_tail(records))
}

fn max_tail(records: &[LValueResult]) -> f64 {
    records.iter().map(|r| r.tail_bound).fold(0.0, f64::max)
}

/// Resolve a requested threshold, rejecting one a truncation error could reach.
pub fn resolve_zero_threshold(records: &[LValueResult], requested: Option<f64>) -> Result<f64> {
    let tail = max_tail(records);
    match requested {
        None => Ok(default_zero_threshold(records)),
        Some(t) if t > tail => Ok(t),
        Some(t) => Err(Error::ThresholdBelowTail { threshold: t, tail }),
    }
}

/// Options of a first-moment run.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentOptions {
    /// Family override (e.g. the opposite sign); the standard family when `None`.
    pub family: Option<DiscriminantFamily>,
    pub lfk_grid: Vec<f64>,
    pub index_weight: IndexWeight,
    pub zero_threshold: Option<f64>,
    /// Precomputed `L_f(k)`, skipping the extrapolation.
    pub lfk: Option<LfkEstimate>,
}

impl Default for MomentOptions {
    fn default() -> Self {
        MomentOptions {
            family: None,
            lfk_grid: DEFAULT_LFK_GRID.to_vec(),
            index_weight: IndexWeight::default(),
            zero_threshold: None,
            lfk: None,
        }
    }
}

/// First moment over a window with its predicted main term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub schema_version: u32,
    pub form: FormInfo,
    pub x: f64,
    pub h: f64,
    /// Integer range of `|d|`.
    pub abs_d_range: (u64, u64),
    pub family_sign: i8,
    pub gamma: u64,
    pub c_n: f64,
    pub lfk: LfkEstimate,
    pub count: u64,
    pub s_f: f64,
    pub predicted: f64,
    pub ratio: f64,
    pub nonvanishing: u64,
    pub forced_zeros: u64,
    pub zero_threshold: f64,
    /// `h^2 / X^{1.1}`.
    pub nonvanishing_floor: f64,
    /// Sum of `L^2` over the window.
    pub window_second_moment: f64,
    pub warnings: Vec<String>,
    pub records: Vec<LValueResult>,
}

impl MomentReport {
    pub fn to_csv(&self) -> String {
        records_csv(&self.records)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `d,value,tail_bound,terms` lines.
pub fn records_csv(records: &[LValueResult]) -> String {
    let mut out = String::from("d,value,tail_bound,terms\n");
    for r in records {
        let _ = writeln!(out, "{},{:e},{:e},{}", r.d, r.value, r.tail_bound, r.terms_used);
    }
    out
}

fn regime_warnings(x: f64, h: f64) -> Vec<String> {
    let mut w = Vec::new();
    if h < x.powf(0.75) {
        w.push(format!("h = {h} is below X^(3/4) = {:.1}", x.powf(0.75)));
    }
    if h > x {
        w.push(format!("h = {h} exceeds X = {x}"));
    }
    w
}

/// `S_f(X, h)`, compared with `C_N L_f(k) h`.
pub fn first_moment(
    form: &Eigenform,
    x: f64,
    h: f64,
    policy: &TruncationPolicy,
    options: &MomentOptions,
) -> Result<MomentReport> {
    let family = match &options.family {
        Some(f) => f.clone(),
        None => DiscriminantFamily::for_form(form)?,
    };
    let (lo, hi) = window_bounds(x, h)?;
    let lfk = match &options.lfk {
        Some(est) => est.clone(),
        None => l_f_value(form, &options.lfk_grid, options.index_weight, policy)?,
    };
    let (c_n, gamma) = constant_c_n(form.level())?;
    let records = scan_window(form, &family, lo, hi, policy)?;
    let zero_threshold = resolve_zero_threshold(&records, options.zero_threshold)?;
    let s_f = compensated_sum(records.iter().map(|r| r.value));
    let predicted = c_n * lfk.value * h;
    let mut warnings = regime_warnings(x, h);
    if !family.is_standard() {
        warnings.push("family sign differs from (-1)^k".into());
    }
    Ok(MomentReport {
        schema_version: SCHEMA_VERSION,
        form: form.info(),
        x,
        h,
        abs_d_range: (lo, hi),
        family_sign: family.sign(),
        gamma,
        c_n,
        count: records.len() as u64,
        s_f,
        predicted,
        ratio: s_f / predicted,
        nonvanishing: records
            .iter()
            .filter(|r| r.value.abs() > zero_threshold)
            .count() as u64,
        forced_zeros: records.iter().filter(|r| r.forced_zero).count() as u64,
        zero_threshold,
        nonvanishing_floor: h * h / x.powf(1.1),
        window_second_moment: compensated_sum(records.iter().map(|r| r.value * r.value)),
        warnings,
        lfk,
        records,
    })
}

/// `sum |L|^2` over square-free `d` in the family with `|d| <= X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondMomentReport {
    pub schema_version: u32,
    pub form: FormInfo,
    pub x: f64,
    pub family_sign: i8,
    pub count: u64,
    pub second_moment: f64,
    /// `second_moment / X^{1.1}`.
    pub normalized: f64,
    pub records: Vec<LValueResult>,
}

pub fn second_moment(
    form: &Eigenform,
    x: f64,
    policy: &TruncationPolicy,
    family: Option<&DiscriminantFamily>,
) -> Result<SecondMomentReport> {
    let family = match family {
        Some(f) => f.clone(),
        None => DiscriminantFamily::for_form(form)?,
    };
    if !(x >= 1.0) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!("X must be at least 1, got {x}")));
    }
    let records = scan_window(form, &family, 1, x.floor() as u64, policy)?;
    let second = compensated_sum(records.iter().map(|r| r.value * r.value));
    Ok(SecondMomentReport {
        schema_version: SCHEMA_VERSION,
        form: form.info(),
        x,
        family_sign: family.sign(),
        count: records.len() as u64,
        second_moment: second,
        normalized: second / x.powf(1.1),
        records,
    })
}

/// `N_f(X, h)` with the family count and the `h^2/X^{1.1}` comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonvanishingReport {
    pub x: f64,
    pub h: f64,
    pub family_count: u64,
    pub nonvanishing: u64,
    pub zero_threshold: f64,
    pub max_tail: f64,
    pub floor: f64,
}

pub fn nonvanishing_count(
    form: &Eigenform,
    x: f64,
    h: f64,
    policy: &TruncationPolicy,
    zero_threshold: Option<f64>,
    family: Option<&DiscriminantFamily>,
) -> Result<NonvanishingReport> {
    let family = match family {
        Some(f) => f.clone(),
        None => DiscriminantFamily::for_form(form)?,
    };
    let (lo, hi) = window_bounds(x, h)?;
    let records = scan_window(form, &family, lo, hi, policy)?;
    let threshold = resolve_zero_threshold(&records, zero_threshold)?;
    Ok(NonvanishingReport {
        x,
        h,
        family_count: records.len() as u64,
        nonvanishing: records.iter().filter(|r| r.value.abs() > threshold).count() as u64,
        zero_threshold: threshold,
        max_tail: max_tail(&records),
        floor: h * h / x.powf(1.1),
    })
}
