//! The weight-3/2 form `g = eta(8z) eta(16z) theta(2z)` paired with the
//! level-32 form, the ratio test `a_g(n)^2 / (L * n^e)` and gap statistics.

use std::fmt::Write as _;

use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::is_squarefree;
use crate::error::{Error, Result};
use crate::forms::{eta_series, sparse_product, theta_series, Eigenform, FormInfo, IntegerQSeries};
use crate::lfunc::{form_label, split_sign, LValueResult, TruncationPolicy, TwistCharacter};
use crate::moments::{MIN_ZERO_THRESHOLD, SCHEMA_VERSION};
use crate::numeric::mean_and_cv;

/// Gate on split residuals: at most this many times the certified tails.
pub const SPLIT_GATE_FACTOR: f64 = 100.0;

/// Ratios are formed only when `|L|` exceeds this multiple of its tail.
pub const RATIO_TAIL_FACTOR: f64 = 1e3;

/// Coefficient of variation below which a class counts as verified.
pub const RATIO_CV_LIMIT: f64 = 1e-6;

/// Usable discriminants a class needs before its statistics mean anything.
pub const MIN_CLASS_SIZE: usize = 3;

/// A half-integral weight form given by an exact q-expansion.
#[derive(Debug, Clone)]
pub struct HalfIntegralForm {
    pub level: u64,
    /// `2k + 1` for weight `(2k + 1)/2`.
    pub weight_numerator: u32,
    pub construction: String,
    pub series: IntegerQSeries,
}

impl HalfIntegralForm {
    pub fn coefficient(&self, n: u64) -> Option<i64> {
        self.series.coeff(n).and_then(|c| c.to_i64())
    }

    pub fn max_n(&self) -> u64 {
        self.series.order().saturating_sub(1)
    }

    /// Coefficients `a(0..=max_n)` as machine integers.
    pub fn coefficients(&self) -> Result<Vec<i64>> {
        (0..=self.max_n())
            .map(|n| {
                let c = self.series.coeff(n).unwrap_or_else(Zero::zero);
                c.to_i64().ok_or(Error::CoefficientOverflow(n))
            })
            .collect()
    }
}

/// `eta(8z) eta(16z) theta(2z)` below `q^order`: weight 3/2, level 128.
pub fn tunnell_g(order: u64) -> Result<HalfIntegralForm> {
    if order < 2 {
        return Err(Error::InvalidArgument("order must be at least 2".into()));
    }
    let inner = order - 1;
    let factors = vec![eta_series(8, inner)?, eta_series(16, inner)?, theta_series(2, inner)?];
    Ok(HalfIntegralForm {
        level: 128,
        weight_numerator: 3,
        construction: "eta(8z) eta(16z) theta(2z)".into(),
        series: sparse_product(1, factors, order)?,
    })
}

/// `n -> (-4/n)^k chi_d(n)`.
pub fn composite_character(k: u32, d: i64) -> Result<TwistCharacter> {
    TwistCharacter::composite(k, d)
}

/// Whether `a_n (-4/n) = a_n` on the whole table, i.e. the form equals its
/// own twist by `(-4/.)`.
pub fn is_minus_four_invariant(form: &Eigenform) -> bool {
    form.coefficients()
        .iter()
        .enumerate()
        .skip(1)
        .all(|(n, &a)| a == 0 || n % 4 == 1)
}

/// Central value of `f` twisted by an arbitrary real character of
/// conductor `c`, taking `Q = c sqrt(N)` and requiring the two-point split
/// to hold within [`SPLIT_GATE_FACTOR`] times the certified tails.
pub fn twisted_l_general(
    form: &Eigenform,
    chi: &TwistCharacter,
    conductor: u64,
    policy: &TruncationPolicy,
) -> Result<LValueResult> {
    if conductor == 0 {
        return Err(Error::InvalidArgument("conductor must be positive".into()));
    }
    let q = conductor as f64 * (form.level() as f64).sqrt();
    let split = split_sign(form, chi, q, policy)?;
    let gate = SPLIT_GATE_FACTOR * split.tail_budget;
    if !(split.residual() <= gate) {
        return Err(Error::SplitGate {
            conductor,
            residual: split.residual(),
            gate,
        });
    }
    Ok(LValueResult {
        d: chi.d(),
        form: form_label(form),
        value: split.value(),
        tail_bound: 2.0 * split.center.tail_bound,
        terms_used: split.center.terms,
        root_number: split.sign,
        forced_zero: split.sign < 0,
        q_split_residual: Some(split.residual()),
    })
}

/// Normalizations of `rho = a_g(n)^2 / (L * D)` that are tried.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioNormalization {
    /// `D = d^k` with `d` signed.
    SignedPower,
    /// `D = |d|^k`.
    AbsPower,
    /// `D = |d|^(k - 1/2)`.
    AbsHalfPower,
}

impl RatioNormalization {
    pub const ALL: [RatioNormalization; 3] = [
        RatioNormalization::SignedPower,
        RatioNormalization::AbsPower,
        RatioNormalization::AbsHalfPower,
    ];

    fn denominator(self, d: i64, k: u32) -> f64 {
        let a = d.unsigned_abs() as f64;
        match self {
            RatioNormalization::SignedPower => (d as f64).powi(k as i32),
            RatioNormalization::AbsPower => a.powi(k as i32),
            RatioNormalization::AbsHalfPower => a.powf(k as f64 - 0.5),
        }
    }
}

/// One usable discriminant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEntry {
    /// `|d| mod 8`.
    pub class: u8,
    pub d: i64,
    pub ag: i64,
    pub l_value: f64,
    pub tail_bound: f64,
    /// Under the reported normalization.
    pub ratio: f64,
}

/// A discriminant left out of the ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedEntry {
    pub class: u8,
    pub d: i64,
    pub ag: i64,
    pub l_value: f64,
    pub reason: String,
    /// For `a_g = 0`: whether `|L|` is below the zero threshold.
    pub vanishing_coherent: Option<bool>,
}

/// Per-class constancy statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub class: u8,
    pub usable: usize,
    pub excluded: usize,
    pub kappa_hat: Option<f64>,
    pub cv: Option<f64>,
    /// Coefficient of variation under each normalization, in `RatioNormalization::ALL` order.
    pub cv_by_normalization: Vec<Option<f64>>,
    pub conclusive: bool,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub schema_version: u32,
    pub form: FormInfo,
    pub g_construction: String,
    pub max_d: u64,
    pub effective_conductor_factor: u64,
    pub normalization: RatioNormalization,
    pub zero_threshold: f64,
    pub classes: Vec<ClassSummary>,
    pub entries: Vec<RatioEntry>,
    pub excluded: Vec<ExcludedEntry>,
    /// Even `n`, outside the odd-index correspondence of `g`.
    pub even_skipped: u64,
}

impl RatioReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("class,d,ag,L,ratio\n");
        for e in &self.entries {
            let _ = writeln!(out, "{},{},{},{:e},{:e}", e.class, e.d, e.ag, e.l_value, e.ratio);
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// True when every `a_g = 0` exclusion has a vanishing `L`.
    pub fn vanishing_coherent(&self) -> bool {
        self.excluded
            .iter()
            .all(|e| e.vanishing_coherent != Some(false))
    }
}

/// `(n*, a_g(n), L)` for odd square-free `n <= max_d`, `n* = ±n = 1 mod 4`.
struct Evaluated {
    d: i64,
    ag: i64,
    l: LValueResult,
}

/// Ratio test for `g` against `f` over odd square-free `n <= max_d`,
/// twisting by `(-4/.)^k chi_{n*}`.
pub fn waldspurger_ratios(
    g: &HalfIntegralForm,
    f: &Eigenform,
    max_d: u64,
    policy: &TruncationPolicy,
) -> Result<RatioReport> {
    if g.max_n() < max_d {
        return Err(Error::InsufficientTable {
            required: max_d,
            available: g.max_n(),
        });
    }
    let k = f.half_weight();
    let factor = if k % 2 == 1 && !is_minus_four_invariant(f) { 4 } else { 1 };
    let odd: Vec<u64> = (1..=max_d).filter(|n| n % 2 == 1 && is_squarefree(*n)).collect();
    let even_skipped = (1..=max_d).filter(|n| n % 2 == 0 && is_squarefree(*n)).count() as u64;
    let evaluated: Vec<Evaluated> = odd
        .into_par_iter()
        .map(|n| {
            let d = if n % 4 == 1 { n as i64 } else { -(n as i64) };
            let chi = composite_character(k, d)?;
            let l = twisted_l_general(f, &chi, factor * n, policy)?;
            let ag = g.coefficient(n).ok_or(Error::CoefficientOverflow(n))?;
            Ok(Evaluated { d, ag, l })
        })
        .collect::<Result<_>>()?;
    let max_tail = evaluated.iter().map(|e| e.l.tail_bound).fold(0.0, f64::max);
    let zero_threshold = MIN_ZERO_THRESHOLD.max(1e3 * max_tail);

    let class_of = |d: i64| (d.unsigned_abs() % 8) as u8;
    let mut usable: Vec<&Evaluated> = Vec::new();
    let mut excluded = Vec::new();
    for e in &evaluated {
        if e.ag == 0 {
            excluded.push(ExcludedEntry {
                class: class_of(e.d),
                d: e.d,
                ag: 0,
                l_value: e.l.value,
                reason: "a_g = 0".into(),
                vanishing_coherent: Some(e.l.value.abs() <= zero_threshold),
            });
        } else if !(e.l.value.abs() > RATIO_TAIL_FACTOR * e.l.tail_bound) {
            excluded.push(ExcludedEntry {
                class: class_of(e.d),
                d: e.d,
                ag: e.ag,
                l_value: e.l.value,
                reason: "L not above 1e3 x tail bound".into(),
                vanishing_coherent: None,
            });
        } else {
            usable.push(e);
        }
    }

    let ratios = |norm: RatioNormalization, subset: &[&Evaluated]| -> Vec<f64> {
        subset
            .iter()
            .map(|e| (e.ag * e.ag) as f64 / (e.l.value * norm.denominator(e.d, k)))
            .collect()
    };
    let classes_present: Vec<u8> = vec![1, 3, 5, 7];
    let by_class = |c: u8| -> Vec<&Evaluated> {
        usable.iter().copied().filter(|e| class_of(e.d) == c).collect()
    };
    // Pick the normalization with the smallest worst-case spread over the
    // conclusive classes.
    let normalization = RatioNormalization::ALL
        .into_iter()
        .min_by(|a, b| {
            let worst = |norm: RatioNormalization| {
                classes_present
                    .iter()
                    .map(|&c| by_class(c))
                    .filter(|s| s.len() >= MIN_CLASS_SIZE)
                    .map(|s| mean_and_cv(&ratios(norm, &s)).1)
                    .fold(0.0, f64::max)
            };
            worst(*a).total_cmp(&worst(*b))
        })
        .expect("three normalizations");

    let classes = classes_present
        .iter()
        .map(|&c| {
            let subset = by_class(c);
            let stats = |norm| (!subset.is_empty()).then(|| mean_and_cv(&ratios(norm, &subset)));
            let chosen = stats(normalization);
            let conclusive = subset.len() >= MIN_CLASS_SIZE;
            ClassSummary {
                class: c,
                usable: subset.len(),
                excluded: excluded.iter().filter(|e| e.class == c).count(),
                kappa_hat: chosen.map(|s| s.0),
                cv: chosen.map(|s| s.1),
                cv_by_normalization: RatioNormalization::ALL
                    .iter()
                    .map(|&n| stats(n).map(|s| s.1))
                    .collect(),
                conclusive,
                verified: conclusive
                    && chosen.is_some_and(|(m, cv)| cv < RATIO_CV_LIMIT && m != 0.0),
            }
        })
        .collect();

    let mut entries: Vec<RatioEntry> = usable
        .iter()
        .map(|e| RatioEntry {
            class: class_of(e.d),
            d: e.d,
            ag: e.ag,
            l_value: e.l.value,
            tail_bound: e.l.tail_bound,
            ratio: ratios(normalization, &[e])[0],
        })
        .collect();
    entries.sort_by_key(|e| (e.class, e.d.unsigned_abs()));
    excluded.sort_by_key(|e| (e.class, e.d.unsigned_abs()));

    Ok(RatioReport {
        schema_version: SCHEMA_VERSION,
        form: f.info(),
        g_construction: g.construction.clone(),
        max_d,
        effective_conductor_factor: factor,
        normalization,
        zero_threshold,
        classes,
        entries,
        excluded,
        even_skipped,
    })
}

/// Runs of vanishing coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapTable {
    pub schema_version: u32,
    pub n_max: u64,
    /// `(n, i(n))` for every `n <= n_max` with `i(n) > 0`.
    pub gaps: Vec<(u64, u64)>,
    pub max_gap: u64,
    pub max_gap_at: u64,
    /// `max i(n) / n^0.8`.
    pub max_ratio: f64,
    pub max_ratio_at: u64,
    /// True when a run reaches the end of the supplied coefficients, so its
    /// length is only a lower bound.
    pub truncated: bool,
}

impl GapTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,gap\n");
        for (n, g) in &self.gaps {
            let _ = writeln!(out, "{n},{g}");
        }
        out
    }

    pub fn gap(&self, n: u64) -> u64 {
        self.gaps
            .binary_search_by_key(&n, |&(m, _)| m)
            .map(|i| self.gaps[i].1)
            .unwrap_or(0)
    }
}

/// `i(n)`, the number of consecutive zero coefficients starting at `n`, for
/// `1 <= n <= n_max`. `coeffs[m]` is the coefficient of `q^m`.
pub fn gap_statistics(coeffs: &[i64], n_max: u64) -> Result<GapTable> {
    if (coeffs.len() as u64) <= n_max {
        return Err(Error::InsufficientTable {
            required: n_max,
            available: (coeffs.len() as u64).saturating_sub(1),
        });
    }
    let len = coeffs.len();
    let mut run = vec![0u64; len + 1];
    for m in (1..len).rev() {
        run[m] = if coeffs[m] == 0 { run[m + 1] + 1 } else { 0 };
    }
    let mut table = GapTable {
        schema_version: SCHEMA_VERSION,
        n_max,
        gaps: Vec::new(),
        max_gap: 0,
        max_gap_at: 0,
        max_ratio: 0.0,
        max_ratio_at: 0,
        truncated: false,
    };
    for n in 1..=n_max {
        let i = run[n as usize];
        if i == 0 {
            continue;
        }
        if n + i >= len as u64 {
            table.truncated = true;
        }
        table.gaps.push((n, i));
        if i > table.max_gap {
            table.max_gap = i;
            table.max_gap_at = n;
        }
        let r = i as f64 / (n as f64).powf(0.8);
        if r > table.max_ratio {
            table.max_ratio = r;
            table.max_ratio_at = n;
        }
    }
    Ok(table)
}
