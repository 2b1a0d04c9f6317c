//! Browser bindings. Each export returns a JSON document for the page in
//! `www/` to plot; the `*_json` functions hold the logic and run natively.

use quadtwist::forms::{delta_coefficients, level32_form, Eigenform, DELTA_DEFAULT_CAP};
use quadtwist::lfunc::{
    central_l_in, q_split_residual, symmetric_point, truncation_cutoff, TruncationPolicy,
};
use quadtwist::moments::{scan_window, DiscriminantFamily};
use quadtwist::waldspurger::{gap_statistics, tunnell_g};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest `|d|` the page may ask for; keeps a scan under a second or so.
pub const MAX_ABS_D: u64 = 5000;
pub const MAX_GAP_N: u64 = 200_000;

fn policy() -> TruncationPolicy {
    TruncationPolicy {
        tail_target: 1e-10,
        ..TruncationPolicy::default()
    }
}

fn build_form(name: &str, q_max: f64) -> Result<Eigenform, String> {
    let k = match name {
        "x32" => 1,
        "delta" => 6,
        other => return Err(format!("unknown form {other:?}")),
    };
    let n_max = truncation_cutoff(q_max, &policy(), k).map_err(|e| e.to_string())?.n_max;
    match name {
        "x32" => level32_form(n_max),
        _ => delta_coefficients(n_max, DELTA_DEFAULT_CAP),
    }
    .map_err(|e| e.to_string())
}

fn family(form: &Eigenform, sign: i8) -> Result<DiscriminantFamily, String> {
    let fam = DiscriminantFamily::for_form(form).map_err(|e| e.to_string())?;
    if sign == 0 {
        Ok(fam)
    } else {
        fam.with_sign(sign).map_err(|e| e.to_string())
    }
}

fn level_of(name: &str) -> f64 {
    if name == "x32" {
        32.0
    } else {
        1.0
    }
}

#[derive(Serialize)]
struct SplitPoint {
    factor: f64,
    a_q: f64,
    a_dual: f64,
    residual: f64,
    budget: f64,
}

#[derive(Serialize)]
struct SplitCurve {
    d: i64,
    center: f64,
    root_number: i8,
    value: f64,
    tail_bound: f64,
    points: Vec<SplitPoint>,
}

/// `A(Q)`, `A(q^2/Q)` and the split residual for `Q = f q`, `f` log-spaced
/// in `[1/8, 8]`.
pub fn q_split_json(form: &str, d: i64, family_sign: i8, points: u32) -> Result<String, String> {
    if d.unsigned_abs() > MAX_ABS_D {
        return Err(format!("|d| is limited to {MAX_ABS_D} here"));
    }
    let points = points.clamp(3, 200);
    let q = d.unsigned_abs() as f64 * level_of(form).sqrt();
    let f = build_form(form, 8.0 * q)?;
    let fam = family(&f, family_sign)?;
    let central = central_l_in(&f, &fam, d, &policy()).map_err(|e| e.to_string())?;
    let center = symmetric_point(&f, d);
    let points = (0..points)
        .map(|i| {
            let factor = 2f64.powf(-3.0 + 6.0 * i as f64 / (points - 1) as f64);
            let s = q_split_residual(&f, &central, factor * center, &policy())
                .map_err(|e| e.to_string())?;
            Ok(SplitPoint {
                factor,
                a_q: s.a_q,
                a_dual: s.a_dual,
                residual: s.residual,
                budget: s.tail_budget,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    serde_json::to_string(&SplitCurve {
        d,
        center,
        root_number: central.root_number,
        value: central.value,
        tail_bound: central.tail_bound,
        points,
    })
    .map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct ScanPoint {
    d: i64,
    value: f64,
    tail_bound: f64,
}

/// Central values over the family with `lo <= |d| <= hi`.
pub fn scan_json(form: &str, lo: u64, hi: u64, family_sign: i8) -> Result<String, String> {
    if hi > MAX_ABS_D || lo > hi {
        return Err(format!("need 1 <= lo <= hi <= {MAX_ABS_D}"));
    }
    let f = build_form(form, hi as f64 * level_of(form).sqrt())?;
    let fam = family(&f, family_sign)?;
    let records = scan_window(&f, &fam, lo, hi, &policy()).map_err(|e| e.to_string())?;
    let points: Vec<ScanPoint> = records
        .iter()
        .map(|r| ScanPoint {
            d: r.d,
            value: r.value,
            tail_bound: r.tail_bound,
        })
        .collect();
    serde_json::to_string(&points).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct GapProfile {
    n_max: u64,
    max_gap: u64,
    max_gap_at: u64,
    max_ratio: f64,
    max_ratio_at: u64,
    /// Record-setting runs: `(n, i(n))` where `i(n)` exceeds every earlier run.
    records: Vec<(u64, u64)>,
}

/// Zero runs of the weight 3/2 Tunnell form up to `n_max`.
pub fn gaps_json(n_max: u64) -> Result<String, String> {
    if !(1..=MAX_GAP_N).contains(&n_max) {
        return Err(format!("need 1 <= n <= {MAX_GAP_N}"));
    }
    let g = tunnell_g(n_max + n_max / 8 + 64).map_err(|e| e.to_string())?;
    let coeffs = g.coefficients().map_err(|e| e.to_string())?;
    let table = gap_statistics(&coeffs, n_max).map_err(|e| e.to_string())?;
    let mut best = 0;
    let records = table
        .gaps
        .iter()
        .filter(|&&(_, i)| {
            let new = i > best;
            best = best.max(i);
            new
        })
        .copied()
        .collect();
    serde_json::to_string(&GapProfile {
        n_max,
        max_gap: table.max_gap,
        max_gap_at: table.max_gap_at,
        max_ratio: table.max_ratio,
        max_ratio_at: table.max_ratio_at,
        records,
    })
    .map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn q_split(form: &str, d: i64, family_sign: i8, points: u32) -> Result<String, JsError> {
    q_split_json(form, d, family_sign, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn scan(form: &str, lo: u64, hi: u64, family_sign: i8) -> Result<String, JsError> {
    scan_json(form, lo, hi, family_sign).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn gaps(n_max: u64) -> Result<String, JsError> {
    gaps_json(n_max).map_err(|e| JsError::new(&e))
}
