//! Execution of a validated [`RunConfig`].

use std::fmt::Write as _;

use quadtwist::forms::{
    delta_coefficients, level32_form, load_coefficients, write_coefficients, Eigenform, FormInfo,
    DELTA_DEFAULT_CAP, LEVEL32_DEFAULT_CAP,
};
use quadtwist::lfunc::{
    central_l_in, infer_root_number, q_split_residual, symmetric_point, truncation_cutoff,
    LValueResult, QSplit, TruncationPolicy,
};
use quadtwist::moments::{
    first_moment, l_f_value, records_csv, scan_window, second_moment, window_bounds,
    DiscriminantFamily, LfkEstimate, MomentOptions, SCHEMA_VERSION,
};
use quadtwist::waldspurger::{gap_statistics, tunnell_g, waldspurger_ratios};
use serde::Serialize;

use crate::config::{command_name, Command, Format, FormSelector, RunConfig, DEFAULT_GAP_MAX_N};
use crate::error::CliError;

/// The report artifact and the one-line summary of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub report: String,
    pub summary: String,
}

/// How many times a generated table is regrown after reporting itself short.
const REGROW_ATTEMPTS: usize = 8;

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (report, detail) = match cfg.command {
        Command::Coeffs => coeffs(cfg)?,
        Command::Lvalue => lvalue(cfg)?,
        Command::Scan => scan(cfg)?,
        Command::Moment => moment(cfg)?,
        Command::SecondMoment => second(cfg)?,
        Command::Lfk => lfk(cfg)?,
        Command::Waldspurger => waldspurger(cfg)?,
        Command::Gaps => gaps(cfg)?,
    };
    Ok(Outcome {
        report,
        summary: format!("{}: {detail}", command_name(cfg.command)),
    })
}

/// Smallest table that certifies a smoothed sum at `q`.
fn cutoff(cfg: &RunConfig, q: f64) -> Result<u64, CliError> {
    Ok(truncation_cutoff(q, &cfg.policy, cfg.half_weight)?.n_max)
}

/// Table needed by `B(x)` at the largest grid point: only primes up to the
/// square root of its cutoff.
fn lfk_table(cfg: &RunConfig) -> Result<u64, CliError> {
    let uncapped = TruncationPolicy {
        hard_cap: u64::MAX,
        ..cfg.policy
    };
    let x_max = cfg.x_grid.last().copied().unwrap_or(1.0);
    let n = truncation_cutoff(x_max, &uncapped, cfg.half_weight)?.n_max;
    Ok((n as f64).sqrt().ceil() as u64 + 1)
}

fn generate(cfg: &RunConfig, max_n: u64) -> Result<Eigenform, CliError> {
    let max_n = max_n.max(cfg.max_n.unwrap_or(0)).max(1);
    let requested_cap = cfg.max_n.unwrap_or(0);
    Ok(match &cfg.form {
        FormSelector::Delta => delta_coefficients(max_n, DELTA_DEFAULT_CAP.max(requested_cap))?,
        FormSelector::Level32 => {
            let cap = LEVEL32_DEFAULT_CAP.max(requested_cap);
            if max_n > cap {
                return Err(quadtwist::Error::HardCapExceeded { required: max_n, cap }.into());
            }
            level32_form(max_n)?
        }
        FormSelector::File(path) => {
            let form = load_coefficients(path)?;
            let w = infer_root_number(&form, &cfg.policy)?;
            let form = form.with_root_number(w)?;
            match cfg.max_n {
                Some(m) if m < form.max_n() => form.truncated(m),
                _ => form,
            }
        }
    })
}

/// Run `job` on a table of at least `max_n` terms, regrowing a generated
/// table when the job reports that it needs more.
fn with_form<T>(
    cfg: &RunConfig,
    max_n: u64,
    job: impl Fn(&Eigenform) -> quadtwist::Result<T>,
) -> Result<(T, FormInfo), CliError> {
    let mut size = max_n;
    for _ in 0..REGROW_ATTEMPTS {
        let form = generate(cfg, size)?;
        let short_by = match job(&form) {
            Ok(v) => return Ok((v, form.info())),
            Err(quadtwist::Error::InsufficientTable { required, .. }) => required,
            Err(quadtwist::Error::MissingPrime(p)) => p,
            Err(e) => return Err(e.into()),
        };
        if matches!(cfg.form, FormSelector::File(_)) {
            return Err(quadtwist::Error::InsufficientTable {
                required: short_by,
                available: form.max_n(),
            }
            .into());
        }
        size = short_by.max(2 * form.max_n());
    }
    Err(CliError::Usage("coefficient table kept growing without satisfying the run".into()))
}

fn family(cfg: &RunConfig, form: &Eigenform) -> quadtwist::Result<DiscriminantFamily> {
    let fam = DiscriminantFamily::for_form(form)?;
    match cfg.family_sign {
        Some(s) => fam.with_sign(s),
        None => Ok(fam),
    }
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(quadtwist::Error::from)?;
    s.push('\n');
    Ok(s)
}

fn max_tail(records: &[LValueResult]) -> f64 {
    records.iter().map(|r| r.tail_bound).fold(0.0, f64::max)
}

fn coeffs(cfg: &RunConfig) -> Result<(String, String), CliError> {
    let form = generate(cfg, cfg.max_n.unwrap_or(1))?;
    let mut buf = Vec::new();
    write_coefficients(&form, &mut buf)?;
    let info = form.info();
    let detail = format!(
        "level={} weight={} max_n={} source={}",
        info.level, info.weight, info.max_n, info.source
    );
    Ok((String::from_utf8_lossy(&buf).into_owned(), detail))
}

#[derive(Serialize)]
struct LValueDoc<'a> {
    schema_version: u32,
    form: &'a FormInfo,
    result: &'a LValueResult,
    split: &'a QSplit,
}

fn lvalue(cfg: &RunConfig) -> Result<(String, String), CliError> {
    let d = cfg.d.expect("validated");
    let q = d.unsigned_abs() as f64 * (cfg.level as f64).sqrt();
    let need = cutoff(cfg, 2.0 * q)?;
    let ((mut result, split), info) = with_form(cfg, need, |form| {
        let r = central_l_in(form, &family(cfg, form)?, d, &cfg.policy)?;
        let s = q_split_residual(form, &r, 0.5 * symmetric_point(form, d), &cfg.policy)?;
        Ok((r, s))
    })?;
    result.q_split_residual = Some(split.residual);
    let report = match cfg.format {
        Format::Csv => records_csv(std::slice::from_ref(&result)),
        Format::Json => json(&LValueDoc {
            schema_version: SCHEMA_VERSION,
            form: &info,
            result: &result,
            split: &split,
        })?,
    };
    let detail = format!(
        "d={} L={:.12e} tail={:.2e} terms={} root_number={} split_residual={:.2e}",
        d, result.value, result.tail_bound, result.terms_used, result.root_number, split.residual
    );
    Ok((report, detail))
}

#[derive(Serialize)]
struct ScanDoc<'a> {
    schema_version: u32,
    form: &'a FormInfo,
    x: f64,
    h: f64,
    abs_d_range: (u64, u64),
    family_sign: i8,
    records: &'a [LValueResult],
}

fn scan(cfg: &RunConfig) -> Result<(String, String), CliError> {
    let (x, h) = (cfg.x.expect("validated"), cfg.h.expect("validated"));
    let (lo, hi) = window_bounds(x, h)?;
    let need = cutoff(cfg, hi as f64 * (cfg.level as f64).sqrt())?;
    let ((records, sign), info) = with_form(cfg, need, |form| {
        let fam = family(cfg, form)?;
        Ok((scan_window(form, &fam, lo, hi, &cfg.policy)?, fam.sign()))
    })?;
    let report = match cfg.format {
        Format::Csv => records_csv(&records),
        Format::Json => json(&ScanDoc {
            schema_version: SCHEMA_VERSION,
            form: &info,
            x,
            h,
            abs_d_range: (lo, hi),
            family_sign: sign,
            records: &records,
        })?,
    };
    let forced = records.iter().filter(|r| r.forced_zero).count();
    let detail = format!(
        "|d| in [{lo}, {hi}] count={} forced_zeros={forced} max_tail={:.2e}",
        records.len(),
        max_tail(&records)
    );
    Ok((report, detail))
}

fn moment(cfg: &RunConfig) -> Result<(String, String), CliError> {
    let (x, h) = (cfg.x.expect("validated"), cfg.h.expect("validated"));
    let (_, hi) = window_bounds(x, h)?;
    let need = cutoff(cfg, hi as f64 * (cfg.level as f64).sqrt())?.max(lfk_table(cfg)?);
    let (r, _) = with_form(cfg, need, |form| {
        let options = MomentOptions {
            family: Some(family(cfg, form)?),
            lfk_grid: cfg.x_grid.clone(),
            index_weight: cfg.index_weight,
            zero_threshold: cfg.zero_threshold,
            lfk: None,
        };
        first_moment(form, x, h, &cfg.policy, &options)
    })?;
    let report = match cfg.format {
        Format::Csv => r.to_csv(),
        Format::Json => json(&r)?,
    };
    let detail = format!(
        "X={x} h={h} count={} S_f={:.9e} predicted={:.9e} ratio={:.6} L_f={:.6} nonvanishing={}",
        r.count, r.s_f, r.predicted, r.ratio, r.lfk.value, r.nonvanishing
    );
    Ok((report, detail))
}

fn second(cfg: &RunConfig) -> Result<(String, String), CliError> {
    let x = cfg.x.expect("validated");
    let need = cutoff(cfg, x.floor() * (cfg.level as f64).sqrt())?;
    let (r, _) = with_form(cfg, need, |form| {
        second_moment(form, x, &cfg.policy, Some(&family(cfg, form)?))
    })?;
    let report = match cfg.format {
        Format::Csv => records_csv(&r.records),
        Format::Json => json(&r)?,
    };
    let detail = format!(
        "X={x} count={} second_moment={:.9e} normalized={:.6e}",
        r.count, r.second_moment, r.normalized
    );
    Ok((report, detail))
}

#[derive(Serialize)]
struct LfkDoc<'a> {
    schema_version: u32,
    form: &'a FormInfo,
    estimate: &'a LfkEstimate,
}

fn lfk(cfg: &RunConfig) -> Result<(String, String), CliError> {
    let need = lfk_table(cfg)?;
    let (est, info) = with_form(cfg, need, |form| {
        l_f_value(form, &cfg.x_grid, cfg.index_weight, &cfg.policy)
    })?;
    let report = match cfg.format {
        Format::Csv => {
            let mut out = String::from("x,b,fit\n");
            for (x, b) in est.x_grid.iter().zip(&est.b_values) {
                let fit = est.value + est.slope * x.powf(-0.2);
                let _ = writeln!(out, "{x:e},{b:e},{fit:e}");
            }
            out
        }
        Format::Json => json(&LfkDoc {
            schema_version: SCHEMA_VERSION,
            form: &info,
            estimate: &est,
        })?,
    };
    let detail = format!(
        "L_f={:.9} slope={:.6} fit_residual={:.2e}",
        est.value, est.slope, est.fit_residual
    );
    Ok((report, detail))
}

fn waldspurger(cfg: &RunConfig) -> Result<(String, String), CliError> {
    let g = tunnell_g(cfg.max_d + 1)?;
    let level32 = RunConfig {
        form: FormSelector::Level32,
        level: 32,
        half_weight: 1,
        ..cfg.clone()
    };
    let need = cutoff(&level32, 2.0 * cfg.max_d as f64 * 32f64.sqrt())?;
    let (r, _) = with_form(&level32, need, |f| waldspurger_ratios(&g, f, cfg.max_d, &cfg.policy))?;
    let report = match cfg.format {
        Format::Csv => r.to_csv(),
        Format::Json => json(&r)?,
    };
    let mut detail = format!("max_d={} usable={}", cfg.max_d, r.entries.len());
    for c in &r.classes {
        let _ = write!(detail, " class{}:n={}", c.class, c.usable);
        if let (Some(k), Some(cv)) = (c.kappa_hat, c.cv) {
            let _ = write!(detail, ",kappa={k:.9},cv={cv:.1e}");
        }
        if c.verified {
            detail.push_str(",verified");
        }
    }
    let _ = write!(detail, " vanishing_coherent={}", r.vanishing_coherent());
    Ok((report, detail))
}

fn gaps(cfg: &RunConfig) -> Result<(String, String), CliError> {
    let n_max = cfg.max_n.unwrap_or(DEFAULT_GAP_MAX_N);
    // Headroom so that runs starting near n_max are usually measured in full.
    let g = tunnell_g(n_max + n_max / 8 + 64)?;
    let table = gap_statistics(&g.coefficients()?, n_max)?;
    let report = match cfg.format {
        Format::Csv => table.to_csv(),
        Format::Json => json(&table)?,
    };
    let detail = format!(
        "n_max={n_max} max_gap={} at {} max_ratio={:.4} at {} truncated={}",
        table.max_gap, table.max_gap_at, table.max_ratio, table.max_ratio_at, table.truncated
    );
    Ok((report, detail))
}
