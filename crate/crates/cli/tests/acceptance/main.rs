//! Acceptance suite: one PASS/FAIL line per criterion, followed by notes,
//! then the command-line contract checks.
//! Exits non-zero when any criterion or check fails.

mod cli_checks;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use quadtwist::arith::Sieve;
use quadtwist::forms::{
    delta_coefficients, hecke_extend, level32_form, level32_series, Eigenform, DELTA_DEFAULT_CAP,
};
use quadtwist::lfunc::{
    a_sum, central_l_in, q_split_residual, symmetric_point, twist_root_number, TruncationPolicy,
    TwistCharacter,
};
use quadtwist::moments::{
    b_series, decay_exponent, first_moment, l_f_value, nonvanishing_count, second_moment,
    DiscriminantFamily, IndexWeight, MomentOptions, DEFAULT_LFK_GRID,
};
use quadtwist::waldspurger::{gap_statistics, tunnell_g, waldspurger_ratios};

/// Outcome of one criterion.
struct Verdict {
    pass: bool,
    summary: String,
    notes: Vec<String>,
}

impl Verdict {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Verdict {
            pass,
            summary: summary.into(),
            notes: Vec::new(),
        }
    }

    fn note(mut self, line: impl Into<String>) -> Self {
        self.notes.push(line.into());
        self
    }
}

fn policy() -> TruncationPolicy {
    TruncationPolicy::default()
}

/// Delta up to 10^6, enough for every window used below.
fn delta() -> &'static Eigenform {
    static FORM: OnceLock<Eigenform> = OnceLock::new();
    FORM.get_or_init(|| delta_coefficients(1_000_000, DELTA_DEFAULT_CAP).expect("delta table"))
}

fn level32() -> &'static Eigenform {
    static FORM: OnceLock<Eigenform> = OnceLock::new();
    FORM.get_or_init(|| level32_form(1_000_000).expect("level 32 table"))
}

fn level32_families() -> (DiscriminantFamily, DiscriminantFamily) {
    let standard = DiscriminantFamily::new(32, 1).unwrap();
    let opposite = standard.clone().with_sign(1).unwrap();
    (standard, opposite)
}

/// Largest `residual / budget` of the literal split
/// `|A(Q) + A(d^2 N/Q) - 2 A(|d| sqrt N)|` over the factor grid.
fn literal_split(form: &Eigenform, ds: &[i64], factors: &[f64]) -> (usize, usize, f64) {
    let p = policy();
    let (mut checked, mut violations, mut worst) = (0, 0, 0.0f64);
    for &d in ds {
        let chi = TwistCharacter::kronecker(d).unwrap();
        let q = symmetric_point(form, d);
        let table = chi.table(form.max_n());
        let center = a_sum(form, &table, q, &p).unwrap();
        for &f in factors {
            let a = a_sum(form, &table, f * q, &p).unwrap();
            let b = a_sum(form, &table, q * q / (f * q), &p).unwrap();
            let residual = (a.value + b.value - 2.0 * center.value).abs();
            let budget = 2.0 * (a.tail_bound + b.tail_bound + 2.0 * center.tail_bound);
            checked += 1;
            if residual > budget {
                violations += 1;
            }
            worst = worst.max(residual / budget);
        }
    }
    (checked, violations, worst)
}

fn criterion_1() -> Verdict {
    let form = level32();
    let (standard, opposite) = level32_families();
    let factors = [0.25, 0.5, 1.0, 2.0, 4.0];
    let ds = standard.enumerate_abs(1, 2000, true);
    let (checked, violations, worst) = literal_split(form, &ds, &factors);
    let signs: Vec<i8> = ds.iter().map(|&d| twist_root_number(form, d)).collect();
    let all_minus = signs.iter().all(|&w| w < 0);

    // The split with the twisted root number in front of the dual sum.
    let p = policy();
    let mut signed_worst = 0.0f64;
    for &d in &ds {
        let l = central_l_in(form, &standard, d, &p).unwrap();
        for f in factors {
            let s = q_split_residual(form, &l, f * symmetric_point(form, d), &p).unwrap();
            signed_worst = signed_worst.max(s.residual.abs() / (2.0 * s.tail_budget));
        }
    }
    let opp = opposite.enumerate_abs(1, 2000, true);
    let (opp_checked, opp_violations, opp_worst) = literal_split(form, &opp, &factors);

    Verdict::new(
        violations == 0,
        format!(
            "literal '+' split on {} d (sign -1), {checked} (d, Q) pairs: {violations} exceed 2x tails, worst residual/budget {worst:.3e}",
            ds.len()
        ),
    )
    .note(format!(
        "root number w_d = w chi_d(-32) is {} for every d in the family, so L = 0 and A(Q) = A(d^2 N/Q)",
        if all_minus { "-1" } else { "not uniformly -1" }
    ))
    .note(format!(
        "split with w_d: A(Q) + w_d A(d^2 N/Q) - L stays within 2x tails, worst residual/budget {signed_worst:.3e}"
    ))
    .note(format!(
        "literal '+' split on the opposite-sign family ({} d, w_d = +1): {opp_violations}/{opp_checked} violations, worst {opp_worst:.3e}",
        opp.len()
    ))
}

fn criterion_2() -> Verdict {
    let eta = level32_series(100_001).unwrap();
    let hecke = level32_form(100_000).unwrap();
    let x32_mismatch = (1..=100_000u64)
        .filter(|&n| eta.coeff_i128(n) != hecke.coefficient(n))
        .count();
    let tau = delta_coefficients(10_000, DELTA_DEFAULT_CAP).unwrap();
    let tau_hecke = hecke_extend(|p| tau.coefficient(p), 1, 6, 1, 10_000, "hecke").unwrap();
    let delta_mismatch = (1..=10_000u64)
        .filter(|&n| tau.coefficient(n) != tau_hecke.coefficient(n))
        .count();
    Verdict::new(
        x32_mismatch == 0 && delta_mismatch == 0,
        format!(
            "eta(4z)^2 eta(8z)^2 vs two-squares Hecke to 1e5: {x32_mismatch} mismatches; eta^24 vs tau(p) Hecke to 1e4: {delta_mismatch} mismatches"
        ),
    )
}

fn criterion_3() -> Verdict {
    let sieve = Sieve::new(100_000);
    let x32 = level32();
    let delta_violations = delta().deligne_violations(100_000).len();
    let x32_violations = x32.deligne_violations(100_000).len();
    let cm_nonzero = sieve
        .primes()
        .iter()
        .filter(|&&p| p % 4 == 3 && x32.coefficient(p as u64) != Some(0))
        .count();
    Verdict::new(
        delta_violations + x32_violations + cm_nonzero == 0,
        format!(
            "Deligne violations p <= 1e5: delta {delta_violations}, level 32 {x32_violations}; nonzero a_p with p = 3 mod 4: {cm_nonzero}"
        ),
    )
}

fn criterion_4() -> Verdict {
    let p = policy();
    let f = delta();
    let lfk = l_f_value(f, &DEFAULT_LFK_GRID, IndexWeight::FamilyAverage, &p).unwrap();
    let options = MomentOptions {
        lfk: Some(lfk.clone()),
        ..MomentOptions::default()
    };
    let run = |x: f64| first_moment(f, x, x.powf(0.85), &p, &options).unwrap();
    let (small, large) = (run(1e4), run(1e5));
    let (e_small, e_large) = ((small.ratio - 1.0).abs(), (large.ratio - 1.0).abs());
    let pass = lfk.fit_residual < 1e-3
        && (0.75..=1.25).contains(&small.ratio)
        && (0.85..=1.15).contains(&large.ratio)
        && e_large <= e_small;
    Verdict::new(
        pass,
        format!(
            "ratio {:.5} at X=1e4 ({} d), {:.5} at X=1e5 ({} d); L_f = {:.6} with fit residual {:.2e}",
            small.ratio, small.count, large.ratio, large.count, lfk.value, lfk.fit_residual
        ),
    )
    .note(format!(
        "B(x) on {:?}: {:?}",
        lfk.x_grid, lfk.b_values
    ))
    .note(format!(
        "S_f = {:.6e} vs {:.6e} at 1e4; {:.6e} vs {:.6e} at 1e5",
        small.s_f, small.predicted, large.s_f, large.predicted
    ))
}

fn criterion_5() -> Verdict {
    let p = policy();
    let f = delta();
    let reference_grid = [1e8, 2e8, 4e8];
    let reference = l_f_value(f, &reference_grid, IndexWeight::FamilyAverage, &p).unwrap();
    let xs = [1e4, 3e4, 1e5, 3e5];
    let bs: Vec<f64> = xs
        .iter()
        .map(|&x| b_series(f, x, IndexWeight::FamilyAverage, &p).unwrap().value)
        .collect();
    let alpha = decay_exponent(&xs, &bs, reference.value);
    let near = l_f_value(f, &DEFAULT_LFK_GRID, IndexWeight::FamilyAverage, &p).unwrap();
    Verdict::new(
        alpha <= -0.15,
        format!(
            "decay exponent {alpha:.3} of |B(x) - L| over {xs:?}, L = {:.6} from B on {reference_grid:?}",
            reference.value
        ),
    )
    .note(format!("B(x) = {bs:?}"))
    .note(format!(
        "with L from the near grid {:?} ({:.6}) the exponent is {:.3}",
        DEFAULT_LFK_GRID,
        near.value,
        decay_exponent(&xs, &bs, near.value)
    ))
}

fn criterion_6() -> Verdict {
    let p = policy();
    let (standard, opposite) = level32_families();
    let ratios = |fam: &DiscriminantFamily| -> Vec<f64> {
        [1e2, 1e3, 1e4]
            .iter()
            .map(|&x| second_moment(level32(), x, &p, Some(fam)).unwrap().normalized)
            .collect()
    };
    let std_r = ratios(&standard);
    let opp_r = ratios(&opposite);
    let pass = std_r[2] <= 3.0 * std_r[1];
    Verdict::new(
        pass,
        format!("second moment / X^1.1 at 1e2, 1e3, 1e4: {std_r:?}"),
    )
    .note("every value in the standard family is 0 (root number -1), so the comparison is 0 <= 0")
    .note(format!(
        "opposite-sign family: {opp_r:?}, ratio(1e4)/ratio(1e3) = {:.3}",
        opp_r[2] / opp_r[1]
    ))
}

fn criterion_7() -> Verdict {
    let p = policy();
    let (standard, opposite) = level32_families();
    let x: f64 = 1e3;
    let h = x.powf(0.8);
    let std_nv = nonvanishing_count(level32(), x, h, &p, None, Some(&standard)).unwrap();
    let opp_nv = nonvanishing_count(level32(), x, h, &p, None, Some(&opposite)).unwrap();
    let pass = std_nv.nonvanishing as f64 >= std_nv.floor
        && std_nv.nonvanishing as f64 >= 0.5 * std_nv.family_count as f64;
    Verdict::new(
        pass,
        format!(
            "N_f = {} of {} twists, floor h^2/X^1.1 = {:.2}",
            std_nv.nonvanishing, std_nv.family_count, std_nv.floor
        ),
    )
    .note("all twists in the standard family have root number -1 and vanish")
    .note(format!(
        "opposite-sign family: N_f = {} of {}, floor {:.2}",
        opp_nv.nonvanishing, opp_nv.family_count, opp_nv.floor
    ))
}

fn criterion_8() -> Verdict {
    let g = tunnell_g(2001).unwrap();
    let r = waldspurger_ratios(&g, level32(), 2000, &policy()).unwrap();
    let mut pass = r.vanishing_coherent() && r.classes.iter().any(|c| c.verified);
    let mut parts = Vec::new();
    for c in &r.classes {
        if c.usable >= 10 && !c.cv.is_some_and(|cv| cv < 1e-6) {
            pass = false;
        }
        parts.push(match (c.kappa_hat, c.cv) {
            (Some(k), Some(cv)) => format!("class {}: {} usable, kappa {k:.9}, cv {cv:.1e}", c.class, c.usable),
            _ => format!("class {}: {} usable, {} excluded", c.class, c.usable, c.excluded),
        });
    }
    Verdict::new(pass, parts.join("; ")).note(format!(
        "{} excluded d, vanishing coherent: {}; {} even n skipped",
        r.excluded.len(),
        r.vanishing_coherent(),
        r.even_skipped
    ))
}

fn criterion_9() -> Verdict {
    let n_max = 100_000;
    let g = tunnell_g(n_max + 20_000).unwrap();
    let coeffs = g.coefficients().unwrap();
    let table = gap_statistics(&coeffs, n_max).unwrap();
    let parity = (1..=n_max).step_by(2).map(|n| n + 1).all(|n| coeffs[n as usize] == 0);
    Verdict::new(
        table.max_ratio <= 1.0 && parity && !table.truncated,
        format!(
            "max i_g(n)/n^0.8 = {:.4} at n = {}; largest run {} at n = {}; even coefficients all zero: {parity}",
            table.max_ratio, table.max_ratio_at, table.max_gap, table.max_gap_at
        ),
    )
    .note(format!(
        "i_g(n) counts the zero coefficients starting at n; i_g(4) = {}",
        table.gap(4)
    ))
    .note(format!(
        "largest ratio beyond n = 100: {:.4}",
        table
            .gaps
            .iter()
            .filter(|&&(n, _)| n > 100)
            .map(|&(n, i)| i as f64 / (n as f64).powf(0.8))
            .fold(0.0, f64::max)
    ))
}

fn run_binary(args: &[&str], out: &Path) -> Vec<u8> {
    let status = Command::new(env!("CARGO_BIN_EXE_quadtwist"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn quadtwist");
    assert!(
        status.status.success(),
        "quadtwist {args:?} failed: {}",
        String::from_utf8_lossy(&status.stderr)
    );
    std::fs::read(out).expect("read report")
}

fn scratch_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("quadtwist-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn criterion_10() -> Verdict {
    let dir = scratch_dir();
    let commands: [&[&str]; 4] = [
        &["moment", "--form", "delta", "--x", "1e4", "--h", "1e3"],
        &["moment", "--form", "delta", "--x", "1e4", "--h", "1e3", "--format", "json"],
        &["waldspurger", "--max-d", "1000"],
        &["waldspurger", "--max-d", "1000", "--format", "json"],
    ];
    let mut identical = 0;
    let mut parts = Vec::new();
    for (i, cmd) in commands.iter().enumerate() {
        let outputs: Vec<Vec<u8>> = ["1", "8", "8", "1"]
            .iter()
            .enumerate()
            .map(|(j, t)| {
                let mut args = cmd.to_vec();
                args.extend(["--threads", t]);
                run_binary(&args, &dir.join(format!("run-{i}-{j}")))
            })
            .collect();
        let same = outputs.windows(2).all(|w| w[0] == w[1]);
        identical += same as usize;
        parts.push(format!("`{}` {}", cmd.join(" "), if same { "identical" } else { "DIFFERENT" }));
    }
    let _ = std::fs::remove_dir_all(&dir);
    Verdict::new(
        identical == commands.len(),
        format!("threads 1, 8, 8, 1: {}", parts.join("; ")),
    )
}

fn panic_message(e: &(dyn std::any::Any + Send)) -> String {
    e.downcast_ref::<String>()
        .cloned()
        .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_default()
}

fn main() {
    // libtest-style flags such as --nocapture are accepted and ignored.
    let criteria: [(u32, &str, fn() -> Verdict); 10] = [
        (1, "Q-split identity", criterion_1),
        (2, "dual coefficient generators", criterion_2),
        (3, "Deligne bound and CM vanishing", criterion_3),
        (4, "first-moment asymptotic", criterion_4),
        (5, "B(x) convergence rate", criterion_5),
        (6, "second-moment growth", criterion_6),
        (7, "non-vanishing count", criterion_7),
        (8, "Waldspurger ratio constancy", criterion_8),
        (9, "gap bound", criterion_9),
        (10, "determinism", criterion_10),
    ];
    let mut failed = Vec::new();
    for (id, name, check) in criteria {
        let start = Instant::now();
        let verdict = std::panic::catch_unwind(check)
            .unwrap_or_else(|e| Verdict::new(false, format!("panicked: {}", panic_message(&*e))));
        let tag = if verdict.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2} {tag} [{name}] {} ({:.1}s)",
            verdict.summary,
            start.elapsed().as_secs_f64()
        );
        for n in &verdict.notes {
            println!("    note: {n}");
        }
        if !verdict.pass {
            failed.push(id);
        }
    }

    let checks: [(&str, fn()); 5] = [
        ("coefficient file round trip", cli_checks::coefficient_table_round_trips_through_a_file),
        ("exit codes", cli_checks::exit_codes_follow_failure_kind),
        ("malformed coefficient file", cli_checks::malformed_coefficient_file_is_io),
        ("config file precedence", cli_checks::config_file_supplies_defaults_and_flags_win),
        ("report formats", cli_checks::reports_are_well_formed),
    ];
    let mut broken = Vec::new();
    for (name, check) in checks {
        match std::panic::catch_unwind(check) {
            Ok(()) => println!("cli check PASS [{name}]"),
            Err(e) => {
                println!("cli check FAIL [{name}] {}", panic_message(&*e));
                broken.push(name);
            }
        }
    }

    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
    }
    if !broken.is_empty() {
        println!("acceptance: failing cli checks {broken:?}");
    }
    if !failed.is_empty() || !broken.is_empty() {
        std::process::exit(1);
    }
}
