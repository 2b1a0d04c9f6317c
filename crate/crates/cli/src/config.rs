//! Command-line flags, the optional `key = value` config file, and the
//! validated [`RunConfig`] built from both.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use quadtwist::forms::CoefficientHeader;
use quadtwist::lfunc::TruncationPolicy;
use quadtwist::moments::{IndexWeight, DEFAULT_LFK_GRID};

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "quadtwist",
    version,
    about = "Central values of quadratic twists of modular L-functions",
    after_help = "Numbers accept scientific notation (1e5). Settings come from flags, then \
                  the --config file, then the defaults shown. Without --out the report goes \
                  to stdout and the summary line to stderr.\n\n\
                  Exit codes: 0 success, 1 usage error, 2 numeric guard failure, 3 I/O failure."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Coefficient table of a form (needs --max-n unless the form is a file)
    Coeffs,
    /// One central value L(k, f, chi_d) with its split diagnostic (needs --d)
    Lvalue,
    /// Central values for every d in the family with X <= |d| <= X + h
    Scan,
    /// First moment S_f(X, h) against C_N L_f(k) h
    Moment,
    /// Sum of squared central values over |d| <= X
    SecondMoment,
    /// L_f(k) extrapolated from B(x) on --x-grid
    Lfk,
    /// Ratio test a_g(d)^2 / L for the weight 3/2 Tunnell form and the level 32 form
    Waldspurger,
    /// Runs of vanishing coefficients of the Tunnell form up to --max-n
    Gaps,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightArg {
    /// Average of chi_d(r) over the family classes
    Family,
    /// chi(r) = 1 for every admissible r
    Literal,
}

impl From<WeightArg> for IndexWeight {
    fn from(w: WeightArg) -> Self {
        match w {
            WeightArg::Family => IndexWeight::FamilyAverage,
            WeightArg::Literal => IndexWeight::Literal,
        }
    }
}

/// Comma-separated list of positive numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

/// Raw settings; every field is optional so that flags and the config file
/// can be layered.
#[derive(Args, Debug, Clone, Default)]
pub struct Flags {
    /// delta | x32 | file:PATH [default: x32]
    #[arg(long, global = true)]
    pub form: Option<String>,
    /// Largest coefficient index
    #[arg(long, global = true, value_parser = parse_count)]
    pub max_n: Option<u64>,
    /// Fundamental discriminant
    #[arg(long, global = true, allow_negative_numbers = true, value_parser = parse_int)]
    pub d: Option<i64>,
    /// Window start X
    #[arg(long, global = true, value_parser = parse_positive)]
    pub x: Option<f64>,
    /// Window length h
    #[arg(long, global = true, value_parser = parse_positive)]
    pub h: Option<f64>,
    /// Points of the B(x) extrapolation [default: 1e5,2e5,4e5]
    #[arg(long, global = true, value_parser = parse_grid)]
    pub x_grid: Option<Grid>,
    /// Largest |d| of the ratio test [default: 2000]
    #[arg(long, global = true, value_parser = parse_count)]
    pub max_d: Option<u64>,
    /// Certified bound on each truncated tail [default: 1e-12]
    #[arg(long, global = true, value_parser = parse_positive)]
    pub tail_target: Option<f64>,
    /// Largest term count of one smoothed sum [default: 5e7]
    #[arg(long, global = true, value_parser = parse_count)]
    pub hard_cap: Option<u64>,
    /// Worker threads [default: all cores]
    #[arg(long, global = true, value_parser = parse_count)]
    pub threads: Option<u64>,
    /// Report file
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Report format [default: csv]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// |L| above which a value counts as nonvanishing
    #[arg(long, global = true, value_parser = parse_positive)]
    pub zero_threshold: Option<f64>,
    /// Sign of d in the family, overriding (-1)^k
    #[arg(long, global = true, allow_negative_numbers = true, value_parser = parse_sign)]
    pub family_sign: Option<i8>,
    /// Weights of the B(x) index set [default: family]
    #[arg(long, global = true, value_enum)]
    pub index_weight: Option<WeightArg>,
    /// File of `key = value` lines using the long flag names
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

fn parse_number(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

pub fn parse_positive(s: &str) -> Result<f64, String> {
    let v = parse_number(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{s:?} must be positive"))
    }
}

pub fn parse_count(s: &str) -> Result<u64, String> {
    let v = parse_positive(s)?;
    if v.fract() != 0.0 || v > 2f64.powi(62) {
        return Err(format!("{s:?} is not a positive integer"));
    }
    Ok(v as u64)
}

pub fn parse_int(s: &str) -> Result<i64, String> {
    let v = parse_number(s)?;
    if v.fract() != 0.0 || v.abs() > 2f64.powi(62) {
        return Err(format!("{s:?} is not an integer"));
    }
    Ok(v as i64)
}

fn parse_sign(s: &str) -> Result<i8, String> {
    match parse_int(s)? {
        1 => Ok(1),
        -1 => Ok(-1),
        _ => Err(format!("{s:?} must be 1 or -1")),
    }
}

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let values = s
        .split(',')
        .map(parse_positive)
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() < 3 {
        return Err("the grid needs at least three points".into());
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err("grid points must be strictly increasing".into());
    }
    Ok(Grid(values))
}

fn parse_enum<T: ValueEnum>(s: &str) -> Result<T, String> {
    T::from_str(s.trim(), true).map_err(|_| format!("{s:?} is not an accepted value"))
}

impl Flags {
    /// Read a config file. Blank lines and `#` comments are skipped.
    pub fn from_file(path: &Path) -> Result<Flags, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ConfigRead {
            path: path.to_path_buf(),
            source,
        })?;
        Flags::from_config_text(&text)
    }

    pub fn from_config_text(text: &str) -> Result<Flags, CliError> {
        let mut f = Flags::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| CliError::Usage(format!("config line {}: {msg}", i + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("{line:?} is not key = value")))?;
            let value = value.trim();
            match key.trim().replace('_', "-").as_str() {
                "form" => f.form = Some(value.to_string()),
                "max-n" => f.max_n = Some(parse_count(value).map_err(bad)?),
                "d" => f.d = Some(parse_int(value).map_err(bad)?),
                "x" => f.x = Some(parse_positive(value).map_err(bad)?),
                "h" => f.h = Some(parse_positive(value).map_err(bad)?),
                "x-grid" => f.x_grid = Some(parse_grid(value).map_err(bad)?),
                "max-d" => f.max_d = Some(parse_count(value).map_err(bad)?),
                "tail-target" => f.tail_target = Some(parse_positive(value).map_err(bad)?),
                "hard-cap" => f.hard_cap = Some(parse_count(value).map_err(bad)?),
                "threads" => f.threads = Some(parse_count(value).map_err(bad)?),
                "out" => f.out = Some(PathBuf::from(value)),
                "format" => f.format = Some(parse_enum(value).map_err(bad)?),
                "zero-threshold" => f.zero_threshold = Some(parse_positive(value).map_err(bad)?),
                "family-sign" => f.family_sign = Some(parse_sign(value).map_err(bad)?),
                "index-weight" => f.index_weight = Some(parse_enum(value).map_err(bad)?),
                other => return Err(bad(format!("unknown key {other:?}"))),
            }
        }
        Ok(f)
    }

    /// Fill every unset field from `fallback`.
    pub fn or(self, fallback: Flags) -> Flags {
        Flags {
            form: self.form.or(fallback.form),
            max_n: self.max_n.or(fallback.max_n),
            d: self.d.or(fallback.d),
            x: self.x.or(fallback.x),
            h: self.h.or(fallback.h),
            x_grid: self.x_grid.or(fallback.x_grid),
            max_d: self.max_d.or(fallback.max_d),
            tail_target: self.tail_target.or(fallback.tail_target),
            hard_cap: self.hard_cap.or(fallback.hard_cap),
            threads: self.threads.or(fallback.threads),
            out: self.out.or(fallback.out),
            format: self.format.or(fallback.format),
            zero_threshold: self.zero_threshold.or(fallback.zero_threshold),
            family_sign: self.family_sign.or(fallback.family_sign),
            index_weight: self.index_weight.or(fallback.index_weight),
            config: self.config,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FormSelector {
    Delta,
    Level32,
    File(PathBuf),
}

impl FormSelector {
    pub fn parse(s: &str) -> Result<FormSelector, CliError> {
        match s {
            "delta" => Ok(FormSelector::Delta),
            "x32" => Ok(FormSelector::Level32),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(FormSelector::File(PathBuf::from(p))),
                _ => Err(CliError::Usage(format!(
                    "unknown form {s:?}; expected delta, x32 or file:PATH"
                ))),
            },
        }
    }
}

/// Level and `k` (weight `2k`) of the selected form. A file form is
/// resolved by reading its header, so a missing file fails here.
fn form_shape(selector: &FormSelector) -> Result<(u64, u32), CliError> {
    match selector {
        FormSelector::Delta => Ok((1, 6)),
        FormSelector::Level32 => Ok((32, 1)),
        FormSelector::File(path) => {
            use std::io::BufRead;
            let file = std::fs::File::open(path).map_err(quadtwist::Error::from)?;
            let mut first = String::new();
            std::io::BufReader::new(file)
                .read_line(&mut first)
                .map_err(quadtwist::Error::from)?;
            let header = CoefficientHeader::parse(first.trim_end())?;
            Ok((header.level, header.weight / 2))
        }
    }
}

/// A fully validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub form: FormSelector,
    pub level: u64,
    pub half_weight: u32,
    pub policy: TruncationPolicy,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub max_n: Option<u64>,
    pub d: Option<i64>,
    pub x: Option<f64>,
    pub h: Option<f64>,
    pub x_grid: Vec<f64>,
    pub max_d: u64,
    pub zero_threshold: Option<f64>,
    pub family_sign: Option<i8>,
    pub index_weight: IndexWeight,
}

pub const DEFAULT_MAX_D: u64 = 2000;
pub const DEFAULT_GAP_MAX_N: u64 = 100_000;

impl RunConfig {
    /// Parse an argument vector (including the program name).
    pub fn from_args<I, T>(args: I) -> Result<RunConfig, CliError>
    where
        I: IntoIterator<Item = T>,
        T: Into<std::ffi::OsString> + Clone,
    {
        let cli = Cli::try_parse_from(args)?;
        let file = match &cli.flags.config {
            Some(path) => Flags::from_file(path)?,
            None => Flags::default(),
        };
        RunConfig::resolve(cli.command, cli.flags.or(file))
    }

    pub fn resolve(command: Command, flags: Flags) -> Result<RunConfig, CliError> {
        let usage = |msg: &str| CliError::Usage(format!("{}: {msg}", command_name(command)));
        let form = FormSelector::parse(flags.form.as_deref().unwrap_or("x32"))?;
        let needs_form = !matches!(command, Command::Waldspurger | Command::Gaps);
        let (level, half_weight) = if needs_form { form_shape(&form)? } else { (32, 1) };
        let policy = TruncationPolicy::new(
            flags.tail_target.unwrap_or(TruncationPolicy::default().tail_target),
            flags.hard_cap.unwrap_or(TruncationPolicy::default().hard_cap),
        )?;
        let config = RunConfig {
            command,
            form,
            level,
            half_weight,
            policy,
            threads: flags.threads.map(|t| t as usize),
            out: flags.out,
            format: flags.format.unwrap_or(Format::Csv),
            max_n: flags.max_n,
            d: flags.d,
            x: flags.x,
            h: flags.h,
            x_grid: flags.x_grid.map(|g| g.0).unwrap_or_else(|| DEFAULT_LFK_GRID.to_vec()),
            max_d: flags.max_d.unwrap_or(DEFAULT_MAX_D),
            zero_threshold: flags.zero_threshold,
            family_sign: flags.family_sign,
            index_weight: flags.index_weight.map(Into::into).unwrap_or_default(),
        };
        match command {
            Command::Coeffs => {
                if config.max_n.is_none() && !matches!(config.form, FormSelector::File(_)) {
                    return Err(usage("--max-n is required"));
                }
                if config.format == Format::Json {
                    return Err(usage("coefficient tables are written in the coefficient file format only"));
                }
            }
            Command::Lvalue => {
                let d = config.d.ok_or_else(|| usage("--d is required"))?;
                let sign = config.family_sign.unwrap_or(if half_weight % 2 == 0 { 1 } else { -1 });
                if d == 0 || d.signum() != sign as i64 {
                    return Err(usage(&format!(
                        "d = {d} has the wrong sign for the family of a weight {} form (need sign {sign:+})",
                        2 * half_weight
                    )));
                }
            }
            Command::Scan | Command::Moment => {
                config.x.ok_or_else(|| usage("--x is required"))?;
                config.h.ok_or_else(|| usage("--h is required"))?;
            }
            Command::SecondMoment => {
                config.x.ok_or_else(|| usage("--x is required"))?;
            }
            Command::Lfk | Command::Waldspurger | Command::Gaps => {}
        }
        Ok(config)
    }
}

pub fn command_name(command: Command) -> &'static str {
    match command {
        Command::Coeffs => "coeffs",
        Command::Lvalue => "lvalue",
        Command::Scan => "scan",
        Command::Moment => "moment",
        Command::SecondMoment => "second-moment",
        Command::Lfk => "lfk",
        Command::Waldspurger => "waldspurger",
        Command::Gaps => "gaps",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &str) -> Result<RunConfig, CliError> {
        RunConfig::from_args(std::iter::once("quadtwist").chain(args.split_whitespace()))
    }

    #[test]
    fn scan_window_in_scientific_notation() {
        let c = parse("scan --form x32 --x 1e4 --h 1e3").unwrap();
        assert_eq!(c.command, Command::Scan);
        assert_eq!((c.x, c.h), (Some(1e4), Some(1e3)));
        assert_eq!(c.form, FormSelector::Level32);
    }

    #[test]
    fn wrong_sign_discriminant_is_a_usage_error() {
        let err = parse("lvalue --form delta --d -5").unwrap_err();
        assert!(matches!(err, CliError::Usage(_)), "{err}");
        assert_eq!(err.exit_code(), 1);
        assert!(parse("lvalue --form delta --d 5").is_ok());
        assert!(parse("lvalue --form x32 --d -15").is_ok());
    }

    #[test]
    fn grid_list() {
        let c = parse("lfk --form delta --x-grid 1e5,2e5,4e5").unwrap();
        assert_eq!(c.x_grid, vec![1e5, 2e5, 4e5]);
        assert!(parse("lfk --x-grid 1e5,2e5").is_err());
        assert!(parse("lfk --x-grid 1e5,4e5,2e5").is_err());
    }

    #[test]
    fn unknown_flag_and_missing_parameter() {
        assert_eq!(parse("scan --bogus 1").unwrap_err().exit_code(), 1);
        assert_eq!(parse("scan --x 1e3").unwrap_err().exit_code(), 1);
        assert_eq!(parse("moment --x -3 --h 1").unwrap_err().exit_code(), 1);
        assert_eq!(parse("coeffs --form x32").unwrap_err().exit_code(), 1);
    }

    #[test]
    fn unreadable_coefficient_file_is_io() {
        let err = parse("lvalue --form file:/nonexistent/coeffs.csv --d -3").unwrap_err();
        assert_eq!(err.exit_code(), 3, "{err}");
    }

    #[test]
    fn flags_override_config_file() {
        let file = Flags::from_config_text("# pinned\nx = 2e3\nh=500\ntail_target = 1e-10\nform = delta\n").unwrap();
        let flags = Flags {
            h: Some(100.0),
            ..Flags::default()
        };
        let c = RunConfig::resolve(Command::Moment, flags.or(file)).unwrap();
        assert_eq!((c.x, c.h), (Some(2e3), Some(100.0)));
        assert_eq!(c.policy.tail_target, 1e-10);
        assert_eq!(c.form, FormSelector::Delta);
        assert!(Flags::from_config_text("speed = 3").is_err());
        assert!(Flags::from_config_text("x 3").is_err());
    }
}
