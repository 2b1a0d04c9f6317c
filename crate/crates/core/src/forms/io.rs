//! Plain-text coefficient files.
//!
//! ```text
//! # level=<N> weight=<2k> maxn=<M> source=<tag>
//! 1,1
//! 2,-24
//! ...
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::eigenform::Eigenform;
use crate::error::{Error, Result};

/// Header fields of a coefficient file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientHeader {
    pub level: u64,
    pub weight: u32,
    pub max_n: u64,
    pub source: String,
}

impl CoefficientHeader {
    pub fn parse(line: &str) -> Result<Self> {
        let body = line
            .strip_prefix('#')
            .ok_or_else(|| Error::Header(format!("expected '# level=...', found {line:?}")))?;
        let (mut level, mut weight, mut max_n, mut source) = (None, None, None, None);
        for field in body.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Header(format!("field {field:?} is not key=value")))?;
            let number = || {
                value
                    .parse::<u64>()
                    .map_err(|_| Error::Header(format!("{key}={value:?} is not a nonnegative integer")))
            };
            match key {
                "level" => level = Some(number()?),
                "weight" => weight = Some(number()?),
                "maxn" => max_n = Some(number()?),
                "source" => source = Some(value.to_string()),
                _ => return Err(Error::Header(format!("unknown field {key:?}"))),
            }
        }
        let missing = |k: &str| Error::Header(format!("missing field {k}"));
        let level = level.ok_or_else(|| missing("level"))?;
        let weight = weight.ok_or_else(|| missing("weight"))?;
        let max_n = max_n.ok_or_else(|| missing("maxn"))?;
        if level == 0 {
            return Err(Error::Header("level must be positive".into()));
        }
        if weight == 0 || weight % 2 == 1 || weight > 200 {
            return Err(Error::Header(format!(
                "weight={weight} is not a positive even integer"
            )));
        }
        if max_n == 0 {
            return Err(Error::Header("maxn must be positive".into()));
        }
        Ok(CoefficientHeader {
            level,
            weight: weight as u32,
            max_n,
            source: source.unwrap_or_else(|| "file".into()),
        })
    }

    pub fn render(&self) -> String {
        format!(
            "# level={} weight={} maxn={} source={}",
            self.level, self.weight, self.max_n, self.source
        )
    }
}

pub fn write_coefficients<W: Write>(form: &Eigenform, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    let header = CoefficientHeader {
        level: form.level(),
        weight: form.weight(),
        max_n: form.max_n(),
        source: form.source().replace(char::is_whitespace, "_"),
    };
    writeln!(out, "{}", header.render())?;
    for (n, a) in form.coefficients().iter().enumerate().skip(1) {
        writeln!(out, "{n},{a}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_coefficients(form: &Eigenform, path: impl AsRef<Path>) -> Result<()> {
    write_coefficients(form, File::create(path)?)
}

/// Parse a coefficient file. The root number is not stored; the returned form
/// carries `w = +1` until the caller sets it.
pub fn read_coefficients<R: BufRead>(input: R) -> Result<Eigenform> {
    let mut lines = input.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Header("file is empty".into()))??;
    let header = CoefficientHeader::parse(first.trim_end())?;
    let mut a = Vec::with_capacity(header.max_n as usize + 1);
    a.push(0i128);
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let line_no = idx + 2;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let format = |msg: String| Error::Format { line: line_no, msg };
        let (n_text, a_text) = line
            .split_once(',')
            .ok_or_else(|| format(format!("expected 'n,a_n', found {line:?}")))?;
        let n: u64 = n_text
            .trim()
            .parse()
            .map_err(|_| format(format!("index {n_text:?} is not an integer")))?;
        let expected = a.len() as u64;
        if n != expected {
            return Err(format(format!("expected index {expected}, found {n}")));
        }
        if n > header.max_n {
            return Err(format(format!("index {n} beyond maxn={}", header.max_n)));
        }
        let a_text = a_text.trim();
        let value: i128 = a_text.parse().map_err(|_| {
            let digits = a_text.strip_prefix('-').unwrap_or(a_text);
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                Error::CoefficientOverflow(n)
            } else {
                format(format!("coefficient {a_text:?} is not an integer"))
            }
        })?;
        a.push(value);
    }
    let last = a.len() as u64 - 1;
    if last < header.max_n {
        return Err(Error::Truncated {
            expected: header.max_n,
            last,
        });
    }
    Eigenform::from_table(header.level, header.weight / 2, 1, header.source, a)
}

pub fn load_coefficients(path: impl AsRef<Path>) -> Result<Eigenform> {
    read_coefficients(BufReader::new(File::open(path)?))
}
