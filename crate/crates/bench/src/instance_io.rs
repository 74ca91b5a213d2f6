//! Line-oriented instance files.
//!
//! ```text
//! EEDHFSSP 1
//! F 2
//! M 2
//! N 3
//! SP 2
//! ELEC 0.581
//! CE_OFFON 6
//! T_OFFON 3
//! AUX 0.05 0.1
//! P
//! 12 30
//! ...
//! PP
//! 5.5 9.25
//! ...
//! ```
//!
//! Lines starting with `#` and blank lines are ignored. Decimals are written
//! in their shortest round-trip form, so writing a parsed file reproduces it.

use std::fmt::Write as _;
use std::path::Path;

use carbonflow_core::model::{Coefficients, Instance, Time};
use thiserror::Error;

pub const MAGIC: &str = "EEDHFSSP 1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)>> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty() && !l.starts_with('#')),
        );
        Lines {
            inner: it.peekable(),
            last: text.lines().count().max(1),
        }
    }

    fn next(&mut self, expected: &str) -> Result<(usize, &'a str), ParseError> {
        self.inner
            .next()
            .ok_or_else(|| err(self.last, format!("unexpected end of file, expected {expected}")))
    }

    /// `KEY value...`, returning the values.
    fn keyed(&mut self, key: &str) -> Result<(usize, Vec<&'a str>), ParseError> {
        let (line, text) = self.next(&format!("`{key}`"))?;
        let mut parts = text.split_whitespace();
        if parts.next() != Some(key) {
            return Err(err(line, format!("expected `{key}`, found `{text}`")));
        }
        Ok((line, parts.collect()))
    }
}

fn parse_count(line: usize, key: &str, values: &[&str]) -> Result<usize, ParseError> {
    match values {
        [v] => v
            .parse::<usize>()
            .map_err(|_| err(line, format!("{key}: expected a non-negative integer, found `{v}`"))),
        _ => Err(err(line, format!("{key}: expected one value"))),
    }
}

fn parse_decimal(line: usize, what: &str, v: &str) -> Result<f64, ParseError> {
    let x: f64 = v
        .parse()
        .map_err(|_| err(line, format!("{what}: expected a decimal, found `{v}`")))?;
    if x.is_nan() {
        return Err(err(line, format!("{what}: not a number")));
    }
    if x < 0.0 {
        return Err(err(line, format!("{what}: negative value {v}")));
    }
    Ok(x)
}

fn parse_scalar(line: usize, key: &str, values: &[&str]) -> Result<f64, ParseError> {
    match values {
        [v] => parse_decimal(line, key, v),
        _ => Err(err(line, format!("{key}: expected one value"))),
    }
}

fn parse_time(line: usize, v: &str) -> Result<Time, ParseError> {
    if v.starts_with('-') {
        return Err(err(line, format!("negative processing time {v}")));
    }
    v.parse()
        .map_err(|_| err(line, format!("expected an integer processing time, found `{v}`")))
}

fn block<T>(
    lines: &mut Lines<'_>,
    header: &str,
    rows: usize,
    cols: usize,
    parse: impl Fn(usize, &str) -> Result<T, ParseError>,
) -> Result<Vec<Vec<T>>, ParseError> {
    let (line, rest) = lines.keyed(header)?;
    if !rest.is_empty() {
        return Err(err(line, format!("`{header}` header takes no values")));
    }
    let mut out = Vec::with_capacity(rows);
    for r in 0..rows {
        let (line, text) = lines.next(&format!("{header} row {}", r + 1))?;
        let values: Vec<&str> = text.split_whitespace().collect();
        if values.len() != cols {
            return Err(err(
                line,
                format!("row {}: expected m={cols} values, found {}", r + 1, values.len()),
            ));
        }
        out.push(values.iter().map(|v| parse(line, v)).collect::<Result<_, _>>()?);
    }
    Ok(out)
}

/// Parse an instance; `id` names it (usually the file stem).
pub fn parse_instance(text: &str, id: &str) -> Result<Instance, ParseError> {
    let mut lines = Lines::new(text);
    let (line, magic) = lines.next(MAGIC).map_err(|e| err(1, e.message))?;
    if magic != MAGIC {
        return Err(err(line, format!("expected header `{MAGIC}`, found `{magic}`")));
    }
    let (l, v) = lines.keyed("F")?;
    let factories = parse_count(l, "F", &v)?;
    let (l, v) = lines.keyed("M")?;
    let m = parse_count(l, "M", &v)?;
    let (l, v) = lines.keyed("N")?;
    let n = parse_count(l, "N", &v)?;
    let (l, v) = lines.keyed("SP")?;
    let idle_power = parse_scalar(l, "SP", &v)?;
    let (l, v) = lines.keyed("ELEC")?;
    let elec_coeff = parse_scalar(l, "ELEC", &v)?;
    let (l, v) = lines.keyed("CE_OFFON")?;
    let offon_emission = parse_scalar(l, "CE_OFFON", &v)?;
    let (l, v) = lines.keyed("T_OFFON")?;
    let offon_time = parse_scalar(l, "T_OFFON", &v)?;
    let (aux_line, v) = lines.keyed("AUX")?;
    if v.len() != m {
        return Err(err(aux_line, format!("AUX: expected m={m} values, found {}", v.len())));
    }
    let aux_coeff = v
        .iter()
        .map(|x| parse_decimal(aux_line, "AUX", x))
        .collect::<Result<Vec<_>, _>>()?;
    let p = block(&mut lines, "P", n, m, parse_time)?;
    let pp = block(&mut lines, "PP", n, m, |l, v| parse_decimal(l, "PP", v))?;
    if let Some((line, text)) = lines.inner.next() {
        return Err(err(line, format!("unexpected trailing content `{text}`")));
    }
    let coefficients = Coefficients {
        idle_power,
        elec_coeff,
        aux_coeff,
        offon_emission,
        offon_time,
    };
    Instance::new(id, factories, p, pp, coefficients).map_err(|e| err(1, e.to_string()))
}

fn join<T: std::fmt::Display>(values: &[T]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{v}");
    }
    s
}

pub fn format_instance(instance: &Instance) -> String {
    let c = instance.coefficients();
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "F {}", instance.num_factories());
    let _ = writeln!(s, "M {}", instance.num_machines());
    let _ = writeln!(s, "N {}", instance.num_jobs());
    let _ = writeln!(s, "SP {}", c.idle_power);
    let _ = writeln!(s, "ELEC {}", c.elec_coeff);
    let _ = writeln!(s, "CE_OFFON {}", c.offon_emission);
    let _ = writeln!(s, "T_OFFON {}", c.offon_time);
    let _ = writeln!(s, "AUX {}", join(&c.aux_coeff));
    s.push_str("P\n");
    for row in instance.proc_times() {
        let _ = writeln!(s, "{}", join(row));
    }
    s.push_str("PP\n");
    for row in instance.proc_powers() {
        let _ = writeln!(s, "{}", join(row));
    }
    s
}

#[derive(Debug, Error)]
pub enum ReadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
}

pub fn read_instance(path: &Path) -> Result<Instance, ReadError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| ReadError::Io {
        path: shown.clone(),
        source,
    })?;
    let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
    parse_instance(&text, id).map_err(|source| ReadError::Parse { path: shown, source })
}

pub fn write_instance(instance: &Instance, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, format_instance(instance))
}

/// Extension used for instance files.
pub const EXTENSION: &str = "txt";

/// Every instance file in `dir`, ordered by file name.
pub fn read_dir(dir: &Path) -> Result<Vec<Instance>, ReadError> {
    let io = |source| ReadError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == EXTENSION))
        .collect();
    paths.sort();
    paths.iter().map(|p| read_instance(p)).collect()
}
