//! Curve and population file readers.
//!
//! Curves are comma-separated with header `t_seconds,amplitude[,sigma]`,
//! times in seconds, `#` starting a comment line.

use std::path::Path;

use quadrelax::analysis::{DecayCurve, Sample};

use crate::error::{CliError, CliResult};

/// Non-blank, non-comment lines with their 1-based numbers, split on commas.
fn rows(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_start_matches('\u{feff}').trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(n, l)| (n, l.split(',').map(str::trim).collect()))
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::data(path, None, e.to_string()))
}

pub fn read_curve(path: &Path) -> CliResult<DecayCurve> {
    parse_curve(&read_text(path)?, path)
}

pub fn parse_curve(text: &str, path: &Path) -> CliResult<DecayCurve> {
    let mut lines = rows(text);
    let (hline, cols) = lines.next().ok_or_else(|| CliError::data(path, None, "empty file"))?;
    let with_sigma = match cols.as_slice() {
        ["t_seconds", "amplitude"] => false,
        ["t_seconds", "amplitude", "sigma"] => true,
        _ => {
            return Err(CliError::data(
                path,
                Some(hline),
                format!("header must be t_seconds,amplitude[,sigma], got '{}'", cols.join(",")),
            ))
        }
    };
    let mut samples: Vec<Sample> = Vec::new();
    for (line, rec) in lines {
        let bad = |msg: String| CliError::data(path, Some(line), msg);
        if rec.len() != cols.len() {
            return Err(bad(format!("expected {} fields, found {}", cols.len(), rec.len())));
        }
        let field = |i: usize| -> CliResult<f64> {
            let v: f64 = rec[i].parse().map_err(|_| bad(format!("'{}' is not a number", rec[i])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(bad(format!("non-finite value '{}'", rec[i])))
            }
        };
        let t = field(0)?;
        let y = field(1)?;
        let sigma = if with_sigma { Some(field(2)?) } else { None };
        if let Some(s) = sigma {
            if !(s > 0.0) {
                return Err(bad(format!("sigma must be positive, got {s}")));
            }
        }
        if let Some(prev) = samples.last() {
            if !(t > prev.t) {
                return Err(bad(format!("time {t} does not increase (previous {})", prev.t)));
            }
        }
        samples.push(Sample { t, y, sigma });
    }
    if samples.is_empty() {
        return Err(CliError::data(path, None, "no samples"));
    }
    DecayCurve::new(samples).map_err(|e| CliError::data(path, None, e.to_string()))
}

/// Equilibrium populations, header `population`, one row per level from m = I down.
pub fn read_populations(path: &Path, dim: usize) -> CliResult<Vec<f64>> {
    let text = read_text(path)?;
    let mut lines = rows(&text);
    match lines.next() {
        Some((_, h)) if h == ["population"] => {}
        Some((n, _)) => return Err(CliError::data(path, Some(n), "header must be 'population'")),
        None => return Err(CliError::data(path, None, "empty file")),
    }
    let mut out = Vec::new();
    for (line, rec) in lines {
        let v: f64 = match rec.as_slice() {
            [v] => v.parse().ok().filter(|v: &f64| v.is_finite() && *v >= 0.0),
            _ => None,
        }
        .ok_or_else(|| CliError::data(path, Some(line), format!("bad population '{}'", rec.join(","))))?;
        out.push(v);
    }
    if out.len() != dim {
        return Err(CliError::data(path, None, format!("expected {dim} populations, found {}", out.len())));
    }
    let total: f64 = out.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(CliError::data(path, None, format!("populations sum to {total}, not 1")));
    }
    Ok(out)
}
