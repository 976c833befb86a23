use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use weibrec::{extract_records, RecordSample};

/// Parses numbers separated by commas, whitespace or newlines. Blank lines
/// and lines starting with `#` are ignored.
pub fn parse_numbers(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let v: f64 = tok
                .parse()
                .with_context(|| format!("line {}: `{tok}` is not a number", lineno + 1))?;
            if !v.is_finite() {
                bail!("line {}: `{tok}` is not finite", lineno + 1);
            }
            out.push(v);
        }
    }
    if out.is_empty() {
        bail!("no numeric values in input");
    }
    Ok(out)
}

pub fn read_numbers(data: Option<&str>, input: Option<&Path>) -> Result<Vec<f64>> {
    match (data, input) {
        (Some(d), _) => parse_numbers(d),
        (None, Some(p)) => {
            let text = fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            parse_numbers(&text).with_context(|| format!("in {}", p.display()))
        }
        (None, None) => bail!("no input: pass --data or --input"),
    }
}

/// Record sample from the input; `raw` routes through record extraction.
pub fn read_sample(data: Option<&str>, input: Option<&Path>, raw: bool) -> Result<RecordSample> {
    let values = read_numbers(data, input)?;
    let sample = if raw {
        extract_records(&values)?
    } else {
        RecordSample::new(values).context("input is not a record sequence (use --raw to extract records)")?
    };
    Ok(sample)
}
