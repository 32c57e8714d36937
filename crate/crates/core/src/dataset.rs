//! Plain-text data files.
//!
//! One record per line, `value[,indicator]`, with the indicator `1` for an
//! observed failure and `0` for a record censored at `c`. Fields may also be
//! separated by whitespace. Blank lines and `#` comments are ignored, except
//! for the metadata line
//!
//! ```text
//! # censor_time=52
//! ```
//!
//! A header `value` or `value,delta` may precede the records. Without an
//! indicator column the data are complete. Censored data without metadata
//! take `c` from the censored records, which must then share one value.

use crate::error::{Error, Result};
use crate::weibull::CensoredSample;

fn parse_err(line: Option<usize>, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses the text of a data file.
pub fn parse_data(text: &str) -> Result<CensoredSample> {
    let mut values = Vec::new();
    let mut events = Vec::new();
    let mut lines_of = Vec::new();
    let mut censor_time: Option<(f64, usize)> = None;
    let mut has_indicator: Option<bool> = None;

    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(c) = parse_metadata(comment, line_no)? {
                if censor_time.is_some() {
                    return Err(parse_err(Some(line_no), "censor_time given twice"));
                }
                censor_time = Some((c, line_no));
            }
            continue;
        }
        let fields: Vec<&str> = line
            .split(|ch: char| ch == ',' || ch == ';' || ch.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if values.is_empty() && has_indicator.is_none() && is_header(&fields) {
            has_indicator = Some(fields.len() == 2);
            continue;
        }
        if fields.is_empty() || fields.len() > 2 {
            return Err(parse_err(
                Some(line_no),
                format!("expected `value` or `value,indicator`, found {} fields", fields.len()),
            ));
        }
        match has_indicator {
            Some(expected) if expected != (fields.len() == 2) => {
                return Err(parse_err(
                    Some(line_no),
                    if expected {
                        "missing indicator column"
                    } else {
                        "unexpected indicator column"
                    },
                ));
            }
            _ => has_indicator = Some(fields.len() == 2),
        }
        let value: f64 = fields[0]
            .parse()
            .map_err(|_| parse_err(Some(line_no), format!("{:?} is not a number", fields[0])))?;
        if !(value > 0.0 && value.is_finite()) {
            return Err(parse_err(Some(line_no), format!("value must be positive and finite, got {value}")));
        }
        let event = match fields.get(1) {
            None | Some(&"1") => true,
            Some(&"0") => false,
            Some(other) => {
                return Err(parse_err(Some(line_no), format!("indicator must be 0 or 1, got {other:?}")))
            }
        };
        values.push(value);
        events.push(event);
        lines_of.push(line_no);
    }

    if values.is_empty() {
        return Err(parse_err(None, "no records found"));
    }

    let c = match censor_time {
        Some((c, _)) => Some(c),
        None => events
            .iter()
            .zip(&values)
            .filter(|(e, _)| !**e)
            .map(|(_, &y)| y)
            .reduce(f64::max),
    };
    let Some(c) = c else {
        return CensoredSample::complete(values);
    };
    for ((&y, &event), &line_no) in values.iter().zip(&events).zip(&lines_of) {
        if !event && y != c {
            return Err(parse_err(
                Some(line_no),
                format!("censored record has value {y} but the censoring time is {c}"),
            ));
        }
        if event && y > c {
            return Err(parse_err(
                Some(line_no),
                format!("failure at {y} after the censoring time {c}"),
            ));
        }
    }
    CensoredSample::censored(values, events, c)
}

fn is_header(fields: &[&str]) -> bool {
    match fields {
        [v] => v.eq_ignore_ascii_case("value"),
        [v, d] => v.eq_ignore_ascii_case("value") && d.eq_ignore_ascii_case("delta"),
        _ => false,
    }
}

fn parse_metadata(comment: &str, line_no: usize) -> Result<Option<f64>> {
    let Some(rest) = comment.trim().strip_prefix("censor_time") else {
        return Ok(None);
    };
    let Some(value) = rest.trim().strip_prefix('=') else {
        return Err(parse_err(Some(line_no), "expected `# censor_time=<value>`"));
    };
    let c: f64 = value
        .trim()
        .parse()
        .map_err(|_| parse_err(Some(line_no), format!("censor_time {:?} is not a number", value.trim())))?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(parse_err(Some(line_no), format!("censor_time must be positive and finite, got {c}")));
    }
    Ok(Some(c))
}

/// Writes a sample in the format read by [`parse_data`].
pub fn format_data(sample: &CensoredSample) -> String {
    let mut out = String::new();
    if let Some(c) = sample.censor_time() {
        out.push_str(&format!("# censor_time={c}\nvalue,delta\n"));
        for (y, e) in sample.values().iter().zip(sample.events()) {
            out.push_str(&format!("{y},{}\n", u8::from(*e)));
        }
    } else {
        out.push_str("value\n");
        for y in sample.values() {
            out.push_str(&format!("{y}\n"));
        }
    }
    out
}
