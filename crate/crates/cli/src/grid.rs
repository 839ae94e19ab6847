//! Parsing of value lists such as `50,500`, `10:100:10` or `0.1:0.9:0.2`.
//!
//! Ranges are inclusive; `a:b` steps by one.

use std::str::FromStr;

use crate::error::{usage, CliError};

fn parse_one<T: FromStr>(key: &str, s: &str) -> Result<T, CliError> {
    s.trim()
        .parse()
        .map_err(|_| usage(format!("--{key}: cannot parse `{s}`")))
}

pub fn parse_usize_list(key: &str, list: &str) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::new();
    for part in list.split(',').filter(|p| !p.trim().is_empty()) {
        let fields: Vec<&str> = part.split(':').collect();
        match fields.as_slice() {
            [v] => out.push(parse_one(key, v)?),
            [a, b] | [a, b, _] => {
                let (a, b): (usize, usize) = (parse_one(key, a)?, parse_one(key, b)?);
                let step: usize = match fields.get(2) {
                    Some(s) => parse_one(key, s)?,
                    None => 1,
                };
                if step == 0 || b < a {
                    return Err(usage(format!("--{key}: invalid range `{part}`")));
                }
                out.extend((a..=b).step_by(step));
            }
            _ => return Err(usage(format!("--{key}: invalid range `{part}`"))),
        }
    }
    if out.is_empty() {
        return Err(usage(format!("--{key}: empty list")));
    }
    Ok(out)
}

pub fn parse_f64_list(key: &str, list: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for part in list.split(',').filter(|p| !p.trim().is_empty()) {
        let fields: Vec<&str> = part.split(':').collect();
        match fields.as_slice() {
            [v] => out.push(parse_one(key, v)?),
            [a, b, step] => {
                let (a, b, step): (f64, f64, f64) = (
                    parse_one(key, a)?,
                    parse_one(key, b)?,
                    parse_one(key, step)?,
                );
                if !(step > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
                    return Err(usage(format!("--{key}: invalid range `{part}`")));
                }
                let count = ((b - a) / step + 1e-9).floor() as usize;
                // Multiply instead of accumulating so 0.1:0.9:0.1 ends at 0.9 exactly enough.
                out.extend((0..=count).map(|i| {
                    let v = a + i as f64 * step;
                    (v * 1e12).round() / 1e12
                }));
            }
            _ => {
                return Err(usage(format!(
                    "--{key}: float ranges need `start:end:step`, got `{part}`"
                )))
            }
        }
    }
    if out.is_empty() {
        return Err(usage(format!("--{key}: empty list")));
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(usage(format!("--{key}: values must be finite")));
    }
    Ok(out)
}

pub fn parse_value<T: FromStr>(key: &str, s: &str) -> Result<T, CliError> {
    parse_one(key, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_lists_and_ranges() {
        assert_eq!(parse_usize_list("n", "50,500").unwrap(), vec![50, 500]);
        assert_eq!(
            parse_usize_list("n", "10:30:10,7").unwrap(),
            vec![10, 20, 30, 7]
        );
        assert_eq!(parse_usize_list("k", "1:3").unwrap(), vec![1, 2, 3]);
        assert!(parse_usize_list("n", "5:1").is_err());
        assert!(parse_usize_list("n", "x").is_err());
        assert!(parse_usize_list("n", "").is_err());
    }

    #[test]
    fn float_lists_and_ranges() {
        assert_eq!(parse_f64_list("p", "0.2,0.5").unwrap(), vec![0.2, 0.5]);
        let r = parse_f64_list("p", "0.1:0.9:0.2").unwrap();
        assert_eq!(r, vec![0.1, 0.3, 0.5, 0.7, 0.9]);
        assert_eq!(parse_f64_list("p", "0.1:1.0:0.1").unwrap().len(), 10);
        assert!(parse_f64_list("p", "0.1:0.5").is_err());
        assert!(parse_f64_list("p", "nan").is_err());
    }
}
