//! Angles given as decimals or as multiples of pi: `0.5`, `pi`, `-pi/4`,
//! `3pi/4`, `3*pi/4`, `2.5pi`.

use std::f64::consts::PI;

pub fn parse_angle(input: &str) -> Result<f64, String> {
    let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("invalid angle '{input}' (expected a number or e.g. pi/4, -3pi/2)");
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, s.strip_prefix('+').unwrap_or(&s)),
    };
    if body.is_empty() {
        return Err(bad());
    }
    let value = match body.to_ascii_lowercase().find("pi") {
        None => body.parse::<f64>().map_err(|_| bad())?,
        Some(pos) => {
            let lower = body.to_ascii_lowercase();
            let coeff = lower[..pos].strip_suffix('*').unwrap_or(&lower[..pos]);
            let coeff = if coeff.is_empty() {
                1.0
            } else {
                coeff.parse::<f64>().map_err(|_| bad())?
            };
            let rest = &lower[pos + 2..];
            let denom = if rest.is_empty() {
                1.0
            } else {
                let d = rest.strip_prefix('/').ok_or_else(bad)?;
                d.parse::<f64>().map_err(|_| bad())?
            };
            if denom == 0.0 {
                return Err(bad());
            }
            coeff * PI / denom
        }
    };
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(sign * value)
}

/// Comma-separated angle list.
pub fn parse_angle_list(input: &str) -> Result<Vec<f64>, String> {
    input.split(',').map(parse_angle).collect()
}
