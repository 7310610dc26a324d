//! Parsers for numeric flag values: powers like `2^-3`, dyadic ranges
//! `a..b`, grids `a:b:pitch` and vectors `x,y`.

use aperiodic_spectra::geometry::Point;

/// A number, or `base^exponent`.
pub fn parse_value(s: &str) -> Result<f64, String> {
    let s = s.trim();
    if let Some((base, exp)) = s.split_once('^') {
        let base: f64 = base.trim().parse().map_err(|_| format!("bad base in {s:?}"))?;
        let exp: f64 = exp.trim().parse().map_err(|_| format!("bad exponent in {s:?}"))?;
        return Ok(base.powf(exp));
    }
    s.parse().map_err(|_| format!("{s:?} is not a number"))
}

/// Comma-separated values or ranges. A range `a..b` steps by factors of two
/// from a towards b, both ends included.
pub fn parse_scales(s: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        match item.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (parse_value(a)?, parse_value(b)?);
                if !(a > 0.0 && b > 0.0) {
                    return Err(format!("dyadic range {item:?} needs positive ends"));
                }
                let factor = if b >= a { 2.0 } else { 0.5 };
                let steps = (b / a).log2().abs().round() as i32;
                if ((b / a).log2().abs() - steps as f64).abs() > 1e-9 {
                    return Err(format!("{item:?} is not a dyadic range"));
                }
                out.extend((0..=steps).map(|k| a * f64::powi(factor, k)));
            }
            None => out.push(parse_value(item)?),
        }
    }
    Ok(out)
}

/// `x` or `x,y`, padded to a point.
pub fn parse_vector(s: &str, dim: usize) -> Result<Point, String> {
    let parts: Vec<f64> = s.split(',').map(parse_value).collect::<Result<_, _>>()?;
    match (dim, parts.as_slice()) {
        (1, [x]) => Ok([*x, 0.0]),
        (2, [x, y]) => Ok([*x, *y]),
        _ => Err(format!("{s:?} does not have {dim} components")),
    }
}

/// Points lo + (hi − lo)·k/count for k = 0..=count, where count·pitch spans
/// [lo, hi]; empty when hi < lo.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, pitch] = parts.as_slice() else {
        return Err(format!("grid {s:?} is not of the form a:b:pitch"));
    };
    let (lo, hi, pitch) = (parse_value(lo)?, parse_value(hi)?, parse_value(pitch)?);
    if !(pitch > 0.0) {
        return Err(format!("grid pitch {pitch} must be positive"));
    }
    if hi < lo {
        return Ok(Vec::new());
    }
    let span = hi - lo;
    let count = (span / pitch).round();
    if (count * pitch - span).abs() > 1e-9 * span.max(1.0) {
        return Err(format!("pitch {pitch} does not divide [{lo}, {hi}]"));
    }
    let count = count as usize;
    if count == 0 {
        return Ok(vec![lo]);
    }
    Ok((0..=count).map(|k| lo + span * k as f64 / count as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_and_ranges() {
        assert_eq!(parse_value("2^-3").unwrap(), 0.125);
        assert_eq!(parse_value("0.37").unwrap(), 0.37);
        assert!(parse_value("x").is_err());
        assert_eq!(parse_scales("2^-3..2^-5").unwrap(), vec![0.125, 0.0625, 0.03125]);
        assert_eq!(parse_scales("16..64,100").unwrap(), vec![16.0, 32.0, 64.0, 100.0]);
        assert!(parse_scales("3..10").is_err());
    }

    #[test]
    fn grids_and_vectors() {
        let g = parse_grid("0:3:0.01").unwrap();
        assert_eq!(g.len(), 301);
        assert_eq!(g[100], 1.0);
        assert_eq!(g[300], 3.0);
        assert_eq!(parse_grid("0:0:0.1").unwrap(), vec![0.0]);
        assert!(parse_grid("1:0:0.1").unwrap().is_empty());
        assert!(parse_grid("0:1:0.3").is_err());
        assert_eq!(parse_vector("0.5", 1).unwrap(), [0.5, 0.0]);
        assert_eq!(parse_vector("0.5,2^-1", 2).unwrap(), [0.5, 0.5]);
        assert!(parse_vector("0.5", 2).is_err());
    }
}
