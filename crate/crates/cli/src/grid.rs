//! Range and grid syntax shared by the subcommands.
//!
//! * `7` or `1,4,16`: explicit values
//! * `1..7`: inclusive integer range
//! * `lin:a..b:k`, `log:a..b:k`: `k` points from `a` to `b`

use crate::error::CliError;

fn bad(text: &str, why: &str) -> CliError {
    CliError::Usage(format!("invalid grid {text:?}: {why}"))
}

fn parse_f64(text: &str, s: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| bad(text, &format!("{s:?} is not a number")))
}

fn parse_u64(text: &str, s: &str) -> Result<u64, CliError> {
    s.trim()
        .parse::<u64>()
        .map_err(|_| bad(text, &format!("{s:?} is not a nonnegative integer")))
}

fn spaced(text: &str, body: &str, log: bool) -> Result<Vec<f64>, CliError> {
    let (range, count) = body.rsplit_once(':').ok_or_else(|| bad(text, "expected a..b:k"))?;
    let (a, b) = range.split_once("..").ok_or_else(|| bad(text, "expected a..b:k"))?;
    let (a, b) = (parse_f64(text, a)?, parse_f64(text, b)?);
    let k = parse_u64(text, count)? as usize;
    if k == 0 {
        return Err(bad(text, "need at least one point"));
    }
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(bad(text, "need finite a <= b"));
    }
    if log && a <= 0.0 {
        return Err(bad(text, "log spacing needs a > 0"));
    }
    if k == 1 {
        return Ok(vec![a]);
    }
    let step = (k - 1) as f64;
    Ok((0..k)
        .map(|i| {
            let f = i as f64 / step;
            match (i, log) {
                (0, _) => a,
                (i, _) if i == k - 1 => b,
                (_, true) => (a.ln() + f * (b.ln() - a.ln())).exp(),
                (_, false) => a + f * (b - a),
            }
        })
        .collect())
}

/// Real-valued grid, in the order given.
pub fn reals(text: &str) -> Result<Vec<f64>, CliError> {
    if let Some(body) = text.strip_prefix("log:") {
        return spaced(text, body, true);
    }
    if let Some(body) = text.strip_prefix("lin:") {
        return spaced(text, body, false);
    }
    if text.contains("..") {
        return Err(bad(text, "real grids use lin:a..b:k or log:a..b:k"));
    }
    text.split(',').map(|s| parse_f64(text, s)).collect()
}

/// Integer grid, sorted and deduplicated. Spaced grids are rounded.
pub fn integers(text: &str) -> Result<Vec<u64>, CliError> {
    let mut out: Vec<u64> = if text.starts_with("log:") || text.starts_with("lin:") {
        reals(text)?
            .into_iter()
            .map(|x| {
                if x < 0.0 {
                    Err(bad(text, "negative value"))
                } else {
                    Ok(x.round() as u64)
                }
            })
            .collect::<Result<_, _>>()?
    } else if let Some((a, b)) = text.split_once("..") {
        let (a, b) = (parse_u64(text, a)?, parse_u64(text, b)?);
        if a > b {
            return Err(bad(text, "empty range"));
        }
        (a..=b).collect()
    } else {
        text.split(',').map(|s| parse_u64(text, s)).collect::<Result<_, _>>()?
    };
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inclusive_ranges_and_lists() {
        assert_eq!(integers("1..7").unwrap(), (1..=7).collect::<Vec<_>>());
        assert_eq!(integers("16,1,4,4").unwrap(), vec![1, 4, 16]);
        assert_eq!(integers("3").unwrap(), vec![3]);
        assert!(integers("5..2").is_err());
        assert!(integers("-1").is_err());
    }

    #[test]
    fn log_grid_hits_both_ends() {
        let g = reals("log:0.01..100:64").unwrap();
        assert_eq!(g.len(), 64);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[63], 100.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        let ratio = g[1] / g[0];
        assert!((g[33] / g[32] - ratio).abs() < 1e-12);
    }

    #[test]
    fn rounded_integer_log_grid() {
        let g = integers("log:1..1000:4").unwrap();
        assert_eq!(g, vec![1, 10, 100, 1000]);
    }

    #[test]
    fn rejects_malformed() {
        assert!(reals("log:0..1:5").is_err());
        assert!(reals("0.1..2").is_err());
        assert!(reals("lin:1..2").is_err());
        assert!(reals("lin:1..2:0").is_err());
    }
}
