//! Number and vector literals shared by every command-line surface.
//!
//! ```text
//! rat:p/q                  exact rational
//! cf:[a0;a1,a2,...]        finite continued fraction
//! cf:[a0;a1,(b1,...,bm)]   eventually periodic continued fraction
//! dec:0.123~1e-30          decimal midpoint with radius
//! liouville:fact           Σ 2^{-g(j)} for a named gap schedule
//! (lit,lit,...)            vector
//! ```

use num_bigint::{BigInt, BigUint};

use super::real::{parse_rational, Real};
use super::torus::TorusVector;
use crate::contfrac::{make_liouville, ContinuedFraction, GapSchedule};
use crate::error::{Error, Result};

/// Splits on commas that are not nested inside brackets or parentheses.
pub fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn parse_uints(s: &str) -> Result<Vec<BigUint>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<BigUint>().map_err(|_| Error::parse(format!("bad partial quotient {t:?}"))))
        .collect()
}

/// Parses the body of `cf:[...]`.
pub fn parse_cf(s: &str) -> Result<ContinuedFraction> {
    let body = s
        .trim()
        .strip_prefix("cf:")
        .unwrap_or(s)
        .trim()
        .strip_prefix('[')
        .and_then(|b| b.strip_suffix(']'))
        .ok_or_else(|| Error::parse(format!("continued fraction must look like cf:[a0;...], got {s:?}")))?;
    let (a0, rest) = body.split_once(';').unwrap_or((body, ""));
    let a0: BigInt = a0.trim().parse().map_err(|_| Error::parse(format!("bad a0 in {s:?}")))?;
    let items = split_top_level(rest, ',');
    let mut prefix = Vec::new();
    let mut period = Vec::new();
    for (i, item) in items.iter().map(|t| t.trim()).enumerate() {
        if item.is_empty() {
            continue;
        }
        if let Some(inner) = item.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
            if i + 1 != items.len() {
                return Err(Error::parse("the periodic block must come last"));
            }
            period = parse_uints(inner)?;
            if period.is_empty() {
                return Err(Error::parse("empty periodic block"));
            }
        } else {
            prefix.extend(parse_uints(item)?);
        }
    }
    if period.is_empty() {
        ContinuedFraction::finite(a0, prefix)
    } else {
        ContinuedFraction::periodic(a0, prefix, period)
    }
    .map_err(|e| Error::parse(e.to_string()))
}

/// Parses one scalar literal.
pub fn parse_real(s: &str) -> Result<Real> {
    let s = s.trim();
    if let Some(r) = s.strip_prefix("rat:") {
        return Ok(Real::Exact(parse_rational(r)?));
    }
    if s.starts_with("cf:") {
        return Ok(parse_cf(s)?.value());
    }
    if let Some(d) = s.strip_prefix("dec:") {
        let (mid, rad) = d.split_once('~').unwrap_or((d, "0"));
        return Real::ball(parse_rational(mid)?, parse_rational(rad)?).map_err(|e| Error::parse(e.to_string()));
    }
    if let Some(name) = s.strip_prefix("liouville:") {
        let l = make_liouville(GapSchedule::parse(name)?).map_err(|e| Error::parse(e.to_string()))?;
        return Ok(l.value());
    }
    Err(Error::parse(format!(
        "unrecognised number literal {s:?} (expected rat:, cf:, dec: or liouville:)"
    )))
}

/// Parses `(lit,lit,...)` or a single literal as a 1-dimensional vector.
pub fn parse_vector(s: &str) -> Result<TorusVector> {
    let s = s.trim();
    let body = match s.strip_prefix('(').and_then(|b| b.strip_suffix(')')) {
        Some(b) => b,
        None => s,
    };
    let coords = split_top_level(body, ',')
        .into_iter()
        .map(parse_real)
        .collect::<Result<Vec<_>>>()?;
    TorusVector::new(coords).map_err(|e| Error::parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn scalar_forms() {
        assert_eq!(parse_real("rat:2/4").unwrap().as_exact(), Some(&BigRational::new(1.into(), 2.into())));
        assert_eq!(
            parse_real("cf:[1;2,3]").unwrap().as_exact(),
            Some(&BigRational::new(10.into(), 7.into()))
        );
        let phi = parse_real("cf:[1;(1)]").unwrap();
        assert!((phi.to_f64() - 1.618033988749895).abs() < 1e-15);
        let d = parse_real("dec:0.25~1e-30").unwrap();
        let iv = d.enclose(64).unwrap();
        assert!(iv.contains(&BigRational::new(1.into(), 4.into())));
        assert!(parse_real("liouville:fact").is_ok());
        assert!(parse_real("liouville:linear").is_err());
        assert!(parse_real("0.5").is_err());
        assert!(parse_cf("cf:[0;(1),2]").is_err());
    }

    #[test]
    fn vectors() {
        let v = parse_vector("(rat:1/2,cf:[0;1,(2,3)],dec:0.1~1e-9)").unwrap();
        assert_eq!(v.dim(), 3);
        let v = parse_vector("rat:5/4").unwrap();
        assert_eq!(v.dim(), 1);
        assert_eq!(v.coords()[0].as_exact(), Some(&BigRational::new(1.into(), 4.into())));
    }

    #[test]
    fn cf_literal_round_trip() {
        for lit in ["cf:[1;(1)]", "cf:[0;2,(1,3)]", "cf:[3;7,15,1,292]"] {
            assert_eq!(parse_cf(lit).unwrap().literal(), lit);
        }
    }
}
