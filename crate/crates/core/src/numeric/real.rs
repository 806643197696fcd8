//! Exact or refinable real numbers with a three-valued comparison protocol.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::interval::{exact_root, rat_to_decimal, Interval, Tri};
use crate::error::{Error, Result};

/// Working precision range for comparisons, in bits.
///
/// Comparisons start at `start_bits` and double until they resolve or
/// `ceiling_bits` is exceeded, at which point they fail explicitly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Precision {
    pub start_bits: u32,
    pub ceiling_bits: u32,
}

impl Default for Precision {
    fn default() -> Self {
        Precision {
            start_bits: 64,
            ceiling_bits: 4096,
        }
    }
}

impl Precision {
    pub fn with_ceiling(ceiling_bits: u32) -> Self {
        Precision {
            start_bits: 64.min(ceiling_bits),
            ceiling_bits,
        }
    }

    /// The doubling ladder `start, 2*start, ...` capped at the ceiling.
    pub fn ladder(&self) -> impl Iterator<Item = u32> {
        let ceiling = self.ceiling_bits;
        let mut next = Some(self.start_bits.max(1));
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur >= ceiling {
                None
            } else {
                Some(cur.saturating_mul(2).min(ceiling))
            };
            Some(cur)
        })
    }
}

/// Something that can produce ever tighter enclosures of one real value.
pub trait Approximate: Send + Sync + fmt::Debug {
    /// An interval containing the value, with width at most `2^-prec` when
    /// the representation allows it (best effort otherwise).
    fn enclose(&self, prec: u32) -> Result<Interval>;

    /// Literal form in the shared number grammar, when there is one.
    fn literal(&self) -> Option<String> {
        None
    }
}

#[derive(Clone)]
pub enum Real {
    Exact(BigRational),
    /// `base^exp` with an exact nonnegative base, kept symbolic so that
    /// integral powers of it collapse back to exact values.
    Power { base: BigRational, exp: BigRational },
    Approx(Arc<dyn Approximate>),
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.literal())
    }
}

impl From<BigRational> for Real {
    fn from(v: BigRational) -> Self {
        Real::Exact(v)
    }
}

impl From<i64> for Real {
    fn from(v: i64) -> Self {
        Real::Exact(BigRational::from_integer(v.into()))
    }
}

impl Real {
    pub fn ratio(n: i64, d: i64) -> Real {
        Real::Exact(BigRational::new(n.into(), d.into()))
    }

    pub fn zero() -> Real {
        Real::Exact(BigRational::zero())
    }

    pub fn from_approx(a: impl Approximate + 'static) -> Real {
        Real::Approx(Arc::new(a))
    }

    /// Midpoint with a radius. A zero radius gives an exact value.
    pub fn ball(mid: BigRational, radius: BigRational) -> Result<Real> {
        if radius.is_negative() {
            return Err(Error::domain("negative radius"));
        }
        if radius.is_zero() {
            return Ok(Real::Exact(mid));
        }
        Ok(Real::from_approx(Ball { mid, radius }))
    }

    /// Freezes an enclosure into a (non-refinable) real.
    pub fn from_interval(iv: &Interval) -> Real {
        if iv.is_point() {
            Real::Exact(iv.lo().clone())
        } else {
            Real::from_approx(Ball {
                mid: iv.midpoint(),
                radius: iv.radius(),
            })
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Real::Exact(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Real::Exact(_))
    }

    pub fn enclose(&self, prec: u32) -> Result<Interval> {
        match self {
            Real::Exact(v) => Ok(Interval::point(v.clone())),
            Real::Power { base, exp } => Interval::point(base.clone())
                .pow_ratio(exp, prec + 2)
                .ok_or_else(|| Error::domain("power of a negative base")),
            Real::Approx(a) => a.enclose(prec),
        }
    }

    /// One comparison attempt at a fixed precision.
    pub fn cmp_at(&self, other: &Real, prec: u32) -> Result<Tri> {
        if let (Real::Exact(a), Real::Exact(b)) = (self, other) {
            return Ok(a.cmp(b).into());
        }
        Ok(self.enclose(prec)?.cmp(&other.enclose(prec)?))
    }

    /// Certified comparison, refining along the precision ladder.
    ///
    /// Fails with `PrecisionExhausted` when the ceiling is reached or the
    /// enclosures stop improving (e.g. a ball input of fixed radius).
    pub fn compare(&self, other: &Real, ctx: &Precision) -> Result<Ordering> {
        if let (Real::Exact(a), Real::Exact(b)) = (self, other) {
            return Ok(a.cmp(b));
        }
        let mut last: Option<(Interval, Interval)> = None;
        let mut bits = ctx.start_bits;
        for p in ctx.ladder() {
            bits = p;
            let a = self.enclose(p)?;
            let b = other.enclose(p)?;
            if let Some(o) = a.cmp(&b).decided() {
                return Ok(o);
            }
            if let Some((la, lb)) = &last {
                if *la == a && *lb == b {
                    break;
                }
            }
            last = Some((a, b));
        }
        Err(Error::exhausted(
            format!("comparing {:?} with {:?}", self, other),
            bits,
        ))
    }

    pub fn lt(&self, other: &Real, ctx: &Precision) -> Result<bool> {
        Ok(self.compare(other, ctx)? == Ordering::Less)
    }

    pub fn le(&self, other: &Real, ctx: &Precision) -> Result<bool> {
        Ok(self.compare(other, ctx)? != Ordering::Greater)
    }

    pub fn add(&self, other: &Real) -> Real {
        match (self, other) {
            (Real::Exact(a), Real::Exact(b)) => Real::Exact(a + b),
            _ => Real::from_approx(Linear::new(
                vec![(one(), self.clone()), (one(), other.clone())],
                BigRational::zero(),
            )),
        }
    }

    pub fn sub(&self, other: &Real) -> Real {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Real {
        self.scale(&-one())
    }

    pub fn scale(&self, c: &BigRational) -> Real {
        match self {
            Real::Exact(a) => Real::Exact(a * c),
            _ if c.is_zero() => Real::zero(),
            _ if c.is_one() => self.clone(),
            Real::Power { base, exp } if c.is_positive() && !base.is_negative() && exp.numer() <= &BigInt::from(64) && exp.denom() <= &BigInt::from(64) => {
                // c b^{p/q} = (c^q b^p)^{1/q}
                let q = exp.denom().to_usize().expect("small");
                let p = exp.numer().to_usize().expect("small");
                let merged = num_traits::pow(c.clone(), q) * num_traits::pow(base.clone(), p);
                exact_pow(&merged, &BigRational::new(BigInt::one(), exp.denom().clone())).expect("nonnegative base")
            }
            _ => Real::from_approx(Linear::new(vec![(c.clone(), self.clone())], BigRational::zero())),
        }
    }

    pub fn add_rational(&self, c: &BigRational) -> Real {
        match self {
            Real::Exact(a) => Real::Exact(a + c),
            _ if c.is_zero() => self.clone(),
            _ => Real::from_approx(Linear::new(vec![(one(), self.clone())], c.clone())),
        }
    }

    /// `Σ c_i v_i + constant`, exact when every `v_i` is.
    pub fn linear(terms: Vec<(BigRational, Real)>, constant: BigRational) -> Real {
        if terms.iter().all(|(_, v)| v.is_exact()) {
            let mut acc = constant;
            for (c, v) in &terms {
                acc += c * v.as_exact().unwrap();
            }
            return Real::Exact(acc);
        }
        Real::from_approx(Linear::new(terms, constant))
    }

    /// `self^e` for a rational `e >= 0`.
    pub fn pow(&self, e: &BigRational) -> Result<Real> {
        if e.is_negative() {
            return Err(Error::domain("negative exponent"));
        }
        if e.is_zero() {
            return Ok(Real::from(1));
        }
        if e.is_one() {
            return Ok(self.clone());
        }
        match self {
            Real::Exact(b) => exact_pow(b, e),
            Real::Power { base, exp } => exact_pow(base, &(exp * e)),
            Real::Approx(_) => Ok(Real::from_approx(Pow {
                base: self.clone(),
                exp: e.clone(),
            })),
        }
    }

    pub fn max_of(values: &[Real]) -> Real {
        assert!(!values.is_empty());
        if values.iter().all(Real::is_exact) {
            return Real::Exact(values.iter().map(|v| v.as_exact().unwrap().clone()).max().unwrap());
        }
        if values.len() == 1 {
            return values[0].clone();
        }
        Real::from_approx(Extremum {
            values: values.to_vec(),
            take_max: true,
        })
    }

    pub fn min_of(values: &[Real]) -> Real {
        assert!(!values.is_empty());
        if values.iter().all(Real::is_exact) {
            return Real::Exact(values.iter().map(|v| v.as_exact().unwrap().clone()).min().unwrap());
        }
        if values.len() == 1 {
            return values[0].clone();
        }
        Real::from_approx(Extremum {
            values: values.to_vec(),
            take_max: false,
        })
    }

    /// Distance to the nearest integer.
    pub fn dist_to_int(&self) -> Real {
        match self {
            Real::Exact(v) => Real::Exact(super::interval::dist_to_int(v)),
            _ => Real::from_approx(TorusDist(self.clone())),
        }
    }

    /// Midpoint of an enclosure, rounded to `digits` decimals.
    pub fn to_decimal(&self, digits: usize) -> Result<String> {
        match self {
            Real::Exact(v) => Ok(rat_to_decimal(v, digits)),
            _ => {
                let prec = (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 8;
                Ok(rat_to_decimal(&self.enclose(prec)?.midpoint(), digits))
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Exact(v) => super::interval::rat_to_f64(v),
            _ => self.enclose(64).map(|iv| iv.to_f64()).unwrap_or(f64::NAN),
        }
    }

    /// Rendering in the shared literal grammar where possible.
    pub fn literal(&self) -> String {
        match self {
            Real::Exact(v) => format!("rat:{}/{}", v.numer(), v.denom()),
            Real::Power { base, exp } => {
                format!("(rat:{}/{})^({}/{})", base.numer(), base.denom(), exp.numer(), exp.denom())
            }
            Real::Approx(a) => a.literal().unwrap_or_else(|| format!("{a:?}")),
        }
    }
}

fn one() -> BigRational {
    BigRational::one()
}

fn exact_pow(base: &BigRational, e: &BigRational) -> Result<Real> {
    if base.is_zero() {
        return Ok(Real::zero());
    }
    if base.is_negative() && !e.is_integer() {
        return Err(Error::domain("fractional power of a negative number"));
    }
    let p = e
        .numer()
        .to_u32()
        .ok_or_else(|| Error::domain("exponent numerator too large"))?;
    let q = e
        .denom()
        .to_u32()
        .ok_or_else(|| Error::domain("exponent denominator too large"))?;
    let raised = num_traits::pow(base.clone(), p as usize);
    if q == 1 {
        return Ok(Real::Exact(raised));
    }
    if let Some(r) = exact_root(&raised, q) {
        return Ok(Real::Exact(r));
    }
    Ok(Real::Power {
        base: base.clone(),
        exp: e.clone(),
    })
}

/// A midpoint with a fixed radius. Cannot be refined below its radius.
#[derive(Debug)]
pub struct Ball {
    pub mid: BigRational,
    pub radius: BigRational,
}

impl Approximate for Ball {
    fn enclose(&self, _prec: u32) -> Result<Interval> {
        Ok(Interval::new(&self.mid - &self.radius, &self.mid + &self.radius))
    }

    fn literal(&self) -> Option<String> {
        let digits = 40;
        Some(format!(
            "dec:{}~{}",
            rat_to_decimal(&self.mid, digits),
            super::interval::rat_to_f64(&self.radius)
        ))
    }
}

fn bit_len(c: &BigRational) -> u32 {
    let n = c.numer().bits() as i64 - c.denom().bits() as i64 + 1;
    n.max(0) as u32
}

#[derive(Debug)]
struct Linear {
    terms: Vec<(BigRational, Real)>,
    constant: BigRational,
}

impl Linear {
    fn new(terms: Vec<(BigRational, Real)>, constant: BigRational) -> Self {
        Linear { terms, constant }
    }
}

impl Approximate for Linear {
    fn enclose(&self, prec: u32) -> Result<Interval> {
        let spread = 64 - (self.terms.len() as u64 + 1).leading_zeros() + 1;
        let mut acc = Interval::point(self.constant.clone());
        for (c, v) in &self.terms {
            let iv = v.enclose(prec + bit_len(c) + spread)?;
            acc = acc.add(&iv.scale(c));
        }
        Ok(acc.round_out(prec + spread + 2))
    }
}

#[derive(Debug)]
struct Pow {
    base: Real,
    exp: BigRational,
}

impl Approximate for Pow {
    fn enclose(&self, prec: u32) -> Result<Interval> {
        let rough = self.base.enclose(16)?;
        let mag = bit_len(&rough.hi().abs().max(rough.lo().abs()));
        let growth = (super::interval::rat_to_f64(&self.exp).ceil() as u32 + 1) * (mag + 1);
        let mut best = None;
        for extra in [8u32, 64, 256] {
            let b = self.base.enclose(prec + growth + extra)?;
            let r = b
                .pow_ratio(&self.exp, prec + 4)
                .ok_or_else(|| Error::domain("fractional power of a negative enclosure"))?;
            if r.is_tight(prec) {
                return Ok(r);
            }
            best = Some(r);
        }
        Ok(best.unwrap())
    }
}

#[derive(Debug)]
struct Extremum {
    values: Vec<Real>,
    take_max: bool,
}

impl Approximate for Extremum {
    fn enclose(&self, prec: u32) -> Result<Interval> {
        let mut acc = self.values[0].enclose(prec)?;
        for v in &self.values[1..] {
            let iv = v.enclose(prec)?;
            acc = if self.take_max { acc.max(&iv) } else { acc.min(&iv) };
        }
        Ok(acc)
    }
}

#[derive(Debug)]
struct TorusDist(Real);

impl Approximate for TorusDist {
    fn enclose(&self, prec: u32) -> Result<Interval> {
        Ok(self.0.enclose(prec)?.torus_dist())
    }
}

/// Parses a rational from `p/q`, an integer, or a decimal like `-1.25e-3`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let s = s.strip_prefix("rat:").unwrap_or(s);
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| Error::parse(format!("bad numerator in {s:?}")))?;
        let d: BigInt = d.trim().parse().map_err(|_| Error::parse(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::parse("zero denominator"));
        }
        return Ok(BigRational::new(n, d));
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| Error::parse(format!("bad exponent in {s:?}")))?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(Error::parse(format!("empty number {s:?}")));
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return Err(Error::parse(format!("not a number: {s:?}")));
    }
    let digits: BigInt = format!("{ip}{fp}").parse().unwrap_or_else(|_| BigInt::zero());
    let scale = exp - fp.len() as i32;
    let ten = BigInt::from(10);
    let mut v = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        v = -v;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn scaled_powers_stay_closed() {
        let v = Real::Exact(q(1, 75)).pow(&q(1, 2)).unwrap().scale(&q(5, 3));
        assert!(matches!(v, Real::Power { .. }));
        assert_eq!(v.pow(&q(2, 3)).unwrap().as_exact(), Some(&q(1, 3)));
        assert!((Real::Exact(q(2, 1)).pow(&q(1, 2)).unwrap().scale(&q(3, 1)).to_f64() - 3.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn exact_compare_never_undecided() {
        let ctx = Precision::with_ceiling(64);
        assert_eq!(Real::ratio(1, 3).compare(&Real::ratio(1, 3), &ctx), Ok(Ordering::Equal));
        assert_eq!(Real::ratio(1, 3).compare(&Real::ratio(2, 5), &ctx), Ok(Ordering::Less));
    }

    #[test]
    fn ball_overlap_is_reported() {
        let a = Real::ball(q(1, 2), q(1, 100)).unwrap();
        let b = Real::ball(q(51, 100), q(1, 100)).unwrap();
        let err = a.compare(&b, &Precision::default()).unwrap_err();
        assert!(err.is_precision());
        let c = Real::ball(q(6, 10), q(1, 100)).unwrap();
        assert_eq!(a.compare(&c, &Precision::default()), Ok(Ordering::Less));
    }

    #[test]
    fn pow_collapses_to_exact() {
        let r = Real::ratio(1, 4).pow(&q(1, 2)).unwrap();
        assert_eq!(r.as_exact(), Some(&q(1, 2)));
        let r = Real::ratio(1, 2).pow(&q(1, 2)).unwrap();
        assert!(!r.is_exact());
        let back = r.pow(&q(2, 1)).unwrap();
        assert_eq!(back.as_exact(), Some(&q(1, 2)));
    }

    #[test]
    fn power_enclosure_is_tight() {
        let r = Real::ratio(1, 2).pow(&q(4, 3)).unwrap();
        let iv = r.enclose(100).unwrap();
        assert!(iv.is_tight(99));
        let v = 0.5f64.powf(4.0 / 3.0);
        assert!((iv.to_f64() - v).abs() < 1e-15);
    }

    #[test]
    fn parse_rational_forms() {
        assert_eq!(parse_rational("3/6").unwrap(), q(1, 2));
        assert_eq!(parse_rational("-7").unwrap(), q(-7, 1));
        assert_eq!(parse_rational("0.125").unwrap(), q(1, 8));
        assert_eq!(parse_rational("1e-3").unwrap(), q(1, 1000));
        assert_eq!(parse_rational("rat:2/4").unwrap(), q(1, 2));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn ladder_doubles_to_ceiling() {
        let ctx = Precision {
            start_bits: 64,
            ceiling_bits: 300,
        };
        assert_eq!(ctx.ladder().collect::<Vec<_>>(), vec![64, 128, 256, 300]);
    }
}
