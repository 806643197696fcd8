//! Continued fractions: certified expansion, convergents, and generators of
//! badly approximable (bounded quotient) and Liouville-type numbers.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::numeric::interval::{dyadic, floor_rat, Interval};
use crate::numeric::{Approximate, Precision, Real};

type QuotientFn = Arc<dyn Fn(usize) -> BigUint + Send + Sync>;

#[derive(Clone)]
enum Tail {
    /// Complete expansion of a rational.
    Finite(Vec<BigUint>),
    /// Certified prefix of an expansion not known beyond it.
    Truncated(Vec<BigUint>),
    Periodic {
        prefix: Vec<BigUint>,
        period: Vec<BigUint>,
    },
    /// `a_n` for `n > prefix.len()` is `rule(n)`.
    Rule {
        prefix: Vec<BigUint>,
        rule: QuotientFn,
        name: String,
    },
}

/// `[a0; a1, a2, ...]` with `a_n >= 1` for `n >= 1`.
#[derive(Clone)]
pub struct ContinuedFraction {
    a0: BigInt,
    tail: Tail,
}

fn join(v: &[BigUint]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl fmt::Debug for ContinuedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.literal())
    }
}

fn check_positive(v: &[BigUint]) -> Result<()> {
    if v.iter().any(Zero::is_zero) {
        return Err(Error::domain("partial quotients after a0 must be positive"));
    }
    Ok(())
}

impl ContinuedFraction {
    /// A terminating expansion. A trailing 1 is folded into its
    /// predecessor so the representation is canonical.
    pub fn finite(a0: BigInt, mut quotients: Vec<BigUint>) -> Result<Self> {
        check_positive(&quotients)?;
        if !quotients.is_empty() && quotients.last().unwrap().is_one() {
            quotients.pop();
            match quotients.last_mut() {
                Some(prev) => *prev += 1u32,
                None => {
                    return Ok(ContinuedFraction {
                        a0: a0 + 1,
                        tail: Tail::Finite(quotients),
                    })
                }
            }
        }
        Ok(ContinuedFraction {
            a0,
            tail: Tail::Finite(quotients),
        })
    }

    pub fn periodic(a0: BigInt, prefix: Vec<BigUint>, period: Vec<BigUint>) -> Result<Self> {
        check_positive(&prefix)?;
        check_positive(&period)?;
        if period.is_empty() {
            return Self::finite(a0, prefix);
        }
        Ok(ContinuedFraction {
            a0,
            tail: Tail::Periodic { prefix, period },
        })
    }

    pub fn from_rule(
        a0: BigInt,
        prefix: Vec<BigUint>,
        name: impl Into<String>,
        rule: impl Fn(usize) -> BigUint + Send + Sync + 'static,
    ) -> Result<Self> {
        check_positive(&prefix)?;
        Ok(ContinuedFraction {
            a0,
            tail: Tail::Rule {
                prefix,
                rule: Arc::new(rule),
                name: name.into(),
            },
        })
    }

    /// The golden ratio `[1; 1, 1, ...]`.
    pub fn golden() -> Self {
        Self::periodic(BigInt::one(), vec![], vec![BigUint::one()]).unwrap()
    }

    pub fn a0(&self) -> &BigInt {
        &self.a0
    }

    /// `a_n` for `n >= 1`; `None` past the end of a finite or truncated one.
    pub fn quotient(&self, n: usize) -> Option<BigUint> {
        assert!(n >= 1);
        let i = n - 1;
        match &self.tail {
            Tail::Finite(v) | Tail::Truncated(v) => v.get(i).cloned(),
            Tail::Periodic { prefix, period } => Some(if i < prefix.len() {
                prefix[i].clone()
            } else {
                period[(i - prefix.len()) % period.len()].clone()
            }),
            Tail::Rule { prefix, rule, .. } => {
                let a = if i < prefix.len() { prefix[i].clone() } else { rule(n) };
                Some(if a.is_zero() { BigUint::one() } else { a })
            }
        }
    }

    /// Number of quotients after `a0`, if the expansion is not infinite.
    pub fn known_len(&self) -> Option<usize> {
        match &self.tail {
            Tail::Finite(v) | Tail::Truncated(v) => Some(v.len()),
            _ => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self.tail, Tail::Finite(_))
    }

    pub fn is_truncated(&self) -> bool {
        matches!(self.tail, Tail::Truncated(_))
    }

    /// `[a0, a1, ..., a_{count-1}]`, or fewer if the expansion ends.
    pub fn terms(&self, count: usize) -> Vec<BigInt> {
        let mut out = Vec::with_capacity(count);
        if count == 0 {
            return out;
        }
        out.push(self.a0.clone());
        for n in 1..count {
            match self.quotient(n) {
                Some(a) => out.push(a.into()),
                None => break,
            }
        }
        out
    }

    /// The real number denoted: exact for finite expansions.
    pub fn value(&self) -> Real {
        match &self.tail {
            Tail::Finite(_) => {
                let c = convergents(self, self.known_len().unwrap() + 1).expect("finite");
                let last = c.last().unwrap();
                Real::Exact(BigRational::new(last.p.clone(), last.q.clone()))
            }
            _ => Real::from_approx(self.clone()),
        }
    }

    pub fn literal(&self) -> String {
        match &self.tail {
            Tail::Finite(v) | Tail::Truncated(v) => {
                if v.is_empty() {
                    format!("cf:[{}]", self.a0)
                } else {
                    format!("cf:[{};{}]", self.a0, join(v))
                }
            }
            Tail::Periodic { prefix, period } => {
                if prefix.is_empty() {
                    format!("cf:[{};({})]", self.a0, join(period))
                } else {
                    format!("cf:[{};{},({})]", self.a0, join(prefix), join(period))
                }
            }
            Tail::Rule { prefix, name, .. } => {
                format!("cf:[{};{}{}<{name}>]", self.a0, join(prefix), if prefix.is_empty() { "" } else { "," })
            }
        }
    }
}

impl Approximate for ContinuedFraction {
    fn enclose(&self, prec: u32) -> Result<Interval> {
        let target = BigInt::one() << prec as usize;
        let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
        let (mut p0, mut q0) = (self.a0.clone(), BigInt::one());
        let mut n = 1;
        loop {
            let a: BigInt = match self.quotient(n) {
                Some(a) => a.into(),
                None => {
                    let last = BigRational::new(p0.clone(), q0.clone());
                    if self.is_rational() || q1.is_zero() {
                        return Ok(Interval::point(last));
                    }
                    // value lies between the last two convergents
                    let prev = BigRational::new(p1, q1);
                    return Ok(if prev < last {
                        Interval::new(prev, last)
                    } else {
                        Interval::new(last, prev)
                    });
                }
            };
            let p2 = &a * &p0 + &p1;
            let q2 = &a * &q0 + &q1;
            p1 = std::mem::replace(&mut p0, p2);
            q1 = std::mem::replace(&mut q0, q2);
            n += 1;
            if &q0 * &q1 >= target {
                break;
            }
        }
        let a = BigRational::new(p1, q1);
        let b = BigRational::new(p0, q0);
        Ok(if a < b { Interval::new(a, b) } else { Interval::new(b, a) })
    }

    fn literal(&self) -> Option<String> {
        Some(ContinuedFraction::literal(self))
    }
}

/// `p_n / q_n` with its index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergent {
    pub p: BigInt,
    pub q: BigInt,
    pub index: usize,
}

impl Convergent {
    pub fn value(&self) -> BigRational {
        BigRational::new(self.p.clone(), self.q.clone())
    }
}

/// The first `count` convergents, indices `0..count`.
pub fn convergents(cf: &ContinuedFraction, count: usize) -> Result<Vec<Convergent>> {
    let mut out = Vec::with_capacity(count);
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::one());
    for n in 0..count {
        let a: BigInt = if n == 0 {
            cf.a0.clone()
        } else {
            cf.quotient(n)
                .ok_or_else(|| Error::domain(format!("expansion has only {n} terms, {count} convergents requested")))?
                .into()
        };
        let p2 = &a * &p1 + &p0;
        let q2 = &a * &q1 + &q0;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        out.push(Convergent {
            p: p1.clone(),
            q: q1.clone(),
            index: n,
        });
    }
    Ok(out)
}

fn euclid(v: &BigRational, count: usize) -> (BigInt, Vec<BigUint>, bool) {
    let a0 = floor_rat(v);
    let mut rest = v - BigRational::from_integer(a0.clone());
    let mut qs = Vec::new();
    while !rest.is_zero() {
        if qs.len() + 1 >= count {
            return (a0, qs, false);
        }
        let inv = rest.recip();
        let a = floor_rat(&inv);
        rest = inv - BigRational::from_integer(a.clone());
        qs.push(a.to_biguint().expect("positive quotient"));
    }
    (a0, qs, true)
}

/// Quotients certified by running the expansion on both ends of an enclosure.
fn certified_prefix(iv: &Interval, count: usize) -> Option<(BigInt, Vec<BigUint>)> {
    let a0 = iv.floor()?;
    let shift = BigRational::from_integer(a0.clone());
    let mut lo = iv.lo() - &shift;
    let mut hi = iv.hi() - &shift;
    let mut qs = Vec::new();
    while qs.len() + 1 < count {
        if lo.is_zero() {
            break;
        }
        let (l2, h2) = (hi.recip(), lo.recip());
        let a = floor_rat(&l2);
        if floor_rat(&h2) != a {
            break;
        }
        let s = BigRational::from_integer(a.clone());
        lo = l2 - &s;
        hi = h2 - &s;
        qs.push(a.to_biguint()?);
    }
    Some((a0, qs))
}

/// The first `count` terms (`a0` included) of the expansion of `x`, each
/// certified by interval comparison. Rationals that terminate sooner come
/// back complete and canonical.
pub fn cf_expand(x: &Real, count: usize, ctx: &Precision) -> Result<ContinuedFraction> {
    if count == 0 {
        return Err(Error::domain("count must be positive"));
    }
    if let Some(v) = x.as_exact() {
        let (a0, qs, done) = euclid(v, count);
        return if done {
            ContinuedFraction::finite(a0, qs)
        } else {
            Ok(ContinuedFraction {
                a0,
                tail: Tail::Truncated(qs),
            })
        };
    }
    let mut bits = ctx.start_bits;
    for prec in ctx.ladder() {
        bits = prec;
        let iv = x.enclose(prec)?;
        if iv.is_point() {
            return cf_expand(&Real::Exact(iv.lo().clone()), count, ctx);
        }
        if let Some((a0, qs)) = certified_prefix(&iv, count) {
            if qs.len() + 1 >= count {
                return Ok(ContinuedFraction {
                    a0,
                    tail: Tail::Truncated(qs),
                });
            }
        }
    }
    Err(Error::exhausted(format!("certifying {count} partial quotients"), bits))
}

/// Schedules for generated partial quotients.
#[derive(Clone)]
pub enum QuotientRule {
    Constant(u64),
    Cycle(Vec<u64>),
    /// Verbatim `a0` and prefix, then a repeating cycle.
    PrefixThenCycle { a0: i64, prefix: Vec<u64>, cycle: Vec<u64> },
    Generated {
        name: String,
        f: Arc<dyn Fn(usize) -> u64 + Send + Sync>,
    },
}

fn clamp(a: u64, bound: u64) -> BigUint {
    BigUint::from(a.clamp(1, bound))
}

/// An infinite expansion whose generated quotients all lie in `[1, bound]`.
///
/// Rule values outside that range are clamped into it. An explicit prefix
/// is taken verbatim, so eventually-bounded expansions such as
/// `[a0; a1, ..., aM, 1, 1, ...]` can be built.
pub fn make_bounded_quotient(bound: u64, rule: QuotientRule) -> Result<ContinuedFraction> {
    if bound == 0 {
        return Err(Error::domain("quotient bound must be at least 1"));
    }
    let to_big = |v: &[u64]| v.iter().map(|&a| clamp(a, bound)).collect::<Vec<_>>();
    match rule {
        QuotientRule::Constant(c) => ContinuedFraction::periodic(BigInt::zero(), vec![], vec![clamp(c, bound)]),
        QuotientRule::Cycle(c) => {
            if c.is_empty() {
                return Err(Error::domain("empty cycle"));
            }
            ContinuedFraction::periodic(BigInt::zero(), vec![], to_big(&c))
        }
        QuotientRule::PrefixThenCycle { a0, prefix, cycle } => {
            if cycle.is_empty() {
                return Err(Error::domain("empty cycle"));
            }
            let prefix: Vec<BigUint> = prefix.iter().map(|&a| BigUint::from(a)).collect();
            ContinuedFraction::periodic(a0.into(), prefix, to_big(&cycle))
        }
        QuotientRule::Generated { name, f } => {
            ContinuedFraction::from_rule(BigInt::zero(), vec![], name, move |n| clamp(f(n), bound))
        }
    }
}

/// Exponent schedules `g(j)`, `j >= 1`, for `x = Σ_j 2^{-g(j)}`.
#[derive(Clone)]
pub enum GapSchedule {
    Factorial,
    PowerOfTwo,
    Square,
    Linear,
    Custom {
        name: String,
        g: Arc<dyn Fn(u32) -> Option<u64> + Send + Sync>,
    },
}

impl fmt::Debug for GapSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl GapSchedule {
    pub fn name(&self) -> String {
        match self {
            GapSchedule::Factorial => "fact".into(),
            GapSchedule::PowerOfTwo => "pow2".into(),
            GapSchedule::Square => "square".into(),
            GapSchedule::Linear => "linear".into(),
            GapSchedule::Custom { name, .. } => name.clone(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fact" | "factorial" => Ok(GapSchedule::Factorial),
            "pow2" => Ok(GapSchedule::PowerOfTwo),
            "square" => Ok(GapSchedule::Square),
            "linear" => Ok(GapSchedule::Linear),
            _ => Err(Error::parse(format!("unknown gap schedule {s:?}"))),
        }
    }

    /// `g(j)`; `None` once it no longer fits in 64 bits.
    pub fn exponent(&self, j: u32) -> Option<u64> {
        match self {
            GapSchedule::Factorial => (1..=j as u64).try_fold(1u64, |acc, i| acc.checked_mul(i)),
            GapSchedule::PowerOfTwo => 1u64.checked_shl(j).filter(|_| j < 64),
            GapSchedule::Square => (j as u64).checked_mul(j as u64),
            GapSchedule::Linear => Some(j as u64),
            GapSchedule::Custom { g, .. } => g(j),
        }
    }
}

/// Terms checked when validating a schedule.
const SCHEDULE_CHECK: u32 = 8;

/// `x = Σ_{j>=1} 2^{-g(j)}` together with its designated denominators
/// `n_j = 2^{g(j)}`.
#[derive(Clone, Debug)]
pub struct Liouville {
    schedule: GapSchedule,
}

/// Builds the lacunary binary number for a gap schedule.
///
/// The schedule must start at `g(1) >= 1` and have strictly increasing
/// gaps `g(j+1) - g(j)` (at least quadratic growth); otherwise the
/// designated denominators are not good enough to certify anything.
pub fn make_liouville(schedule: GapSchedule) -> Result<Liouville> {
    let g: Vec<Option<u64>> = (1..=SCHEDULE_CHECK + 1).map(|j| schedule.exponent(j)).collect();
    match g[0] {
        Some(v) if v >= 1 => {}
        _ => return Err(Error::domain("schedule must start at g(1) >= 1")),
    }
    let mut prev_gap = 0u64;
    for w in g.windows(2) {
        let (Some(a), b) = (w[0], w[1]) else { break };
        let Some(b) = b else { break };
        if b <= a {
            return Err(Error::domain("gap schedule must be strictly increasing"));
        }
        let gap = b - a;
        if gap <= prev_gap {
            return Err(Error::domain(format!(
                "schedule {} grows too slowly: gaps must strictly increase",
                schedule.name()
            )));
        }
        prev_gap = gap;
    }
    Ok(Liouville { schedule })
}

impl Liouville {
    pub fn schedule(&self) -> &GapSchedule {
        &self.schedule
    }

    pub fn value(&self) -> Real {
        Real::from_approx(self.clone())
    }

    /// `n_j = 2^{g(j)}`.
    pub fn denominator(&self, j: u32) -> Option<BigUint> {
        let g = self.schedule.exponent(j)?;
        Some(BigUint::one() << usize::try_from(g).ok()?)
    }

    /// Designated denominators `n_1, ..., n_count` (those representable).
    pub fn designated(&self, count: usize) -> Vec<BigUint> {
        (1..=count as u32).map_while(|j| self.denominator(j)).collect()
    }

    /// Analytic bound `‖n_j x‖ <= 2^{g(j) - g(j+1) + 1}`.
    pub fn dist_bound(&self, j: u32) -> Option<BigRational> {
        let a = self.schedule.exponent(j)?;
        let b = self.schedule.exponent(j + 1)?;
        let e = (b - a - 1) as usize;
        Some(BigRational::new(BigInt::one(), BigInt::one() << e))
    }

    pub fn literal(&self) -> String {
        format!("liouville:{}", self.schedule.name())
    }
}

impl Approximate for Liouville {
    fn enclose(&self, prec: u32) -> Result<Interval> {
        let limit = prec as u64 + 2;
        let mut num = BigInt::zero();
        let mut scale = 0u64;
        let mut j = 1;
        let tail_exp = loop {
            match self.schedule.exponent(j) {
                Some(g) if g <= limit => {
                    // rescale accumulated numerator to 2^-g
                    num <<= (g - scale) as usize;
                    scale = g;
                    num += 1;
                    j += 1;
                }
                Some(g) => break g,
                None => break u64::MAX,
            }
        };
        let scale32 = u32::try_from(scale).map_err(|_| Error::exhausted("summing lacunary series", prec))?;
        let lo = dyadic(num, scale32);
        // Σ_{i >= j} 2^{-g(i)} <= 2^{1 - g(j)} and g(j) > prec + 2
        let tail_bits = tail_exp.min(limit + 1) - 1;
        let tail = dyadic(BigInt::one(), u32::try_from(tail_bits).unwrap_or(u32::MAX));
        let hi = &lo + tail;
        Ok(Interval::new(lo, hi))
    }

    fn literal(&self) -> Option<String> {
        Some(Liouville::literal(self))
    }
}
