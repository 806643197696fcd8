//! Closed rational intervals with outward-rounded dyadic endpoints.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Outcome of a comparison between enclosures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tri {
    Less,
    Equal,
    Greater,
    Undecided,
}

impl Tri {
    pub fn decided(self) -> Option<Ordering> {
        match self {
            Tri::Less => Some(Ordering::Less),
            Tri::Equal => Some(Ordering::Equal),
            Tri::Greater => Some(Ordering::Greater),
            Tri::Undecided => None,
        }
    }
}

impl From<Ordering> for Tri {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Less => Tri::Less,
            Ordering::Equal => Tri::Equal,
            Ordering::Greater => Tri::Greater,
        }
    }
}

pub fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

pub fn floor_rat(v: &BigRational) -> BigInt {
    v.numer().div_floor(v.denom())
}

pub fn ceil_rat(v: &BigRational) -> BigInt {
    -((-v.numer()).div_floor(v.denom()))
}

pub fn dyadic(num: BigInt, bits: u32) -> BigRational {
    BigRational::new(num, pow2(bits))
}

pub fn half() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2))
}

/// Distance from `v` to the nearest integer.
pub fn dist_to_int(v: &BigRational) -> BigRational {
    let f = v - BigRational::from_integer(floor_rat(v));
    let g = BigRational::one() - &f;
    if f <= g {
        f
    } else {
        g
    }
}

/// Nearest integer, ties to even.
pub fn round_half_even(v: &BigRational) -> BigInt {
    let f = floor_rat(v);
    let frac = v - BigRational::from_integer(f.clone());
    match frac.cmp(&half()) {
        Ordering::Less => f,
        Ordering::Greater => f + 1,
        Ordering::Equal => {
            if f.is_even() {
                f
            } else {
                f + 1
            }
        }
    }
}

fn root_floor(v: &BigUint, q: u32) -> BigUint {
    if q == 1 {
        v.clone()
    } else {
        v.nth_root(q)
    }
}

fn root_ceil(v: &BigUint, q: u32) -> BigUint {
    let r = root_floor(v, q);
    if num_traits::pow(r.clone(), q as usize) < *v {
        r + 1u32
    } else {
        r
    }
}

/// Exact `q`-th root of a nonnegative rational, if it has one.
pub fn exact_root(v: &BigRational, q: u32) -> Option<BigRational> {
    if v.is_negative() {
        return None;
    }
    let n = v.numer().to_biguint()?;
    let d = v.denom().to_biguint()?;
    let rn = root_floor(&n, q);
    let rd = root_floor(&d, q);
    if num_traits::pow(rn.clone(), q as usize) == n && num_traits::pow(rd.clone(), q as usize) == d {
        Some(BigRational::new(rn.into(), rd.into()))
    } else {
        None
    }
}

/// Bounds on `v^(p/q)` on the grid `2^-prec`, for `v >= 0`.
fn pow_ratio_bound(v: &BigRational, p: u32, q: u32, prec: u32, up: bool) -> BigRational {
    if v.is_zero() {
        return BigRational::zero();
    }
    let n = num_traits::pow(v.numer().clone(), p as usize) << (prec as usize * q as usize);
    let d = num_traits::pow(v.denom().clone(), p as usize);
    let (quot, rem) = n.div_rem(&d);
    let quot = quot.to_biguint().expect("nonnegative");
    let r = if up {
        let c = if rem.is_zero() { quot } else { quot + 1u32 };
        root_ceil(&c, q)
    } else {
        root_floor(&quot, q)
    };
    dyadic(r.into(), prec)
}

/// A closed interval `[lo, hi]` of rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: BigRational,
    hi: BigRational,
}

impl Interval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Interval { lo, hi }
    }

    pub fn point(v: BigRational) -> Self {
        Interval {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn from_integer(v: impl Into<BigInt>) -> Self {
        Self::point(BigRational::from_integer(v.into()))
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigInt::from(2)
    }

    pub fn radius(&self) -> BigRational {
        self.width() / BigInt::from(2)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, v: &BigRational) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Width no larger than `2^-prec`.
    pub fn is_tight(&self, prec: u32) -> bool {
        self.width() * BigRational::from_integer(pow2(prec)) <= BigRational::one()
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
        }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval {
            lo: &self.lo - &o.hi,
            hi: &self.hi - &o.lo,
        }
    }

    pub fn neg(&self) -> Interval {
        Interval {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }

    pub fn scale(&self, c: &BigRational) -> Interval {
        let a = &self.lo * c;
        let b = &self.hi * c;
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let c = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Interval { lo, hi }
    }

    /// `None` when the interval contains zero.
    pub fn recip(&self) -> Option<Interval> {
        if self.lo <= BigRational::zero() && self.hi >= BigRational::zero() {
            return None;
        }
        Some(Interval {
            lo: self.hi.recip(),
            hi: self.lo.recip(),
        })
    }

    pub fn powi(&self, k: u32) -> Interval {
        if k == 0 {
            return Interval::from_integer(1);
        }
        let a = num_traits::pow(self.lo.clone(), k as usize);
        let b = num_traits::pow(self.hi.clone(), k as usize);
        if !self.lo.is_negative() || k % 2 == 1 {
            // monotone
            if a <= b {
                Interval { lo: a, hi: b }
            } else {
                Interval { lo: b, hi: a }
            }
        } else if !self.hi.is_positive() {
            Interval { lo: b, hi: a }
        } else {
            Interval {
                lo: BigRational::zero(),
                hi: a.max(b),
            }
        }
    }

    /// Enclosure of `self^e` for a rational exponent `e >= 0`.
    ///
    /// Integral exponents are exact; otherwise the interval must be
    /// nonnegative and the endpoints are rounded outward to `2^-prec`.
    pub fn pow_ratio(&self, e: &BigRational, prec: u32) -> Option<Interval> {
        if e.is_negative() {
            return None;
        }
        if e.is_integer() {
            return Some(self.powi(e.to_integer().to_u32()?));
        }
        if self.lo.is_negative() {
            return None;
        }
        let p = e.numer().to_u32()?;
        let q = e.denom().to_u32()?;
        Some(Interval {
            lo: pow_ratio_bound(&self.lo, p, q, prec, false),
            hi: pow_ratio_bound(&self.hi, p, q, prec, true),
        })
    }

    /// Round endpoints outward onto the grid `2^-prec`.
    pub fn round_out(&self, prec: u32) -> Interval {
        let s = BigRational::from_integer(pow2(prec));
        let lo = floor_rat(&(&self.lo * &s));
        let hi = ceil_rat(&(&self.hi * &s));
        Interval {
            lo: dyadic(lo, prec),
            hi: dyadic(hi, prec),
        }
    }

    pub fn max(&self, o: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().max(o.lo.clone()),
            hi: self.hi.clone().max(o.hi.clone()),
        }
    }

    pub fn min(&self, o: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().min(o.lo.clone()),
            hi: self.hi.clone().min(o.hi.clone()),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn cmp(&self, o: &Interval) -> Tri {
        if self.hi < o.lo {
            Tri::Less
        } else if self.lo > o.hi {
            Tri::Greater
        } else if self.is_point() && o.is_point() {
            Tri::Equal
        } else {
            Tri::Undecided
        }
    }

    /// Floor of every member, when they all share one.
    pub fn floor(&self) -> Option<BigInt> {
        let a = floor_rat(&self.lo);
        (a == floor_rat(&self.hi)).then_some(a)
    }

    /// Ceiling of every member, when they all share one.
    pub fn ceil(&self) -> Option<BigInt> {
        let a = ceil_rat(&self.lo);
        (a == ceil_rat(&self.hi)).then_some(a)
    }

    /// Nearest integer of every member (ties to even), when unambiguous.
    pub fn round_half_even(&self) -> Option<BigInt> {
        if self.is_point() {
            return Some(round_half_even(&self.lo));
        }
        let h = half();
        let a = floor_rat(&(&self.lo + &h));
        let b = floor_rat(&(&self.hi + &h));
        // a half-integer at or inside the interval makes rounding ambiguous
        let edge = BigRational::from_integer(a.clone()) - &h;
        if a == b && self.lo > edge {
            Some(a)
        } else {
            None
        }
    }

    /// Enclosure of the distance to the nearest integer.
    pub fn torus_dist(&self) -> Interval {
        let f = floor_rat(&self.lo);
        let fr = BigRational::from_integer(f);
        let a = &self.lo - &fr;
        let b = &self.hi - &fr;
        let one = BigRational::one();
        let h = half();
        if &b - &a >= one {
            return Interval {
                lo: BigRational::zero(),
                hi: h,
            };
        }
        let da = dist_to_int(&a);
        let db = dist_to_int(&b);
        let lo = if a.is_zero() || b >= one {
            BigRational::zero()
        } else {
            da.clone().min(db.clone())
        };
        let three_halves = &one + &h;
        let hi = if (a <= h && h <= b) || b >= three_halves {
            h
        } else {
            da.max(db)
        };
        Interval { lo, hi }
    }

    pub fn to_f64(&self) -> f64 {
        rat_to_f64(&self.midpoint())
    }
}

pub fn rat_to_f64(v: &BigRational) -> f64 {
    v.to_f64().unwrap_or_else(|| {
        // very large numerators or denominators: rescale through bit lengths
        let nb = v.numer().bits() as i64;
        let db = v.denom().bits() as i64;
        let shift = nb.max(db) - 60;
        let n = (v.numer().abs() >> shift.max(0) as usize).to_f64().unwrap_or(0.0);
        let d = (v.denom() >> shift.max(0) as usize).to_f64().unwrap_or(1.0);
        let sign = if v.numer().sign() == Sign::Minus { -1.0 } else { 1.0 };
        if d == 0.0 {
            sign * f64::INFINITY
        } else {
            sign * n / d
        }
    })
}

/// Decimal string of `v` rounded to `digits` places after the point.
pub fn rat_to_decimal(v: &BigRational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = v * BigRational::from_integer(scale.clone());
    let r = round_half_even(&scaled);
    let neg = r.is_negative();
    let r = r.abs();
    let (int, frac) = r.div_rem(&scale);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{:0>width$}", frac.to_string(), width = digits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn torus_dist_of_points() {
        assert_eq!(Interval::point(q(1, 2)).torus_dist(), Interval::point(q(1, 2)));
        assert_eq!(Interval::point(q(9, 10)).torus_dist(), Interval::point(q(1, 10)));
        assert_eq!(Interval::point(q(-3, 10)).torus_dist(), Interval::point(q(3, 10)));
    }

    #[test]
    fn torus_dist_across_integer_and_half() {
        let iv = Interval::new(q(9, 10), q(11, 10));
        assert_eq!(iv.torus_dist(), Interval::new(q(0, 1), q(1, 10)));
        let iv = Interval::new(q(2, 5), q(3, 5));
        assert_eq!(iv.torus_dist(), Interval::new(q(2, 5), q(1, 2)));
    }

    #[test]
    fn pow_ratio_brackets_value() {
        let two = Interval::from_integer(2);
        let r = two.pow_ratio(&q(1, 2), 60).unwrap();
        let s = 2f64.sqrt();
        assert!(rat_to_f64(r.lo()) <= s && s <= rat_to_f64(r.hi()));
        assert!(r.is_tight(59));
        let c = Interval::point(q(1, 8)).pow_ratio(&q(2, 3), 40).unwrap();
        assert_eq!(c, Interval::point(q(1, 4)));
    }

    #[test]
    fn rounding_rules() {
        assert_eq!(round_half_even(&q(5, 2)), BigInt::from(2));
        assert_eq!(round_half_even(&q(7, 2)), BigInt::from(4));
        assert_eq!(round_half_even(&q(-1, 2)), BigInt::from(0));
        assert_eq!(Interval::new(q(4, 10), q(6, 10)).round_half_even(), None);
        assert_eq!(Interval::new(q(6, 10), q(7, 10)).round_half_even(), Some(1.into()));
        assert_eq!(Interval::new(q(1, 2), q(7, 10)).round_half_even(), None);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(rat_to_decimal(&q(1, 3), 5), "0.33333");
        assert_eq!(rat_to_decimal(&q(-5, 4), 1), "-1.2");
        assert_eq!(rat_to_decimal(&q(2, 1), 0), "2");
    }

    #[test]
    fn exact_roots() {
        assert_eq!(exact_root(&q(4, 9), 2), Some(q(2, 3)));
        assert_eq!(exact_root(&q(2, 1), 2), None);
    }
}
