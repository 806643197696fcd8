//! Orbit evaluators: the values `G(n)` of a gauge (sup distance or
//! weighted `‖·‖_r^d`) along `n ↦ n x + y`, in exact integer arithmetic for
//! rational inputs and in fixed-point interval arithmetic otherwise.

use std::fmt::Debug;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::numeric::interval::{floor_rat, pow2, rat_to_f64, round_half_even, Interval, Tri};
use crate::numeric::Real;

pub(crate) trait OrbitModel: Sync {
    type Dist: Clone + PartialEq + Send + Sync + Debug;

    fn dist(&self, n: u64) -> Self::Dist;
    fn cmp(&self, a: &Self::Dist, b: &Self::Dist) -> Tri;
    /// `a >= b` holds for every value compatible with the two enclosures.
    fn certainly_ge(&self, a: &Self::Dist, b: &Self::Dist) -> bool;
    /// `a`'s upper bound lies below `b`'s.
    fn tighter(&self, a: &Self::Dist, b: &Self::Dist) -> bool;
    fn is_zero(&self, a: &Self::Dist) -> bool;
    /// An enclosure of `min(a, b)` that needs no decision.
    fn hull_min(&self, a: &Self::Dist, b: &Self::Dist) -> Self::Dist;
    /// Fixed-point width in bits, 0 for exact models.
    fn bits(&self) -> u32;
    fn exact_gauge(&self, a: &Self::Dist) -> Option<Real>;
    fn gauge_interval(&self, a: &Self::Dist, prec: u32) -> Interval;
    fn approx_bounds(&self, a: &Self::Dist) -> (f64, f64);
    /// Numerator of `G^s` over [`OrbitModel::term_denominator`], when exact.
    fn term_numerator(&self, _a: &Self::Dist, _s: &BigRational) -> Option<BigUint> {
        None
    }
    fn term_denominator(&self, _s: &BigRational) -> Option<BigUint> {
        None
    }
}

/// Integer words for exact orbits modulo a common denominator `L`.
pub(crate) trait Word: Clone + Ord + Send + Sync + Debug {
    fn from_big(v: &BigUint) -> Self;
    fn to_big(&self) -> BigUint;
    /// `(n x + y) mod l`.
    fn affine(n: u64, x: &Self, y: &Self, l: &Self) -> Self;
    /// `min(r, l - r)`.
    fn fold(r: Self, l: &Self) -> Self;
    fn is_zero(&self) -> bool;
}

impl Word for u128 {
    fn from_big(v: &BigUint) -> Self {
        v.to_u128().expect("word fits")
    }
    fn to_big(&self) -> BigUint {
        BigUint::from(*self)
    }
    fn affine(n: u64, x: &Self, y: &Self, l: &Self) -> Self {
        // l < 2^63 keeps every intermediate below 2^127
        ((n as u128 % l) * x + y) % l
    }
    fn fold(r: Self, l: &Self) -> Self {
        r.min(l - r)
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
}

impl Word for BigUint {
    fn from_big(v: &BigUint) -> Self {
        v.clone()
    }
    fn to_big(&self) -> BigUint {
        self.clone()
    }
    fn affine(n: u64, x: &Self, y: &Self, l: &Self) -> Self {
        ((BigUint::from(n) % l) * x + y) % l
    }
    fn fold(r: Self, l: &Self) -> Self {
        let s = l - &r;
        r.min(s)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct ExactDist<W> {
    coord: usize,
    k: W,
}

/// Exact orbit of rational `x, y` with all coordinates over one modulus.
pub(crate) struct ExactOrbit<W> {
    l: W,
    l_big: BigUint,
    xs: Vec<W>,
    ys: Vec<W>,
    /// Gauge exponent per coordinate; `None` for a zero weight.
    exps: Vec<Option<BigRational>>,
    uniform: bool,
}

pub(crate) fn common_denominator(vals: &[&BigRational]) -> BigUint {
    vals.iter().fold(BigUint::one(), |acc, v| {
        acc.lcm(&v.denom().to_biguint().expect("positive denominator"))
    })
}

impl<W: Word> ExactOrbit<W> {
    /// `x`, `y` must be reduced to `[0, 1)`.
    pub fn new(x: &[BigRational], y: &[BigRational], exps: Vec<Option<BigRational>>, l: &BigUint) -> Self {
        let scale = |v: &BigRational| -> W {
            let n = v.numer() * BigInt::from(l.clone()) / v.denom();
            W::from_big(&n.to_biguint().expect("reduced coordinate"))
        };
        let first = exps.iter().flatten().next().cloned();
        let uniform = exps.iter().all(|e| e.is_some() && *e == first);
        ExactOrbit {
            l: W::from_big(l),
            l_big: l.clone(),
            xs: x.iter().map(scale).collect(),
            ys: y.iter().map(scale).collect(),
            exps,
            uniform,
        }
    }

    fn exp(&self, coord: usize) -> &BigRational {
        self.exps[coord].as_ref().expect("active coordinate")
    }

    fn cmp_vals(&self, a: &ExactDist<W>, b: &ExactDist<W>) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match (a.k.is_zero(), b.k.is_zero()) {
            (true, true) => return Equal,
            (true, false) => return Less,
            (false, true) => return Greater,
            _ => {}
        }
        if self.uniform || a.coord == b.coord || self.exps[a.coord] == self.exps[b.coord] {
            return a.k.cmp(&b.k);
        }
        // (ka/L)^ea vs (kb/L)^eb, raised to a common integer power
        let (ea, eb) = (self.exp(a.coord), self.exp(b.coord));
        let q = ea.denom().lcm(eb.denom());
        let alpha = (ea * BigRational::from_integer(q.clone())).to_integer().to_usize().expect("small exponent");
        let beta = (eb * BigRational::from_integer(q)).to_integer().to_usize().expect("small exponent");
        let lhs = num_traits::pow(a.k.to_big(), alpha) * num_traits::pow(self.l_big.clone(), beta);
        let rhs = num_traits::pow(b.k.to_big(), beta) * num_traits::pow(self.l_big.clone(), alpha);
        lhs.cmp(&rhs)
    }

    fn integral_powers(&self, s: &BigRational) -> Option<Vec<Option<usize>>> {
        self.exps
            .iter()
            .map(|e| match e {
                None => Some(None),
                Some(e) => {
                    let m = e * s;
                    m.is_integer().then(|| m.to_integer().to_usize()).flatten().map(Some)
                }
            })
            .collect()
    }
}

impl<W: Word> OrbitModel for ExactOrbit<W> {
    type Dist = ExactDist<W>;

    fn dist(&self, n: u64) -> ExactDist<W> {
        let mut best: Option<ExactDist<W>> = None;
        for i in 0..self.xs.len() {
            if self.exps[i].is_none() {
                continue;
            }
            let r = W::affine(n, &self.xs[i], &self.ys[i], &self.l);
            let cand = ExactDist {
                coord: i,
                k: W::fold(r, &self.l),
            };
            best = Some(match best {
                Some(b) if self.cmp_vals(&cand, &b) != std::cmp::Ordering::Greater => b,
                _ => cand,
            });
        }
        best.expect("at least one positive weight")
    }

    fn cmp(&self, a: &Self::Dist, b: &Self::Dist) -> Tri {
        self.cmp_vals(a, b).into()
    }

    fn certainly_ge(&self, a: &Self::Dist, b: &Self::Dist) -> bool {
        self.cmp_vals(a, b) != std::cmp::Ordering::Less
    }

    fn tighter(&self, a: &Self::Dist, b: &Self::Dist) -> bool {
        self.cmp_vals(a, b) == std::cmp::Ordering::Less
    }

    fn is_zero(&self, a: &Self::Dist) -> bool {
        a.k.is_zero()
    }

    fn hull_min(&self, a: &Self::Dist, b: &Self::Dist) -> Self::Dist {
        if self.cmp_vals(b, a) == std::cmp::Ordering::Less {
            b.clone()
        } else {
            a.clone()
        }
    }

    fn bits(&self) -> u32 {
        0
    }

    fn exact_gauge(&self, a: &Self::Dist) -> Option<Real> {
        let v = BigRational::new(a.k.to_big().into(), self.l_big.clone().into());
        Real::Exact(v).pow(self.exp(a.coord)).ok()
    }

    fn gauge_interval(&self, a: &Self::Dist, prec: u32) -> Interval {
        self.exact_gauge(a).and_then(|r| r.enclose(prec).ok()).expect("exact gauge")
    }

    fn approx_bounds(&self, a: &Self::Dist) -> (f64, f64) {
        let v = rat_to_f64(&BigRational::new(a.k.to_big().into(), self.l_big.clone().into()));
        let v = v.powf(rat_to_f64(self.exp(a.coord)));
        (v, v)
    }

    fn term_numerator(&self, a: &Self::Dist, s: &BigRational) -> Option<BigUint> {
        let powers = self.integral_powers(s)?;
        let top = powers.iter().flatten().copied().max()?;
        let m = powers[a.coord]?;
        Some(num_traits::pow(a.k.to_big(), m) * num_traits::pow(self.l_big.clone(), top - m))
    }

    fn term_denominator(&self, s: &BigRational) -> Option<BigUint> {
        let powers = self.integral_powers(s)?;
        let top = powers.iter().flatten().copied().max()?;
        Some(num_traits::pow(self.l_big.clone(), top))
    }
}

/// Fixed-point words representing `[0, 1)` as integers modulo `2^bits`.
pub(crate) trait FixedWord: Clone + Ord + Send + Sync + Debug {
    fn from_big(v: &BigUint) -> Self;
    fn to_big(&self) -> BigUint;
    fn zero() -> Self;
    fn half(bits: u32) -> Self;
    fn mul_wrap(&self, n: u64, bits: u32) -> Self;
    fn add_wrap(&self, o: &Self, bits: u32) -> Self;
    /// `min(self * n + add, cap)`.
    fn mul_add_sat(&self, n: u64, add: &Self, cap: &Self) -> Self;
    fn add_sat(&self, o: &Self, cap: &Self) -> Self;
    fn sub_floor(&self, o: &Self) -> Self;
    /// Distance to the nearest multiple of `2^bits`.
    fn fold(&self, bits: u32) -> Self;
    fn to_f64_scaled(&self, bits: u32) -> f64;
}

impl FixedWord for u128 {
    fn from_big(v: &BigUint) -> Self {
        v.to_u128().unwrap_or(u128::MAX)
    }
    fn to_big(&self) -> BigUint {
        BigUint::from(*self)
    }
    fn zero() -> Self {
        0
    }
    fn half(_bits: u32) -> Self {
        1u128 << 127
    }
    fn mul_wrap(&self, n: u64, _bits: u32) -> Self {
        self.wrapping_mul(n as u128)
    }
    fn add_wrap(&self, o: &Self, _bits: u32) -> Self {
        self.wrapping_add(*o)
    }
    fn mul_add_sat(&self, n: u64, add: &Self, cap: &Self) -> Self {
        self.checked_mul(n as u128)
            .and_then(|v| v.checked_add(*add))
            .map_or(*cap, |v| v.min(*cap))
    }
    fn add_sat(&self, o: &Self, cap: &Self) -> Self {
        self.checked_add(*o).map_or(*cap, |v| v.min(*cap))
    }
    fn sub_floor(&self, o: &Self) -> Self {
        self.saturating_sub(*o)
    }
    fn fold(&self, _bits: u32) -> Self {
        if *self <= 1u128 << 127 {
            *self
        } else {
            self.wrapping_neg()
        }
    }
    fn to_f64_scaled(&self, _bits: u32) -> f64 {
        *self as f64 * 2f64.powi(-128)
    }
}

impl FixedWord for BigUint {
    fn from_big(v: &BigUint) -> Self {
        v.clone()
    }
    fn to_big(&self) -> BigUint {
        self.clone()
    }
    fn zero() -> Self {
        <BigUint as Zero>::zero()
    }
    fn half(bits: u32) -> Self {
        BigUint::one() << (bits as usize - 1)
    }
    fn mul_wrap(&self, n: u64, bits: u32) -> Self {
        let v = self * n;
        v & ((BigUint::one() << bits as usize) - 1u32)
    }
    fn add_wrap(&self, o: &Self, bits: u32) -> Self {
        (self + o) & ((BigUint::one() << bits as usize) - 1u32)
    }
    fn mul_add_sat(&self, n: u64, add: &Self, cap: &Self) -> Self {
        (self * n + add).min(cap.clone())
    }
    fn add_sat(&self, o: &Self, cap: &Self) -> Self {
        (self + o).min(cap.clone())
    }
    fn sub_floor(&self, o: &Self) -> Self {
        if self > o {
            self - o
        } else {
            <BigUint as Zero>::zero()
        }
    }
    fn fold(&self, bits: u32) -> Self {
        let full = BigUint::one() << bits as usize;
        let h = BigUint::one() << (bits as usize - 1);
        if *self <= h {
            self.clone()
        } else {
            full - self
        }
    }
    fn to_f64_scaled(&self, bits: u32) -> f64 {
        let shift = bits.saturating_sub(64) as usize;
        (self >> shift).to_f64().unwrap_or(0.0) * 2f64.powi(-(bits.min(64) as i32))
    }
}

/// Center and error radius, in units of `2^-bits`, of an enclosure mod 1.
pub(crate) fn to_fixed(iv: &Interval, bits: u32) -> (BigUint, BigUint) {
    let f = BigRational::from_integer(floor_rat(iv.lo()));
    let scale = BigRational::from_integer(pow2(bits));
    let a = (iv.lo() - &f) * &scale;
    let b = (iv.hi() - &f) * &scale;
    let c = round_half_even(&((&a + &b) / BigInt::from(2)));
    let cr = BigRational::from_integer(c.clone());
    let spread = (&cr - &a).max(&b - &cr);
    let err = -floor_rat(&-spread);
    let modulus = pow2(bits);
    let c = c.mod_floor(&modulus);
    (
        c.to_biguint().expect("reduced"),
        err.max(BigInt::zero()).to_biguint().expect("nonnegative"),
    )
}

/// Per-coordinate fixed-point data for `n x + y`.
pub(crate) struct FixedCoords<W> {
    bits: u32,
    cx: Vec<W>,
    ex: Vec<W>,
    cy: Vec<W>,
    ey: Vec<W>,
    half: W,
}

impl<W: FixedWord> FixedCoords<W> {
    pub fn new(x: &[Interval], y: &[Interval], bits: u32) -> Self {
        let half = W::half(bits);
        let split = |v: &[Interval]| -> (Vec<W>, Vec<W>) {
            v.iter()
                .map(|iv| {
                    let (c, e) = to_fixed(iv, bits);
                    (W::from_big(&c), W::from_big(&e).min(half.clone()))
                })
                .unzip()
        };
        let (cx, ex) = split(x);
        let (cy, ey) = split(y);
        FixedCoords {
            bits,
            cx,
            ex,
            cy,
            ey,
            half,
        }
    }

    fn dim(&self) -> usize {
        self.cx.len()
    }

    /// Bounds `(lo, hi)` on `‖n x_i + y_i‖` in units of `2^-bits`.
    fn coord(&self, n: u64, i: usize) -> (W, W) {
        let c = self.cx[i].mul_wrap(n, self.bits).add_wrap(&self.cy[i], self.bits);
        let err = self.ex[i].mul_add_sat(n, &self.ey[i], &self.half);
        let d = c.fold(self.bits);
        (d.sub_floor(&err), d.add_sat(&err, &self.half))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Bounds<W> {
    lo: W,
    hi: W,
}

/// Sup-norm gauge with fixed-point interval bounds.
pub(crate) struct FixedSup<W> {
    coords: FixedCoords<W>,
}

impl<W: FixedWord> FixedSup<W> {
    pub fn new(coords: FixedCoords<W>) -> Self {
        FixedSup { coords }
    }
}

impl<W: FixedWord> OrbitModel for FixedSup<W> {
    type Dist = Bounds<W>;

    fn dist(&self, n: u64) -> Bounds<W> {
        let (mut lo, mut hi) = self.coords.coord(n, 0);
        for i in 1..self.coords.dim() {
            let (l, h) = self.coords.coord(n, i);
            if l > lo {
                lo = l;
            }
            if h > hi {
                hi = h;
            }
        }
        Bounds { lo, hi }
    }

    fn cmp(&self, a: &Bounds<W>, b: &Bounds<W>) -> Tri {
        if a.hi < b.lo {
            Tri::Less
        } else if a.lo > b.hi {
            Tri::Greater
        } else if a.lo == a.hi && b.lo == b.hi && a.lo == b.lo {
            Tri::Equal
        } else {
            Tri::Undecided
        }
    }

    fn certainly_ge(&self, a: &Bounds<W>, b: &Bounds<W>) -> bool {
        a.lo >= b.hi
    }

    fn tighter(&self, a: &Bounds<W>, b: &Bounds<W>) -> bool {
        a.hi < b.hi
    }

    fn is_zero(&self, a: &Bounds<W>) -> bool {
        a.hi == W::zero()
    }

    fn hull_min(&self, a: &Bounds<W>, b: &Bounds<W>) -> Bounds<W> {
        Bounds {
            lo: a.lo.clone().min(b.lo.clone()),
            hi: a.hi.clone().min(b.hi.clone()),
        }
    }

    fn bits(&self) -> u32 {
        self.coords.bits
    }

    fn exact_gauge(&self, a: &Bounds<W>) -> Option<Real> {
        (a.lo == a.hi).then(|| Real::Exact(BigRational::new(a.lo.to_big().into(), pow2(self.coords.bits))))
    }

    fn gauge_interval(&self, a: &Bounds<W>, _prec: u32) -> Interval {
        let s = pow2(self.coords.bits);
        Interval::new(
            BigRational::new(a.lo.to_big().into(), s.clone()),
            BigRational::new(a.hi.to_big().into(), s),
        )
    }

    fn approx_bounds(&self, a: &Bounds<W>) -> (f64, f64) {
        (a.lo.to_f64_scaled(self.coords.bits), a.hi.to_f64_scaled(self.coords.bits))
    }
}

/// Weighted gauge `max_i ‖v_i‖^{e_i}` for non-exact inputs, as intervals.
pub(crate) struct FixedWeighted<W> {
    coords: FixedCoords<W>,
    exps: Vec<Option<BigRational>>,
}

impl<W: FixedWord> FixedWeighted<W> {
    pub fn new(coords: FixedCoords<W>, exps: Vec<Option<BigRational>>) -> Self {
        FixedWeighted { coords, exps }
    }
}

impl<W: FixedWord> OrbitModel for FixedWeighted<W> {
    type Dist = Interval;

    fn dist(&self, n: u64) -> Interval {
        let bits = self.coords.bits;
        let s = pow2(bits);
        let mut acc: Option<Interval> = None;
        for (i, e) in self.exps.iter().enumerate() {
            let Some(e) = e else { continue };
            let (lo, hi) = self.coords.coord(n, i);
            let iv = Interval::new(
                BigRational::new(lo.to_big().into(), s.clone()),
                BigRational::new(hi.to_big().into(), s.clone()),
            )
            .pow_ratio(e, bits)
            .expect("nonnegative distance");
            acc = Some(match acc {
                Some(a) => a.max(&iv),
                None => iv,
            });
        }
        acc.expect("at least one positive weight")
    }

    fn cmp(&self, a: &Interval, b: &Interval) -> Tri {
        a.cmp(b)
    }

    fn certainly_ge(&self, a: &Interval, b: &Interval) -> bool {
        a.lo() >= b.hi()
    }

    fn tighter(&self, a: &Interval, b: &Interval) -> bool {
        a.hi() < b.hi()
    }

    fn is_zero(&self, a: &Interval) -> bool {
        a.hi().is_zero()
    }

    fn hull_min(&self, a: &Interval, b: &Interval) -> Interval {
        a.min(b)
    }

    fn bits(&self) -> u32 {
        self.coords.bits
    }

    fn exact_gauge(&self, a: &Interval) -> Option<Real> {
        a.is_point().then(|| Real::Exact(a.lo().clone()))
    }

    fn gauge_interval(&self, a: &Interval, _prec: u32) -> Interval {
        a.clone()
    }

    fn approx_bounds(&self, a: &Interval) -> (f64, f64) {
        (rat_to_f64(a.lo()), rat_to_f64(a.hi()))
    }
}
