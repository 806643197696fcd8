//! Exact decisions for rational `x, y`: whether `Z x + y` meets `Z^d`,
//! orbit periods and minima, and finiteness of the sums.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::TorusVector;

/// Rational `x, y` reduced to `[0, 1)^d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPair {
    x: Vec<BigRational>,
    y: Vec<BigRational>,
}

fn reduce(v: &BigRational) -> BigRational {
    v - BigRational::from_integer(v.floor().to_integer())
}

impl RationalPair {
    pub fn new(x: Vec<BigRational>, y: Vec<BigRational>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::domain("dimension must be positive"));
        }
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        Ok(RationalPair {
            x: x.iter().map(reduce).collect(),
            y: y.iter().map(reduce).collect(),
        })
    }

    pub fn from_vectors(x: &TorusVector, y: &TorusVector) -> Result<Self> {
        x.check_dim(y)?;
        match (x.exact_coords(), y.exact_coords()) {
            (Some(x), Some(y)) => RationalPair::new(x, y),
            _ => Err(Error::domain("rational inputs required")),
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[BigRational] {
        &self.x
    }

    pub fn y(&self) -> &[BigRational] {
        &self.y
    }
}

/// The solutions `n ≡ least_n (mod modulus)` of `n x + y ∈ Z^d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerPoint {
    /// Least positive solution.
    pub least_n: BigUint,
    pub modulus: BigUint,
}

/// Solve `a n ≡ c (mod m)`, returning `(r, m')` with all solutions `n ≡ r (mod m')`.
fn solve_linear(a: &BigInt, c: &BigInt, m: &BigInt) -> Option<(BigInt, BigInt)> {
    let a = a.mod_floor(m);
    let c = c.mod_floor(m);
    let g = a.gcd(m);
    if !(&c % &g).is_zero() {
        return None;
    }
    let m2 = m / &g;
    let a2 = &a / &g;
    let c2 = &c / &g;
    let inv = mod_inverse(&a2, &m2)?;
    Some(((c2 * inv).mod_floor(&m2), m2))
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    if m.is_one() {
        return Some(BigInt::zero());
    }
    let e = a.extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}

/// Combine `n ≡ r1 (mod m1)` and `n ≡ r2 (mod m2)`.
fn crt(r1: &BigInt, m1: &BigInt, r2: &BigInt, m2: &BigInt) -> Option<(BigInt, BigInt)> {
    let g = m1.gcd(m2);
    let diff = r2 - r1;
    if !(&diff % &g).is_zero() {
        return None;
    }
    let m2g = m2 / &g;
    let t = ((diff / &g) * mod_inverse(&(m1 / &g).mod_floor(&m2g), &m2g)?).mod_floor(&m2g);
    let l = m1 / &g * m2;
    Some(((r1 + m1 * t).mod_floor(&l), l))
}

/// Decides whether some integer `n` puts `n x + y` on the lattice.
pub fn contains_integer_point(pair: &RationalPair) -> Option<IntegerPoint> {
    let mut acc = (BigInt::zero(), BigInt::one());
    for (xi, yi) in pair.x.iter().zip(&pair.y) {
        let (p, q) = (xi.numer(), xi.denom());
        let (a, b) = (yi.numer(), yi.denom());
        // n p b + a q ≡ 0 (mod q b)
        let m = q * b;
        let sol = solve_linear(&(p * b), &-(a * q), &m)?;
        acc = crt(&acc.0, &acc.1, &sol.0, &sol.1)?;
    }
    let (r, m) = acc;
    let least = if r.is_zero() { m.clone() } else { r };
    Some(IntegerPoint {
        least_n: least.to_biguint().expect("positive"),
        modulus: m.to_biguint().expect("positive"),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitSummary {
    /// Least `n ≥ 1` with `n x ∈ Z^d`.
    pub period: BigUint,
    pub hit_zero: bool,
    pub first_zero_n: Option<BigUint>,
    /// `min_{n ≥ 1} ‖n x + y‖`, attained within one period.
    pub min_dist: BigRational,
}

impl OrbitSummary {
    /// `min_{n ≥ ℓ} ‖n x + y‖`; every residue class recurs past any `ℓ`.
    pub fn min_dist_from(&self, _ell: u64) -> BigRational {
        self.min_dist.clone()
    }
}

/// Longest period [`orbit_summary`] will enumerate.
pub const MAX_PERIOD: u64 = 1 << 36;

pub fn orbit_summary(pair: &RationalPair) -> Result<OrbitSummary> {
    let period = pair
        .x
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
        .to_biguint()
        .expect("positive");
    let steps = period
        .to_u64()
        .filter(|&p| p <= MAX_PERIOD)
        .ok_or_else(|| Error::domain(format!("orbit period {period} is too long to enumerate")))?;
    let l = pair
        .x
        .iter()
        .chain(&pair.y)
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let scaled = |v: &BigRational| v.numer() * (&l / v.denom());
    let xs: Vec<BigInt> = pair.x.iter().map(scaled).collect();
    let ys: Vec<BigInt> = pair.y.iter().map(scaled).collect();
    let (best, first_zero) = match l.to_u64().filter(|&v| v < 1 << 62) {
        Some(lw) => {
            let lw = lw as u128;
            let xs: Vec<u128> = xs.iter().map(|v| v.to_u128().unwrap()).collect();
            let ys: Vec<u128> = ys.iter().map(|v| v.to_u128().unwrap()).collect();
            let mut best = u128::MAX;
            let mut first = None;
            for n in 1..=steps as u128 {
                let k = xs
                    .iter()
                    .zip(&ys)
                    .map(|(x, y)| {
                        let r = ((n % lw) * x + y) % lw;
                        r.min(lw - r)
                    })
                    .max()
                    .unwrap();
                if k == 0 && first.is_none() {
                    first = Some(BigUint::from(n));
                }
                best = best.min(k);
            }
            (BigInt::from(best), first)
        }
        None => {
            let mut best: Option<BigInt> = None;
            let mut first = None;
            for n in 1..=steps {
                let n = BigInt::from(n);
                let k = xs
                    .iter()
                    .zip(&ys)
                    .map(|(x, y)| {
                        let r = (&n * x + y).mod_floor(&l);
                        let s = &l - &r;
                        r.min(s)
                    })
                    .max()
                    .unwrap();
                if k.is_zero() && first.is_none() {
                    first = Some(n.to_biguint().unwrap());
                }
                best = Some(best.map_or(k.clone(), |b| b.min(k)));
            }
            (best.unwrap(), first)
        }
    };
    Ok(OrbitSummary {
        period,
        hit_zero: first_zero.is_some(),
        first_zero_n: first_zero,
        min_dist: BigRational::new(best, l),
    })
}

/// `S_ℓ(x, y) < ∞`, which for rational inputs does not depend on `ℓ`.
pub fn s_finite(pair: &RationalPair, _ell: u64) -> bool {
    contains_integer_point(pair).is_some()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Membership {
    Member,
    NonMember,
    /// The lattice condition fails in dimension above one, where it is only
    /// known to be sufficient.
    Unresolved,
}

/// Whether `y ∈ Φ(x)` for rational inputs.
pub fn phi_membership_rational(pair: &RationalPair) -> Membership {
    match (contains_integer_point(pair), pair.dim()) {
        (Some(_), _) => Membership::Member,
        (None, 1) => Membership::NonMember,
        (None, _) => Membership::Unresolved,
    }
}

/// `true` when some `n` in `1..=bound` puts `n x + y` on the lattice; an
/// enumeration used as an independent check of the congruence solver.
pub fn brute_force_hit(pair: &RationalPair, bound: u64) -> Option<u64> {
    (1..=bound).find(|&n| {
        pair.x
            .iter()
            .zip(&pair.y)
            .all(|(x, y)| (x * BigRational::from_integer(n.into()) + y).is_integer())
    })
}

impl std::fmt::Display for Membership {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Membership::Member => "member",
            Membership::NonMember => "non-member",
            Membership::Unresolved => "unresolved",
        })
    }
}
