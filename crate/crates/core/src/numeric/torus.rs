//! Points of the torus `R^d / Z^d` and the distances used on it.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::interval::floor_rat;
use super::real::Real;
use crate::error::{Error, Result};

/// A point of `R^d` taken modulo `Z^d`.
///
/// Exact coordinates are reduced to `[0, 1)`. Refinable coordinates are
/// shifted by the integer part whenever it can be certified at moderate
/// precision; otherwise by the floor of an enclosure midpoint, so they lie
/// within one enclosure radius of `[0, 1)`.
#[derive(Clone, Debug)]
pub struct TorusVector {
    coords: Vec<Real>,
}

fn reduce(c: Real) -> Result<Real> {
    match &c {
        Real::Exact(v) => Ok(Real::Exact(v - BigRational::from_integer(floor_rat(v)))),
        _ => {
            let mut k = None;
            let mut mid = None;
            for prec in [64u32, 128, 256] {
                let iv = c.enclose(prec)?;
                if let Some(f) = iv.floor() {
                    k = Some(f);
                    break;
                }
                mid = Some(floor_rat(&iv.midpoint()));
            }
            let k = k.or(mid).unwrap_or_default();
            if k.is_zero() {
                Ok(c)
            } else {
                Ok(c.add_rational(&BigRational::from_integer(-k)))
            }
        }
    }
}

impl TorusVector {
    pub fn new(coords: Vec<Real>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::domain("torus vectors need dimension at least 1"));
        }
        let coords = coords.into_iter().map(reduce).collect::<Result<Vec<_>>>()?;
        Ok(TorusVector { coords })
    }

    pub fn from_rationals(coords: Vec<BigRational>) -> Result<Self> {
        Self::new(coords.into_iter().map(Real::Exact).collect())
    }

    pub fn zero(dim: usize) -> Self {
        TorusVector {
            coords: vec![Real::zero(); dim.max(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Real] {
        &self.coords
    }

    pub fn is_exact(&self) -> bool {
        self.coords.iter().all(Real::is_exact)
    }

    pub fn exact_coords(&self) -> Option<Vec<BigRational>> {
        self.coords.iter().map(|c| c.as_exact().cloned()).collect()
    }

    pub fn check_dim(&self, other: &TorusVector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn neg(&self) -> Result<TorusVector> {
        TorusVector::new(self.coords.iter().map(Real::neg).collect())
    }

    pub fn add(&self, other: &TorusVector) -> Result<TorusVector> {
        self.check_dim(other)?;
        TorusVector::new(self.coords.iter().zip(&other.coords).map(|(a, b)| a.add(b)).collect())
    }

    /// `c * self` for a rational scalar (used for `x / v` and `k x`).
    pub fn scale(&self, c: &BigRational) -> Result<TorusVector> {
        TorusVector::new(self.coords.iter().map(|a| a.scale(c)).collect())
    }

    pub fn literal(&self) -> String {
        let parts: Vec<String> = self.coords.iter().map(Real::literal).collect();
        if parts.len() == 1 {
            parts[0].clone()
        } else {
            format!("({})", parts.join(","))
        }
    }

    /// Structural identity: equal exact coordinates or shared refinable ones.
    pub fn same_as(&self, other: &TorusVector) -> bool {
        self.dim() == other.dim()
            && self.coords.iter().zip(&other.coords).all(|(a, b)| match (a, b) {
                (Real::Exact(p), Real::Exact(q)) => p == q,
                (Real::Approx(p), Real::Approx(q)) => std::sync::Arc::ptr_eq(p, q),
                (Real::Power { base: b1, exp: e1 }, Real::Power { base: b2, exp: e2 }) => b1 == b2 && e1 == e2,
                _ => false,
            })
    }
}

/// Simplex weights `r` with `r_i >= 0` and `Σ r_i = 1`, held exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weights {
    r: Vec<BigRational>,
}

impl Weights {
    pub fn new(r: Vec<BigRational>) -> Result<Self> {
        if r.is_empty() {
            return Err(Error::domain("weights need dimension at least 1"));
        }
        if r.iter().any(Signed::is_negative) {
            return Err(Error::domain("weights must be nonnegative"));
        }
        let total: BigRational = r.iter().sum();
        if !total.is_one() {
            return Err(Error::domain(format!("weights sum to {total}, not 1")));
        }
        Ok(Weights { r })
    }

    pub fn uniform(d: usize) -> Self {
        let d = d.max(1);
        Weights {
            r: vec![BigRational::new(BigInt::one(), BigInt::from(d)); d],
        }
    }

    pub fn dim(&self) -> usize {
        self.r.len()
    }

    pub fn values(&self) -> &[BigRational] {
        &self.r
    }

    pub fn is_uniform(&self) -> bool {
        *self == Weights::uniform(self.dim())
    }

    /// Per-coordinate exponents `1 / r_i`; `None` marks a zero weight.
    pub fn exponents(&self) -> Vec<Option<BigRational>> {
        self.r
            .iter()
            .map(|w| (!w.is_zero()).then(|| w.recip()))
            .collect()
    }
}

/// An exponent `σ >= 1/d` for the σ-regime sums, which use `‖·‖^(1/σ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exponent {
    sigma: BigRational,
}

impl Exponent {
    pub fn new(sigma: BigRational, dim: usize) -> Result<Self> {
        let floor = BigRational::new(BigInt::one(), BigInt::from(dim.max(1)));
        if sigma < floor {
            return Err(Error::domain(format!("sigma {sigma} below 1/d = {floor}")));
        }
        Ok(Exponent { sigma })
    }

    pub fn sigma(&self) -> &BigRational {
        &self.sigma
    }

    pub fn sum_exponent(&self) -> BigRational {
        self.sigma.recip()
    }
}

/// Sup-norm distance to `Z^d`: `max_i min(c_i, 1 - c_i)`, in `[0, 1/2]`.
pub fn torus_dist(v: &TorusVector) -> Real {
    let per: Vec<Real> = v.coords.iter().map(Real::dist_to_int).collect();
    Real::max_of(&per)
}

/// `max_i ‖v_i‖^(1/r_i)`, the `d`-th power of the weighted norm.
///
/// A zero weight contributes 0: its coordinate distance is at most 1/2,
/// so the limit of `‖v_i‖^(1/r)` as `r -> 0` vanishes.
pub fn weighted_gauge(v: &TorusVector, w: &Weights) -> Result<Real> {
    if v.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            found: w.dim(),
        });
    }
    let mut terms = Vec::with_capacity(v.dim());
    for (c, e) in v.coords.iter().zip(w.exponents()) {
        let dist = c.dist_to_int();
        match e {
            Some(e) => terms.push(dist.pow(&e)?),
            None => {
                // distances to Z never reach 1, so this only guards
                // against an enclosure that failed to reduce
                let iv = dist.enclose(32)?;
                if iv.hi() >= &BigRational::one() {
                    return Err(Error::domain("zero weight on a coordinate whose distance straddles 1"));
                }
                terms.push(Real::zero());
            }
        }
    }
    Ok(Real::max_of(&terms))
}

/// Weighted norm `(max_i ‖v_i‖^(1/r_i))^(1/d)`.
pub fn weighted_dist(v: &TorusVector, w: &Weights) -> Result<Real> {
    let g = weighted_gauge(v, w)?;
    g.pow(&BigRational::new(BigInt::one(), BigInt::from(v.dim())))
}

/// `n x + y` reduced mod 1.
pub fn affine_orbit_point(x: &TorusVector, y: &TorusVector, n: &BigInt) -> Result<TorusVector> {
    x.check_dim(y)?;
    if !n.is_positive() {
        return Err(Error::domain("orbit times are positive integers"));
    }
    let n = BigRational::from_integer(n.clone());
    let coords = x
        .coords
        .iter()
        .zip(&y.coords)
        .map(|(a, b)| {
            Real::linear(
                vec![(n.clone(), a.clone()), (BigRational::one(), b.clone())],
                BigRational::zero(),
            )
        })
        .collect();
    TorusVector::new(coords)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn tv(c: &[(i64, i64)]) -> TorusVector {
        TorusVector::from_rationals(c.iter().map(|&(n, d)| q(n, d)).collect()).unwrap()
    }

    #[test]
    fn dist_examples() {
        assert_eq!(torus_dist(&tv(&[(1, 2)])).as_exact(), Some(&q(1, 2)));
        assert_eq!(torus_dist(&tv(&[(3, 10), (9, 10)])).as_exact(), Some(&q(3, 10)));
        let v = tv(&[(5, 4)]);
        assert_eq!(v.coords()[0].as_exact(), Some(&q(1, 4)));
        assert_eq!(torus_dist(&v).as_exact(), Some(&q(1, 4)));
    }

    #[test]
    fn weighted_examples() {
        let w = Weights::new(vec![q(1, 2), q(1, 2)]).unwrap();
        assert_eq!(weighted_dist(&tv(&[(3, 10), (1, 10)]), &w).unwrap().as_exact(), Some(&q(3, 10)));
        let w = Weights::new(vec![q(3, 4), q(1, 4)]).unwrap();
        let r = weighted_dist(&tv(&[(1, 2), (1, 5)]), &w).unwrap();
        // (max(0.5^{4/3}, 0.2^4))^{1/2} = 0.5^{2/3}
        let v = r.to_f64();
        assert!((v - 0.629960524947).abs() < 1e-11, "{v}");
    }

    #[test]
    fn zero_weight_contributes_nothing() {
        let w = Weights::new(vec![q(1, 1), q(0, 1)]).unwrap();
        let g = weighted_gauge(&tv(&[(1, 10), (1, 2)]), &w).unwrap();
        assert_eq!(g.as_exact(), Some(&q(1, 10)));
    }

    #[test]
    fn weights_validation() {
        assert!(Weights::new(vec![q(1, 2), q(1, 3)]).is_err());
        assert!(Weights::new(vec![q(3, 2), q(-1, 2)]).is_err());
        assert!(Weights::uniform(3).is_uniform());
        assert!(Exponent::new(q(1, 3), 2).is_err());
        assert_eq!(Exponent::new(q(1, 2), 2).unwrap().sum_exponent(), q(2, 1));
    }

    #[test]
    fn orbit_points() {
        let p = affine_orbit_point(&tv(&[(1, 3)]), &tv(&[(1, 3)]), &2.into()).unwrap();
        assert_eq!(p.coords()[0].as_exact(), Some(&q(0, 1)));
        let p = affine_orbit_point(&tv(&[(1, 2), (1, 3)]), &tv(&[(0, 1), (0, 1)]), &6.into()).unwrap();
        assert!(p.coords().iter().all(|c| c.as_exact() == Some(&q(0, 1))));
        let y = tv(&[(2, 7)]);
        let p = affine_orbit_point(&tv(&[(0, 1)]), &y, &11.into()).unwrap();
        assert_eq!(p.coords()[0].as_exact(), Some(&q(2, 7)));
        assert!(affine_orbit_point(&tv(&[(1, 2)]), &tv(&[(1, 2), (0, 1)]), &1.into()).is_err());
    }
}
