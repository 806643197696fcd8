//! Witnesses `y` for well-approximable `x`: from a fast subsequence
//! `n_k` with `‖n_k x‖` decaying geometrically, `y = -Σ_k (n_k x - a_k)`
//! makes `N_K x + y` tiny along `N_K = n_0 + ... + n_{K-1}`, which forces
//! the Kurzweil sums to converge.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{contains_integer_point, RationalPair};
use crate::numeric::interval::{pow2, rat_to_decimal};
use crate::numeric::{affine_orbit_point, torus_dist, Precision, Real, TorusVector};
use crate::par;
use crate::records::model::OrbitModel;
use crate::records::{drive, Gauge, OrbitVisitor};
use crate::sums::{partial_S, Certificate, CertificateKind, SumReport, SumSpec, Verdict};

/// Where candidate denominators come from.
#[derive(Clone, Debug)]
pub enum Source {
    /// Published good denominators (a Liouville construction, or multiples
    /// of the period for rational `x`).
    Designated(Vec<BigUint>),
    Candidates(Vec<BigUint>),
    /// Every `n ≤ B`.
    BruteForce(u64),
}

#[derive(Clone, Debug)]
pub struct ApproxSequence {
    pub n: Vec<BigUint>,
    /// `‖n_k x‖`.
    pub dist: Vec<Real>,
    /// `n_k ‖n_k x‖^d`.
    pub term_bounds: Vec<Real>,
    pub rho: BigRational,
    pub c: BigRational,
}

fn dist_at(x: &TorusVector, n: &BigUint) -> Result<Real> {
    let y = TorusVector::zero(x.dim());
    Ok(torus_dist(&affine_orbit_point(x, &y, &BigInt::from(n.clone()))?))
}

/// Multiples `q, 2q, ...` of the common denominator of a rational `x`.
pub fn period_multiples(x: &TorusVector, count: usize) -> Option<Vec<BigUint>> {
    let q = x
        .exact_coords()?
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
        .to_biguint()?;
    Some((1..=count).map(|k| &q * BigUint::from(k)).collect())
}

struct Admissible<'a> {
    x: &'a TorusVector,
    d: BigRational,
    rho: &'a BigRational,
    c: &'a BigRational,
    ctx: &'a Precision,
}

impl Admissible<'_> {
    /// `(‖n x‖, n ‖n x‖^d)` when `n` may follow a term at distance `prev`
    /// as term number `k`.
    fn check(&self, n: &BigUint, k: usize, prev: Option<&Real>) -> Result<Option<(Real, Real)>> {
        let dist = dist_at(self.x, n)?;
        if let Some(p) = prev {
            if !dist.le(&p.scale(self.rho), self.ctx)? {
                return Ok(None);
            }
        }
        let term = dist.pow(&self.d)?.scale(&BigRational::from_integer(n.clone().into()));
        let cap = self.c / BigRational::from_integer(pow2(k as u32));
        if !term.le(&Real::Exact(cap), self.ctx)? {
            return Ok(None);
        }
        Ok(Some((dist, term)))
    }
}

struct Screen {
    end: u64,
}

impl OrbitVisitor for Screen {
    type Out = Vec<(f64, f64)>;

    fn visit<M: OrbitModel>(&mut self, m: &M) -> Result<Self::Out> {
        let blocks: Vec<(u64, u64)> = (0..self.end.div_ceil(4096))
            .map(|i| (i * 4096 + 1, ((i + 1) * 4096).min(self.end)))
            .collect();
        Ok(par::map(&blocks, |&(a, b)| (a..=b).map(|n| m.approx_bounds(&m.dist(n))).collect::<Vec<_>>())
            .into_iter()
            .flatten()
            .collect())
    }
}

/// Greedily picks `n_0 < n_1 < ... < n_K`, each the smallest admissible
/// candidate with `‖n_k x‖ ≤ ρ ‖n_{k-1} x‖` and `n_k ‖n_k x‖^d ≤ C 2^{-k}`.
pub fn select_subsequence(
    x: &TorusVector,
    source: &Source,
    depth: usize,
    rho: &BigRational,
    c: &BigRational,
    ctx: &Precision,
) -> Result<ApproxSequence> {
    if depth == 0 {
        return Err(Error::domain("depth K must be at least 1"));
    }
    if !rho.is_positive() || *rho > BigRational::new(1.into(), 2.into()) {
        return Err(Error::domain("ρ must lie in (0, 1/2]"));
    }
    if !c.is_positive() {
        return Err(Error::domain("C must be positive"));
    }
    let adm = Admissible {
        x,
        d: BigRational::from_integer(x.dim().into()),
        rho,
        c,
        ctx,
    };
    let mut seq = ApproxSequence {
        n: Vec::new(),
        dist: Vec::new(),
        term_bounds: Vec::new(),
        rho: rho.clone(),
        c: c.clone(),
    };
    match source {
        Source::Designated(list) | Source::Candidates(list) => {
            let mut sorted = list.clone();
            sorted.sort();
            sorted.dedup();
            let mut it = sorted.into_iter().filter(|n| !n.is_zero());
            for k in 0..=depth {
                let found = loop {
                    let Some(n) = it.next() else { break None };
                    if let Some(hit) = adm.check(&n, k, seq.dist.last())? {
                        break Some((n, hit));
                    }
                };
                let Some((n, (dist, term))) = found else {
                    return Err(Error::NoAdmissible {
                        k,
                        bound: format!("{} candidates", list.len()),
                    });
                };
                seq.n.push(n);
                seq.dist.push(dist);
                seq.term_bounds.push(term);
            }
        }
        Source::BruteForce(bound) => {
            let approx = drive(x, &TorusVector::zero(x.dim()), &Gauge::Sup, ctx, &mut Screen { end: *bound })?;
            let d = x.dim() as i32;
            let rho_f = rho.to_f64().unwrap_or(0.5);
            let c_f = c.to_f64().unwrap_or(f64::MAX);
            let slack = 1.0 + 1e-9;
            let mut next = 1u64;
            for k in 0..=depth {
                let prev_f = seq.dist.last().map(Real::to_f64);
                let cap = c_f / 2f64.powi(k as i32);
                let mut found = None;
                while next <= *bound {
                    let n = next;
                    next += 1;
                    let lo = approx[(n - 1) as usize].0;
                    if prev_f.is_some_and(|p| lo > rho_f * p * slack) || n as f64 * lo.powi(d) > cap * slack {
                        continue;
                    }
                    let nb = BigUint::from(n);
                    if let Some(hit) = adm.check(&nb, k, seq.dist.last())? {
                        found = Some((nb, hit));
                        break;
                    }
                }
                let Some((n, (dist, term))) = found else {
                    return Err(Error::NoAdmissible {
                        k,
                        bound: bound.to_string(),
                    });
                };
                seq.n.push(n);
                seq.dist.push(dist);
                seq.term_bounds.push(term);
            }
        }
    }
    Ok(seq)
}

/// Upper bound on a nonnegative real, refined until it is within a factor
/// `1 + 2^-10` of the value or the ceiling is reached.
fn upper_bound(v: &Real, ctx: &Precision) -> Result<BigRational> {
    if let Some(e) = v.as_exact() {
        return Ok(e.clone());
    }
    let mut best: Option<BigRational> = None;
    for p in ctx.ladder() {
        let iv = v.enclose(p)?;
        let hi = iv.hi().clone();
        let tight = iv.lo().is_positive() && &hi * BigRational::from_integer(1024.into()) <= iv.lo() * BigRational::from_integer(1025.into());
        best = Some(match best {
            Some(b) if b < hi => b,
            _ => hi,
        });
        if tight || iv.hi().is_zero() {
            break;
        }
    }
    Ok(best.expect("nonempty ladder"))
}

fn nearest_integer(v: &Real, ctx: &Precision) -> Result<BigInt> {
    if let Some(e) = v.as_exact() {
        return Ok(crate::numeric::interval::round_half_even(e));
    }
    let mut bits = ctx.start_bits;
    for p in ctx.ladder() {
        bits = p;
        if let Some(r) = v.enclose(p)?.round_half_even() {
            return Ok(r);
        }
    }
    Err(Error::exhausted("nearest lattice point", bits))
}

#[derive(Clone, Debug)]
pub struct WitnessCertificate {
    pub x: TorusVector,
    pub seq: ApproxSequence,
    /// Nearest lattice points `a_k` of `n_k x`, for `k < K`.
    pub a: Vec<Vec<BigInt>>,
    pub k_used: usize,
    /// `-Σ_{k<K} (n_k x - a_k)` reduced mod 1.
    pub y_truncated: TorusVector,
    /// `2 ‖n_K x‖ ≥ Σ_{k≥K} ‖n_k x‖` under the geometric decay.
    pub truncation_radius: BigRational,
    /// Upper bounds `Σ_{k=K}^{K_used-1} ‖n_k x‖ + radius` on `‖N_K x + y‖`, `K = 0..=K_used`.
    pub tail_bounds: Vec<BigRational>,
    /// Upper bounds on `‖n_k x‖`.
    pub dist_bounds: Vec<BigRational>,
    pub precision: Precision,
}

impl WitnessCertificate {
    /// `N_K` for `K = 0..=K_used + 1`.
    pub fn partial_times(&self) -> Vec<BigUint> {
        let mut out = vec![BigUint::zero()];
        for n in self.seq.n.iter().take(self.k_used + 1) {
            let next = out.last().unwrap() + n;
            out.push(next);
        }
        out
    }

    pub fn to_json(&self, digits: usize) -> Result<CertificateJson> {
        let prec = (digits as f64 * std::f64::consts::LOG2_10) as u32 + 16;
        let mid = self
            .y_truncated
            .coords()
            .iter()
            .map(|c| match c.as_exact() {
                Some(e) => Ok(format!("{}/{}", e.numer(), e.denom())),
                None => Ok(rat_to_decimal(&c.enclose(prec)?.midpoint(), digits)),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CertificateJson {
            x: self.x.literal(),
            n: self.seq.n.iter().map(ToString::to_string).collect(),
            a: self
                .a
                .iter()
                .map(|v| v.iter().map(ToString::to_string).collect())
                .collect(),
            k: self.k_used,
            y: WitnessPoint {
                mid,
                radius: scientific(&self.truncation_radius),
            },
            bounds: self.tail_bounds.iter().map(scientific).collect(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessPoint {
    pub mid: Vec<String>,
    pub radius: String,
}

/// Serialized form of a [`WitnessCertificate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub x: String,
    pub n: Vec<String>,
    pub a: Vec<Vec<String>>,
    #[serde(rename = "K")]
    pub k: usize,
    pub y: WitnessPoint,
    pub bounds: Vec<String>,
}

/// `m.mmmmmmE±e`, rounded up in the last digit.
pub fn scientific(v: &BigRational) -> String {
    if v.is_zero() {
        return "0".to_string();
    }
    let ten = BigRational::from_integer(10.into());
    let bits = v.numer().bits() as i64 - v.denom().bits() as i64;
    let mut e = (bits as f64 * std::f64::consts::LOG10_2).floor() as i64;
    let scale = |e: i64| -> BigRational {
        if e >= 0 {
            num_traits::pow(ten.clone(), e as usize)
        } else {
            num_traits::pow(ten.clone(), (-e) as usize).recip()
        }
    };
    let mut m = v / scale(e);
    while m >= ten {
        m /= &ten;
        e += 1;
    }
    while m < BigRational::one() {
        m *= &ten;
        e -= 1;
    }
    let digits = 6usize;
    let q = BigRational::from_integer(num_traits::pow(BigInt::from(10), digits));
    let up = (&m * &q).ceil() / q;
    format!("{}e{}", rat_to_decimal(&up, digits), e)
}

/// Builds `y = -Σ_{k<K} (n_k x - a_k)` with its certificate.
pub fn build_witness(x: &TorusVector, seq: &ApproxSequence, depth: usize, ctx: &Precision) -> Result<WitnessCertificate> {
    if depth == 0 {
        return Err(Error::domain("depth K must be at least 1"));
    }
    if seq.n.len() <= depth {
        return Err(Error::domain(format!(
            "sequence has {} terms, depth {depth} needs {}",
            seq.n.len(),
            depth + 1
        )));
    }
    let mut a = Vec::with_capacity(depth);
    for n in &seq.n[..depth] {
        let n = BigRational::from_integer(n.clone().into());
        let row = x
            .coords()
            .iter()
            .map(|c| nearest_integer(&c.scale(&n), ctx))
            .collect::<Result<Vec<_>>>()?;
        a.push(row);
    }
    let total: BigUint = seq.n[..depth].iter().sum();
    let total = BigRational::from_integer(total.into());
    let coords = (0..x.dim())
        .map(|i| {
            let shift: BigInt = a.iter().map(|row| &row[i]).sum();
            Real::linear(vec![(-&total, x.coords()[i].clone())], BigRational::from_integer(shift))
        })
        .collect();
    let y = TorusVector::new(coords)?;
    let dist_bounds = seq
        .dist
        .iter()
        .map(|d| upper_bound(d, ctx))
        .collect::<Result<Vec<_>>>()?;
    let radius = &dist_bounds[depth] * BigRational::from_integer(2.into());
    let tail_bounds = (0..=depth)
        .map(|k| dist_bounds[k..depth].iter().fold(radius.clone(), |acc, b| acc + b))
        .collect();
    Ok(WitnessCertificate {
        x: x.clone(),
        seq: seq.clone(),
        a,
        k_used: depth,
        y_truncated: y,
        truncation_radius: radius,
        tail_bounds,
        dist_bounds,
        precision: *ctx,
    })
}

/// Re-checks `‖N_K x + y‖ ≤ bound_K` for every `K ≤ K_used`, then compares
/// `S_ℓ` truncated at `N` with the majorant
/// `prefix + Σ_K (2 ‖n_K x‖)^d min(n_K, N - N_K + 1)`.
pub fn verify_witness(cert: &WitnessCertificate, ell: u64, n_max: u64) -> Result<SumReport> {
    let ctx = &cert.precision;
    let x = &cert.x;
    let y = &cert.y_truncated;
    let times = cert.partial_times();
    for (k, bound) in cert.tail_bounds.iter().enumerate() {
        let lhs = if k == 0 {
            torus_dist(y)
        } else {
            torus_dist(&affine_orbit_point(x, y, &BigInt::from(times[k].clone()))?)
        };
        if lhs.compare(&Real::Exact(bound.clone()), ctx)? == std::cmp::Ordering::Greater {
            return Err(Error::Refuted {
                k,
                bits: ctx.ceiling_bits,
                detail: format!("‖N_{k} x + y‖ exceeds {}", scientific(bound)),
            });
        }
    }
    if ell == 0 || n_max < ell {
        return Err(Error::domain("need 1 ≤ ℓ ≤ N"));
    }
    let limit = times.last().unwrap();
    if BigUint::from(n_max) >= *limit {
        return Err(Error::domain(format!("N must stay below N_(K+1) = {limit}")));
    }
    let d = x.dim();
    let spec = SumSpec::plain(d);
    let total = partial_S(x, y, ell, n_max, &spec, ctx)?;
    let mut report = SumReport {
        regime: spec.name().to_string(),
        ell,
        partial_sums: vec![(n_max, total.clone())],
        per_record_increments: Vec::new(),
        verdict_hint: Verdict::Inconclusive,
        exact: false,
        certificate: None,
    };
    let ell_big = BigUint::from(ell);
    let n_big = BigUint::from(n_max);
    let Some(k_ell) = (1..times.len() - 1).find(|&k| times[k] >= ell_big) else {
        return Ok(report);
    };
    if times[k_ell] > n_big {
        return Ok(report);
    }
    let first = times[k_ell].to_u64().expect("below N");
    let prefix = if first > ell {
        partial_S(x, y, ell, first - 1, &spec, ctx)?
    } else {
        Real::zero()
    };
    let two = BigRational::from_integer(2.into());
    let mut bound = BigRational::zero();
    for (k, start) in times.iter().enumerate().take(cert.k_used + 1).skip(k_ell) {
        if *start > n_big {
            break;
        }
        let run = (&n_big - start + 1u32).min(cert.seq.n[k].clone());
        let per = num_traits::pow(&two * &cert.dist_bounds[k], d);
        bound += per * BigRational::from_integer(run.into());
    }
    let majorant = prefix.add(&Real::Exact(bound));
    if total.compare(&majorant, ctx)? == std::cmp::Ordering::Greater {
        return Err(Error::Refuted {
            k: k_ell,
            bits: ctx.ceiling_bits,
            detail: "partial sum exceeds the certificate majorant".to_string(),
        });
    }
    report.verdict_hint = Verdict::Converging;
    report.certificate = Some(Certificate {
        kind: CertificateKind::Majorant,
        bound: Some(majorant),
        detail: format!("partial sum below the majorant over N_K ≥ {}", times[k_ell]),
    });
    if let (Some(xs), Some(ys)) = (x.exact_coords(), y.exact_coords()) {
        if let Some(hit) = contains_integer_point(&RationalPair::new(xs, ys)?) {
            report.exact = true;
            report.certificate = Some(Certificate {
                kind: CertificateKind::ConvergedExactly,
                bound: report.certificate.and_then(|c| c.bound),
                detail: format!("n x + y is integral for n ≡ {} (mod {})", hit.least_n, hit.modulus),
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contfrac::{make_liouville, ContinuedFraction, GapSchedule};

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn v(c: Vec<Real>) -> TorusVector {
        TorusVector::new(c).unwrap()
    }

    fn deep() -> Precision {
        Precision::with_ceiling(1 << 14)
    }

    #[test]
    fn rational_sequence_and_witness() {
        let x = v(vec![Real::ratio(1, 3)]);
        let cands = period_multiples(&x, 6).unwrap();
        assert_eq!(cands[..3], [3u32, 6, 9].map(BigUint::from));
        let seq = select_subsequence(&x, &Source::Designated(cands), 4, &r(1, 2), &r(1, 1), &deep()).unwrap();
        assert_eq!(seq.n, (1..=5u32).map(|k| BigUint::from(3 * k)).collect::<Vec<_>>());
        assert!(seq.dist.iter().all(|d| d.as_exact().unwrap().is_zero()));
        let cert = build_witness(&x, &seq, 3, &deep()).unwrap();
        assert!(cert.y_truncated.coords()[0].as_exact().unwrap().is_zero());
        assert!(cert.truncation_radius.is_zero());
        let rep = verify_witness(&cert, 1, 20).unwrap();
        assert_eq!(rep.verdict_hint, Verdict::Converging);
        assert!(rep.exact);
    }

    #[test]
    fn liouville_designated_sequence() {
        let l = make_liouville(GapSchedule::Factorial).unwrap();
        let x = v(vec![l.value()]);
        let seq = select_subsequence(&x, &Source::Designated(l.designated(6)), 5, &r(1, 2), &r(1, 1), &deep()).unwrap();
        assert_eq!(seq.n, l.designated(6));
        assert_eq!(seq.n[2], BigUint::from(64u32));
        // binary-tail oracle: ‖2^{g(j)} x‖ ≤ 2^{g(j) - g(j+1) + 1}
        for (j, d) in seq.dist.iter().enumerate() {
            let bound = l.dist_bound(j as u32 + 1).unwrap();
            assert!(d.le(&Real::Exact(bound), &deep()).unwrap(), "j = {}", j + 1);
        }
    }

    #[test]
    fn liouville_witness_bounds() {
        let l = make_liouville(GapSchedule::Factorial).unwrap();
        let x = v(vec![l.value()]);
        let seq = select_subsequence(&x, &Source::Designated(l.designated(6)), 5, &r(1, 2), &r(1, 1), &deep()).unwrap();
        let cert = build_witness(&x, &seq, 4, &deep()).unwrap();
        // ‖N_4 x + y‖ ≤ 2 ‖n_4 x‖
        let times = cert.partial_times();
        let lhs = torus_dist(&affine_orbit_point(&x, &cert.y_truncated, &BigInt::from(times[4].clone())).unwrap());
        let rhs = Real::Exact(&cert.dist_bounds[4] * BigRational::from_integer(2.into()));
        assert!(lhs.le(&rhs, &deep()).unwrap());
        let rep = verify_witness(&cert, 1, 2000).unwrap();
        assert_eq!(rep.verdict_hint, Verdict::Converging);
        let json = cert.to_json(30).unwrap();
        assert_eq!(json.k, 4);
        assert_eq!(json.n[3], "16777216");
        assert_eq!(json.bounds.len(), 5);
    }

    #[test]
    fn nearest_points_and_shared_coordinates() {
        let l = make_liouville(GapSchedule::Factorial).unwrap();
        let x = v(vec![l.value(), l.value()]);
        let seq = select_subsequence(&x, &Source::Designated(l.designated(5)), 4, &r(1, 2), &r(1, 1), &deep()).unwrap();
        let cert = build_witness(&x, &seq, 3, &deep()).unwrap();
        for (k, row) in cert.a.iter().enumerate() {
            let n = BigRational::from_integer(seq.n[k].clone().into());
            let gap = x
                .coords()
                .iter()
                .zip(row)
                .map(|(c, a)| c.scale(&n).add_rational(&-BigRational::from_integer(a.clone())).enclose(512).unwrap())
                .map(|iv| iv.lo().abs().max(iv.hi().abs()))
                .max()
                .unwrap();
            let d = seq.dist[k].enclose(512).unwrap();
            assert!(&gap - d.hi() <= BigRational::new(1.into(), BigInt::from(1) << 400), "k = {k}");
        }
        assert_eq!(verify_witness(&cert, 2, 500).unwrap().verdict_hint, Verdict::Converging);
    }

    #[test]
    fn short_sequence_rejected() {
        let x = v(vec![Real::ratio(1, 3)]);
        let seq = select_subsequence(&x, &Source::Designated(period_multiples(&x, 3).unwrap()), 2, &r(1, 2), &r(1, 1), &deep()).unwrap();
        assert!(build_witness(&x, &seq, 3, &deep()).is_err());
        assert!(build_witness(&x, &seq, 2, &deep()).is_ok());
    }

    #[test]
    fn golden_has_no_fast_subsequence() {
        let x = v(vec![ContinuedFraction::golden().value()]);
        let err = select_subsequence(&x, &Source::BruteForce(20_000), 3, &r(1, 2), &r(1, 1), &Precision::default()).unwrap_err();
        assert!(matches!(err, Error::NoAdmissible { k: 2, .. }), "{err:?}");
    }

    #[test]
    fn perturbed_witness_is_refuted() {
        let l = make_liouville(GapSchedule::Factorial).unwrap();
        let x = v(vec![l.value()]);
        let seq = select_subsequence(&x, &Source::Designated(l.designated(5)), 4, &r(1, 2), &r(1, 1), &deep()).unwrap();
        let mut cert = build_witness(&x, &seq, 3, &deep()).unwrap();
        cert.y_truncated = cert.y_truncated.add(&v(vec![Real::ratio(1, 1000)])).unwrap();
        assert!(matches!(verify_witness(&cert, 1, 1000), Err(Error::Refuted { .. })));
    }

    #[test]
    fn scientific_rounds_up() {
        assert_eq!(scientific(&r(1, 3)), "3.333334e-1");
        assert_eq!(scientific(&r(2, 1)), "2.000000e0");
        assert_eq!(scientific(&BigRational::zero()), "0");
        assert_eq!(scientific(&r(1, 1 << 40)), "9.094948e-13");
    }
}
