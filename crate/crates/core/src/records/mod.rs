//! Best inhomogeneous approximations: the times `t` at which
//! `‖t x + y‖` drops strictly below every earlier value, and windowed minima.

pub(crate) mod model;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::numeric::interval::rat_to_f64;
use crate::numeric::{affine_orbit_point, torus_dist, weighted_dist, Interval, Precision, Real, TorusVector, Tri, Weights};
use crate::par;
use model::{common_denominator, ExactOrbit, FixedCoords, FixedSup, FixedWeighted, OrbitModel};

/// The distance whose records are tracked.
#[derive(Clone, Debug, PartialEq)]
pub enum Gauge {
    /// Sup-norm distance to the lattice.
    Sup,
    /// Weighted distance `(max_i ‖v_i‖^{1/r_i})^{1/d}`.
    Weighted(Weights),
}

impl Gauge {
    /// Per-coordinate exponents of the underlying max, `None` for zero weights.
    pub(crate) fn exponents(&self, dim: usize) -> Result<Vec<Option<BigRational>>> {
        match self {
            Gauge::Sup => Ok(vec![Some(BigRational::from_integer(1.into())); dim]),
            Gauge::Weighted(w) => {
                if w.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: w.dim(),
                    });
                }
                Ok(w.exponents())
            }
        }
    }

    /// Exponent turning the underlying max into the reported distance.
    pub(crate) fn root(&self, dim: usize) -> BigRational {
        match self {
            Gauge::Sup => BigRational::from_integer(1.into()),
            Gauge::Weighted(_) => BigRational::new(1.into(), (dim as i64).into()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Record {
    pub t: u64,
    pub delta: Real,
}

#[derive(Clone, Debug)]
pub struct RecordSequence {
    pub x: TorusVector,
    pub y: TorusVector,
    pub gauge: Gauge,
    /// First time considered (`ℓ`).
    pub start: u64,
    pub entries: Vec<Record>,
    pub scan_bound: u64,
    pub zero_hit: bool,
    /// Fixed-point width that settled every comparison, 0 when exact.
    pub bits: u32,
}

impl RecordSequence {
    pub fn times(&self) -> Vec<u64> {
        self.entries.iter().map(|r| r.t).collect()
    }

    /// Distance of the last record at or before `n`.
    pub fn min_at(&self, n: u64) -> Option<&Real> {
        let i = self.entries.partition_point(|r| r.t <= n);
        (i > 0).then(|| &self.entries[i - 1].delta)
    }
}

pub(crate) trait OrbitVisitor {
    type Out;
    fn visit<M: OrbitModel>(&mut self, m: &M) -> Result<Self::Out>;
}

fn widths(v: &TorusVector, prec: u32) -> Result<Vec<Interval>> {
    v.coords().iter().map(|c| c.enclose(prec)).collect()
}

/// Run `v` on the cheapest orbit model able to answer it: exact for
/// rational inputs, otherwise fixed point at 128, 256, ... bits until the
/// visitor stops reporting `Undecided` or the ceiling is hit.
pub(crate) fn drive<V: OrbitVisitor>(
    x: &TorusVector,
    y: &TorusVector,
    gauge: &Gauge,
    ctx: &Precision,
    v: &mut V,
) -> Result<V::Out> {
    x.check_dim(y)?;
    let exps = gauge.exponents(x.dim())?;
    if exps.iter().all(Option::is_none) {
        return Err(Error::domain("all weights are zero"));
    }
    if let (Some(xs), Some(ys)) = (x.exact_coords(), y.exact_coords()) {
        let all: Vec<&BigRational> = xs.iter().chain(ys.iter()).collect();
        let l = common_denominator(&all);
        return if l.bits() < 63 {
            v.visit(&ExactOrbit::<u128>::new(&xs, &ys, exps, &l))
        } else {
            v.visit(&ExactOrbit::<BigUint>::new(&xs, &ys, exps, &l))
        };
    }
    let ceiling = ctx.ceiling_bits.max(128);
    let mut bits = 128u32;
    let mut last_err = None;
    let mut prev: Option<Vec<BigRational>> = None;
    while bits <= ceiling {
        let xi = widths(x, bits + 16)?;
        let yi = widths(y, bits + 16)?;
        let w: Vec<BigRational> = xi.iter().chain(yi.iter()).map(Interval::width).collect();
        if let Some(p) = &prev {
            let improved = p
                .iter()
                .zip(&w)
                .any(|(a, b)| !a.is_zero() && b * BigRational::from_integer(2.into()) <= *a);
            if !improved {
                break;
            }
        }
        let res = match (gauge, bits) {
            (Gauge::Sup, 128) => v.visit(&FixedSup::new(FixedCoords::<u128>::new(&xi, &yi, bits))),
            (Gauge::Sup, _) => v.visit(&FixedSup::new(FixedCoords::<BigUint>::new(&xi, &yi, bits))),
            (Gauge::Weighted(_), 128) => v.visit(&FixedWeighted::new(
                FixedCoords::<u128>::new(&xi, &yi, bits),
                exps.clone(),
            )),
            (Gauge::Weighted(_), _) => v.visit(&FixedWeighted::new(
                FixedCoords::<BigUint>::new(&xi, &yi, bits),
                exps.clone(),
            )),
        };
        match res {
            Err(e @ Error::Undecided { .. }) => last_err = Some(e),
            other => return other,
        }
        prev = Some(w);
        bits *= 2;
    }
    Err(last_err.unwrap_or_else(|| Error::exhausted("orbit comparison", ceiling)))
}

pub(crate) struct ScanOut<D> {
    pub entries: Vec<(u64, D)>,
    pub zero_hit: bool,
}

/// Incremental record detection shared by the sequential scan and the merge
/// step of the block scan. `env` is the point seen so far with the least
/// upper bound; anything certainly above it cannot be a record.
struct Tracker<D> {
    entries: Vec<(u64, D)>,
    env: Option<D>,
    zero_hit: bool,
}

impl<D: Clone> Tracker<D> {
    fn new() -> Self {
        Tracker {
            entries: Vec::new(),
            env: None,
            zero_hit: false,
        }
    }

    fn skip<M: OrbitModel<Dist = D>>(m: &M, env: &Option<D>, d: &D) -> bool {
        env.as_ref().is_some_and(|e| m.certainly_ge(d, e))
    }

    /// Returns `false` once a zero record ends the scan.
    fn offer<M: OrbitModel<Dist = D>>(&mut self, m: &M, n: u64, d: D) -> Result<bool> {
        if Self::skip(m, &self.env, &d) {
            return Ok(true);
        }
        if self.env.as_ref().is_none_or(|e| m.tighter(&d, e)) {
            self.env = Some(d.clone());
        }
        let is_record = match self.entries.last() {
            None => true,
            Some((t, cur)) => match m.cmp(&d, cur) {
                Tri::Less => true,
                Tri::Equal | Tri::Greater => false,
                Tri::Undecided => {
                    return Err(Error::Undecided {
                        t: n,
                        t_prime: *t,
                        bits: m.bits(),
                    })
                }
            },
        };
        if is_record {
            let zero = m.is_zero(&d);
            self.entries.push((n, d));
            if zero {
                self.zero_hit = true;
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn finish(self) -> ScanOut<D> {
        ScanOut {
            entries: self.entries,
            zero_hit: self.zero_hit,
        }
    }
}

pub(crate) fn scan_seq<M: OrbitModel>(m: &M, start: u64, end: u64) -> Result<ScanOut<M::Dist>> {
    let mut tr = Tracker::new();
    for n in start..=end {
        if !tr.offer(m, n, m.dist(n))? {
            break;
        }
    }
    Ok(tr.finish())
}

const BLOCK: u64 = 4096;

/// Block-parallel scan. Blocks of one wave are filtered independently
/// against the envelope known at the start of the wave, then the surviving
/// candidates are merged in order with the sequential rule, so the output
/// equals [`scan_seq`].
pub(crate) fn scan_blocks<M: OrbitModel>(m: &M, start: u64, end: u64) -> Result<ScanOut<M::Dist>> {
    let per_wave = (par::threads() as u64 * 4).max(1);
    if end - start < 2 * BLOCK {
        return scan_seq(m, start, end);
    }
    let mut tr = Tracker::new();
    let mut lo = start;
    while lo <= end {
        let blocks: Vec<(u64, u64)> = (0..per_wave)
            .map(|i| lo + i * BLOCK)
            .take_while(|&b| b <= end)
            .map(|b| (b, (b + BLOCK - 1).min(end)))
            .collect();
        lo = blocks.last().map_or(end + 1, |b| b.1 + 1);
        let env0 = tr.env.clone();
        let found = par::map(&blocks, |&(a, b)| {
            let mut env = env0.clone();
            let mut out = Vec::new();
            for n in a..=b {
                let d = m.dist(n);
                if Tracker::skip(m, &env, &d) {
                    continue;
                }
                if env.as_ref().is_none_or(|e| m.tighter(&d, e)) {
                    env = Some(d.clone());
                }
                let zero = m.is_zero(&d);
                out.push((n, d));
                if zero {
                    break;
                }
            }
            out
        });
        for (n, d) in found.into_iter().flatten() {
            if !tr.offer(m, n, d)? {
                return Ok(tr.finish());
            }
        }
    }
    Ok(tr.finish())
}

struct ScanVisitor {
    start: u64,
    end: u64,
    parallel: bool,
}

impl OrbitVisitor for ScanVisitor {
    type Out = (Vec<(u64, Option<Real>)>, bool, u32);

    fn visit<M: OrbitModel>(&mut self, m: &M) -> Result<Self::Out> {
        let out = if self.parallel {
            scan_blocks(m, self.start, self.end)?
        } else {
            scan_seq(m, self.start, self.end)?
        };
        let entries = out.entries.iter().map(|(t, d)| (*t, m.exact_gauge(d).filter(|_| m.bits() == 0))).collect();
        Ok((entries, out.zero_hit, m.bits()))
    }
}

fn check_range(start: u64, end: u64) -> Result<()> {
    if start == 0 {
        return Err(Error::domain("ℓ must be a positive integer"));
    }
    if end < start {
        return Err(Error::domain(format!("scan bound {end} is below the start {start}")));
    }
    Ok(())
}

/// The distance at time `t` as a refinable real.
pub(crate) fn orbit_delta(x: &TorusVector, y: &TorusVector, t: u64, gauge: &Gauge) -> Result<Real> {
    let p = affine_orbit_point(x, y, &t.into())?;
    match gauge {
        Gauge::Sup => Ok(torus_dist(&p)),
        Gauge::Weighted(w) => weighted_dist(&p, w),
    }
}

fn scan_impl(
    x: &TorusVector,
    y: &TorusVector,
    start: u64,
    end: u64,
    gauge: &Gauge,
    ctx: &Precision,
    parallel: bool,
) -> Result<RecordSequence> {
    check_range(start, end)?;
    let mut v = ScanVisitor { start, end, parallel };
    let (raw, zero_hit, bits) = drive(x, y, gauge, ctx, &mut v)?;
    let root = gauge.root(x.dim());
    let entries = raw
        .into_iter()
        .map(|(t, g)| {
            let delta = match g {
                Some(g) => g.pow(&root)?,
                None => orbit_delta(x, y, t, gauge)?,
            };
            Ok(Record { t, delta })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RecordSequence {
        x: x.clone(),
        y: y.clone(),
        gauge: gauge.clone(),
        start,
        entries,
        scan_bound: end,
        zero_hit,
        bits,
    })
}

/// Records of `‖t x + y‖` for `1 ≤ t ≤ n_max`.
pub fn scan_records(x: &TorusVector, y: &TorusVector, n_max: u64, ctx: &Precision) -> Result<RecordSequence> {
    scan_records_from(x, y, 1, n_max, &Gauge::Sup, ctx)
}

/// Records over `start ≤ t ≤ n_max` for the given gauge.
pub fn scan_records_from(
    x: &TorusVector,
    y: &TorusVector,
    start: u64,
    n_max: u64,
    gauge: &Gauge,
    ctx: &Precision,
) -> Result<RecordSequence> {
    scan_impl(x, y, start, n_max, gauge, ctx, par::is_parallel())
}

/// Same as [`scan_records_from`] without block parallelism.
pub fn scan_records_sequential(
    x: &TorusVector,
    y: &TorusVector,
    start: u64,
    n_max: u64,
    gauge: &Gauge,
    ctx: &Precision,
) -> Result<RecordSequence> {
    scan_impl(x, y, start, n_max, gauge, ctx, false)
}

/// `min_{ℓ ≤ m ≤ n} ‖m x + y‖`.
pub fn window_min(x: &TorusVector, y: &TorusVector, ell: u64, n: u64, ctx: &Precision) -> Result<Real> {
    window_min_with(x, y, ell, n, &Gauge::Sup, ctx)
}

pub fn window_min_with(
    x: &TorusVector,
    y: &TorusVector,
    ell: u64,
    n: u64,
    gauge: &Gauge,
    ctx: &Precision,
) -> Result<Real> {
    let rs = scan_records_from(x, y, ell, n, gauge, ctx)?;
    Ok(rs.entries.last().expect("nonempty window").delta.clone())
}

struct HomogeneousVisitor {
    end: u64,
    e: BigRational,
}

impl OrbitVisitor for HomogeneousVisitor {
    type Out = Interval;

    fn visit<M: OrbitModel>(&mut self, m: &M) -> Result<Interval> {
        let e = rat_to_f64(&self.e);
        let blocks: Vec<(u64, u64)> = (0..self.end.div_ceil(BLOCK))
            .map(|i| (i * BLOCK + 1, ((i + 1) * BLOCK).min(self.end)))
            .collect();
        // f64 screening: the best upper bound seen, then every n whose lower
        // bound comes within a generous margin of it is certified exactly
        let screen = |(a, b): (u64, u64), cut: f64| -> (f64, Vec<u64>) {
            let mut best = f64::INFINITY;
            let mut keep = Vec::new();
            for n in a..=b {
                let (lo, hi) = m.approx_bounds(&m.dist(n));
                let v_hi = n as f64 * hi.powf(e);
                best = best.min(v_hi);
                if n as f64 * lo.powf(e) <= cut {
                    keep.push(n);
                }
            }
            (best, keep)
        };
        let best = par::map(&blocks, |&blk| screen(blk, -1.0).0)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let cut = best * 1.01 + 1e-300;
        let keep: Vec<u64> = par::map(&blocks, |&blk| screen(blk, cut).1).into_iter().flatten().collect();
        let prec = m.bits().max(128);
        let mut acc: Option<Interval> = None;
        for n in keep {
            let g = m
                .gauge_interval(&m.dist(n), prec)
                .pow_ratio(&self.e, prec)
                .ok_or_else(|| Error::domain("negative distance"))?
                .scale(&BigRational::from_integer(n.into()));
            acc = Some(match acc {
                Some(a) => a.min(&g),
                None => g,
            });
        }
        acc.ok_or_else(|| Error::domain("empty homogeneous scan"))
    }
}

/// Enclosure of `min_{1 ≤ n ≤ n_max} n ‖n x‖^e`.
pub fn homogeneous_constant(x: &TorusVector, n_max: u64, e: &BigRational, ctx: &Precision) -> Result<Interval> {
    homogeneous_constant_with(x, n_max, &Gauge::Sup, e, ctx)
}

/// Enclosure of `min_{1 ≤ n ≤ n_max} n G(n x)^e` for a gauge `G`.
pub fn homogeneous_constant_with(
    x: &TorusVector,
    n_max: u64,
    gauge: &Gauge,
    e: &BigRational,
    ctx: &Precision,
) -> Result<Interval> {
    check_range(1, n_max)?;
    let y = TorusVector::zero(x.dim());
    let mut v = HomogeneousVisitor { end: n_max, e: e.clone() };
    drive(x, &y, gauge, ctx, &mut v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contfrac::ContinuedFraction;

    fn q(n: i64, d: i64) -> Real {
        Real::ratio(n, d)
    }

    fn v(c: Vec<Real>) -> TorusVector {
        TorusVector::new(c).unwrap()
    }

    fn ctx() -> Precision {
        Precision::default()
    }

    #[test]
    fn golden_records_are_fibonacci() {
        let x = v(vec![ContinuedFraction::golden().value().add_rational(&BigRational::from_integer((-1).into()))]);
        let rs = scan_records(&x, &TorusVector::zero(1), 100, &ctx()).unwrap();
        assert_eq!(rs.times(), vec![1, 2, 3, 5, 8, 13, 21, 34, 55, 89]);
        assert!(!rs.zero_hit);
    }

    #[test]
    fn rational_zero_stops_scan() {
        let rs = scan_records(&v(vec![q(1, 3)]), &v(vec![q(1, 3)]), 10, &ctx()).unwrap();
        assert_eq!(rs.times(), vec![1, 2]);
        assert_eq!(rs.entries[0].delta.as_exact(), q(1, 3).as_exact());
        assert!(rs.entries[1].delta.as_exact().unwrap().is_zero());
        assert!(rs.zero_hit);
    }

    #[test]
    fn constant_orbit_single_record() {
        let rs = scan_records(&TorusVector::zero(1), &v(vec![q(3, 10)]), 10, &ctx()).unwrap();
        assert_eq!(rs.times(), vec![1]);
        assert_eq!(rs.entries[0].delta.as_exact(), q(3, 10).as_exact());
    }

    #[test]
    fn window_examples() {
        let w = window_min(&v(vec![q(1, 2)]), &v(vec![q(1, 4)]), 1, 8, &ctx()).unwrap();
        assert_eq!(w.as_exact(), q(1, 4).as_exact());
        let w = window_min(&v(vec![q(1, 3)]), &v(vec![q(1, 3)]), 1, 5, &ctx()).unwrap();
        assert!(w.as_exact().unwrap().is_zero());
        let w = window_min(&v(vec![q(2, 7)]), &v(vec![q(1, 9)]), 4, 4, &ctx()).unwrap();
        assert_eq!(w.as_exact().unwrap(), &BigRational::new(16.into(), 63.into()));
    }

    #[test]
    fn block_scan_matches_sequential() {
        let x = v(vec![ContinuedFraction::golden().value()]);
        let y = v(vec![q(2, 7)]);
        let a = scan_records_from(&x, &y, 1, 50_000, &Gauge::Sup, &ctx()).unwrap();
        let b = scan_records_sequential(&x, &y, 1, 50_000, &Gauge::Sup, &ctx()).unwrap();
        assert_eq!(a.times(), b.times());
        let x = v(vec![q(355, 1131), q(7, 4099)]);
        let y = v(vec![q(1, 5), q(3, 11)]);
        let a = scan_records_from(&x, &y, 3, 40_000, &Gauge::Sup, &ctx()).unwrap();
        let b = scan_records_sequential(&x, &y, 3, 40_000, &Gauge::Sup, &ctx()).unwrap();
        assert_eq!(a.times(), b.times());
    }

    #[test]
    fn weighted_records_exact() {
        let w = Weights::new(vec![BigRational::new(3.into(), 4.into()), BigRational::new(1.into(), 4.into())]).unwrap();
        let x = v(vec![q(1, 2), q(1, 5)]);
        let rs = scan_records_from(&x, &TorusVector::zero(2), 1, 20, &Gauge::Weighted(w), &ctx()).unwrap();
        assert_eq!(rs.times()[0], 1);
        let d1 = rs.entries[0].delta.to_f64();
        assert!((d1 - 0.5f64.powf(4.0 / 3.0).sqrt()).abs() < 1e-12);
        assert!(rs.zero_hit);
        assert_eq!(*rs.times().last().unwrap(), 10);
    }

    #[test]
    fn golden_homogeneous_constant() {
        let x = v(vec![ContinuedFraction::golden().value()]);
        let c = homogeneous_constant(&x, 10_000, &BigRational::from_integer(1.into()), &ctx()).unwrap();
        // attained at n = 1: ‖φ‖ = 2 - φ
        let f = c.to_f64();
        assert!((f - (2.0 - (1.0 + 5f64.sqrt()) / 2.0)).abs() < 1e-12, "{f}");
        assert!(c.width() < BigRational::new(1.into(), (1u64 << 60).into()));
    }

    #[test]
    fn tie_in_ball_input_is_reported() {
        // ‖x + y‖ = ‖2x + y‖ at x = y = 1/5; a ball around x cannot separate them
        let x = v(vec![Real::ball(BigRational::new(1.into(), 5.into()), BigRational::new(1.into(), (1u64 << 60).into())).unwrap()]);
        let y = v(vec![q(1, 5)]);
        let err = scan_records(&x, &y, 5, &ctx()).unwrap_err();
        assert!(matches!(err, Error::Undecided { t: 2, t_prime: 1, .. }), "{err:?}");
    }
}
