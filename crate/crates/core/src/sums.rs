//! Partial Kurzweil sums `Σ_{n=ℓ}^{N} (min_{ℓ≤m≤n} G(m x + y))^s` in the
//! plain, weighted and σ-exponent regimes, and divergence diagnostics.

use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{contains_integer_point, orbit_summary, RationalPair};
use crate::numeric::interval::rat_to_f64;
use crate::numeric::{Exponent, Interval, Precision, Real, TorusVector, Weights};
use crate::records::model::OrbitModel;
use crate::records::{drive, homogeneous_constant_with, scan_records_from, Gauge, OrbitVisitor, RecordSequence};

#[derive(Clone, Debug, PartialEq)]
pub enum Regime {
    /// `‖·‖^d`.
    Plain,
    /// `‖·‖_r^d = max_i ‖·_i‖^{1/r_i}`.
    Weighted(Weights),
    /// `‖·‖^{1/σ}`.
    Sigma(Exponent),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SumSpec {
    pub regime: Regime,
    pub dim: usize,
}

impl SumSpec {
    pub fn plain(dim: usize) -> Self {
        SumSpec {
            regime: Regime::Plain,
            dim,
        }
    }

    pub fn weighted(w: Weights) -> Self {
        let dim = w.dim();
        SumSpec {
            regime: Regime::Weighted(w),
            dim,
        }
    }

    pub fn sigma(e: Exponent, dim: usize) -> Self {
        SumSpec {
            regime: Regime::Sigma(e),
            dim,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.regime {
            Regime::Plain => "plain",
            Regime::Weighted(_) => "weighted",
            Regime::Sigma(_) => "sigma",
        }
    }

    pub fn gauge(&self) -> Gauge {
        match &self.regime {
            Regime::Weighted(w) => Gauge::Weighted(w.clone()),
            _ => Gauge::Sup,
        }
    }

    /// Exponent applied to the record distance `δ`.
    pub fn exponent(&self) -> BigRational {
        match &self.regime {
            Regime::Plain | Regime::Weighted(_) => BigRational::from_integer(self.dim.into()),
            Regime::Sigma(e) => e.sum_exponent(),
        }
    }

    /// Exponent applied to the underlying gauge max.
    pub(crate) fn gauge_exponent(&self) -> BigRational {
        match &self.regime {
            Regime::Weighted(_) => BigRational::one(),
            _ => self.exponent(),
        }
    }

    fn check(&self, x: &TorusVector, y: &TorusVector) -> Result<()> {
        x.check_dim(y)?;
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        Ok(())
    }
}

fn check_window(ell: u64, n: u64) -> Result<()> {
    if ell == 0 {
        return Err(Error::domain("ℓ must be a positive integer"));
    }
    if n < ell {
        return Err(Error::domain(format!("N = {n} is below ℓ = {ell}")));
    }
    Ok(())
}

struct SumVisitor {
    start: u64,
    end: u64,
    s: BigRational,
}

impl OrbitVisitor for SumVisitor {
    type Out = Real;

    fn visit<M: OrbitModel>(&mut self, m: &M) -> Result<Real> {
        if m.bits() == 0 {
            if let Some(den) = m.term_denominator(&self.s) {
                // exact integral exponent: add the current minimum's numerator per n
                let mut acc = BigUint::zero();
                let mut small: u128 = 0;
                let mut cur = m.dist(self.start);
                let mut num = m.term_numerator(&cur, &self.s).expect("integral exponent");
                let mut num_small = u128::try_from(&num).ok();
                for n in self.start..=self.end {
                    if n > self.start {
                        let d = m.dist(n);
                        let next = m.hull_min(&cur, &d);
                        if next != cur {
                            cur = next;
                            num = m.term_numerator(&cur, &self.s).expect("integral exponent");
                            num_small = u128::try_from(&num).ok();
                        }
                    }
                    if m.is_zero(&cur) {
                        break;
                    }
                    match num_small.and_then(|v| small.checked_add(v)) {
                        Some(v) => small = v,
                        None => {
                            acc += small;
                            small = 0;
                            acc += &num;
                        }
                    }
                }
                acc += small;
                return Ok(Real::Exact(BigRational::new(acc.into(), den.into())));
            }
        }
        let runs = runs(m, self.start, self.end);
        if m.bits() == 0 {
            let terms = runs
                .iter()
                .map(|(d, count)| {
                    let g = m.exact_gauge(d).expect("exact model");
                    Ok((BigRational::from_integer((*count).into()), g.pow(&self.s)?))
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(Real::linear(terms, BigRational::zero()));
        }
        let prec = m.bits();
        let mut total = Interval::point(BigRational::zero());
        for (d, count) in &runs {
            let t = m
                .gauge_interval(d, prec)
                .pow_ratio(&self.s, prec)
                .ok_or_else(|| Error::domain("negative distance"))?
                .scale(&BigRational::from_integer((*count).into()));
            total = total.add(&t);
        }
        Ok(Real::from_interval(&total))
    }
}

/// Maximal runs of constant window minimum, as `(minimum, length)`.
fn runs<M: OrbitModel>(m: &M, start: u64, end: u64) -> Vec<(M::Dist, u64)> {
    let mut out: Vec<(M::Dist, u64)> = Vec::new();
    let mut cur = m.dist(start);
    let mut count = 0u64;
    for n in start..=end {
        if n > start {
            let next = m.hull_min(&cur, &m.dist(n));
            if next != cur {
                out.push((std::mem::replace(&mut cur, next), count));
                count = 0;
            }
        }
        if m.is_zero(&cur) {
            break;
        }
        count += 1;
    }
    if count > 0 {
        out.push((cur, count));
    }
    out
}

/// `Σ_{n=ℓ}^{N} (min_{ℓ≤m≤n} ‖m x + y‖)^e`, evaluated term by term.
#[allow(non_snake_case)]
pub fn partial_S(x: &TorusVector, y: &TorusVector, ell: u64, n_max: u64, spec: &SumSpec, ctx: &Precision) -> Result<Real> {
    spec.check(x, y)?;
    check_window(ell, n_max)?;
    let mut v = SumVisitor {
        start: ell,
        end: n_max,
        s: spec.gauge_exponent(),
    };
    drive(x, y, &spec.gauge(), ctx, &mut v)
}

/// The same sum as [`partial_S`], computed as `Σ_k δ_k^e (t_{k+1} - t_k)`
/// over a record sequence started at `ℓ`, the last run cut at `N`.
#[allow(non_snake_case)]
pub fn partial_S_records(rs: &RecordSequence, ell: u64, n_max: u64, spec: &SumSpec) -> Result<Real> {
    check_window(ell, n_max)?;
    if rs.start != ell {
        return Err(Error::domain(format!("records start at {} but ℓ = {ell}", rs.start)));
    }
    if rs.gauge != spec.gauge() {
        return Err(Error::domain("record gauge does not match the sum regime"));
    }
    if rs.scan_bound < n_max && !rs.zero_hit {
        return Err(Error::InsufficientScanBound {
            have: rs.scan_bound,
            need: n_max,
        });
    }
    let e = spec.exponent();
    let mut terms = Vec::new();
    for (k, r) in rs.entries.iter().enumerate() {
        if r.t > n_max {
            break;
        }
        let next = rs.entries.get(k + 1).map_or(n_max + 1, |s| s.t.min(n_max + 1));
        terms.push((BigRational::from_integer((next - r.t).into()), r.delta.pow(&e)?));
    }
    Ok(Real::linear(terms, BigRational::zero()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Diverging,
    Converging,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Diverging => "diverging",
            Verdict::Converging => "converging",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    /// All terms vanish from some point on.
    ConvergedExactly,
    /// Terms are bounded below by a positive constant.
    DivergesExactly,
    /// The partial sum stays below a certified majorant.
    Majorant,
}

#[derive(Clone, Debug)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub bound: Option<Real>,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct SumReport {
    pub regime: String,
    pub ell: u64,
    pub partial_sums: Vec<(u64, Real)>,
    /// `(k, δ_k^e (t_{k+1} - t_k))` for every completed record run.
    pub per_record_increments: Vec<(usize, Real)>,
    pub verdict_hint: Verdict,
    /// The verdict is a proof rather than a hint.
    pub exact: bool,
    pub certificate: Option<Certificate>,
}

/// Thresholds of the heuristic verdicts.
#[derive(Clone, Debug)]
pub struct DiagnosticConfig {
    /// Leading record increments ignored by the diverging test.
    pub skip: usize,
    /// Increments required after `skip`.
    pub min_tail: usize,
    /// Diverging when every tail increment is at least `fraction * c / 2^e`.
    pub fraction: f64,
    /// Schedule increments inspected by the converging test.
    pub window: usize,
    pub rho: f64,
    pub eps: f64,
}

impl Default for DiagnosticConfig {
    fn default() -> Self {
        DiagnosticConfig {
            skip: 4,
            min_tail: 3,
            fraction: 0.5,
            window: 5,
            rho: 0.5,
            eps: 1e-6,
        }
    }
}

fn exact_verdict(x: &TorusVector, y: &TorusVector, spec: &SumSpec) -> Result<Option<(Verdict, Certificate)>> {
    let (Some(xs), Some(ys)) = (x.exact_coords(), y.exact_coords()) else {
        return Ok(None);
    };
    // zero-weight coordinates contribute nothing
    let keep: Vec<usize> = match &spec.regime {
        Regime::Weighted(w) => (0..w.dim()).filter(|&i| !w.values()[i].is_zero()).collect(),
        _ => (0..xs.len()).collect(),
    };
    let pair = RationalPair::new(
        keep.iter().map(|&i| xs[i].clone()).collect(),
        keep.iter().map(|&i| ys[i].clone()).collect(),
    )?;
    Ok(Some(match contains_integer_point(&pair) {
        Some(hit) => (
            Verdict::Converging,
            Certificate {
                kind: CertificateKind::ConvergedExactly,
                bound: None,
                detail: format!("n x + y is integral for n ≡ {} (mod {})", hit.least_n, hit.modulus),
            },
        ),
        None => {
            let detail = match orbit_summary(&pair) {
                Ok(s) => format!("‖n x + y‖ ≥ {}/{} for all n", s.min_dist.numer(), s.min_dist.denom()),
                Err(_) => "n x + y is never integral".to_string(),
            };
            (
                Verdict::Diverging,
                Certificate {
                    kind: CertificateKind::DivergesExactly,
                    bound: None,
                    detail,
                },
            )
        }
    }))
}

/// Partial sums along `schedule` with a verdict: exact for rational inputs
/// and zero hits, heuristic otherwise.
pub fn divergence_diagnostic(
    x: &TorusVector,
    y: &TorusVector,
    ell: u64,
    schedule: &[u64],
    spec: &SumSpec,
    cfg: &DiagnosticConfig,
    ctx: &Precision,
) -> Result<SumReport> {
    spec.check(x, y)?;
    let Some(&n_max) = schedule.last() else {
        return Err(Error::domain("empty schedule"));
    };
    if schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("schedule must be increasing"));
    }
    check_window(ell, schedule[0])?;
    let rs = scan_records_from(x, y, ell, n_max, &spec.gauge(), ctx)?;
    let partial_sums = schedule
        .iter()
        .map(|&n| Ok((n, partial_S_records(&rs, ell, n, spec)?)))
        .collect::<Result<Vec<_>>>()?;
    let e = spec.exponent();
    let mut per_record_increments = Vec::new();
    for (k, w) in rs.entries.windows(2).enumerate() {
        let run = BigRational::from_integer((w[1].t - w[0].t).into());
        per_record_increments.push((k + 1, w[0].delta.pow(&e)?.scale(&run)));
    }
    let mut report = SumReport {
        regime: spec.name().to_string(),
        ell,
        partial_sums,
        per_record_increments,
        verdict_hint: Verdict::Inconclusive,
        exact: false,
        certificate: None,
    };
    if let Some((v, cert)) = exact_verdict(x, y, spec)? {
        report.verdict_hint = v;
        report.exact = true;
        report.certificate = Some(cert);
        return Ok(report);
    }
    if rs.zero_hit {
        let t = rs.entries.last().map_or(ell, |r| r.t);
        report.verdict_hint = Verdict::Converging;
        report.exact = true;
        report.certificate = Some(Certificate {
            kind: CertificateKind::ConvergedExactly,
            bound: None,
            detail: format!("window minimum is 0 from n = {t} on"),
        });
        return Ok(report);
    }
    let tail: Vec<f64> = report
        .per_record_increments
        .iter()
        .skip(cfg.skip)
        .map(|(_, v)| v.to_f64())
        .collect();
    if tail.len() >= cfg.min_tail {
        let c = homogeneous_constant_with(x, n_max, &spec.gauge(), &spec.gauge_exponent(), ctx)?.to_f64();
        let threshold = cfg.fraction * c / 2f64.powf(rat_to_f64(&e));
        if c > 0.0 && tail.iter().all(|&v| v >= threshold) {
            report.verdict_hint = Verdict::Diverging;
            return Ok(report);
        }
    }
    let sums: Vec<f64> = report.partial_sums.iter().map(|(_, v)| v.to_f64()).collect();
    let incs: Vec<f64> = sums.windows(2).map(|w| w[1] - w[0]).collect();
    if incs.len() > cfg.window {
        let last = &incs[incs.len() - cfg.window - 1..];
        if last.windows(2).all(|w| w[1] < cfg.eps && w[1] <= cfg.rho * w[0]) {
            report.verdict_hint = Verdict::Converging;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contfrac::ContinuedFraction;
    use crate::records::scan_records_from;

    fn q(n: i64, d: i64) -> Real {
        Real::ratio(n, d)
    }

    fn v(c: Vec<Real>) -> TorusVector {
        TorusVector::new(c).unwrap()
    }

    fn ctx() -> Precision {
        Precision::default()
    }

    fn exact(r: &Real) -> BigRational {
        r.as_exact().expect("exact").clone()
    }

    #[test]
    fn plain_examples() {
        let s = partial_S(&v(vec![q(1, 2)]), &v(vec![q(1, 4)]), 1, 8, &SumSpec::plain(1), &ctx()).unwrap();
        assert_eq!(exact(&s), BigRational::from_integer(2.into()));
        let s = partial_S(&v(vec![q(1, 3)]), &v(vec![q(1, 3)]), 1, 100, &SumSpec::plain(1), &ctx()).unwrap();
        assert_eq!(exact(&s), BigRational::new(1.into(), 3.into()));
        let s = partial_S(&v(vec![q(2, 7)]), &v(vec![q(1, 9)]), 4, 4, &SumSpec::plain(1), &ctx()).unwrap();
        assert_eq!(exact(&s), BigRational::new(16.into(), 63.into()));
    }

    #[test]
    fn record_route_examples() {
        let x = v(vec![q(1, 2)]);
        let y = v(vec![q(1, 4)]);
        let rs = scan_records_from(&x, &y, 1, 8, &Gauge::Sup, &ctx()).unwrap();
        assert_eq!(rs.entries.len(), 1);
        let s = partial_S_records(&rs, 1, 8, &SumSpec::plain(1)).unwrap();
        assert_eq!(exact(&s), BigRational::from_integer(2.into()));
        let short = scan_records_from(&x, &y, 1, 5, &Gauge::Sup, &ctx()).unwrap();
        assert!(matches!(
            partial_S_records(&short, 1, 8, &SumSpec::plain(1)),
            Err(Error::InsufficientScanBound { have: 5, need: 8 })
        ));
    }

    #[test]
    fn zero_hit_converges_exactly() {
        let x = v(vec![q(1, 3)]);
        let y = v(vec![q(1, 3)]);
        let rs = scan_records_from(&x, &y, 1, 10, &Gauge::Sup, &ctx()).unwrap();
        // the scan stopped at the zero, yet any N is covered
        let s = partial_S_records(&rs, 1, 1000, &SumSpec::plain(1)).unwrap();
        assert_eq!(exact(&s), BigRational::new(1.into(), 3.into()));
        let rep = divergence_diagnostic(&x, &y, 1, &[10, 100], &SumSpec::plain(1), &DiagnosticConfig::default(), &ctx()).unwrap();
        assert_eq!(rep.verdict_hint, Verdict::Converging);
        assert!(rep.exact);
        assert_eq!(rep.certificate.unwrap().kind, CertificateKind::ConvergedExactly);
    }

    #[test]
    fn irrational_routes_agree() {
        let x = v(vec![ContinuedFraction::golden().value()]);
        let y = v(vec![q(1, 7)]);
        let direct = partial_S(&x, &y, 3, 5000, &SumSpec::plain(1), &ctx()).unwrap();
        let rs = scan_records_from(&x, &y, 3, 5000, &Gauge::Sup, &ctx()).unwrap();
        let via = partial_S_records(&rs, 3, 5000, &SumSpec::plain(1)).unwrap();
        let a = direct.enclose(100).unwrap();
        let b = via.enclose(100).unwrap();
        assert!(a.lo() <= b.hi() && b.lo() <= a.hi());
        assert!(a.width() < BigRational::new(1.into(), (1u64 << 50).into()));
    }

    #[test]
    fn golden_diverges() {
        let x = v(vec![ContinuedFraction::golden().value()]);
        let rep = divergence_diagnostic(
            &x,
            &TorusVector::zero(1),
            1,
            &[100, 1000, 10_000, 100_000],
            &SumSpec::plain(1),
            &DiagnosticConfig::default(),
            &ctx(),
        )
        .unwrap();
        assert_eq!(rep.verdict_hint, Verdict::Diverging);
        assert!(!rep.exact);
        for (k, inc) in rep.per_record_increments.iter().skip(4) {
            assert!(inc.to_f64() > 0.23, "k = {k}");
        }
    }

    #[test]
    fn rational_without_lattice_point_diverges_exactly() {
        let rep = divergence_diagnostic(
            &v(vec![q(1, 2)]),
            &v(vec![q(1, 3)]),
            1,
            &[10, 20],
            &SumSpec::plain(1),
            &DiagnosticConfig::default(),
            &ctx(),
        )
        .unwrap();
        assert_eq!((rep.verdict_hint, rep.exact), (Verdict::Diverging, true));
    }

    #[test]
    fn regimes_coincide_on_uniform_weights() {
        let x = v(vec![q(3, 11), q(5, 13)]);
        let y = v(vec![q(1, 4), q(2, 9)]);
        let plain = partial_S(&x, &y, 2, 300, &SumSpec::plain(2), &ctx()).unwrap();
        let w = partial_S(&x, &y, 2, 300, &SumSpec::weighted(Weights::uniform(2)), &ctx()).unwrap();
        let sigma = Exponent::new(BigRational::new(1.into(), 2.into()), 2).unwrap();
        let s = partial_S(&x, &y, 2, 300, &SumSpec::sigma(sigma, 2), &ctx()).unwrap();
        assert_eq!(exact(&plain), exact(&w));
        assert_eq!(exact(&plain), exact(&s));
    }

    #[test]
    fn non_integral_exponent_is_enclosed() {
        let x = v(vec![q(1, 2), q(1, 5)]);
        let y = TorusVector::zero(2);
        let w = Weights::new(vec![BigRational::new(3.into(), 4.into()), BigRational::new(1.into(), 4.into())]).unwrap();
        let s = partial_S(&x, &y, 1, 3, &SumSpec::weighted(w), &ctx()).unwrap().to_f64();
        // n = 1..3: minima (1/2)^{4/3}, then (2/5)^4 twice
        let oracle = 0.5f64.powf(4.0 / 3.0) + 2.0 * 0.4f64.powi(4);
        assert!((s - oracle).abs() < 1e-12, "{s} vs {oracle}");
    }

    #[test]
    fn argument_errors() {
        let x = v(vec![q(1, 2)]);
        assert!(partial_S(&x, &x, 0, 3, &SumSpec::plain(1), &ctx()).is_err());
        assert!(partial_S(&x, &x, 4, 3, &SumSpec::plain(1), &ctx()).is_err());
        assert!(partial_S(&x, &x, 1, 3, &SumSpec::plain(2), &ctx()).is_err());
    }
}
