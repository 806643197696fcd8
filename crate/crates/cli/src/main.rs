use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kurzweil::contfrac::{cf_expand, convergents, make_liouville, GapSchedule};
use kurzweil::exact::{contains_integer_point, orbit_summary, phi_membership_rational, s_finite, RationalPair};
use kurzweil::numeric::{parse_rational, parse_real, parse_vector, split_top_level, Exponent};
use kurzweil::psi::{discretize_reciprocal, divergence_check_D, membership_W, PsiSpec};
use kurzweil::records::{scan_records_from, Gauge};
use kurzweil::sums::{divergence_diagnostic, partial_S, DiagnosticConfig, SumReport, SumSpec};
use kurzweil::witness::{build_witness, period_multiples, select_subsequence, verify_witness, Source};
use kurzweil::{par, Error, Precision, Real, TorusVector, Weights};
use num_bigint::BigUint;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const SCHEMA_VERSION: u32 = 1;
const DIGITS: usize = 20;

#[derive(Parser)]
#[command(name = "kurzweil", version, about = "Inhomogeneous Diophantine approximation: records, Kurzweil sums, ψ-classes, witnesses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Best-approximation records of ‖t x + y‖.
    Records(RecordsArgs),
    /// Partial Kurzweil sums, optionally with a divergence diagnostic.
    Sum(SumArgs),
    /// Evaluate, discretize and test a ψ function.
    Psi(PsiArgs),
    /// Build and verify a convergence witness y for a well-approximable x.
    Witness(WitnessArgs),
    /// Exact decisions for rational pairs, singly or as a sweep.
    Rational(RationalArgs),
    /// Continued fraction expansion and convergents.
    Cf(CfArgs),
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Precision ceiling in bits.
    #[arg(long)]
    precision: Option<u32>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads for sweeps (0 = all).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

impl Common {
    fn ctx(&self, default: u32) -> Precision {
        Precision::with_ceiling(self.precision.unwrap_or(default))
    }
}

#[derive(Args)]
struct RecordsArgs {
    #[arg(long)]
    x: String,
    #[arg(long)]
    y: String,
    #[arg(long = "N")]
    n: u64,
    #[arg(long, default_value_t = 1)]
    ell: u64,
    /// Comma-separated weights r_i; switches to the weighted gauge.
    #[arg(long)]
    weights: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SumArgs {
    #[arg(long)]
    x: String,
    #[arg(long)]
    y: String,
    #[arg(long, default_value_t = 1)]
    ell: u64,
    #[arg(long = "N")]
    n: Option<u64>,
    /// Expected dimension; checked against the inputs.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, conflicts_with = "sigma")]
    weights: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    /// Truncation points for the divergence diagnostic: `a,b,c` or `geom:start:end:ratio`.
    #[arg(long)]
    schedule: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct PsiArgs {
    #[arg(long)]
    psi: String,
    #[arg(long = "N")]
    n: u64,
    /// With --y, list the members of W(ψ) up to N.
    #[arg(long, requires = "y")]
    x: Option<String>,
    #[arg(long, requires = "x")]
    y: Option<String>,
    /// Dimension for the Σ ψ(n)^d test.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    schedule: Option<String>,
    /// Also report the reciprocal-integer discretization up to N.
    #[arg(long)]
    discretize: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct WitnessArgs {
    #[arg(long)]
    x: String,
    /// Depth K of the witness.
    #[arg(long = "K", default_value_t = 5)]
    k: usize,
    #[arg(long, default_value = "1/2")]
    rho: String,
    #[arg(long = "C", default_value = "1")]
    c: String,
    /// `designated`, `brute:B` or `candidates:n1,n2,...`.
    #[arg(long, default_value = "designated")]
    source: String,
    #[arg(long, default_value_t = 1)]
    ell: u64,
    /// Verification truncation; skipped when absent.
    #[arg(long = "N")]
    n: Option<u64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct RationalArgs {
    #[arg(long, required_unless_present_any = ["grid", "random"])]
    x: Option<String>,
    #[arg(long, required_unless_present_any = ["grid", "random"])]
    y: Option<String>,
    /// Sweep every pair with denominators up to this bound (d = 1).
    #[arg(long, conflicts_with_all = ["x", "y", "random"])]
    grid: Option<i64>,
    /// Sweep this many random pairs.
    #[arg(long, conflicts_with_all = ["x", "y"])]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    max_den: i64,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CfArgs {
    #[arg(long)]
    x: String,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[command(flatten)]
    common: Common,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) => 2,
        e if e.is_precision() => 3,
        _ => 4,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parse(_) => "parse",
        Error::DimensionMismatch { .. } => "dimension-mismatch",
        Error::PrecisionExhausted { .. } => "precision-exhausted",
        Error::Undecided { .. } => "undecided",
        Error::Domain(_) => "domain",
        Error::InsufficientScanBound { .. } => "insufficient-scan-bound",
        Error::NoAdmissible { .. } => "no-admissible",
        Error::Refuted { .. } => "refuted",
    }
}

fn rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn real_json(v: &Real) -> kurzweil::Result<Value> {
    Ok(match v.as_exact() {
        Some(e) => json!({ "value": rational(e), "decimal": v.to_decimal(DIGITS)?, "exact": true }),
        None => {
            let iv = v.enclose(128)?;
            json!({
                "decimal": v.to_decimal(DIGITS)?,
                "exact": false,
                "lo": kurzweil::numeric::interval::rat_to_decimal(iv.lo(), DIGITS),
                "hi": kurzweil::numeric::interval::rat_to_decimal(iv.hi(), DIGITS),
            })
        }
    })
}

fn parse_rationals(s: &str) -> kurzweil::Result<Vec<BigRational>> {
    split_top_level(s.trim().trim_start_matches('[').trim_end_matches(']'), ',')
        .into_iter()
        .map(|t| parse_rational(t.trim()))
        .collect()
}

fn parse_schedule(s: &str) -> kurzweil::Result<Vec<u64>> {
    let bad = || Error::parse(format!("bad schedule {s:?}"));
    if let Some(rest) = s.strip_prefix("geom:") {
        let parts: Vec<u64> = rest
            .split(':')
            .map(|p| p.parse::<f64>().ok().filter(|v| *v >= 1.0).map(|v| v as u64).ok_or_else(bad))
            .collect::<kurzweil::Result<_>>()?;
        let [start, end, ratio] = parts[..] else { return Err(bad()) };
        if ratio < 2 {
            return Err(bad());
        }
        let mut out = Vec::new();
        let mut n = start;
        while n <= end {
            out.push(n);
            n = n.checked_mul(ratio).ok_or_else(bad)?;
        }
        return Ok(out);
    }
    s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect()
}

fn spec_for(x: &TorusVector, weights: Option<&str>, sigma: Option<&str>) -> kurzweil::Result<SumSpec> {
    let d = x.dim();
    match (weights, sigma) {
        (Some(w), _) => {
            let w = Weights::new(parse_rationals(w)?)?;
            if w.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: w.dim() });
            }
            Ok(SumSpec::weighted(w))
        }
        (None, Some(s)) => Ok(SumSpec::sigma(Exponent::new(parse_rational(s)?, d)?, d)),
        (None, None) => Ok(SumSpec::plain(d)),
    }
}

fn report_json(rep: &SumReport) -> kurzweil::Result<Value> {
    let sums = rep
        .partial_sums
        .iter()
        .map(|(n, v)| Ok(json!({ "N": n, "sum": real_json(v)? })))
        .collect::<kurzweil::Result<Vec<_>>>()?;
    let incs = rep
        .per_record_increments
        .iter()
        .map(|(k, v)| Ok(json!({ "k": k, "increment": v.to_decimal(DIGITS)? })))
        .collect::<kurzweil::Result<Vec<_>>>()?;
    let cert = match &rep.certificate {
        Some(c) => json!({
            "kind": c.kind,
            "bound": c.bound.as_ref().map(real_json).transpose()?,
            "detail": c.detail,
        }),
        None => Value::Null,
    };
    Ok(json!({
        "regime": rep.regime,
        "ell": rep.ell,
        "partial_sums": sums,
        "per_record_increments": incs,
        "verdict": rep.verdict_hint,
        "exact": rep.exact,
        "certificate": cert,
    }))
}

enum Output {
    Json(Value),
    Text(String),
}

fn cmd_records(a: &RecordsArgs) -> kurzweil::Result<Output> {
    let ctx = a.common.ctx(4096);
    let x = parse_vector(&a.x)?;
    let y = parse_vector(&a.y)?;
    let gauge = match &a.weights {
        Some(w) => Gauge::Weighted(Weights::new(parse_rationals(w)?)?),
        None => Gauge::Sup,
    };
    let rs = scan_records_from(&x, &y, a.ell, a.n, &gauge, &ctx)?;
    let rows = rs
        .entries
        .iter()
        .map(|r| Ok((r.t, r.delta.to_decimal(DIGITS)?, r.delta.as_exact().map(rational))))
        .collect::<kurzweil::Result<Vec<_>>>()?;
    if a.common.format == Some(Format::Json) {
        let records: Vec<Value> = rows
            .iter()
            .map(|(t, d, e)| json!({ "t": t, "delta": d, "delta_exact": e }))
            .collect();
        return Ok(Output::Json(json!({
            "command": "records",
            "x": x.literal(),
            "y": y.literal(),
            "start": rs.start,
            "scan_bound": rs.scan_bound,
            "zero_hit": rs.zero_hit,
            "records": records,
        })));
    }
    let mut out = String::from("t,delta,delta_exact\n");
    for (t, d, e) in rows {
        out.push_str(&format!("{t},{d},{}\n", e.unwrap_or_default()));
    }
    Ok(Output::Text(out))
}

fn cmd_sum(a: &SumArgs) -> kurzweil::Result<Output> {
    let ctx = a.common.ctx(4096);
    let x = parse_vector(&a.x)?;
    let y = parse_vector(&a.y)?;
    if let Some(d) = a.d {
        if d != x.dim() {
            return Err(Error::DimensionMismatch { expected: d, found: x.dim() });
        }
    }
    let spec = spec_for(&x, a.weights.as_deref(), a.sigma.as_deref())?;
    let mut out = json!({ "command": "sum", "x": x.literal(), "y": y.literal(), "ell": a.ell, "regime": spec.name() });
    if let Some(n) = a.n {
        let v = partial_S(&x, &y, a.ell, n, &spec, &ctx)?;
        out["N"] = json!(n);
        out["partial"] = real_json(&v)?;
    }
    if let Some(s) = &a.schedule {
        let schedule = parse_schedule(s)?;
        let rep = divergence_diagnostic(&x, &y, a.ell, &schedule, &spec, &DiagnosticConfig::default(), &ctx)?;
        out["diagnostic"] = report_json(&rep)?;
    }
    if a.n.is_none() && a.schedule.is_none() {
        return Err(Error::parse("sum needs --N or --schedule"));
    }
    Ok(Output::Json(out))
}

fn cmd_psi(a: &PsiArgs) -> kurzweil::Result<Output> {
    let ctx = a.common.ctx(4096);
    let psi = PsiSpec::parse(&a.psi)?;
    let mut out = json!({ "command": "psi", "psi": psi.literal(), "N": a.n });
    if a.discretize {
        let k = discretize_reciprocal(&psi, a.n, &ctx)?;
        out["reciprocal"] = json!(k.k.iter().map(ToString::to_string).collect::<Vec<_>>());
    }
    if let (Some(x), Some(y)) = (&a.x, &a.y) {
        let (x, y) = (parse_vector(x)?, parse_vector(y)?);
        out["membership"] = json!(membership_W(&x, &y, &psi, a.n, &ctx)?);
    }
    if let Some(d) = a.d {
        let schedule = match &a.schedule {
            Some(s) => parse_schedule(s)?,
            None => parse_schedule(&format!("geom:1:{}:10", a.n))?,
        };
        let rep = divergence_check_D(&psi, d, &schedule, &DiagnosticConfig::default(), &ctx)?;
        let sums = rep
            .partial_sums
            .iter()
            .map(|(n, v)| Ok(json!({ "N": n, "sum": real_json(v)? })))
            .collect::<kurzweil::Result<Vec<_>>>()?;
        out["divergence"] = json!({ "d": d, "partial_sums": sums, "verdict": rep.verdict, "exact": rep.exact });
    }
    Ok(Output::Json(out))
}

fn cmd_witness(a: &WitnessArgs) -> kurzweil::Result<Output> {
    let ctx = a.common.ctx(1 << 14);
    let x = parse_vector(&a.x)?;
    let rho = parse_rational(&a.rho)?;
    let c = parse_rational(&a.c)?;
    let source = if a.source == "designated" {
        let body = a.x.trim();
        let body = body.strip_prefix('(').and_then(|b| b.strip_suffix(')')).unwrap_or(body);
        let parts: Vec<&str> = split_top_level(body, ',').into_iter().map(str::trim).collect();
        // one shared Liouville number in every coordinate
        if parts.iter().all(|p| *p == parts[0]) && parts[0].starts_with("liouville:") {
            let rest = &parts[0]["liouville:".len()..];
            Source::Designated(make_liouville(GapSchedule::parse(rest)?)?.designated(a.k + 1))
        } else if let Some(list) = period_multiples(&x, a.k + 1) {
            Source::Designated(list)
        } else {
            return Err(Error::domain("designated denominators need a liouville: or rational x"));
        }
    } else if let Some(b) = a.source.strip_prefix("brute:") {
        Source::BruteForce(b.parse().map_err(|_| Error::parse(format!("bad bound {b:?}")))?)
    } else if let Some(list) = a.source.strip_prefix("candidates:") {
        Source::Candidates(
            list.split(',')
                .map(|t| t.trim().parse::<BigUint>().map_err(|_| Error::parse(format!("bad candidate {t:?}"))))
                .collect::<kurzweil::Result<_>>()?,
        )
    } else {
        return Err(Error::parse(format!("unknown source {:?}", a.source)));
    };
    let seq = select_subsequence(&x, &source, a.k, &rho, &c, &ctx)?;
    let cert = build_witness(&x, &seq, a.k, &ctx)?;
    let body = serde_json::to_value(cert.to_json(DIGITS)?).expect("serializable");
    let mut out = json!({ "command": "witness", "certificate": body, "precision_bits": ctx.ceiling_bits });
    if let Some(n) = a.n {
        out["verification"] = report_json(&verify_witness(&cert, a.ell, n)?)?;
    }
    Ok(Output::Json(out))
}

fn rational_row(pair: &RationalPair) -> kurzweil::Result<Value> {
    let point = contains_integer_point(pair);
    let summary = orbit_summary(pair)?;
    Ok(json!({
        "x": pair.x().iter().map(rational).collect::<Vec<_>>(),
        "y": pair.y().iter().map(rational).collect::<Vec<_>>(),
        "contains_integer": point.is_some(),
        "least_n": point.as_ref().map(|p| p.least_n.to_string()),
        "modulus": point.as_ref().map(|p| p.modulus.to_string()),
        "period": summary.period.to_string(),
        "min_dist": rational(&summary.min_dist),
        "s_finite": s_finite(pair, 1),
        "phi_membership": phi_membership_rational(pair),
    }))
}

fn cmd_rational(a: &RationalArgs) -> kurzweil::Result<Output> {
    let pairs: Vec<RationalPair> = if let Some(q) = a.grid {
        if q < 1 {
            return Err(Error::domain("grid bound must be positive"));
        }
        let mut uniq: Vec<BigRational> = (1..=q)
            .flat_map(|b| (0..b).map(move |p| BigRational::new(p.into(), b.into())))
            .collect();
        uniq.sort();
        uniq.dedup();
        uniq.iter()
            .flat_map(|x| uniq.iter().map(move |y| (x.clone(), y.clone())))
            .map(|(x, y)| RationalPair::new(vec![x], vec![y]))
            .collect::<kurzweil::Result<_>>()?
    } else if let Some(m) = a.random {
        if a.max_den < 1 || a.d == 0 {
            return Err(Error::domain("--max-den and --d must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        let draw = |rng: &mut ChaCha8Rng| -> Vec<BigRational> {
            (0..a.d)
                .map(|_| {
                    let q = rng.gen_range(1..=a.max_den);
                    BigRational::new(rng.gen_range(0..q).into(), q.into())
                })
                .collect()
        };
        (0..m)
            .map(|_| {
                let x = draw(&mut rng);
                let y = draw(&mut rng);
                RationalPair::new(x, y)
            })
            .collect::<kurzweil::Result<_>>()?
    } else {
        let x = parse_vector(a.x.as_deref().expect("clap"))?;
        let y = parse_vector(a.y.as_deref().expect("clap"))?;
        let pair = RationalPair::from_vectors(&x, &y)?;
        let mut row = rational_row(&pair)?;
        row["command"] = json!("rational");
        return Ok(Output::Json(row));
    };
    let rows = par::with_jobs(a.common.jobs, || par::map(&pairs, rational_row))
        .into_iter()
        .collect::<kurzweil::Result<Vec<_>>>()?;
    if a.common.format == Some(Format::Csv) {
        let mut out = String::from("x,y,contains_integer,least_n,modulus,period,min_dist,s_finite,phi_membership\n");
        let cell = |v: &Value| match v {
            Value::String(s) => s.clone(),
            Value::Null => String::new(),
            Value::Array(a) => a.iter().map(|e| e.as_str().unwrap_or_default().to_string()).collect::<Vec<_>>().join(" "),
            other => other.to_string(),
        };
        for r in &rows {
            let fields = ["x", "y", "contains_integer", "least_n", "modulus", "period", "min_dist", "s_finite", "phi_membership"];
            out.push_str(&fields.iter().map(|f| cell(&r[*f])).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        return Ok(Output::Text(out));
    }
    Ok(Output::Json(json!({ "command": "rational", "count": rows.len(), "pairs": rows })))
}

fn cmd_cf(a: &CfArgs) -> kurzweil::Result<Output> {
    let ctx = a.common.ctx(4096);
    let x = parse_real(&a.x)?;
    let cf = cf_expand(&x, a.count, &ctx)?;
    let terms = cf.terms(a.count);
    let conv = convergents(&cf, terms.len())?;
    Ok(Output::Json(json!({
        "command": "cf",
        "x": a.x,
        "literal": cf.literal(),
        "terms": terms.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "convergents": conv.iter().map(|c| format!("{}/{}", c.p, c.q)).collect::<Vec<_>>(),
    })))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, format) = match &cli.command {
        Command::Records(a) => (cmd_records(a), a.common.format.unwrap_or(Format::Csv)),
        Command::Sum(a) => (cmd_sum(a), a.common.format.unwrap_or(Format::Json)),
        Command::Psi(a) => (cmd_psi(a), a.common.format.unwrap_or(Format::Json)),
        Command::Witness(a) => (cmd_witness(a), a.common.format.unwrap_or(Format::Json)),
        Command::Rational(a) => (cmd_rational(a), a.common.format.unwrap_or(Format::Json)),
        Command::Cf(a) => (cmd_cf(a), a.common.format.unwrap_or(Format::Json)),
    };
    let mut stdout = std::io::stdout().lock();
    match result {
        Ok(Output::Json(mut v)) => {
            v["schema_version"] = json!(SCHEMA_VERSION);
            let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&v).expect("serializable"));
            ExitCode::SUCCESS
        }
        Ok(Output::Text(t)) => {
            let _ = write!(stdout, "{t}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            if format == Format::Json {
                let v = json!({
                    "schema_version": SCHEMA_VERSION,
                    "error": { "kind": error_kind(&e), "message": e.to_string() },
                });
                let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&v).expect("serializable"));
            }
            eprintln!("kurzweil: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
