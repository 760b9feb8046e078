use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use serde_json::{json, Value};

use rotwalk::chain::{chain_spectrum, lemma2_required, mixing_bound, verify_mixing, FiniteChain};
use rotwalk::construct::{
    fill_evidence, lemma1_check, lemma1_delta, lemma3_params, odd_in_ball, theorem1_build, theorem2_build, theorem3_build,
    verify_ledger, ConstructionLedger, EvidenceConfig, Theorem1Config, Theorem2Config, Theorem3Config,
};
use rotwalk::diophantine::{build_liouville, parse_angle, Angle, ApproxWitness, DEFAULT_PRECISION_BITS};
use rotwalk::exact::{parse_ratio, qfrac, qint, to_f64, Q};
use rotwalk::observable::{parse_amplitude, t1_term, Amplitude, CosineSeries, Term};
use rotwalk::spectral::{kv_scan, sigma2_partial, spectral_report};
use rotwalk::walk::{exact_tail, mc_clt, mc_tail, mc_tail_with, Tail, TailEstimate, WalkConfig};
use rotwalk::Error;

use crate::args::*;

pub const PRESETS: [&str; 3] = ["golden-c1", "lemma1-faithful", "lemma3"];

pub enum Fail {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

impl From<serde_json::Error> for Fail {
    fn from(e: serde_json::Error) -> Self {
        Fail::Lib(e.into())
    }
}

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Self {
        Fail::Lib(e.into())
    }
}

pub type R<T> = std::result::Result<T, Fail>;

pub struct Output {
    pub result: Value,
    pub csv: Option<String>,
    /// 0, or 3 when a verification did not pass.
    pub status: i32,
    /// Extra named files (`construct`).
    pub files: Vec<(&'static str, Value)>,
}

impl Output {
    fn new(result: Value, csv: Option<String>) -> Self {
        Output { result, csv, status: 0, files: Vec::new() }
    }
}

pub fn parse_series(s: &str) -> R<CosineSeries> {
    let s = s.trim();
    if let Some(path) = s.strip_prefix('@') {
        let text = std::fs::read_to_string(path)?;
        return parse_series(&text);
    }
    if s.starts_with('{') {
        let v: Value = serde_json::from_str(s)?;
        let v = v.get("result").cloned().unwrap_or(v);
        return Ok(serde_json::from_value(v)?);
    }
    if s.is_empty() || s == "0" {
        return Ok(CosineSeries::empty());
    }
    let mut terms = Vec::new();
    for part in s.split(',') {
        let (q, a) = part
            .split_once(':')
            .ok_or_else(|| Fail::Usage(format!("series term {part:?} is not of the form q:a")))?;
        let q: BigUint = q.trim().parse().map_err(|_| Fail::Usage(format!("bad frequency {q:?}")))?;
        terms.push(Term::new(q, parse_amplitude(a.trim())?));
    }
    Ok(CosineSeries::new(terms)?)
}

pub fn angle(s: &str) -> R<Angle> {
    if let Some(path) = s.strip_prefix('@') {
        let text = std::fs::read_to_string(path)?;
        let v: Value = serde_json::from_str(&text)?;
        let v = v.get("result").cloned().unwrap_or(v);
        return Ok(serde_json::from_value(v)?);
    }
    Ok(parse_angle(s)?)
}

fn ratio(s: &str) -> R<Q> {
    Ok(parse_ratio(s)?)
}

fn tail_kind(two_sided: bool) -> Tail {
    if two_sided {
        Tail::TwoSided
    } else {
        Tail::Upper
    }
}

fn tail_csv(e: &TailEstimate) -> String {
    format!(
        "steps,trials,threshold,hits,estimate,lo,hi\n{},{},{:e},{},{:e},{:e},{:e}\n",
        e.steps, e.trials, e.threshold, e.hits, e.estimate, e.interval.lo, e.interval.hi
    )
}

pub fn execute(cmd: &Command, seed: u64) -> R<Output> {
    match cmd {
        Command::Spectrum(a) => spectrum(a),
        Command::Tail(a) => tail(a, seed),
        Command::Clt(a) => clt(a, seed),
        Command::Exact(a) => exact(a, seed),
        Command::Construct(a) => construct(a, seed),
        Command::Verify(a) => verify(a),
        Command::Chain(a) => chain(a),
        Command::Preset(a) => preset(a, seed),
        Command::Run(_) => Err(Fail::Usage("run cannot be nested".into())),
    }
}

fn spectrum(a: &SpectrumArgs) -> R<Output> {
    let s = parse_series(&a.observed.series)?;
    let al = angle(&a.observed.angle)?;
    let cut = match &a.cutoff {
        Some(c) => Some(c.parse::<BigUint>().map_err(|_| Fail::Usage(format!("bad cutoff {c:?}")))?),
        None => None,
    };
    let rep = spectral_report(&s, &al, cut.as_ref())?;
    Ok(Output::new(serde_json::to_value(&rep)?, Some(rep.to_csv())))
}

fn tail(a: &TailArgs, seed: u64) -> R<Output> {
    let s = parse_series(&a.observed.series)?;
    let cfg = WalkConfig::new(angle(&a.observed.angle)?, a.steps, a.trials, ratio(&a.s)?, seed)?;
    let est = mc_tail_with(&cfg, &s, a.threshold, tail_kind(a.two_sided))?;
    Ok(Output::new(serde_json::to_value(&est)?, Some(tail_csv(&est))))
}

fn clt(a: &CltArgs, seed: u64) -> R<Output> {
    let s = parse_series(&a.observed.series)?;
    let al = angle(&a.observed.angle)?;
    let sigma = match a.sigma {
        Some(v) => v,
        None => sigma2_partial(&s, &al, None)?.sqrt(),
    };
    let cfg = WalkConfig::new(al, a.steps, a.trials, qint(1), seed)?;
    let rep = mc_clt(&cfg, &s, sigma)?;
    let csv = format!(
        "steps,trials,sigma,mean,variance,ks,ks_critical,ks_pass\n{},{},{:e},{:e},{:e},{:e},{:e},{}\n",
        rep.steps, rep.trials, rep.sigma, rep.mean, rep.variance, rep.ks, rep.ks_critical, rep.ks_pass
    );
    Ok(Output::new(serde_json::to_value(&rep)?, Some(csv)))
}

fn exact(a: &ExactArgs, seed: u64) -> R<Output> {
    let s = parse_series(&a.observed.series)?;
    let al = angle(&a.observed.angle)?;
    let sq = ratio(&a.s)?;
    let tk = tail_kind(a.two_sided);
    let ex = exact_tail(&s, &al, a.steps, a.threshold, to_f64(&sq), a.quadrature, tk)?;
    let mut csv = format!(
        "steps,threshold,probability,error_bound,quadrature\n{},{:e},{:e},{:e},{}\n",
        a.steps, a.threshold, ex.probability, ex.error_bound, ex.quadrature
    );
    let result = match a.cross_check {
        None => serde_json::to_value(&ex)?,
        Some(trials) => {
            let cfg = WalkConfig::new(al, a.steps as u64, trials, sq, seed)?;
            let mc = mc_tail_with(&cfg, &s, a.threshold, tk)?;
            let agree = mc.interval.lo - ex.error_bound <= ex.probability && ex.probability <= mc.interval.hi + ex.error_bound;
            let _ = writeln!(csv, "# monte carlo {:e} [{:e}, {:e}] agree={agree}", mc.estimate, mc.interval.lo, mc.interval.hi);
            json!({ "exact": ex, "monte_carlo": mc, "agree": agree })
        }
    };
    Ok(Output::new(result, Some(csv)))
}

fn construct(a: &ConstructArgs, seed: u64) -> R<Output> {
    let s = a.s.as_deref().map(ratio).transpose()?;
    let built = match a.theorem {
        Theorem::One => {
            let base = if a.toy { Theorem1Config::toy(a.depth) } else { Theorem1Config::faithful(a.depth) };
            let cfg = Theorem1Config {
                s: s.unwrap_or(base.s.clone()),
                toy_ratio: ratio(&a.toy_ratio)?,
                ..base
            };
            theorem1_build(&cfg)?
        }
        Theorem::Two => {
            let al = match &a.angle {
                Some(x) => angle(x)?,
                None => build_liouville(&[0, 10], |_| 6, a.depth + 2, DEFAULT_PRECISION_BITS)?,
            };
            theorem2_build(&Theorem2Config { angle: al, gamma: ratio(&a.gamma)?, c: ratio(&a.c)?, s, depth: a.depth })?
        }
        Theorem::Three => {
            let al = match &a.angle {
                Some(x) => angle(x)?,
                None => build_liouville(&[0], |k| k as u32, 5, DEFAULT_PRECISION_BITS)?,
            };
            theorem3_build(&Theorem3Config { angle: al, s: s.unwrap_or(qfrac(3, 5)), max_levels: a.max_levels })?
        }
    };
    let mut c = built;
    if a.evidence {
        let cfg = EvidenceConfig { trials: a.trials, seed, max_steps: a.max_steps, only: a.only.clone() };
        fill_evidence(&mut c.ledger, &c.series, &c.angle, &cfg)?;
    }
    let report = verify_ledger(&c.ledger);
    let summary = json!({
        "theorem": c.ledger.theorem,
        "mode": c.ledger.mode,
        "levels": c.ledger.levels.len(),
        "enforced_ok": c.ledger.enforced_ok(),
        "verified": report.pass,
        "files": ["ledger.json", "angle.json", "series.json"],
    });
    let mut out = Output::new(summary, None);
    out.status = if report.pass { 0 } else { 3 };
    out.files = vec![
        ("ledger.json", serde_json::to_value(&c.ledger)?),
        ("angle.json", serde_json::to_value(&c.angle)?),
        ("series.json", serde_json::to_value(&c.series)?),
    ];
    Ok(out)
}

pub fn read_ledger(text: &str) -> R<ConstructionLedger> {
    let v: Value = serde_json::from_str(text)?;
    let v = v.get("result").cloned().unwrap_or(v);
    Ok(serde_json::from_value(v)?)
}

fn verify(a: &VerifyArgs) -> R<Output> {
    let ledger = read_ledger(&std::fs::read_to_string(&a.ledger)?)?;
    let rep = verify_ledger(&ledger);
    let mut csv = String::from("name,ok,detail\n");
    for c in &rep.checks {
        let _ = writeln!(csv, "{},{},\"{}\"", c.name, c.ok, c.detail.replace('"', "'"));
    }
    let mut out = Output::new(serde_json::to_value(&rep)?, Some(csv));
    if !rep.pass {
        out.status = 3;
        for c in rep.failures() {
            eprintln!("verification failed: {}: {}", c.name, c.detail);
        }
    }
    Ok(out)
}

fn chain(a: &ChainArgs) -> R<Output> {
    let c = FiniteChain::new(a.q, a.p)?;
    let spectrum = chain_spectrum(&c);
    let bound = mixing_bound(&c);
    let check = verify_mixing(&c, a.horizon)?;
    let required = match &a.series {
        Some(s) => Some(lemma2_required(&parse_series(s)?, &c, a.s, a.delta, a.eps)?),
        None => None,
    };
    let mut csv = String::from("k,eigenvalue\n");
    for (k, v) in spectrum.iter().enumerate() {
        let _ = writeln!(csv, "{k},{v:e}");
    }
    let mut out = Output::new(
        json!({ "q": a.q, "p": a.p, "spectrum": spectrum, "bound": bound, "mixing": check, "required_n": required }),
        Some(csv),
    );
    if !check.holds {
        eprintln!("mixing bound failed for q = {}, p = {}", a.q, a.p);
        out.status = 3;
    }
    Ok(out)
}

fn preset(a: &PresetArgs, seed: u64) -> R<Output> {
    match a.name.as_str() {
        "golden-c1" => golden_c1(a.trials, seed),
        "lemma1-faithful" => lemma1_faithful(a.trials, seed),
        "lemma3" => lemma3(a.trials, seed),
        other => Err(Fail::Usage(format!("unknown preset {other:?}; available: {}", PRESETS.join(", ")))),
    }
}

/// Golden angle with amplitudes `q_j^-(1+eps)` on its convergent
/// denominators: KV growth scans and CLT runs. Exploratory, no verdict.
fn golden_c1(trials: u64, seed: u64) -> R<Output> {
    let al = Angle::golden_conjugate(96);
    let mut dens: Vec<BigInt> = al.convergent_list().iter().map(|(_, q)| q.clone()).take(26).collect();
    dens.dedup();
    let cut: Vec<BigUint> = dens.iter().map(|q| q.to_biguint().expect("positive")).collect();
    let mut families = Vec::new();
    let mut csv = String::from("eps,cutoff,kv_partial\n");
    for eps in [qfrac(1, 10), qfrac(1, 2), qint(1)] {
        let terms = cut
            .iter()
            .map(|q| Term::new(q.clone(), Amplitude::power(qint(BigInt::from(q.clone())), -(qint(1) + &eps))))
            .collect();
        let s = CosineSeries::new(terms)?;
        let scan = kv_scan(&s, &al, &cut)?;
        for (n, v) in &scan {
            let _ = writeln!(csv, "{},{n},{v:e}", to_f64(&eps));
        }
        let sigma = sigma2_partial(&s, &al, None)?.sqrt();
        let cfg = WalkConfig::new(al.clone(), 2000, trials, qint(1), seed)?;
        let clt = mc_clt(&cfg, &s, sigma)?;
        families.push(json!({ "eps": rotwalk::exact::fmt_ratio(&eps), "scan": scan, "sigma": sigma, "clt": clt }));
    }
    Ok(Output::new(json!({ "angle": al, "families": families }), Some(csv)))
}

/// Single level at `1/3`: amplitude `2^-3`, `N = 5800`, an odd-denominator
/// angle in the closeness ball, the exact certificate and the simulated tail.
fn lemma1_faithful(trials: u64, seed: u64) -> R<Output> {
    let base = qfrac(1, 3);
    let n = BigInt::from(5800);
    let s = qfrac(3, 5);
    let delta = lemma1_delta(&BigInt::from(3), &n);
    let alpha = odd_in_ball(&base, &delta, &BigInt::from(3))?;
    let cert = lemma1_check(&base, &alpha, &n, &s, &Amplitude::Rational(qfrac(1, 8)), 256)?;
    let cfg = WalkConfig::new(Angle::rational(alpha), 5800, trials, s, seed)?;
    let est = mc_tail(&cfg, &t1_term(3), 2.0)?;
    let supports = est.interval.lo >= 1.0 / 6.0;
    let mut out = Output::new(json!({ "certificate": cert, "tail": est, "supports": supports }), Some(tail_csv(&est)));
    if !cert.holds() {
        out.status = 3;
    }
    Ok(out)
}

/// Witness `1/10` of a Liouville angle with `gamma = 6`, `c = 1`, `s = 3/5`.
fn lemma3(trials: u64, seed: u64) -> R<Output> {
    let al = build_liouville(&[0, 10], |_| 6, 2, DEFAULT_PRECISION_BITS)?;
    let w = ApproxWitness::from_convergent(&al, 1, &qint(6), &qint(1))?;
    let p = lemma3_params(&w, &qfrac(3, 5))?;
    let steps = u64::try_from(&p.n).map_err(|_| Error::Infeasible("horizon too long".into()))?;
    let cfg = WalkConfig::new(al, steps, trials, qfrac(3, 5), seed)?;
    let est = mc_tail_with(&cfg, &p.series, p.threshold_f64, Tail::Upper)?;
    let supports = est.interval.lo >= 1.0 / 8.0;
    Ok(Output::new(json!({ "params": p, "tail": est, "supports": supports }), Some(tail_csv(&est))))
}
