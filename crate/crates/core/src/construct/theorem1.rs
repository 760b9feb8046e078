//! Inductive construction of a rational-limit angle and a trigonometric
//! series with infinitely many levels of large deviations.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ledger::{ConstructionLedger, EvidenceSlot, EvidenceStatus, Level, Line, Mode, Relation, Terms};
use super::lemma::{lemma1_delta, lemma1_threshold_line, odd_in_ball};
use super::{npow, Construction};
use crate::diophantine::{biguint, Angle};
use crate::error::{Error, Result};
use crate::exact::{self, cos_pi_over_bounds, min_int_pow_exceeding, qfrac, qint, qpow, Expr, Q};
use crate::observable::{Amplitude, CosineSeries, Term};
use crate::walk::Tail;

/// Largest `q` for which `2^-q` is materialised exactly.
pub const AMPLITUDE_EXPONENT_BUDGET: u64 = 1 << 24;

#[derive(Clone, Debug)]
pub struct Theorem1Config {
    pub depth: usize,
    pub s: Q,
    pub mode: Mode,
    /// Toy schedule `a_k = ratio^k`.
    pub toy_ratio: Q,
    pub start: Q,
}

impl Theorem1Config {
    pub fn faithful(depth: usize) -> Self {
        Theorem1Config {
            depth,
            s: qfrac(3, 5),
            mode: Mode::Faithful,
            toy_ratio: qfrac(1, 4),
            start: qfrac(1, 3),
        }
    }

    pub fn toy(depth: usize) -> Self {
        Theorem1Config {
            mode: Mode::Toy,
            ..Self::faithful(depth)
        }
    }
}

pub(crate) fn amplitude(mode: Mode, ratio: &Q, k: usize, q: &BigInt) -> Result<Q> {
    match mode {
        Mode::Faithful => {
            let e = q
                .to_u64()
                .filter(|&e| e <= AMPLITUDE_EXPONENT_BUDGET)
                .ok_or_else(|| {
                    Error::Infeasible(format!(
                        "amplitude 2^-q_{k} needs q_{k} = {} bits of exponent (about 2^{}), budget is 2^24",
                        if q.bits() > 64 { format!("~2^{}", q.bits()) } else { q.to_string() },
                        q.bits()
                    ))
                })?;
            Ok(exact::pow2(-(e as i64)))
        }
        Mode::Toy => Ok(qpow(ratio, k as i64)),
    }
}

/// Rigorous upper bound on the chain variance constant
/// `a^2/2 + 2 q a^2 / (1 - cos(pi/q))` for a single term.
pub(crate) fn lemma2_constant_hi(a: &Q, q: &BigInt) -> Result<Q> {
    let qq = q
        .to_u64()
        .ok_or_else(|| Error::PrecisionBudget("chain order exceeds u64".into()))?;
    let (_, rho_hi) = cos_pi_over_bounds(qq);
    let a2 = a * a;
    Ok(&a2 / qint(2) + qint(2) * qint(q.clone()) * &a2 / (Q::one() - rho_hi))
}

/// `K / (delta^2 N^(2s-1)) < eps` with `delta = 4^-i`, `eps = 4^-i / 6`.
pub(crate) fn lemma2_line(k: usize, i: usize, a_i: &Q, q_k: &BigInt, n_k: &BigInt, s: &Q, enforced: bool) -> Result<Line> {
    let kc = lemma2_constant_hi(a_i, q_k)?;
    let delta = qpow(&qfrac(1, 4), i as i64);
    let eps = &delta / qint(6);
    let lhs = npow(n_k, &(Q::one() - qint(2) * s)).scale(&(kc / (&delta * &delta)));
    Line::new(format!("lemma2[{k},{i}]"), lhs, Relation::Lt, Expr::rational(eps), enforced)
}

pub(crate) fn lemma2_required_n(a_i: &Q, q_k: &BigInt, i: usize, s: &Q) -> Result<BigInt> {
    let kc = lemma2_constant_hi(a_i, q_k)?;
    let delta = qpow(&qfrac(1, 4), i as i64);
    let eps = &delta / qint(6);
    Ok(min_int_pow_exceeding(&(qint(2) * s - Q::one()), &(kc / (eps * &delta * &delta))))
}

/// Least `q` with `2^-q * x < 1`, i.e. `2^q > x`.
fn least_power_exceeding(x: &Expr) -> u64 {
    let mut q = (x.ln() / std::f64::consts::LN_2).max(0.0) as u64;
    let beats = |q: u64| {
        exact::compare(&Expr::rational(exact::pow2(q as i64)), x) == Some(std::cmp::Ordering::Greater)
    };
    while !beats(q) {
        q += 1;
    }
    while q > 0 && beats(q - 1) {
        q -= 1;
    }
    q
}

/// `(8/3) 4^(k-i) N_i^(1-s)`: a next amplitude must stay below its inverse.
fn tail_step_rhs(k: usize, i: usize) -> Q {
    qfrac(3, 8) * qpow(&qfrac(1, 4), (k - i) as i64)
}

pub fn theorem1_build(cfg: &Theorem1Config) -> Result<Construction> {
    let s = cfg.s.clone();
    if s <= qfrac(1, 2) || s >= Q::one() {
        return Err(Error::InvalidInput("s must lie in (1/2, 1)".into()));
    }
    if cfg.depth == 0 {
        return Err(Error::InvalidInput("depth must be >= 1".into()));
    }
    if cfg.mode == Mode::Toy && (!cfg.toy_ratio.is_positive() || cfg.toy_ratio >= Q::one()) {
        return Err(Error::InvalidInput("toy ratio must lie in (0, 1)".into()));
    }
    if cfg.start.denom().is_even() || cfg.start.denom() < &BigInt::from(3) {
        return Err(Error::InvalidInput("starting angle needs an odd denominator >= 3".into()));
    }
    let faithful = cfg.mode == Mode::Faithful;
    let one_minus_s = Q::one() - &s;
    let mut levels: Vec<Level> = Vec::new();
    let mut lines: Vec<Line> = Vec::new();
    let mut alpha = cfg.start.clone();

    for k in 1..=cfg.depth {
        let q = alpha.denom().clone();
        let a = amplitude(cfg.mode, &cfg.toy_ratio, k, &q)?;
        let mut n = min_int_pow_exceeding(&one_minus_s, &(qint(4) / &a));
        if let Some(prev) = levels.last() {
            n = n.max(&prev.n + 1);
        }
        if faithful {
            for prev in &levels {
                let a_i = prev.amplitude.as_rational().expect("rational amplitudes");
                n = n.max(lemma2_required_n(a_i, &q, prev.k, &s)?);
            }
        }
        let delta = lemma1_delta(&q, &n);
        let amp = Amplitude::Rational(a.clone());
        lines.push(lemma1_threshold_line(format!("threshold[{k}]"), &amp, &n, &s)?);
        if let Some(prev) = levels.last() {
            lines.push(Line::new(
                format!("n_increasing[{k}]"),
                Expr::int(n.clone()),
                Relation::Gt,
                Expr::int(prev.n.clone()),
                true,
            )?);
        }
        for prev in &levels {
            let a_i = prev.amplitude.as_rational().expect("rational amplitudes");
            let line = lemma2_line(k, prev.k, a_i, &q, &n, &s, faithful)?;
            let req = lemma2_required_n(a_i, &q, prev.k, &s)?;
            lines.push(line.with_note(format!("required N = {}", short_int(&req))));
        }
        levels.push(Level {
            k,
            p: alpha.numer().clone(),
            q: q.clone(),
            amplitude: amp,
            n,
            delta: Some(delta),
            gap: None,
            exponent: None,
        });

        // next approximant
        let radius = levels
            .iter()
            .map(|l| l.delta.clone().unwrap() - (&alpha - l.alpha()).abs())
            .min()
            .unwrap();
        let mut above = q.clone();
        if faithful {
            let mut q_req = 0u64;
            for l in &levels {
                let x = npow(&l.n, &one_minus_s).scale(&(Q::one() / tail_step_rhs(k, l.k)));
                q_req = q_req.max(least_power_exceeding(&x));
            }
            above = above.max(BigInt::from(q_req) - 1);
        }
        alpha = odd_in_ball(&alpha, &radius, &above)?;
    }

    let kk = cfg.depth + 1;
    let q_next = alpha.denom().clone();
    let a_next = amplitude(cfg.mode, &cfg.toy_ratio, kk, &q_next)?;
    let next = Level {
        k: kk,
        p: alpha.numer().clone(),
        q: q_next.clone(),
        amplitude: Amplitude::Rational(a_next.clone()),
        n: BigInt::zero(),
        delta: None,
        gap: None,
        exponent: None,
    };

    let all: Vec<&Level> = levels.iter().chain(std::iter::once(&next)).collect();
    for w in all.windows(2) {
        lines.push(Line::new(
            format!("q_increasing[{}]", w[1].k),
            Expr::int(w[1].q.clone()),
            Relation::Gt,
            Expr::int(w[0].q.clone()),
            true,
        )?);
    }
    for l in &all {
        lines.push(Line::new(
            format!("q_odd[{}]", l.k),
            Expr::int(l.q.mod_floor(&BigInt::from(2))),
            Relation::Ge,
            Expr::int(1),
            true,
        )?);
    }
    for (idx, l) in all.iter().enumerate().skip(1) {
        for j in &levels[..idx] {
            lines.push(Line::new(
                format!("closeness[{},{}]", j.k, l.k),
                Expr::rational((l.alpha() - j.alpha()).abs()),
                Relation::Lt,
                Expr::rational(j.delta.clone().unwrap()),
                true,
            )?);
        }
    }
    // the amplitude after each level, against every earlier horizon
    for k in 1..=cfg.depth {
        let a_next = all[k].amplitude.expr();
        for i in 1..=k {
            let lhs = npow(&levels[i - 1].n, &one_minus_s).times(&a_next);
            lines.push(
                Line::new(
                    format!("tail_step[{k},{i}]"),
                    lhs,
                    Relation::Lt,
                    Expr::rational(tail_step_rhs(k, i)),
                    faithful,
                )?
                .with_note("factor 3/8 makes the geometric tail sum strictly below 1/2"),
            );
        }
    }
    let tail = match cfg.mode {
        Mode::Faithful => exact::pow2(1) * &a_next,
        Mode::Toy => &a_next / (Q::one() - &cfg.toy_ratio),
    };
    for k in 1..=cfg.depth {
        let mut sum = tail.clone();
        for l in &levels[k..] {
            sum += l.amplitude.as_rational().unwrap();
        }
        lines.push(Line::new(
            format!("tail_sum[{k}]"),
            npow(&levels[k - 1].n, &one_minus_s).scale(&sum),
            Relation::Lt,
            Expr::rational(qfrac(1, 2)),
            faithful,
        )?);
    }

    let mut evidence = Vec::new();
    for l in &levels {
        evidence.push(EvidenceSlot {
            name: format!("lemma1[{}]", l.k),
            level: l.k,
            terms: Terms::Level(l.k),
            steps: l.n.clone(),
            threshold: Expr::int(2),
            tail: Tail::Upper,
            relation: Relation::Ge,
            bound: qfrac(1, 6),
            status: EvidenceStatus::Pending,
        });
        for i in 1..l.k {
            let d = qpow(&qfrac(1, 4), i as i64);
            evidence.push(EvidenceSlot {
                name: format!("lemma2[{},{i}]", l.k),
                level: l.k,
                terms: Terms::Level(i),
                steps: l.n.clone(),
                threshold: Expr::rational(d.clone()),
                tail: Tail::TwoSided,
                relation: Relation::Lt,
                bound: d / qint(6),
                status: EvidenceStatus::Pending,
            });
        }
        evidence.push(EvidenceSlot {
            name: format!("final[{}]", l.k),
            level: l.k,
            terms: Terms::All,
            steps: l.n.clone(),
            threshold: Expr::int(1),
            tail: Tail::Upper,
            relation: Relation::Ge,
            bound: qfrac(1, 12),
            status: EvidenceStatus::Pending,
        });
    }

    let series = CosineSeries::new(
        levels
            .iter()
            .map(|l| Term::new(biguint(&l.q), l.amplitude.clone()))
            .collect(),
    )?
    .with_tail_bound(Expr::rational(tail));
    let mut notes = Vec::new();
    if !faithful {
        notes.push(
            "toy amplitudes: tail_step, tail_sum and lemma2 lines are diagnostic".to_string(),
        );
    }
    let ledger = ConstructionLedger {
        theorem: 1,
        mode: cfg.mode,
        s,
        gamma: None,
        c: None,
        toy_ratio: (!faithful).then(|| cfg.toy_ratio.clone()),
        levels,
        next: Some(next),
        lines,
        evidence,
        notes,
    };
    Ok(Construction {
        ledger,
        series,
        angle: Angle::rational(alpha),
    })
}

pub(crate) fn short_int(n: &BigInt) -> String {
    let d = n.to_string();
    if d.len() > 30 {
        format!("~1e{}", d.len() - 1)
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn faithful_single_level() {
        let c = theorem1_build(&Theorem1Config::faithful(1)).unwrap();
        let l = &c.ledger;
        assert_eq!(l.levels[0].n, BigInt::from(5793));
        assert_eq!(l.next.as_ref().unwrap().q, BigInt::from(69517));
        assert_eq!(c.angle.representative(), qfrac(23172, 69517));
        assert!(l.enforced_ok(), "{:?}", l.lines.iter().filter(|x| !x.holds).collect::<Vec<_>>());
        assert!(l.lines.iter().all(|x| x.enforced));
        assert!(l.line("tail_sum[1]").unwrap().holds);
    }

    #[test]
    fn faithful_two_levels_is_infeasible() {
        let e = theorem1_build(&Theorem1Config::faithful(2)).unwrap_err();
        assert!(matches!(e, Error::Infeasible(_)), "{e}");
    }

    #[test]
    fn toy_three_levels() {
        let c = theorem1_build(&Theorem1Config::toy(3)).unwrap();
        let l = &c.ledger;
        let ns: Vec<u64> = l.levels.iter().map(|x| x.n.to_u64().unwrap()).collect();
        assert_eq!(ns, vec![1025, 32769, 1048577]);
        assert_eq!(l.levels[1].q, BigInt::from(12301));
        assert!(l.enforced_ok());
        // a_{k+1} N_k^(2/5) = a_k N_k^(2/5) / 4 > 1: the step can never hold
        assert!(!l.line("tail_step[1,1]").unwrap().holds);
        assert!(!l.line("lemma2[2,1]").unwrap().holds);
        assert_eq!(c.series.len(), 3);
        assert!(c.angle.representative().denom() > &l.levels[2].q);
    }
}
