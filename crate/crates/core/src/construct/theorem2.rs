//! Constructions driven by good rational approximations of an irrational
//! angle: one cosine term per accepted witness `p_k/q_k`.

use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::ledger::{ConstructionLedger, EvidenceSlot, EvidenceStatus, Level, Line, Mode, Relation, Terms};
use super::lemma::{lemma3_containment, lemma3_horizon, lemma3_threshold};
use super::{npow, Construction};
use crate::diophantine::{biguint, Angle};
use crate::error::{Error, Result};
use crate::exact::{self, qfrac, qint, qpow, Expr, Q};
use crate::observable::{cr_norm_bound, Amplitude, CosineSeries, Term};
use crate::walk::Tail;

#[derive(Clone, Debug)]
pub struct Theorem2Config {
    pub angle: Angle,
    pub gamma: Q,
    pub c: Q,
    /// Requested exponent; replaced by the midpoint of the admissible range
    /// when missing or outside it.
    pub s: Option<Q>,
    pub depth: usize,
}

#[derive(Clone, Debug)]
pub struct Theorem3Config {
    pub angle: Angle,
    pub s: Q,
    /// Stop after this many accepted witnesses.
    pub max_levels: Option<usize>,
}

/// Largest integer `r < gamma/2 - 3/2`.
pub fn smoothness(gamma: &Q) -> BigInt {
    let x = gamma / qint(2) - qfrac(3, 2);
    x.ceil().to_integer() - 1
}

/// Supremum of the admissible `s` for smoothness `r`:
/// `(gamma - 1)(1 - s) - 1 > r`.
pub fn s_max(gamma: &Q, r: &BigInt) -> Q {
    Q::one() - (qint(r.clone()) + Q::one()) / (gamma - Q::one())
}

/// Threshold of the final claim, `sqrt(2) / (4 (16c)^(1-s))`.
pub fn final_threshold(c: &Q, s: &Q) -> Expr {
    lemma3_threshold(c, s).scale(&qfrac(1, 2))
}

struct Candidate {
    k: usize,
    gamma: Q,
    exponent: Option<u32>,
}

struct Built {
    levels: Vec<Level>,
    lines: Vec<Line>,
    notes: Vec<String>,
}

fn tail_step_rhs(t: &Expr, k: usize, i: usize) -> Expr {
    t.clone().scale(&(qfrac(3, 8) * qpow(&qfrac(1, 4), (k - i) as i64)))
}

fn build_levels(
    angle: &Angle,
    candidates: Vec<Candidate>,
    c: &Q,
    s: &Q,
    max_levels: Option<usize>,
    strict_nu: bool,
) -> Result<Built> {
    let one_minus_s = Q::one() - s;
    let t = final_threshold(c, s);
    let mut levels: Vec<Level> = Vec::new();
    let mut nus: Vec<Q> = Vec::new();
    let mut notes = Vec::new();
    for cand in candidates {
        if max_levels.is_some_and(|m| levels.len() >= m) {
            break;
        }
        let (p, q) = angle.convergent_list()[cand.k].clone();
        let Some(gap) = angle.convergent_gap_bound(cand.k) else {
            continue;
        };
        let bound = npow(&q, &-cand.gamma.clone()).scale(c);
        if exact::compare(&Expr::rational(gap.clone()), &bound) == Some(std::cmp::Ordering::Greater) {
            continue;
        }
        let n = lemma3_horizon(&q, &cand.gamma, c)?;
        if n < BigInt::one() {
            notes.push(format!("convergent {} (q = {q}) skipped: horizon below 1", cand.k));
            continue;
        }
        let nu = (&cand.gamma - Q::one()) * &one_minus_s;
        if let Some(prev) = levels.last() {
            if q <= prev.q || n <= prev.n || (strict_nu && &nu <= nus.last().unwrap()) {
                continue;
            }
        }
        let amp = Amplitude::power(qint(q.clone()), -nu.clone());
        let m = levels.len();
        let fits = levels.iter().all(|l| {
            let lhs = npow(&l.n, &one_minus_s).times(&amp.expr());
            exact::compare(&lhs, &tail_step_rhs(&t, m, l.k)) == Some(std::cmp::Ordering::Less)
        });
        if !fits {
            notes.push(format!("convergent {} (q = {q}) skipped: amplitude too large for the tail", cand.k));
            continue;
        }
        levels.push(Level {
            k: m + 1,
            p,
            q,
            amplitude: amp,
            n,
            delta: None,
            gap: Some(gap),
            exponent: cand.exponent,
        });
        nus.push(nu);
    }
    if levels.is_empty() {
        return Err(Error::InsufficientDigits("no convergent qualifies as a witness".into()));
    }

    let mut lines = Vec::new();
    for (idx, l) in levels.iter().enumerate() {
        let gamma = match l.exponent {
            Some(e) => qint(e),
            None => nus[idx].clone() / &one_minus_s + Q::one(),
        };
        let gap = l.gap.clone().unwrap();
        lines.push(Line::new(
            format!("witness[{}]", l.k),
            Expr::rational(gap.clone()),
            Relation::Le,
            npow(&l.q, &-gamma).scale(c),
            true,
        )?);
        let mut cont = lemma3_containment(&l.n, &gap, &l.q)?;
        cont.name = format!("containment[{}]", l.k);
        lines.push(cont);
        if idx > 0 {
            let prev = &levels[idx - 1];
            lines.push(Line::new(
                format!("q_increasing[{}]", l.k),
                Expr::int(l.q.clone()),
                Relation::Gt,
                Expr::int(prev.q.clone()),
                true,
            )?);
            lines.push(Line::new(
                format!("n_increasing[{}]", l.k),
                Expr::int(l.n.clone()),
                Relation::Gt,
                Expr::int(prev.n.clone()),
                true,
            )?);
            if strict_nu {
                lines.push(Line::new(
                    format!("nu_increasing[{}]", l.k),
                    Expr::rational(nus[idx].clone()),
                    Relation::Gt,
                    Expr::rational(nus[idx - 1].clone()),
                    true,
                )?);
            }
        }
    }
    let kk = levels.len();
    for k in 1..kk {
        let a_next = levels[k].amplitude.expr();
        for i in 1..=k {
            lines.push(Line::new(
                format!("tail_step[{k},{i}]"),
                npow(&levels[i - 1].n, &one_minus_s).times(&a_next),
                Relation::Lt,
                tail_step_rhs(&t, k, i),
                true,
            )?);
        }
        let mut sum = Expr::zero();
        for l in &levels[k..] {
            sum = sum.plus(l.amplitude.expr());
        }
        lines.push(Line::new(
            format!("tail_sum[{k}]"),
            npow(&levels[k - 1].n, &one_minus_s).times(&sum),
            Relation::Lt,
            t.clone().scale(&qfrac(1, 2)),
            true,
        )?);
    }
    Ok(Built { levels, lines, notes })
}

fn evidence_slots(levels: &[Level], c: &Q, s: &Q) -> Vec<EvidenceSlot> {
    let t = final_threshold(c, s);
    let mut out = Vec::new();
    for l in levels {
        out.push(EvidenceSlot {
            name: format!("lemma3[{}]", l.k),
            level: l.k,
            terms: Terms::Level(l.k),
            steps: l.n.clone(),
            threshold: lemma3_threshold(c, s),
            tail: Tail::Upper,
            relation: Relation::Gt,
            bound: qfrac(1, 8),
            status: EvidenceStatus::Pending,
        });
        for j in 1..l.k {
            let d = qpow(&qfrac(1, 4), j as i64);
            out.push(EvidenceSlot {
                name: format!("small[{},{j}]", l.k),
                level: l.k,
                terms: Terms::Level(j),
                steps: l.n.clone(),
                threshold: t.clone().scale(&d),
                tail: Tail::TwoSided,
                relation: Relation::Lt,
                bound: d / qint(8),
                status: EvidenceStatus::Pending,
            });
        }
        out.push(EvidenceSlot {
            name: format!("final[{}]", l.k),
            level: l.k,
            terms: Terms::All,
            steps: l.n.clone(),
            threshold: t.clone(),
            tail: Tail::Upper,
            relation: Relation::Gt,
            bound: qfrac(1, 16),
            status: EvidenceStatus::Pending,
        });
    }
    out
}

/// Sup of the omitted levels, valid as long as the construction continues
/// under the same tail-step rule: `(T/2) N_K^-(1-s)`.
fn contingent_tail(levels: &[Level], c: &Q, s: &Q) -> Expr {
    let last = levels.last().unwrap();
    let t = final_threshold(c, s).scale(&qfrac(1, 2));
    t.times(&npow(&last.n, &(s - Q::one())))
}

fn series_of(levels: &[Level], tail: Expr) -> Result<CosineSeries> {
    Ok(CosineSeries::new(
        levels
            .iter()
            .map(|l| Term::new(biguint(&l.q), l.amplitude.clone()))
            .collect(),
    )?
    .with_tail_bound(tail))
}

pub fn theorem2_build(cfg: &Theorem2Config) -> Result<Construction> {
    if cfg.gamma <= qint(5) {
        return Err(Error::InvalidInput("gamma must exceed 5".into()));
    }
    if !cfg.c.is_positive() {
        return Err(Error::InvalidInput("c must be positive".into()));
    }
    if cfg.depth == 0 {
        return Err(Error::InvalidInput("depth must be >= 1".into()));
    }
    let r = smoothness(&cfg.gamma);
    let smax = s_max(&cfg.gamma, &r);
    let half = qfrac(1, 2);
    let mut notes = Vec::new();
    let s = match &cfg.s {
        Some(s) if *s > half && *s < smax => s.clone(),
        other => {
            let mid = (&half + &smax) / qint(2);
            if let Some(s) = other {
                notes.push(format!(
                    "s = {} is outside ({}, {}); using {}",
                    exact::fmt_ratio(s),
                    exact::fmt_ratio(&half),
                    exact::fmt_ratio(&smax),
                    exact::fmt_ratio(&mid)
                ));
            }
            mid
        }
    };
    let candidates = (1..cfg.angle.convergent_list().len())
        .map(|k| Candidate {
            k,
            gamma: cfg.gamma.clone(),
            exponent: None,
        })
        .collect();
    let mut built = build_levels(&cfg.angle, candidates, &cfg.c, &s, Some(cfg.depth), false)?;
    if built.levels.len() < cfg.depth {
        return Err(Error::InsufficientDigits(format!(
            "the angle certifies {} of {} witnesses",
            built.levels.len(),
            cfg.depth
        )));
    }
    let nu = (&cfg.gamma - Q::one()) * (Q::one() - &s);
    let margin = &nu - Q::one() - qint(r.clone());
    built.lines.push(Line::new(
        "smoothness_margin",
        Expr::rational(margin),
        Relation::Gt,
        Expr::zero(),
        true,
    )?);
    notes.extend(built.notes);
    notes.push(format!("smoothness r = {r}, amplitude exponent {}", exact::fmt_ratio(&nu)));
    notes.push("series tail bound assumes the construction continues".into());
    let series = series_of(&built.levels, contingent_tail(&built.levels, &cfg.c, &s))?;
    let evidence = evidence_slots(&built.levels, &cfg.c, &s);
    let ledger = ConstructionLedger {
        theorem: 2,
        mode: Mode::Faithful,
        s,
        gamma: Some(cfg.gamma.clone()),
        c: Some(cfg.c.clone()),
        toy_ratio: None,
        levels: built.levels,
        next: None,
        lines: built.lines,
        evidence,
        notes,
    };
    Ok(Construction {
        ledger,
        series,
        angle: cfg.angle.clone(),
    })
}

/// Largest `e` with `q_next >= q^(e-1)`, so `|alpha - p/q| < q^-e`.
pub fn derived_exponent(q: &BigInt, q_next: &BigInt) -> Option<u32> {
    if q <= &BigInt::one() {
        return None;
    }
    let mut m = 0u32;
    let mut pow = BigInt::one();
    while &(&pow * q) <= q_next {
        pow *= q;
        m += 1;
    }
    Some(m + 1)
}

pub fn theorem3_build(cfg: &Theorem3Config) -> Result<Construction> {
    let s = cfg.s.clone();
    if s <= qfrac(1, 2) || s >= Q::one() {
        return Err(Error::InvalidInput("s must lie in (1/2, 1)".into()));
    }
    if cfg.angle.is_rational() {
        return Err(Error::InvalidInput("a constructed irrational angle is required".into()));
    }
    let conv = cfg.angle.convergent_list();
    let candidates = (1..conv.len().saturating_sub(1))
        .filter_map(|k| {
            let e = derived_exponent(&conv[k].1, &conv[k + 1].1)?;
            Some(Candidate {
                k,
                gamma: qint(e),
                exponent: Some(e),
            })
        })
        .collect();
    let c = Q::one();
    let built = build_levels(&cfg.angle, candidates, &c, &s, cfg.max_levels, true)?;
    let series = series_of(&built.levels, contingent_tail(&built.levels, &c, &s))?;
    let mut notes = built.notes;
    for r in 0..=8 {
        notes.push(format!("cr_norm[{r}] <= {:.6e}", cr_norm_bound(&series, r)));
    }
    notes.push("series tail bound assumes the construction continues".into());
    let evidence = evidence_slots(&built.levels, &c, &s);
    let ledger = ConstructionLedger {
        theorem: 3,
        mode: Mode::Faithful,
        s,
        gamma: None,
        c: Some(c),
        toy_ratio: None,
        levels: built.levels,
        next: None,
        lines: built.lines,
        evidence,
        notes,
    };
    Ok(Construction {
        ledger,
        series,
        angle: cfg.angle.clone(),
    })
}
