//! Independent re-check of a ledger. Lines are regenerated from the level
//! records alone and decided again; recorded statuses are never trusted.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ledger::{decide, ConstructionLedger, Level, Mode, Relation};
use crate::exact::{self, cos_pi_over_bounds, qfrac, qint, qpow, Expr, Mono, Q};
use crate::observable::Amplitude;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.ok)
    }
}

struct Expected {
    name: String,
    lhs: Expr,
    rel: Relation,
    rhs: Expr,
    enforced: bool,
}

#[derive(Default)]
struct Plan {
    lines: Vec<Expected>,
    facts: Vec<Check>,
}

impl Plan {
    fn line(&mut self, name: String, lhs: Expr, rel: Relation, rhs: Expr, enforced: bool) {
        self.lines.push(Expected {
            name,
            lhs,
            rel,
            rhs,
            enforced,
        });
    }

    fn fact(&mut self, name: String, ok: bool, detail: impl Into<String>) {
        self.facts.push(Check {
            name,
            ok,
            detail: detail.into(),
        });
    }
}

fn pw(n: &BigInt, e: Q) -> Expr {
    Expr::pow(qint(n.clone()), e)
}

fn amp_expr(a: &Amplitude) -> Expr {
    a.expr()
}

fn plan_theorem1(l: &ConstructionLedger, plan: &mut Plan) {
    let s = &l.s;
    let u = Q::one() - s;
    let faithful = l.mode == Mode::Faithful;
    let Some(next) = l.next.as_ref() else {
        plan.fact("next".into(), false, "missing next approximant");
        return;
    };
    let all: Vec<&Level> = l.levels.iter().chain(std::iter::once(next)).collect();
    let deltas: Vec<Q> = l
        .levels
        .iter()
        .map(|v| Q::new(BigInt::one(), BigInt::from(12) * &v.q * &v.n))
        .collect();

    for (idx, v) in all.iter().enumerate() {
        let want = match l.mode {
            Mode::Faithful => v.q.to_i64().map(|q| exact::pow2(-q)),
            Mode::Toy => l.toy_ratio.as_ref().map(|r| qpow(r, v.k as i64)),
        };
        let ok = want.as_ref().is_some_and(|w| v.amplitude.as_rational() == Some(w));
        plan.fact(format!("amplitude[{}]", v.k), ok, v.amplitude.to_string());
        if idx < l.levels.len() {
            plan.fact(
                format!("delta[{}]", v.k),
                v.delta.as_ref() == Some(&deltas[idx]),
                "1/(12 q N)",
            );
        }
    }
    for v in &l.levels {
        plan.line(
            format!("threshold[{}]", v.k),
            pw(&v.n, u.clone()).times(&amp_expr(&v.amplitude)).scale(&qfrac(1, 2)),
            Relation::Gt,
            Expr::int(2),
            true,
        );
    }
    for w in l.levels.windows(2) {
        plan.line(
            format!("n_increasing[{}]", w[1].k),
            Expr::int(w[1].n.clone()),
            Relation::Gt,
            Expr::int(w[0].n.clone()),
            true,
        );
    }
    for v in &l.levels {
        for i in &l.levels[..v.k - 1] {
            let Some(a) = i.amplitude.as_rational() else {
                plan.fact(format!("lemma2[{},{}]", v.k, i.k), false, "irrational amplitude");
                continue;
            };
            let Some(qq) = v.q.to_u64() else {
                plan.fact(format!("lemma2[{},{}]", v.k, i.k), false, "chain order too large");
                continue;
            };
            let rho_hi = cos_pi_over_bounds(qq).1;
            let kc = a * a * qfrac(1, 2) + qint(2) * qint(v.q.clone()) * a * a / (Q::one() - rho_hi);
            let d = qpow(&qfrac(1, 4), i.k as i64);
            plan.line(
                format!("lemma2[{},{}]", v.k, i.k),
                pw(&v.n, Q::one() - qint(2) * s).scale(&(kc / (&d * &d))),
                Relation::Lt,
                Expr::rational(d / qint(6)),
                faithful,
            );
        }
    }
    for w in all.windows(2) {
        plan.line(
            format!("q_increasing[{}]", w[1].k),
            Expr::int(w[1].q.clone()),
            Relation::Gt,
            Expr::int(w[0].q.clone()),
            true,
        );
    }
    for v in &all {
        plan.line(
            format!("q_odd[{}]", v.k),
            Expr::int(if v.q.is_odd() { 1 } else { 0 }),
            Relation::Ge,
            Expr::int(1),
            true,
        );
    }
    for (idx, v) in all.iter().enumerate().skip(1) {
        for (j, d) in l.levels[..idx].iter().zip(&deltas) {
            plan.line(
                format!("closeness[{},{}]", j.k, v.k),
                Expr::rational((v.alpha() - j.alpha()).abs()),
                Relation::Lt,
                Expr::rational(d.clone()),
                true,
            );
        }
    }
    let kk = l.levels.len();
    for k in 1..=kk {
        for i in 1..=k {
            plan.line(
                format!("tail_step[{k},{i}]"),
                pw(&l.levels[i - 1].n, u.clone()).times(&amp_expr(&all[k].amplitude)),
                Relation::Lt,
                Expr::rational(qfrac(3, 8) / qpow(&qint(4), (k - i) as i64)),
                faithful,
            );
        }
    }
    let a_next = next.amplitude.as_rational().cloned().unwrap_or_default();
    let rest = match (l.mode, &l.toy_ratio) {
        (Mode::Toy, Some(r)) => &a_next / (Q::one() - r),
        _ => qint(2) * &a_next,
    };
    for k in 1..=kk {
        let mut lhs = pw(&l.levels[k - 1].n, u.clone()).scale(&rest);
        for v in &l.levels[k..] {
            lhs = lhs.plus(pw(&l.levels[k - 1].n, u.clone()).times(&amp_expr(&v.amplitude)));
        }
        plan.line(format!("tail_sum[{k}]"), lhs, Relation::Lt, Expr::rational(qfrac(1, 2)), faithful);
    }
}

fn plan_witnesses(l: &ConstructionLedger, plan: &mut Plan) {
    let s = &l.s;
    let u = Q::one() - s;
    let c = l.c.clone().unwrap_or_else(Q::one);
    let t = Expr::mono(
        Mono::rational(qfrac(1, 4))
            .times_pow(qint(2), qfrac(1, 2))
            .times_pow(qint(16) * &c, -u.clone()),
    );
    let gammas: Vec<Option<Q>> = l
        .levels
        .iter()
        .map(|v| match l.theorem {
            3 => v.exponent.map(qint),
            _ => l.gamma.clone(),
        })
        .collect();
    for (v, g) in l.levels.iter().zip(&gammas) {
        let Some(g) = g else {
            plan.fact(format!("witness[{}]", v.k), false, "missing exponent");
            continue;
        };
        let Some(gap) = v.gap.as_ref() else {
            plan.fact(format!("witness[{}]", v.k), false, "missing gap");
            continue;
        };
        plan.line(
            format!("witness[{}]", v.k),
            Expr::rational(gap.clone()),
            Relation::Le,
            pw(&v.q, -g.clone()).scale(&c),
            true,
        );
        plan.line(
            format!("containment[{}]", v.k),
            Expr::rational(qint(v.n.clone()) * gap),
            Relation::Lt,
            Expr::rational(Q::new(BigInt::one(), BigInt::from(16) * &v.q)),
            true,
        );
        let horizon = pw(&v.q, g - Q::one()).scale(&(Q::one() / (qint(16) * &c))).floor();
        plan.fact(
            format!("horizon[{}]", v.k),
            horizon.as_ref() == Some(&v.n),
            format!("floor(q^(gamma-1)/16c) = {}", horizon.map(|h| h.to_string()).unwrap_or_default()),
        );
        let want = Amplitude::power(qint(v.q.clone()), -(g - Q::one()) * &u);
        plan.fact(format!("amplitude[{}]", v.k), want == v.amplitude, v.amplitude.to_string());
    }
    for (idx, w) in l.levels.windows(2).enumerate() {
        plan.line(
            format!("q_increasing[{}]", w[1].k),
            Expr::int(w[1].q.clone()),
            Relation::Gt,
            Expr::int(w[0].q.clone()),
            true,
        );
        plan.line(
            format!("n_increasing[{}]", w[1].k),
            Expr::int(w[1].n.clone()),
            Relation::Gt,
            Expr::int(w[0].n.clone()),
            true,
        );
        if l.theorem == 3 {
            if let (Some(a), Some(b)) = (&gammas[idx], &gammas[idx + 1]) {
                plan.line(
                    format!("nu_increasing[{}]", w[1].k),
                    Expr::rational((b - Q::one()) * &u),
                    Relation::Gt,
                    Expr::rational((a - Q::one()) * &u),
                    true,
                );
            }
        }
    }
    let kk = l.levels.len();
    for k in 1..kk {
        for i in 1..=k {
            plan.line(
                format!("tail_step[{k},{i}]"),
                pw(&l.levels[i - 1].n, u.clone()).times(&amp_expr(&l.levels[k].amplitude)),
                Relation::Lt,
                t.clone().scale(&(qfrac(3, 8) / qpow(&qint(4), (k - i) as i64))),
                true,
            );
        }
        let mut lhs = Expr::zero();
        for v in &l.levels[k..] {
            lhs = lhs.plus(pw(&l.levels[k - 1].n, u.clone()).times(&amp_expr(&v.amplitude)));
        }
        plan.line(format!("tail_sum[{k}]"), lhs, Relation::Lt, t.clone().scale(&qfrac(1, 2)), true);
    }
    if l.theorem == 2 {
        if let Some(g) = &l.gamma {
            let r = (g / qint(2) - qfrac(3, 2)).ceil().to_integer() - 1;
            let margin = (g - Q::one()) * &u - Q::one() - qint(r);
            plan.line("smoothness_margin".into(), Expr::rational(margin), Relation::Gt, Expr::zero(), true);
        }
    }
}

/// Regenerates and decides every line of `l`. Fails on any enforced line
/// that does not hold, any recorded status that disagrees with the
/// recomputation, and any missing or unexpected line.
pub fn verify_ledger(l: &ConstructionLedger) -> VerifyReport {
    let mut plan = Plan::default();
    let half = qfrac(1, 2);
    plan.fact(
        "s".into(),
        l.s > half && l.s <= Q::one(),
        exact::fmt_ratio(&l.s),
    );
    let seq = l.levels.iter().enumerate().all(|(i, v)| v.k == i + 1 && v.q.is_positive() && v.n.is_positive());
    plan.fact("levels".into(), seq && !l.levels.is_empty(), format!("{} levels", l.levels.len()));
    match l.theorem {
        1 => plan_theorem1(l, &mut plan),
        2 | 3 => plan_witnesses(l, &mut plan),
        t => plan.fact("theorem".into(), false, format!("unknown construction {t}")),
    }

    let mut checks: Vec<Check> = plan
        .lines
        .par_iter()
        .map(|e| {
            let Some(holds) = decide(&e.lhs, e.rel, &e.rhs) else {
                return Check {
                    name: e.name.clone(),
                    ok: false,
                    detail: "undecidable at working precision".into(),
                };
            };
            let recorded = l.line(&e.name);
            let (ok, detail) = match recorded {
                None => (false, "missing from ledger".to_string()),
                Some(r) if r.holds != holds => (false, format!("recorded {}, recomputed {}", r.holds, holds)),
                Some(r) if r.enforced != e.enforced => (false, "enforcement flag differs".to_string()),
                Some(_) if e.enforced && !holds => (false, "fails".to_string()),
                Some(_) => (
                    true,
                    format!(
                        "{}{}",
                        if holds { "holds" } else { "fails" },
                        if e.enforced { "" } else { " (diagnostic)" }
                    ),
                ),
            };
            Check {
                name: e.name.clone(),
                ok,
                detail,
            }
        })
        .collect();
    for r in &l.lines {
        if !plan.lines.iter().any(|e| e.name == r.name) {
            checks.push(Check {
                name: r.name.clone(),
                ok: false,
                detail: "unexpected line".into(),
            });
        }
    }
    checks.extend(plan.facts);
    let pass = checks.iter().all(|c| c.ok);
    VerifyReport { checks, pass }
}
