use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::ledger::{Line, Relation};
use crate::diophantine::{biguint, ApproxWitness};
use crate::error::{Error, Result};
use crate::exact::{self, qfrac, qint, Expr, Mono, Q};
use crate::observable::{t2_term, Amplitude, CosineSeries};

/// Closeness radius `1 / (12 q N)`.
pub fn lemma1_delta(q: &BigInt, n: &BigInt) -> Q {
    Q::new(BigInt::one(), BigInt::from(12) * q * n)
}

/// `(a/2) N^(1-s) > 2`: on the good set every step contributes at least
/// `a/2`.
pub fn lemma1_threshold_line(name: String, amp: &Amplitude, n: &BigInt, s: &Q) -> Result<Line> {
    let lhs = Expr::pow(qint(n.clone()), Q::one() - s).times(&amp.expr()).scale(&qfrac(1, 2));
    Line::new(name, lhs, Relation::Gt, Expr::int(2), true)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Certificate {
    #[serde(with = "exact::serde_q")]
    pub base: Q,
    #[serde(with = "exact::serde_q")]
    pub alpha: Q,
    #[serde(with = "exact::serde_bigint")]
    pub n: BigInt,
    #[serde(with = "exact::serde_q")]
    pub delta: Q,
    pub threshold: Line,
    pub closeness: Line,
    /// Sampled starting offsets in the inner set whose whole orbit
    /// `|n| <= N` stayed in the outer set.
    pub samples: usize,
    pub containment_holds: bool,
    /// Lower bound on `P(S_N / N^s > 2)` implied when everything holds.
    #[serde(with = "exact::serde_q")]
    pub probability_bound: Q,
}

impl Lemma1Certificate {
    pub fn holds(&self) -> bool {
        self.threshold.holds && self.closeness.holds && self.containment_holds
    }
}

/// Checks the single-level certificate for the observable `a cos(2 pi q x)`
/// near the rational `base = p/q` and a perturbed angle `alpha`.
///
/// Containment is checked with exact integer arithmetic: for offsets `u` in
/// `(-1/12, 1/12)` (that is, `q x` near an integer) and every `|n| <= N`,
/// `q (x + n alpha)` stays within `1/6` of an integer.
pub fn lemma1_check(base: &Q, alpha: &Q, n: &BigInt, s: &Q, amp: &Amplitude, samples: usize) -> Result<Lemma1Certificate> {
    let q = base.denom().clone();
    if !n.is_positive() {
        return Err(Error::InvalidInput("N must be >= 1".into()));
    }
    if samples == 0 {
        return Err(Error::InvalidInput("at least one sample is required".into()));
    }
    let delta = lemma1_delta(&q, n);
    let threshold = lemma1_threshold_line("threshold".into(), amp, n, s)?;
    let closeness = Line::new(
        "closeness",
        Expr::rational((alpha - base).abs()),
        Relation::Lt,
        Expr::rational(delta.clone()),
        true,
    )?;

    // q * alpha = integer + eps
    let qa = qint(q.clone()) * alpha;
    let eps = &qa - qa.round();
    let l = BigInt::from(samples);
    // u_i = (2i + 1 - L) / (12 L), common denominator D
    let d = (BigInt::from(12) * &l).lcm(eps.denom());
    let e_num = eps.numer() * (&d / eps.denom());
    let scale_u = &d / (BigInt::from(12) * &l);
    let n_max = n.to_i64().ok_or_else(|| Error::InvalidInput("N too large for an orbit check".into()))?;
    let mut ok = true;
    'outer: for i in 0..samples {
        let u = (BigInt::from(2 * i as u64 + 1) - &l) * &scale_u;
        // |u + n eps| is convex in n; check every n anyway
        let mut pos = &u - &e_num * n_max;
        for _ in -n_max..=n_max {
            let md = pos.mod_floor(&d);
            let dist = md.clone().min(&d - &md);
            if BigInt::from(6) * dist >= d {
                ok = false;
                break 'outer;
            }
            pos += &e_num;
        }
    }
    Ok(Lemma1Certificate {
        base: base.clone(),
        alpha: alpha.clone(),
        n: n.clone(),
        delta,
        threshold,
        closeness,
        samples,
        containment_holds: ok,
        probability_bound: qfrac(1, 6),
    })
}

/// The rational with the least odd denominator `b > above` inside the open
/// ball of `radius` around `center`.
pub fn odd_in_ball(center: &Q, radius: &Q, above: &BigInt) -> Result<Q> {
    if !radius.is_positive() {
        return Err(Error::InvalidInput("radius must be positive".into()));
    }
    let p = center.numer().clone();
    let q = center.denom().clone();
    let qr = qint(q.clone()) * radius;
    let inv = if q.is_one() {
        BigInt::zero()
    } else {
        let g = p.extended_gcd(&q);
        g.x.mod_floor(&q)
    };
    let step = if q.is_odd() { BigInt::from(2) * &q } else { q.clone() };
    let mut best: Option<(BigInt, BigInt)> = (q.is_odd() && &q > above).then(|| (p.clone(), q.clone()));
    let mut j = BigInt::one();
    let mut iters = 0u64;
    loop {
        // need b > j / (q r)
        let lower: BigInt = (qint(j.clone()) / &qr).floor().to_integer() + 1;
        let lower = lower.max(above + 1);
        if let Some((_, b)) = &best {
            if &lower > b {
                break;
            }
        }
        for sign in [1i32, -1] {
            // a q - b p = sign * j  =>  b = -sign * j * p^-1 (mod q)
            let r0 = if q.is_one() {
                BigInt::zero()
            } else {
                (-BigInt::from(sign) * &j * &inv).mod_floor(&q)
            };
            let mut b = &lower + (&r0 - &lower).mod_floor(&q);
            if b.is_even() {
                if q.is_even() {
                    continue;
                }
                b += &q;
            }
            for _ in 0..64 {
                if let Some((_, bb)) = &best {
                    if &b >= bb {
                        break;
                    }
                }
                let num = &b * &p + BigInt::from(sign) * &j;
                let a = num.div_floor(&q);
                if a.gcd(&b).is_one() {
                    best = Some((a, b));
                    break;
                }
                b += &step;
            }
        }
        j += 1;
        iters += 1;
        if iters > 10_000_000 {
            return Err(Error::Infeasible("odd-denominator search exceeded its budget".into()));
        }
    }
    let (a, b) = best.expect("the loop only exits with a candidate");
    let x = Q::new(a, b);
    debug_assert!((&x - center).abs() < *radius);
    Ok(x)
}

/// Parameters of the single-witness step: frequency `q`, horizon
/// `N = floor(q^(gamma-1) / (16 c))`, threshold `sqrt(2) / (2 (16c)^(1-s))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma3Params {
    pub witness: ApproxWitness,
    #[serde(with = "exact::serde_q")]
    pub s: Q,
    #[serde(with = "exact::serde_bigint")]
    pub n: BigInt,
    pub series: CosineSeries,
    pub threshold: Expr,
    pub threshold_f64: f64,
    /// `N |alpha - p/q| < 1/(16 q)`.
    pub containment: Line,
    #[serde(with = "exact::serde_q")]
    pub probability_bound: Q,
}

pub fn lemma3_horizon(q: &BigInt, gamma: &Q, c: &Q) -> Result<BigInt> {
    Expr::pow(qint(q.clone()), gamma - Q::one())
        .scale(&(Q::one() / (qint(16) * c)))
        .floor()
        .ok_or_else(|| Error::PrecisionBudget("cannot resolve floor(q^(gamma-1) / 16c)".into()))
}

/// `sqrt(2) / (2 (16c)^(1-s))`.
pub fn lemma3_threshold(c: &Q, s: &Q) -> Expr {
    Expr::mono(
        Mono::rational(qfrac(1, 2))
            .times_pow(qint(2), qfrac(1, 2))
            .times_pow(qint(16) * c, s - Q::one()),
    )
}

pub fn lemma3_containment(n: &BigInt, gap: &Q, q: &BigInt) -> Result<Line> {
    Line::new(
        "containment",
        Expr::rational(qint(n.clone()) * gap),
        Relation::Lt,
        Expr::rational(Q::new(BigInt::one(), BigInt::from(16) * q)),
        true,
    )
}

pub fn lemma3_params(w: &ApproxWitness, s: &Q) -> Result<Lemma3Params> {
    if !w.holds() {
        return Err(Error::Certificate(format!("witness {}/{} does not hold", w.p, w.q)));
    }
    let n = lemma3_horizon(&w.q, &w.gamma, &w.c)?;
    if n < BigInt::one() {
        return Err(Error::Infeasible(format!(
            "q = {} is too small: floor(q^(gamma-1) / 16c) = {n}",
            w.q
        )));
    }
    let series = t2_term(&biguint(&w.q), &w.gamma, s)?;
    let threshold = lemma3_threshold(&w.c, s);
    let containment = lemma3_containment(&n, &w.gap, &w.q)?;
    Ok(Lemma3Params {
        witness: w.clone(),
        s: s.clone(),
        n,
        series,
        threshold_f64: threshold.to_f64(),
        threshold,
        containment,
        probability_bound: qfrac(1, 8),
    })
}
