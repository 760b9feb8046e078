//! Continued fractions, convergents and Diophantine witnesses.
//!
//! An [`Angle`] is never a single float. Rational angles are stored exactly;
//! constructed angles (golden conjugate, Liouville-type limits) are stored as
//! a finite prefix of partial quotients together with their convergents. The
//! true value of a constructed angle lies strictly between its last two
//! convergents, which is enough to certify every gap inequality exactly.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::circle::CirclePoint;
use crate::error::{Error, Result};
use crate::exact::{self, centered_frac, compare, qint, Expr, Q};

pub const DEFAULT_PRECISION_BITS: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleKind {
    Rational,
    Constructed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Angle {
    kind: AngleKind,
    quotients: Vec<BigInt>,
    convergents: Vec<(BigInt, BigInt)>,
    precision_bits: u64,
}

/// Regular continued fraction of a rational, by the Euclidean algorithm.
pub fn rational_quotients(x: &Q) -> Vec<BigInt> {
    let mut out = Vec::new();
    let mut n = x.numer().clone();
    let mut d = x.denom().clone();
    loop {
        let (a, r) = n.div_mod_floor(&d);
        out.push(a);
        if r.is_zero() {
            break;
        }
        n = d;
        d = r;
    }
    out
}

/// Convergents `p_k / q_k` by the standard three-term recurrence.
pub fn convergents(quotients: &[BigInt]) -> Vec<(BigInt, BigInt)> {
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (BigInt::zero(), BigInt::one());
    let mut out = Vec::with_capacity(quotients.len());
    for a in quotients {
        let p = a * &p0 + &p1;
        let q = a * &q0 + &q1;
        p1 = std::mem::replace(&mut p0, p.clone());
        q1 = std::mem::replace(&mut q0, q.clone());
        out.push((p, q));
    }
    out
}

fn check_quotients(quotients: &[BigInt]) -> Result<()> {
    if quotients.is_empty() {
        return Err(Error::InvalidInput("empty continued fraction".into()));
    }
    if let Some(bad) = quotients[1..].iter().find(|a| !a.is_positive()) {
        return Err(Error::InvalidInput(format!(
            "partial quotients after the first must be positive, got {bad}"
        )));
    }
    Ok(())
}

impl Angle {
    pub fn rational(x: Q) -> Angle {
        let quotients = rational_quotients(&x);
        let convergents = convergents(&quotients);
        Angle {
            kind: AngleKind::Rational,
            quotients,
            convergents,
            precision_bits: DEFAULT_PRECISION_BITS,
        }
    }

    pub fn from_ratio(p: i64, q: i64) -> Result<Angle> {
        if q == 0 {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        Ok(Angle::rational(exact::qfrac(p, q)))
    }

    /// A constructed angle given by a prefix of its continued fraction.
    pub fn from_quotients(quotients: Vec<BigInt>) -> Result<Angle> {
        check_quotients(&quotients)?;
        let convergents = convergents(&quotients);
        Ok(Angle {
            kind: AngleKind::Constructed,
            quotients,
            convergents,
            precision_bits: DEFAULT_PRECISION_BITS,
        })
    }

    /// `(sqrt(5) - 1) / 2 = [0; 1, 1, 1, ...]`, stored with `terms` quotients
    /// after the leading zero.
    pub fn golden_conjugate(terms: usize) -> Angle {
        let mut q = vec![BigInt::zero()];
        q.extend(std::iter::repeat_n(BigInt::one(), terms.max(2)));
        Angle::from_quotients(q).expect("valid quotients")
    }

    pub fn with_precision(mut self, bits: u64) -> Angle {
        self.precision_bits = bits;
        self
    }

    pub fn kind(&self) -> AngleKind {
        self.kind
    }

    pub fn is_rational(&self) -> bool {
        self.kind == AngleKind::Rational
    }

    pub fn precision_bits(&self) -> u64 {
        self.precision_bits
    }

    pub fn quotients(&self) -> &[BigInt] {
        &self.quotients
    }

    pub fn convergent_list(&self) -> &[(BigInt, BigInt)] {
        &self.convergents
    }

    /// The exact value for rational angles, the last stored convergent
    /// otherwise.
    pub fn representative(&self) -> Q {
        let (p, q) = self.convergents.last().expect("non-empty");
        Q::new(p.clone(), q.clone())
    }

    pub fn point(&self) -> CirclePoint {
        CirclePoint::Exact(exact::frac(&self.representative()))
    }

    pub fn to_f64(&self) -> f64 {
        exact::to_f64(&self.representative())
    }

    /// Closed interval known to contain the angle: a point for rationals,
    /// otherwise the segment between `p_K/q_K` and the mediant
    /// `(p_K + p_{K-1}) / (q_K + q_{K-1})`, since `a_{K+1} >= 1`.
    pub fn bracket(&self) -> (Q, Q) {
        let last = self.representative();
        if self.is_rational() {
            return (last.clone(), last);
        }
        let n = self.convergents.len();
        let (p, q) = &self.convergents[n - 1];
        let (pp, qp) = if n >= 2 {
            self.convergents[n - 2].clone()
        } else {
            (BigInt::one(), BigInt::zero())
        };
        let med = Q::new(p + pp, q + qp);
        if last <= med {
            (last, med)
        } else {
            (med, last)
        }
    }

    /// Dyadic export of the representative, rounded to `precision_bits`.
    /// Fails when the certified accuracy of a constructed angle is below the
    /// requested precision.
    pub fn export_dyadic(&self) -> Result<Q> {
        let (lo, hi) = self.bracket();
        let bits = self.precision_bits;
        if !self.is_rational() {
            let width = &hi - &lo;
            let certified = -exact::ln_q(&width) / std::f64::consts::LN_2;
            if certified < bits as f64 {
                return Err(Error::PrecisionBudget(format!(
                    "angle is certified to {certified:.0} bits, {bits} requested"
                )));
            }
        }
        let scale = exact::pow2(bits as i64);
        Ok((self.representative() * &scale).round() / scale)
    }

    /// Upper bound on `|alpha - p_k/q_k|`: exact for rational angles, else
    /// `1/(q_k q_{k+1})` when `q_{k+1}` is stored.
    pub fn convergent_gap_bound(&self, k: usize) -> Option<Q> {
        let (p, q) = self.convergents.get(k)?;
        if self.is_rational() {
            return Some((self.representative() - Q::new(p.clone(), q.clone())).abs());
        }
        let (_, qn) = self.convergents.get(k + 1)?;
        Some(Q::new(BigInt::one(), q * qn))
    }

    /// Enclosure of `|alpha - p/q|`.
    pub fn gap_bracket(&self, p: &BigInt, q: &BigInt) -> (Q, Q) {
        let x = Q::new(p.clone(), q.clone());
        let (lo, hi) = self.bracket();
        if x < lo {
            (lo - &x, hi - x)
        } else if x > hi {
            (&x - hi, x - lo)
        } else {
            (Q::zero(), (&hi - &x).max(&x - &lo))
        }
    }
}

/// First `k` partial quotients. Rational angles return their full expansion
/// when `k` exceeds its length.
pub fn continued_fraction(a: &Angle, k: usize) -> Result<Vec<BigInt>> {
    if k > a.quotients.len() {
        if a.is_rational() {
            return Ok(a.quotients.clone());
        }
        return Err(Error::InsufficientDigits(format!(
            "{k} quotients requested, {} stored",
            a.quotients.len()
        )));
    }
    Ok(a.quotients[..k].to_vec())
}

/// Effective approximation exponent `-ln|alpha - p/q| / ln q`.
pub fn witness_exponent(a: &Angle, p: &BigInt, q: &BigInt) -> Result<f64> {
    if q.is_zero() {
        return Err(Error::InvalidInput("q must be nonzero".into()));
    }
    let (lo, hi) = a.gap_bracket(p, q);
    if hi.is_zero() {
        return Err(Error::ExactHit);
    }
    let lnq = exact::ln_big(q.magnitude());
    if lnq == 0.0 {
        return Err(Error::InvalidInput("|q| = 1 has no exponent".into()));
    }
    if lo.is_zero() {
        return Err(Error::InsufficientDigits(format!(
            "{p}/{q} is not separated from the angle by its stored quotients"
        )));
    }
    let e_hi = -exact::ln_q(&lo) / lnq;
    let e_lo = -exact::ln_q(&hi) / lnq;
    if (e_hi - e_lo) > 1e-9 * e_hi.abs().max(1.0) {
        return Err(Error::InsufficientDigits(format!(
            "exponent only known within [{e_lo}, {e_hi}]"
        )));
    }
    Ok(0.5 * (e_lo + e_hi))
}

/// Builds a Liouville-type angle: after the prefix, each partial quotient is
/// the least one making `q_{k+1} >= q_k^(e_k - 1)`, which gives
/// `|alpha - p_k/q_k| < 1/(q_k q_{k+1}) <= 1/q_k^e_k`.
///
/// Quotients are produced up to index `levels + 1`, so the inequality is
/// certified for convergents `1..=levels`. Exponents below 2 are raised to 2.
pub fn build_liouville(
    prefix: &[u64],
    schedule: impl Fn(usize) -> u32,
    levels: usize,
    budget_bits: u64,
) -> Result<Angle> {
    if levels == 0 {
        return Err(Error::InvalidInput("at least one level is required".into()));
    }
    let mut quotients: Vec<BigInt> = prefix.iter().map(|&a| BigInt::from(a)).collect();
    if quotients.is_empty() {
        quotients.push(BigInt::zero());
    }
    if quotients.len() < 2 {
        quotients.push(BigInt::one());
    }
    check_quotients(&quotients)?;
    if quotients.len() > levels + 2 {
        return Err(Error::InvalidInput(format!(
            "prefix of length {} exceeds {} levels",
            quotients.len(),
            levels
        )));
    }
    let mut prev_e = 2;
    for k in 1..=levels {
        let e = schedule(k).max(2);
        if e < prev_e {
            return Err(Error::InvalidInput(format!(
                "schedule must be nondecreasing, e_{k} = {e} < {prev_e}"
            )));
        }
        prev_e = e;
        if quotients.len() > k + 1 {
            continue;
        }
        let conv = convergents(&quotients);
        let qk = &conv[k].1;
        let qkm1 = &conv[k - 1].1;
        let target = num_traits::pow(qk.clone(), (e - 1) as usize);
        let need = (target - qkm1).max(BigInt::zero());
        let a = Integer::div_ceil(&need, qk).max(BigInt::one());
        let qn = &a * qk + qkm1;
        if qn.bits() > budget_bits {
            return Err(Error::PrecisionBudget(format!(
                "denominator q_{} needs {} bits, budget is {budget_bits}",
                k + 1,
                qn.bits()
            )));
        }
        quotients.push(a);
    }
    Angle::from_quotients(quotients)
}

/// Certificate that `|alpha - p/q| <= c / q^gamma`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApproxWitness {
    #[serde(with = "exact::serde_bigint")]
    pub p: BigInt,
    #[serde(with = "exact::serde_bigint")]
    pub q: BigInt,
    #[serde(with = "exact::serde_q")]
    pub gamma: Q,
    #[serde(with = "exact::serde_q")]
    pub c: Q,
    /// Exact gap for rational angles; certified upper bound otherwise.
    #[serde(with = "exact::serde_q")]
    pub gap: Q,
}

impl ApproxWitness {
    /// Certifies convergent `k` of `a` at exponent `gamma` and constant `c`.
    pub fn from_convergent(a: &Angle, k: usize, gamma: &Q, c: &Q) -> Result<ApproxWitness> {
        let gap = a.convergent_gap_bound(k).ok_or_else(|| {
            Error::InsufficientDigits(format!("convergent {k} has no certified gap"))
        })?;
        let (p, q) = a.convergents[k].clone();
        let w = ApproxWitness {
            p,
            q,
            gamma: gamma.clone(),
            c: c.clone(),
            gap,
        };
        if !w.holds() {
            return Err(Error::Certificate(format!(
                "|alpha - {}/{}| <= c/q^gamma fails",
                w.p, w.q
            )));
        }
        Ok(w)
    }

    pub fn bound(&self) -> Expr {
        Expr::pow(qint(self.q.clone()), -self.gamma.clone()).scale(&self.c)
    }

    pub fn holds(&self) -> bool {
        !self.gap.is_zero()
            && matches!(
                compare(&Expr::rational(self.gap.clone()), &self.bound()),
                Some(Ordering::Less | Ordering::Equal)
            )
    }
}

/// Wire format: quotients and convergents with integers as decimal strings.
#[derive(Serialize, Deserialize)]
struct AngleRecord {
    kind: AngleKind,
    quotients: Vec<String>,
    convergents: Vec<[String; 2]>,
    #[serde(default = "default_bits")]
    precision_bits: u64,
}

fn default_bits() -> u64 {
    DEFAULT_PRECISION_BITS
}

impl Serialize for Angle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AngleRecord {
            kind: self.kind,
            quotients: self.quotients.iter().map(|a| a.to_string()).collect(),
            convergents: self
                .convergents
                .iter()
                .map(|(p, q)| [p.to_string(), q.to_string()])
                .collect(),
            precision_bits: self.precision_bits,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = AngleRecord::deserialize(d)?;
        let quotients = r
            .quotients
            .iter()
            .map(|s| s.parse::<BigInt>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        check_quotients(&quotients).map_err(D::Error::custom)?;
        let conv = convergents(&quotients);
        let stored = r
            .convergents
            .iter()
            .map(|[p, q]| Ok((p.parse::<BigInt>()?, q.parse::<BigInt>()?)))
            .collect::<std::result::Result<Vec<_>, num_bigint::ParseBigIntError>>()
            .map_err(D::Error::custom)?;
        if !stored.is_empty() && stored != conv {
            return Err(D::Error::custom("convergents disagree with quotients"));
        }
        if r.kind == AngleKind::Rational {
            let (p, q) = conv.last().unwrap();
            let mut a = Angle::rational(Q::new(p.clone(), q.clone()));
            a.precision_bits = r.precision_bits;
            return Ok(a);
        }
        Ok(Angle {
            kind: r.kind,
            quotients,
            convergents: conv,
            precision_bits: r.precision_bits,
        })
    }
}

/// Parses `"p/q"`, `"golden"`, `"cf:a0,a1,..."` or
/// `"liouville:LEVELS"` (schedule `e_k = k`).
pub fn parse_angle(s: &str) -> Result<Angle> {
    let s = s.trim();
    if s == "golden" {
        return Ok(Angle::golden_conjugate(96));
    }
    if let Some(rest) = s.strip_prefix("cf:") {
        let qs = rest
            .split(',')
            .map(|t| t.trim().parse::<BigInt>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("bad quotient list: {e}")))?;
        return Angle::from_quotients(qs);
    }
    if let Some(rest) = s.strip_prefix("liouville:") {
        let levels: usize = rest
            .parse()
            .map_err(|_| Error::Parse(format!("bad level count {rest:?}")))?;
        return build_liouville(&[0, 1], |k| k as u32, levels, DEFAULT_PRECISION_BITS);
    }
    if s.starts_with('{') {
        return Ok(serde_json::from_str(s)?);
    }
    Ok(Angle::rational(exact::parse_ratio(s)?))
}

/// Centered fractional part of `n * alpha` for the representative value.
pub fn centered_multiple(a: &Angle, n: &BigInt) -> Q {
    centered_frac(&(a.representative() * qint(n.clone())))
}

pub fn to_u64(n: &BigInt) -> Option<u64> {
    n.to_u64()
}

pub fn biguint(n: &BigInt) -> BigUint {
    n.magnitude().clone()
}
