//! Mean-zero cosine series `phi(x) = sum_j a_j cos(2 pi q_j x)`.
//!
//! Amplitudes are exact: either a rational or a rational power `b^e` (the
//! amplitudes `q^(-(gamma-1)(1-s))` are irrational in general). Float values
//! are cached for evaluation.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::circle::{self, cos_turns, CirclePoint};
use crate::error::{Error, Result};
use crate::exact::{self, fmt_ratio, parse_ratio, qint, Expr, Mono, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Amplitude {
    Rational(Q),
    Power { base: Q, exp: Q },
}

impl Amplitude {
    /// `base^exp`, kept rational when the exponent is an integer of modest
    /// size.
    pub fn power(base: Q, exp: Q) -> Amplitude {
        let m = Mono::rational(Q::one()).times_pow(base, exp);
        match m.factors.as_slice() {
            [] => Amplitude::Rational(m.coeff),
            [(b, e)] if m.coeff.is_one() => Amplitude::Power {
                base: b.clone(),
                exp: e.clone(),
            },
            _ => unreachable!("single factor"),
        }
    }

    pub fn expr(&self) -> Expr {
        match self {
            Amplitude::Rational(q) => Expr::rational(q.clone()),
            Amplitude::Power { base, exp } => Expr::pow(base.clone(), exp.clone()),
        }
    }

    pub fn as_rational(&self) -> Option<&Q> {
        match self {
            Amplitude::Rational(q) => Some(q),
            Amplitude::Power { .. } => None,
        }
    }

    pub fn ln(&self) -> f64 {
        self.expr().ln()
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Amplitude::Rational(q) => exact::to_f64(q),
            Amplitude::Power { .. } => self.ln().exp(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Amplitude::Rational(q) if q.is_zero())
    }
}

impl fmt::Display for Amplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Amplitude::Rational(q) => write!(f, "{}", fmt_ratio(q)),
            Amplitude::Power { base, exp } => write!(f, "{}^{}", fmt_ratio(base), fmt_ratio(exp)),
        }
    }
}

/// Parses `"1/8"`, `"0.25"`, or a power `"10^-9/4"`.
pub fn parse_amplitude(s: &str) -> Result<Amplitude> {
    let a = match s.split_once('^') {
        Some((b, e)) => {
            let base = parse_ratio(b)?;
            if !base.is_positive() {
                return Err(Error::Parse(format!("power base must be positive in {s:?}")));
            }
            Amplitude::power(base, parse_ratio(e)?)
        }
        None => Amplitude::Rational(parse_ratio(s)?),
    };
    if let Amplitude::Rational(q) = &a {
        if q.is_negative() {
            return Err(Error::InvalidInput(format!("negative amplitude {s:?}")));
        }
    }
    Ok(a)
}

#[derive(Clone, Debug)]
pub struct Term {
    freq: BigUint,
    amp: Amplitude,
    freq_low: u128,
    amp_f64: f64,
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        self.freq == other.freq && self.amp == other.amp
    }
}

impl Term {
    pub fn new(freq: impl Into<BigUint>, amp: Amplitude) -> Term {
        let freq = freq.into();
        Term {
            freq_low: circle::low_u128(&freq),
            amp_f64: amp.to_f64(),
            freq,
            amp,
        }
    }

    pub fn freq(&self) -> &BigUint {
        &self.freq
    }

    pub fn freq_u64(&self) -> Option<u64> {
        self.freq.to_u64()
    }

    /// `freq mod 2^128`, the multiplier for fixed-point positions.
    pub fn freq_low(&self) -> u128 {
        self.freq_low
    }

    pub fn amp(&self) -> &Amplitude {
        &self.amp
    }

    pub fn amp_f64(&self) -> f64 {
        self.amp_f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CosineSeries {
    terms: Vec<Term>,
    tail_bound: Expr,
}

impl Default for CosineSeries {
    fn default() -> Self {
        Self::empty()
    }
}

impl CosineSeries {
    pub fn empty() -> Self {
        CosineSeries {
            terms: Vec::new(),
            tail_bound: Expr::zero(),
        }
    }

    /// Sorts by frequency and drops zero amplitudes. Frequencies must be
    /// positive and distinct.
    pub fn new(mut terms: Vec<Term>) -> Result<Self> {
        terms.retain(|t| !t.amp.is_zero());
        terms.sort_by(|a, b| a.freq.cmp(&b.freq));
        if terms.first().is_some_and(|t| t.freq.is_zero()) {
            return Err(Error::InvalidInput(
                "frequency 0 would add a constant term".into(),
            ));
        }
        if let Some(w) = terms.windows(2).find(|w| w[0].freq == w[1].freq) {
            return Err(Error::InvalidInput(format!(
                "duplicate frequency {}",
                w[0].freq
            )));
        }
        Ok(CosineSeries {
            terms,
            tail_bound: Expr::zero(),
        })
    }

    pub fn single(freq: impl Into<BigUint>, amp: Amplitude) -> Self {
        Self::new(vec![Term::new(freq, amp)]).expect("one valid term")
    }

    pub fn from_pairs(pairs: &[(u64, Q)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|(q, a)| Term::new(*q, Amplitude::Rational(a.clone())))
                .collect(),
        )
    }

    /// Records an upper bound on the sup-norm of the omitted terms.
    pub fn with_tail_bound(mut self, tail: Expr) -> Self {
        self.tail_bound = tail;
        self
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn tail_bound(&self) -> &Expr {
        &self.tail_bound
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn max_freq(&self) -> Option<&BigUint> {
        self.terms.last().map(|t| &t.freq)
    }

    /// `sum a_j + tail`, a bound on the sup-norm.
    pub fn sup_bound(&self) -> Expr {
        self.terms
            .iter()
            .fold(self.tail_bound.clone(), |acc, t| acc.plus(t.amp.expr()))
    }

    /// `integral phi^2 = sum a_j^2 / 2` for the stored terms.
    pub fn l2_norm_sq(&self) -> f64 {
        self.terms.iter().map(|t| t.amp_f64 * t.amp_f64 / 2.0).sum()
    }

    pub fn eval(&self, x: &CirclePoint) -> f64 {
        match x {
            CirclePoint::Fixed(v) => self.eval_fixed(*v),
            CirclePoint::Exact(r) => self
                .terms
                .iter()
                .map(|t| t.amp_f64 * cos_turns(exact::to_fixed(&(r * qint(BigInt::from(t.freq.clone()))))))
                .sum(),
        }
    }

    /// Evaluation at a 128-bit fixed-point position; `q_j * x mod 1` is
    /// exact there.
    #[inline]
    pub fn eval_fixed(&self, x: u128) -> f64 {
        self.terms
            .iter()
            .map(|t| t.amp_f64 * cos_turns(t.freq_low.wrapping_mul(x)))
            .sum()
    }
}

pub fn eval(s: &CosineSeries, x: &CirclePoint) -> f64 {
    s.eval(x)
}

/// Coefficient of `e^(2 pi i n x)`: `a_j / 2` when `|n| = q_j`.
pub fn fourier_coeff_exact(s: &CosineSeries, n: &BigInt) -> Option<Expr> {
    let m = n.magnitude();
    s.terms
        .binary_search_by(|t| t.freq.cmp(m))
        .ok()
        .map(|i| s.terms[i].amp.expr().scale(&exact::qfrac(1, 2)))
}

pub fn fourier_coeff(s: &CosineSeries, n: i64) -> f64 {
    let m = BigUint::from(n.unsigned_abs());
    match s.terms.binary_search_by(|t| t.freq.cmp(&m)) {
        Ok(i) => s.terms[i].amp_f64 / 2.0,
        Err(_) => 0.0,
    }
}

/// `sum a_j (2 pi q_j)^r`, bounding the sup-norm of the r-th derivative of
/// the stored terms. Summed in log space so huge frequencies stay finite
/// when the amplitudes compensate.
pub fn cr_norm_bound(s: &CosineSeries, r: u32) -> f64 {
    let tau = std::f64::consts::TAU.ln();
    s.terms
        .iter()
        .map(|t| {
            let ln = t.amp.ln() + r as f64 * (tau + exact::ln_big(&t.freq));
            ln.exp()
        })
        .sum()
}

/// Single term `2^(-q) cos(2 pi q x)`.
pub fn t1_term(q: u64) -> CosineSeries {
    CosineSeries::single(q, Amplitude::Rational(exact::pow2(-(q as i64))))
}

/// Single term `q^(-(gamma-1)(1-s)) cos(2 pi q x)`.
pub fn t2_term(q: &BigUint, gamma: &Q, s: &Q) -> Result<CosineSeries> {
    if q.is_zero() {
        return Err(Error::InvalidInput("q must be >= 1".into()));
    }
    if *gamma <= Q::one() {
        return Err(Error::InvalidInput("gamma must exceed 1".into()));
    }
    if *s <= exact::qfrac(1, 2) || *s >= Q::one() {
        return Err(Error::InvalidInput("s must lie in (1/2, 1)".into()));
    }
    let exp = -(gamma - Q::one()) * (Q::one() - s);
    let base = qint(BigInt::from(q.clone()));
    Ok(CosineSeries::single(q.clone(), Amplitude::power(base, exp)))
}

#[derive(Serialize, Deserialize)]
struct SeriesRecord {
    terms: Vec<(Value, String)>,
    #[serde(default)]
    tail_bound: Option<Value>,
}

impl Serialize for CosineSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let q = match t.freq.to_u64() {
                    Some(v) => Value::from(v),
                    None => Value::from(t.freq.to_string()),
                };
                (q, t.amp.to_string())
            })
            .collect();
        let tail = match self.tail_bound.as_rational() {
            Some(q) => Value::from(fmt_ratio(&q)),
            None => serde_json::to_value(&self.tail_bound).map_err(serde::ser::Error::custom)?,
        };
        SeriesRecord {
            terms,
            tail_bound: Some(tail),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CosineSeries {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = SeriesRecord::deserialize(d)?;
        let mut terms = Vec::with_capacity(r.terms.len());
        for (q, a) in r.terms {
            let q: BigUint = match q {
                Value::Number(n) => n
                    .as_u64()
                    .map(BigUint::from)
                    .ok_or_else(|| D::Error::custom("frequency must be a non-negative integer"))?,
                Value::String(s) => s.parse().map_err(D::Error::custom)?,
                _ => return Err(D::Error::custom("frequency must be an integer")),
            };
            terms.push(Term::new(q, parse_amplitude(&a).map_err(D::Error::custom)?));
        }
        let tail = match r.tail_bound.unwrap_or(Value::Null) {
            Value::Null => Expr::zero(),
            Value::String(s) => Expr::rational(parse_ratio(&s).map_err(D::Error::custom)?),
            v => serde_json::from_value(v).map_err(D::Error::custom)?,
        };
        Ok(CosineSeries::new(terms)
            .map_err(D::Error::custom)?
            .with_tail_bound(tail))
    }
}
