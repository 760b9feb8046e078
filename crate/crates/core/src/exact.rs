//! Exact rational helpers and rigorous enclosures for products of rational
//! powers.
//!
//! Quantities such as `N^(2/5)` or `q^(-9/4) * sqrt(2)` are irrational, but
//! every inequality between them can be decided by enclosing both sides in
//! rational intervals of growing precision. When two single monomials agree
//! to the working precision, they are compared exactly by raising both sides
//! to the common denominator of their exponents.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Q = BigRational;

const MAX_ENCLOSURE_BITS: u64 = 1 << 14;

pub fn qint<T: Into<BigInt>>(n: T) -> Q {
    Q::from_integer(n.into())
}

pub fn qfrac<T: Into<BigInt>, U: Into<BigInt>>(n: T, d: U) -> Q {
    Q::new(n.into(), d.into())
}

/// Parses `"p/q"`, an integer, or a plain decimal (`"0.6"`, `"-1.25e-3"`)
/// into an exact rational.
pub fn parse_ratio(s: &str) -> Result<Q> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let d: BigInt = d
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Q::new(n, d));
    }
    let (mantissa, exp10) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = s[i + 1..]
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::Parse(format!("no digits in {s:?}")));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(Error::Parse(format!("not a number: {s:?}")));
    }
    let all: BigInt = format!("{int_part}{frac_part}")
        .parse::<BigInt>()
        .map_err(|_| Error::Parse(format!("not a number: {s:?}")))?;
    let scale = exp10 - frac_part.len() as i64;
    let ten = BigInt::from(10u8);
    let mut q = if scale >= 0 {
        Q::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        Q::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        q = -q;
    }
    Ok(q)
}

pub fn fmt_ratio(q: &Q) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Fractional part in `[0, 1)`.
pub fn frac(q: &Q) -> Q {
    q - q.floor()
}

/// Representative of `q mod 1` in `[-1/2, 1/2)`.
pub fn centered_frac(q: &Q) -> Q {
    let f = frac(q);
    if f >= qfrac(1, 2) {
        f - Q::one()
    } else {
        f
    }
}

pub fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

fn top_bits(n: &BigUint, keep: u64) -> (u64, i64) {
    let bits = n.bits();
    if bits <= keep {
        (n.to_u64().unwrap(), 0)
    } else {
        let shift = bits - keep;
        ((n >> shift).to_u64().unwrap(), shift as i64)
    }
}

/// Conversion to `f64` with full relative precision, also for tiny and
/// huge magnitudes.
pub fn to_f64(q: &Q) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    let neg = q.is_negative();
    let n = q.numer().magnitude();
    let d = q.denom().magnitude();
    let shift = n.bits() as i64 - d.bits() as i64;
    // integer quotient with ~64 significant bits
    let k = 64 - shift;
    let quot = if k >= 0 {
        (n << (k as u64)) / d
    } else {
        n / (d << ((-k) as u64))
    };
    let (m, extra) = top_bits(&quot, 64);
    let v = ldexp(m as f64, extra - k);
    if neg {
        -v
    } else {
        v
    }
}

pub fn big_to_f64(n: &BigInt) -> f64 {
    to_f64(&Q::from_integer(n.clone()))
}

/// Natural logarithm of a positive integer.
pub fn ln_big(n: &BigUint) -> f64 {
    let (m, shift) = top_bits(n, 60);
    (m as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural logarithm of a positive rational.
pub fn ln_q(q: &Q) -> f64 {
    assert!(q.is_positive(), "ln of non-positive rational");
    ln_big(q.numer().magnitude()) - ln_big(q.denom().magnitude())
}

pub fn pow2(e: i64) -> Q {
    if e >= 0 {
        Q::from_integer(BigInt::one() << (e as u64))
    } else {
        Q::new(BigInt::one(), BigInt::one() << ((-e) as u64))
    }
}

pub fn qpow(b: &Q, e: i64) -> Q {
    if e >= 0 {
        num_traits::pow(b.clone(), e as usize)
    } else {
        num_traits::pow(b.recip(), (-e) as usize)
    }
}

/// `floor(frac(q) * 2^128)`: the 128-bit fixed-point image of `q mod 1`.
pub fn to_fixed(q: &Q) -> u128 {
    let f = frac(q);
    let scaled: BigInt = (f.numer() << 128u32) / f.denom();
    scaled.to_u128().expect("fraction below one")
}

/// Exact rational value of a 128-bit fixed-point fraction.
pub fn from_fixed(v: u128) -> Q {
    Q::new(BigInt::from(v), BigInt::one() << 128u32)
}

/// Rational enclosure `lo <= b^e <= hi` with relative width about `2^-bits`.
pub fn pow_bounds(b: &Q, e: &Q, bits: u64) -> (Q, Q) {
    assert!(b.is_positive(), "power of non-positive base");
    let m = e.numer().to_i64().expect("exponent numerator too large");
    let d = e.denom().to_u64().expect("exponent denominator too large");
    let y = qpow(b, m);
    if d == 1 {
        return (y.clone(), y);
    }
    let n = y.numer().magnitude().clone();
    let dd = y.denom().magnitude().clone();
    let l = n.bits() as i64 - dd.bits() as i64;
    let target = d as i64 * (bits as i64 + 2);
    let k = Integer::div_ceil(&(target - l), &(d as i64));
    let dk = d as i64 * k;
    let z = if dk >= 0 {
        (n << (dk as u64)) / dd
    } else {
        n / (dd << ((-dk) as u64))
    };
    let r = z.nth_root(d as u32);
    let scale = pow2(-k);
    let lo = Q::from_integer(BigInt::from(r.clone())) * &scale;
    let hi = Q::from_integer(BigInt::from(r + 1u32)) * scale;
    (lo, hi)
}

/// `coeff * prod(base_i ^ exp_i)` with a non-negative coefficient and positive
/// bases.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mono {
    #[serde(with = "serde_q")]
    pub coeff: Q,
    #[serde(with = "serde_pow_list", default)]
    pub factors: Vec<(Q, Q)>,
}

impl Mono {
    pub fn rational(c: Q) -> Self {
        assert!(!c.is_negative(), "monomial coefficients are non-negative");
        Mono {
            coeff: c,
            factors: Vec::new(),
        }
    }

    pub fn times_pow(mut self, base: Q, exp: Q) -> Self {
        assert!(base.is_positive(), "monomial bases are positive");
        if exp.is_zero() || base.is_one() {
            return self;
        }
        if exp.is_integer() && Self::small_enough(&base, &exp) {
            self.coeff *= qpow(&base, exp.to_integer().to_i64().unwrap());
        } else {
            self.factors.push((base, exp));
        }
        self
    }

    fn small_enough(base: &Q, exp: &Q) -> bool {
        let size = (base.numer().bits() + base.denom().bits()) as f64;
        size * to_f64(&exp.abs()) < (1u64 << 26) as f64
    }

    pub fn enclose(&self, bits: u64) -> (Q, Q) {
        let mut lo = self.coeff.clone();
        let mut hi = self.coeff.clone();
        for (b, e) in &self.factors {
            let (l, h) = pow_bounds(b, e, bits);
            lo *= l;
            hi *= h;
        }
        (lo, hi)
    }

    pub fn ln(&self) -> f64 {
        if self.coeff.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.factors
            .iter()
            .fold(ln_q(&self.coeff), |acc, (b, e)| acc + to_f64(e) * ln_q(b))
    }
}

impl fmt::Display for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_ratio(&self.coeff))?;
        for (b, e) in &self.factors {
            write!(f, " * ({})^({})", fmt_ratio(b), fmt_ratio(e))?;
        }
        Ok(())
    }
}

/// A finite sum of monomials.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Expr {
    pub terms: Vec<Mono>,
}

impl Expr {
    pub fn zero() -> Self {
        Expr { terms: Vec::new() }
    }

    pub fn rational(c: Q) -> Self {
        Expr {
            terms: vec![Mono::rational(c)],
        }
    }

    pub fn int<T: Into<BigInt>>(n: T) -> Self {
        Self::rational(qint(n))
    }

    pub fn mono(m: Mono) -> Self {
        Expr { terms: vec![m] }
    }

    pub fn pow(base: Q, exp: Q) -> Self {
        Self::mono(Mono::rational(Q::one()).times_pow(base, exp))
    }

    pub fn plus(mut self, other: Expr) -> Self {
        self.terms.extend(other.terms);
        self
    }

    /// Product of two sums, expanded.
    pub fn times(&self, other: &Expr) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut m = a.clone();
                m.coeff *= &b.coeff;
                m.factors.extend(b.factors.iter().cloned());
                out.push(m);
            }
        }
        Expr { terms: out }
    }

    pub fn scale(mut self, c: &Q) -> Self {
        for t in &mut self.terms {
            t.coeff *= c;
        }
        self
    }

    pub fn as_rational(&self) -> Option<Q> {
        let mut acc = Q::zero();
        for t in &self.terms {
            if !t.factors.is_empty() {
                return None;
            }
            acc += &t.coeff;
        }
        Some(acc)
    }

    pub fn enclose(&self, bits: u64) -> (Q, Q) {
        let mut lo = Q::zero();
        let mut hi = Q::zero();
        for t in &self.terms {
            let (l, h) = t.enclose(bits);
            lo += l;
            hi += h;
        }
        (lo, hi)
    }

    pub fn to_f64(&self) -> f64 {
        self.terms.iter().map(|t| t.ln().exp()).sum()
    }

    /// Natural log of the magnitude, usable where `to_f64` under- or
    /// overflows.
    pub fn ln(&self) -> f64 {
        let logs: Vec<f64> = self.terms.iter().map(Mono::ln).collect();
        let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return max;
        }
        max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln()
    }

    pub fn floor(&self) -> Option<BigInt> {
        if let Some(q) = self.as_rational() {
            return Some(q.floor().to_integer());
        }
        let magnitude = (self.ln() / std::f64::consts::LN_2).max(0.0) as u64;
        let mut bits = 64 + magnitude;
        while bits <= MAX_ENCLOSURE_BITS + magnitude {
            let (lo, hi) = self.enclose(bits);
            let (fl, fh) = (lo.floor(), hi.floor());
            if fl == fh {
                return Some(fl.to_integer());
            }
            bits *= 2;
        }
        None
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

fn mono_cmp_exact(a: &Mono, b: &Mono) -> Ordering {
    match (a.coeff.is_zero(), b.coeff.is_zero()) {
        (true, true) => return Ordering::Equal,
        (true, false) => return Ordering::Less,
        (false, true) => return Ordering::Greater,
        _ => {}
    }
    let mut den = BigInt::one();
    for (_, e) in a.factors.iter().chain(&b.factors) {
        den = den.lcm(e.denom());
    }
    let d = den.to_i64().expect("exponent denominators too large");
    let mut lhs = qpow(&a.coeff, d);
    for (base, e) in &a.factors {
        lhs *= qpow(base, (e * qint(d)).to_integer().to_i64().unwrap());
    }
    let mut rhs = qpow(&b.coeff, d);
    for (base, e) in &b.factors {
        rhs *= qpow(base, (e * qint(d)).to_integer().to_i64().unwrap());
    }
    lhs.cmp(&rhs)
}

/// Decides the order of two non-negative expressions. Returns `None` only
/// when two multi-term sums agree to the maximal working precision.
pub fn compare(a: &Expr, b: &Expr) -> Option<Ordering> {
    if let (Some(x), Some(y)) = (a.as_rational(), b.as_rational()) {
        return Some(x.cmp(&y));
    }
    let mut bits = 64u64;
    while bits <= MAX_ENCLOSURE_BITS {
        let (al, ah) = a.enclose(bits);
        let (bl, bh) = b.enclose(bits);
        if ah < bl {
            return Some(Ordering::Less);
        }
        if al > bh {
            return Some(Ordering::Greater);
        }
        bits *= 4;
    }
    let single = |e: &Expr| -> Option<Mono> {
        match e.terms.len() {
            0 => Some(Mono::rational(Q::zero())),
            1 => Some(e.terms[0].clone()),
            _ => None,
        }
    };
    match (single(a), single(b)) {
        (Some(x), Some(y)) => Some(mono_cmp_exact(&x, &y)),
        _ => None,
    }
}

/// Smallest integer `n >= 1` with `n^exp > target`, for a positive rational
/// exponent.
pub fn min_int_pow_exceeding(exp: &Q, target: &Q) -> BigInt {
    assert!(exp.is_positive());
    let u = exp.numer().to_u32().expect("exponent numerator too large");
    let v = exp.denom().to_i64().expect("exponent denominator too large");
    if !target.is_positive() {
        return BigInt::one();
    }
    let y = qpow(target, v);
    let f = y.floor().to_integer();
    let r = f.magnitude().nth_root(u);
    BigInt::from(r) + 1
}

/// Rational bracket of pi, accurate to 1e-20.
pub fn pi_bounds() -> (Q, Q) {
    let den = num_traits::pow(BigInt::from(10u8), 20);
    let lo: BigInt = "314159265358979323846".parse().unwrap();
    (Q::new(lo.clone(), den.clone()), Q::new(lo + 1, den))
}

/// Alternating-series bracket of `cos(y)` for `0 <= y <= 4`.
pub fn cos_bounds(y: &Q) -> (Q, Q) {
    assert!(!y.is_negative() && *y <= qint(4), "cos_bounds needs 0 <= y <= 4");
    let y2 = y * y;
    let mut term = Q::one();
    let mut sum = Q::one();
    let mut lo = None;
    let mut hi = None;
    for k in 1..=24u32 {
        term = -term * &y2 / qint((2 * k - 1) * (2 * k));
        sum += &term;
        if k >= 22 {
            if term.is_negative() {
                lo = Some(sum.clone());
            } else {
                hi = Some(sum.clone());
            }
        }
    }
    (lo.unwrap(), hi.unwrap())
}

/// Rigorous bracket of `cos(pi / q)` for `q >= 1`.
pub fn cos_pi_over_bounds(q: u64) -> (Q, Q) {
    let (pl, ph) = pi_bounds();
    let qq = qint(q);
    // cos is decreasing on [0, pi]
    let (lo, _) = cos_bounds(&(ph / &qq));
    let (_, hi) = cos_bounds(&(pl / qq));
    // outward rounding to short dyadics keeps later powers cheap
    let scale = pow2(96);
    let lo = (lo * &scale).floor() / &scale;
    let hi = (hi * &scale).ceil() / scale;
    (lo, hi.min(Q::one()))
}

/// Serde helpers writing exact numbers as decimal strings.
pub mod serde_q {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_ratio(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_ratio(&s).map_err(serde::de::Error::custom)
    }
}

pub mod serde_opt_q {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Option<Q>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match q {
            Some(q) => s.serialize_some(&fmt_ratio(q)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Q>, D::Error> {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| parse_ratio(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

pub mod serde_bigint {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.trim().parse().map_err(serde::de::Error::custom)
    }
}

pub mod serde_biguint {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.trim().parse().map_err(serde::de::Error::custom)
    }
}

pub mod serde_pow_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        v: &[(Q, Q)],
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let out: Vec<[String; 2]> = v
            .iter()
            .map(|(b, e)| [fmt_ratio(b), fmt_ratio(e)])
            .collect();
        out.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<(Q, Q)>, D::Error> {
        let raw = Vec::<[String; 2]>::deserialize(d)?;
        raw.into_iter()
            .map(|[b, e]| {
                let b = parse_ratio(&b).map_err(serde::de::Error::custom)?;
                let e = parse_ratio(&e).map_err(serde::de::Error::custom)?;
                if !b.is_positive() {
                    return Err(serde::de::Error::custom("non-positive power base"));
                }
                Ok((b, e))
            })
            .collect()
    }
}

pub fn bigint_from_biguint(n: &BigUint) -> BigInt {
    BigInt::from_biguint(Sign::Plus, n.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_and_fractions() {
        assert_eq!(parse_ratio("0.6").unwrap(), qfrac(3, 5));
        assert_eq!(parse_ratio("-0.25").unwrap(), qfrac(-1, 4));
        assert_eq!(parse_ratio("7/3").unwrap(), qfrac(7, 3));
        assert_eq!(parse_ratio("1e-3").unwrap(), qfrac(1, 1000));
        assert_eq!(parse_ratio("12").unwrap(), qint(12));
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("abc").is_err());
    }

    #[test]
    fn fractional_parts() {
        assert_eq!(frac(&qfrac(7, 3)), qfrac(1, 3));
        assert_eq!(frac(&qfrac(-1, 4)), qfrac(3, 4));
        assert_eq!(centered_frac(&qfrac(3, 4)), qfrac(-1, 4));
    }

    #[test]
    fn f64_conversion_keeps_relative_precision() {
        let tiny = pow2(-3000) * qint(3);
        let v = to_f64(&tiny);
        assert_eq!(v, 0.0); // below the subnormal range
        let x = qfrac(1, 3);
        assert_eq!(to_f64(&x), 1.0 / 3.0);
        let y = Q::new(BigInt::one(), BigInt::from(10u64).pow(30));
        assert!((to_f64(&y) / 1e-30 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pow_bounds_bracket_roots() {
        let (lo, hi) = pow_bounds(&qint(2), &qfrac(1, 2), 80);
        assert!(&lo * &lo <= qint(2) && &hi * &hi >= qint(2));
        assert!(to_f64(&(hi - lo)) < 1e-22);
        let (lo, hi) = pow_bounds(&qint(5800), &qfrac(2, 5), 64);
        let v = 5800f64.powf(0.4);
        assert!(to_f64(&lo) <= v * (1.0 + 1e-15) && to_f64(&hi) >= v * (1.0 - 1e-15));
    }

    #[test]
    fn threshold_solver_matches_hand_values() {
        // (1/16) N^(2/5) > 2  <=>  N^(2/5) > 32  <=>  N > 2^12.5
        let n = min_int_pow_exceeding(&qfrac(2, 5), &qint(32));
        assert_eq!(n, BigInt::from(5793));
        // exact boundary: N^(2/5) > 16 needs N > 1024 strictly
        let n = min_int_pow_exceeding(&qfrac(2, 5), &qint(16));
        assert_eq!(n, BigInt::from(1025));
    }

    #[test]
    fn compare_decides_irrational_inequalities() {
        // sqrt(2) < 1.5
        let s2 = Expr::pow(qint(2), qfrac(1, 2));
        assert_eq!(compare(&s2, &Expr::rational(qfrac(3, 2))), Some(Ordering::Less));
        // 1024^(2/5) = 16 exactly: equality is decided by the exact fallback
        let x = Expr::pow(qint(1024), qfrac(2, 5));
        assert_eq!(compare(&x, &Expr::int(16)), Some(Ordering::Equal));
        // tiny * moderate
        let t = Expr::mono(
            Mono::rational(pow2(-69517)).times_pow(qint(5793), qfrac(2, 5)),
        );
        assert_eq!(compare(&t, &Expr::int(1)), Some(Ordering::Less));
    }

    #[test]
    fn floor_of_irrational_power() {
        // 10^5 / 16 = 6250 exactly
        let e = Expr::pow(qint(10), qint(5)).scale(&qfrac(1, 16));
        assert_eq!(e.floor().unwrap(), BigInt::from(6250));
        let e = Expr::pow(qint(2), qfrac(1, 2)).scale(&qint(1000));
        assert_eq!(e.floor().unwrap(), BigInt::from(1414));
    }

    #[test]
    fn cos_pi_over_q_brackets() {
        for q in [1u64, 3, 5, 7, 9, 101] {
            let (lo, hi) = cos_pi_over_bounds(q);
            let v = (std::f64::consts::PI / q as f64).cos();
            assert!(to_f64(&lo) <= v + 1e-15 && to_f64(&hi) >= v - 1e-15, "q = {q}");
            assert!(to_f64(&(hi - lo)) < 1e-18);
        }
    }
}
