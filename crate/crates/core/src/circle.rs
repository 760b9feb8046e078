//! Points of the unit circle `R/Z` and the resonant good sets `G_q^eta`.
//!
//! A point is either an exact rational in `[0, 1)` or a 128-bit fixed-point
//! fraction. Fixed-point addition and multiplication by integers wrap modulo
//! 2^128, which is exactly reduction modulo 1, so integer multiples of a point
//! never lose precision before the final trigonometric call.

use std::f64::consts::TAU;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::{self, frac, qfrac, qint, Q};

const ONE_EIGHTH: u128 = 1 << 125;
const ONE_QUARTER: u128 = 1 << 126;
const THREE_EIGHTHS: u128 = 3 << 125;
const ONE_HALF: u128 = 1 << 127;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CirclePoint {
    Exact(BigRational),
    Fixed(u128),
}

/// Reduces a finite float modulo 1. The result is exact: every finite `f64`
/// is a dyadic rational, and its fractional part fits 128 fractional bits
/// whenever its exponent is at least -128 (smaller inputs are rounded).
pub fn reduce(x: f64) -> Result<CirclePoint> {
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    if x == 0.0 {
        return Ok(CirclePoint::Fixed(0));
    }
    let bits = x.to_bits();
    let neg = bits >> 63 == 1;
    let biased = ((bits >> 52) & 0x7ff) as i64;
    let mut mantissa = (bits & ((1u64 << 52) - 1)) as u128;
    let exp = if biased == 0 {
        -1074
    } else {
        mantissa |= 1 << 52;
        biased - 1075
    };
    // x = mantissa * 2^exp; the fixed image is mantissa * 2^(exp + 128) mod 2^128
    let shift = exp + 128;
    let v = if shift >= 128 {
        0
    } else if shift >= 0 {
        mantissa.checked_shl(shift as u32).unwrap_or(0)
    } else if shift > -128 {
        mantissa >> ((-shift) as u32)
    } else {
        0
    };
    Ok(CirclePoint::Fixed(if neg { v.wrapping_neg() } else { v }))
}

/// Exact reduction of a rational modulo 1.
pub fn reduce_ratio(x: &Q) -> CirclePoint {
    CirclePoint::Exact(frac(x))
}

impl CirclePoint {
    pub fn zero() -> Self {
        CirclePoint::Exact(Q::zero())
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, CirclePoint::Exact(_))
    }

    pub fn value(&self) -> f64 {
        match self {
            CirclePoint::Exact(q) => exact::to_f64(q),
            CirclePoint::Fixed(v) => fixed_to_f64(*v),
        }
    }

    pub fn as_exact(&self) -> Option<&Q> {
        match self {
            CirclePoint::Exact(q) => Some(q),
            CirclePoint::Fixed(_) => None,
        }
    }

    /// The 128-bit fixed-point image (exact for fixed points, floor for
    /// rationals).
    pub fn to_fixed(&self) -> u128 {
        match self {
            CirclePoint::Exact(q) => exact::to_fixed(q),
            CirclePoint::Fixed(v) => *v,
        }
    }

    pub fn to_exact(&self) -> Q {
        match self {
            CirclePoint::Exact(q) => q.clone(),
            CirclePoint::Fixed(v) => exact::from_fixed(*v),
        }
    }

    /// `q * self mod 1` as a fixed-point fraction; the reduction is exact and
    /// only the final rounding to 128 bits (for rationals) is inexact.
    pub fn times_fixed(&self, q: &BigUint) -> u128 {
        match self {
            CirclePoint::Exact(x) => {
                let prod = x * Q::from_integer(BigInt::from(q.clone()));
                exact::to_fixed(&prod)
            }
            CirclePoint::Fixed(v) => v.wrapping_mul(low_u128(q)),
        }
    }

    pub fn add(&self, other: &CirclePoint) -> CirclePoint {
        match (self, other) {
            (CirclePoint::Exact(a), CirclePoint::Exact(b)) => CirclePoint::Exact(frac(&(a + b))),
            _ => CirclePoint::Fixed(self.to_fixed().wrapping_add(other.to_fixed())),
        }
    }

    pub fn neg(&self) -> CirclePoint {
        match self {
            CirclePoint::Exact(a) => CirclePoint::Exact(frac(&-a)),
            CirclePoint::Fixed(v) => CirclePoint::Fixed(v.wrapping_neg()),
        }
    }
}

/// `n mod 2^128`.
pub fn low_u128(n: &BigUint) -> u128 {
    let digits = n.to_u64_digits();
    let lo = digits.first().copied().unwrap_or(0) as u128;
    let hi = digits.get(1).copied().unwrap_or(0) as u128;
    lo | (hi << 64)
}

pub fn fixed_to_f64(v: u128) -> f64 {
    v as f64 * 2f64.powi(-128)
}

/// Distance from a fixed-point fraction to the nearest integer, as a fixed
/// fraction in `[0, 1/2]`.
#[inline]
fn fixed_abs_centered(v: u128) -> u128 {
    if v > ONE_HALF {
        v.wrapping_neg()
    } else {
        v
    }
}

/// `cos(2 pi t)` for `t = v / 2^128`. Octant reduction happens on the exact
/// fixed-point value, so the float argument is always at most `pi/4`.
#[inline]
pub fn cos_turns(v: u128) -> f64 {
    let a = fixed_abs_centered(v);
    let s = 2f64.powi(-128) * TAU;
    if a <= ONE_EIGHTH {
        (a as f64 * s).cos()
    } else if a <= ONE_QUARTER {
        ((ONE_QUARTER - a) as f64 * s).sin()
    } else if a <= THREE_EIGHTHS {
        -((a - ONE_QUARTER) as f64 * s).sin()
    } else {
        -((ONE_HALF - a) as f64 * s).cos()
    }
}

/// `sin(2 pi t)` for `t = v / 2^128`.
#[inline]
pub fn sin_turns(v: u128) -> f64 {
    // sin(2 pi t) = cos(2 pi (t - 1/4))
    cos_turns(v.wrapping_sub(ONE_QUARTER))
}

pub fn circle_dist(x: &CirclePoint, y: &CirclePoint) -> f64 {
    match (x, y) {
        (CirclePoint::Exact(a), CirclePoint::Exact(b)) => exact::to_f64(&circle_dist_exact(a, b)),
        _ => {
            let d = x.to_fixed().wrapping_sub(y.to_fixed());
            fixed_to_f64(fixed_abs_centered(d))
        }
    }
}

pub fn circle_dist_exact(x: &Q, y: &Q) -> Q {
    let d = frac(&(x - y));
    let e = Q::one() - &d;
    d.min(e)
}

/// Distance to the grid `{0, 1/q, ..., (q-1)/q}`, computed as
/// `dist(q x, 0) / q` after exact reduction of `q x`.
pub fn grid_dist(x: &CirclePoint, q: &BigUint) -> f64 {
    assert!(!q.is_zero(), "grid order must be positive");
    match x {
        CirclePoint::Exact(r) => exact::to_f64(&grid_dist_exact(r, q)),
        CirclePoint::Fixed(_) => {
            let t = fixed_abs_centered(x.times_fixed(q));
            fixed_to_f64(t) / exact::to_f64(&Q::from_integer(BigInt::from(q.clone())))
        }
    }
}

pub fn grid_dist_exact(x: &Q, q: &BigUint) -> Q {
    let qq = Q::from_integer(BigInt::from(q.clone()));
    let t = frac(&(x * &qq));
    let d = t.clone().min(Q::one() - t);
    d / qq
}

/// `G_q^eta`: points at distance less than `eta / q` from the grid of order
/// `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoodSet {
    q: BigUint,
    eta: Q,
}

impl GoodSet {
    pub fn new(q: impl Into<BigUint>, eta: Q) -> Result<Self> {
        let q = q.into();
        if q.is_zero() {
            return Err(Error::InvalidInput("good set order q must be >= 1".into()));
        }
        if eta <= Q::zero() || eta >= qfrac(1, 2) {
            return Err(Error::InvalidInput(format!(
                "good set eta must lie in (0, 1/2), got {}",
                exact::fmt_ratio(&eta)
            )));
        }
        Ok(GoodSet { q, eta })
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    pub fn eta(&self) -> &Q {
        &self.eta
    }

    pub fn radius(&self) -> Q {
        &self.eta / qint(BigInt::from(self.q.clone()))
    }

    /// Lebesgue measure, `2 eta` for every order.
    pub fn measure(&self) -> Q {
        &self.eta * qint(2)
    }

    pub fn contains(&self, x: &CirclePoint) -> bool {
        in_good_set(x, self)
    }
}

/// Strict membership test `grid_dist(x, q) < eta / q`. Exact for rational
/// points; fixed points compare `dist(q x, 0) < eta` in fixed point.
pub fn in_good_set(x: &CirclePoint, g: &GoodSet) -> bool {
    match x {
        CirclePoint::Exact(r) => grid_dist_exact(r, &g.q) < g.radius(),
        CirclePoint::Fixed(_) => {
            let t = fixed_abs_centered(x.times_fixed(&g.q));
            exact::from_fixed(t) < g.eta
        }
    }
}

/// Fraction of the `m` midpoints `(i + 1/2)/m` that fall in `g`.
pub fn good_set_quadrature(g: &GoodSet, m: u64) -> f64 {
    // q x_i = q (2i+1) / (2m); count the midpoints with dist(q x_i, Z) < eta
    // using integer arithmetic on the numerator modulo 2m.
    let two_m = BigUint::from(2 * m);
    let q_mod = (&g.q % &two_m).to_u64().unwrap();
    let two_m = 2 * m;
    let eta = &g.eta;
    // dist < eta  <=>  min(r, 2m - r) < eta * 2m, r = q (2i+1) mod 2m
    let lim = eta * qint(two_m);
    // d < num/den  <=>  d * den < num, in u128 when the fraction is small
    let small = lim.numer().to_u128().zip(lim.denom().to_u128());
    let mut count = 0u64;
    for i in 0..m {
        let r = ((q_mod as u128 * (2 * i + 1) as u128) % two_m as u128) as u64;
        let d = r.min(two_m - r);
        let inside = match small {
            Some((num, den)) if den < (1 << 64) => (d as u128) * den < num,
            _ => qint(d) < lim,
        };
        if inside {
            count += 1;
        }
    }
    count as f64 / m as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fx(x: f64) -> CirclePoint {
        reduce(x).unwrap()
    }

    #[test]
    fn reduce_fractional_parts() {
        assert_eq!(fx(1.25).value(), 0.25);
        assert_eq!(fx(-0.25).value(), 0.75);
        assert_eq!(reduce_ratio(&qfrac(7, 3)), CirclePoint::Exact(qfrac(1, 3)));
        assert!(reduce(f64::NAN).is_err());
        assert!(reduce(f64::INFINITY).is_err());
        // tiny negatives stay below one
        let v = fx(-1e-300).value();
        assert!(v < 1.0 && v >= 0.0);
    }

    #[test]
    fn reduce_is_idempotent() {
        for x in [0.3, -7.75, 1e10 + 0.5, 123.456] {
            let once = fx(x);
            let twice = fx(once.value());
            assert_eq!(once.value(), twice.value());
        }
    }

    #[test]
    fn circle_distance_examples() {
        assert!((circle_dist(&fx(0.1), &fx(0.9)) - 0.2).abs() < 1e-15);
        assert_eq!(circle_dist(&fx(0.3), &fx(0.3)), 0.0);
        assert_eq!(circle_dist(&fx(0.0), &fx(0.5)), 0.5);
        let a = reduce_ratio(&qfrac(1, 10));
        let b = reduce_ratio(&qfrac(9, 10));
        assert_eq!(circle_dist_exact(a.as_exact().unwrap(), b.as_exact().unwrap()), qfrac(1, 5));
    }

    #[test]
    fn grid_distance_examples() {
        let three = BigUint::from(3u32);
        assert_eq!(grid_dist_exact(&qfrac(1, 20), &three), qfrac(1, 20));
        assert_eq!(grid_dist_exact(&qfrac(1, 6), &three), qfrac(1, 6));
        assert_eq!(grid_dist_exact(&qfrac(1, 3), &three), Q::zero());
        assert!((grid_dist(&fx(0.05), &three) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn good_set_membership_examples() {
        let g = GoodSet::new(3u32, qfrac(1, 5)).unwrap();
        assert!(in_good_set(&reduce_ratio(&qfrac(1, 20)), &g));
        assert!(in_good_set(&fx(0.05), &g));
        let g2 = GoodSet::new(3u32, qfrac(49, 100)).unwrap();
        assert!(!in_good_set(&reduce_ratio(&qfrac(1, 6)), &g2));
        assert!(in_good_set(&reduce_ratio(&qfrac(2, 3)), &g2));
        assert!(GoodSet::new(0u32, qfrac(1, 4)).is_err());
        assert!(GoodSet::new(3u32, qfrac(1, 2)).is_err());
    }

    #[test]
    fn boundary_is_excluded() {
        // grid_dist(1/36, 3) = 1/36 = (1/12)/3: strict inequality excludes it
        let g = GoodSet::new(3u32, qfrac(1, 12)).unwrap();
        assert!(!in_good_set(&reduce_ratio(&qfrac(1, 36)), &g));
        assert!(in_good_set(&reduce_ratio(&qfrac(1, 37)), &g));
    }

    #[test]
    fn cos_turns_octants() {
        let pts = [0.0, 0.1, 0.125, 0.2, 0.25, 0.3, 0.375, 0.45, 0.5, 0.6, 0.9, 0.999];
        for t in pts {
            let v = fx(t).to_fixed();
            assert!((cos_turns(v) - (TAU * t).cos()).abs() < 1e-15, "t = {t}");
            assert!((sin_turns(v) - (TAU * t).sin()).abs() < 1e-15, "t = {t}");
        }
        assert_eq!(cos_turns(ONE_HALF), -1.0);
        assert_eq!(cos_turns(0), 1.0);
    }

    #[test]
    fn fixed_multiples_are_exact_mod_one() {
        let x = fx(0.375);
        assert_eq!(x.times_fixed(&BigUint::from(8u32)), 0);
        let huge: BigUint = BigUint::one() << 200u32;
        assert_eq!(x.times_fixed(&(huge + 3u32)), fx(0.125).to_fixed());
    }
}
