//! The chain restricted to a rational angle `p/q`: a walk on `Z/q` with
//! steps `±p`, i.e. a symmetric circulant matrix with eigenvalues
//! `cos(2 pi k p / q)`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::circle::cos_turns;
use crate::error::{Error, Result};
use crate::exact::{self, Q};
use crate::observable::CosineSeries;

pub const MAX_HORIZON: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteChain {
    q: u64,
    p: i64,
}

impl FiniteChain {
    pub fn new(q: u64, p: i64) -> Result<Self> {
        let bad = |reason: &str| Error::BadChain {
            q,
            p,
            reason: reason.into(),
        };
        if q == 0 {
            return Err(bad("q must be positive"));
        }
        if q % 2 == 0 {
            return Err(bad("even q gives a periodic chain"));
        }
        if q > 1 && (p.rem_euclid(q as i64) as u64).gcd(&q) != 1 {
            return Err(bad("gcd(p, q) > 1 gives a reducible chain"));
        }
        Ok(FiniteChain { q, p })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    fn step(&self) -> usize {
        self.p.rem_euclid(self.q as i64) as usize
    }

    /// Row sums and symmetry hold by construction; exposed for tests.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let q = self.q as usize;
        let st = self.step();
        let mut m = vec![vec![0.0; q]; q];
        for (i, row) in m.iter_mut().enumerate() {
            row[(i + st) % q] += 0.5;
            row[(i + q - st) % q] += 0.5;
        }
        m
    }
}

/// `cos(2 pi k p / q)` for `k = 0..q`.
pub fn chain_spectrum(c: &FiniteChain) -> Vec<f64> {
    (0..c.q)
        .map(|k| {
            let ph = exact::qfrac(k as i64 * c.p, c.q as i64);
            cos_turns(exact::to_fixed(&ph))
        })
        .collect()
}

/// Spectral radius on mean-zero functions, `cos(pi / q)` (0 when `q = 1`).
pub fn mean_zero_radius(c: &FiniteChain) -> f64 {
    if c.q == 1 {
        0.0
    } else {
        (std::f64::consts::PI / c.q as f64).cos()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingBound {
    pub a: f64,
    pub rho: f64,
}

/// `|(P^n)_ij - 1/q| <= (1/q) sum_{k != 0} |lambda_k|^n <= rho^n`, so `A = 1`.
pub fn mixing_bound(c: &FiniteChain) -> MixingBound {
    MixingBound {
        a: 1.0,
        rho: mean_zero_radius(c),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingCheck {
    pub q: u64,
    pub p: i64,
    pub horizon: u32,
    pub holds: bool,
    /// `max_n max_ij |(P^n)_ij - 1/q| / rho^n` in floating point.
    pub worst_ratio: f64,
    /// Per `n`: exact maximal deviation as a rational string.
    pub deviations: Vec<String>,
}

/// Verifies the mixing bound for every `n <= horizon` with exact path
/// counts. Every entry of `P^n` is `count / 2^n`; circulant symmetry means
/// row 0 suffices. The comparison uses a rational lower bound of
/// `cos(pi/q)`, so a pass is rigorous.
pub fn verify_mixing(c: &FiniteChain, horizon: u32) -> Result<MixingCheck> {
    if horizon > MAX_HORIZON {
        return Err(Error::InvalidInput(format!(
            "horizon must be <= {MAX_HORIZON}"
        )));
    }
    let q = c.q as usize;
    let st = c.step();
    let rho_lo = if c.q == 1 {
        Q::zero()
    } else {
        exact::cos_pi_over_bounds(c.q).0
    };
    let rho = mean_zero_radius(c);
    let mut counts = vec![0u128; q];
    counts[0] = 1;
    let mut holds = true;
    let mut worst: f64 = 0.0;
    let mut devs = Vec::with_capacity(horizon as usize);
    for n in 1..=horizon {
        let mut next = vec![0u128; q];
        for (i, v) in counts.iter().enumerate() {
            next[(i + st) % q] += v;
            next[(i + q - st) % q] += v;
        }
        counts = next;
        let total = BigInt::one() << n;
        // |c/2^n - 1/q| = |q c - 2^n| / (q 2^n)
        let dev_num = counts
            .iter()
            .map(|v| (BigInt::from(*v) * c.q - &total).magnitude().clone())
            .max()
            .unwrap_or_default();
        let dev = Q::new(BigInt::from(dev_num), &total * c.q);
        let bound = exact::qpow(&rho_lo, n as i64);
        if dev > bound {
            holds = false;
        }
        if c.q > 1 {
            worst = worst.max(exact::to_f64(&dev) / rho.powi(n as i32));
        }
        devs.push(exact::fmt_ratio(&dev));
    }
    Ok(MixingCheck {
        q: c.q,
        p: c.p,
        horizon,
        holds,
        worst_ratio: worst,
        deviations: devs,
    })
}

fn check_nonresonant(s: &CosineSeries, c: &FiniteChain) -> Result<()> {
    let q = BigUint::from(c.q);
    if let Some(t) = s.terms().iter().find(|t| (t.freq() % &q).is_zero()) {
        return Err(Error::Resonant {
            freq: t.freq().to_string(),
        });
    }
    Ok(())
}

/// `(1/q) sum_i phi(x + i p / q)`; zero when no frequency is a multiple of
/// `q`.
pub fn stationary_mean(s: &CosineSeries, c: &FiniteChain, x: &Q) -> f64 {
    let total: f64 = (0..c.q)
        .map(|i| {
            let y = x + exact::qfrac(i as i64 * c.p, c.q as i64);
            s.eval(&crate::circle::CirclePoint::Exact(exact::frac(&y)))
        })
        .sum();
    total / c.q as f64
}

/// `K = int phi^2 + 2 A q ||phi||^2 / (1 - rho)`, so that the bound reads
/// `K / (delta^2 n^(2s-1))`.
fn lemma2_constant(s: &CosineSeries, c: &FiniteChain) -> Result<f64> {
    check_nonresonant(s, c)?;
    let mb = mixing_bound(c);
    let sup: f64 = s.terms().iter().map(|t| t.amp_f64()).sum();
    Ok(s.l2_norm_sq() + 2.0 * mb.a * c.q as f64 * sup * sup / (1.0 - mb.rho))
}

fn check_params(s_exp: f64, delta: f64) -> Result<()> {
    if !(s_exp > 0.5) || !s_exp.is_finite() {
        return Err(Error::InvalidInput("s must exceed 1/2".into()));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidInput("delta must be positive".into()));
    }
    Ok(())
}

/// Chebyshev bound on `P(|S_n| / n^s > delta)`.
pub fn lemma2_bound(s: &CosineSeries, c: &FiniteChain, n: u64, s_exp: f64, delta: f64) -> Result<f64> {
    check_params(s_exp, delta)?;
    if n == 0 {
        return Err(Error::InvalidInput("n must be >= 1".into()));
    }
    let k = lemma2_constant(s, c)?;
    Ok(k / (delta * delta * (n as f64).powf(2.0 * s_exp - 1.0)))
}

fn ln_bound(k: f64, n: &BigUint, s_exp: f64, delta: f64) -> f64 {
    k.ln() - 2.0 * delta.ln() - (2.0 * s_exp - 1.0) * exact::ln_big(n)
}

/// Least `n` with `lemma2_bound(n) < eps`, from the closed form
/// `n > (K / (eps delta^2))^(1 / (2s - 1))`, adjusted against the bound at
/// `n` and `n - 1`. Works in log space; the result may be astronomically
/// large.
pub fn lemma2_find_n(s: &CosineSeries, c: &FiniteChain, s_exp: f64, delta: f64, eps: f64) -> Result<BigUint> {
    check_params(s_exp, delta)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidInput("epsilon must be positive".into()));
    }
    let k = lemma2_constant(s, c)?;
    if k == 0.0 {
        return Ok(BigUint::one());
    }
    let ln_eps = eps.ln();
    let ln_root = (k.ln() - ln_eps - 2.0 * delta.ln()) / (2.0 * s_exp - 1.0);
    if ln_root <= 0.0 {
        return Ok(BigUint::one());
    }
    let mut n = exp_to_biguint(ln_root);
    let one = BigUint::one();
    while ln_bound(k, &n, s_exp, delta) >= ln_eps {
        n += &one;
    }
    while n > one && ln_bound(k, &(&n - &one), s_exp, delta) < ln_eps {
        n -= &one;
    }
    Ok(n)
}

/// `ceil(e^x)` as a big integer, correct to float precision.
fn exp_to_biguint(x: f64) -> BigUint {
    if x < 40.0 {
        return BigUint::from(x.exp().ceil() as u64);
    }
    // e^x = m * 2^k with m carrying 52 significant bits
    let log2 = x / std::f64::consts::LN_2;
    let k = log2.floor() as u64 - 52;
    let m = (log2 - k as f64).exp2();
    (BigUint::from(m.ceil() as u64)) << k
}

pub fn lemma2_required(s: &CosineSeries, c: &FiniteChain, s_exp: f64, delta: f64, eps: f64) -> Result<String> {
    lemma2_find_n(s, c, s_exp, delta, eps).map(|n| {
        let digits = n.to_string();
        if digits.len() > 30 {
            format!("~1e{}", digits.len() - 1)
        } else {
            digits
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{qfrac, qint};
    use num_traits::ToPrimitive;

    #[test]
    fn spectrum_examples() {
        let c = FiniteChain::new(3, 1).unwrap();
        let sp = chain_spectrum(&c);
        assert_eq!(sp[0], 1.0);
        assert!((sp[1] + 0.5).abs() < 1e-15 && (sp[2] + 0.5).abs() < 1e-15);
        assert!((mean_zero_radius(&c) - 0.5).abs() < 1e-15);
        let c5 = FiniteChain::new(5, 2).unwrap();
        let r = chain_spectrum(&c5)[1..]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((r - mean_zero_radius(&c5)).abs() < 1e-15);
        assert!((r - 0.809017).abs() < 1e-6);
        assert_eq!(chain_spectrum(&FiniteChain::new(1, 0).unwrap()), vec![1.0]);
    }

    #[test]
    fn rejects_bad_chains() {
        assert!(FiniteChain::new(4, 1).is_err());
        assert!(FiniteChain::new(9, 3).is_err());
        assert!(FiniteChain::new(0, 1).is_err());
        assert!(FiniteChain::new(9, -2).is_ok());
    }

    #[test]
    fn matrix_is_doubly_stochastic_and_symmetric() {
        let m = FiniteChain::new(7, 3).unwrap().matrix();
        for i in 0..7 {
            assert_eq!(m[i].iter().sum::<f64>(), 1.0);
            for j in 0..7 {
                assert_eq!(m[i][j], m[j][i]);
            }
        }
    }

    #[test]
    fn mixing_examples() {
        let c = FiniteChain::new(3, 1).unwrap();
        let chk = verify_mixing(&c, 64).unwrap();
        assert!(chk.holds);
        // n = 4: P^4 row 0 = (6, 5, 5)/16, deviation 1/24 <= 1/16
        assert_eq!(chk.deviations[3], "1/24");
        let one = verify_mixing(&FiniteChain::new(1, 0).unwrap(), 10).unwrap();
        assert!(one.deviations.iter().all(|d| d == "0"));
        assert!(verify_mixing(&FiniteChain::new(5, 1).unwrap(), 64).unwrap().holds);
    }

    #[test]
    fn stationary_mean_vanishes() {
        let c = FiniteChain::new(5, 2).unwrap();
        let s = CosineSeries::from_pairs(&[(1, qint(1)), (7, qfrac(1, 3))]).unwrap();
        for k in 0..20 {
            assert!(stationary_mean(&s, &c, &qfrac(k, 37)).abs() < 1e-14);
        }
    }

    #[test]
    fn lemma2_examples() {
        let s = CosineSeries::from_pairs(&[(1, qint(1))]).unwrap();
        let c = FiniteChain::new(3, 1).unwrap();
        let b = lemma2_bound(&s, &c, 10_000, 0.6, 0.25).unwrap();
        assert!((b - 12.5 * 16.0 / 10f64.powf(0.8)).abs() < 1e-9);
        let b2 = lemma2_bound(&s, &c, 10_000, 0.6, 0.5).unwrap();
        assert!((b / b2 - 4.0).abs() < 1e-12);
        assert!(lemma2_bound(&s, &c, 20_000, 0.6, 0.25).unwrap() < b);
        let res = CosineSeries::from_pairs(&[(6, qint(1))]).unwrap();
        assert!(matches!(
            lemma2_bound(&res, &c, 10, 0.6, 0.25),
            Err(Error::Resonant { .. })
        ));
    }

    #[test]
    fn lemma2_threshold() {
        let s = CosineSeries::from_pairs(&[(1, qint(1))]).unwrap();
        let c = FiniteChain::new(3, 1).unwrap();
        let n = lemma2_find_n(&s, &c, 0.6, 0.25, 1.0 / 24.0).unwrap();
        let v = n.to_u64().unwrap();
        assert!(lemma2_bound(&s, &c, v, 0.6, 0.25).unwrap() < 1.0 / 24.0);
        assert!(lemma2_bound(&s, &c, v - 1, 0.6, 0.25).unwrap() >= 1.0 / 24.0 * (1.0 - 1e-12));
        // closed form (12.5 * 16 * 24)^5 = 4800^5
        let root = 4800f64.powi(5);
        assert!((v as f64 / root - 1.0).abs() < 1e-9);
        assert_eq!(lemma2_find_n(&s, &c, 0.6, 0.25, 1e9).unwrap(), BigUint::one());
        // delta -> delta/2 multiplies N by 2^(2/(2s-1)) = 2^10
        let n2 = lemma2_find_n(&s, &c, 0.6, 0.125, 1.0 / 24.0).unwrap();
        let ratio = n2.to_f64().unwrap() / n.to_f64().unwrap();
        assert!((ratio - 1024.0).abs() < 1e-3);
    }
}
