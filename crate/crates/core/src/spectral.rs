//! Fourier-side diagnostics for the transfer operator
//! `T phi(x) = (phi(x + alpha) + phi(x - alpha)) / 2`.
//!
//! `T` is diagonal in the exponential basis with eigenvalue `cos(2 pi n alpha)`
//! on `e_n`. Everything here is computed from the eigenvalue
//! `lambda_n = 1 - cos(2 pi n alpha) = 2 sin^2(pi t)` where `t` is the centered
//! fractional part of `n alpha`, obtained exactly before the single float call.

use std::f64::consts::PI;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle::{cos_turns, CirclePoint};
use crate::diophantine::Angle;
use crate::error::{Error, Result};
use crate::exact::{self, centered_frac, qint, Q};
use crate::observable::CosineSeries;

/// Centered fractional part of `n alpha`, exact.
fn phase(n: &BigInt, a: &Angle) -> Q {
    centered_frac(&(a.representative() * qint(n.clone())))
}

fn lambda_from_phase(t: &Q) -> f64 {
    let s = (PI * exact::to_f64(t)).sin();
    2.0 * s * s
}

/// `1 - cos(2 pi n alpha)`.
pub fn eigenvalue(n: &BigInt, a: &Angle) -> f64 {
    lambda_from_phase(&phase(n, a))
}

pub fn eigenvalue_i64(n: i64, a: &Angle) -> f64 {
    eigenvalue(&BigInt::from(n), a)
}

/// True when `n alpha` is an integer, i.e. the eigenvalue vanishes exactly.
pub fn is_resonant(n: &BigInt, a: &Angle) -> bool {
    phase(n, a).is_zero()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignedTerm {
    pub freq: String,
    /// `|a_j cos(2 pi q_j alpha)|`.
    pub amp: f64,
    pub negative: bool,
    #[serde(skip)]
    freq_low: u128,
}

impl SignedTerm {
    pub fn value(&self) -> f64 {
        if self.negative {
            -self.amp
        } else {
            self.amp
        }
    }
}

/// Image `T phi`, again a cosine series but with possibly negative
/// coefficients, recorded as a sign flag per term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferredSeries {
    pub terms: Vec<SignedTerm>,
}

impl TransferredSeries {
    pub fn eval_fixed(&self, x: u128) -> f64 {
        self.terms
            .iter()
            .map(|t| t.value() * cos_turns(t.freq_low.wrapping_mul(x)))
            .sum()
    }

    pub fn eval(&self, x: &CirclePoint) -> f64 {
        self.eval_fixed(x.to_fixed())
    }
}

/// Term-wise action of `T`: `cos(2 pi q (x + alpha)) + cos(2 pi q (x - alpha))`
/// collapses to `2 cos(2 pi q alpha) cos(2 pi q x)`.
pub fn transfer_apply(s: &CosineSeries, a: &Angle) -> TransferredSeries {
    let terms = s
        .terms()
        .iter()
        .map(|t| {
            let ph = phase(&BigInt::from(t.freq().clone()), a);
            let c = cos_turns(exact::to_fixed(&ph));
            let v = t.amp_f64() * c;
            SignedTerm {
                freq: t.freq().to_string(),
                amp: v.abs(),
                negative: v < 0.0,
                freq_low: t.freq_low(),
            }
        })
        .collect();
    TransferredSeries { terms }
}

/// `T phi(x)` straight from the definition, evaluating `phi` at `x ± alpha`.
pub fn apply_direct(s: &CosineSeries, a: &Angle, x: &CirclePoint) -> f64 {
    let al = a.point();
    0.5 * s.eval(&x.add(&al)) + 0.5 * s.eval(&x.add(&al.neg()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonSolution {
    /// `(n, psi_hat(n))` for positive `n`; `psi_hat(-n) = psi_hat(n)`.
    pub psi_coeffs: Vec<(String, f64)>,
    pub cutoff: Option<String>,
    /// Float error bound on the sup-norm of `(T - I) psi + phi`.
    pub residual_bound: f64,
    #[serde(skip)]
    lows: Vec<u128>,
}

impl PoissonSolution {
    pub fn is_empty(&self) -> bool {
        self.psi_coeffs.is_empty()
    }

    /// `psi(x) = sum 2 psi_hat(n) cos(2 pi n x)`.
    pub fn eval_fixed(&self, x: u128) -> f64 {
        self.psi_coeffs
            .iter()
            .zip(&self.lows)
            .map(|((_, c), q)| 2.0 * c * cos_turns(q.wrapping_mul(x)))
            .sum()
    }

    pub fn as_series_coeffs(&self) -> impl Iterator<Item = (u128, f64)> + '_ {
        self.lows.iter().copied().zip(self.psi_coeffs.iter().map(|(_, c)| 2.0 * c))
    }
}

fn within(t: &crate::observable::Term, cutoff: Option<&BigUint>) -> bool {
    cutoff.is_none_or(|n| t.freq() <= n)
}

/// Solves `(I - T) psi = phi` coefficient-wise: `psi_hat(n) = phi_hat(n) /
/// lambda_n` for `0 < |n| <= N`, `psi_hat(0) = 0`.
pub fn poisson_solve(s: &CosineSeries, a: &Angle, cutoff: Option<&BigUint>) -> Result<PoissonSolution> {
    let mut psi = Vec::new();
    let mut lows = Vec::new();
    let mut err = 0.0;
    for t in s.terms().iter().filter(|t| within(t, cutoff)) {
        let n = BigInt::from(t.freq().clone());
        let ph = phase(&n, a);
        if ph.is_zero() {
            return Err(Error::Resonant {
                freq: t.freq().to_string(),
            });
        }
        let lam = lambda_from_phase(&ph);
        let c = t.amp_f64() / 2.0 / lam;
        // float error of psi_hat, of the trig evaluations, and of the sums
        err += 8.0 * f64::EPSILON * (t.amp_f64() + 4.0 * c.abs());
        psi.push((t.freq().to_string(), c));
        lows.push(t.freq_low());
    }
    Ok(PoissonSolution {
        psi_coeffs: psi,
        cutoff: cutoff.map(|n| n.to_string()),
        residual_bound: err,
        lows,
    })
}

/// `sup |(T - I) psi + phi|` over the grid of `m` midpoints, with `T psi`
/// evaluated from the definition at `x ± alpha`.
pub fn poisson_residual(s: &CosineSeries, a: &Angle, sol: &PoissonSolution, m: u64) -> f64 {
    let al = a.point().to_fixed();
    (0..m)
        .into_par_iter()
        .map(|i| {
            let x = exact::to_fixed(&exact::qfrac(2 * i as i64 + 1, 2 * m as i64));
            let t_psi = 0.5 * sol.eval_fixed(x.wrapping_add(al)) + 0.5 * sol.eval_fixed(x.wrapping_sub(al));
            (t_psi - sol.eval_fixed(x) + s.eval_fixed(x)).abs()
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralRow {
    pub n: String,
    pub eigenvalue: f64,
    /// Contributions of `±n` together.
    pub kv_term: f64,
    pub poisson_term: f64,
    pub sigma2_term: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub angle: Angle,
    pub series: CosineSeries,
    pub cutoff: Option<String>,
    pub kv_partial: f64,
    pub poisson_partial: f64,
    pub sigma2_partial: f64,
    pub rows: Vec<SpectralRow>,
}

fn rows(s: &CosineSeries, a: &Angle, cutoff: Option<&BigUint>) -> Result<Vec<SpectralRow>> {
    let terms: Vec<_> = s.terms().iter().filter(|t| within(t, cutoff)).collect();
    terms
        .par_iter()
        .map(|t| {
            let ph = phase(&BigInt::from(t.freq().clone()), a);
            if ph.is_zero() {
                return Err(Error::Resonant {
                    freq: t.freq().to_string(),
                });
            }
            let lam = lambda_from_phase(&ph);
            let mass = 2.0 * (t.amp_f64() / 2.0).powi(2);
            Ok(SpectralRow {
                n: t.freq().to_string(),
                eigenvalue: lam,
                kv_term: mass / lam,
                poisson_term: mass / (lam * lam),
                sigma2_term: mass * (2.0 - lam) / lam,
            })
        })
        .collect()
}

pub fn spectral_report(s: &CosineSeries, a: &Angle, cutoff: Option<&BigUint>) -> Result<SpectralReport> {
    let rows = rows(s, a, cutoff)?;
    // fixed frequency order keeps the sums bit-reproducible
    let kv = rows.iter().map(|r| r.kv_term).sum();
    let poisson = rows.iter().map(|r| r.poisson_term).sum();
    let sigma2 = rows.iter().map(|r| r.sigma2_term).sum();
    Ok(SpectralReport {
        angle: a.clone(),
        series: s.clone(),
        cutoff: cutoff.map(|n| n.to_string()),
        kv_partial: kv,
        poisson_partial: poisson,
        sigma2_partial: sigma2,
        rows,
    })
}

/// `sum_{0<|n|<=N} |phi_hat(n)|^2 / lambda_n`.
pub fn kv_partial(s: &CosineSeries, a: &Angle, cutoff: Option<&BigUint>) -> Result<f64> {
    Ok(rows(s, a, cutoff)?.iter().map(|r| r.kv_term).sum())
}

/// `sum_{0<|n|<=N} |phi_hat(n)|^2 / lambda_n^2 = ||psi||_2^2`.
pub fn poisson_partial(s: &CosineSeries, a: &Angle, cutoff: Option<&BigUint>) -> Result<f64> {
    Ok(rows(s, a, cutoff)?.iter().map(|r| r.poisson_term).sum())
}

/// `sum_{0<|n|<=N} (1 + cos 2 pi n alpha) / (1 - cos 2 pi n alpha) |phi_hat(n)|^2`.
pub fn sigma2_partial(s: &CosineSeries, a: &Angle, cutoff: Option<&BigUint>) -> Result<f64> {
    Ok(rows(s, a, cutoff)?.iter().map(|r| r.sigma2_term).sum())
}

/// KV partial sums at each cutoff, for growth scans along convergent
/// denominators.
pub fn kv_scan(s: &CosineSeries, a: &Angle, cutoffs: &[BigUint]) -> Result<Vec<(String, f64)>> {
    let rows = rows(s, a, None)?;
    let mut out = Vec::with_capacity(cutoffs.len());
    for n in cutoffs {
        let v = s
            .terms()
            .iter()
            .zip(&rows)
            .filter(|(t, _)| t.freq() <= n)
            .map(|(_, r)| r.kv_term)
            .sum();
        out.push((n.to_string(), v));
    }
    Ok(out)
}

impl SpectralReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,eigenvalue,kv_term,sigma2_term\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:e},{:e},{:e}\n",
                r.n, r.eigenvalue, r.kv_term, r.sigma2_term
            ));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regularity {
    Finite(u32),
    Infinite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop1Verdict {
    pub holds: bool,
    /// `2r - 2(gamma - 1)`: the summand is at most `K n^-exponent`.
    pub exponent: Option<f64>,
    /// `1 / (8 c^2)`: `K = ||phi^(r)||^2 / (2 pi)^(2r) * factor`.
    pub factor: f64,
    /// `exponent - 1`, positive exactly when the criterion holds.
    pub margin: Option<f64>,
}

/// Finite regularity `r` and Diophantine type `(c, gamma)` give
/// `|phi_hat(n)| <= C n^-r` and `1 - cos(2 pi n alpha) >= 8 c^2 n^(-2(gamma-1))`
/// (from `1 - cos t >= 2 t^2 / pi^2` on `|t| <= pi`), so the KV summand is at
/// most `C^2 / (8 c^2) n^(2(gamma-1) - 2r)`.
pub fn prop1_criterion(r: Regularity, gamma: f64, c: f64) -> Result<Prop1Verdict> {
    if gamma < 2.0 || c <= 0.0 || !gamma.is_finite() || !c.is_finite() {
        return Err(Error::InvalidInput("need gamma >= 2 and c > 0".into()));
    }
    let factor = 1.0 / (8.0 * c * c);
    Ok(match r {
        Regularity::Infinite => Prop1Verdict {
            holds: true,
            exponent: None,
            factor,
            margin: None,
        },
        Regularity::Finite(r) => {
            let e = 2.0 * r as f64 - 2.0 * (gamma - 1.0);
            let holds = r as f64 > gamma - 0.5;
            Prop1Verdict {
                holds,
                exponent: holds.then_some(e),
                factor,
                margin: holds.then_some(e - 1.0),
            }
        }
    })
}
