//! Monte Carlo for the chain `Y_{i+1} = Y_i ± alpha` and its additive
//! functional `S_n = phi(Y_1) + ... + phi(Y_n)`.
//!
//! Trial `k` draws from a ChaCha8 stream keyed by `(seed, k)`: two words give
//! the start `x` as a 128-bit fixed-point fraction, the following words give
//! the `n - 1` signs (bit set means `+1`), least significant bit first.
//! Positions are `x + W_i alpha` with integer displacements `W_i`; nothing is
//! accumulated in floating point.
//!
//! The fast sum uses `S_n = Re sum_j a_j e(q_j x) Z_j` with
//! `Z_j = sum_i e(W_i beta_j)` and `beta_j = q_j alpha mod 1` reduced exactly.
//! Signs are consumed a byte at a time: for a block of eight steps starting
//! at displacement `w`, the block contributes `e(w beta) T[b]` where `T[b]`
//! is a 256-entry table indexed by the sign byte.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circle::{cos_turns, fixed_to_f64, sin_turns, CirclePoint};
use crate::diophantine::Angle;
use crate::error::{Error, Result};
use crate::exact::{self, qfrac, Q};
use crate::observable::CosineSeries;
use crate::stats::{self, Interval};

pub const CONFIDENCE: f64 = 0.99;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub angle: Angle,
    pub steps: u64,
    pub trials: u64,
    #[serde(with = "exact::serde_q")]
    pub s: Q,
    pub seed: u64,
}

impl WalkConfig {
    pub fn new(angle: Angle, steps: u64, trials: u64, s: Q, seed: u64) -> Result<Self> {
        let cfg = WalkConfig {
            angle,
            steps,
            trials,
            s,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 || self.trials == 0 {
            return Err(Error::InvalidInput("steps and trials must be >= 1".into()));
        }
        if self.s <= qfrac(1, 2) || self.s > Q::from_integer(1.into()) {
            return Err(Error::InvalidInput(format!(
                "scaling exponent must lie in (1/2, 1], got {}",
                exact::fmt_ratio(&self.s)
            )));
        }
        Ok(())
    }

    pub fn scale(&self) -> f64 {
        (self.steps as f64).powf(exact::to_f64(&self.s))
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("serializable config");
        hex::encode(Sha256::digest(&json))
    }
}

fn stream(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn draw_start(rng: &mut ChaCha8Rng) -> u128 {
    let lo = rng.next_u64() as u128;
    let hi = rng.next_u64() as u128;
    lo | (hi << 64)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    pub start: u128,
    /// `W_1 = 0, W_{i+1} = W_i ± 1`.
    pub displacements: Vec<i64>,
}

impl Trajectory {
    pub fn position(&self, i: usize, alpha: &CirclePoint) -> CirclePoint {
        let w = self.displacements[i];
        let a = alpha.to_fixed();
        CirclePoint::Fixed(self.start.wrapping_add((w as i128 as u128).wrapping_mul(a)))
    }
}

/// The path of trial `trial`, decoded from its stream.
pub fn trajectory(cfg: &WalkConfig, trial: u64) -> Trajectory {
    let mut rng = stream(cfg.seed, trial);
    let start = draw_start(&mut rng);
    let mut w = 0i64;
    let mut out = Vec::with_capacity(cfg.steps as usize);
    out.push(0);
    let mut word = 0u64;
    for k in 0..cfg.steps - 1 {
        if k % 64 == 0 {
            word = rng.next_u64();
        }
        w += if (word >> (k % 64)) & 1 == 1 { 1 } else { -1 };
        out.push(w);
    }
    Trajectory {
        start,
        displacements: out,
    }
}

#[inline]
fn e_turns(v: u128) -> (f64, f64) {
    (cos_turns(v), sin_turns(v))
}

#[inline]
fn wmul(w: i64, beta: u128) -> u128 {
    (w as i128 as u128).wrapping_mul(beta)
}

struct KTerm {
    amp: f64,
    q_low: u128,
    beta: u128,
    wmax: i64,
    powers: Vec<(f64, f64)>,
    blocks: Vec<(f64, f64)>,
}

impl KTerm {
    #[inline]
    fn power(&self, w: i64) -> (f64, f64) {
        if w.abs() <= self.wmax {
            self.powers[(w + self.wmax) as usize]
        } else {
            e_turns(wmul(w, self.beta))
        }
    }
}

/// Precomputed tables for one (series, angle, n).
pub struct Kernel {
    terms: Vec<KTerm>,
    steps: u64,
}

const BLOCK_SHIFT: [i64; 256] = {
    let mut t = [0i64; 256];
    let mut b = 0;
    while b < 256 {
        t[b] = 2 * (b as u32).count_ones() as i64 - 8;
        b += 1;
    }
    t
};

impl Kernel {
    pub fn new(series: &CosineSeries, angle: &Angle, steps: u64) -> Kernel {
        let alpha = angle.point();
        let wmax = ((8.0 * (steps as f64).sqrt()) as i64 + 64).min(steps as i64);
        let terms = series
            .terms()
            .iter()
            .map(|t| {
                let beta = alpha.times_fixed(t.freq());
                let powers = (-wmax..=wmax).map(|w| e_turns(wmul(w, beta))).collect();
                let blocks = (0..256u32)
                    .map(|b| {
                        let (mut re, mut im, mut o) = (0.0, 0.0, 0i64);
                        for k in 0..8 {
                            o += if (b >> k) & 1 == 1 { 1 } else { -1 };
                            let (c, s) = e_turns(wmul(o, beta));
                            re += c;
                            im += s;
                        }
                        (re, im)
                    })
                    .collect();
                KTerm {
                    amp: t.amp_f64(),
                    q_low: t.freq_low(),
                    beta,
                    wmax,
                    powers,
                    blocks,
                }
            })
            .collect();
        Kernel { terms, steps }
    }

    /// `S_n` for trial `trial`.
    pub fn sum(&self, seed: u64, trial: u64) -> f64 {
        let mut rng = stream(seed, trial);
        let x = draw_start(&mut rng);
        if self.terms.is_empty() {
            return 0.0;
        }
        let nt = self.terms.len();
        let mut z = vec![(1.0f64, 0.0f64); nt];
        let moves = self.steps - 1;
        let blocks = moves / 8;
        let rest = (moves % 8) as u32;
        let mut w = 0i64;
        let mut word = 0u64;
        for k in 0..blocks {
            if k % 8 == 0 {
                word = rng.next_u64();
            }
            let b = ((word >> (8 * (k % 8))) & 0xff) as usize;
            for (t, acc) in self.terms.iter().zip(z.iter_mut()) {
                let (pr, pi) = t.power(w);
                let (br, bi) = t.blocks[b];
                acc.0 += pr * br - pi * bi;
                acc.1 += pr * bi + pi * br;
            }
            w += BLOCK_SHIFT[b];
        }
        if rest > 0 {
            // the remaining signs start a fresh byte, possibly a fresh word
            if blocks % 8 == 0 {
                word = rng.next_u64();
            }
            let b = (word >> (8 * (blocks % 8))) & 0xff;
            for k in 0..rest {
                w += if (b >> k) & 1 == 1 { 1 } else { -1 };
                for (t, acc) in self.terms.iter().zip(z.iter_mut()) {
                    let (pr, pi) = t.power(w);
                    acc.0 += pr;
                    acc.1 += pi;
                }
            }
        }
        let mut s = 0.0;
        for (t, acc) in self.terms.iter().zip(&z) {
            let (c, sn) = e_turns(t.q_low.wrapping_mul(x));
            s += t.amp * (c * acc.0 - sn * acc.1);
        }
        s
    }
}

/// Decodes the same stream as [`Kernel::sum`] but evaluates `phi` position by
/// position. Used to cross-check the block algorithm.
pub fn simulate_sum_direct(cfg: &WalkConfig, series: &CosineSeries, trial: u64) -> f64 {
    let mut rng = stream(cfg.seed, trial);
    let x = draw_start(&mut rng);
    let alpha = cfg.angle.point();
    let betas: Vec<(f64, u128, u128)> = series
        .terms()
        .iter()
        .map(|t| (t.amp_f64(), t.freq_low().wrapping_mul(x), alpha.times_fixed(t.freq())))
        .collect();
    let phi = |w: i64| -> f64 {
        betas
            .iter()
            .map(|(a, qx, b)| a * cos_turns(qx.wrapping_add(wmul(w, *b))))
            .sum()
    };
    let mut total = phi(0);
    let moves = cfg.steps - 1;
    let mut w = 0i64;
    let mut word = 0u64;
    for k in 0..moves {
        // byte-aligned like the block decoder: 8 signs per byte, 8 bytes per word
        if k % 64 == 0 {
            word = rng.next_u64();
        }
        w += if (word >> (k % 64)) & 1 == 1 { 1 } else { -1 };
        total += phi(w);
    }
    total
}

pub fn simulate_sum(cfg: &WalkConfig, series: &CosineSeries, trial: u64) -> f64 {
    Kernel::new(series, &cfg.angle, cfg.steps).sum(cfg.seed, trial)
}

/// `S_n` for every trial, in trial order, independent of the thread count.
pub fn simulate_all(cfg: &WalkConfig, series: &CosineSeries) -> Vec<f64> {
    let kernel = Kernel::new(series, &cfg.angle, cfg.steps);
    (0..cfg.trials)
        .into_par_iter()
        .map(|k| kernel.sum(cfg.seed, k))
        .collect()
}

pub fn trials_csv(cfg: &WalkConfig, sums: &[f64]) -> String {
    let scale = cfg.scale();
    let mut out = String::from("trial,s_n,s_n_scaled\n");
    for (k, v) in sums.iter().enumerate() {
        out.push_str(&format!("{k},{v:e},{:e}\n", v / scale));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// `S_n / n^s > t`
    Upper,
    /// `|S_n| / n^s > t`
    TwoSided,
}

impl Tail {
    #[inline]
    fn hit(self, v: f64, t: f64) -> bool {
        match self {
            Tail::Upper => v > t,
            Tail::TwoSided => v.abs() > t,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub threshold: f64,
    pub tail: Tail,
    pub estimate: f64,
    pub interval: Interval,
    pub hits: u64,
    pub trials: u64,
    pub steps: u64,
    pub seed: u64,
    pub config_hash: String,
}

impl TailEstimate {
    pub fn stderr(&self) -> f64 {
        (self.estimate * (1.0 - self.estimate) / self.trials as f64).sqrt()
    }
}

pub fn tail_from_sums(cfg: &WalkConfig, sums: &[f64], t: f64, tail: Tail) -> TailEstimate {
    let scale = cfg.scale();
    let hits = sums.iter().filter(|v| tail.hit(**v / scale, t)).count() as u64;
    let m = sums.len() as u64;
    TailEstimate {
        threshold: t,
        tail,
        estimate: hits as f64 / m as f64,
        interval: stats::wilson(hits, m, CONFIDENCE),
        hits,
        trials: m,
        steps: cfg.steps,
        seed: cfg.seed,
        config_hash: cfg.hash(),
    }
}

/// `P(S_n / n^s > t)` with a 99% Wilson interval.
pub fn mc_tail(cfg: &WalkConfig, series: &CosineSeries, t: f64) -> Result<TailEstimate> {
    mc_tail_with(cfg, series, t, Tail::Upper)
}

pub fn mc_tail_with(cfg: &WalkConfig, series: &CosineSeries, t: f64, tail: Tail) -> Result<TailEstimate> {
    cfg.validate()?;
    if cfg.trials < 100 {
        return Err(Error::InvalidInput("tail estimates need at least 100 trials".into()));
    }
    if !t.is_finite() {
        return Err(Error::NonFinite(t));
    }
    let sums = simulate_all(cfg, series);
    Ok(tail_from_sums(cfg, &sums, t, tail))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub sigma: f64,
    pub mean: f64,
    pub variance: f64,
    pub ks: f64,
    pub ks_critical: f64,
    pub ks_pass: bool,
    pub degenerate: bool,
    pub trials: u64,
    pub steps: u64,
    pub seed: u64,
    pub config_hash: String,
}

/// Distribution of `S_n / sqrt(n)` against `Normal(0, sigma^2)`.
pub fn mc_clt(cfg: &WalkConfig, series: &CosineSeries, sigma: f64) -> Result<CltReport> {
    cfg.validate()?;
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Degenerate(
            "sigma must be positive; compute it with the spectral sigma^2 partial sum".into(),
        ));
    }
    let root = (cfg.steps as f64).sqrt();
    let xs: Vec<f64> = simulate_all(cfg, series).iter().map(|v| v / root).collect();
    let (mean, variance) = stats::mean_var(&xs);
    let ks = stats::ks_normal(&xs, sigma);
    let crit = stats::ks_critical_5(xs.len());
    Ok(CltReport {
        sigma,
        mean,
        variance,
        ks,
        ks_critical: crit,
        ks_pass: ks < crit,
        degenerate: xs.iter().all(|v| *v == 0.0),
        trials: cfg.trials,
        steps: cfg.steps,
        seed: cfg.seed,
        config_hash: cfg.hash(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactTail {
    pub probability: f64,
    pub quadrature: u64,
    /// Bound on the midpoint-rule error.
    pub error_bound: f64,
    pub paths: u64,
}

pub const MAX_EXACT_STEPS: u32 = 20;

/// Default quadrature: each path's `S_n(x)` is a trigonometric polynomial of
/// degree `max q_j`, so its level set has at most `2 max q_j` boundary
/// points and the midpoint error is at most `2 max q_j / M`. `M` is chosen
/// so this is below `1e-3`.
pub fn default_quadrature(series: &CosineSeries) -> u64 {
    let q = series.max_freq().and_then(|q| q.to_u64()).unwrap_or(1);
    (2000 * q + 1).max(2048)
}

/// `P(S_n / n^s > t)` (or the two-sided event) by enumerating all `2^(n-1)`
/// sign paths and averaging over `M` midpoints `(i + 1/2) / M`.
pub fn exact_tail(
    series: &CosineSeries,
    angle: &Angle,
    n: u32,
    t: f64,
    s_exp: f64,
    quadrature: Option<u64>,
    tail: Tail,
) -> Result<ExactTail> {
    if n == 0 || n > MAX_EXACT_STEPS {
        return Err(Error::InvalidInput(format!(
            "exact enumeration needs 1 <= n <= {MAX_EXACT_STEPS}"
        )));
    }
    let m = quadrature.unwrap_or_else(|| default_quadrature(series));
    if m < 2048 {
        return Err(Error::InvalidInput("quadrature needs M >= 2048".into()));
    }
    let span = (n - 1) as i64;
    let width = (2 * span + 1) as usize;
    // table[w][i] = phi(x_i + w alpha), with q x_i and w q alpha reduced
    // exactly before the float cosine
    let rep = angle.representative();
    let two_m = BigUint::from(2 * m);
    let mut table = vec![vec![0.0f64; m as usize]; width];
    for term in series.terms() {
        let a = term.amp_f64();
        let qm = (term.freq() % &two_m).to_u64().expect("below 2M") as u128;
        let qa = &rep * Q::from_integer(term.freq().clone().into());
        for (row, w) in table.iter_mut().zip(-span..=span) {
            let shift = exact::to_f64(&exact::frac(&(&qa * Q::from_integer(w.into()))));
            for (i, cell) in row.iter_mut().enumerate() {
                let r = (qm * (2 * i as u128 + 1)) % (2 * m as u128);
                let ph = r as f64 / (2 * m) as f64 + shift;
                *cell += a * (std::f64::consts::TAU * ph).cos();
            }
        }
    }
    let scale = (n as f64).powf(s_exp);
    let row = |w: i64| &table[(w + span) as usize];
    // split the first few signs across workers; counts are integers so the
    // total does not depend on the schedule
    let split = (n - 1).min(6);
    let hits: u64 = (0..1u64 << split)
        .into_par_iter()
        .map(|prefix| {
            let mut acc = row(0).clone();
            let mut w = 0i64;
            for k in 0..split {
                w += if (prefix >> k) & 1 == 1 { 1 } else { -1 };
                for (a, v) in acc.iter_mut().zip(row(w)) {
                    *a += v;
                }
            }
            let mut stack = vec![acc; 1];
            count_paths(&mut stack, w, n - 1 - split, &row, scale, t, tail)
        })
        .sum();
    let paths = 1u64 << (n - 1);
    let q = series.max_freq().and_then(|q| q.to_f64()).unwrap_or(0.0);
    Ok(ExactTail {
        probability: hits as f64 / (paths as f64 * m as f64),
        quadrature: m,
        error_bound: 2.0 * q / m as f64,
        paths,
    })
}

fn count_paths<'a>(
    stack: &mut Vec<Vec<f64>>,
    w: i64,
    left: u32,
    row: &impl Fn(i64) -> &'a Vec<f64>,
    scale: f64,
    t: f64,
    tail: Tail,
) -> u64 {
    let top = stack.last().expect("non-empty");
    if left == 0 {
        return top.iter().filter(|v| tail.hit(**v / scale, t)).count() as u64;
    }
    let mut hits = 0;
    for d in [-1i64, 1] {
        let next: Vec<f64> = stack
            .last()
            .unwrap()
            .iter()
            .zip(row(w + d))
            .map(|(a, b)| a + b)
            .collect();
        stack.push(next);
        hits += count_paths(stack, w + d, left - 1, row, scale, t, tail);
        stack.pop();
    }
    hits
}

/// `Y_i` (0-based `i`) for the first `trials` trials, for stationarity checks.
pub fn positions_at(cfg: &WalkConfig, i: usize, trials: u64) -> Vec<f64> {
    let alpha = cfg.angle.point();
    (0..trials)
        .into_par_iter()
        .map(|k| fixed_to_f64(trajectory(cfg, k).position(i, &alpha).to_fixed()))
        .collect()
}
