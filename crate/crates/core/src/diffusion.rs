//! Anomalous diffusion: symmetric stable samplers, continuous-time random walks and the
//! spectral propagator of the space-time fractional diffusion equation
//!
//! ```text
//! d^{1-mu} u / dt^{1-mu} + gamma (-Delta)^{beta/2} u = 0.
//! ```
//!
//! Walkers alternate waits and jumps. Jumps are symmetric `beta`-stable (optionally
//! truncated); waits are unit-mean exponential for `mu = 0` and one-sided stable of order
//! `1 - mu` otherwise. The width of the ensemble then grows as `t^eta` with
//! `eta = 2 (1 - mu) / beta`, which [`width_exponent`] estimates from fractional moments.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::{Exp1, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::ols;
use crate::error::{Error, Result};
use crate::grid::SpectralField;
use crate::mittag_leffler::mittag_leffler;
use crate::operators::symbol_unchecked;
use crate::rng::{particle_rng, seeded, stream};
use crate::scaling::FractionalOrders;

pub const DEFAULT_OBSERVATIONS: usize = 31;
/// Observation times span `[t_max * OBSERVATION_SPAN, t_max]`.
pub const OBSERVATION_SPAN: f64 = 1e-3;
/// Decades trimmed from each end of the observation grid before fitting.
pub const FIT_TRIM_DECADES: f64 = 0.5;
/// Truncated runs default to a cutoff whose crossover time is this multiple of `t_max`.
pub const CROSSOVER_MARGIN: f64 = 100.0;
pub const MIN_ACCEPTANCE: f64 = 1e-3;

const ACCEPTANCE_CHECK_EVERY: u64 = 10_000;

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 && beta <= 2.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("beta must lie in (0, 2], got {beta}")))
    }
}

/// One symmetric `beta`-stable variate with characteristic function `exp(-|k|^beta)`
/// (Chambers-Mallows-Stuck).
pub fn levy_stable<R: Rng + ?Sized>(rng: &mut R, beta: f64) -> f64 {
    let v = rng.sample(Uniform::new(-FRAC_PI_2, FRAC_PI_2));
    if beta == 1.0 {
        return v.tan();
    }
    let w: f64 = rng.sample(Exp1);
    if beta == 2.0 {
        return 2.0 * v.sin() * w.sqrt();
    }
    (beta * v).sin() / v.cos().powf(1.0 / beta)
        * ((v * (1.0 - beta)).cos() / w).powf((1.0 - beta) / beta)
}

/// One positive stable variate of order `alpha` with Laplace transform `exp(-s^alpha)`
/// (Kanter).
pub fn positive_stable<R: Rng + ?Sized>(rng: &mut R, alpha: f64) -> f64 {
    let u = rng.sample(Uniform::new(0.0, PI));
    let w: f64 = rng.sample(Exp1);
    (alpha * u).sin() / u.sin().powf(1.0 / alpha)
        * (((1.0 - alpha) * u).sin() / w).powf((1.0 - alpha) / alpha)
}

pub fn sample_levy_stable(beta: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    check_beta(beta)?;
    let mut rng = seeded(seed, stream::SAMPLER);
    Ok((0..n).map(|_| levy_stable(&mut rng, beta)).collect())
}

/// Stable draws conditioned on `|x| <= cutoff`, by rejection.
struct TruncatedStable {
    beta: f64,
    cutoff: f64,
    attempts: u64,
    accepted: u64,
}

impl TruncatedStable {
    fn new(beta: f64, cutoff: f64) -> Result<Self> {
        check_beta(beta)?;
        if !(cutoff > 0.0) {
            return Err(Error::domain(format!("cutoff must be > 0, got {cutoff}")));
        }
        Ok(Self {
            beta,
            cutoff,
            attempts: 0,
            accepted: 0,
        })
    }

    fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<f64> {
        loop {
            let x = levy_stable(rng, self.beta);
            self.attempts += 1;
            if x.abs() <= self.cutoff {
                self.accepted += 1;
                return Ok(x);
            }
            if self.attempts % ACCEPTANCE_CHECK_EVERY == 0
                && (self.accepted as f64) < MIN_ACCEPTANCE * self.attempts as f64
            {
                return Err(Error::Config(format!(
                    "truncated stable sampler accepted {} of {} draws (beta={}, cutoff={}); raise the cutoff",
                    self.accepted, self.attempts, self.beta, self.cutoff
                )));
            }
        }
    }
}

pub fn sample_truncated_levy(beta: f64, cutoff: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    let mut sampler = TruncatedStable::new(beta, cutoff)?;
    let mut rng = seeded(seed, stream::SAMPLER);
    (0..n).map(|_| sampler.draw(&mut rng)).collect()
}

fn check_mu(mu: f64) -> Result<()> {
    if mu.is_finite() && (0.0..1.0).contains(&mu) {
        Ok(())
    } else {
        Err(Error::domain(format!("mu must lie in [0, 1), got {mu}")))
    }
}

fn waiting_time<R: Rng + ?Sized>(rng: &mut R, mu: f64) -> f64 {
    if mu == 0.0 {
        rng.sample(Exp1)
    } else {
        positive_stable(rng, 1.0 - mu)
    }
}

pub fn sample_waiting_time(mu: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    check_mu(mu)?;
    let mut rng = seeded(seed, stream::SAMPLER);
    Ok((0..n).map(|_| waiting_time(&mut rng, mu)).collect())
}

/// Time after which truncated jumps have summed into the Gaussian regime: the cutoff
/// is reached by the typical displacement `N(t)^{1/beta}` with `N(t) ~ t^{1-mu}` jumps.
pub fn crossover_time(orders: FractionalOrders, cutoff: f64) -> f64 {
    cutoff.powf(orders.beta() / (1.0 - orders.mu()))
}

/// Cutoff that keeps the crossover [`CROSSOVER_MARGIN`] times beyond `t_max`.
pub fn default_cutoff(orders: FractionalOrders, t_max: f64) -> f64 {
    (CROSSOVER_MARGIN * t_max).powf((1.0 - orders.mu()) / orders.beta())
}

pub fn observation_times(t_max: f64, count: usize) -> Vec<f64> {
    let lo = (t_max * OBSERVATION_SPAN).ln();
    let hi = t_max.ln();
    (0..count)
        .map(|i| {
            if i + 1 == count {
                t_max
            } else {
                (lo + (hi - lo) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleEnsemble {
    pub n_particles: usize,
    pub observation_times: Vec<f64>,
    /// Particle-major: `positions[p * times + i]` is particle `p` at time `i`.
    pub positions: Vec<f64>,
    pub seed: u64,
    pub orders: FractionalOrders,
    pub truncation: Option<f64>,
}

impl ParticleEnsemble {
    pub fn new(
        orders: FractionalOrders,
        observation_times: Vec<f64>,
        positions: Vec<f64>,
        seed: u64,
        truncation: Option<f64>,
    ) -> Result<Self> {
        let times = observation_times.len();
        if times == 0 || positions.len() % times != 0 {
            return Err(Error::usage(format!(
                "{} positions do not fill {} observation times",
                positions.len(),
                times
            )));
        }
        if observation_times.windows(2).any(|w| !(w[0] < w[1])) || !(observation_times[0] > 0.0) {
            return Err(Error::usage("observation times must be positive and strictly increasing"));
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::usage("positions must be finite"));
        }
        Ok(Self {
            n_particles: positions.len() / times,
            observation_times,
            positions,
            seed,
            orders,
            truncation,
        })
    }

    pub fn trajectory(&self, particle: usize) -> &[f64] {
        let t = self.observation_times.len();
        &self.positions[particle * t..(particle + 1) * t]
    }

    /// Positions of every particle at observation `i`.
    pub fn at(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        let t = self.observation_times.len();
        self.positions.iter().skip(i).step_by(t).copied()
    }
}

fn walk(
    orders: FractionalOrders,
    times: &[f64],
    seed: u64,
    particle: usize,
    truncation: Option<f64>,
) -> Result<Vec<f64>> {
    let mut rng = particle_rng(seed, particle as u64);
    let mut jumps = match truncation {
        Some(c) => Some(TruncatedStable::new(orders.beta(), c)?),
        None => None,
    };
    let mut out = Vec::with_capacity(times.len());
    let (mut t, mut x) = (0.0, 0.0);
    while out.len() < times.len() {
        t += waiting_time(&mut rng, orders.mu());
        while out.len() < times.len() && times[out.len()] < t {
            out.push(x);
        }
        x += match jumps.as_mut() {
            Some(j) => j.draw(&mut rng)?,
            None => levy_stable(&mut rng, orders.beta()),
        };
    }
    Ok(out)
}

/// Simulate `n_particles` walkers from the origin, observed on [`observation_times`].
///
/// Jumps must be truncated when `beta < 2`; pass [`default_cutoff`] for a scaling
/// window covering the whole run. Every particle draws from its own random stream, so
/// results do not depend on the rayon thread count.
pub fn ctrw_simulate(
    orders: FractionalOrders,
    n_particles: usize,
    t_max: f64,
    seed: u64,
    truncation: Option<f64>,
) -> Result<ParticleEnsemble> {
    if n_particles == 0 {
        return Err(Error::usage("n_particles must be >= 1"));
    }
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::usage(format!("t_max must be > 0, got {t_max}")));
    }
    if orders.beta() < 2.0 && truncation.is_none() {
        return Err(Error::usage(
            "jumps with beta < 2 need a truncation cutoff (see default_cutoff)",
        ));
    }
    let times = observation_times(t_max, DEFAULT_OBSERVATIONS);
    let paths: Vec<Vec<f64>> = (0..n_particles)
        .into_par_iter()
        .map(|p| walk(orders, &times, seed, p, truncation))
        .collect::<Result<_>>()?;
    ParticleEnsemble::new(orders, times, paths.concat(), seed, truncation)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsdSeries {
    pub times: Vec<f64>,
    /// `<|x|^q>^{2/q}`, which scales like the mean square displacement.
    pub width_sq: Vec<f64>,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthEstimate {
    pub eta: f64,
    pub stderr: f64,
    pub q: f64,
    pub window: (f64, f64),
    pub points: usize,
    pub series: MsdSeries,
}

/// `q = 2` (the plain mean square displacement) for Gaussian jumps, `beta / 3` otherwise.
pub fn default_moment_order(orders: FractionalOrders) -> f64 {
    if orders.beta() == 2.0 {
        2.0
    } else {
        orders.beta() / 3.0
    }
}

fn check_moment_order(ensemble: &ParticleEnsemble, q: f64) -> Result<()> {
    let beta = ensemble.orders.beta();
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::domain(format!("moment order q must be > 0, got {q}")));
    }
    if beta < 2.0 && ensemble.truncation.is_none() && q >= beta {
        return Err(Error::domain(format!(
            "moment order q={q} >= beta={beta} diverges for untruncated jumps"
        )));
    }
    Ok(())
}

pub fn msd_series(ensemble: &ParticleEnsemble, q: f64) -> Result<MsdSeries> {
    check_moment_order(ensemble, q)?;
    let n = ensemble.n_particles as f64;
    let width_sq = (0..ensemble.observation_times.len())
        .map(|i| (ensemble.at(i).map(|x| x.abs().powf(q)).sum::<f64>() / n).powf(2.0 / q))
        .collect();
    Ok(MsdSeries {
        times: ensemble.observation_times.clone(),
        width_sq,
        q,
    })
}

/// Slope of `ln <|x|^q>^{2/q}` against `ln t` after trimming half a decade from each end.
pub fn width_exponent(ensemble: &ParticleEnsemble, q: Option<f64>) -> Result<WidthEstimate> {
    let q = q.unwrap_or_else(|| default_moment_order(ensemble.orders));
    let series = msd_series(ensemble, q)?;
    let times = &series.times;
    let (t_first, t_last) = (times[0], times[times.len() - 1]);
    let trim = 10f64.powf(FIT_TRIM_DECADES);
    let mut window = (t_first * trim, t_last / trim);
    let mut picked: Vec<usize> = (0..times.len())
        .filter(|&i| times[i] >= window.0 * (1.0 - 1e-12) && times[i] <= window.1 * (1.0 + 1e-12))
        .collect();
    if picked.len() < 3 {
        window = (t_first, t_last);
        picked = (0..times.len()).collect();
    }
    if picked.len() < 3 {
        return Err(Error::FitDomain(format!(
            "need at least 3 observation times, have {}",
            picked.len()
        )));
    }
    if let Some(&i) = picked.iter().find(|&&i| !(series.width_sq[i] > 0.0)) {
        return Err(Error::FitDomain(format!(
            "zero width at t={}; every particle is still at the origin",
            times[i]
        )));
    }
    let x: Vec<f64> = picked.iter().map(|&i| times[i].ln()).collect();
    let y: Vec<f64> = picked.iter().map(|&i| series.width_sq[i].ln()).collect();
    let (eta, _, stderr, _) = ols(&x, &y);
    Ok(WidthEstimate {
        eta,
        stderr,
        q,
        window,
        points: picked.len(),
        series,
    })
}

/// Evolve `initial` to time `t`: each mode is multiplied by
/// `E_{1-mu}(-gamma |k|^beta t^{1-mu})`.
pub fn propagator(
    initial: &SpectralField,
    orders: FractionalOrders,
    gamma: f64,
    t: f64,
) -> Result<SpectralField> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::domain(format!("gamma must be >= 0, got {gamma}")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::domain(format!("t must be >= 0, got {t}")));
    }
    let alpha = 1.0 - orders.mu();
    let symbol = symbol_unchecked(initial.grid(), orders.beta());
    let scale = gamma * t.powf(alpha);
    let mut cache: HashMap<u64, f64> = HashMap::new();
    let mut out = initial.clone();
    for (c, s) in out.coeffs_mut().iter_mut().zip(&symbol) {
        let factor = match cache.get(&s.to_bits()) {
            Some(&f) => f,
            None => {
                let f = mittag_leffler(alpha, -scale * s)?;
                cache.insert(s.to_bits(), f);
                f
            }
        };
        *c *= factor;
    }
    Ok(out)
}
