//! Pseudo-spectral solver for 2D incompressible flow with fractional dissipation.
//!
//! Vorticity form on the periodic box:
//!
//! ```text
//! dw/dt + u . grad w = -nu D_t^mu (-Delta)^{beta/2} w + f
//! ```
//!
//! Advection is evaluated pseudo-spectrally with 2/3-rule dealiasing and integrated with
//! fourth-order Runge-Kutta in integrating-factor form, so linear dissipation is applied
//! exactly through `exp(-nu |k|^beta dt)`.
//!
//! For `mu > 0` the time operator is the Grunwald-Letnikov sum
//! `D^mu g(t_{n+1}) ~ dt^{-mu} sum_{j>=0} w_j g_{n+1-j}` applied to `g = (-Delta)^{beta/2} w`.
//! The `j = 0` term joins the integrating factor (rate `nu dt^{-mu} |k|^beta`); the lagged
//! terms form a memory forcing held constant over the step, truncated after
//! `history_len` lags. The sum is taken over the field itself, not its increments: a
//! Caputo (increment) form would make every initial state a fixed point of the linear
//! problem, while this form relaxes a single mode as `E_{1-mu}(-nu |k|^beta t^{1-mu})`.

mod spectral;

use std::collections::VecDeque;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{vorticity_spectrum, SpectrumSeries};
use crate::error::{Error, Result};
use crate::grid::{self, GridSpec, SpectralField};
use crate::operators::{gl_weights, symbol_unchecked, GlWeights};
use crate::rng::{seeded, stream};
use crate::scaling::FractionalOrders;

pub use spectral::{max_divergence, nonlinear_term, velocity_from_vorticity, SpectralOps};

pub const DEFAULT_CFL: f64 = 0.5;
pub const DEFAULT_MEMORY_TOLERANCE: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Forcing {
    None,
    /// Fixed-amplitude forcing on integer shells `k_lo ..= k_hi` with phases redrawn every
    /// step; `amplitude` is the rms of the forcing vorticity field.
    Band {
        k_lo: f64,
        k_hi: f64,
        amplitude: f64,
        seed: u64,
    },
}

/// Isotropic envelope of the initial energy spectrum; `energy` is the exact total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum SpectrumShape {
    /// Gaussian bump `exp(-(k - k_peak)^2 / (2 width^2))` in shell energy.
    Peak { k_peak: f64, width: f64, energy: f64 },
    /// All energy on the integer shell `k`.
    Shell { k: usize, energy: f64 },
}

impl Default for SpectrumShape {
    fn default() -> Self {
        SpectrumShape::Peak {
            k_peak: 4.0,
            width: 1.5,
            energy: 0.5,
        }
    }
}

/// Missing fields take their [`Default`] values when deserializing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub grid: GridSpec,
    pub orders: FractionalOrders,
    /// Dissipation coefficient `1/Re`. Zero gives the inviscid (Euler) limit.
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub forcing: Forcing,
    pub dealias: bool,
    /// Lags kept in the memory sum when `mu > 0`.
    pub history_len: usize,
    pub seed: u64,
    pub cfl: f64,
    /// Switch for the advection term; off gives the linear problem.
    pub nonlinear: bool,
    pub initial: SpectrumShape,
    pub snapshot_times: Vec<f64>,
    /// Largest acceptable dropped GL weight mass before a warning is issued.
    pub memory_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::square(64).expect("valid default grid"),
            orders: FractionalOrders::kolmogorov(),
            nu: 1e-3,
            dt: 5e-3,
            t_end: 1.0,
            forcing: Forcing::None,
            dealias: true,
            history_len: 256,
            seed: 1,
            cfl: DEFAULT_CFL,
            nonlinear: true,
            initial: SpectrumShape::default(),
            snapshot_times: Vec::new(),
            memory_tolerance: DEFAULT_MEMORY_TOLERANCE,
        }
    }
}

impl SolverConfig {
    /// Every violated constraint, not just the first.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Err(e) = self.grid.validate() {
            out.push(e.to_string());
        } else if self.grid.dims != 2 {
            out.push("grid.dims must be 2 for the vorticity solver".into());
        }
        if !(self.nu.is_finite() && self.nu >= 0.0) {
            out.push(format!("nu must be >= 0, got {}", self.nu));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            out.push(format!("dt must be > 0, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            out.push(format!("t_end must be >= 0, got {}", self.t_end));
        }
        if !(self.cfl.is_finite() && self.cfl > 0.0) {
            out.push(format!("cfl must be > 0, got {}", self.cfl));
        }
        if self.orders.mu() > 0.0 && self.history_len == 0 {
            out.push("history_len must be >= 1 when mu > 0".into());
        }
        if !(self.memory_tolerance.is_finite() && self.memory_tolerance > 0.0) {
            out.push(format!("memory_tolerance must be > 0, got {}", self.memory_tolerance));
        }
        if let Forcing::Band {
            k_lo,
            k_hi,
            amplitude,
            ..
        } = self.forcing
        {
            if !(k_lo.is_finite() && k_hi.is_finite() && k_lo > 0.0 && k_lo <= k_hi) {
                out.push(format!("forcing band must satisfy 0 < k_lo <= k_hi, got [{k_lo}, {k_hi}]"));
            }
            if !(amplitude.is_finite() && amplitude >= 0.0) {
                out.push(format!("forcing amplitude must be >= 0, got {amplitude}"));
            }
        }
        if let Some(t) = self.snapshot_times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            out.push(format!("snapshot times must be >= 0, got {t}"));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.problems();
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::Usage(p.join("; ")))
        }
    }

    pub fn steps(&self) -> usize {
        if self.t_end == 0.0 {
            0
        } else {
            (self.t_end / self.dt - 1e-9).ceil() as usize
        }
    }
}

/// Stored `(-Delta)^{beta/2} w` fields, most recent first.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryHistory {
    fields: VecDeque<Vec<Complex64>>,
}

impl MemoryHistory {
    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub omega_hat: SpectralField,
    pub time: f64,
    pub step: usize,
    /// Present iff `mu > 0`.
    pub history: Option<MemoryHistory>,
    pub injected: f64,
    pub dissipated: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub step: usize,
    pub time: f64,
    pub energy: f64,
    pub enstrophy: f64,
    /// Rate at which dissipation removes energy (positive means loss).
    pub dissipation_rate: f64,
    /// Mean rate at which forcing added energy over the step that ended here.
    pub injection_rate: f64,
    /// `|dE/dt - (P - D)| / max(|P|, |D|)` over the step, with step-mean rates.
    pub budget_residual: f64,
    /// Dropped GL mass times the largest stored field norm (0 without memory).
    pub memory_tail: f64,
    pub u_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub diagnostics: Vec<StepDiagnostics>,
    pub snapshots: Vec<(f64, SpectrumSeries)>,
    pub final_spectrum: SpectrumSeries,
    pub final_state: FlowState,
    pub warnings: Vec<String>,
}

pub struct Solver {
    config: SolverConfig,
    ops: SpectralOps,
    symbol: Vec<f64>,
    /// Effective linear rate per mode: `nu |k|^beta` (times `dt^{-mu}` with memory).
    rate: Vec<f64>,
    decay: Vec<f64>,
    decay_half: Vec<f64>,
    weights: Option<GlWeights>,
    forcing_modes: Vec<(usize, usize)>,
    forcing_mag: f64,
    forcing_rng: Option<ChaCha20Rng>,
    forcing: Vec<Complex64>,
    stages: [Vec<Complex64>; 5],
    /// Last end-of-step state with its advection term and velocity bound.
    advected: Option<(Vec<Complex64>, Vec<Complex64>, f64)>,
}

impl Solver {
    pub fn new(config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.grid;
        let ops = SpectralOps::new(grid, config.dealias)?;
        let symbol = symbol_unchecked(&grid, config.orders.beta());
        let mu = config.orders.mu();
        let local = if mu > 0.0 { config.dt.powf(-mu) } else { 1.0 };
        let rate: Vec<f64> = symbol.iter().map(|s| config.nu * local * s).collect();
        let decay = rate.iter().map(|r| (-r * config.dt).exp()).collect();
        let decay_half = rate.iter().map(|r| (-r * 0.5 * config.dt).exp()).collect();
        let weights = if mu > 0.0 {
            Some(gl_weights(mu, config.history_len + 1)?)
        } else {
            None
        };
        let (forcing_modes, forcing_mag, forcing_rng) = match config.forcing {
            Forcing::None => (Vec::new(), 0.0, None),
            Forcing::Band {
                k_lo,
                k_hi,
                amplitude,
                seed,
            } => {
                let modes = forcing_pairs(&grid, k_lo, k_hi, ops.mask());
                if modes.is_empty() {
                    return Err(Error::usage(format!(
                        "forcing band [{k_lo}, {k_hi}] contains no resolved modes"
                    )));
                }
                let mag = amplitude / ((2 * modes.len()) as f64).sqrt();
                (modes, mag, Some(seeded(seed, stream::FORCING)))
            }
        };
        let zeros = vec![Complex64::new(0.0, 0.0); grid.len()];
        Ok(Self {
            config,
            ops,
            symbol,
            rate,
            decay,
            decay_half,
            weights,
            forcing_modes,
            forcing_mag,
            forcing_rng,
            forcing: zeros.clone(),
            stages: [
                zeros.clone(),
                zeros.clone(),
                zeros.clone(),
                zeros.clone(),
                zeros,
            ],
            advected: None,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn ops(&self) -> &SpectralOps {
        &self.ops
    }

    /// `1/2 sum |w_hat|^2 / |k|^2`.
    pub fn energy(&self, omega: &SpectralField) -> f64 {
        let k2 = self.ops.k2();
        omega.coeffs()
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| 0.5 * c.norm_sqr() / k2[i])
            .sum()
    }

    pub fn enstrophy(&self, omega: &SpectralField) -> f64 {
        0.5 * omega.mean_square()
    }

    /// `nu sum |k|^beta |w_hat|^2 / |k|^2 = 2 nu sum |k|^beta E(k)` (memoryless part).
    pub fn dissipation_rate(&self, omega: &SpectralField) -> f64 {
        self.local_dissipation(omega.coeffs())
    }

    fn local_dissipation(&self, omega: &[Complex64]) -> f64 {
        let k2 = self.ops.k2();
        self.config.nu
            * (1..omega.len())
                .map(|i| self.symbol[i] * omega[i].norm_sqr() / k2[i])
                .sum::<f64>()
    }

    fn injection_rate(&self, omega: &[Complex64]) -> f64 {
        if self.forcing_rng.is_none() {
            return 0.0;
        }
        let k2 = self.ops.k2();
        self.forcing_modes
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .map(|i| (omega[i].conj() * self.forcing[i]).re / k2[i])
            .sum()
    }

    /// Random-phase initial vorticity with the requested spectrum; reproducible per seed.
    pub fn init_state(&self, shape: &SpectrumShape) -> Result<FlowState> {
        let grid = self.config.grid;
        let (target, envelope): (f64, Box<dyn Fn(f64) -> f64>) = match *shape {
            SpectrumShape::Peak {
                k_peak,
                width,
                energy,
            } => {
                if !(k_peak.is_finite() && k_peak > 0.0 && width.is_finite() && width > 0.0) {
                    return Err(Error::usage(format!(
                        "peak spectrum needs k_peak > 0 and width > 0, got {k_peak}, {width}"
                    )));
                }
                (
                    energy,
                    Box::new(move |m: f64| (-(m - k_peak).powi(2) / (2.0 * width * width)).exp()),
                )
            }
            SpectrumShape::Shell { k, energy } => {
                if k == 0 {
                    return Err(Error::usage("shell spectrum needs k >= 1"));
                }
                (
                    energy,
                    Box::new(move |m: f64| if m.round() as usize == k { 1.0 } else { 0.0 }),
                )
            }
        };
        if !(target.is_finite() && target >= 0.0) {
            return Err(Error::usage(format!("initial energy must be >= 0, got {target}")));
        }
        let mut rng = seeded(self.config.seed, stream::INITIAL_FIELD);
        let noise: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut coeffs = SpectralField::from_real(grid, &noise)?.into_coeffs();
        let k0 = grid.k0();
        for (i, c) in coeffs.iter_mut().enumerate() {
            let (mx, my) = grid.mode_of(i);
            let m = ((mx * mx + my * my) as f64).sqrt();
            let norm = c.norm();
            if m == 0.0 || norm == 0.0 {
                *c = Complex64::new(0.0, 0.0);
                continue;
            }
            // Shell energy ~ envelope: per-mode |u_hat|^2 ~ envelope / m, |w_hat| = |k| |u_hat|.
            let amp = k0 * m * (envelope(m) / m).sqrt();
            *c *= amp / norm;
        }
        self.ops.project(&mut coeffs);
        let mut omega_hat = SpectralField::from_coeffs(grid, coeffs)?;
        let e = self.energy(&omega_hat);
        if target > 0.0 {
            if e == 0.0 {
                return Err(Error::usage("initial spectrum selects no resolved modes"));
            }
            omega_hat.scale((target / e).sqrt());
        } else {
            omega_hat = SpectralField::zeros(grid);
        }
        Ok(self.state_from(omega_hat))
    }

    /// Wrap a vorticity field (projected onto the resolved modes) as a state at `t = 0`.
    pub fn state_from(&self, mut omega_hat: SpectralField) -> FlowState {
        self.ops.project(omega_hat.coeffs_mut());
        let history = self.weights.as_ref().map(|_| MemoryHistory {
            fields: VecDeque::new(),
        });
        let mut state = FlowState {
            omega_hat,
            time: 0.0,
            step: 0,
            history,
            injected: 0.0,
            dissipated: 0.0,
        };
        self.push_history(&mut state);
        state
    }

    fn push_history(&self, state: &mut FlowState) {
        if let Some(h) = state.history.as_mut() {
            let g: Vec<Complex64> = state
                .omega_hat
                .coeffs()
                .iter()
                .zip(&self.symbol)
                .map(|(c, s)| c * s)
                .collect();
            h.fields.push_front(g);
            h.fields.truncate(self.config.history_len);
        }
    }

    fn draw_forcing(&mut self) {
        let Some(rng) = self.forcing_rng.as_mut() else {
            return;
        };
        for &(a, b) in &self.forcing_modes {
            let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let f = Complex64::from_polar(self.forcing_mag, phase);
            self.forcing[a] = f;
            self.forcing[b] = f.conj();
        }
    }

    /// Memory forcing `-nu dt^{-mu} sum_{j=1..H} w_j g_{n+1-j}` and its tail estimate.
    fn memory_term(&self, state: &FlowState) -> Option<(Vec<Complex64>, f64)> {
        let (weights, history) = (self.weights.as_ref()?, state.history.as_ref()?);
        let w = weights.as_slice();
        let scale = -self.config.nu * self.config.dt.powf(-weights.mu());
        let mut out = vec![Complex64::new(0.0, 0.0); self.config.grid.len()];
        let mut max_norm: f64 = 0.0;
        for (lag, g) in history.fields.iter().enumerate() {
            let wj = w[lag + 1] * scale;
            for (o, c) in out.iter_mut().zip(g) {
                *o += c * wj;
            }
            max_norm = max_norm.max(g.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt());
        }
        // Lags beyond the stored history are dropped only once the run is longer than it.
        let tail = if state.step + 1 > self.config.history_len {
            weights.tail_mass(self.config.history_len) * max_norm
        } else {
            0.0
        };
        Some((out, tail))
    }

    fn memory_dissipation_rate(&self, omega: &[Complex64], memory: &[Complex64]) -> f64 {
        // Energy loss from local part plus lagged part: -Re sum conj(psi) * (-rate w + M).
        let k2 = self.ops.k2();
        (1..omega.len())
            .map(|i| {
                let local = omega[i] * self.rate[i];
                (omega[i].conj() * (local - memory[i])).re / k2[i]
            })
            .sum()
    }

    /// `N(stages[0]) + extra` into `stages[stage]`; returns the velocity bound.
    fn rhs(&mut self, stage: usize, extra: &[Complex64]) -> f64 {
        let input = std::mem::take(&mut self.stages[0]);
        let mut out = std::mem::take(&mut self.stages[stage]);
        let umax = self.advect(&input, &mut out);
        for (o, e) in out.iter_mut().zip(extra) {
            *o += e;
        }
        self.stages[0] = input;
        self.stages[stage] = out;
        umax
    }

    fn advect(&mut self, input: &[Complex64], out: &mut [Complex64]) -> f64 {
        if self.config.nonlinear {
            self.ops.advection(input, out)
        } else {
            out.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            0.0
        }
    }

    fn rates(&self, omega: &[Complex64], memory: Option<&[Complex64]>) -> (f64, f64) {
        let d = match memory {
            Some(m) => self.memory_dissipation_rate(omega, m),
            None => self.local_dissipation(omega),
        };
        (self.injection_rate(omega), d)
    }

    /// Advance one step in place and report diagnostics at the new time.
    pub fn step(&mut self, state: &mut FlowState) -> Result<StepDiagnostics> {
        let dt = self.config.dt;
        let len = self.config.grid.len();
        self.draw_forcing();
        let memory = self.memory_term(state);
        let mut extra = self.forcing.clone();
        let mut memory_tail = 0.0;
        if let Some((m, tail)) = &memory {
            for (e, v) in extra.iter_mut().zip(m) {
                *e += v;
            }
            memory_tail = *tail;
        }
        let mem = memory.as_ref().map(|(m, _)| m.as_slice());

        let w0 = state.omega_hat.coeffs();
        let e0 = self.energy(&state.omega_hat);
        let (p0, d0) = self.rates(w0, mem);

        // Stage buffers: 0 = stage input, 1..=4 = stage outputs a, b, c, d.
        let u_max = match self.advected.take() {
            Some((w, n, u)) if w == w0 => {
                for i in 0..len {
                    self.stages[1][i] = n[i] + extra[i];
                }
                u
            }
            _ => {
                self.stages[0].copy_from_slice(w0);
                self.rhs(1, &extra)
            }
        };
        if self.config.nonlinear {
            let limit = self.config.cfl * self.config.grid.dx() / u_max.max(f64::MIN_POSITIVE);
            if dt > limit {
                return Err(Error::StepSize {
                    time: state.time,
                    dt,
                    limit,
                    u_max,
                });
            }
        }
        for i in 0..len {
            self.stages[0][i] = self.decay_half[i] * (w0[i] + self.stages[1][i] * (0.5 * dt));
        }
        self.rhs(2, &extra);
        for i in 0..len {
            self.stages[0][i] = self.decay_half[i] * w0[i] + self.stages[2][i] * (0.5 * dt);
        }
        self.rhs(3, &extra);
        for i in 0..len {
            self.stages[0][i] = self.decay[i] * w0[i] + self.decay_half[i] * self.stages[3][i] * dt;
        }
        self.rhs(4, &extra);
        let mut next = vec![Complex64::new(0.0, 0.0); len];
        for i in 0..len {
            let [_, a, b, c, d] = &self.stages;
            next[i] = self.decay[i] * w0[i]
                + (self.decay[i] * a[i] + self.decay_half[i] * (b[i] + c[i]) * 2.0 + d[i])
                    * (dt / 6.0);
        }
        self.ops.project(&mut next);
        let e1 = 0.5
            * next
                .iter()
                .zip(self.ops.k2())
                .skip(1)
                .map(|(c, k2)| c.norm_sqr() / k2)
                .sum::<f64>();
        if !(e1.is_finite() && next.iter().all(|c| c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite {
                step: state.step + 1,
                last_good_time: state.time,
            });
        }

        // Energy budget by Simpson's rule; the midpoint state is the cubic Hermite
        // interpolant from the end-point tendencies. N(next) is reused by the next step.
        let mut n1 = vec![Complex64::new(0.0, 0.0); len];
        let u1 = self.advect(&next, &mut n1);
        let mut mid = vec![Complex64::new(0.0, 0.0); len];
        for i in 0..len {
            let f0 = self.stages[1][i] - w0[i] * self.rate[i];
            let f1 = n1[i] + extra[i] - next[i] * self.rate[i];
            mid[i] = (w0[i] + next[i]) * 0.5 + (f0 - f1) * (dt / 8.0);
        }
        let (pm, dm) = self.rates(&mid, mem);
        let (p1, d1) = self.rates(&next, mem);
        let p_avg = (p0 + 4.0 * pm + p1) / 6.0;
        let d_avg = (d0 + 4.0 * dm + d1) / 6.0;
        let scale = p_avg.abs().max(d_avg.abs());
        let budget_residual = if scale > 0.0 {
            ((e1 - e0) / dt - (p_avg - d_avg)).abs() / scale
        } else {
            0.0
        };

        self.advected = Some((next.clone(), n1, u1));
        state.omega_hat = SpectralField::from_coeffs(self.config.grid, next)?;
        state.step += 1;
        state.time = state.step as f64 * dt;
        state.injected += p_avg * dt;
        state.dissipated += d_avg * dt;
        self.push_history(state);

        Ok(StepDiagnostics {
            step: state.step,
            time: state.time,
            energy: e1,
            enstrophy: self.enstrophy(&state.omega_hat),
            dissipation_rate: d1,
            injection_rate: p_avg,
            budget_residual,
            memory_tail,
            u_max,
        })
    }

    fn initial_diagnostics(&self, state: &FlowState) -> StepDiagnostics {
        StepDiagnostics {
            step: state.step,
            time: state.time,
            energy: self.energy(&state.omega_hat),
            enstrophy: self.enstrophy(&state.omega_hat),
            dissipation_rate: self.dissipation_rate(&state.omega_hat),
            injection_rate: 0.0,
            budget_residual: 0.0,
            memory_tail: 0.0,
            u_max: 0.0,
        }
    }

    /// Integrate from `state` to the configured end time.
    pub fn run_from(&mut self, mut state: FlowState) -> Result<RunOutput> {
        let steps = self.config.steps();
        let mut diagnostics = Vec::with_capacity(steps + 1);
        diagnostics.push(self.initial_diagnostics(&state));
        let mut pending: Vec<f64> = self.config.snapshot_times.clone();
        pending.sort_by(f64::total_cmp);
        pending.dedup();
        let mut pending = pending.into_iter().peekable();
        let mut snapshots = Vec::new();
        let tol = 1e-9 * self.config.dt;
        while let Some(&t) = pending.peek() {
            if t <= state.time + tol {
                snapshots.push((state.time, vorticity_spectrum(&state.omega_hat)?));
                pending.next();
            } else {
                break;
            }
        }
        let mut warnings = Vec::new();
        if let Some(w) = &self.weights {
            let dropped = w.tail_mass(self.config.history_len);
            if state.step + steps > self.config.history_len && dropped > self.config.memory_tolerance {
                warnings.push(format!(
                    "memory truncated after {} lags drops weight mass {:.3e} > tolerance {:.3e}; raise history_len",
                    self.config.history_len, dropped, self.config.memory_tolerance
                ));
            }
        }
        for _ in 0..steps {
            let d = self.step(&mut state)?;
            diagnostics.push(d);
            while let Some(&t) = pending.peek() {
                if t <= state.time + tol {
                    snapshots.push((state.time, vorticity_spectrum(&state.omega_hat)?));
                    pending.next();
                } else {
                    break;
                }
            }
        }
        let final_spectrum = vorticity_spectrum(&state.omega_hat)?;
        Ok(RunOutput {
            diagnostics,
            snapshots,
            final_spectrum,
            final_state: state,
            warnings,
        })
    }
}

/// Pairs `(k, -k)` of flat indices on integer shells `k_lo..=k_hi`, one per Hermitian pair.
fn forcing_pairs(grid: &GridSpec, k_lo: f64, k_hi: f64, mask: Option<&[bool]>) -> Vec<(usize, usize)> {
    let half = (grid.n / 2) as i64;
    let mut out = Vec::new();
    for i in 0..grid.len() {
        let (mx, my) = grid.mode_of(i);
        if mx == -half || my == -half {
            continue;
        }
        let upper = my > 0 || (my == 0 && mx > 0);
        if !upper {
            continue;
        }
        let m = ((mx * mx + my * my) as f64).sqrt();
        if m + 0.5 <= k_lo || m - 0.5 > k_hi + 1e-12 {
            continue;
        }
        if m.round() < k_lo.round() || m.round() > k_hi.round() {
            continue;
        }
        if let Some(mask) = mask {
            if !mask[i] {
                continue;
            }
        }
        out.push((i, grid.index_of(-mx, -my)));
    }
    out
}

/// Build the solver, draw the initial state and integrate.
pub fn run(config: &SolverConfig) -> Result<RunOutput> {
    let mut solver = Solver::new(config.clone())?;
    let state = solver.init_state(&config.initial)?;
    solver.run_from(state)
}

/// Inverse transform helper for physical-space checks.
pub fn vorticity_to_physical(omega_hat: &SpectralField) -> Vec<f64> {
    let mut buf = omega_hat.coeffs().to_vec();
    grid::inverse(omega_hat.grid(), &mut buf);
    buf.into_iter().map(|c| c.re).collect()
}
