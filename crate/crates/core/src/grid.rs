//! Periodic grids and Fourier-space fields.
//!
//! Conventions used by every module in the crate:
//!
//! - Storage is row-major. In 2D, the coefficient for integer wavevector `(mx, my)` lives at
//!   `iy * n + ix`, where `ix` (resp. `iy`) is the FFT index of `mx` (resp. `my`).
//! - FFT index `j` maps to integer wavenumber `m = j` for `j < n/2` and `m = j - n` otherwise,
//!   so the Nyquist index `n/2` is `m = -n/2`. Physical wavenumbers are `k = 2 pi m / L`.
//! - Coefficients are normalized so that `u(x) = sum_k u_hat(k) exp(i k.x)`. The forward
//!   transform divides by the number of grid points; the inverse is a plain sum. With this
//!   normalization the domain mean of `|u|^2` equals `sum_k |u_hat(k)|^2`.
//! - Real physical fields have Hermitian coefficients, `u_hat(-k) = conj(u_hat(k))`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dims: usize,
    pub n: usize,
    pub length: f64,
}

impl GridSpec {
    pub fn new(dims: usize, n: usize, length: f64) -> Result<Self> {
        let g = Self { dims, n, length };
        g.validate()?;
        Ok(g)
    }

    /// `n x n` grid on the `[0, 2 pi)^2` box.
    pub fn square(n: usize) -> Result<Self> {
        Self::new(2, n, 2.0 * PI)
    }

    pub fn line(n: usize, length: f64) -> Result<Self> {
        Self::new(1, n, length)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims != 1 && self.dims != 2 {
            return Err(Error::usage(format!("dims must be 1 or 2, got {}", self.dims)));
        }
        if self.n < 8 || !self.n.is_power_of_two() {
            return Err(Error::usage(format!(
                "n must be a power of two >= 8, got {}",
                self.n
            )));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::usage(format!("length must be positive, got {}", self.length)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dims as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Wavenumber quantum `2 pi / L`.
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Integer wavenumbers in FFT order.
    pub fn mode_numbers(&self) -> Vec<i64> {
        (0..self.n).map(|j| mode_number(j, self.n)).collect()
    }

    /// Integer wavevector of flat index `idx`; the `y` component is 0 in 1D.
    pub fn mode_of(&self, idx: usize) -> (i64, i64) {
        match self.dims {
            1 => (mode_number(idx, self.n), 0),
            _ => (mode_number(idx % self.n, self.n), mode_number(idx / self.n, self.n)),
        }
    }

    /// Flat index of integer wavevector `(mx, my)` (wrapped periodically).
    pub fn index_of(&self, mx: i64, my: i64) -> usize {
        let n = self.n as i64;
        let ix = mx.rem_euclid(n) as usize;
        match self.dims {
            1 => ix,
            _ => my.rem_euclid(n) as usize * self.n + ix,
        }
    }

    /// `|k|^2` per flat index, in physical units.
    pub fn k_squared(&self) -> Vec<f64> {
        let k0 = self.k0();
        (0..self.len())
            .map(|i| {
                let (mx, my) = self.mode_of(i);
                k0 * k0 * (mx * mx + my * my) as f64
            })
            .collect()
    }

    /// Physical coordinates of grid point `idx`.
    pub fn point(&self, idx: usize) -> (f64, f64) {
        let dx = self.dx();
        match self.dims {
            1 => (idx as f64 * dx, 0.0),
            _ => ((idx % self.n) as f64 * dx, (idx / self.n) as f64 * dx),
        }
    }

    /// Keep mask of the 2/3 rule: modes with every `|m| <= (n - 1) / 3` survive.
    pub fn dealias_mask(&self) -> Vec<bool> {
        let cut = ((self.n - 1) / 3) as i64;
        (0..self.len())
            .map(|i| {
                let (mx, my) = self.mode_of(i);
                mx.abs() <= cut && my.abs() <= cut
            })
            .collect()
    }
}

pub fn mode_number(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Complex Fourier coefficients of a periodic field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::usage(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    /// Forward transform of a real physical field.
    pub fn from_real(grid: GridSpec, values: &[f64]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::usage(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        forward(&grid, &mut buf);
        Ok(Self { grid, coeffs: buf })
    }

    /// Sample `f(x, y)` on the grid and transform.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let values: Vec<f64> = (0..grid.len())
            .map(|i| {
                let (x, y) = grid.point(i);
                f(x, y)
            })
            .collect();
        Self::from_real(grid, &values).expect("length matches grid")
    }

    /// Inverse transform; returns the real part.
    pub fn to_real(&self) -> Vec<f64> {
        let mut buf = self.coeffs.clone();
        inverse(&self.grid, &mut buf);
        buf.iter().map(|c| c.re).collect()
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn get(&self, mx: i64, my: i64) -> Complex64 {
        self.coeffs[self.grid.index_of(mx, my)]
    }

    pub fn set(&mut self, mx: i64, my: i64, value: Complex64) {
        let i = self.grid.index_of(mx, my);
        self.coeffs[i] = value;
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest violation of `u_hat(-k) = conj(u_hat(k))`.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| {
                let (mx, my) = self.grid.mode_of(i);
                let j = self.grid.index_of(-mx, -my);
                (self.coeffs[i] - self.coeffs[j].conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn check_same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::usage("spectral fields live on different grids"));
        }
        Ok(())
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.coeffs {
            *c *= a;
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) -> Result<()> {
        self.check_same_grid(other)?;
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += o * a;
        }
        Ok(())
    }

    /// Domain mean of `u^2`, i.e. `sum |u_hat|^2`.
    pub fn mean_square(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &SpectralField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

type PlanKey = (usize, bool);

fn plan_cache() -> &'static Mutex<(FftPlanner<f64>, HashMap<PlanKey, Arc<dyn Fft<f64>>>)> {
    static CACHE: OnceLock<Mutex<(FftPlanner<f64>, HashMap<PlanKey, Arc<dyn Fft<f64>>>)>> =
        OnceLock::new();
    CACHE.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())))
}

/// Shared FFT plan of length `n`; safe to call from any thread.
pub fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut guard = plan_cache().lock().expect("fft plan cache poisoned");
    let (planner, map) = &mut *guard;
    map.entry((n, inverse))
        .or_insert_with(|| {
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// Normalized forward transform in place (divides by the number of points).
pub fn forward(grid: &GridSpec, buf: &mut [Complex64]) {
    transform(grid, buf, false);
    let scale = 1.0 / grid.len() as f64;
    for c in buf.iter_mut() {
        *c *= scale;
    }
}

/// Unnormalized inverse transform in place.
pub fn inverse(grid: &GridSpec, buf: &mut [Complex64]) {
    transform(grid, buf, true);
}

fn transform(grid: &GridSpec, buf: &mut [Complex64], inv: bool) {
    debug_assert_eq!(buf.len(), grid.len());
    let n = grid.n;
    let fft = plan(n, inv);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    // Rows are contiguous; a single call transforms all of them.
    fft.process_with_scratch(buf, &mut scratch);
    if grid.dims == 2 {
        transpose_square(buf, n);
        fft.process_with_scratch(buf, &mut scratch);
        transpose_square(buf, n);
    }
}

fn transpose_square(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}
