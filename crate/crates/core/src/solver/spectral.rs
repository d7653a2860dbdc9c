//! Velocity recovery and the advection term of the 2D vorticity equation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{self, GridSpec, SpectralField};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Wavenumber tables and scratch buffers for one grid.
///
/// Derivative wavenumbers are zeroed on the Nyquist row/column so that derivatives of real
/// fields stay Hermitian.
#[derive(Debug, Clone)]
pub struct SpectralOps {
    grid: GridSpec,
    kx: Vec<f64>,
    ky: Vec<f64>,
    k2: Vec<f64>,
    mask: Option<Vec<bool>>,
    vel: Vec<Complex64>,
    grad: Vec<Complex64>,
    prod: Vec<Complex64>,
}

impl SpectralOps {
    pub fn new(grid: GridSpec, dealias: bool) -> Result<Self> {
        if grid.dims != 2 {
            return Err(Error::usage("the vorticity solver needs a 2D grid"));
        }
        let n = grid.n;
        let k0 = grid.k0();
        let half = (n / 2) as i64;
        let mut kx = vec![0.0; grid.len()];
        let mut ky = vec![0.0; grid.len()];
        let mut k2 = vec![0.0; grid.len()];
        for i in 0..grid.len() {
            let (mx, my) = grid.mode_of(i);
            kx[i] = if mx == -half { 0.0 } else { k0 * mx as f64 };
            ky[i] = if my == -half { 0.0 } else { k0 * my as f64 };
            k2[i] = k0 * k0 * (mx * mx + my * my) as f64;
        }
        let mask = dealias.then(|| grid.dealias_mask());
        let zeros = vec![Complex64::new(0.0, 0.0); grid.len()];
        Ok(Self {
            grid,
            kx,
            ky,
            k2,
            mask,
            vel: zeros.clone(),
            grad: zeros.clone(),
            prod: zeros,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn k2(&self) -> &[f64] {
        &self.k2
    }

    pub fn kx(&self) -> &[f64] {
        &self.kx
    }

    pub fn ky(&self) -> &[f64] {
        &self.ky
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    /// Zero the modes removed by the 2/3 rule (no-op without dealiasing) and the mean.
    pub fn project(&self, coeffs: &mut [Complex64]) {
        if let Some(mask) = &self.mask {
            for (c, keep) in coeffs.iter_mut().zip(mask) {
                if !keep {
                    *c = Complex64::new(0.0, 0.0);
                }
            }
        }
        coeffs[0] = Complex64::new(0.0, 0.0);
    }

    /// `(u_hat, v_hat) = (i k_y, -i k_x) w_hat / |k|^2`.
    pub fn velocity(&self, omega: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut u = vec![Complex64::new(0.0, 0.0); omega.len()];
        let mut v = u.clone();
        for i in 1..omega.len() {
            let psi = omega[i] / self.k2[i];
            u[i] = I * self.ky[i] * psi;
            v[i] = -I * self.kx[i] * psi;
        }
        (u, v)
    }

    /// `-(u . grad w)`, written into `out`; returns `max(|u| + |v|)` over the grid.
    ///
    /// Both inverse transforms pack two real fields into one complex transform.
    pub fn advection(&mut self, omega: &[Complex64], out: &mut [Complex64]) -> f64 {
        let len = omega.len();
        self.vel[0] = Complex64::new(0.0, 0.0);
        self.grad[0] = Complex64::new(0.0, 0.0);
        for i in 1..len {
            let w = match &self.mask {
                Some(m) if !m[i] => Complex64::new(0.0, 0.0),
                _ => omega[i],
            };
            let psi = w / self.k2[i];
            let u = I * self.ky[i] * psi;
            let v = -I * self.kx[i] * psi;
            let wx = I * self.kx[i] * w;
            let wy = I * self.ky[i] * w;
            self.vel[i] = u + I * v;
            self.grad[i] = wx + I * wy;
        }
        grid::inverse(&self.grid, &mut self.vel);
        grid::inverse(&self.grid, &mut self.grad);
        let mut umax: f64 = 0.0;
        for i in 0..len {
            let (u, v) = (self.vel[i].re, self.vel[i].im);
            let (wx, wy) = (self.grad[i].re, self.grad[i].im);
            umax = umax.max(u.abs() + v.abs());
            self.prod[i] = Complex64::new(-(u * wx + v * wy), 0.0);
        }
        grid::forward(&self.grid, &mut self.prod);
        out.copy_from_slice(&self.prod);
        self.project(out);
        umax
    }
}

/// Velocity field of a zero-mean vorticity field.
pub fn velocity_from_vorticity(omega_hat: &SpectralField) -> Result<(SpectralField, SpectralField)> {
    let ops = SpectralOps::new(*omega_hat.grid(), false)?;
    let (u, v) = ops.velocity(omega_hat.coeffs());
    Ok((
        SpectralField::from_coeffs(*omega_hat.grid(), u)?,
        SpectralField::from_coeffs(*omega_hat.grid(), v)?,
    ))
}

/// `-(u . grad w)` with 2/3-rule dealiasing of input and output.
pub fn nonlinear_term(omega_hat: &SpectralField) -> Result<SpectralField> {
    let mut ops = SpectralOps::new(*omega_hat.grid(), true)?;
    let mut out = vec![Complex64::new(0.0, 0.0); omega_hat.coeffs().len()];
    ops.advection(omega_hat.coeffs(), &mut out);
    SpectralField::from_coeffs(*omega_hat.grid(), out)
}

/// `max_k |k . u_hat(k)|`, with the same Nyquist convention as the derivatives.
pub fn max_divergence(u: &SpectralField, v: &SpectralField) -> f64 {
    let g = u.grid();
    let k0 = g.k0();
    let half = (g.n / 2) as i64;
    let wave = |m: i64| if m == -half { 0.0 } else { k0 * m as f64 };
    (0..g.len())
        .map(|i| {
            let (mx, my) = g.mode_of(i);
            (u.coeffs()[i] * wave(mx) + v.coeffs()[i] * wave(my)).norm()
        })
        .fold(0.0, f64::max)
}
