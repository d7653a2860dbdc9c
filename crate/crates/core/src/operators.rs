//! Fractional operators on periodic fields and uniform time series.
//!
//! The space operator is the Fourier multiplier `(-Delta)^{beta/2} <-> |k|^beta`; the
//! time operators use Grunwald-Letnikov weights `w_j = (-1)^j C(mu, j)`.

use crate::error::{Error, Result};
use crate::grid::{GridSpec, SpectralField};

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 && beta <= 2.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("beta must lie in (0, 2], got {beta}")))
    }
}

/// `|k|^beta` for every mode of `grid`, zero at `k = 0`.
pub fn laplacian_symbol(grid: &GridSpec, beta: f64) -> Result<Vec<f64>> {
    check_beta(beta)?;
    Ok(symbol_unchecked(grid, beta))
}

pub(crate) fn symbol_unchecked(grid: &GridSpec, beta: f64) -> Vec<f64> {
    let half = 0.5 * beta;
    grid.k_squared()
        .into_iter()
        .map(|k2| if k2 == 0.0 { 0.0 } else { k2.powf(half) })
        .collect()
}

pub fn apply_fractional_laplacian(field: &SpectralField, beta: f64) -> Result<SpectralField> {
    let symbol = laplacian_symbol(field.grid(), beta)?;
    apply_symbol(field, &symbol)
}

/// Coefficient-wise product with a precomputed multiplier.
pub fn apply_symbol(field: &SpectralField, symbol: &[f64]) -> Result<SpectralField> {
    if symbol.len() != field.coeffs().len() {
        return Err(Error::usage("symbol and field sizes differ"));
    }
    let mut out = field.clone();
    for (c, s) in out.coeffs_mut().iter_mut().zip(symbol) {
        *c *= *s;
    }
    Ok(out)
}

/// Grunwald-Letnikov weights of order `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlWeights {
    mu: f64,
    w: Vec<f64>,
}

impl GlWeights {
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// `sum_{j > m} |w_j|`, the mass the truncated convolution drops after `m` lags.
    ///
    /// For `0 < mu < 1` the weights after `w_0` are negative and sum to `-1`, so the tail
    /// equals the partial sum `S_m = sum_{j <= m} w_j`.
    pub fn tail_mass(&self, m: usize) -> f64 {
        if self.mu == 0.0 {
            return 0.0;
        }
        let take = (m + 1).min(self.w.len());
        let s: f64 = self.w[..take].iter().sum();
        if take < m + 1 {
            // Extend analytically: S_m = prod_{j=1..m} (1 - mu/j).
            let mut s_ext = s;
            for j in take..=m {
                s_ext *= 1.0 - self.mu / j as f64;
            }
            s_ext
        } else {
            s
        }
    }
}

/// First `n` weights, `w_0 = 1`, `w_j = w_{j-1} (1 - (mu + 1)/j)`.
pub fn gl_weights(mu: f64, n: usize) -> Result<GlWeights> {
    if !(mu.is_finite() && (0.0..1.0).contains(&mu)) {
        return Err(Error::domain(format!("mu must lie in [0, 1), got {mu}")));
    }
    if n == 0 {
        return Err(Error::usage("need at least one weight"));
    }
    let mut w = Vec::with_capacity(n);
    w.push(1.0);
    for j in 1..n {
        let prev = w[j - 1];
        w.push(prev * (1.0 - (mu + 1.0) / j as f64));
    }
    Ok(GlWeights { mu, w })
}

/// Caputo derivative of order `mu` of uniformly sampled data.
///
/// `D_n = dt^{-mu} sum_{j=0..n} w_j (f_{n-j} - f_0)`: the Grunwald-Letnikov sum applied
/// to increments from the initial value, so constants map to zero. First-order accurate.
/// Order zero is the identity.
pub fn caputo_derivative(samples: &[f64], dt: f64, mu: f64) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::usage("caputo_derivative needs at least one sample"));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::domain(format!("dt must be positive, got {dt}")));
    }
    let weights = gl_weights(mu, samples.len())?;
    if mu == 0.0 {
        return Ok(samples.to_vec());
    }
    let w = weights.as_slice();
    let f0 = samples[0];
    let scale = dt.powf(-mu);
    let out = (0..samples.len())
        .map(|n| {
            let acc: f64 = (0..=n).map(|j| w[j] * (samples[n - j] - f0)).sum();
            scale * acc
        })
        .collect();
    Ok(out)
}
