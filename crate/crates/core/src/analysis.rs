//! Estimators: shell spectra, power-law fits, tail indices and flatness.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SpectralField;
use crate::scaling::ScalingPrediction;

/// Hill estimates at or above this value are reported as Gaussian-compatible: stable
/// tail indices only exist in `(0, 2]`.
pub const NO_STABLE_TAIL_THRESHOLD: f64 = 4.0;

/// Default `|z|` threshold for [`compare_prediction`].
pub const DEFAULT_Z_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub index: usize,
    pub k_center: f64,
    pub energy: f64,
}

/// Energy per unit-width wavenumber shell. Energies are domain means (`1/2 <|u|^2>`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSeries {
    pub shells: Vec<Shell>,
    pub total_energy: f64,
}

impl SpectrumSeries {
    pub fn from_shells(shells: Vec<Shell>) -> Self {
        let total_energy = shells.iter().map(|s| s.energy).sum();
        Self {
            shells,
            total_energy,
        }
    }

    /// Build a series from `(k, E)` pairs, e.g. a synthetic law or a parsed CSV.
    pub fn from_points(points: &[(f64, f64)]) -> Self {
        Self::from_shells(
            points
                .iter()
                .enumerate()
                .map(|(i, &(k, e))| Shell {
                    index: i,
                    k_center: k,
                    energy: e,
                })
                .collect(),
        )
    }
}

fn accumulate(field: &SpectralField, mode_energy: impl Fn(usize, f64) -> f64) -> SpectrumSeries {
    let grid = field.grid();
    let k0 = grid.k0();
    let max_shell = ((grid.dims as f64).sqrt() * (grid.n / 2) as f64).round() as usize + 1;
    let mut energy = vec![0.0; max_shell + 1];
    for i in 0..grid.len() {
        let (mx, my) = grid.mode_of(i);
        let m2 = (mx * mx + my * my) as f64;
        let s = m2.sqrt().round() as usize;
        energy[s] += mode_energy(i, m2);
    }
    let shells = energy
        .into_iter()
        .enumerate()
        .map(|(index, energy)| Shell {
            index,
            k_center: index as f64 * k0,
            energy,
        })
        .collect();
    SpectrumSeries::from_shells(shells)
}

/// Spectrum of a scalar (or single velocity component) field: `1/2 |u_hat|^2` per mode.
pub fn shell_spectrum(field: &SpectralField) -> SpectrumSeries {
    let c = field.coeffs();
    accumulate(field, |i, _| 0.5 * c[i].norm_sqr())
}

/// Kinetic-energy spectrum of a velocity pair.
pub fn velocity_spectrum(u: &SpectralField, v: &SpectralField) -> Result<SpectrumSeries> {
    u.check_same_grid(v)?;
    let (cu, cv) = (u.coeffs(), v.coeffs());
    Ok(accumulate(u, |i, _| 0.5 * (cu[i].norm_sqr() + cv[i].norm_sqr())))
}

/// Kinetic-energy spectrum of a 2D flow given its vorticity: `|u_hat|^2 = |w_hat|^2/|k|^2`.
pub fn vorticity_spectrum(omega: &SpectralField) -> Result<SpectrumSeries> {
    if omega.grid().dims != 2 {
        return Err(Error::usage("vorticity spectra need a 2D grid"));
    }
    let k0sq = omega.grid().k0().powi(2);
    let c = omega.coeffs();
    Ok(accumulate(omega, |i, m2| {
        if m2 == 0.0 {
            0.0
        } else {
            0.5 * c[i].norm_sqr() / (m2 * k0sq)
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    /// Natural log of the prefactor.
    pub intercept: f64,
    pub stderr: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    pub points: usize,
}

/// Ordinary least squares `y = a + b x`; returns `(b, a, stderr(b), r^2)`.
pub(crate) fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let stderr = if x.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    (slope, intercept, stderr, r2)
}

/// Fit `E = C k^p` on the shells with `k_min <= k_center <= k_max`.
pub fn fit_power_law(series: &SpectrumSeries, k_min: f64, k_max: f64) -> Result<PowerLawFit> {
    let window: Vec<&Shell> = series
        .shells
        .iter()
        .filter(|s| s.k_center >= k_min && s.k_center <= k_max)
        .collect();
    if window.len() < 4 {
        return Err(Error::FitDomain(format!(
            "need at least 4 shells in [{k_min}, {k_max}], found {}",
            window.len()
        )));
    }
    if let Some(bad) = window.iter().find(|s| !(s.energy > 0.0 && s.k_center > 0.0)) {
        return Err(Error::FitDomain(format!(
            "nonpositive value in fit window: k={}, E={}",
            bad.k_center, bad.energy
        )));
    }
    let x: Vec<f64> = window.iter().map(|s| s.k_center.ln()).collect();
    let y: Vec<f64> = window.iter().map(|s| s.energy.ln()).collect();
    let (exponent, intercept, stderr, r_squared) = ols(&x, &y);
    Ok(PowerLawFit {
        exponent,
        intercept,
        stderr,
        window: (k_min, k_max),
        r_squared,
        points: window.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillEstimate {
    pub tail_index: f64,
    pub order_statistics: usize,
    /// False when the estimate is at or above [`NO_STABLE_TAIL_THRESHOLD`].
    pub stable_tail: bool,
}

/// Hill estimator on the `top_fraction` largest `|x|`.
pub fn hill_tail_index(samples: &[f64], top_fraction: f64) -> Result<HillEstimate> {
    if samples.len() < 1000 {
        return Err(Error::usage(format!(
            "Hill estimator needs at least 1000 samples, got {}",
            samples.len()
        )));
    }
    if !(top_fraction > 0.0 && top_fraction <= 0.1) {
        return Err(Error::usage(format!(
            "top_fraction must lie in (0, 0.1], got {top_fraction}"
        )));
    }
    let mut abs: Vec<f64> = samples.iter().map(|x| x.abs()).collect();
    let k = ((top_fraction * abs.len() as f64) as usize).max(2);
    // Partition so that abs[..=k] holds the k+1 largest values.
    abs.select_nth_unstable_by(k, |a, b| b.total_cmp(a));
    let threshold = abs[k];
    if !(threshold > 0.0) {
        return Err(Error::usage("threshold order statistic is zero"));
    }
    let sum: f64 = abs[..k].iter().map(|x| (x / threshold).ln()).sum();
    let tail_index = k as f64 / sum;
    Ok(HillEstimate {
        tail_index,
        order_statistics: k,
        stable_tail: tail_index < NO_STABLE_TAIL_THRESHOLD,
    })
}

/// `<x^4> / <x^2>^2` about zero; 3 for a centered Gaussian.
pub fn flatness(samples: &[f64]) -> Result<f64> {
    if samples.len() < 100 {
        return Err(Error::usage(format!(
            "flatness needs at least 100 samples, got {}",
            samples.len()
        )));
    }
    let n = samples.len() as f64;
    let m2 = samples.iter().map(|x| x * x).sum::<f64>() / n;
    let m4 = samples.iter().map(|x| (x * x).powi(2)).sum::<f64>() / n;
    if !(m2 > 0.0) {
        return Err(Error::domain("zero variance"));
    }
    Ok(m4 / (m2 * m2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub predicted_exponent: f64,
    pub fitted_exponent: f64,
    pub stderr: f64,
    pub z_score: f64,
    pub threshold: f64,
    pub pass: bool,
    pub extrapolated: bool,
}

pub fn compare_prediction(
    fit: &PowerLawFit,
    pred: &ScalingPrediction,
    threshold: f64,
) -> ComparisonReport {
    let diff = fit.exponent - pred.spectrum_exponent;
    let z_score = if fit.stderr > 0.0 {
        diff / fit.stderr
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };
    ComparisonReport {
        predicted_exponent: pred.spectrum_exponent,
        fitted_exponent: fit.exponent,
        stderr: fit.stderr,
        z_score,
        threshold,
        pass: z_score.abs() < threshold,
        extrapolated: pred.extrapolated,
    }
}

impl std::fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "predicted exponent : {:.6}", self.predicted_exponent)?;
        writeln!(f, "fitted exponent    : {:.6} +/- {:.6}", self.fitted_exponent, self.stderr)?;
        writeln!(f, "z-score            : {:.3} (threshold {})", self.z_score, self.threshold)?;
        writeln!(f, "extrapolated       : {}", self.extrapolated)?;
        write!(f, "result             : {}", if self.pass { "PASS" } else { "FAIL" })
    }
}
