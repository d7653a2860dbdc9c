//! Closed-form scaling exponents of the fractional Navier-Stokes family.
//!
//! Two one-parameter families are known on the axes of the `(beta, mu)` plane:
//!
//! - `mu = 0` (fractional-Laplacian dissipation): `E(k) ~ eps^{2/3} k^{-(9 - 2 beta)/3}`,
//!   running from `-3` (`beta -> 0`) to the Kolmogorov `-5/3` (`beta = 2`).
//! - `beta = 2` (fractional-time dissipation): `E(k) ~ k^{-(5 - 3 mu)/(3 - mu)}`,
//!   running from `-5/3` (`mu = 0`) to `-1` (`mu -> 1`).
//!
//! Both follow from an eddy-turnover balance: with `t_k = 1/(k u_k)`, the scaled flux
//! `eps~ = (u_k^3 k) t_k^mu k^(2 - beta) = u_k^{3-mu} k^{3-mu-beta}` is constant across the
//! inertial range, so `E(k) = u_k^2 / k ~ eps~^{2/(3-mu)} k^{-(9 - 2 beta - 3 mu)/(3 - mu)}`.
//! Note that `-(5 - 3 mu)/3` is *not* the fractional-time exponent: it reaches `-2/3`
//! instead of `-1` as `mu -> 1`, and gives `-7/6` instead of `-7/5` at `mu = 1/2`.
//!
//! Interior points (`beta != 2` and `mu != 0`) use the combined eddy-turnover formula and
//! are flagged as extrapolated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for deciding that a mean-square-displacement exponent is exactly normal.
pub const NORMAL_TRANSPORT_TOL: f64 = 1e-12;

/// Space (`beta`) and time (`mu`) fractional orders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OrdersRepr", into = "OrdersRepr")]
pub struct FractionalOrders {
    beta: f64,
    mu: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OrdersRepr {
    beta: f64,
    mu: f64,
}

impl TryFrom<OrdersRepr> for FractionalOrders {
    type Error = Error;

    fn try_from(r: OrdersRepr) -> Result<Self> {
        FractionalOrders::new(r.beta, r.mu)
    }
}

impl From<FractionalOrders> for OrdersRepr {
    fn from(o: FractionalOrders) -> Self {
        OrdersRepr {
            beta: o.beta,
            mu: o.mu,
        }
    }
}

impl FractionalOrders {
    pub fn new(beta: f64, mu: f64) -> Result<Self> {
        check_beta(beta)?;
        check_mu(mu)?;
        Ok(Self { beta, mu })
    }

    /// Classical Navier-Stokes: `beta = 2`, `mu = 0`.
    pub fn kolmogorov() -> Self {
        Self { beta: 2.0, mu: 0.0 }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// True off both axes of the `(beta, mu)` plane.
    pub fn extrapolated(&self) -> bool {
        self.beta != 2.0 && self.mu != 0.0
    }
}

impl std::fmt::Display for FractionalOrders {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(beta={}, mu={})", self.beta, self.mu)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 && beta <= 2.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("beta must lie in (0, 2], got {beta}")))
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if mu.is_finite() && (0.0..1.0).contains(&mu) {
        Ok(())
    } else {
        Err(Error::domain(format!("mu must lie in [0, 1), got {mu}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Subdiffusion,
    Normal,
    Superdiffusion,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::Subdiffusion => "subdiffusion",
            Regime::Normal => "normal",
            Regime::Superdiffusion => "superdiffusion",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPrediction {
    /// `p` in `E(k) ~ k^p`.
    pub spectrum_exponent: f64,
    /// `a` in `E(k) ~ eps^a`.
    pub flux_power: f64,
    /// `eta` in `<dx^2> ~ dt^eta`.
    pub msd_exponent: f64,
    pub regime: Regime,
    pub extrapolated: bool,
}

/// Spectrum exponent `-(9 - 2 beta)/3` of the fractional-Laplacian family.
pub fn levy_kolmogorov_exponent(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(lk_exponent(beta))
}

// Written as `2 beta/3 - 3`: this rounding hits -23/9 at beta = 2/3 exactly.
fn lk_exponent(beta: f64) -> f64 {
    2.0 * beta / 3.0 - 3.0
}

/// Spectrum exponent `-(5 - 3 mu)/(3 - mu)` of the fractional-time family (`beta = 2`).
pub fn fbm_exponent(mu: f64) -> Result<f64> {
    check_mu(mu)?;
    Ok(-(5.0 - 3.0 * mu) / (3.0 - mu))
}

/// Spectrum exponent `-(9 - 2 beta - 3 mu)/(3 - mu)`.
///
/// The operation order matches [`levy_kolmogorov_exponent`] and [`fbm_exponent`] so the
/// axis reductions hold bit for bit.
pub fn combined_exponent(orders: FractionalOrders) -> f64 {
    let (beta, mu) = (orders.beta, orders.mu);
    if mu == 0.0 {
        lk_exponent(beta)
    } else if beta == 2.0 {
        -(5.0 - 3.0 * mu) / (3.0 - mu)
    } else {
        -((9.0 - 2.0 * beta) - 3.0 * mu) / (3.0 - mu)
    }
}

/// Power of the energy flux in the spectrum prefactor, `2/(3 - mu)`.
pub fn energy_flux_power(orders: FractionalOrders) -> f64 {
    2.0 / (3.0 - orders.mu)
}

/// Mean-square-displacement exponent `eta = 2(1 - mu)/beta`.
pub fn msd_exponent(orders: FractionalOrders) -> f64 {
    2.0 * (1.0 - orders.mu) / orders.beta
}

pub fn classify_transport(eta: f64) -> Result<Regime> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::domain(format!("eta must be positive, got {eta}")));
    }
    Ok(if (eta - 1.0).abs() <= NORMAL_TRANSPORT_TOL {
        Regime::Normal
    } else if eta < 1.0 {
        Regime::Subdiffusion
    } else {
        Regime::Superdiffusion
    })
}

/// Recover fractional orders from a measured MSD exponent.
///
/// Superdiffusion is attributed to Levy jumps (`beta = 2/eta`, `mu = 0`), sub- and
/// normal diffusion to memory (`beta = 2`, `mu = 1 - eta`). `eta > 2` would need
/// `beta < 1`, which is allowed; `eta` must stay finite and positive.
pub fn infer_orders_from_msd(eta: f64) -> Result<FractionalOrders> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::domain(format!("eta must be positive, got {eta}")));
    }
    if eta > 1.0 {
        FractionalOrders::new(2.0 / eta, 0.0)
    } else {
        FractionalOrders::new(2.0, 1.0 - eta)
    }
}

pub fn predict(orders: FractionalOrders) -> ScalingPrediction {
    let eta = msd_exponent(orders);
    ScalingPrediction {
        spectrum_exponent: combined_exponent(orders),
        flux_power: energy_flux_power(orders),
        msd_exponent: eta,
        // eta > 0 for every admissible pair.
        regime: classify_transport(eta).expect("admissible orders give eta > 0"),
        extrapolated: orders.extrapolated(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn orders(beta: f64, mu: f64) -> FractionalOrders {
        FractionalOrders::new(beta, mu).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 4.0 * f64::EPSILON * b.abs().max(1.0)
    }

    #[test]
    fn levy_kolmogorov_anchor_values() {
        assert_eq!(levy_kolmogorov_exponent(2.0).unwrap(), -5.0 / 3.0);
        assert_eq!(levy_kolmogorov_exponent(0.5).unwrap(), -8.0 / 3.0);
        assert_eq!(levy_kolmogorov_exponent(1.0).unwrap(), -7.0 / 3.0);
        assert_eq!(levy_kolmogorov_exponent(2.0 / 3.0).unwrap(), -23.0 / 9.0);
        assert!((levy_kolmogorov_exponent(1e-12).unwrap() + 3.0).abs() < 1e-11);
    }

    #[test]
    fn fbm_anchor_values() {
        assert_eq!(fbm_exponent(0.0).unwrap(), -5.0 / 3.0);
        assert_eq!(fbm_exponent(0.5).unwrap(), -7.0 / 5.0);
        assert!((fbm_exponent(1.0 - 1e-12).unwrap() + 1.0).abs() < 1e-11);
    }

    #[test]
    fn out_of_range_orders_are_domain_errors() {
        for b in [0.0, -1.0, 2.0000001, f64::NAN] {
            assert!(matches!(levy_kolmogorov_exponent(b), Err(Error::Domain(_))));
            assert!(FractionalOrders::new(b, 0.0).is_err());
        }
        for m in [-0.1, 1.0, 1.5, f64::INFINITY] {
            assert!(matches!(fbm_exponent(m), Err(Error::Domain(_))));
            assert!(FractionalOrders::new(2.0, m).is_err());
        }
    }

    #[test]
    fn combined_exponent_examples() {
        assert_eq!(combined_exponent(orders(2.0, 0.0)), -5.0 / 3.0);
        assert_eq!(combined_exponent(orders(2.0 / 3.0, 0.0)), -23.0 / 9.0);
        assert_eq!(combined_exponent(orders(2.0, 0.5)), -7.0 / 5.0);
        assert!(close(combined_exponent(orders(1.0, 0.5)), -2.2));
    }

    /// Eddy-turnover oracle: hold the scaled flux `(u^3 k) t_k^mu k^(2-beta)` with
    /// `t_k = 1/(k u)` fixed, solve for `u_k` by bisection, set `E(k) = u_k^2 / k`, and
    /// read the exponent off the log-log slope.
    #[test]
    fn combined_exponent_matches_eddy_turnover_balance() {
        fn velocity(k: f64, beta: f64, mu: f64) -> f64 {
            let flux = |u: f64| (u * u * u * k) * (1.0 / (k * u)).powf(mu) * k.powf(2.0 - beta);
            let (mut lo, mut hi) = (1e-12_f64, 1e12_f64);
            for _ in 0..400 {
                let mid = (lo * hi).sqrt();
                if flux(mid) < 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (lo * hi).sqrt()
        }
        for &(beta, mu) in &[(2.0, 0.0), (0.5, 0.0), (2.0, 0.5), (1.0, 0.5), (1.3, 0.2)] {
            let spectrum = |k: f64| velocity(k, beta, mu).powi(2) / k;
            let (k1, k2) = (3.0_f64, 300.0_f64);
            let slope = (spectrum(k2).ln() - spectrum(k1).ln()) / (k2.ln() - k1.ln());
            let formula = combined_exponent(orders(beta, mu));
            assert!((slope - formula).abs() < 1e-10, "{beta} {mu}: {slope} vs {formula}");
        }
    }

    #[test]
    fn flux_power_examples() {
        assert_eq!(energy_flux_power(orders(1.0, 0.0)), 2.0 / 3.0);
        assert!(close(energy_flux_power(orders(2.0, 0.5)), 0.8));
        assert!((energy_flux_power(orders(2.0, 1.0 - 1e-12)) - 1.0).abs() < 1e-11);
    }

    #[test]
    fn msd_examples() {
        assert_eq!(msd_exponent(orders(2.0, 0.0)), 1.0);
        assert_eq!(msd_exponent(orders(2.0 / 3.0, 0.0)), 3.0);
        assert_eq!(msd_exponent(orders(2.0, 0.5)), 0.5);
    }

    #[test]
    fn classification() {
        assert_eq!(classify_transport(0.5).unwrap(), Regime::Subdiffusion);
        assert_eq!(classify_transport(1.0).unwrap(), Regime::Normal);
        assert_eq!(classify_transport(1.0 + 1e-13).unwrap(), Regime::Normal);
        assert_eq!(classify_transport(3.0).unwrap(), Regime::Superdiffusion);
        assert!(classify_transport(0.0).is_err());
        assert!(classify_transport(-2.0).is_err());
    }

    #[test]
    fn inference_examples() {
        assert_eq!(infer_orders_from_msd(3.0).unwrap(), orders(2.0 / 3.0, 0.0));
        assert_eq!(infer_orders_from_msd(0.5).unwrap(), orders(2.0, 0.5));
        assert_eq!(infer_orders_from_msd(1.0).unwrap(), orders(2.0, 0.0));
        assert!(infer_orders_from_msd(0.0).is_err());
    }

    #[test]
    fn predict_bundles() {
        let p = predict(orders(2.0, 0.0));
        assert_eq!(p.spectrum_exponent, -5.0 / 3.0);
        assert_eq!(p.flux_power, 2.0 / 3.0);
        assert_eq!(p.msd_exponent, 1.0);
        assert_eq!(p.regime, Regime::Normal);
        assert!(!p.extrapolated);

        let p = predict(orders(1.0, 0.0));
        assert_eq!(p.spectrum_exponent, -7.0 / 3.0);
        assert_eq!(p.msd_exponent, 2.0);
        assert_eq!(p.regime, Regime::Superdiffusion);

        let p = predict(orders(2.0, 0.5));
        assert_eq!(p.spectrum_exponent, -7.0 / 5.0);
        assert!(close(p.flux_power, 0.8));
        assert_eq!(p.regime, Regime::Subdiffusion);

        assert!(predict(orders(1.3, 0.2)).extrapolated);
    }

    #[test]
    fn monotone_on_grid() {
        let mut prev = f64::NEG_INFINITY;
        for i in 1..=2000 {
            let v = levy_kolmogorov_exponent(i as f64 * 1e-3).unwrap();
            assert!(v > prev);
            prev = v;
        }
        let mut prev = f64::NEG_INFINITY;
        for i in 0..1000 {
            let v = fbm_exponent(i as f64 * 1e-3).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn deserialization_path_validates() {
        assert!(FractionalOrders::try_from(OrdersRepr { beta: 3.0, mu: 0.0 }).is_err());
        let o = FractionalOrders::try_from(OrdersRepr { beta: 1.5, mu: 0.25 }).unwrap();
        assert_eq!(o, orders(1.5, 0.25));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn combined_reduces_to_levy_kolmogorov(beta in 1e-9f64..=2.0) {
            prop_assert_eq!(
                combined_exponent(orders(beta, 0.0)),
                levy_kolmogorov_exponent(beta).unwrap()
            );
        }

        #[test]
        fn combined_reduces_to_fbm(mu in 0.0f64..1.0) {
            prop_assert_eq!(combined_exponent(orders(2.0, mu)), fbm_exponent(mu).unwrap());
        }

        #[test]
        fn inference_round_trips(eta in 1e-9f64..=10.0) {
            let o = infer_orders_from_msd(eta).unwrap();
            prop_assert!((msd_exponent(o) - eta).abs() <= 1e-12 * eta.max(1.0));
        }

        #[test]
        fn interior_exponent_in_open_band(beta in 1e-6f64..2.0, mu in 1e-6f64..0.999) {
            let p = combined_exponent(orders(beta, mu));
            prop_assert!(p > -3.0 && p < -1.0, "{}", p);
            prop_assert!(msd_exponent(orders(beta, mu)) > 0.0);
        }
    }
}
