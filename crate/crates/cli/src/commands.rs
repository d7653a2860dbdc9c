//! Subcommand implementations.

use std::path::Path;

use levyturb::analysis::{compare_prediction, fit_power_law};
use levyturb::diffusion::{ctrw_simulate, width_exponent};
use levyturb::scaling::predict;
use levyturb::solver::{self, SolverConfig};
use levyturb::{FractionalOrders, ScalingPrediction};
use serde_json::{json, Value};

use crate::config::{snapshot, CtrwConfig};
use crate::output::{diagnostics_csv, msd_csv, parse_spectrum_csv, spectrum_csv, unix_now, Artifacts, RunManifest};
use crate::CliError;

/// `-23/9` style rendering when `x` is a small-denominator fraction.
pub fn fraction(x: f64) -> String {
    for den in 1..=12i64 {
        let num = (x * den as f64).round();
        if (num / den as f64 - x).abs() < 1e-12 {
            return if den == 1 {
                format!("{num}")
            } else {
                format!("{num}/{den}")
            };
        }
    }
    format!("{x:.6}")
}

fn prediction_table(orders: FractionalOrders, p: &ScalingPrediction) -> String {
    let mut s = format!("orders             beta={} mu={}\n", orders.beta(), orders.mu());
    s += &format!(
        "spectrum exponent  {} ({:.12})\n",
        fraction(p.spectrum_exponent),
        p.spectrum_exponent
    );
    s += &format!("flux power         {} ({:.12})\n", fraction(p.flux_power), p.flux_power);
    s += &format!("msd exponent eta   {} ({:.12})\n", fraction(p.msd_exponent), p.msd_exponent);
    s += &format!("regime             {}\n", p.regime);
    s += &format!("extrapolated       {}\n", p.extrapolated);
    s
}

pub fn predict_cmd(beta: f64, mu: f64, as_json: bool) -> Result<(), CliError> {
    let orders = FractionalOrders::new(beta, mu)?;
    let p = predict(orders);
    if as_json {
        let v = json!({"orders": orders, "prediction": p});
        println!("{}", serde_json::to_string_pretty(&v).expect("serializes"));
    } else {
        print!("{}", prediction_table(orders, &p));
    }
    Ok(())
}

pub fn ns_run(cfg: &SolverConfig, out_dir: &Path) -> Result<RunManifest, CliError> {
    let started = unix_now();
    let p = predict(cfg.orders);
    println!("# ns-run n={} nu={} dt={} t_end={}", cfg.grid.n, cfg.nu, cfg.dt, cfg.t_end);
    print!("{}", prediction_table(cfg.orders, &p));
    let out = solver::run(cfg)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    let mut art = Artifacts::new(out_dir)?;
    art.write("spectrum.csv", &spectrum_csv(&out.final_spectrum))?;
    art.write("diagnostics.csv", &diagnostics_csv(&out.diagnostics))?;
    for (i, (_, s)) in out.snapshots.iter().enumerate() {
        art.write(&format!("spectrum_snapshot_{i:03}.csv"), &spectrum_csv(s))?;
    }
    let last = out.diagnostics.last().expect("initial diagnostics present");
    println!(
        "final t={} energy={:.6e} enstrophy={:.6e} dissipation={:.6e}",
        last.time, last.energy, last.enstrophy, last.dissipation_rate
    );
    art.finish("ns-run", cfg.seed, snapshot(cfg), started)
}

pub fn ctrw_run(cfg: &CtrwConfig, out_dir: &Path) -> Result<RunManifest, CliError> {
    let started = unix_now();
    let p = predict(cfg.orders);
    println!(
        "# ctrw-run particles={} t_max={} truncation={}",
        cfg.n_particles,
        cfg.t_max,
        cfg.truncation.map_or("none".to_string(), |c| format!("{c}"))
    );
    print!("{}", prediction_table(cfg.orders, &p));
    let ensemble = ctrw_simulate(cfg.orders, cfg.n_particles, cfg.t_max, cfg.seed, cfg.truncation)?;
    let w = width_exponent(&ensemble, cfg.q)?;
    let mut art = Artifacts::new(out_dir)?;
    art.write("msd.csv", &msd_csv(&w.series))?;
    println!(
        "fitted eta         {:.6} +- {:.6} (q={}, window [{:.4e}, {:.4e}], {} points)",
        w.eta, w.stderr, w.q, w.window.0, w.window.1, w.points
    );
    art.finish("ctrw-run", cfg.seed, snapshot(cfg), started)
}

pub fn spectrum_fit(
    csv: &Path,
    k_min: f64,
    k_max: f64,
    beta: f64,
    mu: f64,
    threshold: f64,
    as_json: bool,
) -> Result<(), CliError> {
    let orders = FractionalOrders::new(beta, mu)?;
    let series = parse_spectrum_csv(csv)?;
    let fit = fit_power_law(&series, k_min, k_max)?;
    let report = compare_prediction(&fit, &predict(orders), threshold);
    if as_json {
        let v = json!({"fit": fit, "report": report});
        println!("{}", serde_json::to_string_pretty(&v).expect("serializes"));
    } else {
        println!("{report}");
    }
    Ok(())
}

/// Re-run the command recorded in a manifest and compare digests.
pub fn replay(manifest: &RunManifest, out_dir: &Path) -> Result<bool, CliError> {
    let config = Value::Object(manifest.config.clone());
    let rerun = match manifest.command.as_str() {
        "ns-run" => {
            let cfg: SolverConfig =
                serde_json::from_value(config).map_err(|e| CliError::config(e.to_string()))?;
            ns_run(&cfg, out_dir)?
        }
        "ctrw-run" => {
            let cfg: CtrwConfig =
                serde_json::from_value(config).map_err(|e| CliError::config(e.to_string()))?;
            ctrw_run(&cfg, out_dir)?
        }
        other => return Err(CliError::config(format!("cannot replay command `{other}`"))),
    };
    let same = rerun.outputs == manifest.outputs;
    for (a, b) in manifest.outputs.iter().zip(&rerun.outputs) {
        let status = if a == b { "match" } else { "DIFFERS" };
        println!("{:<28} {status}", a.file);
    }
    if manifest.outputs.len() != rerun.outputs.len() {
        println!(
            "output count differs: {} recorded, {} produced",
            manifest.outputs.len(),
            rerun.outputs.len()
        );
    }
    Ok(same)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_simple_fractions() {
        assert_eq!(fraction(-23.0 / 9.0), "-23/9");
        assert_eq!(fraction(-5.0 / 3.0), "-5/3");
        assert_eq!(fraction(3.0), "3");
        assert_eq!(fraction(0.5), "1/2");
        assert_eq!(fraction(std::f64::consts::PI), "3.141593");
    }
}
