//! Acceptance criteria, one report line each. Run with `--nocapture` to see the table.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use levyturb::analysis::{compare_prediction, fit_power_law};
use levyturb::diffusion::{
    ctrw_simulate, default_cutoff, propagator, sample_levy_stable, width_exponent,
};
use levyturb::mittag_leffler::mittag_leffler;
use levyturb::operators::{apply_fractional_laplacian, caputo_derivative};
use levyturb::scaling::{infer_orders_from_msd, msd_exponent, predict};
use levyturb::solver::{self, Forcing, SolverConfig, SpectrumShape};
use levyturb::{FractionalOrders, GridSpec, SpectralField};
use num_complex::Complex64;
use serde_json::Value;

type Outcome = (bool, String);

fn orders(beta: f64, mu: f64) -> FractionalOrders {
    FractionalOrders::new(beta, mu).unwrap()
}

fn exponent_table() -> Outcome {
    let exact = [
        ((2.0, 0.0), -5.0 / 3.0),
        ((0.5, 0.0), -8.0 / 3.0),
        ((1.0, 0.0), -7.0 / 3.0),
        ((2.0 / 3.0, 0.0), -23.0 / 9.0),
        ((2.0, 0.5), -7.0 / 5.0),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for ((b, m), want) in exact {
        let got = predict(orders(b, m)).spectrum_exponent;
        ok &= got == want;
        detail.push(format!("{got:.6}"));
    }
    let lo = predict(orders(1e-9, 0.0)).spectrum_exponent;
    let hi = predict(orders(2.0, 1.0 - 1e-9)).spectrum_exponent;
    ok &= (lo + 3.0).abs() < 1e-8 && (hi + 1.0).abs() < 1e-8;
    (ok, format!("anchors [{}], limits {lo:.10} {hi:.10}", detail.join(", ")))
}

fn eta_table() -> Outcome {
    let r = msd_exponent(orders(2.0 / 3.0, 0.0));
    let m = msd_exponent(orders(2.0, 0.5));
    let inv_r = infer_orders_from_msd(3.0).unwrap();
    let inv_m = infer_orders_from_msd(0.5).unwrap();
    let ok = r == 3.0 && m == 0.5 && inv_r == orders(2.0 / 3.0, 0.0) && inv_m == orders(2.0, 0.5);
    (ok, format!("eta {r} and {m}; inverses {inv_r:?} and {inv_m:?}"))
}

fn operators() -> Outcome {
    let g = GridSpec::square(32).unwrap();
    let mut worst: f64 = 0.0;
    for &beta in &[0.3, 1.0, 2.0 / 3.0, 1.5, 2.0] {
        for &(mx, my) in &[(1i64, 0i64), (3, 4), (-7, 2), (10, -10)] {
            let mut f = SpectralField::zeros(g);
            f.set(mx, my, Complex64::new(1.0, 0.0));
            let out = apply_fractional_laplacian(&f, beta).unwrap();
            let lambda = (((mx * mx + my * my) as f64).sqrt()).powf(beta);
            worst = worst.max((out.get(mx, my).re - lambda).abs() / lambda);
        }
    }
    let mut errs = Vec::new();
    for &dt in &[1e-2, 5e-3, 2.5e-3] {
        let n = (1.0 / dt) as usize;
        let t: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
        let d = caputo_derivative(&t, dt, 0.5).unwrap();
        errs.push((d[n] - 2.0 / std::f64::consts::PI.sqrt()).abs());
    }
    let orders_seen: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let ok = worst < 1e-12 && orders_seen.iter().all(|p| (p - 1.0).abs() < 0.1);
    let errs: Vec<String> = errs.iter().map(|e| format!("{e:.2e}")).collect();
    (
        ok,
        format!("eigenvalue rel err {worst:.1e}; Caputo errors [{}], orders {orders_seen:.3?}", errs.join(", ")),
    )
}

fn mittag_leffler_values() -> Outcome {
    let a = mittag_leffler(1.0, -2.0).unwrap();
    let b = mittag_leffler(0.5, -1.0).unwrap();
    let ok = (a - (-2.0f64).exp()).abs() < 1e-10 && (b - 0.427584).abs() < 1e-6;
    (ok, format!("E_1(-2)={a:.12}, E_1/2(-1)={b:.8}"))
}

fn linear_exactness() -> Outcome {
    let cfg = SolverConfig {
        grid: GridSpec::square(64).unwrap(),
        orders: orders(1.5, 0.0),
        nu: 0.05,
        dt: 0.01,
        t_end: 1.0,
        nonlinear: false,
        initial: SpectrumShape::Peak { k_peak: 8.0, width: 6.0, energy: 1.0 },
        ..SolverConfig::default()
    };
    let mut s = solver::Solver::new(cfg.clone()).unwrap();
    let init = s.init_state(&cfg.initial).unwrap();
    let w0 = init.omega_hat.clone();
    let out = s.run_from(init).unwrap();
    let t = out.final_state.time;
    let g = cfg.grid;
    let mut worst: f64 = 0.0;
    for i in 0..g.len() {
        let (mx, my) = g.mode_of(i);
        let k = ((mx * mx + my * my) as f64).sqrt();
        let want = w0.coeffs()[i] * (-cfg.nu * k.powf(1.5) * t).exp();
        let got = out.final_state.omega_hat.coeffs()[i];
        if want.norm() > 0.0 {
            worst = worst.max((got - want).norm() / want.norm());
        }
    }
    (
        worst < 1e-12 && out.diagnostics.len() == 101,
        format!("100 steps, max relative mode error {worst:.1e}"),
    )
}

fn inviscid_conservation() -> Outcome {
    let cfg = SolverConfig {
        grid: GridSpec::square(64).unwrap(),
        nu: 0.0,
        dt: 2e-3,
        t_end: 2.0,
        ..SolverConfig::default()
    };
    let out = solver::run(&cfg).unwrap();
    let (first, last) = (&out.diagnostics[0], out.diagnostics.last().unwrap());
    let de = ((last.energy - first.energy) / first.energy).abs();
    let dz = ((last.enstrophy - first.enstrophy) / first.enstrophy).abs();
    (
        de < 1e-8 && dz < 1e-8 && last.step == 1000,
        format!("1000 steps, energy drift {de:.1e}, enstrophy drift {dz:.1e}"),
    )
}

fn propagators() -> Outcome {
    let delta = |n: usize| {
        let g = GridSpec::line(n, 2.0 * std::f64::consts::PI).unwrap();
        SpectralField::from_coeffs(g, vec![Complex64::new(0.5 / std::f64::consts::PI, 0.0); n]).unwrap()
    };
    let u0 = delta(1024);
    let (gamma, t) = (0.5, 0.4);
    let heat = propagator(&u0, orders(2.0, 0.0), gamma, t).unwrap().to_real();
    let var = 2.0 * gamma * t;
    let mut heat_err: f64 = 0.0;
    for (i, v) in heat.iter().enumerate() {
        let x = u0.grid().point(i).0;
        let exact: f64 = (-4..=4)
            .map(|m| {
                let y = x + 2.0 * std::f64::consts::PI * m as f64;
                (-y * y / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
            })
            .sum();
        heat_err = heat_err.max((v - exact).abs());
    }
    let cauchy = propagator(&u0, orders(1.0, 0.0), gamma, t).unwrap().to_real();
    let s = gamma * t;
    let mut cauchy_err: f64 = 0.0;
    for (i, v) in cauchy.iter().enumerate() {
        let x = u0.grid().point(i).0;
        let exact = s.sinh() / (s.cosh() - x.cos()) / (2.0 * std::f64::consts::PI);
        cauchy_err = cauchy_err.max((v - exact).abs());
    }
    (
        heat_err < 1e-8 && cauchy_err < 1e-6,
        format!("n=1024: heat kernel max err {heat_err:.1e}, Cauchy max err {cauchy_err:.1e}"),
    )
}

fn ctrw_exponents() -> Outcome {
    let cases = [
        (orders(2.0, 0.0), 1000.0, None, 1.0, 0.05),
        (orders(2.0, 0.5), 1e4, None, 0.5, 0.1),
        (orders(1.5, 0.0), 1000.0, Some(0.5), 4.0 / 3.0, 0.1),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (o, t_max, q, want, tol) in cases {
        let cut = (o.beta() < 2.0).then(|| default_cutoff(o, t_max));
        let e = ctrw_simulate(o, 100_000, t_max, 2024, cut).unwrap();
        let w = width_exponent(&e, q).unwrap();
        ok &= (w.eta - want).abs() <= tol;
        detail.push(format!("({}, {}) eta={:.4} want {want:.4}+-{tol}", o.beta(), o.mu(), w.eta));
    }
    (ok, format!("1e5 particles: {}", detail.join("; ")))
}

fn mean_se(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = v.collect();
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn sampler_distribution() -> Outcome {
    const N: usize = 1_000_000;
    let g = sample_levy_stable(2.0, N, 77).unwrap();
    let (var, se) = mean_se(g.iter().map(|x| x * x));
    let mut ok = (var - 2.0).abs() < 3.0 * se;
    let mut c = sample_levy_stable(1.0, N, 78).unwrap();
    c.sort_by(f64::total_cmp);
    let (q1, q3) = (c[N / 4], c[3 * N / 4]);
    ok &= (q1 + 1.0).abs() < 0.01 && (q3 - 1.0).abs() < 0.01;
    let mut worst_z: f64 = 0.0;
    for (i, &beta) in [0.5, 1.0, 1.5, 2.0].iter().enumerate() {
        let x = sample_levy_stable(beta, N, 79 + i as u64).unwrap();
        for &k in &[0.5, 1.0, 2.0] {
            let (m, se) = mean_se(x.iter().map(|v| (k * v).cos()));
            let want = (-f64::powf(k, beta)).exp();
            worst_z = worst_z.max((m - want).abs() / se);
        }
    }
    ok &= worst_z < 3.0;
    (
        ok,
        format!("n=1e6: var {var:.4}+-{se:.4}, quartiles {q1:.4} {q3:.4}, worst CF |z| {worst_z:.2}"),
    )
}

fn forced_steady_state() -> Outcome {
    let cfg = SolverConfig {
        grid: GridSpec::square(256).unwrap(),
        orders: FractionalOrders::kolmogorov(),
        nu: 0.1,
        dt: 0.01,
        t_end: 30.0,
        forcing: Forcing::Band { k_lo: 4.0, k_hi: 6.0, amplitude: 20.0, seed: 5 },
        initial: SpectrumShape::Peak { k_peak: 5.0, width: 1.0, energy: 0.0 },
        ..SolverConfig::default()
    };
    let out = solver::run(&cfg).unwrap();
    let d = &out.diagnostics;
    let half = &d[d.len() / 2..];
    let p = half.iter().map(|x| x.injection_rate).sum::<f64>() / half.len() as f64;
    let diss = half.iter().map(|x| x.dissipation_rate).sum::<f64>() / half.len() as f64;
    let imbalance = (p - diss).abs() / diss;
    let worst = d[1..].iter().map(|x| x.budget_residual).fold(0.0, f64::max);
    (
        imbalance < 0.1 && worst < 1e-3,
        format!("n=256, t=0..30: final-half P={p:.5} D={diss:.5} (imbalance {imbalance:.3}), max budget residual {worst:.1e}"),
    )
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("levyturb-acc-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_cli(args: &[&str], out: &Path, threads: &str) -> (Vec<u8>, Value) {
    let o = Command::new(env!("CARGO_BIN_EXE_levyturb"))
        .args(args)
        .args(["--threads", threads, "--output-dir"])
        .arg(out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = std::fs::read_to_string(out.join("manifest.json"))
        .ok()
        .map(|t| serde_json::from_str::<Value>(&t).unwrap()["outputs"].clone())
        .unwrap_or(Value::Null);
    (o.stdout, m)
}

fn determinism() -> Outcome {
    let dir = scratch("det");
    let ns = dir.join("ns.json");
    std::fs::write(
        &ns,
        r#"{"grid": {"dims": 2, "n": 64, "length": 6.283185307179586}, "orders": {"beta": 1.5, "mu": 0.3},
            "nu": 0.01, "dt": 0.005, "t_end": 0.25, "history_len": 64, "snapshot_times": [0.1],
            "forcing": {"type": "band", "k_lo": 3, "k_hi": 5, "amplitude": 2.0, "seed": 8}}"#,
    )
    .unwrap();
    let ctrw = dir.join("ctrw.json");
    std::fs::write(&ctrw, r#"{"preset": "richardson", "n_particles": 20000, "t_max": 200.0}"#).unwrap();
    let mut spectrum = String::from("shell,k_center,energy\n");
    for k in 1..=20 {
        spectrum += &format!("{k},{k}.0,{:.16e}\n", (k as f64).powf(-23.0 / 9.0));
    }
    std::fs::write(dir.join("s.csv"), spectrum).unwrap();

    let ns_s = ns.to_str().unwrap();
    let ctrw_s = ctrw.to_str().unwrap();
    let fit = dir.join("s.csv");
    let fit_s = fit.to_str().unwrap();
    let runs: [(&str, Vec<&str>); 4] = [
        ("ns-run", vec!["ns-run", ns_s, "--seed", "3"]),
        ("ctrw-run", vec!["ctrw-run", ctrw_s, "--seed", "3"]),
        ("predict", vec!["predict", "--beta", "0.6667", "--mu", "0.1", "--json"]),
        (
            "spectrum-fit",
            vec!["spectrum-fit", fit_s, "--k-min", "2", "--k-max", "18", "--beta", "0.6666666666666666", "--json"],
        ),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, args) in runs {
        let a = run_cli(&args, &dir.join(format!("{name}-a")), "1");
        let b = run_cli(&args, &dir.join(format!("{name}-b")), "4");
        let same = if a.1.is_null() { a.0 == b.0 } else { a.1 == b.1 };
        ok &= same;
        detail.push(format!("{name} {}", if same { "identical" } else { "DIFFERENT" }));
    }
    let _ = std::fs::remove_dir_all(&dir);
    (ok, format!("threads 1 vs 4: {}", detail.join(", ")))
}

#[test]
fn acceptance() {
    // (id, name, check, time budget in seconds)
    let criteria: [(u32, &str, fn() -> Outcome, f64); 11] = [
        (1, "exponent table", exponent_table, 1.0),
        (2, "eta reproduction", eta_table, 1.0),
        (3, "operator correctness", operators, 10.0),
        (4, "Mittag-Leffler", mittag_leffler_values, 1.0),
        (5, "linear solver exactness", linear_exactness, 10.0),
        (6, "inviscid conservation", inviscid_conservation, 60.0),
        (7, "diffusion propagator", propagators, 10.0),
        (8, "CTRW exponent recovery", ctrw_exponents, 300.0),
        (9, "sampler distribution", sampler_distribution, 60.0),
        (10, "forced steady state and energy budget", forced_steady_state, 600.0),
        (11, "determinism", determinism, 120.0),
    ];
    let mut failed = Vec::new();
    for (id, name, check, budget) in criteria {
        let start = Instant::now();
        let (ok, detail) = check();
        let pass = ok && start.elapsed().as_secs_f64() <= budget;
        let verdict = if pass { "PASS" } else { "FAIL" };
        // Written to the raw handle so the table shows without --nocapture.
        writeln!(
            std::io::stdout(),
            "criterion {id:>2} {verdict} {name}: {detail} [{:.1}s of {budget}s]",
            start.elapsed().as_secs_f64()
        )
        .unwrap();
        if !pass {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

/// Spectrum slope from a forced n=512 run compared with the prediction; informational.
#[test]
#[ignore = "takes tens of minutes on one core"]
fn spectrum_fit_n512() {
    let cfg = SolverConfig {
        grid: GridSpec::square(512).unwrap(),
        nu: 2e-3,
        dt: 2.5e-3,
        t_end: 20.0,
        forcing: Forcing::Band { k_lo: 30.0, k_hi: 34.0, amplitude: 200.0, seed: 1 },
        initial: SpectrumShape::Peak { k_peak: 32.0, width: 2.0, energy: 0.0 },
        ..SolverConfig::default()
    };
    let out = solver::run(&cfg).unwrap();
    let fit = fit_power_law(&out.final_spectrum, 4.0, 25.0).unwrap();
    let report = compare_prediction(&fit, &predict(cfg.orders), 3.0);
    println!("n=512 inverse-cascade range k in [4, 25]:\n{report}");
}
