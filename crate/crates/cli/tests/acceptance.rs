//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::Path;
use std::process::{Command, ExitCode};

use fbmdiff::densities::{
    fbm_density, histogram_tv_distance, iterated_density, iterated_second_moment,
};
use fbmdiff::diffusivity::{
    classical_integral_residual, diffusivity_value, integral_eq_residual, k_coefficient,
    ode_residual,
};
use fbmdiff::fbm::{
    covariance, empirical_covariance, empirical_msd, fit_power_law, sample_circulant,
    sample_iterated,
};
use fbmdiff::fraccalc::{rl_derivative_power, FracOrder};
use fbmdiff::pdesolve::{
    constraint_residual, solve_diffusion, solve_transport, transport_step_limit, DiffusionProblem,
    TransportProblem,
};
use fbmdiff::quadrature::integrate;
use fbmdiff::{Error, HurstSpec, SpaceGrid, SpaceTimeField, UniformTimeGrid};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn fbmdiff_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fbmdiff"))
}

/// Exact channel of the fractional differential equation for 20 (H, C) pairs.
fn c01_ode_exact_channel() -> Outcome {
    let hs = [
        0.02, 0.05, 0.08, 0.11, 0.14, 0.17, 0.2, 0.23, 0.27, 0.3, 0.33, 0.36, 0.39, 0.42, 0.45,
        0.48, 0.12, 0.29, 0.41, 0.499,
    ];
    let cs = [0.5, 1.0, 0.1, 2.5];
    let mut worst = 0.0_f64;
    for (i, &h) in hs.iter().enumerate() {
        let spec = HurstSpec::new(h, cs[i % cs.len()]).map_err(err)?;
        let k = k_coefficient(&spec).map_err(err)?;
        let order = FracOrder::derivative(1.0 - 2.0 * h).map_err(err)?;
        for j in 1..=10 {
            let t = 0.2 * j as f64;
            let lhs = 2.0
                * h
                * spec.scale()
                * rl_derivative_power(order, 2.0 * h - 1.0, t).map_err(err)?;
            let d = diffusivity_value(&spec, t).map_err(err)?;
            worst = worst.max(((lhs - k * d * d) / (k * d * d)).abs());
        }
    }
    verdict(
        worst <= 1e-12,
        format!("20 pairs x 10 times, max rel {worst:.2e} (<= 1e-12)"),
    )
}

/// Grünwald–Letnikov residual decreases under two halvings, n = 1024 -> 2048 -> 4096.
fn c02_ode_discrete_channel() -> Outcome {
    let spec = HurstSpec::new(0.3, 0.5).map_err(err)?;
    let r1 = ode_residual(
        &spec,
        &UniformTimeGrid::from_span(0.0, 2.0, 1025).map_err(err)?,
    )
    .map_err(err)?;
    let r2 = ode_residual(
        &spec,
        &UniformTimeGrid::from_span(0.0, 2.0, 2049).map_err(err)?,
    )
    .map_err(err)?;
    let (s1, s2) = (
        r1.convergence_slope.unwrap_or(f64::NAN),
        r2.convergence_slope.unwrap_or(f64::NAN),
    );
    let fine = r2.residual_l2 / 2f64.powf(s2);
    verdict(
        s1 > 0.0 && s2 > 0.0 && r1.residual_l2 > r2.residual_l2 && r2.residual_l2 > fine,
        format!(
            "l2 {:.3e} -> {:.3e} -> {:.3e}, slopes {s1:.3} and {s2:.3} (> 0)",
            r1.residual_l2, r2.residual_l2, fine
        ),
    )
}

/// Quadrature residual of the fractional integral equation over [0.1, 2].
fn c03_integral_equation() -> Outcome {
    let grid = UniformTimeGrid::from_span(0.1, 2.0, 39).map_err(err)?;
    let mut parts = Vec::new();
    let mut ok = true;
    for (h, c) in [(0.7, 0.5), (0.9, 1.0)] {
        let r = integral_eq_residual(&HurstSpec::new(h, c).map_err(err)?, &grid).map_err(err)?;
        ok &= r.residual_linf <= 1e-7;
        parts.push(format!("(H={h}, C={c}) linf {:.2e}", r.residual_linf));
    }
    verdict(ok, format!("{} (<= 1e-7)", parts.join(", ")))
}

/// H = 1/4: library error and CLI exit code 2.
fn c04_quarter_degeneracy() -> Outcome {
    let lib = k_coefficient(&HurstSpec::new(0.25, 0.5).map_err(err)?);
    let lib_ok = matches!(lib, Err(Error::DegenerateHurst { .. }));
    let dir = tempfile::tempdir().map_err(err)?;
    let out = fbmdiff_bin()
        .args([
            "residual-ode",
            "--hurst",
            "0.25",
            "--scale-c",
            "0.5",
            "--out",
        ])
        .arg(dir.path().join("r.json"))
        .output()
        .map_err(err)?;
    let code = out.status.code();
    let stderr = String::from_utf8_lossy(&out.stderr);
    verdict(
        lib_ok && code == Some(2) && stderr.contains("Gamma"),
        format!("k_coefficient -> {lib:?}; CLI exit {code:?}"),
    )
}

/// H = 1: trapezoid residual at machine scale.
fn c05_classical_equation() -> Outcome {
    let mut worst = 0.0_f64;
    for (c, t1, n) in [(0.5, 1.0, 11), (1.0, 2.0, 101), (3.7, 5.0, 1001)] {
        let grid = UniformTimeGrid::from_span(0.0, t1, n).map_err(err)?;
        let r = classical_integral_residual(c, &grid).map_err(err)?;
        worst = worst.max(r.relative_linf.unwrap_or(f64::NAN));
    }
    verdict(
        worst <= 1e-12,
        format!("max relative residual {worst:.2e} (<= 1e-12)"),
    )
}

/// Crank–Nicolson against the closed-form density.
fn c06_diffusion_oracle() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (h, t0, t1) in [(0.7, 0.25, 1.0), (0.3, 0.5, 1.5)] {
        let spec = HurstSpec::new(h, 0.5).map_err(err)?;
        let xg = SpaceGrid::new(8.0 * spec.msd(t1).sqrt(), 401).map_err(err)?;
        let init = xg
            .points()
            .map(|x| fbm_density(&spec, t0, x))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        let field = solve_diffusion(&DiffusionProblem {
            diffusivity: spec,
            xgrid: xg,
            t0,
            t1,
            n_t: 256,
            init,
        })
        .map_err(err)?;
        let exact = xg
            .points()
            .map(|x| fbm_density(&spec, t1, x))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        let l1 = xg.l1_distance(field.last_slice(), &exact);
        ok &= l1 <= 1e-3;
        parts.push(format!("H={h} L1 {l1:.2e}"));
    }
    verdict(ok, format!("{} (<= 1e-3)", parts.join(", ")))
}

/// MSD power law from 10^4 circulant paths.
fn c07_msd() -> Outcome {
    let grid = UniformTimeGrid::from_span(0.0, 1.0, 257).map_err(err)?;
    let mut parts = Vec::new();
    let mut ok = true;
    for h in [0.3, 0.5, 0.7] {
        let spec = HurstSpec::new(h, 0.5).map_err(err)?;
        let e = sample_circulant(&spec, &grid, 10_000, 7).map_err(err)?;
        let fit = fit_power_law(&empirical_msd(&e).map_err(err)?.msd, 0.1, 1.0).map_err(err)?;
        ok &= (fit.exponent - 2.0 * h).abs() <= 0.05
            && (fit.amplitude / (2.0 * 0.5) - 1.0).abs() <= 0.05;
        parts.push(format!(
            "H={h}: slope {:.4}, amplitude {:.4}",
            fit.exponent, fit.amplitude
        ));
    }
    verdict(ok, parts.join("; "))
}

/// Empirical covariance at (0.5, 1).
fn c08_covariance() -> Outcome {
    let grid = UniformTimeGrid::from_span(0.0, 1.0, 65).map_err(err)?;
    let mut parts = Vec::new();
    let mut ok = true;
    for h in [0.3, 0.7] {
        let spec = HurstSpec::new(h, 0.5).map_err(err)?;
        let e = sample_circulant(&spec, &grid, 10_000, 8).map_err(err)?;
        let est = empirical_covariance(&e, 0.5, 1.0).map_err(err)?;
        let exact = covariance(&spec, 0.5, 1.0).map_err(err)?;
        let z = est.z_score(exact);
        ok &= z <= 3.0;
        parts.push(format!("H={h}: {:.4} vs {exact:.4} ({z:.2} SE)", est.value));
    }
    verdict(ok, parts.join("; "))
}

/// Histogram of 10^5 iterated paths against the quadrature density.
fn c09_iterated_distribution() -> Outcome {
    let grid = UniformTimeGrid::from_span(0.0, 1.0, 5).map_err(err)?;
    let mut parts = Vec::new();
    let mut ok = true;
    for (h1, h2) in [(0.5, 0.5), (0.7, 0.5)] {
        let e = sample_iterated(h1, h2, &grid, 100_000, 9).map_err(err)?;
        let sd = iterated_second_moment(h1, h2, 1.0).map_err(err)?.sqrt();
        let tv = histogram_tv_distance(&e.column(4), -5.0 * sd, 5.0 * sd, 50, |a, b| {
            Ok(integrate(a, b, 1e-9, |x| {
                iterated_density(h1, h2, 1.0, x, 1e-11).unwrap_or(f64::NAN)
            })?
            .value)
        })
        .map_err(err)?;
        ok &= tv <= 0.02;
        parts.push(format!("({h1}, {h2}) TV {tv:.4}"));
    }
    verdict(ok, format!("{} (<= 0.02)", parts.join(", ")))
}

/// Transport solve from t = 1 to t = 2 against the quadrature density.
fn c10_transport_oracle() -> Outcome {
    let xg = SpaceGrid::new(10.0, 801).map_err(err)?;
    let slice = |t: f64| {
        xg.points()
            .map(|x| iterated_density(0.5, 0.5, t, x, 1e-11))
            .collect::<Result<Vec<_>, _>>()
    };
    let n_t = (1.0 / transport_step_limit(0.25, &xg, 1.0)).ceil() as usize + 1;
    let field = solve_transport(&TransportProblem {
        gamma: 0.25,
        xgrid: xg,
        t0: 1.0,
        t1: 2.0,
        n_t,
        init: slice(1.0).map_err(err)?,
    })
    .map_err(err)?;
    let l1 = xg.l1_distance(field.last_slice(), &slice(2.0).map_err(err)?);
    verdict(
        l1 <= 5e-3,
        format!("L1 {l1:.2e} with {n_t} steps (<= 5e-3)"),
    )
}

/// Constraint residual of D = x/t matches |x|/t^2.
fn c11_constraint_report() -> Outcome {
    let tg = UniformTimeGrid::from_span(1.0, 2.0, 41).map_err(err)?;
    let xg = SpaceGrid::new(5.0, 101).map_err(err)?;
    let field = SpaceTimeField::from_fn(tg, xg, |t, x| x / t);
    let r = constraint_residual(&field).map_err(err)?;
    let mut sup = 0.0_f64;
    for it in 1..tg.len() - 1 {
        for ix in 1..xg.len() - 1 {
            sup = sup.max(xg.x(ix).abs() / tg.time(it).powi(2));
        }
    }
    let rel = (r.residual_linf / sup - 1.0).abs();
    verdict(
        rel <= 0.05,
        format!(
            "linf {:.4} vs sup |x|/t^2 {sup:.4} (rel diff {rel:.2e}, <= 5%)",
            r.residual_linf
        ),
    )
}

/// Two verify-governing runs with the same seed give byte-identical CSV.
fn c12_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    let run = |name: &str| -> Result<Vec<u8>, String> {
        let path = dir.path().join(name);
        let status = fbmdiff_bin()
            .args([
                "verify-governing",
                "--hurst",
                "0.3",
                "--scale-c",
                "0.5",
                "--seed",
                "17",
                "--out",
            ])
            .arg(&path)
            .output()
            .map_err(err)?
            .status;
        if status.code() != Some(0) {
            return Err(format!("verify-governing exited with {status}"));
        }
        std::fs::read(Path::new(&path)).map_err(err)
    };
    let a = run("a.csv")?;
    let b = run("b.csv")?;
    verdict(
        !a.is_empty() && a == b,
        format!("{} bytes, identical: {}", a.len(), a == b),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("fractional ODE, exact channel", c01_ode_exact_channel),
        ("fractional ODE, discrete channel", c02_ode_discrete_channel),
        ("fractional integral equation", c03_integral_equation),
        ("H = 1/4 degeneracy", c04_quarter_degeneracy),
        ("H = 1 classical equation", c05_classical_equation),
        ("diffusion PDE oracle", c06_diffusion_oracle),
        ("mean-square displacement", c07_msd),
        ("covariance", c08_covariance),
        ("iterated fBm distribution", c09_iterated_distribution),
        ("transport PDE oracle", c10_transport_oracle),
        ("constraint report", c11_constraint_report),
        ("determinism", c12_determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS  {:>2}  {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {:>2}  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
