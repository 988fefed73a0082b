//! One pipeline per subcommand.

use fbmdiff::densities::{
    fbm_density, histogram_tv_distance, iterated_density, iterated_second_moment, DensityField,
    DEFAULT_DENSITY_TOL,
};
use fbmdiff::diffusivity::{
    classical_half_residual, classical_integral_residual, integral_eq_residual, k_coefficient,
    ode_residual,
};
use fbmdiff::fbm::{
    empirical_msd, fit_power_law, sample_cholesky, sample_circulant, sample_iterated, PathEnsemble,
};
use fbmdiff::pdesolve::{
    constraint_residual, solve_diffusion, solve_transport, DiffusionProblem, TransportProblem,
};
use fbmdiff::quadrature::integrate;
use fbmdiff::{HurstSpec, Regime, ResidualReport, SpaceGrid, SpaceTimeField, UniformTimeGrid};
use serde_json::{json, Value};

use crate::config::{Command, RunConfig};
use crate::output::{
    checks_table, density_table, ensemble_table, msd_table, report_table, Check, Table,
};
use crate::CliError;

pub const EXACT_CHANNEL_TOL: f64 = 1e-12;
pub const INTEGRAL_RESIDUAL_TOL: f64 = 1e-7;
pub const DIFFUSION_L1_TOL: f64 = 1e-3;
pub const TRANSPORT_L1_TOL: f64 = 5e-3;
pub const TV_TOL: f64 = 0.02;
pub const MASS_TOL: f64 = 1e-6;
pub const POSITIVITY_FLOOR: f64 = -1e-12;
pub const HISTOGRAM_BINS: usize = 50;
/// Steps of the coarse Grünwald–Letnikov grid on [0, 2] (refined once internally).
pub const ODE_CHECK_STEPS: usize = 1024;

/// Data produced by a command before it is written in the requested format.
pub struct Output {
    pub table: Table,
    pub json: Value,
    pub checks: Vec<Check>,
}

impl Output {
    fn checks_only(checks: Vec<Check>) -> Self {
        Self {
            table: checks_table(&checks),
            json: json!(checks),
            checks,
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Other(e.into()))
}

// resolve() fills every field a command reads
fn spec(cfg: &RunConfig) -> Result<HurstSpec, CliError> {
    Ok(HurstSpec::new(cfg.hurst.unwrap(), cfg.scale_c)?)
}

fn time_grid(cfg: &RunConfig) -> Result<UniformTimeGrid, CliError> {
    Ok(UniformTimeGrid::from_span(
        cfg.t0.unwrap(),
        cfg.t1.unwrap(),
        cfg.n_t.unwrap() + 1,
    )?)
}

fn space_grid(cfg: &RunConfig) -> Result<SpaceGrid, CliError> {
    Ok(SpaceGrid::new(cfg.xmax.unwrap(), cfg.n_x.unwrap())?)
}

pub fn execute(cfg: &RunConfig) -> Result<Output, CliError> {
    match cfg.command {
        Command::Sample => {
            let e = ensemble(cfg)?;
            Ok(Output {
                table: ensemble_table(&e),
                json: to_json(&e)?,
                checks: Vec::new(),
            })
        }
        Command::Msd => msd(cfg),
        Command::Density => density(cfg),
        Command::Pde => pde(cfg),
        Command::Transport => transport(cfg),
        Command::ResidualOde => {
            let r = ode_residual(&spec(cfg)?, &time_grid(cfg)?)?;
            let checks = vec![
                Check::at_most(
                    "exact_channel_rel",
                    r.exact_channel_rel.unwrap_or(f64::NAN),
                    EXACT_CHANNEL_TOL,
                ),
                Check::above(
                    "gl_convergence_slope",
                    r.convergence_slope.unwrap_or(f64::NAN),
                    0.0,
                ),
            ];
            report_output(r, checks)
        }
        Command::ResidualIntegral => {
            let r = integral_eq_residual(&spec(cfg)?, &time_grid(cfg)?)?;
            let checks = vec![
                Check::at_most(
                    "exact_channel_rel",
                    r.exact_channel_rel.unwrap_or(f64::NAN),
                    EXACT_CHANNEL_TOL,
                ),
                Check::at_most(
                    "quadrature_residual_linf",
                    r.residual_linf,
                    INTEGRAL_RESIDUAL_TOL,
                ),
            ];
            report_output(r, checks)
        }
        Command::ResidualClassical => {
            let r = classical_integral_residual(cfg.scale_c, &time_grid(cfg)?)?;
            let checks = vec![Check::at_most(
                "trapezoid_relative_linf",
                r.relative_linf.unwrap_or(f64::NAN),
                EXACT_CHANNEL_TOL,
            )];
            report_output(r, checks)
        }
        Command::VerifyGoverning => verify_governing(cfg),
        Command::VerifyIterated => verify_iterated(cfg),
    }
}

fn report_output(r: ResidualReport, checks: Vec<Check>) -> Result<Output, CliError> {
    Ok(Output {
        table: report_table(&r),
        json: to_json(&r)?,
        checks,
    })
}

fn ensemble(cfg: &RunConfig) -> Result<PathEnsemble, CliError> {
    let grid = time_grid(cfg)?;
    let (paths, seed) = (cfg.paths.unwrap(), cfg.seed);
    let e = match cfg.hurst2 {
        Some(h2) => sample_iterated(cfg.hurst.unwrap(), h2, &grid, paths, seed)?,
        None if grid.t0() == 0.0 => sample_circulant(&spec(cfg)?, &grid, paths, seed)?,
        None => sample_cholesky(&spec(cfg)?, &grid, paths, seed)?,
    };
    Ok(e)
}

fn msd(cfg: &RunConfig) -> Result<Output, CliError> {
    let e = ensemble(cfg)?;
    let m = empirical_msd(&e)?;
    let t1 = cfg.t1.unwrap();
    let fit = fit_power_law(&m.msd, 0.1 * t1, t1)?;
    let checks = vec![
        Check::info("msd_exponent", fit.exponent),
        Check::info("msd_amplitude", fit.amplitude),
    ];
    Ok(Output {
        table: msd_table(&m),
        json: json!({ "msd": to_json(&m)?, "fit": to_json(&fit)? }),
        checks,
    })
}

fn field_output(field: DensityField, checks: Vec<Check>) -> Result<Output, CliError> {
    Ok(Output {
        table: density_table(&field),
        json: to_json(&field)?,
        checks,
    })
}

fn density(cfg: &RunConfig) -> Result<Output, CliError> {
    let (tg, xg) = (time_grid(cfg)?, space_grid(cfg)?);
    let field = match cfg.hurst2 {
        Some(h2) => {
            let h1 = cfg.hurst.unwrap();
            DensityField::analytic(tg, xg, |t, x| {
                iterated_density(h1, h2, t, x, DEFAULT_DENSITY_TOL)
            })?
        }
        None => {
            let s = spec(cfg)?;
            DensityField::analytic(tg, xg, |t, x| fbm_density(&s, t, x))?
        }
    };
    let checks = vec![Check::info("max_mass_defect", field.max_mass_defect())];
    field_output(field, checks)
}

/// Diffusion solve from `c_H(t0)` and its L1 distance to `c_H(t1)`.
fn diffusion_oracle(s: &HurstSpec, cfg: &RunConfig) -> Result<(DensityField, f64), CliError> {
    let xg = space_grid(cfg)?;
    let (t0, t1) = (cfg.t0.unwrap(), cfg.t1.unwrap());
    let init = xg
        .points()
        .map(|x| fbm_density(s, t0, x))
        .collect::<Result<Vec<_>, _>>()?;
    let field = solve_diffusion(&DiffusionProblem {
        diffusivity: *s,
        xgrid: xg,
        t0,
        t1,
        n_t: cfg.n_t.unwrap(),
        init,
    })?;
    let exact = xg
        .points()
        .map(|x| fbm_density(s, t1, x))
        .collect::<Result<Vec<_>, _>>()?;
    let l1 = xg.l1_distance(field.last_slice(), &exact);
    Ok((field, l1))
}

fn pde(cfg: &RunConfig) -> Result<Output, CliError> {
    let s = spec(cfg)?;
    let (field, l1) = diffusion_oracle(&s, cfg)?;
    let checks = vec![
        Check::at_most("diffusion_l1", l1, DIFFUSION_L1_TOL),
        Check::above("min_value", field.min_value(), POSITIVITY_FLOOR),
        Check::info("max_mass_defect", field.max_mass_defect()),
    ];
    field_output(field, checks)
}

/// Transport solve from the iterated density at `t0` and its L1 distance at `t1`.
fn transport_oracle(cfg: &RunConfig) -> Result<(DensityField, f64), CliError> {
    let (h1, h2) = (cfg.hurst.unwrap(), cfg.hurst2.unwrap());
    let xg = space_grid(cfg)?;
    let (t0, t1) = (cfg.t0.unwrap(), cfg.t1.unwrap());
    let slice = |t: f64| {
        xg.points()
            .map(|x| iterated_density(h1, h2, t, x, DEFAULT_DENSITY_TOL))
            .collect::<Result<Vec<_>, _>>()
    };
    let field = solve_transport(&TransportProblem {
        gamma: h1 * h2,
        xgrid: xg,
        t0,
        t1,
        n_t: cfg.n_t.unwrap(),
        init: slice(t0)?,
    })?;
    let l1 = xg.l1_distance(field.last_slice(), &slice(t1)?);
    Ok((field, l1))
}

/// `max_t |mass(t) - mass(t0)|`.
fn mass_drift(field: &DensityField) -> f64 {
    let m = field.mass();
    m.iter().fold(0.0_f64, |acc, v| acc.max((v - m[0]).abs()))
}

fn transport(cfg: &RunConfig) -> Result<Output, CliError> {
    let (field, l1) = transport_oracle(cfg)?;
    let span = cfg.t1.unwrap() - cfg.t0.unwrap();
    let checks = vec![
        Check::at_most("transport_l1", l1, TRANSPORT_L1_TOL),
        Check::at_most("mass_drift_per_time", mass_drift(&field) / span, 1e-4),
    ];
    field_output(field, checks)
}

fn verify_governing(cfg: &RunConfig) -> Result<Output, CliError> {
    let s = spec(cfg)?;
    let mut checks = vec![Check::info("k", k_coefficient(&s)?)];
    match s.regime() {
        Regime::Subdiffusive => {
            let grid = UniformTimeGrid::from_span(0.0, 2.0, ODE_CHECK_STEPS + 1)?;
            let r = ode_residual(&s, &grid)?;
            checks.push(Check::at_most(
                "exact_channel_rel",
                r.exact_channel_rel.unwrap_or(f64::NAN),
                EXACT_CHANNEL_TOL,
            ));
            checks.push(Check::info("gl_residual_l2", r.residual_l2));
            checks.push(Check::above(
                "gl_convergence_slope",
                r.convergence_slope.unwrap_or(f64::NAN),
                0.0,
            ));
        }
        Regime::Superdiffusive => {
            let grid = UniformTimeGrid::from_span(0.1, 2.0, 39)?;
            let r = integral_eq_residual(&s, &grid)?;
            checks.push(Check::at_most(
                "exact_channel_rel",
                r.exact_channel_rel.unwrap_or(f64::NAN),
                EXACT_CHANNEL_TOL,
            ));
            checks.push(Check::at_most(
                "quadrature_residual_linf",
                r.residual_linf,
                INTEGRAL_RESIDUAL_TOL,
            ));
        }
        Regime::Classical => {
            checks.push(Check::at_most(
                "constant_diffusivity_rel",
                classical_half_residual(&s)?,
                EXACT_CHANNEL_TOL,
            ));
        }
    }
    let (field, l1) = diffusion_oracle(&s, cfg)?;
    checks.push(Check::at_most("diffusion_l1", l1, DIFFUSION_L1_TOL));
    checks.push(Check::above(
        "diffusion_min_value",
        field.min_value(),
        POSITIVITY_FLOOR,
    ));
    Ok(Output::checks_only(checks))
}

fn verify_iterated(cfg: &RunConfig) -> Result<Output, CliError> {
    let (h1, h2) = (cfg.hurst.unwrap(), cfg.hurst2.unwrap());
    let sd = iterated_second_moment(h1, h2, 1.0)?.sqrt();
    let mut checks = Vec::new();

    // the profile has a cusp at 0 and tails no lighter than exp(-|x|/sd)
    let half_mass = integrate(0.0, 40.0 * sd, 1e-9, |x| {
        iterated_density(h1, h2, 1.0, x, 1e-11).unwrap_or(f64::NAN)
    })?;
    checks.push(Check::at_most(
        "density_mass_defect",
        (2.0 * half_mass.value - 1.0).abs(),
        MASS_TOL,
    ));

    let grid = UniformTimeGrid::from_span(0.0, 1.0, 5)?;
    let e = sample_iterated(h1, h2, &grid, cfg.paths.unwrap(), cfg.seed)?;
    let sample = e.column(grid.len() - 1);
    let half = 5.0 * sd;
    let tv = histogram_tv_distance(&sample, -half, half, HISTOGRAM_BINS, |a, b| {
        Ok(integrate(a, b, 1e-9, |x| {
            iterated_density(h1, h2, 1.0, x, 1e-11).unwrap_or(f64::NAN)
        })?
        .value)
    })?;
    checks.push(Check::at_most("monte_carlo_tv", tv, TV_TOL));

    let (field, l1) = transport_oracle(cfg)?;
    checks.push(Check::at_most("transport_l1", l1, TRANSPORT_L1_TOL));

    // x/t does not satisfy dD/dt + D_xx/2 = 0; its residual is -x/t^2
    let tg = *field.tgrid();
    let xg = *field.xgrid();
    let coeff = SpaceTimeField::from_fn(tg, xg, |t, x| x / t);
    let r = constraint_residual(&coeff)?;
    let expected = xg.x(xg.len() - 2).abs() / tg.time(1).powi(2);
    checks.push(Check::info("constraint_residual_linf", r.residual_linf));
    checks.push(Check::info(
        "constraint_linf_over_x_by_t2",
        r.residual_linf / expected,
    ));
    Ok(Output::checks_only(checks))
}
