//! Finite-difference solvers for the diffusion equation with time-varying
//! diffusivity and for the first-order transport equation of iterated fBm,
//! plus residual checkers for both and for the diffusivity constraint.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::densities::DensityField;
use crate::diffusivity::{self, ResidualReport};
use crate::linalg::solve_tridiagonal;
use crate::{Error, HurstSpec, Result, SpaceGrid, SpaceTimeField, UniformTimeGrid};

pub const MIN_TIME_STEPS: usize = 16;
/// Largest admissible edge-to-peak ratio of a density slice.
pub const BOUNDARY_RATIO_LIMIT: f64 = 1e-8;
/// Admissible `|mass - 1|` of an initial density.
pub const INIT_MASS_TOL: f64 = 1e-6;
pub const CFL_SAFETY: f64 = 0.9;

/// A diffusivity that depends on time only.
pub trait TimeCoefficient {
    fn value_at(&self, t: f64) -> Result<f64>;
}

impl TimeCoefficient for HurstSpec {
    fn value_at(&self, t: f64) -> Result<f64> {
        diffusivity::diffusivity_value(self, t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantCoefficient(pub f64);

impl TimeCoefficient for ConstantCoefficient {
    fn value_at(&self, _t: f64) -> Result<f64> {
        Ok(self.0)
    }
}

/// Wraps a closure `t -> D(t)`.
#[derive(Debug, Clone, Copy)]
pub struct FnCoefficient<F>(pub F);

impl<F: Fn(f64) -> f64> TimeCoefficient for FnCoefficient<F> {
    fn value_at(&self, t: f64) -> Result<f64> {
        Ok((self.0)(t))
    }
}

/// `d rho/dt = D(t) d^2 rho/dx^2` on `[-xmax, xmax]` from `t0` to `t1`.
#[derive(Debug, Clone)]
pub struct DiffusionProblem<D> {
    pub diffusivity: D,
    pub xgrid: SpaceGrid,
    pub t0: f64,
    pub t1: f64,
    pub n_t: usize,
    pub init: Vec<f64>,
}

/// `d rho/dt = -gamma d/dx((x/t) rho)`.
#[derive(Debug, Clone)]
pub struct TransportProblem {
    pub gamma: f64,
    pub xgrid: SpaceGrid,
    pub t0: f64,
    pub t1: f64,
    pub n_t: usize,
    pub init: Vec<f64>,
}

fn check_span(t0: f64, t1: f64) -> Result<()> {
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::domain(format!(
            "start time must be positive (coefficients are singular at 0), got {t0}"
        )));
    }
    if !(t1 > t0 && t1.is_finite()) {
        return Err(Error::domain(format!(
            "end time {t1} must exceed start time {t0}"
        )));
    }
    Ok(())
}

fn check_init(init: &[f64], xgrid: &SpaceGrid) -> Result<()> {
    if init.len() != xgrid.len() {
        return Err(Error::Grid(format!(
            "initial profile has {} values for {} nodes",
            init.len(),
            xgrid.len()
        )));
    }
    if let Some(v) = init.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::domain(format!(
            "initial density must be finite and >= 0, found {v}"
        )));
    }
    Ok(())
}

fn check_boundary(slice: &[f64]) -> Result<()> {
    let n = slice.len();
    let peak = slice.iter().fold(0.0_f64, |m, v| m.max(libm::fabs(*v)));
    let edge = [slice[0], slice[1], slice[n - 2], slice[n - 1]]
        .iter()
        .fold(0.0_f64, |m, v| m.max(libm::fabs(*v)));
    if peak > 0.0 && edge > BOUNDARY_RATIO_LIMIT * peak {
        return Err(Error::BoundaryMass {
            ratio: edge / peak,
            limit: BOUNDARY_RATIO_LIMIT,
        });
    }
    Ok(())
}

/// Crank–Nicolson with `D(t + dt/2)` and homogeneous Dirichlet ends.
///
/// Fails with [`Error::BoundaryMass`] when the initial or final slice is not
/// negligible at the edges, since truncation would otherwise go unnoticed.
pub fn solve_diffusion<D: TimeCoefficient>(problem: &DiffusionProblem<D>) -> Result<DensityField> {
    let DiffusionProblem {
        diffusivity,
        xgrid,
        t0,
        t1,
        n_t,
        init,
    } = problem;
    check_span(*t0, *t1)?;
    if *n_t < MIN_TIME_STEPS {
        return Err(Error::domain(format!(
            "need at least {MIN_TIME_STEPS} time steps, got {n_t}"
        )));
    }
    check_init(init, xgrid)?;
    let mass = xgrid.trapezoid(init);
    if libm::fabs(mass - 1.0) > INIT_MASS_TOL {
        return Err(Error::domain(format!(
            "initial mass {mass} differs from 1 by more than {INIT_MASS_TOL:e}"
        )));
    }
    check_boundary(init)?;

    let tgrid = UniformTimeGrid::from_span(*t0, *t1, n_t + 1)?;
    let dt = tgrid.dt();
    let dx = xgrid.dx();
    let nx = xgrid.len();
    let m = nx - 2;

    let mut values = Vec::with_capacity(tgrid.len() * nx);
    values.extend_from_slice(init);
    let mut u = init.clone();
    u[0] = 0.0;
    u[nx - 1] = 0.0;

    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    let mut scratch = vec![0.0; m];

    for step in 0..*n_t {
        let t_mid = tgrid.time(step) + 0.5 * dt;
        let d = diffusivity.value_at(t_mid)?;
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::Singularity(format!(
                "diffusivity {d} at t = {t_mid}"
            )));
        }
        let r = 0.5 * d * dt / (dx * dx);
        lower.fill(-r);
        upper.fill(-r);
        diag.fill(1.0 + 2.0 * r);
        for i in 0..m {
            let j = i + 1;
            rhs[i] = u[j] + r * (u[j - 1] - 2.0 * u[j] + u[j + 1]);
        }
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs, &mut scratch);
        u[1..nx - 1].copy_from_slice(&rhs);
        values.extend_from_slice(&u);
    }
    check_boundary(&u)?;

    Ok(DensityField::from_field(SpaceTimeField::new(
        tgrid, *xgrid, values,
    )?))
}

/// Largest stable step of [`solve_transport`]: `0.9 dx t0 / (gamma xmax)`.
pub fn transport_step_limit(gamma: f64, xgrid: &SpaceGrid, t0: f64) -> f64 {
    CFL_SAFETY * xgrid.dx() * t0 / (gamma * xgrid.xmax())
}

fn van_leer(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

/// Finite-volume right-hand side `-d/dx(v rho)` with `v = gamma x / t`,
/// MUSCL reconstruction and outflow at both ends.
fn transport_rhs(
    u: &[f64],
    xgrid: &SpaceGrid,
    gamma: f64,
    t: f64,
    slopes: &mut [f64],
    out: &mut [f64],
) {
    let n = u.len();
    let dx = xgrid.dx();
    let at = |i: isize| -> f64 {
        if i < 0 || i as usize >= n {
            0.0
        } else {
            u[i as usize]
        }
    };
    for i in 0..n {
        let ii = i as isize;
        slopes[i] = van_leer(at(ii) - at(ii - 1), at(ii + 1) - at(ii));
    }
    // flux through the face left of cell i, i = 0..=n
    let face_flux = |i: usize| -> f64 {
        let xf = if i == 0 {
            xgrid.x(0) - 0.5 * dx
        } else if i == n {
            xgrid.x(n - 1) + 0.5 * dx
        } else {
            0.5 * (xgrid.x(i - 1) + xgrid.x(i))
        };
        let v = gamma * xf / t;
        if v > 0.0 {
            if i == 0 {
                0.0
            } else {
                v * (u[i - 1] + 0.5 * slopes[i - 1])
            }
        } else if i == n {
            0.0
        } else {
            v * (u[i] - 0.5 * slopes[i])
        }
    };
    let mut left = face_flux(0);
    for i in 0..n {
        let right = face_flux(i + 1);
        out[i] = -(right - left) / dx;
        left = right;
    }
}

/// Conservative MUSCL (van Leer limiter) scheme with Heun time stepping.
///
/// The step must satisfy `dt <= 0.9 dx t0 / (gamma xmax)`.
pub fn solve_transport(problem: &TransportProblem) -> Result<DensityField> {
    let TransportProblem {
        gamma,
        xgrid,
        t0,
        t1,
        n_t,
        init,
    } = problem;
    let gamma = *gamma;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::domain(format!(
            "gamma = H1*H2 must lie in (0, 1), got {gamma}"
        )));
    }
    check_span(*t0, *t1)?;
    if *n_t == 0 {
        return Err(Error::domain("need at least one time step"));
    }
    check_init(init, xgrid)?;

    let tgrid = UniformTimeGrid::from_span(*t0, *t1, n_t + 1)?;
    let dt = tgrid.dt();
    let limit = transport_step_limit(gamma, xgrid, *t0);
    if dt > limit {
        return Err(Error::Cfl { dt, limit });
    }

    let nx = xgrid.len();
    let mut values = Vec::with_capacity(tgrid.len() * nx);
    values.extend_from_slice(init);
    let mut u = init.clone();
    let mut stage = vec![0.0; nx];
    let mut k1 = vec![0.0; nx];
    let mut k2 = vec![0.0; nx];
    let mut slopes = vec![0.0; nx];
    for step in 0..*n_t {
        let t = tgrid.time(step);
        transport_rhs(&u, xgrid, gamma, t, &mut slopes, &mut k1);
        for i in 0..nx {
            stage[i] = u[i] + dt * k1[i];
        }
        transport_rhs(&stage, xgrid, gamma, t + dt, &mut slopes, &mut k2);
        for i in 0..nx {
            u[i] = 0.5 * (u[i] + stage[i] + dt * k2[i]);
        }
        values.extend_from_slice(&u);
    }
    Ok(DensityField::from_field(SpaceTimeField::new(
        tgrid, *xgrid, values,
    )?))
}

/// Centered-difference residual of `d rho/dt - D(t) d^2 rho/dx^2` on the interior.
pub fn heat_residual<D: TimeCoefficient>(field: &SpaceTimeField, d: &D) -> Result<ResidualReport> {
    let tg = *field.tgrid();
    let nt = tg.len();
    let nx = field.xgrid().len();
    if nt < 3 {
        return Err(Error::Grid(format!(
            "need at least 3 time levels, got {nt}"
        )));
    }
    let dt = tg.dt();
    let dx = field.xgrid().dx();
    let mut residuals = Vec::with_capacity((nt - 2) * (nx - 2));
    for it in 1..nt - 1 {
        let coeff = d.value_at(tg.time(it))?;
        for ix in 1..nx - 1 {
            let du_dt = (field.at(it + 1, ix) - field.at(it - 1, ix)) / (2.0 * dt);
            let uxx =
                (field.at(it, ix + 1) - 2.0 * field.at(it, ix) + field.at(it, ix - 1)) / (dx * dx);
            residuals.push(du_dt - coeff * uxx);
        }
    }
    Ok(ResidualReport::from_residuals(tg, &residuals, 1))
}

/// Centered-difference residual of `dD/dt + (1/2) d^2 D/dx^2` on the interior.
///
/// Reporting tool only: the transport coefficient `x/t` does not satisfy this
/// constraint (its residual is `-x/t^2`).
pub fn constraint_residual(field: &SpaceTimeField) -> Result<ResidualReport> {
    let tg = *field.tgrid();
    let nt = tg.len();
    let nx = field.xgrid().len();
    if nt < 3 {
        return Err(Error::Grid(format!(
            "need at least 3 time levels, got {nt}"
        )));
    }
    let dt = tg.dt();
    let dx = field.xgrid().dx();
    let mut residuals = Vec::with_capacity((nt - 2) * (nx - 2));
    for it in 1..nt - 1 {
        for ix in 1..nx - 1 {
            let dd_dt = (field.at(it + 1, ix) - field.at(it - 1, ix)) / (2.0 * dt);
            let dxx =
                (field.at(it, ix + 1) - 2.0 * field.at(it, ix) + field.at(it, ix - 1)) / (dx * dx);
            residuals.push(dd_dt + 0.5 * dxx);
        }
    }
    if let Some(r) = residuals.iter().find(|r| !r.is_finite()) {
        return Err(Error::domain(format!(
            "constraint residual is not finite ({r})"
        )));
    }
    Ok(ResidualReport::from_residuals(tg, &residuals, 1))
}
