//! The diffusivity law `D(t) = 2HC t^(2H-1)` and certificates for the
//! nonlinear equations it satisfies.
//!
//! For `0 < H < 1/2` the law solves `d^(1-2H) D / dt^(1-2H) = k D^2`, for
//! `1/2 < H < 1` it solves `J^(2H-1) D = k D^2`, and at `H = 1` the ordinary
//! integral equation `int_0^t D = k D^2`. In every case
//! `k = Gamma(2H) / (2HC Gamma(4H-1))`.
//!
//! Each certificate runs two channels where possible: the exact power rules,
//! which prove the identity symbolically, and a discrete operator
//! (Grünwald–Letnikov or quadrature) validated against it.

use alloc::format;
use alloc::vec::Vec;

use crate::fraccalc::{self, FracOrder};
use crate::{Error, GridFunction, Result, UniformTimeGrid};

/// Start of the certified window for the Grünwald–Letnikov channel.
pub const DEFAULT_WINDOW_START: f64 = 0.5;
/// Grünwald–Letnikov values are never certified before this many steps.
pub const MIN_CERTIFIED_STEPS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Regime {
    Subdiffusive,
    Classical,
    Superdiffusive,
}

/// Hurst index `H` in `(0, 1)` and scale `C > 0` of `Y(t) = sqrt(2C) B^H(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HurstSpec {
    hurst: f64,
    scale: f64,
}

impl HurstSpec {
    pub fn new(hurst: f64, scale: f64) -> Result<Self> {
        if hurst <= 0.0 {
            return Err(Error::DegenerateHurst {
                hurst,
                reason: "H <= 0: the covariance definition of fBm is meaningless and k diverges",
            });
        }
        if !(hurst < 1.0) {
            return Err(Error::domain(format!(
                "Hurst index must lie in (0, 1), got {hurst}"
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::domain(format!(
                "scale C must be positive, got {scale}"
            )));
        }
        Ok(Self { hurst, scale })
    }

    /// Standard fBm (`C = 1/2`).
    pub fn standard(hurst: f64) -> Result<Self> {
        Self::new(hurst, 0.5)
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn regime(&self) -> Regime {
        if self.hurst < 0.5 {
            Regime::Subdiffusive
        } else if self.hurst == 0.5 {
            Regime::Classical
        } else {
            Regime::Superdiffusive
        }
    }

    /// `k` is undefined at `H = 1/4`.
    pub fn is_degenerate(&self) -> bool {
        self.hurst == 0.25
    }

    /// Mean-square displacement `2C t^(2H)`.
    pub fn msd(&self, t: f64) -> f64 {
        2.0 * self.scale * libm::pow(t, 2.0 * self.hurst)
    }
}

/// `k = Gamma(2H) / (2HC Gamma(4H-1))`.
pub fn k_coefficient(spec: &HurstSpec) -> Result<f64> {
    let h = spec.hurst();
    if spec.is_degenerate() {
        return Err(Error::DegenerateHurst {
            hurst: h,
            reason: "Gamma(4H-1) diverges at H = 1/4",
        });
    }
    let denom = match fraccalc::gamma_eval(4.0 * h - 1.0) {
        Ok(g) => g,
        Err(Error::Pole(_)) => {
            return Err(Error::DegenerateHurst {
                hurst: h,
                reason: "Gamma(4H-1) diverges",
            })
        }
        Err(e) => return Err(e),
    };
    Ok(fraccalc::gamma_eval(2.0 * h)? / (2.0 * h * spec.scale() * denom))
}

/// `D(t) = 2HC t^(2H-1)`; the constant `C` when `H = 1/2`.
pub fn diffusivity_value(spec: &HurstSpec, t: f64) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain(format!(
            "time must be finite and >= 0, got {t}"
        )));
    }
    let h = spec.hurst();
    if h == 0.5 {
        return Ok(spec.scale());
    }
    if t == 0.0 {
        if h < 0.5 {
            return Err(Error::Singularity(format!(
                "D(t) diverges at t = 0 for H = {h}"
            )));
        }
        return Ok(0.0);
    }
    Ok(2.0 * h * spec.scale() * libm::pow(t, 2.0 * h - 1.0))
}

/// Norms of a residual over a certified window of a time grid.
///
/// `residual_l2` is the root mean square over the window (a discrete L2 norm
/// normalised by the window length), so it is comparable across refinements.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResidualReport {
    pub grid: UniformTimeGrid,
    pub residual_l2: f64,
    pub residual_linf: f64,
    /// Largest `|residual| / |rhs|` where a right-hand side exists.
    pub relative_linf: Option<f64>,
    /// Leading grid points left out of the window.
    pub excluded_prefix: usize,
    /// `log2(l2_coarse / l2_fine)` under one halving of the grid step.
    pub convergence_slope: Option<f64>,
    /// Largest relative residual of the exact power-rule channel.
    pub exact_channel_rel: Option<f64>,
}

impl ResidualReport {
    pub fn from_residuals(
        grid: UniformTimeGrid,
        residuals: &[f64],
        excluded_prefix: usize,
    ) -> Self {
        let n = residuals.len().max(1) as f64;
        let l2 = libm::sqrt(residuals.iter().map(|r| r * r).sum::<f64>() / n);
        let linf = residuals.iter().fold(0.0_f64, |m, r| m.max(libm::fabs(*r)));
        Self {
            grid,
            residual_l2: l2,
            residual_linf: linf,
            relative_linf: None,
            excluded_prefix,
            convergence_slope: None,
            exact_channel_rel: None,
        }
    }

    /// Residuals `lhs - rhs`, also recording the relative sup norm.
    pub fn from_sides(
        grid: UniformTimeGrid,
        lhs: &[f64],
        rhs: &[f64],
        excluded_prefix: usize,
    ) -> Self {
        let residuals: Vec<f64> = lhs.iter().zip(rhs).map(|(a, b)| a - b).collect();
        let mut report = Self::from_residuals(grid, &residuals, excluded_prefix);
        let rel = residuals.iter().zip(rhs).fold(0.0_f64, |m, (r, b)| {
            if *r == 0.0 {
                m
            } else {
                m.max(libm::fabs(*r) / libm::fabs(*b))
            }
        });
        report.relative_linf = Some(rel);
        report
    }

    /// Records the slope against the same residual on a grid with half the step.
    pub fn with_refinement(mut self, fine: &ResidualReport) -> Self {
        self.convergence_slope = Some(libm::log2(self.residual_l2 / fine.residual_l2));
        self
    }
}

fn window_start_index(grid: &UniformTimeGrid, start: f64) -> usize {
    let first = libm::ceil((start - grid.t0()) / grid.dt() - 1e-9).max(0.0) as usize;
    first.max(MIN_CERTIFIED_STEPS)
}

/// Residual of `d^(1-2H) D/dt^(1-2H) = k D^2` for `0 < H < 1/2`, `H != 1/4`,
/// over `t >= 0.5`.
pub fn ode_residual(spec: &HurstSpec, grid: &UniformTimeGrid) -> Result<ResidualReport> {
    ode_residual_in_window(spec, grid, DEFAULT_WINDOW_START)
}

/// [`ode_residual`] over `t >= window_start` (and never before ten steps).
pub fn ode_residual_in_window(
    spec: &HurstSpec,
    grid: &UniformTimeGrid,
    window_start: f64,
) -> Result<ResidualReport> {
    let h = spec.hurst();
    if !(h < 0.5) {
        return Err(Error::domain(format!(
            "the fractional differential equation governs 0 < H < 1/2, got H = {h}"
        )));
    }
    let k = k_coefficient(spec)?;
    if grid.t0() != 0.0 {
        return Err(Error::NonZeroOrigin(grid.t0()));
    }

    let coarse = gl_channel(spec, k, grid, window_start)?;
    let fine = gl_channel(spec, k, &grid.refined(), window_start)?;

    let order = FracOrder::derivative(1.0 - 2.0 * h)?;
    let amplitude = 2.0 * h * spec.scale();
    let mut exact_rel = 0.0_f64;
    for t in grid.times().skip(coarse.excluded_prefix) {
        let lhs = amplitude * fraccalc::rl_derivative_power(order, 2.0 * h - 1.0, t)?;
        let d = diffusivity_value(spec, t)?;
        let rhs = k * d * d;
        exact_rel = exact_rel.max(libm::fabs((lhs - rhs) / rhs));
    }

    let mut report = coarse.with_refinement(&fine);
    report.exact_channel_rel = Some(exact_rel);
    Ok(report)
}

fn gl_channel(
    spec: &HurstSpec,
    k: f64,
    grid: &UniformTimeGrid,
    window_start: f64,
) -> Result<ResidualReport> {
    let h = spec.hurst();
    let start = window_start_index(grid, window_start);
    if start >= grid.len() {
        return Err(Error::Grid(format!(
            "certified window t >= {window_start} is empty on a grid ending at {}",
            grid.end()
        )));
    }
    // D(0) is infinite; the origin sample only enters through the tail weight
    let sampled = GridFunction::from_fn(*grid, |t| {
        if t == 0.0 {
            0.0
        } else {
            2.0 * h * spec.scale() * libm::pow(t, 2.0 * h - 1.0)
        }
    });
    let order = FracOrder::derivative(1.0 - 2.0 * h)?;
    let lhs = fraccalc::rl_derivative_gl(&sampled, order)?;
    let rhs: Vec<f64> = sampled.values()[start..]
        .iter()
        .map(|d| k * d * d)
        .collect();
    Ok(ResidualReport::from_sides(
        *grid,
        &lhs.values()[start..],
        &rhs,
        start,
    ))
}

/// Residual of `J^(2H-1) D = k D^2` for `1/2 < H < 1` at every grid time `t > 0`.
pub fn integral_eq_residual(spec: &HurstSpec, grid: &UniformTimeGrid) -> Result<ResidualReport> {
    let s = *spec;
    integral_eq_residual_for(spec, grid, fraccalc::DEFAULT_QUAD_TOL, move |t| {
        2.0 * s.hurst() * s.scale() * libm::pow(t, 2.0 * s.hurst() - 1.0)
    })
}

/// Integral-equation residual for an arbitrary candidate diffusivity `d`,
/// with `k` taken from `spec`.
pub fn integral_eq_residual_for<F>(
    spec: &HurstSpec,
    grid: &UniformTimeGrid,
    tol: f64,
    d: F,
) -> Result<ResidualReport>
where
    F: Fn(f64) -> f64,
{
    let h = spec.hurst();
    if !(h > 0.5 && h < 1.0) {
        return Err(Error::domain(format!(
            "the fractional integral equation governs 1/2 < H < 1, got H = {h}"
        )));
    }
    let k = k_coefficient(spec)?;
    let order = FracOrder::integral(2.0 * h - 1.0)?;
    let start = if grid.t0() == 0.0 { 1 } else { 0 };

    let mut lhs = Vec::with_capacity(grid.len());
    let mut rhs = Vec::with_capacity(grid.len());
    let mut exact_rel = 0.0_f64;
    let amplitude = 2.0 * h * spec.scale();
    for t in grid.times().skip(start) {
        lhs.push(fraccalc::rl_integral_quad(&d, order, t, tol)?);
        let dt = d(t);
        rhs.push(k * dt * dt);

        let exact = amplitude * fraccalc::rl_integral_power(order, 2.0 * h - 1.0, t)?;
        let law = diffusivity_value(spec, t)?;
        exact_rel = exact_rel.max(libm::fabs((exact - k * law * law) / (k * law * law)));
    }
    let mut report = ResidualReport::from_sides(*grid, &lhs, &rhs, start);
    report.exact_channel_rel = Some(exact_rel);
    Ok(report)
}

/// Residual of `int_0^t D = k D^2` at `H = 1`, where `D(t) = 2Ct` and
/// `k = 1/(4C)`; both sides equal `C t^2`.
pub fn classical_integral_residual(scale: f64, grid: &UniformTimeGrid) -> Result<ResidualReport> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::domain(format!(
            "scale C must be positive, got {scale}"
        )));
    }
    integral_residual_trapezoid(grid, 1.0 / (4.0 * scale), |t| 2.0 * scale * t)
}

/// Cumulative-trapezoid residual of `int_{t0}^t D = k D^2` on `grid`
/// (`t0 = 0` for the classical equation).
pub fn integral_residual_trapezoid<F>(
    grid: &UniformTimeGrid,
    k: f64,
    d: F,
) -> Result<ResidualReport>
where
    F: Fn(f64) -> f64,
{
    if grid.t0() != 0.0 {
        return Err(Error::NonZeroOrigin(grid.t0()));
    }
    let values: Vec<f64> = grid.times().map(&d).collect();
    let mut lhs = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    lhs.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * grid.dt() * (w[0] + w[1]);
        lhs.push(acc);
    }
    let rhs: Vec<f64> = values.iter().map(|v| k * v * v).collect();
    Ok(ResidualReport::from_sides(*grid, &lhs, &rhs, 0))
}

/// Relative residual of `D = k D^2` with `D = C`, `k = 1/C` (the `H = 1/2`
/// case, where the derivative has order zero).
pub fn classical_half_residual(spec: &HurstSpec) -> Result<f64> {
    if spec.regime() != Regime::Classical {
        return Err(Error::domain(format!(
            "the constant-diffusivity check needs H = 1/2, got H = {}",
            spec.hurst()
        )));
    }
    let k = k_coefficient(spec)?;
    let d = diffusivity_value(spec, 1.0)?;
    Ok(libm::fabs(d - k * d * d) / d)
}
