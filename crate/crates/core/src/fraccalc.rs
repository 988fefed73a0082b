//! Riemann–Liouville fractional derivatives and integrals.
//!
//! Two routes are provided for each operator: exact power rules for `t^beta`
//! and discrete approximations for sampled or callable inputs. The discrete
//! derivative is Grünwald–Letnikov; the discrete integral removes the kernel
//! singularity by substitution and integrates the remainder with tanh-sinh.
//!
//! The integral of order `mu` is `J^mu f(t) = 1/Gamma(mu) int_0^t (t-s)^(mu-1) f(s) ds`.

use alloc::format;
use alloc::vec::Vec;

use crate::quadrature;
use crate::{Error, GridFunction, Result};

/// Default absolute tolerance for [`rl_integral_quad`].
pub const DEFAULT_QUAD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum OrderKind {
    Derivative,
    Integral,
}

/// Order of a fractional operator.
///
/// Derivatives take `0 <= alpha < 1`; integrals take `0 < alpha <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FracOrder {
    alpha: f64,
    kind: OrderKind,
}

impl FracOrder {
    pub fn derivative(alpha: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::domain(format!(
                "derivative order must lie in [0, 1), got {alpha}"
            )));
        }
        Ok(Self {
            alpha,
            kind: OrderKind::Derivative,
        })
    }

    pub fn integral(mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(Error::domain(format!(
                "integral order must lie in (0, 1], got {mu}"
            )));
        }
        Ok(Self {
            alpha: mu,
            kind: OrderKind::Integral,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kind(&self) -> OrderKind {
        self.kind
    }

    fn expect(&self, kind: OrderKind) -> Result<f64> {
        if self.kind != kind {
            return Err(Error::domain(format!(
                "expected a {kind:?} order, got a {:?} order",
                self.kind
            )));
        }
        Ok(self.alpha)
    }
}

/// `Gamma(x)`, with an error at the poles `0, -1, -2, ...`.
pub fn gamma_eval(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!(
            "Gamma argument must be finite, got {x}"
        )));
    }
    if x <= 0.0 && x == libm::floor(x) {
        return Err(Error::Pole(x));
    }
    Ok(libm::tgamma(x))
}

fn check_power_args(beta: f64, t: f64) -> Result<()> {
    if !(beta > -1.0) {
        return Err(Error::domain(format!(
            "power exponent must exceed -1, got {beta}"
        )));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!(
            "evaluation time must be positive, got {t}"
        )));
    }
    Ok(())
}

/// Exact RL derivative of `t^beta`: `Gamma(beta+1)/Gamma(beta+1-alpha) t^(beta-alpha)`.
pub fn rl_derivative_power(order: FracOrder, beta: f64, t: f64) -> Result<f64> {
    let alpha = order.expect(OrderKind::Derivative)?;
    check_power_args(beta, t)?;
    let ratio = gamma_eval(beta + 1.0)? / gamma_eval(beta + 1.0 - alpha)?;
    Ok(ratio * libm::pow(t, beta - alpha))
}

/// Exact RL integral of `t^beta`: `Gamma(beta+1)/Gamma(beta+1+mu) t^(beta+mu)`.
pub fn rl_integral_power(order: FracOrder, beta: f64, t: f64) -> Result<f64> {
    let mu = order.expect(OrderKind::Integral)?;
    check_power_args(beta, t)?;
    let ratio = gamma_eval(beta + 1.0)? / gamma_eval(beta + 1.0 + mu)?;
    Ok(ratio * libm::pow(t, beta + mu))
}

/// Grünwald–Letnikov weights `w_j = (-1)^j binom(alpha, j)`, `j = 0..n`.
pub fn gl_weights(alpha: f64, n: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(n);
    if n == 0 {
        return w;
    }
    w.push(1.0);
    for j in 1..n {
        let prev = w[j - 1];
        w.push(prev * (1.0 - (alpha + 1.0) / j as f64));
    }
    w
}

/// Grünwald–Letnikov approximation of the RL derivative on the same grid:
/// `h^-alpha sum_{j<=n} w_j f(t_{n-j})`.
///
/// First order in `dt` at fixed `t > 0` for smooth or power-law inputs. For
/// inputs singular at the origin only points with `t >= 10 dt` are meaningful.
pub fn rl_derivative_gl(f: &GridFunction, order: FracOrder) -> Result<GridFunction> {
    let alpha = order.expect(OrderKind::Derivative)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!(
            "Grünwald–Letnikov order must lie in (0, 1), got {alpha}"
        )));
    }
    let grid = *f.grid();
    if grid.t0() != 0.0 {
        return Err(Error::NonZeroOrigin(grid.t0()));
    }
    let n = grid.len();
    let weights = gl_weights(alpha, n);
    let scale = libm::pow(grid.dt(), -alpha);
    let values = f.values();
    let out = (0..n)
        .map(|i| {
            let acc: f64 = weights[..=i]
                .iter()
                .zip(values[..=i].iter().rev())
                .map(|(w, v)| w * v)
                .sum();
            scale * acc
        })
        .collect();
    GridFunction::new(grid, out)
}

/// RL integral `J^mu f(t)` to absolute tolerance `tol`.
///
/// With `s = t (1 - z^(1/mu))` the kernel `(t-s)^(mu-1) ds` becomes a constant
/// multiple of `dz`, so `J^mu f(t) = t^mu / Gamma(mu+1) int_0^1 f(s(z)) dz`.
/// Power-type singularities of `f` at `s = 0` end up at `z = 1`, where the
/// tanh-sinh nodes cluster.
pub fn rl_integral_quad<F>(f: F, order: FracOrder, t: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mu = order.expect(OrderKind::Integral)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!(
            "evaluation time must be positive, got {t}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let prefactor = libm::pow(t, mu) / gamma_eval(mu + 1.0)?;
    let inv_mu = 1.0 / mu;
    let res = quadrature::tanh_sinh(0.0, 1.0, tol / prefactor, |z, _, to_one| {
        let frac = if z > 0.5 {
            // 1 - (1-d)^(1/mu) without cancellation
            -libm::expm1(libm::log1p(-to_one) * inv_mu)
        } else {
            1.0 - libm::pow(z, inv_mu)
        };
        let s = t * frac;
        if s == 0.0 {
            // underflowed node; its weight is below 1e-300
            return 0.0;
        }
        f(s)
    })?;
    Ok(prefactor * res.value)
}
