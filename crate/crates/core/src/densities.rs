//! Probability densities of rescaled Bm, rescaled fBm and iterated fBm.

use core::f64::consts::{PI, SQRT_2};

use alloc::format;
use alloc::vec::Vec;

use crate::quadrature;
use crate::{Error, HurstSpec, Result, SpaceGrid, SpaceTimeField, UniformTimeGrid};

/// Default absolute tolerance for [`iterated_density`].
pub const DEFAULT_DENSITY_TOL: f64 = 1e-10;

/// Centered Gaussian density with variance `var`.
#[inline]
pub fn gaussian(z: f64, var: f64) -> f64 {
    libm::exp(-z * z / (2.0 * var)) / libm::sqrt(2.0 * PI * var)
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("density needs t > 0, got {t}")));
    }
    Ok(())
}

/// Heat kernel `(4 pi C t)^(-1/2) exp(-x^2 / (4Ct))` of `Y = sqrt(2C) B`.
pub fn bm_density(scale: f64, t: f64, x: f64) -> Result<f64> {
    check_time(t)?;
    if !(scale > 0.0) {
        return Err(Error::domain(format!(
            "scale C must be positive, got {scale}"
        )));
    }
    Ok(gaussian(x, 2.0 * scale * t))
}

/// `c_H(t, x) = (4 pi C t^2H)^(-1/2) exp(-x^2 / (4C t^2H))`.
pub fn fbm_density(spec: &HurstSpec, t: f64, x: f64) -> Result<f64> {
    check_time(t)?;
    Ok(gaussian(x, spec.msd(t)))
}

/// Density of `B1^{H1}(|B2^{H2}(t)|)`:
/// `2 int_0^inf phi(x; s^2H1) phi(s; t^2H2) ds`, to absolute tolerance `tol`.
///
/// The `s`-integral is truncated where the Gaussian tail bound of the inner
/// factor drops below `tol / 2`; the quadrature gets the other half.
pub fn iterated_density(h1: f64, h2: f64, t: f64, x: f64, tol: f64) -> Result<f64> {
    for (name, h) in [("H1", h1), ("H2", h2)] {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::domain(format!("{name} must lie in (0, 1), got {h}")));
        }
    }
    check_time(t)?;
    if !(tol > 0.0) {
        return Err(Error::domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }

    let sigma = libm::pow(t, h2);
    let inner_var = sigma * sigma;
    let outer = |s: f64| {
        if s == 0.0 {
            // only reachable for x != 0, where the factor vanishes
            return 0.0;
        }
        let inv_sd = libm::pow(s, -h1);
        let z = libm::fabs(x) * inv_sd;
        libm::exp(-0.5 * z * z) * inv_sd / libm::sqrt(2.0 * PI)
    };
    let integrand = |s: f64, _: f64, _: f64| 2.0 * outer(s) * gaussian(s, inner_var);

    // 2 * sup_{s>=L} phi(x; s^2H1) * P(N(0, sigma^2) > L)
    let tail = |l: f64| {
        let sup_outer = libm::pow(l, -h1) / libm::sqrt(2.0 * PI);
        sup_outer * libm::erfc(l / (sigma * SQRT_2))
    };
    let mut upper = 12.0 * sigma;
    while tail(upper) > 0.5 * tol {
        upper *= 1.5;
    }

    // the outer factor switches on around s ~ |x|^(1/H1)
    let knee = libm::pow(libm::fabs(x), 1.0 / h1);
    let value = if knee > 1e-12 * upper && knee < upper {
        let a = quadrature::tanh_sinh(0.0, knee, 0.25 * tol, integrand)?;
        let b = quadrature::tanh_sinh(knee, upper, 0.25 * tol, integrand)?;
        a.value + b.value
    } else {
        quadrature::tanh_sinh(0.0, upper, 0.5 * tol, integrand)?.value
    };
    Ok(value)
}

/// `E[X(t)^2] = t^(2 H1 H2) E|Z|^(2 H1)` for iterated fBm, `Z` standard normal.
pub fn iterated_second_moment(h1: f64, h2: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    let p = 2.0 * h1;
    let abs_moment = libm::pow(2.0, 0.5 * p) * libm::tgamma(0.5 * (p + 1.0)) / libm::sqrt(PI);
    Ok(libm::pow(t, p * h2) * abs_moment)
}

/// Total-variation distance between the histogram of `sample` on `bins` equal
/// bins over `[lo, hi]` and a law with bin probabilities `prob(a, b)`.
/// Mass outside `[lo, hi]` on either side is compared as one extra bin.
pub fn histogram_tv_distance<F>(
    sample: &[f64],
    lo: f64,
    hi: f64,
    bins: usize,
    mut prob: F,
) -> Result<f64>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    if sample.is_empty() || bins == 0 || !(hi > lo) {
        return Err(Error::domain(format!(
            "histogram needs samples, bins > 0 and lo < hi (got {} samples, {bins} bins, [{lo}, {hi}])",
            sample.len()
        )));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = alloc::vec![0usize; bins];
    for v in sample {
        let b = libm::floor((v - lo) / width);
        if b >= 0.0 && (b as usize) < bins {
            counts[b as usize] += 1;
        }
    }
    let n = sample.len() as f64;
    let mut covered = 0.0;
    let mut sum = 0.0;
    for (b, &count) in counts.iter().enumerate() {
        let a = lo + b as f64 * width;
        let p = prob(a, a + width)?;
        covered += p;
        sum += libm::fabs(count as f64 / n - p);
    }
    let outside = sample.len() - counts.iter().sum::<usize>();
    sum += libm::fabs(outside as f64 / n - (1.0 - covered));
    Ok(0.5 * sum)
}

/// Density values on a space-time grid with per-slice trapezoid mass.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DensityField {
    field: SpaceTimeField,
    mass: Vec<f64>,
}

impl DensityField {
    pub fn from_field(field: SpaceTimeField) -> Self {
        let xgrid = *field.xgrid();
        let mass = (0..field.tgrid().len())
            .map(|i| xgrid.trapezoid(field.slice(i)))
            .collect();
        Self { field, mass }
    }

    /// Samples a closed-form density on the grid.
    pub fn analytic(
        tgrid: UniformTimeGrid,
        xgrid: SpaceGrid,
        density: impl Fn(f64, f64) -> Result<f64>,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(tgrid.len() * xgrid.len());
        for t in tgrid.times() {
            for x in xgrid.points() {
                values.push(density(t, x)?);
            }
        }
        Ok(Self::from_field(SpaceTimeField::new(tgrid, xgrid, values)?))
    }

    pub fn field(&self) -> &SpaceTimeField {
        &self.field
    }

    pub fn tgrid(&self) -> &UniformTimeGrid {
        self.field.tgrid()
    }

    pub fn xgrid(&self) -> &SpaceGrid {
        self.field.xgrid()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// `max_t |mass(t) - 1|`.
    pub fn max_mass_defect(&self) -> f64 {
        self.mass
            .iter()
            .fold(0.0_f64, |m, v| m.max(libm::fabs(v - 1.0)))
    }

    pub fn min_value(&self) -> f64 {
        self.field
            .values()
            .iter()
            .fold(f64::INFINITY, |m, v| m.min(*v))
    }

    pub fn slice(&self, it: usize) -> &[f64] {
        self.field.slice(it)
    }

    pub fn last_slice(&self) -> &[f64] {
        self.field.last_slice()
    }
}
