//! Discretisation carriers shared by the samplers, operators and solvers.

use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Uniform time grid `t_i = t0 + i * dt`, `i = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UniformTimeGrid {
    t0: f64,
    dt: f64,
    count: usize,
}

impl UniformTimeGrid {
    pub fn new(t0: f64, dt: f64, count: usize) -> Result<Self> {
        if !(t0.is_finite() && t0 >= 0.0) {
            return Err(Error::Grid(format!("t0 must be finite and >= 0, got {t0}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Grid(format!("dt must be finite and > 0, got {dt}")));
        }
        if count < 2 {
            return Err(Error::Grid(format!(
                "grid needs at least 2 points, got {count}"
            )));
        }
        let end = t0 + dt * (count - 1) as f64;
        if !end.is_finite() {
            return Err(Error::Grid(format!("grid end {end} is not finite")));
        }
        Ok(Self { t0, dt, count })
    }

    /// `count` points spanning `[t0, t1]` inclusive.
    pub fn from_span(t0: f64, t1: f64, count: usize) -> Result<Self> {
        if count < 2 || !(t1 > t0) {
            return Err(Error::Grid(format!(
                "span [{t0}, {t1}] with {count} points is not a valid grid"
            )));
        }
        Self::new(t0, (t1 - t0) / (count - 1) as f64, count)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn end(&self) -> f64 {
        self.time(self.count - 1)
    }

    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        self.t0 + self.dt * i as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.time(i))
    }

    /// Same span with half the step (`2n - 1` points).
    pub fn refined(&self) -> Self {
        Self {
            t0: self.t0,
            dt: self.dt / 2.0,
            count: 2 * self.count - 1,
        }
    }

    /// Index of the grid point equal to `t` up to `1e-9 * dt`.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let pos = (t - self.t0) / self.dt;
        let idx = libm::round(pos);
        if idx < 0.0 || idx as usize >= self.count {
            return None;
        }
        if libm::fabs(pos - idx) > 1e-9 {
            return None;
        }
        Some(idx as usize)
    }
}

/// Symmetric space grid on `[-xmax, xmax]` with `count` nodes including both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpaceGrid {
    xmax: f64,
    count: usize,
}

impl SpaceGrid {
    pub fn new(xmax: f64, count: usize) -> Result<Self> {
        if !(xmax.is_finite() && xmax > 0.0) {
            return Err(Error::Grid(format!(
                "xmax must be finite and > 0, got {xmax}"
            )));
        }
        if count < 3 {
            return Err(Error::Grid(format!(
                "space grid needs at least 3 nodes, got {count}"
            )));
        }
        Ok(Self { xmax, count })
    }

    pub fn xmax(&self) -> f64 {
        self.xmax
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.xmax / (self.count - 1) as f64
    }

    /// Node `i`; computed so that `x(n-1-i) == -x(i)` exactly.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        let offset = 2.0 * i as f64 - (self.count - 1) as f64;
        offset * (self.xmax / (self.count - 1) as f64)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.x(i))
    }

    /// Halved spacing over the same interval.
    pub fn refined(&self) -> Self {
        Self {
            xmax: self.xmax,
            count: 2 * self.count - 1,
        }
    }

    /// Composite trapezoid rule of nodal `values`.
    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.count);
        let n = values.len();
        let inner: f64 = values[1..n - 1].iter().sum();
        self.dx() * (inner + 0.5 * (values[0] + values[n - 1]))
    }

    /// Trapezoid L1 distance between two nodal profiles.
    pub fn l1_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let diff: Vec<f64> = a.iter().zip(b).map(|(u, v)| libm::fabs(u - v)).collect();
        self.trapezoid(&diff)
    }
}

/// Real samples on a [`UniformTimeGrid`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridFunction {
    grid: UniformTimeGrid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: UniformTimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: UniformTimeGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.times().map(f).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &UniformTimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.times().zip(self.values.iter().copied())
    }
}

/// Row-major `n_t x n_x` array of reals over a time grid and a space grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpaceTimeField {
    tgrid: UniformTimeGrid,
    xgrid: SpaceGrid,
    values: Vec<f64>,
}

impl SpaceTimeField {
    pub fn new(tgrid: UniformTimeGrid, xgrid: SpaceGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != tgrid.len() * xgrid.len() {
            return Err(Error::Grid(format!(
                "{} values for a {}x{} space-time grid",
                values.len(),
                tgrid.len(),
                xgrid.len()
            )));
        }
        Ok(Self {
            tgrid,
            xgrid,
            values,
        })
    }

    pub fn from_fn(tgrid: UniformTimeGrid, xgrid: SpaceGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(tgrid.len() * xgrid.len());
        for t in tgrid.times() {
            values.extend(xgrid.points().map(|x| f(t, x)));
        }
        Self {
            tgrid,
            xgrid,
            values,
        }
    }

    pub fn tgrid(&self) -> &UniformTimeGrid {
        &self.tgrid
    }

    pub fn xgrid(&self) -> &SpaceGrid {
        &self.xgrid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, it: usize, ix: usize) -> f64 {
        self.values[it * self.xgrid.len() + ix]
    }

    pub fn slice(&self, it: usize) -> &[f64] {
        let nx = self.xgrid.len();
        &self.values[it * nx..(it + 1) * nx]
    }

    pub fn last_slice(&self) -> &[f64] {
        self.slice(self.tgrid.len() - 1)
    }
}
