//! Exact samplers for rescaled and iterated fractional Brownian motion, and
//! the ensemble statistics used to check their moments.
//!
//! Every path draws from its own ChaCha8 stream seeded with `seed ^ path`,
//! so ensembles are reproducible and paths can be produced in any order.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::fft::{self, Complex};
use crate::linalg::Cholesky;
use crate::{Error, GridFunction, HurstSpec, Result, UniformTimeGrid};

/// Circulant eigenvalues below `-NEGATIVE_EIGEN_TOL * max` trigger the Cholesky fallback.
const NEGATIVE_EIGEN_TOL: f64 = 1e-10;
/// Inner times closer than this fraction of the largest one are merged.
const DEDUP_REL_TOL: f64 = 1e-12;

/// `E[Y(s) Y(t)] = C (t^2H + s^2H - |t-s|^2H)` for `Y = sqrt(2C) B^H`.
pub fn covariance(spec: &HurstSpec, s: f64, t: f64) -> Result<f64> {
    if !(s >= 0.0 && t >= 0.0) {
        return Err(Error::domain(format!(
            "covariance needs s, t >= 0, got ({s}, {t})"
        )));
    }
    Ok(raw_covariance(spec.hurst(), spec.scale(), s, t))
}

#[inline]
fn raw_covariance(h: f64, c: f64, s: f64, t: f64) -> f64 {
    let p = 2.0 * h;
    c * (libm::pow(t, p) + libm::pow(s, p) - libm::pow(libm::fabs(t - s), p))
}

fn covariance_matrix(h: f64, c: f64, times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = raw_covariance(h, c, times[i], times[j]);
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }
    a
}

fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ path as u64)
}

/// Which process generated an ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EnsembleProcess {
    Rescaled(HurstSpec),
    /// `B_outer(|B_inner(t)|)` with standard (`C = 1/2`) layers.
    Iterated {
        outer: HurstSpec,
        inner: HurstSpec,
    },
}

/// `n_paths x n_times` values, one row per path.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PathEnsemble {
    grid: UniformTimeGrid,
    n_paths: usize,
    values: Vec<f64>,
    seed: u64,
    process: EnsembleProcess,
}

impl PathEnsemble {
    pub fn new(
        grid: UniformTimeGrid,
        values: Vec<f64>,
        seed: u64,
        process: EnsembleProcess,
    ) -> Result<Self> {
        let n = grid.len();
        if values.is_empty() || !values.len().is_multiple_of(n) {
            return Err(Error::Grid(format!(
                "{} values do not fill whole paths of {n} points",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!(
                "ensemble contains non-finite value {v}"
            )));
        }
        Ok(Self {
            grid,
            n_paths: values.len() / n,
            values,
            seed,
            process,
        })
    }

    pub fn grid(&self) -> &UniformTimeGrid {
        &self.grid
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn n_times(&self) -> usize {
        self.grid.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn process(&self) -> &EnsembleProcess {
        &self.process
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn path(&self, p: usize) -> &[f64] {
        let n = self.n_times();
        &self.values[p * n..(p + 1) * n]
    }

    pub fn paths(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_times())
    }

    /// Values of every path at grid index `i`.
    pub fn column(&self, i: usize) -> Vec<f64> {
        self.paths().map(|p| p[i]).collect()
    }
}

fn check_paths(n_paths: usize) -> Result<()> {
    if n_paths == 0 {
        return Err(Error::domain("n_paths must be at least 1"));
    }
    Ok(())
}

/// Exact joint-Gaussian sampler. A grid starting at `t = 0` pins the first value to zero.
pub fn sample_cholesky(
    spec: &HurstSpec,
    grid: &UniformTimeGrid,
    n_paths: usize,
    seed: u64,
) -> Result<PathEnsemble> {
    check_paths(n_paths)?;
    let pinned = grid.t0() == 0.0;
    let times: Vec<f64> = grid.times().skip(pinned as usize).collect();
    let m = times.len();
    let factor = Cholesky::factor(&covariance_matrix(spec.hurst(), spec.scale(), &times), m)?;

    let n = grid.len();
    let mut values = vec![0.0; n_paths * n];
    let mut z = vec![0.0; m];
    for (p, row) in values.chunks_exact_mut(n).enumerate() {
        let mut rng = path_rng(seed, p);
        z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        factor.mul_lower(&z, &mut row[pinned as usize..]);
    }
    PathEnsemble::new(*grid, values, seed, EnsembleProcess::Rescaled(*spec))
}

/// Unit-spacing fractional Gaussian noise autocovariance.
fn fgn_autocovariance(h: f64, k: usize) -> f64 {
    let p = 2.0 * h;
    let k = k as f64;
    0.5 * (libm::pow(k + 1.0, p) - 2.0 * libm::pow(k, p) + libm::pow(libm::fabs(k - 1.0), p))
}

/// Circulant-embedding (Davies–Harte) sampler on a grid starting at 0.
///
/// Increments are exact fractional Gaussian noise; the embedding is padded to
/// a power of two. Falls back to [`sample_cholesky`] when the embedding is not
/// nonnegative definite.
pub fn sample_circulant(
    spec: &HurstSpec,
    grid: &UniformTimeGrid,
    n_paths: usize,
    seed: u64,
) -> Result<PathEnsemble> {
    check_paths(n_paths)?;
    if grid.t0() != 0.0 {
        return Err(Error::Grid(format!(
            "circulant sampler needs a grid starting at 0, got t0 = {}",
            grid.t0()
        )));
    }
    let h = spec.hurst();
    let steps = grid.len() - 1;
    let half = steps.next_power_of_two().max(2);
    let size = 2 * half;

    let mut row: Vec<Complex> = (0..size)
        .map(|j| {
            let lag = if j <= half { j } else { size - j };
            Complex::new(fgn_autocovariance(h, lag), 0.0)
        })
        .collect();
    fft::fft(&mut row);
    let eig: Vec<f64> = row.iter().map(|c| c.re).collect();
    let max_eig = eig.iter().fold(0.0_f64, |m, v| m.max(*v));
    if eig.iter().any(|&l| l < -NEGATIVE_EIGEN_TOL * max_eig) {
        return sample_cholesky(spec, grid, n_paths, seed);
    }
    let nf = size as f64;
    let amp: Vec<f64> = eig
        .iter()
        .enumerate()
        .map(|(k, &l)| {
            let l = l.max(0.0);
            if k == 0 || k == half {
                libm::sqrt(l / nf)
            } else {
                libm::sqrt(l / (2.0 * nf))
            }
        })
        .collect();

    let increment_scale = libm::sqrt(2.0 * spec.scale()) * libm::pow(grid.dt(), h);
    let n = grid.len();
    let mut values = vec![0.0; n_paths * n];
    let mut buf = vec![Complex::default(); size];
    for (p, out) in values.chunks_exact_mut(n).enumerate() {
        let mut rng = path_rng(seed, p);
        buf[0] = Complex::new(amp[0] * rng.sample::<f64, _>(StandardNormal), 0.0);
        buf[half] = Complex::new(amp[half] * rng.sample::<f64, _>(StandardNormal), 0.0);
        for k in 1..half {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            buf[k] = Complex::new(amp[k] * a, amp[k] * b);
            buf[size - k] = Complex::new(amp[k] * a, -amp[k] * b);
        }
        fft::fft(&mut buf);
        let mut acc = 0.0;
        out[0] = 0.0;
        for i in 1..n {
            acc += increment_scale * buf[i - 1].re;
            out[i] = acc;
        }
    }
    PathEnsemble::new(*grid, values, seed, EnsembleProcess::Rescaled(*spec))
}

/// Iterated fBm `B1^{H1}(|B2^{H2}(t)|)` with independent standard layers.
///
/// The inner path is sampled on the grid; the outer process is then sampled
/// exactly at the (sorted, deduplicated) random inner times.
pub fn sample_iterated(
    outer_hurst: f64,
    inner_hurst: f64,
    grid: &UniformTimeGrid,
    n_paths: usize,
    seed: u64,
) -> Result<PathEnsemble> {
    check_paths(n_paths)?;
    let outer = HurstSpec::standard(outer_hurst)?;
    let inner = HurstSpec::standard(inner_hurst)?;

    let pinned = grid.t0() == 0.0;
    let inner_times: Vec<f64> = grid.times().skip(pinned as usize).collect();
    let m = inner_times.len();
    let inner_factor = Cholesky::factor(&covariance_matrix(inner_hurst, 0.5, &inner_times), m)?;

    let n = grid.len();
    let mut values = vec![0.0; n_paths * n];
    let mut z = vec![0.0; m];
    let mut inner_path = vec![0.0; n];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for (p, out) in values.chunks_exact_mut(n).enumerate() {
        let mut rng = path_rng(seed, p);
        z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        inner_path[0] = 0.0;
        inner_factor.mul_lower(&z, &mut inner_path[pinned as usize..]);
        inner_path.iter_mut().for_each(|v| *v = libm::fabs(*v));

        order.clear();
        order.extend(0..n);
        order.sort_by(|&a, &b| inner_path[a].total_cmp(&inner_path[b]));
        let max_tau = inner_path[order[n - 1]];
        let tol = DEDUP_REL_TOL * max_tau;

        // distinct positive inner times, and for each grid index the slot it maps to
        let mut distinct: Vec<f64> = Vec::new();
        let mut slot = vec![usize::MAX; n];
        for &i in &order {
            let tau = inner_path[i];
            if tau <= tol {
                continue;
            }
            match distinct.last() {
                Some(&last) if tau - last <= tol => {}
                _ => distinct.push(tau),
            }
            slot[i] = distinct.len() - 1;
        }

        let k = distinct.len();
        let mut outer_vals = vec![0.0; k];
        if k > 0 {
            let factor = Cholesky::factor(&covariance_matrix(outer_hurst, 0.5, &distinct), k)?;
            let w: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
            factor.mul_lower(&w, &mut outer_vals);
        }
        for i in 0..n {
            out[i] = if slot[i] == usize::MAX {
                0.0
            } else {
                outer_vals[slot[i]]
            };
        }
    }
    PathEnsemble::new(
        *grid,
        values,
        seed,
        EnsembleProcess::Iterated { outer, inner },
    )
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

impl Estimate {
    /// `|value - target|` measured in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        libm::fabs(self.value - target) / self.std_err
    }
}

fn mean_and_se(samples: impl Iterator<Item = f64> + Clone) -> Estimate {
    let (n, sum) = samples
        .clone()
        .fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
    let nf = n as f64;
    let mean = sum / nf;
    let ss: f64 = samples.map(|v| (v - mean) * (v - mean)).sum();
    let var = if n > 1 { ss / (nf - 1.0) } else { 0.0 };
    Estimate {
        value: mean,
        std_err: libm::sqrt(var / nf),
    }
}

/// Uncentered cross moment `mean(a_i b_i)`; the processes here are centered,
/// so this is their covariance estimator.
pub fn second_moment(a: &[f64], b: &[f64]) -> Estimate {
    mean_and_se(a.iter().zip(b).map(|(x, y)| x * y))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MsdEstimate {
    pub msd: GridFunction,
    pub std_err: Vec<f64>,
}

/// `t -> mean over paths of X(t)^2`.
pub fn empirical_msd(paths: &PathEnsemble) -> Result<MsdEstimate> {
    if paths.n_paths() < 2 {
        return Err(Error::domain(
            "mean-square displacement needs at least 2 paths",
        ));
    }
    let mut msd = Vec::with_capacity(paths.n_times());
    let mut se = Vec::with_capacity(paths.n_times());
    for i in 0..paths.n_times() {
        let col = paths.column(i);
        let e = second_moment(&col, &col);
        msd.push(e.value);
        se.push(e.std_err);
    }
    Ok(MsdEstimate {
        msd: GridFunction::new(*paths.grid(), msd)?,
        std_err: se,
    })
}

/// Covariance of `X(s)` and `X(t)` across paths; both must be grid times.
pub fn empirical_covariance(paths: &PathEnsemble, s: f64, t: f64) -> Result<Estimate> {
    let locate = |u: f64| {
        paths
            .grid()
            .index_of(u)
            .ok_or_else(|| Error::Grid(format!("time {u} is not on the ensemble grid")))
    };
    let (i, j) = (locate(s)?, locate(t)?);
    Ok(second_moment(&paths.column(i), &paths.column(j)))
}

/// Pooled lag-one autocorrelation of the increments.
///
/// Ratio of pooled means; the standard error uses the delta method over
/// per-path sums, so within-path dependence is accounted for.
pub fn increment_lag1_autocorrelation(paths: &PathEnsemble) -> Result<Estimate> {
    let n = paths.n_times();
    if n < 3 || paths.n_paths() < 2 {
        return Err(Error::domain(
            "lag-one autocorrelation needs at least 3 times and 2 paths",
        ));
    }
    let mut num = Vec::with_capacity(paths.n_paths());
    let mut den = Vec::with_capacity(paths.n_paths());
    for path in paths.paths() {
        let inc: Vec<f64> = path.windows(2).map(|w| w[1] - w[0]).collect();
        let a: f64 = inc.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / (inc.len() - 1) as f64;
        let b: f64 = inc.iter().map(|v| v * v).sum::<f64>() / inc.len() as f64;
        num.push(a);
        den.push(b);
    }
    let np = num.len() as f64;
    let mean_a = num.iter().sum::<f64>() / np;
    let mean_b = den.iter().sum::<f64>() / np;
    let r = mean_a / mean_b;
    let lin = num.iter().zip(&den).map(|(a, b)| (a - r * b) / mean_b);
    let se = mean_and_se(lin).std_err;
    Ok(Estimate {
        value: r,
        std_err: se,
    })
}

/// Least-squares fit of `y = amplitude * t^exponent` on log-log axes.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PowerLawFit {
    pub exponent: f64,
    pub amplitude: f64,
}

pub fn fit_power_law(f: &GridFunction, t_lo: f64, t_hi: f64) -> Result<PowerLawFit> {
    let pts: Vec<(f64, f64)> = f
        .iter()
        .filter(|&(t, y)| t > 0.0 && t >= t_lo - 1e-12 && t <= t_hi + 1e-12 && y > 0.0)
        .map(|(t, y)| (libm::log(t), libm::log(y)))
        .collect();
    if pts.len() < 2 {
        return Err(Error::domain(format!(
            "fewer than two positive points in [{t_lo}, {t_hi}]"
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok(PowerLawFit {
        exponent: slope,
        amplitude: libm::exp(my - slope * mx),
    })
}
