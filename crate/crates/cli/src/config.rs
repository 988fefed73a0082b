//! Command-line flags and their resolution into a concrete run configuration.

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use fbmdiff::diffusivity::k_coefficient;
use fbmdiff::HurstSpec;
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Sample rescaled fBm paths (iterated fBm when --hurst2 is given).
    Sample,
    /// Mean-square displacement of a sampled ensemble.
    Msd,
    /// Closed-form or quadrature density on a space-time grid.
    Density,
    /// Crank–Nicolson solve of the diffusion equation from c_H(t0).
    Pde,
    /// Transport solve for iterated fBm from its density at t0.
    Transport,
    /// Grünwald–Letnikov residual of the fractional differential equation (H < 1/2).
    ResidualOde,
    /// Quadrature residual of the fractional integral equation (1/2 < H < 1).
    ResidualIntegral,
    /// Trapezoid residual of the H = 1 integral equation.
    ResidualClassical,
    /// All checks of the governing equation for one (H, C).
    VerifyGoverning,
    /// All checks of the iterated-fBm density and transport equation.
    VerifyIterated,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::Msd => "msd",
            Command::Density => "density",
            Command::Pde => "pde",
            Command::Transport => "transport",
            Command::ResidualOde => "residual-ode",
            Command::ResidualIntegral => "residual-integral",
            Command::ResidualClassical => "residual-classical",
            Command::VerifyGoverning => "verify-governing",
            Command::VerifyIterated => "verify-iterated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "fbmdiff",
    version,
    about = "Fractional Brownian motion as a diffusion with fractional-equation diffusivity"
)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Hurst index H (outer index for iterated fBm).
    #[arg(long)]
    pub hurst: Option<f64>,
    /// Inner Hurst index for iterated fBm.
    #[arg(long)]
    pub hurst2: Option<f64>,
    /// Scale C of Y = sqrt(2C) B^H.
    #[arg(long, default_value_t = 0.5)]
    pub scale_c: f64,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub t1: Option<f64>,
    /// Number of time steps.
    #[arg(long)]
    pub n_t: Option<usize>,
    /// Number of space nodes.
    #[arg(long)]
    pub n_x: Option<usize>,
    #[arg(long)]
    pub paths: Option<usize>,
    /// Half-width of the space grid.
    #[arg(long)]
    pub xmax: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Data artifact path; the manifest goes next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Directory for artifacts when --out is not given.
    #[arg(long, env = "FBMDIFF_OUT_DIR")]
    pub out_dir: Option<PathBuf>,
}

/// Fully resolved run parameters. Fields a command does not use are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub hurst: Option<f64>,
    pub hurst2: Option<f64>,
    pub scale_c: f64,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub n_t: Option<usize>,
    pub n_x: Option<usize>,
    pub paths: Option<usize>,
    pub xmax: Option<f64>,
    pub seed: u64,
    pub out: PathBuf,
    pub format: Format,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn unit_interval(name: &str, h: f64) -> Result<f64, CliError> {
    if h > 0.0 && h < 1.0 {
        Ok(h)
    } else {
        Err(invalid(format!("--{name} must lie in (0, 1), got {h}")))
    }
}

impl Cli {
    fn hurst(&self) -> Result<f64, CliError> {
        let h = self
            .hurst
            .ok_or_else(|| invalid(format!("{} needs --hurst", self.command.name())))?;
        Ok(h)
    }

    fn spec(&self) -> Result<HurstSpec, CliError> {
        Ok(HurstSpec::new(self.hurst()?, self.scale_c)?)
    }

    fn iterated_pair(&self) -> Result<(f64, f64), CliError> {
        let h1 = unit_interval("hurst", self.hurst()?)?;
        let h2 = self
            .hurst2
            .ok_or_else(|| invalid(format!("{} needs --hurst2", self.command.name())))?;
        Ok((h1, unit_interval("hurst2", h2)?))
    }

    /// Applies per-command defaults and checks every precondition.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        use Command::*;
        if !(self.scale_c > 0.0 && self.scale_c.is_finite()) {
            return Err(invalid(format!(
                "--scale-c must be positive, got {}",
                self.scale_c
            )));
        }
        let mut cfg = RunConfig {
            command: self.command,
            hurst: None,
            hurst2: None,
            scale_c: self.scale_c,
            t0: None,
            t1: None,
            n_t: None,
            n_x: None,
            paths: None,
            xmax: None,
            seed: self.seed,
            out: self.out_path(),
            format: self.format,
        };
        let span = |t0: f64, t1: f64| (Some(self.t0.unwrap_or(t0)), Some(self.t1.unwrap_or(t1)));

        match self.command {
            Sample | Msd => {
                if self.hurst2.is_some() {
                    let (h1, h2) = self.iterated_pair()?;
                    cfg.hurst = Some(h1);
                    cfg.hurst2 = Some(h2);
                } else {
                    cfg.hurst = Some(self.spec()?.hurst());
                }
                (cfg.t0, cfg.t1) = span(0.0, 1.0);
                cfg.n_t = Some(
                    self.n_t
                        .unwrap_or(if self.hurst2.is_some() { 64 } else { 256 }),
                );
                let default_paths = if self.command == Msd { 10_000 } else { 1000 };
                cfg.paths = Some(self.paths.unwrap_or(default_paths));
                let min_paths = if self.command == Msd { 2 } else { 1 };
                if cfg.paths.unwrap() < min_paths {
                    return Err(invalid(format!(
                        "--paths must be at least {min_paths}, got {}",
                        cfg.paths.unwrap()
                    )));
                }
                if self.hurst2.is_none() && cfg.t0 != Some(0.0) && self.command == Msd {
                    return Err(invalid("msd samples from t0 = 0"));
                }
            }
            Density => {
                (cfg.t0, cfg.t1) = span(0.5, 1.0);
                let t1 = cfg.t1.unwrap();
                let sd = if self.hurst2.is_some() {
                    let (h1, h2) = self.iterated_pair()?;
                    cfg.hurst = Some(h1);
                    cfg.hurst2 = Some(h2);
                    fbmdiff::densities::iterated_second_moment(h1, h2, t1.max(1e-300))?.sqrt()
                } else {
                    let spec = self.spec()?;
                    cfg.hurst = Some(spec.hurst());
                    spec.msd(t1.max(0.0)).sqrt()
                };
                cfg.n_t = Some(self.n_t.unwrap_or(4));
                cfg.n_x = Some(self.n_x.unwrap_or(201));
                cfg.xmax = Some(self.xmax.unwrap_or(8.0 * sd));
            }
            Pde => {
                let spec = self.spec()?;
                cfg.hurst = Some(spec.hurst());
                self.diffusion_defaults(&spec, &mut cfg);
            }
            Transport => {
                let (h1, h2) = self.iterated_pair()?;
                cfg.hurst = Some(h1);
                cfg.hurst2 = Some(h2);
                self.transport_defaults(h1, h2, &mut cfg)?;
            }
            ResidualOde => {
                let spec = self.spec()?;
                k_coefficient(&spec)?;
                if !(spec.hurst() < 0.5) {
                    return Err(invalid(format!(
                        "residual-ode certifies the fractional differential equation, which governs H < 1/2; got H = {}",
                        spec.hurst()
                    )));
                }
                cfg.hurst = Some(spec.hurst());
                (cfg.t0, cfg.t1) = span(0.0, 2.0);
                cfg.n_t = Some(self.n_t.unwrap_or(4096));
            }
            ResidualIntegral => {
                let spec = self.spec()?;
                if !(spec.hurst() > 0.5) {
                    return Err(invalid(format!(
                        "residual-integral certifies the fractional integral equation, which governs H > 1/2; got H = {}",
                        spec.hurst()
                    )));
                }
                k_coefficient(&spec)?;
                cfg.hurst = Some(spec.hurst());
                (cfg.t0, cfg.t1) = span(0.1, 2.0);
                cfg.n_t = Some(self.n_t.unwrap_or(38));
            }
            ResidualClassical => {
                (cfg.t0, cfg.t1) = span(0.0, 1.0);
                cfg.n_t = Some(self.n_t.unwrap_or(100));
            }
            VerifyGoverning => {
                let spec = self.spec()?;
                k_coefficient(&spec)?;
                cfg.hurst = Some(spec.hurst());
                self.diffusion_defaults(&spec, &mut cfg);
            }
            VerifyIterated => {
                let (h1, h2) = self.iterated_pair()?;
                cfg.hurst = Some(h1);
                cfg.hurst2 = Some(h2);
                cfg.paths = Some(self.paths.unwrap_or(100_000));
                if cfg.paths.unwrap() < 2 {
                    return Err(invalid("--paths must be at least 2"));
                }
                self.transport_defaults(h1, h2, &mut cfg)?;
            }
        }
        check_common(&cfg)?;
        Ok(cfg)
    }

    fn diffusion_defaults(&self, spec: &HurstSpec, cfg: &mut RunConfig) {
        let (t0, t1) = if spec.hurst() < 0.5 {
            (0.5, 1.5)
        } else {
            (0.25, 1.0)
        };
        cfg.t0 = Some(self.t0.unwrap_or(t0));
        cfg.t1 = Some(self.t1.unwrap_or(t1));
        cfg.n_t = Some(self.n_t.unwrap_or(256));
        cfg.n_x = Some(self.n_x.unwrap_or(401));
        let t1 = cfg.t1.unwrap().max(0.0);
        cfg.xmax = Some(self.xmax.unwrap_or(8.0 * spec.msd(t1).sqrt()));
    }

    fn transport_defaults(&self, h1: f64, h2: f64, cfg: &mut RunConfig) -> Result<(), CliError> {
        cfg.t0 = Some(self.t0.unwrap_or(1.0));
        cfg.t1 = Some(self.t1.unwrap_or(2.0));
        let (t0, t1) = (cfg.t0.unwrap(), cfg.t1.unwrap());
        if !(t0 > 0.0 && t1 > t0) {
            return Err(invalid(format!(
                "need 0 < t0 < t1, got t0 = {t0}, t1 = {t1}"
            )));
        }
        cfg.n_x = Some(self.n_x.unwrap_or(801));
        let gamma = h1 * h2;
        cfg.xmax = Some(self.xmax.unwrap_or(10.0 * (t1 / 2.0).powf(gamma).max(1.0)));
        if cfg.n_x.unwrap() < 3 || !(cfg.xmax.unwrap() > 0.0) {
            return Err(invalid("need --n-x >= 3 and --xmax > 0"));
        }
        let xg = fbmdiff::SpaceGrid::new(cfg.xmax.unwrap(), cfg.n_x.unwrap())?;
        let limit = fbmdiff::pdesolve::transport_step_limit(gamma, &xg, t0);
        cfg.n_t = Some(self.n_t.unwrap_or(((t1 - t0) / limit).ceil() as usize + 1));
        Ok(())
    }

    fn out_path(&self) -> PathBuf {
        if let Some(p) = &self.out {
            return p.clone();
        }
        let dir = self.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
        dir.join(format!(
            "{}.{}",
            self.command.name(),
            self.format.extension()
        ))
    }
}

fn check_common(cfg: &RunConfig) -> Result<(), CliError> {
    if let (Some(t0), Some(t1)) = (cfg.t0, cfg.t1) {
        if !(t0 >= 0.0 && t1 > t0 && t1.is_finite()) {
            return Err(invalid(format!(
                "need 0 <= t0 < t1, got t0 = {t0}, t1 = {t1}"
            )));
        }
    }
    if let Some(n) = cfg.n_t {
        if n == 0 {
            return Err(invalid("--n-t must be positive"));
        }
    }
    if let Some(n) = cfg.n_x {
        if n < 3 {
            return Err(invalid(format!("--n-x must be at least 3, got {n}")));
        }
    }
    if let Some(x) = cfg.xmax {
        if !(x > 0.0 && x.is_finite()) {
            return Err(invalid(format!("--xmax must be positive, got {x}")));
        }
    }
    if cfg.paths == Some(0) {
        return Err(invalid("--paths must be at least 1"));
    }
    Ok(())
}

/// `<out>.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}
