//! Command-line flags and their JSON config-file counterparts.
//!
//! Every parameter is optional on both sides; a flag wins over the config
//! file, which wins over the built-in default.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mathieu_lattice::spectrum::{DEFAULT_EIG_TOL, DEFAULT_TAIL_TOL};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::output::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "mathieu-lattice",
    version,
    about = "Quadratic-index waveguide lattices, Bragg diffraction and Mathieu functions"
)]
pub struct Cli {
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// JSON file with parameter values; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Characteristic-value chart E_m(q) and eigenmode dump.
    Spectrum(SpectrumArgs),
    /// Field propagation through the lattice.
    Propagate(PropagateArgs),
    /// Bragg diffraction and its equivalence with the lattice.
    Bragg(BraggArgs),
    /// Tables of the Floquet-Mathieu function of one mode.
    Mathieu(MathieuArgs),
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub q_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub q_max: Option<f64>,
    /// Number of q samples, end points included.
    #[arg(long)]
    pub q_steps: Option<usize>,
    #[arg(long)]
    pub m_max: Option<usize>,
    /// Truncation half-width.
    #[arg(long = "J")]
    #[serde(rename = "J")]
    pub half_width: Option<usize>,
    #[arg(long)]
    pub eig_tol: Option<f64>,
    #[arg(long)]
    pub tail_tol: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumParams {
    pub q_min: f64,
    pub q_max: f64,
    pub q_steps: usize,
    pub m_max: usize,
    #[serde(rename = "J")]
    pub half_width: usize,
    pub eig_tol: f64,
    pub tail_tol: f64,
}

impl SpectrumArgs {
    pub fn resolve(self, file: Self) -> SpectrumParams {
        SpectrumParams {
            q_min: self.q_min.or(file.q_min).unwrap_or(0.0),
            q_max: self.q_max.or(file.q_max).unwrap_or(10.0),
            q_steps: self.q_steps.or(file.q_steps).unwrap_or(101),
            m_max: self.m_max.or(file.m_max).unwrap_or(10),
            half_width: self.half_width.or(file.half_width).unwrap_or(64),
            eig_tol: self.eig_tol.or(file.eig_tol).unwrap_or(DEFAULT_EIG_TOL),
            tail_tol: self.tail_tol.or(file.tail_tol).unwrap_or(DEFAULT_TAIL_TOL),
        }
    }
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagateArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<f64>,
    #[arg(long = "J")]
    #[serde(rename = "J")]
    pub half_width: Option<usize>,
    /// Excited sites, comma separated; each `j`, `j:re` or `j:re:im`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "mode")]
    pub sites: Option<String>,
    /// Excite eigenmode m instead of sites.
    #[arg(long)]
    pub mode: Option<usize>,
    #[arg(long)]
    pub z_max: Option<f64>,
    /// Number of z samples, z = 0 included.
    #[arg(long)]
    pub z_steps: Option<usize>,
    /// Also run the direct RK4 integration and report the deviation.
    #[arg(long)]
    pub oracle: bool,
    /// RK4 step for --oracle.
    #[arg(long)]
    pub h: Option<f64>,
    /// Also write a 16-bit PGM intensity map.
    #[arg(long)]
    pub pgm: bool,
    #[arg(long)]
    pub eig_tol: Option<f64>,
    #[arg(long)]
    pub tail_tol: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropagateParams {
    pub q: f64,
    #[serde(rename = "J")]
    pub half_width: usize,
    pub sites: Option<String>,
    pub mode: Option<usize>,
    pub z_max: f64,
    pub z_steps: usize,
    pub oracle: bool,
    pub h: f64,
    pub pgm: bool,
    pub eig_tol: f64,
    pub tail_tol: f64,
}

impl PropagateArgs {
    pub fn resolve(self, file: Self) -> CliResult<PropagateParams> {
        if file.sites.is_some() && file.mode.is_some() {
            return Err(CliError::Validation("config file gives both sites and mode".into()));
        }
        let mode = self.mode.or(if self.sites.is_none() { file.mode } else { None });
        let sites = self.sites.or(if mode.is_none() { file.sites } else { None });
        let sites = if mode.is_none() { Some(sites.unwrap_or_else(|| "0".into())) } else { None };
        Ok(PropagateParams {
            q: self.q.or(file.q).unwrap_or(2.0),
            half_width: self.half_width.or(file.half_width).unwrap_or(64),
            sites,
            mode,
            z_max: self.z_max.or(file.z_max).unwrap_or(5.0),
            z_steps: self.z_steps.or(file.z_steps).unwrap_or(500),
            oracle: self.oracle || file.oracle,
            h: self.h.or(file.h).unwrap_or(1e-4),
            pgm: self.pgm || file.pgm,
            eig_tol: self.eig_tol.or(file.eig_tol).unwrap_or(DEFAULT_EIG_TOL),
            tail_tol: self.tail_tol.or(file.tail_tol).unwrap_or(DEFAULT_TAIL_TOL),
        })
    }
}

/// Parse `j`, `j:re` or `j:re:im` items separated by commas.
pub fn parse_sites(spec: &str) -> CliResult<Vec<(i64, Complex64)>> {
    let bad = |item: &str| CliError::Validation(format!("bad site `{item}`: expected j, j:re or j:re:im"));
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        if parts.len() > 3 {
            return Err(bad(item));
        }
        let j: i64 = parts[0].parse().map_err(|_| bad(item))?;
        let re: f64 = parts.get(1).map_or(Ok(1.0), |s| s.parse()).map_err(|_| bad(item))?;
        let im: f64 = parts.get(2).map_or(Ok(0.0), |s| s.parse()).map_err(|_| bad(item))?;
        out.push((j, Complex64::new(re, im)));
    }
    if out.is_empty() {
        return Err(CliError::Validation("site list is empty".into()));
    }
    Ok(out)
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BraggArgs {
    /// Ω, half the Bragg-Rabi frequency.
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    /// Recoil frequency ω_k.
    #[arg(long)]
    pub omega_k: Option<f64>,
    /// Doppler shift ω_D.
    #[arg(long = "omega-D", allow_hyphen_values = true)]
    #[serde(rename = "omega_D")]
    pub omega_d: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of t samples, t = 0 included.
    #[arg(long)]
    pub t_steps: Option<usize>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long = "J")]
    #[serde(rename = "J")]
    pub half_width: Option<usize>,
    /// Initially occupied momentum state.
    #[arg(long, allow_hyphen_values = true)]
    pub site: Option<i64>,
    /// Also tabulate the diagonal-free (Bessel) limit.
    #[arg(long)]
    pub raman_nath: bool,
    #[arg(long)]
    pub qz_max: Option<f64>,
    #[arg(long)]
    pub qz_steps: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BraggParams {
    pub omega: f64,
    pub omega_k: f64,
    #[serde(rename = "omega_D")]
    pub omega_d: f64,
    pub t_max: f64,
    pub t_steps: usize,
    pub h: f64,
    #[serde(rename = "J")]
    pub half_width: usize,
    pub site: i64,
    pub raman_nath: bool,
    pub qz_max: f64,
    pub qz_steps: usize,
    pub n_max: usize,
}

impl BraggArgs {
    pub fn resolve(self, file: Self) -> BraggParams {
        BraggParams {
            omega: self.omega.or(file.omega).unwrap_or(2.0),
            omega_k: self.omega_k.or(file.omega_k).unwrap_or(1.0),
            omega_d: self.omega_d.or(file.omega_d).unwrap_or(-1.0),
            t_max: self.t_max.or(file.t_max).unwrap_or(3.0),
            t_steps: self.t_steps.or(file.t_steps).unwrap_or(301),
            h: self.h.or(file.h).unwrap_or(1e-4),
            half_width: self.half_width.or(file.half_width).unwrap_or(32),
            site: self.site.or(file.site).unwrap_or(0),
            raman_nath: self.raman_nath || file.raman_nath,
            qz_max: self.qz_max.or(file.qz_max).unwrap_or(5.0),
            qz_steps: self.qz_steps.or(file.qz_steps).unwrap_or(101),
            n_max: self.n_max.or(file.n_max).unwrap_or(20),
        }
    }
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MathieuArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<f64>,
    /// Mode index in ascending energy order.
    #[arg(long)]
    pub m: Option<usize>,
    /// Grid points on [0, 2π).
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long = "J")]
    #[serde(rename = "J")]
    pub half_width: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MathieuParams {
    pub q: f64,
    pub m: usize,
    pub points: usize,
    #[serde(rename = "J")]
    pub half_width: usize,
}

impl MathieuArgs {
    pub fn resolve(self, file: Self) -> MathieuParams {
        MathieuParams {
            q: self.q.or(file.q).unwrap_or(1.0),
            m: self.m.or(file.m).unwrap_or(0),
            points: self.points.or(file.points).unwrap_or(1024),
            half_width: self.half_width.or(file.half_width).unwrap_or(32),
        }
    }
}

/// Parameters from the config file, or all-absent without one.
pub fn load_config<T: Default + for<'de> Deserialize<'de>>(path: Option<&Path>) -> CliResult<T> {
    let Some(path) = path else { return Ok(T::default()) };
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}
