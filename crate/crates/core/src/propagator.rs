//! Field propagation through the lattice.
//!
//! [`propagate`] uses the eigen-decomposition: the input is projected onto the
//! modes once, and each distance costs one phase rotation and one
//! reconstruction. [`integrate_direct`] integrates the coupled-mode equations
//! `i dc_j/dz = j² c_j + q (c_{j-1} + c_{j+1})` with classical RK4 and serves
//! as an independent reference.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::export::{csv_row, fmt_f64};
use crate::rk4::Rk4;
use crate::spectrum::{build_operator, index_of, site_of, LatticeConfig, SpectralBasis, TruncatedOperator};

/// Edge amplitude above which a run is flagged as reflecting off the truncation.
pub const EDGE_TOL: f64 = 1e-8;
/// Relative norm drift above which an integration carries a quality warning.
pub const NORM_DRIFT_WARN: f64 = 1e-6;
/// Largest accepted `h · ρ(H)` for the explicit integrators.
pub const MAX_STEP_STIFFNESS: f64 = 1.0;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Complex amplitudes `c_j`, `j = -J..=J`, at propagation distance `z`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldState {
    pub z: f64,
    pub amplitudes: Vec<Complex64>,
}

impl FieldState {
    pub fn new(z: f64, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() < 3 || amplitudes.len().is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "a lattice state needs 2J + 1 >= 3 amplitudes, got {}",
                amplitudes.len()
            )));
        }
        Ok(Self { z, amplitudes })
    }

    pub fn zeros(half_width: usize) -> Self {
        Self { z: 0.0, amplitudes: vec![Complex64::new(0.0, 0.0); 2 * half_width + 1] }
    }

    /// Unit excitation of site `j` at `z = 0`.
    pub fn single_site(half_width: usize, j: i64) -> Result<Self> {
        Self::from_sites(half_width, &[(j, Complex64::new(1.0, 0.0))])
    }

    /// Superposition of site excitations, normalized to unit norm.
    pub fn from_sites(half_width: usize, sites: &[(i64, Complex64)]) -> Result<Self> {
        let mut state = Self::zeros(half_width);
        for &(j, w) in sites {
            let i = index_of(half_width, j)
                .ok_or_else(|| Error::Domain(format!("site {j} outside [-{half_width}, {half_width}]")))?;
            state.amplitudes[i] += w;
        }
        state.normalized()
    }

    /// Eigenmode `m` of `basis` as an input field.
    pub fn from_mode(basis: &SpectralBasis, m: usize) -> Result<Self> {
        let mode = basis.mode(m)?;
        Self::new(0.0, mode.coefficients.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn half_width(&self) -> usize {
        (self.amplitudes.len() - 1) / 2
    }

    pub fn amplitude(&self, j: i64) -> Option<Complex64> {
        index_of(self.half_width(), j).map(|i| self.amplitudes[i])
    }

    pub fn intensities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Domain("input field has zero norm".into()));
        }
        self.amplitudes.iter_mut().for_each(|c| *c /= norm);
        Ok(self)
    }

    /// Largest `|c_{±J}|`.
    pub fn edge_amplitude(&self) -> f64 {
        let a = &self.amplitudes;
        a[0].norm().max(a[a.len() - 1].norm())
    }
}

/// Norm, second moment `Σ j²|c_j|²` and participation ratio `(Σ|c_j|²)² / Σ|c_j|⁴`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observables {
    pub norm: f64,
    pub second_moment: f64,
    pub participation_ratio: f64,
}

pub fn observables(state: &FieldState) -> Result<Observables> {
    let half = state.half_width();
    let mut norm = 0.0;
    let mut second = 0.0;
    let mut fourth = 0.0;
    for (i, c) in state.amplitudes.iter().enumerate() {
        let p = c.norm_sqr();
        let j = site_of(half, i) as f64;
        norm += p;
        second += j * j * p;
        fourth += p * p;
    }
    if fourth.is_nan() || fourth <= 0.0 {
        return Err(Error::Domain("participation ratio of a zero-norm state".into()));
    }
    Ok(Observables { norm, second_moment: second, participation_ratio: norm * norm / fourth })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// Relative norm change exceeded [`NORM_DRIFT_WARN`].
    NormDrift { drift: f64 },
    /// Some `|c_{±J}|` exceeded [`EDGE_TOL`].
    EdgeContamination { max_edge: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropagationResult {
    pub z_grid: Vec<f64>,
    pub states: Vec<FieldState>,
    pub observables: Vec<Observables>,
    /// Largest relative deviation of the norm from its input value.
    pub norm_drift: f64,
    pub max_edge_amplitude: f64,
    pub warnings: Vec<Warning>,
}

impl PropagationResult {
    fn assemble(states: Vec<FieldState>, input_norm: f64) -> Result<Self> {
        let observables = states.iter().map(observables).collect::<Result<Vec<_>>>()?;
        let norm_drift = observables.iter().map(|o| ((o.norm - input_norm) / input_norm).abs()).fold(0.0, f64::max);
        let max_edge_amplitude = states.iter().map(FieldState::edge_amplitude).fold(0.0, f64::max);
        let mut warnings = Vec::new();
        if norm_drift > NORM_DRIFT_WARN {
            warnings.push(Warning::NormDrift { drift: norm_drift });
        }
        if max_edge_amplitude > EDGE_TOL {
            warnings.push(Warning::EdgeContamination { max_edge: max_edge_amplitude });
        }
        Ok(Self {
            z_grid: states.iter().map(|s| s.z).collect(),
            states,
            observables,
            norm_drift,
            max_edge_amplitude,
            warnings,
        })
    }

    pub fn edge_contaminated(&self) -> bool {
        self.max_edge_amplitude > EDGE_TOL
    }

    /// `|c_j(z)|²`, one row per grid point.
    pub fn intensity_map(&self) -> Vec<Vec<f64>> {
        self.states.iter().map(FieldState::intensities).collect()
    }

    /// CSV with header `z,j=-J,...,j=J` and one row per grid point.
    pub fn intensity_csv(&self) -> String {
        let half = self.states.first().map_or(0, FieldState::half_width) as i64;
        let mut out = String::from("z");
        for j in -half..=half {
            out.push_str(&format!(",j={j}"));
        }
        out.push('\n');
        for state in &self.states {
            out.push_str(&fmt_f64(state.z));
            out.push(',');
            out.push_str(&csv_row(state.intensities()));
            out.push('\n');
        }
        out
    }

    /// Largest `|c_n - c'_n|` over all grid points and sites.
    pub fn max_amplitude_difference(&self, other: &PropagationResult) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .flat_map(|(a, b)| a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }
}

fn check_grid(grid: &[f64], name: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain(format!("{name} grid is empty")));
    }
    if grid.iter().any(|z| !z.is_finite()) {
        return Err(Error::Domain(format!("{name} grid contains non-finite values")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(format!("{name} grid must be strictly ascending")));
    }
    Ok(())
}

fn check_site(basis: &SpectralBasis, j: i64) -> Result<usize> {
    let half = basis.half_width();
    index_of(half, j).ok_or_else(|| Error::Domain(format!("site {j} outside [-{half}, {half}]")))
}

/// Propagator matrix element `c_n(z; j) = Σ_m A_n^(m) A_j^(m) e^{-i z E_m}`.
pub fn kernel_element(basis: &SpectralBasis, n: i64, j: i64, z: f64) -> Result<Complex64> {
    let ni = check_site(basis, n)?;
    let ji = check_site(basis, j)?;
    Ok(basis
        .modes()
        .iter()
        .map(|m| Complex64::from_polar(m.coefficients[ni] * m.coefficients[ji], -z * m.energy))
        .sum())
}

/// Evolve `input` (given at `input.z`) to every distance in `z_grid`.
/// Distances may be negative.
pub fn propagate(basis: &SpectralBasis, input: &FieldState, z_grid: &[f64]) -> Result<PropagationResult> {
    check_grid(z_grid, "z")?;
    if input.amplitudes.len() != basis.dim() {
        return Err(Error::Domain(format!(
            "input has {} sites but the basis has dimension {}",
            input.amplitudes.len(),
            basis.dim()
        )));
    }
    let input_norm = input.norm_sqr();
    if input_norm.is_nan() || input_norm <= 0.0 {
        return Err(Error::Domain("input field has zero norm".into()));
    }

    let modes = basis.modes();
    let projections: Vec<Complex64> =
        modes.iter().map(|m| m.coefficients.iter().zip(&input.amplitudes).map(|(a, c)| c * *a).sum()).collect();

    let dim = basis.dim();
    let states: Vec<FieldState> = z_grid
        .par_iter()
        .map(|&z| {
            let dz = z - input.z;
            let mut amps = vec![Complex64::new(0.0, 0.0); dim];
            for (mode, p) in modes.iter().zip(&projections) {
                let w = p * Complex64::from_polar(1.0, -dz * mode.energy);
                for (c, a) in amps.iter_mut().zip(&mode.coefficients) {
                    *c += w * *a;
                }
            }
            FieldState { z, amplitudes: amps }
        })
        .collect();
    PropagationResult::assemble(states, input_norm)
}

/// RK4 reference solution of the coupled-mode equations on the lattice of `cfg`.
///
/// Between consecutive grid points the integrator takes equal steps no
/// longer than `h`, so every grid distance is hit exactly.
pub fn integrate_direct(cfg: &LatticeConfig, input: &FieldState, z_grid: &[f64], h: f64) -> Result<PropagationResult> {
    let op = build_operator(cfg)?;
    integrate_operator(&op, input, z_grid, h)
}

/// [`integrate_direct`] for an arbitrary truncated operator.
pub fn integrate_operator(
    op: &TruncatedOperator,
    input: &FieldState,
    z_grid: &[f64],
    h: f64,
) -> Result<PropagationResult> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Config(format!("step h must be positive and finite, got {h}")));
    }
    let stiffness = h * op.norm_bound();
    if stiffness > MAX_STEP_STIFFNESS {
        return Err(Error::Config(format!(
            "step h = {h} too large: h (J² + 2|q|) = {stiffness} exceeds {MAX_STEP_STIFFNESS}"
        )));
    }
    check_grid(z_grid, "z")?;
    if z_grid[0] < input.z {
        return Err(Error::Domain(format!(
            "direct integration runs forward from z = {}, grid starts at {}",
            input.z, z_grid[0]
        )));
    }
    if input.amplitudes.len() != op.dim() {
        return Err(Error::Domain(format!(
            "input has {} sites but the lattice has {}",
            input.amplitudes.len(),
            op.dim()
        )));
    }
    let input_norm = input.norm_sqr();
    if input_norm.is_nan() || input_norm <= 0.0 {
        return Err(Error::Domain("input field has zero norm".into()));
    }

    let mut y = input.amplitudes.clone();
    let mut rk = Rk4::new(y.len());
    let mut rhs = |_z: f64, c: &[Complex64], out: &mut [Complex64]| {
        op.apply(c, out);
        out.iter_mut().for_each(|v| *v *= -I);
    };

    let mut states = Vec::with_capacity(z_grid.len());
    let mut z = input.z;
    for &target in z_grid {
        rk.advance(&mut rhs, z, target, h, &mut y);
        z = target;
        states.push(FieldState { z, amplitudes: y.clone() });
    }
    PropagationResult::assemble(states, input_norm)
}
