//! Single Bragg diffraction on the momentum ladder and its map onto the lattice.
//!
//! The ground-state amplitudes obey
//!
//! ```text
//! i dg_j/dt = -Ω [ g_{j-1} e^{i(ω_D + 2ω_k (j-1)) t} + g_{j+1} e^{-i(ω_D + 2ω_k j) t} ]
//! ```
//!
//! With `δ = -ω_k`, `η = ω_k - ω_D` and the integer shift `l = η / 2δ`, the
//! amplitudes `c_k = e^{iδ k² t} g_{k-l}` satisfy `i dc/dz = [N² + q(V + V†)] c`
//! with `q = Ω/δ` and `z = -δ t = ω_k t`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bessel::bessel_j_orders;
use crate::error::{Error, Result};
use crate::export::{csv_row, fmt_f64};
use crate::propagator::{propagate, FieldState, PropagationResult, Warning, MAX_STEP_STIFFNESS, NORM_DRIFT_WARN};
use crate::rk4::Rk4;
use crate::spectrum::{index_of, linspace, site_of, solve, solve_spectrum, LatticeConfig, TruncatedOperator};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest distance of `l` from an integer that still counts as integral.
const SHIFT_INTEGRALITY_TOL: f64 = 1e-9;

/// Bragg parameters: `omega` is Ω (half the Bragg–Rabi frequency), `omega_k`
/// the recoil frequency and `omega_d` the Doppler shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BraggConfig {
    pub omega: f64,
    pub omega_k: f64,
    #[serde(rename = "omega_D")]
    pub omega_d: f64,
}

impl BraggConfig {
    pub fn new(omega: f64, omega_k: f64, omega_d: f64) -> Result<Self> {
        let cfg = Self { omega, omega_k, omega_d };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.omega.is_finite() || !self.omega_d.is_finite() {
            return Err(Error::Config("Bragg frequencies must be finite".into()));
        }
        if !(self.omega_k.is_finite() && self.omega_k > 0.0) {
            return Err(Error::Config(format!("recoil frequency omega_k must be positive, got {}", self.omega_k)));
        }
        Ok(())
    }

    pub fn delta(&self) -> f64 {
        -self.omega_k
    }

    pub fn eta(&self) -> f64 {
        self.omega_k - self.omega_d
    }

    /// `l = η / (2δ)`, not necessarily integral.
    pub fn shift(&self) -> f64 {
        self.eta() / (2.0 * self.delta())
    }

    pub fn integer_shift(&self) -> Result<i64> {
        let l = self.shift();
        let rounded = l.round();
        if (l - rounded).abs() > SHIFT_INTEGRALITY_TOL {
            return Err(Error::Unsupported(format!(
                "l = η/(2δ) = ({})/(2·{}) = {l} is not an integer; the lattice shift V^l needs integral l",
                self.eta(),
                self.delta()
            )));
        }
        Ok(rounded as i64)
    }

    /// Lattice coupling `q = Ω/δ`.
    pub fn lattice_coupling(&self) -> f64 {
        self.omega / self.delta()
    }

    /// Propagation distance reached at time `t`: `z = -δ t`.
    pub fn lattice_distance(&self, t: f64) -> f64 {
        -self.delta() * t
    }
}

/// Momentum-ladder amplitudes `g_j(t)`, `j = -J..=J`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BraggState {
    pub t: f64,
    pub amplitudes: Vec<Complex64>,
}

impl BraggState {
    pub fn single_site(half_width: usize, j: i64) -> Result<Self> {
        let field = FieldState::single_site(half_width, j)?;
        Ok(Self { t: 0.0, amplitudes: field.amplitudes })
    }

    pub fn half_width(&self) -> usize {
        (self.amplitudes.len() - 1) / 2
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|g| g.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|g| g.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BraggTrajectory {
    pub states: Vec<BraggState>,
    pub norm_drift: f64,
    pub warnings: Vec<Warning>,
}

impl BraggTrajectory {
    /// CSV with header `t,j=-J,...,j=J` holding `|g_j(t)|²`.
    pub fn population_csv(&self) -> String {
        let half = self.states.first().map_or(0, BraggState::half_width) as i64;
        let mut out = String::from("t");
        for j in -half..=half {
            out.push_str(&format!(",j={j}"));
        }
        out.push('\n');
        for s in &self.states {
            out.push_str(&fmt_f64(s.t));
            out.push(',');
            out.push_str(&csv_row(s.populations()));
            out.push('\n');
        }
        out
    }
}

/// RK4 solution of the time-dependent Bragg equations, sampled on `t_grid`.
pub fn integrate_bragg(cfg: &BraggConfig, input: &BraggState, t_grid: &[f64], h: f64) -> Result<BraggTrajectory> {
    cfg.validate()?;
    let n = input.amplitudes.len();
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::Domain(format!("a ladder state needs 2J + 1 >= 3 amplitudes, got {n}")));
    }
    let half = input.half_width();
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Config(format!("step h must be positive and finite, got {h}")));
    }
    let rate = 2.0 * cfg.omega.abs() + 2.0 * cfg.omega_k * half as f64 + cfg.omega_d.abs();
    if h * rate > MAX_STEP_STIFFNESS {
        return Err(Error::Config(format!(
            "step h = {h} too large: h (2|Ω| + 2ω_k J + |ω_D|) = {} exceeds {MAX_STEP_STIFFNESS}",
            h * rate
        )));
    }
    if t_grid.is_empty() {
        return Err(Error::Domain("t grid is empty".into()));
    }
    if t_grid.iter().any(|t| !t.is_finite()) || t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid[0] < input.t {
        return Err(Error::Domain(
            "t grid must be finite, strictly ascending and start at or after the input time".into(),
        ));
    }
    let norm0 = input.norm_sqr();
    if norm0.is_nan() || norm0 <= 0.0 {
        return Err(Error::Domain("input state has zero norm".into()));
    }

    let omega = cfg.omega;
    // Bond b couples sites j = b - J and j + 1 with phase (ω_D + 2ω_k j) t.
    let bond_rates: Vec<f64> = (0..n - 1).map(|b| cfg.omega_d + 2.0 * cfg.omega_k * site_of(half, b) as f64).collect();
    let mut rhs = |t: f64, g: &[Complex64], out: &mut [Complex64]| {
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (b, rate) in bond_rates.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, rate * t);
            out[b] += g[b + 1] * phase.conj();
            out[b + 1] += g[b] * phase;
        }
        let k = I * omega;
        out.iter_mut().for_each(|v| *v *= k);
    };

    let mut rk = Rk4::new(n);
    let mut y = input.amplitudes.clone();
    let mut t = input.t;
    let mut states = Vec::with_capacity(t_grid.len());
    let mut drift: f64 = 0.0;
    for &target in t_grid {
        rk.advance(&mut rhs, t, target, h, &mut y);
        t = target;
        let state = BraggState { t, amplitudes: y.clone() };
        drift = drift.max(((state.norm_sqr() - norm0) / norm0).abs());
        states.push(state);
    }
    let warnings = if drift > NORM_DRIFT_WARN { vec![Warning::NormDrift { drift }] } else { Vec::new() };
    Ok(BraggTrajectory { states, norm_drift: drift, warnings })
}

/// Lattice-frame field `c_k(z) = e^{iδ k² t} g_{k-l}(t)` at `z = -δ t`.
/// Sites shifted outside `[-J, J]` are dropped and vacated sites are zero.
pub fn frame_map(cfg: &BraggConfig, state: &BraggState) -> Result<FieldState> {
    cfg.validate()?;
    let l = cfg.integer_shift()?;
    let half = state.half_width();
    let delta = cfg.delta();
    let t = state.t;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); state.amplitudes.len()];
    for (i, c) in amplitudes.iter_mut().enumerate() {
        let k = site_of(half, i);
        if let Some(src) = index_of(half, k - l) {
            let kf = k as f64;
            *c = Complex64::from_polar(1.0, delta * kf * kf * t) * state.amplitudes[src];
        }
    }
    FieldState::new(cfg.lattice_distance(t), amplitudes)
}

/// Summary written by the `bragg` command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub omega: f64,
    pub omega_k: f64,
    #[serde(rename = "omega_D")]
    pub omega_d: f64,
    pub delta: f64,
    pub eta: f64,
    pub l: i64,
    pub q: f64,
    pub t_max: f64,
    pub h: f64,
    pub max_population_discrepancy: f64,
    pub norm_drift_bragg: f64,
    pub norm_drift_lattice: f64,
}

/// Everything produced by [`verify_equivalence`].
#[derive(Debug, Clone)]
pub struct EquivalenceRun {
    pub report: EquivalenceReport,
    pub bragg: BraggTrajectory,
    /// Bragg states carried into the lattice frame.
    pub mapped: Vec<FieldState>,
    /// Lattice evolution of the mapped initial state.
    pub lattice: PropagationResult,
}

impl EquivalenceRun {
    /// Largest `|c_k - c'_k|` between mapped Bragg and lattice amplitudes.
    pub fn max_amplitude_discrepancy(&self) -> f64 {
        self.mapped
            .iter()
            .zip(&self.lattice.states)
            .flat_map(|(a, b)| a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }
}

/// Integrate the Bragg equations to `t_max` on `samples` equally spaced times,
/// map every state to the lattice frame, evolve the mapped initial state
/// with the spectral propagator at `q = Ω/δ`, and compare populations.
pub fn verify_equivalence(
    cfg: &BraggConfig,
    input: &BraggState,
    t_max: f64,
    h: f64,
    samples: usize,
) -> Result<EquivalenceRun> {
    cfg.validate()?;
    let l = cfg.integer_shift()?;
    if input.t != 0.0 {
        return Err(Error::Domain(format!("equivalence runs start at t = 0, input is at t = {}", input.t)));
    }
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::Config(format!("t_max must be positive and finite, got {t_max}")));
    }
    if samples < 2 {
        return Err(Error::Config("at least two time samples are needed".into()));
    }

    let t_grid = linspace(0.0, t_max, samples);
    let bragg = integrate_bragg(cfg, input, &t_grid, h)?;
    let mapped = bragg.states.iter().map(|s| frame_map(cfg, s)).collect::<Result<Vec<_>>>()?;

    let q = cfg.lattice_coupling();
    let lattice_cfg = LatticeConfig::new(q, input.half_width())?;
    let basis = solve(&lattice_cfg)?;
    let z_grid: Vec<f64> = t_grid.iter().map(|&t| cfg.lattice_distance(t)).collect();
    let lattice = propagate(&basis, &mapped[0], &z_grid)?;

    let max_population_discrepancy = mapped
        .iter()
        .zip(&lattice.states)
        .flat_map(|(a, b)| a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| (x.norm_sqr() - y.norm_sqr()).abs()))
        .fold(0.0, f64::max);

    let report = EquivalenceReport {
        omega: cfg.omega,
        omega_k: cfg.omega_k,
        omega_d: cfg.omega_d,
        delta: cfg.delta(),
        eta: cfg.eta(),
        l,
        q,
        t_max,
        h,
        max_population_discrepancy,
        norm_drift_bragg: bragg.norm_drift,
        norm_drift_lattice: lattice.norm_drift,
    };
    Ok(EquivalenceRun { report, bragg, mapped, lattice })
}

/// Site populations in the kinetic-free limit, closed form and lattice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RamanNathProfile {
    /// Coupling-distance products `qz` (equivalently `Ωt`).
    pub products: Vec<f64>,
    pub n_max: usize,
    /// `bessel[k][n + n_max] = J_n(2 products[k])²`.
    pub bessel: Vec<Vec<f64>>,
    /// Site-0 propagation with the diagonal removed, same layout.
    pub lattice: Vec<Vec<f64>>,
    pub max_deviation: f64,
}

impl RamanNathProfile {
    /// CSV with header `qz,n=-N,...,n=N` holding the Bessel populations.
    pub fn to_csv(&self) -> String {
        let n = self.n_max as i64;
        let mut out = String::from("qz");
        for k in -n..=n {
            out.push_str(&format!(",n={k}"));
        }
        out.push('\n');
        for (s, row) in self.products.iter().zip(&self.bessel) {
            out.push_str(&fmt_f64(*s));
            out.push(',');
            out.push_str(&csv_row(row.iter().copied()));
            out.push('\n');
        }
        out
    }
}

/// `|J_n(2s)|²` for `|n| <= n_max` at each product `s`, checked against the
/// lattice propagator with the diagonal removed on a lattice of half-width `half_width`.
pub fn raman_nath_profile(products: &[f64], n_max: usize, half_width: usize) -> Result<RamanNathProfile> {
    if n_max > half_width {
        return Err(Error::Config(format!("n_max = {n_max} exceeds the lattice half-width {half_width}")));
    }
    if products.is_empty() || products.iter().any(|s| !s.is_finite()) || products.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("product grid must be non-empty, finite and strictly ascending".into()));
    }

    let bessel: Vec<Vec<f64>> = products
        .iter()
        .map(|&s| {
            let j = bessel_j_orders(n_max, 2.0 * s);
            (-(n_max as i64)..=n_max as i64).map(|n| j[n.unsigned_abs() as usize].powi(2)).collect()
        })
        .collect();

    let cfg = LatticeConfig::new(1.0, half_width)?;
    let op = TruncatedOperator::coupling_only(&cfg)?;
    let basis = solve_spectrum(&op, &cfg)?;
    let input = FieldState::single_site(half_width, 0)?;
    let run = propagate(&basis, &input, products)?;
    let lattice: Vec<Vec<f64>> = run
        .states
        .iter()
        .map(|s| (-(n_max as i64)..=n_max as i64).map(|n| s.amplitude(n).map_or(0.0, |c| c.norm_sqr())).collect())
        .collect();

    let max_deviation =
        bessel.iter().flatten().zip(lattice.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(RamanNathProfile { products: products.to_vec(), n_max, bessel, lattice, max_deviation })
}
