//! Truncated lattice operator `N² + q(V + V†)` and its eigen-decomposition.
//!
//! Sites are labelled `j = -J..=J` and stored at index `j + J`. The operator
//! commutes with the reflection `j -> -j`, so for `q != 0` it is diagonalized
//! separately on the even and odd subspaces. Every eigenvector therefore has
//! exact parity, even where the splitting between an even and an odd level
//! is far below machine precision.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::export::fmt_f64;
use crate::tridiag::symmetric_tridiagonal_eigen;

pub const DEFAULT_EIG_TOL: f64 = 1e-12;
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

/// One simulation instance: coupling `q`, truncation half-width `J`, tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    pub q: f64,
    pub half_width: usize,
    pub eig_tol: f64,
    pub tail_tol: f64,
}

impl LatticeConfig {
    pub fn new(q: f64, half_width: usize) -> Result<Self> {
        Self::with_tolerances(q, half_width, DEFAULT_EIG_TOL, DEFAULT_TAIL_TOL)
    }

    pub fn with_tolerances(q: f64, half_width: usize, eig_tol: f64, tail_tol: f64) -> Result<Self> {
        let cfg = Self { q, half_width, eig_tol, tail_tol };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.half_width < 1 {
            return Err(Error::Config("truncation half-width J must be at least 1".into()));
        }
        if !self.q.is_finite() {
            return Err(Error::Config(format!("coupling q must be finite, got {}", self.q)));
        }
        if !(self.eig_tol > 0.0 && self.tail_tol > 0.0) {
            return Err(Error::Config(format!(
                "tolerances must be positive (eig_tol = {}, tail_tol = {})",
                self.eig_tol, self.tail_tol
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        2 * self.half_width + 1
    }
}

/// Site label of storage index `index` on a lattice of half-width `half_width`.
pub fn site_of(half_width: usize, index: usize) -> i64 {
    index as i64 - half_width as i64
}

/// Storage index of site `j`, if it lies inside `[-J, J]`.
pub fn index_of(half_width: usize, j: i64) -> Option<usize> {
    let i = j + half_width as i64;
    (0..=2 * half_width as i64).contains(&i).then_some(i as usize)
}

/// Real symmetric tridiagonal matrix with a reflection-symmetric diagonal
/// and constant coupling on both off-diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    half_width: usize,
    diag: Vec<f64>,
    offdiag: f64,
}

impl TruncatedOperator {
    /// The same lattice with the `N²` term removed, i.e. `q(V + V†)` alone.
    pub fn coupling_only(cfg: &LatticeConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { half_width: cfg.half_width, diag: vec![0.0; cfg.dim()], offdiag: cfg.q })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> f64 {
        self.offdiag
    }

    /// Diagonal entry for site `j`.
    pub fn diag_at(&self, j: i64) -> Option<f64> {
        index_of(self.half_width, j).map(|i| self.diag[i])
    }

    /// Dense entry `(row, col)` by storage index.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        if row == col {
            self.diag[row]
        } else if row.abs_diff(col) == 1 {
            self.offdiag
        } else {
            0.0
        }
    }

    /// `out = H x`.
    pub fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim();
        debug_assert_eq!(x.len(), n);
        debug_assert_eq!(out.len(), n);
        let q = self.offdiag;
        for i in 0..n {
            let mut acc = x[i] * self.diag[i];
            if i > 0 {
                acc += x[i - 1] * q;
            }
            if i + 1 < n {
                acc += x[i + 1] * q;
            }
            out[i] = acc;
        }
    }

    /// Spectral radius bound `max|diag| + 2|q|`.
    pub fn norm_bound(&self) -> f64 {
        self.diag.iter().fold(0.0_f64, |m, d| m.max(d.abs())) + 2.0 * self.offdiag.abs()
    }
}

/// Build the matrix with diagonal `j²` for `j = -J..=J` and coupling `q`.
pub fn build_operator(cfg: &LatticeConfig) -> Result<TruncatedOperator> {
    cfg.validate()?;
    let half = cfg.half_width;
    let diag = (0..cfg.dim())
        .map(|i| {
            let j = site_of(half, i);
            (j * j) as f64
        })
        .collect();
    Ok(TruncatedOperator { half_width: half, diag, offdiag: cfg.q })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    /// `A_j = A_{-j}`
    Even,
    /// `A_j = -A_{-j}`
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MathieuKind {
    Ce,
    Se,
}

/// Classical angular Mathieu function attached to a lattice mode: `ce_order`
/// for even modes (order `2r`) and `se_order` for odd modes (order `2r + 2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MathieuLabel {
    pub kind: MathieuKind,
    pub order: usize,
}

impl MathieuLabel {
    /// The rank `r` within its parity class.
    pub fn rank(&self) -> usize {
        match self.kind {
            MathieuKind::Ce => self.order / 2,
            MathieuKind::Se => self.order / 2 - 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mode {
    pub energy: f64,
    /// `A_j` for `j = -J..=J`, unit 2-norm.
    pub coefficients: Vec<f64>,
    pub parity: Option<Parity>,
    /// Largest edge coefficient exceeds `tail_tol`.
    pub contaminated: bool,
    pub label: Option<MathieuLabel>,
}

impl Mode {
    pub fn edge_magnitude(&self) -> f64 {
        let first = self.coefficients.first().map_or(0.0, |a| a.abs());
        let last = self.coefficients.last().map_or(0.0, |a| a.abs());
        first.max(last)
    }
}

/// Full eigen-decomposition in ascending order of energy.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralBasis {
    q: f64,
    half_width: usize,
    eig_tol: f64,
    tail_tol: f64,
    diag: Vec<f64>,
    modes: Vec<Mode>,
}

impl SpectralBasis {
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    pub fn eig_tol(&self) -> f64 {
        self.eig_tol
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    /// Diagonal of the operator this basis diagonalizes.
    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn mode(&self, m: usize) -> Result<&Mode> {
        self.modes.get(m).ok_or_else(|| Error::Domain(format!("mode index {m} outside 0..{}", self.modes.len())))
    }

    pub fn energies(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.energy).collect()
    }

    /// Coefficient `A_j^(m)`.
    pub fn coefficient(&self, m: usize, j: i64) -> Result<f64> {
        let i = index_of(self.half_width, j)
            .ok_or_else(|| Error::Domain(format!("site {j} outside [-{0}, {0}]", self.half_width)))?;
        Ok(self.mode(m)?.coefficients[i])
    }

    /// Max over sites of `|(d_j - E_m) A_j + q (A_{j-1} + A_{j+1})|`, with
    /// coefficients beyond the truncation taken as zero.
    pub fn recurrence_residual(&self, m: usize) -> Result<f64> {
        let mode = self.mode(m)?;
        Ok(recurrence_residuals(&self.diag, self.q, mode.energy, &mode.coefficients).into_iter().fold(0.0, f64::max))
    }

    /// `max_{m,n} |<A^(m), A^(n)> - δ_mn|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let modes = &self.modes;
        (0..modes.len())
            .into_par_iter()
            .map(|m| {
                (m..modes.len())
                    .map(|n| {
                        let dot: f64 =
                            modes[m].coefficients.iter().zip(&modes[n].coefficients).map(|(a, b)| a * b).sum();
                        let target = if m == n { 1.0 } else { 0.0 };
                        (dot - target).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// `max_j |A_j ∓ A_{-j}|` with the sign given by the parity label; `None`
    /// when the mode carries no label.
    pub fn parity_defect(&self, m: usize) -> Result<Option<f64>> {
        let mode = self.mode(m)?;
        let sign = match mode.parity {
            Some(Parity::Even) => 1.0,
            Some(Parity::Odd) => -1.0,
            None => return Ok(None),
        };
        let a = &mode.coefficients;
        let n = a.len();
        Ok(Some((0..n).map(|i| (a[i] - sign * a[n - 1 - i]).abs()).fold(0.0, f64::max)))
    }
}

/// Per-site residuals of the three-term recurrence, one per site of the
/// truncated lattice.
pub fn recurrence_residuals(diag: &[f64], q: f64, energy: f64, a: &[f64]) -> Vec<f64> {
    let n = a.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { a[i - 1] } else { 0.0 };
            let right = if i + 1 < n { a[i + 1] } else { 0.0 };
            ((diag[i] - energy) * a[i] + q * (left + right)).abs()
        })
        .collect()
}

/// Flip `v` so that its entry of largest magnitude is positive. Ties go to
/// the smallest `|j|`, then to positive `j`.
fn fix_sign(half_width: usize, v: &mut [f64]) {
    let mut best = half_width;
    let mut best_mag = v[best].abs();
    for k in 1..=half_width {
        for i in [half_width + k, half_width - k] {
            if v[i].abs() > best_mag {
                best = i;
                best_mag = v[i].abs();
            }
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn check_diag_symmetric(op: &TruncatedOperator) -> Result<()> {
    let d = &op.diag;
    let n = d.len();
    if (0..n).any(|i| d[i] != d[n - 1 - i]) {
        return Err(Error::Unsupported("operator diagonal is not reflection symmetric".into()));
    }
    Ok(())
}

/// Eigen-decomposition of `op` with ascending order, unit norm, sign
/// convention, parity labels, contamination flags and Mathieu labels.
pub fn solve_spectrum(op: &TruncatedOperator, cfg: &LatticeConfig) -> Result<SpectralBasis> {
    cfg.validate()?;
    if op.half_width != cfg.half_width || op.offdiag != cfg.q {
        return Err(Error::Config(format!(
            "operator (J = {}, q = {}) was not built from this configuration (J = {}, q = {})",
            op.half_width, op.offdiag, cfg.half_width, cfg.q
        )));
    }
    check_diag_symmetric(op)?;

    let half = cfg.half_width;
    let n = op.dim();
    let q = cfg.q;

    let mut raw: Vec<(f64, Vec<f64>, Option<Parity>)> = Vec::with_capacity(n);
    if q == 0.0 {
        // Degenerate (±j) pairs: keep coordinate vectors, -j before +j.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            op.diag[a].total_cmp(&op.diag[b]).then(site_of(half, a).abs().cmp(&site_of(half, b).abs())).then(a.cmp(&b))
        });
        for i in order {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            let parity = (i == half).then_some(Parity::Even);
            raw.push((op.diag[i], v, parity));
        }
    } else {
        // Even subspace: e_0 and (e_k + e_-k)/√2 for k = 1..=J.
        let even_diag: Vec<f64> = (0..=half).map(|k| op.diag[half + k]).collect();
        let even_off: Vec<f64> = (0..half).map(|k| if k == 0 { SQRT_2 * q } else { q }).collect();
        let even = symmetric_tridiagonal_eigen(&even_diag, &even_off)?;
        for (value, u) in even.values.into_iter().zip(even.vectors) {
            let mut v = vec![0.0; n];
            v[half] = u[0];
            for k in 1..=half {
                let a = u[k] / SQRT_2;
                v[half + k] = a;
                v[half - k] = a;
            }
            raw.push((value, v, Some(Parity::Even)));
        }

        // Odd subspace: (e_k - e_-k)/√2 for k = 1..=J.
        let odd_diag: Vec<f64> = (1..=half).map(|k| op.diag[half + k]).collect();
        let odd_off = vec![q; half - 1];
        let odd = symmetric_tridiagonal_eigen(&odd_diag, &odd_off).map_err(|e| match e {
            Error::Numeric { index, iterations } => Error::Numeric { index: index + half + 1, iterations },
            other => other,
        })?;
        for (value, u) in odd.values.into_iter().zip(odd.vectors) {
            let mut v = vec![0.0; n];
            for k in 1..=half {
                let a = u[k - 1] / SQRT_2;
                v[half + k] = a;
                v[half - k] = -a;
            }
            raw.push((value, v, Some(Parity::Odd)));
        }

        // Stable sort keeps even before odd on exact ties.
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    }

    let mut even_rank = 0;
    let mut odd_rank = 0;
    let modes = raw
        .into_iter()
        .map(|(energy, mut coefficients, parity)| {
            fix_sign(half, &mut coefficients);
            let edge = coefficients[0].abs().max(coefficients[n - 1].abs());
            let contaminated = edge > cfg.tail_tol;
            let label = match parity {
                Some(Parity::Even) => {
                    even_rank += 1;
                    Some(MathieuLabel { kind: MathieuKind::Ce, order: 2 * (even_rank - 1) })
                }
                Some(Parity::Odd) => {
                    odd_rank += 1;
                    Some(MathieuLabel { kind: MathieuKind::Se, order: 2 * odd_rank })
                }
                None => None,
            }
            .filter(|_| !contaminated);
            Mode { energy, coefficients, parity, contaminated, label }
        })
        .collect();

    Ok(SpectralBasis {
        q,
        half_width: half,
        eig_tol: cfg.eig_tol,
        tail_tol: cfg.tail_tol,
        diag: op.diag.clone(),
        modes,
    })
}

/// Convenience: build the operator for `cfg` and solve it.
pub fn solve(cfg: &LatticeConfig) -> Result<SpectralBasis> {
    solve_spectrum(&build_operator(cfg)?, cfg)
}

/// A lattice mode identified with a classical Mathieu characteristic value
/// at parameter `4q`: `value = 4 E_m(q)` is `a_order(4q)` for `ce` and
/// `b_order(4q)` for `se`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MathieuCharacteristic {
    pub m: usize,
    pub kind: MathieuKind,
    pub order: usize,
    pub value: f64,
}

/// Mathieu labels and characteristic values for every clean mode.
pub fn mathieu_characteristics(basis: &SpectralBasis) -> Result<Vec<MathieuCharacteristic>> {
    let mut out = Vec::new();
    for (m, mode) in basis.modes.iter().enumerate() {
        if mode.contaminated {
            continue;
        }
        if mode.parity.is_none() {
            return Err(Error::Labeling { mode: m });
        }
        let label = mode.label.ok_or(Error::Labeling { mode: m })?;
        out.push(MathieuCharacteristic { m, kind: label.kind, order: label.order, value: 4.0 * mode.energy });
    }
    Ok(out)
}

/// Lowest `m_max + 1` eigenvalues for each coupling of a q grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityChart {
    pub half_width: usize,
    pub q: Vec<f64>,
    /// `energies[k][m]` is `E_m(q[k])`.
    pub energies: Vec<Vec<f64>>,
}

impl StabilityChart {
    pub fn m_max(&self) -> usize {
        self.energies.first().map_or(0, |row| row.len().saturating_sub(1))
    }

    /// CSV with header `q,m,E`, one row per `(q, m)`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,m,E\n");
        for (q, row) in self.q.iter().zip(&self.energies) {
            for (m, e) in row.iter().enumerate() {
                out.push_str(&format!("{},{},{}\n", fmt_f64(*q), m, fmt_f64(*e)));
            }
        }
        out
    }

    /// Largest `|E_m(q_{k+1}) - E_m(q_k)| - 2|q_{k+1} - q_k|` over the chart.
    /// Non-positive values mean every step respects the Weyl bound.
    pub fn max_weyl_excess(&self) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for k in 1..self.q.len() {
            let bound = 2.0 * (self.q[k] - self.q[k - 1]).abs();
            for (a, b) in self.energies[k - 1].iter().zip(&self.energies[k]) {
                worst = worst.max((b - a).abs() - bound);
            }
        }
        worst
    }
}

pub fn stability_chart(q_grid: &[f64], half_width: usize, m_max: usize) -> Result<StabilityChart> {
    if q_grid.iter().any(|q| !q.is_finite()) {
        return Err(Error::Config("q grid contains non-finite values".into()));
    }
    if q_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config("q grid must be ascending".into()));
    }
    if m_max + 1 > 2 * half_width + 1 {
        return Err(Error::Config(format!(
            "m_max = {m_max} needs at least {} modes but J = {half_width} retains {}",
            m_max + 1,
            2 * half_width + 1
        )));
    }
    let energies = q_grid
        .par_iter()
        .map(|&q| {
            let cfg = LatticeConfig::new(q, half_width)?;
            let basis = solve(&cfg)?;
            Ok(basis.modes.iter().take(m_max + 1).map(|m| m.energy).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(StabilityChart { half_width, q: q_grid.to_vec(), energies })
}

/// `n` evenly spaced points from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (n - 1) as f64;
            (0..n).map(|k| if k == n - 1 { end } else { start + step * k as f64 }).collect()
        }
    }
}
