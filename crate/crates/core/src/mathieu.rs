//! Floquet functions `cse_m(x; q) = Σ_j A_j^(m) e^{ijx}` built from lattice
//! eigenvectors, and their classical angular Mathieu form.
//!
//! Even modes give `cse_m(x; q) = √2 ce_2r(x/2, 4q)` and odd modes give
//! `cse_m(x; q) = i √2 se_{2r+2}(x/2, 4q)`, so the classical Fourier
//! coefficients are
//!
//! ```text
//! A_0 = A_0^lattice / √2,   A_2k = √2 A_k^lattice  (k >= 1)
//! B_2k = √2 A_k^lattice     (k >= 1)
//! ```

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::export::fmt_f64;
use crate::spectrum::{MathieuKind, MathieuLabel, Parity, SpectralBasis};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MathieuFunction {
    pub m: usize,
    pub q: f64,
    pub energy: f64,
    pub half_width: usize,
    /// `A_j` for `j = -J..=J`.
    pub coefficients: Vec<f64>,
    pub parity: Option<Parity>,
    pub label: Option<MathieuLabel>,
    pub contaminated: bool,
    edge: f64,
    tail_tol: f64,
    diag: Vec<f64>,
}

impl MathieuFunction {
    pub fn from_basis(basis: &SpectralBasis, m: usize) -> Result<Self> {
        let mode = basis.mode(m)?;
        Ok(Self {
            m,
            q: basis.q(),
            energy: mode.energy,
            half_width: basis.half_width(),
            coefficients: mode.coefficients.clone(),
            parity: mode.parity,
            label: mode.label,
            contaminated: mode.contaminated,
            edge: mode.edge_magnitude(),
            tail_tol: basis.tail_tol(),
            diag: basis.diag().to_vec(),
        })
    }

    fn ensure_clean(&self) -> Result<()> {
        if self.contaminated {
            return Err(Error::Contaminated { mode: self.m, edge: self.edge, tail_tol: self.tail_tol });
        }
        Ok(())
    }

    /// `A_j` for `|j| <= J`, zero outside.
    fn coefficient(&self, j: i64) -> f64 {
        let i = j + self.half_width as i64;
        if (0..self.coefficients.len() as i64).contains(&i) {
            self.coefficients[i as usize]
        } else {
            0.0
        }
    }
}

/// Sum `Σ_j c_j e^{ijx}` for `j = -K..=K` (`c` has length `2K + 1`), pairing
/// `±j` so that exact (anti)symmetry of `c` gives exactly real (imaginary) sums.
fn fourier_sum(c: &[f64], x: f64) -> Complex64 {
    let k_max = (c.len() - 1) / 2;
    let mut acc = Complex64::new(c[k_max], 0.0);
    for k in 1..=k_max {
        let (s, cs) = (k as f64 * x).sin_cos();
        let plus = c[k_max + k];
        let minus = c[k_max - k];
        acc += Complex64::new((plus + minus) * cs, (plus - minus) * s);
    }
    acc
}

/// `cse_m(x; q)` as a finite Fourier sum over the retained sites.
pub fn eval_cse(f: &MathieuFunction, x: f64) -> Result<Complex64> {
    f.ensure_clean()?;
    Ok(fourier_sum(&f.coefficients, x))
}

/// `(1/2π) ∫_0^{2π} cse_m* cse_n dx`, evaluated by Parseval.
pub fn circle_overlap(f: &MathieuFunction, g: &MathieuFunction) -> f64 {
    f.coefficients.iter().zip(&g.coefficients).map(|(a, b)| a * b).sum()
}

/// Classical `ce_order` (`A_0, A_2, A_4, …`) or `se_order` (`B_2, B_4, …`)
/// coefficients at parameter `4q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalForm {
    pub kind: MathieuKind,
    pub order: usize,
    pub coefficients: Vec<f64>,
}

impl ClassicalForm {
    /// `2 A_0² + Σ A_2k²` for `ce`, `Σ B_2k²` for `se`; 1 for a normalized function.
    pub fn normalization(&self) -> f64 {
        let sq: f64 = self.coefficients.iter().map(|c| c * c).sum();
        match self.kind {
            MathieuKind::Ce => sq + self.coefficients[0] * self.coefficients[0],
            MathieuKind::Se => sq,
        }
    }

    /// `ce_order(v, 4q)` or `se_order(v, 4q)`.
    pub fn evaluate(&self, v: f64) -> f64 {
        match self.kind {
            MathieuKind::Ce => self.coefficients.iter().enumerate().map(|(k, a)| a * (2.0 * k as f64 * v).cos()).sum(),
            MathieuKind::Se => {
                self.coefficients.iter().enumerate().map(|(k, b)| b * ((2 * k + 2) as f64 * v).sin()).sum()
            }
        }
    }
}

pub fn classical_form(f: &MathieuFunction) -> Result<ClassicalForm> {
    let parity = f.parity.ok_or(Error::Labeling { mode: f.m })?;
    f.ensure_clean()?;
    let label = f.label.ok_or(Error::Labeling { mode: f.m })?;
    let half = f.half_width as i64;
    let coefficients = match parity {
        Parity::Even => {
            let mut c = vec![f.coefficient(0) / SQRT_2];
            c.extend((1..=half).map(|k| SQRT_2 * f.coefficient(k)));
            c
        }
        Parity::Odd => (1..=half).map(|k| SQRT_2 * f.coefficient(k)).collect(),
    };
    Ok(ClassicalForm { kind: label.kind, order: label.order, coefficients })
}

/// Max over `x_grid` of `|[-d²/dx² + 2q cos x - E] cse_m(x)|`, evaluated term
/// by term on the Fourier sum. Sites `±(J + 1)` pick up the truncated tail.
pub fn ode_residual(f: &MathieuFunction, energy: f64, x_grid: &[f64]) -> f64 {
    let half = f.half_width as i64;
    // Extended lattice -J-1..=J+1 so the coupling of the edge sites is kept.
    let mut diag = Vec::with_capacity(f.coefficients.len() + 2);
    let mut a = Vec::with_capacity(f.coefficients.len() + 2);
    let edge = ((half + 1) * (half + 1)) as f64;
    diag.push(edge);
    a.push(0.0);
    diag.extend_from_slice(&f.diag);
    a.extend_from_slice(&f.coefficients);
    diag.push(edge);
    a.push(0.0);

    let n = a.len();
    let signed: Vec<f64> = (0..n)
        .map(|i| {
            let left = if i > 0 { a[i - 1] } else { 0.0 };
            let right = if i + 1 < n { a[i + 1] } else { 0.0 };
            (diag[i] - energy) * a[i] + f.q * (left + right)
        })
        .collect();

    x_grid.iter().map(|&x| fourier_sum(&signed, x).norm()).fold(0.0, f64::max)
}

/// `points` uniformly spaced angles on `[0, 2π)`.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    (0..points).map(|k| 2.0 * PI * k as f64 / points as f64).collect()
}

/// CSV `x,re,im` of `cse_m` on `x_grid`.
pub fn function_table_csv(f: &MathieuFunction, x_grid: &[f64]) -> Result<String> {
    let mut out = String::from("x,re,im\n");
    for &x in x_grid {
        let v = eval_cse(f, x)?;
        out.push_str(&format!("{},{},{}\n", fmt_f64(x), fmt_f64(v.re), fmt_f64(v.im)));
    }
    Ok(out)
}
