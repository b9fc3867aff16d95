//! Reference computations that share no code path with the library.
#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};

/// Depth of the continued-fraction tail.
const CF_DEPTH: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MathieuClass {
    /// `ce_2r`, characteristic values `a_2r`.
    EvenCe,
    /// `se_{2r+2}`, characteristic values `b_{2r+2}`.
    OddSe,
}

/// Tail ratio `R_k = c_{2k} / c_{2k-2} = q / (a - 4k² - q R_{k+1})`, evaluated
/// from `CF_DEPTH` down to `k`.
fn tail_ratio(a: f64, q: f64, k: usize) -> f64 {
    let mut r = 0.0;
    for i in (k..=CF_DEPTH).rev() {
        let i2 = (4 * i * i) as f64;
        r = q / (a - i2 - q * r);
    }
    r
}

/// Number of characteristic values of the class below `a`: the count of
/// negative partial denominators of the continued fraction
/// `d_k = (4k² - a) - q_k² / d_{k-1}`.
fn count_below(class: MathieuClass, a: f64, q: f64) -> usize {
    let (first, mut d) = match class {
        MathieuClass::EvenCe => (1, -a),
        MathieuClass::OddSe => (2, 4.0 - a),
    };
    let mut count = usize::from(d < 0.0);
    for k in first..=CF_DEPTH {
        let coupling = if class == MathieuClass::EvenCe && k == 1 { 2.0 * q * q } else { q * q };
        if d == 0.0 {
            d = -f64::MIN_POSITIVE;
        }
        d = (4 * k * k) as f64 - a - coupling / d;
        count += usize::from(d < 0.0);
    }
    count
}

/// Characteristic function split at row `r` of the recurrence:
/// `(a - 4r²) - q (c_r S_r + R_{r+1})` with `S_r = c_{2r-2}/c_{2r}` from the
/// bottom and `R_{r+1} = c_{2r+2}/c_{2r}` from the top. For `ce`, row 0 is
/// `a - q R_1`. Well conditioned near the root of index `r`.
fn split_characteristic(class: MathieuClass, a: f64, q: f64, r: usize) -> f64 {
    let row = match class {
        MathieuClass::EvenCe => r,
        MathieuClass::OddSe => r + 1,
    };
    if class == MathieuClass::EvenCe && row == 0 {
        return a - 2.0 * q * q / (a - 4.0 - q * tail_ratio(a, q, 2));
    }
    let up = tail_ratio(a, q, row + 1);
    // Bottom-up ratios S_k = c_{2k-2} / c_{2k}.
    let down = match class {
        MathieuClass::EvenCe => {
            let mut s = q / a; // S_1 = A_0 / A_2
            for k in 1..row {
                let coupling = if k == 1 { 2.0 * q } else { q };
                s = q / ((a - (4 * k * k) as f64) - coupling * s);
            }
            if row == 1 {
                2.0 * s
            } else {
                s
            }
        }
        MathieuClass::OddSe => {
            if row == 1 {
                0.0
            } else {
                let mut s = q / (a - 4.0); // S_2 = B_2 / B_4
                for k in 2..row {
                    s = q / ((a - (4 * k * k) as f64) - q * s);
                }
                s
            }
        }
    };
    (a - (4 * row * row) as f64) - q * (down + up)
}

/// Characteristic value of index `r` (`a_2r` or `b_{2r+2}`) at Mathieu
/// parameter `q`: bracketed with the pivot count, then refined on the split
/// continued fraction.
pub fn characteristic_value(class: MathieuClass, q: f64, r: usize) -> f64 {
    let mut lo = -2.0 * q.abs() - 10.0;
    let mut hi = 4.0 * ((r + 2) * (r + 2)) as f64 + 2.0 * q.abs() + 10.0;
    assert!(count_below(class, lo, q) == 0 && count_below(class, hi, q) > r);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if count_below(class, mid, q) > r {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let f = |a: f64| split_characteristic(class, a, q, r);
    if f(lo) < 0.0 && f(hi) > 0.0 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    } else {
        panic!("split continued fraction has no sign change around index {r} at q = {q}");
    }
}

/// Lowest `count` characteristic values of the class.
pub fn characteristic_values(class: MathieuClass, q: f64, count: usize) -> Vec<f64> {
    (0..count).map(|r| characteristic_value(class, q, r)).collect()
}

/// Classical Fourier coefficients at characteristic value `a`:
/// `[A_0, A_2, …]` for `ce` (normalized `2A_0² + ΣA_2k² = 1`, `ce(0) > 0`) or
/// `[B_2, B_4, …]` for `se` (normalized `ΣB_2k² = 1`, `se'(0) > 0`).
pub fn classical_coefficients(class: MathieuClass, a: f64, q: f64, count: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(count);
    match class {
        MathieuClass::EvenCe => {
            c.push(1.0);
            c.push(2.0 * q / (a - 4.0 - q * tail_ratio(a, q, 2)));
            for k in 2..count {
                let prev = c[k - 1];
                c.push(prev * tail_ratio(a, q, k));
            }
        }
        MathieuClass::OddSe => {
            c.push(1.0);
            for k in 2..=count {
                let prev = c[k - 2];
                c.push(prev * tail_ratio(a, q, k));
            }
        }
    }
    c.truncate(count);
    let norm = match class {
        MathieuClass::EvenCe => c[0] * c[0] + c.iter().map(|x| x * x).sum::<f64>(),
        MathieuClass::OddSe => c.iter().map(|x| x * x).sum::<f64>(),
    }
    .sqrt();
    let sign_probe: f64 = match class {
        MathieuClass::EvenCe => c.iter().sum(),
        MathieuClass::OddSe => c.iter().enumerate().map(|(k, b)| (2 * k + 2) as f64 * b).sum(),
    };
    let s = sign_probe.signum() / norm;
    c.iter().map(|x| x * s).collect()
}

/// Lattice coefficients `A_j`, `j = -J..=J`, implied by classical
/// coefficients at parameter `4q`.
pub fn lattice_from_classical(class: MathieuClass, classical: &[f64], half_width: usize) -> Vec<f64> {
    let s2 = std::f64::consts::SQRT_2;
    let mut a = vec![0.0; 2 * half_width + 1];
    match class {
        MathieuClass::EvenCe => {
            a[half_width] = s2 * classical[0];
            for j in 1..=half_width.min(classical.len() - 1) {
                a[half_width + j] = classical[j] / s2;
                a[half_width - j] = classical[j] / s2;
            }
        }
        MathieuClass::OddSe => {
            for j in 1..=half_width.min(classical.len()) {
                a[half_width + j] = classical[j - 1] / s2;
                a[half_width - j] = -classical[j - 1] / s2;
            }
        }
    }
    a
}

/// Dense matrix with diagonal `j²` (or zero) and coupling `q`, built directly
/// from the definition.
pub fn dense_lattice(q: f64, half_width: usize, kinetic: bool) -> DMatrix<f64> {
    let n = 2 * half_width + 1;
    DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            if kinetic {
                let j = r as f64 - half_width as f64;
                j * j
            } else {
                0.0
            }
        } else if r.abs_diff(c) == 1 {
            q
        } else {
            0.0
        }
    })
}

/// Ascending eigenvalues from nalgebra's dense symmetric solver.
pub fn dense_eigenvalues(q: f64, half_width: usize) -> Vec<f64> {
    let eig = SymmetricEigen::new(dense_lattice(q, half_width, true));
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `J_n(x)` from the power series `Σ_k (-1)^k (x/2)^{2k+n} / (k! (k+n)!)`.
pub fn bessel_series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let mut sum = term;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= -half * half / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) && k > 5 {
            break;
        }
        if k > 500 {
            break;
        }
    }
    sum
}

/// Signed distance between two vectors up to an overall sign.
pub fn max_diff_up_to_sign(a: &[f64], b: &[f64]) -> f64 {
    let plus = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let minus = a.iter().zip(b).map(|(x, y)| (x + y).abs()).fold(0.0, f64::max);
    plus.min(minus)
}
