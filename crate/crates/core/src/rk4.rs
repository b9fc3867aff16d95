//! Classical fourth-order Runge–Kutta stepping for complex linear systems
//! `dy/dt = f(t, y)`.

use num_complex::Complex64;

/// Scratch buffers for [`Rk4::step`], sized once per system.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    stage: Vec<Complex64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        let zero = vec![Complex64::new(0.0, 0.0); dim];
        Self { k1: zero.clone(), k2: zero.clone(), k3: zero.clone(), k4: zero.clone(), stage: zero }
    }

    /// Advance `y` from `t` to `t + h`. `rhs(t, y, out)` writes `dy/dt` into `out`.
    #[allow(clippy::needless_range_loop)]
    pub fn step<F>(&mut self, rhs: &mut F, t: f64, h: f64, y: &mut [Complex64])
    where
        F: FnMut(f64, &[Complex64], &mut [Complex64]),
    {
        let n = y.len();
        let half = 0.5 * h;

        rhs(t, y, &mut self.k1);
        for i in 0..n {
            self.stage[i] = y[i] + self.k1[i] * half;
        }
        rhs(t + half, &self.stage, &mut self.k2);
        for i in 0..n {
            self.stage[i] = y[i] + self.k2[i] * half;
        }
        rhs(t + half, &self.stage, &mut self.k3);
        for i in 0..n {
            self.stage[i] = y[i] + self.k3[i] * h;
        }
        rhs(t + h, &self.stage, &mut self.k4);

        let sixth = h / 6.0;
        for i in 0..n {
            y[i] += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * sixth;
        }
    }

    /// Integrate from `t0` to `t1` with equal sub-steps no longer than `h_max`.
    /// Returns the number of sub-steps taken.
    pub fn advance<F>(&mut self, rhs: &mut F, t0: f64, t1: f64, h_max: f64, y: &mut [Complex64]) -> usize
    where
        F: FnMut(f64, &[Complex64], &mut [Complex64]),
    {
        let span = t1 - t0;
        if span == 0.0 {
            return 0;
        }
        // Small slack so a span that is an exact multiple of h_max is not split
        // into one extra step by rounding.
        let steps = ((span.abs() / h_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for s in 0..steps {
            self.step(rhs, t0 + h * s as f64, h, y);
        }
        steps
    }
}
