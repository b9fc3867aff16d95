//! Integer-order Bessel functions of the first kind by Miller's backward
//! recurrence, normalized with `J_0(x) + 2 Σ_k J_{2k}(x) = 1`.

/// First positive zero of `J_0`.
pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

/// `J_n(x)` for `n = 0..=n_max`.
pub fn bessel_j_orders(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = (n_max as f64).max(ax.ceil());
    let mut start = (top + 30.0 + (60.0 * top).sqrt()) as usize;
    start += start % 2;

    const RESCALE: f64 = 1e250;
    let mut above = 0.0; // J_{k+1}
    let mut here = 1e-30; // J_k
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        if k <= n_max {
            out[k] = here;
        }
        if k.is_multiple_of(2) {
            norm += 2.0 * here;
        }
        let below = (2.0 * k as f64 / ax) * here - above;
        above = here;
        here = below;
        if here.abs() > RESCALE {
            here /= RESCALE;
            above /= RESCALE;
            norm /= RESCALE;
            for v in out.iter_mut() {
                *v /= RESCALE;
            }
        }
    }
    out[0] = here;
    norm += here;

    for (n, v) in out.iter_mut().enumerate() {
        *v /= norm;
        if x < 0.0 && n % 2 == 1 {
            *v = -*v;
        }
    }
    out
}

/// `J_n(x)` for any integer order, using `J_{-n} = (-1)^n J_n`.
pub fn bessel_j(n: i64, x: f64) -> f64 {
    let k = n.unsigned_abs() as usize;
    let v = bessel_j_orders(k, x)[k];
    if n < 0 && k % 2 == 1 {
        -v
    } else {
        v
    }
}
