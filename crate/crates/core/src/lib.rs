//! Light propagation in waveguide lattices whose propagation constants grow
//! as `j²` across the array, and the equivalent momentum-ladder dynamics of
//! single atomic Bragg diffraction.
//!
//! * [`spectrum`]: the truncated operator `N² + q(V + V†)`, its parity-resolved
//!   eigen-decomposition and the identification with angular Mathieu
//!   characteristic values.
//! * [`propagator`]: closed-form spectral propagation, a Runge–Kutta reference
//!   integrator and field observables.
//! * [`bragg`]: the time-dependent Bragg amplitude equations, the frame map onto
//!   the lattice and the Raman–Nath (Bessel) limit.
//! * [`mathieu`]: the Floquet functions `cse_m(x; q)` and their classical
//!   `ce`/`se` form.

pub mod bessel;
pub mod bragg;
pub mod error;
pub mod export;
pub mod mathieu;
pub mod propagator;
pub mod rk4;
pub mod spectrum;
pub mod tridiag;

pub use error::{Error, Result};
pub use spectrum::{
    build_operator, mathieu_characteristics, solve, solve_spectrum, stability_chart, LatticeConfig, MathieuKind,
    MathieuLabel, Parity, SpectralBasis, TruncatedOperator,
};
