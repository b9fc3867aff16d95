//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::MathieuClass;
use mathieu_lattice::bessel::J0_FIRST_ZERO;
use mathieu_lattice::bragg::{verify_equivalence, BraggConfig, BraggState};
use mathieu_lattice::propagator::{integrate_direct, kernel_element, observables, propagate, FieldState};
use mathieu_lattice::spectrum::{build_operator, linspace, site_of, TruncatedOperator};
use mathieu_lattice::{solve, solve_spectrum, stability_chart, LatticeConfig, MathieuKind, Parity};
use nalgebra::DMatrix;
use num_complex::Complex64;

type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }

    fn and(self, other: Outcome) -> Outcome {
        let detail = if self.detail.is_empty() { other.detail } else { format!("{}; {}", self.detail, other.detail) };
        Outcome { pass: self.pass && other.pass, detail }
    }
}

fn oracle_equivalence(half_width: usize) -> Outcome {
    let z_grid = linspace(0.0, 5.0, 500);
    let mut out = Outcome::new(true, "");
    for q in [0.5, 2.0, 5.0] {
        let start = Instant::now();
        let cfg = LatticeConfig::new(q, half_width).unwrap();
        let input = FieldState::single_site(half_width, 0).unwrap();
        let spectral = propagate(&solve(&cfg).unwrap(), &input, &z_grid).unwrap();
        let direct = integrate_direct(&cfg, &input, &z_grid, 1e-4).unwrap();
        let diff = spectral.max_amplitude_difference(&direct);
        let secs = start.elapsed().as_secs_f64();
        out = out.and(Outcome::new(diff <= 1e-8, format!("q={q}: max diff {diff:.2e} ({secs:.2} s)")));
    }
    out
}

fn bragg_equivalence() -> Outcome {
    let mut out = Outcome::new(true, "");
    for (omega, omega_k, omega_d) in [(2.0, 1.0, -1.0), (1.0, 1.0, 3.0)] {
        let cfg = BraggConfig::new(omega, omega_k, omega_d).unwrap();
        let input = BraggState::single_site(32, 0).unwrap();
        let run = verify_equivalence(&cfg, &input, 3.0, 1e-4, 301).unwrap();
        let d = run.report.max_population_discrepancy;
        out = out.and(Outcome::new(
            d <= 1e-6,
            format!("(Ω,ω_k,ω_D)=({omega},{omega_k},{omega_d}) l={}: discrepancy {d:.2e}", run.report.l),
        ));
    }
    out
}

/// Oracle characteristic value of mode `m` (even: `a_m`, odd: `b_{m+1}`) at `4q`.
fn oracle_value(q: f64, m: usize) -> (MathieuKind, usize, f64) {
    let r = m / 2;
    if m.is_multiple_of(2) {
        (MathieuKind::Ce, 2 * r, common::characteristic_value(MathieuClass::EvenCe, 4.0 * q, r))
    } else {
        (MathieuKind::Se, 2 * r + 2, common::characteristic_value(MathieuClass::OddSe, 4.0 * q, r))
    }
}

fn mathieu_identification(half_width: usize) -> Outcome {
    let mut out = Outcome::new(true, "");
    for q in [0.5, 1.0, 2.5] {
        let basis = solve(&LatticeConfig::new(q, half_width).unwrap()).unwrap();
        let mut worst: f64 = 0.0;
        let mut labels_ok = true;
        for m in 0..6 {
            let mode = basis.mode(m).unwrap();
            let (kind, order, value) = oracle_value(q, m);
            worst = worst.max((4.0 * mode.energy - value).abs());
            let parity = if kind == MathieuKind::Ce { Parity::Even } else { Parity::Odd };
            labels_ok &= mode.parity == Some(parity) && mode.label.is_some_and(|l| l.kind == kind && l.order == order);
        }
        out = out.and(Outcome::new(
            worst <= 1e-9 && labels_ok,
            format!("q={q}: max |4E - a| {worst:.2e}, labels {}", if labels_ok { "ok" } else { "wrong" }),
        ));
    }
    out
}

fn raman_nath() -> Outcome {
    let half_width = 64;
    let cfg = LatticeConfig::new(1.0, half_width).unwrap();
    let op = TruncatedOperator::coupling_only(&cfg).unwrap();
    let basis = solve_spectrum(&op, &cfg).unwrap();
    let input = FieldState::single_site(half_width, 0).unwrap();
    // q = 1, so the product qz is z itself.
    let products = linspace(0.0, 5.0, 201);
    let run = propagate(&basis, &input, &products).unwrap();
    let mut worst: f64 = 0.0;
    for (s, state) in products.iter().zip(&run.states) {
        for n in -20i64..=20 {
            let want = common::bessel_series(n.unsigned_abs() as u32, 2.0 * s).powi(2);
            worst = worst.max((state.amplitude(n).unwrap().norm_sqr() - want).abs());
        }
    }
    let zero = propagate(&basis, &input, &[J0_FIRST_ZERO / 2.0]).unwrap();
    let central = zero.states[0].amplitude(0).unwrap().norm_sqr();
    Outcome::new(
        worst <= 1e-9 && central <= 1e-12,
        format!("max |P_n - J_n²| {worst:.2e}, central population at first zero {central:.2e}"),
    )
}

fn dense(n: usize, f: impl Fn(usize, usize) -> f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, f)
}

fn interior_max(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for r in 1..n - 1 {
        for c in 1..n - 1 {
            worst = worst.max(m[(r, c)].abs());
        }
    }
    worst
}

fn invariant_suite(half_width: usize) -> Outcome {
    let q = 2.0;
    let cfg = LatticeConfig::new(q, half_width).unwrap();
    let basis = solve(&cfg).unwrap();
    let n = basis.dim();

    // Unitarity and group property.
    let input =
        FieldState::from_sites(half_width, &[(0, Complex64::new(1.0, 0.0)), (3, Complex64::new(0.3, -0.4))]).unwrap();
    let (z1, z2) = (0.7, 1.9);
    let grid = linspace(0.0, 3.0, 61);
    let run = propagate(&basis, &input, &grid).unwrap();
    let unitarity = run.states.iter().map(|s| (s.norm_sqr() - 1.0).abs()).fold(0.0, f64::max);
    let direct = propagate(&basis, &input, &[z2]).unwrap();
    let mid = propagate(&basis, &input, &[z1]).unwrap().states.remove(0);
    let two_step = propagate(&basis, &FieldState::new(0.0, mid.amplitudes).unwrap(), &[z2 - z1]).unwrap();
    let group = direct.states[0]
        .amplitudes
        .iter()
        .zip(&two_step.states[0].amplitudes)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);

    // Kernel symmetry.
    let mut kernel_exact = true;
    for (a, b) in [(0, 1), (-2, 5), (3, -3), (-(half_width as i64), 4)] {
        kernel_exact &= kernel_element(&basis, a, b, 1.3).unwrap() == kernel_element(&basis, b, a, 1.3).unwrap();
    }

    // Eigenvector parity, recurrence residuals, orthonormality.
    let mut parity: f64 = 0.0;
    let mut residual_ok = true;
    let mut worst_residual: f64 = 0.0;
    for m in 0..n {
        parity = parity.max(basis.parity_defect(m).unwrap().unwrap_or(f64::INFINITY));
        let e = basis.mode(m).unwrap().energy;
        let r = basis.recurrence_residual(m).unwrap();
        worst_residual = worst_residual.max(r / e.abs().max(1.0));
        residual_ok &= r <= basis.eig_tol() * e.abs().max(1.0);
    }
    let ortho = basis.orthonormality_defect();

    // Trace identity.
    let sum_e: f64 = basis.energies().iter().sum();
    let sum_j2: f64 = (0..n).map(|i| (site_of(half_width, i) as f64).powi(2)).sum();
    let trace = ((sum_e - sum_j2) / sum_j2).abs();

    // Commutator and shift identities on interior rows, against the library operator.
    let num = dense(n, |r, c| if r == c { site_of(half_width, r) as f64 } else { 0.0 });
    let lower = dense(n, |r, c| if c == r + 1 { 1.0 } else { 0.0 });
    let raise = lower.transpose();
    let comm_v = &num * &lower - &lower * &num + &lower;
    let comm_vd = &num * &raise - &raise * &num - &raise;
    let f = |m: &DMatrix<f64>| m * m * m - m * 2.0 + DMatrix::identity(n, n) * 5.0;
    let shift = &lower * f(&(&num - DMatrix::identity(n, n))) - f(&num) * &lower;
    let op = build_operator(&cfg).unwrap();
    let generator = &num * &num + (&lower + &raise) * q;
    let op_exact = (0..n).all(|r| (0..n).all(|c| op.entry(r, c) == generator[(r, c)]));
    let identities = interior_max(&comm_v).max(interior_max(&comm_vd)).max(interior_max(&shift));

    let pass = unitarity <= 1e-10
        && group <= 1e-10
        && kernel_exact
        && parity <= 1e-11
        && residual_ok
        && ortho <= 1e-11
        && trace <= 1e-10
        && identities == 0.0
        && op_exact;
    Outcome::new(
        pass,
        format!(
            "J={half_width}: unitarity {unitarity:.1e}, group {group:.1e}, kernel symmetric {kernel_exact}, parity {parity:.1e}, \
             residual/max(1,|E|) {worst_residual:.1e}, orthonormality {ortho:.1e}, trace {trace:.1e}, \
             identities {identities:e}, operator matches {op_exact}"
        ),
    )
}

fn figure_claims() -> Outcome {
    let half_width = 64;
    let input = FieldState::single_site(half_width, 0).unwrap();
    let moment = |q: f64| {
        let basis = solve(&LatticeConfig::new(q, half_width).unwrap()).unwrap();
        observables(&propagate(&basis, &input, &[2.0]).unwrap().states[0]).unwrap().second_moment
    };
    let (m2, m5) = (moment(2.0), moment(5.0));
    let regime = Outcome::new(m5 > m2, format!("<j²>(z=2): q=5 {m5:.4} vs q=2 {m2:.4}"));

    let dq = 0.05;
    let q_grid = linspace(0.0, 10.0, 201);
    let chart = stability_chart(&q_grid, half_width, 10).unwrap();
    let mut jump: f64 = 0.0;
    for w in chart.energies.windows(2) {
        for (a, b) in w[0].iter().zip(&w[1]) {
            jump = jump.max((a - b).abs());
        }
    }
    let mut oracle_diff: f64 = 0.0;
    for (q, row) in q_grid.iter().zip(&chart.energies) {
        let dense = common::dense_eigenvalues(*q, 128);
        for (e, d) in row.iter().zip(&dense) {
            oracle_diff = oracle_diff.max((e - d).abs());
        }
    }
    let chart_ok = Outcome::new(
        jump <= 2.0 * dq + 1e-9 && oracle_diff <= 1e-9,
        format!("chart max jump {jump:.4} (bound {:.4}), vs dense J=128 {oracle_diff:.2e}", 2.0 * dq),
    );
    regime.and(chart_ok)
}

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("1 oracle equivalence, J=64", Box::new(|| oracle_equivalence(64))),
        ("2 Bragg/lattice equivalence", Box::new(bragg_equivalence)),
        ("3 Mathieu identification, J=64", Box::new(|| mathieu_identification(64))),
        ("4 Raman-Nath limit", Box::new(raman_nath)),
        ("5 invariant suite", Box::new(|| invariant_suite(16).and(invariant_suite(64)))),
        ("6 figure claims", Box::new(figure_claims)),
        ("7 truncation robustness, J=96", Box::new(|| oracle_equivalence(96).and(mathieu_identification(96)))),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let outcome = check();
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        if !outcome.pass {
            failed += 1;
        }
        println!("{tag} [{name}] {}", outcome.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
