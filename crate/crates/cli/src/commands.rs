use std::path::Path;

use mathieu_lattice::bessel::J0_FIRST_ZERO;
use mathieu_lattice::bragg::{raman_nath_profile, verify_equivalence, BraggConfig, BraggState};
use mathieu_lattice::export::{csv_row, fmt_f64, pgm16};
use mathieu_lattice::mathieu::{
    classical_form, eval_cse, function_table_csv, ode_residual, uniform_grid, MathieuFunction,
};
use mathieu_lattice::propagator::{integrate_direct, propagate, FieldState, Warning};
use mathieu_lattice::spectrum::{linspace, Mode};
use mathieu_lattice::{solve, stability_chart, LatticeConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{parse_sites, BraggParams, MathieuParams, PropagateParams, SpectrumParams};
use crate::output::{CliError, CliResult, Run};

/// Largest accepted spectral/direct deviation under `--oracle`.
const ORACLE_TOL: f64 = 1e-8;
/// Largest accepted intensity asymmetry for reflection-symmetric inputs.
const SYMMETRY_TOL: f64 = 1e-10;

fn positive_count(name: &str, n: usize, min: usize) -> CliResult<()> {
    if n < min {
        return Err(CliError::Validation(format!("{name} must be at least {min}, got {n}")));
    }
    Ok(())
}

fn positive(name: &str, x: f64) -> CliResult<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(CliError::Validation(format!("{name} must be positive and finite, got {x}")));
    }
    Ok(())
}

#[derive(Serialize)]
struct ModeColumn<'a> {
    q: f64,
    modes: Vec<IndexedMode<'a>>,
}

#[derive(Serialize)]
struct IndexedMode<'a> {
    m: usize,
    #[serde(flatten)]
    mode: &'a Mode,
}

pub fn spectrum(p: &SpectrumParams, out_dir: &Path, config: Option<&Path>) -> CliResult<()> {
    positive_count("q-steps", p.q_steps, 1)?;
    if p.q_steps > 1 && p.q_max.partial_cmp(&p.q_min) != Some(std::cmp::Ordering::Greater) {
        return Err(CliError::Validation(format!("q-max ({}) must exceed q-min ({})", p.q_max, p.q_min)));
    }
    LatticeConfig::with_tolerances(p.q_min, p.half_width, p.eig_tol, p.tail_tol)?;
    let q_grid = linspace(p.q_min, p.q_max, p.q_steps);
    let chart = stability_chart(&q_grid, p.half_width, p.m_max)?;
    let bases = q_grid
        .par_iter()
        .map(|&q| solve(&LatticeConfig::with_tolerances(q, p.half_width, p.eig_tol, p.tail_tol)?))
        .collect::<mathieu_lattice::Result<Vec<_>>>()?;
    let columns: Vec<ModeColumn> = q_grid
        .iter()
        .zip(&bases)
        .map(|(&q, b)| ModeColumn {
            q,
            modes: b.modes().iter().take(p.m_max + 1).enumerate().map(|(m, mode)| IndexedMode { m, mode }).collect(),
        })
        .collect();

    let mut run = Run::new(out_dir)?;
    run.write("spectrum_chart.csv", chart.to_csv())?;
    run.write_json("spectrum_modes.json", &columns)?;
    let excess = chart.max_weyl_excess();
    if q_grid.len() > 1 {
        println!("max step beyond the 2Δq bound: {}", fmt_f64(excess));
        run.record("max_weyl_excess", excess);
    }
    let contaminated = columns.iter().flat_map(|c| &c.modes).filter(|m| m.mode.contaminated).count();
    if contaminated > 0 {
        eprintln!("warning: {contaminated} charted modes exceed the tail tolerance; increase --J");
    }
    run.record("contaminated_modes", contaminated);
    run.finish("spectrum", p, config)
}

#[derive(Serialize)]
struct ObservablesSummary {
    z: f64,
    norm: f64,
    second_moment: f64,
    participation_ratio: f64,
}

pub fn propagate_cmd(p: &PropagateParams, out_dir: &Path, config: Option<&Path>) -> CliResult<()> {
    positive_count("z-steps", p.z_steps, 1)?;
    if p.z_steps > 1 {
        positive("z-max", p.z_max)?;
    }
    let cfg = LatticeConfig::with_tolerances(p.q, p.half_width, p.eig_tol, p.tail_tol)?;
    let basis = solve(&cfg)?;
    let input = match (p.mode, &p.sites) {
        (Some(m), _) => FieldState::from_mode(&basis, m)?,
        (None, Some(sites)) => FieldState::from_sites(p.half_width, &parse_sites(sites)?)?,
        (None, None) => FieldState::single_site(p.half_width, 0)?,
    };
    let z_grid = linspace(0.0, p.z_max, p.z_steps);
    let result = propagate(&basis, &input, &z_grid)?;

    let mut run = Run::new(out_dir)?;
    if p.oracle {
        let direct = integrate_direct(&cfg, &input, &z_grid, p.h)?;
        let deviation = result.max_amplitude_difference(&direct);
        println!("oracle max deviation: {}", fmt_f64(deviation));
        run.record("oracle_max_deviation", deviation);
        if deviation > ORACLE_TOL {
            return Err(CliError::Numeric(format!(
                "spectral and direct propagation differ by {} (> {ORACLE_TOL})",
                fmt_f64(deviation)
            )));
        }
    }

    let n = input.amplitudes.len();
    let symmetric = (0..n).all(|i| input.amplitudes[i] == input.amplitudes[n - 1 - i]);
    if symmetric {
        let asymmetry = result
            .intensity_map()
            .iter()
            .flat_map(|row| (0..n).map(move |i| (row[i] - row[n - 1 - i]).abs()))
            .fold(0.0, f64::max);
        println!("reflection asymmetry: {}", fmt_f64(asymmetry));
        run.record("reflection_asymmetry", asymmetry);
        if asymmetry > SYMMETRY_TOL {
            return Err(CliError::Numeric(format!(
                "symmetric input lost reflection symmetry ({})",
                fmt_f64(asymmetry)
            )));
        }
    }

    run.write("propagate_intensity.csv", result.intensity_csv())?;
    let mut obs = String::from("z,norm,second_moment,participation_ratio\n");
    for (z, o) in result.z_grid.iter().zip(&result.observables) {
        obs.push_str(&csv_row([*z, o.norm, o.second_moment, o.participation_ratio]));
        obs.push('\n');
    }
    run.write("propagate_observables.csv", obs)?;
    if p.pgm {
        run.write("propagate_intensity.pgm", pgm16(&result.intensity_map()))?;
    }

    for w in &result.warnings {
        match w {
            Warning::EdgeContamination { max_edge } => {
                eprintln!("warning: edge contamination, max |c_±J| = {}; increase --J", fmt_f64(*max_edge))
            }
            Warning::NormDrift { drift } => eprintln!("warning: norm drift {}", fmt_f64(*drift)),
        }
    }
    let last = result.observables.last().expect("non-empty grid");
    let summary = ObservablesSummary {
        z: *result.z_grid.last().expect("non-empty grid"),
        norm: last.norm,
        second_moment: last.second_moment,
        participation_ratio: last.participation_ratio,
    };
    println!(
        "z = {}: norm {}, second moment {}, participation ratio {}",
        fmt_f64(summary.z),
        fmt_f64(summary.norm),
        fmt_f64(summary.second_moment),
        fmt_f64(summary.participation_ratio)
    );
    run.record("final_observables", &summary);
    run.record("edge_contaminated", result.edge_contaminated());
    run.record("max_edge_amplitude", result.max_edge_amplitude);
    run.record("norm_drift", result.norm_drift);
    run.record("warnings", &result.warnings);
    run.finish("propagate", p, config)
}

#[derive(Serialize)]
struct RamanNathSummary {
    qz_max: f64,
    n_max: usize,
    max_deviation: f64,
    central_population_at_first_zero: f64,
}

pub fn bragg(p: &BraggParams, out_dir: &Path, config: Option<&Path>) -> CliResult<()> {
    let cfg = BraggConfig::new(p.omega, p.omega_k, p.omega_d)?;
    cfg.integer_shift()?;
    let input = BraggState::single_site(p.half_width, p.site)?;
    let equivalence = verify_equivalence(&cfg, &input, p.t_max, p.h, p.t_steps)?;
    let report = &equivalence.report;

    let mut run = Run::new(out_dir)?;
    run.write_json("bragg_report.json", report)?;
    run.write("bragg_populations.csv", equivalence.bragg.population_csv())?;
    run.write("bragg_lattice_populations.csv", equivalence.lattice.intensity_csv())?;
    println!(
        "l = {}, q = {}: max population discrepancy {}",
        report.l,
        fmt_f64(report.q),
        fmt_f64(report.max_population_discrepancy)
    );
    if equivalence.lattice.edge_contaminated() {
        eprintln!("warning: lattice run reached the truncation edge; increase --J");
    }
    for w in &equivalence.bragg.warnings {
        if let Warning::NormDrift { drift } = w {
            eprintln!("warning: Bragg norm drift {}", fmt_f64(*drift));
        }
    }

    if p.raman_nath {
        positive_count("qz-steps", p.qz_steps, 1)?;
        let products = linspace(0.0, p.qz_max, p.qz_steps);
        let profile = raman_nath_profile(&products, p.n_max, p.half_width)?;
        let zero = raman_nath_profile(&[J0_FIRST_ZERO / 2.0], 0, p.half_width)?;
        let summary = RamanNathSummary {
            qz_max: p.qz_max,
            n_max: p.n_max,
            max_deviation: profile.max_deviation,
            central_population_at_first_zero: zero.lattice[0][0],
        };
        run.write("raman_nath.csv", profile.to_csv())?;
        run.write_json("raman_nath.json", &summary)?;
        println!(
            "Raman-Nath: max |P_n - J_n(2qz)²| {}, central population at 2qz = j_0,1: {}",
            fmt_f64(summary.max_deviation),
            fmt_f64(summary.central_population_at_first_zero)
        );
        run.record("raman_nath_max_deviation", summary.max_deviation);
    }
    run.record("max_population_discrepancy", report.max_population_discrepancy);
    run.finish("bragg", p, config)
}

#[derive(Serialize)]
struct MathieuSummary<'a> {
    q: f64,
    m: usize,
    #[serde(rename = "J")]
    half_width: usize,
    energy: f64,
    characteristic_value: f64,
    parity: Option<mathieu_lattice::Parity>,
    label: Option<mathieu_lattice::MathieuLabel>,
    points: usize,
    ode_residual: f64,
    max_abs_re: f64,
    max_abs_im: f64,
    classical_coefficients: Option<&'a [f64]>,
}

pub fn mathieu(p: &MathieuParams, out_dir: &Path, config: Option<&Path>) -> CliResult<()> {
    positive_count("points", p.points, 1)?;
    let basis = solve(&LatticeConfig::new(p.q, p.half_width)?)?;
    let f = MathieuFunction::from_basis(&basis, p.m)?;
    let grid = uniform_grid(p.points);
    let table = function_table_csv(&f, &grid)?;
    let values = grid.iter().map(|&x| eval_cse(&f, x)).collect::<mathieu_lattice::Result<Vec<_>>>()?;
    let classical = if f.label.is_some() { Some(classical_form(&f)?) } else { None };
    let residual = ode_residual(&f, f.energy, &grid);
    let summary = MathieuSummary {
        q: p.q,
        m: p.m,
        half_width: p.half_width,
        energy: f.energy,
        characteristic_value: 4.0 * f.energy,
        parity: f.parity,
        label: f.label,
        points: p.points,
        ode_residual: residual,
        max_abs_re: values.iter().map(|v| v.re.abs()).fold(0.0, f64::max),
        max_abs_im: values.iter().map(|v| v.im.abs()).fold(0.0, f64::max),
        classical_coefficients: classical.as_ref().map(|c| c.coefficients.as_slice()),
    };

    let mut run = Run::new(out_dir)?;
    run.write(&format!("mathieu_m{}.csv", p.m), table)?;
    run.write_json(&format!("mathieu_m{}_summary.json", p.m), &summary)?;
    let name = match f.label {
        Some(l) => format!("{:?}_{}", l.kind, l.order).to_lowercase(),
        None => "unlabeled".into(),
    };
    println!(
        "mode {} ({name}): E = {}, 4E = {}, ODE residual {}",
        p.m,
        fmt_f64(f.energy),
        fmt_f64(4.0 * f.energy),
        fmt_f64(residual)
    );
    run.record("ode_residual", residual);
    run.finish("mathieu", p, config)
}
