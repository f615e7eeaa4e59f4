//! Subcommand implementations. Each writes its files into an
//! [`OutputSet`]; the caller adds the manifest.

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use combcavity_core::meanfield::{
    hysteresis_metric, integrate_to_steady, mot_transient, sweep_grid, sweep_lineshape,
    LineshapeModel, MotSchedule, StepRule, SweepDirection, SweepResult,
};
use combcavity_core::model::{mode_atom_detuning, mot_rabi_from_intensity, ModeIndex};
use combcavity_core::quantum::{
    dispersive_shift_extract, sw_generator_residual, Frame, HilbertSpec, QuantumLine, QuantumParams,
};
use combcavity_core::spectrum::{
    atom_scan_point, collective_shift, count_shifted_modes, diff_signal, fsr_scan, fsr_scan_lines,
    normalize_family, synthesize, FsrScanSpec, Spectrum, RB87_D2_HZ,
};
use combcavity_core::susceptibility::{chi_real, saturated_shift, MediumParams};
use combcavity_core::units::{angular, cyclic, mw_cm2_to_si};

use crate::cli::{
    BistabilityArgs, OracleArgs, ScanAtomsArgs, ScanFsrArgs, ShiftArgs, SpectrumArgs, SweepChoice,
    TransientArgs,
};
use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::output::{Cell, OutputSet};

pub(crate) fn spectrum_rows(s: &Spectrum) -> impl Iterator<Item = Vec<Cell>> + '_ {
    s.points()
        .map(|(f, v)| vec![Cell::Float(f), Cell::Float(v)])
}

pub(crate) const SPECTRUM_HEADER: [&str; 2] = ["freq_offset_hz", "power_norm"];

fn mode(m: i32) -> CliResult<ModeIndex> {
    Ok(ModeIndex::new(m)?)
}

pub fn spectrum(cfg: &Config, a: &SpectrumArgs, out: &mut OutputSet) -> CliResult<()> {
    let mut cfg = cfg.clone();
    if let Some(n) = a.n_atoms {
        cfg.set("n_atoms", n)?;
    }
    if let Some(d) = a.delta_f0_hz {
        cfg.set("delta_f0_hz", d)?;
    }
    let (cavity, comb, atoms, osa) = (cfg.cavity(), cfg.comb(), cfg.atoms(), cfg.osa());
    let with = synthesize(&cavity, &comb, &atoms, &osa)?;
    let mut meta = json!({ "config": cfg.snapshot() });
    if a.with_empty {
        let empty = synthesize(&cavity, &comb, &atoms.with_atoms(0.0), &osa)?;
        let mut family = [with, empty];
        let norm = normalize_family(&mut family);
        let diff = diff_signal(&family[0], &family[1])?;
        let count = count_shifted_modes(&diff, &family[0], cavity.fsr)?;
        out.write_csv("", &SPECTRUM_HEADER, spectrum_rows(&family[0]))?;
        out.write_csv("_empty", &SPECTRUM_HEADER, spectrum_rows(&family[1]))?;
        meta["normalization_w"] = json!(norm);
        meta["count_shifted_modes"] = json!(count);
    } else {
        let mut family = [with];
        let norm = normalize_family(&mut family);
        out.write_csv("", &SPECTRUM_HEADER, spectrum_rows(&family[0]))?;
        meta["normalization_w"] = json!(norm);
    }
    out.write_json("", &meta)?;
    Ok(())
}

pub fn scan_atoms(cfg: &Config, a: &ScanAtomsArgs, out: &mut OutputSet) -> CliResult<()> {
    let mut cfg = cfg.clone();
    if let Some(d) = a.delta_f0_hz {
        cfg.set("delta_f0_hz", d)?;
    }
    let (cavity, comb, atoms, osa) = (cfg.cavity(), cfg.comb(), cfg.atoms(), cfg.osa());
    let empty = synthesize(&cavity, &comb, &atoms.with_atoms(0.0), &osa)?;
    let points = a
        .n_values
        .par_iter()
        .map(|&n| atom_scan_point(&cavity, &comb, &atoms, n, &osa, &empty))
        .collect::<Result<Vec<_>, _>>()?;
    let mut family: Vec<Spectrum> = points.iter().map(|p| p.spectrum.clone()).collect();
    family.push(empty);
    let norm = normalize_family(&mut family);
    for (i, s) in family.iter().enumerate().take(points.len()) {
        out.write_csv(&format!("_n{i}"), &SPECTRUM_HEADER, spectrum_rows(s))?;
    }
    out.write_csv(
        "_empty",
        &SPECTRUM_HEADER,
        spectrum_rows(&family[points.len()]),
    )?;
    out.write_csv(
        "_summary",
        &["n_atoms", "mode_count"],
        points
            .iter()
            .map(|p| vec![Cell::Float(p.n_atoms), Cell::Int(i64::from(p.count))]),
    )?;
    out.write_json(
        "",
        &json!({ "normalization_w": norm, "config": cfg.snapshot() }),
    )?;
    Ok(())
}

/// `n` evenly spaced values on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    sweep_grid(lo, hi, n, SweepDirection::Up)
}

pub fn scan_fsr(cfg: &Config, a: &ScanFsrArgs, out: &mut OutputSet) -> CliResult<()> {
    let mut cfg = cfg.clone();
    if let Some(e) = a.epsilon_hz {
        cfg.set("epsilon_hz", e)?;
    }
    if let Some(n) = a.n_atoms {
        cfg.set("n_atoms", n)?;
    }
    if a.points < 2 || !(a.span_hz > 0.0) {
        return Err(CliError::Argument(
            "scan-fsr needs at least 2 points and a positive span".into(),
        ));
    }
    let (cavity, comb, atoms) = (cfg.cavity(), cfg.comb(), cfg.atoms());
    let scan = FsrScanSpec::for_cavity(&cavity);
    let offsets = linspace(-a.span_hz / 2.0, a.span_hz / 2.0, a.points);
    let totals = fsr_scan(&cavity, &comb, &atoms, &offsets, &scan)?;
    let lines = offsets
        .par_iter()
        .map(|&o| fsr_scan_lines(&cavity, &comb, &atoms, o, &scan))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, l) in lines.iter().enumerate() {
        out.write_csv(
            &format!("_p{i:04}"),
            &["m", "detuning_hz", "power_w"],
            l.iter().map(|r| {
                vec![
                    Cell::Int(i64::from(r.m.get())),
                    Cell::Float(r.detuning_eff),
                    Cell::Float(r.power_out),
                ]
            }),
        )?;
    }
    out.write_csv(
        "_summary",
        &["fsr_offset_hz", "total_power"],
        totals
            .iter()
            .map(|p| vec![Cell::Float(p.offset), Cell::Float(p.total_power)]),
    )?;
    out.write_json(
        "",
        &json!({
            "reference_mode_number": scan.reference_mode_number,
            "comb_subdivision": scan.comb_subdivision,
            "config": cfg.snapshot(),
        }),
    )?;
    Ok(())
}

pub fn shift(cfg: &Config, a: &ShiftArgs, out: &mut OutputSet) -> CliResult<()> {
    let (cavity, atoms) = (cfg.cavity(), cfg.atoms());
    let m = mode(a.m)?;
    let u = collective_shift(&atoms, &cavity, m);
    let delta = mode_atom_detuning(&atoms, &cavity, m);
    let i_si = mw_cm2_to_si(a.intensity_mw_cm2.unwrap_or(0.0));
    let saturated = -cyclic(saturated_shift(&atoms, &cavity, delta, i_si)?);
    let rabi = mot_rabi_from_intensity(i_si, atoms.i_sat, atoms.gamma)?;
    let omega_c = angular(RB87_D2_HZ + cyclic(delta));
    let medium = MediumParams::from_ensemble(&atoms, &cavity, omega_c)?;
    let chi = chi_real(&medium, delta, rabi);
    out.write_json(
        "",
        &json!({
            "m": a.m,
            "u_m_hz": u,
            "saturated_u_m_hz": saturated,
            "chi": chi,
            "intensity_mw_cm2": a.intensity_mw_cm2.unwrap_or(0.0),
        }),
    )?;
    Ok(())
}

/// Mean-field model of mode `m`; `omega_m_hz` overrides the configured MOT drive.
pub fn lineshape_model(cfg: &Config, m: i32, omega_m_hz: Option<f64>) -> CliResult<LineshapeModel> {
    let (cavity, atoms, dyn_) = (cfg.cavity(), cfg.atoms(), cfg.dynamics());
    let omega = omega_m_hz.map_or(dyn_.omega_m, angular);
    Ok(LineshapeModel::for_mode(
        &atoms,
        &cavity,
        mode(m)?,
        Complex64::new(omega, 0.0),
        dyn_.eta_over_sqrt_n,
        dyn_.mot_offset_gamma * atoms.gamma,
    ))
}

/// Resonance (rad/s) expected once the MOT beam has set up its inversion.
pub fn expected_resonance(model: &LineshapeModel, rule: &StepRule) -> CliResult<f64> {
    let linear = model.linear_resonance();
    if model.omega_m == Complex64::new(0.0, 0.0) {
        return Ok(linear);
    }
    let sigma = model.mot_inversion(linear, rule)?;
    Ok(model.resonance_with_inversion(sigma))
}

pub(crate) const SWEEP_HEADER: [&str; 6] = [
    "probe_detuning_hz",
    "delta_i_c",
    "sigma_ee_avg",
    "alpha2_on",
    "alpha2_off",
    "flag_diverged",
];

pub(crate) fn sweep_rows(r: &SweepResult) -> impl Iterator<Item = Vec<Cell>> + '_ {
    r.points.iter().map(|p| {
        vec![
            Cell::Float(cyclic(p.delta_c)),
            Cell::Float(p.delta_i_c),
            Cell::Float(p.sigma_ee_avg),
            Cell::Float(p.alpha2_on),
            Cell::Float(p.alpha2_off),
            Cell::Int(i64::from(p.diverged)),
        ]
    })
}

/// Up and/or down sweeps over `grid_hz` (increasing), run concurrently.
pub fn run_sweeps(
    model: &LineshapeModel,
    grid_hz: &[f64],
    choice: SweepChoice,
    rule: &StepRule,
) -> CliResult<(Option<SweepResult>, Option<SweepResult>)> {
    let up_grid: Vec<f64> = grid_hz.iter().map(|&f| angular(f)).collect();
    let down_grid: Vec<f64> = up_grid.iter().rev().copied().collect();
    let run = |dir: SweepDirection, grid: &[f64]| sweep_lineshape(model, grid, dir, rule);
    let (up, down) = match choice {
        SweepChoice::Up => (Some(run(SweepDirection::Up, &up_grid)?), None),
        SweepChoice::Down => (None, Some(run(SweepDirection::Down, &down_grid)?)),
        SweepChoice::Both => {
            let (u, d) = rayon::join(
                || run(SweepDirection::Up, &up_grid),
                || run(SweepDirection::Down, &down_grid),
            );
            (Some(u?), Some(d?))
        }
    };
    Ok((up, down))
}

pub fn bistability(cfg: &Config, a: &BistabilityArgs, out: &mut OutputSet) -> CliResult<()> {
    if a.points < 2 {
        return Err(CliError::Argument(
            "bistability needs at least 2 points".into(),
        ));
    }
    let model = lineshape_model(cfg, a.m, a.omega_m_hz)?;
    let rule = if a.fine {
        StepRule::default().halved()
    } else {
        StepRule::default()
    };
    let center = match a.center_hz {
        Some(c) => c,
        None => cyclic(expected_resonance(&model, &rule)?),
    };
    let span = a
        .span_hz
        .unwrap_or(16.0 * cfg.get("kappa_hz").unwrap_or(0.0));
    let grid = linspace(center - span / 2.0, center + span / 2.0, a.points);
    let (up, down) = run_sweeps(&model, &grid, a.sweep, &rule)?;
    let mut meta = json!({
        "m": a.m,
        "omega_m_hz": cyclic(model.omega_m.re),
        "center_hz": center,
        "span_hz": span,
        "linear_resonance_hz": cyclic(model.linear_resonance()),
    });
    for (name, r) in [("up", &up), ("down", &down)] {
        if let Some(r) = r {
            let suffix = if a.sweep == SweepChoice::Both {
                format!("_{name}")
            } else {
                String::new()
            };
            out.write_csv(&suffix, &SWEEP_HEADER, sweep_rows(r))?;
            meta[name] = json!({
                "max_delta_i_c": r.max_delta_i_c(),
                "max_sigma_ee": r.max_sigma_ee(),
                "peak_hz": r.peak().map(|p| cyclic(p.delta_c)),
                "diverged_points": r.points.iter().filter(|p| p.diverged).count(),
            });
        }
    }
    if let (Some(u), Some(d)) = (&up, &down) {
        meta["hysteresis_metric"] = json!(hysteresis_metric(u, d)?);
    }
    out.write_json("", &meta)?;
    Ok(())
}

pub fn transient(cfg: &Config, a: &TransientArgs, out: &mut OutputSet) -> CliResult<()> {
    let model = lineshape_model(cfg, a.m, a.omega_m_hz)?;
    let rule = StepRule::default();
    let probe = match a.probe_hz {
        Some(p) => angular(p),
        None => expected_resonance(&model, &rule)?,
    };
    let params = model.at(probe);
    let schedule = MotSchedule {
        t_on: a.t_on,
        t_off: a.t_off,
        t_end: a.t_end.unwrap_or(a.t_off + 100e-6),
        sample_interval: a.sample_interval,
    };
    let dt = rule.settings(&params).dt;
    let start = combcavity_core::meanfield::MeanFieldState::empty_cavity(&params);
    let (samples, _) = mot_transient(&params, &start, &schedule, dt)?;
    out.write_csv(
        "",
        &["time_s", "alpha2"],
        samples
            .iter()
            .map(|s| vec![Cell::Float(s.time), Cell::Float(s.alpha2)]),
    )?;
    out.write_json(
        "",
        &json!({
            "m": a.m,
            "probe_hz": cyclic(probe),
            "t_on": schedule.t_on,
            "t_off": schedule.t_off,
            "t_end": schedule.t_end,
        }),
    )?;
    Ok(())
}

/// Result of one oracle comparison.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct OracleReport {
    pub shift_formula_hz: f64,
    pub shift_oracle_hz: f64,
    pub rel_error: f64,
    /// Generator residual relative to the coupling norm.
    pub sw_residual: f64,
}

/// Lindblad dispersive shift of `n_atoms_q` atoms at `g0 = ratio * delta_a1`,
/// with the cavity and atomic decay rates of `cfg`.
pub fn oracle_compare(cfg: &Config, ratio: f64, n_atoms_q: usize) -> CliResult<OracleReport> {
    let (cavity, atoms) = (cfg.cavity(), cfg.atoms());
    let spec = HilbertSpec::new(n_atoms_q, 2, 1)?;
    let delta = atoms.delta_a1;
    let g0 = ratio * delta.abs();
    let expect = n_atoms_q as f64 * g0 * g0 / delta;
    let params = QuantumParams::single(
        g0,
        0.1 * cavity.kappa / 2.0,
        cavity.kappa,
        atoms.gamma,
        QuantumLine {
            delta_c: expect,
            delta_a_mode: delta,
        },
    );
    let scan: Vec<f64> = (-6..=6)
        .map(|k| expect + cavity.kappa * f64::from(k) / 16.0)
        .collect();
    let shift = dispersive_shift_extract(&spec, &params, &scan)?;
    let sw = sw_generator_residual(&spec, &params, Frame::Static)?;
    Ok(OracleReport {
        shift_formula_hz: cyclic(expect),
        shift_oracle_hz: cyclic(shift),
        rel_error: if expect != 0.0 {
            ((shift - expect) / expect).abs()
        } else {
            shift.abs()
        },
        sw_residual: if sw.coupling_norm > 0.0 {
            sw.residual / sw.coupling_norm
        } else {
            sw.residual
        },
    })
}

pub fn oracle_validate(cfg: &Config, a: &OracleArgs, out: &mut OutputSet) -> CliResult<()> {
    let report = oracle_compare(cfg, a.g0_over_delta, a.n_atoms_q)?;
    out.write_json("", &report)?;
    Ok(())
}

/// Steady state of the MOT-driven model at `delta_c`, for transient starts.
pub fn steady_state_at(
    model: &LineshapeModel,
    delta_c: f64,
    rule: &StepRule,
) -> CliResult<combcavity_core::meanfield::SteadyAverages> {
    let p = model.at(delta_c);
    let start = combcavity_core::meanfield::MeanFieldState::empty_cavity(&p);
    Ok(integrate_to_steady(&p, &start, &rule.settings(&p))?)
}
