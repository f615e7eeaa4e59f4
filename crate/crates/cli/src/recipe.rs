//! Figure-reproduction drivers. Each recipe applies its parameter
//! overrides to the loaded configuration, writes one CSV per curve and a
//! JSON summary of metrics with their expected ranges.

use clap::ValueEnum;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use combcavity_core::fit::fit_lorentzian;
use combcavity_core::meanfield::{hysteresis_metric, StepRule, SweepResult};
use combcavity_core::model::ModeIndex;
use combcavity_core::spectrum::{
    atom_scan_point, collective_shift, fsr_scan, normalize_family, synthesize, FsrScanSpec,
    Spectrum,
};
use combcavity_core::units::cyclic;

use crate::cli::SweepChoice;
use crate::commands::{
    lineshape_model, linspace, run_sweeps, spectrum_rows, sweep_rows, SPECTRUM_HEADER, SWEEP_HEADER,
};
use crate::config::Config;
use crate::error::CliResult;
use crate::output::{Cell, OutputSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum)]
pub enum RecipeId {
    Fig2,
    Fig3a,
    Fig3b,
    Fig4,
    #[value(name = "figS3b")]
    FigS3b,
}

impl RecipeId {
    pub fn name(self) -> &'static str {
        match self {
            RecipeId::Fig2 => "fig2",
            RecipeId::Fig3a => "fig3a",
            RecipeId::Fig3b => "fig3b",
            RecipeId::Fig4 => "fig4",
            RecipeId::FigS3b => "figS3b",
        }
    }

    /// Parameters the recipe pins on top of the loaded configuration.
    pub fn overrides(self) -> &'static [(&'static str, f64)] {
        match self {
            RecipeId::Fig2 => &[("delta_f0_hz", -220e3), ("epsilon_hz", 18.0)],
            RecipeId::Fig3a => &[("delta_f0_hz", 0.0), ("epsilon_hz", 18.0), ("n_atoms", 0.0)],
            RecipeId::Fig3b => &[
                ("delta_f0_hz", 160e3),
                ("epsilon_hz", 18.0),
                ("n_atoms", 0.0),
            ],
            RecipeId::Fig4 => &[("n_atoms", 3.7e5), ("kappa_hz", 240e3), ("fsr_hz", 1.932e9)],
            RecipeId::FigS3b => &[("delta_f0_hz", 0.0), ("n_atoms", 0.0)],
        }
    }
}

/// A computed metric and the closed range it is expected to fall in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Metric {
    fn new(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            value,
            lo,
            hi,
        }
    }

    pub fn passes(&self) -> bool {
        self.value >= self.lo && self.value <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecipeReport {
    pub recipe: &'static str,
    pub metrics: Vec<Metric>,
}

impl RecipeReport {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics
            .iter()
            .find(|m| m.name == name)
            .map(|m| m.value)
    }

    /// One line per metric outside its range.
    pub fn failures(&self) -> Vec<String> {
        self.metrics
            .iter()
            .filter(|m| !m.passes())
            .map(|m| format!("{}: {} not in [{}, {}]", m.name, m.value, m.lo, m.hi))
            .collect()
    }
}

/// Runs a recipe, writing its curves and `<stem>.json` summary into `out`.
pub fn run_recipe(id: RecipeId, base: &Config, out: &mut OutputSet) -> CliResult<RecipeReport> {
    let cfg = base.with(id.overrides())?;
    let metrics = match id {
        RecipeId::Fig2 => fig2(&cfg, out)?,
        RecipeId::Fig3a => empty_cavity_peaks(&cfg, out, false)?,
        RecipeId::Fig3b => empty_cavity_peaks(&cfg, out, true)?,
        RecipeId::Fig4 => fig4(&cfg, out)?,
        RecipeId::FigS3b => fig_s3b(&cfg, out)?,
    };
    let report = RecipeReport {
        recipe: id.name(),
        metrics,
    };
    out.write_json(
        "",
        &json!({
            "recipe": report.recipe,
            "overrides": id.overrides().iter().map(|(k, v)| (k.to_string(), *v)).collect::<std::collections::BTreeMap<_, _>>(),
            "metrics": report.metrics,
        }),
    )?;
    Ok(report)
}

pub const FIG2_ATOMS: [f64; 3] = [0.0, 6e3, 1.2e5];

fn fig2(cfg: &Config, out: &mut OutputSet) -> CliResult<Vec<Metric>> {
    let (cavity, comb, atoms, osa) = (cfg.cavity(), cfg.comb(), cfg.atoms(), cfg.osa());
    let empty = synthesize(&cavity, &comb, &atoms.with_atoms(0.0), &osa)?;
    let points = FIG2_ATOMS
        .par_iter()
        .map(|&n| atom_scan_point(&cavity, &comb, &atoms, n, &osa, &empty))
        .collect::<Result<Vec<_>, _>>()?;
    let mut family: Vec<Spectrum> = points.iter().map(|p| p.spectrum.clone()).collect();
    normalize_family(&mut family);
    for (p, s) in points.iter().zip(&family) {
        out.write_csv(
            &format!("_n{}", p.n_atoms),
            &SPECTRUM_HEADER,
            spectrum_rows(s),
        )?;
    }
    out.write_csv(
        "_counts",
        &["n_atoms", "mode_count"],
        points
            .iter()
            .map(|p| vec![Cell::Float(p.n_atoms), Cell::Int(i64::from(p.count))]),
    )?;
    let c: Vec<f64> = points.iter().map(|p| f64::from(p.count)).collect();
    Ok(vec![
        Metric::new("mode_count_n0", c[0], 0.0, 0.0),
        Metric::new("mode_count_n6e3", c[1], 1.0, 100.0),
        Metric::new("mode_count_n1.2e5", c[2], 101.0, f64::INFINITY),
    ])
}

/// Positions (Hz) of the largest maximum on each side of zero.
fn side_peaks(s: &Spectrum) -> (f64, f64) {
    let neg = s.argmax_in(f64::NEG_INFINITY, 0.0).unwrap_or(f64::NAN);
    let pos = s.argmax_in(0.0, f64::INFINITY).unwrap_or(f64::NAN);
    (neg, pos)
}

fn empty_cavity_peaks(cfg: &Config, out: &mut OutputSet, split: bool) -> CliResult<Vec<Metric>> {
    let mut family = [synthesize(
        &cfg.cavity(),
        &cfg.comb(),
        &cfg.atoms(),
        &cfg.osa(),
    )?];
    normalize_family(&mut family);
    let s = &family[0];
    out.write_csv("", &SPECTRUM_HEADER, spectrum_rows(s))?;
    if split {
        let (neg, pos) = side_peaks(s);
        Ok(vec![
            Metric::new("peak_negative_hz", neg, -270e9, -250e9),
            Metric::new("peak_positive_hz", pos, 250e9, 270e9),
        ])
    } else {
        let peak = s
            .argmax_in(f64::NEG_INFINITY, f64::INFINITY)
            .unwrap_or(f64::NAN);
        Ok(vec![Metric::new("peak_hz", peak, -20e9, 20e9)])
    }
}

/// Grid (Hz) for the m = 1 scan with the MOT beam on.
pub const FIG4_MOT_GRID: (f64, f64, usize) = (8.0e6, 11.0e6, 31);
/// Half-width (Hz) of the m = ±2 scans around the expected shift.
pub const FIG4_LINEAR_HALF_SPAN: f64 = 0.6e6;
pub const FIG4_LINEAR_POINTS: usize = 25;

struct Fig4Curve {
    label: &'static str,
    m: i32,
    omega_m_hz: f64,
    grid: Vec<f64>,
    choice: SweepChoice,
}

fn fig4(cfg: &Config, out: &mut OutputSet) -> CliResult<Vec<Metric>> {
    let rule = StepRule::default();
    let kappa_hz = cyclic(cfg.cavity().kappa);
    let omega_on = cyclic(cfg.dynamics().omega_m);
    let linear = |m: i32| -> CliResult<f64> {
        Ok(cyclic(
            lineshape_model(cfg, m, Some(0.0))?.linear_resonance(),
        ))
    };
    let r1 = linear(1)?;
    let mut curves = vec![
        Fig4Curve {
            label: "m1_off",
            m: 1,
            omega_m_hz: 0.0,
            grid: linspace(r1 - 2.0 * kappa_hz, r1 + 2.0 * kappa_hz, 21),
            choice: SweepChoice::Up,
        },
        Fig4Curve {
            label: "m1_on",
            m: 1,
            omega_m_hz: omega_on,
            grid: linspace(FIG4_MOT_GRID.0, FIG4_MOT_GRID.1, FIG4_MOT_GRID.2),
            choice: SweepChoice::Both,
        },
    ];
    for (label, m) in [("m2", 2), ("m-2", -2)] {
        let c = linear(m)?;
        curves.push(Fig4Curve {
            label,
            m,
            omega_m_hz: 0.0,
            grid: linspace(
                c - FIG4_LINEAR_HALF_SPAN,
                c + FIG4_LINEAR_HALF_SPAN,
                FIG4_LINEAR_POINTS,
            ),
            choice: SweepChoice::Up,
        });
    }
    let results = curves
        .par_iter()
        .map(|c| {
            let model = lineshape_model(cfg, c.m, Some(c.omega_m_hz))?;
            run_sweeps(&model, &c.grid, c.choice, &rule)
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut metrics = Vec::new();
    for (c, (up, down)) in curves.iter().zip(&results) {
        for (dir, r) in [("up", up), ("down", down)] {
            if let Some(r) = r {
                out.write_csv(&format!("_{}_{dir}", c.label), &SWEEP_HEADER, sweep_rows(r))?;
            }
        }
    }
    let up = |i: usize| results[i].0.as_ref().expect("up sweep requested");
    metrics.push(Metric::new(
        "m1_off_max_sigma_ee",
        up(0).max_sigma_ee(),
        0.0025 * 0.7,
        0.0025 * 1.3,
    ));
    metrics.push(Metric::new(
        "m1_on_max_sigma_ee",
        up(1).max_sigma_ee(),
        0.12,
        0.30,
    ));
    let down = results[1].1.as_ref().expect("down sweep requested");
    metrics.push(Metric::new(
        "m1_on_hysteresis",
        hysteresis_metric(up(1), down)?,
        0.1,
        f64::INFINITY,
    ));
    let atoms = cfg.atoms();
    let cavity = cfg.cavity();
    for (i, m) in [(2, 2), (3, -2)] {
        let u = collective_shift(&atoms, &cavity, ModeIndex::new(m)?);
        let (center, fwhm, r2) = lorentz_metrics(up(i), kappa_hz);
        let tag = curves[i].label;
        metrics.push(Metric::new(
            format!("{tag}_center_over_u"),
            center / u,
            0.95,
            1.05,
        ));
        metrics.push(Metric::new(
            format!("{tag}_fwhm_over_kappa"),
            fwhm,
            0.9,
            1.1,
        ));
        metrics.push(Metric::new(format!("{tag}_fit_r2"), r2, 0.99, 1.0));
    }
    Ok(metrics)
}

/// Lorentzian fit of a delta-I curve: centre (Hz), width in units of kappa, R².
pub fn lorentz_metrics(r: &SweepResult, kappa_hz: f64) -> (f64, f64, f64) {
    let x: Vec<f64> = r.points.iter().map(|p| cyclic(p.delta_c)).collect();
    let y: Vec<f64> = r.points.iter().map(|p| p.delta_i_c).collect();
    match fit_lorentzian(&x, &y, 0.05) {
        Ok(f) => (f.center, f.fwhm / kappa_hz, f.r_squared),
        Err(_) => (f64::NAN, f64::NAN, f64::NAN),
    }
}

/// FSR offsets (Hz) of the dispersion comparison.
pub const FIG_S3B_SPAN: (f64, f64, usize) = (-500.0, 500.0, 201);

fn fig_s3b(cfg: &Config, out: &mut OutputSet) -> CliResult<Vec<Metric>> {
    let offsets = linspace(FIG_S3B_SPAN.0, FIG_S3B_SPAN.1, FIG_S3B_SPAN.2);
    let eps = cfg.get("epsilon_hz").unwrap_or(18.0);
    let variants = [("dispersive", eps), ("dispersion_free", 0.0)];
    let curves = variants
        .par_iter()
        .map(|&(_, e)| {
            let c = cfg.with(&[("epsilon_hz", e)])?;
            let cavity = c.cavity();
            Ok(fsr_scan(
                &cavity,
                &c.comb(),
                &c.atoms(),
                &offsets,
                &FsrScanSpec::for_cavity(&cavity),
            )?)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut peaks = [0.0; 2];
    for (i, ((name, _), curve)) in variants.iter().zip(&curves).enumerate() {
        out.write_csv(
            &format!("_{name}"),
            &["fsr_offset_hz", "total_power"],
            curve
                .iter()
                .map(|p| vec![Cell::Float(p.offset), Cell::Float(p.total_power)]),
        )?;
        peaks[i] = curve.iter().map(|p| p.total_power).fold(0.0, f64::max);
    }
    Ok(vec![Metric::new(
        "dispersive_over_free_peak",
        peaks[0] / peaks[1],
        0.0,
        1.0 - 1e-6,
    )])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip_through_clap() {
        for id in RecipeId::value_variants() {
            let parsed = RecipeId::from_str(id.name(), false).unwrap();
            assert_eq!(parsed, *id);
        }
    }

    #[test]
    fn metric_range_is_closed_and_rejects_nan() {
        assert!(Metric::new("a", 1.0, 1.0, 2.0).passes());
        assert!(!Metric::new("a", f64::NAN, 0.0, 2.0).passes());
        let r = RecipeReport {
            recipe: "x",
            metrics: vec![
                Metric::new("a", 3.0, 0.0, 1.0),
                Metric::new("b", 0.5, 0.0, 1.0),
            ],
        };
        assert_eq!(r.failures().len(), 1);
        assert_eq!(r.metric("b"), Some(0.5));
    }
}
