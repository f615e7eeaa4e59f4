//! Single-mode mean-field dynamics with two drives: one comb line feeding the
//! cavity and the MOT cooling beam acting directly on the atoms.
//!
//! Variables are normalized per atom: `alpha = <a> / sqrt(N)`, and
//! `sigma_ij = <sigma_ij> / N`. The equations of motion are
//!
//! ```text
//! d alpha / dt    = (i dc - kappa/2) alpha - i gN sigma_ge + eta/sqrt(N)
//! d sigma_ee / dt = -Gamma sigma_ee + [i (gN alpha* + OmM* e^{-i dM t}) sigma_ge + h.c.]
//! d sigma_eg / dt = -(i da + Gamma/2) sigma_eg + i (gN alpha* + OmM* e^{-i dM t}) (1 - 2 sigma_ee)
//! ```
//!
//! with `sigma_ge = conj(sigma_eg)`, `dc` the probe-cavity, `da` the
//! probe-atom and `dM` the probe-MOT detuning. Integration is fixed-step RK4
//! in time units of `1/Gamma`; averages are taken over an integer number of
//! probe-MOT beat periods so the beat does not leak into them.

use core::f64::consts::PI;
use core::ops::{Add, Mul};

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::model::{mode_atom_detuning, AtomEnsembleSpec, CavitySpec, ModeIndex};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Rates of the driven single-mode model, all in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldParams {
    /// Collective coupling `sqrt(N) g0`.
    pub g_n: f64,
    pub kappa: f64,
    pub gamma: f64,
    /// Probe minus cavity.
    pub delta_c: f64,
    /// Probe minus atom.
    pub delta_a: f64,
    /// Probe minus MOT beam.
    pub delta_m: f64,
    /// MOT Rabi frequency; its phase only shifts the beat.
    pub omega_m: Complex64,
    /// Cavity drive per root atom, `eta / sqrt(N)`.
    pub eta_over_sqrt_n: f64,
}

impl MeanFieldParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) {
            return Err(invalid("kappa", "must be positive"));
        }
        if !(self.gamma > 0.0) {
            return Err(invalid("gamma", "must be positive"));
        }
        if !(self.g_n >= 0.0) {
            return Err(invalid("g_n", "must be non-negative"));
        }
        let finite = [
            self.delta_c,
            self.delta_a,
            self.delta_m,
            self.eta_over_sqrt_n,
        ]
        .iter()
        .all(|v| v.is_finite())
            && self.omega_m.is_finite();
        if !finite {
            return Err(invalid("detuning", "must be finite"));
        }
        Ok(())
    }

    fn mot_active(&self) -> bool {
        self.omega_m != Complex64::new(0.0, 0.0)
    }

    /// Fastest rate in the problem; sets the step size.
    pub fn fastest_rate(&self) -> f64 {
        [
            self.delta_a.abs(),
            self.delta_m.abs(),
            self.kappa,
            self.gamma,
            self.g_n,
            self.omega_m.norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Peak per-atom population of the empty cavity on resonance, `(eta' / (kappa/2))^2`.
    pub fn empty_peak_population(&self) -> f64 {
        let a = self.eta_over_sqrt_n / (self.kappa / 2.0);
        a * a
    }

    fn scaled(&self) -> Scaled {
        let g = self.gamma;
        Scaled {
            g_n: self.g_n / g,
            kappa: self.kappa / g,
            delta_c: self.delta_c / g,
            delta_a: self.delta_a / g,
            delta_m: self.delta_m / g,
            omega_conj: self.omega_m.conj() / g,
            eta: self.eta_over_sqrt_n / g,
        }
    }
}

/// Per-atom mean-field state. Also used as the tangent vector for derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldState {
    pub alpha: Complex64,
    pub sigma_ee: f64,
    pub sigma_eg: Complex64,
}

impl MeanFieldState {
    pub const GROUND: Self = Self {
        alpha: Complex64 { re: 0.0, im: 0.0 },
        sigma_ee: 0.0,
        sigma_eg: Complex64 { re: 0.0, im: 0.0 },
    };

    /// Atoms in the ground state, cavity at its driven empty-cavity fixed point.
    pub fn empty_cavity(params: &MeanFieldParams) -> Self {
        Self {
            alpha: Complex64::new(params.eta_over_sqrt_n, 0.0)
                / Complex64::new(params.kappa / 2.0, -params.delta_c),
            ..Self::GROUND
        }
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.is_finite() && self.sigma_ee.is_finite() && self.sigma_eg.is_finite()
    }

    #[inline]
    pub fn alpha2(&self) -> f64 {
        self.alpha.norm_sqr()
    }
}

impl Add for MeanFieldState {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self {
            alpha: self.alpha + o.alpha,
            sigma_ee: self.sigma_ee + o.sigma_ee,
            sigma_eg: self.sigma_eg + o.sigma_eg,
        }
    }
}

impl Mul<f64> for MeanFieldState {
    type Output = Self;
    #[inline]
    fn mul(self, k: f64) -> Self {
        Self {
            alpha: self.alpha * k,
            sigma_ee: self.sigma_ee * k,
            sigma_eg: self.sigma_eg * k,
        }
    }
}

/// Rates divided by Gamma; `gamma` is 1 in these units.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    g_n: f64,
    kappa: f64,
    delta_c: f64,
    delta_a: f64,
    delta_m: f64,
    omega_conj: Complex64,
    eta: f64,
}

/// Right-hand side in scaled units. `mot` is `OmM* e^{-i dM t}` already
/// evaluated (zero while the beam is off).
#[inline(always)]
fn derivative(s: &MeanFieldState, p: &Scaled, mot: Complex64) -> MeanFieldState {
    let sigma_ge = s.sigma_eg.conj();
    let field = s.alpha.conj() * p.g_n + mot;
    let d_alpha = Complex64::new(-p.kappa / 2.0, p.delta_c) * s.alpha - I * p.g_n * sigma_ge
        + Complex64::new(p.eta, 0.0);
    let pump = I * field * sigma_ge;
    let d_ee = pump + pump.conj();
    debug_assert!(d_ee.im.abs() <= 1e-12 * (1.0 + d_ee.re.abs()));
    let d_eg = -Complex64::new(0.5, p.delta_a) * s.sigma_eg + I * field * (1.0 - 2.0 * s.sigma_ee);
    MeanFieldState {
        alpha: d_alpha,
        sigma_ee: -s.sigma_ee + d_ee.re,
        sigma_eg: d_eg,
    }
}

/// Time derivative of the state at time `t` (s), in SI units.
pub fn rhs(state: &MeanFieldState, params: &MeanFieldParams, t: f64) -> Result<MeanFieldState> {
    if !state.is_finite() {
        return Err(Error::Diverged { time: t });
    }
    let p = params.scaled();
    let mot = p.omega_conj * Complex64::from_polar(1.0, -params.delta_m * t);
    Ok(derivative(state, &p, mot) * params.gamma)
}

/// Step size, transient length and averaging window of one integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSettings {
    /// Upper bound on the step (s); the actual step is shortened so that
    /// the averaging window holds an integer number of steps.
    pub dt: f64,
    pub t_transient: f64,
    pub n_avg_periods: u32,
}

/// How [`IntegrationSettings`] are derived from the rates of a parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRule {
    /// `dt = dt_factor / fastest_rate`.
    pub dt_factor: f64,
    /// `t_transient = transient_factor * max(1/kappa, 1/Gamma)`.
    pub transient_factor: f64,
    pub n_avg_periods: u32,
}

impl Default for StepRule {
    fn default() -> Self {
        Self {
            dt_factor: 0.02,
            transient_factor: 20.0,
            n_avg_periods: 50,
        }
    }
}

impl StepRule {
    pub fn settings(&self, params: &MeanFieldParams) -> IntegrationSettings {
        IntegrationSettings {
            dt: self.dt_factor / params.fastest_rate(),
            t_transient: self.transient_factor * (1.0 / params.kappa).max(1.0 / params.gamma),
            n_avg_periods: self.n_avg_periods,
        }
    }

    /// Same rule with half the step.
    pub fn halved(&self) -> Self {
        Self {
            dt_factor: self.dt_factor / 2.0,
            ..*self
        }
    }
}

impl IntegrationSettings {
    pub fn for_params(params: &MeanFieldParams) -> Self {
        StepRule::default().settings(params)
    }

    fn check(&self, params: &MeanFieldParams) -> Result<()> {
        let dt_max = 0.02 / params.fastest_rate();
        if !(self.dt > 0.0 && self.dt <= dt_max * (1.0 + 1e-12)) {
            return Err(invalid("dt", "must satisfy 0 < dt <= 0.02 / fastest rate"));
        }
        let t_min = 10.0 * (1.0 / params.kappa).max(1.0 / params.gamma);
        if !(self.t_transient >= t_min * (1.0 - 1e-12)) {
            return Err(invalid(
                "t_transient",
                "must be at least 10 max(1/kappa, 1/Gamma)",
            ));
        }
        if self.n_avg_periods == 0 {
            return Err(invalid("n_avg_periods", "must be at least 1"));
        }
        Ok(())
    }
}

/// Fixed-step RK4 propagator in scaled time. The MOT phasor is advanced by
/// exact rotations and re-anchored to `exp(-i dM t)` every 1024 steps.
struct Propagator {
    p: Scaled,
    h: f64,
    half_turn: Complex64,
    step: u64,
    phasor: Complex64,
}

impl Propagator {
    fn new(params: &MeanFieldParams, dt: f64) -> Self {
        let p = params.scaled();
        let h = dt * params.gamma;
        Self {
            half_turn: Complex64::from_polar(1.0, -p.delta_m * h / 2.0),
            p,
            h,
            step: 0,
            phasor: Complex64::new(1.0, 0.0),
        }
    }

    /// Elapsed time in seconds.
    fn time(&self, gamma: f64) -> f64 {
        self.step as f64 * self.h / gamma
    }

    #[inline]
    fn advance(&mut self, s: &mut MeanFieldState, mot_on: bool) {
        let h = self.h;
        let drive = if mot_on {
            self.p.omega_conj
        } else {
            Complex64::new(0.0, 0.0)
        };
        let m0 = drive * self.phasor;
        let mid = self.phasor * self.half_turn;
        let m1 = drive * mid;
        let end = mid * self.half_turn;
        let m2 = drive * end;

        let k1 = derivative(s, &self.p, m0);
        let k2 = derivative(&(*s + k1 * (h / 2.0)), &self.p, m1);
        let k3 = derivative(&(*s + k2 * (h / 2.0)), &self.p, m1);
        let k4 = derivative(&(*s + k3 * h), &self.p, m2);
        *s = *s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);

        self.step += 1;
        self.phasor = if self.step % 1024 == 0 {
            Complex64::from_polar(1.0, -self.p.delta_m * self.h * self.step as f64)
        } else {
            end
        };
    }
}

fn check_finite(s: &MeanFieldState, time: f64) -> Result<()> {
    if s.is_finite() && s.alpha.norm_sqr() < 1e12 {
        Ok(())
    } else {
        Err(Error::Diverged { time })
    }
}

/// Time averages over the window following the transient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyAverages {
    pub alpha2_avg: f64,
    pub sigma_ee_avg: f64,
    /// Largest instantaneous `sigma_ee` inside the window.
    pub sigma_ee_max: f64,
    /// Largest violation of `|sigma_eg|^2 <= sigma_ee (1 - sigma_ee)` seen
    /// on the sampled trajectory (0 when the bound always held).
    pub bloch_excess: f64,
    pub final_state: MeanFieldState,
    /// Averaging window length (s).
    pub window: f64,
}

/// Integrates through the transient and averages over `n_avg_periods`
/// probe-MOT beat periods (`n_avg_periods / kappa` without MOT beam).
pub fn integrate_to_steady(
    params: &MeanFieldParams,
    initial: &MeanFieldState,
    settings: &IntegrationSettings,
) -> Result<SteadyAverages> {
    params.validate()?;
    settings.check(params)?;
    let n = f64::from(settings.n_avg_periods);
    let beat = params.mot_active() && params.delta_m != 0.0;
    let (dt, window_steps) = if beat {
        let period = 2.0 * PI / params.delta_m.abs();
        let per_period = libm::ceil(period / settings.dt) as u64;
        (
            period / per_period as f64,
            per_period * u64::from(settings.n_avg_periods),
        )
    } else {
        let window = n / params.kappa;
        let steps = libm::ceil(window / settings.dt) as u64;
        (window / steps as f64, steps)
    };
    let transient_steps = libm::ceil(settings.t_transient / dt) as u64;

    // Without drives the ground state is an exact fixed point of every step.
    if *initial == MeanFieldState::GROUND && params.eta_over_sqrt_n == 0.0 && !params.mot_active() {
        return Ok(SteadyAverages {
            alpha2_avg: 0.0,
            sigma_ee_avg: 0.0,
            sigma_ee_max: 0.0,
            bloch_excess: 0.0,
            final_state: MeanFieldState::GROUND,
            window: window_steps as f64 * dt,
        });
    }

    let mut prop = Propagator::new(params, dt);
    let mut s = *initial;
    for i in 0..transient_steps {
        prop.advance(&mut s, true);
        if i % 256 == 0 {
            check_finite(&s, prop.time(params.gamma))?;
        }
    }
    check_finite(&s, prop.time(params.gamma))?;

    let (mut a2, mut ee, mut ee_max, mut excess) = (0.0, 0.0, f64::NEG_INFINITY, 0.0f64);
    for _ in 0..window_steps {
        prop.advance(&mut s, true);
        a2 += s.alpha.norm_sqr();
        ee += s.sigma_ee;
        ee_max = ee_max.max(s.sigma_ee);
        excess = excess.max(s.sigma_eg.norm_sqr() - s.sigma_ee * (1.0 - s.sigma_ee));
    }
    check_finite(&s, prop.time(params.gamma))?;
    let w = window_steps as f64;
    Ok(SteadyAverages {
        alpha2_avg: a2 / w,
        sigma_ee_avg: ee / w,
        sigma_ee_max: ee_max,
        bloch_excess: excess,
        final_state: s,
        window: w * dt,
    })
}

/// Comb-on minus comb-off cavity population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaIc {
    /// `(<|alpha|^2>_on - <|alpha|^2>_off) / empty-cavity peak`.
    pub value: f64,
    pub on: SteadyAverages,
    pub off: SteadyAverages,
}

/// Difference in mean cavity population with the comb line on and off,
/// normalized to the empty-cavity resonant population. The two branches are
/// integrated from their own initial states so that sweeps can continue
/// each branch separately.
pub fn delta_i_c(
    params: &MeanFieldParams,
    initial_on: &MeanFieldState,
    initial_off: &MeanFieldState,
    settings: &IntegrationSettings,
) -> Result<DeltaIc> {
    let on = integrate_to_steady(params, initial_on, settings)?;
    let off_params = MeanFieldParams {
        eta_over_sqrt_n: 0.0,
        ..*params
    };
    let off = integrate_to_steady(&off_params, initial_off, settings)?;
    let anchor = params.empty_peak_population();
    let diff = on.alpha2_avg - off.alpha2_avg;
    Ok(DeltaIc {
        value: if anchor > 0.0 { diff / anchor } else { diff },
        on,
        off,
    })
}

/// One cavity mode probed by a single comb line while the MOT beam drives
/// the atoms. The probe-atom and probe-MOT detunings follow the probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineshapeModel {
    /// Collective coupling (rad/s).
    pub g_n: f64,
    pub kappa: f64,
    pub gamma: f64,
    /// Cavity-atom detuning of the probed mode (rad/s).
    pub delta_a_mode: f64,
    /// `delta_m - delta_a`, i.e. atom minus MOT beam (rad/s).
    pub mot_offset: f64,
    pub omega_m: Complex64,
    pub eta_over_sqrt_n: f64,
}

impl LineshapeModel {
    /// Mode `m` of the given ensemble and cavity; the MOT beam sits
    /// `mot_offset` below the atomic resonance.
    pub fn for_mode(
        atoms: &AtomEnsembleSpec,
        cavity: &CavitySpec,
        m: ModeIndex,
        omega_m: Complex64,
        eta_over_sqrt_n: f64,
        mot_offset: f64,
    ) -> Self {
        Self {
            g_n: libm::sqrt(atoms.n_atoms) * cavity.g0,
            kappa: cavity.kappa,
            gamma: atoms.gamma,
            delta_a_mode: mode_atom_detuning(atoms, cavity, m),
            mot_offset,
            omega_m,
            eta_over_sqrt_n,
        }
    }

    /// Parameters with the probe detuned by `delta_c` from the empty mode.
    pub fn at(&self, delta_c: f64) -> MeanFieldParams {
        let delta_a = self.delta_a_mode + delta_c;
        MeanFieldParams {
            g_n: self.g_n,
            kappa: self.kappa,
            gamma: self.gamma,
            delta_c,
            delta_a,
            delta_m: delta_a + self.mot_offset,
            omega_m: self.omega_m,
            eta_over_sqrt_n: self.eta_over_sqrt_n,
        }
    }

    /// Linear-regime resonance `delta_c` solving `delta_c (delta_a_mode + delta_c) = gN^2`
    /// on the branch continuous with the dispersive shift.
    pub fn linear_resonance(&self) -> f64 {
        self.resonance_with_inversion(0.0)
    }

    /// As [`linear_resonance`](Self::linear_resonance) with the coupling
    /// reduced by a population inversion, `gN^2 (1 - 2 sigma_ee)`.
    pub fn resonance_with_inversion(&self, sigma_ee: f64) -> f64 {
        let d = self.delta_a_mode;
        let g2 = self.g_n * self.g_n * (1.0 - 2.0 * sigma_ee);
        // Root of x^2 + d x - g2 = 0 closest to g2 / d, in cancellation-free form.
        2.0 * g2 / (d + d.signum() * libm::sqrt(d * d + 4.0 * g2))
    }

    /// Excited fraction sustained by the MOT beam alone (comb off), with the
    /// probe frame placed at `delta_c`.
    pub fn mot_inversion(&self, delta_c: f64, rule: &StepRule) -> Result<f64> {
        let p = MeanFieldParams {
            eta_over_sqrt_n: 0.0,
            ..self.at(delta_c)
        };
        Ok(integrate_to_steady(&p, &MeanFieldState::GROUND, &rule.settings(&p))?.sigma_ee_avg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepDirection {
    Up,
    Down,
}

/// One probe detuning of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    /// Probe-cavity detuning (rad/s).
    pub delta_c: f64,
    pub delta_i_c: f64,
    pub sigma_ee_avg: f64,
    pub sigma_ee_max: f64,
    pub alpha2_on: f64,
    pub alpha2_off: f64,
    /// The integration diverged; values are NaN and the next point restarts
    /// from the empty-cavity state.
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub direction: SweepDirection,
    pub points: Vec<SweepPoint>,
    /// Branch states after the last point (comb on, comb off).
    pub final_states: (MeanFieldState, MeanFieldState),
}

impl SweepResult {
    pub fn max_delta_i_c(&self) -> f64 {
        self.points
            .iter()
            .filter(|p| !p.diverged)
            .map(|p| p.delta_i_c)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_sigma_ee(&self) -> f64 {
        self.points
            .iter()
            .filter(|p| !p.diverged)
            .map(|p| p.sigma_ee_avg)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Point of largest `delta_i_c`.
    pub fn peak(&self) -> Option<&SweepPoint> {
        self.points
            .iter()
            .filter(|p| !p.diverged)
            .fold(None, |best: Option<&SweepPoint>, p| match best {
                Some(b) if b.delta_i_c >= p.delta_i_c => best,
                _ => Some(p),
            })
    }
}

/// Continuation sweep of the probe detuning: each point starts from the
/// final state of the previous one, the first from the empty-cavity fixed
/// point. `probe_detunings` must be increasing for `Up` and decreasing for
/// `Down`. `on_point` is called after every point (for progress or
/// state capture).
pub fn sweep_lineshape_with(
    model: &LineshapeModel,
    probe_detunings: &[f64],
    direction: SweepDirection,
    rule: &StepRule,
    mut on_point: impl FnMut(&SweepPoint, &MeanFieldState, &MeanFieldState),
) -> Result<SweepResult> {
    let ordered = probe_detunings.windows(2).all(|w| match direction {
        SweepDirection::Up => w[0] < w[1],
        SweepDirection::Down => w[0] > w[1],
    });
    if !ordered {
        return Err(invalid(
            "probe_detunings",
            "not ordered along the sweep direction",
        ));
    }
    let fresh = |delta_c: f64| {
        let p = model.at(delta_c);
        (MeanFieldState::empty_cavity(&p), MeanFieldState::GROUND)
    };
    let mut points = Vec::with_capacity(probe_detunings.len());
    let mut state: Option<(MeanFieldState, MeanFieldState)> = None;
    for &delta_c in probe_detunings {
        let params = model.at(delta_c);
        let (on0, off0) = state.unwrap_or_else(|| fresh(delta_c));
        let settings = rule.settings(&params);
        let point = match delta_i_c(&params, &on0, &off0, &settings) {
            Ok(r) => {
                state = Some((r.on.final_state, r.off.final_state));
                SweepPoint {
                    delta_c,
                    delta_i_c: r.value,
                    sigma_ee_avg: r.on.sigma_ee_avg,
                    sigma_ee_max: r.on.sigma_ee_max,
                    alpha2_on: r.on.alpha2_avg,
                    alpha2_off: r.off.alpha2_avg,
                    diverged: false,
                }
            }
            Err(Error::Diverged { .. }) => {
                state = None;
                SweepPoint {
                    delta_c,
                    delta_i_c: f64::NAN,
                    sigma_ee_avg: f64::NAN,
                    sigma_ee_max: f64::NAN,
                    alpha2_on: f64::NAN,
                    alpha2_off: f64::NAN,
                    diverged: true,
                }
            }
            Err(e) => return Err(e),
        };
        let (on, off) = state.unwrap_or_else(|| fresh(delta_c));
        on_point(&point, &on, &off);
        points.push(point);
    }
    let last = probe_detunings.last().copied().unwrap_or(0.0);
    Ok(SweepResult {
        direction,
        points,
        final_states: state.unwrap_or_else(|| fresh(last)),
    })
}

/// [`sweep_lineshape_with`] without a callback.
pub fn sweep_lineshape(
    model: &LineshapeModel,
    probe_detunings: &[f64],
    direction: SweepDirection,
    rule: &StepRule,
) -> Result<SweepResult> {
    sweep_lineshape_with(model, probe_detunings, direction, rule, |_, _, _| {})
}

/// `n` probe detunings evenly spaced on `[lo, hi]`, ordered for `direction`.
pub fn sweep_grid(lo: f64, hi: f64, n: usize, direction: SweepDirection) -> Vec<f64> {
    let mut v: Vec<f64> = match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    };
    if direction == SweepDirection::Down {
        v.reverse();
    }
    v
}

/// Largest up/down disagreement in `delta_i_c`, relative to the largest
/// value of either sweep. Both sweeps must cover the same detunings.
pub fn hysteresis_metric(up: &SweepResult, down: &SweepResult) -> Result<f64> {
    if up.points.len() != down.points.len() {
        return Err(Error::GridMismatch);
    }
    let mut max_gap = 0.0f64;
    let mut scale = 0.0f64;
    for (a, b) in up.points.iter().zip(down.points.iter().rev()) {
        if a.delta_c != b.delta_c {
            return Err(Error::GridMismatch);
        }
        if a.diverged || b.diverged {
            continue;
        }
        max_gap = max_gap.max((a.delta_i_c - b.delta_i_c).abs());
        scale = scale.max(a.delta_i_c.abs()).max(b.delta_i_c.abs());
    }
    Ok(if scale > 0.0 { max_gap / scale } else { 0.0 })
}

/// When the MOT beam is on during a transient run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotSchedule {
    /// Beam switches on (s).
    pub t_on: f64,
    /// Beam switches off (s).
    pub t_off: f64,
    /// End of the run (s).
    pub t_end: f64,
    /// Each output sample averages `|alpha|^2` over this interval (s).
    pub sample_interval: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransientSample {
    /// End of the averaging interval (s).
    pub time: f64,
    pub alpha2: f64,
}

/// Cavity population while the MOT beam is switched on at `t_on` and off at
/// `t_off`, starting from `initial` at t = 0.
pub fn mot_transient(
    params: &MeanFieldParams,
    initial: &MeanFieldState,
    schedule: &MotSchedule,
    dt: f64,
) -> Result<(Vec<TransientSample>, MeanFieldState)> {
    params.validate()?;
    if !(dt > 0.0 && dt <= 0.02 / params.fastest_rate() * (1.0 + 1e-12)) {
        return Err(invalid("dt", "must satisfy 0 < dt <= 0.02 / fastest rate"));
    }
    if !(schedule.sample_interval > 0.0 && schedule.t_end > 0.0) {
        return Err(invalid(
            "schedule",
            "needs positive sample interval and end time",
        ));
    }
    let per_sample = libm::ceil(schedule.sample_interval / dt).max(1.0) as u64;
    let dt = schedule.sample_interval / per_sample as f64;
    let n_samples = libm::ceil(schedule.t_end / schedule.sample_interval) as u64;
    let mut prop = Propagator::new(params, dt);
    let mut s = *initial;
    let mut out = Vec::with_capacity(n_samples as usize);
    for _ in 0..n_samples {
        let mut acc = 0.0;
        for _ in 0..per_sample {
            let t = prop.time(params.gamma);
            let on = t >= schedule.t_on && t < schedule.t_off;
            prop.advance(&mut s, on);
            acc += s.alpha.norm_sqr();
        }
        let time = prop.time(params.gamma);
        check_finite(&s, time)?;
        out.push(TransientSample {
            time,
            alpha2: acc / per_sample as f64,
        });
    }
    Ok((out, s))
}
