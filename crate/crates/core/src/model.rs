//! Resonator, comb and ensemble parameters plus the detuning bookkeeping
//! shared by every model.
//!
//! Frequencies stored in Hz carry no suffix in their doc; angular rates are
//! documented as rad/s. Nothing here tracks absolute optical frequencies:
//! every optical quantity is an offset from the atomic transition.

use core::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::units::{angular, FS2};

/// Signed, nonzero longitudinal mode index. `m = 1` (`m = -1`) labels the
/// first cavity mode blue (red) of the atomic transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeIndex(i32);

impl ModeIndex {
    pub fn new(m: i32) -> Result<Self> {
        if m == 0 {
            Err(Error::InvalidIndex)
        } else {
            Ok(Self(m))
        }
    }

    #[inline]
    pub fn get(self) -> i32 {
        self.0
    }

    /// Number of FSR steps between this mode and `m = 1`.
    #[inline]
    pub fn steps_from_first(self) -> i64 {
        let m = i64::from(self.0);
        if m > 0 {
            m - 1
        } else {
            m
        }
    }

    /// All indices in `[-half, half]` except 0, in increasing order.
    pub fn span(half: u32) -> impl DoubleEndedIterator<Item = ModeIndex> + Clone {
        let h = half as i32;
        (-h..=h).filter(|&m| m != 0).map(ModeIndex)
    }
}

impl TryFrom<i32> for ModeIndex {
    type Error = Error;
    fn try_from(m: i32) -> Result<Self> {
        Self::new(m)
    }
}

/// Fabry-Perot resonator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavitySpec {
    /// Free spectral range (Hz).
    pub fsr: f64,
    /// Field energy decay rate (rad/s).
    pub kappa: f64,
    pub finesse: f64,
    /// Change of the FSR between neighbouring modes (Hz).
    pub epsilon: f64,
    /// Mirror reflectivity product `sqrt(r1 r2)`.
    pub mirror_r: f64,
    /// Mirror amplitude transmission.
    pub mirror_t: f64,
    /// Single-atom coupling (rad/s).
    pub g0: f64,
    /// Global multiplier applied to transmitted power (bare-cavity losses).
    pub loss_factor: f64,
}

impl Default for CavitySpec {
    fn default() -> Self {
        Self {
            fsr: 1.93e9,
            kappa: angular(150e3),
            finesse: 1.2e4,
            epsilon: 18.0,
            mirror_r: 0.9998,
            mirror_t: 0.0125,
            g0: angular(140e3),
            loss_factor: 0.125,
        }
    }
}

impl CavitySpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.fsr > 0.0) {
            return Err(invalid("fsr", "must be positive"));
        }
        if !(self.kappa > 0.0) {
            return Err(invalid("kappa", "must be positive"));
        }
        if !(self.finesse > 0.0) {
            return Err(invalid("finesse", "must be positive"));
        }
        if !(self.mirror_r > 0.0 && self.mirror_r < 1.0) {
            return Err(invalid("mirror_R", "must lie in (0, 1)"));
        }
        if !(self.epsilon.abs() <= 1e-3 * self.fsr) {
            return Err(invalid("epsilon", "must satisfy |epsilon| <= 1e-3 fsr"));
        }
        if !(self.g0 >= 0.0) {
            return Err(invalid("g0", "must be non-negative"));
        }
        if !(self.loss_factor > 0.0) {
            return Err(invalid("loss_factor", "must be positive"));
        }
        Ok(())
    }

    /// Lossless finesse implied by the mirror reflectivity, `pi sqrt(R) / (1 - R)`.
    pub fn reflectivity_finesse(&self) -> f64 {
        PI * libm::sqrt(self.mirror_r) / (1.0 - self.mirror_r)
    }

    /// Relative disagreement between the configured finesse and the one
    /// implied by `mirror_R`, if it exceeds 25 %. Both parametrizations are
    /// accepted; callers surface this as a warning.
    pub fn finesse_mismatch(&self) -> Option<f64> {
        let implied = self.reflectivity_finesse();
        let rel = (implied - self.finesse).abs() / self.finesse;
        (rel > 0.25).then_some(rel)
    }
}

/// Driving frequency comb, restricted to the lines matched to cavity modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombSpec {
    /// Spacing of the matched lines (Hz), nominally the FSR.
    pub line_spacing: f64,
    /// Detuning of line 1 from cavity mode 1 (Hz).
    pub delta_f0: f64,
    /// Input power per matched line (W).
    pub power_per_line: f64,
    /// FWHM of the Gaussian comb envelope (Hz).
    pub envelope_fwhm: f64,
    /// Envelope centre minus the atomic transition (Hz).
    pub envelope_center_offset: f64,
    /// Modes span `m in [-M, M] \ {0}`.
    pub n_half_modes: u32,
}

impl Default for CombSpec {
    fn default() -> Self {
        Self {
            line_spacing: 1.93e9,
            delta_f0: -220e3,
            power_per_line: 0.26e-6,
            envelope_fwhm: 2.5e12,
            envelope_center_offset: 0.0,
            n_half_modes: 400,
        }
    }
}

impl CombSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.line_spacing > 0.0) {
            return Err(invalid("line_spacing", "must be positive"));
        }
        if !(self.envelope_fwhm > 0.0) {
            return Err(invalid("envelope_fwhm", "must be positive"));
        }
        if self.n_half_modes < 1 {
            return Err(invalid("n_half_modes", "must be at least 1"));
        }
        if !(self.power_per_line >= 0.0) {
            return Err(invalid("power_per_line", "must be non-negative"));
        }
        Ok(())
    }

    /// Gaussian envelope weight (unit peak) at optical offset `x` (Hz) from
    /// the atomic transition.
    pub fn envelope_weight(&self, x: f64) -> f64 {
        let sigma = self.envelope_fwhm / (2.0 * libm::sqrt(2.0 * core::f64::consts::LN_2));
        let u = (x - self.envelope_center_offset) / sigma;
        libm::exp(-0.5 * u * u)
    }
}

/// Intracavity two-level ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomEnsembleSpec {
    /// Effective intracavity atom number.
    pub n_atoms: f64,
    /// Excited-state decay rate (rad/s).
    pub gamma: f64,
    /// Detuning of cavity mode 1 from the atom (rad/s).
    pub delta_a1: f64,
    /// Saturation intensity (W/m²).
    pub i_sat: f64,
}

impl Default for AtomEnsembleSpec {
    fn default() -> Self {
        Self {
            n_atoms: 1.2e5,
            gamma: angular(6.066e6),
            delta_a1: angular(495e6),
            i_sat: 25.0,
        }
    }
}

impl AtomEnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.n_atoms >= 0.0) {
            return Err(invalid("n_atoms", "must be non-negative"));
        }
        if !(self.gamma > 0.0) {
            return Err(invalid("gamma", "must be positive"));
        }
        if self.delta_a1 == 0.0 || !self.delta_a1.is_finite() {
            return Err(invalid("delta_a1", "must be finite and nonzero"));
        }
        if !(self.i_sat > 0.0) {
            return Err(invalid("i_sat", "must be positive"));
        }
        Ok(())
    }

    /// A copy with a different atom number.
    pub fn with_atoms(&self, n_atoms: f64) -> Self {
        Self { n_atoms, ..*self }
    }
}

/// All detunings associated with one mode, in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetuningSet {
    pub m: ModeIndex,
    /// Comb line minus empty cavity mode.
    pub delta_c: f64,
    /// Empty cavity mode minus atom.
    pub delta_atom: f64,
    /// Comb line minus atom; always `delta_atom + delta_c`.
    pub delta_p: f64,
}

impl DetuningSet {
    pub fn new(
        atoms: &AtomEnsembleSpec,
        cavity: &CavitySpec,
        comb: &CombSpec,
        m: ModeIndex,
    ) -> Self {
        let delta_c = angular(empty_line_detuning(comb, cavity, m));
        let delta_atom = mode_atom_detuning(atoms, cavity, m);
        Self {
            m,
            delta_c,
            delta_atom,
            delta_p: delta_atom + delta_c,
        }
    }
}

/// Cavity-atom detuning of mode `m` (rad/s). Consecutive modes differ by
/// exactly one FSR; the dispersion correction is below 1e-4 relative over
/// the simulated band and is not applied.
pub fn mode_atom_detuning(atoms: &AtomEnsembleSpec, cavity: &CavitySpec, m: ModeIndex) -> f64 {
    atoms.delta_a1 + angular(cavity.fsr) * m.steps_from_first() as f64
}

/// Detuning of comb line `m` from its nearest empty cavity mode (Hz):
/// `delta_f0 - |m|(|m| - 1) epsilon / 2`.
pub fn empty_line_detuning(comb: &CombSpec, cavity: &CavitySpec, m: ModeIndex) -> f64 {
    let a = f64::from(m.get().unsigned_abs());
    comb.delta_f0 - a * (a - 1.0) * cavity.epsilon / 2.0
}

/// Mirror group-delay dispersion (fs²) equivalent to a per-FSR dispersion
/// step `epsilon` (Hz), from `epsilon = -4 pi fsr^3 phi2`.
pub fn epsilon_to_phi2(epsilon: f64, fsr: f64) -> Result<f64> {
    if !(fsr > 0.0) {
        return Err(invalid("fsr", "must be positive"));
    }
    Ok(-epsilon / (4.0 * PI * fsr * fsr * fsr) / FS2)
}

/// Inverse of [`epsilon_to_phi2`]; `phi2` in fs², result in Hz.
pub fn phi2_to_epsilon(phi2: f64, fsr: f64) -> Result<f64> {
    if !(fsr > 0.0) {
        return Err(invalid("fsr", "must be positive"));
    }
    Ok(-4.0 * PI * fsr * fsr * fsr * phi2 * FS2)
}

/// Detuned saturation parameter `s = (I / I_s) / (1 + 4 delta^2 / gamma^2)`.
pub fn saturation_parameter(intensity: f64, i_sat: f64, detuning: f64, gamma: f64) -> Result<f64> {
    if !(i_sat > 0.0) {
        return Err(invalid("i_sat", "must be positive"));
    }
    if !(intensity >= 0.0) {
        return Err(invalid("intensity", "must be non-negative"));
    }
    if !(gamma > 0.0) {
        return Err(invalid("gamma", "must be positive"));
    }
    let r = detuning / gamma;
    Ok(intensity / i_sat / (1.0 + 4.0 * r * r))
}

/// Low-saturation excited-state population, `s / 2`.
#[inline]
pub fn excited_fraction(s: f64) -> f64 {
    s / 2.0
}

/// Rabi frequency (rad/s) of a beam of intensity `i_mot`: `gamma sqrt(I / 2 I_s)`.
pub fn mot_rabi_from_intensity(i_mot: f64, i_sat: f64, gamma: f64) -> Result<f64> {
    if !(i_sat > 0.0) {
        return Err(invalid("i_sat", "must be positive"));
    }
    if !(i_mot >= 0.0) {
        return Err(invalid("i_mot", "must be non-negative"));
    }
    Ok(gamma * libm::sqrt(i_mot / (2.0 * i_sat)))
}
