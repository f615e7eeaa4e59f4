//! Classical picture of the same shift: the ensemble as a dispersive
//! two-level medium whose refractive index pulls the cavity resonance.
//!
//! The medium prefactor `N mu^2 / (V hbar eps0)` is carried through the
//! coupling identity `hbar g0 = mu sqrt(hbar omega_c / (2 eps0 V))`, i.e. as
//! `2 N g0^2 / omega_c`, so classical and cavity-QED results share one
//! parameter set. Probe-frequency dependence inside a cavity linewidth is
//! ignored (`omega -> omega_c`).

use crate::error::{invalid, Error, Result};
use crate::model::{AtomEnsembleSpec, CavitySpec};

/// Dispersive two-level medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumParams {
    /// `N mu^2 / (V hbar eps0)` expressed as `2 N g0^2 / omega_c` (rad/s).
    pub prefactor: f64,
    /// Excited-state decay rate (rad/s).
    pub gamma: f64,
    /// Saturation intensity (W/m²).
    pub i_sat: f64,
}

impl MediumParams {
    /// Medium equivalent to the ensemble coupled to a mode at `omega_c` (rad/s).
    pub fn from_ensemble(
        atoms: &AtomEnsembleSpec,
        cavity: &CavitySpec,
        omega_c: f64,
    ) -> Result<Self> {
        if !(omega_c > 0.0) {
            return Err(invalid("omega_c", "must be positive"));
        }
        let prefactor = 2.0 * atoms.n_atoms * cavity.g0 * cavity.g0 / omega_c;
        if !(prefactor >= 0.0) {
            return Err(invalid("prefactor", "must be non-negative"));
        }
        Ok(Self {
            prefactor,
            gamma: atoms.gamma,
            i_sat: atoms.i_sat,
        })
    }
}

/// Real part of the steady-state susceptibility,
/// `-P delta / (delta^2 + rabi^2 / 2 + gamma^2 / 4)`.
pub fn chi_real(params: &MediumParams, delta_a: f64, rabi: f64) -> f64 {
    let g = params.gamma;
    -params.prefactor * delta_a / (delta_a * delta_a + rabi * rabi / 2.0 + g * g / 4.0)
}

/// Far-detuned (`|delta| >> gamma`) susceptibility, `-P delta / (delta^2 + rabi^2 / 2)`.
/// At `rabi = 0` this reduces to `-P / delta` and reproduces the
/// cavity-QED shift exactly.
pub fn chi_real_dispersive(params: &MediumParams, delta_a: f64, rabi: f64) -> f64 {
    -params.prefactor * delta_a / (delta_a * delta_a + rabi * rabi / 2.0)
}

/// Cavity frequency pull `omega_c - omega_c' = omega_c chi / 2` (rad/s).
pub fn shift_from_chi(chi: f64, omega_c: f64) -> Result<f64> {
    if !(chi.abs() <= 0.01) {
        return Err(Error::DispersiveLimit { chi });
    }
    Ok(omega_c * chi / 2.0)
}

/// Intensity-saturated collective pull
/// `omega_c - omega_c' = -(N g0^2 / delta) / (1 + gamma^2 I / (4 delta^2 I_s))` (rad/s).
pub fn saturated_shift(
    atoms: &AtomEnsembleSpec,
    cavity: &CavitySpec,
    delta_a: f64,
    intensity: f64,
) -> Result<f64> {
    if delta_a == 0.0 {
        return Err(Error::SingularInput("cavity-atom detuning is zero"));
    }
    if !(intensity >= 0.0) {
        return Err(invalid("intensity", "must be non-negative"));
    }
    let linear = atoms.n_atoms * cavity.g0 * cavity.g0 / delta_a;
    let sat = atoms.gamma * atoms.gamma * intensity / (4.0 * delta_a * delta_a * atoms.i_sat);
    Ok(-linear / (1.0 + sat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModeIndex;
    use crate::spectrum::collective_shift;
    use crate::units::angular;

    const OMEGA_C: f64 = 2.0 * core::f64::consts::PI * 384.23e12;

    fn medium() -> (AtomEnsembleSpec, CavitySpec, MediumParams) {
        let atoms = AtomEnsembleSpec::default();
        let cavity = CavitySpec::default();
        let p = MediumParams::from_ensemble(&atoms, &cavity, OMEGA_C).unwrap();
        (atoms, cavity, p)
    }

    #[test]
    fn chi_is_odd_and_zero_on_resonance() {
        let (_, _, p) = medium();
        assert_eq!(chi_real(&p, 0.0, 0.0), 0.0);
        let d = angular(300e6);
        assert_eq!(chi_real(&p, d, 1e6), -chi_real(&p, -d, 1e6));
    }

    #[test]
    fn chi_far_detuned_limit() {
        let (_, _, p) = medium();
        let d = 1000.0 * p.gamma;
        let exact = chi_real(&p, d, 0.0);
        let limit = -p.prefactor / d;
        assert!((exact - limit).abs() / limit.abs() < 1e-6);
    }

    #[test]
    fn chi_halves_when_drive_matches_denominator() {
        let (_, _, p) = medium();
        let d = 3.0 * p.gamma;
        let rabi = libm::sqrt(2.0 * (d * d + p.gamma * p.gamma / 4.0));
        let r = chi_real(&p, d, rabi) / chi_real(&p, d, 0.0);
        assert!((r - 0.5).abs() < 1e-14);
    }

    #[test]
    fn saturated_shift_limits() {
        let (atoms, cavity, _) = medium();
        let d = angular(495e6);
        let lin = saturated_shift(&atoms, &cavity, d, 0.0).unwrap();
        assert_eq!(lin, -atoms.n_atoms * cavity.g0 * cavity.g0 / d);
        // -2 pi * 4.75 MHz
        assert!((lin / angular(1.0) + 1.4e5 * 1.4e5 * 1.2e5 / 4.95e8).abs() < 1e-3);
        let i_half = 4.0 * d * d * atoms.i_sat / (atoms.gamma * atoms.gamma);
        let half = saturated_shift(&atoms, &cavity, d, i_half).unwrap();
        assert!((half / lin - 0.5).abs() < 1e-14);
        assert!(matches!(
            saturated_shift(&atoms, &cavity, 0.0, 0.0),
            Err(Error::SingularInput(_))
        ));
    }

    #[test]
    fn classical_route_matches_cavity_qed_shift() {
        let (atoms, cavity, p) = medium();
        for i in [-5, -1, 1, 2, 40] {
            let m = ModeIndex::new(i).unwrap();
            let d = crate::model::mode_atom_detuning(&atoms, &cavity, m);
            let classical = shift_from_chi(chi_real(&p, d, 0.0), OMEGA_C).unwrap();
            let sat = saturated_shift(&atoms, &cavity, d, 0.0).unwrap();
            let qed = -angular(collective_shift(&atoms, &cavity, m));
            // The classical form keeps gamma^2/4 in the denominator.
            let g = atoms.gamma;
            let correction = d * d / (d * d + g * g / 4.0);
            assert!((classical - qed * correction).abs() <= 1e-12 * qed.abs());
            assert!((sat - qed).abs() <= 1e-12 * qed.abs());
        }
    }

    #[test]
    fn dispersive_form_is_exact_identity() {
        let (atoms, cavity, p) = medium();
        for i in [-300, -7, -1, 1, 2, 150] {
            let m = ModeIndex::new(i).unwrap();
            let d = crate::model::mode_atom_detuning(&atoms, &cavity, m);
            let classical = shift_from_chi(chi_real_dispersive(&p, d, 0.0), OMEGA_C).unwrap();
            let qed = -angular(collective_shift(&atoms, &cavity, m));
            assert!((classical - qed).abs() <= 1e-12 * qed.abs());
            let rabi = 0.3 * d;
            let sat_i = rabi * rabi * 2.0 * atoms.i_sat / (atoms.gamma * atoms.gamma);
            let sat = saturated_shift(&atoms, &cavity, d, sat_i).unwrap();
            let classical = shift_from_chi(chi_real_dispersive(&p, d, rabi), OMEGA_C).unwrap();
            assert!((classical - sat).abs() <= 1e-12 * sat.abs());
        }
    }

    #[test]
    fn shift_from_chi_edges() {
        assert_eq!(shift_from_chi(0.0, OMEGA_C).unwrap(), 0.0);
        assert!(matches!(
            shift_from_chi(0.02, OMEGA_C),
            Err(Error::DispersiveLimit { .. })
        ));
        let a = shift_from_chi(1e-8, OMEGA_C).unwrap();
        let b = shift_from_chi(2e-8, OMEGA_C).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-9 * a.abs());
    }

    #[test]
    fn rabi_intensity_link_matches_saturation_term() {
        // gamma^2 I / (4 I_s) equals rabi^2 / 2 for rabi = gamma sqrt(I / 2 I_s).
        let (atoms, _, _) = medium();
        let i = 40.0;
        let rabi = crate::model::mot_rabi_from_intensity(i, atoms.i_sat, atoms.gamma).unwrap();
        let lhs = atoms.gamma * atoms.gamma * i / (4.0 * atoms.i_sat);
        assert!((lhs - rabi * rabi / 2.0).abs() < 1e-9 * lhs);
    }
}
