use combcavity_core::meanfield::{
    delta_i_c, integrate_to_steady, sweep_grid, sweep_lineshape, LineshapeModel, MeanFieldState,
    StepRule, SweepDirection,
};
use combcavity_core::model::*;
use combcavity_core::spectrum::*;
use combcavity_core::susceptibility::*;
use combcavity_core::units::{angular, cyclic};
use num_complex::Complex64;
use proptest::prelude::*;

fn cavity_with(fsr: f64, epsilon: f64, g0_hz: f64) -> CavitySpec {
    CavitySpec {
        fsr,
        epsilon,
        g0: angular(g0_hz),
        ..CavitySpec::default()
    }
}

fn atoms_with(n: f64, delta_a1_hz: f64) -> AtomEnsembleSpec {
    AtomEnsembleSpec {
        n_atoms: n,
        delta_a1: angular(delta_a1_hz),
        ..AtomEnsembleSpec::default()
    }
}

fn nonzero_mode() -> impl Strategy<Value = ModeIndex> {
    prop_oneof![1i32..=400, -400i32..=-1].prop_map(|m| ModeIndex::new(m).unwrap())
}

proptest! {
    #[test]
    fn neighbouring_modes_are_one_fsr_apart(fsr in 0.5e9..5e9f64, da in -3e9..3e9f64, m in 1i32..400) {
        let (c, a) = (cavity_with(fsr, 18.0, 140e3), atoms_with(1e5, da));
        let step = angular(fsr);
        let tol = 8.0 * f64::EPSILON * (angular(da).abs() + step * 401.0);
        let d = |k: i32| mode_atom_detuning(&a, &c, ModeIndex::new(k).unwrap());
        prop_assert!((d(m + 1) - d(m) - step).abs() <= tol);
        prop_assert!((d(-m) - d(-m - 1) - step).abs() <= tol);
        prop_assert!((d(1) - d(-1) - step).abs() <= tol);
    }

    #[test]
    fn line_detuning_is_even_in_m(eps in -100.0..100.0f64, f0 in -1e6..1e6f64, m in 1i32..2000) {
        let c = cavity_with(1.93e9, eps, 140e3);
        let comb = CombSpec { delta_f0: f0, ..CombSpec::default() };
        let p = ModeIndex::new(m).unwrap();
        let n = ModeIndex::new(-m).unwrap();
        prop_assert_eq!(empty_line_detuning(&comb, &c, p), empty_line_detuning(&comb, &c, n));
    }

    #[test]
    fn dispersion_conversion_round_trips(eps in -1e3..1e3f64, fsr in 1e8..1e10f64) {
        let back = phi2_to_epsilon(epsilon_to_phi2(eps, fsr).unwrap(), fsr).unwrap();
        prop_assert!((back - eps).abs() <= 1e-14 * eps.abs());
    }

    #[test]
    fn shift_sign_follows_detuning(n in 1.0..1e6f64, da in -3e9..3e9f64, m in nonzero_mode()) {
        let (c, a) = (cavity_with(1.93e9, 18.0, 140e3), atoms_with(n, da));
        let delta = mode_atom_detuning(&a, &c, m);
        prop_assume!(delta != 0.0);
        let u = collective_shift(&a, &c, m);
        prop_assert_eq!(u.signum(), delta.signum());
    }

    #[test]
    fn shift_decays_with_mode_number(n in 1.0..1e6f64, da in 1e6..3e9f64, m in 1i32..400) {
        let (c, a) = (cavity_with(1.93e9, 18.0, 140e3), atoms_with(n, da));
        let u = |k: i32| collective_shift(&a, &c, ModeIndex::new(k).unwrap()).abs();
        prop_assert!(u(m + 1) < u(m));
    }

    #[test]
    fn classical_shift_equals_cavity_qed_shift(
        n in 1.0..1e7f64,
        g0 in 1e3..1e6f64,
        da in 1e8..5e9f64,
        sign in prop::bool::ANY,
        m in nonzero_mode(),
    ) {
        let c = cavity_with(1.93e9, 18.0, g0);
        let a = atoms_with(n, if sign { da } else { -da });
        let delta = mode_atom_detuning(&a, &c, m);
        prop_assume!(delta.abs() >= 50.0 * a.gamma);
        let omega_c = angular(RB87_D2_HZ) + delta;
        let medium = MediumParams::from_ensemble(&a, &c, omega_c).unwrap();
        let chi = chi_real_dispersive(&medium, delta, 0.0);
        prop_assume!(chi.abs() <= 0.01);
        let classical = shift_from_chi(chi, omega_c).unwrap();
        let qed = -angular(collective_shift(&a, &c, m));
        prop_assert!((classical - qed).abs() <= 1e-12 * qed.abs());
    }

    #[test]
    fn saturated_shift_is_odd_and_falls_with_intensity(
        da in 1e7..5e9f64,
        i in 0.0..1e5f64,
        di in 1.0..1e5f64,
    ) {
        let (c, a) = (CavitySpec::default(), AtomEnsembleSpec::default());
        let d = angular(da);
        let plus = saturated_shift(&a, &c, d, i).unwrap();
        prop_assert_eq!(plus, -saturated_shift(&a, &c, -d, i).unwrap());
        // Strict decrease needs the saturation term to register at this detuning.
        let more = saturated_shift(&a, &c, d, i + di * 1e4).unwrap();
        prop_assert!(more.abs() < plus.abs());
    }

    #[test]
    fn line_records_recompute_exactly(f0 in -1e6..1e6f64, n in 0.0..4e5f64, eps in -50.0..50.0f64) {
        let c = cavity_with(1.93e9, eps, 140e3);
        let comb = CombSpec { delta_f0: f0, n_half_modes: 60, ..CombSpec::default() };
        let a = atoms_with(n, 495e6);
        for r in line_powers(&c, &comb, &a).unwrap() {
            let d = empty_line_detuning(&comb, &c, r.m);
            prop_assert_eq!(r.detuning_eff, d - collective_shift(&a, &c, r.m));
            prop_assert_eq!(r.shift_u, collective_shift(&a, &c, r.m));
        }
    }
}

#[test]
fn zero_atoms_match_empty_pipeline_bitwise() {
    let (c, comb, osa) = (
        CavitySpec::default(),
        CombSpec::default(),
        OsaSpec::default(),
    );
    let a = AtomEnsembleSpec::default();
    let zero = line_powers(&c, &comb, &a.with_atoms(0.0)).unwrap();
    for r in &zero {
        assert_eq!(r.shift_u, 0.0);
        assert_eq!(r.detuning_eff, empty_line_detuning(&comb, &c, r.m));
    }
    let other_detuning = AtomEnsembleSpec {
        delta_a1: angular(-2e9),
        ..a.with_atoms(0.0)
    };
    let s0 = synthesize(&c, &comb, &a.with_atoms(0.0), &osa).unwrap();
    let s1 = synthesize(&c, &comb, &a.with_atoms(0.0), &osa).unwrap();
    assert_eq!(s0, s1);
    let shifted = line_powers(&c, &comb, &other_detuning).unwrap();
    for (x, y) in zero.iter().zip(&shifted) {
        assert_eq!(x.detuning_eff.to_bits(), y.detuning_eff.to_bits());
    }
}

#[test]
fn single_mode_and_line_power_peaks_agree() {
    let c = CavitySpec::default();
    let a = AtomEnsembleSpec::default();
    for k in [-3, 1, 2] {
        let m = ModeIndex::new(k).unwrap();
        let u = collective_shift(&a, &c, m);
        let step = 1e3;
        let grid: Vec<f64> = (-400..=400)
            .map(|i| u + step * f64::from(i) + 0.3 * step)
            .collect();
        let pop = |dc: f64| mode_population(1.0, angular(dc), angular(u), c.kappa).unwrap();
        let best = grid
            .iter()
            .copied()
            .max_by(|x, y| pop(*x).total_cmp(&pop(*y)))
            .unwrap();
        assert!((best - u).abs() <= step);
        let line = |f0: f64| {
            let comb = CombSpec {
                delta_f0: f0,
                n_half_modes: 3,
                ..CombSpec::default()
            };
            let d = empty_line_detuning(&comb, &c, m);
            let r = line_powers(&c, &comb, &a)
                .unwrap()
                .into_iter()
                .find(|r| r.m == m)
                .unwrap();
            (d, r.power_out)
        };
        let (d_best, _) = grid
            .iter()
            .map(|&f| {
                let ladder =
                    f64::from(k.unsigned_abs()) * (f64::from(k.unsigned_abs()) - 1.0) * c.epsilon
                        / 2.0;
                line(f + ladder)
            })
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        assert!((d_best - u).abs() <= step, "{k}: {d_best} vs {u}");
    }
}

#[test]
fn chi_has_one_extremum_per_side_and_inverse_tail() {
    let (c, a) = (CavitySpec::default(), AtomEnsembleSpec::default());
    let p = MediumParams::from_ensemble(&a, &c, angular(RB87_D2_HZ)).unwrap();
    for sign in [1.0, -1.0] {
        let xs: Vec<f64> = (1..4000)
            .map(|i| sign * p.gamma * 0.01 * f64::from(i))
            .collect();
        let ys: Vec<f64> = xs.iter().map(|&x| chi_real(&p, x, 0.0)).collect();
        let turns = ys
            .windows(3)
            .filter(|w| (w[1] - w[0]) * (w[2] - w[1]) < 0.0)
            .count();
        assert_eq!(turns, 1);
    }
    let d = 100.0 * p.gamma;
    let r = chi_real(&p, d, 0.0) / chi_real(&p, 10.0 * d, 0.0);
    assert!((r - 10.0).abs() < 1e-3, "{r}");
    let r = chi_real(&p, 10.0 * d, 0.0) / chi_real(&p, 100.0 * d, 0.0);
    assert!((r - 10.0).abs() < 1e-5, "{r}");
}

fn fig4_model(m: i32, omega_hz: f64) -> LineshapeModel {
    let cavity = CavitySpec {
        fsr: 1.932e9,
        kappa: angular(240e3),
        ..CavitySpec::default()
    };
    let atoms = AtomEnsembleSpec::default().with_atoms(3.7e5);
    LineshapeModel::for_mode(
        &atoms,
        &cavity,
        ModeIndex::new(m).unwrap(),
        Complex64::new(angular(omega_hz), 0.0),
        angular(60e3),
        2.0 * atoms.gamma,
    )
}

#[test]
fn mot_phase_is_a_gauge() {
    let rule = StepRule::default();
    let base = fig4_model(1, 1.7e6);
    let p0 = base.at(angular(9.5e6));
    let start = MeanFieldState::empty_cavity(&p0);
    let r0 = integrate_to_steady(&p0, &start, &rule.settings(&p0)).unwrap();
    for theta in [0.7, 2.0, -2.9] {
        let p = LineshapeModel {
            omega_m: base.omega_m * Complex64::from_polar(1.0, theta),
            ..base
        }
        .at(angular(9.5e6));
        let r = integrate_to_steady(&p, &start, &rule.settings(&p)).unwrap();
        assert!((r.alpha2_avg / r0.alpha2_avg - 1.0).abs() < 1e-3, "{theta}");
        assert!(
            (r.sigma_ee_avg / r0.sigma_ee_avg - 1.0).abs() < 1e-3,
            "{theta}"
        );
    }
}

#[test]
fn trajectories_stay_physical() {
    let rule = StepRule::default();
    for (omega, dc) in [(0.0, 14.2e6), (1.7e6, 9.5e6), (4e6, 9.0e6)] {
        let p = fig4_model(1, omega).at(angular(dc));
        let r = delta_i_c(
            &p,
            &MeanFieldState::empty_cavity(&p),
            &MeanFieldState::GROUND,
            &rule.settings(&p),
        )
        .unwrap();
        for avg in [r.on, r.off] {
            assert!(avg.sigma_ee_max <= 1.0 + 1e-9);
            assert!(avg.sigma_ee_avg >= -1e-9);
            assert!(avg.bloch_excess <= 1e-6, "{}", avg.bloch_excess);
        }
    }
}

#[test]
fn sweeps_are_bit_reproducible() {
    let model = fig4_model(1, 1.7e6);
    let grid = sweep_grid(angular(9.0e6), angular(9.6e6), 4, SweepDirection::Down);
    let rule = StepRule::default();
    let a = sweep_lineshape(&model, &grid, SweepDirection::Down, &rule).unwrap();
    let b = sweep_lineshape(&model, &grid, SweepDirection::Down, &rule).unwrap();
    assert_eq!(a, b);
    assert!(cyclic(a.points[0].delta_c) > cyclic(a.points[3].delta_c));
}
