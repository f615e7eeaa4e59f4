//! Linear dispersive transmission of the comb through many cavity modes,
//! as seen by a low-resolution optical spectrum analyser.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::model::{
    empty_line_detuning, mode_atom_detuning, AtomEnsembleSpec, CavitySpec, CombSpec, ModeIndex,
};
use crate::units::{angular, cyclic};

/// Rubidium-87 D2 transition frequency (Hz). Only used to label absolute
/// cavity mode numbers in FSR scans.
pub const RB87_D2_HZ: f64 = 384.230_484_468_5e12;

/// Transmission of one comb line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineRecord {
    pub m: ModeIndex,
    /// Line frequency minus atomic transition (Hz).
    pub x: f64,
    /// Collective shift of cavity mode `m` (Hz).
    pub shift_u: f64,
    /// Line detuning from the shifted cavity mode, `d_m - u_m` (Hz).
    pub detuning_eff: f64,
    /// Transmitted power (W).
    pub power_out: f64,
}

/// Analyser resolution and sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OsaSpec {
    /// Gaussian kernel FWHM (Hz).
    pub resolution_fwhm: f64,
    /// Grid step (Hz).
    pub grid_step: f64,
}

impl Default for OsaSpec {
    fn default() -> Self {
        Self {
            resolution_fwhm: 7.5e9,
            grid_step: 0.5e9,
        }
    }
}

/// Power sampled on a uniform grid of optical offsets from the atom.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// First grid point (Hz).
    pub start: f64,
    /// Grid step (Hz).
    pub step: f64,
    pub values: Vec<f64>,
    /// Values have been divided by this constant.
    pub normalization: f64,
}

impl Spectrum {
    pub fn empty(step: f64) -> Self {
        Self {
            start: 0.0,
            step,
            values: Vec::new(),
            normalization: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn frequency(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.frequency(i), v))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Frequency of the largest sample on `[lo, hi]`.
    pub fn argmax_in(&self, lo: f64, hi: f64) -> Option<f64> {
        self.points()
            .filter(|&(f, _)| f >= lo && f <= hi)
            .fold(None, |best: Option<(f64, f64)>, (f, v)| match best {
                Some((_, bv)) if bv >= v => best,
                _ => Some((f, v)),
            })
            .map(|(f, _)| f)
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.start == other.start && self.step == other.step && self.len() == other.len()
    }

    fn scaled(&self, by: f64) -> Self {
        Self {
            start: self.start,
            step: self.step,
            values: self.values.iter().map(|v| v / by).collect(),
            normalization: self.normalization * by,
        }
    }
}

/// Divides every spectrum of a family by the family maximum and returns that
/// constant. A family whose maximum is zero is left untouched.
pub fn normalize_family(family: &mut [Spectrum]) -> f64 {
    let max = family.iter().map(Spectrum::max).fold(0.0, f64::max);
    if max > 0.0 {
        for s in family.iter_mut() {
            *s = s.scaled(max);
        }
        max
    } else {
        1.0
    }
}

/// Collective light shift `u_m = N g0^2 / (2 pi Delta_a^(m))` of cavity mode
/// `m` (Hz). Positive for blue modes, negative for red ones.
pub fn collective_shift(atoms: &AtomEnsembleSpec, cavity: &CavitySpec, m: ModeIndex) -> f64 {
    let delta = mode_atom_detuning(atoms, cavity, m);
    cyclic(atoms.n_atoms * cavity.g0 * cavity.g0 / delta)
}

/// Airy transmission near resonance in its Lorentzian approximation,
/// `(1 - R)^2 / ((1 - R)^2 + 4 R^2 phi^2)`, with `phi` the line detuning in
/// units of the FSR.
pub fn lorentzian_transmission(r: f64, phi: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(invalid("mirror_R", "must lie in (0, 1)"));
    }
    let loss = (1.0 - r) * (1.0 - r);
    Ok(loss / (loss + 4.0 * r * r * phi * phi))
}

/// Steady-state mean-field population per atom of a driven mode,
/// `eta'^2 / ((delta_c - U)^2 + kappa^2 / 4)`. All arguments in rad/s.
pub fn mode_population(eta_prime: f64, delta_c: f64, shift: f64, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(invalid("kappa", "must be positive"));
    }
    let d = delta_c - shift;
    Ok(eta_prime * eta_prime / (d * d + kappa * kappa / 4.0))
}

/// Transmitted power of every matched comb line, in increasing `m`.
pub fn line_powers(
    cavity: &CavitySpec,
    comb: &CombSpec,
    atoms: &AtomEnsembleSpec,
) -> Result<Vec<LineRecord>> {
    cavity.validate()?;
    comb.validate()?;
    atoms.validate()?;
    ModeIndex::span(comb.n_half_modes)
        .map(|m| {
            let d = empty_line_detuning(comb, cavity, m);
            let u = collective_shift(atoms, cavity, m);
            let x = cyclic(mode_atom_detuning(atoms, cavity, m)) + d;
            let detuning_eff = d - u;
            let t = lorentzian_transmission(cavity.mirror_r, detuning_eff / cavity.fsr)?;
            Ok(LineRecord {
                m,
                x,
                shift_u: u,
                detuning_eff,
                power_out: comb.power_per_line * comb.envelope_weight(x) * t * cavity.loss_factor,
            })
        })
        .collect()
}

/// Convolves the lines with a unit-peak Gaussian of the given FWHM: an
/// isolated line of power `P` reads `P` at its own frequency. The grid is
/// anchored to integer multiples of `grid_step`, so spectra of the same line
/// set always share a grid.
pub fn osa_convolve(
    lines: &[LineRecord],
    resolution_fwhm: f64,
    grid_step: f64,
) -> Result<Spectrum> {
    if !(resolution_fwhm > 0.0) {
        return Err(invalid("resolution_fwhm", "must be positive"));
    }
    if !(grid_step > 0.0) {
        return Err(invalid("grid_step", "must be positive"));
    }
    if lines.is_empty() {
        return Ok(Spectrum::empty(grid_step));
    }
    let reach = 3.0 * resolution_fwhm;
    let (lo, hi) = lines
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), l| {
            (lo.min(l.x), hi.max(l.x))
        });
    let first = libm::floor((lo - reach) / grid_step) as i64;
    let last = libm::ceil((hi + reach) / grid_step) as i64;
    let n = (last - first + 1) as usize;
    let start = first as f64 * grid_step;
    let mut values = alloc::vec![0.0; n];
    // exp(-4 ln2 (dx / fwhm)^2)
    let c = 4.0 * core::f64::consts::LN_2 / (resolution_fwhm * resolution_fwhm);
    for line in lines {
        let i0 = libm::ceil((line.x - reach) / grid_step) as i64 - first;
        let i1 = libm::floor((line.x + reach) / grid_step) as i64 - first;
        for i in i0.max(0)..=i1.min(n as i64 - 1) {
            let dx = start + grid_step * i as f64 - line.x;
            values[i as usize] += line.power_out * libm::exp(-c * dx * dx);
        }
    }
    Ok(Spectrum {
        start,
        step: grid_step,
        values,
        normalization: 1.0,
    })
}

/// Pointwise `with_atoms - empty`.
pub fn diff_signal(with_atoms: &Spectrum, empty: &Spectrum) -> Result<Spectrum> {
    if !with_atoms.same_grid(empty) {
        return Err(Error::GridMismatch);
    }
    Ok(Spectrum {
        start: with_atoms.start,
        step: with_atoms.step,
        values: with_atoms
            .values
            .iter()
            .zip(&empty.values)
            .map(|(a, b)| a - b)
            .collect(),
        normalization: with_atoms.normalization,
    })
}

/// Frequency interval over which a difference signal counts as nonzero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedInterval {
    pub lo: f64,
    pub hi: f64,
    pub threshold: f64,
}

/// Outermost grid points where `|diff|` exceeds 5 % of the with-atoms
/// maximum; `None` when nothing crosses.
pub fn shifted_interval(diff: &Spectrum, with_atoms: &Spectrum) -> Result<Option<ShiftedInterval>> {
    if !diff.same_grid(with_atoms) {
        return Err(Error::GridMismatch);
    }
    let threshold = 0.05 * with_atoms.max();
    if !(threshold > 0.0) {
        return Ok(None);
    }
    let above = |v: &f64| v.abs() > threshold;
    let first = diff.values.iter().position(above);
    let last = diff.values.iter().rposition(above);
    Ok(first.zip(last).map(|(a, b)| ShiftedInterval {
        lo: diff.frequency(a),
        hi: diff.frequency(b),
        threshold,
    }))
}

/// Number of cavity modes whose shift visibly changes the spectrum: the
/// thresholded interval divided by the FSR, rounded.
pub fn count_shifted_modes(diff: &Spectrum, with_atoms: &Spectrum, fsr: f64) -> Result<u32> {
    if !(fsr > 0.0) {
        return Err(invalid("fsr", "must be positive"));
    }
    Ok(shifted_interval(diff, with_atoms)?
        .map_or(0, |iv| libm::round((iv.hi - iv.lo) / fsr) as u32))
}

/// Convenience: lines through the analyser.
pub fn synthesize(
    cavity: &CavitySpec,
    comb: &CombSpec,
    atoms: &AtomEnsembleSpec,
    osa: &OsaSpec,
) -> Result<Spectrum> {
    let lines = line_powers(cavity, comb, atoms)?;
    osa_convolve(&lines, osa.resolution_fwhm, osa.grid_step)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomScanPoint {
    pub n_atoms: f64,
    pub count: u32,
    pub spectrum: Spectrum,
}

/// Shifted-mode count and spectrum for each atom number, in input order.
pub fn atom_number_scan(
    cavity: &CavitySpec,
    comb: &CombSpec,
    atoms: &AtomEnsembleSpec,
    n_values: &[f64],
    osa: &OsaSpec,
) -> Result<Vec<AtomScanPoint>> {
    let empty = synthesize(cavity, comb, &atoms.with_atoms(0.0), osa)?;
    n_values
        .iter()
        .map(|&n| atom_scan_point(cavity, comb, atoms, n, osa, &empty))
        .collect()
}

/// One point of [`atom_number_scan`] against a precomputed empty spectrum.
pub fn atom_scan_point(
    cavity: &CavitySpec,
    comb: &CombSpec,
    atoms: &AtomEnsembleSpec,
    n_atoms: f64,
    osa: &OsaSpec,
    empty: &Spectrum,
) -> Result<AtomScanPoint> {
    let spectrum = synthesize(cavity, comb, &atoms.with_atoms(n_atoms), osa)?;
    let diff = diff_signal(&spectrum, empty)?;
    let count = count_shifted_modes(&diff, &spectrum, cavity.fsr)?;
    Ok(AtomScanPoint {
        n_atoms,
        count,
        spectrum,
    })
}

/// Mode bookkeeping for scanning the cavity FSR against a fixed comb.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FsrScanSpec {
    /// Absolute longitudinal mode number of cavity mode `m = 1`.
    pub reference_mode_number: f64,
    /// Comb lines per FSR (the cavity couples every `n`-th line).
    pub comb_subdivision: u32,
}

impl FsrScanSpec {
    pub fn for_cavity(cavity: &CavitySpec) -> Self {
        Self {
            reference_mode_number: libm::round(RB87_D2_HZ / cavity.fsr),
            comb_subdivision: 24,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FsrScanPoint {
    /// FSR perturbation (Hz).
    pub offset: f64,
    /// Sum of transmitted line powers (W).
    pub total_power: f64,
}

struct FsrMode {
    m: ModeIndex,
    q: f64,
    x: f64,
    shift_u: f64,
    detuning: f64,
    weight: f64,
}

fn fsr_modes(
    cavity: &CavitySpec,
    comb: &CombSpec,
    atoms: &AtomEnsembleSpec,
    scan: &FsrScanSpec,
) -> Result<Vec<FsrMode>> {
    cavity.validate()?;
    comb.validate()?;
    atoms.validate()?;
    if scan.comb_subdivision == 0 {
        return Err(invalid("comb_subdivision", "must be at least 1"));
    }
    Ok(ModeIndex::span(comb.n_half_modes)
        .map(|m| {
            let d = empty_line_detuning(comb, cavity, m);
            let u = collective_shift(atoms, cavity, m);
            let x = cyclic(mode_atom_detuning(atoms, cavity, m)) + d;
            FsrMode {
                m,
                q: scan.reference_mode_number + m.steps_from_first() as f64,
                x,
                shift_u: u,
                detuning: d - u,
                weight: comb.power_per_line * comb.envelope_weight(x),
            }
        })
        .collect())
}

fn fsr_line(mode: &FsrMode, cavity: &CavitySpec, f_rep: f64, offset: f64) -> Result<LineRecord> {
    let d = mode.detuning - mode.q * offset;
    let wrapped = d - f_rep * libm::round(d / f_rep);
    let t = lorentzian_transmission(cavity.mirror_r, wrapped / cavity.fsr)?;
    Ok(LineRecord {
        m: mode.m,
        x: mode.x,
        shift_u: mode.shift_u,
        detuning_eff: wrapped,
        power_out: mode.weight * t * cavity.loss_factor,
    })
}

/// Total transmitted power while the FSR is detuned by each offset. Mode `q`
/// moves by `q * offset`, so high-index modes walk off fastest; each cavity
/// mode is matched to its nearest comb line, which repeats the transmission
/// pattern whenever the modes have moved by one comb line.
pub fn fsr_scan(
    cavity: &CavitySpec,
    comb: &CombSpec,
    atoms: &AtomEnsembleSpec,
    fsr_offsets: &[f64],
    scan: &FsrScanSpec,
) -> Result<Vec<FsrScanPoint>> {
    let modes = fsr_modes(cavity, comb, atoms, scan)?;
    let f_rep = comb.line_spacing / f64::from(scan.comb_subdivision);
    fsr_offsets
        .iter()
        .map(|&offset| {
            let mut total = 0.0;
            for mode in &modes {
                total += fsr_line(mode, cavity, f_rep, offset)?.power_out;
            }
            Ok(FsrScanPoint {
                offset,
                total_power: total,
            })
        })
        .collect()
}

/// Line-resolved transmission at one FSR offset; `detuning_eff` is the
/// detuning from the nearest comb line.
pub fn fsr_scan_lines(
    cavity: &CavitySpec,
    comb: &CombSpec,
    atoms: &AtomEnsembleSpec,
    offset: f64,
    scan: &FsrScanSpec,
) -> Result<Vec<LineRecord>> {
    let f_rep = comb.line_spacing / f64::from(scan.comb_subdivision);
    fsr_modes(cavity, comb, atoms, scan)?
        .iter()
        .map(|mode| fsr_line(mode, cavity, f_rep, offset))
        .collect()
}

/// Cavity resonance shift in rad/s, for the dynamical models.
pub fn collective_shift_angular(
    atoms: &AtomEnsembleSpec,
    cavity: &CavitySpec,
    m: ModeIndex,
) -> f64 {
    angular(collective_shift(atoms, cavity, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(i: i32) -> ModeIndex {
        ModeIndex::new(i).unwrap()
    }

    fn fig4() -> (AtomEnsembleSpec, CavitySpec) {
        (
            AtomEnsembleSpec::default(),
            CavitySpec {
                fsr: 1.932e9,
                ..CavitySpec::default()
            },
        )
    }

    #[test]
    fn collective_shift_values() {
        let (atoms, cavity) = fig4();
        // (1.4e5)^2 * 1.2e5 / 4.95e8
        let oracle = 1.4e5 * 1.4e5 * 1.2e5 / 4.95e8;
        assert!((collective_shift(&atoms, &cavity, m(1)) - oracle).abs() < 1e-6 * oracle);
        assert!((oracle - 4.75e6).abs() < 0.01e6);
        let u = collective_shift(&atoms, &cavity, m(-1));
        assert!((u + 1.4e5 * 1.4e5 * 1.2e5 / 1.437e9).abs() < 1e-3);
        assert!((u + 1.637e6).abs() < 1e3);
        assert_eq!(collective_shift(&atoms.with_atoms(0.0), &cavity, m(5)), 0.0);
    }

    #[test]
    fn lorentzian_values() {
        let r = 0.9998;
        assert_eq!(lorentzian_transmission(r, 0.0).unwrap(), 1.0);
        let hw = (1.0 - r) / (2.0 * r);
        assert!((lorentzian_transmission(r, hw).unwrap() - 0.5).abs() < 1e-12);
        assert!((lorentzian_transmission(r, 10.0 * hw).unwrap() - 1.0 / 101.0).abs() < 1e-12);
        assert!(lorentzian_transmission(1.0, 0.0).is_err());
        assert!(lorentzian_transmission(0.0, 0.0).is_err());
    }

    #[test]
    fn mode_population_values() {
        let k = angular(240e3);
        let eta = angular(60e3);
        let peak = mode_population(eta, 1.0, 1.0, k).unwrap();
        assert!((peak - 0.25).abs() < 1e-12);
        assert_eq!(mode_population(0.0, 3.0, 1.0, k).unwrap(), 0.0);
        let half = mode_population(eta, 1.0 + k / 2.0, 1.0, k).unwrap();
        assert!((half - 0.125).abs() < 1e-12);
        assert!(mode_population(eta, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn empty_resonant_comb_transmits_envelope() {
        let cavity = CavitySpec {
            epsilon: 0.0,
            ..CavitySpec::default()
        };
        let comb = CombSpec {
            delta_f0: 0.0,
            ..CombSpec::default()
        };
        let atoms = AtomEnsembleSpec::default().with_atoms(0.0);
        for l in line_powers(&cavity, &comb, &atoms).unwrap() {
            let expect = comb.power_per_line * comb.envelope_weight(l.x) * cavity.loss_factor;
            assert_eq!(l.power_out, expect);
        }
    }

    #[test]
    fn single_line_keeps_its_power() {
        let line = LineRecord {
            m: m(1),
            x: 10.2e9,
            shift_u: 0.0,
            detuning_eff: 0.0,
            power_out: 3.0,
        };
        let s = osa_convolve(&[line], 7.5e9, 0.1e9).unwrap();
        assert!((s.max() - 3.0).abs() < 1e-12);
        let peak = s.argmax_in(f64::MIN, f64::MAX).unwrap();
        assert!((peak - 10.2e9).abs() < 1e-3);
        assert!(s.frequency(0) <= 10.2e9 - 3.0 * 7.5e9);
        assert!(s.frequency(s.len() - 1) >= 10.2e9 + 3.0 * 7.5e9);
    }

    #[test]
    fn two_separated_lines_give_equal_peaks() {
        let mk = |x| LineRecord {
            m: m(1),
            x,
            shift_u: 0.0,
            detuning_eff: 0.0,
            power_out: 1.0,
        };
        let s = osa_convolve(&[mk(-100e9), mk(100e9)], 7.5e9, 0.5e9).unwrap();
        let left = s
            .points()
            .filter(|p| p.0 < 0.0)
            .map(|p| p.1)
            .fold(0.0, f64::max);
        let right = s
            .points()
            .filter(|p| p.0 > 0.0)
            .map(|p| p.1)
            .fold(0.0, f64::max);
        assert!((left - 1.0).abs() < 1e-12 && (right - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_line_list_gives_empty_spectrum() {
        assert!(osa_convolve(&[], 7.5e9, 1e9).unwrap().is_empty());
        assert!(osa_convolve(&[], 0.0, 1e9).is_err());
    }

    #[test]
    fn diff_is_antisymmetric_and_checks_grids() {
        let (atoms, cavity) = fig4();
        let comb = CombSpec::default();
        let osa = OsaSpec::default();
        let a = synthesize(&cavity, &comb, &atoms, &osa).unwrap();
        let b = synthesize(&cavity, &comb, &atoms.with_atoms(0.0), &osa).unwrap();
        let d1 = diff_signal(&a, &b).unwrap();
        let d2 = diff_signal(&b, &a).unwrap();
        assert!(d1.values.iter().zip(&d2.values).all(|(x, y)| *x == -*y));
        assert!(diff_signal(&a, &a)
            .unwrap()
            .values
            .iter()
            .all(|v| *v == 0.0));
        let mut c = b.clone();
        c.values.pop();
        assert_eq!(diff_signal(&a, &c), Err(Error::GridMismatch));
    }

    #[test]
    fn zero_diff_counts_nothing() {
        let (atoms, cavity) = fig4();
        let s = synthesize(&cavity, &CombSpec::default(), &atoms, &OsaSpec::default()).unwrap();
        let zero = diff_signal(&s, &s).unwrap();
        assert_eq!(count_shifted_modes(&zero, &s, cavity.fsr).unwrap(), 0);
        let dark = Spectrum {
            values: alloc::vec![0.0; s.len()],
            ..s.clone()
        };
        assert_eq!(count_shifted_modes(&s, &dark, cavity.fsr).unwrap(), 0);
    }

    #[test]
    fn normalization_uses_family_maximum() {
        let mut fam = alloc::vec![
            Spectrum {
                start: 0.0,
                step: 1.0,
                values: alloc::vec![1.0, 4.0],
                normalization: 1.0
            },
            Spectrum {
                start: 0.0,
                step: 1.0,
                values: alloc::vec![2.0, 2.0],
                normalization: 1.0
            },
        ];
        assert_eq!(normalize_family(&mut fam), 4.0);
        assert_eq!(fam[0].values, [0.25, 1.0]);
        assert_eq!(fam[1].values, [0.5, 0.5]);
        assert_eq!(fam[1].normalization, 4.0);
    }
}
