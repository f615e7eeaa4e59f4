//! Truncated-Hilbert-space reference model: a few two-level atoms coupled to
//! one or two driven cavity modes, solved with dense linear algebra.
//!
//! The tensor order is `mode_0 (x) ... (x) atom_0 (x) ...`; each mode keeps
//! Fock states `0..=fock_cutoff` and each atom has basis `(g, e)`.
//! Density matrices are vectorized column-major, so
//! `vec(A rho B) = (B^T (x) A) vec(rho)`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Largest physical dimension accepted; the Liouvillian is its square.
pub const MAX_DIMENSION: usize = 64;

/// Superoperators up to this size also get a singular-value check of the
/// null space.
const UNIQUENESS_CHECK_LIMIT: usize = 1024;

type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertSpec {
    pub n_atoms_q: usize,
    pub fock_cutoff: usize,
    pub n_modes_q: usize,
}

impl HilbertSpec {
    pub fn new(n_atoms_q: usize, fock_cutoff: usize, n_modes_q: usize) -> Result<Self> {
        let spec = Self {
            n_atoms_q,
            fock_cutoff,
            n_modes_q,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.n_atoms_q) {
            return Err(invalid("n_atoms_q", "must be 1, 2 or 3"));
        }
        if !(1..=8).contains(&self.fock_cutoff) {
            return Err(invalid("fock_cutoff", "must be in 1..=8"));
        }
        if !(1..=2).contains(&self.n_modes_q) {
            return Err(invalid("n_modes_q", "must be 1 or 2"));
        }
        let dim = self.dimension();
        if dim > MAX_DIMENSION {
            return Err(Error::DimensionBudget {
                dim,
                max: MAX_DIMENSION,
            });
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        (self.fock_cutoff + 1).pow(self.n_modes_q as u32) << self.n_atoms_q
    }

    fn local_dims(&self) -> Vec<usize> {
        let mut d = vec![self.fock_cutoff + 1; self.n_modes_q];
        d.extend(core::iter::repeat_n(2, self.n_atoms_q));
        d
    }

    /// `op` acting on tensor slot `slot`, identity elsewhere.
    fn embed(&self, slot: usize, op: &CMatrix) -> CMatrix {
        self.local_dims()
            .iter()
            .enumerate()
            .fold(CMatrix::identity(1, 1), |acc, (i, &d)| {
                if i == slot {
                    acc.kronecker(op)
                } else {
                    acc.kronecker(&CMatrix::identity(d, d))
                }
            })
    }

    /// Photon annihilation operator of `mode`.
    pub fn annihilation(&self, mode: usize) -> CMatrix {
        let n = self.fock_cutoff + 1;
        let a = CMatrix::from_fn(n, n, |r, c| {
            if c == r + 1 {
                Complex64::new(libm::sqrt(c as f64), 0.0)
            } else {
                ZERO
            }
        });
        self.embed(mode, &a)
    }

    /// Atomic lowering operator `|g><e|` of `atom`.
    pub fn lowering(&self, atom: usize) -> CMatrix {
        let mut s = CMatrix::zeros(2, 2);
        s[(0, 1)] = ONE;
        self.embed(self.n_modes_q + atom, &s)
    }

    /// `|e><e|` of `atom`.
    pub fn excited_projector(&self, atom: usize) -> CMatrix {
        let mut s = CMatrix::zeros(2, 2);
        s[(1, 1)] = ONE;
        self.embed(self.n_modes_q + atom, &s)
    }
}

/// A matrix on the truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    pub matrix: CMatrix,
    pub label: &'static str,
}

impl DenseOperator {
    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    /// Frobenius norm of `H - H^dagger`.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol * self.matrix.norm().max(1.0)
    }

    /// Real eigenvalues in ascending order; the operator must be Hermitian.
    pub fn eigenvalues(&self) -> Vec<f64> {
        sorted_eigenvalues(&self.matrix)
    }
}

fn sorted_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut e: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// One comb line and the mode it drives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumLine {
    /// Probe minus cavity (rad/s).
    pub delta_c: f64,
    /// Cavity minus atom for this mode (rad/s).
    pub delta_a_mode: f64,
}

impl QuantumLine {
    /// Probe minus atom.
    pub fn delta_p(&self) -> f64 {
        self.delta_a_mode + self.delta_c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumParams {
    /// Single-atom coupling (rad/s).
    pub g0: f64,
    /// Drive amplitude per line (rad/s).
    pub eta: f64,
    pub kappa: f64,
    pub gamma: f64,
    /// One entry per mode.
    pub lines: Vec<QuantumLine>,
}

impl QuantumParams {
    pub fn single(g0: f64, eta: f64, kappa: f64, gamma: f64, line: QuantumLine) -> Self {
        Self {
            g0,
            eta,
            kappa,
            gamma,
            lines: vec![line],
        }
    }

    fn check(&self, spec: &HilbertSpec) -> Result<()> {
        spec.validate()?;
        if self.lines.len() != spec.n_modes_q {
            return Err(invalid("lines", "need one line per mode"));
        }
        if !(self.kappa >= 0.0 && self.gamma >= 0.0) {
            return Err(invalid("kappa", "decay rates must be non-negative"));
        }
        Ok(())
    }
}

/// Rotating frame of the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Frame {
    /// Frame of the single probe line; the atomic term is `-delta_p sigma_ee`.
    Static,
    /// Frame of the comb lines and the atom, evaluated at time `t` (s);
    /// each coupling carries its own `exp(-i delta_p t)` phase.
    CombRotating { t: f64 },
}

struct Operators {
    a: Vec<CMatrix>,
    sm: Vec<CMatrix>,
    ee: Vec<CMatrix>,
}

impl Operators {
    fn new(spec: &HilbertSpec) -> Self {
        Self {
            a: (0..spec.n_modes_q).map(|m| spec.annihilation(m)).collect(),
            sm: (0..spec.n_atoms_q).map(|n| spec.lowering(n)).collect(),
            ee: (0..spec.n_atoms_q)
                .map(|n| spec.excited_projector(n))
                .collect(),
        }
    }

    /// `sum_n a_m sigma_eg^(n)`.
    fn absorb(&self, m: usize) -> CMatrix {
        let dim = self.a[m].nrows();
        self.sm.iter().fold(CMatrix::zeros(dim, dim), |acc, s| {
            acc + &self.a[m] * s.adjoint()
        })
    }
}

struct Parts {
    free: CMatrix,
    coupling: CMatrix,
    drive: CMatrix,
}

fn parts(spec: &HilbertSpec, p: &QuantumParams, frame: Frame, ops: &Operators) -> Result<Parts> {
    p.check(spec)?;
    let dim = spec.dimension();
    let mut free = CMatrix::zeros(dim, dim);
    let mut coupling = CMatrix::zeros(dim, dim);
    let mut drive = CMatrix::zeros(dim, dim);
    for (m, line) in p.lines.iter().enumerate() {
        let a = &ops.a[m];
        free -= (a.adjoint() * a) * Complex64::new(line.delta_c, 0.0);
        let phase = match frame {
            Frame::Static => ONE,
            Frame::CombRotating { t } => Complex64::from_polar(1.0, -line.delta_p() * t),
        };
        let x = ops.absorb(m) * (phase * p.g0);
        coupling += &x + x.adjoint();
        drive += (a.adjoint() - a) * (I * p.eta);
    }
    if let Frame::Static = frame {
        if spec.n_modes_q != 1 {
            return Err(invalid("n_modes_q", "the static frame needs a single mode"));
        }
        let dp = p.lines[0].delta_p();
        for ee in &ops.ee {
            free -= ee * Complex64::new(dp, 0.0);
        }
    }
    Ok(Parts {
        free,
        coupling,
        drive,
    })
}

pub fn build_hamiltonian(
    spec: &HilbertSpec,
    params: &QuantumParams,
    frame: Frame,
) -> Result<DenseOperator> {
    let ops = Operators::new(spec);
    let p = parts(spec, params, frame, &ops)?;
    Ok(DenseOperator {
        matrix: p.free + p.coupling + p.drive,
        label: "hamiltonian",
    })
}

/// Norms of the first-order elimination condition `V + [S, H0] + i dS/dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwResidual {
    /// Frobenius norm of the residual operator.
    pub residual: f64,
    /// Frobenius norm of the coupling `V`.
    pub coupling_norm: f64,
}

/// Residual of the generator
/// `S = -sum_m (g0 / delta_a_mode) (A_m e^{-i delta_p t} - h.c.)`, with
/// `A_m = sum_n a_m sigma_eg^(n)`, against the free cavity part `H0`.
pub fn sw_generator_residual(
    spec: &HilbertSpec,
    params: &QuantumParams,
    frame: Frame,
) -> Result<SwResidual> {
    sw_generator_residual_scaled(spec, params, frame, 1.0)
}

/// As [`sw_generator_residual`] with `S` multiplied by `scale`.
pub fn sw_generator_residual_scaled(
    spec: &HilbertSpec,
    params: &QuantumParams,
    frame: Frame,
    scale: f64,
) -> Result<SwResidual> {
    let ops = Operators::new(spec);
    let p = parts(spec, params, frame, &ops)?;
    let dim = spec.dimension();
    let mut s = CMatrix::zeros(dim, dim);
    let mut ds = CMatrix::zeros(dim, dim);
    for (m, line) in params.lines.iter().enumerate() {
        if params.g0 == 0.0 {
            continue;
        }
        if line.delta_a_mode == 0.0 {
            return Err(Error::SingularGenerator { mode: m });
        }
        let (phase, rate) = match frame {
            Frame::Static => (ONE, 0.0),
            Frame::CombRotating { t } => (
                Complex64::from_polar(1.0, -line.delta_p() * t),
                line.delta_p(),
            ),
        };
        let x = ops.absorb(m) * (phase * (-scale * params.g0 / line.delta_a_mode));
        let term = &x - x.adjoint();
        // d/dt of x is -i rate x; of x^dagger, +i rate x^dagger.
        ds += (&x + x.adjoint()) * Complex64::new(0.0, -rate);
        s += term;
    }
    let commutator = &s * &p.free - &p.free * &s;
    let residual = &p.coupling + commutator + ds * I;
    Ok(SwResidual {
        residual: residual.norm(),
        coupling_norm: p.coupling.norm(),
    })
}

/// `kappa D[a] + gamma sum_n D[sigma_ge^(n)]` plus the Hamiltonian part, on
/// column-stacked density matrices. Static frame, single mode.
pub fn liouvillian(spec: &HilbertSpec, params: &QuantumParams) -> Result<CMatrix> {
    let ops = Operators::new(spec);
    let p = parts(spec, params, Frame::Static, &ops)?;
    let h = p.free + p.coupling + p.drive;
    let dim = spec.dimension();
    let id = CMatrix::identity(dim, dim);
    let mut l = (id.kronecker(&h) - h.transpose().kronecker(&id)) * (-I);
    let mut dissipate = |c: &CMatrix, rate: f64| {
        if rate == 0.0 {
            return;
        }
        let cdc = c.adjoint() * c;
        let term = c.conjugate().kronecker(c)
            - (id.kronecker(&cdc) + cdc.transpose().kronecker(&id)) * Complex64::new(0.5, 0.0);
        l += term * Complex64::new(rate, 0.0);
    };
    dissipate(&ops.a[0], params.kappa);
    for s in &ops.sm {
        dissipate(s, params.gamma);
    }
    Ok(l)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub rho: CMatrix,
    /// `||L vec(rho)||`.
    pub residual: f64,
    /// `||L||` (Frobenius).
    pub liouvillian_norm: f64,
}

impl SteadyState {
    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn expect(&self, op: &CMatrix) -> Complex64 {
        (op * &self.rho).trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        sorted_eigenvalues(&self.rho)[0]
    }

    pub fn photon_number(&self, spec: &HilbertSpec) -> f64 {
        let a = spec.annihilation(0);
        self.expect(&(a.adjoint() * a)).re
    }

    /// Summed excited-state population of all atoms.
    pub fn excited_population(&self, spec: &HilbertSpec) -> f64 {
        (0..spec.n_atoms_q)
            .map(|n| self.expect(&spec.excited_projector(n)).re)
            .sum()
    }
}

/// Solves `L[rho] = 0` with one equation replaced by `tr(rho) = 1`.
pub fn lindblad_steady_state(spec: &HilbertSpec, params: &QuantumParams) -> Result<SteadyState> {
    let l = liouvillian(spec, params)?;
    let dim = spec.dimension();
    let n = dim * dim;
    if n <= UNIQUENESS_CHECK_LIMIT {
        let mut sv: Vec<f64> = l.clone().singular_values().iter().copied().collect();
        sv.sort_by(f64::total_cmp);
        let top = sv[n - 1];
        if n > 1 && sv[1] <= 1e-10 * top {
            return Err(Error::NonUniqueSteadyState);
        }
    }
    let mut a = l.clone();
    let mut b = DVector::<Complex64>::zeros(n);
    for c in 0..n {
        a[(0, c)] = ZERO;
    }
    for i in 0..dim {
        a[(0, i * dim + i)] = ONE;
    }
    b[0] = ONE;
    let x = a.lu().solve(&b).ok_or(Error::NonUniqueSteadyState)?;
    let residual = (&l * &x).norm();
    let rho = CMatrix::from_column_slice(dim, dim, x.as_slice());
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let tr = rho.trace();
    Ok(SteadyState {
        rho: rho / tr,
        residual,
        liouvillian_norm: l.norm(),
    })
}

/// Steady-state photon number at each probe-cavity detuning of `scan`,
/// keeping the cavity-atom detuning of the line fixed.
pub fn population_scan(
    spec: &HilbertSpec,
    params: &QuantumParams,
    scan: &[f64],
) -> Result<Vec<f64>> {
    scan.iter()
        .map(|&dc| population_at(spec, params, dc))
        .collect()
}

/// Steady-state photon number with the probe at `delta_c`.
pub fn population_at(spec: &HilbertSpec, params: &QuantumParams, delta_c: f64) -> Result<f64> {
    let mut p = params.clone();
    if let Some(line) = p.lines.first_mut() {
        line.delta_c = delta_c;
    }
    Ok(lindblad_steady_state(spec, &p)?.photon_number(spec))
}

/// Vertex of the parabola through three points.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Result<f64> {
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let curv = (d12 - d01) / (x[2] - x[0]);
    if curv == 0.0 || !curv.is_finite() {
        return Err(Error::BadScan);
    }
    Ok((x[0] + x[1]) / 2.0 - d01 / (2.0 * curv))
}

/// Peak position of `populations` over the increasing grid `scan`. The
/// vertex is taken on `1/population`, which is exactly quadratic for a
/// Lorentzian.
pub fn population_peak(scan: &[f64], populations: &[f64]) -> Result<f64> {
    if scan.len() != populations.len() || scan.len() < 3 || scan.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadScan);
    }
    let k = populations
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .ok_or(Error::BadScan)?;
    if k == 0 || k + 1 == scan.len() || populations[k] <= 0.0 {
        return Err(Error::BadScan);
    }
    let recip = [
        1.0 / populations[k - 1],
        1.0 / populations[k],
        1.0 / populations[k + 1],
    ];
    parabola_vertex([scan[k - 1], scan[k], scan[k + 1]], recip)
}

/// Dispersive cavity shift (rad/s) measured as the peak of the steady-state
/// photon number over `scan`. Compare against `N g0^2 / delta_a_mode`.
pub fn dispersive_shift_extract(
    spec: &HilbertSpec,
    params: &QuantumParams,
    scan: &[f64],
) -> Result<f64> {
    params.check(spec)?;
    if spec.n_modes_q != 1 {
        return Err(invalid("n_modes_q", "shift extraction needs a single mode"));
    }
    let da = params.lines[0].delta_a_mode;
    if params.g0 != 0.0 && !(params.g0 <= 0.05 * da.abs()) {
        return Err(invalid("g0", "g0 / |delta_a| must not exceed 0.05"));
    }
    let pops = population_scan(spec, params, scan)?;
    if pops.iter().any(|&n| !(n < 0.1)) {
        return Err(invalid(
            "eta",
            "drive is not weak: photon number reaches 0.1",
        ));
    }
    population_peak(scan, &pops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::angular;

    fn line(delta_c: f64) -> QuantumLine {
        QuantumLine {
            delta_c,
            delta_a_mode: angular(100e6),
        }
    }

    #[test]
    fn dimension_budget() {
        assert_eq!(HilbertSpec::new(3, 7, 1).unwrap().dimension(), 64);
        assert!(matches!(
            HilbertSpec::new(3, 8, 1),
            Err(Error::DimensionBudget { dim: 72, max: 64 })
        ));
        assert!(HilbertSpec::new(0, 2, 1).is_err());
    }

    #[test]
    fn uncoupled_hamiltonian_is_number_diagonal() {
        let spec = HilbertSpec::new(1, 4, 1).unwrap();
        let dc = angular(3e5);
        let p = QuantumParams::single(
            0.0,
            0.0,
            1.0,
            1.0,
            QuantumLine {
                delta_c: dc,
                delta_a_mode: 0.0,
            },
        );
        let h = build_hamiltonian(&spec, &p, Frame::Static).unwrap();
        assert_eq!(h.hermiticity_defect(), 0.0);
        for r in 0..h.dimension() {
            for c in 0..h.dimension() {
                if r != c {
                    assert_eq!(h.matrix[(r, c)], ZERO);
                }
            }
        }
        let n_of = |i: usize| (i / 2) as f64;
        for i in 0..h.dimension() {
            let atom = (i % 2) as f64 * dc;
            assert!((h.matrix[(i, i)].re + dc * n_of(i) + atom).abs() < 1e-6);
        }
    }

    #[test]
    fn jaynes_cummings_splitting() {
        let spec = HilbertSpec::new(1, 1, 1).unwrap();
        let g0 = angular(2e6);
        let l = QuantumLine {
            delta_c: angular(0.7e6),
            delta_a_mode: angular(13e6),
        };
        let p = QuantumParams::single(g0, 0.0, 0.0, 0.0, l);
        let e = build_hamiltonian(&spec, &p, Frame::Static)
            .unwrap()
            .eigenvalues();
        // |0,g> at 0, |1,e> at -dc - dp; the middle pair is the dressed doublet.
        let split = e[2] - e[1];
        let expect = libm::sqrt(l.delta_a_mode * l.delta_a_mode + 4.0 * g0 * g0);
        assert!((split - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn hamiltonian_is_hermitian_in_both_frames() {
        let spec = HilbertSpec::new(2, 2, 2).unwrap();
        let p = QuantumParams {
            g0: angular(1e6),
            eta: angular(0.1e6),
            kappa: 0.0,
            gamma: 0.0,
            lines: vec![line(0.3), line(-0.2)],
        };
        let h = build_hamiltonian(&spec, &p, Frame::CombRotating { t: 3.1e-7 }).unwrap();
        assert!(h.is_hermitian(1e-15));
        assert!(build_hamiltonian(&spec, &p, Frame::Static).is_err());
    }

    #[test]
    fn generator_residual_vanishes_and_detects_perturbation() {
        let spec = HilbertSpec::new(2, 2, 2).unwrap();
        let p = QuantumParams {
            g0: angular(2e6),
            eta: angular(0.05e6),
            kappa: 0.0,
            gamma: 0.0,
            lines: vec![
                QuantumLine {
                    delta_c: angular(0.2e6),
                    delta_a_mode: angular(495e6),
                },
                QuantumLine {
                    delta_c: angular(-0.1e6),
                    delta_a_mode: angular(-1437e6),
                },
            ],
        };
        let frame = Frame::CombRotating { t: 1.7e-6 };
        let r = sw_generator_residual(&spec, &p, frame).unwrap();
        assert!(r.residual < 1e-10 * r.coupling_norm, "{:?}", r);
        let off = sw_generator_residual_scaled(&spec, &p, frame, 1.01).unwrap();
        assert!(
            (off.residual / off.coupling_norm - 0.01).abs() < 1e-3,
            "{:?}",
            off
        );

        let single = HilbertSpec::new(1, 3, 1).unwrap();
        let q = QuantumParams::single(angular(2e6), 0.0, 0.0, 0.0, line(angular(0.4e6)));
        let r = sw_generator_residual(&single, &q, Frame::Static).unwrap();
        assert!(r.residual < 1e-10 * r.coupling_norm);

        let zero = QuantumParams {
            g0: 0.0,
            ..q.clone()
        };
        assert_eq!(
            sw_generator_residual(&single, &zero, Frame::Static)
                .unwrap()
                .residual,
            0.0
        );

        let singular = QuantumParams::single(
            angular(2e6),
            0.0,
            0.0,
            0.0,
            QuantumLine {
                delta_c: 0.0,
                delta_a_mode: 0.0,
            },
        );
        assert_eq!(
            sw_generator_residual(&single, &singular, Frame::Static),
            Err(Error::SingularGenerator { mode: 0 })
        );
    }

    #[test]
    fn empty_cavity_steady_state_is_coherent() {
        let spec = HilbertSpec::new(1, 6, 1).unwrap();
        let kappa = angular(0.2e6);
        let eta = 0.3 * kappa / 2.0;
        let dc = angular(0.05e6);
        let p = QuantumParams::single(0.0, eta, kappa, angular(1e6), line(dc));
        let ss = lindblad_steady_state(&spec, &p).unwrap();
        let expect = eta * eta / (kappa * kappa / 4.0 + dc * dc);
        assert!((ss.photon_number(&spec) - expect).abs() < 1e-6 * expect);
        assert!(ss.excited_population(&spec).abs() < 1e-12);
        assert!((ss.trace().re - 1.0).abs() < 1e-12);
        assert!(ss.min_eigenvalue() > -1e-10);
        assert!(ss.residual < 1e-10 * ss.liouvillian_norm);
    }

    #[test]
    fn undriven_steady_state_is_vacuum() {
        let spec = HilbertSpec::new(2, 2, 1).unwrap();
        let p = QuantumParams::single(angular(2e6), 0.0, angular(0.2e6), angular(1e6), line(0.0));
        let ss = lindblad_steady_state(&spec, &p).unwrap();
        assert!((ss.rho[(0, 0)].re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn undamped_system_is_not_unique() {
        let spec = HilbertSpec::new(1, 1, 1).unwrap();
        let p = QuantumParams::single(angular(2e6), 0.0, 0.0, 0.0, line(0.0));
        assert_eq!(
            lindblad_steady_state(&spec, &p),
            Err(Error::NonUniqueSteadyState)
        );
    }

    #[test]
    fn peak_of_exact_lorentzian_is_exact() {
        let x: Vec<f64> = (0..9).map(|i| -1.0 + 0.25 * i as f64).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&v| 1.0 / ((v - 0.137) * (v - 0.137) + 0.04))
            .collect();
        assert!((population_peak(&x, &y).unwrap() - 0.137).abs() < 1e-12);
        let edge = x.clone();
        assert_eq!(population_peak(&x, &edge), Err(Error::BadScan));
    }

    #[test]
    fn extraction_preconditions() {
        let spec = HilbertSpec::new(1, 3, 1).unwrap();
        let kappa = angular(0.2e6);
        let strong =
            QuantumParams::single(angular(10e6), 0.01 * kappa, kappa, angular(1e6), line(0.0));
        let scan = [-kappa, 0.0, kappa];
        assert!(dispersive_shift_extract(&spec, &strong, &scan).is_err());
        let loud = QuantumParams::single(angular(1e6), kappa, kappa, angular(1e6), line(0.0));
        assert!(dispersive_shift_extract(&spec, &loud, &scan).is_err());
    }
}
