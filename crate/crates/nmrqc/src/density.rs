//! Deviation density matrices and the ideal propagators that drive them:
//! hard and transition-selective pulses, free evolution under the secular
//! Hamiltonian, gradient crushing, and quadrature detection.
//!
//! Pulses are instantaneous unitaries; relaxation, r.f. inhomogeneity and
//! finite pulse durations are not modeled. The rotation convention is
//! `exp(-i * angle * operator)` with phase 0 along +x and pi/2 along +y.

use ndarray::linalg::kron;
use ndarray::Array2;
use num_complex::Complex64;
use std::f64::consts::TAU;
use thiserror::Error;

use crate::spin::{BasisLabel, SpinSystem, TransitionRef};

type CMat = Array2<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Error)]
pub enum DensityError {
    #[error("dimension mismatch: state is {state}x{state}, operator is {op}x{op}")]
    DimensionMismatch { state: usize, op: usize },
    #[error("transition {transition} does not fit a {n_spins}-spin system")]
    TransitionSize { transition: String, n_spins: usize },
    #[error("empty spin set")]
    EmptySpinSet,
}

fn identity(dim: usize) -> CMat {
    Array2::eye(dim).mapv(|x: f64| Complex64::new(x, 0.0))
}

/// 2x2 rotation `exp(-i*angle*(cos(phase)*Ix + sin(phase)*Iy))` where
/// I = sigma/2.
fn spin_half_rotation(angle: f64, phase: f64) -> CMat {
    let half = angle / 2.0;
    let c = Complex64::new(half.cos(), 0.0);
    let s = half.sin();
    let off_upper = Complex64::new(0.0, -s) * Complex64::from_polar(1.0, -phase);
    let off_lower = Complex64::new(0.0, -s) * Complex64::from_polar(1.0, phase);
    ndarray::array![[c, off_upper], [off_lower, c]]
}

/// A 2^n x 2^n unitary acting on the level space.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    matrix: CMat,
}

impl Propagator {
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn identity(n_spins: usize) -> Self {
        Self { matrix: identity(1 << n_spins) }
    }

    /// Rotation of every listed spin by `angle` about the axis at `phase`
    /// in the transverse plane; identity on the rest. A single-spin set
    /// gives the spin-selective pulse, the full set the non-selective
    /// (hard) pulse.
    pub fn hard_pulse(
        system: &SpinSystem,
        spins: &[usize],
        angle: f64,
        phase: f64,
    ) -> Result<Self, DensityError> {
        if spins.is_empty() {
            return Err(DensityError::EmptySpinSet);
        }
        let rot = spin_half_rotation(angle, phase);
        let eye = identity(2);
        let mut matrix = if spins.contains(&0) { rot.clone() } else { eye.clone() };
        for spin in 1..system.n_spins() {
            let factor = if spins.contains(&spin) { &rot } else { &eye };
            matrix = kron(&matrix, factor);
        }
        Ok(Self { matrix })
    }

    /// Rotation confined to the two-level subspace of one single-quantum
    /// transition; identity everywhere else. Ideal selectivity is assumed
    /// even when other transitions share the frequency.
    pub fn transition_pulse(
        system: &SpinSystem,
        transition: &TransitionRef,
        angle: f64,
        phase: f64,
    ) -> Result<Self, DensityError> {
        if transition.n_spins() != system.n_spins() {
            return Err(DensityError::TransitionSize {
                transition: transition.to_string(),
                n_spins: system.n_spins(),
            });
        }
        let mut matrix = identity(system.dim());
        let block = spin_half_rotation(angle, phase);
        let lo = transition.lower().index();
        let up = transition.upper().index();
        matrix[[lo, lo]] = block[[0, 0]];
        matrix[[lo, up]] = block[[0, 1]];
        matrix[[up, lo]] = block[[1, 0]];
        matrix[[up, up]] = block[[1, 1]];
        Ok(Self { matrix })
    }

    /// Free evolution for `duration` seconds: a diagonal propagator with
    /// phases `exp(-i*2pi*E(level)*duration)`.
    pub fn free_evolution(system: &SpinSystem, duration: f64) -> Self {
        let dim = system.dim();
        let mut matrix = Array2::from_elem((dim, dim), ZERO);
        for label in BasisLabel::all(system.n_spins()) {
            let energy = system.level_energy(label).expect("label matches system");
            matrix[[label.index(), label.index()]] =
                Complex64::from_polar(1.0, -TAU * energy * duration);
        }
        Self { matrix }
    }
}

/// Traceless Hermitian deviation density matrix over the 2^n level space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    matrix: CMat,
    n_spins: usize,
}

impl DensityState {
    pub fn from_matrix(matrix: CMat, n_spins: usize) -> Self {
        assert_eq!(matrix.nrows(), 1 << n_spins);
        assert_eq!(matrix.ncols(), 1 << n_spins);
        Self { matrix, n_spins }
    }

    /// High-temperature equilibrium deviation state: the diagonal sum of
    /// I_iz with equal unit weights per spin (homonuclear assumption).
    pub fn equilibrium(system: &SpinSystem) -> Self {
        let dim = system.dim();
        let mut matrix = Array2::from_elem((dim, dim), ZERO);
        for label in BasisLabel::all(system.n_spins()) {
            matrix[[label.index(), label.index()]] = Complex64::new(label.total_m(), 0.0);
        }
        Self { matrix, n_spins: system.n_spins() }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Unitary conjugation `U rho U^dagger`.
    pub fn apply(&self, propagator: &Propagator) -> Result<Self, DensityError> {
        if propagator.dim() != self.dim() {
            return Err(DensityError::DimensionMismatch {
                state: self.dim(),
                op: propagator.dim(),
            });
        }
        let u = propagator.matrix();
        let u_dagger = u.t().mapv(|z| z.conj());
        let matrix = u.dot(&self.matrix).dot(&u_dagger);
        Ok(Self { matrix, n_spins: self.n_spins })
    }

    /// Free evolution applied element-wise; equal to
    /// `apply(&Propagator::free_evolution(system, duration))` but without
    /// the matrix products, which keeps the t1/t2 loops cheap.
    pub fn evolve(&self, system: &SpinSystem, duration: f64) -> Self {
        let energies: Vec<f64> = BasisLabel::all(self.n_spins)
            .map(|l| system.level_energy(l).expect("label matches system"))
            .collect();
        let mut matrix = self.matrix.clone();
        for a in 0..self.dim() {
            for b in 0..self.dim() {
                if a == b {
                    continue;
                }
                let phase = Complex64::from_polar(1.0, -TAU * (energies[a] - energies[b]) * duration);
                matrix[[a, b]] *= phase;
            }
        }
        Self { matrix, n_spins: self.n_spins }
    }

    /// Idealized gradient crusher: every off-diagonal element is zeroed,
    /// including zero-quantum coherences; the diagonal is untouched.
    pub fn gradient_crush(&self) -> Self {
        let mut matrix = Array2::from_elem((self.dim(), self.dim()), ZERO);
        for i in 0..self.dim() {
            matrix[[i, i]] = self.matrix[[i, i]];
        }
        Self { matrix, n_spins: self.n_spins }
    }

    /// Coherence-pathway selection: zeroes every off-diagonal element
    /// except single-quantum coherences of the listed spins. This is the
    /// action of the purge gradient in the 2D scheme, which removes the
    /// unwanted transverse magnetization while the frequency-labelled
    /// coherence of the detected spin carries on into the mixing period.
    pub fn retain_single_quantum(&self, spins: &[usize]) -> Self {
        let n = self.n_spins;
        let mut matrix = Array2::from_elem((self.dim(), self.dim()), ZERO);
        for a in BasisLabel::all(n) {
            for b in BasisLabel::all(n) {
                let element = self.matrix[[a.index(), b.index()]];
                if a == b {
                    matrix[[a.index(), b.index()]] = element;
                    continue;
                }
                if a.hamming_distance(&b) == 1 {
                    let flipped = (0..n).find(|&i| a.bit(i) != b.bit(i)).expect("distance 1");
                    if spins.contains(&flipped) {
                        matrix[[a.index(), b.index()]] = element;
                    }
                }
            }
        }
        Self { matrix, n_spins: n }
    }

    /// Quadrature observable `Tr(rho * sum_i (I_ix + i*I_iy))` over the
    /// detected spins. Only beta->alpha single-quantum elements of those
    /// spins contribute.
    pub fn detect(&self, spins: &[usize]) -> Complex64 {
        let n = self.n_spins;
        let mut signal = ZERO;
        for &spin in spins {
            let bit = 1usize << (n - 1 - spin);
            for x in 0..self.dim() {
                if x & bit == 0 {
                    signal += self.matrix[[x | bit, x]];
                }
            }
        }
        signal
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.matrix[[i, i]]).sum()
    }

    /// Largest absolute deviation from Hermitian symmetry.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..self.dim() {
            for b in 0..self.dim() {
                worst = worst.max((self.matrix[[a, b]] - self.matrix[[b, a]].conj()).norm());
            }
        }
        worst
    }

    /// Diagonal (populations) as real values.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[[i, i]].re).collect()
    }
}

/// Maximum absolute entry of `U^dagger U - I`; zero for an exact unitary.
pub fn unitarity_defect(propagator: &Propagator) -> f64 {
    let u = propagator.matrix();
    let product = u.t().mapv(|z| z.conj()).dot(u);
    let mut worst: f64 = 0.0;
    for a in 0..propagator.dim() {
        for b in 0..propagator.dim() {
            let expected = if a == b { ONE } else { ZERO };
            worst = worst.max((product[[a, b]] - expected).norm());
        }
    }
    worst
}

/// Samples `detect` over `n_points` acquisitions separated by `dwell`
/// seconds of free evolution, starting at the current state. Apodization
/// is left to the spectral processing stage.
pub fn run_fid(
    system: &SpinSystem,
    state: &DensityState,
    spins: &[usize],
    n_points: usize,
    dwell: f64,
) -> Vec<Complex64> {
    let mut series = Vec::with_capacity(n_points);
    let mut current = state.clone();
    for k in 0..n_points {
        if k > 0 {
            current = current.evolve(system, dwell);
        }
        series.push(current.detect(spins));
    }
    series
}
