//! Weakly coupled spin-1/2 systems: energy levels, single-quantum
//! transitions and their labelling, coherence orders, and transition
//! connectivity.
//!
//! A system of `n` spins has `2^n` levels indexed by bit strings
//! `b0 b1 ... b(n-1)`, one bit per spin in spin order, with bit 0 for
//! the alpha state (m = +1/2) and bit 1 for beta (m = -1/2). Spin 0 is
//! the most significant bit, so the printed label doubles as the matrix
//! index of the level.
//!
//! First-order (weak-coupling) energies are used throughout:
//!
//! ```text
//! E = sum_i  shift_i * m_i  +  sum_{i<j}  J_ij * m_i * m_j      (Hz)
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from system construction and level/transition queries.
#[derive(Debug, Error)]
pub enum SpinError {
    #[error("spin count {0} outside supported range 2-4")]
    BadSpinCount(usize),
    #[error("asymmetric couplings: j[{i}][{j}] = {a} but j[{j}][{i}] = {b}")]
    AsymmetricCouplings { i: usize, j: usize, a: f64, b: f64 },
    #[error("coupling diagonal must be exactly zero (j[{0}][{0}] = {1})")]
    NonzeroDiagonal(usize, f64),
    #[error("expected exactly one observer or work spin, found {0}")]
    BadRoleCount(usize),
    #[error("{field} has length {got}, expected {expected}")]
    LengthMismatch { field: &'static str, got: usize, expected: usize },
    #[error("non-finite parameter in {0}")]
    NonFinite(&'static str),
    #[error("label {label} has {got} bits, system has {expected} spins")]
    LabelLength { label: String, got: usize, expected: usize },
    #[error("invalid basis label '{0}': only '0' and '1' allowed")]
    BadLabel(String),
    #[error("levels {0} and {1} do not form a single-quantum transition")]
    NotSingleQuantum(String, String),
    #[error("spin index {got} out of range for {n_spins}-spin system")]
    SpinIndex { got: usize, n_spins: usize },
}

/// Role of one spin in an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// Extra spin whose transitions label the joint input states (gate experiments).
    Observer,
    /// Ancilla qubit absorbing the function value (Deutsch-Jozsa experiments).
    Work,
    /// Computation qubit; input ordering follows spin order.
    Input,
}

/// On-disk description of a spin system.
///
/// ```json
/// {"spins": 3, "shifts_hz": [100.0, 420.0, 780.0],
///  "j_hz": [[0,16,10],[16,0,6],[10,6,0]],
///  "roles": ["observer", "input", "input"]}
/// ```
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemConfig {
    pub spins: usize,
    pub shifts_hz: Vec<f64>,
    pub j_hz: Vec<Vec<f64>>,
    pub roles: Vec<Role>,
}

/// A validated weakly coupled spin-1/2 system.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem {
    n_spins: usize,
    shifts: Vec<f64>,
    couplings: Vec<Vec<f64>>,
    roles: Vec<Role>,
}

impl SpinSystem {
    /// Builds and validates a system from its raw parameters.
    pub fn new(
        shifts: Vec<f64>,
        couplings: Vec<Vec<f64>>,
        roles: Vec<Role>,
    ) -> Result<Self, SpinError> {
        let n = shifts.len();
        if !(2..=4).contains(&n) {
            return Err(SpinError::BadSpinCount(n));
        }
        if couplings.len() != n {
            return Err(SpinError::LengthMismatch {
                field: "j_hz",
                got: couplings.len(),
                expected: n,
            });
        }
        for (i, row) in couplings.iter().enumerate() {
            if row.len() != n {
                return Err(SpinError::LengthMismatch {
                    field: "j_hz row",
                    got: row.len(),
                    expected: n,
                });
            }
            if row[i] != 0.0 {
                return Err(SpinError::NonzeroDiagonal(i, row[i]));
            }
        }
        if roles.len() != n {
            return Err(SpinError::LengthMismatch {
                field: "roles",
                got: roles.len(),
                expected: n,
            });
        }
        if shifts.iter().any(|s| !s.is_finite()) {
            return Err(SpinError::NonFinite("shifts_hz"));
        }
        for i in 0..n {
            for j in 0..n {
                if !couplings[i][j].is_finite() {
                    return Err(SpinError::NonFinite("j_hz"));
                }
                if couplings[i][j] != couplings[j][i] {
                    return Err(SpinError::AsymmetricCouplings {
                        i,
                        j,
                        a: couplings[i][j],
                        b: couplings[j][i],
                    });
                }
            }
        }
        let special = roles.iter().filter(|r| **r != Role::Input).count();
        if special != 1 {
            return Err(SpinError::BadRoleCount(special));
        }
        Ok(Self { n_spins: n, shifts, couplings, roles })
    }

    pub fn from_config(cfg: &SystemConfig) -> Result<Self, SpinError> {
        if cfg.shifts_hz.len() != cfg.spins {
            return Err(SpinError::LengthMismatch {
                field: "shifts_hz",
                got: cfg.shifts_hz.len(),
                expected: cfg.spins,
            });
        }
        Self::new(cfg.shifts_hz.clone(), cfg.j_hz.clone(), cfg.roles.clone())
    }

    pub fn to_config(&self) -> SystemConfig {
        SystemConfig {
            spins: self.n_spins,
            shifts_hz: self.shifts.clone(),
            j_hz: self.couplings.clone(),
            roles: self.roles.clone(),
        }
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        1 << self.n_spins
    }

    pub fn shift(&self, spin: usize) -> f64 {
        self.shifts[spin]
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[i][j]
    }

    pub fn role(&self, spin: usize) -> Role {
        self.roles[spin]
    }

    /// The observer spin, if the system has one.
    pub fn observer(&self) -> Option<usize> {
        self.roles.iter().position(|r| *r == Role::Observer)
    }

    /// The work qubit, if the system has one.
    pub fn work(&self) -> Option<usize> {
        self.roles.iter().position(|r| *r == Role::Work)
    }

    /// The single non-input spin (observer or work).
    pub fn reference_spin(&self) -> usize {
        self.roles
            .iter()
            .position(|r| *r != Role::Input)
            .expect("validated system has one observer/work spin")
    }

    /// Input qubits in I1, I2, ... order (spin order).
    pub fn input_spins(&self) -> Vec<usize> {
        (0..self.n_spins)
            .filter(|&i| self.roles[i] == Role::Input)
            .collect()
    }

    /// True when |J_ij| < |shift_i - shift_j| for every coupled pair.
    ///
    /// Advisory only: the secular Hamiltonian is diagonal by construction,
    /// so a violation affects physical plausibility, not the simulation.
    pub fn weak_coupling_satisfied(&self) -> bool {
        for i in 0..self.n_spins {
            for j in (i + 1)..self.n_spins {
                let j_ij = self.couplings[i][j];
                if j_ij != 0.0 && j_ij.abs() >= (self.shifts[i] - self.shifts[j]).abs() {
                    return false;
                }
            }
        }
        true
    }

    /// Human-readable advisories computed at build time: weak-coupling
    /// violations and degenerate line positions.
    pub fn validation_warnings(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        for i in 0..self.n_spins {
            for j in (i + 1)..self.n_spins {
                let j_ij = self.couplings[i][j];
                if j_ij != 0.0 && j_ij.abs() >= (self.shifts[i] - self.shifts[j]).abs() {
                    warnings.push(format!(
                        "weak-coupling advisory: |J{i}{j}| = {} Hz >= |shift{i} - shift{j}| = {} Hz",
                        j_ij.abs(),
                        (self.shifts[i] - self.shifts[j]).abs()
                    ));
                }
            }
        }
        for spin in 0..self.n_spins {
            let mut freqs: Vec<f64> = self
                .single_quantum_transitions(spin)
                .iter()
                .map(|t| self.transition_frequency(t).expect("enumerated transition"))
                .collect();
            freqs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if freqs.windows(2).any(|w| (w[1] - w[0]).abs() < 1e-9) {
                warnings.push(format!(
                    "degenerate spectrum: spin I{spin} has coincident transition frequencies"
                ));
            }
        }
        warnings
    }

    /// First-order level energy in Hz.
    pub fn level_energy(&self, label: BasisLabel) -> Result<f64, SpinError> {
        if label.n_spins() != self.n_spins {
            return Err(SpinError::LabelLength {
                label: label.to_string(),
                got: label.n_spins(),
                expected: self.n_spins,
            });
        }
        let mut energy = 0.0;
        for i in 0..self.n_spins {
            energy += self.shifts[i] * label.m(i);
        }
        for i in 0..self.n_spins {
            for j in (i + 1)..self.n_spins {
                energy += self.couplings[i][j] * label.m(i) * label.m(j);
            }
        }
        Ok(energy)
    }

    /// |E(lower) - E(upper)| of a single-quantum transition, in Hz.
    pub fn transition_frequency(&self, t: &TransitionRef) -> Result<f64, SpinError> {
        Ok((self.level_energy(t.lower())? - self.level_energy(t.upper())?).abs())
    }

    /// All single-quantum transitions of one spin, in descending order of
    /// the spectator bit string, so a 3-spin observer enumerates as
    /// 11, 10, 01, 00.
    pub fn single_quantum_transitions(&self, spin: usize) -> Vec<TransitionRef> {
        assert!(spin < self.n_spins, "spin index out of range");
        let n = self.n_spins;
        let count = 1usize << (n - 1);
        (0..count)
            .rev()
            .map(|spectators| {
                let mut lower = 0usize;
                let mut k = n - 2;
                for i in 0..n {
                    if i == spin {
                        continue;
                    }
                    let bit = (spectators >> k) & 1;
                    lower |= bit << (n - 1 - i);
                    k = k.wrapping_sub(1);
                }
                let upper = lower | (1 << (n - 1 - spin));
                TransitionRef::new(BasisLabel::new(lower, n), BasisLabel::new(upper, n))
                    .expect("constructed pair differs at one bit")
            })
            .collect()
    }

    /// Observer (or work) lines as `(spectator label, frequency)` pairs in
    /// the canonical 11..00 order.
    pub fn reference_lines(&self) -> Vec<(String, f64)> {
        let spin = self.reference_spin();
        self.single_quantum_transitions(spin)
            .iter()
            .map(|t| {
                let label = t.spectator_label();
                let freq = self.transition_frequency(t).expect("enumerated transition");
                (label, freq)
            })
            .collect()
    }
}

/// One level of the 2^n-dimensional state space, as an ordered bit string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisLabel {
    index: usize,
    n_spins: usize,
}

impl BasisLabel {
    /// Label from its matrix index; spin 0 is the most significant bit.
    pub fn new(index: usize, n_spins: usize) -> Self {
        assert!(index < (1 << n_spins), "index out of range");
        Self { index, n_spins }
    }

    /// Parses a bit string such as `"101"`.
    pub fn parse(s: &str) -> Result<Self, SpinError> {
        if s.is_empty() || !s.chars().all(|c| c == '0' || c == '1') {
            return Err(SpinError::BadLabel(s.to_string()));
        }
        let index = usize::from_str_radix(s, 2).map_err(|_| SpinError::BadLabel(s.to_string()))?;
        Ok(Self { index, n_spins: s.len() })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    /// Bit of `spin`: 0 for alpha (m = +1/2), 1 for beta (m = -1/2).
    pub fn bit(&self, spin: usize) -> u8 {
        ((self.index >> (self.n_spins - 1 - spin)) & 1) as u8
    }

    /// Magnetic quantum number of `spin`.
    pub fn m(&self, spin: usize) -> f64 {
        0.5 - self.bit(spin) as f64
    }

    /// Sum of m over all spins.
    pub fn total_m(&self) -> f64 {
        (0..self.n_spins).map(|i| self.m(i)).sum()
    }

    pub fn flip(&self, spin: usize) -> Self {
        Self {
            index: self.index ^ (1 << (self.n_spins - 1 - spin)),
            n_spins: self.n_spins,
        }
    }

    /// Global spin flip of every bit.
    pub fn flip_all(&self) -> Self {
        Self {
            index: !self.index & ((1 << self.n_spins) - 1),
            n_spins: self.n_spins,
        }
    }

    /// All labels of an n-spin system in index order.
    pub fn all(n_spins: usize) -> impl Iterator<Item = BasisLabel> {
        (0..1usize << n_spins).map(move |i| BasisLabel::new(i, n_spins))
    }

    pub fn hamming_distance(&self, other: &BasisLabel) -> usize {
        (self.index ^ other.index).count_ones() as usize
    }
}

impl std::fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.n_spins {
            write!(f, "{}", self.bit(i))?;
        }
        Ok(())
    }
}

/// A single-quantum transition between two levels differing in exactly one
/// bit. `lower` always carries bit 0 (alpha) at the flipped spin, matching
/// the convention of energy-level diagrams where beta-heavy levels sit on
/// top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TransitionRef {
    lower: BasisLabel,
    upper: BasisLabel,
    flipped_spin: usize,
}

impl TransitionRef {
    /// Builds a transition from two levels, normalizing their order.
    pub fn new(a: BasisLabel, b: BasisLabel) -> Result<Self, SpinError> {
        if a.n_spins() != b.n_spins() || a.hamming_distance(&b) != 1 {
            return Err(SpinError::NotSingleQuantum(a.to_string(), b.to_string()));
        }
        let n = a.n_spins();
        let diff = a.index() ^ b.index();
        let flipped_spin = n - 1 - diff.trailing_zeros() as usize;
        let (lower, upper) = if a.bit(flipped_spin) == 0 { (a, b) } else { (b, a) };
        Ok(Self { lower, upper, flipped_spin })
    }

    /// Parses `"110-111"` style transition labels.
    pub fn parse(s: &str) -> Result<Self, SpinError> {
        let (a, b) = s
            .split_once('-')
            .ok_or_else(|| SpinError::BadLabel(s.to_string()))?;
        Self::new(BasisLabel::parse(a)?, BasisLabel::parse(b)?)
    }

    pub fn lower(&self) -> BasisLabel {
        self.lower
    }

    pub fn upper(&self) -> BasisLabel {
        self.upper
    }

    pub fn flipped_spin(&self) -> usize {
        self.flipped_spin
    }

    pub fn n_spins(&self) -> usize {
        self.lower.n_spins()
    }

    /// Spectator bits (every spin except the flipped one) in spin order.
    pub fn spectator_label(&self) -> String {
        (0..self.n_spins())
            .filter(|&i| i != self.flipped_spin)
            .map(|i| char::from(b'0' + self.lower.bit(i)))
            .collect()
    }

    /// True when the transition involves `level`.
    pub fn touches(&self, level: BasisLabel) -> bool {
        self.lower == level || self.upper == level
    }
}

impl std::fmt::Display for TransitionRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-{}", self.lower, self.upper)
    }
}

/// Coherence order of a density-matrix element between two levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoherenceClass {
    Population,
    SingleQuantum,
    ZeroQuantum,
    DoubleQuantum,
    Higher,
}

impl std::fmt::Display for CoherenceClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CoherenceClass::Population => "population",
            CoherenceClass::SingleQuantum => "SQ",
            CoherenceClass::ZeroQuantum => "ZQ",
            CoherenceClass::DoubleQuantum => "DQ",
            CoherenceClass::Higher => "higher",
        };
        write!(f, "{s}")
    }
}

/// Classifies the element between levels `a` and `b`.
///
/// Two-flip pairs split by flip direction: opposite directions give zero
/// quantum, same direction double quantum; neither is directly observable.
pub fn coherence_order_class(a: BasisLabel, b: BasisLabel) -> Result<CoherenceClass, SpinError> {
    if a.n_spins() != b.n_spins() {
        return Err(SpinError::LabelLength {
            label: b.to_string(),
            got: b.n_spins(),
            expected: a.n_spins(),
        });
    }
    Ok(match a.hamming_distance(&b) {
        0 => CoherenceClass::Population,
        1 => CoherenceClass::SingleQuantum,
        2 => {
            let mut directions = Vec::with_capacity(2);
            for i in 0..a.n_spins() {
                if a.bit(i) != b.bit(i) {
                    directions.push(b.bit(i) as i8 - a.bit(i) as i8);
                }
            }
            if directions[0] == directions[1] {
                CoherenceClass::DoubleQuantum
            } else {
                CoherenceClass::ZeroQuantum
            }
        }
        _ => CoherenceClass::Higher,
    })
}

/// How two single-quantum transitions share a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    /// Chained: the shared level is the upper of one and the lower of the other.
    Progressive,
    /// The transitions share their common upper or common lower level.
    Regressive,
    Unconnected,
}

/// Level-sharing classification of two transitions. Pairs sharing both
/// levels (the same transition) count as unconnected.
pub fn connectivity(t1: &TransitionRef, t2: &TransitionRef) -> Connectivity {
    let shared: Vec<BasisLabel> = [t1.lower(), t1.upper()]
        .into_iter()
        .filter(|l| t2.touches(*l))
        .collect();
    if shared.len() != 1 {
        return Connectivity::Unconnected;
    }
    let level = shared[0];
    let upper_of_t1 = t1.upper() == level;
    let upper_of_t2 = t2.upper() == level;
    if upper_of_t1 == upper_of_t2 {
        Connectivity::Regressive
    } else {
        Connectivity::Progressive
    }
}
