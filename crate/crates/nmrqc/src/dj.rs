//! One- and two-bit Deutsch-Jozsa on thermal spin systems: the function
//! catalog, compilation of the function propagator U_f into selective
//! pulses on the work qubit, the simulated 2D run with its
//! constant/balanced verdict, and the symbolic input-output correlation
//! rows that explain which input-qubit transitions survive.
//!
//! The experiment starts from a non-selective (pi/2)_y pulse, evolves for
//! t1, applies U_f and acquires every spin. U_f realizes
//! `|r>|s> -> |r + f(s)>|s>` by a transition-selective pi pulse on the
//! work-qubit transition labelled by each input state with f = 1. When f
//! differs across an input-qubit transition pair, the pair leaves as a
//! zero- or double-quantum coherence and that input multiplet vanishes;
//! a constant function keeps every input multiplet visible.

use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

use crate::experiment::{process, run_2d, Acquisition, ExperimentError, Spectrum2D};
use crate::program::{Phase, ProgramError, PulseEvent, PulseProgram, SpinSelector};
use crate::spin::{coherence_order_class, BasisLabel, CoherenceClass, SpinSystem, TransitionRef};

/// Input-band presence cutoff relative to the work-qubit band. Ideal
/// simulation puts the ratio near 0 or near 1; 0.1 leaves margin for
/// apodization leakage.
pub const PRESENCE_THRESHOLD: f64 = 0.1;

#[derive(Debug, Error)]
pub enum DjError {
    #[error("unsupported bits {0}, expected 1 or 2")]
    UnsupportedBits(usize),
    #[error("unknown function '{name}' for {bits}-bit catalog")]
    UnknownFunction { name: String, bits: usize },
    #[error("{bits}-bit function needs a work qubit and {bits} input spins, system has {summary}")]
    ArityMismatch { bits: usize, summary: String },
    #[error("multiplet bands of I{a} and I{b} overlap; spread the shifts or couplings")]
    BandOverlap { a: usize, b: usize },
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Program(#[from] ProgramError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionKind {
    Constant,
    Balanced,
}

impl std::fmt::Display for FunctionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FunctionKind::Constant => write!(f, "constant"),
            FunctionKind::Balanced => write!(f, "balanced"),
        }
    }
}

/// One binary function from the DJ catalog.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionSpec {
    bits: usize,
    name: String,
    outputs: Vec<u8>,
    kind: FunctionKind,
}

impl FunctionSpec {
    fn new(bits: usize, index: usize, outputs: Vec<u8>) -> Self {
        debug_assert_eq!(outputs.len(), 1 << bits);
        let ones = outputs.iter().filter(|o| **o == 1).count();
        let kind = if ones == 0 || ones == outputs.len() {
            FunctionKind::Constant
        } else {
            debug_assert_eq!(ones * 2, outputs.len());
            FunctionKind::Balanced
        };
        Self { bits, name: format!("f{index}"), outputs, kind }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> FunctionKind {
        self.kind
    }

    /// f evaluated on the input value (inputs read MSB-first as s, t).
    pub fn eval(&self, input: usize) -> u8 {
        self.outputs[input]
    }

    pub fn outputs(&self) -> &[u8] {
        &self.outputs
    }
}

/// The 4 one-bit or 8 two-bit binary functions, f1 and f2 constant, the
/// rest balanced.
pub fn function_catalog(bits: usize) -> Result<Vec<FunctionSpec>, DjError> {
    let tables: Vec<Vec<u8>> = match bits {
        1 => vec![vec![0, 0], vec![1, 1], vec![0, 1], vec![1, 0]],
        2 => vec![
            vec![0, 0, 0, 0],
            vec![1, 1, 1, 1],
            vec![0, 0, 1, 1],
            vec![1, 1, 0, 0],
            vec![1, 0, 1, 0],
            vec![0, 1, 0, 1],
            vec![1, 0, 0, 1],
            vec![0, 1, 1, 0],
        ],
        other => return Err(DjError::UnsupportedBits(other)),
    };
    Ok(tables
        .into_iter()
        .enumerate()
        .map(|(i, outputs)| FunctionSpec::new(bits, i + 1, outputs))
        .collect())
}

pub fn find_function(bits: usize, name: &str) -> Result<FunctionSpec, DjError> {
    function_catalog(bits)?
        .into_iter()
        .find(|f| f.name() == name)
        .ok_or_else(|| DjError::UnknownFunction { name: name.to_string(), bits })
}

fn check_system(f: &FunctionSpec, system: &SpinSystem) -> Result<(usize, Vec<usize>), DjError> {
    let work = system.work();
    let inputs = system.input_spins();
    if work.is_none() || inputs.len() != f.bits() || system.n_spins() != f.bits() + 1 {
        return Err(DjError::ArityMismatch {
            bits: f.bits(),
            summary: format!(
                "{} spins with {}",
                system.n_spins(),
                match work {
                    Some(w) => format!("work I{w}"),
                    None => "no work qubit".to_string(),
                }
            ),
        });
    }
    Ok((work.unwrap(), inputs))
}

/// Work-qubit transition labelled by input state `sigma`.
fn work_transition(
    system: &SpinSystem,
    work: usize,
    inputs: &[usize],
    sigma: usize,
) -> TransitionRef {
    let n = system.n_spins();
    let mut lower = 0usize;
    for (k, &spin) in inputs.iter().enumerate() {
        let bit = (sigma >> (inputs.len() - 1 - k)) & 1;
        lower |= bit << (n - 1 - spin);
    }
    let upper = lower | (1 << (n - 1 - work));
    TransitionRef::new(BasisLabel::new(lower, n), BasisLabel::new(upper, n))
        .expect("constructed pair differs at the work bit")
}

/// Compiles U_f: one transition-selective pi_x per input state with
/// f = 1, ordered by ascending input label; the all-ones function
/// collapses to a single spin-selective pi_x on the work qubit and the
/// all-zeros function to no pulse at all.
pub fn compile_uf(f: &FunctionSpec, system: &SpinSystem) -> Result<Vec<PulseEvent>, DjError> {
    let (work, inputs) = check_system(f, system)?;
    if f.outputs().iter().all(|o| *o == 0) {
        return Ok(Vec::new());
    }
    if f.outputs().iter().all(|o| *o == 1) {
        return Ok(vec![PulseEvent::SelectivePulse {
            spin: work,
            angle: PI,
            phase: Phase::X,
        }]);
    }
    Ok((0..1usize << f.bits())
        .filter(|sigma| f.eval(*sigma) == 1)
        .map(|sigma| PulseEvent::TransitionPulse {
            transition: work_transition(system, work, &inputs, sigma),
            angle: PI,
            phase: Phase::X,
        })
        .collect())
}

/// The full DJ pulse program: non-selective (pi/2)_y, t1, U_f, acquire
/// everything.
pub fn dj_program(f: &FunctionSpec, system: &SpinSystem) -> Result<PulseProgram, DjError> {
    let mut events = vec![
        PulseEvent::HardPulse {
            spins: SpinSelector::All,
            angle: FRAC_PI_2,
            phase: Phase::Y,
        },
        PulseEvent::EvolveT1,
    ];
    events.extend(compile_uf(f, system)?);
    events.push(PulseEvent::Acquire { spins: SpinSelector::All });
    Ok(PulseProgram::new(f.name(), events)?)
}

/// Verdict and per-spin band energies of one DJ run.
#[derive(Debug, Clone, Serialize)]
pub struct DjOutcome {
    pub function: String,
    pub bits: usize,
    /// Spectral power integrated over each spin's multiplet band, keyed
    /// by spin ("I0" is the work qubit).
    pub bands: BTreeMap<String, f64>,
    pub verdict: FunctionKind,
}

impl DjOutcome {
    pub fn band(&self, spin: usize) -> f64 {
        self.bands[&format!("I{spin}")]
    }
}

fn circular_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

/// Integrates each spin's multiplet band of `spectrum` along F2 (F1
/// integrated fully): band half-width is the sum of |J| to all partners
/// plus two spectral bins around the spin's shift.
pub fn band_energies(
    system: &SpinSystem,
    spectrum: &Spectrum2D,
) -> Result<BTreeMap<String, f64>, DjError> {
    let n = system.n_spins();
    let sw2 = spectrum.sw2();
    let df2 = spectrum.df2();
    let centers: Vec<f64> = (0..n).map(|i| system.shift(i).rem_euclid(sw2)).collect();
    let half_widths: Vec<f64> = (0..n)
        .map(|i| {
            let j_sum: f64 = (0..n).map(|j| system.coupling(i, j).abs()).sum();
            j_sum + 2.0 * df2
        })
        .collect();
    for a in 0..n {
        for b in (a + 1)..n {
            if circular_distance(centers[a], centers[b], sw2) <= half_widths[a] + half_widths[b] {
                return Err(DjError::BandOverlap { a, b });
            }
        }
    }

    let mags = spectrum.magnitudes();
    let (rows, cols) = mags.dim();
    let mut bands = BTreeMap::new();
    for spin in 0..n {
        let mut energy = 0.0;
        for j in 0..cols {
            if circular_distance(spectrum.axis2()[j], centers[spin], sw2) <= half_widths[spin] {
                for i in 0..rows {
                    energy += mags[[i, j]] * mags[[i, j]];
                }
            }
        }
        bands.insert(format!("I{spin}"), energy);
    }
    Ok(bands)
}

/// Runs the DJ experiment and classifies the function: constant iff every
/// input qubit's band energy reaches [`PRESENCE_THRESHOLD`] times the
/// work-qubit band energy.
pub fn run_dj(
    system: &SpinSystem,
    f: &FunctionSpec,
    acq: &Acquisition,
) -> Result<DjOutcome, DjError> {
    let (work, inputs) = check_system(f, system)?;
    let program = dj_program(f, system)?;
    let raw = run_2d(system, &program, acq.n_t1, acq.dwell1, acq.n_t2, acq.dwell2)?;
    let spectrum = process(&raw, acq.zerofill, acq.default_line_broadening())?;
    let bands = band_energies(system, &spectrum)?;

    let work_energy = bands[&format!("I{work}")];
    let all_present = inputs
        .iter()
        .all(|i| bands[&format!("I{i}")] >= PRESENCE_THRESHOLD * work_energy);
    Ok(DjOutcome {
        function: f.name().to_string(),
        bits: f.bits(),
        bands,
        verdict: if all_present {
            FunctionKind::Constant
        } else {
            FunctionKind::Balanced
        },
    })
}

/// Observability class of an input-qubit transition after U_f.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IoClass {
    #[serde(rename = "SQ")]
    ObservableSq,
    #[serde(rename = "ZQ")]
    ZeroQuantum,
    #[serde(rename = "DQ")]
    DoubleQuantum,
}

/// One symbolic input-output correlation row: an input-qubit transition
/// pair, its image under U_f, and whether the image is still observable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IoCorrelationRow {
    pub qubit: String,
    pub input: (String, String),
    pub output: (String, String),
    pub class: IoClass,
}

/// Derives the input-output correlation table of `f` on the canonical
/// layout (work qubit first, then inputs): every input-qubit transition
/// pair is mapped member-wise through `|r>|s> -> |r + f(s)>|s>`; pairs
/// whose members pick up opposite work flips leave as ZQ or DQ and are
/// non-observable. Rows are ordered by qubit, then ascending lower label.
pub fn symbolic_io(f: &FunctionSpec) -> Vec<IoCorrelationRow> {
    let bits = f.bits();
    let n = bits + 1;
    let input_mask = (1usize << bits) - 1;
    let work_bit = 1usize << bits;
    let image = |x: usize| -> usize {
        if f.eval(x & input_mask) == 1 {
            x ^ work_bit
        } else {
            x
        }
    };

    let mut rows = Vec::new();
    for qubit in 1..=bits {
        let qubit_bit = 1usize << (n - 1 - qubit);
        for a in 0..1usize << n {
            if a & qubit_bit != 0 {
                continue;
            }
            let b = a | qubit_bit;
            let (ia, ib) = (image(a), image(b));
            let class = match coherence_order_class(BasisLabel::new(ia, n), BasisLabel::new(ib, n))
                .expect("labels share the length")
            {
                CoherenceClass::SingleQuantum => IoClass::ObservableSq,
                CoherenceClass::ZeroQuantum => IoClass::ZeroQuantum,
                CoherenceClass::DoubleQuantum => IoClass::DoubleQuantum,
                other => unreachable!("U_f maps an SQ pair to {other}"),
            };
            let label = |x: usize| BasisLabel::new(x, n).to_string();
            rows.push(IoCorrelationRow {
                qubit: format!("I{qubit}"),
                input: (label(a), label(b)),
                output: (label(ia), label(ib)),
                class,
            });
        }
    }
    rows
}

/// True when every row of `qubit` is non-observable, predicting a silent
/// multiplet for that input qubit.
pub fn qubit_silent(rows: &[IoCorrelationRow], qubit: usize) -> bool {
    let key = format!("I{qubit}");
    rows.iter()
        .filter(|r| r.qubit == key)
        .all(|r| r.class != IoClass::ObservableSq)
}
