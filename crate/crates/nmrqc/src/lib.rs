//! Density-matrix simulator for two-dimensional NMR quantum computing
//! with spin- and transition-selective pulses.
//!
//! The library models weakly coupled spin-1/2 systems in which an extra
//! observer spin frequency-labels the joint states of the input qubits.
//! Logic gates are executed as cascades of ideal selective pulses during
//! the mixing period of a 2D experiment; the input/output correlation map
//! extracted from the processed 2D spectrum is the gate's truth table.
//! A library of 24 two-qubit gates, the three-qubit Toffoli and OR/NOR
//! gates, and the one- and two-bit Deutsch-Jozsa algorithm are included,
//! together with a line-oriented pulse-program language and a CLI.
//!
//! Start with the runnable examples (`cargo run --example run_gate`) or
//! the [`gates`] and [`experiment`] modules.

pub mod density;
pub mod dj;
pub mod experiment;
pub mod gates;
pub mod program;
pub mod spin;

pub use density::{run_fid, unitarity_defect, DensityError, DensityState, Propagator};
pub use dj::{
    compile_uf, function_catalog, run_dj, symbolic_io, DjError, DjOutcome, FunctionKind,
    FunctionSpec, IoClass, IoCorrelationRow, PRESENCE_THRESHOLD,
};
pub use experiment::{
    ascii_contour, correlation_map, pick_peaks, process, run_2d, spectrum_to_csv, verify_gate,
    Acquisition, CorrelationMap, ExperimentError, Peak, RawData2D, Spectrum2D, VerifyReport,
};
pub use gates::{compile_gate, find_gate, gate_library, truth_table_of, GateError, GateSpec, TruthTable};
pub use program::{parse_program, serialize_program, Phase, ProgramError, PulseEvent, PulseProgram, SpinSelector};
pub use spin::{
    coherence_order_class, connectivity, BasisLabel, CoherenceClass, Connectivity, Role,
    SpinError, SpinSystem, SystemConfig, TransitionRef,
};
