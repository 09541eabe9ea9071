//! Declarative gate library: 24 two-qubit gates plus the three-qubit
//! NOP, NOT(I1), TOFFOLI and OR/NOR gates, each with its truth table and
//! its mixing-period pulse recipe on transition labels.
//!
//! Recipes are written for the canonical spin layout (observer first,
//! then input qubits in order); [`compile_gate`] remaps them onto the
//! actual spin indices of a system and wraps them into the full 2D
//! experiment program. Recipe order is preserved verbatim: cascaded
//! pulses on connected transitions do not commute, so the order is part
//! of the gate.

use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

use crate::program::{Phase, PulseEvent, PulseProgram, SpinSelector};
use crate::spin::{BasisLabel, SpinSystem, TransitionRef};

#[derive(Debug, Error)]
pub enum GateError {
    #[error("gate {gate} needs an observer and {arity} input spins, system has {observer} and {inputs}")]
    ArityMismatch { gate: String, arity: usize, observer: String, inputs: usize },
    #[error("unknown gate '{name}'")]
    UnknownGate { name: String },
    #[error("gate name '{name}' exists at several arities; the system's spin count selects one")]
    AmbiguousGate { name: String },
    #[error(transparent)]
    Program(#[from] crate::program::ProgramError),
}

/// A bijection over the input-qubit basis labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    arity: usize,
    image: Vec<usize>,
}

impl TruthTable {
    pub fn new(arity: usize, image: Vec<usize>) -> Self {
        let size = 1usize << arity;
        assert_eq!(image.len(), size);
        let mut seen = vec![false; size];
        for &out in &image {
            assert!(out < size && !seen[out], "truth table must be a bijection");
            seen[out] = true;
        }
        Self { arity, image }
    }

    /// Table from the OUT row as printed, inputs descending 11, 10, 01, 00.
    fn from_out_row(arity: usize, outs: &[&str]) -> Self {
        let size = 1usize << arity;
        assert_eq!(outs.len(), size);
        let mut image = vec![0usize; size];
        for (row, out) in outs.iter().enumerate() {
            let input = size - 1 - row;
            image[input] = usize::from_str_radix(out, 2).expect("binary label");
        }
        Self::new(arity, image)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn map(&self, input: usize) -> usize {
        self.image[input]
    }

    pub fn label(&self, value: usize) -> String {
        format!("{value:0width$b}", width = self.arity)
    }

    /// `(input, output)` label pairs in descending input order.
    pub fn pairs(&self) -> Vec<(String, String)> {
        (0..self.image.len())
            .rev()
            .map(|input| (self.label(input), self.label(self.image[input])))
            .collect()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }
}

/// One gate: name, input-qubit count, truth table, and the ordered
/// mixing-period recipe in canonical spin layout.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSpec {
    name: String,
    arity: usize,
    truth_table: TruthTable,
    recipe: Vec<PulseEvent>,
}

impl GateSpec {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn truth_table(&self) -> &TruthTable {
        &self.truth_table
    }

    pub fn recipe(&self) -> &[PulseEvent] {
        &self.recipe
    }
}

/// The declared input -> output bijection of a gate.
pub fn truth_table_of(spec: &GateSpec) -> &TruthTable {
    spec.truth_table()
}

fn tp(label: &str) -> PulseEvent {
    PulseEvent::TransitionPulse {
        transition: TransitionRef::parse(label).expect("valid recipe label"),
        angle: PI,
        phase: Phase::X,
    }
}

fn sel(spin: usize) -> PulseEvent {
    PulseEvent::SelectivePulse { spin, angle: PI, phase: Phase::X }
}

fn gate(name: &str, outs: &[&str], recipe: Vec<PulseEvent>) -> GateSpec {
    let arity = outs[0].len();
    GateSpec {
        name: name.to_string(),
        arity,
        truth_table: TruthTable::from_out_row(arity, outs),
        recipe,
    }
}

fn gate_fn(name: &str, arity: usize, f: impl Fn(usize) -> usize, recipe: Vec<PulseEvent>) -> GateSpec {
    let image = (0..1usize << arity).map(f).collect();
    GateSpec {
        name: name.to_string(),
        arity,
        truth_table: TruthTable::new(arity, image),
        recipe,
    }
}

/// The six-pulse cascade interchanging the zero-quantum level pair of
/// each observer subsystem; three non-commuting pi pulses on regressively
/// connected transitions per subsystem, interleaved as printed.
fn swap_cascade() -> Vec<PulseEvent> {
    vec![
        tp("110-111"),
        tp("010-011"),
        tp("101-111"),
        tp("001-011"),
        tp("110-111"),
        tp("010-011"),
    ]
}

/// The full gate catalog: 24 two-qubit gates (a complete set of one-to-one
/// mappings of two qubits) and four three-qubit gates.
pub fn gate_library() -> Vec<GateSpec> {
    let mut gates = vec![
        gate("NOP", &["11", "10", "01", "00"], vec![]),
        gate("NOT(I1)", &["01", "00", "11", "10"], vec![sel(1)]),
        gate("NOT(I2)", &["10", "11", "00", "01"], vec![sel(2)]),
        gate("NOT(I1,I2)", &["00", "01", "10", "11"], vec![sel(1), sel(2)]),
        gate(
            "XOR1",
            &["01", "10", "11", "00"],
            vec![tp("111-101"), tp("011-001")],
        ),
        gate(
            "XOR2",
            &["10", "11", "01", "00"],
            vec![tp("111-110"), tp("011-010")],
        ),
        gate(
            "XNOR1",
            &["11", "00", "01", "10"],
            vec![tp("100-110"), tp("000-010")],
        ),
        gate(
            "XNOR2",
            &["11", "10", "00", "01"],
            vec![tp("101-100"), tp("001-000")],
        ),
        gate("SWAP", &["11", "01", "10", "00"], swap_cascade()),
        gate(
            "SWAP+NOT",
            &["00", "10", "01", "11"],
            vec![
                tp("110-111"),
                tp("010-011"),
                tp("100-110"),
                tp("000-010"),
                tp("110-111"),
                tp("010-011"),
            ],
        ),
        gate(
            "SWAP+XOR1",
            &["01", "11", "10", "00"],
            vec![tp("101-111"), tp("001-011"), tp("110-111"), tp("010-011")],
        ),
        gate(
            "SWAP+XOR2",
            &["10", "01", "11", "00"],
            vec![tp("110-111"), tp("010-011"), tp("101-111"), tp("001-011")],
        ),
        gate(
            "SWAP+XNOR1",
            &["11", "01", "00", "10"],
            vec![tp("100-110"), tp("000-010"), tp("100-101"), tp("000-001")],
        ),
        gate(
            "SWAP+XNOR2",
            &["11", "00", "10", "01"],
            vec![tp("100-101"), tp("000-001"), tp("100-110"), tp("000-010")],
        ),
        gate(
            "SWAP+NOT+XOR1",
            &["00", "10", "11", "01"],
            vec![tp("101-111"), tp("001-011"), tp("100-101"), tp("000-001")],
        ),
        gate(
            "SWAP+NOT+XOR2",
            &["00", "11", "01", "10"],
            vec![tp("110-111"), tp("010-011"), tp("100-110"), tp("000-010")],
        ),
        gate(
            "SWAP+NOT+XNOR1",
            &["10", "00", "01", "11"],
            vec![tp("100-110"), tp("000-010"), tp("110-111"), tp("010-011")],
        ),
        gate(
            "SWAP+NOT+XNOR2",
            &["01", "10", "00", "11"],
            vec![tp("100-101"), tp("000-001"), tp("101-111"), tp("001-011")],
        ),
        gate(
            "NOT(I1)+XOR2",
            &["01", "00", "10", "11"],
            vec![sel(1), tp("111-110"), tp("011-010")],
        ),
        gate(
            "NOT(I2)+XOR1",
            &["10", "01", "00", "11"],
            vec![sel(2), tp("111-101"), tp("011-001")],
        ),
        gate(
            "NOT(I1)+XNOR2",
            &["00", "01", "11", "10"],
            vec![sel(1), tp("101-100"), tp("001-000")],
        ),
        gate(
            "NOT(I2)+XNOR1",
            &["00", "11", "10", "01"],
            vec![sel(2), tp("100-110"), tp("000-010")],
        ),
        gate("SWAP+NOT(I1)", &["01", "11", "00", "10"], {
            let mut recipe = swap_cascade();
            recipe.push(sel(1));
            recipe
        }),
        gate("SWAP+NOT(I2)", &["10", "00", "11", "01"], {
            let mut recipe = swap_cascade();
            recipe.push(sel(2));
            recipe
        }),
    ];

    // Three-qubit gates on an observer + three inputs. Labels are
    // |I0 I1 I2 I3> with (s, t, u) the states of I1, I2, I3; transition
    // pulses target I1 and come in pairs, one per observer manifold.
    gates.push(gate_fn("NOP3", 3, |x| x, vec![]));
    gates.push(gate_fn("NOT(I1)", 3, |x| x ^ 0b100, vec![sel(1)]));
    gates.push(gate_fn(
        "TOFFOLI",
        3,
        |x| {
            let (t, u) = ((x >> 1) & 1, x & 1);
            if t & u == 1 { x ^ 0b100 } else { x }
        },
        vec![tp("0011-0111"), tp("1011-1111")],
    ));
    gates.push(gate_fn(
        "ORNOR",
        3,
        |x| {
            let (t, u) = ((x >> 1) & 1, x & 1);
            if t | u == 1 { x ^ 0b100 } else { x }
        },
        // All I1 transitions except those whose input spectators are
        // (t, u) = (0, 0), enumerated in descending spectator order.
        vec![
            tp("1011-1111"),
            tp("1010-1110"),
            tp("1001-1101"),
            tp("0011-0111"),
            tp("0010-0110"),
            tp("0001-0101"),
        ],
    ));
    gates
}

/// Looks a gate up by name; `arity` disambiguates names shared between
/// the two- and three-qubit catalogs.
pub fn find_gate(name: &str, arity: Option<usize>) -> Result<GateSpec, GateError> {
    let matches: Vec<GateSpec> = gate_library()
        .into_iter()
        .filter(|g| g.name() == name && arity.is_none_or(|a| g.arity() == a))
        .collect();
    match matches.len() {
        1 => Ok(matches.into_iter().next().unwrap()),
        0 => Err(GateError::UnknownGate { name: name.to_string() }),
        _ => Err(GateError::AmbiguousGate { name: name.to_string() }),
    }
}

fn remap_label(label: BasisLabel, spin_map: &[usize]) -> BasisLabel {
    let n = label.n_spins();
    let mut index = 0usize;
    for canonical in 0..n {
        if label.bit(canonical) == 1 {
            index |= 1 << (n - 1 - spin_map[canonical]);
        }
    }
    BasisLabel::new(index, n)
}

fn remap_event(event: &PulseEvent, spin_map: &[usize]) -> PulseEvent {
    match event {
        PulseEvent::TransitionPulse { transition, angle, phase } => PulseEvent::TransitionPulse {
            transition: TransitionRef::new(
                remap_label(transition.lower(), spin_map),
                remap_label(transition.upper(), spin_map),
            )
            .expect("remapped pair still differs at one bit"),
            angle: *angle,
            phase: *phase,
        },
        PulseEvent::SelectivePulse { spin, angle, phase } => PulseEvent::SelectivePulse {
            spin: spin_map[*spin],
            angle: *angle,
            phase: *phase,
        },
        PulseEvent::HardPulse { spins, angle, phase } => {
            let spins = match spins {
                SpinSelector::All => SpinSelector::All,
                SpinSelector::Spins(list) => {
                    let mut mapped: Vec<usize> = list.iter().map(|s| spin_map[*s]).collect();
                    mapped.sort_unstable();
                    SpinSelector::Spins(mapped)
                }
            };
            PulseEvent::HardPulse { spins, angle: *angle, phase: *phase }
        }
        other => other.clone(),
    }
}

/// Compiles a gate into the full 2D experiment program for `system`:
/// observer (pi/2)_y preparation, t1 evolution, purge gradient, the mixing
/// recipe in order, and observer acquisition.
pub fn compile_gate(spec: &GateSpec, system: &SpinSystem) -> Result<PulseProgram, GateError> {
    let observer = system.observer();
    let inputs = system.input_spins();
    if observer.is_none() || inputs.len() != spec.arity() || system.n_spins() != spec.arity() + 1
    {
        return Err(GateError::ArityMismatch {
            gate: spec.name().to_string(),
            arity: spec.arity(),
            observer: match observer {
                Some(i) => format!("observer I{i}"),
                None => "no observer".to_string(),
            },
            inputs: inputs.len(),
        });
    }
    let observer = observer.unwrap();

    let mut spin_map = Vec::with_capacity(system.n_spins());
    spin_map.push(observer);
    spin_map.extend(inputs);

    let mut events = vec![PulseEvent::SelectivePulse {
        spin: observer,
        angle: FRAC_PI_2,
        phase: Phase::Y,
    }];
    events.push(PulseEvent::EvolveT1);
    events.push(PulseEvent::Gradient);
    events.extend(spec.recipe().iter().map(|e| remap_event(e, &spin_map)));
    events.push(PulseEvent::Acquire {
        spins: SpinSelector::Spins(vec![observer]),
    });
    Ok(PulseProgram::new(spec.name(), events)?)
}

/// Serializable catalog entry mirroring the `gates list --json` output.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub arity: usize,
    pub truth_table: Vec<(String, String)>,
    pub recipe: Vec<String>,
}

/// The machine-readable gate catalog.
pub fn catalog() -> Vec<CatalogEntry> {
    gate_library()
        .iter()
        .map(|g| CatalogEntry {
            name: g.name().to_string(),
            arity: g.arity(),
            truth_table: g.truth_table().pairs(),
            recipe: g.recipe().iter().map(|e| e.statement()).collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{parse_program, serialize_program};
    use crate::spin::Role;

    fn three_spin() -> SpinSystem {
        SpinSystem::new(
            vec![100.0, 420.0, 780.0],
            vec![
                vec![0.0, 16.0, 10.0],
                vec![16.0, 0.0, 6.0],
                vec![10.0, 6.0, 0.0],
            ],
            vec![Role::Observer, Role::Input, Role::Input],
        )
        .unwrap()
    }

    #[test]
    fn library_shape() {
        let lib = gate_library();
        assert_eq!(lib.iter().filter(|g| g.arity() == 2).count(), 24);
        assert_eq!(lib.iter().filter(|g| g.arity() == 3).count(), 4);
    }

    #[test]
    fn spot_check_truth_tables() {
        let xor1 = find_gate("XOR1", None).unwrap();
        assert_eq!(
            xor1.truth_table().pairs(),
            vec![
                ("11".into(), "01".into()),
                ("10".into(), "10".into()),
                ("01".into(), "11".into()),
                ("00".into(), "00".into()),
            ]
        );
        let swap_not = find_gate("SWAP+NOT", None).unwrap();
        assert_eq!(
            swap_not.truth_table().pairs(),
            vec![
                ("11".into(), "00".into()),
                ("10".into(), "10".into()),
                ("01".into(), "01".into()),
                ("00".into(), "11".into()),
            ]
        );
        let swap = find_gate("SWAP", None).unwrap();
        assert_eq!(swap.truth_table().map(0b10), 0b01);
        assert_eq!(swap.truth_table().map(0b01), 0b10);
        assert_eq!(swap.truth_table().map(0b11), 0b11);
        assert_eq!(swap.truth_table().map(0b00), 0b00);
        let nop = find_gate("NOP", None).unwrap();
        assert!((0..4).all(|x| nop.truth_table().map(x) == x));
    }

    #[test]
    fn toffoli_flips_control_iff_both_inputs_set() {
        let toffoli = find_gate("TOFFOLI", None).unwrap();
        for x in 0..8 {
            let expected = if x & 0b011 == 0b011 { x ^ 0b100 } else { x };
            assert_eq!(toffoli.truth_table().map(x), expected);
        }
        assert_eq!(toffoli.recipe().len(), 2);
    }

    #[test]
    fn ornor_flips_control_iff_any_input_set() {
        let ornor = find_gate("ORNOR", None).unwrap();
        for x in 0..8 {
            let expected = if x & 0b011 != 0 { x ^ 0b100 } else { x };
            assert_eq!(ornor.truth_table().map(x), expected);
        }
        // Six pulses: every I1 transition except the two (t,u) = (0,0) ones.
        assert_eq!(ornor.recipe().len(), 6);
        for event in ornor.recipe() {
            match event {
                PulseEvent::TransitionPulse { transition, .. } => {
                    assert_eq!(transition.flipped_spin(), 1);
                    let spectators = transition.spectator_label();
                    assert_ne!(&spectators[1..], "00");
                }
                other => panic!("unexpected event {other:?}"),
            }
        }
    }

    #[test]
    fn two_qubit_tables_exhaust_all_permutations() {
        let lib = gate_library();
        let mut images: Vec<Vec<usize>> = lib
            .iter()
            .filter(|g| g.arity() == 2)
            .map(|g| g.truth_table().image().to_vec())
            .collect();
        images.sort();
        let before = images.len();
        images.dedup();
        assert_eq!(images.len(), before, "tables must be pairwise distinct");
        assert_eq!(images.len(), 24, "24 distinct bijections of 4 labels is all of them");
    }

    #[test]
    fn compile_nop_has_no_mixing_pulses() {
        let sys = three_spin();
        let nop = find_gate("NOP", None).unwrap();
        let program = compile_gate(&nop, &sys).unwrap();
        let statements: Vec<String> = program.events().iter().map(|e| e.statement()).collect();
        assert_eq!(
            statements,
            vec!["pulse I0 90 y", "t1", "grad", "acquire I0"]
        );
    }

    #[test]
    fn compile_swap_preserves_printed_cascade_order() {
        let sys = three_spin();
        let swap = find_gate("SWAP", None).unwrap();
        let program = compile_gate(&swap, &sys).unwrap();
        let pulses: Vec<String> = program
            .events()
            .iter()
            .filter_map(|e| match e {
                PulseEvent::TransitionPulse { transition, .. } => Some(transition.to_string()),
                _ => None,
            })
            .collect();
        assert_eq!(
            pulses,
            vec!["110-111", "010-011", "101-111", "001-011", "110-111", "010-011"]
        );
    }

    #[test]
    fn compile_not_both_uses_two_selective_pulses() {
        let sys = three_spin();
        let gate = find_gate("NOT(I1,I2)", Some(2)).unwrap();
        let program = compile_gate(&gate, &sys).unwrap();
        let selective: Vec<usize> = program
            .events()
            .iter()
            .filter_map(|e| match e {
                PulseEvent::SelectivePulse { spin, angle, .. } if (*angle - PI).abs() < 1e-12 => {
                    Some(*spin)
                }
                _ => None,
            })
            .collect();
        assert_eq!(selective, vec![1, 2]);
    }

    #[test]
    fn compile_remaps_permuted_roles() {
        // Observer in the middle: canonical spin 0 becomes spin 1, the
        // inputs become spins 0 and 2.
        let sys = SpinSystem::new(
            vec![420.0, 100.0, 780.0],
            vec![
                vec![0.0, 16.0, 6.0],
                vec![16.0, 0.0, 10.0],
                vec![6.0, 10.0, 0.0],
            ],
            vec![Role::Input, Role::Observer, Role::Input],
        )
        .unwrap();
        let xor1 = find_gate("XOR1", None).unwrap();
        let program = compile_gate(&xor1, &sys).unwrap();
        // Canonical 111-101 flips I1 (first input), which is now spin 0;
        // observer bit moves to position 1.
        let pulses: Vec<String> = program
            .events()
            .iter()
            .filter_map(|e| match e {
                PulseEvent::TransitionPulse { transition, .. } => Some(transition.to_string()),
                _ => None,
            })
            .collect();
        assert_eq!(pulses, vec!["011-111", "001-101"]);
        assert!(program
            .events()
            .iter()
            .any(|e| matches!(e, PulseEvent::SelectivePulse { spin: 1, .. })));
    }

    #[test]
    fn compile_rejects_wrong_arity() {
        let two_spin = SpinSystem::new(
            vec![40.0, 110.0],
            vec![vec![0.0, 18.0], vec![18.0, 0.0]],
            vec![Role::Observer, Role::Input],
        )
        .unwrap();
        let toffoli = find_gate("TOFFOLI", None).unwrap();
        assert!(matches!(
            compile_gate(&toffoli, &two_spin),
            Err(GateError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn compiled_programs_round_trip_through_the_dsl() {
        let sys3 = three_spin();
        let sys4 = SpinSystem::new(
            vec![96.0, 500.0, 900.0, 1300.0],
            vec![
                vec![0.0, 27.0, 14.0, 7.0],
                vec![27.0, 0.0, 5.0, 4.0],
                vec![14.0, 5.0, 0.0, 3.0],
                vec![7.0, 4.0, 3.0, 0.0],
            ],
            vec![Role::Observer, Role::Input, Role::Input, Role::Input],
        )
        .unwrap();
        for spec in gate_library() {
            let system = if spec.arity() == 2 { &sys3 } else { &sys4 };
            let program = compile_gate(&spec, system).unwrap();
            let reparsed = parse_program(&serialize_program(&program)).unwrap();
            assert_eq!(program, reparsed, "gate {}", spec.name());
        }
    }

    #[test]
    fn find_gate_disambiguates_by_arity() {
        assert_eq!(find_gate("NOT(I1)", Some(2)).unwrap().arity(), 2);
        assert_eq!(find_gate("NOT(I1)", Some(3)).unwrap().arity(), 3);
        assert!(find_gate("NOT(I1)", None).is_err());
        assert!(find_gate("BOGUS", None).is_err());
    }
}
