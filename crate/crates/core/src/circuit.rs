//! Time-stepped circuit representation and error-site enumeration.
//!
//! A [`Circuit`] is one repeating two-cycle correction unit: `cycle_a` fills
//! the first syndrome set and `cycle_b` the second. Every qubit appears in
//! exactly one instruction per time step once the circuit is idle-padded.

use std::collections::HashSet;
use std::fmt::{self, Write as _};

use smallvec::SmallVec;
use thiserror::Error;

use crate::code::CodeSpec;

pub type Qubits = SmallVec<[usize; 3]>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("{kind} takes {expected} operands, got {found}")]
    Arity { kind: GateKind, expected: usize, found: usize },
    #[error("qubit {qubit} repeated within one instruction")]
    RepeatedOperand { qubit: usize },
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("qubit {qubit} used twice in step {step} of cycle {cycle}")]
    StepConflict { qubit: usize, step: usize, cycle: CycleSelector },
    #[error("qubit {qubit} missing from step {step} of cycle {cycle}")]
    UnpaddedCircuit { qubit: usize, step: usize, cycle: CycleSelector },
    #[error("{0}")]
    RoleViolation(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    H,
    Cnot,
    Toffoli,
    Ccz,
    Reset,
    Idle,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::H | GateKind::Reset | GateKind::Idle => 1,
            GateKind::Cnot => 2,
            GateKind::Toffoli | GateKind::Ccz => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::Cnot => "CNOT",
            GateKind::Toffoli => "TOFFOLI",
            GateKind::Ccz => "CCZ",
            GateKind::Reset => "RESET",
            GateKind::Idle => "IDLE",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One gate. Operand order is `(control, target)` for CNOT and
/// `(control, control, target)` for Toffoli and CCZ.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Instruction {
    pub kind: GateKind,
    pub qubits: Qubits,
}

impl Instruction {
    pub fn new(kind: GateKind, qubits: &[usize]) -> Result<Self, CircuitError> {
        if qubits.len() != kind.arity() {
            return Err(CircuitError::Arity {
                kind,
                expected: kind.arity(),
                found: qubits.len(),
            });
        }
        for (i, q) in qubits.iter().enumerate() {
            if qubits[..i].contains(q) {
                return Err(CircuitError::RepeatedOperand { qubit: *q });
            }
        }
        Ok(Self { kind, qubits: Qubits::from_slice(qubits) })
    }

    fn unchecked(kind: GateKind, qubits: &[usize]) -> Self {
        Self::new(kind, qubits).expect("builder emits well-formed instructions")
    }

    pub fn h(q: usize) -> Self {
        Self::unchecked(GateKind::H, &[q])
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::unchecked(GateKind::Cnot, &[control, target])
    }

    pub fn toffoli(c1: usize, c2: usize, target: usize) -> Self {
        Self::unchecked(GateKind::Toffoli, &[c1, c2, target])
    }

    pub fn ccz(c1: usize, c2: usize, target: usize) -> Self {
        Self::unchecked(GateKind::Ccz, &[c1, c2, target])
    }

    pub fn reset(q: usize) -> Self {
        Self::unchecked(GateKind::Reset, &[q])
    }

    pub fn idle(q: usize) -> Self {
        Self::unchecked(GateKind::Idle, &[q])
    }

    pub fn first_qubit(&self) -> usize {
        self.qubits[0]
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TimeStep {
    pub instructions: Vec<Instruction>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CycleSelector {
    A,
    B,
}

impl CycleSelector {
    pub fn other(self) -> Self {
        match self {
            CycleSelector::A => CycleSelector::B,
            CycleSelector::B => CycleSelector::A,
        }
    }

    /// Cycle reached after advancing `cycles` cycles from `self`.
    pub fn advance(self, cycles: u64) -> Self {
        if cycles.is_multiple_of(2) {
            self
        } else {
            self.other()
        }
    }
}

impl fmt::Display for CycleSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CycleSelector::A => "a",
            CycleSelector::B => "b",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    Data,
    /// Syndrome set refilled in cycle a.
    SyndromeS1,
    /// Syndrome set refilled in cycle b.
    SyndromeS2,
    /// Ancilla used to erase consumed syndrome information.
    Removal,
}

impl Role {
    pub fn is_syndrome(self) -> bool {
        matches!(self, Role::SyndromeS1 | Role::SyndromeS2)
    }
}

/// Whether the syndrome-removal subcircuit is included.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Perfect,
    Simplified,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Perfect => "perfect",
            Variant::Simplified => "simplified",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    pub name: String,
    pub code: CodeSpec,
    /// Qubits `0..code.n_data` are the data qubits in code order.
    pub roles: Vec<Role>,
    pub labels: Vec<String>,
    pub cycle_a: Vec<TimeStep>,
    pub cycle_b: Vec<TimeStep>,
}

impl Circuit {
    pub fn n_qubits(&self) -> usize {
        self.roles.len()
    }

    pub fn cycle(&self, which: CycleSelector) -> &[TimeStep] {
        match which {
            CycleSelector::A => &self.cycle_a,
            CycleSelector::B => &self.cycle_b,
        }
    }

    /// Qubits whose next operation after cycle `which` is a reset.
    pub fn spent_after(&self, which: CycleSelector) -> Vec<usize> {
        let upcoming = || self.cycle(which.other()).iter().chain(self.cycle(which)).flat_map(|s| &s.instructions);
        (0..self.n_qubits())
            .filter(|&q| {
                upcoming()
                    .find(|i| i.kind != GateKind::Idle && i.qubits.contains(&q))
                    .is_some_and(|i| i.kind == GateKind::Reset)
            })
            .collect()
    }

    pub fn qubits_with_role(&self, role: Role) -> Vec<usize> {
        (0..self.n_qubits()).filter(|&q| self.roles[q] == role).collect()
    }

    /// Plain-text listing, one line per instruction in `(step, first qubit)` order.
    pub fn listing(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# circuit {} ({} qubits)", self.name, self.n_qubits()).unwrap();
        for q in 0..self.n_qubits() {
            writeln!(out, "# q{q} {} {:?}", self.labels[q], self.roles[q]).unwrap();
        }
        for which in [CycleSelector::A, CycleSelector::B] {
            writeln!(out, "# cycle {which}").unwrap();
            for (s, step) in self.cycle(which).iter().enumerate() {
                for inst in &step.instructions {
                    let ops: Vec<String> = inst.qubits.iter().map(|q| format!("q{q}")).collect();
                    writeln!(out, "step {}: {} {}", s + 1, inst.kind, ops.join(",")).unwrap();
                }
            }
        }
        out
    }

    /// Structural checks: disjoint steps, full padding and role rules for
    /// three-qubit gates.
    pub fn validate(&self) -> Result<(), CircuitError> {
        let n = self.n_qubits();
        for which in [CycleSelector::A, CycleSelector::B] {
            for (s, step) in self.cycle(which).iter().enumerate() {
                let mut seen = vec![false; n];
                for inst in &step.instructions {
                    for &q in &inst.qubits {
                        if q >= n {
                            return Err(CircuitError::QubitOutOfRange { qubit: q, n });
                        }
                        if seen[q] {
                            return Err(CircuitError::StepConflict { qubit: q, step: s, cycle: which });
                        }
                        seen[q] = true;
                    }
                    self.check_roles(inst)?;
                }
                if let Some(q) = seen.iter().position(|&b| !b) {
                    return Err(CircuitError::UnpaddedCircuit { qubit: q, step: s, cycle: which });
                }
            }
        }
        Ok(())
    }

    fn check_roles(&self, inst: &Instruction) -> Result<(), CircuitError> {
        if !matches!(inst.kind, GateKind::Toffoli | GateKind::Ccz) {
            return Ok(());
        }
        let role = |i: usize| self.roles[inst.qubits[i]];
        if !(role(0).is_syndrome() && role(1).is_syndrome()) {
            return Err(CircuitError::RoleViolation(format!(
                "{} controls must be syndrome ancillas: {:?}",
                inst.kind, inst.qubits
            )));
        }
        let target_ok = match inst.kind {
            GateKind::Ccz => role(2) == Role::Data,
            _ => matches!(role(2), Role::Data | Role::Removal),
        };
        if !target_ok {
            return Err(CircuitError::RoleViolation(format!(
                "{} target has role {:?}: {:?}",
                inst.kind,
                role(2),
                inst.qubits
            )));
        }
        Ok(())
    }
}

/// Greedy as-soon-as-possible packer. Each pushed instruction lands in the
/// earliest step after every earlier instruction that shares a qubit with it.
#[derive(Clone, Debug)]
pub struct Scheduler {
    n_qubits: usize,
    /// First step at which each qubit is free.
    free_at: Vec<usize>,
    steps: Vec<Vec<Instruction>>,
}

impl Scheduler {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, free_at: vec![0; n_qubits], steps: Vec::new() }
    }

    pub fn free_at(&self, q: usize) -> usize {
        self.free_at[q]
    }

    /// Places an instruction and returns its step index.
    pub fn push(&mut self, inst: Instruction) -> usize {
        let step = inst.qubits.iter().map(|&q| self.free_at[q]).max().unwrap_or(0);
        for &q in &inst.qubits {
            self.free_at[q] = step + 1;
        }
        if self.steps.len() <= step {
            self.steps.resize_with(step + 1, Vec::new);
        }
        self.steps[step].push(inst);
        step
    }

    /// Pads every step with idles and sorts it by first qubit.
    pub fn finish(self) -> Vec<TimeStep> {
        let n = self.n_qubits;
        self.steps
            .into_iter()
            .map(|mut insts| {
                let busy: HashSet<usize> = insts.iter().flat_map(|i| i.qubits.clone()).collect();
                insts.extend((0..n).filter(|q| !busy.contains(q)).map(Instruction::idle));
                insts.sort_by_key(Instruction::first_qubit);
                TimeStep { instructions: insts }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SiteKind {
    /// After a single-qubit gate or an idle.
    Memory,
    TwoQubit,
    ThreeQubit,
    /// After a reset to `|0⟩`.
    Init,
}

impl SiteKind {
    pub fn arity(self) -> usize {
        match self {
            SiteKind::Memory | SiteKind::Init => 1,
            SiteKind::TwoQubit => 2,
            SiteKind::ThreeQubit => 3,
        }
    }

    fn for_gate(kind: GateKind) -> Self {
        match kind {
            GateKind::H | GateKind::Idle => SiteKind::Memory,
            GateKind::Cnot => SiteKind::TwoQubit,
            GateKind::Toffoli | GateKind::Ccz => SiteKind::ThreeQubit,
            GateKind::Reset => SiteKind::Init,
        }
    }
}

/// A fault location: the instruction at `(step, slot)` of one cycle.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ErrorSite {
    pub kind: SiteKind,
    pub qubits: Qubits,
    pub step: usize,
    /// Index of the instruction within its step.
    pub slot: usize,
}

/// One site per instruction, ordered by `(step, first qubit)`.
pub fn enumerate_error_sites(
    circuit: &Circuit,
    which: CycleSelector,
) -> Result<Vec<ErrorSite>, CircuitError> {
    let n = circuit.n_qubits();
    let mut sites = Vec::new();
    for (s, step) in circuit.cycle(which).iter().enumerate() {
        let mut seen = vec![false; n];
        for (slot, inst) in step.instructions.iter().enumerate() {
            for &q in &inst.qubits {
                if q >= n {
                    return Err(CircuitError::QubitOutOfRange { qubit: q, n });
                }
                if seen[q] {
                    return Err(CircuitError::StepConflict { qubit: q, step: s, cycle: which });
                }
                seen[q] = true;
            }
            sites.push(ErrorSite {
                kind: SiteKind::for_gate(inst.kind),
                qubits: inst.qubits.clone(),
                step: s,
                slot,
            });
        }
        if let Some(q) = seen.iter().position(|&b| !b) {
            return Err(CircuitError::UnpaddedCircuit { qubit: q, step: s, cycle: which });
        }
    }
    Ok(sites)
}
