//! Builders for the measurement-free correction circuits.
//!
//! Both codes share one construction. Each cycle resets its fresh syndrome
//! set, extracts every generator into it, then applies
//!
//! * same-cycle corrections: a Toffoli (X errors) or CCZ (Z errors) on each
//!   data qubit that sits in two detecting generators, controlled by those two
//!   fresh ancillas;
//! * two-cycle corrections: for each detecting generator whose single-adjacency
//!   data qubits exist, one gate controlled by the fresh and the stale ancilla
//!   of that generator.
//!
//! Data qubits that share the same single detecting generator differ by a
//! stabilizer, so one representative (the lowest index) is corrected.
//!
//! In the perfect-matching variant every correction gate `T` is followed by
//! a reset of a removal ancilla `c`, a Toffoli `T'` with the same controls
//! onto `c`, and two CNOTs from `c` onto those controls. The reset sits right
//! before `T'`, so it can run as early as the schedule allows.

use crate::circuit::{Circuit, Instruction, Role, Scheduler, TimeStep, Variant};
use crate::code::{correction_targets, CodeSpec};
use crate::pauli::Pauli;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CodeKind {
    BitFlip,
    Surface17,
}

impl CodeKind {
    pub fn name(self) -> &'static str {
        match self {
            CodeKind::BitFlip => "bf",
            CodeKind::Surface17 => "surface17",
        }
    }

    pub fn spec(self) -> CodeSpec {
        match self {
            CodeKind::BitFlip => CodeSpec::bit_flip(),
            CodeKind::Surface17 => CodeSpec::surface17(),
        }
    }
}

/// Position of a data qubit relative to the ancilla that reads it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Corner {
    NW,
    NE,
    SW,
    SE,
}

/// Order in which an ancilla touches its data neighbours. Boundary ancillas
/// skip absent corners but keep the slot timing.
pub const ZIGZAG_ORDER: [Corner; 4] = [Corner::NW, Corner::NE, Corner::SW, Corner::SE];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    pub extraction_order: [Corner; 4],
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { extraction_order: ZIGZAG_ORDER }
    }
}

const BF_REMOVAL_QUBITS: usize = 2;
const SURFACE17_REMOVAL_QUBITS: usize = 4;

/// Doubled lattice coordinates `(row, col)`.
type Coord = (i32, i32);

struct AncillaSpec {
    name: &'static str,
    position: Coord,
}

struct Layout {
    code: CodeSpec,
    data_labels: Vec<String>,
    data_positions: Vec<Coord>,
    /// Parallel to `code.x_generators` / `code.z_generators`.
    x_ancillas: Vec<AncillaSpec>,
    z_ancillas: Vec<AncillaSpec>,
    fresh_prefix: &'static str,
    stale_prefix: &'static str,
    /// Suffix appended to second-set labels when both sets share a prefix.
    second_marker: &'static str,
    removal_qubits: usize,
}

fn corner_of(anc: Coord, data: Coord) -> Corner {
    match (data.0 < anc.0, data.1 < anc.1) {
        (true, true) => Corner::NW,
        (true, false) => Corner::NE,
        (false, true) => Corner::SW,
        (false, false) => Corner::SE,
    }
}

impl Layout {
    fn bit_flip() -> Self {
        Self {
            code: CodeSpec::bit_flip(),
            data_labels: (1..=3).map(|i| format!("d{i}")).collect(),
            data_positions: vec![(0, 0), (0, 2), (0, 4)],
            x_ancillas: vec![],
            z_ancillas: vec![
                AncillaSpec { name: "1", position: (0, 1) },
                AncillaSpec { name: "2", position: (0, 3) },
            ],
            fresh_prefix: "a",
            stale_prefix: "b",
            second_marker: "",
            removal_qubits: BF_REMOVAL_QUBITS,
        }
    }

    fn surface17() -> Self {
        Self {
            code: CodeSpec::surface17(),
            data_labels: (1..=9).map(|i| format!("d{i}")).collect(),
            data_positions: (0..9).map(|q| (2 * (q / 3), 2 * (q % 3))).collect(),
            // X₂X₃, X₇X₈, X₁X₂X₄X₅, X₅X₆X₈X₉
            x_ancillas: vec![
                AncillaSpec { name: "X1", position: (-1, 3) },
                AncillaSpec { name: "X2", position: (5, 1) },
                AncillaSpec { name: "X3", position: (1, 1) },
                AncillaSpec { name: "X4", position: (3, 3) },
            ],
            // Z₁Z₄, Z₆Z₉, Z₂Z₃Z₅Z₆, Z₄Z₅Z₇Z₈
            z_ancillas: vec![
                AncillaSpec { name: "Z1", position: (1, -1) },
                AncillaSpec { name: "Z2", position: (3, 5) },
                AncillaSpec { name: "Z3", position: (1, 3) },
                AncillaSpec { name: "Z4", position: (3, 1) },
            ],
            fresh_prefix: "",
            stale_prefix: "",
            second_marker: "~",
            removal_qubits: SURFACE17_REMOVAL_QUBITS,
        }
    }

    /// Data qubit touched at each extraction slot, per generator.
    fn slots(&self, generators: &[crate::pauli::PauliOperator], ancillas: &[AncillaSpec], order: [Corner; 4]) -> Vec<Vec<Option<usize>>> {
        let mut out = Vec::new();
        for (g, anc) in generators.iter().zip(ancillas) {
            let support = g.support();
            let by_corner: Vec<Option<usize>> = order
                .iter()
                .map(|&c| {
                    support
                        .iter()
                        .copied()
                        .find(|&d| corner_of(anc.position, self.data_positions[d]) == c)
                })
                .collect();
            debug_assert_eq!(by_corner.iter().flatten().count(), support.len());
            out.push(by_corner);
        }
        out
    }
}

/// Qubit indices of one syndrome set.
#[derive(Clone)]
struct SyndromeSet {
    x: Vec<usize>,
    z: Vec<usize>,
}

struct Plan {
    code: CodeSpec,
    n_qubits: usize,
    x_slots: Vec<Vec<Option<usize>>>,
    z_slots: Vec<Vec<Option<usize>>>,
    removal: Vec<usize>,
    /// (controls as generator indices, target data qubit)
    x_same: Vec<([usize; 2], usize)>,
    z_same: Vec<([usize; 2], usize)>,
    x_two: Vec<(usize, usize)>,
    z_two: Vec<(usize, usize)>,
}

fn same_cycle_gates(detectors: &[crate::pauli::PauliOperator], targets: &[usize]) -> Vec<([usize; 2], usize)> {
    targets
        .iter()
        .map(|&d| {
            let gens: Vec<usize> = detectors
                .iter()
                .enumerate()
                .filter(|(_, g)| g.get(d) != Pauli::I)
                .map(|(i, _)| i)
                .collect();
            ([gens[0], gens[1]], d)
        })
        .collect()
}

fn two_cycle_gates(detectors: &[crate::pauli::PauliOperator], targets: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, g) in detectors.iter().enumerate() {
        if let Some(&rep) = targets.iter().find(|&&d| g.get(d) != Pauli::I) {
            out.push((i, rep));
        }
    }
    out
}

/// Splits gates into rounds whose control pairs are disjoint, keeping order.
fn disjoint_rounds(gates: &[([usize; 2], usize)]) -> Vec<Vec<([usize; 2], usize)>> {
    let mut remaining: Vec<_> = gates.to_vec();
    let mut rounds = Vec::new();
    while !remaining.is_empty() {
        let mut used: Vec<usize> = Vec::new();
        let mut round = Vec::new();
        let mut rest = Vec::new();
        for g in remaining {
            if g.0.iter().any(|c| used.contains(c)) {
                rest.push(g);
            } else {
                used.extend(g.0);
                round.push(g);
            }
        }
        rounds.push(round);
        remaining = rest;
    }
    rounds
}

#[derive(Clone, Copy)]
enum Correction {
    Toffoli,
    Ccz,
}

impl Plan {
    fn emit_correction(&self, s: &mut Scheduler, kind: Correction, c1: usize, c2: usize, target: usize) {
        s.push(match kind {
            Correction::Toffoli => Instruction::toffoli(c1, c2, target),
            Correction::Ccz => Instruction::ccz(c1, c2, target),
        });
        if self.removal.is_empty() {
            return;
        }
        let c = *self
            .removal
            .iter()
            .min_by_key(|&&c| (s.free_at(c), c))
            .expect("removal pool is non-empty");
        s.push(Instruction::reset(c));
        s.push(Instruction::toffoli(c1, c2, c));
        s.push(Instruction::cnot(c, c1));
        s.push(Instruction::cnot(c, c2));
    }

    fn cycle(&self, fresh: &SyndromeSet, stale: &SyndromeSet) -> Vec<TimeStep> {
        let mut s = Scheduler::new(self.n_qubits);
        for &a in fresh.x.iter().chain(&fresh.z) {
            s.push(Instruction::reset(a));
        }
        for &a in &fresh.x {
            s.push(Instruction::h(a));
        }
        let depth = self.x_slots.iter().chain(&self.z_slots).map(Vec::len).max().unwrap_or(0);
        for k in 0..depth {
            for (i, slots) in self.x_slots.iter().enumerate() {
                if let Some(d) = slots[k] {
                    s.push(Instruction::cnot(fresh.x[i], d));
                }
            }
            for (i, slots) in self.z_slots.iter().enumerate() {
                if let Some(d) = slots[k] {
                    s.push(Instruction::cnot(d, fresh.z[i]));
                }
            }
        }
        for &a in &fresh.x {
            s.push(Instruction::h(a));
        }

        let blocks = [
            (Correction::Toffoli, &fresh.z, &stale.z, &self.x_same, &self.x_two),
            (Correction::Ccz, &fresh.x, &stale.x, &self.z_same, &self.z_two),
        ];
        for (kind, f, _, same, _) in blocks {
            for round in disjoint_rounds(same) {
                for ([g1, g2], d) in round {
                    self.emit_correction(&mut s, kind, f[g1], f[g2], d);
                }
            }
        }
        for (kind, f, st, _, two) in blocks {
            for &(g, d) in two.iter() {
                self.emit_correction(&mut s, kind, f[g], st[g], d);
            }
        }
        s.finish()
    }
}

fn build_from_layout(layout: Layout, variant: Variant, options: BuildOptions) -> Circuit {
    let code = layout.code.clone();
    let targets = correction_targets(&code).expect("layout codes cover every data qubit");
    let n_data = code.n_data;
    let nx = code.x_generators.len();
    let nz = code.z_generators.len();
    let per_set = nx + nz;

    let mut roles = vec![Role::Data; n_data];
    let mut labels = layout.data_labels.clone();
    let mut sets = Vec::new();
    for (set_idx, role) in [Role::SyndromeS1, Role::SyndromeS2].into_iter().enumerate() {
        let base = n_data + set_idx * per_set;
        let prefix = if set_idx == 0 { layout.fresh_prefix } else { layout.stale_prefix };
        let marker = if set_idx == 0 { "" } else { layout.second_marker };
        for anc in layout.x_ancillas.iter().chain(&layout.z_ancillas) {
            roles.push(role);
            labels.push(match anc.name.split_at(anc.name.len().min(1)) {
                (head, tail) if !marker.is_empty() => format!("{prefix}{head}{marker}{tail}"),
                _ => format!("{prefix}{}", anc.name),
            });
        }
        sets.push(SyndromeSet {
            x: (base..base + nx).collect(),
            z: (base + nx..base + per_set).collect(),
        });
    }
    let mut removal = Vec::new();
    if variant == Variant::Perfect {
        for i in 0..layout.removal_qubits {
            removal.push(roles.len());
            roles.push(Role::Removal);
            labels.push(format!("c{}", i + 1));
        }
    }

    let x_part = targets.x_errors.unwrap_or_default();
    let z_part = targets.z_errors.unwrap_or_default();
    let plan = Plan {
        n_qubits: roles.len(),
        x_slots: layout.slots(&code.x_generators, &layout.x_ancillas, options.extraction_order),
        z_slots: layout.slots(&code.z_generators, &layout.z_ancillas, options.extraction_order),
        removal,
        x_same: same_cycle_gates(&code.z_generators, &x_part.same_cycle),
        z_same: same_cycle_gates(&code.x_generators, &z_part.same_cycle),
        x_two: two_cycle_gates(&code.z_generators, &x_part.two_cycle),
        z_two: two_cycle_gates(&code.x_generators, &z_part.two_cycle),
        code: code.clone(),
    };
    let cycle_a = plan.cycle(&sets[0], &sets[1]);
    let cycle_b = plan.cycle(&sets[1], &sets[0]);
    let circuit = Circuit {
        name: format!("{}-{}", plan.code.name, variant.name()),
        code,
        roles,
        labels,
        cycle_a,
        cycle_b,
    };
    debug_assert_eq!(circuit.validate(), Ok(()));
    circuit
}

/// Two-cycle bit-flip correction unit: 7 qubits, or 9 with removal ancillas.
pub fn build_bf_circuit(variant: Variant) -> Circuit {
    build_from_layout(Layout::bit_flip(), variant, BuildOptions::default())
}

/// Two-cycle surface-17 correction unit: 25 qubits, or 29 with removal ancillas.
pub fn build_surface17_circuit(variant: Variant) -> Circuit {
    build_surface17_circuit_with(variant, BuildOptions::default())
}

pub fn build_surface17_circuit_with(variant: Variant, options: BuildOptions) -> Circuit {
    build_from_layout(Layout::surface17(), variant, options)
}

pub fn build_circuit(code: CodeKind, variant: Variant) -> Circuit {
    match code {
        CodeKind::BitFlip => build_bf_circuit(variant),
        CodeKind::Surface17 => build_surface17_circuit(variant),
    }
}

/// `None` selects the uncorrected baseline regardless of `code`.
pub fn build_scheme(code: CodeKind, variant: Option<Variant>) -> Circuit {
    match variant {
        Some(v) => build_circuit(code, v),
        None => build_unencoded_circuit(),
    }
}

/// Uncorrected baseline: one bare qubit idling for one step per cycle.
pub fn build_unencoded_circuit() -> Circuit {
    let step = TimeStep { instructions: vec![Instruction::idle(0)] };
    Circuit {
        name: "unencoded".into(),
        code: CodeSpec::unencoded(),
        roles: vec![Role::Data],
        labels: vec!["d1".into()],
        cycle_a: vec![step.clone()],
        cycle_b: vec![step],
    }
}
