#![allow(dead_code)]

use mfqec::code::CodeSpec;
use mfqec::circuit::{Circuit, CycleSelector, GateKind, Instruction, Variant};
use mfqec::montecarlo::{Classification, Experiment};
use mfqec::noise::ErrorEvent;
use mfqec::pauli::Pauli;
use mfqec::stats::{chi_square_p_value, derive_seed};
use mfqec::tableau::{CliffordGate, Expectation, Tableau, TableauError};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense state vector; qubit `q` is bit `q` of the basis index.
#[derive(Clone, Debug)]
pub struct StateVector {
    pub n: usize,
    pub amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(n: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { n, amps }
    }

    fn apply_1q(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let bit = 1 << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    pub fn h(&mut self, q: usize) {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        self.apply_1q(q, [[s, s], [s, -s]]);
    }

    pub fn pauli(&mut self, q: usize, p: Pauli) {
        let (o, z, i) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0));
        match p {
            Pauli::I => {}
            Pauli::X => self.apply_1q(q, [[z, o], [o, z]]),
            Pauli::Y => self.apply_1q(q, [[z, -i], [i, z]]),
            Pauli::Z => self.apply_1q(q, [[o, z], [z, -o]]),
        }
    }

    pub fn s(&mut self, q: usize) {
        let (o, z, i) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0));
        self.apply_1q(q, [[o, z], [z, i]]);
    }

    /// Flips `target` on basis states where every control bit is set.
    pub fn controlled_x(&mut self, controls: &[usize], target: usize) {
        let mask: usize = controls.iter().map(|c| 1 << c).sum();
        let t = 1 << target;
        for i in 0..self.amps.len() {
            if i & mask == mask && i & t == 0 {
                self.amps.swap(i, i | t);
            }
        }
    }

    /// Phase −1 on basis states where every listed bit is set.
    pub fn controlled_z(&mut self, qubits: &[usize]) {
        let mask: usize = qubits.iter().map(|c| 1 << c).sum();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *a = -*a;
            }
        }
    }

    pub fn prob_one(&self, q: usize) -> f64 {
        self.amps.iter().enumerate().filter(|(i, _)| i & (1 << q) != 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Projects onto `q = bit` and renormalizes.
    pub fn collapse(&mut self, q: usize, bit: u8) {
        let mut norm = 0.0;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if ((i >> q) & 1) as u8 != bit {
                *a = Complex64::new(0.0, 0.0);
            } else {
                norm += a.norm_sqr();
            }
        }
        let s = 1.0 / norm.sqrt();
        self.amps.iter_mut().for_each(|a| *a *= s);
    }

    /// `⟨ψ|P|ψ⟩` for a Hermitian-convention string such as `"-XYZ"` (qubit 0 first).
    pub fn expectation(&self, pauli: &str) -> f64 {
        let (sign, body) = match pauli.as_bytes()[0] {
            b'-' => (-1.0, &pauli[1..]),
            b'+' => (1.0, &pauli[1..]),
            _ => (1.0, pauli),
        };
        let mut phi = self.clone();
        for (q, c) in body.chars().enumerate() {
            let p = match c {
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                _ => Pauli::I,
            };
            phi.pauli(q, p);
        }
        sign * self.amps.iter().zip(&phi.amps).map(|(a, b)| (a.conj() * b).re).sum::<f64>()
    }
}

#[derive(Debug, Default)]
pub struct OracleReport {
    pub circuits: usize,
    pub measurements: usize,
    pub random_outcomes: u64,
    pub random_ones: u64,
    pub mismatches: Vec<String>,
}

impl OracleReport {
    pub fn chi_square_p(&self) -> f64 {
        let half = self.random_outcomes as f64 / 2.0;
        chi_square_p_value(&[self.random_ones, self.random_outcomes - self.random_ones], &[half, half])
    }
}

fn is_classical(p: f64) -> bool {
    !(1e-9..=1.0 - 1e-9).contains(&p)
}

/// Measures `q` on both simulators and checks the tableau's determinism flag
/// against the state-vector probability.
fn compare_measurement(
    tab: &mut Tableau,
    sv: &mut StateVector,
    q: usize,
    rng: &mut ChaCha8Rng,
    report: &mut OracleReport,
    ctx: &str,
) -> u8 {
    let p1 = sv.prob_one(q);
    let m = tab.measure_z(q, rng).unwrap();
    report.measurements += 1;
    if m.deterministic {
        if !is_classical(p1) || (p1 > 0.5) != (m.bit == 1) {
            report.mismatches.push(format!("{ctx}: deterministic bit {} but P(1)={p1}", m.bit));
        }
    } else {
        if (p1 - 0.5).abs() > 1e-9 {
            report.mismatches.push(format!("{ctx}: random outcome but P(1)={p1}"));
        }
        report.random_outcomes += 1;
        report.random_ones += m.bit as u64;
    }
    sv.collapse(q, m.bit);
    m.bit
}

/// Random circuits on 4–5 qubits over every supported operation, checked
/// step by step against the state-vector simulator.
pub fn stabilizer_oracle(n_circuits: usize, depth: usize, seed: u64) -> OracleReport {
    let mut report = OracleReport::default();
    for c in 0..n_circuits {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, c as u64));
        let n = rng.random_range(4..=5);
        let mut tab = Tableau::new(n);
        let mut sv = StateVector::new(n);
        let distinct = |rng: &mut ChaCha8Rng, k: usize| -> Vec<usize> {
            rand::seq::index::sample(rng, n, k).into_vec()
        };
        for step in 0..depth {
            let ctx = format!("circuit {c} step {step}");
            match rng.random_range(0..12) {
                0 => {
                    let q = rng.random_range(0..n);
                    tab.apply_clifford(CliffordGate::H(q)).unwrap();
                    sv.h(q);
                }
                1 => {
                    let q = rng.random_range(0..n);
                    tab.apply_clifford(CliffordGate::S(q)).unwrap();
                    sv.s(q);
                }
                2 => {
                    let q = rng.random_range(0..n);
                    let p = Pauli::NON_IDENTITY[rng.random_range(0..3)];
                    let gate = match p {
                        Pauli::X => CliffordGate::X(q),
                        Pauli::Y => CliffordGate::Y(q),
                        _ => CliffordGate::Z(q),
                    };
                    tab.apply_clifford(gate).unwrap();
                    sv.pauli(q, p);
                }
                3 | 4 => {
                    let qs = distinct(&mut rng, 2);
                    tab.apply_clifford(CliffordGate::Cnot { control: qs[0], target: qs[1] }).unwrap();
                    sv.controlled_x(&qs[..1], qs[1]);
                }
                5 => {
                    let qs = distinct(&mut rng, 2);
                    tab.apply_clifford(CliffordGate::Cz(qs[0], qs[1])).unwrap();
                    sv.controlled_z(&qs);
                }
                6 | 7 => {
                    let qs = distinct(&mut rng, 3);
                    let before = tab.clone();
                    let ccz = rng.random::<bool>();
                    let res = if ccz {
                        tab.classical_ccz(qs[0], qs[1], qs[2])
                    } else {
                        tab.classical_toffoli(qs[0], qs[1], qs[2])
                    };
                    let controls_classical = is_classical(sv.prob_one(qs[0])) && is_classical(sv.prob_one(qs[1]));
                    match res {
                        Ok(()) => {
                            if !controls_classical {
                                report.mismatches.push(format!("{ctx}: classical gate accepted superposed controls"));
                            }
                            if ccz {
                                sv.controlled_z(&qs);
                            } else {
                                sv.controlled_x(&qs[..2], qs[2]);
                            }
                        }
                        Err(TableauError::NonDeterministicControl { .. }) => {
                            if controls_classical {
                                report.mismatches.push(format!("{ctx}: classical controls rejected"));
                            }
                            if tab != before {
                                report.mismatches.push(format!("{ctx}: rejected gate modified the tableau"));
                            }
                        }
                        Err(e) => report.mismatches.push(format!("{ctx}: {e}")),
                    }
                }
                8 | 9 => {
                    let q = rng.random_range(0..n);
                    compare_measurement(&mut tab, &mut sv, q, &mut rng, &mut report, &ctx);
                }
                10 => {
                    let q = rng.random_range(0..n);
                    if compare_measurement(&mut tab, &mut sv, q, &mut rng, &mut report, &ctx) == 1 {
                        tab.x_flip(q);
                        sv.pauli(q, Pauli::X);
                    }
                }
                _ => {
                    let q = rng.random_range(0..n);
                    // replay the reset's internal measurement to learn its branch
                    let bit = tab.clone().measure_z(q, &mut rng.clone()).unwrap().bit;
                    tab.reset_zero(q, &mut rng).unwrap();
                    sv.collapse(q, bit);
                    if bit == 1 {
                        sv.pauli(q, Pauli::X);
                    }
                    if tab.z_expectation(q) != Expectation::Plus {
                        report.mismatches.push(format!("{ctx}: reset left qubit outside |0>"));
                    }
                }
            }
            if !tab.check_invariants() {
                report.mismatches.push(format!("{ctx}: symplectic invariant broken"));
            }
        }
        for (i, s) in tab.stabilizer_strings().iter().enumerate() {
            let e = sv.expectation(s);
            if (e - 1.0).abs() > 1e-9 {
                report.mismatches.push(format!("circuit {c}: stabilizer {i} {s} has expectation {e}"));
            }
        }
        for q in 0..n {
            compare_measurement(&mut tab, &mut sv, q, &mut rng, &mut report, &format!("circuit {c} final q{q}"));
        }
        report.circuits += 1;
    }
    report
}

/// Runs instructions of one cycle until `stop` returns true for an instruction.
pub fn run_until(tab: &mut Tableau, circuit: &Circuit, which: CycleSelector, stop: impl Fn(&Instruction) -> bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for step in circuit.cycle(which) {
        if step.instructions.iter().any(&stop) {
            return;
        }
        for inst in &step.instructions {
            let q = &inst.qubits;
            match inst.kind {
                GateKind::H => tab.h(q[0]),
                GateKind::Cnot => tab.cnot(q[0], q[1]),
                GateKind::Toffoli => tab.classical_toffoli(q[0], q[1], q[2]).unwrap(),
                GateKind::Ccz => tab.classical_ccz(q[0], q[1], q[2]).unwrap(),
                GateKind::Reset => tab.reset_zero(q[0], &mut rng).unwrap(),
                GateKind::Idle => {}
            }
        }
    }
}

/// Runs one cycle with every Toffoli and CCZ dropped, so only extraction acts.
pub fn run_without_corrections(tab: &mut Tableau, circuit: &Circuit, which: CycleSelector) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for inst in circuit.cycle(which).iter().flat_map(|s| &s.instructions) {
        let q = &inst.qubits;
        match inst.kind {
            GateKind::H => tab.h(q[0]),
            GateKind::Cnot => tab.cnot(q[0], q[1]),
            GateKind::Reset => tab.reset_zero(q[0], &mut rng).unwrap(),
            GateKind::Toffoli | GateKind::Ccz | GateKind::Idle => {}
        }
    }
}

/// All generators and the logical Z are +1 on the data qubits.
pub fn data_clean(tab: &Tableau, code: &CodeSpec) -> bool {
    let n = tab.num_qubits();
    code.generators()
        .chain([&code.logical_z])
        .all(|g| matches!(tab.deterministic_sign(&code.embed(g, n)), Ok(Expectation::Plus)))
}

pub fn is_three_qubit(inst: &Instruction) -> bool {
    matches!(inst.kind, GateKind::Toffoli | GateKind::Ccz)
}

/// Ancilla bits of the fresh set of `which` after extraction of a data error.
pub fn extracted_bits(circuit: &Circuit, which: CycleSelector, error: &[(usize, Pauli)], ancillas: &[usize]) -> Vec<u8> {
    let exp = Experiment::new(circuit.clone(), 0.01).unwrap();
    let mut tab = exp.initial_state();
    for &(q, p) in error {
        tab.apply_pauli_factor(q, p);
    }
    run_without_corrections(&mut tab, circuit, which);
    ancillas
        .iter()
        .map(|&a| match tab.z_expectation(a) {
            Expectation::Plus => 0,
            Expectation::Minus => 1,
            Expectation::Indeterminate => panic!("ancilla {a} not in a basis state"),
        })
        .collect()
}

#[derive(Debug, Default)]
pub struct FaultReport {
    pub injections: usize,
    pub logical_flips: usize,
    pub recovered: usize,
    pub control_errors: usize,
    pub first_flip: Option<String>,
}

impl FaultReport {
    pub fn recovered_fraction(&self) -> f64 {
        self.recovered as f64 / self.injections as f64
    }
}

/// Injects every allowed event at every site of both cycles into an
/// otherwise error-free run, then follows with `follow_on` clean cycles.
pub fn single_fault_suite(circuit: &Circuit, follow_on: usize) -> FaultReport {
    let exp = Experiment::new(circuit.clone(), 0.01).unwrap();
    let mut report = FaultReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for which in [CycleSelector::A, CycleSelector::B] {
        for site in exp.sites(which) {
            for event in ErrorEvent::all_for_site(site) {
                report.injections += 1;
                let mut tab = exp.initial_state();
                let mut cycle = which;
                let mut outcome = match exp.run_cycle(&mut tab, cycle, std::slice::from_ref(&event), &mut rng) {
                    Ok(o) => o.classification,
                    Err(_) => {
                        report.control_errors += 1;
                        continue;
                    }
                };
                for _ in 0..follow_on {
                    if outcome != Classification::Residual {
                        break;
                    }
                    cycle = cycle.other();
                    outcome = match exp.run_cycle(&mut tab, cycle, &[], &mut rng) {
                        Ok(o) => o.classification,
                        Err(_) => {
                            report.control_errors += 1;
                            break;
                        }
                    };
                }
                match outcome {
                    Classification::LogicalFlip => {
                        report.logical_flips += 1;
                        if report.first_flip.is_none() {
                            report.first_flip = Some(format!("cycle {which} {site:?} {:?}", event.paulis()));
                        }
                    }
                    Classification::CleanZero => report.recovered += 1,
                    Classification::Residual => {}
                }
            }
        }
    }
    report
}

/// Data X-error weight of a bit-flip code state (data qubits are Z-determinate).
pub fn bf_error_weight(tab: &Tableau) -> usize {
    (0..3).filter(|&q| tab.z_expectation(q) == Expectation::Minus).count()
}

/// X on d₂ before each of two consecutive cycles, then `extra` clean cycles.
/// Returns the classification and data error weight after every cycle.
pub fn double_d2_scenario(variant: Variant, extra: usize) -> Vec<(Classification, usize)> {
    let circuit = mfqec::builders::build_bf_circuit(variant);
    let exp = Experiment::new(circuit, 0.01).unwrap();
    let mut tab = exp.initial_state();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut which = CycleSelector::A;
    let mut trace = Vec::new();
    for i in 0..2 + extra {
        if i < 2 {
            tab.apply_pauli_factor(1, Pauli::X);
        }
        let out = exp.run_cycle(&mut tab, which, &[], &mut rng).unwrap();
        trace.push((out.classification, bf_error_weight(&tab)));
        which = which.other();
    }
    trace
}

pub type Injection = &'static [(usize, Pauli)];

/// Bit-flip syndromes `(Z1Z2, Z2Z3)` for no error and X on each data qubit.
pub const BF_SYNDROMES: [(Injection, [u8; 2]); 4] =
    [(&[], [0, 0]), (&[(0, Pauli::X)], [1, 0]), (&[(1, Pauli::X)], [1, 1]), (&[(2, Pauli::X)], [0, 1])];
