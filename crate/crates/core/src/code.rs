//! Stabilizer code descriptions and the correction-rule classification of
//! data qubits.

use thiserror::Error;

use crate::pauli::{Pauli, PauliOperator};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("generators {a} and {b} do not commute")]
    NonCommutingGenerators { a: String, b: String },
    #[error("logical X and logical Z must anticommute")]
    LogicalsCommute,
    #[error("logical {which} does not commute with generator {generator}")]
    LogicalNotCentral { which: &'static str, generator: String },
    #[error("{kind} generator {generator} has the wrong Pauli type")]
    WrongGeneratorType { kind: &'static str, generator: String },
    #[error("operator acts on {found} qubits, code has {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("data qubit {qubit} is not covered by any {kind} generator")]
    DataQubitUncovered { qubit: usize, kind: &'static str },
    #[error("data qubit {qubit} sits in {count} {kind} generators; at most two are supported")]
    UnsupportedAdjacency { qubit: usize, count: usize, kind: &'static str },
}

/// Generators and logical operators of a CSS code on `n_data` data qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeSpec {
    pub name: String,
    pub n_data: usize,
    pub z_generators: Vec<PauliOperator>,
    pub x_generators: Vec<PauliOperator>,
    pub logical_x: PauliOperator,
    pub logical_z: PauliOperator,
}

fn is_pure(p: &PauliOperator, factor: Pauli) -> bool {
    p.support().into_iter().all(|q| p.get(q) == factor)
}

impl CodeSpec {
    /// Validates commutation relations and generator types.
    pub fn new(
        name: impl Into<String>,
        n_data: usize,
        z_generators: Vec<PauliOperator>,
        x_generators: Vec<PauliOperator>,
        logical_x: PauliOperator,
        logical_z: PauliOperator,
    ) -> Result<Self, CodeError> {
        let all = z_generators
            .iter()
            .chain(&x_generators)
            .chain([&logical_x, &logical_z]);
        for p in all {
            if p.num_qubits() != n_data {
                return Err(CodeError::SizeMismatch {
                    expected: n_data,
                    found: p.num_qubits(),
                });
            }
        }
        for g in &z_generators {
            if !is_pure(g, Pauli::Z) {
                return Err(CodeError::WrongGeneratorType { kind: "Z", generator: g.to_string() });
            }
        }
        for g in &x_generators {
            if !is_pure(g, Pauli::X) {
                return Err(CodeError::WrongGeneratorType { kind: "X", generator: g.to_string() });
            }
        }
        let spec = Self {
            name: name.into(),
            n_data,
            z_generators,
            x_generators,
            logical_x,
            logical_z,
        };
        let gens: Vec<_> = spec.generators().collect();
        for (i, a) in gens.iter().enumerate() {
            for b in &gens[i + 1..] {
                if !a.commutes_with(b) {
                    return Err(CodeError::NonCommutingGenerators {
                        a: a.to_string(),
                        b: b.to_string(),
                    });
                }
            }
            for (which, l) in [("X", &spec.logical_x), ("Z", &spec.logical_z)] {
                if !l.commutes_with(a) {
                    return Err(CodeError::LogicalNotCentral { which, generator: a.to_string() });
                }
            }
        }
        if spec.logical_x.commutes_with(&spec.logical_z) {
            return Err(CodeError::LogicalsCommute);
        }
        Ok(spec)
    }

    /// Three-qubit bit-flip code: `Z₁Z₂, Z₂Z₃`, logicals `X₁X₂X₃` / `Z₁Z₂Z₃`.
    pub fn bit_flip() -> Self {
        let n = 3;
        Self::new(
            "bf",
            n,
            vec![PauliOperator::z_on(n, &[0, 1]), PauliOperator::z_on(n, &[1, 2])],
            vec![],
            PauliOperator::x_on(n, &[0, 1, 2]),
            PauliOperator::z_on(n, &[0, 1, 2]),
        )
        .expect("bit-flip code is well formed")
    }

    /// Distance-three rotated surface code on nine data qubits (row-major 3×3).
    pub fn surface17() -> Self {
        let n = 9;
        // 1-based labels in comments; indices are 0-based.
        let x = |qs: &[usize]| PauliOperator::x_on(n, &qs.iter().map(|q| q - 1).collect::<Vec<_>>());
        let z = |qs: &[usize]| PauliOperator::z_on(n, &qs.iter().map(|q| q - 1).collect::<Vec<_>>());
        Self::new(
            "surface17",
            n,
            vec![z(&[1, 4]), z(&[6, 9]), z(&[2, 3, 5, 6]), z(&[4, 5, 7, 8])],
            vec![x(&[2, 3]), x(&[7, 8]), x(&[1, 2, 4, 5]), x(&[5, 6, 8, 9])],
            x(&[3, 5, 7]),
            z(&[1, 5, 9]),
        )
        .expect("surface-17 code is well formed")
    }

    /// A single bare qubit with no generators, used for the uncorrected baseline.
    pub fn unencoded() -> Self {
        Self::new(
            "unencoded",
            1,
            vec![],
            vec![],
            PauliOperator::x_on(1, &[0]),
            PauliOperator::z_on(1, &[0]),
        )
        .expect("bare qubit is well formed")
    }

    /// X generators followed by Z generators.
    pub fn generators(&self) -> impl Iterator<Item = &PauliOperator> {
        self.x_generators.iter().chain(&self.z_generators)
    }

    /// Extends a data-qubit operator to a register of `n` qubits (data qubits first).
    pub fn embed(&self, p: &PauliOperator, n: usize) -> PauliOperator {
        let factors: Vec<_> = p.support().into_iter().map(|q| (q, p.get(q))).collect();
        PauliOperator::from_sparse(n, &factors).with_sign(p.sign())
    }
}

/// Data qubits split by which correction rule applies to them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CorrectionPartition {
    /// Adjacent to two detecting generators: corrected from one cycle's syndromes.
    pub same_cycle: Vec<usize>,
    /// Adjacent to one detecting generator: corrected after the syndrome repeats.
    pub two_cycle: Vec<usize>,
}

/// Correction partitions per error type. A code without generators of the
/// detecting type does not correct that error type and yields `None`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorrectionTargets {
    /// X errors, detected by Z generators.
    pub x_errors: Option<CorrectionPartition>,
    /// Z errors, detected by X generators.
    pub z_errors: Option<CorrectionPartition>,
}

fn partition(
    n_data: usize,
    detectors: &[PauliOperator],
    kind: &'static str,
) -> Result<Option<CorrectionPartition>, CodeError> {
    if detectors.is_empty() {
        return Ok(None);
    }
    let mut part = CorrectionPartition::default();
    for q in 0..n_data {
        let count = detectors.iter().filter(|g| g.get(q) != Pauli::I).count();
        match count {
            0 => return Err(CodeError::DataQubitUncovered { qubit: q, kind }),
            1 => part.two_cycle.push(q),
            2 => part.same_cycle.push(q),
            count => return Err(CodeError::UnsupportedAdjacency { qubit: q, count, kind }),
        }
    }
    Ok(Some(part))
}

/// Classifies each data qubit by the number of detecting generators it sits in.
pub fn correction_targets(spec: &CodeSpec) -> Result<CorrectionTargets, CodeError> {
    Ok(CorrectionTargets {
        x_errors: partition(spec.n_data, &spec.z_generators, "Z")?,
        z_errors: partition(spec.n_data, &spec.x_generators, "X")?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_based(v: &[usize]) -> Vec<usize> {
        v.iter().map(|q| q + 1).collect()
    }

    #[test]
    fn surface17_partitions() {
        let t = correction_targets(&CodeSpec::surface17()).unwrap();
        let x = t.x_errors.unwrap();
        assert_eq!(one_based(&x.same_cycle), vec![4, 5, 6]);
        assert_eq!(one_based(&x.two_cycle), vec![1, 2, 3, 7, 8, 9]);
        let z = t.z_errors.unwrap();
        assert_eq!(one_based(&z.same_cycle), vec![2, 5, 8]);
        assert_eq!(one_based(&z.two_cycle), vec![1, 3, 4, 6, 7, 9]);
    }

    #[test]
    fn bit_flip_partition() {
        let t = correction_targets(&CodeSpec::bit_flip()).unwrap();
        let x = t.x_errors.unwrap();
        assert_eq!(x.same_cycle, vec![1]);
        assert_eq!(x.two_cycle, vec![0, 2]);
        assert_eq!(t.z_errors, None);
    }

    #[test]
    fn uncovered_qubit_is_reported() {
        let n = 3;
        let spec = CodeSpec::new(
            "broken",
            n,
            vec![PauliOperator::z_on(n, &[0, 1])],
            vec![],
            PauliOperator::x_on(n, &[0, 1, 2]),
            PauliOperator::z_on(n, &[0, 1, 2]),
        )
        .unwrap();
        assert_eq!(
            correction_targets(&spec),
            Err(CodeError::DataQubitUncovered { qubit: 2, kind: "Z" })
        );
    }

    #[test]
    fn construction_rejects_bad_logicals() {
        let n = 3;
        let err = CodeSpec::new(
            "bad",
            n,
            vec![PauliOperator::z_on(n, &[0, 1])],
            vec![],
            PauliOperator::x_on(n, &[0]),
            PauliOperator::z_on(n, &[0, 1, 2]),
        )
        .unwrap_err();
        assert!(matches!(err, CodeError::LogicalNotCentral { which: "X", .. }));

        let err = CodeSpec::new(
            "bad",
            n,
            vec![],
            vec![],
            PauliOperator::z_on(n, &[0]),
            PauliOperator::z_on(n, &[1]),
        )
        .unwrap_err();
        assert_eq!(err, CodeError::LogicalsCommute);
    }

    #[test]
    fn table_codes_are_consistent() {
        for spec in [CodeSpec::bit_flip(), CodeSpec::surface17(), CodeSpec::unencoded()] {
            assert!(!spec.logical_x.commutes_with(&spec.logical_z));
            for g in spec.generators() {
                assert!(spec.logical_x.commutes_with(g));
                assert!(spec.logical_z.commutes_with(g));
            }
        }
    }
}
