//! Multi-qubit Pauli operators in the real convention.
//!
//! A [`PauliOperator`] stands for `sign · ⊗_q X_q^{x_q} Z_q^{z_q}`, with the
//! X factor written to the left of the Z factor on every qubit. Under this
//! convention the `x = z = 1` factor is the real matrix `XZ = -iσ_y`, and the
//! product of any two operators is again `±` a bit pattern, so the sign never
//! picks up a factor of `i`.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use thiserror::Error;

/// Single-qubit Pauli factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// The three non-identity factors, in `X, Y, Z` order.
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// `(x, z)` bits of the factor.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Overall sign of an operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn is_minus(self) -> bool {
        matches!(self, Sign::Minus)
    }

    fn from_minus(minus: bool) -> Self {
        if minus {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

impl Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_minus(self.is_minus() != rhs.is_minus())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PauliParseError {
    #[error("unexpected character {0:?} in Pauli string")]
    BadChar(char),
    #[error("empty Pauli string")]
    Empty,
}

pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

/// Tensor product of single-qubit Pauli factors with a `±1` sign.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    sign: Sign,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        Self {
            n,
            x: vec![0; w],
            z: vec![0; w],
            sign: Sign::Plus,
        }
    }

    /// Operator with the given factors on the listed qubits and identity elsewhere.
    ///
    /// Panics if a qubit index is out of range.
    pub fn from_sparse(n: usize, factors: &[(usize, Pauli)]) -> Self {
        let mut op = Self::identity(n);
        for &(q, p) in factors {
            op.set(q, p);
        }
        op
    }

    /// Product of `X` on every listed qubit.
    pub fn x_on(n: usize, qubits: &[usize]) -> Self {
        let factors: Vec<_> = qubits.iter().map(|&q| (q, Pauli::X)).collect();
        Self::from_sparse(n, &factors)
    }

    /// Product of `Z` on every listed qubit.
    pub fn z_on(n: usize, qubits: &[usize]) -> Self {
        let factors: Vec<_> = qubits.iter().map(|&q| (q, Pauli::Z)).collect();
        Self::from_sparse(n, &factors)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn with_sign(mut self, sign: Sign) -> Self {
        self.sign = sign;
        self
    }

    pub fn negate(&mut self) {
        self.sign = self.sign * Sign::Minus;
    }

    pub fn get(&self, q: usize) -> Pauli {
        assert!(q < self.n, "qubit {q} out of range for {}-qubit operator", self.n);
        let (w, b) = (q / 64, q % 64);
        Pauli::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        assert!(q < self.n, "qubit {q} out of range for {}-qubit operator", self.n);
        let (w, b) = (q / 64, q % 64);
        let (xb, zb) = p.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | ((xb as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((zb as u64) << b);
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    /// Number of `Y` factors.
    pub fn y_count(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x & z).count_ones() as usize)
            .sum()
    }

    /// Qubits carrying a non-identity factor, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.get(q) != Pauli::I).collect()
    }

    pub fn commutes_with(&self, other: &PauliOperator) -> bool {
        assert_eq!(self.n, other.n, "operator sizes differ");
        let mut parity = 0u32;
        for i in 0..self.x.len() {
            parity ^= ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones() & 1;
        }
        parity == 0
    }

    /// Operator product `self · other`.
    pub fn compose(&self, other: &PauliOperator) -> PauliOperator {
        assert_eq!(self.n, other.n, "operator sizes differ");
        // X^a Z^b · X^c Z^d = (-1)^{b·c} X^{a+c} Z^{b+d}
        let mut swaps = 0u32;
        let mut x = Vec::with_capacity(self.x.len());
        let mut z = Vec::with_capacity(self.z.len());
        for i in 0..self.x.len() {
            swaps ^= (self.z[i] & other.x[i]).count_ones() & 1;
            x.push(self.x[i] ^ other.x[i]);
            z.push(self.z[i] ^ other.z[i]);
        }
        PauliOperator {
            n: self.n,
            x,
            z,
            sign: self.sign * other.sign * Sign::from_minus(swaps == 1),
        }
    }
}

impl Mul for &PauliOperator {
    type Output = PauliOperator;

    fn mul(self, rhs: &PauliOperator) -> PauliOperator {
        self.compose(rhs)
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.sign.is_minus() { "-" } else { "+" })?;
        for q in 0..self.n {
            write!(f, "{}", self.get(q).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliOperator {
    type Err = PauliParseError;

    /// Parses strings like `"+XIZ"`, `"-ZZ"` or `"X_Y"`; qubit 0 is leftmost.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (sign, body) = match s.as_bytes().first() {
            Some(b'+') => (Sign::Plus, &s[1..]),
            Some(b'-') => (Sign::Minus, &s[1..]),
            _ => (Sign::Plus, s),
        };
        if body.is_empty() {
            return Err(PauliParseError::Empty);
        }
        let n = body.chars().count();
        let mut op = PauliOperator::identity(n);
        for (q, c) in body.chars().enumerate() {
            let p = match c {
                'I' | '_' | '.' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(PauliParseError::BadChar(other)),
            };
            op.set(q, p);
        }
        Ok(op.with_sign(sign))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn op(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["+XIZ", "-YYZ", "+I"] {
            assert_eq!(op(s).to_string(), s);
        }
        assert_eq!(op("X_Z").to_string(), "+XIZ");
        assert_eq!("".parse::<PauliOperator>(), Err(PauliParseError::Empty));
        assert_eq!("XQ".parse::<PauliOperator>(), Err(PauliParseError::BadChar('Q')));
    }

    #[test]
    fn real_convention_products() {
        // Z·X = -XZ, and XZ is the "Y" bit pattern.
        assert_eq!(op("Z").compose(&op("X")), op("-Y"));
        assert_eq!(op("X").compose(&op("Z")), op("+Y"));
        // Y·Y = XZXZ = -XXZZ = -I
        assert_eq!(op("Y").compose(&op("Y")), op("-I"));
        assert_eq!(op("XX").compose(&op("ZZ")), op("+YY"));
    }

    #[test]
    fn commutation() {
        assert!(!op("XI").commutes_with(&op("ZI")));
        assert!(op("XX").commutes_with(&op("ZZ")));
        assert!(!op("YI").commutes_with(&op("ZI")));
        assert!(op("Y").commutes_with(&op("Y")));
    }

    #[test]
    fn wide_operators_span_words() {
        let mut a = PauliOperator::identity(130);
        a.set(0, Pauli::X);
        a.set(129, Pauli::Z);
        assert_eq!(a.support(), vec![0, 129]);
        assert_eq!(a.weight(), 2);
        let b = PauliOperator::from_sparse(130, &[(129, Pauli::X)]);
        assert!(!a.commutes_with(&b));
    }

    fn arb_op(n: usize) -> impl Strategy<Value = PauliOperator> {
        (proptest::collection::vec(0u8..4, n), any::<bool>()).prop_map(move |(fs, neg)| {
            let mut p = PauliOperator::identity(n);
            for (q, f) in fs.into_iter().enumerate() {
                p.set(q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][f as usize]);
            }
            p.with_sign(if neg { Sign::Minus } else { Sign::Plus })
        })
    }

    proptest! {
        #[test]
        fn composition_is_associative(a in arb_op(5), b in arb_op(5), c in arb_op(5)) {
            prop_assert_eq!(a.compose(&b).compose(&c), a.compose(&b.compose(&c)));
        }

        #[test]
        fn swapping_factors_picks_up_commutator_sign(a in arb_op(6), b in arb_op(6)) {
            let ab = a.compose(&b);
            let mut ba = b.compose(&a);
            if !a.commutes_with(&b) {
                ba.negate();
            }
            prop_assert_eq!(ab, ba);
        }
    }
}
