//! Stabilizer tableau in the Aaronson–Gottesman (CHP) form.
//!
//! The tableau holds `2n + 1` rows of bit-packed Pauli operators: rows
//! `0..n` are destabilizers, rows `n..2n` are stabilizers and row `2n` is
//! scratch space. Each row carries a sign bit `r`; row bits are read in the
//! Hermitian convention (`x = z = 1` means `σ_y`), which is what the row
//! multiplication phase rule assumes. Conversion to and from the real
//! convention of [`PauliOperator`] happens at the API boundary.
//!
//! Toffoli and CCZ are supported only when both controls are in a
//! computational basis state; see [`Tableau::classical_toffoli`].

use std::fmt;

use rand::Rng;
use smallvec::{smallvec, SmallVec};
use thiserror::Error;

use crate::pauli::{words_for, Pauli, PauliOperator, Sign};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TableauError {
    #[error("qubit {qubit} out of range for a {n}-qubit tableau")]
    InvalidQubit { qubit: usize, n: usize },
    #[error("qubit {qubit} used more than once in one gate")]
    RepeatedQubit { qubit: usize },
    #[error("control qubit {qubit} is not in a computational basis state")]
    NonDeterministicControl { qubit: usize },
    #[error("operator acts on {found} qubits, tableau has {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("operator with an odd number of Y factors is not Hermitian in the real convention")]
    NonHermitian,
}

/// Clifford gates accepted by [`Tableau::apply_clifford`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CliffordGate {
    H(usize),
    X(usize),
    Y(usize),
    Z(usize),
    S(usize),
    Cnot { control: usize, target: usize },
    Cz(usize, usize),
}

/// Result of a single-qubit Z measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeasurementOutcome {
    pub bit: u8,
    /// `true` when the outcome was fixed by the state before measuring.
    pub deterministic: bool,
}

/// Expectation value of a Pauli operator on a stabilizer state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Expectation {
    Plus,
    Minus,
    /// The operator anticommutes with some stabilizer; expectation is zero.
    Indeterminate,
}

type Words = SmallVec<[u64; 2]>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tableau {
    n: usize,
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    r: Vec<u8>,
}

/// Phase exponent (mod 4) contributed by multiplying `src` into `acc`
/// word by word, following the `g` function of the CHP row sum.
#[inline]
fn g_sum(x1: u64, z1: u64, x2: u64, z2: u64) -> i32 {
    let plus = (x1 & z1 & z2 & !x2) | (x1 & !z1 & x2 & z2) | (!x1 & z1 & x2 & !z2);
    let minus = (x1 & z1 & x2 & !z2) | (x1 & !z1 & !x2 & z2) | (!x1 & z1 & x2 & z2);
    plus.count_ones() as i32 - minus.count_ones() as i32
}

#[inline]
fn phase_bit(e: i32) -> u8 {
    (e.rem_euclid(4) == 2) as u8
}

impl Tableau {
    /// Fresh `n`-qubit tableau stabilizing `|0…0⟩`.
    pub fn new(n: usize) -> Self {
        let words = words_for(n);
        let rows = 2 * n + 1;
        let mut t = Self {
            n,
            words,
            x: vec![0; rows * words],
            z: vec![0; rows * words],
            r: vec![0; rows],
        };
        for q in 0..n {
            let (w, m) = (q / 64, 1u64 << (q % 64));
            t.x[q * words + w] |= m;
            t.z[(q + n) * words + w] |= m;
        }
        t
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    fn check(&self, q: usize) -> Result<(), TableauError> {
        if q < self.n {
            Ok(())
        } else {
            Err(TableauError::InvalidQubit { qubit: q, n: self.n })
        }
    }

    fn check_distinct(&self, qs: &[usize]) -> Result<(), TableauError> {
        for (i, &q) in qs.iter().enumerate() {
            self.check(q)?;
            if qs[..i].contains(&q) {
                return Err(TableauError::RepeatedQubit { qubit: q });
            }
        }
        Ok(())
    }

    fn check_size(&self, p: &PauliOperator) -> Result<(), TableauError> {
        if p.num_qubits() == self.n {
            Ok(())
        } else {
            Err(TableauError::SizeMismatch {
                expected: self.n,
                found: p.num_qubits(),
            })
        }
    }

    #[inline]
    fn locate(&self, q: usize) -> (usize, u32) {
        (q / 64, (q % 64) as u32)
    }

    #[inline]
    fn rows(&self) -> usize {
        2 * self.n
    }

    pub fn apply_clifford(&mut self, gate: CliffordGate) -> Result<(), TableauError> {
        match gate {
            CliffordGate::H(q) => {
                self.check(q)?;
                self.h(q);
            }
            CliffordGate::S(q) => {
                self.check(q)?;
                self.s(q);
            }
            CliffordGate::X(q) => {
                self.check(q)?;
                self.x_flip(q);
            }
            CliffordGate::Y(q) => {
                self.check(q)?;
                self.y_flip(q);
            }
            CliffordGate::Z(q) => {
                self.check(q)?;
                self.z_flip(q);
            }
            CliffordGate::Cnot { control, target } => {
                self.check_distinct(&[control, target])?;
                self.cnot(control, target);
            }
            CliffordGate::Cz(a, b) => {
                self.check_distinct(&[a, b])?;
                self.cz(a, b);
            }
        }
        Ok(())
    }

    /// Hadamard. Indices are not validated here; use [`Self::apply_clifford`]
    /// for checked application.
    pub fn h(&mut self, q: usize) {
        let (w, b) = self.locate(q);
        for i in 0..self.rows() {
            let k = i * self.words + w;
            let xb = (self.x[k] >> b) & 1;
            let zb = (self.z[k] >> b) & 1;
            self.r[i] ^= (xb & zb) as u8;
            if xb != zb {
                self.x[k] ^= 1 << b;
                self.z[k] ^= 1 << b;
            }
        }
    }

    /// Phase gate `S = diag(1, i)`.
    pub fn s(&mut self, q: usize) {
        let (w, b) = self.locate(q);
        for i in 0..self.rows() {
            let k = i * self.words + w;
            let xb = (self.x[k] >> b) & 1;
            let zb = (self.z[k] >> b) & 1;
            self.r[i] ^= (xb & zb) as u8;
            self.z[k] ^= xb << b;
        }
    }

    pub fn cnot(&mut self, control: usize, target: usize) {
        let (wc, bc) = self.locate(control);
        let (wt, bt) = self.locate(target);
        for i in 0..self.rows() {
            let base = i * self.words;
            let xc = (self.x[base + wc] >> bc) & 1;
            let zc = (self.z[base + wc] >> bc) & 1;
            let xt = (self.x[base + wt] >> bt) & 1;
            let zt = (self.z[base + wt] >> bt) & 1;
            self.r[i] ^= (xc & zt & (xt ^ zc ^ 1)) as u8;
            self.x[base + wt] ^= xc << bt;
            self.z[base + wc] ^= zt << bc;
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.h(b);
        self.cnot(a, b);
        self.h(b);
    }

    /// Pauli X on `q`: flips the sign of every row with a Z component there.
    pub fn x_flip(&mut self, q: usize) {
        let (w, b) = self.locate(q);
        for i in 0..self.rows() {
            self.r[i] ^= ((self.z[i * self.words + w] >> b) & 1) as u8;
        }
    }

    pub fn z_flip(&mut self, q: usize) {
        let (w, b) = self.locate(q);
        for i in 0..self.rows() {
            self.r[i] ^= ((self.x[i * self.words + w] >> b) & 1) as u8;
        }
    }

    pub fn y_flip(&mut self, q: usize) {
        let (w, b) = self.locate(q);
        for i in 0..self.rows() {
            let k = i * self.words + w;
            self.r[i] ^= (((self.x[k] ^ self.z[k]) >> b) & 1) as u8;
        }
    }

    /// Applies a single-qubit Pauli factor.
    pub fn apply_pauli_factor(&mut self, q: usize, p: Pauli) {
        match p {
            Pauli::I => {}
            Pauli::X => self.x_flip(q),
            Pauli::Y => self.y_flip(q),
            Pauli::Z => self.z_flip(q),
        }
    }

    /// Conjugates the state by a Pauli operator. Only row signs change.
    pub fn apply_pauli(&mut self, p: &PauliOperator) -> Result<(), TableauError> {
        self.check_size(p)?;
        let (px, pz) = (p.x_words(), p.z_words());
        for i in 0..self.rows() {
            let base = i * self.words;
            let mut parity = 0u32;
            for k in 0..self.words {
                parity ^= ((self.x[base + k] & pz[k]) ^ (self.z[base + k] & px[k])).count_ones();
            }
            self.r[i] ^= (parity & 1) as u8;
        }
        Ok(())
    }

    /// `row[h] ← row[i] · row[h]` with CHP phase bookkeeping.
    fn rowsum(&mut self, h: usize, i: usize) {
        let (bh, bi) = (h * self.words, i * self.words);
        let mut e = 2 * self.r[h] as i32 + 2 * self.r[i] as i32;
        for k in 0..self.words {
            let (x1, z1) = (self.x[bi + k], self.z[bi + k]);
            let (x2, z2) = (self.x[bh + k], self.z[bh + k]);
            e += g_sum(x1, z1, x2, z2);
            self.x[bh + k] = x1 ^ x2;
            self.z[bh + k] = z1 ^ z2;
        }
        self.r[h] = phase_bit(e);
    }

    /// Multiplies row `i` into an external accumulator and returns its new sign bit.
    fn accumulate(&self, ax: &mut [u64], az: &mut [u64], ar: u8, i: usize) -> u8 {
        let bi = i * self.words;
        let mut e = 2 * ar as i32 + 2 * self.r[i] as i32;
        for k in 0..self.words {
            let (x1, z1) = (self.x[bi + k], self.z[bi + k]);
            e += g_sum(x1, z1, ax[k], az[k]);
            ax[k] ^= x1;
            az[k] ^= z1;
        }
        phase_bit(e)
    }

    #[inline]
    fn xbit(&self, row: usize, q: usize) -> bool {
        let (w, b) = self.locate(q);
        (self.x[row * self.words + w] >> b) & 1 == 1
    }

    fn anticommutes_with_row(&self, row: usize, px: &[u64], pz: &[u64]) -> bool {
        let base = row * self.words;
        let mut parity = 0u32;
        for k in 0..self.words {
            parity ^= ((self.x[base + k] & pz[k]) ^ (self.z[base + k] & px[k])).count_ones();
        }
        parity & 1 == 1
    }

    /// Expectation of `Z_q` without touching the tableau.
    pub fn z_expectation(&self, q: usize) -> Expectation {
        let n = self.n;
        if (n..2 * n).any(|i| self.xbit(i, q)) {
            return Expectation::Indeterminate;
        }
        let mut ax: Words = smallvec![0; self.words];
        let mut az: Words = smallvec![0; self.words];
        let mut ar = 0u8;
        for i in 0..n {
            if self.xbit(i, q) {
                ar = self.accumulate(&mut ax, &mut az, ar, i + n);
            }
        }
        if ar == 1 {
            Expectation::Minus
        } else {
            Expectation::Plus
        }
    }

    /// Measures `Z_q`, collapsing the state when the outcome is random.
    pub fn measure_z<R: Rng + ?Sized>(
        &mut self,
        q: usize,
        rng: &mut R,
    ) -> Result<MeasurementOutcome, TableauError> {
        self.check(q)?;
        let n = self.n;
        let Some(p) = (n..2 * n).find(|&i| self.xbit(i, q)) else {
            let bit = match self.z_expectation(q) {
                Expectation::Minus => 1,
                _ => 0,
            };
            return Ok(MeasurementOutcome {
                bit,
                deterministic: true,
            });
        };
        for i in 0..2 * n {
            if i != p && self.xbit(i, q) {
                self.rowsum(i, p);
            }
        }
        let w = self.words;
        let (dst, src) = ((p - n) * w, p * w);
        self.x.copy_within(src..src + w, dst);
        self.z.copy_within(src..src + w, dst);
        self.r[p - n] = self.r[p];
        self.x[src..src + w].fill(0);
        self.z[src..src + w].fill(0);
        let (wq, bq) = self.locate(q);
        self.z[src + wq] |= 1 << bq;
        let bit = rng.random::<bool>() as u8;
        self.r[p] = bit;
        Ok(MeasurementOutcome {
            bit,
            deterministic: false,
        })
    }

    /// Ideal reset of `q` to `|0⟩` (measure, then flip on outcome 1).
    pub fn reset_zero<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<(), TableauError> {
        if self.measure_z(q, rng)?.bit == 1 {
            self.x_flip(q);
        }
        Ok(())
    }

    /// Expectation of a real-convention Pauli operator. Never mutates the tableau.
    pub fn deterministic_sign(&self, p: &PauliOperator) -> Result<Expectation, TableauError> {
        self.check_size(p)?;
        let m = p.y_count();
        if m % 2 == 1 {
            return Err(TableauError::NonHermitian);
        }
        let n = self.n;
        let (px, pz) = (p.x_words(), p.z_words());
        if (n..2 * n).any(|i| self.anticommutes_with_row(i, px, pz)) {
            return Ok(Expectation::Indeterminate);
        }
        let mut ax: Words = smallvec![0; self.words];
        let mut az: Words = smallvec![0; self.words];
        let mut ar = 0u8;
        for i in 0..n {
            if self.anticommutes_with_row(i, px, pz) {
                ar = self.accumulate(&mut ax, &mut az, ar, i + n);
            }
        }
        debug_assert!(ax[..] == px[..] && az[..] == pz[..]);
        // real = sign · (-1)^{m/2} · σ-form; the product of stabilizers is (-1)^ar · σ-form
        let minus = (ar == 1) ^ ((m / 2) % 2 == 1) ^ p.sign().is_minus();
        Ok(if minus {
            Expectation::Minus
        } else {
            Expectation::Plus
        })
    }

    fn classical_controls(&self, c1: usize, c2: usize, t: usize) -> Result<bool, TableauError> {
        self.check_distinct(&[c1, c2, t])?;
        let mut fire = true;
        for c in [c1, c2] {
            match self.z_expectation(c) {
                Expectation::Indeterminate => {
                    return Err(TableauError::NonDeterministicControl { qubit: c })
                }
                Expectation::Plus => fire = false,
                Expectation::Minus => {}
            }
        }
        Ok(fire)
    }

    /// Toffoli with computational-basis controls: X on `t` iff both controls are `|1⟩`.
    ///
    /// Fails without modifying the state if either control is in superposition.
    pub fn classical_toffoli(&mut self, c1: usize, c2: usize, t: usize) -> Result<(), TableauError> {
        if self.classical_controls(c1, c2, t)? {
            self.x_flip(t);
        }
        Ok(())
    }

    /// CCZ with computational-basis controls: Z on `t` iff both controls are `|1⟩`.
    pub fn classical_ccz(&mut self, c1: usize, c2: usize, t: usize) -> Result<(), TableauError> {
        if self.classical_controls(c1, c2, t)? {
            self.z_flip(t);
        }
        Ok(())
    }

    fn row_string(&self, i: usize) -> String {
        let mut s = String::with_capacity(self.n + 1);
        s.push(if self.r[i] == 1 { '-' } else { '+' });
        for q in 0..self.n {
            let (w, b) = self.locate(q);
            let k = i * self.words + w;
            let xb = (self.x[k] >> b) & 1 == 1;
            let zb = (self.z[k] >> b) & 1 == 1;
            s.push(Pauli::from_bits(xb, zb).as_char());
        }
        s
    }

    /// Stabilizer generators as `±` strings with `Y = σ_y`.
    pub fn stabilizer_strings(&self) -> Vec<String> {
        (self.n..2 * self.n).map(|i| self.row_string(i)).collect()
    }

    pub fn destabilizer_strings(&self) -> Vec<String> {
        (0..self.n).map(|i| self.row_string(i)).collect()
    }

    fn rows_anticommute(&self, a: usize, b: usize) -> bool {
        let (ba, bb) = (a * self.words, b * self.words);
        let mut parity = 0u32;
        for k in 0..self.words {
            parity ^=
                ((self.x[ba + k] & self.z[bb + k]) ^ (self.z[ba + k] & self.x[bb + k])).count_ones();
        }
        parity & 1 == 1
    }

    /// Checks the symplectic conditions and linear independence of all `2n` rows.
    pub fn check_invariants(&self) -> bool {
        let n = self.n;
        for i in 0..2 * n {
            for j in (i + 1)..2 * n {
                let expect = j == i + n;
                if self.rows_anticommute(i, j) != expect {
                    return false;
                }
            }
        }
        self.row_rank() == 2 * n
    }

    fn row_rank(&self) -> usize {
        let w = self.words;
        let mut rows: Vec<Vec<u64>> = (0..2 * self.n)
            .map(|i| {
                let mut v = self.x[i * w..(i + 1) * w].to_vec();
                v.extend_from_slice(&self.z[i * w..(i + 1) * w]);
                v
            })
            .collect();
        let mut rank = 0;
        for col in 0..2 * w * 64 {
            let (cw, cb) = (col / 64, col % 64);
            let Some(pivot) = (rank..rows.len()).find(|&i| (rows[i][cw] >> cb) & 1 == 1) else {
                continue;
            };
            rows.swap(rank, pivot);
            let pr = rows[rank].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != rank && (row[cw] >> cb) & 1 == 1 {
                    row.iter_mut().zip(&pr).for_each(|(a, b)| *a ^= b);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Sign of a real-convention operator as a [`Sign`], if determined.
    pub fn sign_of(&self, p: &PauliOperator) -> Result<Option<Sign>, TableauError> {
        Ok(match self.deterministic_sign(p)? {
            Expectation::Plus => Some(Sign::Plus),
            Expectation::Minus => Some(Sign::Minus),
            Expectation::Indeterminate => None,
        })
    }
}

impl fmt::Display for Tableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "destabilizers:")?;
        for s in self.destabilizer_strings() {
            writeln!(f, "  {s}")?;
        }
        writeln!(f, "stabilizers:")?;
        for s in self.stabilizer_strings() {
            writeln!(f, "  {s}")?;
        }
        Ok(())
    }
}
