//! Pauli operators with exact phase tracking.
//!
//! An operator is stored as i^phase * X^x * Z^z with phase mod 4, so products
//! of checks keep their signs exactly. The text form is a sign prefix followed
//! by one letter per qubit, e.g. `+IXXIZZ` or `-iYXZ`.

use crate::gf2::BitVec;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PauliError {
    #[error("operators act on different qubit counts ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("qubit index {index} out of range for {n} qubits")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("cannot parse Pauli string: {0}")]
    Parse(String),
}

/// A Pauli operator i^phase * prod X_j^{x_j} * prod Z_j^{z_j}.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    x: BitVec,
    z: BitVec,
    /// Power of i in front of the X^x Z^z normal form, mod 4.
    phase: u8,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        PauliOperator {
            n,
            x: BitVec::zeros(n),
            z: BitVec::zeros(n),
            phase: 0,
        }
    }

    /// Builds from explicit bit vectors and phase exponent.
    pub fn new(x: BitVec, z: BitVec, phase: u8) -> Self {
        assert_eq!(x.len(), z.len(), "x and z supports must match");
        PauliOperator {
            n: x.len(),
            x,
            z,
            phase: phase % 4,
        }
    }

    pub fn x_on(n: usize, q: usize) -> Self {
        let mut p = Self::identity(n);
        p.x.set(q, true);
        p
    }

    pub fn z_on(n: usize, q: usize) -> Self {
        let mut p = Self::identity(n);
        p.z.set(q, true);
        p
    }

    /// Y = i X Z, Hermitian by construction.
    pub fn y_on(n: usize, q: usize) -> Self {
        let mut p = Self::identity(n);
        p.x.set(q, true);
        p.z.set(q, true);
        p.phase = 1;
        p
    }

    /// Single-qubit letter placed on `q`, positive sign.
    pub fn letter_on(n: usize, q: usize, letter: char) -> Result<Self, PauliError> {
        if q >= n {
            return Err(PauliError::IndexOutOfRange { index: q, n });
        }
        match letter {
            'I' => Ok(Self::identity(n)),
            'X' => Ok(Self::x_on(n, q)),
            'Y' => Ok(Self::y_on(n, q)),
            'Z' => Ok(Self::z_on(n, q)),
            other => Err(PauliError::Parse(format!("unknown letter {other:?}"))),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_bits(&self) -> &BitVec {
        &self.x
    }

    pub fn z_bits(&self) -> &BitVec {
        &self.z
    }

    pub fn phase_exponent(&self) -> u8 {
        self.phase
    }

    /// Number of qubits on which the operator acts nontrivially.
    pub fn weight(&self) -> usize {
        let mut support = self.x.clone();
        support.or_assign(&self.z);
        support.weight()
    }

    pub fn is_identity_shape(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    fn y_count(&self) -> usize {
        let mut both = self.x.clone();
        both.and_assign(&self.z);
        both.weight()
    }

    /// P^2 = I, equivalently phase == |x & z| mod 2.
    pub fn is_hermitian(&self) -> bool {
        (self.phase as usize) % 2 == self.y_count() % 2
    }

    /// For a Hermitian operator: true when P = + (letters product), false for -.
    pub fn sign_is_positive(&self) -> bool {
        debug_assert!(self.is_hermitian());
        (self.phase as usize + 4 - self.y_count() % 4) % 4 == 0
    }

    pub fn commutes_with(&self, other: &PauliOperator) -> bool {
        debug_assert_eq!(self.n, other.n);
        self.x.dot(&other.z) == self.z.dot(&other.x)
    }

    /// Exact product, including phase: (i^a X^x1 Z^z1)(i^b X^x2 Z^z2).
    pub fn mul(&self, other: &PauliOperator) -> PauliOperator {
        debug_assert_eq!(self.n, other.n);
        let mut x = self.x.clone();
        x.xor_assign(&other.x);
        let mut z = self.z.clone();
        z.xor_assign(&other.z);
        // Commuting Z^z1 past X^x2 costs (-1)^<z1,x2>.
        let swap = self.z.dot(&other.x) as u8;
        PauliOperator {
            n: self.n,
            x,
            z,
            phase: (self.phase + other.phase + 2 * swap) % 4,
        }
    }

    pub fn negated(&self) -> PauliOperator {
        let mut p = self.clone();
        p.phase = (p.phase + 2) % 4;
        p
    }

    pub fn times_i(&self) -> PauliOperator {
        let mut p = self.clone();
        p.phase = (p.phase + 1) % 4;
        p
    }

    /// Same x/z support, phase ignored.
    pub fn same_shape(&self, other: &PauliOperator) -> bool {
        self.x == other.x && self.z == other.z
    }

    /// [x | z] as one vector of length 2n, for F2 rank computations.
    pub fn symplectic(&self) -> BitVec {
        self.x.concat(&self.z)
    }

    /// Deterministic ordering key: weight first, then supports.
    pub fn shape_key(&self) -> (usize, Vec<usize>, Vec<usize>) {
        (self.weight(), self.x.ones(), self.z.ones())
    }

    fn sign_prefix(&self) -> &'static str {
        match (self.phase as usize + 4 - self.y_count() % 4) % 4 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        }
    }

    fn letter(&self, q: usize) -> char {
        match (self.x.get(q), self.z.get(q)) {
            (false, false) => 'I',
            (true, false) => 'X',
            (true, true) => 'Y',
            (false, true) => 'Z',
        }
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.sign_prefix())?;
        for q in 0..self.n {
            write!(f, "{}", self.letter(q))?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for PauliOperator {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s.trim();
        let (prefix_phase, rest) = if let Some(r) = body.strip_prefix("+i") {
            (1u8, r)
        } else if let Some(r) = body.strip_prefix("-i") {
            (3u8, r)
        } else if let Some(r) = body.strip_prefix('+') {
            (0u8, r)
        } else if let Some(r) = body.strip_prefix('-') {
            (2u8, r)
        } else {
            (0u8, body)
        };
        let n = rest.chars().count();
        let mut x = BitVec::zeros(n);
        let mut z = BitVec::zeros(n);
        let mut y_count = 0usize;
        for (q, c) in rest.chars().enumerate() {
            match c {
                'I' => {}
                'X' => x.set(q, true),
                'Y' => {
                    x.set(q, true);
                    z.set(q, true);
                    y_count += 1;
                }
                'Z' => z.set(q, true),
                other => return Err(PauliError::Parse(format!("unknown letter {other:?}"))),
            }
        }
        // The letters product carries i^{y_count}; the prefix multiplies it.
        Ok(PauliOperator {
            n,
            x,
            z,
            phase: ((prefix_phase as usize + y_count) % 4) as u8,
        })
    }
}
