//! Stabilizer tableau simulation for sequences of Pauli measurements.
//!
//! The tableau is the instantaneous stabilizer group (ISG) of a Floquet code:
//! an independent list of signed commuting Pauli generators. Measuring a check
//! updates the list; `transport` follows an error operator through a
//! measurement sequence by multiplying in previously measured checks.

use crate::gf2::{BitMatrix, BitVec};
use crate::pauli::PauliOperator;
use rand::Rng;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StabError {
    #[error("measured operator must be Hermitian: {0}")]
    NonHermitian(String),
    #[error("operator acts on {0} qubits but tableau has {1}")]
    QubitMismatch(usize, usize),
    #[error("operator anticommutes with measurement {step} and no earlier valid check fixes it")]
    CannotTransport { step: usize },
    #[error("schedule size must be even and at least 4, got {0}")]
    BadRingSize(usize),
    #[error("generators must pairwise commute: {0} vs {1}")]
    NonCommutingGenerators(String, String),
    #[error("generators are dependent over the symplectic form")]
    DependentGenerators,
    #[error("cannot parse schedule line {line}: {source}")]
    ScheduleParse {
        line: usize,
        source: crate::pauli::PauliError,
    },
}

/// Membership of an operator in a signed stabilizer group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupMembership {
    /// The operator, with its sign, is an element of the group.
    WithSign,
    /// The negated operator is an element; the shape is present, the sign is not.
    UpToSignOnly,
    Absent,
}

/// The instantaneous stabilizer group: independent signed commuting generators.
#[derive(Clone)]
pub struct StabilizerTableau {
    n: usize,
    gens: Vec<PauliOperator>,
}

impl StabilizerTableau {
    /// Maximally mixed state: no stabilizers at all.
    pub fn maximally_mixed(n: usize) -> Self {
        StabilizerTableau {
            n,
            gens: Vec::new(),
        }
    }

    /// Builds a tableau from explicit generators, validating the invariants.
    pub fn from_generators(n: usize, gens: Vec<PauliOperator>) -> Result<Self, StabError> {
        for g in &gens {
            if g.num_qubits() != n {
                return Err(StabError::QubitMismatch(g.num_qubits(), n));
            }
            if !g.is_hermitian() {
                return Err(StabError::NonHermitian(g.to_string()));
            }
        }
        for (i, a) in gens.iter().enumerate() {
            for b in &gens[i + 1..] {
                if !a.commutes_with(b) {
                    return Err(StabError::NonCommutingGenerators(
                        a.to_string(),
                        b.to_string(),
                    ));
                }
            }
        }
        let m = BitMatrix::from_rows(gens.iter().map(|g| g.symplectic()).collect(), 2 * n);
        if m.rank() != gens.len() {
            return Err(StabError::DependentGenerators);
        }
        Ok(StabilizerTableau { n, gens })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.gens
    }

    /// Generator symplectic vectors as matrix rows.
    pub fn symplectic_matrix(&self) -> BitMatrix {
        BitMatrix::from_rows(self.gens.iter().map(|g| g.symplectic()).collect(), 2 * self.n)
    }

    /// The group element with the same shape as `p`, if the shape is in the
    /// span of the generators. Built as the product of a generator subset in
    /// ascending index order, so the sign is exact.
    fn signed_combination(&self, p: &PauliOperator) -> Option<PauliOperator> {
        if self.gens.is_empty() {
            return p.is_identity_shape().then(|| PauliOperator::identity(self.n));
        }
        let mut cols = BitMatrix::zeros(2 * self.n, self.gens.len());
        for (j, g) in self.gens.iter().enumerate() {
            for i in g.symplectic().ones() {
                cols.set(i, j, true);
            }
        }
        let sol = cols.solve(&p.symplectic())?;
        let mut q = PauliOperator::identity(self.n);
        for j in sol.ones() {
            q = q.mul(&self.gens[j]);
        }
        Some(q)
    }

    /// Decides membership with sign, up to sign, or not at all.
    pub fn contains(&self, p: &PauliOperator) -> GroupMembership {
        match self.signed_combination(p) {
            None => GroupMembership::Absent,
            Some(q) => match (4 + q.phase_exponent() - p.phase_exponent()) % 4 {
                0 => GroupMembership::WithSign,
                2 => GroupMembership::UpToSignOnly,
                // Phase off by i: same shape but the query is not in the
                // Hermitian-signed group at all.
                _ => GroupMembership::Absent,
            },
        }
    }

    fn measure_impl(
        &mut self,
        p: &PauliOperator,
        pick: impl FnOnce() -> i8,
    ) -> Result<(i8, bool), StabError> {
        if p.num_qubits() != self.n {
            return Err(StabError::QubitMismatch(p.num_qubits(), self.n));
        }
        if !p.is_hermitian() {
            return Err(StabError::NonHermitian(p.to_string()));
        }
        let anti: Vec<usize> = (0..self.gens.len())
            .filter(|&i| !self.gens[i].commutes_with(p))
            .collect();
        let result = if anti.is_empty() {
            match self.signed_combination(p) {
                Some(q) => {
                    let outcome = if q == *p { 1 } else { -1 };
                    (outcome, true)
                }
                None => {
                    let outcome = pick();
                    self.gens.push(if outcome < 0 { p.negated() } else { p.clone() });
                    (outcome, false)
                }
            }
        } else {
            // Lowest anticommuting generator becomes the pivot; the others are
            // repaired by multiplying the pivot in, then the pivot is replaced.
            let pivot = anti[0];
            let pivot_op = self.gens[pivot].clone();
            for &i in &anti[1..] {
                self.gens[i] = self.gens[i].mul(&pivot_op);
            }
            let outcome = pick();
            self.gens[pivot] = if outcome < 0 { p.negated() } else { p.clone() };
            (outcome, false)
        };
        self.debug_check_invariants();
        Ok(result)
    }

    /// Measures `p`. Returns (outcome, deterministic flag). Random outcomes
    /// draw from `rng`; deterministic ones leave the tableau unchanged.
    pub fn measure(
        &mut self,
        p: &PauliOperator,
        rng: &mut impl Rng,
    ) -> Result<(i8, bool), StabError> {
        self.measure_impl(p, || if rng.gen::<bool>() { 1 } else { -1 })
    }

    /// Measures `p` forcing the outcome to `want` whenever it is free.
    /// A determined outcome is returned as-is and may differ from `want`.
    pub fn measure_forced(&mut self, p: &PauliOperator, want: i8) -> Result<(i8, bool), StabError> {
        debug_assert!(want == 1 || want == -1);
        self.measure_impl(p, || want)
    }

    /// Minimum-weight signed representative of `p` modulo the group.
    ///
    /// `p` must commute with every generator. Enumerates all 2^rank signed
    /// subset products by Gray code; ties in weight break by support order, so
    /// the result is deterministic.
    pub fn reduce_mod_group(&self, p: &PauliOperator) -> PauliOperator {
        debug_assert!(self.gens.iter().all(|g| g.commutes_with(p)));
        assert!(
            self.gens.len() <= 24,
            "coset enumeration over 2^{} subsets is too large",
            self.gens.len()
        );
        let mut current = p.clone();
        let mut best = current.clone();
        let mut best_key = best.shape_key();
        for step in 1u64..(1u64 << self.gens.len()) {
            let flip = step.trailing_zeros() as usize;
            current = current.mul(&self.gens[flip]);
            let key = current.shape_key();
            if key < best_key {
                best = current.clone();
                best_key = key;
            }
        }
        best
    }

    fn debug_check_invariants(&self) {
        #[cfg(debug_assertions)]
        {
            for (i, a) in self.gens.iter().enumerate() {
                debug_assert!(a.is_hermitian(), "generator {a} not Hermitian");
                for b in &self.gens[i + 1..] {
                    debug_assert!(a.commutes_with(b), "generators {a} and {b} anticommute");
                }
            }
            debug_assert_eq!(
                self.symplectic_matrix().rank(),
                self.gens.len(),
                "generators became dependent"
            );
        }
    }
}

impl fmt::Debug for StabilizerTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ISG[")?;
        for (i, g) in self.gens.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{g}")?;
        }
        write!(f, "]")
    }
}

/// True when the two generator lists span the same group ignoring signs.
pub fn groups_equal_up_to_signs(a: &[PauliOperator], b: &[PauliOperator], n: usize) -> bool {
    let ra = BitMatrix::from_rows(a.iter().map(|g| g.symplectic()).collect(), 2 * n).rank();
    let rb = BitMatrix::from_rows(b.iter().map(|g| g.symplectic()).collect(), 2 * n).rank();
    if ra != rb {
        return false;
    }
    let all: Vec<BitVec> = a.iter().chain(b.iter()).map(|g| g.symplectic()).collect();
    BitMatrix::from_rows(all, 2 * n).rank() == ra
}

/// An ordered list of checks to measure, optionally repeated with a period.
#[derive(Clone, Debug)]
pub struct MeasurementSchedule {
    pub ops: Vec<PauliOperator>,
    /// Number of measurements forming one round; defaults to the whole list.
    pub period: Option<usize>,
}

impl MeasurementSchedule {
    pub fn new(ops: Vec<PauliOperator>) -> Self {
        MeasurementSchedule { ops, period: None }
    }

    pub fn round_len(&self) -> usize {
        self.period.unwrap_or(self.ops.len())
    }
}

impl fmt::Display for MeasurementSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for op in &self.ops {
            writeln!(f, "{op}")?;
        }
        Ok(())
    }
}

impl FromStr for MeasurementSchedule {
    type Err = StabError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut ops = Vec::new();
        for (i, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let op = line
                .parse()
                .map_err(|source| StabError::ScheduleParse { line: i + 1, source })?;
            ops.push(op);
        }
        Ok(MeasurementSchedule::new(ops))
    }
}

/// One round of `run_schedule`: the outcomes seen and the tableau afterwards.
#[derive(Clone, Debug)]
pub struct RoundRecord {
    pub outcomes: Vec<i8>,
    pub deterministic: Vec<bool>,
    pub tableau: StabilizerTableau,
}

/// Runs `rounds` full passes of the schedule, recording outcomes and the
/// tableau after each pass.
pub fn run_schedule(
    tableau: &mut StabilizerTableau,
    schedule: &MeasurementSchedule,
    rounds: usize,
    rng: &mut impl Rng,
) -> Result<Vec<RoundRecord>, StabError> {
    let mut trace = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let mut outcomes = Vec::with_capacity(schedule.ops.len());
        let mut deterministic = Vec::with_capacity(schedule.ops.len());
        for op in &schedule.ops {
            let (o, det) = tableau.measure(op, rng)?;
            outcomes.push(o);
            deterministic.push(det);
        }
        trace.push(RoundRecord {
            outcomes,
            deterministic,
            tableau: tableau.clone(),
        });
    }
    Ok(trace)
}

/// Transports an error operator through a list of measured checks.
///
/// Walking the list in order: when the running operator anticommutes with the
/// next measurement, it is multiplied by one previously measured signed check
/// that (a) anticommutes with that measurement, (b) commutes with the running
/// operator, and (c) commutes with everything measured in between, so it is
/// still in the ISG. Among such checks the one minimizing the resulting weight
/// wins, earliest index breaking ties. The running operator therefore commutes
/// with each measurement at the moment it happens.
pub fn transport(
    p: &PauliOperator,
    measured: &[(PauliOperator, i8)],
) -> Result<PauliOperator, StabError> {
    let mut q = p.clone();
    for i in 0..measured.len() {
        let mi = &measured[i].0;
        if q.commutes_with(mi) {
            continue;
        }
        let mut best: Option<(usize, PauliOperator)> = None;
        for (j, (mj, sj)) in measured[..i].iter().enumerate() {
            if mj.commutes_with(mi) || !mj.commutes_with(&q) {
                continue;
            }
            if !measured[j + 1..i].iter().all(|(mk, _)| mk.commutes_with(mj)) {
                continue;
            }
            let signed = if *sj < 0 { mj.negated() } else { mj.clone() };
            let cand = q.mul(&signed);
            if best.as_ref().map_or(true, |(w, _)| cand.weight() < *w) {
                best = Some((cand.weight(), cand));
            }
        }
        match best {
            Some((_, cand)) => q = cand,
            None => return Err(StabError::CannotTransport { step: i }),
        }
        debug_assert!(q.commutes_with(mi));
    }
    Ok(q)
}

/// The Kramers-Wannier measurement sequence on a ring of `m` qubits
/// (`m` even, at least 4), in four blocks:
/// single-qubit Z on qubits 1,3,...,m-1; XX on pairs (0,1),(2,3),...;
/// ZZ on pairs (1,2),(3,4),...,(m-1,0); single-qubit X on qubits 0,2,...,m-2.
pub fn kw_schedule(m: usize) -> Result<MeasurementSchedule, StabError> {
    if m < 4 || m % 2 != 0 {
        return Err(StabError::BadRingSize(m));
    }
    let mut ops = Vec::with_capacity(2 * m);
    for q in (1..m).step_by(2) {
        ops.push(PauliOperator::z_on(m, q));
    }
    for q in (0..m).step_by(2) {
        ops.push(PauliOperator::x_on(m, q).mul(&PauliOperator::x_on(m, q + 1)));
    }
    for q in (1..m).step_by(2) {
        ops.push(PauliOperator::z_on(m, q).mul(&PauliOperator::z_on(m, (q + 1) % m)));
    }
    for q in (0..m).step_by(2) {
        ops.push(PauliOperator::x_on(m, q));
    }
    Ok(MeasurementSchedule::new(ops))
}

/// The two-block honeycomb-style ring schedule: XX on pairs (0,1),(2,3),...
/// then ZZ on pairs (1,2),(3,4),...,(m-1,0). One round is both blocks.
pub fn ring_schedule(m: usize) -> Result<MeasurementSchedule, StabError> {
    if m < 4 || m % 2 != 0 {
        return Err(StabError::BadRingSize(m));
    }
    let mut ops = Vec::with_capacity(m);
    for q in (0..m).step_by(2) {
        ops.push(PauliOperator::x_on(m, q).mul(&PauliOperator::x_on(m, q + 1)));
    }
    for q in (1..m).step_by(2) {
        ops.push(PauliOperator::z_on(m, q).mul(&PauliOperator::z_on(m, (q + 1) % m)));
    }
    Ok(MeasurementSchedule::new(ops))
}
