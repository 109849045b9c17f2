//! Chain complexes and chain maps for CSS codes.
//!
//! A CSS code is a three-term chain complex over F2: Z-generator space maps
//! into qubit space, qubit space maps onto X-check syndromes, and the
//! composition vanishes. Measuring a product of X operators deforms the code,
//! and the deformation is a chain map between the old and new complexes, so
//! a code deformation can be audited square by square instead of state by
//! state. This module builds the complexes, performs the measurement at the
//! chain level, verifies the commuting squares and the rank bookkeeping, and
//! cross-checks everything against the stabilizer simulation.

use rand::Rng;
use thiserror::Error;

use crate::complex2::CSSCode;
use crate::gf2::{BitMatrix, BitVec, RowSpace};
use crate::pauli::PauliOperator;
use crate::stab::{groups_equal_up_to_signs, StabError, StabilizerTableau};

/// Largest qubit count accepted by [`stabsim_cross_check`].
pub const STABSIM_CAP: usize = 16;

#[derive(Debug, Error)]
pub enum ChainMapError {
    #[error("boundary maps do not compose to zero at entry ({row}, {col})")]
    CompositionNonzero { row: usize, col: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("the product is already in the X-stabilizer group; measuring it is a no-op")]
    AlreadyStabilizer,
    #[error("the product commutes with every check but is not a stabilizer; it reads out a logical qubit")]
    CommutesWithEverything,
    #[error("{0} qubits exceeds the simulation cap of {STABSIM_CAP}")]
    TooManyQubits(usize),
    #[error("stabilizer simulation disagrees with the chain-level measurement: {0}")]
    CrossCheckMismatch(&'static str),
    #[error(transparent)]
    Stab(#[from] StabError),
}

/// Three-term chain complex Z -> Q -> X over F2.
///
/// Columns of `dz` are Z-generator supports in qubit space; rows of `dq` are
/// X-check supports. The composition `dq * dz` is zero, which is exactly the
/// CSS commutation condition, so a complex and a CSS code carry the same
/// data in different clothing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainComplex3 {
    dz: BitMatrix,
    dq: BitMatrix,
}

impl ChainComplex3 {
    pub fn new(dz: BitMatrix, dq: BitMatrix) -> Result<Self, ChainMapError> {
        if dq.cols() != dz.rows() {
            return Err(ChainMapError::DimensionMismatch {
                expected: dz.rows(),
                got: dq.cols(),
            });
        }
        let comp = dq.mul(&dz);
        for row in 0..comp.rows() {
            if let Some(col) = comp.row(row).first_one() {
                return Err(ChainMapError::CompositionNonzero { row, col });
            }
        }
        Ok(ChainComplex3 { dz, dq })
    }

    /// Number of Z-generators (not their rank).
    pub fn dim_z(&self) -> usize {
        self.dz.cols()
    }

    /// Number of qubits.
    pub fn dim_q(&self) -> usize {
        self.dz.rows()
    }

    /// Number of X-checks (not their rank).
    pub fn dim_x(&self) -> usize {
        self.dq.rows()
    }

    pub fn dz(&self) -> &BitMatrix {
        &self.dz
    }

    pub fn dq(&self) -> &BitMatrix {
        &self.dq
    }

    /// The complex read backwards: X-checks become Z-generators and vice
    /// versa, so measuring a Z-product is measuring an X-product here.
    pub fn dual(&self) -> ChainComplex3 {
        ChainComplex3 {
            dz: self.dq.transpose(),
            dq: self.dz.transpose(),
        }
    }

    /// The CSS code with these checks: Hz rows are Z-generator supports,
    /// Hx rows are X-check supports.
    pub fn to_css(&self) -> CSSCode {
        CSSCode::new(self.dz.transpose(), self.dq.clone()).expect("composition is zero")
    }
}

/// The complex of a CSS code: Z-checks enter through the boundary map and
/// X-checks leave through the coboundary. Triangle code: dims (3, 3, 1).
/// Steane code: (3, 7, 3). L = 2 toric code: (4, 8, 4), one redundant check
/// on each side.
pub fn css_to_complex(css: &CSSCode) -> ChainComplex3 {
    // CSSCode::new already enforced the commutation condition.
    ChainComplex3 {
        dz: css.hz().transpose(),
        dq: css.hx().clone(),
    }
}

/// Linear maps between two complexes, one per level. A genuine chain map
/// makes both squares commute: dz' * fz = fq * dz and dq' * fq = fx * dq.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainMap3 {
    /// Z-generator space of the source to that of the target.
    pub fz: BitMatrix,
    /// Qubit space to qubit space.
    pub fq: BitMatrix,
    /// X-check space of the source to that of the target.
    pub fx: BitMatrix,
}

impl ChainMap3 {
    pub fn identity(c: &ChainComplex3) -> ChainMap3 {
        ChainMap3 {
            fz: BitMatrix::identity(c.dim_z()),
            fq: BitMatrix::identity(c.dim_q()),
            fx: BitMatrix::identity(c.dim_x()),
        }
    }
}

/// Bookkeeping for one measured X-product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementData {
    /// Support of the measured product in qubit space.
    pub w: BitVec,
    /// Support of the Z-generator chosen to absorb the anticommutation;
    /// always satisfies <v, w> = 1.
    pub v: BitVec,
    /// Coordinates of `v` in Z-generator space: dz * pre_image = v. The
    /// solver zeroes every free coordinate, and the chosen generator can
    /// never depend on the earlier (commuting) ones, so this lands exactly
    /// on that generator's basis vector.
    pub pre_image: BitVec,
}

/// Measures the X-product supported on `w` at the chain level.
///
/// The lowest-index Z-generator anticommuting with the product becomes `v`.
/// Every other anticommuting generator is repaired by adding `v`, `v` itself
/// is dropped, and `w` joins the X-checks. Qubit space maps by
/// f_Q(q) = q + \<q, w\> v, which kills `v` and fixes everything that
/// commutes with the measurement; f_Z drops the consumed coordinate and f_X
/// embeds the old checks. Both commuting squares hold exactly, the total
/// check rank is preserved, and the logical count is unchanged.
///
/// Products with no anticommuting generator are rejected: either the product
/// already sits in the X-stabilizer group (measuring it is trivial) or it
/// commutes with everything without being a stabilizer (measuring it would
/// read out a logical qubit, which is a different operation, not a code
/// deformation).
pub fn measure_x_product(
    c: &ChainComplex3,
    w: &BitVec,
) -> Result<(ChainComplex3, ChainMap3, MeasurementData), ChainMapError> {
    let n = c.dim_q();
    if w.len() != n {
        return Err(ChainMapError::DimensionMismatch {
            expected: n,
            got: w.len(),
        });
    }
    let hz = c.dz.transpose();
    let a = hz.mul_vec(w);
    let Some(j) = a.first_one() else {
        let mut xspace = RowSpace::new();
        for i in 0..c.dq.rows() {
            xspace.insert(c.dq.row(i));
        }
        return Err(if xspace.contains(w) {
            ChainMapError::AlreadyStabilizer
        } else {
            ChainMapError::CommutesWithEverything
        });
    };
    let v = hz.row(j).clone();
    let mz = c.dim_z();
    let mx = c.dim_x();

    // Repaired Z-generators in original order with generator j dropped.
    let mut kept = Vec::with_capacity(mz - 1);
    for k in 0..mz {
        if k == j {
            continue;
        }
        let mut row = hz.row(k).clone();
        if a.get(k) {
            row.xor_assign(&v);
        }
        kept.push(row);
    }
    let mut dq_new = c.dq.clone();
    dq_new.push_row(w.clone());
    let target = ChainComplex3 {
        dz: BitMatrix::from_rows(kept, n).transpose(),
        dq: dq_new,
    };

    // f_Q = I + v w^T.
    let mut fq = BitMatrix::identity(n);
    for r in v.ones() {
        for col in w.ones() {
            let flipped = !fq.get(r, col);
            fq.set(r, col, flipped);
        }
    }
    let mut fz = BitMatrix::zeros(mz - 1, mz);
    for r in 0..mz - 1 {
        fz.set(r, if r < j { r } else { r + 1 }, true);
    }
    let mut fx = BitMatrix::zeros(mx + 1, mx);
    for r in 0..mx {
        fx.set(r, r, true);
    }
    let map = ChainMap3 { fz, fq, fx };

    let pre_image = c.dz.solve(&v).expect("v is a column of dz");
    debug_assert!(v.dot(w), "chosen generator must anticommute");
    debug_assert_eq!(c.dz.mul_vec(&pre_image), v);
    debug_assert!(map.fq.mul_vec(&v).is_zero(), "f_Q must kill v");
    debug_assert!(verify_chain_map(c, &target, &map)
        .expect("dimensions match by construction")
        .squares_commute());

    let data = MeasurementData {
        w: w.clone(),
        v,
        pre_image,
    };
    Ok((target, map, data))
}

/// Measures the Z-product supported on `w` by measuring the X-product on the
/// dual complex. The returned complex is already dualized back; the chain
/// map connects the duals, so verify it against
/// (`c.dual()`, `result.dual()`).
pub fn measure_z_product(
    c: &ChainComplex3,
    w: &BitVec,
) -> Result<(ChainComplex3, ChainMap3, MeasurementData), ChainMapError> {
    let (target, map, data) = measure_x_product(&c.dual(), w)?;
    Ok((target.dual(), map, data))
}

/// Which commuting square failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Square {
    /// dz' * fz versus fq * dz.
    ZToQ,
    /// dq' * fq versus fx * dq.
    QToX,
}

/// Outcome of checking a chain map entry by entry, plus rank bookkeeping.
/// The squares decide whether the map is a chain map at all; the ranks are
/// reported so callers can additionally demand measurement bookkeeping
/// (one Z-generator consumed, one X-check added, total preserved).
#[derive(Debug, Clone)]
pub struct ChainMapReport {
    pub square_z_ok: bool,
    pub square_q_ok: bool,
    /// First differing entry: which square, row, column.
    pub first_mismatch: Option<(Square, usize, usize)>,
    pub z_rank_source: usize,
    pub z_rank_target: usize,
    pub x_rank_source: usize,
    pub x_rank_target: usize,
}

impl ChainMapReport {
    /// Both squares commute, so the maps form a chain map.
    pub fn squares_commute(&self) -> bool {
        self.square_z_ok && self.square_q_ok
    }

    /// Total check rank neither grew nor shrank.
    pub fn total_rank_preserved(&self) -> bool {
        self.z_rank_source + self.x_rank_source == self.z_rank_target + self.x_rank_target
    }

    /// The signature of one product measurement: Z-rank down one, X-rank up
    /// one, total preserved.
    pub fn measurement_bookkeeping(&self) -> bool {
        self.z_rank_target + 1 == self.z_rank_source
            && self.x_rank_target == self.x_rank_source + 1
            && self.total_rank_preserved()
    }
}

fn first_diff(lhs: &BitMatrix, rhs: &BitMatrix) -> Option<(usize, usize)> {
    for r in 0..lhs.rows() {
        let mut row = lhs.row(r).clone();
        row.xor_assign(rhs.row(r));
        if let Some(c) = row.first_one() {
            return Some((r, c));
        }
    }
    None
}

/// Checks both commuting squares entrywise and reports check ranks on both
/// sides. Dimension incompatibility is an error; a failing square is not,
/// it is what the report is for.
pub fn verify_chain_map(
    source: &ChainComplex3,
    target: &ChainComplex3,
    f: &ChainMap3,
) -> Result<ChainMapReport, ChainMapError> {
    let dims = [
        (f.fz.rows(), target.dim_z()),
        (f.fz.cols(), source.dim_z()),
        (f.fq.rows(), target.dim_q()),
        (f.fq.cols(), source.dim_q()),
        (f.fx.rows(), target.dim_x()),
        (f.fx.cols(), source.dim_x()),
    ];
    for (got, expected) in dims {
        if got != expected {
            return Err(ChainMapError::DimensionMismatch { expected, got });
        }
    }
    let z_diff = first_diff(&target.dz.mul(&f.fz), &f.fq.mul(&source.dz));
    let q_diff = first_diff(&target.dq.mul(&f.fq), &f.fx.mul(&source.dq));
    Ok(ChainMapReport {
        square_z_ok: z_diff.is_none(),
        square_q_ok: q_diff.is_none(),
        first_mismatch: z_diff
            .map(|(r, c)| (Square::ZToQ, r, c))
            .or_else(|| q_diff.map(|(r, c)| (Square::QToX, r, c))),
        z_rank_source: source.dz.rank(),
        z_rank_target: target.dz.rank(),
        x_rank_source: source.dq.rank(),
        x_rank_target: target.dq.rank(),
    })
}

/// What the stabilizer simulation confirmed about one X-product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabCrossCheck {
    /// The measurement reshaped the group and the simulator's group matches
    /// the transformed complex up to signs.
    Reshaped { outcome: i8 },
    /// The product was already a stabilizer: deterministic outcome, group
    /// unchanged.
    Deterministic { outcome: i8 },
    /// The product was a logical: random outcome, group extended by the
    /// measured operator alone.
    Logical { outcome: i8 },
}

fn pauli_rows(m: &BitMatrix, n: usize, x_type: bool) -> Vec<PauliOperator> {
    let mut space = RowSpace::new();
    for i in 0..m.rows() {
        space.insert(m.row(i));
    }
    space
        .basis()
        .into_iter()
        .map(|row| {
            if x_type {
                PauliOperator::new(row, BitVec::zeros(n), 0)
            } else {
                PauliOperator::new(BitVec::zeros(n), row, 0)
            }
        })
        .collect()
}

fn group_of(css: &CSSCode) -> Vec<PauliOperator> {
    let n = css.n();
    let mut gens = pauli_rows(css.hx(), n, true);
    gens.extend(pauli_rows(css.hz(), n, false));
    gens
}

/// Runs the X-product measurement on an actual stabilizer tableau of the
/// code and checks that the post-measurement group matches what the chain
/// level predicts, up to the signs fixed by the outcome. Products rejected
/// at the chain level are cross-checked too: a stabilizer product must come
/// out deterministic with the group untouched, and a logical product must
/// extend the group by exactly the measured operator.
pub fn stabsim_cross_check(
    css: &CSSCode,
    w: &BitVec,
    rng: &mut impl Rng,
) -> Result<StabCrossCheck, ChainMapError> {
    let n = css.n();
    if n > STABSIM_CAP {
        return Err(ChainMapError::TooManyQubits(n));
    }
    if w.len() != n {
        return Err(ChainMapError::DimensionMismatch {
            expected: n,
            got: w.len(),
        });
    }
    let before = group_of(css);
    let mut tableau = StabilizerTableau::from_generators(n, before.clone())?;
    let op = PauliOperator::new(w.clone(), BitVec::zeros(n), 0);
    match measure_x_product(&css_to_complex(css), w) {
        Ok((target, _, _)) => {
            let (outcome, deterministic) = tableau.measure(&op, rng)?;
            if deterministic {
                return Err(ChainMapError::CrossCheckMismatch(
                    "chain level reshaped the group but the simulator was deterministic",
                ));
            }
            let expected = group_of(&target.to_css());
            if !groups_equal_up_to_signs(tableau.generators(), &expected, n) {
                return Err(ChainMapError::CrossCheckMismatch(
                    "post-measurement group differs from the transformed complex",
                ));
            }
            Ok(StabCrossCheck::Reshaped { outcome })
        }
        Err(ChainMapError::AlreadyStabilizer) => {
            let (outcome, deterministic) = tableau.measure(&op, rng)?;
            if !deterministic {
                return Err(ChainMapError::CrossCheckMismatch(
                    "stabilizer product should measure deterministically",
                ));
            }
            if !groups_equal_up_to_signs(tableau.generators(), &before, n) {
                return Err(ChainMapError::CrossCheckMismatch(
                    "deterministic measurement must leave the group unchanged",
                ));
            }
            Ok(StabCrossCheck::Deterministic { outcome })
        }
        Err(ChainMapError::CommutesWithEverything) => {
            let (outcome, deterministic) = tableau.measure(&op, rng)?;
            if deterministic {
                return Err(ChainMapError::CrossCheckMismatch(
                    "logical product should have a free outcome",
                ));
            }
            let mut expected = before;
            expected.push(op);
            if !groups_equal_up_to_signs(tableau.generators(), &expected, n) {
                return Err(ChainMapError::CrossCheckMismatch(
                    "logical measurement should extend the group by the operator alone",
                ));
            }
            Ok(StabCrossCheck::Logical { outcome })
        }
        Err(e) => Err(e),
    }
}

/// Three qubits on a triangle: a Z-check on each edge (one redundant) and
/// one X-check on the whole. Encodes nothing; the interest is the shape.
pub fn triangle_code() -> CSSCode {
    let hz = BitMatrix::from_rows(
        vec![
            BitVec::from_indices(3, &[0, 1]),
            BitVec::from_indices(3, &[1, 2]),
            BitVec::from_indices(3, &[0, 2]),
        ],
        3,
    );
    let hx = BitMatrix::from_rows(vec![BitVec::from_indices(3, &[0, 1, 2])], 3);
    CSSCode::new(hz, hx).expect("each edge meets the full product twice")
}

/// The Steane code: identical Hamming checks on both sides, 7 qubits, one
/// logical.
pub fn steane_code() -> CSSCode {
    let rows = || {
        vec![
            BitVec::from_indices(7, &[0, 2, 4, 6]),
            BitVec::from_indices(7, &[1, 2, 5, 6]),
            BitVec::from_indices(7, &[3, 4, 5, 6]),
        ]
    };
    CSSCode::new(
        BitMatrix::from_rows(rows(), 7),
        BitMatrix::from_rows(rows(), 7),
    )
    .expect("Hamming rows overlap evenly")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex2::{toric_code, torus};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dims(c: &ChainComplex3) -> (usize, usize, usize) {
        (c.dim_z(), c.dim_q(), c.dim_x())
    }

    #[test]
    fn complex_dimensions_match_the_codes() {
        let tri = css_to_complex(&triangle_code());
        assert_eq!(dims(&tri), (3, 3, 1));
        assert_eq!(tri.to_css().k(), 0);

        let steane = css_to_complex(&steane_code());
        assert_eq!(dims(&steane), (3, 7, 3));
        assert_eq!(steane.to_css().k(), 1);

        let toric = css_to_complex(&toric_code(&torus(2)).expect("valid"));
        assert_eq!(dims(&toric), (4, 8, 4));
        // One redundancy on each side.
        assert_eq!(toric.dz().rank(), 3);
        assert_eq!(toric.dq().rank(), 3);
        assert_eq!(toric.to_css().k(), 2);

        // The triangle complex of a 2-complex and the hand-built triangle
        // code are duals: stars against edges, face against full product.
        let from_complex = css_to_complex(&toric_code(&crate::complex2::triangle_complex()).unwrap());
        assert_eq!(dims(&from_complex), (3, 3, 1));
    }

    #[test]
    fn composition_must_vanish() {
        let dz = BitMatrix::from_rows(vec![BitVec::from_bits(&[1]), BitVec::from_bits(&[0])], 1);
        let dq = BitMatrix::from_rows(vec![BitVec::from_bits(&[1, 0])], 2);
        // dq * dz = [1], nonzero at (0, 0).
        match ChainComplex3::new(dz, dq) {
            Err(ChainMapError::CompositionNonzero { row: 0, col: 0 }) => {}
            other => panic!("expected composition failure, got {other:?}"),
        }
        let ok = ChainComplex3::new(
            BitMatrix::from_rows(vec![BitVec::from_bits(&[1]), BitVec::from_bits(&[1])], 1),
            BitMatrix::from_rows(vec![BitVec::from_bits(&[1, 1])], 2),
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn triangle_measurement_rotates_the_anticommuting_check() {
        let c = css_to_complex(&triangle_code());
        let w = BitVec::from_indices(3, &[0, 1]);
        let (target, map, data) = measure_x_product(&c, &w).expect("anticommutes");

        // Generators are Z1Z2, Z2Z3, Z1Z3; the first anticommuting one is
        // Z2Z3, and it must be the one consumed.
        assert_eq!(data.v, BitVec::from_indices(3, &[1, 2]));
        assert!(data.v.dot(&data.w));
        assert_eq!(data.pre_image, BitVec::from_indices(3, &[1]));
        assert!(map.fq.mul_vec(&data.v).is_zero());

        assert_eq!(dims(&target), (2, 3, 2));
        let report = verify_chain_map(&c, &target, &map).expect("dimensions line up");
        assert!(report.squares_commute());
        assert!(report.measurement_bookkeeping());
        assert_eq!((report.z_rank_source, report.z_rank_target), (2, 1));
        assert_eq!((report.x_rank_source, report.x_rank_target), (1, 2));
        assert_eq!(target.to_css().k(), 0);

        // The surviving generator Z1Z2 commutes with w and is kept verbatim;
        // Z1Z3 is repaired to Z1Z3 * Z2Z3 = Z1Z2 as well.
        let hz_new = target.dz().transpose();
        assert_eq!(hz_new.row(0), &BitVec::from_indices(3, &[0, 1]));
        assert_eq!(hz_new.row(1), &BitVec::from_indices(3, &[0, 1]));
    }

    #[test]
    fn rejects_stabilizers_logicals_and_bad_dimensions() {
        let tri = css_to_complex(&triangle_code());
        match measure_x_product(&tri, &BitVec::from_indices(3, &[0, 1, 2])) {
            Err(ChainMapError::AlreadyStabilizer) => {}
            other => panic!("X1X2X3 is the X-stabilizer, got {other:?}"),
        }
        // The zero product is the identity, trivially a stabilizer.
        match measure_x_product(&tri, &BitVec::zeros(3)) {
            Err(ChainMapError::AlreadyStabilizer) => {}
            other => panic!("identity is in the group, got {other:?}"),
        }
        let steane = css_to_complex(&steane_code());
        match measure_x_product(&steane, &BitVec::from_indices(7, &[0, 1, 2])) {
            Err(ChainMapError::CommutesWithEverything) => {}
            other => panic!("X1X2X3 is a Steane logical, got {other:?}"),
        }
        match measure_x_product(&steane, &BitVec::from_indices(3, &[0])) {
            Err(ChainMapError::DimensionMismatch { expected: 7, got: 3 }) => {}
            other => panic!("expected dimension mismatch, got {other:?}"),
        }
    }

    #[test]
    fn identity_chain_map_verifies() {
        let c = css_to_complex(&steane_code());
        let report = verify_chain_map(&c, &c, &ChainMap3::identity(&c)).expect("square shapes");
        assert!(report.squares_commute());
        assert!(report.first_mismatch.is_none());
        assert!(report.total_rank_preserved());
        // No measurement happened, so measurement bookkeeping must not hold.
        assert!(!report.measurement_bookkeeping());
    }

    #[test]
    fn every_single_bit_corruption_of_fq_is_located() {
        let c = css_to_complex(&triangle_code());
        let w = BitVec::from_indices(3, &[0, 1]);
        let (target, map, _) = measure_x_product(&c, &w).expect("anticommutes");
        for r in 0..3 {
            for col in 0..3 {
                let mut bad = map.clone();
                let flipped = !bad.fq.get(r, col);
                bad.fq.set(r, col, flipped);
                let report = verify_chain_map(&c, &target, &bad).expect("same shapes");
                assert!(
                    !report.squares_commute(),
                    "flipping f_Q bit ({r}, {col}) went unnoticed"
                );
                let (square, row, colv) = report.first_mismatch.expect("a located failure");
                // The located entry must actually differ when recomputed.
                let (lhs, rhs) = match square {
                    Square::ZToQ => (target.dz().mul(&bad.fz), bad.fq.mul(c.dz())),
                    Square::QToX => (target.dq().mul(&bad.fq), bad.fx.mul(c.dq())),
                };
                assert_ne!(lhs.get(row, colv), rhs.get(row, colv));
            }
        }
    }

    #[test]
    fn basis_free_and_basis_bound_fz_agree() {
        // f_Z(z) = z + <dz z, w> pre_image, with the consumed coordinate
        // dropped, must equal the constructed f_Z column by column whenever
        // pre_image is the consumed generator's own basis vector.
        let cases = [
            (css_to_complex(&triangle_code()), BitVec::from_indices(3, &[0, 1])),
            (css_to_complex(&steane_code()), BitVec::from_indices(7, &[0])),
            (css_to_complex(&steane_code()), BitVec::from_indices(7, &[2, 3])),
        ];
        for (c, w) in cases {
            let (_, map, data) = measure_x_product(&c, &w).expect("anticommutes");
            let mz = c.dim_z();
            let j = data.pre_image.first_one().expect("nonzero");
            assert_eq!(data.pre_image, BitVec::from_indices(mz, &[j]));
            let a = c.dz().transpose().mul_vec(&w);
            for k in 0..mz {
                let mut free = BitVec::from_indices(mz, &[k]);
                if a.get(k) {
                    free.xor_assign(&data.pre_image);
                }
                // Coordinates in the rotated basis are the old ones with
                // coordinate j deleted; its value is implied by the rest.
                let dropped: Vec<usize> = free
                    .ones()
                    .into_iter()
                    .filter(|&i| i != j)
                    .map(|i| if i < j { i } else { i - 1 })
                    .collect();
                let bound: Vec<usize> = (0..mz - 1).filter(|&r| map.fz.get(r, k)).collect();
                assert_eq!(dropped, bound, "column {k} disagrees");
            }
        }
    }

    #[test]
    fn steane_measurements_bookkeep_for_every_anticommuting_product() {
        let c = css_to_complex(&steane_code());
        let hz = c.dz().transpose();
        let mut checked = 0;
        for bits in 1u32..(1 << 7) {
            let w = BitVec::from_bits(&(0..7).map(|i| (bits >> i & 1) as u8).collect::<Vec<_>>());
            if hz.mul_vec(&w).first_one().is_none() {
                continue;
            }
            let (target, map, data) = measure_x_product(&c, &w).expect("anticommutes");
            let report = verify_chain_map(&c, &target, &map).expect("shapes");
            assert!(report.squares_commute());
            assert!(report.measurement_bookkeeping());
            assert!(map.fq.mul_vec(&data.v).is_zero());
            assert_eq!(target.to_css().k(), 1, "logical count must survive");
            checked += 1;
        }
        // 127 nonzero products minus 15 codewords of the Hamming code.
        assert_eq!(checked, 112);
    }

    #[test]
    fn random_codes_measure_consistently() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..100 {
            let (css, c) = loop {
                let n = rng.gen_range(5..=10);
                let mz = rng.gen_range(2..=3);
                let hz_rows: Vec<BitVec> = (0..mz)
                    .map(|_| loop {
                        let row =
                            BitVec::from_bits(&(0..n).map(|_| rng.gen::<bool>() as u8).collect::<Vec<_>>());
                        if !row.is_zero() {
                            break row;
                        }
                    })
                    .collect();
                let hz = BitMatrix::from_rows(hz_rows, n);
                let kernel = hz.kernel_basis();
                if kernel.is_empty() {
                    continue;
                }
                let mx = rng.gen_range(1..=kernel.len().min(3));
                let hx_rows: Vec<BitVec> = (0..mx)
                    .map(|_| loop {
                        let mut row = BitVec::zeros(n);
                        for k in &kernel {
                            if rng.gen::<bool>() {
                                row.xor_assign(k);
                            }
                        }
                        if !row.is_zero() {
                            break row;
                        }
                    })
                    .collect();
                let hx = BitMatrix::from_rows(hx_rows, n);
                let css = CSSCode::new(hz, hx).expect("rows built from the kernel");
                let c = css_to_complex(&css);
                break (css, c);
            };
            let n = c.dim_q();
            let hz = c.dz().transpose();
            let w = loop {
                let w = BitVec::from_bits(&(0..n).map(|_| rng.gen::<bool>() as u8).collect::<Vec<_>>());
                if hz.mul_vec(&w).first_one().is_some() {
                    break w;
                }
            };
            let (target, map, data) = measure_x_product(&c, &w).expect("anticommutes");
            let report = verify_chain_map(&c, &target, &map).expect("shapes");
            assert!(report.squares_commute(), "trial {trial}");
            assert!(report.measurement_bookkeeping(), "trial {trial}");
            assert!(map.fq.mul_vec(&data.v).is_zero());
            assert_eq!(target.to_css().k(), css.k(), "trial {trial}");
            assert!(matches!(
                stabsim_cross_check(&css, &w, &mut rng),
                Ok(StabCrossCheck::Reshaped { .. })
            ));
        }
    }

    #[test]
    fn simulator_confirms_the_triangle_measurement() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let css = triangle_code();
        let w = BitVec::from_indices(3, &[0, 1]);
        match stabsim_cross_check(&css, &w, &mut rng).expect("groups must match") {
            StabCrossCheck::Reshaped { outcome } => assert!(outcome == 1 || outcome == -1),
            other => panic!("X1X2 reshapes the triangle group, got {other:?}"),
        }
        // Rank stays 3 on both descriptions: 2 + 1 before, 1 + 2 after.
        let c = css_to_complex(&css);
        let (target, _, _) = measure_x_product(&c, &w).unwrap();
        assert_eq!(target.dz().rank() + target.dq().rank(), 3);
    }

    #[test]
    fn simulator_confirms_a_plaquette_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let css = toric_code(&torus(2)).expect("valid");
        let w = css.hx().row(0).clone();
        match stabsim_cross_check(&css, &w, &mut rng).expect("no-op must check out") {
            StabCrossCheck::Deterministic { outcome } => assert_eq!(outcome, 1),
            other => panic!("a plaquette is already a stabilizer, got {other:?}"),
        }
    }

    #[test]
    fn simulator_confirms_logicals_extend_the_group() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let css = steane_code();
        let w = BitVec::from_indices(7, &[0, 1, 2]);
        match stabsim_cross_check(&css, &w, &mut rng).expect("extension must check out") {
            StabCrossCheck::Logical { .. } => {}
            other => panic!("a weight-3 codeword is a logical, got {other:?}"),
        }
    }

    #[test]
    fn simulator_matches_steane_on_a_hundred_random_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let css = steane_code();
        let hz = css.hz().clone();
        let mut reshaped = 0;
        for _ in 0..100 {
            let w = loop {
                let w = BitVec::from_bits(&(0..7).map(|_| rng.gen::<bool>() as u8).collect::<Vec<_>>());
                if hz.mul_vec(&w).first_one().is_some() {
                    break w;
                }
            };
            match stabsim_cross_check(&css, &w, &mut rng) {
                Ok(StabCrossCheck::Reshaped { .. }) => reshaped += 1,
                other => panic!("expected a reshaping match, got {other:?}"),
            }
        }
        assert_eq!(reshaped, 100);
    }

    #[test]
    fn z_measurements_mirror_x_by_duality() {
        let c = css_to_complex(&triangle_code());
        // Z1 anticommutes with the X-check X1X2X3.
        let w = BitVec::from_indices(3, &[0]);
        let (target, map, data) = measure_z_product(&c, &w).expect("anticommutes");
        assert_eq!(data.v, BitVec::from_indices(3, &[0, 1, 2]));
        let report = verify_chain_map(&c.dual(), &target.dual(), &map).expect("shapes");
        assert!(report.squares_commute());
        assert!(report.measurement_bookkeeping());
        // The lone X-check is consumed; Z1 joins the Z-generators and lifts
        // their rank to full.
        assert_eq!(dims(&target), (4, 3, 0));
        assert_eq!(target.dz().rank(), 3);
        assert_eq!(target.to_css().k(), 0);
    }

    #[test]
    fn qubit_cap_is_enforced() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let css = toric_code(&torus(3)).expect("valid");
        assert_eq!(css.n(), 18);
        match stabsim_cross_check(&css, &css.hx().row(0).clone(), &mut rng) {
            Err(ChainMapError::TooManyQubits(18)) => {}
            other => panic!("expected the cap, got {other:?}"),
        }
    }
}
