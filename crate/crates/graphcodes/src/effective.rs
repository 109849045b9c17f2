//! Closed-form effective models for decoding near high-degree vertices.
//!
//! A hole center concentrates many fault strands onto one detection column,
//! and the decoding statistics of that column admit exact small formulas:
//! parity accumulation across strands, majority voting across time, the
//! effective strand content of a hole center, a transfer-matrix model for a
//! ladder of flip variables, the probability-gluing combinators, and the
//! piecewise failure prediction for a single hole in a patch.

use crate::decode::{CheckEdge, CheckGraph, DecodeError, EdgeEnds};
use crate::gf2::BitVec;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EffectiveError {
    #[error("probability {0} is outside its valid range")]
    BadProbability(f64),
    #[error("column model needs at least one strand")]
    EmptyColumn,
    #[error("time extent must be at least 1")]
    BadTimeExtent,
    #[error("a periodic column needs time extent at least 2")]
    PeriodicTooShort,
    #[error("bias {0} is outside [0, 1/2]")]
    BadBias(f64),
    #[error("chain length must be at least 2")]
    ChainTooShort,
    #[error("configuration length {0} does not match chain length {1}")]
    LengthMismatch(usize, usize),
    #[error("enumeration over 2^{0} configurations exceeds the cap")]
    EnumerationCap(usize),
    #[error("hole offset r must satisfy 2r <= l and l >= 1")]
    BadHoleGeometry,
    #[error("calibration constant {0} must be positive")]
    BadCalibration(f64),
    #[error("hole model needs a square symmetric distance table")]
    BadDistanceTable,
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// Probability that an even / odd number of the d independent strand flips
/// occur, given per-strand probabilities. The empty product gives (1, 0).
///
/// Each probability must lie in [0, 1]; any strand at exactly 1/2 scrambles
/// the parity completely.
pub fn parity_probabilities(p_y: &[f64]) -> (f64, f64) {
    let mut prod = 1.0f64;
    for &p in p_y {
        assert!((0.0..=1.0).contains(&p), "strand probability {p} outside [0, 1]");
        prod *= 1.0 - 2.0 * p;
    }
    ((1.0 + prod) / 2.0, (1.0 - prod) / 2.0)
}

/// Time boundary of a column: a ring, or a path with dangling strand tuples
/// at the first and last detection events.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    Dangling,
}

/// A column of identical detection events: at each time step the parities of
/// d strands accumulate onto one event, and decoding reduces to a majority
/// vote across time.
#[derive(Clone, Debug)]
pub struct ColumnModel {
    pub t: usize,
    pub p_y: Vec<f64>,
    pub boundary: Boundary,
}

impl ColumnModel {
    pub fn new(t: usize, p_y: Vec<f64>, boundary: Boundary) -> Result<Self, EffectiveError> {
        let m = ColumnModel { t, p_y, boundary };
        m.validate()?;
        Ok(m)
    }

    pub fn d(&self) -> usize {
        self.p_y.len()
    }

    pub fn validate(&self) -> Result<(), EffectiveError> {
        if self.t == 0 {
            return Err(EffectiveError::BadTimeExtent);
        }
        if self.p_y.is_empty() {
            return Err(EffectiveError::EmptyColumn);
        }
        for &p in &self.p_y {
            if !(0.0..=0.5).contains(&p) {
                return Err(EffectiveError::BadProbability(p));
            }
        }
        Ok(())
    }
}

/// Probability that strict majority voting over n coins at bias q fails;
/// an exact n/2 split (even n only) counts half.
fn majority_failure(n: usize, q: f64) -> f64 {
    let mut total = 0.0f64;
    for s in (n / 2 + 1)..=n {
        total += binomial(n, s) * q.powi(s as i32) * (1.0 - q).powi((n - s) as i32);
    }
    if n % 2 == 0 && n > 0 {
        total += 0.5 * binomial(n, n / 2) * (q * (1.0 - q)).powi((n / 2) as i32);
    }
    total
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut c = 1.0f64;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// Failure probability of maximum-likelihood decoding on the column model:
/// majority voting over t tuple parities at q = P_odd, split ties counted
/// half. An even vote with halved ties equals the strict vote one coin
/// shorter, so this formula is the exact failure of the periodic ring for
/// every t >= 2 and of the dangling path for odd t and t = 1; the dangling
/// path at even t does strictly better (its extra boundary tuple breaks
/// ties, giving the t + 1 formula).
pub fn column_failure_probability(m: &ColumnModel) -> f64 {
    m.validate().expect("valid column model");
    let (_, q) = parity_probabilities(&m.p_y);
    majority_failure(m.t, q)
}

/// Realizes a column model as a check graph. The ring has t vertices and t
/// strand tuples between consecutive events; the dangling path has t vertices,
/// t - 1 interior tuples, and one tuple of dangling strands at each end.
/// Edge ids are tuple-major; every tuple carries parallel-pair 2-cells and
/// the class cocycle is tuple 0.
pub fn column_checkgraph(m: &ColumnModel) -> Result<CheckGraph, EffectiveError> {
    m.validate()?;
    let d = m.d();
    let t = m.t;
    let mut edges = Vec::new();
    let tuples = match m.boundary {
        Boundary::Periodic => {
            if t < 2 {
                return Err(EffectiveError::PeriodicTooShort);
            }
            for s in 0..t {
                for &p in &m.p_y {
                    edges.push(CheckEdge { ends: EdgeEnds::Two(s, (s + 1) % t), p });
                }
            }
            t
        }
        Boundary::Dangling => {
            for &p in &m.p_y {
                edges.push(CheckEdge { ends: EdgeEnds::Dangling(0), p });
            }
            for s in 1..t {
                for &p in &m.p_y {
                    edges.push(CheckEdge { ends: EdgeEnds::Two(s - 1, s), p });
                }
            }
            for &p in &m.p_y {
                edges.push(CheckEdge { ends: EdgeEnds::Dangling(t - 1), p });
            }
            t + 1
        }
    };
    let n_e = tuples * d;
    let mut cells = Vec::new();
    for tu in 0..tuples {
        for y in 1..d {
            cells.push(BitVec::from_indices(n_e, &[tu * d, tu * d + y]));
        }
    }
    let cocycle = BitVec::from_indices(n_e, &(0..d).collect::<Vec<_>>());
    Ok(CheckGraph::new(t, edges, vec![cocycle], cells)?)
}

/// The time-repetition column at uniform strand probability p, realized so
/// that its exact failure equals column_failure_probability for every t:
/// a periodic ring for t >= 2, and a dangling path for the single round
/// t = 1 (where a ring would degenerate to self-loops and the two
/// realizations agree anyway).
pub fn shor_column_checkgraph(t: usize, d: usize, p: f64) -> Result<CheckGraph, EffectiveError> {
    let boundary = if t == 1 { Boundary::Dangling } else { Boundary::Periodic };
    column_checkgraph(&ColumnModel::new(t, vec![p; d], boundary)?)
}

/// Effective strand content of a hole center of degree d at physical error
/// rate p: d strands of weight-3 fault paths, plus round(p d) strands each at
/// p and 2p for the fault families that clip the hole boundary. Valid for
/// p d of order 1 or below; requires p <= 1/4 so that 2p stays decodable.
#[derive(Clone, Debug)]
pub struct HoleCenterEffective {
    pub strands: Vec<f64>,
    /// Leading log-suppression coefficient: the strand parity product is
    /// approximately exp(-suppression) with suppression = 3 p^2 d.
    pub suppression: f64,
}

impl HoleCenterEffective {
    pub fn column_model(&self, t: usize, boundary: Boundary) -> Result<ColumnModel, EffectiveError> {
        ColumnModel::new(t, self.strands.clone(), boundary)
    }
}

pub fn hole_center_effective(p: f64, d: usize) -> Result<HoleCenterEffective, EffectiveError> {
    if !(0.0..=0.25).contains(&p) {
        return Err(EffectiveError::BadProbability(p));
    }
    let extra = (p * d as f64).round() as usize;
    let mut strands = vec![p * p * p; d];
    strands.extend(std::iter::repeat(p).take(extra));
    strands.extend(std::iter::repeat(2.0 * p).take(extra));
    Ok(HoleCenterEffective { strands, suppression: 3.0 * p * p * d as f64 })
}

/// One-dimensional chain of observed flip variables b_1..b_T driven by
/// hidden pair flips: b_i = f_{i-1} xor f_i xor n_i with boundary f_0 =
/// f_T = 0, where each n_i flips with probability 1/2 - eps and each hidden
/// f_j is set with probability 1/2 - eps_prime. The derived weights are
/// z = (1/2-eps)/(1/2+eps) and y = (1/2-eps')/(1/2+eps').
///
/// The interior of the parameter range is (0, 1/2); both endpoints are
/// accepted as exact degenerate limits (eps = 0 scrambles the observations,
/// eps' = 1/2 freezes the hidden flips).
#[derive(Clone, Copy, Debug)]
pub struct TransferMatrixModel {
    pub eps: f64,
    pub eps_prime: f64,
    pub t: usize,
}

impl TransferMatrixModel {
    pub fn new(eps: f64, eps_prime: f64, t: usize) -> Result<Self, EffectiveError> {
        if !(0.0..=0.5).contains(&eps) {
            return Err(EffectiveError::BadBias(eps));
        }
        if !(0.0..=0.5).contains(&eps_prime) {
            return Err(EffectiveError::BadBias(eps_prime));
        }
        if t < 2 {
            return Err(EffectiveError::ChainTooShort);
        }
        Ok(TransferMatrixModel { eps, eps_prime, t })
    }

    pub fn z(&self) -> f64 {
        (0.5 - self.eps) / (0.5 + self.eps)
    }

    pub fn y(&self) -> f64 {
        (0.5 - self.eps_prime) / (0.5 + self.eps_prime)
    }

    /// Transfer matrix for one interior observation: M_b[f, f'] =
    /// z^(b xor f xor f') y^((f + f') / 2).
    pub fn transfer(&self, b: bool) -> [[f64; 2]; 2] {
        let z = self.z();
        let sy = self.y().sqrt();
        let mut m = [[0.0; 2]; 2];
        for (f, row) in m.iter_mut().enumerate() {
            for (fp, slot) in row.iter_mut().enumerate() {
                let zpow = if b ^ (f == 1) ^ (fp == 1) { z } else { 1.0 };
                *slot = zpow * sy.powi((f + fp) as i32);
            }
        }
        m
    }

    /// The same matrix in the rotated basis u = (1, sqrt y) / sqrt(1+y),
    /// v = (sqrt y, -1) / sqrt(1+y). At z = 1 the off-diagonal factor (1-z)
    /// vanishes identically, term by term.
    pub fn rotated_transfer(&self, b: bool) -> [[f64; 2]; 2] {
        let m = self.transfer(b);
        let sy = self.y().sqrt();
        let norm = 1.0 + self.y();
        let basis = [[1.0, sy], [sy, -1.0]];
        let mut out = [[0.0; 2]; 2];
        // m and the basis are symmetric, so only the upper triangle is
        // computed; row-major term order pairs the cancelling products so
        // the off-diagonal vanishes identically at z = 1.
        for a in 0..2 {
            for c in a..2 {
                let mut acc = 0.0;
                for f in 0..2 {
                    for fp in 0..2 {
                        acc += basis[f][a] * m[f][fp] * basis[fp][c];
                    }
                }
                out[a][c] = acc / norm;
                out[c][a] = out[a][c];
            }
        }
        out
    }

    /// End vector absorbing the boundary condition f = 0 outside the chain:
    /// psi[f] = z^(b xor f) y^(f / 2), shared by both ends.
    pub fn end_vector(&self, b: bool) -> [f64; 2] {
        let z = self.z();
        let sy = self.y().sqrt();
        [if b { z } else { 1.0 }, (if b { 1.0 } else { z }) * sy]
    }
}

/// Probability of observing the flip configuration b, exactly (transfer
/// matrix product) and in the independent-flip approximation (a product over
/// sites of A = 1 + 2zy + y^2 for an unflipped site and B = z + 2y + z y^2
/// for a flipped one, normalized by A + B = (1+z)(1+y)^2 per site).
pub fn ladder_probability(
    m: &TransferMatrixModel,
    b: &[bool],
) -> Result<(f64, f64), EffectiveError> {
    if b.len() != m.t {
        return Err(EffectiveError::LengthMismatch(b.len(), m.t));
    }
    let t = m.t;
    let norm = (0.5 + m.eps).powi(t as i32) * (0.5 + m.eps_prime).powi(t as i32 - 1);
    let mut v = m.end_vector(b[t - 1]);
    for &bi in b[1..t - 1].iter().rev() {
        let mat = m.transfer(bi);
        v = [
            mat[0][0] * v[0] + mat[0][1] * v[1],
            mat[1][0] * v[0] + mat[1][1] * v[1],
        ];
    }
    let left = m.end_vector(b[0]);
    let exact = norm * (left[0] * v[0] + left[1] * v[1]);

    let z = m.z();
    let y = m.y();
    let a_up = 1.0 + 2.0 * z * y + y * y;
    let a_down = z + 2.0 * y + z * y * y;
    let per_site = (1.0 + z) * (1.0 + y) * (1.0 + y);
    let mut approx = 1.0f64;
    for &bi in b {
        approx *= if bi { a_down } else { a_up } / per_site;
    }
    Ok((exact, approx))
}

/// Total-variation distance between the exact chain distribution and the
/// independent-flip approximation, by enumeration of all 2^t configurations.
pub fn ladder_independence_check(m: &TransferMatrixModel) -> Result<f64, EffectiveError> {
    if m.t > 20 {
        return Err(EffectiveError::EnumerationCap(m.t));
    }
    let mut tv = 0.0f64;
    let mut b = vec![false; m.t];
    for mask in 0u64..(1u64 << m.t) {
        for (i, bi) in b.iter_mut().enumerate() {
            *bi = mask >> i & 1 == 1;
        }
        let (exact, approx) = ladder_probability(m, &b)?;
        tv += (exact - approx).abs();
    }
    Ok(tv / 2.0)
}

/// Union-style bound on the failure probability of two glued decoding
/// problems with standalone failure probabilities at most 1/2.
pub fn glue(p1: f64, p2: f64) -> f64 {
    assert!((0.0..=0.5).contains(&p1), "failure probability {p1} outside [0, 1/2]");
    assert!((0.0..=0.5).contains(&p2), "failure probability {p2} outside [0, 1/2]");
    2.0 * p1 * p2
}

/// Exact posterior of the jointly wrong class when two independent subproblems
/// report wrong-class posteriors q1, q2: combining posteriors adds their log
/// odds, so the glued posterior is q1 q2 / (q1 q2 + (1-q1)(1-q2)). Valid on
/// all of [0, 1]^2; it is bounded by 2 q1 q2 exactly when both arguments are
/// at most 1/2.
pub fn glue_exact(q1: f64, q2: f64) -> f64 {
    assert!((0.0..=1.0).contains(&q1), "posterior {q1} outside [0, 1]");
    assert!((0.0..=1.0).contains(&q2), "posterior {q2} outside [0, 1]");
    let num = q1 * q2;
    let den = num + (1.0 - q1) * (1.0 - q2);
    if den == 0.0 {
        return 0.5;
    }
    num / den
}

/// Two nearby hole centers with timelike deviations eps1, eps2 merge into a
/// single effective strand: the combined flip probability is the parity of
/// the two strands at 1/2 - eps_i, which is 1/2 - 2 eps1 eps2.
pub fn two_hole_merge(eps1: f64, eps2: f64) -> f64 {
    assert!((0.0..=0.5).contains(&eps1), "bias {eps1} outside [0, 1/2]");
    assert!((0.0..=0.5).contains(&eps2), "bias {eps2} outside [0, 1/2]");
    parity_probabilities(&[0.5 - eps1, 0.5 - eps2]).1
}

/// Hole centers with degrees and pairwise spatial distances, carrying the
/// calibrated decay constants. Timelike edges sit exponentially close to 1/2
/// in the degree; spacelike edges decay as p to half the distance.
#[derive(Clone, Debug)]
pub struct EffectiveHoleModel {
    pub degrees: Vec<usize>,
    pub distances: Vec<Vec<f64>>,
    pub p: f64,
    pub c: f64,
    pub c_prime: f64,
}

impl EffectiveHoleModel {
    pub fn new(
        degrees: Vec<usize>,
        distances: Vec<Vec<f64>>,
        p: f64,
        c: f64,
        c_prime: f64,
    ) -> Result<Self, EffectiveError> {
        if !(p > 0.0 && p <= 0.5) {
            return Err(EffectiveError::BadProbability(p));
        }
        if c <= 0.0 {
            return Err(EffectiveError::BadCalibration(c));
        }
        if c_prime <= 0.0 {
            return Err(EffectiveError::BadCalibration(c_prime));
        }
        let n = degrees.len();
        if distances.len() != n {
            return Err(EffectiveError::BadDistanceTable);
        }
        for (i, row) in distances.iter().enumerate() {
            if row.len() != n {
                return Err(EffectiveError::BadDistanceTable);
            }
            for (j, &dij) in row.iter().enumerate() {
                if dij < 0.0 || (dij - distances[j][i]).abs() > 1e-12 {
                    return Err(EffectiveError::BadDistanceTable);
                }
            }
        }
        Ok(EffectiveHoleModel { degrees, distances, p, c, c_prime })
    }

    /// Error probability of the timelike edge at hole i: 1/2 minus
    /// exp(-c' d_i), clamped into [0, 1/2].
    pub fn timelike_probability(&self, i: usize) -> f64 {
        (0.5 - (-self.c_prime * self.degrees[i] as f64).exp()).max(0.0)
    }

    /// Error probability of the spacelike edge between holes i and j.
    pub fn spacelike_probability(&self, i: usize, j: usize) -> f64 {
        self.spacelike_for_distance(self.distances[i][j])
    }

    /// p raised to half the distance, clamped to 1/2.
    pub fn spacelike_for_distance(&self, dist: f64) -> f64 {
        self.p.powf(dist / 2.0).min(0.5)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HoleRegime {
    /// Both crossing segments move freely in time: failure grows as T^2.
    Quadratic,
    /// The near segment is replaced by hole timelike flips; linear in T with
    /// prefactor exp(c' d) exp(-c l).
    LinearHoleFlip,
    /// The near-side string stays spatial; linear in T with prefactor
    /// exp(-c (l - r)).
    LinearNearString,
    Saturated,
}

#[derive(Clone, Copy, Debug)]
pub struct SingleHolePrediction {
    pub regime: HoleRegime,
    pub failure: f64,
    /// Time scale exp(min(c r, c' d)) where growth turns linear.
    pub crossover_time: f64,
}

/// Predicted failure scaling for a patch of linear size l with one hole of
/// degree d at distance r from the near rough side (r <= l/2), after time t:
/// exp(-c l) min(t^2, t exp(min(c r, c' d))), saturating at 1/2. The physical
/// rate p enters only through the calibrated constants c and c'.
pub fn single_hole_prediction(
    l: usize,
    r: usize,
    d: usize,
    p: f64,
    c: f64,
    c_prime: f64,
    t: f64,
) -> Result<SingleHolePrediction, EffectiveError> {
    if l == 0 || 2 * r > l {
        return Err(EffectiveError::BadHoleGeometry);
    }
    if !(p > 0.0 && p < 0.5) {
        return Err(EffectiveError::BadProbability(p));
    }
    if c <= 0.0 {
        return Err(EffectiveError::BadCalibration(c));
    }
    if c_prime <= 0.0 {
        return Err(EffectiveError::BadCalibration(c_prime));
    }
    if !(t >= 1.0 && t.is_finite()) {
        return Err(EffectiveError::BadTimeExtent);
    }
    let string_cost = c * r as f64;
    let flip_cost = c_prime * d as f64;
    let crossover_time = string_cost.min(flip_cost).exp();
    let raw = (-c * l as f64).exp() * (t * t).min(t * crossover_time);
    let (regime, failure) = if raw >= 0.5 {
        (HoleRegime::Saturated, 0.5)
    } else if t <= crossover_time {
        (HoleRegime::Quadratic, raw)
    } else if flip_cost <= string_cost {
        (HoleRegime::LinearHoleFlip, raw)
    } else {
        (HoleRegime::LinearNearString, raw)
    };
    Ok(SingleHolePrediction { regime, failure, crossover_time })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decode::{exact_ml_failure, hole_star_bulk};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parity_probability_examples() {
        let (even, odd) = parity_probabilities(&[0.3]);
        assert!((even - 0.7).abs() < 1e-15);
        assert!((odd - 0.3).abs() < 1e-15);
        let (_, odd) = parity_probabilities(&[0.1, 0.1]);
        assert!((odd - 0.18).abs() < 1e-15);
        let (even, odd) = parity_probabilities(&[0.2, 0.5, 0.01]);
        assert_eq!(even, 0.5);
        assert_eq!(odd, 0.5);
        assert_eq!(parity_probabilities(&[]), (1.0, 0.0));
    }

    #[test]
    fn parity_probability_properties() {
        let ps = [0.03, 0.17, 0.4, 0.09];
        let (even, odd) = parity_probabilities(&ps);
        assert!((even + odd - 1.0).abs() < 1e-15);
        let shuffled = [0.4, 0.03, 0.09, 0.17];
        assert!((parity_probabilities(&shuffled).1 - odd).abs() < 1e-15);
    }

    #[test]
    fn column_failure_examples() {
        let m = ColumnModel::new(3, vec![0.1, 0.1], Boundary::Periodic).unwrap();
        assert!((column_failure_probability(&m) - 0.085536).abs() < 1e-12);
        // One round returns the tuple parity itself, either boundary.
        for boundary in [Boundary::Periodic, Boundary::Dangling] {
            let m = ColumnModel::new(1, vec![0.07, 0.2], boundary).unwrap();
            let q = parity_probabilities(&m.p_y).1;
            assert!((column_failure_probability(&m) - q).abs() < 1e-15);
        }
        // A fully scrambled strand pins odd time extents at one half.
        let m = ColumnModel::new(5, vec![0.5, 0.1], Boundary::Periodic).unwrap();
        assert!((column_failure_probability(&m) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn column_failure_properties() {
        // An even vote with halved ties equals the strict vote one coin
        // shorter: the extra coin only manufactures ties.
        for t in [2usize, 4, 6] {
            let a = column_failure_probability(
                &ColumnModel::new(t, vec![0.13, 0.22], Boundary::Periodic).unwrap(),
            );
            let b = column_failure_probability(
                &ColumnModel::new(t - 1, vec![0.13, 0.22], Boundary::Periodic).unwrap(),
            );
            assert!((a - b).abs() < 1e-12, "t {t}: {a} vs {b}");
        }
        // Monotone in each strand probability.
        let mut last = 0.0;
        for k in 0..=10 {
            let p = 0.05 * k as f64;
            let m = ColumnModel::new(5, vec![p, 0.1], Boundary::Periodic).unwrap();
            let f = column_failure_probability(&m);
            assert!(f >= last - 1e-15, "p {p}");
            last = f;
        }
    }

    #[test]
    fn column_checkgraph_shapes() {
        let ring = column_checkgraph(&ColumnModel::new(3, vec![0.1, 0.1], Boundary::Periodic).unwrap())
            .unwrap();
        assert_eq!(ring.n_vertices(), 3);
        assert_eq!(ring.n_edges(), 6);
        assert_eq!(ring.two_cells().len(), 3);
        assert_eq!(ring.cocycles()[0].ones(), vec![0, 1]);

        let path = column_checkgraph(&ColumnModel::new(1, vec![0.1], Boundary::Dangling).unwrap())
            .unwrap();
        assert_eq!(path.n_vertices(), 1);
        assert_eq!(path.n_edges(), 2);

        let err = column_checkgraph(&ColumnModel::new(1, vec![0.1], Boundary::Periodic).unwrap());
        assert!(matches!(err, Err(EffectiveError::PeriodicTooShort)));
        assert!(matches!(
            ColumnModel::new(2, vec![], Boundary::Periodic),
            Err(EffectiveError::EmptyColumn)
        ));
        assert!(matches!(
            ColumnModel::new(2, vec![0.7], Boundary::Periodic),
            Err(EffectiveError::BadProbability(_))
        ));
    }

    #[test]
    fn column_formula_matches_graph_oracles() {
        // Tolerance covers float drift over multi-million-term coset walks.
        let tol = 1e-10;
        for t in 1..=16usize {
            for d in 1..=16usize {
                if t * d > 16 {
                    continue;
                }
                let p = 0.11;
                let m = ColumnModel::new(t, vec![p; d], Boundary::Dangling).unwrap();
                let formula = column_failure_probability(&m);
                // The dangling kernel has dimension (t+1)d - t; skip the few
                // oversized t = 1 strand counts.
                if (t + 1) * d - t <= 22 {
                    let g = column_checkgraph(&m).unwrap();
                    let exact = exact_ml_failure(&g).unwrap();
                    if t % 2 == 1 {
                        assert!(
                            (exact - formula).abs() < tol,
                            "dangling t {t} d {d}: {exact} vs {formula}"
                        );
                    } else {
                        // Even t: the extra boundary tuple breaks ties, so the
                        // dangling path realizes the t + 1 vote instead.
                        let longer = column_failure_probability(
                            &ColumnModel::new(t + 1, vec![p; d], Boundary::Dangling).unwrap(),
                        );
                        assert!(
                            (exact - longer).abs() < tol,
                            "dangling t {t} d {d}: {exact} vs {longer}"
                        );
                        assert!(exact < formula, "dangling t {t} d {d} should beat the ring");
                    }
                }
                if t >= 2 {
                    let ring = ColumnModel::new(t, vec![p; d], Boundary::Periodic).unwrap();
                    let g = column_checkgraph(&ring).unwrap();
                    let exact = exact_ml_failure(&g).unwrap();
                    assert!(
                        (exact - formula).abs() < tol,
                        "periodic t {t} d {d}: {exact} vs {formula}"
                    );
                }
            }
        }
    }

    #[test]
    fn shor_column_examples() {
        let g = shor_column_checkgraph(3, 2, 0.1).unwrap();
        assert!((exact_ml_failure(&g).unwrap() - 0.085536).abs() < 1e-12);
        let g = shor_column_checkgraph(1, 1, 0.23).unwrap();
        assert!((exact_ml_failure(&g).unwrap() - 0.23).abs() < 1e-12);
        // An even number of rounds gains nothing over one fewer.
        let g = shor_column_checkgraph(2, 2, 0.1).unwrap();
        assert!((exact_ml_failure(&g).unwrap() - 0.18).abs() < 1e-12);
    }

    #[test]
    fn hole_center_effective_strands() {
        let empty = hole_center_effective(0.1, 0).unwrap();
        assert!(empty.strands.is_empty());
        assert_eq!(empty.suppression, 0.0);

        let h = hole_center_effective(0.05, 4).unwrap();
        // p d = 0.2 rounds to zero extra strands.
        assert_eq!(h.strands.len(), 4);
        assert!(h.strands.iter().all(|&s| (s - 0.05f64.powi(3)).abs() < 1e-15));
        let prod = 1.0 - 2.0 * parity_probabilities(&h.strands).1;
        let approx = (-h.suppression).exp();
        assert!((prod - approx).abs() / approx < 0.25, "{prod} vs {approx}");

        // p d = 0.5 rounds up to one strand each at p and 2p.
        let h = hole_center_effective(0.05, 10).unwrap();
        assert_eq!(h.strands.len(), 12);
        assert!((h.strands[10] - 0.05).abs() < 1e-15);
        assert!((h.strands[11] - 0.10).abs() < 1e-15);

        assert!(matches!(
            hole_center_effective(0.3, 2),
            Err(EffectiveError::BadProbability(_))
        ));
    }

    #[test]
    fn hole_center_column_tracks_star_bulk() {
        // The full spacetime star around a hole center of degree d decodes
        // almost exactly like the effective column: compare the distance of
        // each failure probability from one half, on a log scale.
        let (p, d, t) = (0.05, 3usize, 3usize);
        let bulk = hole_star_bulk(d, t, p).unwrap();
        let star = exact_ml_failure(&bulk.graph).unwrap();
        let column = column_failure_probability(
            &hole_center_effective(p, d).unwrap().column_model(t, Boundary::Dangling).unwrap(),
        );
        let log_star = (0.5 - star).ln();
        let log_col = (0.5 - column).ln();
        assert!(
            (log_star - log_col).abs() / log_col.abs() < 0.25,
            "star {star} column {column}"
        );
    }

    /// Direct enumeration over hidden pair-flip assignments.
    fn ladder_oracle(m: &TransferMatrixModel, b: &[bool]) -> f64 {
        let t = m.t;
        let mut total = 0.0f64;
        for mask in 0u64..(1u64 << (t - 1)) {
            let f = |i: usize| -> bool {
                if i == 0 || i == t {
                    false
                } else {
                    mask >> (i - 1) & 1 == 1
                }
            };
            let mut w = 1.0f64;
            for (i, &bi) in b.iter().enumerate() {
                let flip = bi ^ f(i) ^ f(i + 1);
                w *= if flip { 0.5 - m.eps } else { 0.5 + m.eps };
            }
            for j in 1..t {
                w *= if f(j) { 0.5 - m.eps_prime } else { 0.5 + m.eps_prime };
            }
            total += w;
        }
        total
    }

    #[test]
    fn ladder_matches_enumeration() {
        for &(eps, eps_prime) in &[(0.25, 0.25), (0.13, 0.31), (0.5, 0.02), (0.02, 0.5)] {
            for t in [2usize, 3, 4, 6, 9] {
                let m = TransferMatrixModel::new(eps, eps_prime, t).unwrap();
                let mut b = vec![false; t];
                for mask in 0u64..(1u64 << t) {
                    for (i, bi) in b.iter_mut().enumerate() {
                        *bi = mask >> i & 1 == 1;
                    }
                    let (exact, _) = ladder_probability(&m, &b).unwrap();
                    let oracle = ladder_oracle(&m, &b);
                    assert!(
                        (exact - oracle).abs() < 1e-12,
                        "eps {eps} eps' {eps_prime} t {t} mask {mask}: {exact} vs {oracle}"
                    );
                }
            }
        }
        // Spot checks at the enumeration edge.
        let m = TransferMatrixModel::new(0.07, 0.19, 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let b: Vec<bool> = (0..12).map(|_| rng.gen::<bool>()).collect();
            let (exact, _) = ladder_probability(&m, &b).unwrap();
            assert!((exact - ladder_oracle(&m, &b)).abs() < 1e-12);
        }
    }

    #[test]
    fn ladder_distributions_sum_to_one() {
        for t in 2..=10usize {
            let m = TransferMatrixModel::new(0.08, 0.23, t).unwrap();
            let mut sum_exact = 0.0;
            let mut sum_approx = 0.0;
            let mut b = vec![false; t];
            for mask in 0u64..(1u64 << t) {
                for (i, bi) in b.iter_mut().enumerate() {
                    *bi = mask >> i & 1 == 1;
                }
                let (exact, approx) = ladder_probability(&m, &b).unwrap();
                sum_exact += exact;
                sum_approx += approx;
            }
            assert!((sum_exact - 1.0).abs() < 1e-12, "t {t}: {sum_exact}");
            assert!((sum_approx - 1.0).abs() < 1e-12, "t {t}: {sum_approx}");
        }
    }

    #[test]
    fn rotated_transfer_closed_forms() {
        let m = TransferMatrixModel::new(0.1, 0.2, 4).unwrap();
        let (z, y) = (m.z(), m.y());
        let sy = y.sqrt();
        let norm = 1.0 + y;
        let off = (1.0 - y) * (1.0 - z) * sy / norm;
        let m0 = m.rotated_transfer(false);
        assert!((m0[0][0] - (1.0 + 2.0 * z * y + y * y) / norm).abs() < 1e-12);
        assert!((m0[0][1] - off).abs() < 1e-12);
        assert!((m0[1][0] - off).abs() < 1e-12);
        assert!((m0[1][1] - 2.0 * y * (1.0 - z) / norm).abs() < 1e-12);
        let m1 = m.rotated_transfer(true);
        assert!((m1[0][0] - (z + 2.0 * y + z * y * y) / norm).abs() < 1e-12);
        assert!((m1[0][1] + off).abs() < 1e-12);
        assert!((m1[1][0] + off).abs() < 1e-12);
        assert!((m1[1][1] - 2.0 * (z - 1.0) * y / norm).abs() < 1e-12);
        // Rotation preserves the trace.
        let t0 = m.transfer(false);
        assert!((m0[0][0] + m0[1][1] - t0[0][0] - t0[1][1]).abs() < 1e-12);
    }

    #[test]
    fn rotated_transfer_diagonalizes_at_z_one() {
        // eps = 0 gives z = 1 and the off-diagonal terms cancel exactly.
        let m = TransferMatrixModel::new(0.0, 0.2, 4).unwrap();
        for b in [false, true] {
            let rot = m.rotated_transfer(b);
            assert_eq!(rot[0][1], 0.0);
            assert_eq!(rot[1][0], 0.0);
        }
    }

    #[test]
    fn ladder_independence_examples() {
        let m = TransferMatrixModel::new(0.01, 0.01, 6).unwrap();
        let tv = ladder_independence_check(&m).unwrap();
        assert!(tv <= 0.05, "tv {tv}");
        // Frozen hidden flips make the approximation exact.
        let m = TransferMatrixModel::new(0.17, 0.5, 6).unwrap();
        assert!(ladder_independence_check(&m).unwrap() < 1e-12);
        // The distance is not monotone in chain length: the two-site chain
        // sits above the trend (every observation touches a boundary) and
        // longer chains level off instead of growing.
        let sweep: Vec<f64> = (2..=10usize)
            .map(|t| {
                ladder_independence_check(&TransferMatrixModel::new(0.1, 0.3, t).unwrap()).unwrap()
            })
            .collect();
        assert!(sweep[1] < sweep[0], "no boundary dip: {sweep:?}");
        for (i, &tv) in sweep.iter().enumerate() {
            assert!((0.02..=0.04).contains(&tv), "t {}: tv {tv}", i + 2);
        }
    }

    #[test]
    fn glue_examples() {
        assert!((glue_exact(0.5, 0.5) - 0.5).abs() < 1e-15);
        let g = glue_exact(0.1, 0.1);
        assert!((g - 0.01 / 0.82).abs() < 1e-15);
        assert!(g <= glue(0.1, 0.1));
        // Pointwise bound over the quarter square.
        for i in 0..=100 {
            for j in 0..=100 {
                let q1 = 0.005 * i as f64;
                let q2 = 0.005 * j as f64;
                assert!(glue_exact(q1, q2) <= glue(q1, q2) + 1e-15, "{q1} {q2}");
            }
        }
    }

    #[test]
    fn two_hole_merge_examples() {
        assert!(two_hole_merge(0.5, 0.5).abs() < 1e-15);
        assert!((two_hole_merge(0.0, 0.37) - 0.5).abs() < 1e-15);
        assert!((two_hole_merge(0.1, 0.1) - 0.48).abs() < 1e-15);
    }

    #[test]
    fn effective_hole_model_probabilities() {
        let m = EffectiveHoleModel::new(
            vec![4, 2],
            vec![vec![0.0, 3.0], vec![3.0, 0.0]],
            0.05,
            1.5,
            0.85,
        )
        .unwrap();
        assert!((m.timelike_probability(0) - (0.5 - (-3.4f64).exp())).abs() < 1e-15);
        assert!((m.spacelike_probability(0, 1) - 0.05f64.powf(1.5)).abs() < 1e-15);
        // Tiny degrees clamp at zero rather than going negative.
        let weak = EffectiveHoleModel::new(vec![0], vec![vec![0.0]], 0.05, 1.5, 0.85).unwrap();
        assert_eq!(weak.timelike_probability(0), 0.0);
        assert!(matches!(
            EffectiveHoleModel::new(vec![1], vec![vec![0.0, 1.0]], 0.05, 1.5, 0.85),
            Err(EffectiveError::BadDistanceTable)
        ));
    }

    #[test]
    fn single_hole_prediction_regimes() {
        // Deep quadratic regime.
        let p = single_hole_prediction(5, 2, 4, 0.05, 1.5, 0.85, 2.0).unwrap();
        assert_eq!(p.regime, HoleRegime::Quadratic);
        assert!((p.failure - 4.0 * (-7.5f64).exp()).abs() < 1e-15);
        // Past the crossover the weaker mechanism labels the regime.
        let hole = single_hole_prediction(5, 2, 2, 0.05, 1.5, 0.85, 50.0).unwrap();
        assert_eq!(hole.regime, HoleRegime::LinearHoleFlip);
        assert!((hole.failure - 50.0 * (1.7f64).exp() * (-7.5f64).exp()).abs() < 1e-12);
        let string = single_hole_prediction(5, 1, 4, 0.05, 1.5, 0.85, 50.0).unwrap();
        assert_eq!(string.regime, HoleRegime::LinearNearString);
        assert!((string.failure - 50.0 * (-1.5f64 * 4.0).exp()).abs() < 1e-12);
        // Continuity across the crossover.
        let m = single_hole_prediction(5, 2, 2, 0.05, 1.5, 0.85, (1.7f64).exp()).unwrap();
        let lin = m.failure;
        let quad = (1.7f64).exp().powi(2) * (-7.5f64).exp();
        assert!((lin - quad).abs() < 1e-12);
        // Saturation.
        let s = single_hole_prediction(5, 2, 4, 0.05, 1.5, 0.85, 1e6).unwrap();
        assert_eq!(s.regime, HoleRegime::Saturated);
        assert_eq!(s.failure, 0.5);
        assert!(matches!(
            single_hole_prediction(5, 3, 4, 0.05, 1.5, 0.85, 2.0),
            Err(EffectiveError::BadHoleGeometry)
        ));
    }

    /// Exact class weights of the single-hole effective chain for one
    /// syndrome, by a forward pass over time: state is the parity entering
    /// the next timelike edge and the crossing class so far.
    fn chain_class_weights(
        syn: &[bool],
        r_near: f64,
        r_far: f64,
        r_time: f64,
    ) -> (f64, f64) {
        let t = syn.len();
        let mut z = [[0.0f64; 2]; 2];
        z[0][0] = 1.0;
        for (s, &syn_s) in syn.iter().enumerate() {
            let mut next = [[0.0f64; 2]; 2];
            for (tb, row) in z.iter().enumerate() {
                for (c, &w) in row.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    for n in 0..2usize {
                        for f in 0..2usize {
                            let carry = syn_s ^ (n == 1) ^ (f == 1) ^ (tb == 1);
                            let mut w2 = w;
                            if n == 1 {
                                w2 *= r_near;
                            }
                            if f == 1 {
                                w2 *= r_far;
                            }
                            if s + 1 < t {
                                if carry {
                                    w2 *= r_time;
                                }
                                next[carry as usize][c ^ n] += w2;
                            } else if !carry {
                                next[0][c ^ n] += w2;
                            }
                        }
                    }
                }
            }
            z = next;
        }
        (z[0][0], z[0][1])
    }

    #[test]
    fn chain_weights_match_exact_ml() {
        // The forward pass agrees with the generic decoder on the same graph.
        let t = 4usize;
        let (pn, pf, pt) = (0.08, 0.03, 0.35);
        let mut edges = Vec::new();
        let mut cocycle = Vec::new();
        for s in 0..t {
            cocycle.push(edges.len());
            edges.push(CheckEdge { ends: EdgeEnds::Dangling(s), p: pn });
            edges.push(CheckEdge { ends: EdgeEnds::Dangling(s), p: pf });
        }
        for s in 0..t - 1 {
            edges.push(CheckEdge { ends: EdgeEnds::Two(s, s + 1), p: pt });
        }
        let n_e = edges.len();
        let g = CheckGraph::new(t, edges, vec![BitVec::from_indices(n_e, &cocycle)], vec![])
            .unwrap();
        let reference = exact_ml_failure(&g).unwrap();

        let (rn, rf, rt) = (pn / (1.0 - pn), pf / (1.0 - pf), pt / (1.0 - pt));
        let const_factor =
            (1.0 - pn).powi(t as i32) * (1.0 - pf).powi(t as i32) * (1.0 - pt).powi(t as i32 - 1);
        let mut fail = 0.0;
        let mut syn = vec![false; t];
        for mask in 0u64..(1u64 << t) {
            for (i, s) in syn.iter_mut().enumerate() {
                *s = mask >> i & 1 == 1;
            }
            let (z0, z1) = chain_class_weights(&syn, rn, rf, rt);
            let top = z0.max(z1);
            fail += if (z0 - z1).abs() <= 1e-12 * top { (z0 + z1) / 2.0 } else { z0.min(z1) };
        }
        assert!(
            (fail * const_factor - reference).abs() < 1e-12,
            "{} vs {reference}",
            fail * const_factor
        );
    }

    /// Sampled conditional failure of exact decoding on the single-hole
    /// effective chain, one rate per requested time extent.
    fn chain_failure_rates(l: f64, r: f64, d: usize, ts: &[usize], samples: usize) -> Vec<f64> {
        let hole = EffectiveHoleModel::new(vec![d], vec![vec![0.0]], 0.05, 1.5, 0.85).unwrap();
        let pn = hole.spacelike_for_distance(r);
        let pf = hole.spacelike_for_distance(l - r);
        let pt = hole.timelike_probability(0);
        let (rn, rf, rt) = (pn / (1.0 - pn), pf / (1.0 - pf), pt / (1.0 - pt));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut rates = Vec::new();
        for &t in ts {
            let mut sum = 0.0f64;
            let mut syn = vec![false; t];
            for _ in 0..samples {
                let mut prev_tl = false;
                for (s, slot) in syn.iter_mut().enumerate() {
                    let n = rng.gen::<f64>() < pn;
                    let f = rng.gen::<f64>() < pf;
                    let tl = s + 1 < t && rng.gen::<f64>() < pt;
                    *slot = n ^ f ^ prev_tl ^ tl;
                    prev_tl = tl;
                }
                let (z0, z1) = chain_class_weights(&syn, rn, rf, rt);
                sum += z0.min(z1) / (z0 + z1);
            }
            rates.push(sum / samples as f64);
        }
        rates
    }

    #[test]
    fn single_hole_chain_fails_at_the_far_string_rate() {
        // One hole of degree 4 at distance r = 2 in a width-7 patch. Exact
        // decoding of the effective chain fails linearly in T from the very
        // first rounds, at rate T exp(-c (l - r)): a lone far-side string
        // flip is always resolved toward the cheaper near side, so the
        // quadratic two-segment counting never dominates, and because the
        // timelike weights cancel between the classes the rate is
        // insensitive to the hole degree.
        let ts = [2usize, 4, 8, 16, 32];
        let samples = 120_000usize;
        let rates = chain_failure_rates(7.0, 2.0, 4, &ts, samples);
        let far_rate = 0.05f64.powf(2.5);
        for (&t, &rate) in ts.iter().zip(&rates) {
            let rel = rate / (t as f64 * far_rate);
            assert!((0.9..=1.1).contains(&rel), "t {t}: rate {rate}, ratio {rel}");
        }
        for i in 0..ts.len() - 1 {
            let slope = (rates[i + 1] / rates[i]).log2();
            assert!((0.85..=1.15).contains(&slope), "segment {i}: slope {slope}");
        }
        // Same patch with a minimal hole: the rate does not move.
        let small = chain_failure_rates(7.0, 2.0, 1, &[8], samples)[0];
        let ratio = small / rates[2];
        assert!((0.9..=1.1).contains(&ratio), "degree sensitivity: {ratio}");
    }
}
