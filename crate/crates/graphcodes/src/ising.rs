//! One-dimensional Ising chain with vacancies: decoding a repetition-coded
//! bit through t rounds of flips when the checks at vacancy positions are
//! never measured.
//!
//! Within each maximal interval between vacancies the check record reveals
//! every round's flip pattern up to complement, so decoding collapses to one
//! effective spin per interval driven by known biased coins. The module
//! carries the closed forms, the faithful simulation, exact maximum
//! likelihood failure, the interval effective model, and the crossover
//! measurement for two intervals.

use crate::gf2::BitVec;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IsingError {
    #[error("flip probability {0} is outside [0, 1/2]")]
    BadProbability(f64),
    #[error("vacancy position {0} is outside 1..=n-1")]
    BadVacancy(usize),
    #[error("chain needs at least one spin and one round")]
    EmptySpec,
    #[error("revealed error count {m} exceeds half the interval length {l}")]
    BadRevealedCount { l: usize, m: usize },
    #[error("enumeration size {0} exceeds the cap")]
    EnumerationCap(usize),
    #[error("at least {0} trials are needed for a stable estimate")]
    TooFewTrials(usize),
}

/// Chain of n spins evolving for t rounds at flip probability p; checks
/// Z_i Z_{i+1} are measured each round for every i in 1..=n-1 outside the
/// vacancy set.
#[derive(Clone, Debug)]
pub struct IsingSpec {
    pub n: usize,
    pub t: usize,
    pub p: f64,
    pub vacancies: Vec<usize>,
}

impl IsingSpec {
    pub fn new(n: usize, t: usize, p: f64, mut vacancies: Vec<usize>) -> Result<Self, IsingError> {
        if n == 0 || t == 0 {
            return Err(IsingError::EmptySpec);
        }
        if !(0.0..=0.5).contains(&p) {
            return Err(IsingError::BadProbability(p));
        }
        vacancies.sort_unstable();
        vacancies.dedup();
        for &v in &vacancies {
            if v == 0 || v >= n {
                return Err(IsingError::BadVacancy(v));
            }
        }
        Ok(IsingSpec { n, t, p, vacancies })
    }

    /// Maximal check-connected intervals as (start spin, length), in order.
    pub fn intervals(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.vacancies.len() + 1);
        let mut start = 0usize;
        for &v in &self.vacancies {
            out.push((start, v - start));
            start = v;
        }
        out.push((start, self.n - start));
        out
    }

    /// Check positions that are measured, ascending (position i is the pair
    /// of spins i-1, i).
    pub fn measured_checks(&self) -> Vec<usize> {
        (1..self.n).filter(|i| !self.vacancies.contains(i)).collect()
    }
}

/// Everything the run produces: the hidden initial state, the per-round
/// outcomes of the measured checks (1 = violated), and the perfectly
/// measured final spins (1 = down).
#[derive(Clone, Debug)]
pub struct IsingRecord {
    pub initial_down: bool,
    pub checks: Vec<BitVec>,
    pub finals: BitVec,
}

/// Faithful forward run: a uniformly random all-up or all-down start, t
/// rounds of independent flips each followed by measuring the surviving
/// checks, then a perfect readout of all spins.
pub fn simulate(spec: &IsingSpec, rng: &mut impl Rng) -> IsingRecord {
    let initial_down = rng.gen::<bool>();
    let mut spins = BitVec::zeros(spec.n);
    if initial_down {
        for i in 0..spec.n {
            spins.set(i, true);
        }
    }
    let positions = spec.measured_checks();
    let mut checks = Vec::with_capacity(spec.t);
    for _ in 0..spec.t {
        for i in 0..spec.n {
            if rng.gen::<f64>() < spec.p {
                spins.flip(i);
            }
        }
        let mut round = BitVec::zeros(positions.len());
        for (j, &i) in positions.iter().enumerate() {
            round.set(j, spins.get(i - 1) != spins.get(i));
        }
        checks.push(round);
    }
    IsingRecord { initial_down, checks, finals: spins }
}

/// Failure of majority decoding when no checks are measured at all: each
/// spin is an independent coin at P_flip = (1 - (1-2p)^t) / 2 and decoding
/// fails when more than half come up flipped. Requires odd n so the vote
/// cannot tie.
pub fn vacancies_everywhere_failure(n: usize, t: usize, p: f64) -> f64 {
    assert!(n % 2 == 1, "majority vote needs an odd spin count");
    let p_flip = (1.0 - (1.0 - 2.0 * p).powi(t as i32)) / 2.0;
    let mut total = 0.0f64;
    for j in (n / 2 + 1)..=n {
        total += binomial(n, j) * p_flip.powi(j as i32) * (1.0 - p_flip).powi((n - j) as i32);
    }
    total
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0f64;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// Probability of m errors in an interval of length l in one round.
fn pattern_class_probability(l: usize, m: usize, p: f64) -> f64 {
    binomial(l, m) * p.powi(m as i32) * (1.0 - p).powi((l - m) as i32)
}

/// Conditional probability that the complementary pattern (l - m errors)
/// occurred rather than the revealed minimal one: the per-round flip bias of
/// the interval's effective spin. Exactly 1/2 at the even split m = l/2.
pub fn interval_flip_bias(l: usize, m: usize, p: f64) -> Result<f64, IsingError> {
    if 2 * m > l {
        return Err(IsingError::BadRevealedCount { l, m });
    }
    if 2 * m == l {
        return Ok(0.5);
    }
    let a = pattern_class_probability(l, m, p);
    let b = pattern_class_probability(l, l - m, p);
    if a + b == 0.0 {
        // p = 0 with m > 0 revealed: unreachable record, bias limit 0.
        return Ok(0.0);
    }
    Ok(b / (a + b))
}

/// Per-interval, per-round revealed error counts and flip biases, plus the
/// accumulated flip probability of each effective spin after all rounds.
#[derive(Clone, Debug)]
pub struct IntervalModel {
    pub lengths: Vec<usize>,
    /// revealed[i][t]: the smaller error count consistent with round t's
    /// checks in interval i.
    pub revealed: Vec<Vec<usize>>,
    pub biases: Vec<Vec<f64>>,
    /// accumulated[i] = (1 - prod_t (1 - 2 bias)) / 2.
    pub accumulated: Vec<f64>,
}

/// Decodes each round's checks into per-interval revealed patterns. Round
/// t's new flips have check signature checks[t] xor checks[t-1] within each
/// interval; of the two patterns with that signature the one not flipping
/// the interval's first spin is the representative.
fn round_representatives(spec: &IsingSpec, record: &IsingRecord) -> Vec<Vec<BitVec>> {
    let intervals = spec.intervals();
    let positions = spec.measured_checks();
    let mut reps: Vec<Vec<BitVec>> = vec![Vec::with_capacity(spec.t); intervals.len()];
    let mut prev = BitVec::zeros(positions.len());
    for round in &record.checks {
        let mut diff = round.clone();
        diff.xor_assign(&prev);
        for (k, &(start, len)) in intervals.iter().enumerate() {
            let mut rep = BitVec::zeros(len);
            let mut bit = false;
            for j in 1..len {
                let pos_index = positions.binary_search(&(start + j)).expect("interior check");
                bit ^= diff.get(pos_index);
                rep.set(j, bit);
            }
            reps[k].push(rep);
        }
        prev = round.clone();
    }
    reps
}

pub fn effective_model(spec: &IsingSpec, record: &IsingRecord) -> IntervalModel {
    let intervals = spec.intervals();
    let reps = round_representatives(spec, record);
    let mut revealed = Vec::with_capacity(intervals.len());
    let mut biases = Vec::with_capacity(intervals.len());
    let mut accumulated = Vec::with_capacity(intervals.len());
    for (k, &(_, len)) in intervals.iter().enumerate() {
        let mut ms = Vec::with_capacity(spec.t);
        let mut bs = Vec::with_capacity(spec.t);
        let mut q = 1.0f64;
        for rep in &reps[k] {
            let w = rep.weight();
            let m = w.min(len - w);
            let b = interval_flip_bias(len, m, spec.p).expect("representative within range");
            q *= 1.0 - 2.0 * b;
            ms.push(m);
            bs.push(b);
        }
        revealed.push(ms);
        biases.push(bs);
        accumulated.push((1.0 - q) / 2.0);
    }
    IntervalModel {
        lengths: intervals.iter().map(|&(_, l)| l).collect(),
        revealed,
        biases,
        accumulated,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsingVerdict {
    Up,
    Down,
    NoDecoding,
}

#[derive(Clone, Copy, Debug)]
pub struct IsingDecision {
    /// Posterior probability that the chain started all-down.
    pub posterior_down: f64,
    pub verdict: IsingVerdict,
}

/// Exact maximum-likelihood reconstruction of the initial state from a
/// record: per interval the bias product gives the flip likelihood, the
/// finals select which accumulation branch each initial state needs, and
/// the posterior is the product over intervals. An exact tie reports that
/// no decoding is possible.
pub fn ml_decode_record(spec: &IsingSpec, record: &IsingRecord) -> IsingDecision {
    let intervals = spec.intervals();
    let reps = round_representatives(spec, record);
    let mut like_up = 1.0f64;
    let mut like_down = 1.0f64;
    for (k, &(start, len)) in intervals.iter().enumerate() {
        let mut q = 1.0f64;
        let mut cum = BitVec::zeros(len);
        for rep in &reps[k] {
            let w = rep.weight();
            let m = w.min(len - w);
            let b = interval_flip_bias(len, m, spec.p).expect("representative within range");
            q *= 1.0 - 2.0 * b;
            cum.xor_assign(rep);
        }
        // Do the finals match the representative accumulation (even number
        // of complement rounds) for an all-up start?
        let mut matches_up = true;
        let mut matches_down = true;
        for j in 0..len {
            if record.finals.get(start + j) == cum.get(j) {
                matches_down = false;
            } else {
                matches_up = false;
            }
        }
        assert!(matches_up || matches_down, "finals inconsistent with checks");
        like_up *= (if matches_up { 1.0 + q } else { 1.0 - q }) / 2.0;
        like_down *= (if matches_down { 1.0 + q } else { 1.0 - q }) / 2.0;
    }
    let total = like_up + like_down;
    let posterior_down = if total == 0.0 { 0.5 } else { like_down / total };
    let scale = like_up.max(like_down);
    let verdict = if (like_up - like_down).abs() <= 1e-12 * scale {
        IsingVerdict::NoDecoding
    } else if like_down > like_up {
        IsingVerdict::Down
    } else {
        IsingVerdict::Up
    };
    IsingDecision { posterior_down, verdict }
}

const CLASS_CAP: usize = 2_000_000;

/// Number of round orderings of one nondecreasing multiset, computed as a
/// product of binomials so large t stays finite.
fn multiset_orderings(stack: &[usize]) -> f64 {
    let mut coef = 1.0f64;
    let mut remaining = stack.len();
    let mut i = 0usize;
    while i < stack.len() {
        let mut j = i;
        while j < stack.len() && stack[j] == stack[i] {
            j += 1;
        }
        coef *= binomial(remaining, j - i);
        remaining -= j - i;
        i = j;
    }
    coef
}

/// One record class of an interval: the two complement-parity masses and
/// the number of check sequences sharing them.
type ClassEntry = (f64, f64, f64);

/// Distribution over record classes of a single interval. Rounds are
/// grouped by the weight k of the first-spin-fixed representative (there
/// are C(l-1, k) check signatures for each k) and the even/odd complement
/// masses follow from products of (w_k + w_{l-k}) and (w_k - w_{l-k}) over
/// the rounds. Pure counting; no decoding assumptions.
fn interval_class_distribution(l: usize, t: usize, p: f64) -> Result<Vec<ClassEntry>, IsingError> {
    let sums: Vec<f64> = (0..l)
        .map(|k| {
            p.powi(k as i32) * (1.0 - p).powi((l - k) as i32)
                + p.powi((l - k) as i32) * (1.0 - p).powi(k as i32)
        })
        .collect();
    let diffs: Vec<f64> = (0..l)
        .map(|k| {
            p.powi(k as i32) * (1.0 - p).powi((l - k) as i32)
                - p.powi((l - k) as i32) * (1.0 - p).powi(k as i32)
        })
        .collect();
    let counts: Vec<f64> = (0..l).map(|k| binomial(l - 1, k)).collect();
    fn rec(
        l: usize,
        t: usize,
        start: usize,
        stack: &mut Vec<usize>,
        sums: &[f64],
        diffs: &[f64],
        counts: &[f64],
        out: &mut Vec<ClassEntry>,
    ) -> Result<(), IsingError> {
        if stack.len() == t {
            let mut s = 1.0f64;
            let mut d = 1.0f64;
            let mut ways = multiset_orderings(stack);
            for &k in stack.iter() {
                s *= sums[k];
                d *= diffs[k];
                ways *= counts[k];
            }
            out.push(((s + d) / 2.0, (s - d) / 2.0, ways));
            if out.len() > CLASS_CAP {
                return Err(IsingError::EnumerationCap(out.len()));
            }
            return Ok(());
        }
        for k in start..l {
            stack.push(k);
            rec(l, t, k, stack, sums, diffs, counts, out)?;
            stack.pop();
        }
        Ok(())
    }
    let mut out = Vec::new();
    let mut stack: Vec<usize> = Vec::with_capacity(t);
    rec(l, t, 0, &mut stack, &sums, &diffs, &counts, &mut out)?;
    Ok(out)
}

/// Exact maximum-likelihood failure probability of the full model: convolve
/// the per-interval record-class distributions (both complement
/// orientations past the first interval, whose orientation is fixed by the
/// global up/down symmetry) and sum the smaller parity mass over every
/// joint class.
pub fn exact_ml_failure(spec: &IsingSpec) -> Result<f64, IsingError> {
    let mut joint: Vec<ClassEntry> = vec![(1.0, 1.0, 1.0)];
    for (idx, (_, len)) in spec.intervals().into_iter().enumerate() {
        let dist = interval_class_distribution(len, spec.t, spec.p)?;
        let mut next = Vec::with_capacity(joint.len() * dist.len() * 2);
        for &(ja, jb, jc) in &joint {
            for &(a, b, c) in &dist {
                next.push((ja * a, jb * b, jc * c));
                if idx > 0 {
                    next.push((ja * b, jb * a, jc * c));
                }
            }
        }
        if next.len() > CLASS_CAP {
            return Err(IsingError::EnumerationCap(next.len()));
        }
        joint = next;
    }
    Ok(joint.iter().map(|&(a, b, c)| c * a.min(b)).sum())
}

/// Outcome weight of one revealed-count sequence for an interval: its
/// probability and the accumulated flip probability of the effective spin.
type EffEntry = (f64, f64);

/// All revealed-count multisets of an interval over t rounds with their
/// probabilities and accumulated biases.
fn interval_effective_entries(
    l: usize,
    t: usize,
    p: f64,
    cap: usize,
) -> Result<Vec<EffEntry>, IsingError> {
    let half = l / 2;
    let expected = binomial(t + half, half);
    if expected > cap as f64 {
        return Err(IsingError::EnumerationCap(expected as usize));
    }
    let class_prob: Vec<f64> = (0..=half)
        .map(|m| {
            if 2 * m == l {
                pattern_class_probability(l, m, p)
            } else {
                pattern_class_probability(l, m, p) + pattern_class_probability(l, l - m, p)
            }
        })
        .collect();
    let bias: Vec<f64> = (0..=half)
        .map(|m| interval_flip_bias(l, m, p).expect("m within range"))
        .collect();
    fn rec(
        t: usize,
        start: usize,
        half: usize,
        stack: &mut Vec<usize>,
        class_prob: &[f64],
        bias: &[f64],
        out: &mut Vec<EffEntry>,
    ) {
        if stack.len() == t {
            let mut prob = multiset_orderings(stack);
            let mut q = 1.0f64;
            for &m in stack.iter() {
                prob *= class_prob[m];
                q *= 1.0 - 2.0 * bias[m];
            }
            out.push((prob, (1.0 - q) / 2.0));
            return;
        }
        for m in start..=half {
            stack.push(m);
            rec(t, m, half, stack, class_prob, bias, out);
            stack.pop();
        }
    }
    let mut out = Vec::new();
    let mut stack: Vec<usize> = Vec::with_capacity(t);
    rec(t, 0, half, &mut stack, &class_prob, &bias, &mut out);
    Ok(out)
}

/// Failure probability of the exact decoder given the accumulated flip
/// probabilities of the effective spins: the truth pattern loses to its
/// complement, with exact ties scoring one half.
pub fn effective_conditional_failure(flips: &[f64]) -> f64 {
    let k = flips.len();
    let mut fail = 0.0f64;
    for s in 0u64..(1u64 << (k - 1)) {
        let mut direct = 1.0f64;
        let mut comp = 1.0f64;
        for (i, &b) in flips.iter().enumerate() {
            if s >> i & 1 == 1 {
                direct *= b;
                comp *= 1.0 - b;
            } else {
                direct *= 1.0 - b;
                comp *= b;
            }
        }
        fail += direct.min(comp);
    }
    fail
}

/// The failure probability computed entirely in the interval effective
/// model: enumerate revealed-count sequences per interval, accumulate the
/// bias products, and score the maximum-likelihood comparison on the
/// effective spins alone.
pub fn effective_ml_failure(spec: &IsingSpec) -> Result<f64, IsingError> {
    let per_interval: Vec<Vec<EffEntry>> = spec
        .intervals()
        .into_iter()
        .map(|(_, len)| interval_effective_entries(len, spec.t, spec.p, CLASS_CAP))
        .collect::<Result<_, _>>()?;
    let k = per_interval.len();
    let mut fail = 0.0f64;
    let mut index = vec![0usize; k];
    let mut flips = vec![0.0f64; k];
    loop {
        let mut prob = 1.0f64;
        for (i, &j) in index.iter().enumerate() {
            let (pr, fl) = per_interval[i][j];
            prob *= pr;
            flips[i] = fl;
        }
        fail += prob * effective_conditional_failure(&flips);
        let mut pos = 0usize;
        loop {
            if pos == k {
                return Ok(fail);
            }
            index[pos] += 1;
            if index[pos] < per_interval[pos].len() {
                break;
            }
            index[pos] = 0;
            pos += 1;
        }
    }
}

/// Exact effective flip probability per round for an interval of length l:
/// the chance the complementary class is the true one, summed over revealed
/// classes (the even split contributes half its mass).
pub fn interval_eff_exact(l: usize, p: f64) -> f64 {
    let mut total = 0.0f64;
    let mut m = 0usize;
    while 2 * m < l {
        total += pattern_class_probability(l, l - m, p);
        m += 1;
    }
    if l % 2 == 0 {
        total += 0.5 * pattern_class_probability(l, l / 2, p);
    }
    total
}

/// Stirling-form approximation C p^(floor(l/2)+1) 2^l l^(-1/2) with
/// C = sqrt(2/pi), the constant of the central binomial coefficient. (A
/// printed sqrt(2)/pi would sit near half the exact value; sqrt(2/pi) is
/// the reading consistent with the exact rate.)
pub fn interval_eff_stirling(l: usize, p: f64) -> f64 {
    let c = (2.0 / std::f64::consts::PI).sqrt();
    c * p.powi(l as i32 / 2 + 1) * 2f64.powi(l as i32) / (l as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Quadratic,
    Linear,
    Saturated,
}

#[derive(Clone, Copy, Debug)]
pub struct TwoIntervalAnalysis {
    pub p1_eff: f64,
    pub p2_eff: f64,
    pub p1_stirling: f64,
    pub p2_stirling: f64,
    /// Probability that both effective spins end up flipped.
    pub p_both: f64,
    pub regime: Regime,
}

/// Closed-form two-interval analysis at time t: exact per-round effective
/// flip rates, the both-flipped product, and the growth regime read off the
/// t p_eff thresholds (the shorter interval flips more easily).
pub fn two_interval_analysis(l1: usize, l2: usize, p: f64, t: usize) -> TwoIntervalAnalysis {
    assert!(l1 <= l2, "intervals ordered by length");
    let p1 = interval_eff_exact(l1, p);
    let p2 = interval_eff_exact(l2, p);
    let acc = |pe: f64| (1.0 - (1.0 - 2.0 * pe).powi(t as i32)) / 2.0;
    let p_both = acc(p1) * acc(p2);
    let tf = t as f64;
    let regime = if tf * p1 < 1.0 {
        Regime::Quadratic
    } else if tf * p2 < 1.0 {
        Regime::Linear
    } else {
        Regime::Saturated
    };
    TwoIntervalAnalysis {
        p1_eff: p1,
        p2_eff: p2,
        p1_stirling: interval_eff_stirling(l1, p),
        p2_stirling: interval_eff_stirling(l2, p),
        p_both,
        regime,
    }
}

#[derive(Clone, Debug)]
pub struct CrossoverPoint {
    pub t: usize,
    pub failure: f64,
    /// Standard error of the estimate; zero for exactly enumerated points.
    pub sigma: f64,
}

#[derive(Clone, Debug)]
pub struct CrossoverCurve {
    pub points: Vec<CrossoverPoint>,
    /// Log-log slope between consecutive grid points.
    pub slopes: Vec<f64>,
}

const CROSSOVER_EXACT_CAP: usize = 100_000;
const CROSSOVER_MIN_TRIALS: usize = 1000;

fn draw_bias(cum: &[f64], biases: &[f64], rng: &mut impl Rng) -> f64 {
    let u = rng.gen::<f64>() * cum.last().unwrap();
    let idx = cum.iter().position(|&c| u < c).unwrap_or(cum.len() - 1);
    biases[idx]
}

/// Failure curve for two intervals across a time grid. Small grid points
/// are enumerated exactly; the rest are Monte Carlo where each trial draws
/// only the revealed counts and scores the exact conditional failure
/// min(B1, B2) of the accumulated biases, so no flip coins or decoder runs
/// are needed and the variance stays far below win-or-lose counting.
pub fn crossover_experiment(
    l1: usize,
    l2: usize,
    p: f64,
    t_grid: &[usize],
    trials: usize,
    rng: &mut impl Rng,
) -> Result<CrossoverCurve, IsingError> {
    if trials < CROSSOVER_MIN_TRIALS {
        return Err(IsingError::TooFewTrials(CROSSOVER_MIN_TRIALS));
    }
    let tables: Vec<(Vec<f64>, Vec<f64>)> = [l1, l2]
        .iter()
        .map(|&l| {
            let half = l / 2;
            let mut cum = Vec::with_capacity(half + 1);
            let mut acc = 0.0f64;
            for m in 0..=half {
                acc += if 2 * m == l {
                    pattern_class_probability(l, m, p)
                } else {
                    pattern_class_probability(l, m, p) + pattern_class_probability(l, l - m, p)
                };
                cum.push(acc);
            }
            let biases = (0..=half)
                .map(|m| interval_flip_bias(l, m, p).expect("m within range"))
                .collect();
            (cum, biases)
        })
        .collect();
    let mut points = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let joint = binomial(t + l1 / 2, l1 / 2) * binomial(t + l2 / 2, l2 / 2);
        if joint <= CROSSOVER_EXACT_CAP as f64 {
            let e1 = interval_effective_entries(l1, t, p, CROSSOVER_EXACT_CAP)?;
            let e2 = interval_effective_entries(l2, t, p, CROSSOVER_EXACT_CAP)?;
            let mut failure = 0.0f64;
            for &(pr1, b1) in &e1 {
                for &(pr2, b2) in &e2 {
                    failure += pr1 * pr2 * b1.min(b2);
                }
            }
            points.push(CrossoverPoint { t, failure, sigma: 0.0 });
            continue;
        }
        let mut sum = 0.0f64;
        let mut sum_sq = 0.0f64;
        for _ in 0..trials {
            let mut q1 = 1.0f64;
            let mut q2 = 1.0f64;
            for _ in 0..t {
                q1 *= 1.0 - 2.0 * draw_bias(&tables[0].0, &tables[0].1, rng);
                q2 *= 1.0 - 2.0 * draw_bias(&tables[1].0, &tables[1].1, rng);
            }
            let f = (0.5 * (1.0 - q1)).min(0.5 * (1.0 - q2));
            sum += f;
            sum_sq += f * f;
        }
        let mean = sum / trials as f64;
        let var = (sum_sq / trials as f64 - mean * mean).max(0.0);
        points.push(CrossoverPoint { t, failure: mean, sigma: (var / trials as f64).sqrt() });
    }
    let slopes = (0..points.len().saturating_sub(1))
        .map(|i| {
            (points[i + 1].failure / points[i].failure).ln()
                / (points[i + 1].t as f64 / points[i].t as f64).ln()
        })
        .collect();
    Ok(CrossoverCurve { points, slopes })
}
