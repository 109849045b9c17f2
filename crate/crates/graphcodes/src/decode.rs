//! Spacetime check graphs with vacancies and hole centers.
//!
//! A check graph has one vertex per detection event and one edge per fault
//! mechanism; an edge flips the detection events at its endpoints, and a
//! dangling edge flips only the single event it touches. Homology classes of
//! error chains are labelled by inner products with a fixed basis of logical
//! cocycles. This module provides exact maximum-likelihood decoding (class
//! partition sums), exact Monte Carlo sampling from the conditional chain
//! distribution, a minimum-weight decoder, the closed-form Peierls bound on
//! once-colored cycles, and the spacetime bulk construction for a surface
//! patch with dead qubits (hole centers, spokes, fan cells, time product).

use crate::gf2::{BitMatrix, BitVec, RowSpace};
use rand::Rng;
use thiserror::Error;

/// Largest cycle-space dimension the exact decoders will enumerate.
pub const CYCLE_CAP: usize = 22;
/// Largest flagged-vertex count the minimum-weight pairing will consider.
pub const DEFECT_CAP: usize = 12;
/// Largest edge or vertex count for the fully exhaustive disorder averages.
pub const EXHAUSTIVE_CAP: usize = 20;

const WEIGHT_EPS: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("edge probability {0} is outside [0, 1]")]
    BadProbability(f64),
    #[error("edge {0} touches vertex {1} outside the graph")]
    BadVertex(usize, usize),
    #[error("edge {0} is a self loop")]
    SelfLoop(usize),
    #[error("2-cell {0} has nonzero boundary")]
    OpenCell(usize),
    #[error("cocycle {0} overlaps 2-cell {1} an odd number of times")]
    CocycleCellOverlap(usize, usize),
    #[error("no chain matches the requested syndrome")]
    UnmatchedSyndrome,
    #[error("enumeration size {0} exceeds cap {1}")]
    CapExceeded(usize, usize),
    #[error("minimum-weight decoding needs probabilities at most 1/2, found {0}")]
    HeavyEdge(f64),
    #[error("{0} flagged vertices exceed the pairing cap {1}")]
    DefectCap(usize, usize),
    #[error("dead edge {0:?} does not exist in the lattice")]
    BadDeadEdge(SpatialEdge),
    #[error("a dead region touches the patch boundary")]
    HoleTouchesBoundary,
    #[error("dead edges do not form isolated filled rectangles")]
    RaggedHole,
    #[error("every column (or row) of the lattice touches a dead region")]
    NoClearColumn,
    #[error("a logical cocycle became a coboundary; the classes are not distinct")]
    Disconnected,
    #[error("bad lattice dimensions {0}x{1}")]
    BadLattice(usize, usize),
}

/// Endpoints of a check-graph edge: an interior edge flips two detection
/// events, a dangling edge flips one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeEnds {
    Two(usize, usize),
    Dangling(usize),
}

#[derive(Clone, Debug)]
pub struct CheckEdge {
    pub ends: EdgeEnds,
    pub p: f64,
}

/// Detection-event graph with independent edge faults, a logical-cocycle
/// basis, and optional validating 2-cells and spacetime coordinates.
#[derive(Clone, Debug)]
pub struct CheckGraph {
    n_v: usize,
    edges: Vec<CheckEdge>,
    cocycles: Vec<BitVec>,
    two_cells: Vec<BitVec>,
    coords: Option<Vec<(f64, f64, f64)>>,
}

impl CheckGraph {
    /// Validates endpoint ranges, probability ranges (p = 1 is allowed only as
    /// a degenerate sampling case), closedness of every 2-cell, and even
    /// overlap of every cocycle with every 2-cell.
    pub fn new(
        n_v: usize,
        edges: Vec<CheckEdge>,
        cocycles: Vec<BitVec>,
        two_cells: Vec<BitVec>,
    ) -> Result<Self, DecodeError> {
        Self::with_coords(n_v, edges, cocycles, two_cells, None)
    }

    pub fn with_coords(
        n_v: usize,
        edges: Vec<CheckEdge>,
        cocycles: Vec<BitVec>,
        two_cells: Vec<BitVec>,
        coords: Option<Vec<(f64, f64, f64)>>,
    ) -> Result<Self, DecodeError> {
        for (i, e) in edges.iter().enumerate() {
            if !(e.p >= 0.0 && e.p <= 1.0) {
                return Err(DecodeError::BadProbability(e.p));
            }
            match e.ends {
                EdgeEnds::Two(u, v) => {
                    if u >= n_v {
                        return Err(DecodeError::BadVertex(i, u));
                    }
                    if v >= n_v {
                        return Err(DecodeError::BadVertex(i, v));
                    }
                    if u == v {
                        return Err(DecodeError::SelfLoop(i));
                    }
                }
                EdgeEnds::Dangling(v) => {
                    if v >= n_v {
                        return Err(DecodeError::BadVertex(i, v));
                    }
                }
            }
        }
        let g = CheckGraph { n_v, edges, cocycles, two_cells, coords };
        for (i, cell) in g.two_cells.iter().enumerate() {
            if !syndrome(&g, cell).is_zero() {
                return Err(DecodeError::OpenCell(i));
            }
        }
        for (k, c) in g.cocycles.iter().enumerate() {
            for (i, cell) in g.two_cells.iter().enumerate() {
                if c.dot(cell) {
                    return Err(DecodeError::CocycleCellOverlap(k, i));
                }
            }
        }
        if let Some(cs) = &g.coords {
            assert_eq!(cs.len(), g.n_v, "one coordinate triple per vertex");
        }
        Ok(g)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_v
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[CheckEdge] {
        &self.edges
    }

    pub fn cocycles(&self) -> &[BitVec] {
        &self.cocycles
    }

    pub fn two_cells(&self) -> &[BitVec] {
        &self.two_cells
    }

    pub fn coords(&self) -> Option<&[(f64, f64, f64)]> {
        self.coords.as_deref()
    }

    /// Vertex-by-edge boundary matrix; a dangling edge has a single 1.
    pub fn boundary_matrix(&self) -> BitMatrix {
        let mut m = BitMatrix::zeros(self.n_v, self.edges.len());
        for (j, e) in self.edges.iter().enumerate() {
            match e.ends {
                EdgeEnds::Two(u, v) => {
                    m.set(u, j, true);
                    m.set(v, j, true);
                }
                EdgeEnds::Dangling(v) => m.set(v, j, true),
            }
        }
        m
    }

    /// Homology class of a chain: bit k is its inner product with cocycle k.
    pub fn class_of(&self, chain: &BitVec) -> usize {
        let mut c = 0usize;
        for (k, z) in self.cocycles.iter().enumerate() {
            if z.dot(chain) {
                c |= 1 << k;
            }
        }
        c
    }

    pub fn class_count(&self) -> usize {
        1 << self.cocycles.len()
    }
}

/// Mod-2 boundary of an edge chain: which detection events it flips.
pub fn syndrome(g: &CheckGraph, chain: &BitVec) -> BitVec {
    let mut s = BitVec::zeros(g.n_v);
    for j in chain.ones() {
        match g.edges[j].ends {
            EdgeEnds::Two(u, v) => {
                s.flip(u);
                s.flip(v);
            }
            EdgeEnds::Dangling(v) => s.flip(v),
        }
    }
    s
}

/// Samples each edge independently with its own probability.
pub fn sample_errors(g: &CheckGraph, rng: &mut impl Rng) -> BitVec {
    let mut red = BitVec::zeros(g.n_edges());
    for (j, e) in g.edges.iter().enumerate() {
        if rng.gen::<f64>() < e.p {
            red.set(j, true);
        }
    }
    red
}

/// Actual errors (red) against a decoder's correction (blue); the
/// once-colored set red XOR blue is what survives correction.
#[derive(Clone, Debug)]
pub struct Coloring {
    pub red: BitVec,
    pub blue: BitVec,
}

impl Coloring {
    pub fn once_colored(&self) -> BitVec {
        let mut w = self.red.clone();
        w.xor_assign(&self.blue);
        w
    }
}

/// Normalized per-class partition sums, indexed by cocycle-overlap bitmask.
#[derive(Clone, Debug)]
pub struct ClassPosterior {
    pub probs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    Class(usize),
    /// Two or more classes share the maximum posterior within relative 1e-12;
    /// both initial states are equally likely, so no decoding is possible.
    Tie(Vec<usize>),
}

impl Decision {
    /// The decoded class; on a tie, the first tied class (deterministic).
    pub fn chosen(&self) -> usize {
        match self {
            Decision::Class(c) => *c,
            Decision::Tie(cs) => cs[0],
        }
    }

    pub fn is_tie(&self) -> bool {
        matches!(self, Decision::Tie(_))
    }
}

#[derive(Clone, Debug)]
pub struct MlDecision {
    pub posterior: ClassPosterior,
    pub decision: Decision,
    /// Most likely single chain within the chosen class.
    pub blue: BitVec,
}

/// Shared machinery for the exact enumeration decoders: the syndrome-free
/// part (active edges, kernel basis, per-edge log odds and class masks) is
/// built once; each syndrome then contributes only a particular solution.
struct ChainSpace<'g> {
    graph: &'g CheckGraph,
    active: Vec<usize>,
    log_ratio: Vec<f64>,
    class_mask: Vec<usize>,
    boundary: BitMatrix,
    kernel: Vec<BitVec>,
    kernel_mask: Vec<usize>,
}

impl<'g> ChainSpace<'g> {
    fn new(graph: &'g CheckGraph) -> Result<Self, DecodeError> {
        let mut active = Vec::new();
        let mut log_ratio = Vec::new();
        let mut class_mask = Vec::new();
        for (j, e) in graph.edges.iter().enumerate() {
            if e.p == 0.0 {
                continue;
            }
            if e.p >= 1.0 {
                return Err(DecodeError::BadProbability(e.p));
            }
            active.push(j);
            log_ratio.push((e.p / (1.0 - e.p)).ln());
            let mut m = 0usize;
            for (k, c) in graph.cocycles.iter().enumerate() {
                if c.get(j) {
                    m |= 1 << k;
                }
            }
            class_mask.push(m);
        }
        let mut boundary = BitMatrix::zeros(graph.n_v, active.len());
        for (a, &j) in active.iter().enumerate() {
            match graph.edges[j].ends {
                EdgeEnds::Two(u, v) => {
                    boundary.set(u, a, true);
                    boundary.set(v, a, true);
                }
                EdgeEnds::Dangling(v) => boundary.set(v, a, true),
            }
        }
        let kernel = boundary.kernel_basis();
        if kernel.len() > CYCLE_CAP {
            return Err(DecodeError::CapExceeded(kernel.len(), CYCLE_CAP));
        }
        let kernel_mask = kernel
            .iter()
            .map(|k| {
                let mut m = 0usize;
                for a in k.ones() {
                    m ^= class_mask[a];
                }
                m
            })
            .collect();
        Ok(ChainSpace { graph, active, log_ratio, class_mask, boundary, kernel, kernel_mask })
    }

    /// Particular solution in active-edge coordinates, or None if the
    /// syndrome cannot be produced by edges of nonzero probability.
    fn particular(&self, syn: &BitVec) -> Option<BitVec> {
        self.boundary.solve(syn)
    }

    fn log_weight(&self, chain: &BitVec) -> f64 {
        chain.ones().iter().map(|&a| self.log_ratio[a]).sum()
    }

    fn class(&self, chain: &BitVec) -> usize {
        let mut m = 0usize;
        for a in chain.ones() {
            m ^= self.class_mask[a];
        }
        m
    }

    /// Visits every chain with the given particular solution exactly once in
    /// Gray-code order, passing (chain, log weight, class). The log weight is
    /// maintained incrementally and resynchronized periodically to keep float
    /// drift below the tie tolerance.
    fn for_each(&self, base: &BitVec, mut f: impl FnMut(&BitVec, f64, usize)) {
        let mut cur = base.clone();
        let mut logw = self.log_weight(&cur);
        let mut class = self.class(&cur);
        f(&cur, logw, class);
        let steps = 1u64 << self.kernel.len();
        for step in 1..steps {
            let j = step.trailing_zeros() as usize;
            for a in self.kernel[j].ones() {
                if cur.get(a) {
                    logw -= self.log_ratio[a];
                } else {
                    logw += self.log_ratio[a];
                }
                cur.flip(a);
            }
            class ^= self.kernel_mask[j];
            if step & 0xFFFF == 0 {
                logw = self.log_weight(&cur);
            }
            f(&cur, logw, class);
        }
    }

    /// Active-coordinate chain lifted back to the full edge index space.
    fn expand(&self, chain: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.graph.n_edges());
        for a in chain.ones() {
            out.set(self.active[a], true);
        }
        out
    }
}

/// Exact maximum-likelihood decoding: per-class partition sums over every
/// chain matching the syndrome, normalized to a posterior; the winning class
/// is reported together with its single most likely chain.
pub fn ml_decode(g: &CheckGraph, syn: &BitVec) -> Result<MlDecision, DecodeError> {
    let cs = ChainSpace::new(g)?;
    let base = cs.particular(syn).ok_or(DecodeError::UnmatchedSyndrome)?;
    let n_classes = g.class_count();

    let mut best_logw = vec![f64::NEG_INFINITY; n_classes];
    let mut best_chain: Vec<Option<BitVec>> = vec![None; n_classes];
    cs.for_each(&base, |chain, logw, class| {
        if logw > best_logw[class] {
            best_logw[class] = logw;
            best_chain[class] = Some(chain.clone());
        }
    });
    let shift = best_logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sums = vec![0.0f64; n_classes];
    cs.for_each(&base, |_, logw, class| {
        sums[class] += (logw - shift).exp();
    });
    let total: f64 = sums.iter().sum();
    let probs: Vec<f64> = sums.iter().map(|s| s / total).collect();

    let top = probs.iter().cloned().fold(0.0f64, f64::max);
    let tied: Vec<usize> = (0..n_classes)
        .filter(|&c| probs[c] >= top - WEIGHT_EPS * top)
        .collect();
    let decision = if tied.len() == 1 {
        Decision::Class(tied[0])
    } else {
        Decision::Tie(tied)
    };
    let blue = cs.expand(best_chain[decision.chosen()].as_ref().expect("chosen class is nonempty"));
    debug_assert_eq!(&syndrome(g, &blue), syn);
    Ok(MlDecision { posterior: ClassPosterior { probs }, decision, blue })
}

/// Exact sample from the conditional distribution over chains with the given
/// boundary, with weights proportional to prod p_e/(1-p_e). Consumes exactly
/// one random number per call.
pub fn mc_decode(g: &CheckGraph, syn: &BitVec, rng: &mut impl Rng) -> Result<BitVec, DecodeError> {
    let cs = ChainSpace::new(g)?;
    let base = cs.particular(syn).ok_or(DecodeError::UnmatchedSyndrome)?;

    let mut shift = f64::NEG_INFINITY;
    cs.for_each(&base, |_, logw, _| {
        if logw > shift {
            shift = logw;
        }
    });
    let mut total = 0.0f64;
    cs.for_each(&base, |_, logw, _| total += (logw - shift).exp());
    let target = rng.gen::<f64>() * total;

    let mut acc = 0.0f64;
    let mut picked: Option<BitVec> = None;
    let mut last: Option<BitVec> = None;
    cs.for_each(&base, |chain, logw, _| {
        if picked.is_some() {
            return;
        }
        acc += (logw - shift).exp();
        if acc >= target {
            picked = Some(chain.clone());
        }
        last = Some(chain.clone());
    });
    // Float roundoff can leave the target a hair past the final prefix sum.
    let chain = picked.or(last).ok_or(DecodeError::UnmatchedSyndrome)?;
    let blue = cs.expand(&chain);
    debug_assert_eq!(&syndrome(g, &blue), syn);
    Ok(blue)
}

/// Minimum-weight decoding: Dijkstra distances between flagged vertices
/// (dangling edges feed a shared virtual boundary node), then exhaustive
/// minimum-weight pairing. Ties broken toward the lexicographically smaller
/// sorted edge-id set.
pub fn mwpm_decode(g: &CheckGraph, syn: &BitVec) -> Result<BitVec, DecodeError> {
    for e in &g.edges {
        if e.p > 0.5 + WEIGHT_EPS {
            return Err(DecodeError::HeavyEdge(e.p));
        }
    }
    let defects = syn.ones();
    if defects.len() > DEFECT_CAP {
        return Err(DecodeError::DefectCap(defects.len(), DEFECT_CAP));
    }
    if defects.is_empty() {
        return Ok(BitVec::zeros(g.n_edges()));
    }

    // Node n_v is the virtual boundary shared by all dangling edges.
    let boundary_node = g.n_v;
    let n_nodes = g.n_v + 1;
    let mut adj: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); n_nodes];
    let mut has_dangling = false;
    for (j, e) in g.edges.iter().enumerate() {
        if e.p == 0.0 {
            continue;
        }
        let w = ((1.0 - e.p) / e.p).ln();
        match e.ends {
            EdgeEnds::Two(u, v) => {
                adj[u].push((v, j, w));
                adj[v].push((u, j, w));
            }
            EdgeEnds::Dangling(v) => {
                adj[v].push((boundary_node, j, w));
                adj[boundary_node].push((v, j, w));
                has_dangling = true;
            }
        }
    }
    if !has_dangling && defects.len() % 2 == 1 {
        return Err(DecodeError::UnmatchedSyndrome);
    }

    // Dense Dijkstra from each defect, keeping one path per node; on equal
    // cost the lexicographically smaller sorted edge-id sequence wins.
    let dijkstra = |src: usize| -> Vec<(f64, Vec<usize>)> {
        let mut dist = vec![(f64::INFINITY, Vec::new()); n_nodes];
        dist[src].0 = 0.0;
        let mut done = vec![false; n_nodes];
        for _ in 0..n_nodes {
            let mut u = usize::MAX;
            let mut du = f64::INFINITY;
            for v in 0..n_nodes {
                if !done[v] && dist[v].0 < du {
                    du = dist[v].0;
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            for &(v, j, w) in &adj[u] {
                let nd = du + w;
                if nd < dist[v].0 - WEIGHT_EPS {
                    let mut path = dist[u].1.clone();
                    path.push(j);
                    dist[v] = (nd, path);
                } else if (nd - dist[v].0).abs() <= WEIGHT_EPS {
                    let mut path = dist[u].1.clone();
                    path.push(j);
                    let mut cand = path.clone();
                    cand.sort_unstable();
                    let mut have = dist[v].1.clone();
                    have.sort_unstable();
                    if cand < have {
                        dist[v] = (nd, path);
                    }
                }
            }
        }
        dist
    };
    let from_defect: Vec<Vec<(f64, Vec<usize>)>> =
        defects.iter().map(|&d| dijkstra(d)).collect();

    // Exhaustive pairing: each defect pairs with a later defect or with the
    // boundary (reusable). Cost ties fall back to the final correction's
    // sorted edge ids.
    let n_d = defects.len();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut pairs: Vec<(usize, Option<usize>)> = Vec::new();
    fn search(
        used: &mut Vec<bool>,
        pairs: &mut Vec<(usize, Option<usize>)>,
        cost: f64,
        n_d: usize,
        defects: &[usize],
        from_defect: &[Vec<(f64, Vec<usize>)>],
        boundary_node: usize,
        has_dangling: bool,
        g: &CheckGraph,
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        if let Some((bc, _)) = best {
            if cost > *bc + WEIGHT_EPS {
                return;
            }
        }
        let i = match used.iter().position(|u| !u) {
            Some(i) => i,
            None => {
                let mut blue = BitVec::zeros(g.n_edges());
                for &(i, m) in pairs.iter() {
                    let path = match m {
                        Some(j) => &from_defect[i][defects[j]].1,
                        None => &from_defect[i][boundary_node].1,
                    };
                    for &e in path {
                        blue.flip(e);
                    }
                }
                let mut ones = blue.ones();
                ones.sort_unstable();
                match best {
                    Some((bc, bo)) => {
                        if cost < *bc - WEIGHT_EPS || ((cost - *bc).abs() <= WEIGHT_EPS && ones < *bo)
                        {
                            *best = Some((cost, ones));
                        }
                    }
                    None => *best = Some((cost, ones)),
                }
                return;
            }
        };
        used[i] = true;
        for j in i + 1..n_d {
            if used[j] {
                continue;
            }
            let d = from_defect[i][defects[j]].0;
            if d.is_finite() {
                used[j] = true;
                pairs.push((i, Some(j)));
                search(used, pairs, cost + d, n_d, defects, from_defect, boundary_node, has_dangling, g, best);
                pairs.pop();
                used[j] = false;
            }
        }
        if has_dangling {
            let d = from_defect[i][boundary_node].0;
            if d.is_finite() {
                pairs.push((i, None));
                search(used, pairs, cost + d, n_d, defects, from_defect, boundary_node, has_dangling, g, best);
                pairs.pop();
            }
        }
        used[i] = false;
    }
    let mut used = vec![false; n_d];
    search(
        &mut used,
        &mut pairs,
        0.0,
        n_d,
        &defects,
        &from_defect,
        boundary_node,
        has_dangling,
        g,
        &mut best,
    );
    let (_, ones) = best.ok_or(DecodeError::UnmatchedSyndrome)?;
    let blue = BitVec::from_indices(g.n_edges(), &ones);
    debug_assert_eq!(&syndrome(g, &blue), syn);
    Ok(blue)
}

fn binomial(n: usize, m: usize) -> f64 {
    let mut b = 1.0f64;
    for i in 0..m {
        b = b * (n - i) as f64 / (i + 1) as f64;
    }
    b
}

fn sigmoid(e: f64) -> f64 {
    if e >= 0.0 {
        1.0 / (1.0 + (-e).exp())
    } else {
        let x = e.exp();
        x / (1.0 + x)
    }
}

/// Closed-form bound on the probability that a fixed cycle of length `len`
/// is colored exactly once by an exact-sampling decoder at error rate p:
/// sum_m C(len,m) p^m (1-p)^(len-m) * r^(len-2m)/(r^(len-2m)+1), r=p/(1-p).
/// The empty cycle gives 1/2. On a graph that is a single cycle of parallel
/// or ring edges the bound is met with equality.
pub fn peierls_bound(len: usize, p: f64) -> f64 {
    assert!(p > 0.0 && p < 0.5, "peierls_bound needs p in (0, 1/2)");
    let lr = (p / (1.0 - p)).ln();
    let mut total = 0.0f64;
    for m in 0..=len {
        let prob = binomial(len, m) * p.powi(m as i32) * (1.0 - p).powi((len - m) as i32);
        total += prob * sigmoid((len as i64 - 2 * m as i64) as f64 * lr);
    }
    total
}

/// Monte Carlo estimate (mean, sigma) of the probability that every edge of
/// `cycle` ends up once-colored after sampling errors and MC decoding.
pub fn once_colored_probability(
    g: &CheckGraph,
    cycle: &BitVec,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<(f64, f64), DecodeError> {
    assert!(trials > 0);
    let mut hits = 0usize;
    for _ in 0..trials {
        let red = sample_errors(g, rng);
        let syn = syndrome(g, &red);
        let blue = mc_decode(g, &syn, rng)?;
        let mut once = red.clone();
        once.xor_assign(&blue);
        once.and_assign(cycle);
        if &once == cycle {
            hits += 1;
        }
    }
    let mean = hits as f64 / trials as f64;
    let sigma = (mean * (1.0 - mean) / trials as f64).sqrt();
    Ok((mean, sigma))
}

/// Exact once-colored probability by full enumeration of disorder and of the
/// decoder's conditional distribution. Needs every edge probability in (0,1)
/// wherever `cycle` has support, and at most EXHAUSTIVE_CAP active edges.
pub fn once_colored_exact(g: &CheckGraph, cycle: &BitVec) -> Result<f64, DecodeError> {
    let cs = ChainSpace::new(g)?;
    for j in cycle.ones() {
        if g.edges[j].p == 0.0 {
            return Ok(0.0);
        }
    }
    let n_a = cs.active.len();
    if n_a > EXHAUSTIVE_CAP {
        return Err(DecodeError::CapExceeded(n_a, EXHAUSTIVE_CAP));
    }
    let cycle_active: Vec<bool> = cs.active.iter().map(|&j| cycle.get(j)).collect();
    let mut total_prob = 0.0f64;
    for mask in 0u64..(1u64 << n_a) {
        let mut red = BitVec::zeros(n_a);
        let mut p_red = 1.0f64;
        for a in 0..n_a {
            let p = g.edges[cs.active[a]].p;
            if mask >> a & 1 == 1 {
                red.set(a, true);
                p_red *= p;
            } else {
                p_red *= 1.0 - p;
            }
        }
        let syn = syndrome(g, &cs.expand(&red));
        let base = cs.particular(&syn).expect("red itself matches its syndrome");
        let mut z = 0.0f64;
        let mut covered = 0.0f64;
        cs.for_each(&base, |blue, logw, _| {
            let w = logw.exp();
            z += w;
            let mut all_once = true;
            for a in 0..n_a {
                if cycle_active[a] && blue.get(a) == red.get(a) {
                    all_once = false;
                    break;
                }
            }
            if all_once {
                covered += w;
            }
        });
        total_prob += p_red * covered / z;
    }
    Ok(total_prob)
}

/// Exact decoder-failure probability of maximum-likelihood decoding under the
/// graph's own error model: averages over every syndrome the posterior mass
/// of the classes the decoder does not pick (ties split uniformly among the
/// tied classes). Needs at most EXHAUSTIVE_CAP vertices.
pub fn exact_ml_failure(g: &CheckGraph) -> Result<f64, DecodeError> {
    let cs = ChainSpace::new(g)?;
    if g.n_v > EXHAUSTIVE_CAP {
        return Err(DecodeError::CapExceeded(g.n_v, EXHAUSTIVE_CAP));
    }
    let n_classes = g.class_count();
    let const_factor: f64 = cs.active.iter().map(|&j| 1.0 - g.edges[j].p).product();
    let mut fail_mass = 0.0f64;
    for s_mask in 0u64..(1u64 << g.n_v) {
        let mut syn = BitVec::zeros(g.n_v);
        for v in 0..g.n_v {
            if s_mask >> v & 1 == 1 {
                syn.set(v, true);
            }
        }
        let base = match cs.particular(&syn) {
            Some(b) => b,
            None => continue,
        };
        let mut sums = vec![0.0f64; n_classes];
        cs.for_each(&base, |_, logw, class| sums[class] += logw.exp());
        let top = sums.iter().cloned().fold(0.0f64, f64::max);
        let tied: Vec<usize> = (0..n_classes)
            .filter(|&c| sums[c] >= top - WEIGHT_EPS * top)
            .collect();
        for c in 0..n_classes {
            if tied.contains(&c) {
                fail_mass += sums[c] * (1.0 - 1.0 / tied.len() as f64);
            } else {
                fail_mass += sums[c];
            }
        }
    }
    Ok(const_factor * fail_mass)
}

/// Exact decoder-failure probability of the conditional sampler `mc_decode`
/// under the graph's own error model: the sampler picks class c with the
/// posterior probability of c, so per syndrome the failure mass is
/// sum_c P(c|s)(1 - P(c|s)). Needs at most EXHAUSTIVE_CAP vertices.
pub fn exact_mc_failure(g: &CheckGraph) -> Result<f64, DecodeError> {
    let cs = ChainSpace::new(g)?;
    if g.n_v > EXHAUSTIVE_CAP {
        return Err(DecodeError::CapExceeded(g.n_v, EXHAUSTIVE_CAP));
    }
    let n_classes = g.class_count();
    let const_factor: f64 = cs.active.iter().map(|&j| 1.0 - g.edges[j].p).product();
    let mut fail_mass = 0.0f64;
    for s_mask in 0u64..(1u64 << g.n_v) {
        let mut syn = BitVec::zeros(g.n_v);
        for v in 0..g.n_v {
            if s_mask >> v & 1 == 1 {
                syn.set(v, true);
            }
        }
        let base = match cs.particular(&syn) {
            Some(b) => b,
            None => continue,
        };
        let mut sums = vec![0.0f64; n_classes];
        cs.for_each(&base, |_, logw, class| sums[class] += logw.exp());
        let total: f64 = sums.iter().sum();
        for c in 0..n_classes {
            fail_mass += sums[c] * (1.0 - sums[c] / total);
        }
    }
    Ok(const_factor * fail_mass)
}

// ---------------------------------------------------------------------------
// Spacetime bulk with vacancies.

/// A qubit edge of the spatial square lattice. H joins (row, col) to
/// (row, col+1); V joins (row, col) to (row+1, col); on a torus the indices
/// wrap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpatialEdge {
    H { row: usize, col: usize },
    V { row: usize, col: usize },
}

impl std::str::FromStr for SpatialEdge {
    type Err = String;

    /// Parses "H:row:col" or "V:row:col".
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("bad spatial edge {s:?}, expected KIND:ROW:COL"));
        }
        let row = parts[1].parse::<usize>().map_err(|e| e.to_string())?;
        let col = parts[2].parse::<usize>().map_err(|e| e.to_string())?;
        match parts[0] {
            "H" | "h" => Ok(SpatialEdge::H { row, col }),
            "V" | "v" => Ok(SpatialEdge::V { row, col }),
            k => Err(format!("bad spatial edge kind {k:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryKind {
    Rough,
    Smooth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PatchSides {
    pub west: BoundaryKind,
    pub east: BoundaryKind,
    pub north: BoundaryKind,
    pub south: BoundaryKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Topology {
    Torus,
    Patch(PatchSides),
}

/// Surface patch with dead qubit edges, extended through time.
#[derive(Clone, Debug)]
pub struct VacancySpec {
    pub lx: usize,
    pub ly: usize,
    pub topology: Topology,
    pub dead: Vec<SpatialEdge>,
    /// Number of time slices; slice-to-slice measurement-error edges appear
    /// between consecutive slices, so t = 1 is the purely spatial graph.
    pub t: usize,
    /// Error probability shared by every edge of the bulk graph.
    pub p: f64,
}

/// What a spatial edge slot of the bulk became.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpatialKind {
    /// Surviving lattice edge.
    Grid(SpatialEdge),
    /// Lattice edge with one endpoint swallowed by a hole; it now runs from
    /// the hole center to the surviving endpoint.
    Spoke { hole: usize, grid_vertex: usize },
    /// Dangling edge contributed by a rough boundary vertex.
    Rough { grid_vertex: usize },
}

/// The bulk check graph plus the index maps needed to address it.
#[derive(Clone, Debug)]
pub struct BulkLayout {
    pub graph: CheckGraph,
    /// Spatial nodes per slice: live lattice vertices then hole centers.
    pub n_spatial: usize,
    pub n_live: usize,
    /// Spatial node ids of the hole centers.
    pub centers: Vec<usize>,
    pub slices: usize,
    /// Per-slice spatial edge descriptors, in edge-slot order.
    pub spatial_kinds: Vec<SpatialKind>,
    /// Live spatial node of each lattice vertex (row-major), None if removed.
    pub spatial_of_grid: Vec<Option<usize>>,
}

impl BulkLayout {
    pub fn node(&self, spatial: usize, slice: usize) -> usize {
        slice * self.n_spatial + spatial
    }

    pub fn spatial_edge(&self, slot: usize, slice: usize) -> usize {
        slice * self.spatial_kinds.len() + slot
    }

    pub fn timelike(&self, spatial: usize, layer: usize) -> usize {
        self.slices * self.spatial_kinds.len() + layer * self.n_spatial + spatial
    }

    pub fn center_dangling(&self, hole: usize, top: bool) -> usize {
        self.slices * self.spatial_kinds.len()
            + (self.slices - 1) * self.n_spatial
            + 2 * hole
            + top as usize
    }
}

/// Builds the spacetime check graph for a vacancy spec: cuts rectangular
/// holes out of the spatial lattice, adds one hole center per hole with one
/// spoke per hole-boundary vertex and fan 2-cells, takes the product with a
/// time interval (tube 2-cells per spatial edge per step), and derives the
/// logical cocycles from the boundary conditions.
pub fn build_bulk_graph(spec: &VacancySpec) -> Result<CheckGraph, DecodeError> {
    Ok(build_bulk_layout(spec)?.graph)
}

pub fn build_bulk_layout(spec: &VacancySpec) -> Result<BulkLayout, DecodeError> {
    let (lx, ly) = (spec.lx, spec.ly);
    if lx < 2 || ly < 2 {
        return Err(DecodeError::BadLattice(lx, ly));
    }
    assert!(spec.t >= 1, "need at least one time slice");
    if !(spec.p >= 0.0 && spec.p < 1.0) {
        return Err(DecodeError::BadProbability(spec.p));
    }
    let torus = spec.topology == Topology::Torus;
    let vid = |r: usize, c: usize| r * lx + c;

    // Lattice edges in a fixed order: H row-major, then V row-major.
    let mut grid_edges: Vec<(SpatialEdge, usize, usize)> = Vec::new();
    for r in 0..ly {
        let cmax = if torus { lx } else { lx - 1 };
        for c in 0..cmax {
            grid_edges.push((SpatialEdge::H { row: r, col: c }, vid(r, c), vid(r, (c + 1) % lx)));
        }
    }
    let rmax = if torus { ly } else { ly - 1 };
    for r in 0..rmax {
        for c in 0..lx {
            grid_edges.push((SpatialEdge::V { row: r, col: c }, vid(r, c), vid((r + 1) % ly, c)));
        }
    }
    let grid_index: std::collections::HashMap<SpatialEdge, usize> =
        grid_edges.iter().enumerate().map(|(i, &(e, _, _))| (e, i)).collect();

    // Dead edges must exist and, on a torus, must not wrap the seam.
    let mut dead = vec![false; grid_edges.len()];
    for &d in &spec.dead {
        let wraps = match d {
            SpatialEdge::H { col, .. } => col + 1 >= lx,
            SpatialEdge::V { row, .. } => row + 1 >= ly,
        };
        match grid_index.get(&d) {
            Some(&i) if !wraps => dead[i] = true,
            _ => return Err(DecodeError::BadDeadEdge(d)),
        }
    }

    let mut removed = vec![false; lx * ly];
    for (i, &(_, u, v)) in grid_edges.iter().enumerate() {
        if dead[i] {
            removed[u] = true;
            removed[v] = true;
        }
    }
    if !torus {
        for r in 0..ly {
            for c in 0..lx {
                if removed[vid(r, c)] && (r == 0 || r == ly - 1 || c == 0 || c == lx - 1) {
                    return Err(DecodeError::HoleTouchesBoundary);
                }
            }
        }
    }
    // Any lattice edge between two removed vertices must itself be dead.
    for (i, &(_, u, v)) in grid_edges.iter().enumerate() {
        if !dead[i] && removed[u] && removed[v] {
            return Err(DecodeError::RaggedHole);
        }
    }

    // Holes: connected components of removed vertices under dead edges.
    let mut hole_of = vec![usize::MAX; lx * ly];
    let mut holes: Vec<(usize, usize, usize, usize)> = Vec::new();
    for start in 0..lx * ly {
        if !removed[start] || hole_of[start] != usize::MAX {
            continue;
        }
        let h = holes.len();
        let mut stack = vec![start];
        hole_of[start] = h;
        let (mut r0, mut r1, mut c0, mut c1) = (ly, 0usize, lx, 0usize);
        while let Some(u) = stack.pop() {
            let (r, c) = (u / lx, u % lx);
            r0 = r0.min(r);
            r1 = r1.max(r);
            c0 = c0.min(c);
            c1 = c1.max(c);
            for (i, &(_, a, b)) in grid_edges.iter().enumerate() {
                if dead[i] {
                    let other = if a == u {
                        b
                    } else if b == u {
                        a
                    } else {
                        continue;
                    };
                    if hole_of[other] == usize::MAX {
                        hole_of[other] = h;
                        stack.push(other);
                    }
                }
            }
        }
        holes.push((r0, r1, c0, c1));
    }
    // Each hole must fill its bounding rectangle.
    for (h, &(r0, r1, c0, c1)) in holes.iter().enumerate() {
        for r in r0..=r1 {
            for c in c0..=c1 {
                if !removed[vid(r, c)] || hole_of[vid(r, c)] != h {
                    return Err(DecodeError::RaggedHole);
                }
            }
        }
    }

    // Live lattice vertices keep row-major order; hole centers follow.
    let mut spatial_of_grid = vec![None; lx * ly];
    let mut n_live = 0usize;
    for u in 0..lx * ly {
        if !removed[u] {
            spatial_of_grid[u] = Some(n_live);
            n_live += 1;
        }
    }
    let centers: Vec<usize> = (0..holes.len()).map(|h| n_live + h).collect();
    let n_spatial = n_live + holes.len();

    // Spatial edge slots: surviving lattice edges (spokes keep the slot of
    // the lattice edge they came from), then rough danglings side by side.
    let mut spatial_ends: Vec<EdgeEnds> = Vec::new();
    let mut spatial_kinds: Vec<SpatialKind> = Vec::new();
    let mut slot_of_grid_edge = vec![None; grid_edges.len()];
    for (i, &(e, u, v)) in grid_edges.iter().enumerate() {
        if dead[i] {
            continue;
        }
        let slot = spatial_ends.len();
        slot_of_grid_edge[i] = Some(slot);
        match (spatial_of_grid[u], spatial_of_grid[v]) {
            (Some(a), Some(b)) => {
                spatial_ends.push(EdgeEnds::Two(a, b));
                spatial_kinds.push(SpatialKind::Grid(e));
            }
            (None, Some(b)) => {
                spatial_ends.push(EdgeEnds::Two(centers[hole_of[u]], b));
                spatial_kinds.push(SpatialKind::Spoke { hole: hole_of[u], grid_vertex: v });
            }
            (Some(a), None) => {
                spatial_ends.push(EdgeEnds::Two(a, centers[hole_of[v]]));
                spatial_kinds.push(SpatialKind::Spoke { hole: hole_of[v], grid_vertex: u });
            }
            (None, None) => unreachable!("edges inside a hole are dead"),
        }
    }
    let mut rough_vertices: Vec<usize> = Vec::new();
    if let Topology::Patch(sides) = &spec.topology {
        if sides.west == BoundaryKind::Rough {
            rough_vertices.extend((0..ly).map(|r| vid(r, 0)));
        }
        if sides.east == BoundaryKind::Rough {
            rough_vertices.extend((0..ly).map(|r| vid(r, lx - 1)));
        }
        if sides.north == BoundaryKind::Rough {
            rough_vertices.extend((0..lx).map(|c| vid(0, c)));
        }
        if sides.south == BoundaryKind::Rough {
            rough_vertices.extend((0..lx).map(|c| vid(ly - 1, c)));
        }
    }
    let mut rough_slot: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    for &u in &rough_vertices {
        let slot = spatial_ends.len();
        rough_slot.insert(u, slot);
        spatial_ends.push(EdgeEnds::Dangling(spatial_of_grid[u].expect("rough vertex is live")));
        spatial_kinds.push(SpatialKind::Rough { grid_vertex: u });
    }
    let spb = spatial_ends.len();

    // Spatial 2-cells: plaquettes with dead edges dropped (what remains is a
    // fan triangle or corner quad around a hole), plus rough half-cells.
    let mut spatial_cells: Vec<Vec<usize>> = Vec::new();
    let pr = if torus { ly } else { ly - 1 };
    let pc = if torus { lx } else { lx - 1 };
    for r in 0..pr {
        for c in 0..pc {
            let around = [
                SpatialEdge::H { row: r, col: c },
                SpatialEdge::V { row: r, col: (c + 1) % lx },
                SpatialEdge::H { row: (r + 1) % ly, col: c },
                SpatialEdge::V { row: r, col: c },
            ];
            let mut cell = Vec::new();
            for e in around {
                if let Some(slot) = slot_of_grid_edge[grid_index[&e]] {
                    cell.push(slot);
                }
            }
            if !cell.is_empty() {
                spatial_cells.push(cell);
            }
        }
    }
    if let Topology::Patch(sides) = &spec.topology {
        if sides.west == BoundaryKind::Rough {
            for r in 0..ly - 1 {
                let v = grid_index[&SpatialEdge::V { row: r, col: 0 }];
                spatial_cells.push(vec![
                    rough_slot[&vid(r, 0)],
                    rough_slot[&vid(r + 1, 0)],
                    slot_of_grid_edge[v].expect("boundary edges survive"),
                ]);
            }
        }
        if sides.east == BoundaryKind::Rough {
            for r in 0..ly - 1 {
                let v = grid_index[&SpatialEdge::V { row: r, col: lx - 1 }];
                spatial_cells.push(vec![
                    rough_slot[&vid(r, lx - 1)],
                    rough_slot[&vid(r + 1, lx - 1)],
                    slot_of_grid_edge[v].expect("boundary edges survive"),
                ]);
            }
        }
        if sides.north == BoundaryKind::Rough {
            for c in 0..lx - 1 {
                let h = grid_index[&SpatialEdge::H { row: 0, col: c }];
                spatial_cells.push(vec![
                    rough_slot[&vid(0, c)],
                    rough_slot[&vid(0, c + 1)],
                    slot_of_grid_edge[h].expect("boundary edges survive"),
                ]);
            }
        }
        if sides.south == BoundaryKind::Rough {
            for c in 0..lx - 1 {
                let h = grid_index[&SpatialEdge::H { row: ly - 1, col: c }];
                spatial_cells.push(vec![
                    rough_slot[&vid(ly - 1, c)],
                    rough_slot[&vid(ly - 1, c + 1)],
                    slot_of_grid_edge[h].expect("boundary edges survive"),
                ]);
            }
        }
    }

    // Logical cocycles: a cut of H edges between two hole-free columns (and
    // the analogous row cut where the boundary conditions call for it).
    let col_clear = |c: usize| (0..ly).all(|r| !removed[vid(r, c)]);
    let row_clear = |r: usize| (0..lx).all(|c| !removed[vid(r, c)]);
    let mut cut_supports: Vec<Vec<usize>> = Vec::new();
    let want_h_cut = match &spec.topology {
        Topology::Torus => true,
        Topology::Patch(s) => s.west == BoundaryKind::Rough && s.east == BoundaryKind::Rough,
    };
    let want_v_cut = match &spec.topology {
        Topology::Torus => true,
        Topology::Patch(s) => s.north == BoundaryKind::Rough && s.south == BoundaryKind::Rough,
    };
    if want_h_cut {
        let cmax = if torus { lx } else { lx - 1 };
        let hc = (0..cmax)
            .find(|&c| col_clear(c) && col_clear((c + 1) % lx))
            .ok_or(DecodeError::NoClearColumn)?;
        let support: Vec<usize> = (0..ly)
            .map(|r| {
                slot_of_grid_edge[grid_index[&SpatialEdge::H { row: r, col: hc }]]
                    .expect("cut column is hole-free")
            })
            .collect();
        cut_supports.push(support);
    }
    if want_v_cut {
        let rmax2 = if torus { ly } else { ly - 1 };
        let hr = (0..rmax2)
            .find(|&r| row_clear(r) && row_clear((r + 1) % ly))
            .ok_or(DecodeError::NoClearColumn)?;
        let support: Vec<usize> = (0..lx)
            .map(|c| {
                slot_of_grid_edge[grid_index[&SpatialEdge::V { row: hr, col: c }]]
                    .expect("cut row is hole-free")
            })
            .collect();
        cut_supports.push(support);
    }

    // Product with the time interval.
    let slices = spec.t;
    let n_v = n_spatial * slices;
    let node = |s: usize, slice: usize| slice * n_spatial + s;
    let mut edges: Vec<CheckEdge> = Vec::new();
    for slice in 0..slices {
        for ends in &spatial_ends {
            let mapped = match *ends {
                EdgeEnds::Two(a, b) => EdgeEnds::Two(node(a, slice), node(b, slice)),
                EdgeEnds::Dangling(v) => EdgeEnds::Dangling(node(v, slice)),
            };
            edges.push(CheckEdge { ends: mapped, p: spec.p });
        }
    }
    for layer in 0..slices - 1 {
        for s in 0..n_spatial {
            edges.push(CheckEdge {
                ends: EdgeEnds::Two(node(s, layer), node(s, layer + 1)),
                p: spec.p,
            });
        }
    }
    for &center in &centers {
        edges.push(CheckEdge { ends: EdgeEnds::Dangling(node(center, 0)), p: spec.p });
        edges.push(CheckEdge { ends: EdgeEnds::Dangling(node(center, slices - 1)), p: spec.p });
    }
    let n_e = edges.len();
    let spatial_edge_id = |slot: usize, slice: usize| slice * spb + slot;
    let timelike_id = |s: usize, layer: usize| slices * spb + layer * n_spatial + s;

    let mut two_cells: Vec<BitVec> = Vec::new();
    for slice in 0..slices {
        for cell in &spatial_cells {
            let ids: Vec<usize> = cell.iter().map(|&slot| spatial_edge_id(slot, slice)).collect();
            two_cells.push(BitVec::from_indices(n_e, &ids));
        }
    }
    for layer in 0..slices - 1 {
        for (slot, ends) in spatial_ends.iter().enumerate() {
            let mut ids = vec![spatial_edge_id(slot, layer), spatial_edge_id(slot, layer + 1)];
            match *ends {
                EdgeEnds::Two(a, b) => {
                    ids.push(timelike_id(a, layer));
                    ids.push(timelike_id(b, layer));
                }
                EdgeEnds::Dangling(v) => ids.push(timelike_id(v, layer)),
            }
            two_cells.push(BitVec::from_indices(n_e, &ids));
        }
    }

    let cocycles: Vec<BitVec> = cut_supports
        .iter()
        .map(|support| {
            let mut ids = Vec::with_capacity(support.len() * slices);
            for slice in 0..slices {
                for &slot in support {
                    ids.push(spatial_edge_id(slot, slice));
                }
            }
            BitVec::from_indices(n_e, &ids)
        })
        .collect();

    let mut coords = vec![(0.0, 0.0, 0.0); n_v];
    for slice in 0..slices {
        for u in 0..lx * ly {
            if let Some(s) = spatial_of_grid[u] {
                coords[node(s, slice)] = ((u % lx) as f64, (u / lx) as f64, slice as f64);
            }
        }
        for (h, &(r0, r1, c0, c1)) in holes.iter().enumerate() {
            coords[node(centers[h], slice)] =
                ((c0 + c1) as f64 / 2.0, (r0 + r1) as f64 / 2.0, slice as f64);
        }
    }

    let graph = CheckGraph::with_coords(n_v, edges, cocycles, two_cells, Some(coords))?;

    // Every nonzero combination of cocycles must define a nontrivial class.
    let boundary = graph.boundary_matrix();
    let mut rows = RowSpace::new();
    for v in 0..graph.n_vertices() {
        rows.insert(boundary.row(v));
    }
    let n_c = graph.cocycles().len();
    for combo in 1usize..1 << n_c {
        let mut z = BitVec::zeros(graph.n_edges());
        for (k, c) in graph.cocycles().iter().enumerate() {
            if combo >> k & 1 == 1 {
                z.xor_assign(c);
            }
        }
        if rows.contains(&z) {
            return Err(DecodeError::Disconnected);
        }
    }

    Ok(BulkLayout {
        graph,
        n_spatial,
        n_live,
        centers,
        slices,
        spatial_kinds,
        spatial_of_grid,
    })
}

// ---------------------------------------------------------------------------
// Idealized single-hole bulk and the two-step decoder.

/// Spacetime star graph of one hole center: d rim vertices per slice, one
/// spoke per rim vertex per slice, timelike edges on rim and center columns,
/// and dangling timelike ends on the center column (its first and last
/// measurements carry no reference). The companion `modified` graph deletes
/// the center column and turns every spoke into a dangling edge; its edge
/// ids coincide with the full graph on the shared prefix.
#[derive(Clone, Debug)]
pub struct HoleStarBulk {
    pub d: usize,
    /// Timelike layers; the graph has t + 1 slices.
    pub t: usize,
    pub p: f64,
    pub graph: CheckGraph,
    pub modified: CheckGraph,
    pub n_modified_edges: usize,
    pub has_exits: bool,
}

impl HoleStarBulk {
    pub fn rim(&self, i: usize, s: usize) -> usize {
        s * (self.d + 1) + i
    }

    pub fn center(&self, s: usize) -> usize {
        s * (self.d + 1) + self.d
    }

    pub fn spoke(&self, i: usize, s: usize) -> usize {
        s * self.d + i
    }

    pub fn rim_timelike(&self, i: usize, s: usize) -> usize {
        (self.t + 1) * self.d + s * self.d + i
    }

    /// Dangling spacelike edge leading away from rim vertex i at slice s;
    /// present only when the bulk was built with exits.
    pub fn exit(&self, i: usize, s: usize) -> Option<usize> {
        if self.has_exits {
            Some((2 * self.t + 1) * self.d + s * self.d + i)
        } else {
            None
        }
    }

    pub fn center_timelike(&self, s: usize) -> usize {
        let exits = if self.has_exits { (self.t + 1) * self.d } else { 0 };
        (2 * self.t + 1) * self.d + exits + s
    }

    pub fn center_dangling(&self, top: bool) -> usize {
        self.center_timelike(self.t) + top as usize
    }

    /// Image of a full-graph edge in the modified graph, if it survives.
    pub fn modified_edge(&self, e: usize) -> Option<usize> {
        if e < self.n_modified_edges {
            Some(e)
        } else {
            None
        }
    }
}

/// Star bulk with every edge at probability p.
pub fn hole_star_bulk(d: usize, t: usize, p: f64) -> Result<HoleStarBulk, DecodeError> {
    build_star(d, t, p, None)
}

/// Star bulk whose rim vertices also carry a dangling spacelike exit edge
/// per slice at probability p_exit, standing in for the surrounding surface.
pub fn hole_star_bulk_with_exits(
    d: usize,
    t: usize,
    p: f64,
    p_exit: f64,
) -> Result<HoleStarBulk, DecodeError> {
    build_star(d, t, p, Some(p_exit))
}

fn build_star(d: usize, t: usize, p: f64, exits: Option<f64>) -> Result<HoleStarBulk, DecodeError> {
    assert!(d >= 1 && t >= 1);
    let slices = t + 1;
    let rim = |i: usize, s: usize| s * (d + 1) + i;
    let center = |s: usize| s * (d + 1) + d;
    let rim_mod = |i: usize, s: usize| s * d + i;

    // Shared prefix (spokes, rim timelike, exits), then the center column.
    let mut full: Vec<CheckEdge> = Vec::new();
    let mut modified: Vec<CheckEdge> = Vec::new();
    for s in 0..slices {
        for i in 0..d {
            full.push(CheckEdge { ends: EdgeEnds::Two(rim(i, s), center(s)), p });
            modified.push(CheckEdge { ends: EdgeEnds::Dangling(rim_mod(i, s)), p });
        }
    }
    for s in 0..t {
        for i in 0..d {
            full.push(CheckEdge { ends: EdgeEnds::Two(rim(i, s), rim(i, s + 1)), p });
            modified.push(CheckEdge { ends: EdgeEnds::Two(rim_mod(i, s), rim_mod(i, s + 1)), p });
        }
    }
    if let Some(pe) = exits {
        for s in 0..slices {
            for i in 0..d {
                full.push(CheckEdge { ends: EdgeEnds::Dangling(rim(i, s)), p: pe });
                modified.push(CheckEdge { ends: EdgeEnds::Dangling(rim_mod(i, s)), p: pe });
            }
        }
    }
    let n_modified_edges = full.len();
    for s in 0..t {
        full.push(CheckEdge { ends: EdgeEnds::Two(center(s), center(s + 1)), p });
    }
    full.push(CheckEdge { ends: EdgeEnds::Dangling(center(0)), p });
    full.push(CheckEdge { ends: EdgeEnds::Dangling(center(t)), p });
    let n_e = full.len();
    let n_e_mod = modified.len();

    let spoke = |i: usize, s: usize| s * d + i;
    let rim_tl = |i: usize, s: usize| slices * d + s * d + i;
    let exit_id = |i: usize, s: usize| (2 * t + 1) * d + s * d + i;
    let exit_count = if exits.is_some() { slices * d } else { 0 };
    let center_tl = |s: usize| (2 * t + 1) * d + exit_count + s;
    let bottom = center_tl(t);

    let mut cells_full: Vec<BitVec> = Vec::new();
    let mut cells_mod: Vec<BitVec> = Vec::new();
    for s in 0..t {
        for i in 0..d {
            cells_full.push(BitVec::from_indices(
                n_e,
                &[spoke(i, s), spoke(i, s + 1), rim_tl(i, s), center_tl(s)],
            ));
            cells_mod.push(BitVec::from_indices(
                n_e_mod,
                &[spoke(i, s), spoke(i, s + 1), rim_tl(i, s)],
            ));
            if exits.is_some() {
                cells_full.push(BitVec::from_indices(
                    n_e,
                    &[exit_id(i, s), exit_id(i, s + 1), rim_tl(i, s)],
                ));
                cells_mod.push(BitVec::from_indices(
                    n_e_mod,
                    &[exit_id(i, s), exit_id(i, s + 1), rim_tl(i, s)],
                ));
            }
        }
    }

    // The class is the parity of the chain across the bottom of the center
    // column; the modified graph keeps no class structure of its own.
    let cocycle = BitVec::from_indices(n_e, &[bottom]);
    let graph = CheckGraph::new(slices * (d + 1), full, vec![cocycle], cells_full)?;
    let modified = CheckGraph::new(slices * d, modified, Vec::new(), cells_mod)?;
    Ok(HoleStarBulk {
        d,
        t,
        p,
        graph,
        modified,
        n_modified_edges,
        has_exits: exits.is_some(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Success,
    Failure,
    /// Exactly half the layers saw an overall error (even layer counts only);
    /// aggregate statistics count this as failure with probability 1/2.
    Tie,
}

#[derive(Clone, Debug)]
pub struct TwoStepOutcome {
    pub blue: BitVec,
    /// Per-layer overall errors: parity of once-colored timelike edges
    /// between consecutive slices (center end danglings belong to no layer).
    pub overall: Vec<bool>,
    pub overall_count: usize,
    /// Failure iff overall errors occur in more than half the layers.
    pub verdict: Verdict,
    /// Whether the once-colored set crosses the hole cocycle.
    pub class_flip: bool,
}

/// Two-step decoding around one hole: first an exact Monte Carlo correction
/// on the modified graph (center column deleted, spokes dangling), then the
/// lighter of the two completions of the center column consistent with the
/// center's own detection events.
pub fn two_step_hole_decoder(
    bulk: &HoleStarBulk,
    red: &BitVec,
    rng: &mut impl Rng,
) -> Result<TwoStepOutcome, DecodeError> {
    let (d, t) = (bulk.d, bulk.t);
    let syn = syndrome(&bulk.graph, red);

    let mut syn_mod = BitVec::zeros(bulk.modified.n_vertices());
    for s in 0..=t {
        for i in 0..d {
            syn_mod.set(s * d + i, syn.get(bulk.rim(i, s)));
        }
    }
    let blue_mod = mc_decode(&bulk.modified, &syn_mod, rng)?;
    let mut blue = BitVec::zeros(bulk.graph.n_edges());
    for e in blue_mod.ones() {
        blue.set(e, true);
    }

    // Required column parity at each slice, from the center detection events
    // and the spokes already chosen in step one.
    let mut a = vec![false; t + 1];
    for (s, slot) in a.iter_mut().enumerate() {
        let mut x = syn.get(bulk.center(s));
        for i in 0..d {
            x ^= blue.get(bulk.spoke(i, s));
        }
        *slot = x;
    }
    // The center column is a path with dangling ends, so exactly two
    // completions match; take the lighter one (first on ties).
    let mut best: Option<(usize, Vec<bool>)> = None;
    for start in [false, true] {
        let mut bits = Vec::with_capacity(t + 2);
        bits.push(start);
        let mut prev = start;
        for &req in a.iter().take(t) {
            let cur = req ^ prev;
            bits.push(cur);
            prev = cur;
        }
        bits.push(a[t] ^ prev);
        let weight = bits.iter().filter(|&&b| b).count();
        if best.as_ref().map_or(true, |(w, _)| weight < *w) {
            best = Some((weight, bits));
        }
    }
    let (_, bits) = best.expect("two completions exist");
    if bits[0] {
        blue.set(bulk.center_dangling(false), true);
    }
    for s in 0..t {
        if bits[s + 1] {
            blue.set(bulk.center_timelike(s), true);
        }
    }
    if bits[t + 1] {
        blue.set(bulk.center_dangling(true), true);
    }
    assert_eq!(syndrome(&bulk.graph, &blue), syn, "completed correction matches the syndrome");

    let mut once = red.clone();
    once.xor_assign(&blue);
    let mut overall = Vec::with_capacity(t);
    for s in 0..t {
        let mut parity = once.get(bulk.center_timelike(s));
        for i in 0..d {
            parity ^= once.get(bulk.rim_timelike(i, s));
        }
        overall.push(parity);
    }
    let overall_count = overall.iter().filter(|&&b| b).count();
    let verdict = match (2 * overall_count).cmp(&t) {
        std::cmp::Ordering::Greater => Verdict::Failure,
        std::cmp::Ordering::Less => Verdict::Success,
        std::cmp::Ordering::Equal => Verdict::Tie,
    };
    let class_flip = once.get(bulk.center_dangling(false));
    Ok(TwoStepOutcome { blue, overall, overall_count, verdict, class_flip })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_parallel(p: f64) -> CheckGraph {
        CheckGraph::new(
            2,
            vec![
                CheckEdge { ends: EdgeEnds::Two(0, 1), p },
                CheckEdge { ends: EdgeEnds::Two(0, 1), p },
            ],
            vec![BitVec::from_indices(2, &[0])],
            vec![],
        )
        .unwrap()
    }

    /// Ring of n vertices with one edge between consecutive vertices.
    fn cycle_graph(n: usize, p: f64) -> CheckGraph {
        if n == 2 {
            return two_parallel(p);
        }
        let edges = (0..n)
            .map(|i| CheckEdge { ends: EdgeEnds::Two(i, (i + 1) % n), p })
            .collect();
        CheckGraph::new(n, edges, vec![BitVec::from_indices(n, &[0])], vec![]).unwrap()
    }

    /// Ring of tt vertices with d parallel edges between consecutive ones.
    fn column_graph(tt: usize, d: usize, p: f64) -> CheckGraph {
        let mut edges = Vec::new();
        let mut cells = Vec::new();
        for s in 0..tt {
            for k in 0..d {
                edges.push(CheckEdge { ends: EdgeEnds::Two(s, (s + 1) % tt), p });
                if k > 0 {
                    cells.push(BitVec::from_indices(tt * d, &[s * d, s * d + k]));
                }
            }
        }
        let cocycle = BitVec::from_indices(tt * d, &(0..d).collect::<Vec<_>>());
        CheckGraph::new(tt, edges, vec![cocycle], cells).unwrap()
    }

    #[test]
    fn construction_validation() {
        let bad_p = CheckGraph::new(
            1,
            vec![CheckEdge { ends: EdgeEnds::Dangling(0), p: 1.5 }],
            vec![],
            vec![],
        );
        assert!(matches!(bad_p, Err(DecodeError::BadProbability(_))));
        let nan = CheckGraph::new(
            1,
            vec![CheckEdge { ends: EdgeEnds::Dangling(0), p: f64::NAN }],
            vec![],
            vec![],
        );
        assert!(matches!(nan, Err(DecodeError::BadProbability(_))));
        let loopy = CheckGraph::new(
            1,
            vec![CheckEdge { ends: EdgeEnds::Two(0, 0), p: 0.1 }],
            vec![],
            vec![],
        );
        assert!(matches!(loopy, Err(DecodeError::SelfLoop(0))));
        let oob = CheckGraph::new(
            1,
            vec![CheckEdge { ends: EdgeEnds::Two(0, 1), p: 0.1 }],
            vec![],
            vec![],
        );
        assert!(matches!(oob, Err(DecodeError::BadVertex(0, 1))));
        let open = CheckGraph::new(
            2,
            vec![CheckEdge { ends: EdgeEnds::Two(0, 1), p: 0.1 }],
            vec![],
            vec![BitVec::from_indices(1, &[0])],
        );
        assert!(matches!(open, Err(DecodeError::OpenCell(0))));
        let odd = CheckGraph::new(
            2,
            vec![
                CheckEdge { ends: EdgeEnds::Two(0, 1), p: 0.1 },
                CheckEdge { ends: EdgeEnds::Two(0, 1), p: 0.1 },
            ],
            vec![BitVec::from_indices(2, &[0])],
            vec![BitVec::from_indices(2, &[0, 1])],
        );
        assert!(matches!(odd, Err(DecodeError::CocycleCellOverlap(0, 0))));
    }

    #[test]
    fn syndrome_examples() {
        let g = CheckGraph::new(
            3,
            vec![
                CheckEdge { ends: EdgeEnds::Two(0, 1), p: 0.1 },
                CheckEdge { ends: EdgeEnds::Two(1, 2), p: 0.1 },
                CheckEdge { ends: EdgeEnds::Dangling(2), p: 0.1 },
            ],
            vec![],
            vec![],
        )
        .unwrap();
        assert!(syndrome(&g, &BitVec::zeros(3)).is_zero());
        assert_eq!(syndrome(&g, &BitVec::from_indices(3, &[0])).ones(), vec![0, 1]);
        assert_eq!(syndrome(&g, &BitVec::from_indices(3, &[2])).ones(), vec![2]);
        assert_eq!(syndrome(&g, &BitVec::from_indices(3, &[1, 2])).ones(), vec![1]);
    }

    #[test]
    fn sampling_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let zeros = cycle_graph(4, 0.0);
        // p = 1 is the degenerate always-fires case, allowed for sampling.
        let ones = CheckGraph::new(
            2,
            vec![
                CheckEdge { ends: EdgeEnds::Two(0, 1), p: 1.0 },
                CheckEdge { ends: EdgeEnds::Two(0, 1), p: 1.0 },
            ],
            vec![],
            vec![],
        )
        .unwrap();
        for _ in 0..20 {
            assert!(sample_errors(&zeros, &mut rng).is_zero());
            assert_eq!(sample_errors(&ones, &mut rng).weight(), 2);
        }
        let half = cycle_graph(20, 0.5);
        let trials = 10_000usize;
        let mut total = 0usize;
        for _ in 0..trials {
            total += sample_errors(&half, &mut rng).weight();
        }
        let mean = total as f64 / trials as f64;
        let sigma = (20.0 * 0.25 / trials as f64).sqrt();
        assert!((mean - 10.0).abs() <= 3.0 * sigma, "mean weight {mean}");
    }

    #[test]
    fn ml_two_parallel_edges() {
        let g = two_parallel(0.1);
        let ml = ml_decode(&g, &BitVec::zeros(2)).unwrap();
        let p_nontrivial = 1.0 / 82.0;
        assert!((ml.posterior.probs[1] - p_nontrivial).abs() < 1e-12);
        assert!((ml.posterior.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(ml.decision, Decision::Class(0));
        assert!(ml.blue.is_zero());

        let both = ml_decode(&g, &BitVec::from_indices(2, &[0, 1])).unwrap();
        assert_eq!(both.decision, Decision::Tie(vec![0, 1]));
        assert!((both.posterior.probs[0] - 0.5).abs() < 1e-12);
        assert!((both.posterior.probs[1] - 0.5).abs() < 1e-12);
        // First tied class is 0; its only chain is the second edge.
        assert_eq!(both.blue.ones(), vec![1]);
    }

    #[test]
    fn ml_zero_probability_edges_are_excluded() {
        let g = CheckGraph::new(
            2,
            vec![
                CheckEdge { ends: EdgeEnds::Two(0, 1), p: 0.1 },
                CheckEdge { ends: EdgeEnds::Two(0, 1), p: 0.1 },
                CheckEdge { ends: EdgeEnds::Two(0, 1), p: 0.0 },
            ],
            vec![BitVec::from_indices(3, &[0])],
            vec![BitVec::from_indices(3, &[1, 2])],
        )
        .unwrap();
        let ml = ml_decode(&g, &BitVec::zeros(2)).unwrap();
        assert!((ml.posterior.probs[1] - 1.0 / 82.0).abs() < 1e-12);

        let lonely = CheckGraph::new(
            1,
            vec![CheckEdge { ends: EdgeEnds::Dangling(0), p: 0.0 }],
            vec![],
            vec![],
        )
        .unwrap();
        let r = ml_decode(&lonely, &BitVec::from_indices(1, &[0]));
        assert!(matches!(r, Err(DecodeError::UnmatchedSyndrome)));
    }

    #[test]
    fn ml_cycle_cap() {
        let edges = (0..CYCLE_CAP + 2)
            .map(|_| CheckEdge { ends: EdgeEnds::Two(0, 1), p: 0.1 })
            .collect();
        let g = CheckGraph::new(2, edges, vec![], vec![]).unwrap();
        let r = ml_decode(&g, &BitVec::zeros(2));
        assert!(matches!(r, Err(DecodeError::CapExceeded(n, CYCLE_CAP)) if n == CYCLE_CAP + 1));
    }

    #[test]
    fn mc_single_chain_is_deterministic() {
        let g = CheckGraph::new(
            3,
            vec![
                CheckEdge { ends: EdgeEnds::Two(0, 1), p: 0.2 },
                CheckEdge { ends: EdgeEnds::Two(1, 2), p: 0.2 },
            ],
            vec![],
            vec![],
        )
        .unwrap();
        let syn = BitVec::from_indices(3, &[0, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            assert_eq!(mc_decode(&g, &syn, &mut rng).unwrap().ones(), vec![0, 1]);
        }
    }

    #[test]
    fn mc_class_frequencies_match_ml() {
        let g = two_parallel(0.1);
        let syn = BitVec::zeros(2);
        let ml = ml_decode(&g, &syn).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let trials = 20_000usize;
        let mut nontrivial = 0usize;
        for _ in 0..trials {
            let blue = mc_decode(&g, &syn, &mut rng).unwrap();
            if g.class_of(&blue) == 1 {
                nontrivial += 1;
            }
        }
        let freq = nontrivial as f64 / trials as f64;
        let p1 = ml.posterior.probs[1];
        let sigma = (p1 * (1.0 - p1) / trials as f64).sqrt();
        assert!(
            (freq - p1).abs() <= 3.0 * sigma,
            "frequency {freq} vs posterior {p1}"
        );
    }

    #[test]
    fn mc_error_rate_is_two_p_one_minus_p() {
        // One detection event with two dangling edges: the first at q, the
        // second at exactly 1/2. Given either syndrome, the posterior of the
        // nontrivial class is q, so an exact-sampling decoder errs with
        // probability 2q(1-q).
        let q = 0.3;
        let g = CheckGraph::new(
            1,
            vec![
                CheckEdge { ends: EdgeEnds::Dangling(0), p: q },
                CheckEdge { ends: EdgeEnds::Dangling(0), p: 0.5 },
            ],
            vec![BitVec::from_indices(2, &[0])],
            vec![],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let trials = 100_000usize;
        let mut fails = 0usize;
        for _ in 0..trials {
            let red = sample_errors(&g, &mut rng);
            let syn = syndrome(&g, &red);
            let blue = mc_decode(&g, &syn, &mut rng).unwrap();
            if g.class_of(&blue) != g.class_of(&red) {
                fails += 1;
            }
        }
        let rate = fails as f64 / trials as f64;
        let expect = 2.0 * q * (1.0 - q);
        let sigma = (expect * (1.0 - expect) / trials as f64).sqrt();
        assert!((rate - expect).abs() <= 3.0 * sigma, "rate {rate} vs {expect}");
    }

    #[test]
    fn mwpm_examples() {
        let path = CheckGraph::new(
            3,
            vec![
                CheckEdge { ends: EdgeEnds::Two(0, 1), p: 0.1 },
                CheckEdge { ends: EdgeEnds::Two(1, 2), p: 0.1 },
            ],
            vec![],
            vec![],
        )
        .unwrap();
        let blue = mwpm_decode(&path, &BitVec::from_indices(3, &[0, 1])).unwrap();
        assert_eq!(blue.ones(), vec![0]);

        // Parallel-edge tie resolves to the lexicographically first edge.
        let g = two_parallel(0.1);
        let blue = mwpm_decode(&g, &BitVec::from_indices(2, &[0, 1])).unwrap();
        assert_eq!(blue.ones(), vec![0]);

        let heavy = CheckGraph::new(
            2,
            vec![CheckEdge { ends: EdgeEnds::Two(0, 1), p: 0.7 }],
            vec![],
            vec![],
        )
        .unwrap();
        assert!(matches!(
            mwpm_decode(&heavy, &BitVec::zeros(2)),
            Err(DecodeError::HeavyEdge(_))
        ));

        let big = cycle_graph(14, 0.1);
        let syn = BitVec::from_indices(14, &(0..13).collect::<Vec<_>>());
        assert!(matches!(
            mwpm_decode(&big, &syn),
            Err(DecodeError::DefectCap(13, DEFECT_CAP))
        ));
    }

    #[test]
    fn mwpm_matches_ml_class_on_columns() {
        let g = column_graph(3, 2, 0.1);
        for mask in 0u32..8 {
            if mask.count_ones() % 2 == 1 {
                continue;
            }
            let mut syn = BitVec::zeros(3);
            for v in 0..3 {
                if mask >> v & 1 == 1 {
                    syn.set(v, true);
                }
            }
            let ml = ml_decode(&g, &syn).unwrap();
            let blue = mwpm_decode(&g, &syn).unwrap();
            match ml.decision {
                Decision::Class(c) => assert_eq!(g.class_of(&blue), c, "syndrome {mask:03b}"),
                Decision::Tie(ref cs) => assert!(cs.contains(&g.class_of(&blue))),
            }
        }
    }

    #[test]
    fn mwpm_never_beats_ml() {
        let g = column_graph(4, 2, 0.12);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let trials = 4000usize;
        let mut ml_fail = 0.0f64;
        let mut mw_fail = 0.0f64;
        for _ in 0..trials {
            let red = sample_errors(&g, &mut rng);
            let syn = syndrome(&g, &red);
            let truth = g.class_of(&red);
            let ml = ml_decode(&g, &syn).unwrap();
            ml_fail += match ml.decision {
                Decision::Class(c) if c == truth => 0.0,
                Decision::Class(_) => 1.0,
                Decision::Tie(_) => 0.5,
            };
            if g.class_of(&mwpm_decode(&g, &syn).unwrap()) != truth {
                mw_fail += 1.0;
            }
        }
        let (pm, pw) = (ml_fail / trials as f64, mw_fail / trials as f64);
        let sigma = (pm * (1.0 - pm) / trials as f64).sqrt().max(1e-4);
        assert!(pw >= pm - 3.0 * sigma, "mwpm {pw} vs ml {pm}");
    }

    #[test]
    fn peierls_values() {
        let exact = 0.09 + 1.62 / 82.0;
        assert!((peierls_bound(2, 0.1) - exact).abs() < 1e-12);
        assert!((peierls_bound(0, 0.1) - 0.5).abs() < 1e-12);
        for &p in &[0.05, 0.1, 0.2, 0.3, 0.45] {
            let mut prev = peierls_bound(0, p);
            for len in 1..=10 {
                let cur = peierls_bound(len, p);
                assert!(cur < prev, "bound not decreasing at len {len}, p {p}");
                prev = cur;
            }
        }
    }

    #[test]
    fn once_colored_exact_matches_bound_on_cycles() {
        for n in [2usize, 3, 4] {
            let g = cycle_graph(n, 0.1);
            let cycle = BitVec::from_indices(n, &(0..n).collect::<Vec<_>>());
            let exact = once_colored_exact(&g, &cycle).unwrap();
            let bound = peierls_bound(n, 0.1);
            assert!(
                (exact - bound).abs() < 1e-12,
                "cycle {n}: exact {exact} vs bound {bound}"
            );
        }
    }

    #[test]
    fn once_colored_monte_carlo() {
        let g = two_parallel(0.1);
        let cycle = BitVec::from_indices(2, &[0, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (est, sigma) = once_colored_probability(&g, &cycle, 20_000, &mut rng).unwrap();
        let exact = peierls_bound(2, 0.1);
        assert!((est - exact).abs() <= 3.0 * sigma, "estimate {est} vs {exact}");

        let zero = cycle_graph(4, 0.0);
        let c4 = BitVec::from_indices(4, &[0, 1, 2, 3]);
        // With every probability zero the once-colored set is always empty.
        let mut hits = 0;
        for _ in 0..100 {
            let red = sample_errors(&zero, &mut rng);
            assert!(red.is_zero());
            hits += usize::from(red == c4);
        }
        assert_eq!(hits, 0);

        let g4 = cycle_graph(4, 0.1);
        let (est4, sigma4) = once_colored_probability(&g4, &c4, 20_000, &mut rng).unwrap();
        assert!(est4 <= peierls_bound(4, 0.1) + 3.0 * sigma4);
    }

    #[test]
    fn exact_ml_failure_on_parallel_pair() {
        // Two parallel edges at p: the decoder picks the empty class on both
        // syndromes except the both-flagged tie. Failure probability is
        // p^2 (wrong on the empty syndrome) plus half the tie mass.
        let p = 0.1f64;
        let g = two_parallel(p);
        let fail = exact_ml_failure(&g).unwrap();
        let expect = p * p + 0.5 * 2.0 * p * (1.0 - p);
        assert!((fail - expect).abs() < 1e-12, "{fail} vs {expect}");
    }

    #[test]
    fn exact_mc_failure_closed_forms() {
        // One detection event, danglings at q and 1/2: both syndromes leave
        // posterior q on the nontrivial class, so the sampler fails with
        // probability exactly 2q(1-q).
        for q in [0.1f64, 0.25, 0.4] {
            let g = CheckGraph::new(
                1,
                vec![
                    CheckEdge { ends: EdgeEnds::Dangling(0), p: q },
                    CheckEdge { ends: EdgeEnds::Dangling(0), p: 0.5 },
                ],
                vec![BitVec::from_indices(2, &[0])],
                vec![],
            )
            .unwrap();
            let fail = exact_mc_failure(&g).unwrap();
            let expect = 2.0 * q * (1.0 - q);
            assert!((fail - expect).abs() < 1e-12, "{fail} vs {expect}");
        }
        // Two parallel edges at p: syndrome 00 has class weights {1, r^2},
        // syndrome 11 has {r, r}, so the sampler's failure mass is
        // (1-p)^2 (2r^2/(1+r^2) + r).
        let p = 0.1f64;
        let g = two_parallel(p);
        let r = p / (1.0 - p);
        let fail = exact_mc_failure(&g).unwrap();
        let expect = (1.0 - p) * (1.0 - p) * (2.0 * r * r / (1.0 + r * r) + r);
        assert!((fail - expect).abs() < 1e-12, "{fail} vs {expect}");
        // Sampling never beats maximum likelihood.
        assert!(fail >= exact_ml_failure(&g).unwrap());
    }

    fn rough_we() -> Topology {
        Topology::Patch(PatchSides {
            west: BoundaryKind::Rough,
            east: BoundaryKind::Rough,
            north: BoundaryKind::Smooth,
            south: BoundaryKind::Smooth,
        })
    }

    #[test]
    fn bulk_patch_no_holes() {
        let spec = VacancySpec {
            lx: 3,
            ly: 3,
            topology: rough_we(),
            dead: vec![],
            t: 1,
            p: 0.05,
        };
        let layout = build_bulk_layout(&spec).unwrap();
        let g = &layout.graph;
        assert_eq!(g.n_vertices(), 9);
        // 6 H + 6 V interior edges plus 3 dangling per rough side, no
        // timelike edges at a single slice.
        assert_eq!(g.n_edges(), 18);
        assert_eq!(g.two_cells().len(), 8);
        assert_eq!(g.cocycles().len(), 1);
        assert_eq!(g.cocycles()[0].weight(), 3);
        let ml = ml_decode(g, &BitVec::zeros(9)).unwrap();
        assert_eq!(ml.decision.chosen(), 0);
    }

    #[test]
    fn bulk_single_hole_patch() {
        let spec = VacancySpec {
            lx: 5,
            ly: 5,
            topology: rough_we(),
            dead: vec![SpatialEdge::H { row: 2, col: 1 }],
            t: 2,
            p: 0.05,
        };
        let layout = build_bulk_layout(&spec).unwrap();
        assert_eq!(layout.n_live, 23);
        assert_eq!(layout.centers, vec![23]);
        assert_eq!(layout.graph.n_vertices(), 48);
        let spokes: Vec<_> = layout
            .spatial_kinds
            .iter()
            .filter(|k| matches!(k, SpatialKind::Spoke { .. }))
            .collect();
        assert_eq!(spokes.len(), 6, "single dead qubit leaves a degree-6 hole center");
        // Two dangling timelike ends on the center column.
        let dangling_count = layout
            .graph
            .edges()
            .iter()
            .enumerate()
            .filter(|(j, e)| {
                *j >= layout.slices * layout.spatial_kinds.len()
                    && matches!(e.ends, EdgeEnds::Dangling(_))
            })
            .count();
        assert_eq!(dangling_count, 2);
        // The cut stays clear of the hole: H edges of a hole-free column,
        // replicated on both slices.
        assert_eq!(layout.graph.cocycles()[0].weight(), 10);
    }

    #[test]
    fn bulk_torus_counts() {
        let spec = VacancySpec {
            lx: 3,
            ly: 3,
            topology: Topology::Torus,
            dead: vec![],
            t: 2,
            p: 0.05,
        };
        let layout = build_bulk_layout(&spec).unwrap();
        let g = &layout.graph;
        assert_eq!(g.n_vertices(), 18);
        assert_eq!(g.n_edges(), 2 * 18 + 9);
        assert_eq!(g.two_cells().len(), 2 * 9 + 18);
        assert_eq!(g.cocycles().len(), 2);

        let holed = VacancySpec {
            lx: 4,
            ly: 4,
            topology: Topology::Torus,
            dead: vec![SpatialEdge::V { row: 1, col: 1 }],
            t: 1,
            p: 0.05,
        };
        let layout = build_bulk_layout(&holed).unwrap();
        assert_eq!(layout.centers.len(), 1);
        assert_eq!(layout.graph.cocycles().len(), 2);
    }

    #[test]
    fn bulk_rejects_bad_holes() {
        let base = |dead: Vec<SpatialEdge>, lx: usize, ly: usize| VacancySpec {
            lx,
            ly,
            topology: rough_we(),
            dead,
            t: 1,
            p: 0.05,
        };
        let ragged = build_bulk_layout(&base(
            vec![SpatialEdge::H { row: 2, col: 2 }, SpatialEdge::V { row: 2, col: 2 }],
            8,
            8,
        ));
        assert!(matches!(ragged, Err(DecodeError::RaggedHole)));
        let adjacent = build_bulk_layout(&base(
            vec![SpatialEdge::H { row: 2, col: 1 }, SpatialEdge::H { row: 2, col: 3 }],
            8,
            8,
        ));
        assert!(matches!(adjacent, Err(DecodeError::RaggedHole)));
        let boundary = build_bulk_layout(&base(vec![SpatialEdge::H { row: 0, col: 1 }], 5, 5));
        assert!(matches!(boundary, Err(DecodeError::HoleTouchesBoundary)));
        let missing = build_bulk_layout(&base(vec![SpatialEdge::H { row: 1, col: 7 }], 5, 5));
        assert!(matches!(missing, Err(DecodeError::BadDeadEdge(_))));
        let blocked = build_bulk_layout(&base(
            vec![SpatialEdge::H { row: 1, col: 1 }, SpatialEdge::H { row: 3, col: 3 }],
            6,
            6,
        ));
        assert!(matches!(blocked, Err(DecodeError::NoClearColumn)));
    }

    #[test]
    fn star_bulk_shape() {
        let bulk = hole_star_bulk(4, 4, 0.05).unwrap();
        let g = &bulk.graph;
        assert_eq!(g.n_vertices(), 25);
        assert_eq!(g.n_edges(), 2 * 4 * 4 + 4 + 4 + 2);
        assert_eq!(g.boundary_matrix().kernel_basis().len(), 4 * 4 + 1);
        let m = &bulk.modified;
        assert_eq!(m.n_vertices(), 20);
        assert_eq!(m.n_edges(), 36);
        assert_eq!(m.boundary_matrix().kernel_basis().len(), 16);
        // The class cocycle is no coboundary.
        let boundary = g.boundary_matrix();
        let mut rows = RowSpace::new();
        for v in 0..g.n_vertices() {
            rows.insert(boundary.row(v));
        }
        assert!(!rows.contains(&g.cocycles()[0]));
    }

    #[test]
    fn two_step_clean_run() {
        let bulk = hole_star_bulk(3, 3, 0.05).unwrap();
        let red = BitVec::zeros(bulk.graph.n_edges());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let out = two_step_hole_decoder(&bulk, &red, &mut rng).unwrap();
        assert_eq!(out.overall_count, 0);
        assert_eq!(out.verdict, Verdict::Success);
        assert!(!out.class_flip);
        assert!(out.blue.is_zero());
    }

    #[test]
    fn two_step_planted_path() {
        // A closed error crossing the hole center once: exit, spoke,
        // center timelike, spoke, exit. It has an empty syndrome, so with a
        // quiet first step the once-colored set is the path itself and
        // exactly one layer sees an overall error.
        let bulk = hole_star_bulk_with_exits(2, 3, 0.02, 0.02).unwrap();
        let s = 1usize;
        let mut red = BitVec::zeros(bulk.graph.n_edges());
        red.set(bulk.exit(0, s).unwrap(), true);
        red.set(bulk.spoke(0, s), true);
        red.set(bulk.center_timelike(s), true);
        red.set(bulk.spoke(1, s + 1), true);
        red.set(bulk.exit(1, s + 1).unwrap(), true);
        assert!(syndrome(&bulk.graph, &red).is_zero());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let out = two_step_hole_decoder(&bulk, &red, &mut rng).unwrap();
        assert!(out.blue.is_zero(), "quiet syndrome should decode to nothing");
        assert_eq!(out.overall, vec![false, true, false]);
        assert_eq!(out.overall_count, 1);
        assert_eq!(out.verdict, Verdict::Success);
        assert!(!out.class_flip);
    }
}
