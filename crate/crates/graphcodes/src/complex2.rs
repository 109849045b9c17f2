//! Toric codes on 2-complexes: CSS codes from vertex stars and face
//! boundaries, exact distances and cuts at desk scale, subdivision and
//! triangulation surgery, integer lifts of the boundary maps, and the
//! reduction of a graph matching code to a twisted toric code on the complex
//! whose vertices are its avoiding cycles.

use crate::gf2::{BitMatrix, BitVec, RowSpace};
use crate::matchcode::{CycleChain, GraphMatchingCode};
use crate::pauli::PauliOperator;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Hard cap for exact coset searches (distances, cuts, witnesses).
pub const DISTANCE_CAP: usize = 26;
/// Hard cap for the cut lemma's covering brute force.
pub const CUT_CAP: usize = 14;

#[derive(Debug, Error)]
pub enum Complex2Error {
    #[error("edge {0} is a self-loop")]
    SelfLoop(usize),
    #[error("face {face} is not a closed walk at step {step}")]
    BadFaceWalk { face: usize, step: usize },
    #[error("face {0} is empty")]
    EmptyFace(usize),
    #[error("unknown edge id {0}")]
    UnknownEdge(usize),
    #[error("X and Z checks do not commute (row {hx_row} of Hx, row {hz_row} of Hz)")]
    NonCommuting { hx_row: usize, hz_row: usize },
    #[error("problem size {0} exceeds cap {1}")]
    CapExceeded(usize, usize),
    #[error("operator is not a nontrivial logical of the requested type")]
    TrivialClass,
    #[error("code has no logical qubits")]
    NoLogicals,
    #[error("Hz is not a graph incidence: column {0} has weight {1}")]
    NotGraphLike(usize, usize),
    #[error("face {0} support is not a single simple cycle")]
    FaceSupportNotSimple(usize),
    #[error("matching edge {0} has both endpoints on one avoiding cycle")]
    DegenerateMatchingEdge(usize),
    #[error("cycle set S does not contain every avoiding cycle")]
    MissingAvoidingCycle,
    #[error("extra cycle {0} uses no matching edge, so it depends on the avoiding cycles")]
    ExtraCycleDependent(usize),
    #[error("reduction check failed: {0}")]
    ReductionCheck(String),
    #[error("cut lemma violated: {0}")]
    CutLemma(String),
    #[error("parse error at line {0}: {1}")]
    Parse(usize, String),
    #[error(transparent)]
    Match(#[from] crate::matchcode::MatchError),
}

/// A 2-complex: oriented edges between vertices and faces given as closed
/// edge walks. The mod-2 boundary of every face is automatically a cycle.
#[derive(Clone, Debug)]
pub struct TwoComplex {
    n_v: usize,
    edges: Vec<(usize, usize)>,
    faces: Vec<Vec<(usize, bool)>>,
}

impl TwoComplex {
    pub fn new(
        n_v: usize,
        edges: Vec<(usize, usize)>,
        faces: Vec<Vec<(usize, bool)>>,
    ) -> Result<Self, Complex2Error> {
        for (id, &(u, v)) in edges.iter().enumerate() {
            if u == v {
                return Err(Complex2Error::SelfLoop(id));
            }
            if u >= n_v || v >= n_v {
                return Err(Complex2Error::UnknownEdge(id));
            }
        }
        for (f, walk) in faces.iter().enumerate() {
            if walk.is_empty() {
                return Err(Complex2Error::EmptyFace(f));
            }
            let start = {
                let &(e, fwd) = &walk[0];
                if e >= edges.len() {
                    return Err(Complex2Error::UnknownEdge(e));
                }
                if fwd {
                    edges[e].0
                } else {
                    edges[e].1
                }
            };
            let mut at = start;
            for (step, &(e, fwd)) in walk.iter().enumerate() {
                if e >= edges.len() {
                    return Err(Complex2Error::UnknownEdge(e));
                }
                let (tail, head) = if fwd {
                    (edges[e].0, edges[e].1)
                } else {
                    (edges[e].1, edges[e].0)
                };
                if tail != at {
                    return Err(Complex2Error::BadFaceWalk { face: f, step });
                }
                at = head;
            }
            if at != start {
                return Err(Complex2Error::BadFaceWalk {
                    face: f,
                    step: walk.len(),
                });
            }
        }
        Ok(TwoComplex { n_v, edges, faces })
    }

    pub fn num_vertices(&self) -> usize {
        self.n_v
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn faces(&self) -> &[Vec<(usize, bool)>] {
        &self.faces
    }

    /// Mod-2 support of a face walk (edges traversed an odd number of times).
    pub fn face_support(&self, f: usize) -> BitVec {
        let mut s = BitVec::zeros(self.edges.len());
        for &(e, _) in &self.faces[f] {
            s.flip(e);
        }
        s
    }

    /// Breadth-first graph distance between two vertices along edges.
    pub fn graph_distance(&self, a: usize, b: usize) -> Option<usize> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.n_v];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut dist = vec![usize::MAX; self.n_v];
        dist[a] = 0;
        let mut queue = std::collections::VecDeque::from([a]);
        while let Some(v) = queue.pop_front() {
            if v == b {
                return Some(dist[v]);
            }
            for &w in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        None
    }

    /// Inserts `l - 1` vertices into every edge, splitting it into `l` edges.
    /// Edge `e` becomes edges `e*l .. e*l+l`; face walks expand in place.
    pub fn subdivide_edges(&self, l: usize) -> TwoComplex {
        assert!(l >= 1);
        if l == 1 {
            return self.clone();
        }
        let n_e = self.edges.len();
        let mid = |e: usize, t: usize| self.n_v + e * (l - 1) + t;
        let mut edges = Vec::with_capacity(n_e * l);
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            for t in 0..l {
                let a = if t == 0 { u } else { mid(e, t - 1) };
                let b = if t == l - 1 { v } else { mid(e, t) };
                edges.push((a, b));
            }
        }
        let faces = self
            .faces
            .iter()
            .map(|walk| {
                let mut new_walk = Vec::with_capacity(walk.len() * l);
                for &(e, fwd) in walk {
                    if fwd {
                        for t in 0..l {
                            new_walk.push((e * l + t, true));
                        }
                    } else {
                        for t in (0..l).rev() {
                            new_walk.push((e * l + t, false));
                        }
                    }
                }
                new_walk
            })
            .collect();
        TwoComplex::new(self.n_v + n_e * (l - 1), edges, faces)
            .expect("subdivision preserves validity")
    }

    /// Replaces every face of size s by s triangles around a new center
    /// vertex, with one spoke per distinct vertex the face walk visits.
    pub fn triangulate_faces(&self) -> TwoComplex {
        let mut edges = self.edges.clone();
        let mut faces = Vec::new();
        for (f, walk) in self.faces.iter().enumerate() {
            let center = self.n_v + f;
            // Spokes in first-visit order.
            let mut spoke_of: std::collections::HashMap<usize, usize> =
                std::collections::HashMap::new();
            let mut corners = Vec::with_capacity(walk.len());
            for &(e, fwd) in walk {
                let tail = if fwd { self.edges[e].0 } else { self.edges[e].1 };
                corners.push(tail);
            }
            for &v in &corners {
                spoke_of.entry(v).or_insert_with(|| {
                    edges.push((center, v));
                    edges.len() - 1
                });
            }
            for (t, &(e, fwd)) in walk.iter().enumerate() {
                let a = corners[t];
                let b = corners[(t + 1) % walk.len()];
                faces.push(vec![(spoke_of[&a], true), (e, fwd), (spoke_of[&b], false)]);
            }
        }
        TwoComplex::new(self.n_v + self.faces.len(), edges, faces)
            .expect("triangulation preserves validity")
    }

    /// Serializes as `n_V n_E` followed by edge lines `id u v` and one line
    /// per face of signed edge ids (id+1, negative for reverse traversal).
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n_v, self.edges.len());
        for (id, &(u, v)) in self.edges.iter().enumerate() {
            s.push_str(&format!("{id} {u} {v}\n"));
        }
        for walk in &self.faces {
            let toks: Vec<String> = walk
                .iter()
                .map(|&(e, fwd)| {
                    let signed = (e + 1) as i64 * if fwd { 1 } else { -1 };
                    signed.to_string()
                })
                .collect();
            s.push_str(&toks.join(" "));
            s.push('\n');
        }
        s
    }
}

impl fmt::Display for TwoComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for TwoComplex {
    type Err = Complex2Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines = s
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines
            .next()
            .ok_or_else(|| Complex2Error::Parse(0, "empty input".into()))?;
        let mut toks = header.split_whitespace();
        let geti = |tok: Option<&str>, line: usize| -> Result<usize, Complex2Error> {
            tok.ok_or_else(|| Complex2Error::Parse(line, "missing field".into()))?
                .parse()
                .map_err(|e| Complex2Error::Parse(line, format!("{e}")))
        };
        let n_v = geti(toks.next(), hline)?;
        let n_e = geti(toks.next(), hline)?;
        let mut edges = Vec::with_capacity(n_e);
        let mut faces = Vec::new();
        for (lineno, line) in lines {
            if edges.len() < n_e {
                let mut t = line.split_whitespace();
                let id = geti(t.next(), lineno)?;
                if id != edges.len() {
                    return Err(Complex2Error::Parse(lineno, "edge ids must be in order".into()));
                }
                let u = geti(t.next(), lineno)?;
                let v = geti(t.next(), lineno)?;
                edges.push((u, v));
            } else {
                let mut walk = Vec::new();
                for tok in line.split_whitespace() {
                    let signed: i64 = tok
                        .parse()
                        .map_err(|e| Complex2Error::Parse(lineno, format!("{e}")))?;
                    if signed == 0 {
                        return Err(Complex2Error::Parse(lineno, "edge id 0 in face".into()));
                    }
                    walk.push(((signed.unsigned_abs() as usize) - 1, signed > 0));
                }
                faces.push(walk);
            }
        }
        TwoComplex::new(n_v, edges, faces)
    }
}

/// A CSS code given by its two parity-check matrices (rows are stabilizer
/// generators, columns are qubits). Hx·Hzᵀ = 0 is checked on construction.
#[derive(Clone, Debug)]
pub struct CSSCode {
    hz: BitMatrix,
    hx: BitMatrix,
}

impl CSSCode {
    pub fn new(hz: BitMatrix, hx: BitMatrix) -> Result<Self, Complex2Error> {
        assert_eq!(hz.cols(), hx.cols(), "qubit count mismatch");
        for i in 0..hx.rows() {
            for j in 0..hz.rows() {
                if hx.row(i).dot(hz.row(j)) {
                    return Err(Complex2Error::NonCommuting {
                        hx_row: i,
                        hz_row: j,
                    });
                }
            }
        }
        Ok(CSSCode { hz, hx })
    }

    pub fn n(&self) -> usize {
        self.hz.cols()
    }

    pub fn hz(&self) -> &BitMatrix {
        &self.hz
    }

    pub fn hx(&self) -> &BitMatrix {
        &self.hx
    }

    /// Number of logical qubits.
    pub fn k(&self) -> usize {
        self.n() - self.hz.rank() - self.hx.rank()
    }

    /// The same code with X and Z roles swapped.
    pub fn dual(&self) -> CSSCode {
        CSSCode {
            hz: self.hx.clone(),
            hx: self.hz.clone(),
        }
    }

    /// Two text blocks, Hz then Hx, rows of 0/1 characters.
    pub fn to_text(&self) -> String {
        let block = |m: &BitMatrix| -> String {
            (0..m.rows())
                .map(|i| {
                    (0..m.cols())
                        .map(|j| if m.get(i, j) { '1' } else { '0' })
                        .collect::<String>()
                })
                .collect::<Vec<_>>()
                .join("\n")
        };
        format!("Hz\n{}\nHx\n{}\n", block(&self.hz), block(&self.hx))
    }
}

/// The toric code of a complex: Z-stabilizers on vertex stars, X-stabilizers
/// on face boundaries.
pub fn toric_code(c: &TwoComplex) -> Result<CSSCode, Complex2Error> {
    let mut hz = BitMatrix::zeros(c.n_v, c.edges.len());
    for (e, &(u, v)) in c.edges.iter().enumerate() {
        hz.set(u, e, true);
        hz.set(v, e, true);
    }
    let mut hx = BitMatrix::zeros(c.faces.len(), c.edges.len());
    for f in 0..c.faces.len() {
        let support = c.face_support(f);
        for e in support.ones() {
            hx.set(f, e, true);
        }
    }
    CSSCode::new(hz, hx)
}

/// Minimum weight over the nonzero kernel elements of `checks` that are not
/// in the row space of `stabilizers`; None when the code has no logicals.
fn min_weight_logical(
    checks: &BitMatrix,
    stabilizers: &BitMatrix,
) -> Result<Option<usize>, Complex2Error> {
    let n = checks.cols();
    if n > DISTANCE_CAP {
        return Err(Complex2Error::CapExceeded(n, DISTANCE_CAP));
    }
    let kernel = checks.kernel_basis();
    if kernel.len() > DISTANCE_CAP {
        return Err(Complex2Error::CapExceeded(kernel.len(), DISTANCE_CAP));
    }
    let mut trivial = RowSpace::new();
    for i in 0..stabilizers.rows() {
        trivial.insert(stabilizers.row(i));
    }
    let mut best = usize::MAX;
    let mut cur = BitVec::zeros(n);
    for step in 1u64..(1u64 << kernel.len()) {
        cur.xor_assign(&kernel[step.trailing_zeros() as usize]);
        let w = cur.weight();
        if w < best && !trivial.contains(&cur) {
            best = w;
        }
    }
    Ok(if best == usize::MAX { None } else { Some(best) })
}

/// Minimum weight of an X-type logical operator (a cycle that is not a
/// product of face boundaries); None for k = 0.
pub fn distance_x(css: &CSSCode) -> Result<Option<usize>, Complex2Error> {
    min_weight_logical(&css.hz, &css.hx)
}

/// Minimum weight of a Z-type logical operator; None for k = 0.
pub fn distance_z(css: &CSSCode) -> Result<Option<usize>, Complex2Error> {
    min_weight_logical(&css.hx, &css.hz)
}

/// The L x L torus cellulation: horizontal edge (i,j)->(i,j+1) with id i*L+j,
/// vertical edge (i,j)->(i+1,j) with id L^2+i*L+j, one square face per site.
pub fn torus(l: usize) -> TwoComplex {
    assert!(l >= 2, "torus needs L >= 2 to avoid self-loops");
    let v = |i: usize, j: usize| (i % l) * l + (j % l);
    let h = |i: usize, j: usize| (i % l) * l + (j % l);
    let vert = |i: usize, j: usize| l * l + (i % l) * l + (j % l);
    let mut edges = Vec::with_capacity(2 * l * l);
    for i in 0..l {
        for j in 0..l {
            edges.push((v(i, j), v(i, j + 1)));
        }
    }
    for i in 0..l {
        for j in 0..l {
            edges.push((v(i, j), v(i + 1, j)));
        }
    }
    let mut faces = Vec::with_capacity(l * l);
    for i in 0..l {
        for j in 0..l {
            faces.push(vec![
                (h(i, j), true),
                (vert(i, j + 1), true),
                (h(i + 1, j), false),
                (vert(i, j), false),
            ]);
        }
    }
    TwoComplex::new(l * l, edges, faces).expect("torus cellulation is valid")
}

/// A single square: 4 vertices, 4 edges, 1 face. k = 0.
pub fn single_square() -> TwoComplex {
    TwoComplex::new(
        4,
        vec![(0, 1), (1, 2), (2, 3), (3, 0)],
        vec![vec![(0, true), (1, true), (2, true), (3, true)]],
    )
    .expect("valid")
}

/// A single triangle: the 3-qubit code with Z-checks on vertex pairs and one
/// weight-3 X-check.
pub fn triangle_complex() -> TwoComplex {
    TwoComplex::new(
        3,
        vec![(0, 1), (1, 2), (2, 0)],
        vec![vec![(0, true), (1, true), (2, true)]],
    )
    .expect("valid")
}

/// A cylinder of circumference 2 and height w-1: rings of two parallel edges
/// joined by vertical edges, two square faces per row. Encodes one logical
/// qubit whose Z-distance (and cut) is exactly w while d_X = 2.
pub fn repetition_chain(w: usize) -> TwoComplex {
    assert!(w >= 2);
    let h = w - 1;
    let u = |r: usize| 2 * r;
    let wv = |r: usize| 2 * r + 1;
    // Ring r: horizontal edges 2r (t0) and 2r+1 (t1); verticals follow.
    let t = |r: usize, side: usize| 2 * r + side;
    let vu = |r: usize| 2 * (h + 1) + 2 * r;
    let vw = |r: usize| 2 * (h + 1) + 2 * r + 1;
    let mut edges = Vec::new();
    for r in 0..=h {
        edges.push((u(r), wv(r)));
        edges.push((u(r), wv(r)));
    }
    for r in 0..h {
        edges.push((u(r), u(r + 1)));
        edges.push((wv(r), wv(r + 1)));
    }
    let mut faces = Vec::new();
    for r in 0..h {
        for side in 0..2 {
            faces.push(vec![
                (t(r, side), true),
                (vw(r), true),
                (t(r + 1, side), false),
                (vu(r), false),
            ]);
        }
    }
    TwoComplex::new(2 * (h + 1), edges, faces).expect("valid ladder")
}

/// A disk filled by nested rings of halving size with spokes, so that
/// antipodal boundary vertices are O(log m) apart. The outer boundary is an
/// m-cycle; faces are triangles, quads, and (for odd ring sizes) pentagons,
/// plus the innermost ring polygon.
pub fn hyperbolic_fill(m: usize) -> TwoComplex {
    assert!(m >= 3);
    // Ring sizes m, floor(m/2), ... while >= 2; vertex ids ring by ring.
    let mut sizes = vec![m];
    while sizes.last().unwrap() / 2 >= 2 {
        let s = sizes.last().unwrap() / 2;
        sizes.push(s);
    }
    let mut offset = vec![0usize];
    for s in &sizes {
        offset.push(offset.last().unwrap() + s);
    }
    let n_v = *offset.last().unwrap();
    let mut edges = Vec::new();
    // Ring edges: ring t vertex j -> vertex j+1 (mod size).
    let mut ring_edge = Vec::new();
    for (t, &s) in sizes.iter().enumerate() {
        let base = edges.len();
        ring_edge.push(base);
        for j in 0..s {
            edges.push((offset[t] + j, offset[t] + (j + 1) % s));
        }
    }
    // Spokes between consecutive rings: inner j to outer 2j and 2j+1.
    let mut spoke_a = Vec::new();
    let mut spoke_b = Vec::new();
    for t in 1..sizes.len() {
        let (sa, sb) = (edges.len(), edges.len() + 1);
        spoke_a.push(sa);
        spoke_b.push(sb);
        for j in 0..sizes[t] {
            edges.push((offset[t] + j, offset[t - 1] + 2 * j));
            edges.push((offset[t] + j, offset[t - 1] + 2 * j + 1));
        }
    }
    let mut faces = Vec::new();
    for t in 1..sizes.len() {
        let s_out = sizes[t - 1];
        let s_in = sizes[t];
        let re_out = ring_edge[t - 1];
        let re_in = ring_edge[t];
        let sa = |j: usize| spoke_a[t - 1] + 2 * j;
        let sb = |j: usize| spoke_b[t - 1] + 2 * j;
        for j in 0..s_in {
            // Triangle: inner j -> outer 2j -> outer 2j+1 -> inner j.
            faces.push(vec![
                (sa(j), true),
                (re_out + 2 * j, true),
                (sb(j), false),
            ]);
            // Quad (pentagon at the seam of an odd outer ring): inner j ->
            // outer 2j+1 -> ... -> outer 2(j+1 mod s_in) -> inner j+1 ->
            // inner j.
            let mut walk = vec![(sb(j), true)];
            let mut o = 2 * j + 1;
            while o != (2 * ((j + 1) % s_in)) % s_out {
                walk.push((re_out + o, true));
                o = (o + 1) % s_out;
            }
            walk.push((sa((j + 1) % s_in), false));
            walk.push((re_in + j, false));
            faces.push(walk);
        }
    }
    // Innermost ring as the final face.
    let t_last = sizes.len() - 1;
    let s_last = sizes[t_last];
    faces.push((0..s_last).map(|j| (ring_edge[t_last] + j, true)).collect());
    TwoComplex::new(n_v, edges, faces).expect("hyperbolic fill is valid")
}

/// Minimum-weight representative of the Z-logical class of `alpha`, returned
/// with its support as the cut witness. By the cut lemma this weight equals
/// the minimum cardinality of a qubit set meeting every anticommuting X-type
/// logical; the witness is verified to meet them all (brute force).
pub fn min_cut_for_logical(
    css: &CSSCode,
    alpha: &BitVec,
) -> Result<(usize, BitVec), Complex2Error> {
    let n = css.n();
    if n > CUT_CAP {
        return Err(Complex2Error::CapExceeded(n, CUT_CAP));
    }
    if css.k() == 0 {
        return Err(Complex2Error::NoLogicals);
    }
    validate_z_logical(css, alpha)?;
    // Minimum weight over the coset alpha + row(Hz).
    let mut zspan = RowSpace::new();
    for i in 0..css.hz.rows() {
        zspan.insert(css.hz.row(i));
    }
    let basis = zspan.basis();
    let mut cur = alpha.clone();
    let mut best = cur.weight();
    let mut witness = cur.clone();
    for step in 1u64..(1u64 << basis.len()) {
        cur.xor_assign(&basis[step.trailing_zeros() as usize]);
        if cur.weight() < best {
            best = cur.weight();
            witness = cur.clone();
        }
    }
    // Verify the witness meets every anticommuting X-logical.
    for x in anticommuting_x_logicals(css, alpha) {
        let mut overlap = x.clone();
        overlap.and_assign(&witness);
        if overlap.is_zero() {
            return Err(Complex2Error::CutLemma(format!(
                "X-logical {:?} misses the weight-{best} witness",
                x.ones()
            )));
        }
    }
    Ok((best, witness))
}

/// A Z-chain is a logical when it commutes with every face check and is not
/// itself a product of vertex checks. (Pass the dual code for the X side.)
fn validate_z_logical(css: &CSSCode, op: &BitVec) -> Result<(), Complex2Error> {
    if !css.hx.mul_vec(op).is_zero() {
        return Err(Complex2Error::TrivialClass);
    }
    let mut span = RowSpace::new();
    for i in 0..css.hz.rows() {
        span.insert(css.hz.row(i));
    }
    if span.contains(op) {
        return Err(Complex2Error::TrivialClass);
    }
    Ok(())
}

/// All X-type logical representatives anticommuting with the Z-chain `alpha`:
/// kernel elements of Hz outside row(Hx) with odd overlap with `alpha`.
pub fn anticommuting_x_logicals(css: &CSSCode, alpha: &BitVec) -> Vec<BitVec> {
    let kernel = css.hz.kernel_basis();
    assert!(kernel.len() <= CUT_CAP + 8, "kernel too large to enumerate");
    let mut triv = RowSpace::new();
    for i in 0..css.hx.rows() {
        triv.insert(css.hx.row(i));
    }
    let mut out = Vec::new();
    let mut cur = BitVec::zeros(css.n());
    for step in 1u64..(1u64 << kernel.len()) {
        cur.xor_assign(&kernel[step.trailing_zeros() as usize]);
        if cur.dot(alpha) && !triv.contains(&cur) {
            out.push(cur.clone());
        }
    }
    out
}

/// Independent brute force for the cut lemma: the smallest qubit subset that
/// meets every X-logical anticommuting with `alpha`.
pub fn min_cover_of_anticommuting(
    css: &CSSCode,
    alpha: &BitVec,
) -> Result<usize, Complex2Error> {
    let n = css.n();
    if n > CUT_CAP {
        return Err(Complex2Error::CapExceeded(n, CUT_CAP));
    }
    validate_z_logical(css, alpha)?;
    let logicals: Vec<u64> = anticommuting_x_logicals(css, alpha)
        .iter()
        .map(|v| {
            let mut mask = 0u64;
            for i in v.ones() {
                mask |= 1 << i;
            }
            mask
        })
        .collect();
    let mut best = usize::MAX;
    for subset in 1u64..(1u64 << n) {
        let size = subset.count_ones() as usize;
        if size >= best {
            continue;
        }
        if logicals.iter().all(|&l| l & subset != 0) {
            best = size;
        }
    }
    Ok(best)
}

/// Minimum-weight 1-cycle with odd inner product with the cocycle `s`,
/// found by parity-labeled breadth-first search over the complex's graph
/// (Hz must be a genuine vertex-edge incidence). None when every cycle pairs
/// evenly with `s`.
pub fn short_cycle_witness(
    css: &CSSCode,
    s: &BitVec,
) -> Result<Option<BitVec>, Complex2Error> {
    validate_z_logical(css, s)?;
    let n = css.n();
    let v_count = css.hz.rows();
    let mut ends = Vec::with_capacity(n);
    for e in 0..n {
        let col: Vec<usize> = (0..v_count).filter(|&v| css.hz.get(v, e)).collect();
        if col.len() != 2 {
            return Err(Complex2Error::NotGraphLike(e, col.len()));
        }
        ends.push((col[0], col[1]));
    }
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); v_count];
    for (e, &(u, v)) in ends.iter().enumerate() {
        adj[u].push((v, e));
        adj[v].push((u, e));
    }
    // States (vertex, parity of s-edges crossed); shortest closed odd walk is
    // a simple cycle, so the best path below is the witness.
    let mut best: Option<(usize, Vec<usize>)> = None;
    for src in 0..v_count {
        let idx = |v: usize, p: usize| 2 * v + p;
        let mut dist = vec![usize::MAX; 2 * v_count];
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; 2 * v_count];
        dist[idx(src, 0)] = 0;
        let mut queue = std::collections::VecDeque::from([(src, 0usize)]);
        while let Some((v, p)) = queue.pop_front() {
            let d = dist[idx(v, p)];
            if best.as_ref().is_some_and(|(b, _)| d + 1 >= *b) {
                continue;
            }
            for &(w, e) in &adj[v] {
                let q = p ^ usize::from(s.get(e));
                if dist[idx(w, q)] == usize::MAX {
                    dist[idx(w, q)] = d + 1;
                    parent[idx(w, q)] = Some((idx(v, p), e));
                    queue.push_back((w, q));
                }
            }
        }
        if dist[idx(src, 1)] < best.as_ref().map_or(usize::MAX, |(b, _)| *b) {
            let mut path = Vec::new();
            let mut at = idx(src, 1);
            while let Some((prev, e)) = parent[at] {
                path.push(e);
                at = prev;
            }
            best = Some((dist[idx(src, 1)], path));
        }
    }
    match best {
        None => Ok(None),
        Some((w, path)) => {
            let witness = BitVec::from_indices(n, &path);
            debug_assert_eq!(witness.weight(), w, "optimal odd walk repeats an edge");
            debug_assert!(css.hz.mul_vec(&witness).is_zero());
            debug_assert!(witness.dot(s));
            Ok(Some(witness))
        }
    }
}

/// Integer boundary maps of a complex: d1 (vertices x edges) and
/// d2 (edges x faces) with entries in {-1, 0, 1}, d1*d2 = 0 over the
/// integers, reducing mod 2 to the toric code's Hz and Hx-transpose.
#[derive(Clone, Debug)]
pub struct IntegerLift {
    pub d1: Vec<Vec<i32>>,
    pub d2: Vec<Vec<i32>>,
}

/// L1 norm of an integer chain.
pub fn integer_weight(v: &[i32]) -> usize {
    v.iter().map(|x| x.unsigned_abs() as usize).sum()
}

/// Builds the sparse integer lift. Edges are oriented from lower to higher
/// vertex id; each face must have simple-cycle support, traversed starting at
/// its lowest edge id in that edge's low-to-high direction.
pub fn integer_lift(c: &TwoComplex) -> Result<IntegerLift, Complex2Error> {
    let n_e = c.edges.len();
    let mut d1 = vec![vec![0i32; n_e]; c.n_v];
    for (e, &(u, v)) in c.edges.iter().enumerate() {
        let (low, high) = (u.min(v), u.max(v));
        d1[low][e] = -1;
        d1[high][e] = 1;
    }
    let mut d2 = vec![vec![0i32; c.faces.len()]; n_e];
    for f in 0..c.faces.len() {
        let support = c.face_support(f);
        // The support must be a single simple cycle; walk it.
        let mut inc: Vec<Vec<usize>> = vec![Vec::new(); c.n_v];
        for e in support.ones() {
            inc[c.edges[e].0].push(e);
            inc[c.edges[e].1].push(e);
        }
        if inc.iter().any(|l| !l.is_empty() && l.len() != 2) {
            return Err(Complex2Error::FaceSupportNotSimple(f));
        }
        let start = match support.first_one() {
            Some(e) => e,
            None => return Err(Complex2Error::FaceSupportNotSimple(f)),
        };
        let (su, sv) = c.edges[start];
        let (mut at, stop) = (su.max(sv), su.min(sv));
        let mut e = start;
        let mut steps = 0usize;
        loop {
            let (u, v) = c.edges[e];
            let high = u.max(v);
            // We are traversing e into `at`; +1 when traversal matches the
            // low-to-high orientation.
            d2[e][f] = if at == high { 1 } else { -1 };
            steps += 1;
            if at == stop {
                break;
            }
            e = if inc[at][0] == e { inc[at][1] } else { inc[at][0] };
            at = if c.edges[e].0 == at {
                c.edges[e].1
            } else {
                c.edges[e].0
            };
        }
        if steps != support.weight() {
            return Err(Complex2Error::FaceSupportNotSimple(f));
        }
    }
    // d1 * d2 = 0 over the integers.
    for v in 0..c.n_v {
        for f in 0..c.faces.len() {
            let dot: i32 = (0..n_e).map(|e| d1[v][e] * d2[e][f]).sum();
            if dot != 0 {
                return Err(Complex2Error::ReductionCheck(format!(
                    "integer boundary product nonzero at vertex {v}, face {f}"
                )));
            }
        }
    }
    // Mod-2 agreement with the toric code matrices.
    let css = toric_code(c)?;
    for v in 0..c.n_v {
        for e in 0..n_e {
            if (d1[v][e].rem_euclid(2) == 1) != css.hz.get(v, e) {
                return Err(Complex2Error::ReductionCheck(
                    "d1 mod 2 differs from Hz".into(),
                ));
            }
        }
    }
    for e in 0..n_e {
        for f in 0..c.faces.len() {
            if (d2[e][f].rem_euclid(2) == 1) != css.hx.get(f, e) {
                return Err(Complex2Error::ReductionCheck(
                    "d2 mod 2 differs from Hx transpose".into(),
                ));
            }
        }
    }
    Ok(IntegerLift { d1, d2 })
}

/// An exact Clifford map given by the images of every X_j and Z_j.
#[derive(Clone, Debug)]
pub struct CliffordMap {
    n: usize,
    x_images: Vec<PauliOperator>,
    z_images: Vec<PauliOperator>,
}

impl CliffordMap {
    pub fn identity(n: usize) -> Self {
        CliffordMap {
            n,
            x_images: (0..n).map(|q| PauliOperator::x_on(n, q)).collect(),
            z_images: (0..n).map(|q| PauliOperator::z_on(n, q)).collect(),
        }
    }

    /// Post-composes a single-qubit map on qubit `q` sending X to `x_img` and
    /// Z to `z_img` (single-qubit Paulis on `q`, possibly signed).
    pub fn then_single(&mut self, q: usize, x_img: &PauliOperator, z_img: &PauliOperator) {
        for img in self.x_images.iter_mut().chain(self.z_images.iter_mut()) {
            *img = substitute_on_qubit(img, q, x_img, z_img);
        }
    }

    /// Post-composes CNOT with the given control and target.
    pub fn then_cnot(&mut self, control: usize, target: usize) {
        let x_c = PauliOperator::x_on(self.n, control).mul(&PauliOperator::x_on(self.n, target));
        let z_t = PauliOperator::z_on(self.n, control).mul(&PauliOperator::z_on(self.n, target));
        for img in self.x_images.iter_mut().chain(self.z_images.iter_mut()) {
            let mut out = PauliOperator::identity(self.n);
            // Canonical form is all X factors then all Z factors; substitute
            // each factor's image in order.
            for q in img.x_bits().ones() {
                let f = if q == control {
                    x_c.clone()
                } else {
                    PauliOperator::x_on(self.n, q)
                };
                out = out.mul(&f);
            }
            for q in img.z_bits().ones() {
                let f = if q == target {
                    z_t.clone()
                } else {
                    PauliOperator::z_on(self.n, q)
                };
                out = out.mul(&f);
            }
            *img = PauliOperator::new(
                out.x_bits().clone(),
                out.z_bits().clone(),
                (out.phase_exponent() + img.phase_exponent()) % 4,
            );
        }
    }

    /// The image of `p` under the map, with exact phase.
    pub fn apply(&self, p: &PauliOperator) -> PauliOperator {
        let mut out = PauliOperator::identity(self.n);
        for q in p.x_bits().ones() {
            out = out.mul(&self.x_images[q]);
        }
        for q in p.z_bits().ones() {
            out = out.mul(&self.z_images[q]);
        }
        PauliOperator::new(
            out.x_bits().clone(),
            out.z_bits().clone(),
            (out.phase_exponent() + p.phase_exponent()) % 4,
        )
    }
}

/// Replaces the X/Z content of `p` on qubit `q` by the given images,
/// preserving the operator's canonical X-then-Z factor order.
fn substitute_on_qubit(
    p: &PauliOperator,
    q: usize,
    x_img: &PauliOperator,
    z_img: &PauliOperator,
) -> PauliOperator {
    let n = p.num_qubits();
    let mut out = PauliOperator::identity(n);
    for j in p.x_bits().ones() {
        let f = if j == q {
            x_img.clone()
        } else {
            PauliOperator::x_on(n, j)
        };
        out = out.mul(&f);
    }
    for j in p.z_bits().ones() {
        let f = if j == q {
            z_img.clone()
        } else {
            PauliOperator::z_on(n, j)
        };
        out = out.mul(&f);
    }
    PauliOperator::new(
        out.x_bits().clone(),
        out.z_bits().clone(),
        (out.phase_exponent() + p.phase_exponent()) % 4,
    )
}

/// A face stabilizer of the effective toric code, possibly dressed by Z's and
/// an i phase to stay Hermitian.
#[derive(Clone, Debug)]
pub struct TwistedPlaquette {
    /// Full signed operator on the effective qubits.
    pub op: PauliOperator,
    /// Face edges (X support).
    pub x_support: Vec<usize>,
    /// Edges carrying a Z dressing.
    pub z_dressing: Vec<usize>,
    /// True when the operator carries an i factor (odd Y count).
    pub imaginary: bool,
}

/// Result of reducing a graph matching code to a twisted toric code.
#[derive(Clone, Debug)]
pub struct EffectiveCode {
    /// Vertices are avoiding cycles, edges are matching edges, faces are the
    /// images of the extra cycles S'.
    pub complex: TwoComplex,
    pub twisted: Vec<TwistedPlaquette>,
    /// Signed Z-star operators (images of the avoiding cycle operators).
    pub vertex_stars: Vec<PauliOperator>,
    /// The low-depth Clifford: per matching edge, two single-qubit gates and
    /// one CNOT.
    pub reduction: CliffordMap,
    /// Original qubit kept as the effective qubit of each matching edge.
    pub qubit_of_edge: Vec<usize>,
    /// Original qubit absorbed as the ancilla of each matching edge.
    pub ancilla_of_edge: Vec<usize>,
}

/// Reduces a graph matching code whose cycle set is all avoiding cycles plus
/// extra cycles S' (each using at least one matching edge) to a twisted toric
/// code on the complex over the avoiding cycles. Per matching edge the checks
/// become Z on an ancilla; cycle operators become vertex stars (avoiding) and
/// twisted plaquettes (S').
pub fn effective_code(code: &GraphMatchingCode) -> Result<EffectiveCode, Complex2Error> {
    let g = &code.graph;
    let n = g.num_vertices();
    let matching = &code.matching;
    let avoiding = g.avoiding_cycles(matching);
    // Vertex -> avoiding cycle index.
    let mut cycle_of_vertex = vec![usize::MAX; n];
    for (i, cyc) in avoiding.iter().enumerate() {
        for e in cyc.edges().ones() {
            cycle_of_vertex[g.edges()[e].u] = i;
            cycle_of_vertex[g.edges()[e].v] = i;
        }
    }
    debug_assert!(cycle_of_vertex.iter().all(|&c| c != usize::MAX));
    for &e in matching.edges() {
        let (u, v) = (g.edges()[e].u, g.edges()[e].v);
        if cycle_of_vertex[u] == cycle_of_vertex[v] {
            return Err(Complex2Error::DegenerateMatchingEdge(e));
        }
    }
    // Split S into the avoiding cycles and the extra cycles S'.
    let mut extra: Vec<&CycleChain> = Vec::new();
    let mut seen_avoiding = vec![false; avoiding.len()];
    for cyc in code.cycles() {
        if let Some(i) = avoiding.iter().position(|a| a == cyc) {
            seen_avoiding[i] = true;
        } else {
            extra.push(cyc);
        }
    }
    if !seen_avoiding.iter().all(|&s| s) {
        return Err(Complex2Error::MissingAvoidingCycle);
    }
    for (i, cyc) in extra.iter().enumerate() {
        if !matching.edges().iter().any(|&e| cyc.edges().get(e)) {
            return Err(Complex2Error::ExtraCycleDependent(i));
        }
    }
    // Effective complex: one edge per matching edge, oriented from the
    // avoiding cycle of the stored tail.
    let eff_edges: Vec<(usize, usize)> = matching
        .edges()
        .iter()
        .map(|&e| {
            (
                cycle_of_vertex[g.edges()[e].u],
                cycle_of_vertex[g.edges()[e].v],
            )
        })
        .collect();
    let eff_index_of = |e: usize| -> usize {
        matching.edges().binary_search(&e).expect("matching edge")
    };
    // Faces: walk each extra cycle, recording matching edges in order.
    let mut faces = Vec::with_capacity(extra.len());
    for cyc in &extra {
        let ids = cyc.edges().ones();
        let mut inc: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &e in &ids {
            inc[g.edges()[e].u].push(e);
            inc[g.edges()[e].v].push(e);
        }
        let start = ids[0];
        let stop = g.edges()[start].u;
        let mut at = g.edges()[start].v;
        let mut e = start;
        let mut walk = Vec::new();
        loop {
            if matching.contains(e) {
                // Crossing e toward `at`: forward when `at` is the stored head.
                let fwd = at == g.edges()[e].v;
                walk.push((eff_index_of(e), fwd));
            }
            if at == stop {
                break;
            }
            e = if inc[at][0] == e { inc[at][1] } else { inc[at][0] };
            at = if g.edges()[e].u == at {
                g.edges()[e].v
            } else {
                g.edges()[e].u
            };
        }
        faces.push(walk);
    }
    let complex = TwoComplex::new(avoiding.len(), eff_edges, faces)?;

    // Build the reduction Clifford: per matching edge, rotate each endpoint
    // label to Z, then CNOT from the higher qubit onto the lower (ancilla).
    let mut reduction = CliffordMap::identity(n);
    let mut qubit_of_edge = Vec::with_capacity(matching.edges().len());
    let mut ancilla_of_edge = Vec::with_capacity(matching.edges().len());
    for &e in matching.edges() {
        let edge = &g.edges()[e];
        for (q, label) in [(edge.u, edge.label_u), (edge.v, edge.label_v)] {
            let (x_img, z_img) = match label {
                // X -> Z: Hadamard.
                crate::matchcode::Letter::X => {
                    (PauliOperator::z_on(n, q), PauliOperator::x_on(n, q))
                }
                // Y -> Z: fix X, so Z -> -Y.
                crate::matchcode::Letter::Y => (
                    PauliOperator::x_on(n, q),
                    PauliOperator::y_on(n, q).negated(),
                ),
                crate::matchcode::Letter::Z => {
                    (PauliOperator::x_on(n, q), PauliOperator::z_on(n, q))
                }
            };
            reduction.then_single(q, &x_img, &z_img);
        }
        let (anc, eff) = (edge.u.min(edge.v), edge.u.max(edge.v));
        reduction.then_cnot(eff, anc);
        qubit_of_edge.push(eff);
        ancilla_of_edge.push(anc);
    }

    // Checks must map to +Z on their ancilla.
    for (i, &e) in matching.edges().iter().enumerate() {
        let img = reduction.apply(&g.check_of_edge(e)?);
        if img != PauliOperator::z_on(n, ancilla_of_edge[i]) {
            return Err(Complex2Error::ReductionCheck(format!(
                "check of edge {e} maps to {img}, not +Z on its ancilla"
            )));
        }
    }
    let is_ancilla = {
        let mut v = vec![false; n];
        for &a in &ancilla_of_edge {
            v[a] = true;
        }
        v
    };
    // Strips ancilla Z's and relabels effective qubits to edge indices.
    let strip_and_relabel = |img: &PauliOperator| -> Result<PauliOperator, Complex2Error> {
        for q in img.x_bits().ones() {
            if is_ancilla[q] {
                return Err(Complex2Error::ReductionCheck(format!(
                    "image {img} has X content on an ancilla"
                )));
            }
        }
        let n_eff = qubit_of_edge.len();
        let mut x = BitVec::zeros(n_eff);
        let mut z = BitVec::zeros(n_eff);
        for (i, &q) in qubit_of_edge.iter().enumerate() {
            x.set(i, img.x_bits().get(q));
            z.set(i, img.z_bits().get(q));
        }
        // Dropping ancilla Z's multiplies by +Z stabilizers: no phase change.
        Ok(PauliOperator::new(x, z, img.phase_exponent()))
    };

    let mut vertex_stars = Vec::with_capacity(avoiding.len());
    for (i, cyc) in avoiding.iter().enumerate() {
        let reduced = strip_and_relabel(&reduction.apply(&g.cycle_operator(cyc)))?;
        let star: Vec<usize> = complex
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| a == i || b == i)
            .map(|(idx, _)| idx)
            .collect();
        if !reduced.x_bits().is_zero() || reduced.z_bits().ones() != star {
            return Err(Complex2Error::ReductionCheck(format!(
                "avoiding cycle {i} reduces to {reduced}, not its Z-star"
            )));
        }
        vertex_stars.push(reduced);
    }
    let mut twisted = Vec::with_capacity(extra.len());
    for (f, cyc) in extra.iter().enumerate() {
        let reduced = strip_and_relabel(&reduction.apply(&g.cycle_operator(cyc)))?;
        let face_edges = complex.face_support(f);
        if reduced.x_bits() != &face_edges {
            return Err(Complex2Error::ReductionCheck(format!(
                "extra cycle {f} reduces to X support {:?}, face has {:?}",
                reduced.x_bits().ones(),
                face_edges.ones()
            )));
        }
        for star in &vertex_stars {
            if !reduced.commutes_with(star) {
                return Err(Complex2Error::ReductionCheck(format!(
                    "twisted plaquette {f} anticommutes with a vertex star"
                )));
            }
        }
        let mut y = reduced.x_bits().clone();
        y.and_assign(reduced.z_bits());
        twisted.push(TwistedPlaquette {
            x_support: reduced.x_bits().ones(),
            z_dressing: reduced.z_bits().ones(),
            imaginary: y.weight() % 2 == 1,
            op: reduced,
        });
    }
    Ok(EffectiveCode {
        complex,
        twisted,
        vertex_stars,
        reduction,
        qubit_of_edge,
        ancilla_of_edge,
    })
}
