//! Toric codes on 2-complexes: distances, cuts, and short-cycle witnesses.
//!
//! Vertex stars give the Z checks and face boundaries the X checks of a CSS
//! code on the edges. Subdividing every edge stretches the X-logical cycles
//! without touching the Z side, the minimum cut over a logical class equals
//! its code distance, and every cocycle is met oddly by a cycle short enough
//! that one of the two stays within 2 sqrt(N) + 1.

use graphcodes::complex2::{
    distance_x, distance_z, hyperbolic_fill, min_cut_for_logical, short_cycle_witness, toric_code,
    torus,
};
use graphcodes::gf2::BitVec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for l in 2..=3 {
        let css = toric_code(&torus(l))?;
        let dx = distance_x(&css)?.unwrap();
        let dz = distance_z(&css)?.unwrap();
        println!("torus({l}): n = {:2}, k = {}, d_x = {dx}, d_z = {dz}", css.n(), css.k());
        assert_eq!((css.k(), dx, dz), (2, l, l));
    }

    // Subdividing each edge into l pieces multiplies d_x (winding cycles get
    // longer) and leaves d_z alone (a cut still takes one piece per crossing
    // path).
    println!();
    let base = torus(2);
    for l in 1..=3 {
        let css = toric_code(&base.subdivide_edges(l))?;
        let dx = distance_x(&css)?.unwrap();
        let dz = distance_z(&css)?.unwrap();
        println!("torus(2) / {l}-subdivision: n = {:2}, d_x = {dx}, d_z = {dz}", css.n());
        assert_eq!((dx, dz), (2 * l, 2));
    }

    // Cut-distance duality: the minimum weight in the class of a winding
    // Z-logical equals the smallest qubit set meeting every anticommuting
    // X-logical, here the two horizontal edges of one column.
    println!();
    let css = toric_code(&torus(2))?;
    let alpha = BitVec::from_indices(css.n(), &[0, 2]);
    let (cut, witness) = min_cut_for_logical(&css, &alpha)?;
    println!("torus(2) winding class: min cut {cut} on edges {:?} (= d_z)", witness.ones());
    assert_eq!(cut, 2);

    // Short-cycle witness on the torus: the column cocycle of weight 3 is
    // crossed oddly by a row cycle of weight 3.
    println!();
    let css = toric_code(&torus(3))?;
    let s = BitVec::from_indices(18, &[0, 3, 6]);
    let w = short_cycle_witness(&css, &s)?.unwrap();
    let bound = 2.0 * (css.n() as f64).sqrt() + 1.0;
    println!(
        "torus(3) column cocycle: witness cycle {:?}, min(3, {}) <= {bound:.1}",
        w.ones(),
        w.weight(),
    );
    assert!(w.dot(&s) && w.weight() == 3);

    // Subdividing inflates the cocycle but not the witness: in the dual of a
    // 4-subdivided torus(2), an original winding cycle becomes a weight-8
    // cocycle whose witness still has weight 2.
    let dual = toric_code(&torus(2).subdivide_edges(4))?.dual();
    let s = BitVec::from_indices(32, &(0..8).collect::<Vec<_>>());
    let w = short_cycle_witness(&dual, &s)?.unwrap();
    let bound = 2.0 * (dual.n() as f64).sqrt() + 1.0;
    println!(
        "subdivided dual: cocycle weight {}, witness weight {}, min {} <= {bound:.1}",
        s.weight(),
        w.weight(),
        w.weight().min(s.weight()),
    );
    assert!(w.weight().min(s.weight()) as f64 <= bound);

    // Why no complex can dodge the witness bound by stretching cycles: nested
    // rings halve outward, so filling a disk creates logarithmic shortcuts
    // between antipodal boundary vertices.
    println!();
    for m in [8, 16, 32] {
        let c = hyperbolic_fill(m);
        let across = c.graph_distance(0, m / 2).unwrap();
        println!(
            "hyperbolic_fill({m}): boundary route {}, through the fill {across}",
            m / 2,
        );
        assert!(across as f64 <= 2.0 * (m as f64).log2());
    }
    Ok(())
}
