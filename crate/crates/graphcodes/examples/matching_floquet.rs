//! Floquet codes from perfect matchings on trivalent multigraphs.
//!
//! Each vertex carries a qubit; each edge carries a two-qubit check built
//! from its endpoint labels. Measuring the checks of a perfect matching, then
//! another, walks the instantaneous stabilizer group through a schedule. The
//! rank climbs to n_V/2 + 1 and stays there, remeasured cycles give the
//! error-detecting redundancy, and n_V - rank qubits stay logical.

use graphcodes::matchcode::fixtures::{cube, honeycomb_colored_matchings, honeycomb_torus, k4};
use graphcodes::matchcode::{run_matching_schedule, LabeledTrivalentMultigraph, PerfectMatching};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn trace(
    name: &str,
    g: &LabeledTrivalentMultigraph,
    matchings: &[PerfectMatching],
    rounds: usize,
    seed: u64,
) -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    println!(
        "{name}: {} vertices, {} edges, rank Q = {}, predicted ISG rank = {}",
        g.num_vertices(),
        g.num_edges(),
        g.rank_of_q()?,
        g.stabilizer_rank()?,
    );
    assert_eq!(g.rank_of_q()?, g.num_edges() - 1);
    assert_eq!(g.stabilizer_rank()?, g.num_vertices() / 2 + 1);

    let report = run_matching_schedule(g, matchings, rounds, &mut rng)?;
    for b in &report.blocks {
        println!(
            "  round {} block {}: measured {:2} checks, ISG rank {:2}, logicals {}",
            b.round,
            b.block,
            b.outcomes.len(),
            b.isg_rank,
            b.logical_count,
        );
    }
    println!(
        "  {} redundant cycles remeasured, {} cycles accumulated in S",
        report.redundancy_events.len(),
        report.final_s.len(),
    );
    if let Some(ev) = report.redundancy_events.first() {
        println!(
            "  first redundancy at round {} block {}: cycle of weight {}",
            ev.round,
            ev.block,
            ev.cycle.weight(),
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = k4();
    let matchings = g.enumerate_perfect_matchings()?;
    println!("K4 has {} perfect matchings", matchings.len());
    trace("K4", &g, &matchings, 3, 5)?;

    println!();
    let g = cube();
    let matchings = g.enumerate_perfect_matchings()?;
    println!("cube has {} perfect matchings", matchings.len());
    trace("cube", &g, &matchings[..3], 2, 6)?;

    // The honeycomb torus cycles its three edge colors; plaquettes become
    // redundant from the fourth block on, exactly the honeycomb code.
    println!();
    let g = honeycomb_torus(3, 3);
    let colors = honeycomb_colored_matchings(&g);
    trace("honeycomb 3x3", &g, &colors, 2, 7)?;
    Ok(())
}
