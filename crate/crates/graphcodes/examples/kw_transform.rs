//! Kramers-Wannier transform on a ring, driven purely by measurement.
//!
//! One pass of the four-block schedule (Z on odd sites, XX pairs, offset ZZ
//! pairs, X on even sites) maps operators on the even-site input register to
//! operators on the odd-site output register. Transporting a two-qubit input
//! error through the measured checks turns it into a string whose weight
//! counts the pairs it spans: measurement-based stabilizer readout amplifies
//! error weight.

use graphcodes::pauli::PauliOperator;
use graphcodes::stab::{kw_schedule, run_schedule, transport, GroupMembership, StabilizerTableau};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = 12;
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let schedule = kw_schedule(m)?;
    println!("ring of {m} qubits, {} measurements per pass", schedule.ops.len());

    let mut tableau = StabilizerTableau::maximally_mixed(m);
    let trace = run_schedule(&mut tableau, &schedule, 1, &mut rng)?;
    let round = &trace[0];
    println!("rank after one pass: {} (m/2 singles + the all-X ring product)", tableau.rank());
    assert_eq!(tableau.rank(), m / 2 + 1);

    let all_x = (0..m).fold(PauliOperator::identity(m), |acc, q| {
        acc.mul(&PauliOperator::x_on(m, q))
    });
    assert_ne!(tableau.contains(&all_x), GroupMembership::Absent);

    let measured: Vec<(PauliOperator, i8)> = schedule
        .ops
        .iter()
        .cloned()
        .zip(round.outcomes.iter().copied())
        .collect();

    // Z on an even (input) site comes out as a ZZ pair on its odd neighbours.
    println!("\nsingle Z on the input register:");
    for k in [1, 2] {
        let z = PauliOperator::z_on(m, 2 * k);
        let out = transport(&z, &measured)?;
        println!("  {} -> {}", z, out);
        let expect = PauliOperator::z_on(m, 2 * k - 1).mul(&PauliOperator::z_on(m, 2 * k + 1));
        assert!(out.same_shape(&expect), "Z_2k lands on Z_(2k-1) Z_(2k+1)");
    }

    // An adjacent X pair on the input register contracts to a single X
    // between them, once reduced modulo the final stabilizer group.
    println!("\nadjacent X pair on the input register:");
    let xx = PauliOperator::x_on(m, 2).mul(&PauliOperator::x_on(m, 4));
    let out = tableau.reduce_mod_group(&transport(&xx, &measured)?);
    println!("  {} -> {}", xx, out);
    assert!(out.same_shape(&PauliOperator::x_on(m, 3)));

    // Error amplification: X_0 X_2j spans j pairs, and its image is a string
    // of j single-site X operators on the odd sites in between (the ring
    // shortcut takes over past the halfway point).
    println!("\ninput error X_0 X_2j against pair separation j:");
    for j in 1..m / 2 {
        let err = PauliOperator::x_on(m, 0).mul(&PauliOperator::x_on(m, 2 * j));
        let out = tableau.reduce_mod_group(&transport(&err, &measured)?);
        let expect = j.min(m / 2 - j);
        println!("  j = {j}: {} -> {}   weight {}", err, out, out.weight());
        assert_eq!(out.weight(), expect, "string weight equals spanned pairs");
        assert!(out.x_bits().ones().iter().all(|&q| q % 2 == 1), "string lives on odd sites");
    }

    println!("\na weight-2 input error can come out with weight m/4; measuring a");
    println!("high-weight stabilizer this way is not fault tolerant on its own.");
    Ok(())
}
