//! Statistical characterization of the two-step hole decoder against exact
//! maximum likelihood on the same bulk.
//!
//! The estimator is Rao-Blackwellized: instead of counting raw decoder
//! failures it samples syndromes and computes, per syndrome, the exact
//! conditional failure probability of each decoder. For the two-step decoder
//! that conditional probability is available in closed form because step one
//! samples a chain from the modified-graph coset proportionally to its weight
//! and step two is a deterministic function of that chain's spoke parities.
//!
//! Measured ground truth on the d=4, t=4, p=0.05 star bulk (100k syndromes):
//! exact-ML failure 0.00338, two-step failure 0.00823, paired separation
//! 20 sigma, ratio 2.43. The two-step decoder is Monte-Carlo grade, not
//! ML grade: its first step commits to a sampled chain, so it fails roughly
//! twice as often as the optimal decoder even before step-two losses.

use graphcodes::decode::*;
use graphcodes::gf2::{BitVec, RowSpace};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Gray-code walk over base + span(rows), visiting (toggled row, chain, weight).
fn walk(base: &BitVec, rows: &[Vec<usize>], mut f: impl FnMut(u64, &BitVec, usize)) {
    let mut cur = base.clone();
    let mut w = cur.weight();
    f(u64::MAX, &cur, w);
    let steps = 1u64 << rows.len();
    for step in 1..steps {
        let j = step.trailing_zeros() as usize;
        for &e in &rows[j] {
            if cur.get(e) {
                w -= 1;
            } else {
                w += 1;
            }
            cur.flip(e);
        }
        f(j as u64, &cur, w);
    }
}

#[test]
fn two_step_failure_is_mc_grade_not_ml_grade() {
    let d = 4usize;
    let t = 4usize;
    let p = 0.05f64;
    let bulk = hole_star_bulk(d, t, p).unwrap();
    let r = p / (1.0 - p);
    let mut rpow = [0.0f64; 64];
    for (w, slot) in rpow.iter_mut().enumerate() {
        *slot = r.powi(w as i32);
    }
    let db = bulk.center_dangling(false);

    // Light cycle bases: tube cells, plus the center column on the full graph.
    let full_rows: Vec<Vec<usize>> = {
        let mut rows: Vec<Vec<usize>> = bulk.graph.two_cells().iter().map(|c| c.ones()).collect();
        let mut col = vec![db, bulk.center_dangling(true)];
        for s in 0..t {
            col.push(bulk.center_timelike(s));
        }
        rows.push(col);
        rows
    };
    let mod_rows: Vec<Vec<usize>> = bulk.modified.two_cells().iter().map(|c| c.ones()).collect();
    {
        let mut rs = RowSpace::new();
        for row in &full_rows {
            rs.insert(&BitVec::from_indices(bulk.graph.n_edges(), row));
        }
        assert_eq!(rs.rank(), bulk.graph.boundary_matrix().kernel_basis().len());
        let mut rs = RowSpace::new();
        for row in &mod_rows {
            rs.insert(&BitVec::from_indices(bulk.modified.n_edges(), row));
        }
        assert_eq!(rs.rank(), bulk.modified.boundary_matrix().kernel_basis().len());
    }
    let full_boundary = bulk.graph.boundary_matrix();
    let mod_boundary = bulk.modified.boundary_matrix();
    let full_flip: Vec<usize> =
        full_rows.iter().map(|row| row.contains(&db) as usize).collect();
    let spoke_count = (t + 1) * d;
    let par_of = |ones: &[usize]| -> usize {
        let mut par = 0usize;
        for &e in ones {
            if e < spoke_count {
                par ^= 1 << (e / d);
            }
        }
        par
    };
    let mod_masks: Vec<usize> = mod_rows.iter().map(|row| par_of(row)).collect();

    let trials = 3_000usize;
    let mut sum_ml = 0.0f64;
    let mut sum_ts = 0.0f64;
    let mut sum_diff = 0.0f64;
    let mut sum_sq_diff = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..trials {
        let red = sample_errors(&bulk.graph, &mut rng);
        let syn = syndrome(&bulk.graph, &red);

        // Exact class posterior on the full graph.
        let base = full_boundary.solve(&syn).expect("solvable");
        let mut z = [0.0f64; 2];
        let mut cls = base.get(db) as usize;
        walk(&base, &full_rows, |j, _, w| {
            if j != u64::MAX {
                cls ^= full_flip[j as usize];
            }
            z[cls] += rpow[w];
        });
        let ztot = z[0] + z[1];
        let post = [z[0] / ztot, z[1] / ztot];
        let top = post[0].max(post[1]);
        let tied: Vec<usize> = (0..2).filter(|&c| post[c] >= top - 1e-12 * top).collect();
        let f_ml: f64 = (0..2)
            .map(|c| {
                let pen = if tied.contains(&c) { 1.0 - 1.0 / tied.len() as f64 } else { 1.0 };
                post[c] * pen
            })
            .sum();

        // Step-2 pick table over spoke-parity vectors (t+1 slices): required
        // column parities determine two completions; the lighter one wins,
        // ties keep class 0.
        let mut pick_table = [0usize; 32];
        for (par, slot) in pick_table.iter_mut().enumerate() {
            let mut a = [false; 5];
            for (s, ai) in a.iter_mut().enumerate() {
                *ai = syn.get(bulk.center(s)) ^ (par >> s & 1 == 1);
            }
            let mut w0 = 0usize;
            let mut prev = false;
            for &req in a.iter().take(t) {
                let cur = req ^ prev;
                w0 += cur as usize;
                prev = cur;
            }
            w0 += (a[t] ^ prev) as usize;
            let w1 = (t + 2) - w0;
            *slot = (w1 < w0) as usize;
        }

        // Enumerate the modified-graph coset, tracking spoke parities.
        let mut syn_mod = BitVec::zeros(bulk.modified.n_vertices());
        for s in 0..=t {
            for i in 0..d {
                syn_mod.set(s * d + i, syn.get(bulk.rim(i, s)));
            }
        }
        let base2 = mod_boundary.solve(&syn_mod).expect("solvable");
        let mut wsum = [0.0f64; 2];
        let mut par = par_of(&base2.ones());
        walk(&base2, &mod_rows, |j, _, w| {
            if j != u64::MAX {
                par ^= mod_masks[j as usize];
            }
            wsum[pick_table[par]] += rpow[w];
        });
        let wtot = wsum[0] + wsum[1];
        let p_pick = [wsum[0] / wtot, wsum[1] / wtot];
        let f_ts = p_pick[0] * post[1] + p_pick[1] * post[0];

        sum_ml += f_ml;
        sum_ts += f_ts;
        let diff = f_ts - f_ml;
        sum_diff += diff;
        sum_sq_diff += diff * diff;
    }
    let n = trials as f64;
    let ml_rate = sum_ml / n;
    let ts_rate = sum_ts / n;
    let dmean = sum_diff / n;
    let dvar = (sum_sq_diff - n * dmean * dmean) / (n - 1.0);
    let dsigma = (dvar / n).sqrt();

    // The two estimates bracket their 100k-trial reference values.
    assert!((0.0025..0.0045).contains(&ml_rate), "ml_rate {ml_rate}");
    assert!((0.0060..0.0110).contains(&ts_rate), "ts_rate {ts_rate}");
    // The decoders are genuinely different: the two-step decoder fails more
    // often than exact ML by a margin far beyond sampling noise.
    assert!(dmean > 3.0 * dsigma, "separation {dmean} vs sigma {dsigma}");
    let ratio = ts_rate / ml_rate;
    assert!((1.8..3.2).contains(&ratio), "ratio {ratio}");

    // Cross-check the analytic pick model against the real decoder: its
    // empirical class-failure rate must agree with the conditional estimate.
    let real_trials = 2_000usize;
    let mut fails = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..real_trials {
        let red = sample_errors(&bulk.graph, &mut rng);
        let out = two_step_hole_decoder(&bulk, &red, &mut rng).unwrap();
        if out.class_flip {
            fails += 1;
        }
    }
    let real_rate = fails as f64 / real_trials as f64;
    let sigma = (ts_rate * (1.0 - ts_rate) / real_trials as f64).sqrt();
    assert!(
        (real_rate - ts_rate).abs() <= 3.0 * sigma + 1e-9,
        "real {real_rate} vs conditional {ts_rate}"
    );
}
