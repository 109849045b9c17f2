//! Named experiments behind the command-line binary.
//!
//! Every experiment takes a key=value parameter map plus a seed, a trial
//! count, and an output path, and emits CSV with a fixed header row. Trials
//! run on a worker pool with one RNG stream per trial index, so identical
//! config and seed give byte-identical output regardless of scheduling.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chainmap::{
    css_to_complex, measure_x_product, stabsim_cross_check, steane_code, triangle_code,
    verify_chain_map, ChainMapError, StabCrossCheck,
};
use crate::complex2::{distance_x, distance_z, toric_code, torus};
use crate::decode::{
    build_bulk_graph, ml_decode, mwpm_decode, sample_errors, syndrome, BoundaryKind, Decision,
    PatchSides, SpatialEdge, Topology, VacancySpec,
};
use crate::decode::mc_decode;
use crate::effective::{
    column_failure_probability, ladder_independence_check, ladder_probability, Boundary,
    ColumnModel, TransferMatrixModel,
};
use crate::gf2::BitVec;
use crate::ising::{crossover_experiment, exact_ml_failure, ml_decode_record, simulate, IsingSpec,
    IsingVerdict};
use crate::matchcode::{fixtures, run_matching_schedule, LabeledTrivalentMultigraph};

#[derive(Debug)]
pub struct CliError(pub String);

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for CliError {}

fn err(e: impl fmt::Display) -> CliError {
    CliError(e.to_string())
}

/// One experiment's identity, parameter schema, and output columns. The
/// `params` text is itself valid key=value config listing every accepted
/// key with its default ("<required>" for mandatory ones).
#[derive(Clone, Copy, Debug)]
pub struct ExperimentInfo {
    pub name: &'static str,
    pub summary: &'static str,
    pub params: &'static [(&'static str, &'static str)],
    pub headers: &'static str,
}

pub fn list_experiments() -> &'static [ExperimentInfo] {
    &[
        ExperimentInfo {
            name: "isg-trace",
            summary: "measure matching checks round by round and trace the group rank",
            params: &[("graph", "k4"), ("rounds", "2"), ("l1", "2"), ("l2", "2")],
            headers: "round,block,checks_measured,isg_rank,logicals,redundant_cycles",
        },
        ExperimentInfo {
            name: "matching-code",
            summary: "structural ranks of the matching codes on the built-in graphs",
            params: &[("graph", "all"), ("l1", "2"), ("l2", "2")],
            headers: "graph,vertices,edges,rank_q,rank_s,perfect_matchings",
        },
        ExperimentInfo {
            name: "toric-distance",
            summary: "qubit count and brute-force distances of the L x L toric code",
            params: &[("l", "<required>"), ("subdivide", "1")],
            headers: "n,d_x,d_z",
        },
        ExperimentInfo {
            name: "decode-sim",
            summary: "sample errors on a vacancy check graph and decode each trial",
            params: &[
                ("lx", "2"),
                ("ly", "2"),
                ("t", "2"),
                ("p", "0.05"),
                ("topology", "torus"),
                ("sides", "rough,rough,rough,rough"),
                ("dead", ""),
                ("decoder", "ml"),
            ],
            headers: "seed,trial,class,verdict,errors",
        },
        ExperimentInfo {
            name: "column-model",
            summary: "closed-form failure of the stacked-column effective model",
            params: &[("t", "3"), ("d", "2"), ("p", "0.1"), ("boundary", "periodic")],
            headers: "t,d,p,boundary,failure",
        },
        ExperimentInfo {
            name: "ladder",
            summary: "exact ladder chain distribution against the independent-flip approximation",
            params: &[("eps", "0.01"), ("eps_prime", "0.01"), ("t", "6")],
            headers: "pattern,exact,independent,tv_total",
        },
        ExperimentInfo {
            name: "ising-toy",
            summary: "vacancy chain failure, analytic (trials=0) or Monte Carlo; with grid=... runs the two-interval crossover curve",
            params: &[
                ("n", "3"),
                ("t", "2"),
                ("p", "0.1"),
                ("vacancies", "all"),
                ("l1", "5"),
                ("l2", "5"),
                ("grid", ""),
            ],
            headers: "n,t,p,vacancies,mode,trials,failure,sigma (grid mode: t,failure,sigma,slope)",
        },
        ExperimentInfo {
            name: "chainmap-demo",
            summary: "measure an X-product on a CSS code at the chain level and cross-check it",
            params: &[("code", "triangle"), ("w", "0,1")],
            headers: "code,w,status,outcome,v,square_z,square_q,z_rank_before,z_rank_after,x_rank_before,x_rank_after",
        },
    ]
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub trials: Option<usize>,
    pub out: Option<String>,
}

/// Parses plain key=value text: one pair per line, blank lines and
/// #-comments skipped, keys lowercased.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError(format!(
                "config line {}: expected key=value, got {raw:?}",
                lineno + 1
            )));
        };
        map.insert(k.trim().to_lowercase(), v.trim().to_string());
    }
    Ok(map)
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Fixed-point probability formatting: nine digits with trailing zeros
/// trimmed, so analytic values print exactly and reruns stay byte-identical.
fn fmt_prob(x: f64) -> String {
    let s = format!("{x:.9}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() {
        "0".to_string()
    } else {
        s.to_string()
    }
}

struct Params<'a>(&'a ExperimentConfig);

impl Params<'_> {
    fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        for k in self.0.params.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(CliError(format!(
                    "unknown parameter {k:?} for {}; accepted: {}",
                    self.0.experiment,
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    fn str_or<'s>(&'s self, key: &str, default: &'s str) -> &'s str {
        match self.0.params.get(key) {
            Some(v) if !v.is_empty() => v,
            _ => default,
        }
    }

    fn opt(&self, key: &str) -> Option<&str> {
        self.0.params.get(key).map(|s| s.as_str()).filter(|s| !s.is_empty())
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.opt(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|e| CliError(format!("parameter {key}={v:?}: {e}"))),
        }
    }

    fn require_usize(&self, key: &str) -> Result<usize, CliError> {
        self.opt(key)
            .ok_or_else(|| CliError(format!("missing required parameter {key:?}")))?
            .parse()
            .map_err(|e| CliError(format!("parameter {key}: {e}")))
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.opt(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|e| CliError(format!("parameter {key}={v:?}: {e}"))),
        }
    }
}

fn fixture_graph(p: &Params, name: &str) -> Result<LabeledTrivalentMultigraph, CliError> {
    match name {
        "k4" => Ok(fixtures::k4()),
        "theta" => Ok(fixtures::theta()),
        "prism" => Ok(fixtures::prism()),
        "cube" => Ok(fixtures::cube()),
        "honeycomb" => {
            let l1 = p.usize_or("l1", 2)?;
            let l2 = p.usize_or("l2", 2)?;
            Ok(fixtures::honeycomb_torus(l1, l2))
        }
        other => Err(CliError(format!(
            "unknown graph {other:?}; accepted: k4, theta, prism, cube, honeycomb"
        ))),
    }
}

fn isg_trace(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let p = Params(cfg);
    p.check_keys(&["graph", "rounds", "l1", "l2"])?;
    let name = p.str_or("graph", "k4").to_string();
    let g = fixture_graph(&p, &name)?;
    let rounds = p.usize_or("rounds", 2)?;
    let matchings = if name == "honeycomb" {
        fixtures::honeycomb_colored_matchings(&g).to_vec()
    } else {
        g.enumerate_perfect_matchings().map_err(err)?
    };
    let mut rng = trial_rng(cfg.seed, 0);
    let report = run_matching_schedule(&g, &matchings, rounds, &mut rng).map_err(err)?;
    let mut csv = String::from("round,block,checks_measured,isg_rank,logicals,redundant_cycles\n");
    for b in &report.blocks {
        let redundant = report
            .redundancy_events
            .iter()
            .filter(|e| e.round == b.round && e.block == b.block)
            .count();
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            b.round,
            b.block,
            b.outcomes.len(),
            b.isg_rank,
            b.logical_count,
            redundant
        )
        .unwrap();
    }
    Ok(csv)
}

fn matching_code(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let p = Params(cfg);
    p.check_keys(&["graph", "l1", "l2"])?;
    let which = p.str_or("graph", "all").to_string();
    let named: Vec<(String, LabeledTrivalentMultigraph)> = if which == "all" {
        vec![
            ("k4".into(), fixtures::k4()),
            ("theta".into(), fixtures::theta()),
            ("prism".into(), fixtures::prism()),
            ("cube".into(), fixtures::cube()),
            ("honeycomb".into(), fixtures::honeycomb_torus(2, 2)),
        ]
    } else {
        vec![(which.clone(), fixture_graph(&p, &which)?)]
    };
    let mut csv = String::from("graph,vertices,edges,rank_q,rank_s,perfect_matchings\n");
    for (name, g) in named {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            name,
            g.num_vertices(),
            g.num_edges(),
            g.rank_of_q().map_err(err)?,
            g.stabilizer_rank().map_err(err)?,
            g.enumerate_perfect_matchings().map_err(err)?.len()
        )
        .unwrap();
    }
    Ok(csv)
}

fn toric_distance(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let p = Params(cfg);
    p.check_keys(&["l", "subdivide"])?;
    let l = p.require_usize("l")?;
    let subdivide = p.usize_or("subdivide", 1)?;
    if l < 2 {
        return Err(CliError("l must be at least 2".into()));
    }
    if subdivide < 1 {
        return Err(CliError("subdivide must be at least 1".into()));
    }
    let complex = torus(l).subdivide_edges(subdivide);
    let css = toric_code(&complex).map_err(err)?;
    let dx = distance_x(&css).map_err(err)?;
    let dz = distance_z(&css).map_err(err)?;
    let show = |d: Option<usize>| d.map_or_else(|| "none".to_string(), |v| v.to_string());
    Ok(format!(
        "n,d_x,d_z\n{},{},{}\n",
        css.n(),
        show(dx),
        show(dz)
    ))
}

fn parse_sides(text: &str) -> Result<PatchSides, CliError> {
    let kinds: Vec<BoundaryKind> = text
        .split(',')
        .map(|s| match s.trim() {
            "rough" => Ok(BoundaryKind::Rough),
            "smooth" => Ok(BoundaryKind::Smooth),
            other => Err(CliError(format!("bad boundary kind {other:?}"))),
        })
        .collect::<Result<_, _>>()?;
    if kinds.len() != 4 {
        return Err(CliError(
            "sides needs four entries: west,east,north,south".into(),
        ));
    }
    Ok(PatchSides {
        west: kinds[0],
        east: kinds[1],
        north: kinds[2],
        south: kinds[3],
    })
}

fn decode_sim(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let p = Params(cfg);
    p.check_keys(&["lx", "ly", "t", "p", "topology", "sides", "dead", "decoder"])?;
    let topology = match p.str_or("topology", "torus") {
        "torus" => Topology::Torus,
        "patch" => Topology::Patch(parse_sides(p.str_or("sides", "rough,rough,rough,rough"))?),
        other => return Err(CliError(format!("unknown topology {other:?}"))),
    };
    let dead: Vec<SpatialEdge> = match p.opt("dead") {
        None => Vec::new(),
        Some(text) => text
            .split(',')
            .map(|s| s.trim().parse().map_err(CliError))
            .collect::<Result<_, _>>()?,
    };
    let spec = VacancySpec {
        lx: p.usize_or("lx", 2)?,
        ly: p.usize_or("ly", 2)?,
        topology,
        dead,
        t: p.usize_or("t", 2)?,
        p: p.f64_or("p", 0.05)?,
    };
    let decoder = p.str_or("decoder", "ml").to_string();
    if !["ml", "mc", "mwpm"].contains(&decoder.as_str()) {
        return Err(CliError(format!("unknown decoder {decoder:?}")));
    }
    let g = build_bulk_graph(&spec).map_err(err)?;
    let trials = cfg.trials.unwrap_or(100);
    let seed = cfg.seed;
    let rows: Vec<Result<String, CliError>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial as u64);
            let chain = sample_errors(&g, &mut rng);
            let syn = syndrome(&g, &chain);
            let truth = g.class_of(&chain);
            let verdict = match decoder.as_str() {
                "ml" => {
                    let d = ml_decode(&g, &syn).map_err(err)?;
                    match d.decision {
                        Decision::Tie(_) => "tie",
                        Decision::Class(c) if c == truth => "success",
                        Decision::Class(_) => "failure",
                    }
                }
                "mc" => {
                    let blue = mc_decode(&g, &syn, &mut rng).map_err(err)?;
                    if g.class_of(&blue) == truth {
                        "success"
                    } else {
                        "failure"
                    }
                }
                _ => {
                    let blue = mwpm_decode(&g, &syn).map_err(err)?;
                    if g.class_of(&blue) == truth {
                        "success"
                    } else {
                        "failure"
                    }
                }
            };
            Ok(format!(
                "{seed},{trial},{truth},{verdict},{}",
                chain.weight()
            ))
        })
        .collect();
    let mut csv = String::from("seed,trial,class,verdict,errors\n");
    for row in rows {
        csv.push_str(&row?);
        csv.push('\n');
    }
    Ok(csv)
}

fn column_model(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let p = Params(cfg);
    p.check_keys(&["t", "d", "p", "boundary"])?;
    let t = p.usize_or("t", 3)?;
    let d = p.usize_or("d", 2)?;
    let prob = p.f64_or("p", 0.1)?;
    let boundary = match p.str_or("boundary", "periodic") {
        "periodic" => Boundary::Periodic,
        "dangling" => Boundary::Dangling,
        other => return Err(CliError(format!("unknown boundary {other:?}"))),
    };
    let model = ColumnModel::new(t, vec![prob; d], boundary).map_err(err)?;
    let failure = column_failure_probability(&model);
    Ok(format!(
        "t,d,p,boundary,failure\n{t},{d},{},{},{}\n",
        fmt_prob(prob),
        p.str_or("boundary", "periodic"),
        fmt_prob(failure)
    ))
}

fn ladder(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let p = Params(cfg);
    p.check_keys(&["eps", "eps_prime", "t"])?;
    let eps = p.f64_or("eps", 0.01)?;
    let eps_prime = p.f64_or("eps_prime", 0.01)?;
    let t = p.usize_or("t", 6)?;
    if t > 16 {
        return Err(CliError(format!("t={t} would emit 2^{t} rows; cap is 16")));
    }
    let model = TransferMatrixModel::new(eps, eps_prime, t).map_err(err)?;
    let tv = ladder_independence_check(&model).map_err(err)?;
    let mut csv = String::from("pattern,exact,independent,tv_total\n");
    let mut b = vec![false; t];
    for mask in 0u64..(1u64 << t) {
        for (i, bi) in b.iter_mut().enumerate() {
            *bi = mask >> i & 1 == 1;
        }
        let (exact, approx) = ladder_probability(&model, &b).map_err(err)?;
        let pattern: String = b.iter().map(|&bi| if bi { '1' } else { '0' }).collect();
        writeln!(
            csv,
            "{pattern},{},{},{}",
            fmt_prob(exact),
            fmt_prob(approx),
            fmt_prob(tv)
        )
        .unwrap();
    }
    Ok(csv)
}

fn ising_toy(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let p = Params(cfg);
    p.check_keys(&["n", "t", "p", "vacancies", "l1", "l2", "grid"])?;
    let prob = p.f64_or("p", 0.1)?;

    if let Some(grid_text) = p.opt("grid") {
        let l1 = p.usize_or("l1", 5)?;
        let l2 = p.usize_or("l2", 5)?;
        let grid: Vec<usize> = grid_text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|e| CliError(format!("grid entry {s:?}: {e}")))
            })
            .collect::<Result<_, _>>()?;
        let trials = cfg.trials.unwrap_or(30_000);
        let mut rng = trial_rng(cfg.seed, 0);
        let curve = crossover_experiment(l1, l2, prob, &grid, trials, &mut rng).map_err(err)?;
        let mut csv = String::from("t,failure,sigma,slope\n");
        for (i, pt) in curve.points.iter().enumerate() {
            let slope = if i == 0 {
                String::new()
            } else {
                fmt_prob(curve.slopes[i - 1])
            };
            writeln!(
                csv,
                "{},{},{},{slope}",
                pt.t,
                fmt_prob(pt.failure),
                fmt_prob(pt.sigma)
            )
            .unwrap();
        }
        return Ok(csv);
    }

    let n = p.usize_or("n", 3)?;
    let t = p.usize_or("t", 2)?;
    let vac_text = p.str_or("vacancies", "all").to_string();
    let vacancies: Vec<usize> = if vac_text == "all" {
        (1..n).collect()
    } else {
        vac_text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|e| CliError(format!("vacancy {s:?}: {e}")))
            })
            .collect::<Result<_, _>>()?
    };
    let spec = IsingSpec::new(n, t, prob, vacancies).map_err(err)?;
    let trials = cfg.trials.unwrap_or(0);
    let (mode, failure, sigma) = if trials == 0 {
        (String::from("analytic"), exact_ml_failure(&spec).map_err(err)?, 0.0)
    } else {
        let seed = cfg.seed;
        let per_trial: Vec<f64> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = trial_rng(seed, trial as u64);
                let record = simulate(&spec, &mut rng);
                let decision = ml_decode_record(&spec, &record);
                let truth = if record.initial_down {
                    IsingVerdict::Down
                } else {
                    IsingVerdict::Up
                };
                if decision.verdict == IsingVerdict::NoDecoding {
                    0.5
                } else if decision.verdict != truth {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let mean = per_trial.iter().sum::<f64>() / trials as f64;
        let var = per_trial.iter().map(|f| (f - mean) * (f - mean)).sum::<f64>()
            / trials as f64;
        (String::from("mc"), mean, (var / trials as f64).sqrt())
    };
    Ok(format!(
        "n,t,p,vacancies,mode,trials,failure,sigma\n{n},{t},{},{},{mode},{trials},{},{}\n",
        fmt_prob(prob),
        vac_text.replace(',', ";"),
        fmt_prob(failure),
        fmt_prob(sigma)
    ))
}

fn chainmap_demo(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let p = Params(cfg);
    p.check_keys(&["code", "w"])?;
    let code_name = p.str_or("code", "triangle").to_string();
    let css = match code_name.as_str() {
        "triangle" => triangle_code(),
        "steane" => steane_code(),
        "toric" => toric_code(&torus(2)).map_err(err)?,
        other => return Err(CliError(format!("unknown code {other:?}"))),
    };
    let w_text = p.str_or("w", "0,1").to_string();
    let indices: Vec<usize> = w_text
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|e| CliError(format!("w entry {s:?}: {e}")))
        })
        .collect::<Result<_, _>>()?;
    if let Some(&bad) = indices.iter().find(|&&i| i >= css.n()) {
        return Err(CliError(format!("qubit {bad} out of range for n={}", css.n())));
    }
    let w = BitVec::from_indices(css.n(), &indices);
    let complex = css_to_complex(&css);
    let mut rng = trial_rng(cfg.seed, 0);
    let cross = stabsim_cross_check(&css, &w, &mut rng).map_err(err)?;
    let (status, outcome) = match cross {
        StabCrossCheck::Reshaped { outcome } => ("reshaped", outcome),
        StabCrossCheck::Deterministic { outcome } => ("deterministic", outcome),
        StabCrossCheck::Logical { outcome } => ("logical", outcome),
    };
    let join = |v: &BitVec| {
        v.ones()
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(";")
    };
    let mut csv = String::from(
        "code,w,status,outcome,v,square_z,square_q,z_rank_before,z_rank_after,x_rank_before,x_rank_after\n",
    );
    match measure_x_product(&complex, &w) {
        Ok((target, map, data)) => {
            let report = verify_chain_map(&complex, &target, &map).map_err(err)?;
            writeln!(
                csv,
                "{code_name},{},{status},{outcome},{},{},{},{},{},{},{}",
                join(&w),
                join(&data.v),
                report.square_z_ok,
                report.square_q_ok,
                report.z_rank_source,
                report.z_rank_target,
                report.x_rank_source,
                report.x_rank_target
            )
            .unwrap();
        }
        Err(ChainMapError::AlreadyStabilizer) | Err(ChainMapError::CommutesWithEverything) => {
            let zr = complex.dz().rank();
            let xr = complex.dq().rank();
            writeln!(
                csv,
                "{code_name},{},{status},{outcome},,,,{zr},{zr},{xr},{xr}",
                join(&w)
            )
            .unwrap();
        }
        Err(e) => return Err(err(e)),
    }
    Ok(csv)
}

/// Runs one experiment and returns its CSV artifact.
pub fn run(cfg: &ExperimentConfig) -> Result<String, CliError> {
    match cfg.experiment.as_str() {
        "isg-trace" => isg_trace(cfg),
        "matching-code" => matching_code(cfg),
        "toric-distance" => toric_distance(cfg),
        "decode-sim" => decode_sim(cfg),
        "column-model" => column_model(cfg),
        "ladder" => ladder(cfg),
        "ising-toy" => ising_toy(cfg),
        "chainmap-demo" => chainmap_demo(cfg),
        other => Err(CliError(format!(
            "unknown experiment {other:?}; known: {}",
            list_experiments()
                .iter()
                .map(|e| e.name)
                .collect::<Vec<_>>()
                .join(", ")
        ))),
    }
}

fn help_text() -> String {
    let mut out = String::from(
        "graphcodes: experiments on quantum codes built from graphs\n\n\
         usage:\n  graphcodes [--experiment] NAME [KEY=VALUE ...] [--config FILE] \
         [--seed U64] [--trials N] [--out PATH]\n\n\
         Config files are plain key=value lines; '#' starts a comment. Command-line\n\
         KEY=VALUE pairs override the file. seed, trials, and out may also be given\n\
         as keys. Output is CSV with a fixed header row, written to --out or stdout.\n\
         Identical config and seed give byte-identical output.\n\nexperiments:\n",
    );
    for info in list_experiments() {
        writeln!(out, "  {}\n      {}", info.name, info.summary).unwrap();
        let params: Vec<String> = info
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        writeln!(out, "      parameters: {}", params.join(" ")).unwrap();
        writeln!(out, "      columns: {}", info.headers).unwrap();
    }
    out
}

fn parse_args(argv: &[String]) -> Result<ExperimentConfig, CliError> {
    let mut experiment: Option<String> = None;
    let mut file_params = BTreeMap::new();
    let mut cli_params: BTreeMap<String, String> = BTreeMap::new();
    let mut seed: Option<u64> = None;
    let mut trials: Option<usize> = None;
    let mut out: Option<String> = None;
    let mut i = 0;
    let next = |i: &mut usize, flag: &str| -> Result<String, CliError> {
        *i += 1;
        argv.get(*i)
            .cloned()
            .ok_or_else(|| CliError(format!("{flag} needs a value")))
    };
    while i < argv.len() {
        let arg = argv[i].as_str();
        match arg {
            "--experiment" => experiment = Some(next(&mut i, arg)?),
            "--config" => {
                let path = next(&mut i, arg)?;
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| CliError(format!("reading {path}: {e}")))?;
                file_params.extend(parse_config_text(&text)?);
            }
            "--seed" => {
                seed = Some(next(&mut i, arg)?.parse().map_err(|e| {
                    CliError(format!("--seed: {e}"))
                })?)
            }
            "--trials" => {
                trials = Some(next(&mut i, arg)?.parse().map_err(|e| {
                    CliError(format!("--trials: {e}"))
                })?)
            }
            "--out" => out = Some(next(&mut i, arg)?),
            _ if arg.contains('=') => {
                let (k, v) = arg.split_once('=').unwrap();
                cli_params.insert(k.trim().to_lowercase(), v.trim().to_string());
            }
            _ if experiment.is_none() && !arg.starts_with('-') => {
                experiment = Some(arg.to_string())
            }
            _ => return Err(CliError(format!("unexpected argument {arg:?}"))),
        }
        i += 1;
    }
    let mut params = file_params;
    params.extend(cli_params);
    if experiment.is_none() {
        experiment = params.remove("experiment");
    }
    if let Some(v) = params.remove("seed") {
        if seed.is_none() {
            seed = Some(v.parse().map_err(|e| CliError(format!("seed: {e}")))?);
        }
    }
    if let Some(v) = params.remove("trials") {
        if trials.is_none() {
            trials = Some(v.parse().map_err(|e| CliError(format!("trials: {e}")))?);
        }
    }
    if let Some(v) = params.remove("out") {
        if out.is_none() {
            out = Some(v);
        }
    }
    Ok(ExperimentConfig {
        experiment: experiment.ok_or_else(|| CliError("no experiment named; try --help".into()))?,
        params,
        seed: seed.unwrap_or(0),
        trials,
        out,
    })
}

pub fn cli_main(args: impl Iterator<Item = String>) -> Result<(), CliError> {
    let argv: Vec<String> = args.collect();
    if argv.is_empty() || argv.iter().any(|a| a == "--help" || a == "-h") {
        print!("{}", help_text());
        return Ok(());
    }
    let cfg = parse_args(&argv)?;
    let csv = run(&cfg)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, &csv)
            .map_err(|e| CliError(format!("writing {path}: {e}")))?,
        None => print!("{csv}"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex2::{toric_code, torus};

    fn config(experiment: &str, pairs: &[(&str, &str)]) -> ExperimentConfig {
        ExperimentConfig {
            experiment: experiment.into(),
            params: pairs
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
            seed: 0,
            trials: None,
            out: None,
        }
    }

    #[test]
    fn catalog_schemas_round_trip_through_the_parser() {
        for info in list_experiments() {
            let text: String = info
                .params
                .iter()
                .map(|(k, v)| format!("{k}={v}\n"))
                .collect();
            let parsed = parse_config_text(&text).expect("schema text parses");
            assert_eq!(parsed.len(), info.params.len(), "{}", info.name);
            // Every catalog name dispatches (to a run or a parameter error,
            // never to "unknown experiment").
            let cfg = config(info.name, &[]);
            if let Err(CliError(msg)) = run(&cfg) {
                assert!(
                    !msg.contains("unknown experiment"),
                    "{}: {msg}",
                    info.name
                );
            }
        }
        assert!(!list_experiments().is_empty());
    }

    #[test]
    fn unknown_experiments_and_parameters_are_rejected() {
        let e = run(&config("no-such-thing", &[])).unwrap_err();
        assert!(e.0.contains("unknown experiment"));
        let e = run(&config("column-model", &[("bogus", "1")])).unwrap_err();
        assert!(e.0.contains("unknown parameter"));
    }

    #[test]
    fn config_text_parses_comments_blanks_and_case() {
        let text = "# a comment\n\nL=3\n  subdivide = 2  # trailing\n";
        let map = parse_config_text(&text.replace("L", "L")).unwrap();
        assert_eq!(map.get("l").map(String::as_str), Some("3"));
        assert_eq!(map.get("subdivide").map(String::as_str), Some("2"));
        assert!(parse_config_text("no equals sign").is_err());
    }

    #[test]
    fn toric_distance_reports_the_l3_torus() {
        let csv = run(&config("toric-distance", &[("l", "3")])).unwrap();
        assert_eq!(csv, "n,d_x,d_z\n18,3,3\n");
    }

    #[test]
    fn column_model_example_value() {
        let csv = run(&config(
            "column-model",
            &[("t", "3"), ("d", "2"), ("p", "0.1")],
        ))
        .unwrap();
        assert_eq!(csv, "t,d,p,boundary,failure\n3,2,0.1,periodic,0.085536\n");
    }

    #[test]
    fn ising_toy_analytic_example_value() {
        let csv = run(&config(
            "ising-toy",
            &[("n", "3"), ("t", "2"), ("p", "0.1")],
        ))
        .unwrap();
        assert!(csv.contains(",analytic,0,0.085536,0\n"), "{csv}");
    }

    #[test]
    fn ising_toy_monte_carlo_agrees_with_analytic() {
        let mut cfg = config("ising-toy", &[("n", "3"), ("t", "2"), ("p", "0.1")]);
        cfg.trials = Some(4000);
        cfg.seed = 12;
        let csv = run(&cfg).unwrap();
        let row = csv.lines().nth(1).unwrap();
        let fields: Vec<&str> = row.split(',').collect();
        let failure: f64 = fields[6].parse().unwrap();
        let sigma: f64 = fields[7].parse().unwrap();
        assert!((failure - 0.085536).abs() <= 3.0 * sigma, "{row}");
    }

    #[test]
    fn decode_sim_rows_are_deterministic() {
        let mut cfg = config("decode-sim", &[("p", "0.08")]);
        cfg.trials = Some(20);
        cfg.seed = 9;
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.lines().count(), 21);
        assert!(a.lines().skip(1).all(|l| {
            let v = l.split(',').nth(3).unwrap();
            ["success", "failure", "tie"].contains(&v)
        }));
    }

    #[test]
    fn ladder_rows_sum_to_one() {
        let csv = run(&config("ladder", &[("t", "4")])).unwrap();
        let rows: Vec<&str> = csv.lines().skip(1).collect();
        assert_eq!(rows.len(), 16);
        let total: f64 = rows
            .iter()
            .map(|r| r.split(',').nth(1).unwrap().parse::<f64>().unwrap())
            .sum();
        // Nine printed digits per row bound the rounding error.
        assert!((total - 1.0).abs() < 16.0 * 1e-9, "{total}");
    }

    #[test]
    fn chainmap_demo_covers_all_three_statuses() {
        let csv = run(&config("chainmap-demo", &[])).unwrap();
        assert!(csv.contains("triangle,0;1,reshaped,"), "{csv}");
        assert!(csv.contains(",true,true,2,1,1,2"), "{csv}");

        // The first plaquette of the L = 2 torus is already a stabilizer.
        let css = toric_code(&torus(2)).unwrap();
        let plaquette = css
            .hx()
            .row(0)
            .ones()
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let csv = run(&config(
            "chainmap-demo",
            &[("code", "toric"), ("w", &plaquette)],
        ))
        .unwrap();
        assert!(csv.contains(",deterministic,1,"), "{csv}");

        let csv = run(&config(
            "chainmap-demo",
            &[("code", "steane"), ("w", "0,1,2")],
        ))
        .unwrap();
        assert!(csv.contains(",logical,"), "{csv}");
    }

    #[test]
    fn isg_trace_emits_one_row_per_block() {
        let mut cfg = config("isg-trace", &[("graph", "k4"), ("rounds", "3")]);
        cfg.seed = 2;
        let csv = run(&cfg).unwrap();
        // K4 has three perfect matchings.
        assert_eq!(csv.lines().count(), 1 + 3 * 3);
        let again = run(&cfg).unwrap();
        assert_eq!(csv, again);
    }

    #[test]
    fn matching_code_lists_the_fixture_ranks() {
        let csv = run(&config("matching-code", &[])).unwrap();
        // rank(Q) = edges - 1 and rank(S) = vertices/2 + 1 on every row.
        for line in csv.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            let (v, e): (usize, usize) = (f[1].parse().unwrap(), f[2].parse().unwrap());
            assert_eq!(f[3].parse::<usize>().unwrap(), e - 1, "{line}");
            assert_eq!(f[4].parse::<usize>().unwrap(), v / 2 + 1, "{line}");
        }
        assert_eq!(csv.lines().count(), 6);
    }

    #[test]
    fn crossover_grid_mode_emits_slopes() {
        let mut cfg = config(
            "ising-toy",
            &[("l1", "3"), ("l2", "5"), ("p", "0.11"), ("grid", "1,2,3")],
        );
        cfg.trials = Some(1000);
        let csv = run(&cfg).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,failure,sigma,slope");
        assert_eq!(lines.len(), 4);
        // Small points are exact: sigma prints as 0 and slopes are present
        // from the second row on.
        assert!(lines[1].ends_with(",0,"), "{csv}");
        assert!(!lines[2].ends_with(",0,") && !lines[2].ends_with(','), "{csv}");
    }

    #[test]
    fn args_parse_flags_positionals_and_key_values() {
        let argv: Vec<String> = ["toric-distance", "L=3", "--seed", "7"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let cfg = parse_args(&argv).unwrap();
        assert_eq!(cfg.experiment, "toric-distance");
        assert_eq!(cfg.params.get("l").map(String::as_str), Some("3"));
        assert_eq!(cfg.seed, 7);
        assert!(parse_args(&["--seed".to_string()]).is_err());
        assert!(parse_args(&["--bogus".to_string()]).is_err());
    }
}
