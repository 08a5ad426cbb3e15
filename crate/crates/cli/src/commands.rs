use std::env;
use std::io::{BufWriter, Cursor};
use std::path::{Path, PathBuf};
use std::time::Duration;

use opprank::arith::{is_prime, prime_power};
use opprank::bounds::{self, BoundReport};
use opprank::clique::{greedy_lower_bound, max_clique_exact, verify_clique, ExactOptions, Graph, LocalSearchOptions};
use opprank::hermitian::{expected_generator_count, HermitianSpace};
use opprank::incidence::{load_geometry, verify_generalized_polygon, IncidenceGeometry, O2_IG};
use opprank::matfile::{parse_matrix, write_bit_matrix};
use opprank::modrank::Ranker;
use opprank::scheme::{eigenmatrices_metric, idempotent_congruence_check, verify_scheme_axioms};
use opprank::{BitMatrix, IntMatrix};
use serde_json::{json, Value};

use crate::output::{failed, output_prefix, relation_path, usage, write_file, CliError, Outcome, Source, Status};

/// Directory searched for `o2.ig` when no `--in` is given.
pub const DATA_DIR_VAR: &str = "OPPRANK_DATA_DIR";

pub fn read_matrix(path: &Path) -> Result<(IntMatrix, Source), CliError> {
    let src = Source::read(path)?;
    let m = parse_matrix(Cursor::new(&src.bytes)).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok((m, src))
}

fn read_relation(path: &Path) -> Result<(BitMatrix, Source), CliError> {
    let (m, src) = read_matrix(path)?;
    let bits = m
        .to_bits()
        .ok_or_else(|| usage(format!("{}: entries must be 0 or 1", path.display())))?;
    Ok((bits, src))
}

/// `--in P` with no such file but `P_A0.mat` present expands to every
/// `P_Ai.mat` in sequence.
pub fn expand_inputs(inputs: &[PathBuf]) -> Vec<PathBuf> {
    if let [single] = inputs {
        if !single.exists() {
            let prefix = output_prefix(single);
            let files: Vec<PathBuf> = (0..)
                .map(|i| relation_path(&prefix, i))
                .take_while(|p| p.exists())
                .collect();
            if !files.is_empty() {
                return files;
            }
        }
    }
    inputs.to_vec()
}

/// The octagon incidence data: `--in`, else `$OPPRANK_DATA_DIR/o2.ig`,
/// else the copy compiled into the library.
pub fn load_octagon(path: Option<&Path>) -> Result<(IncidenceGeometry, Source), CliError> {
    let src = match path {
        Some(p) => Source::read(p)?,
        None => match env::var_os(DATA_DIR_VAR) {
            Some(dir) => Source::read(&Path::new(&dir).join("o2.ig"))?,
            None => Source::from_bytes("<bundled o2.ig>".into(), O2_IG.as_bytes().to_vec()),
        },
    };
    let g = load_geometry(Cursor::new(&src.bytes)).map_err(|e| usage(format!("{}: {e}", src.path)))?;
    Ok((g, src))
}

fn write_relations(prefix: &Path, mats: &[BitMatrix]) -> Result<Vec<Source>, CliError> {
    mats.iter()
        .enumerate()
        .map(|(i, m)| {
            let mut buf = BufWriter::new(Vec::new());
            write_bit_matrix(m, &mut buf).map_err(failed)?;
            write_file(&relation_path(prefix, i), &buf.into_inner().map_err(failed)?)
        })
        .collect()
}

fn check_prime(p: u64) -> Result<(), CliError> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(usage(format!("{p} is not prime")))
    }
}

pub fn build_hermitian(d: usize, q: u64, cap: usize, out: &Path) -> Result<Outcome, CliError> {
    if d == 0 {
        return Err(usage("d must be at least 1"));
    }
    if prime_power(q).is_none() {
        return Err(usage(format!("q = {q} is not a prime power")));
    }
    let space = HermitianSpace::new(d, q).map_err(usage)?;
    let gens = space.enumerate_generators(cap).map_err(failed)?;
    let mats = gens.relation_matrices(&space);
    let files = write_relations(&output_prefix(out), &mats)?;
    let expected = expected_generator_count(q, d as u32);
    Ok(Outcome::checked(
        json!({
            "command": "build hermitian",
            "params": {"d": d, "q": q, "cap": cap},
            "generators": gens.len(),
            "expected_generators": expected,
            "valencies": mats.iter().map(|m| m.row_count(0)).collect::<Vec<_>>(),
            "files": files,
        }),
        gens.len() as u64 == expected,
    ))
}

pub fn build_octagon(input: Option<&Path>, out: &Path) -> Result<Outcome, CliError> {
    let (g, src) = load_octagon(input)?;
    let mats = g.distance_relation_matrices().map_err(failed)?;
    let files = write_relations(&output_prefix(out), &mats)?;
    Ok(Outcome::ok(json!({
        "command": "build octagon",
        "source": src,
        "points": g.n_points(),
        "lines": g.n_lines(),
        "valencies": mats.iter().map(|m| m.row_count(0)).collect::<Vec<_>>(),
        "files": files,
    })))
}

pub fn verify_octagon(input: Option<&Path>, n: usize, s: usize, r: usize) -> Result<Outcome, CliError> {
    let (g, src) = load_octagon(input)?;
    let cert = verify_generalized_polygon(&g, n, s, r);
    let ok = cert.ok;
    Ok(Outcome::checked(
        json!({
            "command": "verify octagon",
            "params": {"n": n, "s": s, "r": r},
            "source": src,
            "points": g.n_points(),
            "lines": g.n_lines(),
            "certificate": cert,
        }),
        ok,
    ))
}

pub fn rank(input: &Path, modulus: Option<u64>, max_dim: usize) -> Result<Outcome, CliError> {
    if let Some(p) = modulus {
        check_prime(p)?;
    }
    let (m, src) = read_matrix(input)?;
    let ranker = Ranker { max_dim };
    let report = match modulus {
        Some(p) => ranker.rank_mod_p(&m, p),
        None => ranker.rank_rational(&m),
    }
    .map_err(failed)?;
    Ok(Outcome::ok(json!({
        "command": "rank",
        "params": {"mod": modulus, "rational": modulus.is_none(), "max_dim": max_dim},
        "rank": report.rank,
        "modulus": report.modulus,
        "rows": m.rows(),
        "cols": m.cols(),
        "elapsed": report.elapsed.as_secs_f64(),
        "input": src,
    })))
}

pub fn scheme(inputs: &[PathBuf], congruence: Option<u64>) -> Result<Outcome, CliError> {
    if let Some(p) = congruence {
        check_prime(p)?;
    }
    let files = expand_inputs(inputs);
    let mut mats = Vec::new();
    let mut sources = Vec::new();
    for f in &files {
        let (m, src) = read_relation(f)?;
        mats.push(m);
        sources.push(src);
    }
    let s = match verify_scheme_axioms(mats) {
        Ok(s) => s,
        Err(e) => {
            return Ok(Outcome::checked(
                json!({"command": "scheme", "params": {"congruence": congruence}, "inputs": sources,
                        "valid": false, "error": e.to_string()}),
                false,
            ))
        }
    };
    let mut report = json!({
        "command": "scheme",
        "params": {"congruence": congruence},
        "inputs": sources,
        "valid": true,
        "n": s.n(),
        "classes": s.classes(),
        "intersection_numbers": s.intersection_numbers(),
    });
    let mut passed = true;
    match eigenmatrices_metric(&s) {
        Ok(e) => {
            report["eigenvalues"] = json!(e.eigenvalues.iter().map(big_json).collect::<Vec<_>>());
            report["multiplicities"] = json!(e.multiplicities);
            report["P"] = json!(strings(&e.p));
            report["Q"] = json!(strings(&e.q));
        }
        Err(e) => report["eigen_error"] = json!(e.to_string()),
    }
    if let Some(p) = congruence {
        match idempotent_congruence_check(&s, p, s.classes()) {
            Ok(c) => {
                passed = c.congruent;
                report["congruence"] = json!(c);
            }
            Err(e) => {
                passed = false;
                report["congruence_error"] = json!(e.to_string());
            }
        }
    }
    Ok(Outcome::checked(report, passed))
}

fn strings<T: ToString>(m: &[Vec<T>]) -> Vec<Vec<String>> {
    m.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect()
}

fn bound_json(r: &BoundReport) -> Value {
    let mut v = json!(r);
    let value = v["value"].take();
    v.as_object_mut().unwrap().remove("value");
    v["bound"] = value;
    v
}

pub enum BoundQuery {
    Lemma1 { rank: u64, p: u64 },
    Thm1 { p: u64, t: u32, d: u32 },
    Thm2 { t: u32 },
    Baseline { q: u64, d: u32 },
    Ovoid { s: u64, r: u64 },
    Lift { rank: u64, t: u32 },
    Formula { name: String, p: u64 },
    Crossover { primes: Vec<u64>, max_t: u32 },
}

pub fn bound(query: BoundQuery) -> Result<Outcome, CliError> {
    let report = match query {
        BoundQuery::Lemma1 { rank, p } => bound_json(&bounds::lemma1_bound(rank, p).map_err(usage)?),
        BoundQuery::Thm1 { p, t, d } => bound_json(&bounds::theorem1_bound(p, t, d).map_err(usage)?),
        BoundQuery::Thm2 { t } => bound_json(&bounds::theorem2_bound(t).map_err(usage)?),
        BoundQuery::Baseline { q, d } => {
            let rows = bounds::baseline_spread_bounds(q, d).map_err(usage)?;
            json!({"params": {"q": q, "d": d}, "rows": rows.iter().map(bound_json).collect::<Vec<_>>()})
        }
        BoundQuery::Ovoid { s, r } => bound_json(&bounds::baseline_ovoid_bound(s, r).map_err(usage)?),
        BoundQuery::Lift { rank, t } => {
            if t == 0 {
                return Err(usage("t must be at least 1"));
            }
            json!({"rank": big_json(&bounds::steinberg_lift(rank, t)), "params": {"rank": rank, "t": t}})
        }
        BoundQuery::Formula { name, p } => {
            let v = bounds::published_rank_formula(&name, p).map_err(usage)?;
            json!({"rank": big_json(&v), "params": {"name": name, "p": p}})
        }
        BoundQuery::Crossover { primes, max_t } => {
            let rows = bounds::crossover_table(&primes, max_t).map_err(usage)?;
            json!({"params": {"primes": primes, "max_t": max_t}, "rows": rows})
        }
    };
    Ok(Outcome::ok(report))
}

pub fn big_json(v: &num_bigint::BigInt) -> Value {
    match i64::try_from(v) {
        Ok(x) => json!(x),
        Err(_) => json!(v.to_string()),
    }
}

pub struct CliqueArgs {
    pub exact: bool,
    pub fix_first: bool,
    pub fix_first_edge: bool,
    pub upper_bound: Option<usize>,
    pub budget: Option<f64>,
    pub restarts: u64,
    pub steps: usize,
    pub seed: u64,
}

pub fn clique(input: &Path, a: &CliqueArgs) -> Result<Outcome, CliError> {
    let time_budget = match a.budget {
        Some(s) if !(s > 0.0 && s.is_finite()) => return Err(usage("--budget must be positive")),
        Some(s) => Some(Duration::from_secs_f64(s)),
        None => None,
    };
    let (adj, src) = read_relation(input)?;
    let g = Graph::new(adj).map_err(|e| usage(format!("{}: {e}", input.display())))?;
    let heuristic = greedy_lower_bound(
        &g,
        LocalSearchOptions {
            restarts: a.restarts,
            seed: a.seed,
            steps: a.steps,
            target: a.upper_bound,
        },
    );
    let mut report = json!({
        "command": "clique",
        "input": src,
        "params": {"exact": a.exact, "fix_first": a.fix_first, "fix_first_edge": a.fix_first_edge,
                   "ub": a.upper_bound, "budget": a.budget,
                   "restarts": a.restarts, "steps": a.steps, "seed": a.seed},
        "heuristic": heuristic,
    });
    let mut status = Status::Ok;
    let best = if a.exact {
        let opts = ExactOptions {
            upper_bound: a.upper_bound,
            fix_first_vertex: a.fix_first,
            fix_first_edge: a.fix_first_edge,
            time_budget,
            node_budget: None,
        };
        let r = max_clique_exact(&g, opts, &heuristic.witness).map_err(usage)?;
        if !r.optimal {
            status = Status::BudgetExhausted;
        }
        report["exact"] = json!(r);
        r
    } else {
        heuristic
    };
    report["size"] = json!(best.size);
    report["optimal"] = json!(best.optimal);
    report["witness"] = json!(best.witness);
    report["verified"] = json!(verify_clique(&g, &best.witness));
    Ok(Outcome { report, status })
}
