//! Acceptance table. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line. The gated parts (the exact
//! O(2) partial-ovoid search and H(3, 81^2)) run only with `--ignored` or
//! `--include-ignored`:
//!
//! ```text
//! cargo test -p opprank --test acceptance -- --ignored
//! cargo test -p opprank --test acceptance -- --ignored 11
//! ```
//!
//! Bare arguments pick criteria by number.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use opprank::bounds::{
    clique_bound_from_rank, clique_size_admissible, crossover_table, theorem1_bound, theorem2_bound,
};
use opprank::clique::{greedy_lower_bound, max_clique_exact, verify_clique, ExactOptions, Graph, LocalSearchOptions};
use opprank::hermitian::{HermitianSpace, DEFAULT_GENERATOR_CAP};
use opprank::incidence::{bundled_o2, verify_generalized_polygon};
use opprank::modrank::{rank_mod_p_bits, rank_rational_q};
use opprank::scheme::{eigenmatrices_metric, idempotent_congruence_check, verify_scheme_axioms};
use opprank::BitMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn relations(d: usize, q: u64) -> Result<Vec<BitMatrix>, String> {
    let h = HermitianSpace::new(d, q).map_err(|e| e.to_string())?;
    let gens = h
        .enumerate_generators(DEFAULT_GENERATOR_CAP)
        .map_err(|e| e.to_string())?;
    Ok(gens.relation_matrices(&h))
}

fn rank(m: &BitMatrix, p: u64) -> Result<u64, String> {
    Ok(rank_mod_p_bits(m, p).map_err(|e| e.to_string())?.rank as u64)
}

/// Generators of H(2d-1, q^2): prod_{i=1..d} (q^(2i-1) + 1).
fn generator_count(q: u64, d: u32) -> u64 {
    (1..=d).map(|i| q.pow(2 * i - 1) + 1).product()
}

fn hermitian_rank(d: usize, q: u64, p: u64, want_rank: u64) -> Check {
    let rel = relations(d, q)?;
    let n = rel[0].rows() as u64;
    let want_n = generator_count(q, d as u32);
    ensure(n == want_n, format!("{n} generators, expected {want_n}"))?;
    let r = rank(&rel[d], p)?;
    ensure(r == want_rank, format!("rank_{p}(A_{d}) = {r}, expected {want_rank}"))?;
    Ok(format!(
        "H({}, {q}^2): {n} generators, rank_{p}(A_{d}) = {r}",
        2 * d - 1
    ))
}

fn criterion_1() -> Check {
    hermitian_rank(2, 2, 2, (2 * 2u64.pow(3)).div_ceil(3))
}

fn criterion_2() -> Check {
    hermitian_rank(2, 3, 3, 19)
}

fn criterion_3() -> Check {
    hermitian_rank(2, 4, 2, 6u64.pow(2))
}

fn criterion_4() -> Check {
    hermitian_rank(3, 2, 2, (11 * 2u64.pow(5) + 5 * 2u64.pow(3) + 4 * 2) / 20)
}

fn criterion_5() -> Check {
    let mut out = Vec::new();
    for (p, f2) in [(2u64, 6u64), (3, 21)] {
        // f_2 = p(p^2 - p + 1); n p E_2 = f_2 (p A_0 - A_1 + A_2 / p).
        ensure(f2 == p * (p * p - p + 1), "f_2 oracle")?;
        let want: Vec<String> = vec![(f2 * p).to_string(), format!("-{f2}"), (f2 / p).to_string()];
        let s = verify_scheme_axioms(relations(2, p)?).map_err(|e| e.to_string())?;
        let c = idempotent_congruence_check(&s, p, 2).map_err(|e| e.to_string())?;
        ensure(
            c.coefficients == want,
            format!("p = {p}: coefficients {:?}, expected {want:?}", c.coefficients),
        )?;
        ensure(c.integral && c.congruent, format!("p = {p}: congruence fails"))?;
        ensure(
            c.rank_bound == f2,
            format!("p = {p}: bound {}, expected {f2}", c.rank_bound),
        )?;
        let r = rank(&s.relations()[2], p)?;
        ensure(r <= f2, format!("p = {p}: rank {r} exceeds f_2 = {f2}"))?;
        out.push(format!("p = {p}: rank {r} <= {f2}"));
    }
    Ok(format!(
        "A_2 = n p E_2 (mod p) on H(3, 4) and H(3, 9); {}",
        out.join(", ")
    ))
}

fn int_rows(m: &BitMatrix) -> Vec<Vec<i64>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.get(i, j) as i64).collect())
        .collect()
}

fn mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = b[0].len();
    a.iter()
        .map(|row| (0..n).map(|j| row.iter().zip(b).map(|(x, r)| x * r[j]).sum()).collect())
        .collect()
}

fn shift(a: &[Vec<i64>], c: i64) -> Vec<Vec<i64>> {
    let mut a = a.to_vec();
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= c;
    }
    a
}

fn criterion_6() -> Check {
    let rel = relations(2, 2)?;
    let a1 = int_rows(&rel[1]);
    let n = a1.len() as i64;
    let theta = [10i64, 1, -5];
    // Oracle 1: A_1 is annihilated by prod (x - theta) and by no proper factor.
    let full = mul(
        &mul(&shift(&a1, theta[0]), &shift(&a1, theta[1])),
        &shift(&a1, theta[2]),
    );
    ensure(
        full.iter().flatten().all(|&x| x == 0),
        "A_1 is not annihilated by (x-10)(x-1)(x+5)",
    )?;
    // Oracle 2: multiplicities from sum m = n, sum m theta = tr A = 0,
    // sum m theta^2 = tr A^2 = n k.
    let k = theta[0];
    let (t1, t2) = (theta[1], theta[2]);
    let m0 = 1;
    let rest = n - m0;
    let trace1 = -k * m0;
    // m1 + m2 = rest, t1 m1 + t2 m2 = trace1.
    let m2 = (trace1 - t1 * rest) / (t2 - t1);
    let m1 = rest - m2;
    ensure(m0 * k * k + m1 * t1 * t1 + m2 * t2 * t2 == n * k, "trace of A_1^2")?;
    let want_mult = vec![m0 as u64, m1 as u64, m2 as u64];
    ensure(want_mult == [1, 20, 6], "multiplicity oracle disagrees with (1, 20, 6)")?;

    let s = verify_scheme_axioms(rel).map_err(|e| e.to_string())?;
    let e = eigenmatrices_metric(&s).map_err(|e| e.to_string())?;
    let got: Vec<BigInt> = theta.iter().map(|&t| BigInt::from(t)).collect();
    ensure(e.eigenvalues == got, format!("eigenvalues {:?}", e.eigenvalues))?;
    ensure(
        e.multiplicities == want_mult,
        format!("multiplicities {:?}", e.multiplicities),
    )?;
    let q2: Vec<BigRational> = (0..3)
        .map(|i| BigRational::from_integer(6.into()) / BigRational::from_integer(BigInt::from(-2).pow(i)))
        .collect();
    ensure(e.q_column(2) == q2, format!("Q column 2 = {:?}", e.q_column(2)))?;
    let r = rank_rational_q(&e.idempotent(&s, 2)).map_err(|e| e.to_string())?.rank;
    ensure(r == 6, format!("rank E_2 = {r}"))?;
    Ok("H(3, 4): eigenvalues 10 1 -5, multiplicities 1 20 6, Q_i2 = 6 (-2)^-i, rank E_2 = 6".into())
}

fn o2_relations() -> Result<(Vec<BitMatrix>, String), String> {
    let g = bundled_o2();
    let cert = verify_generalized_polygon(&g, 8, 2, 4);
    ensure(
        cert.ok,
        format!("bundled O(2) fails the octagon axioms: {:?}", cert.violations),
    )?;
    let rel = g.distance_relation_matrices().map_err(|e| e.to_string())?;
    let show = |v: Option<usize>| v.map_or("none".to_string(), |v| v.to_string());
    Ok((
        rel,
        format!("diameter {}, girth {}", show(cert.diameter), show(cert.girth)),
    ))
}

fn criterion_7() -> Check {
    let (rel, cert) = o2_relations()?;
    let (s, r) = (2u64, 4u64);
    let want_points = (1 + s) * (1 + s * r) * (1 + s * s * r * r);
    let n = rel[4].rows() as u64;
    ensure(n == want_points, format!("{n} points, expected {want_points}"))?;
    let rk = rank(&rel[4], 2)?;
    ensure(rk == 26, format!("rank_2(A_4) = {rk}, expected 26"))?;
    let b = clique_bound_from_rank(rk, 2);
    ensure(b == 27, format!("clique bound {b}, expected 27"))?;
    Ok(format!(
        "O(2) octagon of order (2, 4) ({cert}); {n} points; rank_2(A_4) = 26; bound 27"
    ))
}

fn criterion_8(exact: bool) -> Check {
    let (mut rel, _) = o2_relations()?;
    let a4 = rel.swap_remove(4);
    let g = Graph::new(a4.clone()).map_err(|e| e.to_string())?;
    let h = greedy_lower_bound(
        &g,
        LocalSearchOptions {
            restarts: 1_000_000,
            seed: 0,
            steps: 400,
            target: Some(24),
        },
    );
    ensure(
        h.size == 24,
        format!("local search found {} after {} restarts", h.size, h.work),
    )?;
    let clock = Instant::now();
    let pairwise = h
        .witness
        .iter()
        .all(|&u| h.witness.iter().all(|&v| u == v || a4.get(u, v)));
    ensure(pairwise && verify_clique(&g, &h.witness), "witness is not a clique")?;
    let verify_time = clock.elapsed();
    ensure(verify_time < Duration::from_secs(60), "witness verification over 1 min")?;
    let mut msg = format!("O(2): partial ovoid of size 24 after {} restarts, verified", h.work);

    // The point stabilizer of the automorphism group has orbits of sizes
    // 1, 10, 80, 640, 1024 (the distance classes), so the group is
    // transitive on ordered opposite pairs and fixing one such pair is
    // enough to rule out a 25-clique.
    let r = max_clique_exact(
        &g,
        ExactOptions {
            upper_bound: Some(27),
            fix_first_edge: true,
            ..Default::default()
        },
        &h.witness,
    )
    .map_err(|e| e.to_string())?;
    ensure(
        r.optimal && r.size == 24,
        format!("edge-fixed search: size {}, optimal {}", r.size, r.optimal),
    )?;
    msg += &format!(
        "; optimal with an opposite pair fixed ({} nodes, {:.0} s)",
        r.work, r.elapsed
    );

    if exact {
        let r = max_clique_exact(
            &g,
            ExactOptions {
                upper_bound: Some(27),
                fix_first_vertex: true,
                time_budget: Some(Duration::from_secs(24 * 3600)),
                ..Default::default()
            },
            &h.witness,
        )
        .map_err(|e| e.to_string())?;
        ensure(r.optimal, format!("exact search ran out of budget at {} nodes", r.work))?;
        ensure(r.size == 24, format!("exact search found {}", r.size))?;
        msg += &format!("; optimal with one vertex fixed ({} nodes, {:.0} s)", r.work, r.elapsed);
    } else {
        msg += "; one-vertex proof gated (run with --ignored)";
    }
    Ok(msg)
}

fn criterion_9() -> Check {
    let value = |p, t, d| theorem1_bound(p, t, d).map(|r| r.value).map_err(|e| e.to_string());
    for (p, t, d, want) in [
        (2u64, 1u32, 2u32, 7u64),
        (2, 2, 2, 37),
        (3, 1, 2, 19),
        (3, 2, 2, 361),
        (2, 1, 4, 87),
    ] {
        let v = value(p, t, d)?;
        ensure(
            v == BigInt::from(want),
            format!("spread bound at ({p}, {t}, {d}) = {v}, expected {want}"),
        )?;
    }
    for (t, want) in [(1u32, 27u64), (3, 17577)] {
        ensure(26u64.pow(t) + 1 == want, "ovoid bound oracle")?;
        let v = theorem2_bound(t).map_err(|e| e.to_string())?.value;
        ensure(
            v == BigInt::from(want),
            format!("ovoid bound at t = {t} = {v}, expected {want}"),
        )?;
    }
    let rows = crossover_table(&[2, 3, 5, 7], 4).map_err(|e| e.to_string())?;
    ensure(rows.len() == 16, "crossover table size")?;
    for row in &rows {
        let (p, t) = (row.p as u128, row.t);
        let q = p.pow(t);
        let ours = ((2 * p.pow(3) + p) / 3).pow(t) + 1;
        let theirs = (q.pow(3) + q + 2) / 2;
        let remark = (p == 2 && t <= 2) || t == 1;
        ensure(
            row.theorem1a == BigInt::from(ours) && row.debeule == BigInt::from(theirs),
            format!("crossover values at p = {p}, t = {t}"),
        )?;
        ensure(
            row.debeule_better == (theirs < ours) && remark == (theirs < ours),
            format!("crossover at p = {p}, t = {t}"),
        )?;
    }
    Ok("spread bounds 7 37 19 361 87; ovoid bounds 27 17577; crossover matches on 16 (p, t)".into())
}

fn random_graph(n: usize, density: f64, rng: &mut ChaCha8Rng) -> BitMatrix {
    let mut m = BitMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                m.set(i, j, true);
                m.set(j, i, true);
            }
        }
    }
    m
}

/// Clique number by pivoted Bron-Kerbosch.
fn clique_number(adj: &BitMatrix) -> usize {
    fn go(adj: &BitMatrix, size: usize, mut p: Vec<usize>, mut x: Vec<usize>, best: &mut usize) {
        let Some(pivot) = p
            .iter()
            .chain(&x)
            .copied()
            .max_by_key(|&u| p.iter().filter(|&&w| adj.get(u, w)).count())
        else {
            *best = (*best).max(size);
            return;
        };
        for v in p.clone().into_iter().filter(|&v| !adj.get(pivot, v)) {
            p.retain(|&u| u != v);
            let np = p.iter().copied().filter(|&u| adj.get(u, v)).collect();
            let nx = x.iter().copied().filter(|&u| adj.get(u, v)).collect();
            go(adj, size + 1, np, nx, best);
            x.push(v);
        }
    }
    let mut best = 0;
    go(adj, 0, (0..adj.rows()).collect(), Vec::new(), &mut best);
    best
}

fn criterion_10() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for instance in 0..1000 {
        let p = [2u64, 3, 5][instance % 3];
        let n = rng.gen_range(4..=40);
        let mut adj = random_graph(n, rng.gen_range(0.05..0.6), &mut rng);
        let k = rng.gen_range(2..=n.min(16));
        let mut vs: Vec<usize> = (0..n).collect();
        vs.shuffle(&mut rng);
        for &a in &vs[..k] {
            for &b in &vs[..k] {
                if a != b {
                    adj.set(a, b, true);
                }
            }
        }
        let r = rank(&adj, p)?;
        let k = k as u64;
        // Two cases: k - 1 divisible by p allows one more than the rank.
        let holds = if (k - 1).is_multiple_of(p) { k <= r + 1 } else { k <= r };
        ensure(holds, format!("planted clique {k} with rank_{p} = {r}"))?;
        ensure(
            clique_size_admissible(k, r, p),
            format!("admissibility rejects {k} at rank {r}"),
        )?;
    }
    for m in 1..=50usize {
        let mut j = BitMatrix::ones(m, m);
        for i in 0..m {
            j.set(i, i, false);
        }
        for p in [2u64, 3, 5, 7] {
            let want = if (m as u64 - 1).is_multiple_of(p) {
                m as u64 - 1
            } else {
                m as u64
            };
            let r = rank(&j, p)?;
            ensure(r == want, format!("rank_{p}(J - I) at m = {m} is {r}, expected {want}"))?;
        }
    }
    for instance in 0..200 {
        let n = rng.gen_range(1..=40);
        let adj = random_graph(n, [0.1, 0.3, 0.5, 0.7, 0.9][instance % 5], &mut rng);
        let want = clique_number(&adj);
        let g = Graph::new(adj).map_err(|e| e.to_string())?;
        let r = max_clique_exact(&g, ExactOptions::default(), &[]).map_err(|e| e.to_string())?;
        ensure(
            r.optimal && r.size == want,
            format!("instance {instance}: exact {} vs {want}", r.size),
        )?;
        ensure(
            verify_clique(&g, &r.witness),
            format!("instance {instance}: bad witness"),
        )?;
    }
    Ok(
        "rank clique bound on 1000 planted cliques; rank_p(J - I) for m <= 50; exact = brute force on 200 graphs"
            .into(),
    )
}

fn criterion_11() -> Check {
    hermitian_rank(2, 9, 3, 19u64.pow(2))
}

struct Criterion {
    id: &'static str,
    limit: Duration,
    gated: bool,
    run: Box<dyn Fn(bool) -> Check>,
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let slow = args.iter().any(|a| a == "--ignored" || a == "--include-ignored");
    // Bare arguments select criteria by id.
    let only: Vec<&str> = args[1..]
        .iter()
        .filter(|a| !a.starts_with('-'))
        .map(|a| a.as_str())
        .collect();
    let secs = Duration::from_secs;
    let c = |id, limit, gated, run: Box<dyn Fn(bool) -> Check>| Criterion { id, limit, gated, run };
    let table = [
        c("1", secs(1), false, Box::new(|_| criterion_1())),
        c("2", secs(5), false, Box::new(|_| criterion_2())),
        c("3", secs(30), false, Box::new(|_| criterion_3())),
        c("4", secs(120), false, Box::new(|_| criterion_4())),
        c("5", secs(5), false, Box::new(|_| criterion_5())),
        c("6", secs(5), false, Box::new(|_| criterion_6())),
        c("7", secs(60), false, Box::new(|_| criterion_7())),
        // The one-vertex proof has a 24 h budget.
        c(
            "8",
            if slow { secs(25 * 3600) } else { secs(900) },
            false,
            Box::new(criterion_8),
        ),
        c("9", secs(1), false, Box::new(|_| criterion_9())),
        c("10", secs(300), false, Box::new(|_| criterion_10())),
        c("11", secs(2 * 3600), true, Box::new(|_| criterion_11())),
    ];
    let mut failed = 0;
    for cr in table.iter().filter(|cr| only.is_empty() || only.contains(&cr.id)) {
        if cr.gated && !slow {
            println!("SKIP criterion {:>2}: gated slow test, run with --ignored", cr.id);
            continue;
        }
        let clock = Instant::now();
        let result = (cr.run)(slow);
        let t = clock.elapsed();
        let result = result.and_then(|m| {
            ensure(
                t <= cr.limit,
                format!("{m}; took {:.1} s, limit {} s", t.as_secs_f64(), cr.limit.as_secs()),
            )
            .map(|_| m)
        });
        match result {
            Ok(m) => println!("PASS criterion {:>2} ({:.2} s): {m}", cr.id, t.as_secs_f64()),
            Err(m) => {
                failed += 1;
                println!("FAIL criterion {:>2} ({:.2} s): {m}", cr.id, t.as_secs_f64());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
