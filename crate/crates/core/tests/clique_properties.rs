use opprank::bounds::{clique_bound_from_rank, clique_size_admissible};
use opprank::clique::{greedy_lower_bound, max_clique_exact, verify_clique, ExactOptions, Graph, LocalSearchOptions};
use opprank::matrix::BitMatrix;
use opprank::modrank::rank_mod_p_bits;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_adjacency(n: usize, density: f64, rng: &mut ChaCha8Rng) -> BitMatrix {
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

/// Bron-Kerbosch without pivoting: enumerates every maximal clique.
fn brute_force_clique_number(adj: &BitMatrix) -> usize {
    fn go(adj: &BitMatrix, r: usize, p: Vec<usize>, mut x: Vec<usize>, best: &mut usize) {
        if p.is_empty() && x.is_empty() {
            *best = (*best).max(r);
            return;
        }
        let mut p = p;
        while let Some(v) = p.pop() {
            let np = p.iter().copied().filter(|&u| adj.get(u, v)).collect();
            let nx = x.iter().copied().filter(|&u| adj.get(u, v)).collect();
            go(adj, r + 1, np, nx, best);
            x.push(v);
        }
    }
    let mut best = 0;
    go(adj, 0, (0..adj.rows()).collect(), Vec::new(), &mut best);
    best
}

#[test]
fn exact_solver_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for instance in 0..200 {
        let n = rng.gen_range(1..=40);
        let density = [0.1, 0.3, 0.5, 0.7, 0.9][instance % 5];
        let adj = random_adjacency(n, density, &mut rng);
        let expected = brute_force_clique_number(&adj);
        let g = Graph::new(adj).unwrap();
        let r = max_clique_exact(&g, ExactOptions::default(), &[]).unwrap();
        assert!(r.optimal);
        assert!(verify_clique(&g, &r.witness));
        assert_eq!(r.size, expected, "instance {instance}, n {n}, density {density}");
        let h = greedy_lower_bound(
            &g,
            LocalSearchOptions {
                restarts: 5,
                seed: instance as u64,
                ..Default::default()
            },
        );
        assert!(verify_clique(&g, &h.witness) && h.size <= expected);
    }
}

#[test]
fn fixing_a_vertex_is_exact_on_circulants() {
    // Circulant graphs are vertex-transitive.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..40 {
        let n = rng.gen_range(5..=36);
        let jumps: Vec<usize> = (1..=n / 2).filter(|_| rng.gen_bool(0.5)).collect();
        let mut adj = BitMatrix::zeros(n, n);
        for i in 0..n {
            for &j in &jumps {
                adj.set(i, (i + j) % n, true);
                adj.set((i + j) % n, i, true);
            }
        }
        let expected = brute_force_clique_number(&adj);
        let g = Graph::new(adj).unwrap();
        let opts = ExactOptions {
            fix_first_vertex: true,
            ..Default::default()
        };
        let r = max_clique_exact(&g, opts, &[]).unwrap();
        assert_eq!(r.size, expected, "n {n} jumps {jumps:?}");
        assert!(r.witness.contains(&0) || r.size <= 1);
    }
}

#[test]
fn fixing_an_edge_is_exact_on_paley_graphs() {
    // Paley graphs are arc-transitive.
    for p in [5usize, 13, 17, 29, 37, 41, 53] {
        let squares: Vec<usize> = (1..p).map(|x| x * x % p).collect();
        let mut adj = BitMatrix::zeros(p, p);
        for i in 0..p {
            for &s in &squares {
                adj.set(i, (i + s) % p, true);
            }
        }
        let expected = brute_force_clique_number(&adj);
        let g = Graph::new(adj).unwrap();
        let opts = ExactOptions {
            fix_first_edge: true,
            ..Default::default()
        };
        let r = max_clique_exact(&g, opts, &[]).unwrap();
        assert_eq!((r.size, r.optimal), (expected, true), "Paley({p})");
        assert!(r.witness.contains(&0));
    }
}

#[test]
fn rank_clique_bound_holds_on_planted_cliques() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let primes = [2u64, 3, 5];
    for instance in 0..1000 {
        let p = primes[instance % 3];
        let n = rng.gen_range(4..=40);
        let mut adj = random_adjacency(n, rng.gen_range(0.05..0.6), &mut rng);
        let k = rng.gen_range(2..=n.min(16));
        let mut vertices: Vec<usize> = (0..n).collect();
        vertices.shuffle(&mut rng);
        let planted = &vertices[..k];
        for &a in planted {
            for &b in planted {
                if a != b {
                    adj.set(a, b, true);
                }
            }
        }
        let g = Graph::new(adj.clone()).unwrap();
        assert!(verify_clique(&g, planted));
        let rank = rank_mod_p_bits(&adj, p).unwrap().rank as u64;
        assert!(
            clique_size_admissible(k as u64, rank, p),
            "instance {instance}: |Y| {k}, rank {rank}, p {p}"
        );
        assert!(k as u64 <= clique_bound_from_rank(rank, p));
    }
}

#[test]
fn rank_bound_pruning_is_sound() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for instance in 0..100 {
        let p = [2u64, 3, 5][instance % 3];
        let adj = random_adjacency(rng.gen_range(5..=35), 0.6, &mut rng);
        let rank = rank_mod_p_bits(&adj, p).unwrap().rank as u64;
        let bound = clique_bound_from_rank(rank, p) as usize;
        let g = Graph::new(adj.clone()).unwrap();
        let opts = ExactOptions {
            upper_bound: Some(bound),
            ..Default::default()
        };
        let r = max_clique_exact(&g, opts, &[]).unwrap();
        assert!(r.size <= bound);
        assert_eq!(r.size, brute_force_clique_number(&adj));
    }
}
