//! Maximum cliques: a seeded randomized local search for lower bounds and
//! an exact bitset branch-and-bound with greedy-coloring bounds.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::matrix::{ones_in, BitMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("adjacency matrix is {rows}x{cols}, not square")]
    NotSquare { rows: usize, cols: usize },
    #[error("adjacency matrix is not symmetric")]
    NotSymmetric,
    #[error("vertex {0} has a loop")]
    Loop(usize),
    #[error("fixing the first vertex or edge needs a vertex-transitive graph, but {0}")]
    NotTransitive(String),
    #[error("fix_first_edge needs an arc-transitive graph, but {0}")]
    NotArcTransitive(String),
    #[error("budget must be positive")]
    ZeroBudget,
}

#[derive(Debug, Clone)]
pub struct Graph {
    adj: BitMatrix,
}

impl Graph {
    pub fn new(adj: BitMatrix) -> Result<Graph, GraphError> {
        if !adj.is_square() {
            return Err(GraphError::NotSquare {
                rows: adj.rows(),
                cols: adj.cols(),
            });
        }
        if let Some(v) = (0..adj.rows()).find(|&v| adj.get(v, v)) {
            return Err(GraphError::Loop(v));
        }
        if !adj.is_symmetric() {
            return Err(GraphError::NotSymmetric);
        }
        Ok(Graph { adj })
    }

    pub fn n(&self) -> usize {
        self.adj.rows()
    }

    pub fn adjacency(&self) -> &BitMatrix {
        &self.adj
    }

    #[inline]
    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adj.get(u, v)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj.row_count(v)
    }

    /// Number of vertices at each distance from `v`; unreachable ones are dropped.
    pub fn distance_profile(&self, v: usize) -> Vec<usize> {
        let n = self.n();
        let stride = self.adj.stride();
        let mut seen = vec![0u64; stride];
        seen[v / 64] |= 1 << (v % 64);
        let mut frontier = seen.clone();
        let mut profile = vec![1];
        loop {
            let mut next = vec![0u64; stride];
            for u in ones_in(&frontier) {
                for (w, r) in next.iter_mut().zip(self.adj.row(u)) {
                    *w |= r;
                }
            }
            for (w, s) in next.iter_mut().zip(&seen) {
                *w &= !s;
            }
            let count: usize = next.iter().map(|w| w.count_ones() as usize).sum();
            if count == 0 {
                break;
            }
            for (s, w) in seen.iter_mut().zip(&next) {
                *s |= w;
            }
            profile.push(count);
            frontier = next;
        }
        debug_assert!(profile.iter().sum::<usize>() <= n);
        profile
    }

    /// Necessary conditions for vertex-transitivity: constant degree and the
    /// same distance profile from every vertex.
    pub fn check_transitivity_hints(&self) -> Result<(), GraphError> {
        let n = self.n();
        if n == 0 {
            return Ok(());
        }
        let d0 = self.degree(0);
        if let Some(v) = (1..n).find(|&v| self.degree(v) != d0) {
            return Err(GraphError::NotTransitive(format!(
                "vertex {v} has degree {} and vertex 0 has degree {d0}",
                self.degree(v)
            )));
        }
        let p0 = self.distance_profile(0);
        if let Some(v) = (1..n).find(|&v| self.distance_profile(v) != p0) {
            return Err(GraphError::NotTransitive(format!(
                "vertex {v} has a different distance profile from vertex 0"
            )));
        }
        Ok(())
    }

    /// Necessary conditions for arc-transitivity: the vertex conditions and
    /// the same number of common neighbours across every edge.
    pub fn check_arc_transitivity_hints(&self) -> Result<(), GraphError> {
        self.check_transitivity_hints()?;
        let common = |u: usize, v: usize| -> u32 {
            self.adj
                .row(u)
                .iter()
                .zip(self.adj.row(v))
                .map(|(a, b)| (a & b).count_ones())
                .sum()
        };
        let mut lambda = None;
        for u in 0..self.n() {
            for v in self.adj.row_ones(u).filter(|&v| v > u) {
                let c = common(u, v);
                match lambda {
                    None => lambda = Some(c),
                    Some(l) if l != c => {
                        return Err(GraphError::NotArcTransitive(format!(
                            "edge {u}-{v} has {c} common neighbours, another edge has {l}"
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

/// True iff every pair in `witness` is adjacent.
pub fn verify_clique(g: &Graph, witness: &[usize]) -> bool {
    witness.iter().all(|&v| v < g.n())
        && witness
            .iter()
            .enumerate()
            .all(|(i, &u)| witness[i + 1..].iter().all(|&v| g.adjacent(u, v)))
}

#[derive(Debug, Clone, Serialize)]
pub struct CliqueResult {
    pub size: usize,
    pub witness: Vec<usize>,
    pub optimal: bool,
    pub bound_used: usize,
    /// Seconds.
    pub elapsed: f64,
    /// Search nodes (exact) or restarts (heuristic).
    pub work: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct LocalSearchOptions {
    pub restarts: u64,
    pub seed: u64,
    /// Moves per restart after the initial greedy clique.
    pub steps: usize,
    /// Stop as soon as a clique of this size is found.
    pub target: Option<usize>,
}

impl Default for LocalSearchOptions {
    fn default() -> Self {
        LocalSearchOptions {
            restarts: 1000,
            seed: 0,
            steps: 200,
            target: None,
        }
    }
}

/// Randomized greedy construction followed by add/swap local search with a
/// short tabu list. Deterministic for a fixed seed.
pub fn greedy_lower_bound(g: &Graph, opts: LocalSearchOptions) -> CliqueResult {
    let start = Instant::now();
    let n = g.n();
    let mut best: Vec<usize> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut restarts = 0;
    if n > 0 {
        let mut state = SwapSearch::new(g);
        while restarts < opts.restarts {
            restarts += 1;
            let found = state.run(&mut rng, opts.steps);
            if found.len() > best.len() {
                best = found;
            }
            if opts.target.is_some_and(|t| best.len() >= t) {
                break;
            }
        }
    }
    best.sort_unstable();
    debug_assert!(verify_clique(g, &best));
    CliqueResult {
        size: best.len(),
        witness: best,
        optimal: false,
        bound_used: n,
        elapsed: start.elapsed().as_secs_f64(),
        work: restarts,
    }
}

struct SwapSearch<'a> {
    g: &'a Graph,
    in_clique: Vec<bool>,
    /// Members of the current clique a vertex is not adjacent to.
    miss: Vec<usize>,
    tabu_until: Vec<usize>,
    members: Vec<usize>,
}

impl<'a> SwapSearch<'a> {
    fn new(g: &'a Graph) -> Self {
        let n = g.n();
        SwapSearch {
            g,
            in_clique: vec![false; n],
            miss: vec![0; n],
            tabu_until: vec![0; n],
            members: Vec::new(),
        }
    }

    fn add(&mut self, v: usize) {
        self.in_clique[v] = true;
        self.members.push(v);
        for u in 0..self.g.n() {
            if u != v && !self.g.adjacent(u, v) {
                self.miss[u] += 1;
            }
        }
    }

    fn remove(&mut self, v: usize) {
        self.in_clique[v] = false;
        self.members.retain(|&m| m != v);
        for u in 0..self.g.n() {
            if u != v && !self.g.adjacent(u, v) {
                self.miss[u] -= 1;
            }
        }
    }

    fn run(&mut self, rng: &mut ChaCha8Rng, steps: usize) -> Vec<usize> {
        let n = self.g.n();
        self.in_clique.fill(false);
        self.miss.fill(0);
        self.tabu_until.fill(0);
        self.members.clear();

        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        for &v in &order {
            if self.miss[v] == 0 && !self.in_clique[v] {
                self.add(v);
            }
        }
        let mut best = self.members.clone();
        let mut candidates = Vec::new();
        for step in 1..=steps {
            candidates.clear();
            candidates.extend((0..n).filter(|&u| !self.in_clique[u] && self.miss[u] == 0));
            if let Some(&u) = candidates.choose(rng) {
                self.add(u);
                if self.members.len() > best.len() {
                    best = self.members.clone();
                }
                continue;
            }
            candidates
                .extend((0..n).filter(|&u| !self.in_clique[u] && self.miss[u] == 1 && self.tabu_until[u] <= step));
            let Some(&u) = candidates.choose(rng) else {
                // Stuck: drop a random member and keep going.
                let &w = self.members.choose(rng).unwrap();
                self.remove(w);
                self.tabu_until[w] = step + 1 + rng.gen_range(0..3);
                continue;
            };
            let w = *self.members.iter().find(|&&m| !self.g.adjacent(u, m)).unwrap();
            self.remove(w);
            self.add(u);
            self.tabu_until[w] = step + 7 + rng.gen_range(0..3);
        }
        best
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExactOptions {
    /// A size no clique can exceed, typically from a rank bound. The search
    /// stops as soon as it finds a clique of this size.
    pub upper_bound: Option<usize>,
    pub fix_first_vertex: bool,
    /// Fix vertex 0 and its smallest neighbour. Sound only when the
    /// automorphism group is transitive on ordered adjacent pairs.
    pub fix_first_edge: bool,
    pub time_budget: Option<Duration>,
    pub node_budget: Option<u64>,
}

/// Branch and bound over bitsets. The root candidate set (every vertex,
/// the neighbours of vertex 0 when it is fixed, or the common neighbours
/// of vertex 0 and its smallest neighbour when that edge is fixed) is renumbered
/// largest-degree first within itself, ties by index. Each node colors its
/// candidates greedily in that order, tries to push vertices above the
/// pruning threshold into lower color classes, and branches on the rest
/// from the highest color down, pruning once `|C| + color <= best`.
///
/// `incumbent`, if it is a clique, seeds the lower bound. Reaching the
/// caller's `upper_bound` ends the search and counts as optimal, so that
/// bound must be a proven one.
pub fn max_clique_exact(g: &Graph, opts: ExactOptions, incumbent: &[usize]) -> Result<CliqueResult, GraphError> {
    let start = Instant::now();
    if opts.time_budget.is_some_and(|b| b.is_zero()) || opts.node_budget == Some(0) {
        return Err(GraphError::ZeroBudget);
    }
    let n = g.n();
    let bound_used = opts.upper_bound.map_or(n, |u| u.min(n));
    if opts.fix_first_edge {
        g.check_arc_transitivity_hints()?;
    } else if opts.fix_first_vertex {
        g.check_transitivity_hints()?;
    }
    let mut best: Vec<usize> = if verify_clique(g, incumbent) {
        incumbent.to_vec()
    } else {
        Vec::new()
    };

    let first_neighbour = if n > 0 { g.adj.row_ones(0).next() } else { None };
    let (prefix, root): (Vec<usize>, Vec<usize>) = if let (true, Some(w)) = (opts.fix_first_edge, first_neighbour) {
        (vec![0, w], g.adj.row_ones(0).filter(|&u| g.adjacent(u, w)).collect())
    } else if (opts.fix_first_vertex || opts.fix_first_edge) && n > 0 {
        (vec![0], g.adj.row_ones(0).collect())
    } else {
        (Vec::new(), (0..n).collect())
    };
    if best.len() < prefix.len() {
        best = prefix.clone();
    }
    let m = root.len();
    let stride = m.div_ceil(64).max(1);
    let mut local = vec![usize::MAX; n];
    for (i, &v) in root.iter().enumerate() {
        local[v] = i;
    }
    let root_degree = |v: usize| g.adj.row_ones(v).filter(|&u| local[u] != usize::MAX).count();
    let mut order = root.clone();
    order.sort_by_key(|&v| (std::cmp::Reverse(root_degree(v)), v));
    for (i, &v) in order.iter().enumerate() {
        local[v] = i;
    }
    let mut adj = vec![0u64; m * stride];
    for (i, &v) in order.iter().enumerate() {
        for u in g.adj.row_ones(v) {
            let j = local[u];
            if j != usize::MAX {
                adj[i * stride + j / 64] |= 1 << (j % 64);
            }
        }
    }

    let mut search = Search {
        stride,
        adj,
        order,
        prefix,
        best,
        target: bound_used,
        nodes: 0,
        start,
        time_budget: opts.time_budget,
        node_budget: opts.node_budget,
        aborted: false,
        done: false,
        frames: vec![Frame::default()],
    };
    search.done = search.best.len() >= bound_used;
    if !search.done && m > 0 {
        let cand = &mut search.frames[0].cand;
        cand.resize(stride, 0);
        for i in 0..m {
            set_bit(cand, i);
        }
        search.expand(&mut Vec::new());
    }

    let mut witness = search.best;
    witness.sort_unstable();
    assert!(verify_clique(g, &witness), "solver produced a non-clique");
    Ok(CliqueResult {
        size: witness.len(),
        witness,
        optimal: !search.aborted,
        bound_used,
        elapsed: start.elapsed().as_secs_f64(),
        work: search.nodes,
    })
}

struct Search {
    stride: usize,
    /// Adjacency among the root candidates, in local numbering.
    adj: Vec<u64>,
    /// Local index to original vertex.
    order: Vec<usize>,
    /// Fixed vertices every clique in the search contains.
    prefix: Vec<usize>,
    best: Vec<usize>,
    target: usize,
    nodes: u64,
    start: Instant,
    time_budget: Option<Duration>,
    node_budget: Option<u64>,
    aborted: bool,
    /// Reached the caller's upper bound.
    done: bool,
    frames: Vec<Frame>,
}

#[inline]
fn first_bit(set: &[u64]) -> Option<usize> {
    set.iter()
        .position(|&w| w != 0)
        .map(|i| i * 64 + set[i].trailing_zeros() as usize)
}

#[inline]
fn clear_bit(set: &mut [u64], v: usize) {
    set[v / 64] &= !(1 << (v % 64));
}

#[inline]
fn set_bit(set: &mut [u64], v: usize) {
    set[v / 64] |= 1 << (v % 64);
}

impl Search {
    #[inline]
    fn row(&self, v: usize) -> &[u64] {
        &self.adj[v * self.stride..(v + 1) * self.stride]
    }

    fn out_of_budget(&mut self) -> bool {
        if self.node_budget.is_some_and(|b| self.nodes >= b) {
            self.aborted = true;
        }
        if self.nodes.is_multiple_of(1024) && self.time_budget.is_some_and(|b| self.start.elapsed() >= b) {
            self.aborted = true;
        }
        self.aborted
    }

    fn intersection_count(&self, v: usize, set: &[u64]) -> u32 {
        self.row(v).iter().zip(set).map(|(a, b)| (a & b).count_ones()).sum()
    }

    /// Tries to move `v` into a class `k1 <= kmin`, either directly or by
    /// moving its single neighbour there into a later class `k2 <= kmin`.
    fn renumber(&self, v: usize, classes: &mut [u64], kmin: usize) -> bool {
        let st = self.stride;
        let row = self.row(v);
        for k1 in 0..kmin {
            let c1 = &classes[k1 * st..(k1 + 1) * st];
            match self.intersection_count(v, c1) {
                0 => {
                    set_bit(&mut classes[k1 * st..], v);
                    return true;
                }
                1 => {
                    let i = row.iter().zip(c1).position(|(a, b)| a & b != 0).unwrap();
                    let w = i * 64 + (row[i] & c1[i]).trailing_zeros() as usize;
                    let free =
                        (k1 + 1..kmin).find(|&k2| self.intersection_count(w, &classes[k2 * st..(k2 + 1) * st]) == 0);
                    if let Some(k2) = free {
                        clear_bit(&mut classes[k1 * st..], w);
                        set_bit(&mut classes[k2 * st..], w);
                        set_bit(&mut classes[k1 * st..], v);
                        return true;
                    }
                }
                _ => {}
            }
        }
        false
    }

    /// Colors `f.cand` into independent classes, first fit in vertex order.
    /// Only vertices whose color exceeds `kmin` can lead anywhere, so only
    /// those land in `f.branch`, as `(vertex, color)` with colors nondecreasing.
    fn color(&self, f: &mut Frame, kmin: usize) {
        let st = self.stride;
        f.branch.clear();
        f.classes.clear();
        f.uncolored.clear();
        f.uncolored.extend_from_slice(&f.cand);
        let mut count = 0;
        while f.uncolored.iter().any(|&w| w != 0) {
            f.q.clear();
            f.q.extend_from_slice(&f.uncolored);
            f.classes.resize((count + 1) * st, 0);
            while let Some(v) = first_bit(&f.q) {
                clear_bit(&mut f.q, v);
                clear_bit(&mut f.uncolored, v);
                if count >= kmin && kmin >= 1 && self.renumber(v, &mut f.classes, kmin) {
                    continue;
                }
                for (a, b) in f.q.iter_mut().zip(self.row(v)) {
                    *a &= !b;
                }
                set_bit(&mut f.classes[count * st..], v);
            }
            if f.classes[count * st..].iter().any(|&w| w != 0) {
                count += 1;
            }
        }
        for k in kmin..count {
            f.branch
                .extend(ones_in(&f.classes[k * st..(k + 1) * st]).map(|v| (v, k + 1)));
        }
    }

    fn record(&mut self, current: &[usize]) {
        self.best = self
            .prefix
            .iter()
            .copied()
            .chain(current.iter().map(|&v| self.order[v]))
            .collect();
        self.done = self.best.len() >= self.target;
    }

    /// Expands the candidate set stored in `frames[current.len()]`.
    fn expand(&mut self, current: &mut Vec<usize>) {
        self.nodes += 1;
        if self.out_of_budget() {
            return;
        }
        let depth = current.len();
        if self.frames.len() <= depth + 1 {
            self.frames.resize_with(depth + 2, Frame::default);
        }
        let mut f = std::mem::take(&mut self.frames[depth]);
        let base = self.prefix.len() + depth;
        let kmin = self.best.len().saturating_sub(base);
        self.color(&mut f, kmin);
        for &(v, color) in f.branch.iter().rev() {
            if base + color <= self.best.len() {
                break;
            }
            current.push(v);
            if base + 1 > self.best.len() {
                self.record(current);
            }
            let mut child = std::mem::take(&mut self.frames[depth + 1]);
            child.cand.clear();
            child.cand.extend(f.cand.iter().zip(self.row(v)).map(|(a, b)| a & b));
            let nonempty = child.cand.iter().any(|&w| w != 0);
            self.frames[depth + 1] = child;
            if !self.done && nonempty {
                self.expand(current);
            }
            current.pop();
            if self.done || self.aborted {
                break;
            }
            clear_bit(&mut f.cand, v);
        }
        self.frames[depth] = f;
    }
}

/// Per-depth buffers, reused across the whole search.
#[derive(Default)]
struct Frame {
    cand: Vec<u64>,
    uncolored: Vec<u64>,
    q: Vec<u64>,
    classes: Vec<u64>,
    branch: Vec<(usize, usize)>,
}
