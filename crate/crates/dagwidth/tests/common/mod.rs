//! Shared fixtures, generators and independent oracles for the
//! integration suites. Oracles deliberately re-derive everything from
//! first principles (plain DFS/BFS, exhaustive enumeration) so they
//! share no code path with the implementations they check.

#![allow(dead_code)]

use std::collections::VecDeque;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use dagwidth::digraph::{bidirect, parse_edge_list, Digraph, VertexSet};
use dagwidth::linkage::{LinkMode, LinkageInstance};

/// The 32-vertex showcase graph: six strongly connected components,
/// circumference 4. Vertex `i` carries label `i+1`.
pub fn clusters32() -> Digraph {
    parse_edge_list(include_str!("../data/clusters32.txt")).expect("fixture parses")
}

/// Translate 1-based display labels to vertex ids for the fixture.
pub fn ids(labels: &[usize]) -> VertexSet {
    labels.iter().map(|l| l - 1).collect()
}

pub fn complete_bidirected(p: usize) -> Digraph {
    let mut edges = Vec::new();
    for i in 0..p {
        for j in i + 1..p {
            edges.push((i, j));
        }
    }
    bidirect(p, &edges).expect("simple edges")
}

pub fn bidirected_cycle(n: usize) -> Digraph {
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    bidirect(n, &edges).expect("simple edges")
}

/// Uniform random tree on `n` vertices, bidirected.
pub fn bidirected_random_tree(n: usize, rng: &mut StdRng) -> Digraph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    bidirect(n, &edges).expect("tree edges")
}

// ---------------------------------------------------------------------------
// Random digraph generators

/// Sparse random digraph: `n` vertices, about `m` arcs, no self-loops,
/// duplicates allowed only when `multi` is set.
pub fn random_digraph(n: usize, m: usize, multi: bool, rng: &mut StdRng) -> Digraph {
    let mut d = Digraph::new(n);
    let mut seen = std::collections::BTreeSet::new();
    let mut placed = 0;
    let mut attempts = 0;
    while placed < m && attempts < 20 * m + 100 {
        attempts += 1;
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v {
            continue;
        }
        if !multi && !seen.insert((u, v)) {
            continue;
        }
        d.add_arc(u, v).expect("endpoints in range");
        placed += 1;
    }
    d
}

/// Random DAG: arcs only from lower to higher vertex id.
pub fn random_dag(n: usize, m: usize, rng: &mut StdRng) -> Digraph {
    let mut d = Digraph::new(n);
    let mut seen = std::collections::BTreeSet::new();
    let mut placed = 0;
    let mut attempts = 0;
    while placed < m && attempts < 20 * m + 100 {
        attempts += 1;
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v {
            continue;
        }
        let (u, v) = (u.min(v), u.max(v));
        if !seen.insert((u, v)) {
            continue;
        }
        d.add_arc(u, v).expect("endpoints in range");
        placed += 1;
    }
    d
}

/// Random circumference-<=2 digraph: a forest of 2-cycles (the strong
/// components) plus one-way arcs that respect a fixed component order,
/// so no larger cycle can close. Multiplicities up to `max_mult`.
pub fn random_circ2(n: usize, extra_arcs: usize, max_mult: usize, rng: &mut StdRng) -> Digraph {
    let mut d = Digraph::new(n);
    // Partition 0..n into consecutive blocks, each becoming a tree of
    // 2-cycles.
    let mut block_of = vec![0usize; n];
    let mut block = 0usize;
    let mut start = 0usize;
    while start < n {
        let len = rng.gen_range(1..=4.min(n - start));
        for v in start..start + len {
            block_of[v] = block;
        }
        // Random tree over the block, every edge a 2-cycle.
        for v in start + 1..start + len {
            let u = rng.gen_range(start..v);
            let m1 = rng.gen_range(1..=max_mult);
            let m2 = rng.gen_range(1..=max_mult);
            for _ in 0..m1 {
                d.add_arc(u, v).expect("in range");
            }
            for _ in 0..m2 {
                d.add_arc(v, u).expect("in range");
            }
        }
        start += len;
        block += 1;
    }
    // Forward arcs between blocks keep the condensation acyclic.
    for _ in 0..extra_arcs {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v || block_of[u] >= block_of[v] {
            continue;
        }
        let mult = rng.gen_range(1..=max_mult);
        for _ in 0..mult {
            d.add_arc(u, v).expect("in range");
        }
    }
    d
}

/// Random instance on a circumference-<=2 digraph.
pub fn random_circ2_instance(
    n: usize,
    k: usize,
    mode: LinkMode,
    max_mult: usize,
    rng: &mut StdRng,
) -> LinkageInstance {
    loop {
        let d = random_circ2(n, n, max_mult, rng);
        let vertices: Vec<usize> = d.vertices().collect();
        if vertices.len() < 2 * k {
            continue;
        }
        let mut pairs = Vec::with_capacity(k);
        match mode {
            LinkMode::Vertex => {
                let mut pool = vertices.clone();
                for _ in 0..2 * k {
                    let i = rng.gen_range(0..pool.len());
                    pool.swap_remove(i);
                }
                let mut chosen: Vec<usize> = vertices
                    .iter()
                    .copied()
                    .filter(|v| !pool.contains(v))
                    .collect();
                chosen.sort_unstable();
                // Random pairing of the 2k chosen terminals.
                for _ in 0..k {
                    let s = chosen.swap_remove(rng.gen_range(0..chosen.len()));
                    let t = chosen.swap_remove(rng.gen_range(0..chosen.len()));
                    pairs.push((s, t));
                }
            }
            LinkMode::Arc => {
                for _ in 0..k {
                    let s = vertices[rng.gen_range(0..vertices.len())];
                    let t = vertices[rng.gen_range(0..vertices.len())];
                    pairs.push((s, t));
                }
            }
        }
        if let Ok(inst) = LinkageInstance::new(d, pairs, mode) {
            return inst;
        }
    }
}

// ---------------------------------------------------------------------------
// Oracles

/// Pairwise mutual-reachability matrix by repeated DFS.
pub fn mutual_reachability(d: &Digraph) -> Vec<Vec<bool>> {
    let bound = d.vertex_bound();
    let mut can_reach = vec![vec![false; bound]; bound];
    for s in d.vertices() {
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            if can_reach[s][v] {
                continue;
            }
            can_reach[s][v] = true;
            for w in d.out_neighbors(v) {
                stack.push(w);
            }
        }
    }
    can_reach
}

/// BFS closure oracle for `reach`.
pub fn bfs_closure(d: &Digraph, sources: &VertexSet, forbidden: &VertexSet) -> VertexSet {
    let mut seen = VertexSet::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &s in sources {
        seen.insert(s);
        queue.push_back(s);
    }
    while let Some(v) = queue.pop_front() {
        for &a in d.out_arcs(v) {
            let w = d.head(a);
            if !forbidden.contains(&w) && seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Every simple directed cycle's vertex set, by unbounded DFS anchored
/// at each cycle's minimum vertex. Exponential; fine for n <= 10.
pub fn all_cycle_sets(d: &Digraph) -> Vec<Vec<usize>> {
    let mut found: std::collections::BTreeSet<Vec<usize>> = Default::default();
    for root in d.vertices() {
        let mut path = vec![root];
        let mut on = vec![false; d.vertex_bound()];
        on[root] = true;
        cycle_dfs(d, root, &mut path, &mut on, &mut found);
    }
    found.into_iter().collect()
}

fn cycle_dfs(
    d: &Digraph,
    root: usize,
    path: &mut Vec<usize>,
    on: &mut Vec<bool>,
    found: &mut std::collections::BTreeSet<Vec<usize>>,
) {
    let last = *path.last().unwrap();
    for w in d.out_neighbors(last) {
        if w == root && path.len() >= 2 {
            let mut key = path.clone();
            key.sort_unstable();
            found.insert(key);
            continue;
        }
        if w < root || on[w] {
            continue;
        }
        path.push(w);
        on[w] = true;
        cycle_dfs(d, root, path, on, found);
        path.pop();
        on[w] = false;
    }
}

/// Exact circumference by full enumeration (0 when acyclic).
pub fn circumference_oracle(d: &Digraph) -> usize {
    all_cycle_sets(d).iter().map(|c| c.len()).max().unwrap_or(0)
}

/// Longest undirected simple cycle length of a graph given by edges
/// (0 when the graph is a forest).
pub fn undirected_circumference_oracle(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
    }
    let mut best = 0usize;
    for root in 0..n {
        let mut on = vec![false; n];
        on[root] = true;
        let mut path = vec![root];
        undirected_cycle_dfs(&adj, root, &mut path, &mut on, &mut best);
    }
    best
}

fn undirected_cycle_dfs(
    adj: &[Vec<usize>],
    root: usize,
    path: &mut Vec<usize>,
    on: &mut Vec<bool>,
    best: &mut usize,
) {
    let last = *path.last().unwrap();
    for &w in &adj[last] {
        if w == root && path.len() >= 3 {
            *best = (*best).max(path.len());
            continue;
        }
        if w < root || on[w] {
            continue;
        }
        path.push(w);
        on[w] = true;
        undirected_cycle_dfs(adj, root, path, on, best);
        path.pop();
        on[w] = false;
    }
}

/// Longest closed trail (arc-distinct closed walk) by exhaustive DFS
/// over arcs. Exponential in the arc count; keep inputs tiny.
pub fn longest_closed_trail_oracle(d: &Digraph) -> usize {
    let mut best = 0usize;
    for start in d.vertices() {
        let mut used: std::collections::BTreeSet<usize> = Default::default();
        trail_dfs(d, start, start, &mut used, &mut best);
    }
    best
}

fn trail_dfs(
    d: &Digraph,
    start: usize,
    cur: usize,
    used: &mut std::collections::BTreeSet<usize>,
    best: &mut usize,
) {
    for &a in d.out_arcs(cur) {
        if used.contains(&a) {
            continue;
        }
        let w = d.head(a);
        used.insert(a);
        if w == start {
            *best = (*best).max(used.len());
        }
        trail_dfs(d, start, w, used, best);
        used.remove(&a);
    }
}

pub fn seeded(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}
