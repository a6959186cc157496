//! Bounded-circumference computation and maximal-cycle machinery.
//!
//! Everything in this module is parameterized by a promised bound
//! `p_max` on the cycle length. Within that promise the searches are
//! exhaustive, so "no cycle found" statements are theorems about the
//! input, not heuristics. Worst-case cost is exponential in `p_max`
//! only.

use crate::digraph::{Digraph, VertexSet};
use crate::{Error, Result};

/// Result of a bounded circumference computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Circumference {
    /// Exact circumference (0 for acyclic digraphs).
    Exact(usize),
    /// Some simple cycle is longer than the probe bound.
    Exceeds,
}

impl Circumference {
    pub fn exact(self) -> Option<usize> {
        match self {
            Circumference::Exact(c) => Some(c),
            Circumference::Exceeds => None,
        }
    }

    /// True when the circumference is known and at most `bound`.
    pub fn within(self, bound: usize) -> bool {
        matches!(self, Circumference::Exact(c) if c <= bound)
    }
}

/// A simple directed cycle: at least two distinct vertices plus the arc
/// ids realizing it. `arcs[i]` goes from `vertices[i]` to
/// `vertices[(i + 1) % len]`. The stored rotation starts at the minimum
/// vertex id so equal cycles compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    vertices: Vec<usize>,
    arcs: Vec<usize>,
}

impl Cycle {
    /// Build from a vertex rotation, picking the least arc id for every
    /// hop. Checks simplicity and that all hops exist.
    pub fn from_vertices(d: &Digraph, vertices: &[usize]) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::Precondition("a cycle needs at least two vertices".into()));
        }
        let distinct: VertexSet = vertices.iter().copied().collect();
        if distinct.len() != vertices.len() {
            return Err(Error::Precondition("cycle repeats a vertex".into()));
        }
        let mut arcs = Vec::with_capacity(vertices.len());
        for i in 0..vertices.len() {
            let u = vertices[i];
            let v = vertices[(i + 1) % vertices.len()];
            let arc = d
                .find_arc(u, v)
                .ok_or_else(|| Error::Precondition(format!("no arc {u} -> {v} for cycle hop")))?;
            arcs.push(arc);
        }
        let mut c = Cycle { vertices: vertices.to_vec(), arcs };
        c.canonicalize();
        Ok(c)
    }

    fn canonicalize(&mut self) {
        let min_pos = self
            .vertices
            .iter()
            .enumerate()
            .min_by_key(|&(_, v)| *v)
            .map(|(i, _)| i)
            .expect("nonempty");
        self.vertices.rotate_left(min_pos);
        self.arcs.rotate_left(min_pos);
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Vertex rotation starting at the minimum id.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn arcs(&self) -> &[usize] {
        &self.arcs
    }

    pub fn vertex_set(&self) -> VertexSet {
        self.vertices.iter().copied().collect()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.contains(&v)
    }

    /// The cycle vertices from `from` to `to` following the cycle
    /// orientation, both endpoints included.
    pub fn segment(&self, from: usize, to: usize) -> Vec<usize> {
        let n = self.vertices.len();
        let i = self.vertices.iter().position(|&v| v == from).expect("on cycle");
        let mut seg = vec![self.vertices[i]];
        if from == to {
            return seg;
        }
        let mut j = (i + 1) % n;
        loop {
            seg.push(self.vertices[j]);
            if self.vertices[j] == to {
                return seg;
            }
            j = (j + 1) % n;
            assert_ne!(j, i, "segment endpoint not on cycle");
        }
    }

    /// Arc-distance from `from` to `to` along the cycle orientation.
    pub fn distance(&self, from: usize, to: usize) -> usize {
        let n = self.vertices.len();
        let i = self.vertices.iter().position(|&v| v == from).expect("on cycle");
        let j = self.vertices.iter().position(|&v| v == to).expect("on cycle");
        (j + n - i) % n
    }
}

/// All distinct vertex sets of simple cycles with at most `p_max`
/// vertices, each paired with one realizing rotation (the first one the
/// canonical search finds). Sets are returned in ascending lexicographic
/// order of their sorted vertex lists.
///
/// The search runs one depth-bounded DFS per root vertex and only walks
/// vertices with ids at least the root, so each cycle is discovered at
/// its minimum vertex exactly once per realizing rotation.
pub fn bounded_cycle_sets(d: &Digraph, p_max: usize) -> Vec<(Vec<usize>, Cycle)> {
    let mut found: std::collections::BTreeMap<Vec<usize>, Cycle> = std::collections::BTreeMap::new();
    for root in d.vertices() {
        let mut path = vec![root];
        let mut on_path = vec![false; d.vertex_bound()];
        on_path[root] = true;
        collect_cycles(d, root, p_max, &mut path, &mut on_path, &mut found);
    }
    found.into_iter().collect()
}

fn collect_cycles(
    d: &Digraph,
    root: usize,
    p_max: usize,
    path: &mut Vec<usize>,
    on_path: &mut Vec<bool>,
    found: &mut std::collections::BTreeMap<Vec<usize>, Cycle>,
) {
    let last = *path.last().expect("nonempty");
    for w in d.out_neighbors(last) {
        if w == root && path.len() >= 2 {
            let mut key = path.clone();
            key.sort_unstable();
            found
                .entry(key)
                .or_insert_with(|| Cycle::from_vertices(d, path).expect("walked arcs exist"));
            continue;
        }
        if w < root || on_path[w] || path.len() == p_max {
            continue;
        }
        path.push(w);
        on_path[w] = true;
        collect_cycles(d, root, p_max, path, on_path, found);
        path.pop();
        on_path[w] = false;
    }
}

/// Exact circumference when it is at most `p_max`, [`Circumference::Exceeds`]
/// otherwise. Acyclic digraphs report 0.
///
/// A cycle longer than `p_max` is detected without enumerating it in
/// full: whenever the root-anchored DFS holds a simple path of
/// `p_max + 1` vertices, any return path to the root that avoids the
/// path interior closes a simple cycle of more than `p_max` vertices,
/// and conversely every over-long cycle contains such a configuration.
pub fn circumference_bounded(d: &Digraph, p_max: usize) -> Result<Circumference> {
    if p_max < 2 {
        return Err(Error::Precondition("circumference probe needs p_max >= 2".into()));
    }
    let roots: Vec<usize> = d.vertices().collect();
    let per_root = crate::par::map_collect(&roots, |&root| root_circumference(d, root, p_max));
    let mut best = 0usize;
    for r in per_root {
        match r {
            Circumference::Exceeds => return Ok(Circumference::Exceeds),
            Circumference::Exact(c) => best = best.max(c),
        }
    }
    Ok(Circumference::Exact(best))
}

/// Sequential single-root kernel; the parallel variant fans out over
/// roots. Exposed for the bench suite.
pub fn circumference_bounded_seq(d: &Digraph, p_max: usize) -> Result<Circumference> {
    if p_max < 2 {
        return Err(Error::Precondition("circumference probe needs p_max >= 2".into()));
    }
    let mut best = 0usize;
    for root in d.vertices() {
        match root_circumference(d, root, p_max) {
            Circumference::Exceeds => return Ok(Circumference::Exceeds),
            Circumference::Exact(c) => best = best.max(c),
        }
    }
    Ok(Circumference::Exact(best))
}

fn root_circumference(d: &Digraph, root: usize, p_max: usize) -> Circumference {
    let mut on_path = vec![false; d.vertex_bound()];
    on_path[root] = true;
    let mut path = vec![root];
    let mut best = 0usize;
    if root_dfs(d, root, p_max, &mut path, &mut on_path, &mut best) {
        Circumference::Exceeds
    } else {
        Circumference::Exact(best)
    }
}

/// Returns true when a cycle longer than `p_max` through `root` (as
/// minimum vertex) exists.
fn root_dfs(
    d: &Digraph,
    root: usize,
    p_max: usize,
    path: &mut Vec<usize>,
    on_path: &mut Vec<bool>,
    best: &mut usize,
) -> bool {
    let last = *path.last().expect("nonempty");
    if path.len() == p_max + 1 {
        // Any way back to the root avoiding the path interior closes a
        // cycle with more than p_max vertices.
        return returns_to(d, last, root, path, on_path);
    }
    for w in d.out_neighbors(last) {
        if w == root && path.len() >= 2 {
            *best = (*best).max(path.len());
            continue;
        }
        if w < root || on_path[w] {
            continue;
        }
        path.push(w);
        on_path[w] = true;
        let exceeded = root_dfs(d, root, p_max, path, on_path, best);
        path.pop();
        on_path[w] = false;
        if exceeded {
            return true;
        }
    }
    false
}

/// BFS from `from` to `to` through vertices >= `to` that are not on the
/// current DFS path (the path interior stays forbidden; `from` is the
/// path tip itself).
fn returns_to(d: &Digraph, from: usize, to: usize, _path: &[usize], on_path: &[bool]) -> bool {
    let mut seen = vec![false; d.vertex_bound()];
    let mut queue = std::collections::VecDeque::new();
    seen[from] = true;
    queue.push_back(from);
    while let Some(v) = queue.pop_front() {
        for w in d.out_neighbors(v) {
            if w == to {
                return true;
            }
            if w < to || seen[w] || on_path[w] {
                continue;
            }
            seen[w] = true;
            queue.push_back(w);
        }
    }
    false
}

/// A simple cycle of at most `p_max` vertices whose vertex set contains
/// `x`, if one exists. Deterministic: the DFS anchors at the minimum
/// vertex of `x` and explores out-neighbors in ascending order, so the
/// first hit is always the same.
pub fn find_cycle_containing(d: &Digraph, x: &VertexSet, p_max: usize) -> Result<Option<Cycle>> {
    if x.is_empty() {
        return Err(Error::Precondition("find_cycle_containing needs a nonempty target set".into()));
    }
    for &v in x {
        if !d.has_vertex(v) {
            return Err(Error::MissingVertex(v));
        }
    }
    if x.len() > p_max {
        return Ok(None);
    }
    let start = *x.iter().next().expect("nonempty");
    let mut on_path = vec![false; d.vertex_bound()];
    on_path[start] = true;
    let mut path = vec![start];
    let missing = x.len() - 1;
    Ok(thread_cycle(d, start, x, p_max, missing, &mut path, &mut on_path))
}

fn thread_cycle(
    d: &Digraph,
    start: usize,
    x: &VertexSet,
    p_max: usize,
    missing: usize,
    path: &mut Vec<usize>,
    on_path: &mut Vec<bool>,
) -> Option<Cycle> {
    let last = *path.last().expect("nonempty");
    if missing == 0 && path.len() >= 2 && d.find_arc(last, start).is_some() {
        return Some(Cycle::from_vertices(d, path).expect("walked arcs exist"));
    }
    if path.len() == p_max {
        return None;
    }
    for w in d.out_neighbors(last) {
        if on_path[w] || w == start {
            continue;
        }
        let next_missing = if x.contains(&w) { missing - 1 } else { missing };
        // Every still-missing target needs a slot on the path.
        if next_missing > p_max - path.len() - 1 {
            continue;
        }
        path.push(w);
        on_path[w] = true;
        let hit = thread_cycle(d, start, x, p_max, next_missing, path, on_path);
        path.pop();
        on_path[w] = false;
        if hit.is_some() {
            return hit;
        }
    }
    None
}

/// True iff no cycle of at most `p_max` vertices properly contains the
/// vertex set of `c`. Valid verdict only under the promise that the
/// digraph's circumference is at most `p_max`.
pub fn is_maximal_cycle(d: &Digraph, c: &Cycle, p_max: usize) -> Result<bool> {
    let base = c.vertex_set();
    if base.len() >= p_max {
        return Ok(true);
    }
    for w in d.vertices() {
        if base.contains(&w) {
            continue;
        }
        let mut x = base.clone();
        x.insert(w);
        if find_cycle_containing(d, &x, p_max)?.is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Grow `c` by repeated single-vertex extension until no cycle of at
/// most `p_max` vertices properly contains it. The result always passes
/// [`is_maximal_cycle`].
pub fn extend_to_maximal_cycle(d: &Digraph, c: &Cycle, p_max: usize) -> Result<Cycle> {
    if c.len() > p_max {
        return Err(Error::CircumferenceExceeded { bound: p_max });
    }
    let mut current = c.clone();
    'grow: loop {
        if current.len() >= p_max {
            return Ok(current);
        }
        let base = current.vertex_set();
        for w in d.vertices() {
            if base.contains(&w) {
                continue;
            }
            let mut x = base.clone();
            x.insert(w);
            if let Some(bigger) = find_cycle_containing(d, &x, p_max)? {
                current = bigger;
                continue 'grow;
            }
        }
        return Ok(current);
    }
}

/// The maximal cycle whose sorted vertex set is lexicographically least,
/// or `None` for an acyclic digraph. Valid under the promise
/// `circumference <= p_max`; used as the deterministic starting point of
/// the pursuit strategy.
pub fn least_maximal_cycle(d: &Digraph, p_max: usize) -> Option<Cycle> {
    let sets = bounded_cycle_sets(d, p_max);
    let maximal = |candidate: &Vec<usize>| {
        !sets.iter().any(|(other, _)| {
            other.len() > candidate.len()
                && candidate.iter().all(|v| other.binary_search(v).is_ok())
        })
    };
    sets.iter()
        .find(|(set, _)| maximal(set))
        .map(|(_, cycle)| cycle.clone())
}
