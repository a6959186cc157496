//! Disjoint-path solvers.
//!
//! Three layers:
//!
//! * [`dag_vertex_linkage`] — the pebble algorithm for vertex-disjoint
//!   paths in acyclic digraphs, the workhorse everything reduces to.
//! * [`reduce_circ2_vertex`] / [`reduce_circ2_weak`] — the
//!   circumference-2 surgeries that peel leaf vertices off strong
//!   components (trees of 2-cycles) until the instance is acyclic, with
//!   invertible records for lifting solutions back.
//! * [`solve_weak_linkage_via_hitting_set`] — arc-disjoint linkage for
//!   digraphs that become circumference-2 after removing a small vertex
//!   set `X`: enumerate how solution paths cross the boundary of `X`,
//!   solve the inside by brute force and the outside by the
//!   circumference-2 pipeline, and stitch.
//!
//! Every solver re-checks its answer with [`verify_solution`], an
//! independent witness checker, before reporting it. The brute-force
//! backtracking solver [`brute_force_linkage`] doubles as the oracle the
//! test suites compare everything against.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::cycles::{circumference_bounded, Circumference};
use crate::digraph::{
    add_pendant_terminals, line_digraph, parse_edge_list, scc, to_edge_list, Digraph, Path,
    VertexSet,
};
use crate::{Error, Result};

/// Disjointness mode of a linkage instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkMode {
    /// Vertex-disjoint paths; the `2k` terminals must be distinct.
    Vertex,
    /// Arc-disjoint paths; terminals may repeat and parallel arcs count.
    Arc,
}

/// A digraph with terminal pairs and a disjointness mode.
#[derive(Debug, Clone)]
pub struct LinkageInstance {
    pub digraph: Digraph,
    pub pairs: Vec<(usize, usize)>,
    pub mode: LinkMode,
}

impl LinkageInstance {
    pub fn new(digraph: Digraph, pairs: Vec<(usize, usize)>, mode: LinkMode) -> Result<Self> {
        for &(s, t) in &pairs {
            if !digraph.has_vertex(s) {
                return Err(Error::MissingVertex(s));
            }
            if !digraph.has_vertex(t) {
                return Err(Error::MissingVertex(t));
            }
        }
        if mode == LinkMode::Vertex {
            let mut terminals: Vec<usize> = Vec::new();
            for &(s, t) in &pairs {
                terminals.push(s);
                terminals.push(t);
            }
            let distinct: VertexSet = terminals.iter().copied().collect();
            if distinct.len() != terminals.len() {
                return Err(Error::Precondition(
                    "vertex-disjoint instances need 2k distinct terminals".into(),
                ));
            }
        }
        Ok(LinkageInstance { digraph, pairs, mode })
    }

    pub fn k(&self) -> usize {
        self.pairs.len()
    }
}

/// Parse the instance file format: an edge-list graph followed by
/// `@mode vertex|arc` and an `@pairs` block of `s t` lines (ids or
/// quoted labels).
pub fn parse_instance(text: &str) -> Result<LinkageInstance> {
    let mut graph_text = String::new();
    let mut pair_lines: Vec<(usize, String)> = Vec::new();
    let mut mode: Option<LinkMode> = None;
    #[derive(PartialEq)]
    enum Section {
        Graph,
        Pairs,
    }
    let mut section = Section::Graph;
    for (lineno, raw) in text.lines().enumerate() {
        let stripped = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let trimmed = stripped.trim();
        if let Some(rest) = trimmed.strip_prefix("@mode") {
            let m = rest.trim();
            mode = Some(match m {
                "vertex" => LinkMode::Vertex,
                "arc" => LinkMode::Arc,
                other => {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        msg: format!("unknown mode `{other}` (expected vertex|arc)"),
                    })
                }
            });
            continue;
        }
        if trimmed == "@pairs" {
            section = Section::Pairs;
            continue;
        }
        if trimmed == "@labels" {
            section = Section::Graph;
            graph_text.push_str(raw);
            graph_text.push('\n');
            continue;
        }
        match section {
            Section::Graph => {
                graph_text.push_str(raw);
                graph_text.push('\n');
            }
            Section::Pairs => {
                if !trimmed.is_empty() {
                    pair_lines.push((lineno + 1, trimmed.to_string()));
                }
            }
        }
    }
    let digraph = parse_edge_list(&graph_text)?;
    let mode = mode.ok_or(Error::Parse { line: 0, msg: "missing @mode directive".into() })?;
    let mut by_label: HashMap<String, usize> = HashMap::new();
    for v in digraph.vertices() {
        if let Some(l) = digraph.label(v) {
            by_label.insert(l.to_string(), v);
        }
    }
    let resolve = |tok: &str, line: usize| -> Result<usize> {
        if let Some(name) = tok.strip_prefix('"').and_then(|t| t.strip_suffix('"')) {
            return by_label
                .get(name)
                .copied()
                .ok_or(Error::Parse { line, msg: format!("unknown label \"{name}\"") });
        }
        tok.parse::<usize>()
            .map_err(|_| Error::Parse { line, msg: format!("bad vertex token `{tok}`") })
    };
    let mut pairs = Vec::with_capacity(pair_lines.len());
    for (line, text) in pair_lines {
        let toks: Vec<&str> = text.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(Error::Parse { line, msg: "expected `s t` on pair line".into() });
        }
        pairs.push((resolve(toks[0], line)?, resolve(toks[1], line)?));
    }
    LinkageInstance::new(digraph, pairs, mode)
}

/// Canonical instance serialization.
pub fn instance_to_text(inst: &LinkageInstance) -> String {
    let mut s = to_edge_list(&inst.digraph);
    s.push_str(match inst.mode {
        LinkMode::Vertex => "@mode vertex\n",
        LinkMode::Arc => "@mode arc\n",
    });
    s.push_str("@pairs\n");
    for &(a, b) in &inst.pairs {
        s.push_str(&format!("{a} {b}\n"));
    }
    s
}

// ---------------------------------------------------------------------------
// Witness verification

/// Independent solution checker: endpoints, arc chaining, vertex
/// simplicity, and mode-appropriate disjointness. Uses only digraph
/// lookups, never solver internals.
pub fn verify_solution(inst: &LinkageInstance, paths: &[Path]) -> Result<()> {
    if paths.len() != inst.pairs.len() {
        return Err(Error::Precondition(format!(
            "{} paths for {} terminal pairs",
            paths.len(),
            inst.pairs.len()
        )));
    }
    let d = &inst.digraph;
    for (i, (path, &(s, t))) in paths.iter().zip(&inst.pairs).enumerate() {
        if path.first() != s || path.last() != t {
            return Err(Error::Precondition(format!(
                "path {i} runs {} -> {} instead of {s} -> {t}",
                path.first(),
                path.last()
            )));
        }
        // Re-deriving through the digraph checks arc existence, chaining
        // and vertex simplicity in one go.
        if path.len_arcs() > 0 {
            let rebuilt = Path::from_arcs(d, path.arcs().to_vec())?;
            if rebuilt != *path {
                return Err(Error::Precondition(format!("path {i} is not a consistent path")));
            }
        } else if !d.has_vertex(s) {
            return Err(Error::MissingVertex(s));
        }
    }
    match inst.mode {
        LinkMode::Vertex => {
            let mut seen: VertexSet = VertexSet::new();
            for path in paths {
                for &v in path.vertices() {
                    if !seen.insert(v) {
                        return Err(Error::Precondition(format!(
                            "vertex {v} appears in two paths of a vertex-disjoint solution"
                        )));
                    }
                }
            }
        }
        LinkMode::Arc => {
            let mut seen: std::collections::BTreeSet<usize> = Default::default();
            for path in paths {
                for &a in path.arcs() {
                    if !seen.insert(a) {
                        return Err(Error::Precondition(format!(
                            "arc {a} appears in two paths of an arc-disjoint solution"
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Brute-force oracle

/// Exhaustive backtracking solver; exact whenever it completes within
/// `budget` search-node expansions. This is the oracle the pipelines are
/// tested against, so it shares no code with them.
pub fn brute_force_linkage(inst: &LinkageInstance, budget: usize) -> Result<Option<Vec<Path>>> {
    let mut used_vertices = VertexSet::new();
    let mut used_arcs: std::collections::BTreeSet<usize> = Default::default();
    if inst.mode == LinkMode::Vertex {
        // Reserve every terminal: no other path may run through it.
        for &(s, t) in &inst.pairs {
            used_vertices.insert(s);
            used_vertices.insert(t);
        }
    }
    let mut paths: Vec<Path> = Vec::new();
    let mut spent = 0usize;
    if search_pair(inst, 0, &mut used_vertices, &mut used_arcs, &mut paths, budget, &mut spent)? {
        verify_solution(inst, &paths)?;
        Ok(Some(paths))
    } else {
        Ok(None)
    }
}

fn search_pair(
    inst: &LinkageInstance,
    i: usize,
    used_vertices: &mut VertexSet,
    used_arcs: &mut std::collections::BTreeSet<usize>,
    paths: &mut Vec<Path>,
    budget: usize,
    spent: &mut usize,
) -> Result<bool> {
    if i == inst.pairs.len() {
        return Ok(true);
    }
    let (s, t) = inst.pairs[i];
    if s == t {
        if inst.mode == LinkMode::Vertex {
            return Err(Error::Precondition("vertex-disjoint pair with s == t".into()));
        }
        paths.push(Path::trivial(s));
        let ok = search_pair(inst, i + 1, used_vertices, used_arcs, paths, budget, spent)?;
        if !ok {
            paths.pop();
        }
        return Ok(ok);
    }
    let mut arc_trail: Vec<usize> = Vec::new();
    let mut on_path: VertexSet = [s].into_iter().collect();
    extend_path(inst, i, s, t, &mut arc_trail, &mut on_path, used_vertices, used_arcs, paths, budget, spent)
}

#[allow(clippy::too_many_arguments)]
fn extend_path(
    inst: &LinkageInstance,
    i: usize,
    cur: usize,
    t: usize,
    arc_trail: &mut Vec<usize>,
    on_path: &mut VertexSet,
    used_vertices: &mut VertexSet,
    used_arcs: &mut std::collections::BTreeSet<usize>,
    paths: &mut Vec<Path>,
    budget: usize,
    spent: &mut usize,
) -> Result<bool> {
    *spent += 1;
    if *spent > budget {
        return Err(Error::Budget(format!(
            "brute-force search exceeded {budget} node expansions"
        )));
    }
    if cur == t {
        let path = Path::from_arcs(&inst.digraph, arc_trail.clone())?;
        paths.push(path);
        if inst.mode == LinkMode::Vertex {
            for &v in on_path.iter() {
                used_vertices.insert(v);
            }
        } else {
            for &a in arc_trail.iter() {
                used_arcs.insert(a);
            }
        }
        if search_pair(inst, i + 1, used_vertices, used_arcs, paths, budget, spent)? {
            return Ok(true);
        }
        paths.pop();
        if inst.mode == LinkMode::Vertex {
            let (s, _) = inst.pairs[i];
            for &v in on_path.iter() {
                if v != s && v != t {
                    used_vertices.remove(&v);
                }
            }
            // s and t stay reserved for this pair.
            let _ = s;
        } else {
            for &a in arc_trail.iter() {
                used_arcs.remove(&a);
            }
        }
        return Ok(false);
    }
    for &a in inst.digraph.out_arcs(cur) {
        let w = inst.digraph.head(a);
        if on_path.contains(&w) {
            continue;
        }
        match inst.mode {
            LinkMode::Vertex => {
                if used_vertices.contains(&w) && w != t {
                    continue;
                }
            }
            LinkMode::Arc => {
                if used_arcs.contains(&a) {
                    continue;
                }
            }
        }
        arc_trail.push(a);
        on_path.insert(w);
        let ok = extend_path(inst, i, w, t, arc_trail, on_path, used_vertices, used_arcs, paths, budget, spent)?;
        arc_trail.pop();
        on_path.remove(&w);
        if ok {
            return Ok(true);
        }
    }
    Ok(false)
}

// ---------------------------------------------------------------------------
// Pebble solver for acyclic digraphs

/// Default cap on distinct pebble states explored.
pub const DEFAULT_PEBBLE_BUDGET: usize = 2_000_000;

/// Vertex-disjoint linkage in an acyclic digraph via pebble-tuple
/// reachability: one pebble per path stands on the path's current front,
/// frozen once it reaches its target. The only legal move advances the
/// pebble on the topologically least unfrozen vertex along one out-arc
/// to an unoccupied, unreserved vertex, so reachability of the all-
/// frozen state decides the instance and predecessor links recover
/// witness paths.
pub fn dag_vertex_linkage(inst: &LinkageInstance) -> Result<Option<Vec<Path>>> {
    dag_vertex_linkage_budgeted(inst, DEFAULT_PEBBLE_BUDGET)
}

/// [`dag_vertex_linkage`] with an explicit state budget.
pub fn dag_vertex_linkage_budgeted(
    inst: &LinkageInstance,
    budget: usize,
) -> Result<Option<Vec<Path>>> {
    if inst.mode != LinkMode::Vertex {
        return Err(Error::Precondition("pebble solver needs a vertex-disjoint instance".into()));
    }
    let d = &inst.digraph;
    if !d.is_acyclic() {
        return Err(Error::Precondition("pebble solver needs an acyclic digraph".into()));
    }
    let k = inst.pairs.len();
    if k == 0 {
        return Ok(Some(Vec::new()));
    }

    // Deterministic topological index: Kahn, least vertex id first.
    let mut topo_idx: HashMap<usize, usize> = HashMap::new();
    {
        let mut indeg: HashMap<usize, usize> = d.vertices().map(|v| (v, d.in_arcs(v).len())).collect();
        let mut ready: VertexSet = d.vertices().filter(|&v| indeg[&v] == 0).collect();
        let mut next = 0usize;
        while let Some(&v) = ready.iter().next() {
            ready.remove(&v);
            topo_idx.insert(v, next);
            next += 1;
            for w in d.out_neighbors(v) {
                let slot = indeg.get_mut(&w).expect("live vertex");
                *slot -= 1;
                if *slot == 0 {
                    ready.insert(w);
                }
            }
        }
    }

    // Other pairs' terminals are off limits: they belong to their own
    // paths.
    let mut reserved_for: HashMap<usize, usize> = HashMap::new();
    for (i, &(s, t)) in inst.pairs.iter().enumerate() {
        reserved_for.insert(s, i);
        reserved_for.insert(t, i);
    }

    let start: Vec<u32> = inst.pairs.iter().map(|&(s, _)| s as u32).collect();
    let goal: Vec<u32> = inst.pairs.iter().map(|&(_, t)| t as u32).collect();
    let targets: Vec<usize> = inst.pairs.iter().map(|&(_, t)| t).collect();

    let mut index_of: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut states: Vec<Vec<u32>> = Vec::new();
    // (predecessor state, pebble moved, arc used)
    let mut pred: Vec<Option<(usize, usize, usize)>> = Vec::new();
    index_of.insert(start.clone(), 0);
    states.push(start.clone());
    pred.push(None);

    let mut frontier = std::collections::VecDeque::new();
    frontier.push_back(0usize);
    let mut goal_state: Option<usize> = None;
    if start == goal {
        goal_state = Some(0);
    }

    'bfs: while let Some(si) = frontier.pop_front() {
        let state = states[si].clone();
        // Topologically least unfrozen pebble.
        let mover = (0..k)
            .filter(|&i| state[i] as usize != targets[i])
            .min_by_key(|&i| topo_idx[&(state[i] as usize)]);
        let Some(mover) = mover else { continue };
        let from = state[mover] as usize;
        for &a in d.out_arcs(from) {
            let w = d.head(a);
            if state.iter().any(|&p| p as usize == w) {
                continue;
            }
            if let Some(&owner) = reserved_for.get(&w) {
                if owner != mover {
                    continue;
                }
            }
            let mut next = state.clone();
            next[mover] = w as u32;
            if index_of.contains_key(&next) {
                continue;
            }
            if states.len() >= budget {
                return Err(Error::Budget(format!(
                    "pebble search exceeded {budget} states"
                )));
            }
            let ni = states.len();
            index_of.insert(next.clone(), ni);
            states.push(next.clone());
            pred.push(Some((si, mover, a)));
            if next == goal {
                goal_state = Some(ni);
                break 'bfs;
            }
            frontier.push_back(ni);
        }
    }

    let Some(mut at) = goal_state else {
        return Ok(None);
    };
    let mut arcs_per_pebble: Vec<Vec<usize>> = vec![Vec::new(); k];
    while let Some((prev, pebble, arc)) = pred[at] {
        arcs_per_pebble[pebble].push(arc);
        at = prev;
    }
    let mut paths = Vec::with_capacity(k);
    for (i, mut arcs) in arcs_per_pebble.into_iter().enumerate() {
        arcs.reverse();
        if arcs.is_empty() {
            paths.push(Path::trivial(inst.pairs[i].0));
        } else {
            paths.push(Path::from_arcs(d, arcs)?);
        }
    }
    verify_solution(inst, &paths)?;
    Ok(Some(paths))
}

// ---------------------------------------------------------------------------
// Reduction records

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitKind {
    Vertex,
    Weak,
}

/// One leaf split: vertex `removed` (with unique in-component neighbor
/// `neighbor`) replaced by `v_in`/`v_out`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitEvent {
    pub kind: SplitKind,
    pub removed: usize,
    pub neighbor: usize,
    pub component: Vec<usize>,
    pub v_in: usize,
    pub v_out: usize,
    /// New arc id -> replaced old arc id (1:1 reroutes).
    pub arc_map: Vec<(usize, usize)>,
    /// The `v_in -> v_out` arcs; they stand for "the path occupies the
    /// removed vertex" and vanish on lifting.
    pub bridge_arcs: Vec<usize>,
    /// New `v_in -> neighbor` arcs (lift to `removed -> neighbor`).
    pub into_neighbor: Vec<usize>,
    /// New `neighbor -> v_out` arcs (lift to `neighbor -> removed`).
    pub from_neighbor: Vec<usize>,
    /// Arc count between `removed` and the rest of the digraph outside
    /// its strong component (the weak split adds exactly this many
    /// bridge arcs).
    pub boundary_degree: usize,
}

/// Invertible record of a reduction run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ReductionRecord {
    /// Arcs deleted up front (arcs into sources / out of targets in the
    /// vertex reduction).
    pub preprocessed_arcs: Vec<usize>,
    pub events: Vec<SplitEvent>,
}

impl ReductionRecord {
    /// Map a solution of the reduced instance back onto the original
    /// digraph, undoing splits from last to first.
    pub fn lift(&self, original: &Digraph, paths: &[Path]) -> Result<Vec<Path>> {
        let mut arc_paths: Vec<Vec<usize>> = paths.iter().map(|p| p.arcs().to_vec()).collect();
        let mut endpoints: Vec<(usize, usize)> =
            paths.iter().map(|p| (p.first(), p.last())).collect();
        for event in self.events.iter().rev() {
            for (arcs, ends) in arc_paths.iter_mut().zip(endpoints.iter_mut()) {
                *arcs = lift_arcs(event, arcs);
                if ends.0 == event.v_in || ends.0 == event.v_out {
                    ends.0 = event.removed;
                }
                if ends.1 == event.v_in || ends.1 == event.v_out {
                    ends.1 = event.removed;
                }
            }
        }
        let mut out = Vec::with_capacity(arc_paths.len());
        for (arcs, (s, _)) in arc_paths.into_iter().zip(endpoints) {
            if arcs.is_empty() {
                out.push(Path::trivial(s));
            } else {
                out.push(Path::from_arcs(original, arcs)?);
            }
        }
        Ok(out)
    }
}

fn lift_arcs(event: &SplitEvent, arcs: &[usize]) -> Vec<usize> {
    let map: HashMap<usize, usize> = event.arc_map.iter().copied().collect();
    let bridges: std::collections::BTreeSet<usize> = event.bridge_arcs.iter().copied().collect();
    let into_n: std::collections::BTreeSet<usize> = event.into_neighbor.iter().copied().collect();
    let from_n: std::collections::BTreeSet<usize> = event.from_neighbor.iter().copied().collect();
    let mut out = Vec::with_capacity(arcs.len());
    let mut i = 0;
    while i < arcs.len() {
        let a = arcs[i];
        // `v_in -> neighbor -> v_out` collapses back onto the removed
        // vertex: the excursion through the neighbor disappears.
        if into_n.contains(&a) && i + 1 < arcs.len() && from_n.contains(&arcs[i + 1]) {
            i += 2;
            continue;
        }
        if bridges.contains(&a) {
            i += 1;
            continue;
        }
        match map.get(&a) {
            Some(&old) => out.push(old),
            None => out.push(a),
        }
        i += 1;
    }
    out
}

// ---------------------------------------------------------------------------
// Circumference-2 vertex reduction

/// Least-id leaf of the least-id nontrivial strong component: a vertex
/// with exactly one distinct neighbor inside its component. Returns
/// (component vertices, leaf, neighbor).
fn pick_leaf(d: &Digraph) -> Result<Option<(Vec<usize>, usize, usize)>> {
    let cond = scc(d);
    let mut nontrivial: Vec<&Vec<usize>> =
        cond.components.iter().filter(|c| c.len() >= 2).collect();
    nontrivial.sort_by_key(|c| c[0]);
    let Some(comp) = nontrivial.first() else {
        return Ok(None);
    };
    let comp_set: VertexSet = comp.iter().copied().collect();
    for &v in comp.iter() {
        let mut inside: VertexSet = VertexSet::new();
        for w in d.out_neighbors(v) {
            if comp_set.contains(&w) {
                inside.insert(w);
            }
        }
        for w in d.in_neighbors(v) {
            if comp_set.contains(&w) {
                inside.insert(w);
            }
        }
        if inside.len() == 1 {
            let u = *inside.iter().next().expect("one neighbor");
            return Ok(Some((comp.to_vec(), v, u)));
        }
    }
    Err(Error::Internal(
        "nontrivial strong component of a circumference-2 digraph has no leaf".into(),
    ))
}

fn assert_circ2(d: &Digraph, context: &str) -> Result<()> {
    match circumference_bounded(d, 2)? {
        Circumference::Exact(c) if c <= 2 => Ok(()),
        _ => Err(Error::Precondition(format!("{context}: circumference exceeds 2"))),
    }
}

/// Reduce a vertex-disjoint circumference-2 instance to an equivalent
/// acyclic one by deleting unusable terminal arcs and then splitting one
/// leaf of a nontrivial strong component at a time.
pub fn reduce_circ2_vertex(inst: &LinkageInstance) -> Result<(LinkageInstance, ReductionRecord)> {
    if inst.mode != LinkMode::Vertex {
        return Err(Error::Precondition("vertex reduction needs a vertex-disjoint instance".into()));
    }
    assert_circ2(&inst.digraph, "vertex reduction")?;
    let mut d = inst.digraph.clone();
    let mut record = ReductionRecord::default();

    // Arcs into a source or out of a target can never be used by a
    // vertex-disjoint solution with distinct terminals; removing them
    // pins every terminal outside all cycles.
    for &(s, t) in &inst.pairs {
        for a in d.in_arcs(s).to_vec() {
            record.preprocessed_arcs.push(a);
            d.remove_arc(a)?;
        }
        for a in d.out_arcs(t).to_vec() {
            record.preprocessed_arcs.push(a);
            d.remove_arc(a)?;
        }
    }

    let terminals: VertexSet = inst.pairs.iter().flat_map(|&(s, t)| [s, t]).collect();
    while let Some((comp, v, u)) = pick_leaf(&d)? {
        if let Some(&term) = comp.iter().find(|c| terminals.contains(c)) {
            return Err(Error::Internal(format!(
                "terminal {term} inside a nontrivial strong component after preprocessing"
            )));
        }
        record.events.push(split_vertex(&mut d, &comp, v, u)?);
        #[cfg(debug_assertions)]
        assert_circ2(&d, "after vertex split")?;
    }
    debug_assert!(
        record.events.len() <= inst.digraph.vertex_count().saturating_sub(2 * inst.k())
    );
    let reduced = LinkageInstance::new(d, inst.pairs.clone(), LinkMode::Vertex)?;
    Ok((reduced, record))
}

fn split_vertex(d: &mut Digraph, comp: &[usize], v: usize, u: usize) -> Result<SplitEvent> {
    let v_in = d.add_vertex();
    let v_out = d.add_vertex();
    if let Some(l) = d.label(v).map(str::to_string) {
        d.set_label(v_in, format!("{l}.in"))?;
        d.set_label(v_out, format!("{l}.out"))?;
    }
    let mut arc_map = Vec::new();
    for a in d.in_arcs(v).to_vec() {
        let w = d.tail(a);
        if w == u {
            continue;
        }
        let fresh = d.add_arc(w, v_in)?;
        arc_map.push((fresh, a));
    }
    for a in d.out_arcs(v).to_vec() {
        let h = d.head(a);
        if h == u {
            continue;
        }
        let fresh = d.add_arc(v_out, h)?;
        arc_map.push((fresh, a));
    }
    let old_vu = d.find_arc(v, u).ok_or_else(|| Error::Internal("leaf without out-arc to its neighbor".into()))?;
    let old_uv = d.find_arc(u, v).ok_or_else(|| Error::Internal("leaf without in-arc from its neighbor".into()))?;
    let into_arc = d.add_arc(v_in, u)?;
    arc_map.push((into_arc, old_vu));
    let from_arc = d.add_arc(u, v_out)?;
    arc_map.push((from_arc, old_uv));
    let bridge = d.add_arc(v_in, v_out)?;
    d.remove_vertex(v)?;
    Ok(SplitEvent {
        kind: SplitKind::Vertex,
        removed: v,
        neighbor: u,
        component: comp.to_vec(),
        v_in,
        v_out,
        arc_map,
        bridge_arcs: vec![bridge],
        into_neighbor: vec![into_arc],
        from_neighbor: vec![from_arc],
        boundary_degree: 0,
    })
}

/// Full vertex-disjoint pipeline for circumference-2 digraphs: reduce,
/// solve the acyclic instance with the pebble algorithm, lift the
/// witness paths back, verify.
pub fn solve_vertex_linkage_circ2(inst: &LinkageInstance) -> Result<Option<Vec<Path>>> {
    let (reduced, record) = reduce_circ2_vertex(inst)?;
    let Some(paths) = dag_vertex_linkage(&reduced)? else {
        return Ok(None);
    };
    let lifted = record.lift(&inst.digraph, &paths)?;
    verify_solution(inst, &lifted)?;
    Ok(Some(lifted))
}

// ---------------------------------------------------------------------------
// Circumference-2 weak (arc-disjoint) reduction

/// Split one leaf for the arc-disjoint reduction, preserving all
/// multiplicities and adding one `v_in -> v_out` arc per boundary arc of
/// the removed vertex.
fn split_weak(d: &mut Digraph, comp: &[usize], v: usize, u: usize) -> Result<SplitEvent> {
    let comp_set: VertexSet = comp.iter().copied().collect();
    let boundary_degree = d
        .in_arcs(v)
        .iter()
        .chain(d.out_arcs(v).iter())
        .filter(|&&a| {
            let (t, h) = d.ends(a);
            let other = if t == v { h } else { t };
            !comp_set.contains(&other)
        })
        .count();

    let v_in = d.add_vertex();
    let v_out = d.add_vertex();
    if let Some(l) = d.label(v).map(str::to_string) {
        d.set_label(v_in, format!("{l}.in"))?;
        d.set_label(v_out, format!("{l}.out"))?;
    }
    let mut arc_map = Vec::new();
    let mut into_neighbor = Vec::new();
    let mut from_neighbor = Vec::new();
    for a in d.in_arcs(v).to_vec() {
        let w = d.tail(a);
        if w == u {
            let fresh = d.add_arc(u, v_out)?;
            from_neighbor.push(fresh);
            arc_map.push((fresh, a));
        } else {
            let fresh = d.add_arc(w, v_in)?;
            arc_map.push((fresh, a));
        }
    }
    for a in d.out_arcs(v).to_vec() {
        let h = d.head(a);
        if h == u {
            let fresh = d.add_arc(v_in, u)?;
            into_neighbor.push(fresh);
            arc_map.push((fresh, a));
        } else {
            let fresh = d.add_arc(v_out, h)?;
            arc_map.push((fresh, a));
        }
    }
    let mut bridge_arcs = Vec::with_capacity(boundary_degree);
    for _ in 0..boundary_degree {
        bridge_arcs.push(d.add_arc(v_in, v_out)?);
    }
    d.remove_vertex(v)?;
    Ok(SplitEvent {
        kind: SplitKind::Weak,
        removed: v,
        neighbor: u,
        component: comp.to_vec(),
        v_in,
        v_out,
        arc_map,
        bridge_arcs,
        into_neighbor,
        from_neighbor,
        boundary_degree,
    })
}

/// Reduce an arc-disjoint circumference-2 instance to an equivalent
/// acyclic one, remapping terminals that sit on split vertices
/// (sources to `v_in`, targets to `v_out`).
pub fn reduce_circ2_weak(inst: &LinkageInstance) -> Result<(LinkageInstance, ReductionRecord)> {
    if inst.mode != LinkMode::Arc {
        return Err(Error::Precondition("weak reduction needs an arc-disjoint instance".into()));
    }
    assert_circ2(&inst.digraph, "weak reduction")?;
    let mut d = inst.digraph.clone();
    let mut pairs = inst.pairs.clone();
    let mut record = ReductionRecord::default();
    let split_bound = inst.digraph.vertex_count().saturating_sub(1);
    while let Some((comp, v, u)) = pick_leaf(&d)? {
        let event = split_weak(&mut d, &comp, v, u)?;
        for (s, t) in pairs.iter_mut() {
            if *s == v {
                *s = event.v_in;
            }
            if *t == v {
                *t = event.v_out;
            }
        }
        record.events.push(event);
        #[cfg(debug_assertions)]
        assert_circ2(&d, "after weak split")?;
        if record.events.len() > split_bound {
            return Err(Error::Internal("weak reduction exceeded its split bound".into()));
        }
    }
    let reduced = LinkageInstance::new(d, pairs, LinkMode::Arc)?;
    Ok((reduced, record))
}

// ---------------------------------------------------------------------------
// Line-digraph route for arc-disjoint instances

/// Outcome of translating an arc-disjoint instance into a vertex-disjoint
/// one on the line digraph of the pendant-extended graph.
#[derive(Debug, Clone)]
pub struct LineTranslation {
    /// The vertex-disjoint instance on the line digraph.
    pub instance: LinkageInstance,
    /// The pendant-extended digraph the line digraph was built from.
    pub extended: Digraph,
    /// Line-vertex -> arc id of `extended` (dense by line vertex id).
    pub line_vertex_arc: Vec<usize>,
    /// Pendant arc ids `(s' -> s, t -> t')` per pair, to strip on lifting.
    pub pendant_arcs: Vec<(usize, usize)>,
}

/// Translate an arc-disjoint instance into a vertex-disjoint instance on
/// the line digraph of the pendant-extended graph. Acyclic inputs yield
/// acyclic line digraphs (and more generally the line digraph's
/// circumference equals the length of the longest closed trail).
pub fn weak_to_vertex_acyclic(inst: &LinkageInstance) -> Result<LineTranslation> {
    if inst.mode != LinkMode::Arc {
        return Err(Error::Precondition("line-digraph translation needs an arc-disjoint instance".into()));
    }
    let ext = add_pendant_terminals(&inst.digraph, &inst.pairs)?;
    let (line, arc_to_line) = line_digraph(&ext.digraph);
    let mut line_vertex_arc = vec![usize::MAX; line.vertex_bound()];
    for (arc, lv) in arc_to_line.iter().enumerate() {
        if let Some(lv) = lv {
            line_vertex_arc[*lv] = arc;
        }
    }
    let pairs: Vec<(usize, usize)> = ext
        .pendant_arcs
        .iter()
        .map(|&(sa, ta)| {
            (
                arc_to_line[sa].expect("pendant arc is live"),
                arc_to_line[ta].expect("pendant arc is live"),
            )
        })
        .collect();
    let instance = LinkageInstance::new(line, pairs, LinkMode::Vertex)?;
    Ok(LineTranslation {
        instance,
        extended: ext.digraph,
        line_vertex_arc,
        pendant_arcs: ext.pendant_arcs,
    })
}

/// Solve an arc-disjoint instance whose digraph is acyclic, through the
/// line-digraph translation and the pebble solver.
pub fn solve_weak_linkage_acyclic(inst: &LinkageInstance) -> Result<Option<Vec<Path>>> {
    if !inst.digraph.is_acyclic() {
        return Err(Error::Precondition("acyclic weak solver got a cyclic digraph".into()));
    }
    let translation = weak_to_vertex_acyclic(inst)?;
    let Some(line_paths) = dag_vertex_linkage(&translation.instance)? else {
        return Ok(None);
    };
    // A vertex path in the line digraph is an arc trail in the extended
    // digraph; strip the pendant hops and rebuild. In an acyclic digraph
    // every trail is automatically a path.
    let mut out = Vec::with_capacity(line_paths.len());
    for (path, &(s, t)) in line_paths.iter().zip(&inst.pairs) {
        let arcs: Vec<usize> = path
            .vertices()
            .iter()
            .map(|&lv| translation.line_vertex_arc[lv])
            .collect();
        let inner = &arcs[1..arcs.len() - 1];
        if inner.is_empty() {
            if s != t {
                return Err(Error::Internal("empty trail for distinct terminals".into()));
            }
            out.push(Path::trivial(s));
        } else {
            out.push(Path::from_arcs(&inst.digraph, inner.to_vec())?);
        }
    }
    verify_solution(inst, &out)?;
    Ok(Some(out))
}

/// Full arc-disjoint pipeline for circumference-2 digraphs: leaf splits
/// to an acyclic instance, line-digraph translation, pebble solver, and
/// a double lift back.
pub fn solve_weak_linkage_circ2(inst: &LinkageInstance) -> Result<Option<Vec<Path>>> {
    let (reduced, record) = reduce_circ2_weak(inst)?;
    let Some(paths) = solve_weak_linkage_acyclic(&reduced)? else {
        return Ok(None);
    };
    let lifted = record.lift(&inst.digraph, &paths)?;
    verify_solution(inst, &lifted)?;
    Ok(Some(lifted))
}

// ---------------------------------------------------------------------------
// Hitting sets and the pipeline for nearly-circumference-2 digraphs

/// Least vertex set (by size, then lexicographic) of size at most
/// `x_max` whose removal leaves circumference at most 2; `None` when no
/// such set exists within the bound. `budget` caps the number of
/// candidate sets tested.
pub fn find_hitting_set_circ2(
    d: &Digraph,
    x_max: usize,
    budget: usize,
) -> Result<Option<VertexSet>> {
    let vertices: Vec<usize> = d.vertices().collect();
    let mut tested = 0usize;
    for size in 0..=x_max.min(vertices.len()) {
        let combos = combinations(&vertices, size);
        tested = tested.saturating_add(combos.len());
        if tested > budget {
            return Err(Error::Budget(format!(
                "hitting-set enumeration needs more than {budget} candidate sets"
            )));
        }
        let hit = crate::par::find_first_index(&combos, |combo| {
            let x: VertexSet = combo.iter().copied().collect();
            let keep: VertexSet = d.vertices().filter(|v| !x.contains(v)).collect();
            matches!(
                circumference_bounded(&d.induced(&keep), 2),
                Ok(Circumference::Exact(c)) if c <= 2
            )
        });
        if let Some(i) = hit {
            return Ok(Some(combos[i].iter().copied().collect()));
        }
    }
    Ok(None)
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            go(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    go(items, k, 0, &mut cur, &mut out);
    out
}

/// How one solution path crosses in and out of the hitting set: the
/// ordered crossing arcs it uses (alternating entry/exit, with parity
/// fixed by which terminals lie inside).
#[derive(Debug, Clone, PartialEq, Eq)]
struct PathPlan {
    crossings: Vec<usize>,
}

/// Inner budget for each brute-force solve of the subgraph induced on
/// the hitting set.
const INSIDE_BUDGET: usize = 200_000;

/// Number of crossing-arc assignments ("plans") the hitting-set pipeline
/// would enumerate for this instance and hitting set. The pipeline
/// refuses to run when this exceeds its budget, so callers can size
/// budgets exactly.
pub fn hitting_plan_count(inst: &LinkageInstance, x: &VertexSet) -> u64 {
    plan_space(inst, x, None)
}

/// Valid crossing-sequence lengths for a path from `s` to `t` relative
/// to the hitting set: crossings alternate exits and entries of `x`,
/// the first and last crossing direction is fixed by which endpoints lie
/// inside, and a vertex-simple path visits `x` at most `|x|` times.
fn crossing_lengths(in_s: bool, in_t: bool, max_visits: usize) -> Vec<usize> {
    match (in_s, in_t) {
        // outside -> outside: (entry exit)^r
        (false, false) => (0..=max_visits).map(|r| 2 * r).collect(),
        // inside -> outside: exit (entry exit)^(r-1), r visits
        (true, false) | (false, true) => (1..=max_visits).map(|r| 2 * r - 1).collect(),
        // inside -> inside: either never leaves, or exit ... entry
        (true, true) => (1..=max_visits).map(|r| 2 * (r - 1)).collect(),
    }
}

/// Walk the plan space; when `collect` is given, also materialize every
/// plan (used only after the count has been checked against the budget).
fn plan_space(inst: &LinkageInstance, x: &VertexSet, collect: Option<&mut Vec<Vec<PathPlan>>>) -> u64 {
    struct Enumerator<'a> {
        pairs: &'a [(usize, usize)],
        x: &'a VertexSet,
        entry_arcs: Vec<usize>,
        exit_arcs: Vec<usize>,
        current: Vec<Vec<usize>>,
        used: std::collections::BTreeSet<usize>,
        count: u64,
        collect: Option<&'a mut Vec<Vec<PathPlan>>>,
    }

    impl Enumerator<'_> {
        fn per_path(&mut self, i: usize) {
            if i == self.pairs.len() {
                self.count += 1;
                if let Some(sink) = self.collect.as_deref_mut() {
                    sink.push(
                        self.current
                            .iter()
                            .map(|c| PathPlan { crossings: c.clone() })
                            .collect(),
                    );
                }
                return;
            }
            let (s, t) = self.pairs[i];
            let in_s = self.x.contains(&s);
            let in_t = self.x.contains(&t);
            for m in crossing_lengths(in_s, in_t, self.x.len()) {
                self.fill(i, m, 0, in_s);
            }
        }

        fn fill(&mut self, i: usize, m: usize, pos: usize, in_s: bool) {
            if pos == m {
                self.per_path(i + 1);
                return;
            }
            let wants_exit = if in_s { pos % 2 == 0 } else { pos % 2 == 1 };
            let pool = if wants_exit { self.exit_arcs.clone() } else { self.entry_arcs.clone() };
            for a in pool {
                if self.used.contains(&a) {
                    continue;
                }
                self.used.insert(a);
                self.current[i].push(a);
                self.fill(i, m, pos + 1, in_s);
                self.current[i].pop();
                self.used.remove(&a);
            }
        }
    }

    let d = &inst.digraph;
    let mut entry_arcs = Vec::new();
    let mut exit_arcs = Vec::new();
    for a in d.arcs() {
        let (t, h) = d.ends(a);
        match (x.contains(&t), x.contains(&h)) {
            (false, true) => entry_arcs.push(a),
            (true, false) => exit_arcs.push(a),
            _ => {}
        }
    }
    let mut e = Enumerator {
        pairs: &inst.pairs,
        x,
        entry_arcs,
        exit_arcs,
        current: vec![Vec::new(); inst.pairs.len()],
        used: Default::default(),
        count: 0,
        collect,
    };
    e.per_path(0);
    e.count
}

/// Candidate-set cap for the hitting-set search inside the pipeline;
/// the caller-supplied budget governs the plan enumeration, which is
/// the part that actually explodes.
const HITTING_SET_SEARCH_BUDGET: usize = 1_000_000;

/// Arc-disjoint linkage through a hitting set: find the least `X` with
/// `circumference(D - X) <= 2`, enumerate every way the solution paths
/// could cross the boundary of `X`, solve the inside by brute force and
/// the outside by the circumference-2 pipeline, and stitch the first
/// consistent combination. `budget` caps the number of plans.
pub fn solve_weak_linkage_via_hitting_set(
    inst: &LinkageInstance,
    x_max: usize,
    budget: usize,
) -> Result<Option<Vec<Path>>> {
    if inst.mode != LinkMode::Arc {
        return Err(Error::Precondition("hitting-set pipeline needs an arc-disjoint instance".into()));
    }
    let x = find_hitting_set_circ2(&inst.digraph, x_max, HITTING_SET_SEARCH_BUDGET)?
        .ok_or_else(|| Error::Precondition(format!(
            "no hitting set of size at most {x_max} leaves circumference 2"
        )))?;
    if x.is_empty() {
        return solve_weak_linkage_circ2(inst);
    }

    let total = hitting_plan_count(inst, &x);
    if total > budget as u64 {
        return Err(Error::Budget(format!(
            "hitting-set pipeline needs {total} plans, budget is {budget} ({} plans over)",
            total - budget as u64
        )));
    }
    let mut plans: Vec<Vec<PathPlan>> = Vec::new();
    plan_space(inst, &x, Some(&mut plans));

    let d = &inst.digraph;
    let keep: VertexSet = d.vertices().filter(|v| !x.contains(v)).collect();
    let outside_graph = d.induced(&keep);
    let inside_graph = d.induced(&x);

    let solved = crate::par::map_collect(&plans, |plan| try_plan(inst, &x, plan, &inside_graph, &outside_graph));
    for result in solved {
        match result {
            Ok(Some(paths)) => {
                verify_solution(inst, &paths)?;
                return Ok(Some(paths));
            }
            Ok(None) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

/// Attempt one crossing plan; `None` when any piece is infeasible.
fn try_plan(
    inst: &LinkageInstance,
    x: &VertexSet,
    plan: &[PathPlan],
    inside_graph: &Digraph,
    outside_graph: &Digraph,
) -> Result<Option<Vec<Path>>> {
    let d = &inst.digraph;
    let mut inside_pairs: Vec<(usize, usize)> = Vec::new();
    let mut outside_pairs: Vec<(usize, usize)> = Vec::new();
    // For reassembly: per path, the pieces in order.
    #[derive(Clone, Copy)]
    enum Piece {
        Inside(usize),
        Outside(usize),
        Crossing(usize),
    }
    let mut skeleton: Vec<Vec<Piece>> = Vec::with_capacity(plan.len());

    for (i, path_plan) in plan.iter().enumerate() {
        let (s, t) = inst.pairs[i];
        let mut pieces = Vec::new();
        let mut inside = x.contains(&s);
        let mut cur = s;
        for &c in &path_plan.crossings {
            let (tail, head) = d.ends(c);
            if inside {
                // quick feasibility: the inside segment endpoints must
                // both be in x, the exit arc leaves from inside.
                inside_pairs.push((cur, tail));
                pieces.push(Piece::Inside(inside_pairs.len() - 1));
            } else {
                outside_pairs.push((cur, tail));
                pieces.push(Piece::Outside(outside_pairs.len() - 1));
            }
            pieces.push(Piece::Crossing(c));
            cur = head;
            inside = x.contains(&head);
        }
        if inside != x.contains(&t) {
            return Ok(None);
        }
        if inside {
            inside_pairs.push((cur, t));
            pieces.push(Piece::Inside(inside_pairs.len() - 1));
        } else {
            outside_pairs.push((cur, t));
            pieces.push(Piece::Outside(outside_pairs.len() - 1));
        }
        skeleton.push(pieces);
    }

    // Quick reachability screens keep hopeless plans cheap.
    for &(a, b) in &inside_pairs {
        if !x.contains(&a) || !x.contains(&b) {
            return Ok(None);
        }
    }
    for &(a, b) in &outside_pairs {
        if x.contains(&a) || x.contains(&b) {
            return Ok(None);
        }
    }

    let inside_inst = LinkageInstance::new(inside_graph.clone(), inside_pairs, LinkMode::Arc)?;
    let Some(inside_paths) = brute_force_linkage(&inside_inst, INSIDE_BUDGET)? else {
        return Ok(None);
    };
    let outside_inst = LinkageInstance::new(outside_graph.clone(), outside_pairs, LinkMode::Arc)?;
    let Some(outside_paths) = solve_weak_linkage_circ2(&outside_inst)? else {
        return Ok(None);
    };

    // Stitch and simplify.
    let mut out = Vec::with_capacity(plan.len());
    for (i, pieces) in skeleton.iter().enumerate() {
        let mut arcs: Vec<usize> = Vec::new();
        for piece in pieces {
            match *piece {
                Piece::Inside(j) => arcs.extend_from_slice(inside_paths[j].arcs()),
                Piece::Outside(j) => arcs.extend_from_slice(outside_paths[j].arcs()),
                Piece::Crossing(a) => arcs.push(a),
            }
        }
        let (s, _) = inst.pairs[i];
        out.push(simplify_walk(d, s, &arcs)?);
    }
    Ok(Some(out))
}

/// Turn an arc walk into a vertex-simple path with the same endpoints by
/// excising the detour between repeated vertex visits. Dropping arcs
/// keeps arc-disjointness intact.
fn simplify_walk(d: &Digraph, start: usize, arcs: &[usize]) -> Result<Path> {
    let mut stack_v: Vec<usize> = vec![start];
    let mut stack_a: Vec<usize> = Vec::new();
    for &a in arcs {
        let h = d.head(a);
        if let Some(pos) = stack_v.iter().position(|&v| v == h) {
            // Re-entered an earlier vertex: drop the whole detour.
            stack_v.truncate(pos + 1);
            stack_a.truncate(pos);
        } else {
            stack_v.push(h);
            stack_a.push(a);
        }
    }
    if stack_a.is_empty() {
        return Ok(Path::trivial(start));
    }
    Path::from_arcs(d, stack_a)
}

// ---------------------------------------------------------------------------
// Solution JSON

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionDoc {
    pub answer: String,
    pub paths: Vec<Vec<usize>>,
    pub reduction_trace: Vec<SplitEvent>,
}

impl SolutionDoc {
    pub fn yes(paths: &[Path], record: Option<&ReductionRecord>) -> Self {
        SolutionDoc {
            answer: "yes".into(),
            paths: paths.iter().map(|p| p.vertices().to_vec()).collect(),
            reduction_trace: record.map(|r| r.events.clone()).unwrap_or_default(),
        }
    }

    pub fn no(record: Option<&ReductionRecord>) -> Self {
        SolutionDoc {
            answer: "no".into(),
            paths: Vec::new(),
            reduction_trace: record.map(|r| r.events.clone()).unwrap_or_default(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("schema serializes");
        s.push('\n');
        s
    }
}
