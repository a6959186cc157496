//! Directed multigraph with stable arc identities.
//!
//! Vertices are dense integers at construction time. Surgery (the
//! reduction steps in [`crate::linkage`]) may delete vertices and add new
//! ones; deleted slots are never reused and surviving arcs are never
//! renumbered, so identities recorded in traces and reduction records
//! stay meaningful across transformations.
//!
//! Values are immutable once a caller stops mutating them; nothing here
//! uses interior mutability, so shared references can cross threads
//! freely.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::{Error, Result};

/// A set of vertex ids. Ordered so that every iteration is deterministic.
pub type VertexSet = BTreeSet<usize>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ArcEnds {
    tail: usize,
    head: usize,
}

/// Directed multigraph. Parallel arcs are first-class; self-loops are
/// rejected at construction.
#[derive(Debug, Clone, Default)]
pub struct Digraph {
    alive: Vec<bool>,
    arcs: Vec<Option<ArcEnds>>,
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
    labels: Vec<Option<String>>,
}

impl Digraph {
    /// Empty digraph with `n` vertices `0..n` and no arcs.
    pub fn new(n: usize) -> Self {
        Digraph {
            alive: vec![true; n],
            arcs: Vec::new(),
            out: vec![Vec::new(); n],
            inn: vec![Vec::new(); n],
            labels: vec![None; n],
        }
    }

    /// Build from an arc list; arc ids follow list order.
    pub fn from_arcs(n: usize, arcs: &[(usize, usize)]) -> Result<Self> {
        let mut d = Digraph::new(n);
        for &(u, v) in arcs {
            d.add_arc(u, v)?;
        }
        Ok(d)
    }

    /// Number of live vertices.
    pub fn vertex_count(&self) -> usize {
        self.alive.iter().filter(|a| **a).count()
    }

    /// Number of live arcs.
    pub fn arc_count(&self) -> usize {
        self.arcs.iter().filter(|a| a.is_some()).count()
    }

    /// Upper bound (exclusive) on vertex ids ever handed out.
    pub fn vertex_bound(&self) -> usize {
        self.alive.len()
    }

    /// Upper bound (exclusive) on arc ids ever handed out.
    pub fn arc_bound(&self) -> usize {
        self.arcs.len()
    }

    pub fn has_vertex(&self, v: usize) -> bool {
        v < self.alive.len() && self.alive[v]
    }

    pub fn has_arc(&self, a: usize) -> bool {
        a < self.arcs.len() && self.arcs[a].is_some()
    }

    /// Live vertex ids in ascending order.
    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.alive
            .iter()
            .enumerate()
            .filter(|(_, a)| **a)
            .map(|(v, _)| v)
    }

    /// Live vertices as a set.
    pub fn vertex_set(&self) -> VertexSet {
        self.vertices().collect()
    }

    /// Live arc ids in ascending order.
    pub fn arcs(&self) -> impl Iterator<Item = usize> + '_ {
        self.arcs
            .iter()
            .enumerate()
            .filter(|(_, a)| a.is_some())
            .map(|(id, _)| id)
    }

    pub fn tail(&self, arc: usize) -> usize {
        self.arcs[arc].expect("live arc").tail
    }

    pub fn head(&self, arc: usize) -> usize {
        self.arcs[arc].expect("live arc").head
    }

    pub fn ends(&self, arc: usize) -> (usize, usize) {
        let e = self.arcs[arc].expect("live arc");
        (e.tail, e.head)
    }

    /// Out-arc ids of `v`, ascending by arc id.
    pub fn out_arcs(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    /// In-arc ids of `v`, ascending by arc id.
    pub fn in_arcs(&self, v: usize) -> &[usize] {
        &self.inn[v]
    }

    /// Distinct out-neighbors of `v`, ascending.
    pub fn out_neighbors(&self, v: usize) -> Vec<usize> {
        let mut ns: Vec<usize> = self.out[v].iter().map(|&a| self.head(a)).collect();
        ns.sort_unstable();
        ns.dedup();
        ns
    }

    /// Distinct in-neighbors of `v`, ascending.
    pub fn in_neighbors(&self, v: usize) -> Vec<usize> {
        let mut ns: Vec<usize> = self.inn[v].iter().map(|&a| self.tail(a)).collect();
        ns.sort_unstable();
        ns.dedup();
        ns
    }

    /// Number of parallel arcs from `u` to `v` (the multiplicity).
    pub fn multiplicity(&self, u: usize, v: usize) -> usize {
        if !self.has_vertex(u) {
            return 0;
        }
        self.out[u].iter().filter(|&&a| self.head(a) == v).count()
    }

    /// Least-id arc from `u` to `v`, if any.
    pub fn find_arc(&self, u: usize, v: usize) -> Option<usize> {
        if !self.has_vertex(u) {
            return None;
        }
        self.out[u].iter().copied().find(|&a| self.head(a) == v)
    }

    /// Add a fresh vertex; returns its id.
    pub fn add_vertex(&mut self) -> usize {
        let v = self.alive.len();
        self.alive.push(true);
        self.out.push(Vec::new());
        self.inn.push(Vec::new());
        self.labels.push(None);
        v
    }

    /// Add an arc `u -> v`; returns its id. Ids grow monotonically, so
    /// adjacency lists stay sorted by construction.
    pub fn add_arc(&mut self, u: usize, v: usize) -> Result<usize> {
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        if !self.has_vertex(u) {
            return Err(Error::MissingVertex(u));
        }
        if !self.has_vertex(v) {
            return Err(Error::MissingVertex(v));
        }
        let id = self.arcs.len();
        self.arcs.push(Some(ArcEnds { tail: u, head: v }));
        self.out[u].push(id);
        self.inn[v].push(id);
        Ok(id)
    }

    /// Remove one arc by id. Survivors keep their ids.
    pub fn remove_arc(&mut self, arc: usize) -> Result<()> {
        if !self.has_arc(arc) {
            return Err(Error::MissingArc(arc));
        }
        let ArcEnds { tail, head } = self.arcs[arc].take().expect("checked");
        self.out[tail].retain(|&a| a != arc);
        self.inn[head].retain(|&a| a != arc);
        Ok(())
    }

    /// Remove a vertex together with all incident arcs. The id is retired,
    /// never reused.
    pub fn remove_vertex(&mut self, v: usize) -> Result<()> {
        if !self.has_vertex(v) {
            return Err(Error::MissingVertex(v));
        }
        let incident: Vec<usize> = self.out[v].iter().chain(self.inn[v].iter()).copied().collect();
        for a in incident {
            if self.has_arc(a) {
                self.remove_arc(a)?;
            }
        }
        self.alive[v] = false;
        Ok(())
    }

    pub fn label(&self, v: usize) -> Option<&str> {
        self.labels.get(v).and_then(|l| l.as_deref())
    }

    pub fn set_label(&mut self, v: usize, label: impl Into<String>) -> Result<()> {
        if !self.has_vertex(v) {
            return Err(Error::MissingVertex(v));
        }
        self.labels[v] = Some(label.into());
        Ok(())
    }

    /// Human-readable name: the label when present, otherwise the id.
    pub fn display_vertex(&self, v: usize) -> String {
        match self.label(v) {
            Some(l) => l.to_string(),
            None => v.to_string(),
        }
    }

    /// Induced subdigraph on `keep`. Vertex and arc ids are preserved;
    /// everything outside `keep` is removed.
    pub fn induced(&self, keep: &VertexSet) -> Digraph {
        let mut d = self.clone();
        let drop: Vec<usize> = d.vertices().filter(|v| !keep.contains(v)).collect();
        for v in drop {
            d.remove_vertex(v).expect("live vertex");
        }
        d
    }

    /// True if every live vertex is reachable from `start` and vice versa.
    pub fn is_strong(&self) -> bool {
        let n = self.vertex_count();
        if n <= 1 {
            return true;
        }
        scc(self).components.len() == 1
    }

    /// True when the digraph has no directed cycle.
    pub fn is_acyclic(&self) -> bool {
        scc(self).components.iter().all(|c| c.len() == 1)
    }
}

// ---------------------------------------------------------------------------
// Paths

/// A directed path, stored as the arc ids it traverses plus the derived
/// vertex sequence (one more entry than arcs; a single vertex is a valid
/// zero-arc path).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    vertices: Vec<usize>,
    arcs: Vec<usize>,
}

impl Path {
    /// Zero-arc path sitting on one vertex.
    pub fn trivial(v: usize) -> Self {
        Path { vertices: vec![v], arcs: Vec::new() }
    }

    /// Build from an arc id sequence, checking that consecutive arcs chain
    /// head-to-tail and that the walk is vertex-simple.
    pub fn from_arcs(d: &Digraph, arcs: Vec<usize>) -> Result<Self> {
        if arcs.is_empty() {
            return Err(Error::Precondition("empty arc sequence for a path".into()));
        }
        let mut vertices = vec![d.tail(arcs[0])];
        for win in arcs.windows(2) {
            if d.head(win[0]) != d.tail(win[1]) {
                return Err(Error::Precondition(
                    "arc sequence does not chain head-to-tail".into(),
                ));
            }
        }
        for &a in &arcs {
            if !d.has_arc(a) {
                return Err(Error::MissingArc(a));
            }
            vertices.push(d.head(a));
        }
        let distinct: BTreeSet<usize> = vertices.iter().copied().collect();
        if distinct.len() != vertices.len() {
            return Err(Error::Precondition("path revisits a vertex".into()));
        }
        Ok(Path { vertices, arcs })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn arcs(&self) -> &[usize] {
        &self.arcs
    }

    pub fn first(&self) -> usize {
        self.vertices[0]
    }

    pub fn last(&self) -> usize {
        *self.vertices.last().expect("nonempty")
    }

    pub fn len_arcs(&self) -> usize {
        self.arcs.len()
    }

    /// Subpath from `u` to `v`; defined only when `u` appears no later
    /// than `v` along the path.
    pub fn subpath(&self, u: usize, v: usize) -> Option<Path> {
        let iu = self.vertices.iter().position(|&x| x == u)?;
        let iv = self.vertices.iter().position(|&x| x == v)?;
        if iu > iv {
            return None;
        }
        Some(Path {
            vertices: self.vertices[iu..=iv].to_vec(),
            arcs: self.arcs[iu..iv].to_vec(),
        })
    }
}

// ---------------------------------------------------------------------------
// Strongly connected components

/// Strongly connected components in a topological order of the
/// condensation, plus the component-level arc relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condensation {
    /// Component vertex sets; the list order is acyclic (every D-arc
    /// between distinct components goes from an earlier to a later one).
    pub components: Vec<Vec<usize>>,
    /// Vertex -> component index; indexed by vertex id, `None` for dead
    /// slots.
    pub component_of: Vec<Option<usize>>,
    /// Component-level arcs `(i, j)` with `i != j`.
    pub arcs: BTreeSet<(usize, usize)>,
}

impl Condensation {
    /// Component indices with no incoming component arc.
    pub fn source_components(&self) -> Vec<usize> {
        let mut has_in = vec![false; self.components.len()];
        for &(_, j) in &self.arcs {
            has_in[j] = true;
        }
        (0..self.components.len()).filter(|&i| !has_in[i]).collect()
    }
}

/// Strongly connected components of the whole digraph.
///
/// Component order is deterministic: Tarjan (ascending roots, ascending
/// adjacency) produces reverse topological order, then components are
/// re-sorted by a Kahn pass that always takes the ready component with
/// the least minimum vertex id.
pub fn scc(d: &Digraph) -> Condensation {
    scc_of(d, None)
}

/// Components of the subdigraph induced on `within` (all live vertices
/// when `None`), in the same canonical order as [`scc`].
pub fn scc_of(d: &Digraph, within: Option<&VertexSet>) -> Condensation {
    let allowed = |v: usize| -> bool {
        d.has_vertex(v) && within.map_or(true, |w| w.contains(&v))
    };
    let bound = d.vertex_bound();

    // Iterative Tarjan.
    let mut index = vec![usize::MAX; bound];
    let mut low = vec![0usize; bound];
    let mut on_stack = vec![false; bound];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut comps: Vec<Vec<usize>> = Vec::new();

    // Explicit DFS stack: (vertex, next-out-position).
    let mut work: Vec<(usize, usize)> = Vec::new();
    for start in 0..bound {
        if !allowed(start) || index[start] != usize::MAX {
            continue;
        }
        work.push((start, 0));
        index[start] = next_index;
        low[start] = next_index;
        next_index += 1;
        stack.push(start);
        on_stack[start] = true;

        while let Some(&mut (v, ref mut pos)) = work.last_mut() {
            let mut advanced = false;
            while *pos < d.out[v].len() {
                let arc = d.out[v][*pos];
                *pos += 1;
                let w = d.head(arc);
                if !allowed(w) {
                    continue;
                }
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                    advanced = true;
                    break;
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            }
            if advanced {
                continue;
            }
            work.pop();
            if let Some(&(parent, _)) = work.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                comps.push(comp);
            }
        }
    }

    // Component arcs.
    let mut comp_of_tmp = vec![usize::MAX; bound];
    for (ci, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of_tmp[v] = ci;
        }
    }
    let mut comp_arcs: BTreeSet<(usize, usize)> = BTreeSet::new();
    for a in d.arcs() {
        let (u, v) = d.ends(a);
        if !allowed(u) || !allowed(v) {
            continue;
        }
        let (cu, cv) = (comp_of_tmp[u], comp_of_tmp[v]);
        if cu != cv {
            comp_arcs.insert((cu, cv));
        }
    }

    // Canonical topological order: Kahn, always picking the ready
    // component whose minimum vertex id is least.
    let m = comps.len();
    let mut indeg = vec![0usize; m];
    for &(_, j) in &comp_arcs {
        indeg[j] += 1;
    }
    let mut ready: BTreeSet<(usize, usize)> = (0..m)
        .filter(|&i| indeg[i] == 0)
        .map(|i| (comps[i][0], i))
        .collect();
    let mut order: Vec<usize> = Vec::with_capacity(m);
    while let Some(&(key, i)) = ready.iter().next() {
        ready.remove(&(key, i));
        order.push(i);
        for &(a, b) in comp_arcs.range((i, 0)..(i + 1, 0)) {
            debug_assert_eq!(a, i);
            indeg[b] -= 1;
            if indeg[b] == 0 {
                ready.insert((comps[b][0], b));
            }
        }
    }
    debug_assert_eq!(order.len(), m);

    let mut new_pos = vec![0usize; m];
    for (pos, &old) in order.iter().enumerate() {
        new_pos[old] = pos;
    }
    let components: Vec<Vec<usize>> = order.iter().map(|&old| comps[old].clone()).collect();
    let mut component_of = vec![None; bound];
    for (ci, comp) in components.iter().enumerate() {
        for &v in comp {
            component_of[v] = Some(ci);
        }
    }
    let arcs = comp_arcs
        .into_iter()
        .map(|(i, j)| (new_pos[i], new_pos[j]))
        .collect();
    Condensation { components, component_of, arcs }
}

/// Vertices reachable from `sources` along directed paths that avoid
/// `forbidden`; the sources themselves are included.
///
/// Enlarging `forbidden` never enlarges the result.
pub fn reach(d: &Digraph, sources: &VertexSet, forbidden: &VertexSet) -> Result<VertexSet> {
    if let Some(&v) = sources.intersection(forbidden).next() {
        return Err(Error::Precondition(format!(
            "vertex {v} is both a source and forbidden"
        )));
    }
    let mut seen: VertexSet = VertexSet::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &s in sources {
        if !d.has_vertex(s) {
            return Err(Error::MissingVertex(s));
        }
        if seen.insert(s) {
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        for w in d.out_neighbors(v) {
            if forbidden.contains(&w) || !seen.insert(w) {
                continue;
            }
            queue.push_back(w);
        }
    }
    Ok(seen)
}

// ---------------------------------------------------------------------------
// Transformations

/// Line digraph: one vertex per arc of `d`, and an arc `a -> b` whenever
/// the head of `a` is the tail of `b`.
///
/// Returns the new digraph plus the arc-id -> line-vertex mapping (dense
/// over `d.arc_bound()`, `None` for dead arc slots).
pub fn line_digraph(d: &Digraph) -> (Digraph, Vec<Option<usize>>) {
    let arc_ids: Vec<usize> = d.arcs().collect();
    let mut to_line = vec![None; d.arc_bound()];
    for (i, &a) in arc_ids.iter().enumerate() {
        to_line[a] = Some(i);
    }
    let mut l = Digraph::new(arc_ids.len());
    for (i, &a) in arc_ids.iter().enumerate() {
        let join = d.head(a);
        for &b in d.out_arcs(join) {
            let j = to_line[b].expect("live arc");
            l.add_arc(i, j).expect("line arc endpoints are fresh");
        }
        l.set_label(i, format!("{}->{}", d.display_vertex(d.tail(a)), d.display_vertex(join)))
            .expect("fresh vertex");
    }
    (l, to_line)
}

/// Digraph obtained from a simple undirected graph by replacing each edge
/// `{u, v}` with the two arcs `u -> v` and `v -> u`.
pub fn bidirect(n: usize, edges: &[(usize, usize)]) -> Result<Digraph> {
    let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut d = Digraph::new(n);
    for &(u, v) in edges {
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        let key = (u.min(v), u.max(v));
        if !seen.insert(key) {
            return Err(Error::Precondition(format!(
                "duplicate edge {{{u}, {v}}} in undirected input"
            )));
        }
        d.add_arc(u, v)?;
        d.add_arc(v, u)?;
    }
    Ok(d)
}

/// Result of attaching pendant terminals: the extended digraph, the
/// remapped terminal pairs, and the pendant arc ids `(s'_i -> s_i,
/// t_i -> t'_i)` per pair.
#[derive(Debug, Clone)]
pub struct PendantTerminals {
    pub digraph: Digraph,
    pub pairs: Vec<(usize, usize)>,
    pub pendant_arcs: Vec<(usize, usize)>,
}

/// Attach a fresh in-pendant to every source terminal and a fresh
/// out-pendant to every target terminal. Repeated terminals get one
/// pendant each, so the new terminal list is always `2k` distinct
/// vertices; vertex count grows by exactly `2k`, arc count by `2k`.
pub fn add_pendant_terminals(d: &Digraph, pairs: &[(usize, usize)]) -> Result<PendantTerminals> {
    let mut out = d.clone();
    let mut new_pairs = Vec::with_capacity(pairs.len());
    let mut pendant_arcs = Vec::with_capacity(pairs.len());
    for &(s, t) in pairs {
        if !out.has_vertex(s) {
            return Err(Error::MissingVertex(s));
        }
        if !out.has_vertex(t) {
            return Err(Error::MissingVertex(t));
        }
        let s2 = out.add_vertex();
        out.set_label(s2, format!("src[{}]", d.display_vertex(s)))?;
        let t2 = out.add_vertex();
        out.set_label(t2, format!("snk[{}]", d.display_vertex(t)))?;
        let sa = out.add_arc(s2, s)?;
        let ta = out.add_arc(t, t2)?;
        new_pairs.push((s2, t2));
        pendant_arcs.push((sa, ta));
    }
    Ok(PendantTerminals { digraph: out, pairs: new_pairs, pendant_arcs })
}

// ---------------------------------------------------------------------------
// Edge-list text format

/// Parse the edge-list format.
///
/// The first non-comment line is `n m`, followed by `m` arc lines
/// `u v [mult]` (`mult` defaults to 1 and expands into parallel arcs).
/// `#` starts a comment. An optional `@labels` block of lines
/// `<vertex> "<label>"` may appear anywhere after the header; arc lines
/// may then name vertices by quoted label instead of id.
pub fn parse_edge_list(text: &str) -> Result<Digraph> {
    enum Section {
        Arcs,
        Labels,
    }
    let mut header: Option<(usize, usize)> = None;
    let mut section = Section::Arcs;
    // Raw arc tokens, resolved once all labels are known.
    let mut raw_arcs: Vec<(usize, String, String, usize)> = Vec::new();
    let mut labels: BTreeMap<String, usize> = BTreeMap::new();
    let mut label_of: BTreeMap<usize, String> = BTreeMap::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| Error::Parse { line: lineno + 1, msg: msg.to_string() };
        if header.is_none() {
            let mut it = line.split_whitespace();
            let n = it
                .next()
                .and_then(|t| t.parse::<usize>().ok())
                .ok_or_else(|| err("expected header `n m`"))?;
            let m = it
                .next()
                .and_then(|t| t.parse::<usize>().ok())
                .ok_or_else(|| err("expected header `n m`"))?;
            if it.next().is_some() {
                return Err(err("trailing tokens after header"));
            }
            header = Some((n, m));
            continue;
        }
        if line == "@labels" {
            section = Section::Labels;
            continue;
        }
        if line.starts_with('@') {
            return Err(err("unknown directive"));
        }
        match section {
            Section::Labels => {
                let (id_part, rest) = line
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| err("expected `<vertex> \"<label>\"`"))?;
                let v: usize = id_part.parse().map_err(|_| err("bad vertex id in label"))?;
                let rest = rest.trim();
                if rest.len() < 2 || !rest.starts_with('"') || !rest.ends_with('"') {
                    return Err(err("label must be quoted"));
                }
                let name = rest[1..rest.len() - 1].to_string();
                if labels.insert(name.clone(), v).is_some() {
                    return Err(err("duplicate label"));
                }
                label_of.insert(v, name);
            }
            Section::Arcs => {
                let tokens = tokenize_arc_line(line).ok_or_else(|| err("malformed arc line"))?;
                let (u, v, mult) = tokens;
                raw_arcs.push((lineno + 1, u, v, mult));
            }
        }
    }

    let (n, m) = header.ok_or(Error::Parse { line: 0, msg: "empty input".into() })?;
    if raw_arcs.len() != m {
        return Err(Error::Parse {
            line: 0,
            msg: format!("header promised {m} arc lines, found {}", raw_arcs.len()),
        });
    }
    let mut d = Digraph::new(n);
    for (v, name) in &label_of {
        if *v >= n {
            return Err(Error::Parse { line: 0, msg: format!("label for vertex {v} out of range") });
        }
        d.set_label(*v, name.clone())?;
    }
    let resolve = |tok: &str, line: usize| -> Result<usize> {
        if let Some(name) = tok.strip_prefix('"').and_then(|t| t.strip_suffix('"')) {
            return labels
                .get(name)
                .copied()
                .ok_or(Error::Parse { line, msg: format!("unknown label \"{name}\"") });
        }
        let v: usize = tok
            .parse()
            .map_err(|_| Error::Parse { line, msg: format!("bad vertex token `{tok}`") })?;
        if v >= n {
            return Err(Error::Parse { line, msg: format!("vertex {v} out of range 0..{n}") });
        }
        Ok(v)
    };
    for (line, ut, vt, mult) in raw_arcs {
        if mult == 0 {
            return Err(Error::Parse { line, msg: "multiplicity must be at least 1".into() });
        }
        let u = resolve(&ut, line)?;
        let v = resolve(&vt, line)?;
        for _ in 0..mult {
            d.add_arc(u, v).map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        }
    }
    Ok(d)
}

fn tokenize_arc_line(line: &str) -> Option<(String, String, usize)> {
    // Tokens are whitespace-separated; quoted labels may not contain
    // whitespace, which keeps the format line-oriented.
    let toks: Vec<&str> = line.split_whitespace().collect();
    match toks.len() {
        2 => Some((toks[0].to_string(), toks[1].to_string(), 1)),
        3 => {
            let mult = toks[2].parse::<usize>().ok()?;
            Some((toks[0].to_string(), toks[1].to_string(), mult))
        }
        _ => None,
    }
}

/// Canonical edge-list serialization: header, arcs ascending by id (one
/// line each, no multiplicity shorthand), then the `@labels` block when
/// labels exist. Re-parsing yields an isomorphic digraph as long as no
/// vertex was ever deleted.
pub fn to_edge_list(d: &Digraph) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {}", d.vertex_bound(), d.arc_count());
    for a in d.arcs() {
        let (u, v) = d.ends(a);
        let _ = writeln!(s, "{u} {v}");
    }
    let labelled: Vec<usize> = d.vertices().filter(|&v| d.label(v).is_some()).collect();
    if !labelled.is_empty() {
        let _ = writeln!(s, "@labels");
        for v in labelled {
            let _ = writeln!(s, "{} \"{}\"", v, d.label(v).expect("checked"));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(vs: &[usize]) -> VertexSet {
        vs.iter().copied().collect()
    }

    #[test]
    fn rejects_self_loops() {
        let mut d = Digraph::new(3);
        assert!(matches!(d.add_arc(1, 1), Err(Error::SelfLoop(1))));
    }

    #[test]
    fn rejects_out_of_range_endpoints() {
        let mut d = Digraph::new(2);
        assert!(matches!(d.add_arc(0, 5), Err(Error::MissingVertex(5))));
    }

    #[test]
    fn arc_ids_stable_under_deletion() {
        let mut d = Digraph::from_arcs(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        d.remove_arc(1).unwrap();
        assert_eq!(d.ends(2), (2, 3));
        assert_eq!(d.ends(3), (3, 0));
        let fresh = d.add_arc(0, 2).unwrap();
        assert_eq!(fresh, 4);
        d.remove_vertex(3).unwrap();
        assert!(d.has_arc(0));
        assert!(!d.has_arc(2));
        assert_eq!(d.vertex_count(), 3);
    }

    #[test]
    fn scc_on_acyclic_path_is_singletons_in_order() {
        let d = Digraph::from_arcs(3, &[(0, 1), (1, 2)]).unwrap();
        let c = scc(&d);
        assert_eq!(c.components, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(c.arcs, [(0, 1), (1, 2)].into_iter().collect());
    }

    #[test]
    fn scc_groups_cycles() {
        // 0 <-> 1 -> 2 <-> 3
        let d = Digraph::from_arcs(4, &[(0, 1), (1, 0), (1, 2), (2, 3), (3, 2)]).unwrap();
        let c = scc(&d);
        assert_eq!(c.components, vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(c.component_of[3], Some(1));
    }

    #[test]
    fn reach_empty_sources_is_empty() {
        let d = Digraph::from_arcs(3, &[(0, 1)]).unwrap();
        assert!(reach(&d, &set(&[]), &set(&[])).unwrap().is_empty());
    }

    #[test]
    fn reach_respects_forbidden() {
        let d = Digraph::from_arcs(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(reach(&d, &set(&[0]), &set(&[2])).unwrap(), set(&[0, 1]));
        assert!(reach(&d, &set(&[0]), &set(&[0])).is_err());
    }

    #[test]
    fn line_digraph_of_single_arc() {
        let d = Digraph::from_arcs(2, &[(0, 1)]).unwrap();
        let (l, map) = line_digraph(&d);
        assert_eq!(l.vertex_count(), 1);
        assert_eq!(l.arc_count(), 0);
        assert_eq!(map[0], Some(0));
    }

    #[test]
    fn line_digraph_of_three_cycle_is_three_cycle() {
        let d = Digraph::from_arcs(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let (l, _) = line_digraph(&d);
        assert_eq!(l.vertex_count(), 3);
        assert_eq!(l.arc_count(), 3);
        assert!(l.is_strong());
    }

    #[test]
    fn line_digraph_arc_count_matches_degree_products() {
        let d = Digraph::from_arcs(5, &[(0, 1), (1, 2), (1, 3), (3, 1), (2, 4), (3, 4), (4, 0)])
            .unwrap();
        let (l, _) = line_digraph(&d);
        let expected: usize = d
            .vertices()
            .map(|v| d.in_arcs(v).len() * d.out_arcs(v).len())
            .sum();
        assert_eq!(l.arc_count(), expected);
    }

    #[test]
    fn bidirect_round_trips_edges() {
        let edges = [(0, 1), (1, 2), (0, 3)];
        let d = bidirect(4, &edges).unwrap();
        assert_eq!(d.arc_count(), 6);
        let mut recovered: BTreeSet<(usize, usize)> = BTreeSet::new();
        for a in d.arcs() {
            let (u, v) = d.ends(a);
            recovered.insert((u.min(v), u.max(v)));
        }
        let original: BTreeSet<(usize, usize)> =
            edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
        assert_eq!(recovered, original);
        assert!(bidirect(2, &[(0, 0)]).is_err());
    }

    #[test]
    fn pendant_terminals_grow_counts_by_2k() {
        let d = Digraph::from_arcs(2, &[(0, 1)]).unwrap();
        let ext = add_pendant_terminals(&d, &[(0, 1)]).unwrap();
        assert_eq!(ext.digraph.vertex_count(), 4);
        assert_eq!(ext.digraph.arc_count(), 3);
        let (s2, t2) = ext.pairs[0];
        assert_eq!(ext.digraph.out_neighbors(s2), vec![0]);
        assert_eq!(ext.digraph.in_neighbors(t2), vec![1]);
    }

    #[test]
    fn pendant_terminals_with_shared_source() {
        let d = Digraph::from_arcs(3, &[(0, 1), (0, 2)]).unwrap();
        let ext = add_pendant_terminals(&d, &[(0, 1), (0, 2)]).unwrap();
        assert_eq!(ext.digraph.vertex_count(), 7);
        let (sa, _) = ext.pairs[0];
        let (sb, _) = ext.pairs[1];
        assert_ne!(sa, sb);
        assert_eq!(ext.digraph.out_neighbors(sa), vec![0]);
        assert_eq!(ext.digraph.out_neighbors(sb), vec![0]);
    }

    #[test]
    fn parse_basic_edge_list() {
        let text = "# demo\n3 2\n0 1\n1 2 2\n";
        let d = parse_edge_list(text).unwrap();
        assert_eq!(d.vertex_count(), 3);
        assert_eq!(d.arc_count(), 3);
        assert_eq!(d.multiplicity(1, 2), 2);
    }

    #[test]
    fn parse_labels_and_label_tokens() {
        let text = "3 2\n\"a\" 1\n1 \"c\"\n@labels\n0 \"a\"\n2 \"c\"\n";
        let d = parse_edge_list(text).unwrap();
        assert_eq!(d.label(0), Some("a"));
        assert_eq!(d.find_arc(0, 1), Some(0));
        assert_eq!(d.find_arc(1, 2), Some(1));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "2 1\n0 2\n";
        match parse_edge_list(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn edge_list_round_trip_is_byte_stable() {
        let text = "4 3\n0 1\n1 2\n2 3 2\n@labels\n0 \"root\"\n";
        let d = parse_edge_list(text).unwrap();
        let emitted = to_edge_list(&d);
        let d2 = parse_edge_list(&emitted).unwrap();
        assert_eq!(to_edge_list(&d2), emitted);
    }

    #[test]
    fn path_construction_and_subpath() {
        let d = Digraph::from_arcs(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let p = Path::from_arcs(&d, vec![0, 1, 2]).unwrap();
        assert_eq!(p.vertices(), &[0, 1, 2, 3]);
        let sub = p.subpath(1, 3).unwrap();
        assert_eq!(sub.vertices(), &[1, 2, 3]);
        assert!(p.subpath(3, 1).is_none());
        assert!(Path::from_arcs(&d, vec![0, 2]).is_err());
    }

    #[test]
    fn induced_preserves_ids() {
        let d = Digraph::from_arcs(4, &[(0, 1), (1, 2), (2, 0), (2, 3)]).unwrap();
        let sub = d.induced(&set(&[0, 1, 2]));
        assert_eq!(sub.vertex_count(), 3);
        assert!(sub.has_arc(0) && sub.has_arc(1) && sub.has_arc(2));
        assert!(!sub.has_arc(3));
        assert!(sub.is_strong());
    }
}
