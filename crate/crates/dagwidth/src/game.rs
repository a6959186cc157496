//! The cops-and-robber pursuit engine.
//!
//! For a strongly connected digraph whose circumference is verified to
//! be at most `p`, [`run_strategy`] computes a branching record of cop
//! placements that corners the robber while keeping every placed set
//! inside a cycle of at most `p` vertices: place cops on a maximal
//! cycle, watch which way the robber's territory splits, and for each
//! maximal territory move to a maximal cycle through the bridge between
//! the old cycle and that territory. Territories only ever shrink, so
//! the recursion terminates with the robber caught.
//!
//! All cycle and path searches are confined to the current cycle plus
//! the territory being chased. That confinement is what makes the
//! resulting bags form a valid DAG-decomposition ([`strategy_to_decomposition`]):
//! once a vertex drops out of a branch it can never re-enter it, and all
//! exits from a territory stay guarded by cops that are never lifted.
//! The validator has the final word; the engine treats a validation
//! failure as an internal error rather than shipping a bad artifact.

use std::collections::{HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cycles::{
    circumference_bounded, extend_to_maximal_cycle, least_maximal_cycle, Circumference, Cycle,
};
use crate::decomposition::{
    combine_components, validate, DagDecomposition,
};
use crate::digraph::{reach, scc, scc_of, Condensation, Digraph, VertexSet};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Strategy traces

/// Which branch of the placement rule a step used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepCase {
    /// Root placement on the starting maximal cycle.
    Start,
    /// The territory touches the cycle through distinct exit and entry
    /// vertices; part of the cycle is rerouted through the territory.
    DistinctEnds,
    /// Every path between the territory and the cycle is incident to one
    /// cycle vertex; all other cops lift and regroup on a cycle through
    /// that vertex.
    SameEnd,
}

/// Witness data for one strategy step, sufficient to re-check it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepWitness {
    /// The occupied cycle the step started from.
    #[serde(rename = "C")]
    pub cycle: Vec<usize>,
    /// The connecting path: exit vertex, through the territory, entry
    /// vertex (equal endpoints for `SameEnd`, written once each).
    #[serde(rename = "QC")]
    pub q_c: Vec<usize>,
    /// The rerouted cycle before extension (`DistinctEnds` only).
    #[serde(rename = "Cprime", skip_serializing_if = "Option::is_none")]
    pub c_prime: Option<Vec<usize>>,
    /// The maximal cycle the step ends on: the next bag.
    #[serde(rename = "Cstar")]
    pub c_star: Vec<usize>,
    /// First territory vertex on the connecting path; witnesses progress.
    pub u: usize,
    /// Exit vertex.
    pub v: usize,
    /// Entry vertex.
    pub vprime: usize,
    /// Arc-distance from `v` to `vprime` along the cycle (0 for `SameEnd`).
    pub z: usize,
    /// Cops lifted by the step.
    pub lifted: Vec<usize>,
    /// Cops newly placed by the step.
    pub placed: Vec<usize>,
}

/// One node of a strategy trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceNode {
    pub id: usize,
    pub parent: Option<usize>,
    /// Occupied cop set, always the vertex set of a cycle (or a single
    /// vertex for trivial components).
    pub bag: VertexSet,
    /// The robber region this node was built to handle; the node's moves
    /// are sound for any robber position inside it.
    pub covers: VertexSet,
    /// What remains of `covers` once `bag` is occupied; the union of the
    /// children's `covers`. Empty at leaves: the robber is caught.
    pub territory: VertexSet,
    pub case: StepCase,
    pub witness: Option<StepWitness>,
    pub children: Vec<usize>,
}

/// Branching record of cop placements for one strongly connected
/// digraph. Node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyTrace {
    pub nodes: Vec<TraceNode>,
}

impl StrategyTrace {
    pub fn root(&self) -> &TraceNode {
        &self.nodes[0]
    }

    /// Largest bag in the trace.
    pub fn width(&self) -> usize {
        self.nodes.iter().map(|n| n.bag.len()).max().unwrap_or(0)
    }
}

/// Traces for a whole digraph: one per strongly connected component, in
/// condensation order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceDoc {
    pub components: Vec<(Vec<usize>, StrategyTrace)>,
}

// ---------------------------------------------------------------------------
// Strategy construction

/// A cop placement paired with the territory the robber retains against
/// it. The pair is the whole game state: everything else is derived.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameState {
    pub occupied: VertexSet,
    pub territory: VertexSet,
}

impl GameState {
    /// State after placing `occupied` against a robber somewhere in
    /// `positions`.
    pub fn new(d: &Digraph, occupied: VertexSet, positions: &VertexSet) -> Result<Self> {
        let sources: VertexSet = positions.difference(&occupied).copied().collect();
        let territory = reach(d, &sources, &occupied)?;
        Ok(GameState { occupied, territory })
    }
}

/// Run the pursuit strategy on a strongly connected digraph with
/// verified circumference at most `p`. The starting cycle is the
/// lexicographically least maximal cycle.
pub fn run_strategy(d: &Digraph, p: usize) -> Result<StrategyTrace> {
    run_strategy_impl(d, p, None)
}

/// Same as [`run_strategy`] but starting from a caller-chosen maximal
/// cycle.
pub fn run_strategy_from(d: &Digraph, p: usize, start: &Cycle) -> Result<StrategyTrace> {
    run_strategy_impl(d, p, Some(start.clone()))
}

fn run_strategy_impl(d: &Digraph, p: usize, start: Option<Cycle>) -> Result<StrategyTrace> {
    if !d.is_strong() {
        return Err(Error::NotStrong);
    }
    let n = d.vertex_count();
    if n == 0 {
        return Err(Error::Precondition("empty digraph".into()));
    }
    if n == 1 {
        let v = d.vertices().next().expect("one vertex");
        return Ok(StrategyTrace {
            nodes: vec![TraceNode {
                id: 0,
                parent: None,
                bag: [v].into_iter().collect(),
                covers: [v].into_iter().collect(),
                territory: VertexSet::new(),
                case: StepCase::Start,
                witness: None,
                children: Vec::new(),
            }],
        });
    }
    match circumference_bounded(d, p)? {
        Circumference::Exceeds => return Err(Error::CircumferenceExceeded { bound: p }),
        Circumference::Exact(0) => {
            return Err(Error::Internal("strong digraph with two or more vertices must contain a cycle".into()))
        }
        Circumference::Exact(_) => {}
    }
    let start = match start {
        Some(c) => {
            if c.len() > p {
                return Err(Error::CircumferenceExceeded { bound: p });
            }
            c
        }
        None => least_maximal_cycle(d, p).ok_or_else(|| {
            Error::Internal("no maximal cycle in a strong digraph with a cycle".into())
        })?,
    };

    let all = d.vertex_set();
    let root_territory: VertexSet = all.difference(&start.vertex_set()).copied().collect();
    let mut nodes = vec![TraceNode {
        id: 0,
        parent: None,
        bag: start.vertex_set(),
        covers: all,
        territory: root_territory.clone(),
        case: StepCase::Start,
        witness: None,
        children: Vec::new(),
    }];
    expand(d, p, &start, 0, &root_territory, &mut nodes)?;
    Ok(StrategyTrace { nodes })
}

/// Maximal robber territories inside `avail`: the reach-closures of the
/// source components of the condensation of the induced subdigraph.
/// Ordered by their minimum vertex. Every robber position in `avail`
/// lies in at least one returned territory.
fn maximal_territories(d: &Digraph, avail: &VertexSet) -> Result<Vec<(VertexSet, VertexSet)>> {
    if avail.is_empty() {
        return Ok(Vec::new());
    }
    let cond = scc_of(d, Some(avail));
    let forbidden: VertexSet = d.vertices().filter(|v| !avail.contains(v)).collect();
    let mut out = Vec::new();
    let mut sources = cond.source_components();
    sources.sort_by_key(|&i| cond.components[i][0]);
    for i in sources {
        let source: VertexSet = cond.components[i].iter().copied().collect();
        let closure = reach(d, &source, &forbidden)?;
        out.push((source, closure));
    }
    Ok(out)
}

fn expand(
    d: &Digraph,
    p: usize,
    cycle: &Cycle,
    node_id: usize,
    territory: &VertexSet,
    nodes: &mut Vec<TraceNode>,
) -> Result<()> {
    for (source, covers) in maximal_territories(d, territory)? {
        let (witness, c_star) = strategy_step(d, p, cycle, &covers, &source)?;
        let bag = c_star.vertex_set();
        if !covers.iter().any(|v| bag.contains(v)) {
            return Err(Error::Internal("strategy step made no progress into the territory".into()));
        }
        let child_territory: VertexSet = covers.difference(&bag).copied().collect();
        if !child_territory.is_subset(territory) {
            return Err(Error::Internal("child territory escaped the parent territory".into()));
        }
        let child_id = nodes.len();
        nodes.push(TraceNode {
            id: child_id,
            parent: Some(node_id),
            bag,
            covers,
            territory: child_territory.clone(),
            case: witness_case(&witness),
            witness: Some(witness),
            children: Vec::new(),
        });
        nodes[node_id].children.push(child_id);
        expand(d, p, &c_star, child_id, &child_territory, nodes)?;
    }
    Ok(())
}

fn witness_case(w: &StepWitness) -> StepCase {
    if w.v == w.vprime {
        StepCase::SameEnd
    } else {
        StepCase::DistinctEnds
    }
}

/// One strategy step: cops stand on `cycle`, the robber holds `territory`
/// (whose unique source component is `source`). Produces the witness and
/// the next maximal cycle to occupy.
fn strategy_step(
    d: &Digraph,
    p: usize,
    cycle: &Cycle,
    territory: &VertexSet,
    source: &VertexSet,
) -> Result<(StepWitness, Cycle)> {
    let cycle_set = cycle.vertex_set();

    // Entry vertices: heads of arcs from the territory into the cycle.
    let mut entries = VertexSet::new();
    for &t in territory {
        for &a in d.out_arcs(t) {
            let h = d.head(a);
            if cycle_set.contains(&h) {
                entries.insert(h);
            }
        }
    }
    // Exit vertices: cycle vertices with an arc into the source component
    // (the part of the territory from which the whole territory is
    // reachable).
    let mut exits = VertexSet::new();
    for &w in cycle.vertices() {
        for &a in d.out_arcs(w) {
            if source.contains(&d.head(a)) {
                exits.insert(w);
            }
        }
    }
    if entries.is_empty() || exits.is_empty() {
        return Err(Error::Internal(
            "territory detached from the occupied cycle; input was not strong".into(),
        ));
    }

    let incidence: VertexSet = entries.union(&exits).copied().collect();
    let region: VertexSet = cycle_set.union(territory).copied().collect();
    let region_graph = d.induced(&region);

    if incidence.len() == 1 {
        // Same-end case: one vertex carries all traffic between the
        // territory and the cycle. Everything else lifts; regroup on a
        // maximal cycle through the shortest excursion from that vertex.
        let v = *incidence.iter().next().expect("singleton");
        let q = best_excursion(d, v, v, territory)
            .ok_or_else(|| Error::Internal("no excursion through the territory".into()))?;
        let closed: Vec<usize> = q[..q.len() - 1].to_vec();
        let q_cycle = Cycle::from_vertices(d, &closed)?;
        if q_cycle.len() > p {
            return Err(Error::CircumferenceExceeded { bound: p });
        }
        let c_star = extend_to_maximal_cycle(&region_graph, &q_cycle, p)?;
        let bag = c_star.vertex_set();
        let witness = StepWitness {
            cycle: cycle.vertices().to_vec(),
            q_c: q.clone(),
            c_prime: None,
            c_star: c_star.vertices().to_vec(),
            u: q[1],
            v,
            vprime: v,
            z: 0,
            lifted: cycle_set.difference(&bag).copied().collect(),
            placed: bag.difference(&cycle_set).copied().collect(),
        };
        return Ok((witness, c_star));
    }

    // Distinct-ends case: find the exit/entry pair with the least
    // positive arc-distance along the cycle. Minimality guarantees no
    // entry vertex sits strictly inside the replaced stretch, so the
    // lifted cops are unreachable for the robber.
    let order = cycle.vertices();
    let len = order.len();
    let mut chosen: Option<(usize, usize, usize)> = None;
    'pairs: for z in 1..len {
        for i in 0..len {
            let v = order[i];
            let vp = order[(i + z) % len];
            if exits.contains(&v) && entries.contains(&vp) {
                chosen = Some((v, vp, z));
                break 'pairs;
            }
        }
    }
    let (v, vprime, z) = chosen.ok_or_else(|| {
        Error::Internal("distinct-ends case without a feasible exit/entry pair".into())
    })?;
    if z == 1 {
        // A distance-1 reroute would splice a properly larger cycle onto
        // a maximal one.
        return Err(Error::Internal(
            "adjacent exit/entry pair contradicts maximality of the occupied cycle".into(),
        ));
    }
    debug_assert!(
        cycle
            .segment(v, vprime)
            .iter()
            .skip(1)
            .rev()
            .skip(1)
            .all(|w| !entries.contains(w)),
        "an entry vertex survived inside the replaced stretch"
    );

    let q = best_excursion(d, v, vprime, territory)
        .ok_or_else(|| Error::Internal("no connecting path through the territory".into()))?;
    let mut rotation = cycle.segment(vprime, v);
    rotation.extend_from_slice(&q[1..q.len() - 1]);
    let c_prime = Cycle::from_vertices(d, &rotation)?;
    if c_prime.len() > p {
        return Err(Error::CircumferenceExceeded { bound: p });
    }
    let c_star = extend_to_maximal_cycle(&region_graph, &c_prime, p)?;
    let bag = c_star.vertex_set();
    let witness = StepWitness {
        cycle: cycle.vertices().to_vec(),
        q_c: q.clone(),
        c_prime: Some(c_prime.vertices().to_vec()),
        c_star: c_star.vertices().to_vec(),
        u: q[1],
        v,
        vprime,
        z,
        lifted: cycle_set.difference(&bag).copied().collect(),
        placed: bag.difference(&cycle_set).copied().collect(),
    };
    Ok((witness, c_star))
}

/// Shortest path `v -> ... -> target` whose first hop and interior stay
/// inside `territory`, lexicographically least among shortest ones.
/// Works for `target == v` (a shortest excursion cycle) and for targets
/// on the occupied cycle.
fn best_excursion(d: &Digraph, v: usize, target: usize, territory: &VertexSet) -> Option<Vec<usize>> {
    let mut best: Option<Vec<usize>> = None;
    let mut firsts = d.out_neighbors(v);
    // The target sits on the occupied cycle, never in the territory, so
    // every candidate keeps at least one territory vertex on the path.
    firsts.retain(|y| territory.contains(y));
    for y in firsts {
        if let Some(rest) = lex_shortest_path(d, y, target, territory) {
            let mut cand = vec![v];
            cand.extend(rest);
            let better = match &best {
                None => true,
                Some(b) => (cand.len(), &cand) < (b.len(), b),
            };
            if better {
                best = Some(cand);
            }
        }
    }
    best
}

/// Lexicographically least shortest path from `from` to `to` whose
/// interior (and `from` itself) lies in `allowed`. Standard BFS from the
/// target over reversed arcs, then a greedy forward walk picking the
/// least next vertex on a shortest path.
fn lex_shortest_path(d: &Digraph, from: usize, to: usize, allowed: &VertexSet) -> Option<Vec<usize>> {
    let bound = d.vertex_bound();
    let mut dist = vec![usize::MAX; bound];
    dist[to] = 0;
    let mut queue = VecDeque::new();
    queue.push_back(to);
    while let Some(x) = queue.pop_front() {
        for w in d.in_neighbors(x) {
            if dist[w] != usize::MAX {
                continue;
            }
            if w != from && !allowed.contains(&w) {
                continue;
            }
            dist[w] = dist[x] + 1;
            queue.push_back(w);
        }
    }
    if dist[from] == usize::MAX {
        return None;
    }
    let mut path = vec![from];
    let mut cur = from;
    while cur != to {
        let next = d
            .out_neighbors(cur)
            .into_iter()
            .filter(|&w| {
                (w == to || allowed.contains(&w)) && dist[w] != usize::MAX && dist[w] + 1 == dist[cur]
            })
            .min()
            .expect("distance decreases along some arc");
        path.push(next);
        cur = next;
    }
    Some(path)
}

// ---------------------------------------------------------------------------
// Trace -> decomposition

/// Decomposition nodes mirror the trace: one bag per trace node, arcs
/// along parent-child edges.
pub fn strategy_to_decomposition(trace: &StrategyTrace) -> DagDecomposition {
    let bags: Vec<VertexSet> = trace.nodes.iter().map(|n| n.bag.clone()).collect();
    let arcs: Vec<(usize, usize)> = trace
        .nodes
        .iter()
        .filter_map(|n| n.parent.map(|p| (p, n.id)))
        .collect();
    DagDecomposition::new(bags, arcs).expect("trace indices are dense")
}

/// Output of the full pipeline on an arbitrary digraph.
#[derive(Debug, Clone)]
pub struct Decomposed {
    pub decomposition: DagDecomposition,
    pub condensation: Condensation,
    pub traces: TraceDoc,
}

/// Verify the circumference bound, run the strategy on every strongly
/// connected component, translate and combine the traces, and validate
/// the result. A validation failure is reported as an internal error:
/// the construction is supposed to be correct by design, and this is
/// the tripwire proving it on every run.
pub fn decompose(d: &Digraph, p: usize) -> Result<Decomposed> {
    match circumference_bounded(d, p)? {
        Circumference::Exceeds => return Err(Error::CircumferenceExceeded { bound: p }),
        Circumference::Exact(_) => {}
    }
    let cond = scc(d);
    let comps: Vec<Vec<usize>> = cond.components.clone();
    let traces: Vec<Result<StrategyTrace>> = crate::par::map_collect(&comps, |comp| {
        let comp_set: VertexSet = comp.iter().copied().collect();
        let sub = d.induced(&comp_set);
        run_strategy(&sub, p)
    });
    let mut parts = Vec::with_capacity(comps.len());
    let mut per_comp = Vec::with_capacity(comps.len());
    for (comp, trace) in comps.iter().zip(traces) {
        let trace = trace?;
        let comp_set: VertexSet = comp.iter().copied().collect();
        parts.push((comp_set, strategy_to_decomposition(&trace)));
        per_comp.push((comp.clone(), trace));
    }
    let decomposition = combine_components(&parts, &cond)?;
    let report = validate(d, &decomposition);
    if !report.is_empty() {
        return Err(Error::Internal(format!(
            "constructed decomposition failed validation with {} violations",
            report.violation_count()
        )));
    }
    Ok(Decomposed { decomposition, condensation: cond, traces: TraceDoc { components: per_comp } })
}

// ---------------------------------------------------------------------------
// Game simulation

/// How the robber responds during a replay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RobberPolicy {
    /// Explore every robber response; verdicts aggregate over all plays.
    Adversarial,
    /// Uniform random choice, deterministic per seed.
    Random(u64),
    /// Always move to the option with the largest resulting territory
    /// (least vertex id on ties).
    GreedyLargestTerritory,
}

/// Outcome of replaying a trace against a robber policy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimulationReport {
    /// True when every explored play ends with the robber caught.
    pub caught: bool,
    /// Worst-case number of cop moves until capture.
    pub rounds: usize,
    /// Territory never grew in any explored play.
    pub robber_monotone: bool,
    /// No vertex was reoccupied after being vacated (informational; the
    /// strategy does not promise this).
    pub cop_monotone: bool,
    /// Number of distinct plays explored.
    pub plays: usize,
}

struct Replay<'a> {
    d: &'a Digraph,
    doc: &'a TraceDoc,
    comp_of: HashMap<usize, usize>,
    comp_sets: Vec<VertexSet>,
    robber_monotone: bool,
    cop_monotone: bool,
    plays: usize,
    /// Adversarial memo: (component, node, robber) -> (caught, rounds
    /// remaining from this state).
    memo: HashMap<(usize, usize, usize), (bool, usize)>,
}

/// Replay the cop moves of `doc` against a robber policy on the digraph
/// the trace was computed for.
///
/// The cops sweep components in the stored (condensation) order, always
/// jumping to the component currently holding the robber and descending
/// the branch that covers his territory. Round 0 is the opening
/// placement on the first component's root bag; every later placement
/// increments the round counter.
pub fn simulate_game(d: &Digraph, doc: &TraceDoc, policy: RobberPolicy) -> Result<SimulationReport> {
    let mut comp_of = HashMap::new();
    let mut comp_sets = Vec::with_capacity(doc.components.len());
    for (ci, (vs, _)) in doc.components.iter().enumerate() {
        for &v in vs {
            if !d.has_vertex(v) {
                return Err(Error::SimulationFault(format!(
                    "trace component mentions vertex {v} not present in the digraph"
                )));
            }
            comp_of.insert(v, ci);
        }
        comp_sets.push(vs.iter().copied().collect());
    }
    for v in d.vertices() {
        if !comp_of.contains_key(&v) {
            return Err(Error::SimulationFault(format!("vertex {v} is missing from the trace")));
        }
    }
    let mut replay = Replay {
        d,
        doc,
        comp_of,
        comp_sets,
        robber_monotone: true,
        cop_monotone: true,
        plays: 0,
        memo: HashMap::new(),
    };

    if d.vertex_count() == 0 || doc.components.is_empty() {
        return Ok(SimulationReport { caught: true, rounds: 0, robber_monotone: true, cop_monotone: true, plays: 1 });
    }

    // Round 0: cops announce the first component's root bag; the robber
    // then picks any free vertex.
    let first_bag = &doc.components[0].1.root().bag;
    let free: Vec<usize> = d.vertices().filter(|v| !first_bag.contains(v)).collect();
    if free.is_empty() {
        return Ok(SimulationReport { caught: true, rounds: 0, robber_monotone: true, cop_monotone: true, plays: 1 });
    }
    let mut rng = match policy {
        RobberPolicy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let starts: Vec<usize> = match policy {
        RobberPolicy::Adversarial => free,
        RobberPolicy::Random(_) => {
            let rng = rng.as_mut().expect("seeded");
            vec![free[rng.gen_range(0..free.len())]]
        }
        RobberPolicy::GreedyLargestTerritory => {
            let mut best = free[0];
            let mut best_size = 0usize;
            for &r in &free {
                let t = reach(d, &[r].into_iter().collect(), first_bag)?.len();
                if t > best_size {
                    best = r;
                    best_size = t;
                }
            }
            vec![best]
        }
    };

    let mut caught = true;
    let mut rounds = 0usize;
    for r in starts {
        let (ok, extra) = replay.play(r, (0, 0), policy, &mut rng)?;
        caught &= ok;
        rounds = rounds.max(extra);
    }
    Ok(SimulationReport {
        caught,
        rounds,
        robber_monotone: replay.robber_monotone,
        cop_monotone: replay.cop_monotone,
        plays: replay.plays,
    })
}

impl<'a> Replay<'a> {
    fn node(&self, at: (usize, usize)) -> &TraceNode {
        &self.doc.components[at.0].1.nodes[at.1]
    }

    /// Cops stand on the bag of `at`; the robber stands at `r` (not on
    /// that bag). Decide and execute the next cop move. Returns (caught
    /// on every explored play, worst-case rounds from here).
    fn play(
        &mut self,
        r: usize,
        at: (usize, usize),
        policy: RobberPolicy,
        rng: &mut Option<ChaCha8Rng>,
    ) -> Result<(bool, usize)> {
        let rcomp = *self.comp_of.get(&r).expect("robber on a live vertex");
        let next = if rcomp != at.0 {
            // The robber is outside the current component; jump to his
            // component's root placement.
            (rcomp, 0)
        } else {
            let node = self.node(at);
            let state = GameState::new(self.d, node.bag.clone(), &[r].into_iter().collect())?;
            let in_comp: VertexSet =
                state.territory.intersection(&self.comp_sets[rcomp]).copied().collect();
            let child = node
                .children
                .iter()
                .copied()
                .find(|&c| in_comp.is_subset(&self.doc.components[rcomp].1.nodes[c].covers))
                .ok_or_else(|| {
                    Error::SimulationFault(format!(
                        "no branch covers the robber territory at node {} of component {}",
                        node.id, rcomp
                    ))
                })?;
            (rcomp, child)
        };
        self.advance(r, at, next, policy, rng)
    }

    /// Execute the move from the bag of `from` to the bag of `to` with
    /// the robber at `r`.
    fn advance(
        &mut self,
        r: usize,
        from: (usize, usize),
        to: (usize, usize),
        policy: RobberPolicy,
        rng: &mut Option<ChaCha8Rng>,
    ) -> Result<(bool, usize)> {
        let memo_key = (to.0, to.1, r);
        if matches!(policy, RobberPolicy::Adversarial) {
            if let Some(&(caught, extra)) = self.memo.get(&memo_key) {
                return Ok((caught, extra));
            }
        }
        let occupied = self.node(from).bag.clone();
        let next_bag = self.node(to).bag.clone();
        let territory_before = reach(self.d, &[r].into_iter().collect(), &occupied)?;
        let stay: VertexSet = occupied.intersection(&next_bag).copied().collect();
        let mid = reach(self.d, &[r].into_iter().collect(), &stay)?;
        let options: Vec<usize> = mid.iter().copied().filter(|v| !next_bag.contains(v)).collect();

        // Cop-monotonicity bookkeeping: reoccupation can only happen
        // within one component (bags of distinct components are
        // disjoint), and there the vacated set is determined by the
        // ancestor chain of the node being moved onto.
        let trace = &self.doc.components[to.0].1;
        let mut vacated = VertexSet::new();
        let mut covered = trace.nodes[to.1].bag.clone();
        let mut walk = trace.nodes[to.1].parent;
        while let Some(pid) = walk {
            let pbag = &trace.nodes[pid].bag;
            for &v in pbag.difference(&covered) {
                vacated.insert(v);
            }
            covered = covered.union(pbag).copied().collect();
            walk = trace.nodes[pid].parent;
        }
        if next_bag.intersection(&vacated).next().is_some() {
            self.cop_monotone = false;
        }

        if options.is_empty() {
            self.plays += 1;
            if matches!(policy, RobberPolicy::Adversarial) {
                self.memo.insert(memo_key, (true, 1));
            }
            return Ok((true, 1));
        }

        let choices: Vec<usize> = match policy {
            RobberPolicy::Adversarial => options,
            RobberPolicy::Random(_) => {
                let rng = rng.as_mut().expect("seeded");
                vec![options[rng.gen_range(0..options.len())]]
            }
            RobberPolicy::GreedyLargestTerritory => {
                let mut best = options[0];
                let mut best_size = 0usize;
                for &cand in &options {
                    let t = reach(self.d, &[cand].into_iter().collect(), &next_bag)?.len();
                    if t > best_size {
                        best = cand;
                        best_size = t;
                    }
                }
                vec![best]
            }
        };

        let mut caught = true;
        let mut worst = 1usize;
        for r2 in choices {
            let territory_after = reach(self.d, &[r2].into_iter().collect(), &next_bag)?;
            if !territory_after.is_subset(&territory_before) {
                self.robber_monotone = false;
            }
            let (ok, extra) = self.play(r2, to, policy, rng)?;
            caught &= ok;
            worst = worst.max(1 + extra);
        }
        if matches!(policy, RobberPolicy::Adversarial) {
            self.memo.insert(memo_key, (caught, worst));
        }
        Ok((caught, worst))
    }
}

// ---------------------------------------------------------------------------
// Exact game value by fixed point

/// Least number of cops (up to `c_max`) that win the helicopter pursuit
/// game on `d`, with no monotonicity restriction, by backward-induction
/// fixed point over (cop set, robber vertex) states. `None` when even
/// `c_max` cops do not win.
///
/// The state space must fit in `budget` states per cop count, otherwise
/// an explicit budget error is returned.
pub fn game_cop_number(d: &Digraph, c_max: usize, budget: usize) -> Result<Option<usize>> {
    let n = d.vertex_count();
    if n == 0 {
        return Ok(Some(0));
    }
    for c in 1..=c_max {
        if cops_win(d, c, budget)? {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

/// Sequential single-count kernel; exposed for the bench suite.
pub fn cops_win(d: &Digraph, c: usize, budget: usize) -> Result<bool> {
    let vertices: Vec<usize> = d.vertices().collect();
    let n = vertices.len();
    let k = c.min(n);
    let placements = combinations(&vertices, k);
    let states = placements
        .len()
        .checked_mul(n)
        .ok_or_else(|| Error::Budget("cop game state count overflow".into()))?;
    if states > budget {
        return Err(Error::Budget(format!(
            "cop game needs {states} states, budget is {budget}"
        )));
    }

    let placement_sets: Vec<VertexSet> = placements
        .iter()
        .map(|p| p.iter().copied().collect())
        .collect();

    // winning[x][r]: cops on placements[x], robber at vertices[r], cops
    // to move, cops win. Grown as a least fixed point: a state joins
    // once some cop move leaves the robber only already-winning (or no)
    // responses. Parallel rounds read a frozen snapshot, so the fixed
    // point is schedule-independent.
    let mut winning = vec![vec![false; n]; placements.len()];

    loop {
        let mut changed = false;
        let snapshot = winning.clone();
        let indexed: Vec<usize> = (0..placements.len()).collect();
        let verdicts: Vec<Vec<bool>> = crate::par::map_collect(&indexed, |&x| {
            let mut row = snapshot[x].clone();
            for (ri, &r) in vertices.iter().enumerate() {
                if row[ri] || placement_sets[x].contains(&r) {
                    row[ri] = true;
                    continue;
                }
                for (yi, target) in placement_sets.iter().enumerate() {
                    let stay: VertexSet =
                        placement_sets[x].intersection(target).copied().collect();
                    let mid = reach(d, &[r].into_iter().collect(), &stay)
                        .expect("robber never stands on a staying cop");
                    let mut all_win = true;
                    for &r2 in &mid {
                        if target.contains(&r2) {
                            continue;
                        }
                        let r2i = vertices.binary_search(&r2).expect("live vertex");
                        if !snapshot[yi][r2i] {
                            all_win = false;
                            break;
                        }
                    }
                    if all_win {
                        row[ri] = true;
                        break;
                    }
                }
            }
            row
        });
        for (x, row) in verdicts.into_iter().enumerate() {
            for (ri, win) in row.into_iter().enumerate() {
                if win && !winning[x][ri] {
                    winning[x][ri] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    // Opening move: some placement wins against every free robber vertex.
    Ok((0..placements.len()).any(|x| {
        vertices
            .iter()
            .enumerate()
            .all(|(ri, v)| placement_sets[x].contains(v) || winning[x][ri])
    }))
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

// ---------------------------------------------------------------------------
// Trace JSON

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceDocJson {
    pub components: Vec<ComponentTraceJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentTraceJson {
    pub vertices: Vec<usize>,
    pub nodes: Vec<TraceNodeJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceNodeJson {
    pub id: usize,
    pub parent: Option<usize>,
    pub bag: Vec<usize>,
    pub territory: Vec<usize>,
    pub covers: Vec<usize>,
    pub case: StepCase,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<StepWitness>,
}

impl TraceDocJson {
    pub fn from_doc(doc: &TraceDoc) -> Self {
        TraceDocJson {
            components: doc
                .components
                .iter()
                .map(|(vs, trace)| ComponentTraceJson {
                    vertices: vs.clone(),
                    nodes: trace
                        .nodes
                        .iter()
                        .map(|n| TraceNodeJson {
                            id: n.id,
                            parent: n.parent,
                            bag: n.bag.iter().copied().collect(),
                            territory: n.territory.iter().copied().collect(),
                            covers: n.covers.iter().copied().collect(),
                            case: n.case,
                            witnesses: n.witness.clone(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn into_doc(&self) -> Result<TraceDoc> {
        let mut components = Vec::with_capacity(self.components.len());
        for comp in &self.components {
            let mut nodes: Vec<TraceNode> = comp
                .nodes
                .iter()
                .map(|n| TraceNode {
                    id: n.id,
                    parent: n.parent,
                    bag: n.bag.iter().copied().collect(),
                    covers: n.covers.iter().copied().collect(),
                    territory: n.territory.iter().copied().collect(),
                    case: n.case,
                    witness: n.witnesses.clone(),
                    children: Vec::new(),
                })
                .collect();
            nodes.sort_by_key(|n| n.id);
            for i in 0..nodes.len() {
                if nodes[i].id != i {
                    return Err(Error::Parse { line: 0, msg: "trace node ids must be dense".into() });
                }
            }
            let links: Vec<(usize, usize)> = nodes
                .iter()
                .filter_map(|n| n.parent.map(|p| (p, n.id)))
                .collect();
            for (p, c) in links {
                if p >= nodes.len() {
                    return Err(Error::Parse { line: 0, msg: "trace parent out of range".into() });
                }
                nodes[p].children.push(c);
            }
            components.push((comp.vertices.clone(), StrategyTrace { nodes }));
        }
        Ok(TraceDoc { components })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("schema serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse { line: 0, msg: e.to_string() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::bidirect;

    fn complete_bidirected(p: usize) -> Digraph {
        let mut edges = Vec::new();
        for i in 0..p {
            for j in i + 1..p {
                edges.push((i, j));
            }
        }
        bidirect(p, &edges).unwrap()
    }

    #[test]
    fn complete_digraph_is_caught_in_one_placement() {
        for p in 2..=4 {
            let d = complete_bidirected(p);
            let trace = run_strategy(&d, p).unwrap();
            assert_eq!(trace.nodes.len(), 1);
            assert_eq!(trace.root().bag.len(), p);
            assert_eq!(trace.width(), p);
        }
    }

    #[test]
    fn acyclic_input_is_rejected_by_run_strategy() {
        let d = Digraph::from_arcs(2, &[(0, 1)]).unwrap();
        assert!(matches!(run_strategy(&d, 3), Err(Error::NotStrong)));
    }

    #[test]
    fn strategy_width_is_bounded_by_circumference() {
        // Two 2-cycles joined through a bridge vertex: circumference 2.
        let d = Digraph::from_arcs(
            3,
            &[(0, 1), (1, 0), (1, 2), (2, 1)],
        )
        .unwrap();
        let trace = run_strategy(&d, 2).unwrap();
        assert!(trace.width() <= 2);
        let dec = strategy_to_decomposition(&trace);
        assert!(validate(&d, &dec).is_empty());
    }

    #[test]
    fn decompose_acyclic_digraph_has_width_one() {
        let d = Digraph::from_arcs(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let out = decompose(&d, 2).unwrap();
        assert_eq!(out.decomposition.width(), 1);
    }

    #[test]
    fn decompose_rejects_broken_promise() {
        let d = Digraph::from_arcs(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert!(matches!(
            decompose(&d, 2),
            Err(Error::CircumferenceExceeded { bound: 2 })
        ));
    }

    #[test]
    fn simulate_catches_adversarial_robber_on_bidirected_path() {
        let d = bidirect(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let out = decompose(&d, 2).unwrap();
        let report = simulate_game(&d, &out.traces, RobberPolicy::Adversarial).unwrap();
        assert!(report.caught);
        assert!(report.robber_monotone);
        assert!(report.rounds <= 4);
    }

    #[test]
    fn simulate_round_zero_capture_when_cops_cover_everything() {
        let d = Digraph::from_arcs(2, &[(0, 1), (1, 0)]).unwrap();
        let out = decompose(&d, 2).unwrap();
        let report = simulate_game(&d, &out.traces, RobberPolicy::Adversarial).unwrap();
        assert!(report.caught);
        assert_eq!(report.rounds, 0);
    }

    #[test]
    fn cop_number_of_complete_bidirected_is_its_order() {
        for p in 2..=4 {
            let d = complete_bidirected(p);
            assert_eq!(game_cop_number(&d, 4, 100_000).unwrap(), Some(p));
        }
    }

    #[test]
    fn cop_number_of_directed_path_is_one() {
        let d = Digraph::from_arcs(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(game_cop_number(&d, 2, 100_000).unwrap(), Some(1));
    }

    #[test]
    fn cop_number_of_bidirected_four_cycle_is_three() {
        let d = bidirect(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        assert_eq!(game_cop_number(&d, 4, 100_000).unwrap(), Some(3));
    }

    #[test]
    fn cop_number_budget_is_explicit() {
        let d = complete_bidirected(4);
        assert!(matches!(game_cop_number(&d, 4, 3), Err(Error::Budget(_))));
    }

    #[test]
    fn trace_json_round_trip() {
        let d = bidirect(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let out = decompose(&d, 2).unwrap();
        let json = TraceDocJson::from_doc(&out.traces).to_json();
        let back = TraceDocJson::from_json(&json).unwrap().into_doc().unwrap();
        assert_eq!(back, out.traces);
    }
}
