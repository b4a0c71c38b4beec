//! Instance transformations: packaging a raw disjoint-shortest-paths
//! question as a coloured one, the additive-slack relaxation, the DAG
//! embedding into a single-colour instance, and terminal splitting.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::graph::{
    ColouredPath, Colour, ComponentRef, Digraph, Graph, Request, ShortestGraph, Vertex,
};
use crate::layering::{bfs_levels, build_shortest_graph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error("pair ({s}, {t}) is disconnected")]
    DisconnectedPair { s: Vertex, t: Vertex },
    #[error("input digraph contains a cycle")]
    CyclicInput,
    #[error("vertex {vertex} is unreachable from the topological root")]
    RootUnreachable { vertex: Vertex },
}

/// Packages raw terminal pairs as a coloured instance: one colour per pair,
/// layered from that pair's source. Feasibility coincides by construction.
pub fn to_kdsp(
    g: &Graph,
    pairs: &[(Vertex, Vertex)],
) -> Result<(ShortestGraph, Vec<Request>), ReductionError> {
    for &(s, t) in pairs {
        if bfs_levels(g, s)[t].is_none() {
            return Err(ReductionError::DisconnectedPair { s, t });
        }
    }
    let sources: Vec<Vertex> = pairs.iter().map(|&(s, _)| s).collect();
    let sg = build_shortest_graph(g, &sources);
    let requests = pairs
        .iter()
        .enumerate()
        .map(|(i, &(s, t))| Request::new(s, t, i))
        .collect();
    Ok((sg, requests))
}

/// One pair's guessed route skeleton in the slack relaxation: the pair's
/// path is forced to run piece / fixed edge / piece / …, where every piece
/// is a shortest path between its endpoints and the fixed edges are the
/// ordered non-ascending steps the path takes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainChoice {
    /// s, u1, v1, …, uq, vq, t — pieces are (skeleton[2m], skeleton[2m+1]).
    pub skeleton: Vec<Vertex>,
    pub pieces: Vec<(Vertex, Vertex)>,
    /// Directed fixed edges (u_m, v_m) between consecutive pieces.
    pub detours: Vec<(Vertex, Vertex)>,
    /// Total length of the assembled path minus d(s, t).
    pub extra_len: u32,
}

#[derive(Debug, Clone)]
pub struct PlanEntry {
    /// Half-open range of this pair's sub-requests in `requests`.
    pub request_range: (usize, usize),
    pub choice: ChainChoice,
}

/// One instance of the relaxation stream: a plain coloured instance plus
/// the plan for stitching sub-request paths back into relaxed paths.
#[derive(Debug, Clone)]
pub struct RelaxedInstance {
    pub sg: ShortestGraph,
    pub requests: Vec<Request>,
    pub plan: Vec<PlanEntry>,
}

/// Enumerates, for every per-pair choice of at most `c` ordered fixed
/// detour edges, the coloured instance whose sub-requests chain through the
/// chosen edge endpoints. The disjunction of the instances' feasibilities
/// equals the relaxed problem "every path at most `c` longer than
/// shortest". Instances arrive in non-decreasing total detour count, so the
/// plain instance comes first; disconnected pairs yield an empty stream.
pub fn reduce_capprox<'a>(
    g: &'a Graph,
    pairs: &[(Vertex, Vertex)],
    c: u32,
) -> impl Iterator<Item = RelaxedInstance> + 'a {
    let apsp: Vec<Vec<Option<u32>>> =
        (0..g.vertex_count()).map(|v| bfs_levels(g, v)).collect();
    let terminal_sets: Vec<BTreeSet<Vertex>> =
        pairs.iter().map(|&(s, t)| [s, t].into_iter().collect()).collect();
    let mut per_pair: Vec<Vec<ChainChoice>> = Vec::with_capacity(pairs.len());
    for (i, &(s, t)) in pairs.iter().enumerate() {
        let others: BTreeSet<Vertex> = terminal_sets
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .flat_map(|(_, ts)| ts.iter().copied())
            .collect();
        per_pair.push(pair_chains(g, &apsp, s, t, c, &others));
    }
    // Index tuples over the per-pair choice lists, cheapest total first.
    let mut combos: Vec<(u32, Vec<usize>)> = Vec::new();
    if per_pair.iter().all(|ch| !ch.is_empty()) {
        let mut idx = vec![0usize; per_pair.len()];
        loop {
            let total: u32 = idx
                .iter()
                .zip(&per_pair)
                .map(|(&i, ch)| ch[i].detours.len() as u32)
                .sum();
            combos.push((total, idx.clone()));
            // Odometer increment.
            let mut pos = idx.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < per_pair[pos].len() {
                    break;
                }
                idx[pos] = 0;
                if pos == 0 {
                    pos = usize::MAX;
                    break;
                }
            }
            if pos == usize::MAX || idx.iter().all(|&i| i == 0) {
                break;
            }
        }
        combos.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    }
    combos.into_iter().filter_map(move |(_, idx)| {
        let chosen: Vec<&ChainChoice> =
            idx.iter().zip(&per_pair).map(|(&i, ch)| &ch[i]).collect();
        // Interiors of different pairs' assembled paths must be disjoint;
        // interior-versus-terminal collisions were pruned per pair already.
        for a in 0..chosen.len() {
            for b in a + 1..chosen.len() {
                let ia = chain_interior(chosen[a]);
                if chain_interior(chosen[b]).iter().any(|v| ia.contains(v)) {
                    return None;
                }
            }
        }
        Some(build_relaxed(g, &chosen))
    })
}

/// Milestone vertices strictly between the pair's endpoints.
fn chain_interior(choice: &ChainChoice) -> BTreeSet<Vertex> {
    let mut set: BTreeSet<Vertex> = choice.skeleton.iter().copied().collect();
    set.remove(choice.skeleton.first().unwrap());
    set.remove(choice.skeleton.last().unwrap());
    set
}

fn pair_chains(
    g: &Graph,
    apsp: &[Vec<Option<u32>>],
    s: Vertex,
    t: Vertex,
    c: u32,
    other_terminals: &BTreeSet<Vertex>,
) -> Vec<ChainChoice> {
    let Some(d) = apsp[s][t] else { return Vec::new() };
    let levels = &apsp[s];
    // A relaxed path's non-ascending steps, in order, are what we guess:
    // every directed edge that does not climb one level.
    let mut candidates: Vec<(Vertex, Vertex)> = Vec::new();
    for (u, v) in g.edges() {
        for (a, b) in [(u, v), (v, u)] {
            if let (Some(la), Some(lb)) = (levels[a], levels[b]) {
                if lb <= la {
                    candidates.push((a, b));
                }
            }
        }
    }
    let mut out = Vec::new();
    let mut seq: Vec<(Vertex, Vertex)> = Vec::new();
    chains_rec(&candidates, apsp, s, t, d, c, other_terminals, &mut seq, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn chains_rec(
    candidates: &[(Vertex, Vertex)],
    apsp: &[Vec<Option<u32>>],
    s: Vertex,
    t: Vertex,
    d: u32,
    c: u32,
    other_terminals: &BTreeSet<Vertex>,
    seq: &mut Vec<(Vertex, Vertex)>,
    out: &mut Vec<ChainChoice>,
) {
    if let Some(choice) = finish_chain(apsp, s, t, d, c, other_terminals, seq) {
        out.push(choice);
    }
    if seq.len() as u32 == c {
        return;
    }
    for &e in candidates {
        seq.push(e);
        chains_rec(candidates, apsp, s, t, d, c, other_terminals, seq, out);
        seq.pop();
    }
}

/// Validates the skeleton s,u1,v1,…,t for the given detour sequence and
/// prices it; `None` when a piece is disconnected, the length budget is
/// blown, a vertex repeats illegally, or an interior milestone hits another
/// pair's terminal.
fn finish_chain(
    apsp: &[Vec<Option<u32>>],
    s: Vertex,
    t: Vertex,
    d: u32,
    c: u32,
    other_terminals: &BTreeSet<Vertex>,
    seq: &[(Vertex, Vertex)],
) -> Option<ChainChoice> {
    let q = seq.len() as u32;
    let mut skeleton = vec![s];
    for &(u, v) in seq {
        skeleton.push(u);
        skeleton.push(v);
    }
    skeleton.push(t);
    // Equal vertices may appear only as the two endpoints of a trivial
    // piece; any other repeat would make the assembled walk non-simple.
    for a in 0..skeleton.len() {
        for b in a + 1..skeleton.len() {
            if skeleton[a] == skeleton[b] && !(b == a + 1 && a % 2 == 0) {
                return None;
            }
        }
    }
    let mut pieces = Vec::with_capacity(seq.len() + 1);
    let mut total = q;
    for m in 0..=seq.len() {
        let (a, b) = (skeleton[2 * m], skeleton[2 * m + 1]);
        let dist = apsp[a][b]?;
        total += dist;
        pieces.push((a, b));
    }
    if total > d + c {
        return None;
    }
    // Interior milestones may not touch other pairs' terminals: in the
    // assembled path they are internal vertices.
    for (i, &v) in skeleton.iter().enumerate() {
        let exempt = i == 0
            || i == skeleton.len() - 1
            || (i == 1 && skeleton[1] == s)
            || (i == skeleton.len() - 2 && skeleton[skeleton.len() - 2] == t);
        if !exempt && other_terminals.contains(&v) {
            return None;
        }
    }
    Some(ChainChoice { skeleton, pieces, detours: seq.to_vec(), extra_len: total - d })
}

fn build_relaxed(g: &Graph, chosen: &[&ChainChoice]) -> RelaxedInstance {
    let mut sources = Vec::new();
    let mut requests: Vec<Request> = Vec::new();
    let mut plan = Vec::new();
    for choice in chosen {
        let from = requests.len();
        for &(a, b) in &choice.pieces {
            let colour: Colour = sources.len();
            sources.push(a);
            requests.push(Request::new(a, b, colour));
        }
        plan.push(PlanEntry {
            request_range: (from, requests.len()),
            choice: (*choice).clone(),
        });
    }
    let sg = build_shortest_graph(g, &sources);
    RelaxedInstance { sg, requests, plan }
}

/// Stitches sub-request paths back into one relaxed path per original pair.
/// Panics if the paths do not chain; callers hand in a solution of the
/// instance's own requests.
pub fn assemble_relaxed(inst: &RelaxedInstance, paths: &[ColouredPath]) -> Vec<Vec<Vertex>> {
    assert_eq!(paths.len(), inst.requests.len());
    let mut out = Vec::with_capacity(inst.plan.len());
    for entry in &inst.plan {
        let (from, to) = entry.request_range;
        let mut walk: Vec<Vertex> = Vec::new();
        for (m, path) in paths[from..to].iter().enumerate() {
            if m > 0 {
                let (u, v) = entry.choice.detours[m - 1];
                assert_eq!(*walk.last().unwrap(), u, "detour edge does not chain");
                assert_eq!(path.source(), v, "piece does not start at the detour head");
            }
            walk.extend_from_slice(path.vertices());
        }
        let unique: BTreeSet<Vertex> = walk.iter().copied().collect();
        assert_eq!(unique.len(), walk.len(), "assembled relaxed path is not simple");
        out.push(walk);
    }
    out
}

/// The DAG embedded as a single-colour levelled instance: each arc becomes
/// an undirected path long enough that every vertex sits exactly at its
/// topological position, making arc-paths and monotone paths coincide.
#[derive(Debug, Clone)]
pub struct DagEmbedding {
    pub graph: Graph,
    pub pairs: Vec<(Vertex, Vertex)>,
    pub root: Vertex,
    original_n: usize,
    /// Internal subdivision vertices per arc, in arc direction.
    arc_chain: BTreeMap<(Vertex, Vertex), Vec<Vertex>>,
}

impl DagEmbedding {
    pub fn shortest_graph(&self) -> ShortestGraph {
        build_shortest_graph(&self.graph, &[self.root])
    }

    /// All requests share the single colour 0.
    pub fn requests(&self) -> Vec<Request> {
        self.pairs.iter().map(|&(s, t)| Request::new(s, t, 0)).collect()
    }

    pub fn original_vertex_count(&self) -> usize {
        self.original_n
    }

    pub fn chain_of(&self, u: Vertex, v: Vertex) -> Option<&[Vertex]> {
        self.arc_chain.get(&(u, v)).map(|c| c.as_slice())
    }

    /// Projects an embedded path onto the original DAG vertices.
    pub fn pull_back(&self, path: &[Vertex]) -> Vec<Vertex> {
        path.iter().copied().filter(|&v| v < self.original_n).collect()
    }
}

/// Converts a root-reachable DAG linkage question into a single-colour
/// instance: topological positions become levels, and each arc (u, w) is
/// subdivided until its path spans exactly the position gap.
pub fn dag_to_1dsp(
    dag: &Digraph,
    pairs: &[(Vertex, Vertex)],
) -> Result<DagEmbedding, ReductionError> {
    let order = dag.topological_order().ok_or(ReductionError::CyclicInput)?;
    let n = dag.vertex_count();
    let root = if n == 0 { 0 } else { order[0] };
    let mut reachable = vec![false; n];
    if n > 0 {
        reachable[root] = true;
        for &v in &order {
            if reachable[v] {
                for &w in dag.out_neighbours(v) {
                    reachable[w] = true;
                }
            }
        }
    }
    if let Some(v) = (0..n).find(|&v| !reachable[v]) {
        return Err(ReductionError::RootUnreachable { vertex: v });
    }
    let mut pos = vec![0usize; n];
    for (p, &v) in order.iter().enumerate() {
        pos[v] = p;
    }
    let mut extra = 0usize;
    for (u, w) in dag.arcs() {
        extra += pos[w] - pos[u] - 1;
    }
    let mut graph = Graph::new(n + extra);
    let mut arc_chain = BTreeMap::new();
    let mut next = n;
    for (u, w) in dag.arcs() {
        let gap = pos[w] - pos[u];
        let chain: Vec<Vertex> = (0..gap - 1).map(|i| next + i).collect();
        next += gap - 1;
        let mut prev = u;
        for &x in &chain {
            graph.add_edge(prev, x);
            prev = x;
        }
        graph.add_edge(prev, w);
        arc_chain.insert((u, w), chain);
    }
    Ok(DagEmbedding { graph, pairs: pairs.to_vec(), root, original_n: n, arc_chain })
}

/// Back-map from a split instance to the original vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMap {
    original_of: Vec<Vertex>,
}

impl SplitMap {
    pub fn original(&self, v: Vertex) -> Vertex {
        self.original_of[v]
    }

    pub fn is_clone(&self, v: Vertex) -> bool {
        self.original_of[v] != v
    }

    pub fn vertex_count(&self) -> usize {
        self.original_of.len()
    }

    pub fn project(&self, path: &[Vertex]) -> Vec<Vertex> {
        path.iter().map(|&v| self.original_of[v]).collect()
    }
}

/// Gives every terminal role its own vertex. A vertex serving r ≥ 2 roles
/// (a trivial request's two coinciding ends count once) keeps its first
/// role and sprouts r − 1 clones; clones of one vertex form an independent
/// set, and a clone of u is adjacent to exactly the originals and clones of
/// u's neighbours. Levels are copied, forbidden components are extended
/// over the clones, so solutions project back by identifying clones.
pub fn split_terminals(
    sg: &ShortestGraph,
    requests: &[Request],
) -> (ShortestGraph, Vec<Request>, SplitMap) {
    let n = sg.vertex_count();
    let k = sg.colour_count();
    // Terminal roles in request order; a trivial request holds one role.
    let mut roles: Vec<(usize, Vertex, bool)> = Vec::new();
    for (i, r) in requests.iter().enumerate() {
        roles.push((i, r.source, false));
        if r.target != r.source {
            roles.push((i, r.target, true));
        }
    }
    let mut seen: BTreeMap<Vertex, usize> = BTreeMap::new();
    let mut assigned: Vec<Vertex> = Vec::with_capacity(roles.len());
    let mut original_of: Vec<Vertex> = (0..n).collect();
    for &(_, v, _) in &roles {
        let count = seen.entry(v).or_insert(0);
        if *count == 0 {
            assigned.push(v);
        } else {
            assigned.push(original_of.len());
            original_of.push(v);
        }
        *count += 1;
    }
    let total = original_of.len();
    let mut clones_of: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    for v in n..total {
        clones_of[original_of[v]].push(v);
    }
    let reps = |v: Vertex| -> Vec<Vertex> {
        let mut r = vec![v];
        r.extend(&clones_of[v]);
        r
    };
    let mut graph = Graph::new(total);
    for (u, v) in sg.graph().edges() {
        for &a in &reps(u) {
            for &b in &reps(v) {
                graph.add_edge(a, b);
            }
        }
    }
    let levels: Vec<Vec<Option<u32>>> = (0..k)
        .map(|c| (0..total).map(|v| sg.level(c, original_of[v])).collect())
        .collect();
    let split_sg = ShortestGraph::new(graph, levels);
    // Rewrite terminals per role, and lift forbidden components over clones.
    let mut new_requests = requests.to_vec();
    for (role_idx, &(req, _, is_target)) in roles.iter().enumerate() {
        let v = assigned[role_idx];
        if is_target {
            new_requests[req].target = v;
        } else {
            new_requests[req].source = v;
            if requests[req].source == requests[req].target {
                new_requests[req].target = v;
            }
        }
    }
    for r in &mut new_requests {
        r.forbidden = r
            .forbidden
            .iter()
            .map(|comp| lift_component(comp, &clones_of, &original_of))
            .collect();
    }
    (split_sg, new_requests, SplitMap { original_of })
}

fn lift_component(
    comp: &ComponentRef,
    clones_of: &[Vec<Vertex>],
    original_of: &[Vertex],
) -> ComponentRef {
    let needs_lift = comp.vertices.iter().any(|&v| !clones_of[v].is_empty());
    if !needs_lift {
        return comp.clone();
    }
    let mut lifted = (**comp).clone();
    for (clone, &orig) in original_of.iter().enumerate().skip(clones_of.len()) {
        if comp.vertices.contains(&orig) {
            lifted.vertices.insert(clone);
        }
    }
    let base_edges: Vec<(Vertex, Vertex)> = lifted.edges.iter().copied().collect();
    for (u, v) in base_edges {
        let mut us = vec![u];
        us.extend(&clones_of[u]);
        let mut vs = vec![v];
        vs.extend(&clones_of[v]);
        for &a in &us {
            for &b in &vs {
                lifted.edges.insert((a.min(b), a.max(b)));
            }
        }
    }
    std::sync::Arc::new(lifted)
}
