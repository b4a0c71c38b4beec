//! Brute-force ground truth at desk scale: shortest-path enumeration,
//! exhaustive disjoint-path search with slack, and solution validation.
//! Everything here is deliberately simple and independent of the solvers.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::{Colour, ColouredPath, Digraph, Graph, Request, ShortestGraph, Vertex};
use crate::layering::bfs_levels;
use crate::reach::ReachIndex;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("no path connects {s} and {t}")]
    Disconnected { s: Vertex, t: Vertex },
    #[error("backtracking visited more than {cap} candidate paths")]
    EnumerationCapExceeded { cap: usize },
}

/// Streams every shortest `source`–`target` path exactly once, by DFS over
/// the BFS layering from `source` with dead branches pruned via the reverse
/// BFS from `target`.
pub fn enumerate_shortest_paths<'a>(
    g: &'a Graph,
    source: Vertex,
    target: Vertex,
) -> Result<ShortestPaths<'a>, OracleError> {
    let dist_s = bfs_levels(g, source);
    let Some(total) = dist_s[target] else {
        return Err(OracleError::Disconnected { s: source, t: target });
    };
    let dist_t = bfs_levels(g, target);
    Ok(ShortestPaths {
        g,
        source,
        target,
        dist_s,
        dist_t,
        total,
        stack: Vec::new(),
        path: Vec::new(),
        started: false,
        done: false,
    })
}

pub struct ShortestPaths<'a> {
    g: &'a Graph,
    source: Vertex,
    target: Vertex,
    dist_s: Vec<Option<u32>>,
    dist_t: Vec<Option<u32>>,
    total: u32,
    stack: Vec<(Vertex, usize)>,
    path: Vec<Vertex>,
    started: bool,
    done: bool,
}

impl ShortestPaths<'_> {
    /// Edge u -> v lies on a shortest source-target path.
    fn useful_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.dist_s[v] == self.dist_s[u].map(|d| d + 1)
            && matches!(
                (self.dist_s[v], self.dist_t[v]),
                (Some(a), Some(b)) if a + b == self.total
            )
    }
}

impl Iterator for ShortestPaths<'_> {
    type Item = Vec<Vertex>;

    fn next(&mut self) -> Option<Vec<Vertex>> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            if self.source == self.target {
                self.done = true;
                return Some(vec![self.source]);
            }
            self.stack.push((self.source, 0));
            self.path.push(self.source);
        }
        while let Some(&(u, idx)) = self.stack.last() {
            let nbrs = self.g.neighbours(u);
            let mut step = None;
            let mut next_idx = idx;
            while next_idx < nbrs.len() {
                let v = nbrs[next_idx];
                next_idx += 1;
                if self.useful_edge(u, v) {
                    step = Some(v);
                    break;
                }
            }
            let top = self.stack.len() - 1;
            self.stack[top].1 = next_idx;
            match step {
                Some(v) if v == self.target => {
                    let mut out = self.path.clone();
                    out.push(v);
                    return Some(out);
                }
                Some(v) => {
                    self.stack.push((v, 0));
                    self.path.push(v);
                }
                None => {
                    self.stack.pop();
                    self.path.pop();
                }
            }
        }
        self.done = true;
        None
    }
}

/// Number of shortest `source`–`target` paths, by dynamic programming over
/// the BFS layering. Independent of the enumeration above.
pub fn count_shortest_paths(g: &Graph, source: Vertex, target: Vertex) -> u64 {
    let dist = bfs_levels(g, source);
    if dist[target].is_none() {
        return 0;
    }
    let mut order: Vec<Vertex> = (0..g.vertex_count()).filter(|&v| dist[v].is_some()).collect();
    order.sort_by_key(|&v| (dist[v].unwrap(), v));
    let mut count = vec![0u64; g.vertex_count()];
    count[source] = 1;
    for &v in &order {
        if v == source {
            continue;
        }
        count[v] = g
            .neighbours(v)
            .iter()
            .filter(|&&u| dist[u].map(|d| d + 1) == dist[v])
            .map(|&u| count[u])
            .sum();
    }
    count[target]
}

/// All simple `source`–`target` paths with at most `max_edges` edges.
pub fn simple_paths_up_to(
    g: &Graph,
    source: Vertex,
    target: Vertex,
    max_edges: usize,
) -> Vec<Vec<Vertex>> {
    let mut out = Vec::new();
    let mut path = vec![source];
    let mut on_path = vec![false; g.vertex_count()];
    on_path[source] = true;
    simple_paths_rec(g, target, max_edges, &mut path, &mut on_path, &mut out);
    out
}

fn simple_paths_rec(
    g: &Graph,
    target: Vertex,
    max_edges: usize,
    path: &mut Vec<Vertex>,
    on_path: &mut Vec<bool>,
    out: &mut Vec<Vec<Vertex>>,
) {
    let u = *path.last().unwrap();
    if u == target {
        out.push(path.clone());
        return;
    }
    if path.len() > max_edges {
        return;
    }
    for &v in g.neighbours(u) {
        if !on_path[v] {
            on_path[v] = true;
            path.push(v);
            simple_paths_rec(g, target, max_edges, path, on_path, out);
            path.pop();
            on_path[v] = false;
        }
    }
}

/// Up to `cap` colour paths from `source` to `target` avoiding `forbidden`.
pub fn colour_paths_between(
    sg: &ShortestGraph,
    colour: Colour,
    source: Vertex,
    target: Vertex,
    forbidden: &BTreeSet<Vertex>,
    cap: usize,
) -> Vec<Vec<Vertex>> {
    let reach = ReachIndex::build(sg, colour, forbidden);
    let mut out = Vec::new();
    if !reach.can_reach(source, target) || cap == 0 {
        return out;
    }
    let mut path = vec![source];
    colour_paths_rec(sg, colour, target, &reach, &mut path, &mut out, cap);
    out
}

fn colour_paths_rec(
    sg: &ShortestGraph,
    colour: Colour,
    target: Vertex,
    reach: &ReachIndex,
    path: &mut Vec<Vertex>,
    out: &mut Vec<Vec<Vertex>>,
    cap: usize,
) {
    if out.len() >= cap {
        return;
    }
    let u = *path.last().unwrap();
    if u == target {
        out.push(path.clone());
        return;
    }
    let nexts: Vec<Vertex> = sg
        .colour_out_neighbours(colour, u)
        .filter(|&v| reach.can_reach(v, target))
        .collect();
    for v in nexts {
        path.push(v);
        colour_paths_rec(sg, colour, target, reach, path, out, cap);
        path.pop();
    }
}

/// Shared sharing rule: two solution paths may meet only at a vertex that is
/// a terminal of both.
fn sharing_violations(paths: &[Vec<Vertex>]) -> Vec<SolutionViolation> {
    let mut out = Vec::new();
    for a in 0..paths.len() {
        for b in a + 1..paths.len() {
            let (pa, pb) = (&paths[a], &paths[b]);
            let terminals = |p: &Vec<Vertex>, v: Vertex| {
                !p.is_empty() && (*p.first().unwrap() == v || *p.last().unwrap() == v)
            };
            let pb_set: BTreeSet<Vertex> = pb.iter().copied().collect();
            for &v in pa.iter().filter(|v| pb_set.contains(v)) {
                if !(terminals(pa, v) && terminals(pb, v)) {
                    out.push(SolutionViolation::IllegalSharing { first: a, second: b, vertex: v });
                }
            }
        }
    }
    out
}

/// Exhaustive search for pairwise internally disjoint paths, each of length
/// at most `d(s_i, t_i) + slack`. Returns the first solution in a fixed
/// deterministic order, `None` when no tuple exists (including when a pair
/// is disconnected), and an error only when the visited-path cap trips.
pub fn oracle_solve(
    g: &Graph,
    pairs: &[(Vertex, Vertex)],
    slack: u32,
    cap: usize,
) -> Result<Option<Vec<Vec<Vertex>>>, OracleError> {
    let mut search = RawSearch::new(g, pairs, slack, cap);
    if search.limits.is_none() {
        return Ok(None);
    }
    let mut chosen = Vec::new();
    let mut used_any = BTreeSet::new();
    let mut used_internal = BTreeSet::new();
    let mut first = None;
    search.assign(0, &mut chosen, &mut used_any, &mut used_internal, &mut |sol| {
        first = Some(sol.to_vec());
        true
    })?;
    Ok(first)
}

/// Every solution of the raw problem, for small instances.
pub fn all_solutions(
    g: &Graph,
    pairs: &[(Vertex, Vertex)],
    slack: u32,
    cap: usize,
) -> Result<Vec<Vec<Vec<Vertex>>>, OracleError> {
    let mut search = RawSearch::new(g, pairs, slack, cap);
    if search.limits.is_none() {
        return Ok(Vec::new());
    }
    let mut chosen = Vec::new();
    let mut used_any = BTreeSet::new();
    let mut used_internal = BTreeSet::new();
    let mut out = Vec::new();
    search.assign(0, &mut chosen, &mut used_any, &mut used_internal, &mut |sol| {
        out.push(sol.to_vec());
        false
    })?;
    Ok(out)
}

struct RawSearch<'a> {
    g: &'a Graph,
    pairs: &'a [(Vertex, Vertex)],
    /// Per pair: maximum allowed edge count; `None` overall if some pair is
    /// disconnected.
    limits: Option<Vec<usize>>,
    dist_to_t: Vec<Vec<Option<u32>>>,
    cap: usize,
    visited: usize,
}

impl<'a> RawSearch<'a> {
    fn new(g: &'a Graph, pairs: &'a [(Vertex, Vertex)], slack: u32, cap: usize) -> Self {
        let dist_to_t: Vec<Vec<Option<u32>>> =
            pairs.iter().map(|&(_, t)| bfs_levels(g, t)).collect();
        let mut limits = Some(Vec::new());
        for (i, &(s, _)) in pairs.iter().enumerate() {
            match dist_to_t[i][s] {
                Some(d) => {
                    if let Some(ls) = &mut limits {
                        ls.push((d + slack) as usize);
                    }
                }
                None => limits = None,
            }
        }
        RawSearch { g, pairs, limits, dist_to_t, cap, visited: 0 }
    }

    /// Backtracks over pairs; `found` returns true to stop the search.
    fn assign(
        &mut self,
        idx: usize,
        chosen: &mut Vec<Vec<Vertex>>,
        used_any: &mut BTreeSet<Vertex>,
        used_internal: &mut BTreeSet<Vertex>,
        found: &mut dyn FnMut(&[Vec<Vertex>]) -> bool,
    ) -> Result<bool, OracleError> {
        if idx == self.pairs.len() {
            return Ok(found(chosen));
        }
        let (s, t) = self.pairs[idx];
        if used_internal.contains(&s) || used_internal.contains(&t) {
            return Ok(false);
        }
        let mut path = vec![s];
        self.extend(idx, &mut path, chosen, used_any, used_internal, found)
    }

    fn extend(
        &mut self,
        idx: usize,
        path: &mut Vec<Vertex>,
        chosen: &mut Vec<Vec<Vertex>>,
        used_any: &mut BTreeSet<Vertex>,
        used_internal: &mut BTreeSet<Vertex>,
        found: &mut dyn FnMut(&[Vec<Vertex>]) -> bool,
    ) -> Result<bool, OracleError> {
        let u = *path.last().unwrap();
        let (_, t) = self.pairs[idx];
        let limit = self.limits.as_ref().unwrap()[idx];
        if u == t {
            self.visited += 1;
            if self.visited > self.cap {
                return Err(OracleError::EnumerationCapExceeded { cap: self.cap });
            }
            // Commit this path and move to the next pair.
            let internal: Vec<Vertex> =
                if path.len() > 2 { path[1..path.len() - 1].to_vec() } else { Vec::new() };
            let added_any: Vec<Vertex> =
                path.iter().copied().filter(|v| used_any.insert(*v)).collect();
            let added_internal: Vec<Vertex> =
                internal.iter().copied().filter(|v| used_internal.insert(*v)).collect();
            chosen.push(path.clone());
            let stop = self.assign(idx + 1, chosen, used_any, used_internal, found)?;
            chosen.pop();
            for v in added_any {
                used_any.remove(&v);
            }
            for v in added_internal {
                used_internal.remove(&v);
            }
            if stop {
                return Ok(true);
            }
            // A shorter path may also continue past t when slack allows, but a
            // path visiting t twice is never simple, so stop extending here.
            return Ok(false);
        }
        if path.len() - 1 >= limit {
            return Ok(false);
        }
        for n in 0..self.g.neighbours(u).len() {
            let v = self.g.neighbours(u)[n];
            // Internal vertices must stay clear of every earlier path; the
            // target may coincide with an earlier terminal.
            if path.contains(&v) {
                continue;
            }
            if v == t {
                if used_internal.contains(&v) {
                    continue;
                }
            } else if used_any.contains(&v) {
                continue;
            }
            // Pruning: remaining distance must fit the budget.
            let Some(rest) = self.dist_to_t[idx][v] else { continue };
            if path.len() + rest as usize > limit {
                continue;
            }
            path.push(v);
            let stop = self.extend(idx, path, chosen, used_any, used_internal, found)?;
            path.pop();
            if stop {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Exhaustive search over colour paths: each request is answered by a path of
/// its own colour avoiding its forbidden components, and the tuple obeys the
/// sharing rule. Ground truth for the layered problem.
pub fn oracle_solve_coloured(
    sg: &ShortestGraph,
    requests: &[Request],
    cap: usize,
) -> Result<Option<Vec<ColouredPath>>, OracleError> {
    let mut first = None;
    for_each_coloured_solution(sg, requests, cap, &mut |sol| {
        first = Some(sol.to_vec());
        true
    })?;
    Ok(first)
}

/// Every coloured solution of a tiny instance.
pub fn all_coloured_solutions(
    sg: &ShortestGraph,
    requests: &[Request],
    cap: usize,
) -> Result<Vec<Vec<ColouredPath>>, OracleError> {
    let mut out = Vec::new();
    for_each_coloured_solution(sg, requests, cap, &mut |sol| {
        out.push(sol.to_vec());
        false
    })?;
    Ok(out)
}

fn for_each_coloured_solution(
    sg: &ShortestGraph,
    requests: &[Request],
    cap: usize,
    found: &mut dyn FnMut(&[ColouredPath]) -> bool,
) -> Result<(), OracleError> {
    // Candidate colour paths per request, enumerated up front.
    let mut candidates: Vec<Vec<Vec<Vertex>>> = Vec::new();
    for req in requests {
        let paths = colour_paths_between(
            sg,
            req.colour,
            req.source,
            req.target,
            &req.forbidden_vertices(),
            cap,
        );
        if paths.len() >= cap {
            return Err(OracleError::EnumerationCapExceeded { cap });
        }
        if paths.is_empty() {
            return Ok(());
        }
        candidates.push(paths);
    }
    let mut visited = 0usize;
    let mut chosen: Vec<Vec<Vertex>> = Vec::new();
    coloured_assign(sg, requests, &candidates, cap, &mut visited, &mut chosen, found)?;
    Ok(())
}

fn coloured_assign(
    sg: &ShortestGraph,
    requests: &[Request],
    candidates: &[Vec<Vec<Vertex>>],
    cap: usize,
    visited: &mut usize,
    chosen: &mut Vec<Vec<Vertex>>,
    found: &mut dyn FnMut(&[ColouredPath]) -> bool,
) -> Result<bool, OracleError> {
    let idx = chosen.len();
    if idx == requests.len() {
        let sol: Vec<ColouredPath> = chosen
            .iter()
            .zip(requests)
            .map(|(vs, req)| {
                ColouredPath::new(sg, req.colour, vs.clone()).expect("candidates are colour paths")
            })
            .collect();
        return Ok(found(&sol));
    }
    'outer: for cand in &candidates[idx] {
        *visited += 1;
        if *visited > cap {
            return Err(OracleError::EnumerationCapExceeded { cap });
        }
        // Sharing rule against every committed path.
        for prev in chosen.iter() {
            for &v in cand {
                if prev.contains(&v) {
                    let term_new = v == cand[0] || v == *cand.last().unwrap();
                    let term_prev = v == prev[0] || v == *prev.last().unwrap();
                    if !(term_new && term_prev) {
                        continue 'outer;
                    }
                }
            }
        }
        chosen.push(cand.clone());
        let stop = coloured_assign(sg, requests, candidates, cap, visited, chosen, found)?;
        chosen.pop();
        if stop {
            return Ok(true);
        }
    }
    Ok(false)
}

/// All directed `source`–`target` paths of a DAG. Acyclicity keeps the DFS
/// finite without a visited set.
pub fn dag_paths_between(dag: &Digraph, source: Vertex, target: Vertex) -> Vec<Vec<Vertex>> {
    let mut out = Vec::new();
    let mut path = vec![source];
    dag_paths_rec(dag, target, &mut path, &mut out);
    out
}

fn dag_paths_rec(dag: &Digraph, target: Vertex, path: &mut Vec<Vertex>, out: &mut Vec<Vec<Vertex>>) {
    let u = *path.last().unwrap();
    if u == target {
        out.push(path.clone());
        return;
    }
    for &v in dag.out_neighbours(u) {
        path.push(v);
        dag_paths_rec(dag, target, path, out);
        path.pop();
    }
}

/// Brute force for vertex-disjoint directed linkages: tries every tuple of
/// directed paths, requiring plain disjointness (terminals distinct).
pub fn oracle_solve_dag(dag: &Digraph, pairs: &[(Vertex, Vertex)]) -> Option<Vec<Vec<Vertex>>> {
    let per_pair: Vec<Vec<Vec<Vertex>>> =
        pairs.iter().map(|&(s, t)| dag_paths_between(dag, s, t)).collect();
    if per_pair.iter().any(|ps| ps.is_empty()) {
        return None;
    }
    let mut chosen: Vec<Vec<Vertex>> = Vec::new();
    let mut used = BTreeSet::new();
    dag_assign(&per_pair, 0, &mut chosen, &mut used)
}

fn dag_assign(
    per_pair: &[Vec<Vec<Vertex>>],
    idx: usize,
    chosen: &mut Vec<Vec<Vertex>>,
    used: &mut BTreeSet<Vertex>,
) -> Option<Vec<Vec<Vertex>>> {
    if idx == per_pair.len() {
        return Some(chosen.clone());
    }
    'cands: for cand in &per_pair[idx] {
        for &v in cand {
            if used.contains(&v) {
                continue 'cands;
            }
        }
        for &v in cand {
            used.insert(v);
        }
        chosen.push(cand.clone());
        if let Some(sol) = dag_assign(per_pair, idx + 1, chosen, used) {
            return Some(sol);
        }
        chosen.pop();
        for v in cand {
            used.remove(v);
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolutionViolation {
    WrongCount { expected: usize, actual: usize },
    EmptyPath { index: usize },
    WrongEndpoints { index: usize },
    NotAPath { index: usize },
    TooLong { index: usize, length: usize, limit: usize },
    NotAColourPath { index: usize },
    ForbiddenVertexUsed { index: usize, vertex: Vertex },
    IllegalSharing { first: usize, second: usize, vertex: Vertex },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolutionReport {
    pub violations: Vec<SolutionViolation>,
}

impl SolutionReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Validates a tuple of raw paths against pairs with slack: endpoints,
/// simplicity, length bounds, and the sharing rule.
pub fn check_solution(
    g: &Graph,
    pairs: &[(Vertex, Vertex)],
    paths: &[Vec<Vertex>],
    slack: u32,
) -> SolutionReport {
    let mut violations = Vec::new();
    if paths.len() != pairs.len() {
        violations.push(SolutionViolation::WrongCount {
            expected: pairs.len(),
            actual: paths.len(),
        });
        return SolutionReport { violations };
    }
    for (index, (path, &(s, t))) in paths.iter().zip(pairs).enumerate() {
        if path.is_empty() {
            violations.push(SolutionViolation::EmptyPath { index });
            continue;
        }
        if path[0] != s || *path.last().unwrap() != t {
            violations.push(SolutionViolation::WrongEndpoints { index });
        }
        let simple = path.iter().collect::<BTreeSet<_>>().len() == path.len();
        let adjacent = path
            .windows(2)
            .all(|w| w[0] < g.vertex_count() && w[1] < g.vertex_count() && g.has_edge(w[0], w[1]));
        if !simple || !adjacent || path.iter().any(|&v| v >= g.vertex_count()) {
            violations.push(SolutionViolation::NotAPath { index });
            continue;
        }
        match bfs_levels(g, s)[t] {
            Some(d) => {
                let limit = (d + slack) as usize;
                if path.len() - 1 > limit {
                    violations.push(SolutionViolation::TooLong {
                        index,
                        length: path.len() - 1,
                        limit,
                    });
                }
            }
            None => violations.push(SolutionViolation::WrongEndpoints { index }),
        }
    }
    violations.extend(sharing_violations(paths));
    SolutionReport { violations }
}

/// Validates a coloured solution: colour paths with the right endpoints,
/// forbidden components avoided, and the sharing rule.
pub fn check_solution_coloured(
    sg: &ShortestGraph,
    requests: &[Request],
    paths: &[ColouredPath],
) -> SolutionReport {
    let mut violations = Vec::new();
    if paths.len() != requests.len() {
        violations.push(SolutionViolation::WrongCount {
            expected: requests.len(),
            actual: paths.len(),
        });
        return SolutionReport { violations };
    }
    for (index, (path, req)) in paths.iter().zip(requests).enumerate() {
        if path.colour() != req.colour || !sg.is_colour_path(req.colour, path.vertices()) {
            violations.push(SolutionViolation::NotAColourPath { index });
            continue;
        }
        if path.source() != req.source || path.target() != req.target {
            violations.push(SolutionViolation::WrongEndpoints { index });
        }
        let forbidden = req.forbidden_vertices();
        for &v in path.vertices() {
            if forbidden.contains(&v) {
                violations.push(SolutionViolation::ForbiddenVertexUsed { index, vertex: v });
            }
        }
    }
    let raw: Vec<Vec<Vertex>> = paths.iter().map(|p| p.vertices().to_vec()).collect();
    violations.extend(sharing_violations(&raw));
    SolutionReport { violations }
}
