//! Seeded random generators for test sweeps and the CLI `gen` command.
//! All functions take the RNG by value reference so byte-identical output
//! follows from the seed alone.

use rand::Rng;

use crate::graph::{Colour, Graph, Request, ShortestGraph, Vertex};
use crate::layering::{bfs_levels, build_shortest_graph};

/// Erdős–Rényi graph: each of the n(n-1)/2 possible edges appears
/// independently with probability `p`.
pub fn random_graph(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                g.add_edge(u, v);
            }
        }
    }
    g
}

/// Random graph forced connected by threading a random spanning tree
/// through it first. Denser than plain `random_graph` at the same `p`.
pub fn random_connected_graph(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut g = random_graph(n, p, rng);
    for v in 1..n {
        let u = rng.gen_range(0..v);
        g.add_edge(u, v);
    }
    g
}

/// A raw problem instance: graph, one layering source per colour, and
/// request triples. Targets are always reachable from their colour source,
/// so infeasibility in sweeps comes from path interaction, not from
/// disconnection; targets may repeat across requests and may equal the
/// source (trivial requests).
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub graph: Graph,
    pub sources: Vec<Vertex>,
    pub requests: Vec<(Vertex, Vertex, Colour)>,
}

impl RandomInstance {
    pub fn shortest_graph(&self) -> ShortestGraph {
        build_shortest_graph(&self.graph, &self.sources)
    }

    pub fn requests(&self) -> Vec<Request> {
        self.requests.iter().map(|&(s, t, c)| Request::new(s, t, c)).collect()
    }
}

/// Random instance with `k` colours and `l >= k` requests; every colour is
/// used by at least one request and each request starts at its colour's
/// layering source.
pub fn random_instance(n: usize, k: usize, l: usize, p: f64, rng: &mut impl Rng) -> RandomInstance {
    assert!(n >= 1 && k >= 1 && l >= k, "need at least one request per colour");
    let graph = random_graph(n, p, rng);
    let sources: Vec<Vertex> = (0..k).map(|_| rng.gen_range(0..n)).collect();
    let mut requests = Vec::new();
    for i in 0..l {
        let colour = if i < k { i } else { rng.gen_range(0..k) };
        let s = sources[colour];
        let levels = bfs_levels(&graph, s);
        let reachable: Vec<Vertex> = (0..n).filter(|&v| levels[v].is_some()).collect();
        let t = reachable[rng.gen_range(0..reachable.len())];
        requests.push((s, t, colour));
    }
    RandomInstance { graph, sources, requests }
}

/// Random instance with pairwise distinct terminals across requests, ready
/// for the blind-case solver without splitting. Sources need not be the
/// layering roots; each request only needs a monotone route in its colour.
/// Returns `None` when distinct terminals cannot be placed (tiny graphs).
pub fn random_blind_instance(
    n: usize,
    k: usize,
    l: usize,
    p: f64,
    rng: &mut impl Rng,
) -> Option<(ShortestGraph, Vec<Request>)> {
    let g = random_graph(n, p, rng);
    let sources: Vec<Vertex> = (0..k).map(|_| rng.gen_range(0..n)).collect();
    let sg = build_shortest_graph(&g, &sources);
    let reaches: Vec<crate::reach::ReachIndex> = (0..k)
        .map(|c| crate::reach::ReachIndex::build(&sg, c, &Default::default()))
        .collect();
    let mut used: Vec<bool> = vec![false; n];
    let mut reqs = Vec::with_capacity(l);
    'requests: for i in 0..l {
        let colour = if i < k { i } else { rng.gen_range(0..k) };
        for _ in 0..40 {
            let s = rng.gen_range(0..n);
            if used[s] || !sg.is_levelled(colour, s) {
                continue;
            }
            let targets: Vec<Vertex> = (0..n)
                .filter(|&t| reaches[colour].can_reach(s, t) && (t == s || !used[t]))
                .collect();
            if targets.is_empty() {
                continue;
            }
            let t = targets[rng.gen_range(0..targets.len())];
            used[s] = true;
            used[t] = true;
            reqs.push(Request::new(s, t, colour));
            continue 'requests;
        }
        return None;
    }
    Some((sg, reqs))
}

/// Random DAG on vertices 0..n with all arcs oriented low → high, patched so
/// that every vertex is reachable from vertex 0.
pub fn random_dag(n: usize, p: f64, rng: &mut impl Rng) -> crate::graph::Digraph {
    let mut d = crate::graph::Digraph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                d.add_arc(u, v);
            }
        }
    }
    for v in 1..n {
        let mut reachable = vec![false; n];
        reachable[0] = true;
        for u in 0..n {
            if reachable[u] {
                for &w in d.out_neighbours(u) {
                    reachable[w] = true;
                }
            }
        }
        if !reachable[v] {
            let below: Vec<Vertex> = (0..v).filter(|&u| reachable[u]).collect();
            d.add_arc(below[rng.gen_range(0..below.len())], v);
        }
    }
    d
}

/// `l` request pairs over distinct vertices of the DAG, biased towards the
/// arc direction so a fair share of instances is feasible.
pub fn random_dag_pairs(
    dag: &crate::graph::Digraph,
    l: usize,
    rng: &mut impl Rng,
) -> Option<Vec<(Vertex, Vertex)>> {
    let n = dag.vertex_count();
    if 2 * l > n {
        return None;
    }
    let mut verts: Vec<Vertex> = (0..n).collect();
    for i in 0..2 * l {
        let j = rng.gen_range(i..n);
        verts.swap(i, j);
    }
    let mut pairs = Vec::with_capacity(l);
    for c in verts[..2 * l].chunks(2) {
        let (a, b) = (c[0], c[1]);
        // Arcs run low id → high id, so ordering the pair that way makes it
        // plausibly satisfiable.
        let (s, t) = if rng.gen_bool(0.8) { (a.min(b), a.max(b)) } else { (a.max(b), a.min(b)) };
        pairs.push((s, t));
    }
    Some(pairs)
}

/// Two-source layered graphs with a high rate of doubly-coloured structure:
/// an even cycle with (usually) antipodal sources, plus a few chords and
/// pendant vertices. Used to feed the conflict sweeps enough positives.
pub fn conflict_rich_graph(rng: &mut impl Rng) -> ShortestGraph {
    let half = rng.gen_range(2..6);
    let cycle = 2 * half;
    let pendants = rng.gen_range(0..3);
    let n = cycle + pendants;
    let mut g = Graph::new(n);
    for v in 0..cycle {
        g.add_edge(v, (v + 1) % cycle);
    }
    for _ in 0..rng.gen_range(0..3) {
        let u = rng.gen_range(0..cycle);
        let v = rng.gen_range(0..cycle);
        if u != v {
            g.add_edge(u, v);
        }
    }
    for w in cycle..n {
        let u = rng.gen_range(0..w);
        g.add_edge(u, w);
    }
    let s0 = rng.gen_range(0..cycle);
    let mut s1 = if rng.gen_bool(0.7) { (s0 + half) % cycle } else { rng.gen_range(0..n) };
    if s1 == s0 {
        s1 = (s0 + 1) % n;
    }
    build_shortest_graph(&g, &[s0, s1])
}
