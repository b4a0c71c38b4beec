//! Core model: simple undirected graphs, per-colour level structures, and the
//! monotone coloured paths the solvers work with.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};
use std::sync::Arc;

use thiserror::Error;

pub type Vertex = usize;
pub type Colour = usize;

/// Simple undirected graph over dense vertex ids `0..n`.
///
/// No self-loops, no multi-edges. Adjacency lists are kept sorted so every
/// traversal in the crate is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(Vertex, Vertex)>,
    adj: Vec<Vec<Vertex>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph {
            n,
            edges: BTreeSet::new(),
            adj: vec![Vec::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (Vertex, Vertex)>) -> Self {
        let mut g = Graph::new(n);
        for (u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Inserts the edge `{u, v}`; returns false if it was already present.
    pub fn add_edge(&mut self, u: Vertex, v: Vertex) -> bool {
        assert!(u < self.n && v < self.n, "edge endpoint out of range");
        assert_ne!(u, v, "self-loops are not allowed");
        let key = (u.min(v), u.max(v));
        if !self.edges.insert(key) {
            return false;
        }
        let iu = self.adj[u].partition_point(|&w| w < v);
        self.adj[u].insert(iu, v);
        let iv = self.adj[v].partition_point(|&w| w < u);
        self.adj[v].insert(iv, u);
        true
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u != v && self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn neighbours(&self, u: Vertex) -> &[Vertex] {
        &self.adj[u]
    }

    /// Edges as normalised `(low, high)` pairs in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.edges.iter().copied()
    }
}

/// How two vertices relate in one colour's level order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelRelation {
    Less,
    Equal,
    Greater,
    /// At least one of the two vertices carries no level for the colour.
    Incomparable,
}

/// A violation found by [`ShortestGraph::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ShortestGraphViolation {
    /// The edge skips a level of the given colour (level gap > 1).
    LevelSkip { edge: (Vertex, Vertex), colour: Colour },
    /// No colour places the edge between two consecutive levels.
    NoSeparatingColour { edge: (Vertex, Vertex) },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<ShortestGraphViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// An undirected graph together with `k` partial level assignments, one per
/// colour. Levels come from BFS layerings; a vertex missing from a colour's
/// BFS tree carries no level for that colour.
///
/// A valid instance satisfies, for every edge: the endpoint levels of any
/// colour that defines both differ by at most one, and at least one colour
/// separates the endpoints into consecutive levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShortestGraph {
    graph: Graph,
    levels: Vec<Vec<Option<u32>>>,
}

impl ShortestGraph {
    pub fn new(graph: Graph, levels: Vec<Vec<Option<u32>>>) -> Self {
        for per_colour in &levels {
            assert_eq!(per_colour.len(), graph.vertex_count(), "level table shape");
        }
        ShortestGraph { graph, levels }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn colour_count(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, colour: Colour, v: Vertex) -> Option<u32> {
        self.levels[colour][v]
    }

    pub fn is_levelled(&self, colour: Colour, v: Vertex) -> bool {
        self.levels[colour][v].is_some()
    }

    pub fn levels_of(&self, colour: Colour) -> &[Option<u32>] {
        &self.levels[colour]
    }

    /// Signed level difference `level(v) - level(u)`, if both are levelled.
    pub fn level_gap(&self, colour: Colour, u: Vertex, v: Vertex) -> Option<i64> {
        match (self.level(colour, u), self.level(colour, v)) {
            (Some(lu), Some(lv)) => Some(lv as i64 - lu as i64),
            _ => None,
        }
    }

    /// Compares `u` and `v` in the partial order of `colour`.
    pub fn compare_in_colour(&self, colour: Colour, u: Vertex, v: Vertex) -> LevelRelation {
        match (self.level(colour, u), self.level(colour, v)) {
            (Some(lu), Some(lv)) if lu < lv => LevelRelation::Less,
            (Some(lu), Some(lv)) if lu > lv => LevelRelation::Greater,
            (Some(_), Some(_)) => LevelRelation::Equal,
            _ => LevelRelation::Incomparable,
        }
    }

    /// True iff both endpoints are levelled for `colour` and exactly one
    /// level apart, i.e. the edge can appear on a colour path.
    pub fn is_colour_edge(&self, colour: Colour, u: Vertex, v: Vertex) -> bool {
        self.graph.has_edge(u, v) && self.level_gap(colour, u, v).map(i64::abs) == Some(1)
    }

    /// Neighbours of `u` exactly one level above it in `colour`.
    pub fn colour_out_neighbours<'a>(
        &'a self,
        colour: Colour,
        u: Vertex,
    ) -> impl Iterator<Item = Vertex> + 'a {
        self.graph
            .neighbours(u)
            .iter()
            .copied()
            .filter(move |&v| self.level_gap(colour, u, v) == Some(1))
    }

    /// True iff `vertices` is a nonempty sequence of adjacent vertices whose
    /// `colour` level increases by exactly one per step. A single levelled
    /// vertex counts as a path of every colour that levels it; repeats are
    /// impossible because the level strictly increases.
    pub fn is_colour_path(&self, colour: Colour, vertices: &[Vertex]) -> bool {
        if vertices.is_empty() || colour >= self.colour_count() {
            return false;
        }
        if vertices.iter().any(|&v| v >= self.vertex_count()) {
            return false;
        }
        if !self.is_levelled(colour, vertices[0]) {
            return false;
        }
        vertices.windows(2).all(|w| {
            self.graph.has_edge(w[0], w[1]) && self.level_gap(colour, w[0], w[1]) == Some(1)
        })
    }

    /// Checks the two shortest-graph edge invariants and reports every edge
    /// and clause that fails.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for (u, v) in self.graph.edges() {
            let mut separated = false;
            for colour in 0..self.colour_count() {
                match self.level_gap(colour, u, v).map(i64::abs) {
                    Some(1) => separated = true,
                    Some(d) if d > 1 => {
                        violations.push(ShortestGraphViolation::LevelSkip { edge: (u, v), colour })
                    }
                    _ => {}
                }
            }
            if !separated {
                violations.push(ShortestGraphViolation::NoSeparatingColour { edge: (u, v) });
            }
        }
        ValidationReport { violations }
    }

    /// Vertices levelled in `colour`, sorted by ascending level (ties by id).
    /// This is a topological order of the colour's oriented edges.
    pub fn colour_topological(&self, colour: Colour) -> Vec<Vertex> {
        let mut vs: Vec<Vertex> =
            (0..self.vertex_count()).filter(|&v| self.is_levelled(colour, v)).collect();
        vs.sort_by_key(|&v| (self.level(colour, v).unwrap(), v));
        vs
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("vertex sequence is not a colour-{colour} path")]
    NotAColourPath { colour: Colour },
    #[error("path partition does not concatenate to the whole path")]
    BadPartition,
    #[error("parts of a partition may share chaining endpoints only")]
    PartsNotDisjoint { vertex: Vertex },
}

/// A path oriented from low to high level in its colour. Always nonempty and
/// simple; a single levelled vertex is the trivial path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColouredPath {
    colour: Colour,
    vertices: Vec<Vertex>,
}

impl ColouredPath {
    pub fn new(
        sg: &ShortestGraph,
        colour: Colour,
        vertices: Vec<Vertex>,
    ) -> Result<Self, PathError> {
        if !sg.is_colour_path(colour, &vertices) {
            return Err(PathError::NotAColourPath { colour });
        }
        Ok(ColouredPath { colour, vertices })
    }

    pub fn colour(&self) -> Colour {
        self.colour
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Vertex> {
        self.vertices
    }

    pub fn source(&self) -> Vertex {
        self.vertices[0]
    }

    pub fn target(&self) -> Vertex {
        *self.vertices.last().unwrap()
    }

    /// Number of edges; equals the colour level gap between the endpoints.
    pub fn len_edges(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn internal_vertices(&self) -> &[Vertex] {
        if self.vertices.len() <= 2 {
            &[]
        } else {
            &self.vertices[1..self.vertices.len() - 1]
        }
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.vertices.contains(&v)
    }
}

/// Splitting a path at interior vertices: consecutive parts share exactly the
/// chaining vertex and concatenate back to the whole path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathPartition {
    pub whole: ColouredPath,
    pub parts: Vec<ColouredPath>,
}

impl PathPartition {
    pub fn new(whole: ColouredPath, parts: Vec<ColouredPath>) -> Result<Self, PathError> {
        if parts.is_empty() {
            return Err(PathError::BadPartition);
        }
        let mut concat: Vec<Vertex> = Vec::new();
        for part in &parts {
            match concat.last() {
                None => concat.extend_from_slice(part.vertices()),
                Some(&last) => {
                    if part.source() != last {
                        return Err(PathError::BadPartition);
                    }
                    concat.extend_from_slice(&part.vertices()[1..]);
                }
            }
        }
        if concat != whole.vertices() {
            return Err(PathError::BadPartition);
        }
        // Chaining junctions are the only permitted repeats; since the whole
        // path is simple, it remains to check nothing else is shared.
        for (a, pa) in parts.iter().enumerate() {
            for pb in parts.iter().skip(a + 1) {
                for &v in pb.vertices() {
                    if pa.contains(v) && v != pa.target() {
                        return Err(PathError::PartsNotDisjoint { vertex: v });
                    }
                }
            }
        }
        Ok(PathPartition { whole, parts })
    }
}

/// A simple directed graph, used by the DAG solver and the reductions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    arcs: BTreeSet<(Vertex, Vertex)>,
    out_adj: Vec<Vec<Vertex>>,
    in_adj: Vec<Vec<Vertex>>,
}

impl Digraph {
    pub fn new(n: usize) -> Self {
        Digraph {
            n,
            arcs: BTreeSet::new(),
            out_adj: vec![Vec::new(); n],
            in_adj: vec![Vec::new(); n],
        }
    }

    pub fn from_arcs(n: usize, arcs: impl IntoIterator<Item = (Vertex, Vertex)>) -> Self {
        let mut d = Digraph::new(n);
        for (u, v) in arcs {
            d.add_arc(u, v);
        }
        d
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    /// Inserts the arc `u -> v`; returns false if it was already present.
    pub fn add_arc(&mut self, u: Vertex, v: Vertex) -> bool {
        assert!(u < self.n && v < self.n, "arc endpoint out of range");
        assert_ne!(u, v, "self-loops are not allowed");
        if !self.arcs.insert((u, v)) {
            return false;
        }
        let iu = self.out_adj[u].partition_point(|&w| w < v);
        self.out_adj[u].insert(iu, v);
        let iv = self.in_adj[v].partition_point(|&w| w < u);
        self.in_adj[v].insert(iv, u);
        true
    }

    pub fn has_arc(&self, u: Vertex, v: Vertex) -> bool {
        self.arcs.contains(&(u, v))
    }

    pub fn out_neighbours(&self, u: Vertex) -> &[Vertex] {
        &self.out_adj[u]
    }

    pub fn in_neighbours(&self, u: Vertex) -> &[Vertex] {
        &self.in_adj[u]
    }

    pub fn arcs(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.arcs.iter().copied()
    }

    /// Kahn's algorithm with smallest-id tie-breaking; `None` on a cycle.
    pub fn topological_order(&self) -> Option<Vec<Vertex>> {
        let mut indeg: Vec<usize> = (0..self.n).map(|v| self.in_adj[v].len()).collect();
        let mut heap: BinaryHeap<Reverse<Vertex>> =
            (0..self.n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(self.n);
        while let Some(Reverse(v)) = heap.pop() {
            order.push(v);
            for &w in &self.out_adj[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    heap.push(Reverse(w));
                }
            }
        }
        (order.len() == self.n).then_some(order)
    }
}

pub type ComponentRef = Arc<crate::bicolored::BiColouredComponent>;

/// One routing demand: a colour path from `source` to `target` that avoids
/// every vertex of the listed bi-coloured components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Request {
    pub source: Vertex,
    pub target: Vertex,
    pub colour: Colour,
    pub forbidden: Vec<ComponentRef>,
}

impl Request {
    pub fn new(source: Vertex, target: Vertex, colour: Colour) -> Self {
        Request { source, target, colour, forbidden: Vec::new() }
    }

    /// Union of the forbidden components' vertex sets.
    pub fn forbidden_vertices(&self) -> BTreeSet<Vertex> {
        let mut set = BTreeSet::new();
        for comp in &self.forbidden {
            set.extend(comp.vertices.iter().copied());
        }
        set
    }

    /// Checks the request invariants against a shortest graph: terminals
    /// levelled with `source` no higher than `target`, and every forbidden
    /// component carrying the request colour.
    pub fn validate(&self, sg: &ShortestGraph) -> Result<(), RequestError> {
        if self.colour >= sg.colour_count() {
            return Err(RequestError::BadColour { colour: self.colour });
        }
        for &v in [self.source, self.target].iter() {
            if v >= sg.vertex_count() || !sg.is_levelled(self.colour, v) {
                return Err(RequestError::UnlevelledTerminal { vertex: v, colour: self.colour });
            }
        }
        if sg.compare_in_colour(self.colour, self.source, self.target) == LevelRelation::Greater {
            return Err(RequestError::ReversedTerminals { s: self.source, t: self.target });
        }
        for comp in &self.forbidden {
            if comp.colour_a != self.colour && comp.colour_b != self.colour {
                return Err(RequestError::ForeignForbiddenComponent { colour: self.colour });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RequestError {
    #[error("request colour {colour} out of range")]
    BadColour { colour: Colour },
    #[error("terminal {vertex} carries no level for colour {colour}")]
    UnlevelledTerminal { vertex: Vertex, colour: Colour },
    #[error("source {s} lies above target {t} in the request colour")]
    ReversedTerminals { s: Vertex, t: Vertex },
    #[error("forbidden component does not carry the request colour {colour}")]
    ForeignForbiddenComponent { colour: Colour },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layering::build_shortest_graph;

    fn triangle() -> Graph {
        Graph::from_edges(3, [(0, 1), (0, 2), (1, 2)])
    }

    #[test]
    fn add_edge_dedups_and_sorts() {
        let mut g = Graph::new(4);
        assert!(g.add_edge(2, 0));
        assert!(g.add_edge(0, 3));
        assert!(!g.add_edge(0, 2));
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.neighbours(0), &[2, 3]);
        assert!(g.has_edge(3, 0));
        assert!(!g.has_edge(1, 2));
    }

    #[test]
    #[should_panic(expected = "self-loops")]
    fn add_edge_rejects_self_loop() {
        let mut g = Graph::new(2);
        g.add_edge(1, 1);
    }

    #[test]
    fn validate_flags_unseparated_edge() {
        // Triangle levelled by BFS from vertex 0 only: edge {1,2} joins two
        // vertices of level 1 and no colour separates it.
        let g = triangle();
        let levels = vec![vec![Some(0), Some(1), Some(1)]];
        let sg = ShortestGraph::new(g, levels);
        let report = sg.validate();
        assert_eq!(
            report.violations,
            vec![ShortestGraphViolation::NoSeparatingColour { edge: (1, 2) }]
        );
        assert!(!report.is_valid());
    }

    #[test]
    fn validate_accepts_cycle_layering() {
        // 4-cycle 0-1-2-3 with BFS levels from vertex 0.
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)]);
        let levels = vec![vec![Some(0), Some(1), Some(2), Some(1)]];
        let sg = ShortestGraph::new(g, levels);
        assert!(sg.validate().is_valid());
    }

    #[test]
    fn validate_reports_level_skip() {
        let g = Graph::from_edges(2, [(0, 1)]);
        let sg = ShortestGraph::new(g, vec![vec![Some(0), Some(2)]]);
        let report = sg.validate();
        assert!(report
            .violations
            .contains(&ShortestGraphViolation::LevelSkip { edge: (0, 1), colour: 0 }));
        // The same edge also lacks a separating colour.
        assert!(report
            .violations
            .contains(&ShortestGraphViolation::NoSeparatingColour { edge: (0, 1) }));
    }

    #[test]
    fn compare_in_colour_cases() {
        let g = triangle();
        let sg = ShortestGraph::new(g, vec![vec![Some(0), Some(1), None]]);
        assert_eq!(sg.compare_in_colour(0, 0, 1), LevelRelation::Less);
        assert_eq!(sg.compare_in_colour(0, 1, 0), LevelRelation::Greater);
        assert_eq!(sg.compare_in_colour(0, 1, 1), LevelRelation::Equal);
        assert_eq!(sg.compare_in_colour(0, 0, 2), LevelRelation::Incomparable);
        assert_eq!(sg.compare_in_colour(0, 2, 2), LevelRelation::Incomparable);
    }

    #[test]
    fn colour_path_checks() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]);
        let sg = build_shortest_graph(&g, &[0]);
        assert!(sg.is_colour_path(0, &[0, 1, 2, 3]));
        assert!(sg.is_colour_path(0, &[1, 2]));
        assert!(sg.is_colour_path(0, &[2]));
        // Wrong direction, gaps, and non-edges all fail.
        assert!(!sg.is_colour_path(0, &[2, 1]));
        assert!(!sg.is_colour_path(0, &[0, 2]));
        assert!(!sg.is_colour_path(0, &[]));
    }

    #[test]
    fn single_vertex_path_needs_a_level() {
        let g = Graph::from_edges(3, [(0, 1)]);
        let sg = build_shortest_graph(&g, &[0]);
        assert!(sg.is_colour_path(0, &[1]));
        assert!(!sg.is_colour_path(0, &[2])); // vertex 2 is unreachable
    }

    #[test]
    fn coloured_path_accessors() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]);
        let sg = build_shortest_graph(&g, &[0]);
        let p = ColouredPath::new(&sg, 0, vec![0, 1, 2]).unwrap();
        assert_eq!(p.source(), 0);
        assert_eq!(p.target(), 2);
        assert_eq!(p.len_edges(), 2);
        assert_eq!(p.internal_vertices(), &[1]);
        assert!(ColouredPath::new(&sg, 0, vec![2, 1]).is_err());
    }

    #[test]
    fn concatenating_colour_paths_at_a_shared_vertex() {
        // Sharing exactly the endpoint, the concatenation is again a colour
        // path: levels keep increasing through the junction.
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)]);
        let sg = build_shortest_graph(&g, &[0]);
        let front = [0, 1, 2];
        let back = [2, 3, 4];
        let mut joined = front.to_vec();
        joined.extend_from_slice(&back[1..]);
        assert!(sg.is_colour_path(0, &front));
        assert!(sg.is_colour_path(0, &back));
        assert!(sg.is_colour_path(0, &joined));
    }

    #[test]
    fn path_length_equals_level_gap() {
        let g = Graph::from_edges(6, [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (4, 5)]);
        let sg = build_shortest_graph(&g, &[0]);
        for path in [vec![0, 1, 3, 4], vec![0, 2, 3, 4, 5], vec![3, 4]] {
            assert!(sg.is_colour_path(0, &path));
            let gap = sg.level_gap(0, path[0], *path.last().unwrap()).unwrap();
            assert_eq!(path.len() as i64 - 1, gap);
        }
    }

    #[test]
    fn colour_topological_orders_by_level() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]);
        let sg = build_shortest_graph(&g, &[1]);
        assert_eq!(sg.colour_topological(0), vec![1, 0, 2, 3]);
    }

    #[test]
    fn partition_roundtrip_and_rejection() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)]);
        let sg = build_shortest_graph(&g, &[0]);
        let whole = ColouredPath::new(&sg, 0, vec![0, 1, 2, 3, 4]).unwrap();
        let parts = vec![
            ColouredPath::new(&sg, 0, vec![0, 1, 2]).unwrap(),
            ColouredPath::new(&sg, 0, vec![2, 3]).unwrap(),
            ColouredPath::new(&sg, 0, vec![3, 4]).unwrap(),
        ];
        assert!(PathPartition::new(whole.clone(), parts).is_ok());

        let bad = vec![
            ColouredPath::new(&sg, 0, vec![0, 1]).unwrap(),
            ColouredPath::new(&sg, 0, vec![2, 3, 4]).unwrap(),
        ];
        assert_eq!(PathPartition::new(whole, bad), Err(PathError::BadPartition));
    }

    #[test]
    fn trivial_parts_are_allowed_in_partitions() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]);
        let sg = build_shortest_graph(&g, &[0]);
        let whole = ColouredPath::new(&sg, 0, vec![0, 1, 2]).unwrap();
        let parts = vec![
            ColouredPath::new(&sg, 0, vec![0]).unwrap(),
            ColouredPath::new(&sg, 0, vec![0, 1, 2]).unwrap(),
        ];
        assert!(PathPartition::new(whole, parts).is_ok());
    }

    #[test]
    fn request_validation() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]);
        let sg = build_shortest_graph(&g, &[0]);
        assert!(Request::new(0, 3, 0).validate(&sg).is_ok());
        assert!(matches!(
            Request::new(3, 0, 0).validate(&sg),
            Err(RequestError::ReversedTerminals { .. })
        ));
        assert!(matches!(
            Request::new(0, 3, 1).validate(&sg),
            Err(RequestError::BadColour { .. })
        ));
    }
}
