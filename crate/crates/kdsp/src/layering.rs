//! Building layered instances: BFS levels, edge pruning, and checks that
//! shortest paths respect the level structure.

use std::collections::VecDeque;

use thiserror::Error;

use crate::graph::{Colour, ColouredPath, Graph, ShortestGraph, Vertex};

/// BFS distances from `source`; `None` for unreachable vertices.
pub fn bfs_levels(g: &Graph, source: Vertex) -> Vec<Option<u32>> {
    assert!(source < g.vertex_count(), "source out of range");
    let mut levels = vec![None; g.vertex_count()];
    levels[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let next = levels[u].unwrap() + 1;
        for &v in g.neighbours(u) {
            if levels[v].is_none() {
                levels[v] = Some(next);
                queue.push_back(v);
            }
        }
    }
    levels
}

/// Layers `g` by a BFS per source and drops every edge that no colour places
/// between consecutive levels. Levels are computed on the input graph and
/// kept; pruning cannot change them because BFS trees only use kept edges.
pub fn build_shortest_graph(g: &Graph, sources: &[Vertex]) -> ShortestGraph {
    let levels: Vec<Vec<Option<u32>>> = sources.iter().map(|&s| bfs_levels(g, s)).collect();
    let mut pruned = Graph::new(g.vertex_count());
    for (u, v) in g.edges() {
        let crosses = levels.iter().any(|lv| match (lv[u], lv[v]) {
            (Some(a), Some(b)) => a.abs_diff(b) == 1,
            _ => false,
        });
        if crosses {
            pruned.add_edge(u, v);
        }
    }
    ShortestGraph::new(pruned, levels)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LayeringError {
    #[error("vertex sequence is not a simple path in the graph")]
    NotAPath,
    #[error("endpoint {vertex} carries no level for colour {colour}")]
    UnlevelledEndpoint { vertex: Vertex, colour: Colour },
    #[error("path length {length} does not match the level gap {gap}")]
    LengthMismatch { length: usize, gap: u32 },
    #[error("level gap {gap} is too small for classification")]
    GapTooSmall { gap: u32 },
    #[error("input path is not a colour-{colour} path")]
    NotAColourPath { colour: Colour },
    #[error("paths do not share their endpoint set")]
    EndpointMismatch,
}

/// For a path between levelled endpoints whose length equals their level gap
/// (> 1), decides whether it is a colour path once oriented from low to high
/// level. For valid shortest graphs this always returns true; a false return
/// is evidence the level structure is corrupt.
pub fn classify_shortest_path(
    sg: &ShortestGraph,
    colour: Colour,
    path: &[Vertex],
) -> Result<bool, LayeringError> {
    if path.len() < 2 || path.iter().any(|&v| v >= sg.vertex_count()) {
        return Err(LayeringError::NotAPath);
    }
    for w in path.windows(2) {
        if !sg.graph().has_edge(w[0], w[1]) {
            return Err(LayeringError::NotAPath);
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    if !path.iter().all(|&v| seen.insert(v)) {
        return Err(LayeringError::NotAPath);
    }
    let (first, last) = (path[0], *path.last().unwrap());
    for v in [first, last] {
        if !sg.is_levelled(colour, v) {
            return Err(LayeringError::UnlevelledEndpoint { vertex: v, colour });
        }
    }
    let gap = sg.level_gap(colour, first, last).unwrap().unsigned_abs() as u32;
    if path.len() - 1 != gap as usize {
        return Err(LayeringError::LengthMismatch { length: path.len() - 1, gap });
    }
    if gap <= 1 {
        return Err(LayeringError::GapTooSmall { gap });
    }
    let oriented: Vec<Vertex> = if sg.level(colour, first) <= sg.level(colour, last) {
        path.to_vec()
    } else {
        path.iter().rev().copied().collect()
    };
    Ok(sg.is_colour_path(colour, &oriented))
}

/// For two colour paths over the same endpoint set, checks that each is also
/// a path of the other's colour (up to orientation). Holds in every valid
/// shortest graph when both paths are longer than one edge.
pub fn cross_colour_check(
    sg: &ShortestGraph,
    i: Colour,
    j: Colour,
    path_i: &ColouredPath,
    path_j: &ColouredPath,
) -> Result<bool, LayeringError> {
    if path_i.colour() != i || !sg.is_colour_path(i, path_i.vertices()) {
        return Err(LayeringError::NotAColourPath { colour: i });
    }
    if path_j.colour() != j || !sg.is_colour_path(j, path_j.vertices()) {
        return Err(LayeringError::NotAColourPath { colour: j });
    }
    let ends = |p: &ColouredPath| {
        let (a, b) = (p.source(), p.target());
        (a.min(b), a.max(b))
    };
    if ends(path_i) != ends(path_j) {
        return Err(LayeringError::EndpointMismatch);
    }
    Ok(as_colour_path(sg, j, path_i.vertices()) && as_colour_path(sg, i, path_j.vertices()))
}

/// True iff the sequence or its reverse is a colour path of `colour`.
fn as_colour_path(sg: &ShortestGraph, colour: Colour, vertices: &[Vertex]) -> bool {
    if sg.is_colour_path(colour, vertices) {
        return true;
    }
    let rev: Vec<Vertex> = vertices.iter().rev().copied().collect();
    sg.is_colour_path(colour, &rev)
}
