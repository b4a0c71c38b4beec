//! Structure shared by two colours: components of doubly-coloured edges,
//! their level offsets, and the visibility predicates between colour paths.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::graph::{Colour, ColouredPath, ShortestGraph, Vertex};
use crate::reach::ReachIndex;

/// Whether the two colours orient a doubly-coloured edge the same way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

/// A connected component of the edges carrying both colours with a fixed
/// orientation agreement. Throughout the component the two level maps are
/// linked by one constant: `level_b = level_a + offset` on a plus component,
/// `level_b = -level_a + offset` on a minus component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiColouredComponent {
    pub colour_a: Colour,
    pub colour_b: Colour,
    pub sign: Sign,
    pub vertices: BTreeSet<Vertex>,
    pub edges: BTreeSet<(Vertex, Vertex)>,
    pub offset: i64,
}

impl BiColouredComponent {
    pub fn contains(&self, v: Vertex) -> bool {
        self.vertices.contains(&v)
    }

    /// Vertices where the offset equation fails; empty on valid instances.
    pub fn offset_violations(&self, sg: &ShortestGraph) -> Vec<Vertex> {
        self.vertices
            .iter()
            .copied()
            .filter(|&v| {
                let (Some(la), Some(lb)) = (sg.level(self.colour_a, v), sg.level(self.colour_b, v))
                else {
                    return true;
                };
                let expect = match self.sign {
                    Sign::Plus => la as i64 + self.offset,
                    Sign::Minus => -(la as i64) + self.offset,
                };
                lb as i64 != expect
            })
            .collect()
    }

    /// Stable identity within one shortest graph: colour pair, sign, and the
    /// smallest member vertex.
    pub fn key(&self) -> (Colour, Colour, Sign, Vertex) {
        (self.colour_a, self.colour_b, self.sign, *self.vertices.iter().next().unwrap())
    }
}

/// Components of the (i, j) doubly-coloured subgraph, split by orientation
/// sign, in deterministic order (plus before minus, then by least vertex).
///
/// Colour order is normalised: the component's `colour_a` is `min(i, j)`.
pub fn components(sg: &ShortestGraph, i: Colour, j: Colour) -> Vec<BiColouredComponent> {
    assert_ne!(i, j, "a component needs two distinct colours");
    let (a, b) = (i.min(j), i.max(j));
    let mut per_sign: BTreeMap<Sign, Vec<(Vertex, Vertex)>> = BTreeMap::new();
    for (u, v) in sg.graph().edges() {
        let (Some(da), Some(db)) = (sg.level_gap(a, u, v), sg.level_gap(b, u, v)) else {
            continue;
        };
        if da.abs() != 1 || db.abs() != 1 {
            continue;
        }
        let sign = if da == db { Sign::Plus } else { Sign::Minus };
        per_sign.entry(sign).or_default().push((u, v));
    }

    let mut out = Vec::new();
    for (&sign, edges) in &per_sign {
        // Union-find over the edge list of this sign.
        let n = sg.vertex_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(u, v) in edges {
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru != rv {
                parent[ru.max(rv)] = ru.min(rv);
            }
        }
        let mut grouped: BTreeMap<usize, (BTreeSet<Vertex>, BTreeSet<(Vertex, Vertex)>)> =
            BTreeMap::new();
        for &(u, v) in edges {
            let root = find(&mut parent, u);
            let entry = grouped.entry(root).or_default();
            entry.0.insert(u);
            entry.0.insert(v);
            entry.1.insert((u, v));
        }
        for (_, (vertices, edges)) in grouped {
            let &witness = vertices.iter().next().unwrap();
            let la = sg.level(a, witness).expect("component vertices are levelled") as i64;
            let lb = sg.level(b, witness).expect("component vertices are levelled") as i64;
            let offset = match sign {
                Sign::Plus => lb - la,
                Sign::Minus => lb + la,
            };
            out.push(BiColouredComponent {
                colour_a: a,
                colour_b: b,
                sign,
                vertices,
                edges,
                offset,
            });
        }
    }
    out
}

/// All bi-coloured components of every colour pair, in pair order.
pub fn all_components(sg: &ShortestGraph) -> Vec<BiColouredComponent> {
    let k = sg.colour_count();
    let mut out = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            out.extend(components(sg, i, j));
        }
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BicolouredError {
    /// A colour path met a component in a non-contiguous vertex range. Valid
    /// shortest graphs never produce this; it marks corrupt input.
    #[error("path meets component in a non-contiguous range (positions {first}..={last})")]
    NonContiguousIntersection { first: usize, last: usize },
    #[error("input is not a colour-{colour} path")]
    NotAColourPath { colour: Colour },
    #[error("paths share the internal vertex {vertex}")]
    NotInternallyDisjoint { vertex: Vertex },
    #[error("the predicate needs two distinct colours")]
    SameColour,
}

/// Positions of `path` inside `comp`, which on valid inputs always form one
/// contiguous index range. Returns the inclusive `(first, last)` range or
/// `None` for an empty intersection.
pub fn path_component_intersection(
    path: &ColouredPath,
    comp: &BiColouredComponent,
) -> Result<Option<(usize, usize)>, BicolouredError> {
    let hits: Vec<usize> = path
        .vertices()
        .iter()
        .enumerate()
        .filter_map(|(idx, v)| comp.contains(*v).then_some(idx))
        .collect();
    match (hits.first(), hits.last()) {
        (None, _) | (_, None) => Ok(None),
        (Some(&first), Some(&last)) => {
            if last - first + 1 != hits.len() {
                Err(BicolouredError::NonContiguousIntersection { first, last })
            } else {
                Ok(Some((first, last)))
            }
        }
    }
}

/// A component on which two colour paths interfere: both paths cross it, and
/// some vertex beyond the four crossing endpoints lies on a colour-i path
/// between path i's crossing endpoints and on a colour-j path between path
/// j's. At most one such component exists per path pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conflict {
    pub component: BiColouredComponent,
    /// First and last vertex of path i inside the component, in path order.
    pub i_span: (Vertex, Vertex),
    /// First and last vertex of path j inside the component, in path order.
    pub j_span: (Vertex, Vertex),
    /// A vertex witnessing the interference.
    pub witness: Vertex,
}

/// Every component conflicting with the pair; by the uniqueness property
/// valid inputs yield at most one entry.
pub fn conflicting_components(
    sg: &ShortestGraph,
    path_i: &ColouredPath,
    path_j: &ColouredPath,
) -> Vec<Conflict> {
    let (ci, cj) = (path_i.colour(), path_j.colour());
    assert_ne!(ci, cj, "conflicts are defined for distinct colours");
    debug_assert!(sg.is_colour_path(ci, path_i.vertices()));
    debug_assert!(sg.is_colour_path(cj, path_j.vertices()));
    let empty = BTreeSet::new();
    let reach_i = ReachIndex::build(sg, ci, &empty);
    let reach_j = ReachIndex::build(sg, cj, &empty);
    let mut out = Vec::new();
    for comp in components(sg, ci, cj) {
        let ri = path_component_intersection(path_i, &comp)
            .expect("contiguous intersection on valid shortest graph");
        let rj = path_component_intersection(path_j, &comp)
            .expect("contiguous intersection on valid shortest graph");
        let (Some((i0, i1)), Some((j0, j1))) = (ri, rj) else {
            continue;
        };
        let i_span = (path_i.vertices()[i0], path_i.vertices()[i1]);
        let j_span = (path_j.vertices()[j0], path_j.vertices()[j1]);
        if let Some(witness) = conflict_witness(&comp, &reach_i, &reach_j, i_span, j_span) {
            out.push(Conflict { component: comp, i_span, j_span, witness });
        }
    }
    out
}

/// The conflicting component for the pair, if any.
pub fn find_conflicting_component(
    sg: &ShortestGraph,
    path_i: &ColouredPath,
    path_j: &ColouredPath,
) -> Option<Conflict> {
    conflicting_components(sg, path_i, path_j).into_iter().next()
}

fn conflict_witness(
    comp: &BiColouredComponent,
    reach_i: &ReachIndex,
    reach_j: &ReachIndex,
    i_span: (Vertex, Vertex),
    j_span: (Vertex, Vertex),
) -> Option<Vertex> {
    let ends = [i_span.0, i_span.1, j_span.0, j_span.1];
    comp.vertices.iter().copied().find(|&v| {
        !ends.contains(&v)
            && reach_i.can_reach(i_span.0, v)
            && reach_i.can_reach(v, i_span.1)
            && reach_j.can_reach(j_span.0, v)
            && reach_j.can_reach(v, j_span.1)
    })
}

/// Like [`conflicting_components`] but deciding the witness with reachability
/// restricted to the component's own edges. Colour paths between component
/// vertices never leave the component, so this must agree with the
/// full-graph form; the crate treats the full-graph form as authoritative
/// and checks the agreement in tests.
pub fn conflicting_components_within(
    sg: &ShortestGraph,
    path_i: &ColouredPath,
    path_j: &ColouredPath,
) -> Vec<Conflict> {
    let (ci, cj) = (path_i.colour(), path_j.colour());
    assert_ne!(ci, cj);
    let mut out = Vec::new();
    for comp in components(sg, ci, cj) {
        let ri = path_component_intersection(path_i, &comp).expect("contiguous");
        let rj = path_component_intersection(path_j, &comp).expect("contiguous");
        let (Some((i0, i1)), Some((j0, j1))) = (ri, rj) else {
            continue;
        };
        let i_span = (path_i.vertices()[i0], path_i.vertices()[i1]);
        let j_span = (path_j.vertices()[j0], path_j.vertices()[j1]);
        let ends = [i_span.0, i_span.1, j_span.0, j_span.1];
        let witness = comp.vertices.iter().copied().find(|&v| {
            !ends.contains(&v)
                && reaches_within(sg, &comp, ci, i_span.0, v)
                && reaches_within(sg, &comp, ci, v, i_span.1)
                && reaches_within(sg, &comp, cj, j_span.0, v)
                && reaches_within(sg, &comp, cj, v, j_span.1)
        });
        if let Some(witness) = witness {
            out.push(Conflict { component: comp, i_span, j_span, witness });
        }
    }
    out
}

/// DFS over the component's own edges, oriented by `colour` levels.
fn reaches_within(
    sg: &ShortestGraph,
    comp: &BiColouredComponent,
    colour: Colour,
    from: Vertex,
    to: Vertex,
) -> bool {
    if from == to {
        return comp.contains(from);
    }
    comp.edges
        .iter()
        .filter_map(|&(u, v)| {
            if u == from && sg.level_gap(colour, u, v) == Some(1) {
                Some(v)
            } else if v == from && sg.level_gap(colour, v, u) == Some(1) {
                Some(u)
            } else {
                None
            }
        })
        .any(|next| reaches_within(sg, comp, colour, next, to))
}

/// Does `path_i` see `path_j`? True iff some internal vertex of `path_i` can
/// continue, in path i's colour, towards path i's target through an internal
/// vertex of `path_j`. Both paths must be valid and internally disjoint.
/// A path with fewer than three vertices has no internal vertex and neither
/// sees nor is seen.
pub fn sees(
    sg: &ShortestGraph,
    path_i: &ColouredPath,
    path_j: &ColouredPath,
) -> Result<bool, BicolouredError> {
    check_pair(sg, path_i, path_j)?;
    if path_i.vertices().len() < 3 || path_j.vertices().len() < 3 {
        return Ok(false);
    }
    let reach = ReachIndex::build(sg, path_i.colour(), &BTreeSet::new());
    let t_i = path_i.target();
    Ok(path_i.internal_vertices().iter().any(|&x| {
        path_j
            .internal_vertices()
            .iter()
            .any(|&y| reach.can_reach(x, y) && reach.can_reach(y, t_i))
    }))
}

/// Mutual invisibility: neither path sees the other.
pub fn is_blind(
    sg: &ShortestGraph,
    path_i: &ColouredPath,
    path_j: &ColouredPath,
) -> Result<bool, BicolouredError> {
    Ok(!sees(sg, path_i, path_j)? && !sees(sg, path_j, path_i)?)
}

fn check_pair(
    sg: &ShortestGraph,
    path_i: &ColouredPath,
    path_j: &ColouredPath,
) -> Result<(), BicolouredError> {
    for p in [path_i, path_j] {
        if !sg.is_colour_path(p.colour(), p.vertices()) {
            return Err(BicolouredError::NotAColourPath { colour: p.colour() });
        }
    }
    for (a, b) in [(path_i, path_j), (path_j, path_i)] {
        for &v in a.internal_vertices() {
            if b.contains(v) {
                return Err(BicolouredError::NotInternallyDisjoint { vertex: v });
            }
        }
    }
    Ok(())
}
