//! Top-level decision procedure: guess a segment decomposition for every
//! request — junction vertices, a colour for each segment, extra forbidden
//! components — split the junctions apart, hand the resulting sub-requests
//! to the blind product search, and stitch the answer back together.
//!
//! Guesses are streamed in non-decreasing total segment count, so cheap
//! decompositions are tried first and a hit returns immediately. In
//! exhaustive mode the budget reaches the all-single-edge decomposition,
//! whose pairs cannot see each other, which makes a fully negative sweep a
//! proof of infeasibility.

use std::collections::BTreeSet;
use std::rc::Rc;
use std::sync::Arc;

use thiserror::Error;

use crate::bicolored::all_components;
use crate::blind::{solve_blind, BlindError};
use crate::graph::{Colour, ColouredPath, ComponentRef, Request, ShortestGraph, Vertex};
use crate::oracle::check_solution_coloured;
use crate::reach::ReachIndex;
use crate::reductions::split_terminals;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveConfig {
    /// Most segments allowed per request.
    pub segment_budget: u32,
    /// Most extra forbidden components per segment.
    pub forbidden_budget: u32,
    /// State cap for each product search dispatch.
    pub state_budget: usize,
    /// Raise the segment budget until the all-single-edge decomposition is
    /// reachable; a fully failed sweep then certifies infeasibility.
    pub exhaustive: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            segment_budget: 2,
            forbidden_budget: 0,
            state_budget: 4_000_000,
            exhaustive: false,
        }
    }
}

/// One guessed piece of a request's path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    /// Endpoints in request direction.
    pub from: Vertex,
    pub to: Vertex,
    /// Colour the piece is searched in; differs from the request colour
    /// only via a bi-coloured component containing both endpoints.
    pub colour: Colour,
    /// The assigned colour runs the piece backwards (opposite orientation
    /// sign): the blind sub-request goes to → from.
    pub reversed: bool,
    /// Extra forbidden components imposed on the piece.
    pub extra_forbidden: Vec<ComponentRef>,
}

impl Segment {
    /// Endpoints in search orientation: source at the lower assigned level.
    pub fn oriented(&self) -> (Vertex, Vertex) {
        if self.reversed {
            (self.to, self.from)
        } else {
            (self.from, self.to)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentScheme {
    /// Chained segments per request: consecutive `to`/`from` agree, the
    /// first starts at the request source, the last ends at its target.
    pub per_request: Vec<Vec<Segment>>,
}

impl SegmentScheme {
    pub fn total_segments(&self) -> usize {
        self.per_request.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveVerdict {
    Solution(Vec<ColouredPath>),
    /// Every admissible decomposition failed: certified infeasible.
    NoSolutionExhaustive,
    /// The sweep ended without an answer (budgets too small, or a product
    /// search overran its state cap).
    BudgetExceeded,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AssemblyError {
    #[error("segment paths for request {request} do not assemble into a colour path")]
    Mismatch { request: usize },
}

/// Decides the instance within the configured budgets. Request terminals
/// must be levelled in their colour with source no higher than target;
/// terminals may be shared between requests.
pub fn solve(sg: &ShortestGraph, requests: &[Request], config: &SolveConfig) -> SolveVerdict {
    if requests.is_empty() {
        return SolveVerdict::Solution(Vec::new());
    }
    for r in requests {
        let (ls, lt) = (sg.level(r.colour, r.source), sg.level(r.colour, r.target));
        assert!(
            r.colour < sg.colour_count() && ls.is_some() && ls <= lt,
            "solve called with an unvalidated request"
        );
    }
    // Same-colour pairs cannot see each other, so for single-colour inputs
    // one product search is already a complete decision.
    if requests.iter().all(|r| r.colour == requests[0].colour) {
        let (ssg, sreqs, map) = split_terminals(sg, requests);
        return match solve_blind(&ssg, &sreqs, config.state_budget) {
            Err(BlindError::StateBudgetExceeded { .. }) => SolveVerdict::BudgetExceeded,
            Err(BlindError::CyclicInput) => unreachable!("level search has no cycles"),
            Ok(None) => SolveVerdict::NoSolutionExhaustive,
            Ok(Some(paths)) => {
                let back: Vec<ColouredPath> = paths
                    .iter()
                    .zip(requests)
                    .map(|(p, r)| {
                        ColouredPath::new(sg, r.colour, map.project(p.vertices()))
                            .expect("projected blind path is a colour path")
                    })
                    .collect();
                assert!(
                    check_solution_coloured(sg, requests, &back).is_ok(),
                    "single-colour solution failed validation"
                );
                SolveVerdict::Solution(back)
            }
        };
    }
    let mut budget_hit = false;
    for scheme in enumerate_schemes(sg, requests, config) {
        match try_scheme(sg, requests, &scheme, config.state_budget) {
            Ok(Some(paths)) => return SolveVerdict::Solution(paths),
            Ok(None) => {}
            Err(BlindError::StateBudgetExceeded { .. }) => budget_hit = true,
            Err(BlindError::CyclicInput) => unreachable!("level search has no cycles"),
        }
    }
    if config.exhaustive && !budget_hit {
        SolveVerdict::NoSolutionExhaustive
    } else {
        SolveVerdict::BudgetExceeded
    }
}

/// Dispatches one scheme: sub-requests in search orientation, junctions and
/// shared terminals split apart, one blind search, paths stitched back.
fn try_scheme(
    sg: &ShortestGraph,
    requests: &[Request],
    scheme: &SegmentScheme,
    state_budget: usize,
) -> Result<Option<Vec<ColouredPath>>, BlindError> {
    let mut subs: Vec<Request> = Vec::with_capacity(scheme.total_segments());
    for (i, segs) in scheme.per_request.iter().enumerate() {
        for seg in segs {
            let (src, tgt) = seg.oriented();
            let mut sub = Request::new(src, tgt, seg.colour);
            sub.forbidden =
                requests[i].forbidden.iter().chain(&seg.extra_forbidden).cloned().collect();
            subs.push(sub);
        }
    }
    let (ssg, ssubs, map) = split_terminals(sg, &subs);
    match solve_blind(&ssg, &ssubs, state_budget)? {
        None => Ok(None),
        Some(paths) => {
            let projected: Vec<Vec<Vertex>> =
                paths.iter().map(|p| map.project(p.vertices())).collect();
            match assemble(sg, requests, scheme, &projected) {
                Ok(sol) => Ok(Some(sol)),
                // A reassigned segment may wander outside the witnessing
                // component and fail request-colour validation; the scheme
                // simply fails, completeness rests on single-edge schemes.
                Err(AssemblyError::Mismatch { .. }) => Ok(None),
            }
        }
    }
}

/// Concatenates per-segment paths (given in search orientation, on the
/// original vertices) into one path per request and re-validates the result
/// in the request colour, including disjointness and forbidden-component
/// avoidance.
pub fn assemble(
    sg: &ShortestGraph,
    requests: &[Request],
    scheme: &SegmentScheme,
    segment_paths: &[Vec<Vertex>],
) -> Result<Vec<ColouredPath>, AssemblyError> {
    assert_eq!(segment_paths.len(), scheme.total_segments());
    let mut idx = 0;
    let mut out = Vec::with_capacity(requests.len());
    for (i, segs) in scheme.per_request.iter().enumerate() {
        let mut walk: Vec<Vertex> = Vec::new();
        for seg in segs {
            let mut p = segment_paths[idx].clone();
            idx += 1;
            if seg.reversed {
                p.reverse();
            }
            if p.first() != Some(&seg.from) || p.last() != Some(&seg.to) {
                return Err(AssemblyError::Mismatch { request: i });
            }
            if walk.is_empty() {
                walk = p;
            } else {
                if walk.last() != p.first() {
                    return Err(AssemblyError::Mismatch { request: i });
                }
                walk.extend_from_slice(&p[1..]);
            }
        }
        match ColouredPath::new(sg, requests[i].colour, walk) {
            Ok(cp) => out.push(cp),
            Err(_) => return Err(AssemblyError::Mismatch { request: i }),
        }
    }
    if !check_solution_coloured(sg, requests, &out).is_ok() {
        let request = out.len().saturating_sub(1);
        return Err(AssemblyError::Mismatch { request });
    }
    Ok(out)
}

/// Streams every scheme within the budgets, cheapest total segment count
/// first. Junctions avoid all terminals and one another, climb strictly in
/// the request colour, and every segment must be reachable in its assigned
/// colour; extra forbidden components are restricted to those able to touch
/// a candidate segment path, which canonicalizes away no-op choices.
pub fn enumerate_schemes<'a>(
    sg: &'a ShortestGraph,
    requests: &'a [Request],
    config: &SolveConfig,
) -> impl Iterator<Item = SegmentScheme> + 'a {
    let ctx = Rc::new(EnumCtx::build(sg, requests, config));
    let min_t = ctx.caps.len() as u32;
    let max_t: u32 = ctx.caps.iter().sum();
    (min_t..=max_t).flat_map(move |t| ctx.layer(t).into_iter())
}

struct EnumCtx<'s> {
    sg: &'s ShortestGraph,
    requests: &'s [Request],
    /// reach[i][a]: colour-a reachability avoiding request i's components.
    reach: Vec<Vec<ReachIndex>>,
    components: Vec<ComponentRef>,
    terminals: BTreeSet<Vertex>,
    /// Per-request segment cap (never beyond the request's level gap).
    caps: Vec<u32>,
    bf: u32,
}

impl<'s> EnumCtx<'s> {
    fn build(sg: &'s ShortestGraph, requests: &'s [Request], config: &SolveConfig) -> Self {
        let k = sg.colour_count();
        let reach = requests
            .iter()
            .map(|r| {
                let f = r.forbidden_vertices();
                (0..k).map(|a| ReachIndex::build(sg, a, &f)).collect()
            })
            .collect();
        let components: Vec<ComponentRef> =
            all_components(sg).into_iter().map(Arc::new).collect();
        let terminals = requests.iter().flat_map(|r| [r.source, r.target]).collect();
        let gaps: Vec<u32> = requests
            .iter()
            .map(|r| {
                let ls = sg.level(r.colour, r.source).unwrap_or(0);
                let lt = sg.level(r.colour, r.target).unwrap_or(0);
                (lt.saturating_sub(ls)).max(1)
            })
            .collect();
        let budget = if config.exhaustive {
            gaps.iter().copied().max().unwrap_or(1)
        } else {
            config.segment_budget.max(1)
        };
        let caps = gaps.iter().map(|&g| g.min(budget)).collect();
        EnumCtx {
            sg,
            requests,
            reach,
            components,
            terminals,
            caps,
            bf: config.forbidden_budget,
        }
    }

    fn layer(&self, t: u32) -> Vec<SegmentScheme> {
        let mut out = Vec::new();
        let mut comp = Vec::with_capacity(self.caps.len());
        self.compositions(t, 0, &mut comp, &mut out);
        out
    }

    /// All ways of spending `t` segments across the requests.
    fn compositions(&self, t: u32, i: usize, comp: &mut Vec<u32>, out: &mut Vec<SegmentScheme>) {
        if i == self.caps.len() {
            if t == 0 {
                let mut used = self.terminals.clone();
                let mut acc = Vec::with_capacity(self.caps.len());
                self.request_rec(comp, 0, &mut used, &mut acc, out);
            }
            return;
        }
        let remaining_min = (self.caps.len() - i - 1) as u32;
        for m in 1..=self.caps[i].min(t.saturating_sub(remaining_min)) {
            comp.push(m);
            self.compositions(t - m, i + 1, comp, out);
            comp.pop();
        }
    }

    fn request_rec(
        &self,
        comp: &[u32],
        i: usize,
        used: &mut BTreeSet<Vertex>,
        acc: &mut Vec<Vec<Segment>>,
        out: &mut Vec<SegmentScheme>,
    ) {
        if i == comp.len() {
            out.push(SegmentScheme { per_request: acc.clone() });
            return;
        }
        let mut chain = Vec::with_capacity(comp[i] as usize);
        self.chain_rec(comp, i, comp[i], self.requests[i].source, used, &mut chain, acc, out);
    }

    /// Chooses the junction chain for request `i`, then expands each
    /// complete chain into all (colour, forbidden) segment variants.
    #[allow(clippy::too_many_arguments)]
    fn chain_rec(
        &self,
        comp: &[u32],
        i: usize,
        remaining: u32,
        prev: Vertex,
        used: &mut BTreeSet<Vertex>,
        chain: &mut Vec<(Vertex, Vertex)>,
        acc: &mut Vec<Vec<Segment>>,
        out: &mut Vec<SegmentScheme>,
    ) {
        let r = &self.requests[i];
        if remaining == 1 {
            if self.segment_options(i, prev, r.target).is_empty() {
                return;
            }
            chain.push((prev, r.target));
            let mut variants: Vec<Vec<Segment>> = Vec::new();
            self.variant_collect(i, chain, 0, &mut Vec::new(), &mut variants);
            chain.pop();
            for v in variants {
                acc.push(v);
                self.request_rec(comp, i + 1, used, acc, out);
                acc.pop();
            }
            return;
        }
        let lvl = |v: Vertex| self.sg.level(r.colour, v);
        let (Some(lp), Some(lt)) = (lvl(prev), lvl(r.target)) else { return };
        for v in 0..self.sg.vertex_count() {
            if used.contains(&v) {
                continue;
            }
            let Some(lv) = lvl(v) else { continue };
            // Junction levels climb strictly and must leave one level per
            // remaining segment.
            if lv <= lp || lv + (remaining - 1) > lt {
                continue;
            }
            if self.segment_options(i, prev, v).is_empty() {
                continue;
            }
            used.insert(v);
            chain.push((prev, v));
            self.chain_rec(comp, i, remaining - 1, v, used, chain, acc, out);
            chain.pop();
            used.remove(&v);
        }
    }

    /// Expands the fixed endpoint chain into all segment variant lists
    /// (colour, orientation, extra forbidden components).
    fn variant_collect(
        &self,
        i: usize,
        chain: &[(Vertex, Vertex)],
        pos: usize,
        segs: &mut Vec<Segment>,
        out: &mut Vec<Vec<Segment>>,
    ) {
        if pos == chain.len() {
            out.push(segs.clone());
            return;
        }
        let (from, to) = chain[pos];
        for (colour, reversed) in self.segment_options(i, from, to) {
            let (src, tgt) = if reversed { (to, from) } else { (from, to) };
            for extra in self.forbidden_choices(i, colour, src, tgt) {
                segs.push(Segment { from, to, colour, reversed, extra_forbidden: extra });
                self.variant_collect(i, chain, pos + 1, segs, out);
                segs.pop();
            }
        }
    }

    /// Admissible (colour, reversed) assignments for a segment of request
    /// `i` running from `u` to `w` in request direction.
    fn segment_options(&self, i: usize, u: Vertex, w: Vertex) -> Vec<(Colour, bool)> {
        let c = self.requests[i].colour;
        let mut opts = Vec::new();
        if self.reach[i][c].can_reach(u, w) {
            opts.push((c, false));
        }
        if u == w {
            return opts;
        }
        for a in 0..self.sg.colour_count() {
            if a == c {
                continue;
            }
            let witnessed = self.components.iter().any(|comp| {
                let pair = (comp.colour_a.min(comp.colour_b), comp.colour_a.max(comp.colour_b));
                pair == (a.min(c), a.max(c))
                    && comp.vertices.contains(&u)
                    && comp.vertices.contains(&w)
            });
            if !witnessed {
                continue;
            }
            let (Some(lu), Some(lw)) = (self.sg.level(a, u), self.sg.level(a, w)) else {
                continue;
            };
            if lu < lw && self.reach[i][a].can_reach(u, w) {
                opts.push((a, false));
            } else if lu > lw && self.reach[i][a].can_reach(w, u) {
                opts.push((a, true));
            }
        }
        opts
    }

    /// Subsets (≤ bf) of the components that could actually block a
    /// colour-`a` path from `src` to `tgt`: carrying the colour, containing
    /// neither endpoint, intersecting the corridor between them.
    fn forbidden_choices(
        &self,
        i: usize,
        a: Colour,
        src: Vertex,
        tgt: Vertex,
    ) -> Vec<Vec<ComponentRef>> {
        let mut choices = vec![Vec::new()];
        if self.bf == 0 {
            return choices;
        }
        let reach = &self.reach[i][a];
        let candidates: Vec<&ComponentRef> = self
            .components
            .iter()
            .filter(|comp| {
                (comp.colour_a == a || comp.colour_b == a)
                    && !comp.vertices.contains(&src)
                    && !comp.vertices.contains(&tgt)
                    && comp
                        .vertices
                        .iter()
                        .any(|&x| reach.can_reach(src, x) && reach.can_reach(x, tgt))
            })
            .collect();
        let mut pick = Vec::new();
        subset_rec(&candidates, 0, self.bf as usize, &mut pick, &mut choices);
        choices
    }
}

fn subset_rec(
    candidates: &[&ComponentRef],
    from: usize,
    cap: usize,
    pick: &mut Vec<ComponentRef>,
    out: &mut Vec<Vec<ComponentRef>>,
) {
    if pick.len() == cap {
        return;
    }
    for j in from..candidates.len() {
        pick.push(candidates[j].clone());
        out.push(pick.clone());
        subset_rec(candidates, j + 1, cap, pick, out);
        pick.pop();
    }
}
