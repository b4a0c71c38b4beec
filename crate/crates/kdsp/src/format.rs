//! Line-oriented text formats for instances, shortest graphs, DAG inputs,
//! and solutions. Blank lines and `#` comments are skipped everywhere;
//! serialization is deterministic, so equal values give equal bytes.
//!
//! Instance files carry the raw graph; the shortest graph is rebuilt from the
//! layering sources on load. A request's forbidden components are written as
//! `colour-pair sign vertex` keys and resolved against the rebuilt layering,
//! which is unambiguous because components of one pair and sign are
//! vertex-disjoint.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::bicolored::{components, BiColouredComponent, Sign};
use crate::graph::{Colour, Digraph, Graph, Request, ShortestGraph, Vertex};
use crate::layering::build_shortest_graph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("missing header line")]
    MissingHeader,
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: &'static str },
    #[error("line {line}: vertex or colour index out of range")]
    IndexOutOfRange { line: usize },
    #[error("colour {colour} has no layering source and no request")]
    MissingSource { colour: Colour },
    #[error("line {line}: duplicate layering source for colour {colour}")]
    DuplicateSource { line: usize, colour: Colour },
    #[error("expected {expected} `{tag}` lines, found {found}")]
    CountMismatch { tag: &'static str, expected: usize, found: usize },
    #[error("line {line}: no bi-coloured component matches the key")]
    UnknownComponent { line: usize },
}

fn malformed(line: usize, reason: &'static str) -> ParseError {
    ParseError::Malformed { line, reason }
}

fn num(line: usize, tok: &str) -> Result<usize, ParseError> {
    tok.parse().map_err(|_| malformed(line, "expected a non-negative number"))
}

/// Significant lines with 1-based numbers; comments and blanks dropped.
fn significant(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, raw)| (i + 1, raw.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn sign_char(sign: Sign) -> char {
    match sign {
        Sign::Plus => '+',
        Sign::Minus => '-',
    }
}

fn parse_sign(line: usize, tok: &str) -> Result<Sign, ParseError> {
    match tok {
        "+" => Ok(Sign::Plus),
        "-" => Ok(Sign::Minus),
        _ => Err(malformed(line, "expected sign `+` or `-`")),
    }
}

/// An instance as stored on disk: raw graph, one layering source per colour,
/// and the requests. The shortest graph is derived, never stored.
///
/// Format: header `n k l`, then in any order `e u v` edges, optional
/// `s colour vertex` source overrides, `r source target colour` requests
/// (l of them, in request order), and `f request colour-a colour-b sign vertex`
/// forbidden-component keys. A colour without an `s` line takes the source of
/// its first request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub graph: Graph,
    pub sources: Vec<Vertex>,
    pub requests: Vec<Request>,
}

impl Instance {
    pub fn shortest_graph(&self) -> ShortestGraph {
        build_shortest_graph(&self.graph, &self.sources)
    }
}

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut header = None;
    let mut edge_lines = Vec::new();
    let mut source_lines = Vec::new();
    let mut request_lines = Vec::new();
    let mut forbid_lines = Vec::new();
    for (no, line) in significant(text) {
        let tok: Vec<&str> = line.split_whitespace().collect();
        if header.is_none() {
            if tok.len() != 3 {
                return Err(malformed(no, "expected header `n k l`"));
            }
            header = Some((num(no, tok[0])?, num(no, tok[1])?, num(no, tok[2])?));
            continue;
        }
        match (tok[0], tok.len()) {
            ("e", 3) => edge_lines.push((no, num(no, tok[1])?, num(no, tok[2])?)),
            ("s", 3) => source_lines.push((no, num(no, tok[1])?, num(no, tok[2])?)),
            ("r", 4) => {
                request_lines.push((no, num(no, tok[1])?, num(no, tok[2])?, num(no, tok[3])?))
            }
            ("f", 6) => forbid_lines.push((
                no,
                num(no, tok[1])?,
                num(no, tok[2])?,
                num(no, tok[3])?,
                parse_sign(no, tok[4])?,
                num(no, tok[5])?,
            )),
            ("e" | "s" | "r" | "f", _) => return Err(malformed(no, "wrong number of fields")),
            _ => return Err(malformed(no, "unknown line tag")),
        }
    }
    let Some((n, k, l)) = header else {
        return Err(ParseError::MissingHeader);
    };

    let mut graph = Graph::new(n);
    for (no, u, v) in edge_lines {
        if u >= n || v >= n {
            return Err(ParseError::IndexOutOfRange { line: no });
        }
        if u == v {
            return Err(malformed(no, "self loop"));
        }
        if !graph.add_edge(u, v) {
            return Err(malformed(no, "duplicate edge"));
        }
    }

    if request_lines.len() != l {
        return Err(ParseError::CountMismatch {
            tag: "r",
            expected: l,
            found: request_lines.len(),
        });
    }
    let mut sources: Vec<Option<Vertex>> = vec![None; k];
    for (no, c, v) in source_lines {
        if c >= k || v >= n {
            return Err(ParseError::IndexOutOfRange { line: no });
        }
        if sources[c].is_some() {
            return Err(ParseError::DuplicateSource { line: no, colour: c });
        }
        sources[c] = Some(v);
    }
    let mut requests = Vec::new();
    for &(no, s, t, c) in &request_lines {
        if s >= n || t >= n || c >= k {
            return Err(ParseError::IndexOutOfRange { line: no });
        }
        if sources[c].is_none() {
            sources[c] = Some(s);
        }
        requests.push(Request::new(s, t, c));
    }
    let sources = sources
        .into_iter()
        .enumerate()
        .map(|(colour, s)| s.ok_or(ParseError::MissingSource { colour }))
        .collect::<Result<Vec<_>, _>>()?;

    if !forbid_lines.is_empty() {
        let sg = build_shortest_graph(&graph, &sources);
        let mut cache: BTreeMap<(Colour, Colour), Vec<BiColouredComponent>> = BTreeMap::new();
        for (no, i, a, b, sign, v) in forbid_lines {
            if i >= requests.len() || a >= k || b >= k || v >= n {
                return Err(ParseError::IndexOutOfRange { line: no });
            }
            if a == b {
                return Err(malformed(no, "component colours must differ"));
            }
            let pair = (a.min(b), a.max(b));
            let comps =
                cache.entry(pair).or_insert_with(|| components(&sg, pair.0, pair.1));
            let found = comps.iter().find(|c| c.sign == sign && c.contains(v));
            let Some(comp) = found else {
                return Err(ParseError::UnknownComponent { line: no });
            };
            requests[i].forbidden.push(Arc::new(comp.clone()));
        }
    }
    Ok(Instance { graph, sources, requests })
}

pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} {} {}",
        inst.graph.vertex_count(),
        inst.sources.len(),
        inst.requests.len()
    );
    for (u, v) in inst.graph.edges() {
        let _ = writeln!(out, "e {u} {v}");
    }
    for (c, &s) in inst.sources.iter().enumerate() {
        let _ = writeln!(out, "s {c} {s}");
    }
    for req in &inst.requests {
        let _ = writeln!(out, "r {} {} {}", req.source, req.target, req.colour);
    }
    for (i, req) in inst.requests.iter().enumerate() {
        for comp in &req.forbidden {
            let (a, b, sign, v) = comp.key();
            let _ = writeln!(out, "f {i} {a} {b} {} {v}", sign_char(sign));
        }
    }
    out
}

/// Shortest-graph file: header `sg n k`, `e u v` edges, `lv colour vertex
/// level` entries for the levelled vertices.
pub fn parse_sg(text: &str) -> Result<ShortestGraph, ParseError> {
    let mut header = None;
    let mut graph = Graph::new(0);
    let mut levels: Vec<Vec<Option<u32>>> = Vec::new();
    for (no, line) in significant(text) {
        let tok: Vec<&str> = line.split_whitespace().collect();
        match header {
            None => {
                if tok.len() != 3 || tok[0] != "sg" {
                    return Err(malformed(no, "expected header `sg n k`"));
                }
                let (n, k) = (num(no, tok[1])?, num(no, tok[2])?);
                header = Some((n, k));
                graph = Graph::new(n);
                levels = vec![vec![None; n]; k];
            }
            Some((n, k)) => match (tok[0], tok.len()) {
                ("e", 3) => {
                    let (u, v) = (num(no, tok[1])?, num(no, tok[2])?);
                    if u >= n || v >= n {
                        return Err(ParseError::IndexOutOfRange { line: no });
                    }
                    if u == v {
                        return Err(malformed(no, "self loop"));
                    }
                    if !graph.add_edge(u, v) {
                        return Err(malformed(no, "duplicate edge"));
                    }
                }
                ("lv", 4) => {
                    let (c, v) = (num(no, tok[1])?, num(no, tok[2])?);
                    let level = num(no, tok[3])? as u32;
                    if c >= k || v >= n {
                        return Err(ParseError::IndexOutOfRange { line: no });
                    }
                    if levels[c][v].is_some() {
                        return Err(malformed(no, "duplicate level entry"));
                    }
                    levels[c][v] = Some(level);
                }
                ("e" | "lv", _) => return Err(malformed(no, "wrong number of fields")),
                _ => return Err(malformed(no, "unknown line tag")),
            },
        }
    }
    if header.is_none() {
        return Err(ParseError::MissingHeader);
    }
    Ok(ShortestGraph::new(graph, levels))
}

pub fn serialize_sg(sg: &ShortestGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "sg {} {}", sg.vertex_count(), sg.colour_count());
    for (u, v) in sg.graph().edges() {
        let _ = writeln!(out, "e {u} {v}");
    }
    for c in 0..sg.colour_count() {
        for v in 0..sg.vertex_count() {
            if let Some(level) = sg.level(c, v) {
                let _ = writeln!(out, "lv {c} {v} {level}");
            }
        }
    }
    out
}

/// DAG file: header `dag n l`, `a u v` arcs, `r s t` terminal pairs.
pub fn parse_dag(text: &str) -> Result<(Digraph, Vec<(Vertex, Vertex)>), ParseError> {
    let mut header = None;
    let mut dag = Digraph::new(0);
    let mut pairs = Vec::new();
    for (no, line) in significant(text) {
        let tok: Vec<&str> = line.split_whitespace().collect();
        match header {
            None => {
                if tok.len() != 3 || tok[0] != "dag" {
                    return Err(malformed(no, "expected header `dag n l`"));
                }
                let (n, l) = (num(no, tok[1])?, num(no, tok[2])?);
                header = Some((n, l));
                dag = Digraph::new(n);
            }
            Some((n, _)) => match (tok[0], tok.len()) {
                ("a", 3) => {
                    let (u, v) = (num(no, tok[1])?, num(no, tok[2])?);
                    if u >= n || v >= n {
                        return Err(ParseError::IndexOutOfRange { line: no });
                    }
                    if u == v {
                        return Err(malformed(no, "self loop"));
                    }
                    if !dag.add_arc(u, v) {
                        return Err(malformed(no, "duplicate arc"));
                    }
                }
                ("r", 3) => {
                    let (s, t) = (num(no, tok[1])?, num(no, tok[2])?);
                    if s >= n || t >= n {
                        return Err(ParseError::IndexOutOfRange { line: no });
                    }
                    pairs.push((s, t));
                }
                ("a" | "r", _) => return Err(malformed(no, "wrong number of fields")),
                _ => return Err(malformed(no, "unknown line tag")),
            },
        }
    }
    let Some((_, l)) = header else {
        return Err(ParseError::MissingHeader);
    };
    if pairs.len() != l {
        return Err(ParseError::CountMismatch { tag: "r", expected: l, found: pairs.len() });
    }
    Ok((dag, pairs))
}

pub fn serialize_dag(dag: &Digraph, pairs: &[(Vertex, Vertex)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "dag {} {}", dag.vertex_count(), pairs.len());
    for (u, v) in dag.arcs() {
        let _ = writeln!(out, "a {u} {v}");
    }
    for &(s, t) in pairs {
        let _ = writeln!(out, "r {s} {t}");
    }
    out
}

/// Solution file: header `sol l`, one `p v1 v2 …` line per path, in request
/// order. Colours are implied by the paired instance.
pub fn parse_solution(text: &str) -> Result<Vec<Vec<Vertex>>, ParseError> {
    let mut header = None;
    let mut paths = Vec::new();
    for (no, line) in significant(text) {
        let tok: Vec<&str> = line.split_whitespace().collect();
        match header {
            None => {
                if tok.len() != 2 || tok[0] != "sol" {
                    return Err(malformed(no, "expected header `sol l`"));
                }
                header = Some(num(no, tok[1])?);
            }
            Some(_) => {
                if tok[0] != "p" {
                    return Err(malformed(no, "unknown line tag"));
                }
                if tok.len() < 2 {
                    return Err(malformed(no, "a path needs at least one vertex"));
                }
                let path = tok[1..]
                    .iter()
                    .map(|t| num(no, t))
                    .collect::<Result<Vec<_>, _>>()?;
                paths.push(path);
            }
        }
    }
    let Some(l) = header else {
        return Err(ParseError::MissingHeader);
    };
    if paths.len() != l {
        return Err(ParseError::CountMismatch { tag: "p", expected: l, found: paths.len() });
    }
    Ok(paths)
}

pub fn serialize_solution(paths: &[Vec<Vertex>]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "sol {}", paths.len());
    for path in paths {
        out.push('p');
        for &v in path {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{random_connected_graph, random_dag, random_instance};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn instance_round_trip_over_a_seeded_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5e_ed);
        for _ in 0..150 {
            let n = rng.gen_range(2..12);
            let k = rng.gen_range(1..4);
            let l = rng.gen_range(k..k + 3);
            let raw = random_instance(n, k, l, 0.4, &mut rng);
            let inst = Instance {
                graph: raw.graph.clone(),
                sources: raw.sources.clone(),
                requests: raw.requests(),
            };
            let text = serialize_instance(&inst);
            assert_eq!(parse_instance(&text).unwrap(), inst, "{text}");
        }
    }

    #[test]
    fn forbidden_components_survive_the_round_trip() {
        // Six-cycle levelled from 0 and 2; both colour pairs have components.
        let graph = Graph::from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)]);
        let sources = vec![0, 2];
        let sg = build_shortest_graph(&graph, &sources);
        let comps = components(&sg, 0, 1);
        assert!(comps.len() >= 2);
        let mut req = Request::new(0, 4, 0);
        req.forbidden.push(Arc::new(comps[0].clone()));
        req.forbidden.push(Arc::new(comps[1].clone()));
        let inst = Instance { graph, sources, requests: vec![req, Request::new(2, 5, 1)] };
        let text = serialize_instance(&inst);
        assert_eq!(text.matches("\nf 0 ").count(), 2);
        assert_eq!(parse_instance(&text).unwrap(), inst, "{text}");
    }

    #[test]
    fn sources_default_to_the_first_request_per_colour() {
        let text = "3 2 3\ne 0 1\ne 1 2\nr 1 2 0\nr 1 0 0\nr 2 0 1\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.sources, vec![1, 2]);
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = "# a tiny instance\n\n2 1 1\n  e 0 1\n# the request\nr 0 1 0\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.graph.edge_count(), 1);
        assert_eq!(inst.requests.len(), 1);
    }

    #[test]
    fn instance_parser_rejects_malformed_input() {
        let cases: &[(&str, ParseError)] = &[
            ("", ParseError::MissingHeader),
            ("# only a comment\n", ParseError::MissingHeader),
            ("1 2\n", malformed(1, "expected header `n k l`")),
            ("2 1 0\nq 0 1\n", malformed(2, "unknown line tag")),
            ("2 1 0\ne 0\n", malformed(2, "wrong number of fields")),
            ("2 1 0\ne 0 2\n", ParseError::IndexOutOfRange { line: 2 }),
            ("2 1 0\ne 1 1\n", malformed(2, "self loop")),
            ("2 1 0\ne 0 1\ne 1 0\n", malformed(3, "duplicate edge")),
            ("2 1 2\nr 0 1 0\n", ParseError::CountMismatch { tag: "r", expected: 2, found: 1 }),
            ("2 1 0\n", ParseError::MissingSource { colour: 0 }),
            (
                "2 1 1\ns 0 0\ns 0 1\nr 0 1 0\n",
                ParseError::DuplicateSource { line: 3, colour: 0 },
            ),
            ("2 1 1\nr 0 1 2\n", ParseError::IndexOutOfRange { line: 2 }),
            (
                "2 2 2\ne 0 1\nr 0 1 0\nr 1 0 1\nf 0 0 1 + 0\n",
                ParseError::UnknownComponent { line: 5 },
            ),
            ("2 1 1\nr 0 1 0\nf 0 0 0 + 0\n", malformed(3, "component colours must differ")),
            ("2 1 1\nr 0 1 0\nf 0 0 0 ? 0\n", malformed(3, "expected sign `+` or `-`")),
            ("x2 1 0\n", malformed(1, "expected a non-negative number")),
        ];
        for (text, want) in cases {
            assert_eq!(parse_instance(text).as_ref(), Err(want), "input: {text:?}");
        }
    }

    #[test]
    fn sg_round_trip_over_a_seeded_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..120 {
            let n = rng.gen_range(2..15);
            let g = random_connected_graph(n, 0.35, &mut rng);
            let k = rng.gen_range(1..4);
            let sources: Vec<Vertex> = (0..k).map(|_| rng.gen_range(0..n)).collect();
            let sg = build_shortest_graph(&g, &sources);
            let text = serialize_sg(&sg);
            assert_eq!(parse_sg(&text).unwrap(), sg, "{text}");
        }
    }

    #[test]
    fn sg_parser_rejects_bad_levels() {
        assert_eq!(
            parse_sg("sg 2 1\ne 0 1\nlv 0 0 0\nlv 0 0 1\n"),
            Err(malformed(4, "duplicate level entry"))
        );
        assert_eq!(parse_sg("sg 2 1\nlv 1 0 0\n"), Err(ParseError::IndexOutOfRange { line: 2 }));
        assert_eq!(parse_sg("2 1\n"), Err(malformed(1, "expected header `sg n k`")));
    }

    #[test]
    fn dag_round_trip_over_a_seeded_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..120 {
            let n = rng.gen_range(2..12);
            let dag = random_dag(n, 0.4, &mut rng);
            let l = rng.gen_range(1..4usize);
            let pairs: Vec<(Vertex, Vertex)> =
                (0..l).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
            let text = serialize_dag(&dag, &pairs);
            let (dag2, pairs2) = parse_dag(&text).unwrap();
            assert_eq!((dag2, pairs2), (dag.clone(), pairs), "{text}");
        }
    }

    #[test]
    fn solution_round_trip() {
        let paths = vec![vec![0, 1, 2], vec![5], vec![3, 4]];
        let text = serialize_solution(&paths);
        assert_eq!(text, "sol 3\np 0 1 2\np 5\np 3 4\n");
        assert_eq!(parse_solution(&text).unwrap(), paths);
        assert_eq!(
            parse_solution("sol 2\np 0 1\n"),
            Err(ParseError::CountMismatch { tag: "p", expected: 2, found: 1 })
        );
        assert_eq!(parse_solution("sol 1\np\n"), Err(malformed(2, "a path needs at least one vertex")));
    }
}
