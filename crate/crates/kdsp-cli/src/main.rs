//! Command-line front end: layering, component inspection, the segment
//! solver, the exact oracles, the DAG pipeline, instance generation, and
//! solution checking.
//!
//! Exit codes: 0 = solution found / check passed, 1 = proven infeasible /
//! check failed, 2 = search budget exceeded, 3 = input error. Results go to
//! stdout (line formats, or one JSON object with `--json`); diagnostics go
//! to stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use kdsp::bicolored::{components, Sign};
use kdsp::blind::{solve_dag_disjoint, terminals_pairwise_distinct, BlindError};
use kdsp::format::{
    parse_dag, parse_instance, parse_sg, parse_solution, serialize_instance, serialize_sg,
    serialize_solution, Instance,
};
use kdsp::gen::random_instance;
use kdsp::graph::{ColouredPath, Request, ShortestGraph, Vertex};
use kdsp::layering::build_shortest_graph;
use kdsp::oracle::{
    check_solution, check_solution_coloured, oracle_solve, oracle_solve_coloured, OracleError,
    SolutionReport, SolutionViolation,
};
use kdsp::reductions::{assemble_relaxed, dag_to_1dsp, reduce_capprox};
use kdsp::solver::{solve, SolveConfig, SolveVerdict};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EXIT_OK: u8 = 0;
const EXIT_INFEASIBLE: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "kdsp", version, about = "Disjoint shortest paths on layered graphs")]
struct Cli {
    /// Print one JSON object on stdout instead of the line formats.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Layer a graph by BFS and print the shortest graph.
    Layer {
        /// Instance file; only its graph (and sources, unless overridden) is used.
        input: PathBuf,
        /// Comma-separated layering sources, one per colour.
        #[arg(long, value_delimiter = ',')]
        sources: Option<Vec<Vertex>>,
    },
    /// List the bi-coloured components of a colour pair.
    Components {
        /// Shortest-graph file, or an instance file to layer first.
        input: PathBuf,
        /// The colour pair, written `i,j`.
        #[arg(long, value_delimiter = ',')]
        colours: Vec<usize>,
    },
    /// Run the segment-scheme solver on an instance.
    Solve {
        input: PathBuf,
        /// Most segments per request.
        #[arg(long, default_value_t = 2)]
        budget: u32,
        /// Most extra forbidden components per segment.
        #[arg(long, default_value_t = 0)]
        bf: u32,
        /// Sweep every decomposition; a negative answer becomes a proof.
        #[arg(long)]
        exhaustive: bool,
        /// Solve the relaxed problem instead: raw paths at most this much
        /// longer than shortest, colours and layerings ignored.
        #[arg(long)]
        slack: Option<u32>,
        /// State cap per product search.
        #[arg(long, default_value_t = 4_000_000)]
        states: usize,
    },
    /// Decide an instance exactly by exhaustive enumeration.
    Oracle {
        input: PathBuf,
        /// Decide the relaxed problem instead (see `solve --slack`).
        #[arg(long)]
        slack: Option<u32>,
        /// Enumeration cap; overrunning it exits 2.
        #[arg(long, default_value_t = 1_000_000)]
        cap: usize,
    },
    /// Decide vertex-disjoint linkage on a DAG.
    DagSolve { input: PathBuf },
    /// Embed a DAG linkage question as a single-colour instance.
    DagReduce { input: PathBuf },
    /// Generate a seeded random instance.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        requests: usize,
        #[arg(long)]
        seed: u64,
        /// Edge probability.
        #[arg(long, default_value_t = 0.4)]
        p: f64,
    },
    /// Validate a solution file against an instance.
    Check {
        input: PathBuf,
        solution: PathBuf,
        /// Check against the relaxed problem at this slack instead.
        #[arg(long)]
        slack: Option<u32>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.exit_code() == 0 { EXIT_OK } else { EXIT_INPUT };
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    let json = cli.json;
    match cli.command {
        Command::Layer { input, sources } => cmd_layer(&input, sources, json),
        Command::Components { input, colours } => cmd_components(&input, &colours, json),
        Command::Solve { input, budget, bf, exhaustive, slack, states } => {
            let config = SolveConfig {
                segment_budget: budget,
                forbidden_budget: bf,
                state_budget: states,
                exhaustive,
            };
            cmd_solve(&input, &config, slack, json)
        }
        Command::Oracle { input, slack, cap } => cmd_oracle(&input, slack, cap, json),
        Command::DagSolve { input } => cmd_dag_solve(&input, json),
        Command::DagReduce { input } => cmd_dag_reduce(&input, json),
        Command::Gen { n, k, requests, seed, p } => cmd_gen(n, k, requests, seed, p, json),
        Command::Check { input, solution, slack } => cmd_check(&input, &solution, slack, json),
    }
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_instance(path: &Path) -> Result<Instance, String> {
    parse_instance(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

/// Builds the layered view and validates every request against it.
fn prepared(inst: &Instance) -> Result<(ShortestGraph, Vec<Request>), String> {
    let sg = inst.shortest_graph();
    for (i, req) in inst.requests.iter().enumerate() {
        req.validate(&sg).map_err(|e| format!("request {i}: {e}"))?;
    }
    Ok((sg, inst.requests.clone()))
}

fn sign_str(sign: Sign) -> &'static str {
    match sign {
        Sign::Plus => "+",
        Sign::Minus => "-",
    }
}

fn instance_json(inst: &Instance) -> serde_json::Value {
    json!({
        "n": inst.graph.vertex_count(),
        "k": inst.sources.len(),
        "edges": inst.graph.edges().collect::<Vec<_>>(),
        "sources": &inst.sources,
        "requests": inst.requests.iter().map(|r| json!({
            "source": r.source,
            "target": r.target,
            "colour": r.colour,
            "forbidden": r.forbidden.iter().map(|c| {
                let (a, b, sign, v) = c.key();
                json!({ "colour_a": a, "colour_b": b, "sign": sign_str(sign), "vertex": v })
            }).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

/// Uniform result shape for every solving command.
fn emit_verdict(json: bool, verdict: &str, paths: Option<&[Vec<Vertex>]>) {
    if json {
        println!("{}", json!({ "verdict": verdict, "paths": paths.unwrap_or_default() }));
    } else if let Some(paths) = paths {
        print!("{}", serialize_solution(paths));
    }
}

fn cmd_layer(input: &Path, sources: Option<Vec<Vertex>>, json: bool) -> Result<u8, String> {
    let inst = load_instance(input)?;
    let sources = sources.unwrap_or_else(|| inst.sources.clone());
    let n = inst.graph.vertex_count();
    if let Some(&s) = sources.iter().find(|&&s| s >= n) {
        return Err(format!("source {s} out of range for {n} vertices"));
    }
    let sg = build_shortest_graph(&inst.graph, &sources);
    if json {
        let levels: Vec<&[Option<u32>]> =
            (0..sg.colour_count()).map(|c| sg.levels_of(c)).collect();
        println!(
            "{}",
            json!({
                "n": sg.vertex_count(),
                "k": sg.colour_count(),
                "edges": sg.graph().edges().collect::<Vec<_>>(),
                "levels": levels,
            })
        );
    } else {
        print!("{}", serialize_sg(&sg));
    }
    Ok(EXIT_OK)
}

fn cmd_components(input: &Path, colours: &[usize], json: bool) -> Result<u8, String> {
    let text = read(input)?;
    let is_sg = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l.starts_with("sg"));
    let sg = if is_sg {
        parse_sg(&text).map_err(|e| format!("{}: {e}", input.display()))?
    } else {
        parse_instance(&text).map_err(|e| format!("{}: {e}", input.display()))?.shortest_graph()
    };
    let report = sg.validate();
    if !report.is_valid() {
        return Err(format!("not a valid shortest graph: {:?}", report.violations[0]));
    }
    let [i, j] = colours else {
        return Err("expected --colours i,j".into());
    };
    if *i == *j || *i >= sg.colour_count() || *j >= sg.colour_count() {
        return Err(format!("--colours needs two distinct colours below {}", sg.colour_count()));
    }
    let comps = components(&sg, *i, *j);
    if json {
        let arr: Vec<_> = comps
            .iter()
            .map(|c| {
                json!({
                    "colour_a": c.colour_a,
                    "colour_b": c.colour_b,
                    "sign": sign_str(c.sign),
                    "offset": c.offset,
                    "vertices": &c.vertices,
                    "edges": &c.edges,
                })
            })
            .collect();
        println!("{}", json!(arr));
    } else {
        for (idx, c) in comps.iter().enumerate() {
            println!(
                "component {idx}: colours {} {} sign {} offset {}",
                c.colour_a,
                c.colour_b,
                sign_str(c.sign),
                c.offset
            );
            let verts: Vec<String> = c.vertices.iter().map(|v| v.to_string()).collect();
            println!("  vertices: {}", verts.join(" "));
            let edges: Vec<String> =
                c.edges.iter().map(|(u, v)| format!("{u}-{v}")).collect();
            println!("  edges: {}", edges.join(" "));
        }
    }
    Ok(EXIT_OK)
}

fn cmd_solve(
    input: &Path,
    config: &SolveConfig,
    slack: Option<u32>,
    json: bool,
) -> Result<u8, String> {
    let inst = load_instance(input)?;
    if let Some(c) = slack {
        return solve_relaxed(&inst, c, config, json);
    }
    let (sg, requests) = prepared(&inst)?;
    match solve(&sg, &requests, config) {
        SolveVerdict::Solution(paths) => {
            let raw: Vec<Vec<Vertex>> = paths.iter().map(|p| p.vertices().to_vec()).collect();
            emit_verdict(json, "solution", Some(&raw));
            Ok(EXIT_OK)
        }
        SolveVerdict::NoSolutionExhaustive => {
            emit_verdict(json, "infeasible", None);
            eprintln!("no solution exists");
            Ok(EXIT_INFEASIBLE)
        }
        SolveVerdict::BudgetExceeded => {
            emit_verdict(json, "budget-exceeded", None);
            eprintln!("search budget exceeded without a verdict");
            Ok(EXIT_BUDGET)
        }
    }
}

/// The slack pipeline: try every relaxed embedding, cheapest detours first.
/// Exhaustive sub-solves make a fully negative sweep a proof.
fn solve_relaxed(inst: &Instance, c: u32, config: &SolveConfig, json: bool) -> Result<u8, String> {
    if inst.requests.iter().any(|r| !r.forbidden.is_empty()) {
        return Err("forbidden components have no meaning in the relaxed problem".into());
    }
    let pairs: Vec<(Vertex, Vertex)> =
        inst.requests.iter().map(|r| (r.source, r.target)).collect();
    let mut budget_hit = false;
    for relaxed in reduce_capprox(&inst.graph, &pairs, c) {
        match solve(&relaxed.sg, &relaxed.requests, config) {
            SolveVerdict::Solution(paths) => {
                let raw = assemble_relaxed(&relaxed, &paths);
                emit_verdict(json, "solution", Some(&raw));
                return Ok(EXIT_OK);
            }
            SolveVerdict::NoSolutionExhaustive => {}
            SolveVerdict::BudgetExceeded => budget_hit = true,
        }
    }
    if budget_hit {
        emit_verdict(json, "budget-exceeded", None);
        eprintln!("search budget exceeded without a verdict");
        Ok(EXIT_BUDGET)
    } else {
        emit_verdict(json, "infeasible", None);
        eprintln!("no solution exists");
        Ok(EXIT_INFEASIBLE)
    }
}

fn cmd_oracle(input: &Path, slack: Option<u32>, cap: usize, json: bool) -> Result<u8, String> {
    let inst = load_instance(input)?;
    let outcome = match slack {
        None => {
            let (sg, requests) = prepared(&inst)?;
            oracle_solve_coloured(&sg, &requests, cap)
                .map(|o| o.map(|ps| ps.iter().map(|p| p.vertices().to_vec()).collect()))
        }
        Some(c) => {
            let pairs: Vec<(Vertex, Vertex)> =
                inst.requests.iter().map(|r| (r.source, r.target)).collect();
            oracle_solve(&inst.graph, &pairs, c, cap)
        }
    };
    match outcome {
        Ok(Some(paths)) => {
            emit_verdict(json, "solution", Some(&paths));
            Ok(EXIT_OK)
        }
        Ok(None) | Err(OracleError::Disconnected { .. }) => {
            emit_verdict(json, "infeasible", None);
            eprintln!("no solution exists");
            Ok(EXIT_INFEASIBLE)
        }
        Err(OracleError::EnumerationCapExceeded { cap }) => {
            emit_verdict(json, "budget-exceeded", None);
            eprintln!("enumeration cap {cap} exceeded");
            Ok(EXIT_BUDGET)
        }
    }
}

fn cmd_dag_solve(input: &Path, json: bool) -> Result<u8, String> {
    let (dag, pairs) = parse_dag(&read(input)?).map_err(|e| format!("{}: {e}", input.display()))?;
    if !terminals_pairwise_distinct(&pairs) {
        // Two pairs sharing a terminal can never be routed disjointly.
        emit_verdict(json, "infeasible", None);
        eprintln!("pairs share a terminal; no disjoint linkage exists");
        return Ok(EXIT_INFEASIBLE);
    }
    match solve_dag_disjoint(&dag, &pairs) {
        Ok(Some(paths)) => {
            emit_verdict(json, "solution", Some(&paths));
            Ok(EXIT_OK)
        }
        Ok(None) => {
            emit_verdict(json, "infeasible", None);
            eprintln!("no disjoint linkage exists");
            Ok(EXIT_INFEASIBLE)
        }
        Err(BlindError::CyclicInput) => Err("input digraph contains a cycle".into()),
        Err(BlindError::StateBudgetExceeded { budget }) => {
            emit_verdict(json, "budget-exceeded", None);
            eprintln!("product search exceeded {budget} states");
            Ok(EXIT_BUDGET)
        }
    }
}

fn cmd_dag_reduce(input: &Path, json: bool) -> Result<u8, String> {
    let (dag, pairs) = parse_dag(&read(input)?).map_err(|e| format!("{}: {e}", input.display()))?;
    if !terminals_pairwise_distinct(&pairs) {
        emit_verdict(json, "infeasible", None);
        eprintln!("pairs share a terminal; no disjoint linkage exists");
        return Ok(EXIT_INFEASIBLE);
    }
    let emb = dag_to_1dsp(&dag, &pairs).map_err(|e| e.to_string())?;
    let sg = emb.shortest_graph();
    let requests = emb.requests();
    if requests.iter().any(|r| r.validate(&sg).is_err()) {
        // A pair running against the topological order has no directed path.
        emit_verdict(json, "infeasible", None);
        eprintln!("a pair runs against the topological order; no linkage exists");
        return Ok(EXIT_INFEASIBLE);
    }
    let inst = Instance { graph: emb.graph.clone(), sources: vec![emb.root], requests };
    if json {
        let mut value = instance_json(&inst);
        value["original_n"] = json!(emb.original_vertex_count());
        println!("{value}");
    } else {
        println!(
            "# dag embedding: original vertices 0..{}, the rest subdivide arcs",
            emb.original_vertex_count()
        );
        print!("{}", serialize_instance(&inst));
    }
    Ok(EXIT_OK)
}

fn cmd_gen(n: usize, k: usize, requests: usize, seed: u64, p: f64, json: bool) -> Result<u8, String> {
    if n == 0 || k == 0 || requests < k {
        return Err("need n >= 1, k >= 1 and at least one request per colour".into());
    }
    if !(0.0..=1.0).contains(&p) {
        return Err("edge probability must lie in [0, 1]".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = random_instance(n, k, requests, p, &mut rng);
    let inst = Instance { graph: raw.graph.clone(), sources: raw.sources.clone(), requests: raw.requests() };
    if json {
        println!("{}", instance_json(&inst));
    } else {
        print!("{}", serialize_instance(&inst));
    }
    Ok(EXIT_OK)
}

fn violation_line(v: &SolutionViolation) -> String {
    match v {
        SolutionViolation::WrongCount { expected, actual } => {
            format!("expected {expected} paths, found {actual}")
        }
        SolutionViolation::EmptyPath { index } => format!("path {index} is empty"),
        SolutionViolation::WrongEndpoints { index } => {
            format!("path {index} misses its request terminals")
        }
        SolutionViolation::NotAPath { index } => format!("path {index} is not a simple path"),
        SolutionViolation::TooLong { index, length, limit } => {
            format!("path {index} has length {length}, limit {limit}")
        }
        SolutionViolation::NotAColourPath { index } => {
            format!("path {index} is not a colour path of its request")
        }
        SolutionViolation::ForbiddenVertexUsed { index, vertex } => {
            format!("path {index} enters forbidden vertex {vertex}")
        }
        SolutionViolation::IllegalSharing { first, second, vertex } => {
            format!("paths {first} and {second} share vertex {vertex}")
        }
    }
}

fn emit_report(json: bool, report: &SolutionReport) -> u8 {
    if json {
        let lines: Vec<String> = report.violations.iter().map(violation_line).collect();
        println!("{}", json!({ "ok": report.is_ok(), "violations": lines }));
    } else if report.is_ok() {
        println!("check: ok");
    } else {
        for v in &report.violations {
            println!("check: {}", violation_line(v));
        }
    }
    if report.is_ok() {
        EXIT_OK
    } else {
        EXIT_INFEASIBLE
    }
}

fn cmd_check(
    input: &Path,
    solution: &Path,
    slack: Option<u32>,
    json: bool,
) -> Result<u8, String> {
    let inst = load_instance(input)?;
    let paths =
        parse_solution(&read(solution)?).map_err(|e| format!("{}: {e}", solution.display()))?;
    if let Some(c) = slack {
        let pairs: Vec<(Vertex, Vertex)> =
            inst.requests.iter().map(|r| (r.source, r.target)).collect();
        return Ok(emit_report(json, &check_solution(&inst.graph, &pairs, &paths, c)));
    }
    let (sg, requests) = prepared(&inst)?;
    if paths.len() != requests.len() {
        let report = SolutionReport {
            violations: vec![SolutionViolation::WrongCount {
                expected: requests.len(),
                actual: paths.len(),
            }],
        };
        return Ok(emit_report(json, &report));
    }
    let mut coloured = Vec::with_capacity(paths.len());
    for (index, (vs, req)) in paths.iter().zip(&requests).enumerate() {
        match ColouredPath::new(&sg, req.colour, vs.clone()) {
            Ok(p) => coloured.push(p),
            Err(_) => {
                let report = SolutionReport {
                    violations: vec![SolutionViolation::NotAColourPath { index }],
                };
                return Ok(emit_report(json, &report));
            }
        }
    }
    Ok(emit_report(json, &check_solution_coloured(&sg, &requests, &coloured)))
}
