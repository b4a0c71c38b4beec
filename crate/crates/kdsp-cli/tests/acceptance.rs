//! Acceptance sweeps. Every test prints one `acceptance N (...): pass/FAIL`
//! line (straight to the process stdout, so the lines survive test capture)
//! and then asserts, so a red build always names the criterion that broke.

use std::collections::BTreeSet;
use std::io::Write as _;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kdsp::bicolored::{all_components, conflicting_components};
use kdsp::blind::{solve_dag_disjoint, solve_blind};
use kdsp::format::{serialize_instance, Instance};
use kdsp::gen::{
    conflict_rich_graph, random_connected_graph, random_dag, random_dag_pairs, random_graph,
    random_instance,
};
use kdsp::graph::{ColouredPath, Digraph, Request, Vertex};
use kdsp::layering::build_shortest_graph;
use kdsp::oracle::{check_solution_coloured, colour_paths_between, oracle_solve_dag};
use kdsp::reductions::dag_to_1dsp;
use kdsp::solver::{solve, SolveConfig, SolveVerdict};

fn conclude(label: &str, ok: bool, detail: &str) {
    let status = if ok { "pass" } else { "FAIL" };
    let mut out = std::io::stdout();
    let _ = writeln!(out, "acceptance {label}: {status} — {detail}");
    let _ = out.flush();
    assert!(ok, "acceptance {label} failed: {detail}");
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_kdsp")).args(args).output().expect("binary runs");
    (out.status.code().expect("exit code"), String::from_utf8(out.stdout).expect("utf8"))
}

fn write_file(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

/// Exhaustive segment solver against the colour-path oracle, through the
/// command line, on 300 seeded instances.
#[test]
fn criterion_1_solver_verdicts_match_the_oracle() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC1);
    let (mut feasible, mut infeasible) = (0u32, 0u32);
    let mut bad: Vec<String> = Vec::new();
    for i in 0..300 {
        let n = rng.gen_range(3..=8);
        let k = rng.gen_range(1..=2usize);
        let l = rng.gen_range(k..=3);
        let p = rng.gen_range(0.3..0.7);
        let raw = random_instance(n, k, l, p, &mut rng);
        let inst = Instance {
            graph: raw.graph.clone(),
            sources: raw.sources.clone(),
            requests: raw.requests(),
        };
        let file = write_file(dir.path(), &format!("i{i}.txt"), &serialize_instance(&inst));
        let (solve_code, solve_out) = run_cli(&["solve", &file, "--exhaustive"]);
        let (oracle_code, _) = run_cli(&["oracle", &file]);
        if solve_code != oracle_code {
            bad.push(format!("instance {i}: solve exited {solve_code}, oracle {oracle_code}"));
            continue;
        }
        match solve_code {
            0 => {
                feasible += 1;
                let sol = write_file(dir.path(), &format!("s{i}.txt"), &solve_out);
                let (check_code, check_out) = run_cli(&["check", &file, &sol]);
                if check_code != 0 {
                    bad.push(format!("instance {i}: solution rejected: {check_out}"));
                }
            }
            1 => infeasible += 1,
            other => bad.push(format!("instance {i}: unexpected exit {other}")),
        }
    }
    let secs = started.elapsed().as_secs_f32();
    let ok = bad.is_empty() && secs < 300.0;
    conclude(
        "1 (exhaustive solve vs oracle, CLI)",
        ok,
        &format!(
            "300 instances, {feasible} feasible / {infeasible} infeasible, {secs:.1}s{}",
            bad.first().map(|b| format!("; first failure: {b}")).unwrap_or_default()
        ),
    );
}

fn valid_dag_linkage(dag: &Digraph, pairs: &[(Vertex, Vertex)], paths: &[Vec<Vertex>]) -> bool {
    if paths.len() != pairs.len() {
        return false;
    }
    let mut seen = BTreeSet::new();
    for (path, &(s, t)) in paths.iter().zip(pairs) {
        if path.first() != Some(&s) || path.last() != Some(&t) {
            return false;
        }
        if path.windows(2).any(|w| !dag.has_arc(w[0], w[1])) {
            return false;
        }
        if path.iter().any(|&v| !seen.insert(v)) {
            return false;
        }
    }
    true
}

/// Product-search DAG solver against brute-force path enumeration.
#[test]
fn criterion_2_dag_solver_matches_brute_force() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC2);
    let (mut feasible, mut infeasible) = (0u32, 0u32);
    let mut bad: Vec<String> = Vec::new();
    let mut done = 0;
    while done < 300 {
        let n = rng.gen_range(2..=10);
        let l = rng.gen_range(1..=3usize);
        if 2 * l > n {
            continue;
        }
        let dag = random_dag(n, rng.gen_range(0.2..0.6), &mut rng);
        let Some(pairs) = random_dag_pairs(&dag, l, &mut rng) else {
            continue;
        };
        done += 1;
        let fast = solve_dag_disjoint(&dag, &pairs).expect("acyclic by construction");
        let brute = oracle_solve_dag(&dag, &pairs);
        if fast.is_some() != brute.is_some() {
            bad.push(format!(
                "dag {done}: product search says {}, brute force says {}",
                fast.is_some(),
                brute.is_some()
            ));
            continue;
        }
        match fast {
            Some(paths) => {
                feasible += 1;
                if !valid_dag_linkage(&dag, &pairs, &paths) {
                    bad.push(format!("dag {done}: returned linkage invalid"));
                }
            }
            None => infeasible += 1,
        }
    }
    let secs = started.elapsed().as_secs_f32();
    let ok = bad.is_empty() && secs < 120.0;
    conclude(
        "2 (DAG solver vs brute force)",
        ok,
        &format!(
            "300 dags, {feasible} feasible / {infeasible} infeasible, {secs:.1}s{}",
            bad.first().map(|b| format!("; first failure: {b}")).unwrap_or_default()
        ),
    );
}

/// The level maps of every bi-coloured component satisfy the offset equation
/// at every vertex, integer-exactly.
#[test]
fn criterion_3_component_offsets_are_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC3);
    let mut checked = 0u64;
    let mut bad: Vec<String> = Vec::new();
    for round in 0..500 {
        let n = rng.gen_range(2..=20);
        let g = random_graph(n, rng.gen_range(0.15..0.6), &mut rng);
        let k = rng.gen_range(2..=3usize);
        let sources: Vec<Vertex> = (0..k).map(|_| rng.gen_range(0..n)).collect();
        let sg = build_shortest_graph(&g, &sources);
        for comp in all_components(&sg) {
            checked += 1;
            let violations = comp.offset_violations(&sg);
            if !violations.is_empty() {
                bad.push(format!("round {round}: offset fails at {violations:?}"));
            }
        }
    }
    conclude(
        "3 (component offset equation)",
        bad.is_empty(),
        &format!(
            "500 layered graphs, {checked} components, zero violations expected{}",
            bad.first().map(|b| format!("; first failure: {b}")).unwrap_or_default()
        ),
    );
}

/// A colour path meets any component carrying its colour in one contiguous
/// stretch; the intersection probe must never report a gap.
#[test]
fn criterion_4_path_component_intersections_are_contiguous() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC3); // the same sweep as criterion 3
    let mut pairs = 0u64;
    let mut bad: Vec<String> = Vec::new();
    for round in 0..500 {
        let n = rng.gen_range(2..=20);
        let g = random_graph(n, rng.gen_range(0.15..0.6), &mut rng);
        let k = rng.gen_range(2..=3usize);
        let sources: Vec<Vertex> = (0..k).map(|_| rng.gen_range(0..n)).collect();
        let sg = build_shortest_graph(&g, &sources);
        let comps = all_components(&sg);
        if comps.is_empty() {
            continue;
        }
        for colour in 0..k {
            for s in 0..n {
                for t in 0..n {
                    for vs in colour_paths_between(&sg, colour, s, t, &BTreeSet::new(), 3) {
                        let path = ColouredPath::new(&sg, colour, vs).unwrap();
                        for comp in
                            comps.iter().filter(|c| c.colour_a == colour || c.colour_b == colour)
                        {
                            pairs += 1;
                            if let Err(e) = kdsp::bicolored::path_component_intersection(&path, comp)
                            {
                                bad.push(format!("round {round}: {e}"));
                            }
                        }
                    }
                }
            }
        }
    }
    let ok = bad.is_empty() && pairs >= 10_000;
    conclude(
        "4 (intersection contiguity)",
        ok,
        &format!(
            "{pairs} path/component pairs, zero gaps expected{}",
            bad.first().map(|b| format!("; first failure: {b}")).unwrap_or_default()
        ),
    );
}

/// Colour-distinct shortest paths sharing three or more vertices expose
/// exactly one conflicting component, and it swallows every shared vertex.
#[test]
fn criterion_5_conflicting_components_exist_and_are_unique() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC5);
    let mut conflicting = 0u32;
    let mut bad: Vec<String> = Vec::new();
    let mut rounds = 0u32;
    while conflicting < 1_000 && rounds < 4_000 {
        rounds += 1;
        let sg = if rounds % 3 != 0 {
            conflict_rich_graph(&mut rng)
        } else {
            let n = rng.gen_range(4..=12);
            let g = random_graph(n, rng.gen_range(0.3..0.7), &mut rng);
            let (s0, s1) = (rng.gen_range(0..n), rng.gen_range(0..n));
            build_shortest_graph(&g, &[s0, s1])
        };
        if sg.vertex_count() > 12 {
            continue;
        }
        let n = sg.vertex_count();
        let collect = |colour| {
            let mut paths = Vec::new();
            for s in 0..n {
                for t in 0..n {
                    for vs in colour_paths_between(&sg, colour, s, t, &BTreeSet::new(), 3) {
                        paths.push(ColouredPath::new(&sg, colour, vs).unwrap());
                    }
                }
            }
            paths
        };
        let paths0 = collect(0);
        let paths1 = collect(1);
        for p0 in paths0.iter().take(60) {
            for p1 in paths1.iter().take(60) {
                let shared: Vec<Vertex> =
                    p0.vertices().iter().copied().filter(|&v| p1.contains(v)).collect();
                if shared.len() < 3 {
                    continue;
                }
                conflicting += 1;
                let found = conflicting_components(&sg, p0, p1);
                if found.len() != 1 {
                    bad.push(format!("{} conflicting components for one pair", found.len()));
                } else if shared.iter().any(|&v| !found[0].component.contains(v)) {
                    bad.push("a shared vertex escapes the conflicting component".into());
                }
            }
        }
    }
    let ok = bad.is_empty() && conflicting >= 1_000;
    conclude(
        "5 (conflicting component existence and uniqueness)",
        ok,
        &format!(
            "{conflicting} conflicting pairs over {rounds} graphs{}",
            bad.first().map(|b| format!("; first failure: {b}")).unwrap_or_default()
        ),
    );
}

/// The additive-slack pipeline (detour enumeration + exhaustive segment
/// solves, through the CLI) agrees with the raw relaxed oracle.
#[test]
fn criterion_6_slack_pipeline_matches_the_relaxed_oracle() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC6);
    let (mut feasible, mut infeasible) = (0u32, 0u32);
    let mut bad: Vec<String> = Vec::new();
    for i in 0..100 {
        let n = rng.gen_range(2..=7);
        let l = rng.gen_range(1..=2usize);
        let g = random_connected_graph(n, rng.gen_range(0.3..0.7), &mut rng);
        let pairs: Vec<(Vertex, Vertex)> =
            (0..l).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
        let slack = 1 + (i % 2) as u32;
        let inst = Instance {
            graph: g,
            sources: pairs.iter().map(|&(s, _)| s).collect(),
            requests: pairs.iter().enumerate().map(|(c, &(s, t))| Request::new(s, t, c)).collect(),
        };
        let file = write_file(dir.path(), &format!("c{i}.txt"), &serialize_instance(&inst));
        let slack_s = slack.to_string();
        let (solve_code, solve_out) =
            run_cli(&["solve", &file, "--slack", &slack_s, "--exhaustive"]);
        let (oracle_code, _) = run_cli(&["oracle", &file, "--slack", &slack_s]);
        if solve_code != oracle_code {
            bad.push(format!("instance {i}: solve exited {solve_code}, oracle {oracle_code}"));
            continue;
        }
        match solve_code {
            0 => {
                feasible += 1;
                let sol = write_file(dir.path(), &format!("cs{i}.txt"), &solve_out);
                let (check_code, check_out) =
                    run_cli(&["check", &file, &sol, "--slack", &slack_s]);
                if check_code != 0 {
                    bad.push(format!("instance {i}: relaxed solution rejected: {check_out}"));
                }
            }
            1 => infeasible += 1,
            other => bad.push(format!("instance {i}: unexpected exit {other}")),
        }
    }
    let secs = started.elapsed().as_secs_f32();
    let ok = bad.is_empty();
    conclude(
        "6 (slack relaxation vs relaxed oracle, CLI)",
        ok,
        &format!(
            "100 instances, {feasible} feasible / {infeasible} infeasible, {secs:.1}s{}",
            bad.first().map(|b| format!("; first failure: {b}")).unwrap_or_default()
        ),
    );
}

/// Embedding a DAG linkage question as a single-colour levelled instance
/// preserves the verdict of the direct DAG solver.
#[test]
fn criterion_7_dag_embedding_preserves_verdicts() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC7);
    let (mut feasible, mut infeasible, mut screened) = (0u32, 0u32, 0u32);
    let mut bad: Vec<String> = Vec::new();
    let mut done = 0;
    while done < 200 {
        let n = rng.gen_range(2..=8);
        let l = rng.gen_range(1..=2usize);
        if 2 * l > n {
            continue;
        }
        let dag = random_dag(n, rng.gen_range(0.2..0.6), &mut rng);
        let Some(pairs) = random_dag_pairs(&dag, l, &mut rng) else {
            continue;
        };
        done += 1;
        let direct = solve_dag_disjoint(&dag, &pairs).expect("acyclic").is_some();
        let emb = dag_to_1dsp(&dag, &pairs).expect("random dags are root-reachable");
        let sg = emb.shortest_graph();
        let requests = emb.requests();
        let embedded = if requests.iter().any(|r| r.validate(&sg).is_err()) {
            // A pair against the topological order has no directed path.
            screened += 1;
            false
        } else {
            match solve(&sg, &requests, &SolveConfig { exhaustive: true, ..Default::default() }) {
                SolveVerdict::Solution(paths) => {
                    let raw: Vec<Vec<Vertex>> =
                        paths.iter().map(|p| emb.pull_back(p.vertices())).collect();
                    if !valid_dag_linkage(&dag, &pairs, &raw) {
                        bad.push(format!("dag {done}: embedded solution does not pull back"));
                    }
                    true
                }
                SolveVerdict::NoSolutionExhaustive => false,
                SolveVerdict::BudgetExceeded => {
                    bad.push(format!("dag {done}: embedded solve ran out of budget"));
                    continue;
                }
            }
        };
        if direct != embedded {
            bad.push(format!("dag {done}: direct {direct}, embedded {embedded}"));
        } else if direct {
            feasible += 1;
        } else {
            infeasible += 1;
        }
    }
    conclude(
        "7 (DAG embedding preserves verdicts)",
        bad.is_empty(),
        &format!(
            "200 dags, {feasible} feasible / {infeasible} infeasible ({screened} screened), {}",
            bad.first().map(|b| format!("first failure: {b}")).unwrap_or_else(|| "agree".into())
        ),
    );
}

/// Soundness gate: across ten thousand fuzzed solver runs under assorted
/// budgets, every claimed solution passes the independent validator.
#[test]
fn criterion_8_every_solution_survives_the_validator() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC8);
    let mut solutions = 0u32;
    let mut blind_runs = 0u32;
    let mut bad: Vec<String> = Vec::new();
    for round in 0u32..10_000 {
        let n = rng.gen_range(2..=8);
        let k = rng.gen_range(1..=3usize);
        let l = rng.gen_range(k..=3.max(k));
        let raw = random_instance(n, k, l, rng.gen_range(0.25..0.7), &mut rng);
        let sg = raw.shortest_graph();
        let mut requests = raw.requests();
        // A slice of the runs forbids a component to one request.
        if round % 5 == 0 {
            let comps = all_components(&sg);
            for req in requests.iter_mut() {
                if let Some(c) = comps.iter().find(|c| {
                    (c.colour_a == req.colour || c.colour_b == req.colour)
                        && !c.contains(req.source)
                        && !c.contains(req.target)
                }) {
                    req.forbidden.push(std::sync::Arc::new(c.clone()));
                    break;
                }
            }
        }
        let config = match round % 10 {
            0..=5 => SolveConfig::default(),
            6 => SolveConfig { segment_budget: 1, ..Default::default() },
            7 => SolveConfig { segment_budget: 3, forbidden_budget: 1, ..Default::default() },
            _ => SolveConfig { exhaustive: true, ..Default::default() },
        };
        match solve(&sg, &requests, &config) {
            SolveVerdict::Solution(paths) => {
                solutions += 1;
                let report = check_solution_coloured(&sg, &requests, &paths);
                if !report.is_ok() {
                    bad.push(format!("round {round}: {:?}", report.violations[0]));
                }
            }
            SolveVerdict::NoSolutionExhaustive | SolveVerdict::BudgetExceeded => {}
        }
        // Interleave direct blind-case runs with distinct terminals.
        if round % 7 == 0 {
            if let Some(binst) = kdsp::gen::random_blind_instance(n, k, 2, 0.5, &mut rng) {
                blind_runs += 1;
                if let Ok(Some(paths)) = solve_blind(&binst.0, &binst.1, 1 << 20) {
                    let report = check_solution_coloured(&binst.0, &binst.1, &paths);
                    if !report.is_ok() {
                        bad.push(format!("round {round}: blind {:?}", report.violations[0]));
                    }
                }
            }
        }
    }
    let secs = started.elapsed().as_secs_f32();
    conclude(
        "8 (soundness fuzz gate)",
        bad.is_empty(),
        &format!(
            "10000 solver runs + {blind_runs} blind runs, {solutions} solutions all validated, {secs:.1}s{}",
            bad.first().map(|b| format!("; first failure: {b}")).unwrap_or_default()
        ),
    );
}
