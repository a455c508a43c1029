use std::path::PathBuf;
use std::process::Command;
use std::time::Duration;

use heurgen::generation::prompt::{bundled_examples, independent_examples};
use heurgen_core::pddl::{parse_domain, parse_problem};
use heurgen_core::search::{bfs_oracle, SearchLimits};
use heurgen_core::validator::{parse_plan, validate_plan};
use heurgen_core::{ground, GroundTask};

fn grounded(domain: &str, task: &str) -> GroundTask {
    let d = parse_domain(domain).unwrap();
    ground(&d, &parse_problem(task, &d).unwrap()).unwrap()
}

#[test]
fn example_plans_are_valid_and_optimal() {
    for ex in bundled_examples() {
        let t = grounded(&ex.domain, &ex.task);
        let plan = parse_plan(ex.plan.as_deref().unwrap());
        assert!(validate_plan(&t, &plan).unwrap().valid, "{}", ex.name);
        let best = bfs_oracle(&t, SearchLimits::time(Duration::from_secs(60)));
        assert_eq!(plan.len(), best.plan.len(), "{}", ex.name);
    }
}

#[test]
fn blocksworld_corpus_domain_shape() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("prompts/blocksworld");
    let d = parse_domain(&std::fs::read_to_string(dir.join("domain.pddl")).unwrap()).unwrap();
    let mut preds: Vec<&str> = d.predicates.iter().map(|p| p.name.as_str()).collect();
    preds.sort_unstable();
    assert_eq!(preds, ["arm-empty", "clear", "holding", "on", "on-table"]);
    assert_eq!(d.actions.len(), 4);
}

#[test]
fn example_heuristics_are_valid_python() {
    let mut sources: Vec<String> = bundled_examples().into_iter().map(|e| e.heuristic).collect();
    sources.extend(independent_examples().into_iter().map(|e| e.heuristic));
    sources.push(heurgen::generation::prompt::INTERFACE.to_string());
    for src in sources {
        let out = Command::new("python3")
            .args(["-c", "import ast, sys; ast.parse(sys.stdin.read())"])
            .stdin(std::process::Stdio::piped())
            .stderr(std::process::Stdio::piped())
            .spawn()
            .and_then(|mut c| {
                use std::io::Write;
                c.stdin.take().unwrap().write_all(src.as_bytes())?;
                c.wait_with_output()
            })
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}
