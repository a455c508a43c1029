use std::path::PathBuf;
use std::time::Instant;

use heurgen::harness::{
    evaluate_pool, run_test_suite, select_best, AgileRule, CandidateHeuristic, CandidateKind, EvalConfig, TaskEntry,
};
use heurgen_core::grounding::{GroundTask, StripsAction};
use heurgen_core::search::{bfs_oracle, SearchLimits, SearchStatus};

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn bw(problem: &str) -> TaskEntry {
    let dir = manifest().join("prompts/blocksworld");
    TaskEntry::load(&dir.join("domain.pddl"), &dir.join(format!("{problem}.pddl"))).unwrap()
}

fn entry(id: &str, task: GroundTask) -> TaskEntry {
    TaskEntry {
        id: id.into(),
        domain: "synthetic".into(),
        task,
    }
}

fn chain() -> GroundTask {
    GroundTask::from_strips(
        "chain",
        vec!["(p)".into(), "(q)".into()],
        vec![
            StripsAction::new("(a1)", vec![], vec![0], vec![]),
            StripsAction::new("(a2)", vec![0], vec![1], vec![]),
        ],
        vec![],
        vec![1],
    )
    .unwrap()
}

fn goal_in_init() -> GroundTask {
    GroundTask::from_strips("done", vec!["(p)".into()], vec![], vec![0], vec![0]).unwrap()
}

fn fixture_cmd(name: &str) -> CandidateHeuristic {
    CandidateHeuristic {
        id: name.into(),
        kind: CandidateKind::External(vec![
            "python3".into(),
            manifest().join("tests/fixtures").join(name).to_string_lossy().into_owned(),
        ]),
        provenance: "fixture".into(),
    }
}

fn cfg(limit: f64) -> EvalConfig {
    EvalConfig {
        time_limit: limit,
        workers: 4,
        ..EvalConfig::default()
    }
}

#[test]
fn blind_on_goal_satisfied_task() {
    let recs = evaluate_pool(&[CandidateHeuristic::builtin("blind")], &[entry("t", goal_in_init())], &cfg(300.0)).unwrap();
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0].status, SearchStatus::Solved);
    assert_eq!(recs[0].agile, 1.0);
    assert_eq!(recs[0].plan_length, Some(0));
}

#[test]
fn immediately_exiting_candidate_fails_everywhere() {
    let tasks = vec![bw("p01"), bw("p02"), bw("p03")];
    let recs = evaluate_pool(&[fixture_cmd("exit_now.py")], &tasks, &cfg(300.0)).unwrap();
    assert_eq!(recs.len(), 3);
    for r in &recs {
        assert_eq!(r.status, SearchStatus::HeuristicFailure);
        assert_eq!(r.agile, 0.0);
        assert!(r.note.as_deref().unwrap().contains("exited"), "{:?}", r.note);
    }
}

#[test]
fn ff_expands_no_more_than_blind_on_chain() {
    let pool = [CandidateHeuristic::builtin("blind"), CandidateHeuristic::builtin("ff")];
    let recs = evaluate_pool(&pool, &[entry("chain", chain())], &cfg(300.0)).unwrap();
    let (blind, ff) = (&recs[0], &recs[1]);
    assert_eq!((blind.candidate.as_str(), ff.candidate.as_str()), ("blind", "ff"));
    assert!(ff.solved() && blind.solved());
    assert!(ff.expansions <= blind.expansions);
}

#[test]
fn hung_adapter_is_a_time_limit() {
    let start = Instant::now();
    let recs = evaluate_pool(&[fixture_cmd("hang.py")], &[bw("p02")], &cfg(1.5)).unwrap();
    assert_eq!(recs[0].status, SearchStatus::TimeLimit);
    assert!(start.elapsed().as_secs_f64() < 1.5 + 2.0);
}

#[test]
fn records_are_ordered_regardless_of_workers() {
    let pool: Vec<CandidateHeuristic> = ["goal-count", "add", "blind", "ff"]
        .iter()
        .map(|n| CandidateHeuristic::builtin(n))
        .collect();
    let tasks = vec![bw("p03"), bw("p01"), bw("p02")];
    let key = |workers| {
        let c = EvalConfig { workers, ..cfg(300.0) };
        evaluate_pool(&pool, &tasks, &c)
            .unwrap()
            .into_iter()
            .map(|r| (r.candidate, r.task, r.status, r.expansions, r.plan_length))
            .collect::<Vec<_>>()
    };
    let one = key(1);
    assert_eq!(one, key(8));
    let order: Vec<(String, String)> = one.iter().map(|r| (r.0.clone(), r.1.clone())).collect();
    let mut sorted = order.clone();
    sorted.sort();
    assert_eq!(order, sorted);
}

#[test]
fn accumulated_agile_is_bounded_by_task_count() {
    let pool: Vec<CandidateHeuristic> = ["goal-count", "ff"].iter().map(|n| CandidateHeuristic::builtin(n)).collect();
    let tasks = vec![bw("p01"), bw("p02"), bw("p03")];
    let recs = evaluate_pool(&pool, &tasks, &cfg(300.0)).unwrap();
    let report = select_best(&recs, AgileRule::Maximize).unwrap();
    for s in &report.standings {
        assert!(s.agile <= tasks.len() as f64);
    }
}

#[test]
fn duplicate_ids_are_refused() {
    let pool = [CandidateHeuristic::builtin("ff"), CandidateHeuristic::builtin("ff")];
    assert!(evaluate_pool(&pool, &[bw("p01")], &cfg(300.0)).is_err());
    assert!(evaluate_pool(&[], &[bw("p01")], &cfg(300.0)).is_err());
    assert!(evaluate_pool(&pool[..1], &[bw("p01")], &cfg(1.0)).is_err());
}

#[test]
fn test_suite_rows() {
    let blind = CandidateHeuristic::builtin("blind");
    assert!(run_test_suite(&blind, &[], &cfg(1800.0)).unwrap().is_empty());

    let tasks = vec![bw("p01"), bw("p02"), bw("p03"), entry("done", goal_in_init())];
    let rows = run_test_suite(&blind, &tasks, &cfg(1800.0)).unwrap();
    let solvable = tasks
        .iter()
        .filter(|t| bfs_oracle(&t.task, SearchLimits::time(std::time::Duration::from_secs(60))).solved())
        .count();
    assert_eq!(rows.iter().filter(|r| r.solved).count(), solvable);
    for (row, t) in rows.iter().zip({
        let mut sorted: Vec<&TaskEntry> = tasks.iter().collect();
        sorted.sort_by(|a, b| a.id.cmp(&b.id));
        sorted
    }) {
        assert_eq!(row.task, t.id);
        if row.solved {
            let len = row.plan_length.unwrap();
            assert!(len > 0 || t.task.is_goal(&t.task.init));
        }
        assert!(row.search_time <= row.wall_time);
    }
}
