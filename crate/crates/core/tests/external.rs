use std::path::PathBuf;
use std::time::{Duration, Instant};

use heurgen_core::external::{ExternalError, ExternalHeuristic, ProcessLimits};
use heurgen_core::grounding::{ground, GroundTask};
use heurgen_core::heuristics::baseline::GoalCount;
use heurgen_core::heuristics::by_name;
use heurgen_core::pddl::{parse_domain, parse_problem};
use heurgen_core::search::{gbfs, SearchLimits, SearchStatus};

fn fixture(name: &str) -> Vec<String> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    vec!["python3".into(), path.display().to_string()]
}

fn task(problem: &str) -> GroundTask {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("benchmarks/blocksworld");
    let d = parse_domain(&std::fs::read_to_string(dir.join("domain.pddl")).unwrap()).unwrap();
    let p = parse_problem(&std::fs::read_to_string(dir.join(problem)).unwrap(), &d).unwrap();
    ground(&d, &p).unwrap()
}

#[test]
fn external_goal_count_reproduces_builtin_search() {
    let t = task("p03.pddl");
    let limits = SearchLimits::time(Duration::from_secs(60));
    let mut ext = ExternalHeuristic::spawn(&fixture("goal_count.py"), &t, &ProcessLimits::default()).unwrap();
    let via_process = gbfs(&t, &mut ext, limits);
    let builtin = gbfs(&t, &mut GoalCount::new(&t), limits);
    assert_eq!(via_process.status, SearchStatus::Solved);
    assert_eq!(via_process.plan, builtin.plan);
    assert_eq!(via_process.expansions, builtin.expansions);
    assert_eq!(via_process.evaluations, builtin.evaluations);
}

#[test]
fn ext_prefix_goes_through_registry() {
    let t = task("p01.pddl");
    let cmd = format!("ext:{}", shell_words(&fixture("goal_count.py")));
    let mut h = by_name(&cmd, &t, &ProcessLimits::default()).unwrap();
    assert_eq!(h.evaluate(&t.init).unwrap(), 1.0);
}

fn shell_words(argv: &[String]) -> String {
    argv.iter().map(|a| format!("'{a}'")).collect::<Vec<_>>().join(" ")
}

#[test]
fn hung_process_becomes_time_limit() {
    let t = task("p02.pddl");
    let mut h = ExternalHeuristic::spawn(&fixture("hang.py"), &t, &ProcessLimits::default()).unwrap();
    let start = Instant::now();
    let r = gbfs(&t, &mut h, SearchLimits::time(Duration::from_millis(800)));
    assert_eq!(r.status, SearchStatus::TimeLimit);
    assert!(start.elapsed() < Duration::from_secs(5));
}

#[test]
fn crash_is_heuristic_failure_with_stderr() {
    let t = task("p02.pddl");
    let mut h = ExternalHeuristic::spawn(&fixture("crash.py"), &t, &ProcessLimits::default()).unwrap();
    let r = gbfs(&t, &mut h, SearchLimits::time(Duration::from_secs(10)));
    assert_eq!(r.status, SearchStatus::HeuristicFailure);
    let msg = r.failure.unwrap();
    assert!(msg.contains("lookup table is empty"), "{msg}");
}

#[test]
fn negative_values_are_rejected() {
    let t = task("p02.pddl");
    let mut h = ExternalHeuristic::spawn(&fixture("negative.py"), &t, &ProcessLimits::default()).unwrap();
    let r = gbfs(&t, &mut h, SearchLimits::time(Duration::from_secs(10)));
    assert_eq!(r.status, SearchStatus::HeuristicFailure);
}

#[test]
fn init_failures() {
    let t = task("p01.pddl");
    let lim = ProcessLimits::default();
    match ExternalHeuristic::spawn(&fixture("bad_init.py"), &t, &lim) {
        Err(ExternalError::Exited(stderr)) => assert!(stderr.contains("cannot parse task")),
        other => panic!("unexpected {:?}", other.err()),
    }
    assert!(matches!(
        ExternalHeuristic::spawn(&fixture("reject.py"), &t, &lim),
        Err(ExternalError::Rejected(m)) if m == "unsupported domain"
    ));
    let quick = ProcessLimits {
        init_timeout: Duration::from_millis(300),
        ..ProcessLimits::default()
    };
    assert!(matches!(
        ExternalHeuristic::spawn(&fixture("slow_init.py"), &t, &quick),
        Err(ExternalError::InitTimeout(_))
    ));
    assert!(matches!(
        ExternalHeuristic::spawn(&["/nonexistent/heuristic".into()], &t, &lim),
        Err(ExternalError::Spawn { .. })
    ));
}

#[test]
fn memory_cap_stops_runaway_allocation() {
    let t = task("p02.pddl");
    let lim = ProcessLimits {
        mem_bytes: Some(512 * 1024 * 1024),
        ..ProcessLimits::default()
    };
    let mut h = ExternalHeuristic::spawn(&fixture("memory_hog.py"), &t, &lim).unwrap();
    let r = gbfs(&t, &mut h, SearchLimits::time(Duration::from_secs(10)));
    assert_eq!(r.status, SearchStatus::HeuristicFailure);
    assert!(r.failure.unwrap().contains("MemoryError"));
}

#[test]
fn documented_init_line_matches_the_encoder() {
    use heurgen_core::external::wire::{Request, WireTask};
    let doc = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/wire-protocol.md")).unwrap();
    let line = doc.lines().find(|l| l.starts_with("{\"kind\":\"init\"")).unwrap();
    let d = parse_domain(
        "(define (domain blocksworld) (:requirements :strips)
          (:predicates (clear ?x) (on-table ?x) (arm-empty) (holding ?x))
          (:action pickup :parameters (?ob) :precondition (and (clear ?ob) (on-table ?ob) (arm-empty))
            :effect (and (holding ?ob) (not (clear ?ob)) (not (on-table ?ob)) (not (arm-empty))))
          (:action putdown :parameters (?ob) :precondition (holding ?ob)
            :effect (and (clear ?ob) (arm-empty) (on-table ?ob) (not (holding ?ob)))))",
    )
    .unwrap();
    let p = parse_problem(
        "(define (problem one) (:domain blocksworld) (:objects b1)
          (:init (clear b1) (on-table b1) (arm-empty)) (:goal (and (holding b1))))",
        &d,
    )
    .unwrap();
    let t = ground(&d, &p).unwrap();
    let req = Request::Init {
        task: WireTask::from_task(&t),
    };
    assert_eq!(req.to_line(), format!("{line}\n"));
}
