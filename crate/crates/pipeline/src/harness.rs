//! Candidate evaluation, selection and test-set reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufRead, BufReader, Write as _};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use heurgen_core::external::{ExternalError, ExternalHeuristic, ProcessLimits};
use heurgen_core::heuristics::{by_name, BuildError, Heuristic};
use heurgen_core::pddl::{parse_domain, parse_problem, ParseError};
use heurgen_core::search::{gbfs, SearchLimits, SearchStatus};
use heurgen_core::validator::validate_plan;
use heurgen_core::{ground, GroundTask};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const TRAIN_TIME_LIMIT: f64 = 300.0;
pub const TEST_TIME_LIMIT: f64 = 1800.0;
/// 8 GiB.
pub const DEFAULT_MEM_CAP: usize = 8 << 30;

/// Agile sums closer than this count as tied.
const AGILE_EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("time limit must exceed one second, got {0}")]
    Domain(f64),
    #[error("candidate pool is empty")]
    EmptyPool,
    #[error("duplicate candidate id {0}")]
    DuplicateId(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}: {source}")]
    Json {
        path: PathBuf,
        line: usize,
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("{path}: {message}")]
    Ground { path: PathBuf, message: String },
}

/// IPC agile score: 1 below one second, 0 at the limit, log-interpolated
/// in between.
pub fn agile_score(t: f64, limit: f64) -> Result<f64, HarnessError> {
    // NaN compares false, so it errors here too
    if limit.is_nan() || limit <= 1.0 {
        return Err(HarnessError::Domain(limit));
    }
    Ok(if t < 1.0 {
        1.0
    } else if t >= limit {
        0.0
    } else {
        1.0 - t.ln() / limit.ln()
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "lowercase")]
pub enum CandidateKind {
    Builtin(String),
    External(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateHeuristic {
    pub id: String,
    pub kind: CandidateKind,
    #[serde(default)]
    pub provenance: String,
}

impl CandidateHeuristic {
    pub fn builtin(name: &str) -> Self {
        Self {
            id: name.to_string(),
            kind: CandidateKind::Builtin(name.to_string()),
            provenance: "builtin".into(),
        }
    }

    pub fn build<'t>(
        &self,
        task: &'t GroundTask,
        limits: &ProcessLimits,
    ) -> Result<Box<dyn Heuristic + 't>, BuildError> {
        match &self.kind {
            CandidateKind::Builtin(name) => by_name(name, task, limits),
            CandidateKind::External(argv) => Ok(Box::new(ExternalHeuristic::spawn(argv, task, limits)?)),
        }
    }
}

/// A grounded training or test task.
#[derive(Debug, Clone)]
pub struct TaskEntry {
    pub id: String,
    pub domain: String,
    pub task: GroundTask,
}

impl TaskEntry {
    /// Parses and grounds a problem file; the id is the file stem.
    pub fn load(domain_file: &Path, problem_file: &Path) -> Result<Self, HarnessError> {
        let read = |p: &Path| {
            fs::read_to_string(p).map_err(|source| HarnessError::Io {
                path: p.to_path_buf(),
                source,
            })
        };
        let dom = parse_domain(&read(domain_file)?).map_err(|source| HarnessError::Parse {
            path: domain_file.to_path_buf(),
            source,
        })?;
        let prob = parse_problem(&read(problem_file)?, &dom).map_err(|source| HarnessError::Parse {
            path: problem_file.to_path_buf(),
            source,
        })?;
        let task = ground(&dom, &prob).map_err(|e| HarnessError::Ground {
            path: problem_file.to_path_buf(),
            message: e.to_string(),
        })?;
        let id = problem_file
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| task.problem_name.clone());
        Ok(Self {
            id: format!("{}/{}", task.domain_name, id),
            domain: task.domain_name.clone(),
            task,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub candidate: String,
    pub task: String,
    pub domain: String,
    pub status: SearchStatus,
    /// Seconds from heuristic construction to search end; feeds the agile score.
    pub wall_time: f64,
    /// Seconds spent in search proper.
    pub search_time: f64,
    pub expansions: u64,
    pub evaluations: u64,
    pub plan_length: Option<usize>,
    pub agile: f64,
    pub note: Option<String>,
}

impl EvalRecord {
    pub fn solved(&self) -> bool {
        self.status == SearchStatus::Solved
    }
}

#[derive(Debug, Clone)]
pub struct EvalConfig {
    /// Seconds per (candidate, task) run.
    pub time_limit: f64,
    /// Search memory cap in bytes.
    pub mem_cap: Option<usize>,
    /// Address-space cap for external heuristic processes.
    pub process_mem: Option<u64>,
    pub workers: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            time_limit: TRAIN_TIME_LIMIT,
            mem_cap: Some(DEFAULT_MEM_CAP),
            process_mem: Some(DEFAULT_MEM_CAP as u64),
            workers: thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

fn run_one(cand: &CandidateHeuristic, entry: &TaskEntry, cfg: &EvalConfig) -> EvalRecord {
    let start = Instant::now();
    let budget = Duration::from_secs_f64(cfg.time_limit);
    let deadline = start + budget;
    let mut rec = EvalRecord {
        candidate: cand.id.clone(),
        task: entry.id.clone(),
        domain: entry.domain.clone(),
        status: SearchStatus::HeuristicFailure,
        wall_time: 0.0,
        search_time: 0.0,
        expansions: 0,
        evaluations: 0,
        plan_length: None,
        agile: 0.0,
        note: None,
    };
    let limits = ProcessLimits {
        mem_bytes: cfg.process_mem,
        init_timeout: budget,
    };
    let mut h = match cand.build(&entry.task, &limits) {
        Ok(h) => h,
        Err(e) => {
            if matches!(e, BuildError::External(ExternalError::InitTimeout(_))) {
                rec.status = SearchStatus::TimeLimit;
            }
            rec.wall_time = start.elapsed().as_secs_f64();
            rec.note = Some(e.to_string());
            return rec;
        }
    };
    let r = gbfs(
        &entry.task,
        h.as_mut(),
        SearchLimits {
            deadline,
            mem_cap: cfg.mem_cap,
        },
    );
    drop(h);
    rec.wall_time = start.elapsed().as_secs_f64();
    rec.search_time = r.wall_time;
    rec.expansions = r.expansions;
    rec.evaluations = r.evaluations;
    rec.status = r.status;
    rec.note = r.failure;
    if r.status == SearchStatus::Solved {
        match validate_plan(&entry.task, &r.plan) {
            Ok(v) if v.valid => {
                rec.plan_length = Some(r.plan.len());
                rec.agile = agile_score(rec.wall_time, cfg.time_limit).unwrap_or(0.0);
            }
            other => {
                // never expected; keep the run but refuse to count it
                rec.status = SearchStatus::HeuristicFailure;
                rec.note = Some(format!("plan failed validation: {other:?}"));
            }
        }
    }
    rec
}

/// Runs every candidate on every task on a bounded pool of worker threads.
/// Records come back ordered by `(candidate, task)`.
pub fn evaluate_pool(
    pool: &[CandidateHeuristic],
    tasks: &[TaskEntry],
    cfg: &EvalConfig,
) -> Result<Vec<EvalRecord>, HarnessError> {
    if pool.is_empty() {
        return Err(HarnessError::EmptyPool);
    }
    agile_score(0.0, cfg.time_limit)?;
    let mut seen = std::collections::BTreeSet::new();
    for c in pool {
        if !seen.insert(&c.id) {
            return Err(HarnessError::DuplicateId(c.id.clone()));
        }
    }
    let jobs: Vec<(&CandidateHeuristic, &TaskEntry)> =
        pool.iter().flat_map(|c| tasks.iter().map(move |t| (c, t))).collect();
    let next = AtomicUsize::new(0);
    let out = Mutex::new(Vec::with_capacity(jobs.len()));
    thread::scope(|s| {
        for _ in 0..cfg.workers.clamp(1, jobs.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(c, t)) = jobs.get(i) else { break };
                let rec = run_one(c, t, cfg);
                out.lock().unwrap().push(rec);
            });
        }
    });
    let mut records = out.into_inner().unwrap();
    records.sort_by(|a, b| (&a.candidate, &a.task).cmp(&(&b.candidate, &b.task)));
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AgileRule {
    /// Higher accumulated agile score wins.
    #[default]
    Maximize,
    /// Lower accumulated agile score wins, as the selection sentence reads.
    Minimize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standing {
    pub candidate: String,
    pub coverage: usize,
    pub agile: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub winner: String,
    pub rule: AgileRule,
    pub standings: Vec<Standing>,
    pub trail: Vec<String>,
}

/// Coverage first, then the agile rule, then the lowest id.
pub fn select_best(records: &[EvalRecord], rule: AgileRule) -> Result<SelectionReport, HarnessError> {
    // fixed summation order keeps the float sums independent of input order
    let mut sorted: Vec<&EvalRecord> = records.iter().collect();
    sorted.sort_by(|a, b| (&a.candidate, &a.task).cmp(&(&b.candidate, &b.task)));
    let mut by_cand: BTreeMap<&str, Standing> = BTreeMap::new();
    for r in sorted {
        let s = by_cand.entry(&r.candidate).or_insert_with(|| Standing {
            candidate: r.candidate.clone(),
            coverage: 0,
            agile: 0.0,
        });
        if r.solved() {
            s.coverage += 1;
            s.agile += r.agile;
        }
    }
    if by_cand.is_empty() {
        return Err(HarnessError::EmptyPool);
    }
    let standings: Vec<Standing> = by_cand.into_values().collect();
    let mut trail = Vec::new();

    let best_cov = standings.iter().map(|s| s.coverage).max().unwrap();
    let mut alive: Vec<&Standing> = standings.iter().filter(|s| s.coverage == best_cov).collect();
    trail.push(format!("coverage {best_cov}: {}", ids(&alive)));

    if alive.len() > 1 {
        let pick = |a: f64, b: f64| match rule {
            AgileRule::Maximize => a.max(b),
            AgileRule::Minimize => a.min(b),
        };
        let target = alive.iter().map(|s| s.agile).reduce(pick).unwrap();
        alive.retain(|s| (s.agile - target).abs() <= AGILE_EPS);
        let dir = match rule {
            AgileRule::Maximize => "highest",
            AgileRule::Minimize => "lowest",
        };
        trail.push(format!("{dir} agile {target:.6}: {}", ids(&alive)));
        if rule == AgileRule::Maximize {
            trail.push("agile rule maximize; the selection sentence says minimize, the score definition rewards speed".into());
        }
    }
    if alive.len() > 1 {
        trail.push(format!("lowest id: {}", alive[0].candidate));
    }
    Ok(SelectionReport {
        winner: alive[0].candidate.clone(),
        rule,
        standings,
        trail,
    })
}

fn ids(v: &[&Standing]) -> String {
    v.iter().map(|s| s.candidate.as_str()).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRow {
    pub task: String,
    pub domain: String,
    pub status: SearchStatus,
    pub solved: bool,
    pub plan_length: Option<usize>,
    pub expansions: u64,
    pub wall_time: f64,
    pub search_time: f64,
}

/// Runs the selected heuristic on the test set.
pub fn run_test_suite(
    winner: &CandidateHeuristic,
    tasks: &[TaskEntry],
    cfg: &EvalConfig,
) -> Result<Vec<TestRow>, HarnessError> {
    if tasks.is_empty() {
        return Ok(Vec::new());
    }
    let records = evaluate_pool(std::slice::from_ref(winner), tasks, cfg)?;
    Ok(records
        .into_iter()
        .map(|r| TestRow {
            solved: r.solved(),
            task: r.task,
            domain: r.domain,
            status: r.status,
            plan_length: r.plan_length,
            expansions: r.expansions,
            wall_time: r.wall_time,
            search_time: r.search_time,
        })
        .collect())
}

/// Total expansions over total search seconds, per domain. `None` when the
/// domain's search time sums to zero.
pub fn expansions_per_second(records: &[EvalRecord]) -> BTreeMap<String, Option<f64>> {
    let mut acc: BTreeMap<String, (u64, f64)> = BTreeMap::new();
    for r in records {
        let e = acc.entry(r.domain.clone()).or_default();
        e.0 += r.expansions;
        e.1 += r.search_time;
    }
    acc.into_iter()
        .map(|(d, (exp, secs))| (d, (secs > 0.0).then(|| exp as f64 / secs)))
        .collect()
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), HarnessError> {
    let io_err = |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = io::BufWriter::new(fs::File::create(path).map_err(io_err)?);
    for item in items {
        let line = serde_json::to_string(item).expect("records serialize");
        writeln!(f, "{line}").map_err(io_err)?;
    }
    f.flush().map_err(io_err)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, HarnessError> {
    let io_err = |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    };
    let f = fs::File::open(path).map_err(io_err)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| HarnessError::Json {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?);
    }
    Ok(out)
}

/// Candidates as rows, domains as columns, solved counts in cells.
pub fn coverage_table(records: &[EvalRecord]) -> String {
    let domains: Vec<&str> = {
        let mut d: Vec<&str> = records.iter().map(|r| r.domain.as_str()).collect();
        d.sort_unstable();
        d.dedup();
        d
    };
    let mut rows: BTreeMap<&str, (BTreeMap<&str, usize>, f64)> = BTreeMap::new();
    for r in records {
        let row = rows.entry(&r.candidate).or_default();
        *row.0.entry(&r.domain).or_default() += usize::from(r.solved());
        row.1 += r.agile;
    }
    let width = rows.keys().map(|k| k.len()).max().unwrap_or(0).max("candidate".len());
    let mut out = format!("{:<width$}", "candidate");
    for d in &domains {
        let _ = write!(out, "  {d:>w$}", w = d.len().max(3));
    }
    out.push_str("  total   agile\n");
    for (cand, (cells, agile)) in &rows {
        let _ = write!(out, "{cand:<width$}");
        for d in &domains {
            let _ = write!(out, "  {:>w$}", cells.get(d).copied().unwrap_or(0), w = d.len().max(3));
        }
        let _ = writeln!(out, "  {:>5}  {agile:>6.3}", cells.values().sum::<usize>());
    }
    out
}

/// All records as CSV, one row per (candidate, task).
pub fn records_csv(records: &[EvalRecord]) -> Result<String, csv::Error> {
    #[derive(Serialize)]
    struct Row<'a> {
        candidate: &'a str,
        task: &'a str,
        domain: &'a str,
        status: SearchStatus,
        plan_length: Option<usize>,
        expansions: u64,
        wall_time: f64,
        search_time: f64,
        agile: f64,
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(Row {
            candidate: &r.candidate,
            task: &r.task,
            domain: &r.domain,
            status: r.status,
            plan_length: r.plan_length,
            expansions: r.expansions,
            wall_time: r.wall_time,
            search_time: r.search_time,
            agile: r.agile,
        })?;
    }
    Ok(String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8"))
}

/// Scatter pairs comparing candidate `x` with `y` on every task both ran.
/// Unsolved runs leave the plan length empty.
pub fn scatter_csv(records: &[EvalRecord], x: &str, y: &str) -> Result<String, csv::Error> {
    #[derive(Serialize)]
    struct Pair<'a> {
        task: &'a str,
        domain: &'a str,
        x_expansions: u64,
        y_expansions: u64,
        x_plan_length: Option<usize>,
        y_plan_length: Option<usize>,
    }
    let ys: BTreeMap<&str, &EvalRecord> = records
        .iter()
        .filter(|r| r.candidate == y)
        .map(|r| (r.task.as_str(), r))
        .collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    for a in records.iter().filter(|r| r.candidate == x) {
        if let Some(b) = ys.get(a.task.as_str()) {
            w.serialize(Pair {
                task: &a.task,
                domain: &a.domain,
                x_expansions: a.expansions,
                y_expansions: b.expansions,
                x_plan_length: a.plan_length,
                y_plan_length: b.plan_length,
            })?;
        }
    }
    Ok(String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn rec(cand: &str, task: &str, solved: bool, agile: f64) -> EvalRecord {
        EvalRecord {
            candidate: cand.into(),
            task: task.into(),
            domain: "d".into(),
            status: if solved { SearchStatus::Solved } else { SearchStatus::TimeLimit },
            wall_time: 1.0,
            search_time: 1.0,
            expansions: 10,
            evaluations: 10,
            plan_length: solved.then_some(3),
            agile: if solved { agile } else { 0.0 },
            note: None,
        }
    }

    #[test]
    fn agile_examples() {
        assert_eq!(agile_score(0.5, 300.0).unwrap(), 1.0);
        assert_eq!(agile_score(300.0, 300.0).unwrap(), 0.0);
        assert!((agile_score(300f64.sqrt(), 300.0).unwrap() - 0.5).abs() < 1e-9);
        assert_eq!(agile_score(1.0, 300.0).unwrap(), 1.0);
        assert!(matches!(agile_score(1.0, 1.0), Err(HarnessError::Domain(_))));
        assert!(agile_score(1.0, f64::NAN).is_err());
    }

    #[test]
    fn single_candidate_wins() {
        let r = select_best(&[rec("only", "t1", false, 0.0)], AgileRule::Maximize).unwrap();
        assert_eq!(r.winner, "only");
    }

    #[test]
    fn coverage_dominates_agile() {
        let mut recs = vec![];
        for t in ["t1", "t2", "t3"] {
            recs.push(rec("a", t, true, 0.1));
        }
        recs.push(rec("b", "t1", true, 1.0));
        recs.push(rec("b", "t2", true, 1.0));
        recs.push(rec("b", "t3", false, 0.0));
        for rule in [AgileRule::Maximize, AgileRule::Minimize] {
            assert_eq!(select_best(&recs, rule).unwrap().winner, "a");
        }
    }

    #[test]
    fn agile_tie_break_direction() {
        let recs = vec![
            rec("a", "t1", true, 0.9),
            rec("a", "t2", true, 0.8),
            rec("b", "t1", true, 0.5),
            rec("b", "t2", true, 0.4),
        ];
        let max = select_best(&recs, AgileRule::Maximize).unwrap();
        assert_eq!(max.winner, "a");
        assert!(max.trail.iter().any(|l| l.contains("says minimize")));
        assert_eq!(select_best(&recs, AgileRule::Minimize).unwrap().winner, "b");
    }

    #[test]
    fn full_tie_goes_to_lowest_id() {
        let recs = vec![rec("z", "t1", true, 1.0), rec("m", "t1", true, 1.0)];
        let r = select_best(&recs, AgileRule::Maximize).unwrap();
        assert_eq!(r.winner, "m");
        assert_eq!(r.trail.last().unwrap(), "lowest id: m");
    }

    #[test]
    fn empty_matrix() {
        assert!(matches!(select_best(&[], AgileRule::Maximize), Err(HarnessError::EmptyPool)));
    }

    #[test]
    fn throughput_examples() {
        let mut a = rec("c", "t1", true, 1.0);
        a.expansions = 100;
        a.search_time = 2.0;
        assert_eq!(expansions_per_second(&[a.clone()])["d"], Some(50.0));
        a.search_time = 0.0;
        assert_eq!(expansions_per_second(&[a.clone()])["d"], None);
        a.search_time = 1.0;
        let mut b = a.clone();
        b.expansions = 300;
        b.search_time = 3.0;
        assert_eq!(expansions_per_second(&[a, b])["d"], Some(100.0));
    }

    #[test]
    fn jsonl_round_trip_keeps_field_order() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.jsonl");
        let recs = vec![rec("a", "t1", true, 0.5), rec("a", "t2", false, 0.0)];
        write_jsonl(&p, &recs).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.lines().all(|l| l.starts_with("{\"candidate\":")));
        assert_eq!(read_jsonl::<EvalRecord>(&p).unwrap(), recs);
    }

    #[test]
    fn coverage_table_counts() {
        let recs = vec![rec("a", "t1", true, 0.5), rec("a", "t2", true, 0.25), rec("b", "t1", false, 0.0)];
        let t = coverage_table(&recs);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("a") && lines[1].contains("  2  ") && lines[1].ends_with("0.750"));
    }

    #[test]
    fn scatter_pairs_tasks() {
        let recs = vec![rec("a", "t1", true, 1.0), rec("b", "t1", false, 0.0), rec("a", "t2", true, 1.0)];
        let csv = scatter_csv(&recs, "a", "b").unwrap();
        assert_eq!(
            csv,
            "task,domain,x_expansions,y_expansions,x_plan_length,y_plan_length\nt1,d,10,10,3,\n"
        );
    }

    #[test]
    fn candidate_manifest_shape() {
        let c = CandidateHeuristic {
            id: "cand-00".into(),
            kind: CandidateKind::External(vec!["python3".into(), "h.py".into()]),
            provenance: "sample 0".into(),
        };
        let line = serde_json::to_string(&c).unwrap();
        assert_eq!(
            line,
            r#"{"id":"cand-00","kind":{"type":"external","value":["python3","h.py"]},"provenance":"sample 0"}"#
        );
    }
}
