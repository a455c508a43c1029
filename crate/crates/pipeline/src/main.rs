use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use heurgen::generation::{
    build_endtoend_prompt, build_heuristic_prompt, extract_pool, prompt, request_candidates, GenerationConfig,
    HttpClient, LlmClient, MockClient, PromptSpec,
};
use heurgen::harness::{
    coverage_table, evaluate_pool, expansions_per_second, read_jsonl, records_csv, run_test_suite, scatter_csv,
    select_best, write_jsonl, AgileRule, CandidateHeuristic, EvalConfig, EvalRecord, TaskEntry, TEST_TIME_LIMIT,
    TRAIN_TIME_LIMIT,
};
use heurgen_core::external::ProcessLimits;
use heurgen_core::heuristics::by_name;
use heurgen_core::search::{bfs_oracle, gbfs, SearchLimits};
use heurgen_core::validator::{parse_plan, validate_plan};

#[derive(Parser)]
#[command(name = "heurgen", version, about = "Generate, evaluate and select planning heuristics")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Ground a task and print its size.
    Ground {
        #[command(flatten)]
        task: TaskArgs,
        /// Also list every atom and action.
        #[arg(long)]
        verbose: bool,
    },
    /// Run greedy best-first search on one task.
    Solve(SolveArgs),
    /// Check a plan; exits 0 iff it is valid.
    Validate {
        #[command(flatten)]
        task: TaskArgs,
        #[arg(long)]
        plan: PathBuf,
    },
    /// Run candidates on training tasks and write the record matrix.
    Evaluate(EvaluateArgs),
    /// Pick the best candidate from a record matrix.
    Select {
        #[arg(long)]
        records: PathBuf,
        #[arg(long, value_enum, default_value_t = AgileRule::Maximize)]
        agile_rule: AgileRule,
        /// Write the selection report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one candidate of a pool on test tasks.
    Test(TestArgs),
    /// Summaries and CSV exports of a record matrix.
    Report {
        #[arg(long)]
        records: PathBuf,
        /// Write one CSV row per record.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write scatter pairs of two candidates as CSV.
        #[arg(long, num_args = 2, value_names = ["X", "Y"])]
        scatter: Option<Vec<String>>,
        #[arg(long, requires = "scatter")]
        scatter_out: Option<PathBuf>,
    },
    /// Print a heuristic-generation or plan-generation prompt.
    GenPrompt(GenPromptArgs),
    /// Sample candidates from an endpoint or a mock and write the pool.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct TaskArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    problem: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    task: TaskArgs,
    /// Built-in name or `ext:COMMAND`.
    #[arg(long, default_value = "ff")]
    heuristic: String,
    /// Breadth-first search for an optimal plan instead.
    #[arg(long, conflicts_with = "heuristic")]
    optimal: bool,
    /// Seconds.
    #[arg(long, default_value_t = TEST_TIME_LIMIT)]
    time_limit: f64,
    /// MiB.
    #[arg(long, default_value_t = 8192)]
    mem_limit: u64,
    #[arg(long)]
    plan_out: Option<PathBuf>,
}

#[derive(Args)]
struct Limits {
    /// MiB, for the search and for external heuristic processes.
    #[arg(long, default_value_t = 8192)]
    mem_limit: u64,
    #[arg(long)]
    workers: Option<usize>,
}

impl Limits {
    fn config(&self, time_limit: f64) -> EvalConfig {
        let bytes = self.mem_limit << 20;
        let mut cfg = EvalConfig {
            time_limit,
            mem_cap: Some(bytes as usize),
            process_mem: Some(bytes),
            ..EvalConfig::default()
        };
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        cfg
    }
}

#[derive(Args)]
struct EvaluateArgs {
    /// Pool manifest (JSON lines of candidates).
    #[arg(long)]
    pool: Option<PathBuf>,
    /// Add a built-in heuristic as a candidate.
    #[arg(long)]
    builtin: Vec<String>,
    #[arg(long)]
    domain: PathBuf,
    #[arg(long, required = true)]
    problem: Vec<PathBuf>,
    #[arg(long, default_value_t = TRAIN_TIME_LIMIT)]
    time_limit: f64,
    #[command(flatten)]
    limits: Limits,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TestArgs {
    #[arg(long)]
    pool: PathBuf,
    #[arg(long)]
    candidate: String,
    #[arg(long)]
    domain: PathBuf,
    #[arg(long, required = true)]
    problem: Vec<PathBuf>,
    #[arg(long, default_value_t = TEST_TIME_LIMIT)]
    time_limit: f64,
    #[command(flatten)]
    limits: Limits,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenPromptArgs {
    #[arg(long)]
    domain: PathBuf,
    /// Training tasks; the smallest and largest go into the prompt.
    #[arg(long, required_unless_present = "end_to_end")]
    train: Vec<PathBuf>,
    /// Emit the plan-generation prompt for this task instead.
    #[arg(long, conflicts_with = "train")]
    end_to_end: Option<PathBuf>,
    #[arg(long)]
    simple_instruction: bool,
    #[arg(long)]
    independent_heuristics: bool,
    #[arg(long)]
    no_domain: bool,
    #[arg(long)]
    no_tasks: bool,
    #[arg(long)]
    no_examples: bool,
    #[arg(long)]
    no_state: bool,
    #[arg(long)]
    no_statics: bool,
    #[arg(long)]
    no_interface: bool,
    #[arg(long)]
    no_checklist: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    prompt: PathBuf,
    #[arg(long, default_value_t = 25)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    temperature: f64,
    #[arg(long, default_value = "http://localhost:8000/v1/chat/completions")]
    endpoint: String,
    #[arg(long, default_value = "default")]
    model: String,
    /// Environment variable holding the API key.
    #[arg(long, default_value = "HEURGEN_API_KEY")]
    api_key_env: String,
    #[arg(long, default_value_t = 4)]
    concurrency: usize,
    #[arg(long, default_value_t = 2)]
    retries: usize,
    /// Canned responses: a file or a directory of files.
    #[arg(long)]
    mock: Option<PathBuf>,
    /// Command that hosts a heuristic source file.
    #[arg(long, default_value = "heurgen-adapter")]
    adapter: String,
    #[arg(long)]
    workspace: PathBuf,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load(domain: &Path, problems: &[PathBuf]) -> Result<Vec<TaskEntry>> {
    problems
        .iter()
        .map(|p| TaskEntry::load(domain, p).map_err(Into::into))
        .collect()
}

fn exit(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> Result<ExitCode> {
    // die quietly when piped into `head` and friends
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    match Cli::parse().cmd {
        Cmd::Ground { task, verbose } => {
            let t = TaskEntry::load(&task.domain, &task.problem)?.task;
            println!("atoms: {}", t.num_atoms());
            println!("actions: {}", t.actions.len());
            println!("static atoms: {}", t.static_atoms.len());
            println!("goal unreachable: {}", t.goal_unreachable);
            if verbose {
                for a in &t.atoms {
                    println!("atom {} {}", a.index, a.text);
                }
                for a in &t.actions {
                    println!("action {} {}", a.index, a.name);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Solve(a) => solve(a),
        Cmd::Validate { task, plan } => {
            let t = TaskEntry::load(&task.domain, &task.problem)?.task;
            let steps = parse_plan(&read(&plan)?);
            let report = validate_plan(&t, &steps)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(exit(report.valid))
        }
        Cmd::Evaluate(a) => {
            let mut pool: Vec<CandidateHeuristic> = match &a.pool {
                Some(p) => read_jsonl(p)?,
                None => Vec::new(),
            };
            pool.extend(a.builtin.iter().map(|b| CandidateHeuristic::builtin(b)));
            if pool.is_empty() {
                bail!("no candidates: pass --pool or --builtin");
            }
            let tasks = load(&a.domain, &a.problem)?;
            let records = evaluate_pool(&pool, &tasks, &a.limits.config(a.time_limit))?;
            write_jsonl(&a.out, &records)?;
            print!("{}", coverage_table(&records));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Select { records, agile_rule, out } => {
            let records: Vec<EvalRecord> = read_jsonl(&records)?;
            let report = select_best(&records, agile_rule)?;
            for line in &report.trail {
                println!("{line}");
            }
            println!("winner: {}", report.winner);
            if let Some(out) = out {
                fs::write(&out, serde_json::to_string_pretty(&report)? + "\n")
                    .with_context(|| format!("writing {}", out.display()))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Test(a) => {
            let pool: Vec<CandidateHeuristic> = read_jsonl(&a.pool)?;
            let Some(winner) = pool.iter().find(|c| c.id == a.candidate) else {
                bail!("candidate {} not in {}", a.candidate, a.pool.display());
            };
            let tasks = load(&a.domain, &a.problem)?;
            let rows = run_test_suite(winner, &tasks, &a.limits.config(a.time_limit))?;
            write_jsonl(&a.out, &rows)?;
            println!("coverage: {}/{}", rows.iter().filter(|r| r.solved).count(), rows.len());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Report {
            records,
            csv,
            scatter,
            scatter_out,
        } => {
            let records: Vec<EvalRecord> = read_jsonl(&records)?;
            print!("{}", coverage_table(&records));
            println!();
            println!("expansions per second");
            for (domain, rate) in expansions_per_second(&records) {
                match rate {
                    Some(r) => println!("  {domain}: {r:.1}"),
                    None => println!("  {domain}: undefined"),
                }
            }
            if let Some(path) = csv {
                fs::write(&path, records_csv(&records)?).with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(pair) = scatter {
                let text = scatter_csv(&records, &pair[0], &pair[1])?;
                match scatter_out {
                    Some(path) => fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                    None => print!("{text}"),
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::GenPrompt(a) => {
            let text = gen_prompt(&a)?;
            match &a.out {
                Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Generate(a) => generate(a),
    }
}

fn solve(a: SolveArgs) -> Result<ExitCode> {
    let t = TaskEntry::load(&a.task.domain, &a.task.problem)?.task;
    let start = Instant::now();
    let limits = SearchLimits {
        deadline: start + Duration::from_secs_f64(a.time_limit),
        mem_cap: Some((a.mem_limit << 20) as usize),
    };
    let r = if a.optimal {
        bfs_oracle(&t, limits)
    } else {
        let proc_limits = ProcessLimits {
            mem_bytes: Some(a.mem_limit << 20),
            init_timeout: Duration::from_secs_f64(a.time_limit),
        };
        let mut h = by_name(&a.heuristic, &t, &proc_limits)?;
        gbfs(&t, h.as_mut(), limits)
    };
    let plan_text: String = r.plan.iter().map(|s| format!("{s}\n")).collect();
    match &a.plan_out {
        Some(p) if r.solved() => fs::write(p, &plan_text).with_context(|| format!("writing {}", p.display()))?,
        Some(_) => {}
        None => print!("{plan_text}"),
    }
    println!("; status: {:?}", r.status);
    println!("; plan length: {}", r.plan.len());
    println!("; expansions: {}", r.expansions);
    println!("; evaluations: {}", r.evaluations);
    println!("; search time: {:.3}s", r.wall_time);
    println!("; total time: {:.3}s", start.elapsed().as_secs_f64());
    if let Some(f) = &r.failure {
        println!("; failure: {f}");
    }
    Ok(exit(r.solved()))
}

fn gen_prompt(a: &GenPromptArgs) -> Result<String> {
    let domain = read(&a.domain)?;
    if let Some(task) = &a.end_to_end {
        return Ok(build_endtoend_prompt(&domain, &read(task)?, &prompt::bundled_examples())?);
    }
    let tasks = load(&a.domain, &a.train)?;
    // size by atom count, ties by argument order
    let order: Vec<usize> = {
        let mut v: Vec<usize> = (0..tasks.len()).collect();
        v.sort_by_key(|&i| (tasks[i].task.num_atoms(), i));
        v
    };
    let (small, large) = (order[0], order[order.len() - 1]);
    let mut spec = PromptSpec::bundled(&domain, &read(&a.train[small])?, &read(&a.train[large])?, &tasks[small].task);
    let t = &mut spec.toggles;
    t.replace_instruction = a.simple_instruction;
    t.replace_heuristics = a.independent_heuristics;
    t.domain = !a.no_domain;
    t.tasks = !a.no_tasks;
    t.examples = !a.no_examples;
    t.state = !a.no_state;
    t.statics = !a.no_statics;
    t.interface = !a.no_interface;
    t.checklist = !a.no_checklist;
    Ok(build_heuristic_prompt(&spec)?)
}

fn generate(a: GenerateArgs) -> Result<ExitCode> {
    let prompt = read(&a.prompt)?;
    let cfg = GenerationConfig {
        n: a.n,
        temperature: a.temperature,
        endpoint: a.endpoint,
        model: a.model,
        api_key_env: a.api_key_env,
        concurrency: a.concurrency,
        retries: a.retries,
        ..GenerationConfig::default()
    };
    let adapter = shlex::split(&a.adapter)
        .filter(|v| !v.is_empty())
        .with_context(|| format!("bad adapter command {:?}", a.adapter))?;
    let client: Box<dyn LlmClient> = match &a.mock {
        Some(p) => Box::new(MockClient::from_path(p)?),
        None => Box::new(HttpClient::new(&cfg)?),
    };
    let model = if a.mock.is_some() { "mock" } else { cfg.model.as_str() };
    fs::create_dir_all(&a.workspace).with_context(|| format!("creating {}", a.workspace.display()))?;
    let responses = request_candidates(client.as_ref(), &prompt, &cfg)?;
    write_jsonl(&a.workspace.join("responses.jsonl"), &responses)?;
    let out = extract_pool(&responses, &a.workspace, &adapter, model)?;
    write_jsonl(&a.workspace.join("pool.jsonl"), &out.pool)?;
    write_jsonl(&a.workspace.join("rejects.jsonl"), &out.rejects)?;
    println!("responses: {}", responses.len());
    println!("candidates: {}", out.pool.len());
    for r in &out.rejects {
        println!("rejected sample {}: {}", r.sample, r.reason);
    }
    Ok(ExitCode::SUCCESS)
}
