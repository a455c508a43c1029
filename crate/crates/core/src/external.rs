//! Heuristics computed by a separate process.
//!
//! The engine and the process exchange one JSON object per line. The
//! engine sends `init` once with the grounded task, then one `eval` per
//! state; every request is answered by exactly one `value` or `error`
//! line. See `docs/wire-protocol.md` for the grammar.

use std::io::{self, BufRead, BufReader, Read, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grounding::{GroundTask, State};
use crate::heuristics::{Heuristic, HeuristicError};

const STDERR_TAIL_BYTES: usize = 2000;

#[derive(Debug, Clone)]
pub struct ProcessLimits {
    /// Address-space cap for the child process.
    pub mem_bytes: Option<u64>,
    /// Time allowed for the reply to `init`.
    pub init_timeout: Duration,
}

impl Default for ProcessLimits {
    fn default() -> Self {
        Self {
            mem_bytes: None,
            init_timeout: Duration::from_secs(60),
        }
    }
}

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error("empty command")]
    EmptyCommand,
    #[error("cannot start {cmd}: {source}")]
    Spawn { cmd: String, source: io::Error },
    #[error("heuristic process did not answer init within {0:?}")]
    InitTimeout(Duration),
    #[error("heuristic process rejected init: {0}")]
    Rejected(String),
    #[error("heuristic process exited during init{}", stderr_suffix(.0))]
    Exited(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
}

fn stderr_suffix(s: &str) -> String {
    if s.is_empty() {
        String::new()
    } else {
        format!("; stderr: {s}")
    }
}

/// Wire format of the grounded task.
pub mod wire {
    use super::*;

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct WireAction {
        pub name: String,
        pub pre: Vec<usize>,
        pub add: Vec<usize>,
        pub del: Vec<usize>,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct WireTask {
        pub domain: String,
        pub problem: String,
        pub atoms: Vec<String>,
        pub actions: Vec<WireAction>,
        pub init: Vec<usize>,
        pub goal: Vec<usize>,
        pub statics: Vec<usize>,
    }

    impl WireTask {
        pub fn from_task(task: &GroundTask) -> Self {
            Self {
                domain: task.domain_name.clone(),
                problem: task.problem_name.clone(),
                atoms: task.atoms.iter().map(|a| a.text.clone()).collect(),
                actions: task
                    .actions
                    .iter()
                    .map(|a| WireAction {
                        name: a.name.clone(),
                        pre: a.pre.clone(),
                        add: a.add.clone(),
                        del: a.del.clone(),
                    })
                    .collect(),
                init: task.init.atoms().collect(),
                goal: task.goal.clone(),
                statics: task.static_atoms.clone(),
            }
        }
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    #[serde(tag = "kind", rename_all = "lowercase")]
    pub enum Request {
        Init { task: WireTask },
        Eval { state: Vec<usize> },
    }

    impl Request {
        pub fn to_line(&self) -> String {
            let mut s = serde_json::to_string(self).expect("requests always serialize");
            s.push('\n');
            s
        }
    }

    #[derive(Debug, Clone, PartialEq)]
    pub enum Reply {
        /// Non-negative number or infinity.
        Value(f64),
        Error(String),
    }

    #[derive(Deserialize)]
    #[serde(tag = "kind", rename_all = "lowercase")]
    enum RawReply {
        Value { value: serde_json::Value },
        Error { message: String },
    }

    pub fn parse_reply(line: &str) -> Result<Reply, String> {
        let raw: RawReply = serde_json::from_str(line.trim()).map_err(|e| format!("bad reply {line:?}: {e}"))?;
        match raw {
            RawReply::Error { message } => Ok(Reply::Error(message)),
            RawReply::Value { value } => {
                let v = match &value {
                    serde_json::Value::Number(n) => n.as_f64().ok_or("unrepresentable number")?,
                    serde_json::Value::String(s) if s == "inf" => f64::INFINITY,
                    other => return Err(format!("value must be a number or \"inf\", got {other}")),
                };
                if v.is_nan() || v < 0.0 {
                    return Err(format!("value must be non-negative, got {v}"));
                }
                Ok(Reply::Value(v))
            }
        }
    }
}

use wire::{parse_reply, Reply, Request, WireTask};

/// A heuristic served by a child process speaking the line protocol.
pub struct ExternalHeuristic {
    name: String,
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<io::Result<String>>,
    stderr: Arc<Mutex<Vec<u8>>>,
    deadline: Option<Instant>,
    broken: Option<String>,
}

impl ExternalHeuristic {
    /// Starts `argv` and performs the `init` exchange.
    pub fn spawn(argv: &[String], task: &GroundTask, limits: &ProcessLimits) -> Result<Self, ExternalError> {
        let (prog, args) = argv.split_first().ok_or(ExternalError::EmptyCommand)?;
        let mut cmd = Command::new(prog);
        cmd.args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped());
        if let Some(bytes) = limits.mem_bytes {
            limit_address_space(&mut cmd, bytes);
        }
        let mut child = cmd.spawn().map_err(|source| ExternalError::Spawn {
            cmd: argv.join(" "),
            source,
        })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let mut err_pipe = child.stderr.take().expect("piped stderr");

        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        let stderr = Arc::new(Mutex::new(Vec::new()));
        let sink = Arc::clone(&stderr);
        thread::spawn(move || {
            let mut buf = [0u8; 4096];
            while let Ok(n) = err_pipe.read(&mut buf) {
                if n == 0 {
                    break;
                }
                let mut s = sink.lock().unwrap();
                s.extend_from_slice(&buf[..n]);
                if s.len() > 4 * STDERR_TAIL_BYTES {
                    let cut = s.len() - STDERR_TAIL_BYTES;
                    s.drain(..cut);
                }
            }
        });

        let mut h = Self {
            name: format!("ext:{}", argv.join(" ")),
            child,
            stdin,
            lines,
            stderr,
            deadline: None,
            broken: None,
        };
        let init = Request::Init {
            task: WireTask::from_task(task),
        };
        if h.send(&init).is_err() {
            let _ = h.child.wait();
            return Err(ExternalError::Exited(h.stderr_tail()));
        }
        match h.lines.recv_timeout(limits.init_timeout) {
            Ok(Ok(line)) => match parse_reply(&line) {
                Ok(Reply::Value(_)) => Ok(h),
                Ok(Reply::Error(msg)) => Err(ExternalError::Rejected(msg)),
                Err(e) => Err(ExternalError::Protocol(e)),
            },
            Err(RecvTimeoutError::Timeout) => Err(ExternalError::InitTimeout(limits.init_timeout)),
            Ok(Err(_)) | Err(RecvTimeoutError::Disconnected) => {
                let _ = h.child.wait();
                Err(ExternalError::Exited(h.stderr_tail()))
            }
        }
    }

    fn send(&mut self, req: &Request) -> io::Result<()> {
        self.stdin.write_all(req.to_line().as_bytes())?;
        self.stdin.flush()
    }

    /// Last part of everything the process wrote to stderr.
    pub fn stderr_tail(&self) -> String {
        // Give the reader thread a moment to drain a pipe the child just closed.
        thread::sleep(Duration::from_millis(20));
        let buf = self.stderr.lock().unwrap();
        let start = buf.len().saturating_sub(STDERR_TAIL_BYTES);
        String::from_utf8_lossy(&buf[start..]).trim().to_string()
    }

    fn fail(&mut self, what: &str) -> HeuristicError {
        let _ = self.child.kill();
        let _ = self.child.wait();
        let tail = self.stderr_tail();
        let msg = if tail.is_empty() {
            what.to_string()
        } else {
            format!("{what}; stderr: {tail}")
        };
        self.broken = Some(msg.clone());
        HeuristicError::Failed(msg)
    }
}

impl Heuristic for ExternalHeuristic {
    fn name(&self) -> &str {
        &self.name
    }

    fn set_deadline(&mut self, deadline: Instant) {
        self.deadline = Some(deadline);
    }

    fn evaluate(&mut self, state: &State) -> Result<f64, HeuristicError> {
        if let Some(msg) = &self.broken {
            return Err(HeuristicError::Failed(msg.clone()));
        }
        let req = Request::Eval {
            state: state.atoms().collect(),
        };
        if self.send(&req).is_err() {
            return Err(self.fail("heuristic process closed its input"));
        }
        let reply = match self.deadline {
            Some(d) => match self.lines.recv_timeout(d.saturating_duration_since(Instant::now())) {
                Ok(r) => Some(r),
                Err(RecvTimeoutError::Timeout) => {
                    let _ = self.child.kill();
                    self.broken = Some("timed out".into());
                    return Err(HeuristicError::Timeout);
                }
                Err(RecvTimeoutError::Disconnected) => None,
            },
            None => self.lines.recv().ok(),
        };
        match reply {
            Some(Ok(line)) => match parse_reply(&line) {
                Ok(Reply::Value(v)) => Ok(v),
                Ok(Reply::Error(msg)) => Err(self.fail(&format!("heuristic error: {msg}"))),
                Err(e) => Err(self.fail(&e)),
            },
            _ => Err(self.fail("heuristic process exited")),
        }
    }
}

impl Drop for ExternalHeuristic {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[cfg(unix)]
fn limit_address_space(cmd: &mut Command, bytes: u64) {
    use std::os::unix::process::CommandExt;
    // SAFETY: setrlimit is async-signal-safe and touches no parent state.
    unsafe {
        cmd.pre_exec(move || {
            let lim = libc::rlimit {
                rlim_cur: bytes as libc::rlim_t,
                rlim_max: bytes as libc::rlim_t,
            };
            if libc::setrlimit(libc::RLIMIT_AS, &lim) != 0 {
                return Err(io::Error::last_os_error());
            }
            Ok(())
        });
    }
}

#[cfg(not(unix))]
fn limit_address_space(_cmd: &mut Command, _bytes: u64) {}

#[cfg(test)]
mod tests {
    use super::wire::*;

    #[test]
    fn reply_parsing() {
        assert_eq!(parse_reply(r#"{"kind":"value","value":3}"#), Ok(Reply::Value(3.0)));
        assert_eq!(parse_reply(r#"{"kind":"value","value":"inf"}"#), Ok(Reply::Value(f64::INFINITY)));
        assert_eq!(
            parse_reply(r#"{"kind":"error","message":"boom"}"#),
            Ok(Reply::Error("boom".into()))
        );
        assert!(parse_reply(r#"{"kind":"value","value":-1}"#).is_err());
        assert!(parse_reply(r#"{"kind":"value","value":"big"}"#).is_err());
        assert!(parse_reply("not json").is_err());
    }

    #[test]
    fn request_encoding() {
        let line = Request::Eval { state: vec![0, 4] }.to_line();
        assert_eq!(line, "{\"kind\":\"eval\",\"state\":[0,4]}\n");
    }
}
