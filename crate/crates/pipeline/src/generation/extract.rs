//! Turning raw responses into candidates.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::client::RawResponse;
use super::GenerationError;
use crate::harness::{CandidateHeuristic, CandidateKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectReport {
    pub sample: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Extracted {
    Candidate(CandidateHeuristic),
    Rejected(RejectReport),
}

/// Bodies of all fenced code blocks, in order. An unterminated final block
/// counts up to the end of the text.
pub fn code_blocks(text: &str) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut current: Option<Vec<&str>> = None;
    for line in text.lines() {
        let fence = line.trim_start().starts_with("```");
        match (&mut current, fence) {
            (None, true) => current = Some(Vec::new()),
            (Some(body), true) => {
                blocks.push(body.join("\n"));
                current = None;
            }
            (Some(body), false) => body.push(line),
            (None, false) => {}
        }
    }
    if let Some(body) = current {
        blocks.push(body.join("\n"));
    }
    blocks
}

pub fn candidate_id(sample: usize) -> String {
    format!("cand-{sample:02}")
}

/// Writes the first code block of `raw` to `workspace/<id>.py` and wraps
/// it as an external candidate run by `adapter <file>`.
pub fn extract_candidate(
    raw: &RawResponse,
    workspace: &Path,
    adapter: &[String],
    model: &str,
) -> Result<Extracted, GenerationError> {
    let blocks: Vec<String> = code_blocks(&raw.text)
        .into_iter()
        .filter(|b| !b.trim().is_empty())
        .collect();
    let Some(code) = blocks.first() else {
        let reason = match &raw.error {
            Some(e) => format!("no code block (request failed: {e})"),
            None => "no code block".to_string(),
        };
        return Ok(Extracted::Rejected(RejectReport {
            sample: raw.sample,
            reason,
        }));
    };
    let id = candidate_id(raw.sample);
    let file = workspace.join(format!("{id}.py"));
    write(&file, &format!("{}\n", code.trim_end()))?;
    let mut provenance = format!("model {model}, sample {}", raw.sample);
    if blocks.len() > 1 {
        provenance.push_str(&format!(", first of {} code blocks", blocks.len()));
    }
    let mut argv = adapter.to_vec();
    argv.push(file.to_string_lossy().into_owned());
    Ok(Extracted::Candidate(CandidateHeuristic {
        id,
        kind: CandidateKind::External(argv),
        provenance,
    }))
}

fn write(path: &Path, text: &str) -> Result<(), GenerationError> {
    fs::write(path, text).map_err(|source| GenerationError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, Default)]
pub struct PoolOutcome {
    pub pool: Vec<CandidateHeuristic>,
    pub rejects: Vec<RejectReport>,
}

/// Persists every raw response verbatim under `workspace/raw/`, then
/// extracts candidates in sample order.
pub fn extract_pool(
    responses: &[RawResponse],
    workspace: &Path,
    adapter: &[String],
    model: &str,
) -> Result<PoolOutcome, GenerationError> {
    let raw_dir: PathBuf = workspace.join("raw");
    fs::create_dir_all(&raw_dir).map_err(|source| GenerationError::Io {
        path: raw_dir.clone(),
        source,
    })?;
    let mut out = PoolOutcome::default();
    let mut sorted: Vec<&RawResponse> = responses.iter().collect();
    sorted.sort_by_key(|r| r.sample);
    for r in sorted {
        write(&raw_dir.join(format!("sample-{:02}.txt", r.sample)), &r.text)?;
        match extract_candidate(r, workspace, adapter, model)? {
            Extracted::Candidate(c) => out.pool.push(c),
            Extracted::Rejected(rep) => out.rejects.push(rep),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(sample: usize, text: &str) -> RawResponse {
        RawResponse {
            sample,
            text: text.into(),
            attempts: 1,
            error: None,
        }
    }

    fn py() -> Vec<String> {
        vec!["python3".into()]
    }

    #[test]
    fn single_block() {
        let dir = tempfile::tempdir().unwrap();
        let r = raw(3, "Here you go:\n```python\nclass Heuristic:\n    pass\n```\nDone.");
        let Extracted::Candidate(c) = extract_candidate(&r, dir.path(), &py(), "m").unwrap() else {
            panic!("rejected")
        };
        assert_eq!(c.id, "cand-03");
        assert_eq!(c.provenance, "model m, sample 3");
        let CandidateKind::External(argv) = &c.kind else { panic!() };
        assert_eq!(argv[0], "python3");
        assert_eq!(fs::read_to_string(&argv[1]).unwrap(), "class Heuristic:\n    pass\n");
    }

    #[test]
    fn prose_only_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let got = extract_candidate(&raw(0, "I cannot help with that."), dir.path(), &py(), "m").unwrap();
        assert_eq!(
            got,
            Extracted::Rejected(RejectReport {
                sample: 0,
                reason: "no code block".into()
            })
        );
    }

    #[test]
    fn first_of_two_blocks() {
        let dir = tempfile::tempdir().unwrap();
        let r = raw(1, "```\nfirst = 1\n```\ntext\n```python\nsecond = 2\n```\n");
        let Extracted::Candidate(c) = extract_candidate(&r, dir.path(), &py(), "m").unwrap() else {
            panic!("rejected")
        };
        assert!(c.provenance.contains("first of 2 code blocks"));
        let CandidateKind::External(argv) = &c.kind else { panic!() };
        assert_eq!(fs::read_to_string(&argv[1]).unwrap(), "first = 1\n");
    }

    #[test]
    fn block_scanning() {
        assert_eq!(code_blocks("a\n```py\nx\n  ```\n```\ny"), vec!["x".to_string(), "y".to_string()]);
        assert!(code_blocks("no fences").is_empty());
    }

    #[test]
    fn pool_keeps_raw_text_and_order() {
        let dir = tempfile::tempdir().unwrap();
        let rs = vec![raw(1, "nothing"), raw(0, "```\nx = 1\n```")];
        let out = extract_pool(&rs, dir.path(), &py(), "m").unwrap();
        assert_eq!(out.pool.len(), 1);
        assert_eq!(out.pool[0].id, "cand-00");
        assert_eq!(out.rejects[0].sample, 1);
        assert_eq!(fs::read_to_string(dir.path().join("raw/sample-01.txt")).unwrap(), "nothing");
    }
}
