//! Hand-written domain-dependent heuristics.
//!
//! Each heuristic names the predicates and types it reads through *roles*.
//! A bindings manifest maps every role to a predicate or type of the
//! concrete domain, so the heuristic survives renamed PDDL vocabulary.
//! Construction fails with a [`BindingError`] if a role is unresolved.

mod blocksworld;
mod childsnack;
pub mod distance;
mod floortile;
mod miconic;
mod rovers;
mod sokoban;
mod spanner;
mod transport;

use std::collections::HashMap;

use thiserror::Error;

use super::Heuristic;
use crate::grounding::{GroundTask, State};

pub use distance::DistanceTable;

/// Added once per goal that has no way of being achieved under the
/// heuristic's model. Finite so that search still orders such states.
pub const PENALTY: f64 = 1_000_000.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BindingError {
    #[error("bindings manifest line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("role {0} is bound more than once")]
    DuplicateRole(String),
    #[error("role {0} is not bound by the manifest")]
    MissingRole(String),
    #[error("role {role} names predicate {name}, which the domain does not declare")]
    UnknownPredicate { role: String, name: String },
    #[error("role {role} names type {name}, which the domain does not declare")]
    UnknownType { role: String, name: String },
    #[error("role {role}: predicate {name} has arity {found}, expected {expected}")]
    Arity {
        role: String,
        name: String,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RoleKind {
    Pred,
    Type,
}

/// Role-to-name table read from a manifest.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    preds: HashMap<String, String>,
    types: HashMap<String, String>,
}

impl Manifest {
    /// Parses lines of the form `pred ROLE = NAME` or `type ROLE = NAME`.
    /// Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self, BindingError> {
        let mut m = Manifest::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let malformed = |message: &str| BindingError::Malformed {
                line: i + 1,
                message: message.to_string(),
            };
            let (kind, rest) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| malformed("expected `pred|type ROLE = NAME`"))?;
            let (role, name) = rest
                .split_once('=')
                .ok_or_else(|| malformed("missing `=`"))?;
            let (role, name) = (role.trim().to_lowercase(), name.trim().to_lowercase());
            if role.is_empty() || name.is_empty() || name.contains(char::is_whitespace) {
                return Err(malformed("empty or malformed role or name"));
            }
            let table = match kind {
                "pred" => &mut m.preds,
                "type" => &mut m.types,
                _ => return Err(malformed("expected `pred` or `type`")),
            };
            if table.insert(role.clone(), name).is_some() {
                return Err(BindingError::DuplicateRole(role));
            }
        }
        Ok(m)
    }

    fn lookup(&self, kind: RoleKind, role: &str) -> Result<&str, BindingError> {
        let table = match kind {
            RoleKind::Pred => &self.preds,
            RoleKind::Type => &self.types,
        };
        table
            .get(role)
            .map(String::as_str)
            .ok_or_else(|| BindingError::MissingRole(role.to_string()))
    }
}

/// Resolves roles against one task.
pub(crate) struct Binder<'a> {
    manifest: &'a Manifest,
    task: &'a GroundTask,
}

impl<'a> Binder<'a> {
    pub(crate) fn new(manifest: &'a Manifest, task: &'a GroundTask) -> Self {
        Self { manifest, task }
    }

    /// Predicate index bound to `role`, checked against `arity`.
    pub(crate) fn pred(&self, role: &str, arity: usize) -> Result<usize, BindingError> {
        let name = self.manifest.lookup(RoleKind::Pred, role)?;
        let idx = self
            .task
            .predicate_by_name(name)
            .ok_or_else(|| BindingError::UnknownPredicate {
                role: role.to_string(),
                name: name.to_string(),
            })?;
        let found = self.task.predicates[idx].arity;
        if found != arity {
            return Err(BindingError::Arity {
                role: role.to_string(),
                name: name.to_string(),
                expected: arity,
                found,
            });
        }
        Ok(idx)
    }

    /// Objects of the type bound to `role`.
    pub(crate) fn objects(&self, role: &str) -> Result<Vec<usize>, BindingError> {
        let name = self.manifest.lookup(RoleKind::Type, role)?;
        if !self.task.has_type(name) {
            return Err(BindingError::UnknownType {
                role: role.to_string(),
                name: name.to_string(),
            });
        }
        Ok(self.task.objects_of_type(name).collect())
    }
}

/// Argument lists of the atoms of `pred` that hold in `state`.
pub(crate) fn holding<'t>(
    task: &'t GroundTask,
    state: &'t State,
    pred: usize,
) -> impl Iterator<Item = &'t [usize]> + 't {
    state
        .atoms()
        .map(move |a| &task.atoms[a])
        .filter(move |a| a.predicate == pred)
        .map(|a| a.args.as_slice())
}

/// Argument lists of the goal atoms of `pred`, in atom index order.
pub(crate) fn goal_args(task: &GroundTask, pred: usize) -> Vec<(usize, Vec<usize>)> {
    let mut out: Vec<_> = task
        .goal
        .iter()
        .map(|&g| &task.atoms[g])
        .filter(|a| a.predicate == pred)
        .map(|a| (a.index, a.args.clone()))
        .collect();
    out.sort();
    out
}

/// Argument lists of initial-state atoms of `pred`. Used for static facts.
pub(crate) fn init_args(task: &GroundTask, pred: usize) -> Vec<Vec<usize>> {
    holding(task, &task.init, pred).map(<[usize]>::to_vec).collect()
}

/// Names of the domain-dependent heuristics and the domains they target.
pub const DOMAIN_HEURISTICS: &[(&str, &str)] = &[
    ("bw-r1", "blocksworld"),
    ("spanner-r1", "spanner"),
    ("miconic-r1", "miconic"),
    ("sokoban-r1", "sokoban"),
    ("transport-r1", "transport"),
    ("childsnack-r1", "childsnack"),
    ("floortile-r1", "floortile"),
    ("rovers-r1", "rovers"),
];

/// Built-in manifest for a domain-dependent heuristic, using the
/// vocabulary of the standard benchmark encodings.
pub fn default_manifest(name: &str) -> Option<&'static str> {
    Some(match name {
        "bw-r1" => include_str!("../../../bindings/blocksworld.bind"),
        "spanner-r1" => include_str!("../../../bindings/spanner.bind"),
        "miconic-r1" => include_str!("../../../bindings/miconic.bind"),
        "sokoban-r1" => include_str!("../../../bindings/sokoban.bind"),
        "transport-r1" => include_str!("../../../bindings/transport.bind"),
        "childsnack-r1" => include_str!("../../../bindings/childsnack.bind"),
        "floortile-r1" => include_str!("../../../bindings/floortile.bind"),
        "rovers-r1" => include_str!("../../../bindings/rovers.bind"),
        _ => return None,
    })
}

/// Builds a domain heuristic with its default manifest. `Ok(None)` if the
/// name is not a domain heuristic.
pub fn by_name<'t>(
    name: &str,
    task: &'t GroundTask,
) -> Result<Option<Box<dyn Heuristic + 't>>, BindingError> {
    match default_manifest(name) {
        Some(text) => with_manifest(name, task, &Manifest::parse(text)?),
        None => Ok(None),
    }
}

/// Builds a domain heuristic with an explicit manifest.
pub fn with_manifest<'t>(
    name: &str,
    task: &'t GroundTask,
    manifest: &Manifest,
) -> Result<Option<Box<dyn Heuristic + 't>>, BindingError> {
    let b = Binder::new(manifest, task);
    Ok(Some(match name {
        "bw-r1" => Box::new(blocksworld::BlocksR1::new(task, &b)?),
        "spanner-r1" => Box::new(spanner::SpannerR1::new(task, &b)?),
        "miconic-r1" => Box::new(miconic::MiconicR1::new(task, &b)?),
        "sokoban-r1" => Box::new(sokoban::SokobanR1::new(task, &b)?),
        "transport-r1" => Box::new(transport::TransportR1::new(task, &b)?),
        "childsnack-r1" => Box::new(childsnack::ChildsnackR1::new(task, &b)?),
        "floortile-r1" => Box::new(floortile::FloortileR1::new(task, &b)?),
        "rovers-r1" => Box::new(rovers::RoversR1::new(task, &b)?),
        _ => return Ok(None),
    }))
}

#[cfg(test)]
pub(crate) mod testutil {
    use crate::grounding::{ground, GroundTask, State};
    use crate::pddl::{parse_domain, parse_problem};

    pub fn task(domain: &str, problem: &str) -> GroundTask {
        let d = parse_domain(domain).unwrap();
        let p = parse_problem(problem, &d).unwrap();
        ground(&d, &p).unwrap()
    }

    pub fn state(task: &GroundTask, atoms: &[&str]) -> State {
        task.state_from_texts(atoms.iter().copied()).unwrap()
    }
}
