//! Grounding of STRIPS schemas into an integer-indexed [`GroundTask`].
//!
//! Actions are instantiated only if their preconditions are reachable in
//! the delete relaxation from the initial state. Atoms are numbered in
//! lexicographic order of their canonical text `(pred obj ...)`, actions
//! in lexicographic order of their canonical name.

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::pddl::{ActionSchema, DomainAst, ProblemAst, Term};

pub const DEFAULT_GROUNDING_CAP: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundingError {
    #[error("grounding overflow: more than {cap} {what}")]
    Overflow { what: &'static str, cap: usize },
    #[error("unknown object {0}")]
    UnknownObject(String),
    #[error("invalid task: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("action {action} is not applicable: atom {missing} does not hold")]
pub struct NotApplicable {
    pub action: String,
    pub missing: String,
}

/// A set of ground atoms. Equality and hashing are by atom-set value.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    bits: FixedBitSet,
}

impl State {
    pub fn from_atoms(num_atoms: usize, atoms: impl IntoIterator<Item = usize>) -> Self {
        let mut bits = FixedBitSet::with_capacity(num_atoms);
        for a in atoms {
            bits.insert(a);
        }
        State { bits }
    }

    pub fn contains(&self, atom: usize) -> bool {
        self.bits.contains(atom)
    }

    pub fn contains_all(&self, atoms: &[usize]) -> bool {
        atoms.iter().all(|&a| self.bits.contains(a))
    }

    /// Atom indices in increasing order.
    pub fn atoms(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    /// Capacity in atoms (the task's atom count).
    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    /// Approximate heap footprint, used for memory accounting in search.
    pub fn heap_bytes(&self) -> usize {
        std::mem::size_of_val(self.bits.as_slice())
    }

    fn successor(&self, action: &GroundAction) -> State {
        let mut bits = self.bits.clone();
        for &d in &action.del {
            bits.set(d, false);
        }
        for &a in &action.add {
            bits.insert(a);
        }
        State { bits }
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.atoms()).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectInfo {
    pub name: String,
    /// Declared type followed by its ancestors, ending in `object`.
    pub types: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    pub name: String,
    pub arity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundAtom {
    pub index: usize,
    pub predicate: usize,
    pub args: Vec<usize>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundAction {
    pub index: usize,
    /// Canonical text `(name obj ...)`.
    pub name: String,
    pub pre: Vec<usize>,
    pub add: Vec<usize>,
    pub del: Vec<usize>,
}

impl GroundAction {
    pub fn cost(&self) -> u32 {
        1
    }

    pub fn is_applicable(&self, state: &State) -> bool {
        state.contains_all(&self.pre)
    }

    pub fn apply(&self, state: &State, task: &GroundTask) -> Result<State, NotApplicable> {
        match self.pre.iter().find(|&&p| !state.contains(p)) {
            Some(&missing) => Err(NotApplicable {
                action: self.name.clone(),
                missing: task.atoms[missing].text.clone(),
            }),
            None => Ok(state.successor(self)),
        }
    }

    /// Successor without the precondition check; callers must have checked
    /// applicability.
    pub fn apply_unchecked(&self, state: &State) -> State {
        debug_assert!(self.is_applicable(state));
        state.successor(self)
    }
}

/// A fully grounded STRIPS task. Immutable after construction.
#[derive(Debug, Clone)]
pub struct GroundTask {
    pub domain_name: String,
    pub problem_name: String,
    /// Declared type names, including `object`.
    pub types: Vec<String>,
    pub objects: Vec<ObjectInfo>,
    pub predicates: Vec<Predicate>,
    pub atoms: Vec<GroundAtom>,
    pub actions: Vec<GroundAction>,
    pub init: State,
    pub goal: Vec<usize>,
    /// Atoms of the initial state that no action adds or deletes.
    pub static_atoms: Vec<usize>,
    /// Some goal atom is unreachable even in the delete relaxation.
    pub goal_unreachable: bool,
    atom_lookup: HashMap<String, usize>,
    action_lookup: HashMap<String, usize>,
    object_lookup: HashMap<String, usize>,
}

impl GroundTask {
    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_goal(&self, state: &State) -> bool {
        state.contains_all(&self.goal)
    }

    pub fn atom_by_text(&self, text: &str) -> Option<usize> {
        self.atom_lookup.get(text).copied()
    }

    pub fn action_by_name(&self, name: &str) -> Option<&GroundAction> {
        self.action_lookup.get(name).map(|&i| &self.actions[i])
    }

    pub fn object_by_name(&self, name: &str) -> Option<usize> {
        self.object_lookup.get(name).copied()
    }

    pub fn predicate_by_name(&self, name: &str) -> Option<usize> {
        self.predicates.iter().position(|p| p.name == name)
    }

    pub fn has_type(&self, ty: &str) -> bool {
        self.types.iter().any(|t| t == ty)
    }

    /// Objects whose type is `ty` or a subtype of it, in index order.
    pub fn objects_of_type<'a>(&'a self, ty: &'a str) -> impl Iterator<Item = usize> + 'a {
        self.objects
            .iter()
            .enumerate()
            .filter(move |(_, o)| o.types.iter().any(|t| t == ty))
            .map(|(i, _)| i)
    }

    /// Atoms of predicate `pred`, in index order.
    pub fn atoms_of(&self, pred: usize) -> impl Iterator<Item = &GroundAtom> + '_ {
        self.atoms.iter().filter(move |a| a.predicate == pred)
    }

    pub fn state_from_texts<'a>(
        &self,
        texts: impl IntoIterator<Item = &'a str>,
    ) -> Result<State, GroundingError> {
        let mut ids = Vec::new();
        for t in texts {
            ids.push(
                self.atom_by_text(t)
                    .ok_or_else(|| GroundingError::Invalid(format!("unknown atom {t}")))?,
            );
        }
        Ok(State::from_atoms(self.num_atoms(), ids))
    }

    pub fn state_texts(&self, state: &State) -> Vec<&str> {
        state.atoms().map(|a| self.atoms[a].text.as_str()).collect()
    }

    /// Textual dump: one canonical atom or action per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let texts = |ids: &[usize]| {
            ids.iter()
                .map(|&i| self.atoms[i].text.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        };
        for a in &self.atoms {
            let _ = writeln!(out, "atom {} {}", a.index, a.text);
        }
        for a in self.init.atoms() {
            let _ = writeln!(out, "init {}", self.atoms[a].text);
        }
        for &g in &self.goal {
            let _ = writeln!(out, "goal {}", self.atoms[g].text);
        }
        for &s in &self.static_atoms {
            let _ = writeln!(out, "static {}", self.atoms[s].text);
        }
        for a in &self.actions {
            let _ = writeln!(
                out,
                "action {} {} pre [{}] add [{}] del [{}]",
                a.index,
                a.name,
                texts(&a.pre),
                texts(&a.add),
                texts(&a.del)
            );
        }
        out
    }

    /// Builds a task directly from atom texts and actions, keeping the
    /// given atom order. Atom texts of the form `(pred a b)` are split into
    /// predicate and objects.
    pub fn from_strips(
        name: &str,
        atom_texts: Vec<String>,
        actions: Vec<StripsAction>,
        init: Vec<usize>,
        goal: Vec<usize>,
    ) -> Result<GroundTask, GroundingError> {
        let n = atom_texts.len();
        let mut objects: Vec<ObjectInfo> = Vec::new();
        let mut object_lookup = HashMap::new();
        let mut predicates: Vec<Predicate> = Vec::new();
        let mut atoms = Vec::with_capacity(n);
        for (index, text) in atom_texts.into_iter().enumerate() {
            let tokens: Vec<&str> = text
                .trim_matches(|c| c == '(' || c == ')')
                .split_whitespace()
                .collect();
            let (pname, args) = tokens.split_first().map(|(p, a)| (*p, a)).unwrap_or(("", &[]));
            let predicate = match predicates.iter().position(|p| p.name == pname) {
                Some(p) => p,
                None => {
                    predicates.push(Predicate {
                        name: pname.to_string(),
                        arity: args.len(),
                    });
                    predicates.len() - 1
                }
            };
            let args = args
                .iter()
                .map(|o| {
                    *object_lookup.entry(o.to_string()).or_insert_with(|| {
                        objects.push(ObjectInfo {
                            name: o.to_string(),
                            types: vec!["object".into()],
                        });
                        objects.len() - 1
                    })
                })
                .collect();
            atoms.push(GroundAtom {
                index,
                predicate,
                args,
                text,
            });
        }
        let check = |ids: &[usize]| ids.iter().all(|&i| i < n);
        let mut ground_actions = Vec::with_capacity(actions.len());
        for (index, a) in actions.into_iter().enumerate() {
            if !check(&a.pre) || !check(&a.add) || !check(&a.del) {
                return Err(GroundingError::Invalid(format!("action {} references unknown atom", a.name)));
            }
            ground_actions.push(normalized_action(index, a.name, a.pre, a.add, a.del));
        }
        if !check(&init) || !check(&goal) {
            return Err(GroundingError::Invalid("init or goal references unknown atom".into()));
        }
        let mut goal = goal;
        goal.sort_unstable();
        goal.dedup();
        Ok(finish_task(
            "strips".into(),
            name.into(),
            vec!["object".into()],
            objects,
            object_lookup,
            predicates,
            atoms,
            ground_actions,
            &init,
            goal,
        ))
    }
}

/// Input record for [`GroundTask::from_strips`].
#[derive(Debug, Clone)]
pub struct StripsAction {
    pub name: String,
    pub pre: Vec<usize>,
    pub add: Vec<usize>,
    pub del: Vec<usize>,
}

impl StripsAction {
    pub fn new(name: impl Into<String>, pre: Vec<usize>, add: Vec<usize>, del: Vec<usize>) -> Self {
        Self {
            name: name.into(),
            pre,
            add,
            del,
        }
    }
}

fn normalized_action(
    index: usize,
    name: String,
    mut pre: Vec<usize>,
    mut add: Vec<usize>,
    mut del: Vec<usize>,
) -> GroundAction {
    for v in [&mut pre, &mut add, &mut del] {
        v.sort_unstable();
        v.dedup();
    }
    del.retain(|d| add.binary_search(d).is_err());
    GroundAction {
        index,
        name,
        pre,
        add,
        del,
    }
}

#[allow(clippy::too_many_arguments)]
fn finish_task(
    domain_name: String,
    problem_name: String,
    types: Vec<String>,
    objects: Vec<ObjectInfo>,
    object_lookup: HashMap<String, usize>,
    predicates: Vec<Predicate>,
    atoms: Vec<GroundAtom>,
    actions: Vec<GroundAction>,
    init: &[usize],
    goal: Vec<usize>,
) -> GroundTask {
    let n = atoms.len();
    let init = State::from_atoms(n, init.iter().copied());
    let mut touched = FixedBitSet::with_capacity(n);
    for a in &actions {
        for &x in a.add.iter().chain(&a.del) {
            touched.insert(x);
        }
    }
    let static_atoms = init.atoms().filter(|&a| !touched.contains(a)).collect();
    let reachable = relaxed_reachable(n, &actions, &init);
    let goal_unreachable = goal.iter().any(|&g| !reachable.contains(g));
    let atom_lookup = atoms.iter().map(|a| (a.text.clone(), a.index)).collect();
    let action_lookup = actions.iter().map(|a| (a.name.clone(), a.index)).collect();
    GroundTask {
        domain_name,
        problem_name,
        types,
        objects,
        predicates,
        atoms,
        actions,
        init,
        goal,
        static_atoms,
        goal_unreachable,
        atom_lookup,
        action_lookup,
        object_lookup,
    }
}

fn relaxed_reachable(n: usize, actions: &[GroundAction], init: &State) -> FixedBitSet {
    let mut reached = FixedBitSet::with_capacity(n);
    for a in init.atoms() {
        reached.insert(a);
    }
    let mut fired = vec![false; actions.len()];
    loop {
        let mut changed = false;
        for (i, a) in actions.iter().enumerate() {
            if !fired[i] && a.pre.iter().all(|&p| reached.contains(p)) {
                fired[i] = true;
                for &x in &a.add {
                    if !reached.put(x) {
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return reached;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Arg {
    Param(usize),
    Obj(usize),
}

struct LiftedAtom {
    pred: usize,
    args: Vec<Arg>,
}

struct CompiledSchema {
    name: String,
    /// Allowed objects per parameter (by type), sorted.
    domains: Vec<Vec<usize>>,
    allowed: Vec<FixedBitSet>,
    pre: Vec<LiftedAtom>,
    constraints: Vec<(Arg, Arg, bool)>,
    add: Vec<LiftedAtom>,
    del: Vec<LiftedAtom>,
}

type AtomKey = (usize, Box<[usize]>);

#[derive(Default)]
struct Reached {
    set: HashSet<AtomKey>,
    by_pred: Vec<Vec<Box<[usize]>>>,
}

impl Reached {
    fn insert(&mut self, pred: usize, args: Box<[usize]>) -> bool {
        if self.set.insert((pred, args.clone())) {
            self.by_pred[pred].push(args);
            true
        } else {
            false
        }
    }
}

/// Options for [`ground_with`].
#[derive(Debug, Clone, Copy)]
pub struct GroundingOptions {
    /// Maximum number of atoms, and separately of actions.
    pub cap: usize,
}

impl Default for GroundingOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_GROUNDING_CAP,
        }
    }
}

pub fn ground(dom: &DomainAst, prob: &ProblemAst) -> Result<GroundTask, GroundingError> {
    ground_with(dom, prob, GroundingOptions::default())
}

pub fn ground_with(
    dom: &DomainAst,
    prob: &ProblemAst,
    opts: GroundingOptions,
) -> Result<GroundTask, GroundingError> {
    let mut names: Vec<(&str, &str)> = prob
        .objects
        .iter()
        .map(|o| (o.name.as_str(), o.ty.as_str()))
        .collect();
    names.sort();
    names.dedup_by(|a, b| a.0 == b.0);
    let objects: Vec<ObjectInfo> = names
        .iter()
        .map(|(n, t)| ObjectInfo {
            name: n.to_string(),
            types: dom.ancestors(t),
        })
        .collect();
    let object_lookup: HashMap<String, usize> = objects
        .iter()
        .enumerate()
        .map(|(i, o)| (o.name.clone(), i))
        .collect();
    let predicates: Vec<Predicate> = dom
        .predicates
        .iter()
        .map(|p| Predicate {
            name: p.name.clone(),
            arity: p.params.len(),
        })
        .collect();
    let pred_lookup: HashMap<&str, usize> = predicates
        .iter()
        .enumerate()
        .map(|(i, p)| (p.name.as_str(), i))
        .collect();

    let resolve = |pred: &str, args: &[String]| -> Result<(usize, Box<[usize]>), GroundingError> {
        let p = *pred_lookup
            .get(pred)
            .ok_or_else(|| GroundingError::Invalid(format!("unknown predicate {pred}")))?;
        let ids = args
            .iter()
            .map(|a| {
                object_lookup
                    .get(a)
                    .copied()
                    .ok_or_else(|| GroundingError::UnknownObject(a.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok((p, ids.into_boxed_slice()))
    };

    let schemas: Vec<CompiledSchema> = dom
        .actions
        .iter()
        .map(|s| compile_schema(s, &objects, &object_lookup, &pred_lookup))
        .collect::<Result<_, _>>()?;

    let mut reached = Reached {
        set: HashSet::new(),
        by_pred: vec![Vec::new(); predicates.len()],
    };
    let mut init_keys = Vec::new();
    for a in &prob.init {
        let (p, args) = resolve(&a.predicate, &a.args)?;
        reached.insert(p, args.clone());
        init_keys.push((p, args));
    }
    let mut goal_keys = Vec::new();
    for a in &prob.goal {
        goal_keys.push(resolve(&a.predicate, &a.args)?);
    }

    let mut instantiated: HashSet<(usize, Box<[usize]>)> = HashSet::new();
    let mut bindings: Vec<(usize, Box<[usize]>)> = Vec::new();
    loop {
        let mut fresh = Vec::new();
        for (si, schema) in schemas.iter().enumerate() {
            enumerate_bindings(schema, &reached, &mut |binding| {
                let key = (si, binding.to_vec().into_boxed_slice());
                if !instantiated.contains(&key) {
                    instantiated.insert(key.clone());
                    fresh.push(key);
                }
            });
            if instantiated.len() > opts.cap {
                return Err(GroundingError::Overflow { what: "actions", cap: opts.cap });
            }
        }
        if fresh.is_empty() {
            break;
        }
        let mut new_atoms = false;
        for (si, binding) in &fresh {
            for atom in &schemas[*si].add {
                let args = instantiate(&atom.args, binding);
                new_atoms |= reached.insert(atom.pred, args);
            }
        }
        bindings.extend(fresh);
        if reached.set.len() > opts.cap {
            return Err(GroundingError::Overflow { what: "atoms", cap: opts.cap });
        }
        if !new_atoms {
            break;
        }
    }

    let text_of = |(p, args): &AtomKey| {
        let mut t = format!("({}", predicates[*p].name);
        for &a in args.iter() {
            t.push(' ');
            t.push_str(&objects[a].name);
        }
        t.push(')');
        t
    };
    let mut keys: Vec<AtomKey> = reached.set.iter().cloned().collect();
    for g in &goal_keys {
        if !reached.set.contains(g) {
            keys.push(g.clone());
        }
    }
    let mut keyed: Vec<(String, AtomKey)> = keys.into_iter().map(|k| (text_of(&k), k)).collect();
    keyed.sort();
    keyed.dedup_by(|a, b| a.0 == b.0);
    let atom_ids: HashMap<AtomKey, usize> = keyed
        .iter()
        .enumerate()
        .map(|(i, (_, k))| (k.clone(), i))
        .collect();
    let atoms: Vec<GroundAtom> = keyed
        .into_iter()
        .enumerate()
        .map(|(index, (text, (predicate, args)))| GroundAtom {
            index,
            predicate,
            args: args.into_vec(),
            text,
        })
        .collect();

    let ids_of = |lifted: &[LiftedAtom], binding: &[usize]| -> Vec<usize> {
        lifted
            .iter()
            .filter_map(|a| atom_ids.get(&(a.pred, instantiate(&a.args, binding))).copied())
            .collect()
    };
    let mut named: Vec<(String, Vec<usize>, Vec<usize>, Vec<usize>)> = bindings
        .iter()
        .map(|(si, binding)| {
            let s = &schemas[*si];
            let mut name = format!("({}", s.name);
            for &o in binding.iter() {
                name.push(' ');
                name.push_str(&objects[o].name);
            }
            name.push(')');
            (name, ids_of(&s.pre, binding), ids_of(&s.add, binding), ids_of(&s.del, binding))
        })
        .collect();
    named.sort_by(|a, b| a.0.cmp(&b.0));
    let actions: Vec<GroundAction> = named
        .into_iter()
        .enumerate()
        .map(|(i, (name, pre, add, del))| normalized_action(i, name, pre, add, del))
        .collect();

    let init: Vec<usize> = init_keys.iter().map(|k| atom_ids[k]).collect();
    let mut goal: Vec<usize> = goal_keys.iter().map(|k| atom_ids[k]).collect();
    goal.sort_unstable();
    goal.dedup();

    Ok(finish_task(
        dom.name.clone(),
        prob.name.clone(),
        std::iter::once(crate::pddl::OBJECT_TYPE.to_string())
            .chain(dom.types.iter().map(|t| t.name.clone()))
            .collect(),
        objects,
        object_lookup,
        predicates,
        atoms,
        actions,
        &init,
        goal,
    ))
}

fn instantiate(args: &[Arg], binding: &[usize]) -> Box<[usize]> {
    args.iter()
        .map(|a| match *a {
            Arg::Param(p) => binding[p],
            Arg::Obj(o) => o,
        })
        .collect()
}

fn compile_schema(
    s: &ActionSchema,
    objects: &[ObjectInfo],
    object_lookup: &HashMap<String, usize>,
    pred_lookup: &HashMap<&str, usize>,
) -> Result<CompiledSchema, GroundingError> {
    let params: HashMap<&str, usize> = s
        .parameters
        .iter()
        .enumerate()
        .map(|(i, p)| (p.name.as_str(), i))
        .collect();
    let arg = |t: &Term| -> Result<Arg, GroundingError> {
        match t {
            Term::Var(v) => Ok(Arg::Param(params[v.as_str()])),
            Term::Const(c) => object_lookup
                .get(c)
                .map(|&o| Arg::Obj(o))
                .ok_or_else(|| GroundingError::UnknownObject(c.clone())),
        }
    };
    let lift = |atoms: &[crate::pddl::Atom]| -> Result<Vec<LiftedAtom>, GroundingError> {
        atoms
            .iter()
            .map(|a| {
                Ok(LiftedAtom {
                    pred: pred_lookup[a.predicate.as_str()],
                    args: a.args.iter().map(arg).collect::<Result<_, _>>()?,
                })
            })
            .collect()
    };
    let domains: Vec<Vec<usize>> = s
        .parameters
        .iter()
        .map(|p| {
            objects
                .iter()
                .enumerate()
                .filter(|(_, o)| o.types.contains(&p.ty))
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let allowed = domains
        .iter()
        .map(|d| {
            let mut b = FixedBitSet::with_capacity(objects.len());
            d.iter().for_each(|&o| b.insert(o));
            b
        })
        .collect();
    let constraints = s
        .constraints
        .iter()
        .map(|c| Ok((arg(&c.left)?, arg(&c.right)?, c.equal)))
        .collect::<Result<_, GroundingError>>()?;
    Ok(CompiledSchema {
        name: s.name.clone(),
        domains,
        allowed,
        pre: lift(&s.precondition)?,
        constraints,
        add: lift(&s.add_effects)?,
        del: lift(&s.delete_effects)?,
    })
}

/// Calls `emit` for every parameter binding whose preconditions all lie in
/// `reached` and which respects parameter types and equality constraints.
fn enumerate_bindings(schema: &CompiledSchema, reached: &Reached, emit: &mut dyn FnMut(&[usize])) {
    let mut binding: Vec<Option<usize>> = vec![None; schema.domains.len()];
    let mut done = vec![false; schema.pre.len()];
    join(schema, reached, &mut binding, &mut done, emit);
}

fn join(
    schema: &CompiledSchema,
    reached: &Reached,
    binding: &mut Vec<Option<usize>>,
    done: &mut Vec<bool>,
    emit: &mut dyn FnMut(&[usize]),
) {
    // Most-constrained precondition first.
    let next = (0..schema.pre.len()).filter(|&i| !done[i]).max_by_key(|&i| {
        let bound = schema.pre[i]
            .args
            .iter()
            .filter(|a| match a {
                Arg::Param(p) => binding[*p].is_some(),
                Arg::Obj(_) => true,
            })
            .count();
        (bound, std::cmp::Reverse(reached.by_pred[schema.pre[i].pred].len()), std::cmp::Reverse(i))
    });
    let Some(i) = next else {
        bind_free(schema, binding, 0, emit);
        return;
    };
    done[i] = true;
    let atom = &schema.pre[i];
    'candidates: for cand in &reached.by_pred[atom.pred] {
        let mut newly = Vec::new();
        for (arg, &obj) in atom.args.iter().zip(cand.iter()) {
            let ok = match *arg {
                Arg::Obj(o) => o == obj,
                Arg::Param(p) => match binding[p] {
                    Some(b) => b == obj,
                    None => {
                        if schema.allowed[p].contains(obj) {
                            binding[p] = Some(obj);
                            newly.push(p);
                            true
                        } else {
                            false
                        }
                    }
                },
            };
            if !ok {
                for p in newly {
                    binding[p] = None;
                }
                continue 'candidates;
            }
        }
        join(schema, reached, binding, done, emit);
        for p in newly {
            binding[p] = None;
        }
    }
    done[i] = false;
}

fn bind_free(
    schema: &CompiledSchema,
    binding: &mut Vec<Option<usize>>,
    from: usize,
    emit: &mut dyn FnMut(&[usize]),
) {
    match (from..binding.len()).find(|&p| binding[p].is_none()) {
        Some(p) => {
            for &o in &schema.domains[p] {
                binding[p] = Some(o);
                bind_free(schema, binding, p + 1, emit);
            }
            binding[p] = None;
        }
        None => {
            let full: Vec<usize> = binding.iter().map(|b| b.unwrap()).collect();
            let value = |a: Arg| match a {
                Arg::Param(p) => full[p],
                Arg::Obj(o) => o,
            };
            if schema
                .constraints
                .iter()
                .all(|&(l, r, eq)| (value(l) == value(r)) == eq)
            {
                emit(&full);
            }
        }
    }
}
