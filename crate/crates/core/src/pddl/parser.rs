use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::sexpr::{read_one, SExpr};
use super::ParseError;

const SUPPORTED_REQUIREMENTS: &[&str] = &[":strips", ":typing", ":equality"];

fn expect_list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr], ParseError> {
    e.as_list()
        .ok_or_else(|| ParseError::syntax(e.pos(), format!("expected list for {what}")))
}

fn expect_symbol<'a>(e: &'a SExpr, what: &str) -> Result<&'a str, ParseError> {
    e.as_symbol()
        .ok_or_else(|| ParseError::syntax(e.pos(), format!("expected symbol for {what}")))
}

/// Parses `(define (<kind> name) ...)` and returns the name and the sections.
fn define_header<'a>(root: &'a SExpr, kind: &str) -> Result<(&'a str, &'a [SExpr]), ParseError> {
    let items = expect_list(root, "define")?;
    if items.first().and_then(SExpr::as_symbol) != Some("define") {
        return Err(ParseError::syntax(root.pos(), "expected (define ...)"));
    }
    let header = items
        .get(1)
        .ok_or_else(|| ParseError::syntax(root.pos(), format!("missing ({kind} name)")))?;
    let h = expect_list(header, kind)?;
    if h.len() != 2 || h[0].as_symbol() != Some(kind) {
        return Err(ParseError::syntax(header.pos(), format!("expected ({kind} name)")));
    }
    Ok((expect_symbol(&h[1], "name")?, &items[2..]))
}

/// Typed list: `a b - t c - u d` (trailing untyped names are `object`).
fn typed_list(items: &[SExpr], default_ty: &str) -> Result<Vec<TypedName>, ParseError> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let item = &items[i];
        if item.as_symbol() == Some("-") {
            let ty = items
                .get(i + 1)
                .ok_or_else(|| ParseError::syntax(item.pos(), "missing type after '-'"))?;
            let ty = match ty {
                SExpr::Symbol(s, _) => s.clone(),
                SExpr::List(..) if ty.head() == Some("either") => {
                    return Err(ParseError::UnsupportedFeature("either".into()))
                }
                _ => return Err(ParseError::syntax(ty.pos(), "malformed type")),
            };
            if pending.is_empty() {
                return Err(ParseError::syntax(item.pos(), "type without names"));
            }
            out.extend(pending.drain(..).map(|n| TypedName::new(n, ty.clone())));
            i += 2;
        } else {
            pending.push(expect_symbol(item, "name")?.to_string());
            i += 1;
        }
    }
    out.extend(pending.into_iter().map(|n| TypedName::new(n, default_ty)));
    Ok(out)
}

fn term(sym: &str) -> Term {
    match sym.strip_prefix('?') {
        Some(_) => Term::Var(sym.to_string()),
        None => Term::Const(sym.to_string()),
    }
}

fn lifted_atom(e: &SExpr) -> Result<Atom, ParseError> {
    let items = expect_list(e, "atom")?;
    let predicate = items
        .first()
        .ok_or_else(|| ParseError::syntax(e.pos(), "empty atom"))?;
    let predicate = expect_symbol(predicate, "predicate")?.to_string();
    let args = items[1..]
        .iter()
        .map(|a| expect_symbol(a, "argument").map(term))
        .collect::<Result<_, _>>()?;
    Ok(Atom { predicate, args })
}

fn unsupported_connective(head: &str) -> Option<ParseError> {
    let feature = match head {
        "or" | "imply" => "disjunctive-preconditions",
        "exists" => "existential-preconditions",
        "forall" => "universal-preconditions",
        "when" => "conditional-effects",
        "increase" | "decrease" | "assign" | "scale-up" | "scale-down" | "<" | ">" | "<=" | ">=" => {
            "numeric-fluents"
        }
        _ => return None,
    };
    Some(ParseError::UnsupportedFeature(feature.into()))
}

fn equality(items: &[SExpr], e: &SExpr, equal: bool) -> Result<EqualityConstraint, ParseError> {
    if items.len() != 3 {
        return Err(ParseError::syntax(e.pos(), "equality takes two terms"));
    }
    let left = items[1]
        .as_symbol()
        .map(term)
        .ok_or(ParseError::UnsupportedFeature("numeric-fluents".into()))?;
    let right = items[2]
        .as_symbol()
        .map(term)
        .ok_or(ParseError::UnsupportedFeature("numeric-fluents".into()))?;
    Ok(EqualityConstraint { left, right, equal })
}

fn precondition(
    e: &SExpr,
    atoms: &mut Vec<Atom>,
    constraints: &mut Vec<EqualityConstraint>,
) -> Result<(), ParseError> {
    let items = expect_list(e, "precondition")?;
    match e.head() {
        None if items.is_empty() => Ok(()),
        Some("and") => items[1..]
            .iter()
            .try_for_each(|c| precondition(c, atoms, constraints)),
        Some("=") => {
            constraints.push(equality(items, e, true)?);
            Ok(())
        }
        Some("not") => {
            let inner = items
                .get(1)
                .ok_or_else(|| ParseError::syntax(e.pos(), "empty negation"))?;
            if inner.head() == Some("=") {
                constraints.push(equality(expect_list(inner, "equality")?, inner, false)?);
                Ok(())
            } else {
                Err(ParseError::UnsupportedFeature("negative-preconditions".into()))
            }
        }
        Some(h) => match unsupported_connective(h) {
            Some(err) => Err(err),
            None => {
                atoms.push(lifted_atom(e)?);
                Ok(())
            }
        },
        None => Err(ParseError::syntax(e.pos(), "malformed precondition")),
    }
}

fn effect(e: &SExpr, add: &mut Vec<Atom>, del: &mut Vec<Atom>) -> Result<(), ParseError> {
    let items = expect_list(e, "effect")?;
    match e.head() {
        None if items.is_empty() => Ok(()),
        Some("and") => items[1..].iter().try_for_each(|c| effect(c, add, del)),
        Some("not") => {
            let inner = items
                .get(1)
                .ok_or_else(|| ParseError::syntax(e.pos(), "empty negation"))?;
            del.push(lifted_atom(inner)?);
            Ok(())
        }
        Some("forall") => Err(ParseError::UnsupportedFeature("universal-effects".into())),
        Some(h) => match unsupported_connective(h) {
            Some(err) => Err(err),
            None => {
                add.push(lifted_atom(e)?);
                Ok(())
            }
        },
        None => Err(ParseError::syntax(e.pos(), "malformed effect")),
    }
}

fn action(items: &[SExpr], e: &SExpr) -> Result<ActionSchema, ParseError> {
    let name = items
        .get(1)
        .ok_or_else(|| ParseError::syntax(e.pos(), "action without name"))?;
    let mut schema = ActionSchema {
        name: expect_symbol(name, "action name")?.to_string(),
        parameters: Vec::new(),
        precondition: Vec::new(),
        constraints: Vec::new(),
        add_effects: Vec::new(),
        delete_effects: Vec::new(),
    };
    let mut i = 2;
    while i < items.len() {
        let key = expect_symbol(&items[i], "action keyword")?;
        let value = items
            .get(i + 1)
            .ok_or_else(|| ParseError::syntax(items[i].pos(), format!("missing value for {key}")))?;
        match key {
            ":parameters" => schema.parameters = typed_list(expect_list(value, "parameters")?, OBJECT_TYPE)?,
            ":precondition" => precondition(value, &mut schema.precondition, &mut schema.constraints)?,
            ":effect" => effect(value, &mut schema.add_effects, &mut schema.delete_effects)?,
            other => {
                return Err(ParseError::syntax(
                    items[i].pos(),
                    format!("unknown action keyword {other}"),
                ))
            }
        }
        i += 2;
    }
    dedup(&mut schema.precondition);
    dedup(&mut schema.add_effects);
    dedup(&mut schema.delete_effects);
    // Delete-before-add semantics: an atom both added and deleted stays true.
    let adds: HashSet<Atom> = schema.add_effects.iter().cloned().collect();
    schema.delete_effects.retain(|a| !adds.contains(a));
    Ok(schema)
}

fn dedup<T: Clone + Eq + std::hash::Hash>(v: &mut Vec<T>) {
    let mut seen = HashSet::new();
    v.retain(|x| seen.insert(x.clone()));
}

/// Parses a domain file in the STRIPS + typing (+ equality) fragment.
pub fn parse_domain(text: &str) -> Result<DomainAst, ParseError> {
    let root = read_one(text)?;
    let (name, sections) = define_header(&root, "domain")?;
    let mut dom = DomainAst {
        name: name.to_string(),
        requirements: Vec::new(),
        types: Vec::new(),
        constants: Vec::new(),
        predicates: Vec::new(),
        actions: Vec::new(),
    };
    for section in sections {
        let items = expect_list(section, "section")?;
        let head = section
            .head()
            .ok_or_else(|| ParseError::syntax(section.pos(), "malformed section"))?;
        match head {
            ":requirements" => {
                for r in &items[1..] {
                    let r = expect_symbol(r, "requirement")?;
                    if !SUPPORTED_REQUIREMENTS.contains(&r) {
                        return Err(ParseError::UnsupportedFeature(r.trim_start_matches(':').into()));
                    }
                    dom.requirements.push(r.to_string());
                }
            }
            ":types" => {
                dom.types = typed_list(&items[1..], OBJECT_TYPE)?
                    .into_iter()
                    .filter(|t| t.name != OBJECT_TYPE)
                    .map(|t| TypeDecl {
                        name: t.name,
                        parent: t.ty,
                    })
                    .collect();
            }
            ":constants" => dom.constants = typed_list(&items[1..], OBJECT_TYPE)?,
            ":predicates" => {
                for p in &items[1..] {
                    let pl = expect_list(p, "predicate")?;
                    let pname = pl
                        .first()
                        .ok_or_else(|| ParseError::syntax(p.pos(), "empty predicate"))?;
                    dom.predicates.push(PredicateDecl {
                        name: expect_symbol(pname, "predicate name")?.to_string(),
                        params: typed_list(&pl[1..], OBJECT_TYPE)?,
                    });
                }
            }
            ":action" => dom.actions.push(action(items, section)?),
            ":functions" => return Err(ParseError::UnsupportedFeature("functions".into())),
            ":derived" => return Err(ParseError::UnsupportedFeature("derived-predicates".into())),
            ":durative-action" => return Err(ParseError::UnsupportedFeature("durative-actions".into())),
            ":constraints" => return Err(ParseError::UnsupportedFeature("constraints".into())),
            other => {
                return Err(ParseError::syntax(
                    section.pos(),
                    format!("unknown domain section {other}"),
                ))
            }
        }
    }
    check_domain(&dom)?;
    Ok(dom)
}

fn check_domain(dom: &DomainAst) -> Result<(), ParseError> {
    let mut seen = HashSet::new();
    for t in &dom.types {
        if !seen.insert(t.name.as_str()) {
            return Err(ParseError::Duplicate { kind: "type", name: t.name.clone() });
        }
    }
    for t in &dom.types {
        if !dom.has_type(&t.parent) {
            return Err(ParseError::UnknownType(t.parent.clone()));
        }
    }
    let check_ty = |ty: &str| {
        if dom.has_type(ty) {
            Ok(())
        } else {
            Err(ParseError::UnknownType(ty.to_string()))
        }
    };
    for c in &dom.constants {
        check_ty(&c.ty)?;
    }
    let mut preds: HashMap<&str, usize> = HashMap::new();
    for p in &dom.predicates {
        if preds.insert(&p.name, p.params.len()).is_some() {
            return Err(ParseError::Duplicate { kind: "predicate", name: p.name.clone() });
        }
        for param in &p.params {
            check_ty(&param.ty)?;
        }
    }
    let constants: HashSet<&str> = dom.constants.iter().map(|c| c.name.as_str()).collect();
    let mut actions = HashSet::new();
    for a in &dom.actions {
        if !actions.insert(a.name.as_str()) {
            return Err(ParseError::Duplicate { kind: "action", name: a.name.clone() });
        }
        let mut vars = HashSet::new();
        for p in &a.parameters {
            check_ty(&p.ty)?;
            if !p.name.starts_with('?') {
                return Err(ParseError::syntax(Default::default(), format!("parameter {} must start with '?'", p.name)));
            }
            if !vars.insert(p.name.as_str()) {
                return Err(ParseError::Duplicate { kind: "parameter", name: p.name.clone() });
            }
        }
        let check_term = |t: &Term| match t {
            Term::Var(v) if !vars.contains(v.as_str()) => Err(ParseError::UndeclaredVariable {
                action: a.name.clone(),
                variable: v.clone(),
            }),
            Term::Const(c) if !constants.contains(c.as_str()) => {
                Err(ParseError::UnknownObjectType(c.clone()))
            }
            _ => Ok(()),
        };
        for atom in a
            .precondition
            .iter()
            .chain(&a.add_effects)
            .chain(&a.delete_effects)
        {
            let arity = *preds
                .get(atom.predicate.as_str())
                .ok_or_else(|| ParseError::UnknownPredicate(atom.predicate.clone()))?;
            if arity != atom.args.len() {
                return Err(ParseError::ArityMismatch {
                    predicate: atom.predicate.clone(),
                    expected: arity,
                    found: atom.args.len(),
                });
            }
            atom.args.iter().try_for_each(check_term)?;
        }
        for c in &a.constraints {
            check_term(&c.left)?;
            check_term(&c.right)?;
        }
    }
    Ok(())
}

fn ground_atom(e: &SExpr) -> Result<GroundAtomAst, ParseError> {
    let items = expect_list(e, "ground atom")?;
    let head = items
        .first()
        .ok_or_else(|| ParseError::syntax(e.pos(), "empty atom"))?;
    match head.as_symbol() {
        Some("=") => return Err(ParseError::UnsupportedFeature("functions".into())),
        Some("not") => return Err(ParseError::UnsupportedFeature("negative-literals".into())),
        Some(h) if unsupported_connective(h).is_some() => return Err(unsupported_connective(h).unwrap()),
        _ => {}
    }
    let predicate = expect_symbol(head, "predicate")?.to_string();
    let args = items[1..]
        .iter()
        .map(|a| {
            let s = expect_symbol(a, "object")?;
            if s.starts_with('?') {
                Err(ParseError::syntax(a.pos(), "variable in ground atom"))
            } else {
                Ok(s.to_string())
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(GroundAtomAst { predicate, args })
}

fn goal_conjunction(e: &SExpr, out: &mut Vec<GroundAtomAst>) -> Result<(), ParseError> {
    let items = expect_list(e, "goal")?;
    match e.head() {
        None if items.is_empty() => Ok(()),
        Some("and") => items[1..].iter().try_for_each(|g| goal_conjunction(g, out)),
        _ => {
            out.push(ground_atom(e)?);
            Ok(())
        }
    }
}

/// Parses a problem file and cross-checks it against `dom`.
///
/// Domain constants are merged into the object list.
pub fn parse_problem(text: &str, dom: &DomainAst) -> Result<ProblemAst, ParseError> {
    let root = read_one(text)?;
    let (name, sections) = define_header(&root, "problem")?;
    let mut prob = ProblemAst {
        name: name.to_string(),
        domain_name: String::new(),
        objects: Vec::new(),
        init: Vec::new(),
        goal: Vec::new(),
    };
    let mut have_goal = false;
    for section in sections {
        let items = expect_list(section, "section")?;
        let head = section
            .head()
            .ok_or_else(|| ParseError::syntax(section.pos(), "malformed section"))?;
        match head {
            ":domain" => {
                let d = items
                    .get(1)
                    .ok_or_else(|| ParseError::syntax(section.pos(), "missing domain name"))?;
                prob.domain_name = expect_symbol(d, "domain name")?.to_string();
            }
            ":requirements" => {}
            ":objects" => prob.objects = typed_list(&items[1..], OBJECT_TYPE)?,
            ":init" => {
                for a in &items[1..] {
                    prob.init.push(ground_atom(a)?);
                }
            }
            ":goal" => {
                let g = items
                    .get(1)
                    .ok_or_else(|| ParseError::syntax(section.pos(), "empty goal"))?;
                goal_conjunction(g, &mut prob.goal)?;
                have_goal = true;
            }
            ":metric" => return Err(ParseError::UnsupportedFeature("action-costs".into())),
            other => {
                return Err(ParseError::syntax(
                    section.pos(),
                    format!("unknown problem section {other}"),
                ))
            }
        }
    }
    if !have_goal {
        return Err(ParseError::syntax(root.pos(), "problem has no :goal"));
    }
    if prob.domain_name != dom.name {
        return Err(ParseError::DomainMismatch {
            expected: dom.name.clone(),
            found: prob.domain_name.clone(),
        });
    }
    merge_constants(&mut prob, dom)?;
    dedup(&mut prob.init);
    dedup(&mut prob.goal);
    check_problem(&prob, dom)?;
    Ok(prob)
}

fn merge_constants(prob: &mut ProblemAst, dom: &DomainAst) -> Result<(), ParseError> {
    let mut declared: HashMap<String, String> = HashMap::new();
    let mut objects = Vec::new();
    for o in prob.objects.drain(..).chain(dom.constants.iter().cloned()) {
        match declared.get(&o.name) {
            Some(ty) if *ty == o.ty => {}
            Some(_) => return Err(ParseError::Duplicate { kind: "object", name: o.name }),
            None => {
                declared.insert(o.name.clone(), o.ty.clone());
                objects.push(o);
            }
        }
    }
    prob.objects = objects;
    Ok(())
}

fn check_problem(prob: &ProblemAst, dom: &DomainAst) -> Result<(), ParseError> {
    let mut types: HashMap<&str, &str> = HashMap::new();
    for o in &prob.objects {
        if !dom.has_type(&o.ty) {
            return Err(ParseError::UnknownObjectType(format!("{} - {}", o.name, o.ty)));
        }
        types.insert(&o.name, &o.ty);
    }
    for atom in prob.init.iter().chain(&prob.goal) {
        let decl = dom
            .predicate(&atom.predicate)
            .ok_or_else(|| ParseError::UnknownPredicate(atom.predicate.clone()))?;
        if decl.params.len() != atom.args.len() {
            return Err(ParseError::ArityMismatch {
                predicate: atom.predicate.clone(),
                expected: decl.params.len(),
                found: atom.args.len(),
            });
        }
        for (arg, param) in atom.args.iter().zip(&decl.params) {
            let ty = types
                .get(arg.as_str())
                .ok_or_else(|| ParseError::UnknownObjectType(arg.clone()))?;
            if !dom.is_subtype(ty, &param.ty) {
                return Err(ParseError::TypeMismatch {
                    predicate: atom.predicate.clone(),
                    object: arg.clone(),
                    expected: param.ty.clone(),
                });
            }
        }
    }
    Ok(())
}
