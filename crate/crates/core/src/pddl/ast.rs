use std::fmt;

/// Root of every type hierarchy.
pub const OBJECT_TYPE: &str = "object";

/// A name with its declared type (`?x - block`, `a - block`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

impl TypedName {
    pub fn new(name: impl Into<String>, ty: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ty: ty.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn name(&self) -> &str {
        match self {
            Term::Var(n) | Term::Const(n) => n,
        }
    }
}

/// A (possibly lifted) atom `(pred t1 .. tn)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

/// A ground atom as written in a problem file.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtomAst {
    pub predicate: String,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<TypedName>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub parent: String,
}

/// Equality constraint between two terms of a schema, `(= a b)` or `(not (= a b))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqualityConstraint {
    pub left: Term,
    pub right: Term,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub parameters: Vec<TypedName>,
    pub precondition: Vec<Atom>,
    pub constraints: Vec<EqualityConstraint>,
    pub add_effects: Vec<Atom>,
    pub delete_effects: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainAst {
    pub name: String,
    pub requirements: Vec<String>,
    pub types: Vec<TypeDecl>,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<PredicateDecl>,
    pub actions: Vec<ActionSchema>,
}

impl DomainAst {
    pub fn predicate(&self, name: &str) -> Option<&PredicateDecl> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn has_type(&self, name: &str) -> bool {
        name == OBJECT_TYPE || self.types.iter().any(|t| t.name == name)
    }

    pub fn parent_of(&self, name: &str) -> Option<&str> {
        self.types
            .iter()
            .find(|t| t.name == name)
            .map(|t| t.parent.as_str())
    }

    /// `ty` followed by its ancestors up to and including `object`.
    pub fn ancestors(&self, ty: &str) -> Vec<String> {
        let mut chain = vec![ty.to_string()];
        let mut cur = ty;
        while let Some(parent) = self.parent_of(cur) {
            if chain.iter().any(|c| c == parent) {
                break;
            }
            chain.push(parent.to_string());
            cur = parent;
        }
        if !chain.iter().any(|c| c == OBJECT_TYPE) {
            chain.push(OBJECT_TYPE.to_string());
        }
        chain
    }

    pub fn is_subtype(&self, ty: &str, of: &str) -> bool {
        of == OBJECT_TYPE || self.ancestors(ty).iter().any(|t| t == of)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemAst {
    pub name: String,
    pub domain_name: String,
    pub objects: Vec<TypedName>,
    pub init: Vec<GroundAtomAst>,
    pub goal: Vec<GroundAtomAst>,
}

struct Typed<'a>(&'a [TypedName]);

impl fmt::Display for Typed<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{} - {}", t.name, t.ty)?;
        }
        Ok(())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for GroundAtomAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for EqualityConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.equal {
            write!(f, "(= {} {})", self.left, self.right)
        } else {
            write!(f, "(not (= {} {}))", self.left, self.right)
        }
    }
}

impl fmt::Display for DomainAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (domain {})", self.name)?;
        if !self.requirements.is_empty() {
            writeln!(f, "  (:requirements {})", self.requirements.join(" "))?;
        }
        if !self.types.is_empty() {
            write!(f, "  (:types")?;
            for t in &self.types {
                write!(f, " {} - {}", t.name, t.parent)?;
            }
            writeln!(f, ")")?;
        }
        if !self.constants.is_empty() {
            writeln!(f, "  (:constants {})", Typed(&self.constants))?;
        }
        write!(f, "  (:predicates")?;
        for p in &self.predicates {
            write!(f, " ({}", p.name)?;
            if !p.params.is_empty() {
                write!(f, " {}", Typed(&p.params))?;
            }
            write!(f, ")")?;
        }
        writeln!(f, ")")?;
        for a in &self.actions {
            writeln!(f, "  (:action {}", a.name)?;
            writeln!(f, "    :parameters ({})", Typed(&a.parameters))?;
            write!(f, "    :precondition (and")?;
            for p in &a.precondition {
                write!(f, " {p}")?;
            }
            for c in &a.constraints {
                write!(f, " {c}")?;
            }
            writeln!(f, ")")?;
            write!(f, "    :effect (and")?;
            for e in &a.add_effects {
                write!(f, " {e}")?;
            }
            for e in &a.delete_effects {
                write!(f, " (not {e})")?;
            }
            writeln!(f, "))")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for ProblemAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (problem {})", self.name)?;
        writeln!(f, "  (:domain {})", self.domain_name)?;
        writeln!(f, "  (:objects {})", Typed(&self.objects))?;
        write!(f, "  (:init")?;
        for a in &self.init {
            write!(f, " {a}")?;
        }
        writeln!(f, ")")?;
        write!(f, "  (:goal (and")?;
        for a in &self.goal {
            write!(f, " {a}")?;
        }
        write!(f, ")))")
    }
}
