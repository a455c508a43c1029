//! Abstract syntax and parsers for the STRIPS fragment of PDDL.
//!
//! Accepted: `:strips`, `:typing` and `:equality` (the latter only as
//! binding constraints `(= ?a ?b)` / `(not (= ?a ?b))` in preconditions).
//! Anything else, such as negative preconditions, conditional effects,
//! numeric fluents or `either` types, is rejected with
//! [`ParseError::UnsupportedFeature`].

mod ast;
mod parser;
mod sexpr;

pub use ast::*;
pub use parser::{parse_domain, parse_problem};
pub use sexpr::Pos;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("unsupported PDDL feature: {0}")]
    UnsupportedFeature(String),
    #[error("unknown predicate {0}")]
    UnknownPredicate(String),
    #[error("predicate {predicate} expects {expected} arguments, found {found}")]
    ArityMismatch {
        predicate: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown object or object type: {0}")]
    UnknownObjectType(String),
    #[error("unknown type {0}")]
    UnknownType(String),
    #[error("duplicate {kind} {name}")]
    Duplicate { kind: &'static str, name: String },
    #[error("variable {variable} in action {action} is not a parameter")]
    UndeclaredVariable { action: String, variable: String },
    #[error("problem is for domain {found}, expected {expected}")]
    DomainMismatch { expected: String, found: String },
    #[error("object {object} in ({predicate} ...) is not of type {expected}")]
    TypeMismatch {
        predicate: String,
        object: String,
        expected: String,
    },
}

impl ParseError {
    pub(crate) fn syntax(pos: Pos, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const NOOP_DOMAIN: &str = "(define (domain noop) (:predicates (p)) (:action idle :parameters () :precondition () :effect ()))";

    #[test]
    fn minimal_domain() {
        let d = parse_domain(NOOP_DOMAIN).unwrap();
        assert_eq!(d.predicates.len(), 1);
        assert_eq!(d.actions.len(), 1);
        assert!(d.actions[0].precondition.is_empty());
    }

    #[test]
    fn functions_are_rejected() {
        let text = "(define (domain f) (:predicates (p)) (:functions (total-cost)))";
        assert_eq!(
            parse_domain(text).unwrap_err(),
            ParseError::UnsupportedFeature("functions".into())
        );
    }

    #[test]
    fn negative_preconditions_are_rejected() {
        let text = "(define (domain f) (:requirements :strips :negative-preconditions) (:predicates (p)))";
        assert_eq!(
            parse_domain(text).unwrap_err(),
            ParseError::UnsupportedFeature("negative-preconditions".into())
        );
        let text = "(define (domain f) (:predicates (p)) (:action a :parameters () :precondition (not (p)) :effect (p)))";
        assert_eq!(
            parse_domain(text).unwrap_err(),
            ParseError::UnsupportedFeature("negative-preconditions".into())
        );
    }

    #[test]
    fn either_and_conditional_effects_are_rejected() {
        let text = "(define (domain f) (:types a b) (:predicates (p ?x - (either a b))))";
        assert_eq!(parse_domain(text).unwrap_err(), ParseError::UnsupportedFeature("either".into()));
        let text = "(define (domain f) (:predicates (p) (q)) (:action a :parameters () :precondition () :effect (when (p) (q))))";
        assert_eq!(
            parse_domain(text).unwrap_err(),
            ParseError::UnsupportedFeature("conditional-effects".into())
        );
    }

    #[test]
    fn schema_invariants_are_checked() {
        let dup = "(define (domain f) (:predicates (p) (p)))";
        assert!(matches!(parse_domain(dup), Err(ParseError::Duplicate { kind: "predicate", .. })));
        let free_var = "(define (domain f) (:predicates (p ?x)) (:action a :parameters () :precondition (p ?x) :effect ()))";
        assert!(matches!(parse_domain(free_var), Err(ParseError::UndeclaredVariable { .. })));
        let bad_type = "(define (domain f) (:types a - b) (:predicates (p)))";
        assert_eq!(parse_domain(bad_type).unwrap_err(), ParseError::UnknownType("b".into()));
        let arity = "(define (domain f) (:predicates (p ?x)) (:action a :parameters (?x) :precondition (p ?x ?x) :effect ()))";
        assert!(matches!(parse_domain(arity), Err(ParseError::ArityMismatch { .. })));
    }

    #[test]
    fn add_and_delete_are_disjoint_after_normalization() {
        let text = "(define (domain f) (:predicates (p ?x)) (:action a :parameters (?x) :precondition (p ?x) :effect (and (p ?x) (not (p ?x)))))";
        let d = parse_domain(text).unwrap();
        assert_eq!(d.actions[0].add_effects.len(), 1);
        assert!(d.actions[0].delete_effects.is_empty());
    }

    #[test]
    fn problem_cross_checks() {
        let dom = parse_domain(
            "(define (domain d) (:requirements :typing) (:types block) (:predicates (on ?x ?y - block) (clear ?x - block)))",
        )
        .unwrap();
        let ok = parse_problem(
            "(define (problem p) (:domain d) (:objects a b - block) (:init (clear a) (clear a) (on a b)) (:goal (and (on a b))))",
            &dom,
        )
        .unwrap();
        assert_eq!(ok.init.len(), 2);
        assert_eq!(ok.goal.len(), 1);

        let undeclared = parse_problem(
            "(define (problem p) (:domain d) (:objects a - block) (:init) (:goal (clear z)))",
            &dom,
        );
        assert!(matches!(undeclared, Err(ParseError::UnknownObjectType(o)) if o == "z"));

        let arity = parse_problem(
            "(define (problem p) (:domain d) (:objects a - block) (:init (clear a a)) (:goal (clear a)))",
            &dom,
        );
        assert!(matches!(arity, Err(ParseError::ArityMismatch { .. })));

        let wrong_domain = parse_problem("(define (problem p) (:domain other) (:goal (and)))", &dom);
        assert!(matches!(wrong_domain, Err(ParseError::DomainMismatch { .. })));

        let bad_type = parse_problem(
            "(define (problem p) (:domain d) (:objects a - ghost) (:init) (:goal (and)))",
            &dom,
        );
        assert!(matches!(bad_type, Err(ParseError::UnknownObjectType(_))));
    }

    #[test]
    fn constants_merge_into_objects() {
        let dom = parse_domain(
            "(define (domain d) (:types place) (:constants kitchen - place) (:predicates (at ?p - place)))",
        )
        .unwrap();
        let p = parse_problem(
            "(define (problem p) (:domain d) (:objects t1 - place) (:init (at kitchen)) (:goal (at t1)))",
            &dom,
        )
        .unwrap();
        let names: Vec<_> = p.objects.iter().map(|o| o.name.as_str()).collect();
        assert_eq!(names, ["t1", "kitchen"]);
    }
}
