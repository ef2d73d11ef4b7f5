//! Pretty-printer. `parse_program(pretty_print(p))` reproduces `p`
//! structurally (whitespace aside).

use std::fmt::Write;

use super::{ChrRule, ConstraintAnnotationRule, Program, RuleAnnotationRule};
use crate::graphics::ParamExpr;
use crate::term::Term;

pub fn pretty_print(program: &Program) -> String {
    let mut out = String::new();
    for (name, arity) in &program.declarations {
        let _ = writeln!(out, ":- chr_constraint {name}/{arity}.");
    }
    let _ = writeln!(out);
    if program.comm_head {
        let _ = writeln!(out, "comm_head(T) ==> T=true.");
        let _ = writeln!(out);
    }
    for rule in &program.rules {
        let _ = writeln!(out, "{}", print_rule(rule));
    }
    if !program.constraint_annotations.is_empty() || !program.rule_annotations.is_empty() {
        let _ = writeln!(out);
    }
    for ann in &program.constraint_annotations {
        let _ = writeln!(out, "{}", print_constraint_annotation(ann));
    }
    for ra in &program.rule_annotations {
        let _ = writeln!(out, "{}", print_rule_annotation(ra));
    }
    out
}

fn print_rule(rule: &ChrRule) -> String {
    let mut out = format!("{} @ ", rule.name);
    if rule.is_propagation() {
        out.push_str(&join_terms(&rule.kept));
        out.push_str(" ==> ");
    } else if rule.is_simplification() {
        out.push_str(&join_terms(&rule.removed));
        out.push_str(" <=> ");
    } else {
        out.push_str(&join_terms(&rule.kept));
        out.push_str(" \\ ");
        out.push_str(&join_terms(&rule.removed));
        out.push_str(" <=> ");
    }
    if !rule.guard.is_empty() {
        out.push_str(&join_terms(&rule.guard));
        out.push_str(" | ");
    }
    if rule.body.is_empty() {
        out.push_str("true");
    } else {
        out.push_str(&join_terms(&rule.body));
    }
    out.push('.');
    out
}

fn print_constraint_annotation(ann: &ConstraintAnnotationRule) -> String {
    let arrow = if ann.simplify { "<=>" } else { "==>" };
    let mut out = format!("g {} {} {arrow} ", ann.name, join_terms(&ann.heads));
    if !ann.condition.is_empty() {
        out.push_str(&join_terms(&ann.condition));
        out.push_str(" | ");
    }
    out.push_str(ann.template.kind.name());
    out.push('(');
    for (i, param) in ann.template.params.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&print_param(param));
    }
    out.push_str(").");
    out
}

fn print_rule_annotation(ra: &RuleAnnotationRule) -> String {
    let mut out = format!("g {} {} ==> ", ra.name, ra.target_rule);
    if !ra.condition.is_empty() {
        out.push_str(&join_terms(&ra.condition));
        out.push_str(" | ");
    }
    out.push_str(&print_term(&ra.aux_constraint));
    out.push('.');
    out
}

fn print_param(param: &ParamExpr) -> String {
    match param {
        ParamExpr::Const(t) => print_term(t),
        ParamExpr::ValueOf(name) => format!("valueOf({name})"),
        ParamExpr::NameConcat { prefix, arg } => format!("{prefix}valueOf({arg})"),
        ParamExpr::PrologValue(expr) => format!("prologValue({})", print_term(expr)),
        ParamExpr::Random => "random".into(),
    }
}

fn join_terms(terms: &[Term]) -> String {
    terms.iter().map(print_term).collect::<Vec<_>>().join(", ")
}

/// Infix rendering with minimal parentheses; reparses to the same AST.
pub fn print_term(term: &Term) -> String {
    print_prec(term, 0)
}

fn precedence(op: &str, arity: usize) -> Option<u8> {
    match (op, arity) {
        ("=" | "<" | ">" | "=<" | ">=" | "==" | "\\==", 2) => Some(1),
        ("+" | "-", 2) => Some(2),
        ("*" | "/", 2) => Some(3),
        ("-", 1) => Some(4),
        _ => None,
    }
}

fn print_prec(term: &Term, min_prec: u8) -> String {
    match term {
        Term::Var { name, .. } => name.clone(),
        Term::Int(n) => n.to_string(),
        Term::Atom(name) => name.clone(),
        Term::Compound(f, args) => match precedence(f, args.len()) {
            Some(1) => {
                let body = format!("{}{f}{}", print_prec(&args[0], 2), print_prec(&args[1], 2));
                parenthesize(body, 1, min_prec)
            }
            Some(2) => {
                let body = format!("{}{f}{}", print_prec(&args[0], 2), print_prec(&args[1], 3));
                parenthesize(body, 2, min_prec)
            }
            Some(3) => {
                let body = format!("{}{f}{}", print_prec(&args[0], 3), print_prec(&args[1], 4));
                parenthesize(body, 3, min_prec)
            }
            Some(4) => {
                let body = format!("-{}", print_prec(&args[0], 5));
                parenthesize(body, 4, min_prec)
            }
            _ => {
                let inner = args.iter().map(|a| print_prec(a, 0)).collect::<Vec<_>>().join(",");
                format!("{f}({inner})")
            }
        },
    }
}

fn parenthesize(body: String, prec: u8, min_prec: u8) -> String {
    if prec < min_prec {
        format!("({body})")
    } else {
        body
    }
}
