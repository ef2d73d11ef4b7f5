//! Surface syntax: lexer, parser and pretty-printer for `.chr` programs
//! extended with annotation rules.
//!
//! The concrete grammar: rules end with `.`; `<=>` introduces
//! simplification/simpagation, `==>` propagation; `\` separates kept from
//! removed heads; `|` separates the guard (or annotation condition) from the
//! body; annotation rules begin with the bare token `g`. A
//! `comm_head(T) ==> T=true.` rule is recognised and stripped into the
//! program-level `comm_head` flag.

mod lexer;
mod parser;
mod printer;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graphics::VisualTemplate;
use crate::term::{Functor, Term};

pub use parser::{parse_program, parse_query};
pub(crate) use parser::renumber_program_vars;
pub use printer::{pretty_print, print_term};

/// Reserved functor prefix for auxiliary constraints carrying rule-annotation
/// payloads; the transformer and the visual engine agree on it.
pub const AUX_PREFIX: &str = "aux_ann_";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl SyntaxError {
    pub fn at(line: usize, col: usize, message: impl Into<String>) -> SyntaxError {
        SyntaxError { line, col, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChrRule {
    pub name: String,
    /// Head constraints kept on application (H_k).
    pub kept: Vec<Term>,
    /// Head constraints removed on application (H_r).
    pub removed: Vec<Term>,
    pub guard: Vec<Term>,
    pub body: Vec<Term>,
}

impl ChrRule {
    pub fn is_propagation(&self) -> bool {
        self.removed.is_empty()
    }

    pub fn is_simplification(&self) -> bool {
        self.kept.is_empty()
    }

    /// All head terms in history order: kept first, then removed.
    pub fn heads_in_history_order(&self) -> impl Iterator<Item = &Term> {
        self.kept.iter().chain(self.removed.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintAnnotationRule {
    pub name: String,
    /// One or more interesting constraints.
    pub heads: Vec<Term>,
    pub condition: Vec<Term>,
    pub template: VisualTemplate,
    /// Written with `<=>`: the transformer emits a simplification rule for
    /// this annotation instead of the default propagation rule.
    pub simplify: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleAnnotationRule {
    pub name: String,
    pub target_rule: String,
    pub condition: Vec<Term>,
    /// Auxiliary constraint (reserved `aux_ann_` prefix) carrying the
    /// visual payload; its variables refer to the target rule's variables
    /// by name.
    pub aux_constraint: Term,
}

/// Where one numbered occurrence of a constraint symbol lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Occurrence {
    pub rule_idx: usize,
    pub removed: bool,
    pub head_idx: usize,
}

/// Per-symbol occurrence numbering, 1-based, top-down through the program.
/// Within one rule removed heads are numbered before kept heads, each group
/// in textual order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OccurrenceTable {
    map: BTreeMap<Functor, Vec<Occurrence>>,
}

impl OccurrenceTable {
    pub fn build(rules: &[ChrRule]) -> OccurrenceTable {
        let mut map: BTreeMap<Functor, Vec<Occurrence>> = BTreeMap::new();
        for (rule_idx, rule) in rules.iter().enumerate() {
            for (head_idx, head) in rule.removed.iter().enumerate() {
                if let Some(f) = head.functor() {
                    map.entry(f).or_default().push(Occurrence { rule_idx, removed: true, head_idx });
                }
            }
            for (head_idx, head) in rule.kept.iter().enumerate() {
                if let Some(f) = head.functor() {
                    map.entry(f).or_default().push(Occurrence {
                        rule_idx,
                        removed: false,
                        head_idx,
                    });
                }
            }
        }
        OccurrenceTable { map }
    }

    /// Occurrence `j` (1-based) of a constraint symbol.
    pub fn lookup(&self, functor: &Functor, j: usize) -> Option<Occurrence> {
        if j == 0 {
            return None;
        }
        self.map.get(functor).and_then(|v| v.get(j - 1)).copied()
    }

    pub fn max_occurrence(&self, functor: &Functor) -> usize {
        self.map.get(functor).map(|v| v.len()).unwrap_or(0)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Functor> {
        self.map.keys()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub declarations: Vec<Functor>,
    pub rules: Vec<ChrRule>,
    pub constraint_annotations: Vec<ConstraintAnnotationRule>,
    pub rule_annotations: Vec<RuleAnnotationRule>,
    pub comm_head: bool,
    pub occurrences: OccurrenceTable,
    /// One past the highest variable id used by the program's clauses; the
    /// engines rename rule variables apart starting above this.
    pub var_supply: u64,
}

impl Program {
    pub fn is_declared(&self, functor: &Functor) -> bool {
        self.declarations.contains(functor)
    }

    pub fn rule_index(&self, name: &str) -> Option<usize> {
        self.rules.iter().position(|r| r.name == name)
    }

    pub fn rule_annotations_for(&self, rule_name: &str) -> Vec<&RuleAnnotationRule> {
        self.rule_annotations
            .iter()
            .filter(|ra| ra.target_rule == rule_name)
            .collect()
    }

    /// Does this rule carry a rule annotation? Constraints produced by such
    /// rules never trigger their own constraint annotations.
    pub fn has_rule_annotation(&self, rule_name: &str) -> bool {
        self.rule_annotations.iter().any(|ra| ra.target_rule == rule_name)
    }

    /// The same CHR rules with every annotation removed.
    pub fn strip_annotations(&self) -> Program {
        Program {
            constraint_annotations: Vec::new(),
            rule_annotations: Vec::new(),
            ..self.clone()
        }
    }
}

/// True for constraint symbols the equivalence check ignores: auxiliary
/// rule-annotation constraints and transformer-internal symbols.
pub fn is_aux_functor(name: &str) -> bool {
    name.starts_with(AUX_PREFIX)
        || name.starts_with("comm_cons_")
        || name.starts_with("compound_")
        || name == "status"
}
