//! Compilation of annotated programs into plain CHR.
//!
//! Three generation steps: (1) a propagation rule per declared constraint
//! that communicates it to the tracer while the status flag is down, (2) a
//! rule per compound constraint annotation emitting an auxiliary annotation
//! constraint, (3) rule-annotated rules rewritten to raise the status flag
//! around their body and emit their auxiliary constraint, plus a
//! simplification rule communicating (and consuming) that auxiliary.
//! Single-head constraint annotations need no extra rule: the step-1
//! communication already carries them tracer-side.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::syntax::{is_aux_functor, ChrRule, OccurrenceTable, Program, AUX_PREFIX};
use crate::term::Term;

pub const GENERATED_PREFIXES: [&str; 3] = ["comm_cons_", "compound_", "drop_aux_"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenerationStep {
    CommunicateConstraint, // step 1
    CompoundAnnotation,    // step 2
    RuleAnnotation,        // step 3
}

#[derive(Debug, Clone)]
pub struct TransformedProgram {
    pub program: Program,
    /// Generated rule name -> which step introduced it.
    pub provenance: BTreeMap<String, GenerationStep>,
    pub status_symbol: String,
    pub sink_symbol: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("program already transformed or names collide with generated prefixes: {}", .0.join(", "))]
    NameCollision(Vec<String>),
    #[error("rule annotation `{annotation}` condition uses `{variable}` which the auxiliary constraint does not carry")]
    ConditionNotCarried { annotation: String, variable: String },
}

/// Remove transformer-internal residue from a final store: auxiliary
/// annotation constraints and status/communication symbols.
pub fn strip_aux(store: &[Term]) -> Vec<Term> {
    store
        .iter()
        .filter(|t| match t.functor() {
            Some((name, _)) => !is_aux_functor(&name),
            None => true,
        })
        .cloned()
        .collect()
}

pub fn transform(program: &Program) -> Result<TransformedProgram, TransformError> {
    let offenders: Vec<String> = program
        .rules
        .iter()
        .map(|r| r.name.clone())
        .filter(|name| GENERATED_PREFIXES.iter().any(|p| name.starts_with(p)))
        .collect();
    if !offenders.is_empty() {
        return Err(TransformError::NameCollision(offenders));
    }

    let mut declarations = program.declarations.clone();
    let mut rules: Vec<ChrRule> = Vec::new();
    let mut provenance: BTreeMap<String, GenerationStep> = BTreeMap::new();

    // Step 1: communicate every user-declared constraint on activation.
    // Auxiliary symbols are handled by their own dedicated rules.
    for (name, arity) in &program.declarations {
        if name.starts_with(AUX_PREFIX) {
            continue;
        }
        let rule = comm_propagation_rule(name, *arity);
        provenance.insert(rule.name.clone(), GenerationStep::CommunicateConstraint);
        rules.push(rule);
    }

    // Step 2: compound constraint annotations become rules emitting an
    // auxiliary annotation constraint, which step-1 style communication then
    // carries to the tracer (and which stays in the store as residue when the
    // default propagation form is used).
    let mut used_compound_names: Vec<String> = Vec::new();
    for ann in &program.constraint_annotations {
        if ann.heads.len() < 2 {
            continue;
        }
        let aux_name = format!("{AUX_PREFIX}{}", ann.name);
        let aux_args: Vec<Term> = ann.heads.iter().flat_map(|h| h.args().to_vec()).collect();
        let aux_arity = aux_args.len();
        declarations.push((aux_name.clone(), aux_arity));

        let functors: Vec<String> = ann
            .heads
            .iter()
            .filter_map(|h| h.functor().map(|f| f.0))
            .collect();
        let mut compound_name = format!("compound_{}", functors.join("_"));
        if used_compound_names.contains(&compound_name) {
            compound_name = format!("{compound_name}_{}", used_compound_names.len() + 1);
        }
        used_compound_names.push(compound_name.clone());

        let mut guard = vec![check_status(false)];
        guard.extend(ann.condition.iter().cloned());
        let body = vec![if aux_arity == 0 {
            Term::atom(aux_name.clone())
        } else {
            Term::compound(aux_name.clone(), aux_args)
        }];
        let (kept, removed) = if ann.simplify {
            (Vec::new(), ann.heads.clone())
        } else {
            (ann.heads.clone(), Vec::new())
        };
        provenance.insert(compound_name.clone(), GenerationStep::CompoundAnnotation);
        rules.push(ChrRule { name: compound_name, kept, removed, guard, body });

        let comm = comm_propagation_rule(&aux_name, aux_arity);
        provenance.insert(comm.name.clone(), GenerationStep::CompoundAnnotation);
        rules.push(comm);
    }

    // User rules, rewritten when rule-annotated (step 3).
    let mut aux_comm_rules: Vec<ChrRule> = Vec::new();
    for rule in &program.rules {
        let annotations = program.rule_annotations_for(&rule.name);
        if annotations.is_empty() {
            rules.push(rule.clone());
            continue;
        }
        let mut body = vec![set_status(true)];
        body.extend(rule.body.iter().cloned());
        let rule_names = rule_var_terms(rule);
        for ra in &annotations {
            body.push(substitute_by_name(&ra.aux_constraint, &rule_names));
        }
        body.push(set_status(false));
        rules.push(ChrRule { name: rule.name.clone(), body, ..rule.clone() });

        for ra in &annotations {
            aux_comm_rules.extend(aux_communication_rules(ra, &mut provenance)?);
        }
    }
    rules.extend(aux_comm_rules);

    let occurrences = OccurrenceTable::build(&rules);
    let mut transformed = Program {
        declarations,
        rules,
        constraint_annotations: Vec::new(),
        rule_annotations: Vec::new(),
        comm_head: program.comm_head,
        occurrences,
        var_supply: 0,
    };
    crate::syntax::renumber_program_vars(&mut transformed);

    Ok(TransformedProgram {
        program: transformed,
        provenance,
        status_symbol: "status".into(),
        sink_symbol: "communicate_constraint".into(),
    })
}

/// `comm_cons_<f>_<n> @ f(X1..Xn) ==> check(status,false) |
/// communicate_constraint(f(X1..Xn)).`
fn comm_propagation_rule(name: &str, arity: usize) -> ChrRule {
    let args: Vec<Term> = (0..arity)
        .map(|i| Term::var(format!("X{}", i + 1), i as u64))
        .collect();
    let head = if arity == 0 {
        Term::atom(name)
    } else {
        Term::compound(name, args)
    };
    ChrRule {
        name: format!("comm_cons_{name}_{arity}"),
        kept: vec![head.clone()],
        removed: Vec::new(),
        guard: vec![check_status(false)],
        body: vec![Term::compound("communicate_constraint", vec![head])],
    }
}

/// The step-3 rules for one rule annotation: a simplification rule that
/// communicates and consumes the auxiliary constraint (guarded by the
/// annotation condition when present, with an unconditional drop fallback).
fn aux_communication_rules(
    ra: &crate::syntax::RuleAnnotationRule,
    provenance: &mut BTreeMap<String, GenerationStep>,
) -> Result<Vec<ChrRule>, TransformError> {
    let (aux_name, aux_arity) = ra.aux_constraint.functor().expect("validated at parse");
    let args: Vec<Term> = (0..aux_arity)
        .map(|i| Term::var(format!("X{}", i + 1), i as u64))
        .collect();
    let head = if aux_arity == 0 {
        Term::atom(aux_name.clone())
    } else {
        Term::compound(aux_name.clone(), args.clone())
    };

    // Rewrite condition variables onto auxiliary argument positions.
    let mut position_map: BTreeMap<String, Term> = BTreeMap::new();
    for (i, arg) in ra.aux_constraint.args().iter().enumerate() {
        if let Term::Var { name, .. } = arg {
            position_map.entry(name.clone()).or_insert_with(|| args[i].clone());
        }
    }
    let mut condition = Vec::new();
    for c in &ra.condition {
        let mut free = Vec::new();
        unmapped_vars(c, &position_map, &mut free);
        if let Some(variable) = free.into_iter().next() {
            return Err(TransformError::ConditionNotCarried {
                annotation: ra.name.clone(),
                variable,
            });
        }
        condition.push(substitute_by_name(c, &position_map));
    }

    let comm_name = format!("comm_cons_{aux_name}_{aux_arity}");
    let mut out = Vec::new();
    provenance.insert(comm_name.clone(), GenerationStep::RuleAnnotation);
    out.push(ChrRule {
        name: comm_name,
        kept: Vec::new(),
        removed: vec![head.clone()],
        guard: condition.clone(),
        body: vec![Term::compound("communicate_constraint", vec![head.clone()])],
    });
    if !condition.is_empty() {
        let drop_name = format!("drop_aux_{aux_name}_{aux_arity}");
        provenance.insert(drop_name.clone(), GenerationStep::RuleAnnotation);
        out.push(ChrRule {
            name: drop_name,
            kept: Vec::new(),
            removed: vec![head],
            guard: Vec::new(),
            body: vec![Term::atom("true")],
        });
    }
    Ok(out)
}

fn check_status(value: bool) -> Term {
    Term::compound("check", vec![Term::atom("status"), Term::atom(bool_name(value))])
}

fn set_status(value: bool) -> Term {
    Term::compound("set", vec![Term::atom("status"), Term::atom(bool_name(value))])
}

fn bool_name(value: bool) -> &'static str {
    if value {
        "true"
    } else {
        "false"
    }
}

fn rule_var_terms(rule: &ChrRule) -> BTreeMap<String, Term> {
    let mut map = BTreeMap::new();
    for term in rule.kept.iter().chain(&rule.removed).chain(&rule.guard).chain(&rule.body) {
        collect_named_vars(term, &mut map);
    }
    map
}

fn collect_named_vars(term: &Term, map: &mut BTreeMap<String, Term>) {
    match term {
        Term::Var { name, .. } => {
            map.entry(name.clone()).or_insert_with(|| term.clone());
        }
        Term::Compound(_, args) => {
            for arg in args {
                collect_named_vars(arg, map);
            }
        }
        _ => {}
    }
}

fn substitute_by_name(term: &Term, names: &BTreeMap<String, Term>) -> Term {
    match term {
        Term::Var { name, .. } => names.get(name).cloned().unwrap_or_else(|| term.clone()),
        Term::Compound(f, args) => Term::Compound(
            f.clone(),
            args.iter().map(|a| substitute_by_name(a, names)).collect(),
        ),
        other => other.clone(),
    }
}

fn unmapped_vars(term: &Term, map: &BTreeMap<String, Term>, out: &mut Vec<String>) {
    match term {
        Term::Var { name, .. } => {
            if !map.contains_key(name) && !out.contains(name) {
                out.push(name.clone());
            }
        }
        Term::Compound(_, args) => {
            for arg in args {
                unmapped_vars(arg, map, out);
            }
        }
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    const SORT_ANNOTATED: &str = r#"
:- chr_constraint cell/2.
:- chr_constraint comm_head/1.
comm_head(T) ==> T=true.
sort_rule @ cell(In1,V1), cell(In2,V2) <=> In1<In2, V1>V2 |
    cell(In2,V1), cell(In1,V2).
g ann_rule_cell cell(Index,Value) ==> node(valueOf(Value), valueOf(Index)*12+2,
    50, 10, valueOf(Value)*5, 1, valueOf(Value), black, green, black, RECT).
"#;

    const SORT_RULE_ANNOTATED: &str = r#"
:- chr_constraint cell/2.
:- chr_constraint comm_head/1.
:- chr_constraint aux_ann_swap/4.
comm_head(T) ==> T=false.
sort_rule @ cell(In1,V1), cell(In2,V2) <=> In1<In2, V1>V2 |
    cell(In2,V1), cell(In1,V2).
g swap_v1_pink aux_ann_swap(In1,V1,In2,V2) ==> changeParam(nodevalueOf(V1), bkgrd, pink).
g rule_ann_sort sort_rule ==> aux_ann_swap(In1,V1,In2,V2).
"#;

    #[test]
    fn step_one_rules_for_each_declared_constraint() {
        let program = parse_program(SORT_ANNOTATED).unwrap();
        let out = transform(&program).unwrap();
        let names: Vec<&str> = out.program.rules.iter().map(|r| r.name.as_str()).collect();
        assert!(names.contains(&"comm_cons_cell_2"));
        assert!(names.contains(&"comm_cons_comm_head_1"));
        // sort_rule itself is carried over unchanged.
        let sort = out.program.rules.iter().find(|r| r.name == "sort_rule").unwrap();
        let original = program.rules.iter().find(|r| r.name == "sort_rule").unwrap();
        assert_eq!(sort.body.len(), original.body.len());
        assert!(out.program.constraint_annotations.is_empty());
    }

    #[test]
    fn step_one_rules_are_propagation_with_builtin_bodies() {
        let program = parse_program(SORT_ANNOTATED).unwrap();
        let out = transform(&program).unwrap();
        for (name, step) in &out.provenance {
            if *step == GenerationStep::CommunicateConstraint {
                let rule = out.program.rules.iter().find(|r| &r.name == name).unwrap();
                assert!(rule.is_propagation(), "{name} must keep its head");
                for b in &rule.body {
                    let f = b.functor().unwrap();
                    assert!(crate::term::is_builtin(&f.0, f.1), "{name} body must be built-in");
                }
            }
        }
    }

    #[test]
    fn rule_annotation_rewrites_body_with_status_flag() {
        let program = parse_program(SORT_RULE_ANNOTATED).unwrap();
        let out = transform(&program).unwrap();
        let sort = out.program.rules.iter().find(|r| r.name == "sort_rule").unwrap();
        let rendered: Vec<String> =
            sort.body.iter().map(crate::syntax::print_term).collect();
        assert_eq!(rendered.first().unwrap(), "set(status,true)");
        assert_eq!(rendered.last().unwrap(), "set(status,false)");
        assert!(rendered.iter().any(|t| t.starts_with("aux_ann_swap(")));
        // The auxiliary is communicated by a simplification rule.
        let comm = out
            .program
            .rules
            .iter()
            .find(|r| r.name == "comm_cons_aux_ann_swap_4")
            .unwrap();
        assert!(comm.is_simplification());
        // No step-1 propagation rule for the auxiliary symbol.
        assert_eq!(
            out.program.rules.iter().filter(|r| r.name.contains("aux_ann_swap")).count(),
            1
        );
    }

    #[test]
    fn zero_annotations_adds_only_comm_rules() {
        let source = ":- chr_constraint min/1.\nremove_min @ min(X) \\ min(Y) <=> X<Y | true.\n";
        let program = parse_program(source).unwrap();
        let out = transform(&program).unwrap();
        assert_eq!(out.program.rules.len(), 2);
        assert_eq!(out.program.rules[0].name, "comm_cons_min_1");
        assert_eq!(out.program.rules[1].name, "remove_min");
    }

    #[test]
    fn transform_rejects_already_transformed() {
        let program = parse_program(SORT_ANNOTATED).unwrap();
        let once = transform(&program).unwrap();
        let err = transform(&once.program).unwrap_err();
        match err {
            TransformError::NameCollision(names) => {
                assert!(names.iter().any(|n| n.starts_with("comm_cons_")));
            }
            other => panic!("expected name collision, got {other:?}"),
        }
    }

    #[test]
    fn compound_annotation_becomes_propagation_rule() {
        let source = r#"
:- chr_constraint n/1.
order @ n(X), n(Y) ==> X<Y | n(X).
g ann_pair n(A), n(B) ==> A<B | line(prologValue(valueOf(A)*100+valueOf(B)),
    valueOf(A)*20, 0, valueOf(B)*20, 20, red).
"#;
        // The propagation rule `order` is illustrative only; its body reuses n(X).
        let program = parse_program(source).unwrap();
        let out = transform(&program).unwrap();
        let compound = out.program.rules.iter().find(|r| r.name == "compound_n_n").unwrap();
        assert!(compound.is_propagation());
        assert_eq!(compound.kept.len(), 2);
        let body = crate::syntax::print_term(&compound.body[0]);
        assert!(body.starts_with("aux_ann_ann_pair("), "{body}");
        assert!(out.program.declarations.contains(&("aux_ann_ann_pair".into(), 2)));
        assert!(out.program.rules.iter().any(|r| r.name == "comm_cons_aux_ann_ann_pair_2"));
    }

    #[test]
    fn strip_aux_filters_reserved_residue() {
        let store = vec![
            Term::compound("cell", vec![Term::Int(2), Term::Int(7)]),
            Term::compound(
                "aux_ann_swap",
                vec![Term::Int(0), Term::Int(7), Term::Int(1), Term::Int(6)],
            ),
        ];
        assert_eq!(strip_aux(&store), vec![store[0].clone()]);
        let with_status = vec![Term::compound("min", vec![Term::Int(1)])];
        assert_eq!(strip_aux(&with_status), with_status);
        assert_eq!(strip_aux(&[]), Vec::<Term>::new());
    }

    #[test]
    fn transformed_output_reparses() {
        let program = parse_program(SORT_RULE_ANNOTATED).unwrap();
        let out = transform(&program).unwrap();
        let printed = crate::syntax::pretty_print(&out.program);
        let reparsed = parse_program(&printed).unwrap();
        assert_eq!(reparsed, out.program);
    }
}
