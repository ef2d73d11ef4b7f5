//! The refined stack-based execution engine.
//!
//! A state is the tuple of goal stack, identified constraint store, built-in
//! store, propagation history and next free id. Each step applies exactly one
//! transition: built-ins are solved (waking affected stored constraints),
//! bare constraints are activated, and an active constraint walks its
//! occurrences top-down trying to fire rules, defaulting to the next
//! occurrence and finally dropping off the stack.
//!
//! Partner constraints are searched in ascending id order with heads matched
//! left to right; the first complete match wins, which makes traces
//! reproducible.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::syntax::{ChrRule, Program};
use crate::term::{
    entails_guard, is_builtin, is_builtin_term, match_term, unify, BuiltinStore, Substitution,
    Term, TermError,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StackEntry {
    /// An unprocessed CHR constraint goal.
    Goal(Term),
    /// An unprocessed built-in goal.
    Builtin(Term),
    /// A stored constraint re-added by wakeup, not yet reactivated.
    Identified(Term, u64),
    /// The active constraint `c#i:j` probing occurrence `j`.
    Active(Term, u64, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransitionLabel {
    SolveWake,
    Activate,
    Reactivate,
    Apply { rule: String, ids: Vec<u64> },
    Drop,
    Default,
}

impl std::fmt::Display for TransitionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TransitionLabel::SolveWake => write!(f, "solve_wake"),
            TransitionLabel::Activate => write!(f, "activate"),
            TransitionLabel::Reactivate => write!(f, "reactivate"),
            TransitionLabel::Apply { rule, ids } => {
                let ids = ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
                write!(f, "apply {rule} [{ids}]")
            }
            TransitionLabel::Drop => write!(f, "drop"),
            TransitionLabel::Default => write!(f, "default"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateR {
    /// Goal stack; the top is the last element.
    pub stack: Vec<StackEntry>,
    /// Identified constraint store.
    pub store: BTreeMap<u64, Term>,
    pub builtins: BuiltinStore,
    /// Propagation history: (rule name, kept ids ++ removed ids).
    pub history: BTreeSet<(String, Vec<u64>)>,
    pub next_id: u64,
    /// Supply for renaming rule variables apart from the state.
    pub var_supply: u64,
    /// Constraints communicated to the tracer by transformed programs.
    pub events: Vec<Term>,
    /// Variables of the initial query (the non-local variables).
    pub globals: Vec<u64>,
}

impl StateR {
    /// Store contents with current bindings applied.
    pub fn store_terms(&self) -> Vec<Term> {
        self.store.values().map(|t| self.builtins.resolve(t)).collect()
    }

    pub fn is_failed(&self) -> bool {
        self.builtins.failed
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("undeclared constraint {0}/{1}")]
    Undeclared(String, usize),
    #[error("goal `{0}` is neither a constraint nor a built-in")]
    BadGoal(String),
    #[error(transparent)]
    Term(#[from] TermError),
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: StateR,
    pub trace: Vec<(TransitionLabel, StateR)>,
}

impl RunOutcome {
    pub fn labels(&self) -> Vec<TransitionLabel> {
        self.trace.iter().map(|(l, _)| l.clone()).collect()
    }

    pub fn apply_rule_names(&self) -> Vec<String> {
        self.trace
            .iter()
            .filter_map(|(l, _)| match l {
                TransitionLabel::Apply { rule, .. } => Some(rule.clone()),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Error)]
pub enum RunError {
    #[error("fuel exhausted after {} transitions", .0.trace.len())]
    FuelExhausted(Box<RunOutcome>),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

pub const DEFAULT_FUEL: usize = 1_000_000;

/// Build the start state for a query: goals on the stack in textual order,
/// everything else empty, ids starting at 1.
pub fn initial_state(query: &[Term]) -> StateR {
    let mut stack = Vec::with_capacity(query.len());
    for term in query.iter().rev() {
        stack.push(classify_goal(term));
    }
    let globals: Vec<u64> = {
        let mut seen = Vec::new();
        for term in query {
            term.collect_vars(&mut seen);
        }
        seen
    };
    let var_supply = globals.iter().max().map(|v| v + 1).unwrap_or(0);
    StateR {
        stack,
        store: BTreeMap::new(),
        builtins: BuiltinStore::new(),
        history: BTreeSet::new(),
        next_id: 1,
        var_supply,
        events: Vec::new(),
        globals,
    }
}

pub fn classify_goal(term: &Term) -> StackEntry {
    if is_builtin_term(term) {
        StackEntry::Builtin(term.clone())
    } else {
        StackEntry::Goal(term.clone())
    }
}

/// The stored constraints a newly solved built-in re-activates: every
/// non-ground constraint sharing a variable with the solved constraint.
/// Fully ground constraints are never woken.
pub fn wakeup(store: &BTreeMap<u64, Term>, solved: &Term, pre: &BuiltinStore) -> Vec<u64> {
    let solved_vars: BTreeSet<u64> = pre.resolve(solved).vars().into_iter().collect();
    if solved_vars.is_empty() {
        return Vec::new();
    }
    let mut woken = Vec::new();
    for (id, term) in store {
        let resolved = pre.resolve(term);
        if resolved.is_ground() {
            continue;
        }
        if resolved.vars().iter().any(|v| solved_vars.contains(v)) {
            woken.push(*id);
        }
    }
    woken
}

/// Solve one built-in against the store. Comparisons that do not hold (or are
/// non-ground) fail the store; `communicate_constraint` appends to `events`.
fn solve(builtins: &BuiltinStore, goal: &Term, events: &mut Vec<Term>) -> Result<BuiltinStore, EngineError> {
    let mut out = builtins.clone();
    if out.failed {
        return Ok(out);
    }
    let resolved = builtins.resolve(goal);
    let (name, arity) = resolved
        .functor()
        .ok_or_else(|| EngineError::BadGoal(resolved.to_string()))?;
    match (name.as_str(), arity) {
        ("true", 0) => {}
        ("fail", 0) => out.failed = true,
        ("=", 2) => out = unify(&resolved.args()[0], &resolved.args()[1], &out),
        ("<", 2) | (">", 2) | ("=<", 2) | (">=", 2) | ("==", 2) | ("\\==", 2) | ("check", 2) => {
            if !entails_guard(&out, std::slice::from_ref(&resolved), &Substitution::new())? {
                out.failed = true;
            }
        }
        ("set", 2) => {
            let target = &resolved.args()[0];
            let value = &resolved.args()[1];
            if target != &Term::atom("status") {
                return Err(EngineError::Term(TermError::UnsupportedBuiltin("set".into(), 2)));
            }
            match value {
                Term::Atom(v) if v == "true" => out.status = true,
                Term::Atom(v) if v == "false" => out.status = false,
                _ => return Err(EngineError::Term(TermError::UnsupportedBuiltin("set".into(), 2))),
            }
        }
        ("communicate_constraint", 1) => events.push(resolved.args()[0].clone()),
        _ => return Err(EngineError::Term(TermError::UnsupportedBuiltin(name, arity))),
    }
    Ok(out)
}

/// One matched rule instance: the renamed rule, its matching substitution,
/// and the ids bound to each head.
pub(crate) struct RuleMatch {
    pub subst: Substitution,
    pub kept_ids: Vec<u64>,
    pub removed_ids: Vec<u64>,
    pub renamed: ChrRule,
    pub var_supply: u64,
}

impl RuleMatch {
    pub fn history_ids(&self) -> Vec<u64> {
        let mut ids = self.kept_ids.clone();
        ids.extend(&self.removed_ids);
        ids
    }
}

pub(crate) fn rename_rule(rule: &ChrRule, supply: u64) -> (ChrRule, u64) {
    let mut map: BTreeMap<u64, u64> = BTreeMap::new();
    let mut supply = supply;
    let kept: Vec<Term> =
        rule.kept.iter().map(|t| rename_term(t, &mut map, &mut supply)).collect();
    let removed: Vec<Term> =
        rule.removed.iter().map(|t| rename_term(t, &mut map, &mut supply)).collect();
    let guard: Vec<Term> =
        rule.guard.iter().map(|t| rename_term(t, &mut map, &mut supply)).collect();
    let body: Vec<Term> =
        rule.body.iter().map(|t| rename_term(t, &mut map, &mut supply)).collect();
    (ChrRule { name: rule.name.clone(), kept, removed, guard, body }, supply)
}

pub(crate) fn rename_term(term: &Term, map: &mut BTreeMap<u64, u64>, supply: &mut u64) -> Term {
    match term {
        Term::Var { name, id } => {
            let new_id = *map.entry(*id).or_insert_with(|| {
                let fresh = *supply;
                *supply += 1;
                fresh
            });
            Term::var(name.clone(), new_id)
        }
        Term::Compound(f, args) => Term::Compound(
            f.clone(),
            args.iter().map(|a| rename_term(a, map, supply)).collect(),
        ),
        other => other.clone(),
    }
}

/// Try to fire the rule owning occurrence `j` of the active constraint.
/// Returns the first complete match in partner-search order, or None.
pub(crate) fn find_rule_match(
    program: &Program,
    state: &StateR,
    active_term: &Term,
    active_id: u64,
    occ_j: usize,
) -> Result<Option<RuleMatch>, EngineError> {
    let functor = match active_term.functor() {
        Some(f) => f,
        None => return Ok(None),
    };
    let occ = match program.occurrences.lookup(&functor, occ_j) {
        Some(occ) => occ,
        None => return Ok(None),
    };
    // A stale active constraint (already removed from the store) cannot match.
    if !state.store.contains_key(&active_id) {
        return Ok(None);
    }
    let rule = &program.rules[occ.rule_idx];
    let (renamed, var_supply) = rename_rule(rule, state.var_supply);

    let active_head = if occ.removed {
        &renamed.removed[occ.head_idx]
    } else {
        &renamed.kept[occ.head_idx]
    };
    let mut subst = Substitution::new();
    let target = state.builtins.resolve(&state.store[&active_id]);
    if !match_term(active_head, &target, &mut subst) {
        return Ok(None);
    }

    // Remaining head slots in textual order (kept then removed), skipping the
    // active one.
    let mut slots: Vec<(bool, usize)> = Vec::new();
    for idx in 0..renamed.kept.len() {
        if !(!occ.removed && idx == occ.head_idx) {
            slots.push((false, idx));
        }
    }
    for idx in 0..renamed.removed.len() {
        if !(occ.removed && idx == occ.head_idx) {
            slots.push((true, idx));
        }
    }

    let mut kept_ids = vec![0u64; renamed.kept.len()];
    let mut removed_ids = vec![0u64; renamed.removed.len()];
    if occ.removed {
        removed_ids[occ.head_idx] = active_id;
    } else {
        kept_ids[occ.head_idx] = active_id;
    }

    let found = search_partners(
        state,
        &renamed,
        &slots,
        0,
        subst,
        &mut kept_ids,
        &mut removed_ids,
        active_id,
    )?;
    Ok(found.map(|subst| RuleMatch {
        subst,
        kept_ids,
        removed_ids,
        renamed,
        var_supply,
    }))
}

#[allow(clippy::too_many_arguments)]
fn search_partners(
    state: &StateR,
    renamed: &ChrRule,
    slots: &[(bool, usize)],
    depth: usize,
    subst: Substitution,
    kept_ids: &mut Vec<u64>,
    removed_ids: &mut Vec<u64>,
    active_id: u64,
) -> Result<Option<Substitution>, EngineError> {
    if depth == slots.len() {
        // All heads matched: check guard and propagation history.
        if !entails_guard(&state.builtins, &renamed.guard, &subst)? {
            return Ok(None);
        }
        let mut ids = kept_ids.clone();
        ids.extend(removed_ids.iter());
        if state.history.contains(&(renamed.name.clone(), ids)) {
            return Ok(None);
        }
        return Ok(Some(subst));
    }
    let (slot_removed, slot_idx) = slots[depth];
    let pattern = if slot_removed { &renamed.removed[slot_idx] } else { &renamed.kept[slot_idx] };
    for (&id, stored) in &state.store {
        if id == active_id || kept_ids.contains(&id) || removed_ids.contains(&id) {
            continue;
        }
        let mut attempt = subst.clone();
        let target = state.builtins.resolve(stored);
        if !match_term(pattern, &target, &mut attempt) {
            continue;
        }
        if slot_removed {
            removed_ids[slot_idx] = id;
        } else {
            kept_ids[slot_idx] = id;
        }
        if let Some(found) = search_partners(
            state, renamed, slots, depth + 1, attempt, kept_ids, removed_ids, active_id,
        )? {
            return Ok(Some(found));
        }
        if slot_removed {
            removed_ids[slot_idx] = 0;
        } else {
            kept_ids[slot_idx] = 0;
        }
    }
    Ok(None)
}

/// Apply one transition. `Ok(None)` means the state is terminal (empty stack
/// or failed built-in store).
pub fn step(program: &Program, state: &StateR) -> Result<Option<(TransitionLabel, StateR)>, EngineError> {
    if state.builtins.failed {
        return Ok(None);
    }
    let top = match state.stack.last() {
        Some(top) => top.clone(),
        None => return Ok(None),
    };
    match top {
        StackEntry::Builtin(goal) => {
            let mut next = state.clone();
            next.stack.pop();
            let pre = state.builtins.clone();
            let solved = solve(&state.builtins, &goal, &mut next.events)?;
            let woken = if solved.bindings != pre.bindings && !solved.failed {
                wakeup(&state.store, &goal, &pre)
            } else {
                Vec::new()
            };
            next.builtins = solved;
            // Ascending id order on top of the stack.
            for id in woken.into_iter().rev() {
                let term = next.store[&id].clone();
                next.stack.push(StackEntry::Identified(term, id));
            }
            Ok(Some((TransitionLabel::SolveWake, next)))
        }
        StackEntry::Goal(goal) => {
            if is_builtin_term(&goal) {
                let mut next = state.clone();
                let top = next.stack.len() - 1;
                next.stack[top] = StackEntry::Builtin(goal);
                return step(program, &next);
            }
            let functor = goal
                .functor()
                .ok_or_else(|| EngineError::BadGoal(goal.to_string()))?;
            if !program.is_declared(&functor) {
                return Err(EngineError::Undeclared(functor.0, functor.1));
            }
            let mut next = state.clone();
            let id = next.next_id;
            next.next_id += 1;
            next.store.insert(id, goal.clone());
            let top = next.stack.len() - 1;
            next.stack[top] = StackEntry::Active(goal, id, 1);
            Ok(Some((TransitionLabel::Activate, next)))
        }
        StackEntry::Identified(term, id) => {
            let mut next = state.clone();
            let top = next.stack.len() - 1;
            next.stack[top] = StackEntry::Active(term, id, 1);
            Ok(Some((TransitionLabel::Reactivate, next)))
        }
        StackEntry::Active(term, id, j) => {
            let functor = term
                .functor()
                .ok_or_else(|| EngineError::BadGoal(term.to_string()))?;
            if let Some(found) = find_rule_match(program, state, &term, id, j)? {
                let next = apply_match(state, &found, id, j, &term);
                let label = TransitionLabel::Apply {
                    rule: found.renamed.name.clone(),
                    ids: found.history_ids(),
                };
                return Ok(Some((label, next)));
            }
            if j > program.occurrences.max_occurrence(&functor) {
                let mut next = state.clone();
                next.stack.pop();
                Ok(Some((TransitionLabel::Drop, next)))
            } else {
                let mut next = state.clone();
                let top = next.stack.len() - 1;
                next.stack[top] = StackEntry::Active(term, id, j + 1);
                Ok(Some((TransitionLabel::Default, next)))
            }
        }
    }
}

fn apply_match(state: &StateR, found: &RuleMatch, active_id: u64, j: usize, active_term: &Term) -> StateR {
    let mut next = state.clone();
    next.var_supply = found.var_supply;
    next.stack.pop();

    for id in &found.removed_ids {
        next.store.remove(id);
    }
    next.history.insert((found.renamed.name.clone(), found.history_ids()));

    // If the active constraint was kept it continues probing occurrence j
    // underneath the freshly pushed body.
    if found.kept_ids.contains(&active_id) {
        next.stack.push(StackEntry::Active(active_term.clone(), active_id, j));
    }
    for body_item in found.renamed.body.iter().rev() {
        let instantiated = found.subst.apply(body_item);
        next.stack.push(classify_goal(&instantiated));
    }
    next
}

/// Run to fixpoint, recording the full labelled trace.
pub fn run(program: &Program, state: StateR, fuel: usize) -> Result<RunOutcome, RunError> {
    let mut trace: Vec<(TransitionLabel, StateR)> = Vec::new();
    let mut current = state;
    loop {
        match step(program, &current).map_err(RunError::Engine)? {
            None => return Ok(RunOutcome { state: current, trace }),
            Some((label, next)) => {
                if trace.len() >= fuel {
                    return Err(RunError::FuelExhausted(Box::new(RunOutcome { state: current, trace })));
                }
                trace.push((label, next.clone()));
                current = next;
            }
        }
    }
}

/// Parse-and-run convenience used by the CLI and tests.
pub fn run_query(program: &Program, query: &[Term], fuel: usize) -> Result<RunOutcome, RunError> {
    run(program, initial_state(query), fuel)
}

pub fn is_builtin_functor(name: &str, arity: usize) -> bool {
    is_builtin(name, arity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    const MIN_PROGRAM: &str = "\
:- chr_constraint min/1.
remove_dup @ min(X) \\ min(X) <=> true.
remove_min @ min(X) \\ min(Y) <=> X<Y | true.
";

    fn min(n: i64) -> Term {
        Term::compound("min", vec![Term::Int(n)])
    }

    #[test]
    fn initial_state_of_min_query() {
        let state = initial_state(&[min(20), min(8), min(1)]);
        assert_eq!(state.stack.len(), 3);
        assert_eq!(state.stack.last(), Some(&StackEntry::Goal(min(20))));
        assert!(state.store.is_empty());
        assert_eq!(state.next_id, 1);
    }

    #[test]
    fn initial_state_classifies_builtins() {
        let query = vec![Term::compound("=", vec![Term::var("X", 0), Term::Int(3)])];
        let state = initial_state(&query);
        assert!(matches!(state.stack[0], StackEntry::Builtin(_)));
        let empty = initial_state(&[]);
        assert!(empty.stack.is_empty());
    }

    #[test]
    fn activate_transition() {
        let program = parse_program(MIN_PROGRAM).unwrap();
        let state = initial_state(&[min(20)]);
        let (label, next) = step(&program, &state).unwrap().unwrap();
        assert_eq!(label, TransitionLabel::Activate);
        assert_eq!(next.store.len(), 1);
        assert_eq!(next.stack.last(), Some(&StackEntry::Active(min(20), 1, 1)));
        assert_eq!(next.next_id, 2);
    }

    #[test]
    fn drop_beyond_max_occurrence() {
        let program = parse_program(MIN_PROGRAM).unwrap();
        let mut state = initial_state(&[]);
        state.store.insert(1, min(20));
        state.next_id = 2;
        state.stack.push(StackEntry::Active(min(20), 1, 5));
        let (label, next) = step(&program, &state).unwrap().unwrap();
        assert_eq!(label, TransitionLabel::Drop);
        assert!(next.stack.is_empty());
    }

    #[test]
    fn apply_remove_min_at_occurrence_three() {
        // Active min(8)#3:3 with store {min(1)#2, min(8)#3}: occurrence 3 is
        // the removed head of remove_min, partner min(1) entails 1<8.
        let program = parse_program(MIN_PROGRAM).unwrap();
        let mut state = initial_state(&[]);
        state.store.insert(2, min(1));
        state.store.insert(3, min(8));
        state.next_id = 4;
        state.stack.push(StackEntry::Active(min(8), 3, 3));
        let (label, next) = step(&program, &state).unwrap().unwrap();
        assert_eq!(
            label,
            TransitionLabel::Apply { rule: "remove_min".into(), ids: vec![2, 3] }
        );
        assert!(!next.store.contains_key(&3));
        assert!(next.store.contains_key(&2));
        // Active constraint was removed, so it does not survive on the stack.
        assert_eq!(next.stack.len(), 1); // just the pushed body `true`
        assert!(matches!(next.stack[0], StackEntry::Builtin(_)));
    }

    #[test]
    fn min_query_reaches_golden_fixpoint() {
        let program = parse_program(MIN_PROGRAM).unwrap();
        let outcome = run_query(&program, &[min(20), min(8), min(1)], DEFAULT_FUEL).unwrap();
        assert_eq!(outcome.state.store_terms(), vec![min(1)]);
        assert_eq!(outcome.apply_rule_names(), vec!["remove_min", "remove_min"]);
    }

    #[test]
    fn min_single_constraint_label_skeleton() {
        let program = parse_program(MIN_PROGRAM).unwrap();
        let outcome = run_query(&program, &[min(20)], DEFAULT_FUEL).unwrap();
        let expected = vec![
            TransitionLabel::Activate,
            TransitionLabel::Default,
            TransitionLabel::Default,
            TransitionLabel::Default,
            TransitionLabel::Default,
            TransitionLabel::Drop,
        ];
        assert_eq!(outcome.labels(), expected);
    }

    #[test]
    fn empty_query_is_terminal() {
        let program = parse_program(MIN_PROGRAM).unwrap();
        let outcome = run_query(&program, &[], DEFAULT_FUEL).unwrap();
        assert!(outcome.trace.is_empty());
    }

    #[test]
    fn fuel_exhaustion_carries_partial_trace() {
        let program = parse_program(MIN_PROGRAM).unwrap();
        let err = run_query(&program, &[min(20), min(8)], 1).unwrap_err();
        match err {
            RunError::FuelExhausted(partial) => assert_eq!(partial.trace.len(), 1),
            other => panic!("expected fuel exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn wakeup_only_shared_nonground() {
        // solve X=3 with store {p(X)#1, q(7)#2}: only p(X) shares X.
        let store: BTreeMap<u64, Term> = [
            (1, Term::compound("p", vec![Term::var("X", 0)])),
            (2, Term::compound("q", vec![Term::Int(7)])),
        ]
        .into_iter()
        .collect();
        let pre = BuiltinStore::new();
        let solved = Term::compound("=", vec![Term::var("X", 0), Term::Int(3)]);
        assert_eq!(wakeup(&store, &solved, &pre), vec![1]);
    }

    #[test]
    fn wakeup_nothing_when_ground() {
        let store: BTreeMap<u64, Term> =
            [(1, Term::compound("p", vec![Term::var("X", 0)]))].into_iter().collect();
        let pre = BuiltinStore::new();
        let solved = Term::compound("=", vec![Term::Int(3), Term::Int(3)]);
        assert_eq!(wakeup(&store, &solved, &pre), Vec::<u64>::new());
    }

    #[test]
    fn wakeup_aliasing_wakes_both() {
        // Oracle: recompute the variable-occurrence index by scanning the
        // store; both r(X)#1 and r(Y)#2 occur under a variable of X=Y.
        let store: BTreeMap<u64, Term> = [
            (1, Term::compound("r", vec![Term::var("X", 0)])),
            (2, Term::compound("r", vec![Term::var("Y", 1)])),
        ]
        .into_iter()
        .collect();
        let pre = BuiltinStore::new();
        let solved = Term::compound("=", vec![Term::var("X", 0), Term::var("Y", 1)]);

        let solved_vars: BTreeSet<u64> = solved.vars().into_iter().collect();
        let mut oracle: Vec<u64> = Vec::new();
        for (id, term) in &store {
            if term.vars().iter().any(|v| solved_vars.contains(v)) {
                oracle.push(*id);
            }
        }
        assert_eq!(wakeup(&store, &solved, &pre), oracle);
        assert_eq!(oracle, vec![1, 2]);
    }

    #[test]
    fn failed_builtin_store_is_terminal() {
        let program = parse_program(MIN_PROGRAM).unwrap();
        let query = vec![
            Term::compound("=", vec![Term::var("X", 0), Term::Int(3)]),
            Term::compound("=", vec![Term::var("X", 0), Term::Int(4)]),
            min(1),
        ];
        let outcome = run_query(&program, &query, DEFAULT_FUEL).unwrap();
        assert!(outcome.state.is_failed());
        // min(1) never ran: the failed store halts the derivation.
        assert!(outcome.state.store.is_empty());
    }

    #[test]
    fn stale_woken_constraint_drops_out() {
        // Solving Z=5 wakes a(Z) and c(Z); reactivated a removes c, whose
        // pending stack entry then walks its occurrences as a stale active
        // and drops without matching anything.
        let program = parse_program(
            "\
:- chr_constraint a/1.
:- chr_constraint c/1.
kill @ a(X) \\ c(X) <=> X>0 | true.
",
        )
        .unwrap();
        let query = vec![
            Term::compound("a", vec![Term::var("Z", 0)]),
            Term::compound("c", vec![Term::var("Z", 0)]),
            Term::compound("=", vec![Term::var("Z", 0), Term::Int(5)]),
        ];
        let outcome = run_query(&program, &query, DEFAULT_FUEL).unwrap();
        assert_eq!(outcome.apply_rule_names(), vec!["kill"]);
        let reactivations = outcome
            .labels()
            .iter()
            .filter(|l| matches!(l, TransitionLabel::Reactivate))
            .count();
        assert_eq!(reactivations, 2, "both woken constraints reactivate");
        assert_eq!(outcome.state.store_terms(), vec![Term::compound("a", vec![Term::Int(5)])]);
    }

    #[test]
    fn undeclared_constraint_is_an_error() {
        let program = parse_program(MIN_PROGRAM).unwrap();
        let err = run_query(&program, &[Term::compound("max", vec![Term::Int(1)])], 10);
        assert!(matches!(
            err,
            Err(RunError::Engine(EngineError::Undeclared(name, 1))) if name == "max"
        ));
    }
}
