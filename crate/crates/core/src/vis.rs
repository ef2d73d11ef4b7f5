//! Execution of annotated programs: every refined transition lifted, plus
//! annotation firing, drawing, graphical-store updates, rule-annotation
//! auxiliaries and constraint provenance.
//!
//! Dispatch for an active constraint: constraint-annotation rules fire first
//! (program order, once per (rule, head ids), suppressed when any matched
//! head was produced by a rule that itself carries a rule annotation), then
//! ordinary rule application, then drop/default. An evaluated visual sits on
//! the stack for exactly one step before `Draw` or `Update Store` consumes
//! it. Ids are shared between constraints and drawn objects, which is why a
//! visual run's counter can outgrow the refined run's.

use std::collections::{BTreeMap, BTreeSet};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::engine::{self, classify_goal, wakeup, EngineError, StackEntry, TransitionLabel};
use crate::graphics::{
    output_graphical_object, remove_gr_obj, AnnHistory, GraphicalAction, GraphicalStore,
    GraphicsError, Visual, VisualKind,
};
use crate::syntax::Program;
use crate::term::{entails_guard, match_term, BuiltinStore, Substitution, Term};

/// Provenance tag for query constraints and auxiliary constraints.
pub const AUX_RULE: &str = "aux";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VisStackEntry {
    /// Constraint goal with the name of the rule that produced it (`aux` for
    /// query constraints and auxiliaries).
    Goal(Term, String),
    Builtin(Term),
    Identified(Term, u64),
    Active(Term, u64, usize),
    /// An evaluated visual awaiting Draw / Update Store, with the firing
    /// annotation rule and head ids it came from.
    Pending(Visual, (String, Vec<u64>)),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VisLabel {
    SolveWake,
    Activate,
    Reactivate,
    Apply { rule: String, ids: Vec<u64> },
    Drop,
    Default,
    ApplyAnnotation { rule: String, head_ids: Vec<u64> },
    Draw { object_id: u64 },
    UpdateStore { kind: VisualKind },
}

impl VisLabel {
    /// The refined-semantics label this lifts, if any.
    pub fn as_refined(&self) -> Option<TransitionLabel> {
        match self {
            VisLabel::SolveWake => Some(TransitionLabel::SolveWake),
            VisLabel::Activate => Some(TransitionLabel::Activate),
            VisLabel::Reactivate => Some(TransitionLabel::Reactivate),
            VisLabel::Apply { rule, ids } => {
                Some(TransitionLabel::Apply { rule: rule.clone(), ids: ids.clone() })
            }
            VisLabel::Drop => Some(TransitionLabel::Drop),
            VisLabel::Default => Some(TransitionLabel::Default),
            _ => None,
        }
    }
}

impl std::fmt::Display for VisLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VisLabel::SolveWake => write!(f, "solve_wake"),
            VisLabel::Activate => write!(f, "activate"),
            VisLabel::Reactivate => write!(f, "reactivate"),
            VisLabel::Apply { rule, ids } => {
                let ids = ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
                write!(f, "apply {rule} [{ids}]")
            }
            VisLabel::Drop => write!(f, "drop"),
            VisLabel::Default => write!(f, "default"),
            VisLabel::ApplyAnnotation { rule, head_ids } => {
                let ids = head_ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
                write!(f, "apply_annotation {rule} [{ids}]")
            }
            VisLabel::Draw { object_id } => write!(f, "draw {object_id}"),
            VisLabel::UpdateStore { kind } => write!(f, "update_store {kind}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateVis {
    pub stack: Vec<VisStackEntry>,
    pub store: BTreeMap<u64, Term>,
    pub gr: GraphicalStore,
    pub builtins: BuiltinStore,
    pub history: BTreeSet<(String, Vec<u64>)>,
    pub h_ann: AnnHistory,
    /// Constraint provenance: id of a stored constraint to the rule that
    /// added it.
    pub cons_r: BTreeMap<u64, String>,
    pub next_id: u64,
    pub var_supply: u64,
    pub events: Vec<Term>,
    pub warnings: Vec<String>,
    /// Variables of the initial query (the non-local variables).
    pub globals: Vec<u64>,
}

impl StateVis {
    pub fn store_terms(&self) -> Vec<Term> {
        self.store.values().map(|t| self.builtins.resolve(t)).collect()
    }

    pub fn is_failed(&self) -> bool {
        self.builtins.failed
    }

    /// Recorded provenance of a stored constraint; query constraints and
    /// auxiliaries answer `aux`.
    pub fn provenance(&self, id: u64) -> Result<&str, VisError> {
        self.cons_r
            .get(&id)
            .map(|s| s.as_str())
            .ok_or_else(|| VisError::Internal(format!("no provenance recorded for id {id}")))
    }

    /// View of the CHR components used for rule matching.
    fn as_match_state(&self) -> engine::StateR {
        engine::StateR {
            stack: Vec::new(),
            store: self.store.clone(),
            builtins: self.builtins.clone(),
            history: self.history.clone(),
            next_id: self.next_id,
            var_supply: self.var_supply,
            events: Vec::new(),
            globals: self.globals.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VisError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Graphics(#[from] GraphicsError),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

#[derive(Debug, Clone)]
pub struct VisRunOutcome {
    pub initial: StateVis,
    pub state: StateVis,
    pub trace: Vec<(VisLabel, StateVis)>,
}

impl VisRunOutcome {
    pub fn labels(&self) -> Vec<VisLabel> {
        self.trace.iter().map(|(l, _)| l.clone()).collect()
    }

    pub fn draw_count(&self) -> usize {
        self.trace
            .iter()
            .filter(|(l, _)| matches!(l, VisLabel::Draw { .. }))
            .count()
    }

    /// State the k-th step started from.
    pub fn state_before(&self, k: usize) -> &StateVis {
        if k == 0 {
            &self.initial
        } else {
            &self.trace[k - 1].1
        }
    }

    /// Graphical actions in execution order, recovered from the pending
    /// visual each Update Store step consumed.
    pub fn actions(&self) -> Vec<GraphicalAction> {
        let mut out = Vec::new();
        for (k, (label, _)) in self.trace.iter().enumerate() {
            if matches!(label, VisLabel::UpdateStore { .. }) {
                if let Some(VisStackEntry::Pending(Visual::Action(action), _)) =
                    self.state_before(k).stack.last()
                {
                    out.push(action.clone());
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Error)]
pub enum VisRunError {
    #[error("fuel exhausted after {} transitions", .0.trace.len())]
    FuelExhausted(Box<VisRunOutcome>),
    #[error(transparent)]
    Vis(#[from] VisError),
}

/// Start state: query constraints carry the `aux` provenance tag.
pub fn initial_state_vis(query: &[Term]) -> StateVis {
    let mut stack = Vec::with_capacity(query.len());
    for term in query.iter().rev() {
        stack.push(lift_goal(term));
    }
    let globals: Vec<u64> = {
        let mut seen = Vec::new();
        for term in query {
            term.collect_vars(&mut seen);
        }
        seen
    };
    let var_supply = globals.iter().max().map(|v| v + 1).unwrap_or(0);
    StateVis {
        stack,
        store: BTreeMap::new(),
        gr: GraphicalStore::new(),
        builtins: BuiltinStore::new(),
        history: BTreeSet::new(),
        h_ann: AnnHistory::new(),
        cons_r: BTreeMap::new(),
        next_id: 1,
        var_supply,
        events: Vec::new(),
        warnings: Vec::new(),
        globals,
    }
}

fn lift_goal(term: &Term) -> VisStackEntry {
    match classify_goal(term) {
        StackEntry::Builtin(t) => VisStackEntry::Builtin(t),
        _ => VisStackEntry::Goal(term.clone(), AUX_RULE.to_string()),
    }
}

/// One applicable constraint-annotation instance, already evaluated.
pub struct AnnotationInstance {
    pub rule_name: String,
    pub head_ids: Vec<u64>,
    pub visual: Visual,
}

/// Search for the first applicable constraint-annotation instance for the
/// active constraint: annotation rules in program order, the active
/// constraint may fill any head position, partners ascending by id. An
/// instance is applicable when its condition is entailed, it has not fired
/// for these head ids before, and no matched head was produced by a
/// rule-annotated rule.
pub fn find_annotation_instance<R: rand::Rng>(
    program: &Program,
    state: &StateVis,
    active_term: &Term,
    active_id: u64,
    rng: &mut R,
) -> Result<Option<AnnotationInstance>, VisError> {
    if !state.store.contains_key(&active_id) {
        return Ok(None);
    }
    let _ = active_term;
    for ann in &program.constraint_annotations {
        for head_pos in 0..ann.heads.len() {
            // Rename the annotation rule apart.
            let mut map: BTreeMap<u64, u64> = BTreeMap::new();
            let mut supply = state.var_supply;
            let heads: Vec<Term> = ann
                .heads
                .iter()
                .map(|h| engine::rename_term(h, &mut map, &mut supply))
                .collect();
            let condition: Vec<Term> = ann
                .condition
                .iter()
                .map(|c| engine::rename_term(c, &mut map, &mut supply))
                .collect();

            let mut subst = Substitution::new();
            let target = state.builtins.resolve(&state.store[&active_id]);
            if !match_term(&heads[head_pos], &target, &mut subst) {
                continue;
            }
            let mut head_ids = vec![0u64; heads.len()];
            head_ids[head_pos] = active_id;
            if let Some(found) = annotation_partners(
                program,
                state,
                ann.name.as_str(),
                &heads,
                &condition,
                0,
                head_pos,
                active_id,
                subst,
                &mut head_ids,
            )? {
                // Evaluate the template under the accepted matching.
                let name_map = var_names_of(&heads);
                let lookup = |arg: &str| {
                    name_map
                        .get(arg)
                        .map(|term| state.builtins.resolve(&found.apply(term)))
                };
                let visual = output_graphical_object(&ann.template, &lookup, rng)?;
                return Ok(Some(AnnotationInstance {
                    rule_name: ann.name.clone(),
                    head_ids,
                    visual,
                }));
            }
        }
    }
    Ok(None)
}

#[allow(clippy::too_many_arguments)]
fn annotation_partners(
    program: &Program,
    state: &StateVis,
    ann_name: &str,
    heads: &[Term],
    condition: &[Term],
    slot: usize,
    active_pos: usize,
    active_id: u64,
    subst: Substitution,
    head_ids: &mut Vec<u64>,
) -> Result<Option<Substitution>, VisError> {
    if slot == heads.len() {
        if !entails_guard(&state.builtins, condition, &subst).map_err(EngineError::Term)? {
            return Ok(None);
        }
        if state.h_ann.contains(ann_name, head_ids) {
            return Ok(None);
        }
        // Suppression: heads produced by rule-annotated rules never fire
        // constraint annotations.
        for id in head_ids.iter() {
            if let Some(prov) = state.cons_r.get(id) {
                if prov != AUX_RULE && program.has_rule_annotation(prov) {
                    return Ok(None);
                }
            }
        }
        return Ok(Some(subst));
    }
    if slot == active_pos {
        return annotation_partners(
            program, state, ann_name, heads, condition, slot + 1, active_pos, active_id, subst,
            head_ids,
        );
    }
    for (&id, stored) in &state.store {
        if id == active_id || head_ids[..slot].contains(&id) {
            continue;
        }
        let mut attempt = subst.clone();
        let target = state.builtins.resolve(stored);
        if !match_term(&heads[slot], &target, &mut attempt) {
            continue;
        }
        head_ids[slot] = id;
        if let Some(found) = annotation_partners(
            program, state, ann_name, heads, condition, slot + 1, active_pos, active_id, attempt,
            head_ids,
        )? {
            return Ok(Some(found));
        }
        head_ids[slot] = 0;
    }
    Ok(None)
}

fn var_names_of(terms: &[Term]) -> BTreeMap<String, Term> {
    let mut map = BTreeMap::new();
    for term in terms {
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

/// Map the variables of a rule-annotation clause onto the renamed rule's
/// variables of the same name.
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

/// Apply one visual-semantics transition; `Ok(None)` is terminal.
pub fn step_vis<R: rand::Rng>(
    program: &Program,
    state: &StateVis,
    rng: &mut R,
) -> Result<Option<(VisLabel, StateVis)>, VisError> {
    if state.builtins.failed {
        return Ok(None);
    }
    let top = match state.stack.last() {
        Some(top) => top.clone(),
        None => return Ok(None),
    };
    match top {
        VisStackEntry::Pending(visual, origin) => {
            let mut next = state.clone();
            next.stack.pop();
            match visual {
                Visual::Object { kind, actuals } => {
                    let id = next.next_id;
                    next.next_id += 1;
                    let (gr, _replaced) = next.gr.draw(kind, actuals, id);
                    next.gr = gr;
                    next.h_ann = next
                        .h_ann
                        .add_object(&origin.0, &origin.1, id)
                        .map_err(VisError::Internal)?;
                    Ok(Some((VisLabel::Draw { object_id: id }, next)))
                }
                Visual::Action(action) => {
                    let kind = action.kind;
                    let (gr, warning) = next.gr.apply_action(&action);
                    next.gr = gr;
                    if let Some(w) = warning {
                        next.warnings.push(w);
                    }
                    Ok(Some((VisLabel::UpdateStore { kind }, next)))
                }
            }
        }
        VisStackEntry::Builtin(goal) => {
            let refined_view = state.as_match_state();
            let mut events = state.events.clone();
            let pre = state.builtins.clone();
            let solved = solve_via_refined(&refined_view, &goal, &mut events)?;
            let woken = if solved.bindings != pre.bindings && !solved.failed {
                wakeup(&state.store, &goal, &pre)
            } else {
                Vec::new()
            };
            let mut next = state.clone();
            next.stack.pop();
            next.builtins = solved;
            next.events = events;
            for id in woken.into_iter().rev() {
                let term = next.store[&id].clone();
                next.stack.push(VisStackEntry::Identified(term, id));
            }
            Ok(Some((VisLabel::SolveWake, next)))
        }
        VisStackEntry::Goal(goal, tag) => {
            let functor = goal
                .functor()
                .ok_or_else(|| EngineError::BadGoal(goal.to_string()))?;
            if !program.is_declared(&functor) {
                return Err(EngineError::Undeclared(functor.0, functor.1).into());
            }
            let mut next = state.clone();
            let id = next.next_id;
            next.next_id += 1;
            next.store.insert(id, goal.clone());
            next.cons_r.insert(id, tag);
            let top = next.stack.len() - 1;
            next.stack[top] = VisStackEntry::Active(goal, id, 1);
            Ok(Some((VisLabel::Activate, next)))
        }
        VisStackEntry::Identified(term, id) => {
            let mut next = state.clone();
            let top = next.stack.len() - 1;
            next.stack[top] = VisStackEntry::Active(term, id, 1);
            Ok(Some((VisLabel::Reactivate, next)))
        }
        VisStackEntry::Active(term, id, j) => {
            // Annotation rules take precedence over rule application.
            if let Some(instance) = find_annotation_instance(program, state, &term, id, rng)? {
                let mut next = state.clone();
                next.h_ann = next.h_ann.record_fired(&instance.rule_name, &instance.head_ids);
                next.stack.push(VisStackEntry::Pending(
                    instance.visual,
                    (instance.rule_name.clone(), instance.head_ids.clone()),
                ));
                return Ok(Some((
                    VisLabel::ApplyAnnotation {
                        rule: instance.rule_name,
                        head_ids: instance.head_ids,
                    },
                    next,
                )));
            }

            let refined_view = state.as_match_state();
            if let Some(found) = engine::find_rule_match(program, &refined_view, &term, id, j)
                .map_err(VisError::Engine)?
            {
                let next = apply_vis_match(program, state, &found, id, j, &term);
                let label = VisLabel::Apply {
                    rule: found.renamed.name.clone(),
                    ids: found.history_ids(),
                };
                return Ok(Some((label, next)));
            }

            let functor = term
                .functor()
                .ok_or_else(|| EngineError::BadGoal(term.to_string()))?;
            if j > program.occurrences.max_occurrence(&functor) {
                let mut next = state.clone();
                next.stack.pop();
                Ok(Some((VisLabel::Drop, next)))
            } else {
                let mut next = state.clone();
                let top = next.stack.len() - 1;
                next.stack[top] = VisStackEntry::Active(term, id, j + 1);
                Ok(Some((VisLabel::Default, next)))
            }
        }
    }
}

fn solve_via_refined(
    refined_view: &engine::StateR,
    goal: &Term,
    events: &mut Vec<Term>,
) -> Result<BuiltinStore, VisError> {
    // Reuse the refined engine's Solve by stepping a one-goal stack.
    let mut probe = refined_view.clone();
    probe.stack.push(StackEntry::Builtin(goal.clone()));
    probe.events = std::mem::take(events);
    // A lone built-in cannot trigger anything but Solve+Wake.
    let program = empty_program();
    match engine::step(&program, &probe).map_err(VisError::Engine)? {
        Some((TransitionLabel::SolveWake, next)) => {
            *events = next.events;
            Ok(next.builtins)
        }
        _ => Err(VisError::Internal("expected a Solve+Wake transition".into())),
    }
}

fn empty_program() -> Program {
    Program {
        declarations: vec![("__none".into(), 0)],
        rules: Vec::new(),
        constraint_annotations: Vec::new(),
        rule_annotations: Vec::new(),
        comm_head: false,
        occurrences: crate::syntax::OccurrenceTable::default(),
        var_supply: 0,
    }
}

fn apply_vis_match(
    program: &Program,
    state: &StateVis,
    found: &engine::RuleMatch,
    active_id: u64,
    j: usize,
    active_term: &Term,
) -> StateVis {
    let mut next = state.clone();
    next.var_supply = found.var_supply;
    next.stack.pop();

    let removed: BTreeSet<u64> = found.removed_ids.iter().copied().collect();
    for id in &removed {
        next.store.remove(id);
    }
    next.history.insert((found.renamed.name.clone(), found.history_ids()));

    // Communicated heads: removing a constraint also removes the objects its
    // annotations drew.
    if program.comm_head && !removed.is_empty() {
        next.gr = remove_gr_obj(&next.gr, &removed, &next.h_ann);
    }

    if found.kept_ids.contains(&active_id) {
        next.stack.push(VisStackEntry::Active(active_term.clone(), active_id, j));
    }

    let rule_name = &found.renamed.name;
    for body_item in found.renamed.body.iter().rev() {
        let instantiated = found.subst.apply(body_item);
        let entry = match classify_goal(&instantiated) {
            StackEntry::Builtin(t) => VisStackEntry::Builtin(t),
            _ => VisStackEntry::Goal(instantiated, rule_name.clone()),
        };
        next.stack.push(entry);
    }

    // Rule annotations push their auxiliary constraint ahead of the body,
    // tagged `aux`; conditions share the rule's matching.
    let renamed_names = var_names_of_rule(&found.renamed);
    let annotations = program.rule_annotations_for(rule_name);
    for ra in annotations.iter().rev() {
        let condition: Vec<Term> = ra
            .condition
            .iter()
            .map(|c| substitute_by_name(c, &renamed_names))
            .collect();
        let entailed = entails_guard(&state.builtins, &condition, &found.subst).unwrap_or(false);
        if !entailed {
            continue;
        }
        let aux = found
            .subst
            .apply(&substitute_by_name(&ra.aux_constraint, &renamed_names));
        next.stack.push(VisStackEntry::Goal(aux, AUX_RULE.to_string()));
    }
    next
}

fn var_names_of_rule(rule: &crate::syntax::ChrRule) -> BTreeMap<String, Term> {
    let mut map = BTreeMap::new();
    for term in rule
        .kept
        .iter()
        .chain(&rule.removed)
        .chain(&rule.guard)
        .chain(&rule.body)
    {
        collect_named_vars(term, &mut map);
    }
    map
}

/// Run an annotated program to fixpoint; deterministic for a fixed
/// (program, query, seed).
pub fn run_vis(
    program: &Program,
    query: &[Term],
    fuel: usize,
    seed: u64,
) -> Result<VisRunOutcome, VisRunError> {
    let initial = initial_state_vis(query);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace: Vec<(VisLabel, StateVis)> = Vec::new();
    let mut current = initial.clone();
    loop {
        match step_vis(program, &current, &mut rng)? {
            None => return Ok(VisRunOutcome { initial, state: current, trace }),
            Some((label, next)) => {
                if trace.len() >= fuel {
                    return Err(VisRunError::FuelExhausted(Box::new(VisRunOutcome {
                        initial,
                        state: current,
                        trace,
                    })));
                }
                trace.push((label, next.clone()));
                current = next;
            }
        }
    }
}
