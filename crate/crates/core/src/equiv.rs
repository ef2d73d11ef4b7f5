//! Executable state equivalence and the differential harness.
//!
//! Two final states agree when their goal stacks and stores hold the same
//! constraint multisets (ids stripped, auxiliary constraints ignored), their
//! built-in stores bind the query variables alike, their propagation
//! histories coincide after aligning constraint ids by creation order, and
//! the visual run's id counter is at least the refined run's. The graphical
//! store and annotation history are ignored by construction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::engine::{self, StackEntry, StateR};
use crate::syntax::{is_aux_functor, parse_program, parse_query, Program};
use crate::term::{BuiltinStore, Term};
use crate::transform::{strip_aux, transform};
use crate::vis::{self, StateVis, VisStackEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailingClause {
    Goal,
    Store,
    Builtins,
    History,
    Counter,
}

impl fmt::Display for FailingClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            FailingClause::Goal => "goal",
            FailingClause::Store => "store",
            FailingClause::Builtins => "builtins",
            FailingClause::History => "history",
            FailingClause::Counter => "counter",
        };
        write!(f, "{name}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub verdict: bool,
    pub failing_clause: Option<FailingClause>,
    pub witness: Option<String>,
}

impl EquivalenceReport {
    fn pass() -> EquivalenceReport {
        EquivalenceReport { verdict: true, failing_clause: None, witness: None }
    }

    fn fail(clause: FailingClause, witness: String) -> EquivalenceReport {
        EquivalenceReport { verdict: false, failing_clause: Some(clause), witness: Some(witness) }
    }
}

// ---- alpha-aware multiset comparison ---------------------------------

/// Structural equality up to a consistent variable bijection shared across
/// the whole comparison. `added` records map insertions for backtracking.
fn alpha_eq(
    a: &Term,
    b: &Term,
    map: &mut BTreeMap<u64, u64>,
    rev: &mut BTreeMap<u64, u64>,
    added: &mut Vec<u64>,
) -> bool {
    match (a, b) {
        (Term::Var { id: ia, .. }, Term::Var { id: ib, .. }) => {
            match (map.get(ia), rev.get(ib)) {
                (Some(mapped), _) => mapped == ib,
                (None, Some(_)) => false,
                (None, None) => {
                    map.insert(*ia, *ib);
                    rev.insert(*ib, *ia);
                    added.push(*ia);
                    true
                }
            }
        }
        (Term::Int(x), Term::Int(y)) => x == y,
        (Term::Atom(x), Term::Atom(y)) => x == y,
        (Term::Compound(f, xs), Term::Compound(g, ys)) => {
            f == g
                && xs.len() == ys.len()
                && xs.iter().zip(ys).all(|(x, y)| alpha_eq(x, y, map, rev, added))
        }
        _ => false,
    }
}

fn rollback(map: &mut BTreeMap<u64, u64>, rev: &mut BTreeMap<u64, u64>, added: &[u64]) {
    for key in added {
        if let Some(value) = map.remove(key) {
            rev.remove(&value);
        }
    }
}

/// Variable-blind shape key used to prune the multiset search.
fn shape_key(term: &Term) -> String {
    match term {
        Term::Var { .. } => "_".into(),
        Term::Int(n) => n.to_string(),
        Term::Atom(a) => a.clone(),
        Term::Compound(f, args) => {
            let inner: Vec<String> = args.iter().map(shape_key).collect();
            format!("{f}({})", inner.join(","))
        }
    }
}

fn multiset_alpha_match(xs: &[Term], ys: &[Term]) -> bool {
    if xs.len() != ys.len() {
        return false;
    }
    let mut used = vec![false; ys.len()];
    let mut map = BTreeMap::new();
    let mut rev = BTreeMap::new();
    fn go(
        idx: usize,
        xs: &[Term],
        ys: &[Term],
        used: &mut Vec<bool>,
        map: &mut BTreeMap<u64, u64>,
        rev: &mut BTreeMap<u64, u64>,
    ) -> bool {
        if idx == xs.len() {
            return true;
        }
        let key = shape_key(&xs[idx]);
        for (j, y) in ys.iter().enumerate() {
            if used[j] || shape_key(y) != key {
                continue;
            }
            let mut added = Vec::new();
            if alpha_eq(&xs[idx], y, map, rev, &mut added) {
                used[j] = true;
                if go(idx + 1, xs, ys, used, map, rev) {
                    return true;
                }
                used[j] = false;
            }
            rollback(map, rev, &added);
        }
        false
    }
    go(0, xs, ys, &mut used, &mut map, &mut rev)
}

/// Multiset equivalence of two constraint collections: ids stripped by the
/// caller, auxiliary constraints filtered, variables compared up to a
/// consistent renaming.
pub fn seq_equiv(a: &[Term], b: &[Term]) -> bool {
    let fa = filter_aux(a);
    let fb = filter_aux(b);
    multiset_alpha_match(&fa, &fb)
}

fn filter_aux(terms: &[Term]) -> Vec<Term> {
    terms
        .iter()
        .filter(|t| match t.functor() {
            Some((name, _)) => !is_aux_functor(&name),
            None => true,
        })
        .cloned()
        .collect()
}

/// Built-in store equivalence: same failure flag, and the two stores bind
/// the shared non-local (query) variables to alpha-equal values. Bindings of
/// local variables are existentially quantified away by the projection.
pub fn builtin_equiv(b1: &BuiltinStore, b2: &BuiltinStore, globals: &[u64]) -> bool {
    if b1.failed || b2.failed {
        return b1.failed == b2.failed;
    }
    let mut map = BTreeMap::new();
    let mut rev = BTreeMap::new();
    let mut added = Vec::new();
    for &g in globals {
        let probe = Term::var("G", g);
        let v1 = b1.resolve(&probe);
        let v2 = b2.resolve(&probe);
        if !alpha_eq(&v1, &v2, &mut map, &mut rev, &mut added) {
            return false;
        }
    }
    true
}

fn refined_stack_terms(state: &StateR) -> Vec<Term> {
    state
        .stack
        .iter()
        .map(|entry| match entry {
            StackEntry::Goal(t) | StackEntry::Builtin(t) => state.builtins.resolve(t),
            StackEntry::Identified(t, _) | StackEntry::Active(t, _, _) => {
                state.builtins.resolve(t)
            }
        })
        .collect()
}

fn vis_stack_terms(state: &StateVis) -> Vec<Term> {
    state
        .stack
        .iter()
        .filter_map(|entry| match entry {
            VisStackEntry::Goal(t, _) | VisStackEntry::Builtin(t) => {
                Some(state.builtins.resolve(t))
            }
            VisStackEntry::Identified(t, _) | VisStackEntry::Active(t, _, _) => {
                Some(state.builtins.resolve(t))
            }
            VisStackEntry::Pending(_, _) => None,
        })
        .collect()
}

/// Ids a state's CHR components mention, excluding auxiliary constraints:
/// stored constraint ids plus every id recorded in the propagation history.
fn constraint_ids(store: &BTreeMap<u64, Term>, history: &BTreeSet<(String, Vec<u64>)>) -> Vec<u64> {
    let mut ids: BTreeSet<u64> = store
        .iter()
        .filter(|(_, t)| match t.functor() {
            Some((name, _)) => !is_aux_functor(&name),
            None => true,
        })
        .map(|(id, _)| *id)
        .collect();
    for (_, list) in history {
        ids.extend(list.iter().copied());
    }
    ids.into_iter().collect()
}

/// Clause-by-clause equivalence check of a visual state against a refined
/// state. Clauses are checked in order: goal stack, store, built-ins,
/// history (after aligning ids by creation order), id counter.
pub fn states_equivalent(v: &StateVis, r: &StateR) -> EquivalenceReport {
    // 1. goal stacks
    let vg = vis_stack_terms(v);
    let rg = refined_stack_terms(r);
    if !seq_equiv(&vg, &rg) {
        return EquivalenceReport::fail(
            FailingClause::Goal,
            format!("goal stacks differ: visual {} vs refined {}", render(&vg), render(&rg)),
        );
    }
    // 2. constraint stores
    let vs = v.store_terms();
    let rs = r.store_terms();
    if !seq_equiv(&vs, &rs) {
        return EquivalenceReport::fail(
            FailingClause::Store,
            format!("stores differ: visual {} vs refined {}", render(&vs), render(&rs)),
        );
    }
    // 3. built-in stores projected on the query variables
    if !builtin_equiv(&v.builtins, &r.builtins, &r.globals) {
        return EquivalenceReport::fail(
            FailingClause::Builtins,
            "built-in stores disagree on query variables".into(),
        );
    }
    // 4. propagation histories, ids aligned by rank (creation order)
    let v_ids = constraint_ids(&v.store, &v.history);
    let r_ids = constraint_ids(&r.store, &r.history);
    if v_ids.len() != r_ids.len() {
        return EquivalenceReport::fail(
            FailingClause::History,
            format!(
                "constraint id universes differ in size: visual {} vs refined {}",
                v_ids.len(),
                r_ids.len()
            ),
        );
    }
    let bijection: BTreeMap<u64, u64> = v_ids.iter().copied().zip(r_ids.iter().copied()).collect();
    // Paired stored constraints must carry matching terms.
    for (vid, rid) in &bijection {
        match (v.store.get(vid), r.store.get(rid)) {
            (Some(vt), Some(rt)) => {
                let vt = v.builtins.resolve(vt);
                let rt = r.builtins.resolve(rt);
                if !multiset_alpha_match(std::slice::from_ref(&vt), std::slice::from_ref(&rt)) {
                    return EquivalenceReport::fail(
                        FailingClause::History,
                        format!("id alignment pairs `{vt}` (visual #{vid}) with `{rt}` (refined #{rid})"),
                    );
                }
            }
            (None, None) => {}
            (Some(vt), None) if is_aux_term(vt) => {}
            _ => {
                return EquivalenceReport::fail(
                    FailingClause::History,
                    format!("id alignment pairs stored/removed ids inconsistently (#{vid} vs #{rid})"),
                );
            }
        }
    }
    let remapped: BTreeSet<(String, Vec<u64>)> = v
        .history
        .iter()
        .map(|(rule, ids)| {
            (rule.clone(), ids.iter().map(|id| *bijection.get(id).unwrap_or(id)).collect())
        })
        .collect();
    if remapped != r.history {
        return EquivalenceReport::fail(
            FailingClause::History,
            format!("histories differ after id alignment: {remapped:?} vs {:?}", r.history),
        );
    }
    // 5. id counter
    if v.next_id < r.next_id {
        return EquivalenceReport::fail(
            FailingClause::Counter,
            format!("visual counter {} below refined counter {}", v.next_id, r.next_id),
        );
    }
    EquivalenceReport::pass()
}

fn is_aux_term(term: &Term) -> bool {
    match term.functor() {
        Some((name, _)) => is_aux_functor(&name),
        None => false,
    }
}

fn render(terms: &[Term]) -> String {
    let inner: Vec<String> = terms.iter().map(|t| t.to_string()).collect();
    format!("{{{}}}", inner.join(", "))
}

// ---- differential harness --------------------------------------------

/// Per-query outcome of the differential checks.
#[derive(Debug, Clone, Serialize)]
pub struct QueryCheck {
    pub query: String,
    pub verdict: bool,
    pub failing_clause: Option<FailingClause>,
    pub witness: Option<String>,
    pub error: Option<String>,
}

impl QueryCheck {
    fn from_report(query: String, report: EquivalenceReport) -> QueryCheck {
        QueryCheck {
            query,
            verdict: report.verdict,
            failing_clause: report.failing_clause,
            witness: report.witness,
            error: None,
        }
    }

    fn from_error(query: String, error: String) -> QueryCheck {
        QueryCheck { query, verdict: false, failing_clause: None, witness: None, error: Some(error) }
    }
}

/// Run the visual engine on `vis_program` and the refined engine on
/// `refined_program` for one query and compare the final states. The two
/// programs are the annotated/stripped pair in normal use; the harness
/// self-test passes a deliberately mutated pair.
pub fn check_query_pair(
    vis_program: &Program,
    refined_program: &Program,
    query: &[Term],
    fuel: usize,
    seed: u64,
) -> Result<EquivalenceReport, String> {
    let vis_run = vis::run_vis(vis_program, query, fuel, seed).map_err(|e| e.to_string())?;
    let refined_run =
        engine::run(refined_program, engine::initial_state(query), fuel).map_err(|e| e.to_string())?;
    Ok(states_equivalent(&vis_run.state, &refined_run.state))
}

/// Full differential check for one program: for every query, the final
/// visual state must be equivalent to the final refined state of the
/// annotation-stripped program, and the transformed program must reproduce
/// the refined final store up to auxiliary residue.
pub fn differential_check(
    program: &Program,
    queries: &[Vec<Term>],
    fuel: usize,
    seed: u64,
) -> Vec<QueryCheck> {
    let stripped = program.strip_annotations();
    let transformed = transform(program);
    let mut out = Vec::new();
    for query in queries {
        let shown = query.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(",");
        // Theorem check: visual vs refined final states.
        let vis_vs_refined = match check_query_pair(program, &stripped, query, fuel, seed) {
            Ok(report) => report,
            Err(error) => {
                out.push(QueryCheck::from_error(shown, error));
                continue;
            }
        };
        if !vis_vs_refined.verdict {
            out.push(QueryCheck::from_report(shown, vis_vs_refined));
            continue;
        }
        // Transformation check: strip_aux(P_trans store) equals P's store.
        match &transformed {
            Ok(t) => {
                let trans_run = engine::run(&t.program, engine::initial_state(query), fuel);
                let plain_run = engine::run(&stripped, engine::initial_state(query), fuel);
                match (trans_run, plain_run) {
                    (Ok(tr), Ok(pr)) => {
                        let residue_free = strip_aux(&tr.state.store_terms());
                        if seq_equiv(&residue_free, &pr.state.store_terms()) {
                            out.push(QueryCheck::from_report(shown, EquivalenceReport::pass()));
                        } else {
                            out.push(QueryCheck::from_report(
                                shown,
                                EquivalenceReport::fail(
                                    FailingClause::Store,
                                    format!(
                                        "transformed program store {} differs from original {}",
                                        render(&residue_free),
                                        render(&pr.state.store_terms())
                                    ),
                                ),
                            ));
                        }
                    }
                    (Err(e), _) | (_, Err(e)) => {
                        out.push(QueryCheck::from_error(shown, e.to_string()));
                    }
                }
            }
            Err(e) => out.push(QueryCheck::from_error(shown, e.to_string())),
        }
    }
    out
}

// ---- corpus loading ----------------------------------------------------

/// One shipped program plus its query battery. The program file `<name>.chr`
/// pairs with `<name>.queries`, one query per line.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub source: String,
    pub program: Program,
    pub queries: Vec<Vec<Term>>,
}

pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusEntry>, String> {
    let mut entries = Vec::new();
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| format!("cannot read corpus directory {}: {e}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|x| x == "chr").unwrap_or(false))
        .collect();
    paths.sort();
    for path in paths {
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        let source = std::fs::read_to_string(&path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let program =
            parse_program(&source).map_err(|e| format!("{}: {e}", path.display()))?;
        let queries_path = path.with_extension("queries");
        let mut queries = Vec::new();
        if queries_path.exists() {
            let text = std::fs::read_to_string(&queries_path)
                .map_err(|e| format!("cannot read {}: {e}", queries_path.display()))?;
            for line in text.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('%') {
                    continue;
                }
                let query =
                    parse_query(line).map_err(|e| format!("{}: {e}", queries_path.display()))?;
                queries.push(query);
            }
        }
        entries.push(CorpusEntry { name, source, program, queries });
    }
    Ok(entries)
}
