//! The visual vocabulary: object/action templates, actual-parameter
//! evaluation, the graphical store and the annotation history.
//!
//! Object kinds follow the classic animation command set. Schemas are fixed
//! here; the name of an object is the rendering of its first actual
//! parameter and is unique within a store (drawing over an existing name
//! replaces the older object).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::term::{eval_arith, Substitution, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum VisualKind {
    Node,
    Circle,
    Text,
    Line,
    Image,
    ChangeParam,
    MoveRelative,
}

impl VisualKind {
    pub fn from_name(name: &str) -> Option<VisualKind> {
        match name {
            "node" => Some(VisualKind::Node),
            "circle" => Some(VisualKind::Circle),
            "text" => Some(VisualKind::Text),
            "line" => Some(VisualKind::Line),
            "image" => Some(VisualKind::Image),
            "changeParam" => Some(VisualKind::ChangeParam),
            "moveRelative" => Some(VisualKind::MoveRelative),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            VisualKind::Node => "node",
            VisualKind::Circle => "circle",
            VisualKind::Text => "text",
            VisualKind::Line => "line",
            VisualKind::Image => "image",
            VisualKind::ChangeParam => "changeParam",
            VisualKind::MoveRelative => "moveRelative",
        }
    }

    pub fn is_action(&self) -> bool {
        matches!(self, VisualKind::ChangeParam | VisualKind::MoveRelative)
    }

    pub fn arity(&self) -> usize {
        self.param_names().len()
    }

    /// Positional parameter names, also the `changeParam` vocabulary.
    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            VisualKind::Node => &[
                "name", "x", "y", "width", "height", "depth", "text", "color", "bkgrd",
                "textcolor", "shape",
            ],
            VisualKind::Circle => &["name", "x", "y", "radius", "color", "bkgrd"],
            VisualKind::Text => &["name", "x", "y", "color", "text"],
            VisualKind::Line => &["name", "x1", "y1", "x2", "y2", "color"],
            VisualKind::Image => &["name", "x", "y", "path"],
            VisualKind::ChangeParam => &["name", "param", "value"],
            VisualKind::MoveRelative => &["name", "dx", "dy"],
        }
    }

    pub fn param_position(&self, param: &str) -> Option<usize> {
        self.param_names().iter().position(|p| *p == param)
    }

    /// Coordinate pairs shifted by `moveRelative`.
    pub fn xy_positions(&self) -> &'static [(usize, usize)] {
        match self {
            VisualKind::Line => &[(1, 2), (3, 4)],
            VisualKind::ChangeParam | VisualKind::MoveRelative => &[],
            _ => &[(1, 2)],
        }
    }
}

impl fmt::Display for VisualKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// One formal parameter of a visual template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamExpr {
    Const(Term),
    /// `valueOf(X)`: the value of head argument `X`.
    ValueOf(String),
    /// `<prefix>valueOf(X)`: name concatenation, e.g. `nodevalueOf(V)`.
    NameConcat { prefix: String, arg: String },
    /// Arithmetic over constants and `valueOf` references.
    PrologValue(Term),
    Random,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisualTemplate {
    pub kind: VisualKind,
    pub params: Vec<ParamExpr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphicalObject {
    pub kind: VisualKind,
    pub name: String,
    pub actuals: Vec<Term>,
    pub id: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphicalAction {
    pub kind: VisualKind,
    pub actuals: Vec<Term>,
}

impl GraphicalAction {
    pub fn target_name(&self) -> String {
        self.actuals[0].to_string()
    }
}

/// An evaluated template: either something to draw or an action to apply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Visual {
    Object { kind: VisualKind, actuals: Vec<Term> },
    Action(GraphicalAction),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphicsError {
    #[error("annotation argument unbound: {0}")]
    UnboundArgument(String),
    #[error("{kind} takes {expected} parameters, got {got}")]
    ArityMismatch { kind: VisualKind, expected: usize, got: usize },
    #[error("annotation arithmetic failed: {0}")]
    Arith(#[from] crate::term::TermError),
}

/// Evaluate a template into an object or action. `lookup` resolves a head
/// argument name to its (ground) matched value; `rng` feeds `random`
/// parameters, range 0..999.
pub fn output_graphical_object<R: Rng>(
    template: &VisualTemplate,
    lookup: &dyn Fn(&str) -> Option<Term>,
    rng: &mut R,
) -> Result<Visual, GraphicsError> {
    if template.params.len() != template.kind.arity() {
        return Err(GraphicsError::ArityMismatch {
            kind: template.kind,
            expected: template.kind.arity(),
            got: template.params.len(),
        });
    }
    let mut actuals = Vec::with_capacity(template.params.len());
    for param in &template.params {
        actuals.push(eval_param(param, lookup, rng)?);
    }
    if template.kind.is_action() {
        Ok(Visual::Action(GraphicalAction { kind: template.kind, actuals }))
    } else {
        Ok(Visual::Object { kind: template.kind, actuals })
    }
}

fn eval_param<R: Rng>(
    param: &ParamExpr,
    lookup: &dyn Fn(&str) -> Option<Term>,
    rng: &mut R,
) -> Result<Term, GraphicsError> {
    match param {
        ParamExpr::Const(t) => Ok(t.clone()),
        ParamExpr::ValueOf(arg) => ground_value(arg, lookup),
        ParamExpr::NameConcat { prefix, arg } => {
            let value = ground_value(arg, lookup)?;
            Ok(Term::atom(format!("{prefix}{value}")))
        }
        ParamExpr::PrologValue(expr) => {
            let substituted = substitute_value_of(expr, lookup)?;
            let value = eval_arith(&substituted, &Substitution::new())?;
            Ok(Term::Int(value))
        }
        ParamExpr::Random => Ok(Term::Int(rng.gen_range(0..1000))),
    }
}

fn ground_value(arg: &str, lookup: &dyn Fn(&str) -> Option<Term>) -> Result<Term, GraphicsError> {
    match lookup(arg) {
        Some(value) if value.is_ground() => Ok(value),
        _ => Err(GraphicsError::UnboundArgument(arg.to_string())),
    }
}

fn substitute_value_of(
    expr: &Term,
    lookup: &dyn Fn(&str) -> Option<Term>,
) -> Result<Term, GraphicsError> {
    match expr {
        Term::Compound(functor, args) if functor == "valueOf" && args.len() == 1 => {
            if let Term::Var { name, .. } = &args[0] {
                ground_value(name, lookup)
            } else {
                Err(GraphicsError::UnboundArgument(args[0].to_string()))
            }
        }
        Term::Compound(functor, args) => {
            let mapped: Result<Vec<Term>, GraphicsError> =
                args.iter().map(|a| substitute_value_of(a, lookup)).collect();
            Ok(Term::Compound(functor.clone(), mapped?))
        }
        other => Ok(other.clone()),
    }
}

/// The graphical store: alive objects in draw order, names unique.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphicalStore {
    objects: Vec<GraphicalObject>,
}

impl GraphicalStore {
    pub fn new() -> GraphicalStore {
        GraphicalStore::default()
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn objects(&self) -> &[GraphicalObject] {
        &self.objects
    }

    pub fn by_name(&self, name: &str) -> Option<&GraphicalObject> {
        self.objects.iter().find(|o| o.name == name)
    }

    /// Draw a new object. A name collision replaces the older object; its
    /// retired id is returned.
    pub fn draw(&self, kind: VisualKind, actuals: Vec<Term>, id: u64) -> (GraphicalStore, Option<u64>) {
        let name = actuals[0].to_string();
        let mut objects = self.objects.clone();
        let replaced =
            objects.iter().position(|o| o.name == name).map(|pos| objects.remove(pos).id);
        objects.push(GraphicalObject { kind, name, actuals, id });
        (GraphicalStore { objects }, replaced)
    }

    /// Apply a `changeParam` or `moveRelative` action. Actions naming an
    /// absent object are a no-op plus warning; object count is preserved.
    pub fn apply_action(&self, action: &GraphicalAction) -> (GraphicalStore, Option<String>) {
        let target = action.target_name();
        let pos = match self.objects.iter().position(|o| o.name == target) {
            Some(pos) => pos,
            None => {
                return (
                    self.clone(),
                    Some(format!("{} on absent object `{target}`", action.kind)),
                );
            }
        };
        let mut objects = self.objects.clone();
        let obj = &mut objects[pos];
        let warning = match action.kind {
            VisualKind::ChangeParam => {
                let param = action.actuals[1].to_string();
                match obj.kind.param_position(&param) {
                    Some(0) => Some(format!("changeParam cannot rename `{target}`")),
                    Some(slot) => {
                        obj.actuals[slot] = action.actuals[2].clone();
                        None
                    }
                    None => Some(format!(
                        "changeParam: `{}` has no parameter `{param}`",
                        obj.kind
                    )),
                }
            }
            VisualKind::MoveRelative => {
                let dx = int_actual(&action.actuals[1]);
                let dy = int_actual(&action.actuals[2]);
                match (dx, dy) {
                    (Some(dx), Some(dy)) => {
                        let mut bad_slot = false;
                        for &(x, y) in obj.kind.xy_positions() {
                            match (&obj.actuals[x], &obj.actuals[y]) {
                                (Term::Int(ox), Term::Int(oy)) => {
                                    let (nx, ny) = (ox + dx, oy + dy);
                                    obj.actuals[x] = Term::Int(nx);
                                    obj.actuals[y] = Term::Int(ny);
                                }
                                _ => bad_slot = true,
                            }
                        }
                        bad_slot
                            .then(|| format!("moveRelative on non-numeric coordinates of `{target}`"))
                    }
                    _ => Some(format!("moveRelative with non-integer displacement on `{target}`")),
                }
            }
            other => Some(format!("`{other}` is not a graphical action")),
        };
        (GraphicalStore { objects }, warning)
    }

    pub fn remove_ids(&self, ids: &BTreeSet<u64>) -> GraphicalStore {
        GraphicalStore {
            objects: self
                .objects
                .iter()
                .filter(|o| !ids.contains(&o.id))
                .cloned()
                .collect(),
        }
    }
}

fn int_actual(term: &Term) -> Option<i64> {
    match term {
        Term::Int(n) => Some(*n),
        _ => None,
    }
}

/// History of fired annotation rules keyed by (rule name, head id list),
/// each carrying the object ids the firing produced.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnnHistory {
    entries: BTreeMap<(String, Vec<u64>), BTreeSet<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnHistoryEntry {
    pub rule_name: String,
    pub head_ids: Vec<u64>,
    pub object_ids: BTreeSet<u64>,
}

impl AnnHistory {
    pub fn new() -> AnnHistory {
        AnnHistory::default()
    }

    /// Order-sensitive key lookup.
    pub fn contains(&self, rule: &str, head_ids: &[u64]) -> bool {
        self.entries.contains_key(&(rule.to_string(), head_ids.to_vec()))
    }

    /// Record a firing with an empty object set (Apply_Annotation time).
    pub fn record_fired(&self, rule: &str, head_ids: &[u64]) -> AnnHistory {
        let mut entries = self.entries.clone();
        entries
            .entry((rule.to_string(), head_ids.to_vec()))
            .or_default();
        AnnHistory { entries }
    }

    /// Attach a drawn object id to an existing entry.
    pub fn add_object(&self, rule: &str, head_ids: &[u64], obj_id: u64) -> Result<AnnHistory, String> {
        let key = (rule.to_string(), head_ids.to_vec());
        let mut entries = self.entries.clone();
        match entries.get_mut(&key) {
            Some(set) => {
                set.insert(obj_id);
                Ok(AnnHistory { entries })
            }
            None => Err(format!(
                "annotation history has no entry for ({rule}, {head_ids:?})"
            )),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = AnnHistoryEntry> + '_ {
        self.entries.iter().map(|((rule, heads), objs)| AnnHistoryEntry {
            rule_name: rule.clone(),
            head_ids: heads.clone(),
            object_ids: objs.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Drop every object drawn by a history entry whose heads intersect the
/// removed constraint ids.
pub fn remove_gr_obj(
    gr: &GraphicalStore,
    removed_head_ids: &BTreeSet<u64>,
    h_ann: &AnnHistory,
) -> GraphicalStore {
    let mut doomed = BTreeSet::new();
    for entry in h_ann.entries() {
        if entry.head_ids.iter().any(|id| removed_head_ids.contains(id)) {
            doomed.extend(entry.object_ids.iter().copied());
        }
    }
    gr.remove_ids(&doomed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn node_template() -> VisualTemplate {
        // node(valueOf(Value), valueOf(Index)*12+2, 50, 10, valueOf(Value)*5,
        //      1, valueOf(Value), black, green, black, RECT)
        let x_expr = Term::compound(
            "+",
            vec![
                Term::compound(
                    "*",
                    vec![Term::compound("valueOf", vec![Term::var("Index", 0)]), Term::Int(12)],
                ),
                Term::Int(2),
            ],
        );
        let h_expr = Term::compound(
            "*",
            vec![Term::compound("valueOf", vec![Term::var("Value", 1)]), Term::Int(5)],
        );
        VisualTemplate {
            kind: VisualKind::Node,
            params: vec![
                ParamExpr::ValueOf("Value".into()),
                ParamExpr::PrologValue(x_expr),
                ParamExpr::Const(Term::Int(50)),
                ParamExpr::Const(Term::Int(10)),
                ParamExpr::PrologValue(h_expr),
                ParamExpr::Const(Term::Int(1)),
                ParamExpr::ValueOf("Value".into()),
                ParamExpr::Const(Term::atom("black")),
                ParamExpr::Const(Term::atom("green")),
                ParamExpr::Const(Term::atom("black")),
                ParamExpr::Const(Term::atom("RECT")),
            ],
        }
    }

    fn cell_lookup(index: i64, value: i64) -> impl Fn(&str) -> Option<Term> {
        move |name: &str| match name {
            "Index" => Some(Term::Int(index)),
            "Value" => Some(Term::Int(value)),
            _ => None,
        }
    }

    #[test]
    fn node_for_cell_0_7() {
        // Hand-evaluated from the template: x = 0*12+2, height = 7*5.
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let visual =
            output_graphical_object(&node_template(), &cell_lookup(0, 7), &mut rng).unwrap();
        match visual {
            Visual::Object { kind, actuals } => {
                assert_eq!(kind, VisualKind::Node);
                assert_eq!(
                    actuals,
                    vec![
                        Term::Int(7),
                        Term::Int(2),
                        Term::Int(50),
                        Term::Int(10),
                        Term::Int(35),
                        Term::Int(1),
                        Term::Int(7),
                        Term::atom("black"),
                        Term::atom("green"),
                        Term::atom("black"),
                        Term::atom("RECT"),
                    ]
                );
            }
            other => panic!("expected object, got {other:?}"),
        }
    }

    #[test]
    fn action_without_value_of_passes_through() {
        let template = VisualTemplate {
            kind: VisualKind::ChangeParam,
            params: vec![
                ParamExpr::Const(Term::atom("node7")),
                ParamExpr::Const(Term::atom("bkgrd")),
                ParamExpr::Const(Term::atom("pink")),
            ],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let visual = output_graphical_object(&template, &|_| None, &mut rng).unwrap();
        match visual {
            Visual::Action(action) => {
                assert_eq!(action.kind, VisualKind::ChangeParam);
                assert_eq!(
                    action.actuals,
                    vec![Term::atom("node7"), Term::atom("bkgrd"), Term::atom("pink")]
                );
            }
            other => panic!("expected action, got {other:?}"),
        }
    }

    #[test]
    fn random_stream_is_reproducible() {
        // Oracle: a reference run of the same seeded generator.
        let template = VisualTemplate {
            kind: VisualKind::Circle,
            params: vec![
                ParamExpr::Const(Term::atom("c")),
                ParamExpr::Random,
                ParamExpr::Random,
                ParamExpr::Const(Term::Int(5)),
                ParamExpr::Const(Term::atom("black")),
                ParamExpr::Const(Term::atom("blue")),
            ],
        };
        let mut reference = ChaCha8Rng::seed_from_u64(42);
        let expected: Vec<i64> = (0..2).map(|_| reference.gen_range(0..1000)).collect();

        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let first = output_graphical_object(&template, &|_| None, &mut rng).unwrap();
        match &first {
            Visual::Object { actuals, .. } => {
                assert_eq!(actuals[1], Term::Int(expected[0]));
                assert_eq!(actuals[2], Term::Int(expected[1]));
            }
            other => panic!("expected object, got {other:?}"),
        }
        let mut rng_again = ChaCha8Rng::seed_from_u64(42);
        let second = output_graphical_object(&template, &|_| None, &mut rng_again).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn unbound_value_of_is_an_error() {
        let template = VisualTemplate {
            kind: VisualKind::Text,
            params: vec![
                ParamExpr::ValueOf("X".into()),
                ParamExpr::Const(Term::Int(0)),
                ParamExpr::Const(Term::Int(0)),
                ParamExpr::Const(Term::atom("black")),
                ParamExpr::ValueOf("X".into()),
            ],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let lookup = |name: &str| match name {
            "X" => Some(Term::var("Y", 9)),
            _ => None,
        };
        assert_eq!(
            output_graphical_object(&template, &lookup, &mut rng),
            Err(GraphicsError::UnboundArgument("X".into()))
        );
    }

    fn store_with_node7() -> GraphicalStore {
        let store = GraphicalStore::new();
        let (store, replaced) = store.draw(
            VisualKind::Node,
            vec![
                Term::Int(7),
                Term::Int(2),
                Term::Int(50),
                Term::Int(10),
                Term::Int(35),
                Term::Int(1),
                Term::Int(7),
                Term::atom("black"),
                Term::atom("green"),
                Term::atom("black"),
                Term::atom("RECT"),
            ],
            10,
        );
        assert!(replaced.is_none());
        store
    }

    #[test]
    fn change_param_rewrites_named_parameter() {
        let store = store_with_node7();
        let action = GraphicalAction {
            kind: VisualKind::ChangeParam,
            actuals: vec![Term::Int(7), Term::atom("bkgrd"), Term::atom("pink")],
        };
        let (updated, warning) = store.apply_action(&action);
        assert!(warning.is_none());
        assert_eq!(updated.by_name("7").unwrap().actuals[8], Term::atom("pink"));
        assert_eq!(updated.len(), store.len());
    }

    #[test]
    fn move_relative_shifts_coordinates() {
        let store = store_with_node7();
        let action = GraphicalAction {
            kind: VisualKind::MoveRelative,
            actuals: vec![Term::Int(7), Term::Int(12), Term::Int(0)],
        };
        let (updated, warning) = store.apply_action(&action);
        assert!(warning.is_none());
        assert_eq!(updated.by_name("7").unwrap().actuals[1], Term::Int(14));
    }

    #[test]
    fn absent_name_is_a_warned_noop() {
        let store = store_with_node7();
        let action = GraphicalAction {
            kind: VisualKind::ChangeParam,
            actuals: vec![Term::atom("ghost"), Term::atom("bkgrd"), Term::atom("red")],
        };
        let (updated, warning) = store.apply_action(&action);
        assert!(warning.is_some());
        assert_eq!(updated, store);
    }

    #[test]
    fn draw_name_collision_replaces_older() {
        let store = store_with_node7();
        let (store, replaced) = store.draw(
            VisualKind::Node,
            vec![
                Term::Int(7),
                Term::Int(14),
                Term::Int(50),
                Term::Int(10),
                Term::Int(35),
                Term::Int(1),
                Term::Int(7),
                Term::atom("black"),
                Term::atom("green"),
                Term::atom("black"),
                Term::atom("RECT"),
            ],
            11,
        );
        assert_eq!(replaced, Some(10));
        assert_eq!(store.len(), 1);
        assert_eq!(store.by_name("7").unwrap().id, 11);
    }

    /// Oracle for removal: replay the history and set-subtract by hand.
    fn removal_oracle(
        gr: &GraphicalStore,
        removed: &BTreeSet<u64>,
        h_ann: &AnnHistory,
    ) -> Vec<u64> {
        let mut doomed: BTreeSet<u64> = BTreeSet::new();
        for entry in h_ann.entries() {
            for head in &entry.head_ids {
                if removed.contains(head) {
                    doomed.extend(entry.object_ids.iter().copied());
                }
            }
        }
        gr.objects()
            .iter()
            .map(|o| o.id)
            .filter(|id| !doomed.contains(id))
            .collect()
    }

    #[test]
    fn remove_gr_obj_follows_history() {
        let store = store_with_node7(); // object id 10
        let h_ann = AnnHistory::new()
            .record_fired("ann", &[1])
            .add_object("ann", &[1], 10)
            .unwrap();
        let removed: BTreeSet<u64> = [1].into_iter().collect();
        let survivors = remove_gr_obj(&store, &removed, &h_ann);
        let expected = removal_oracle(&store, &removed, &h_ann);
        assert_eq!(
            survivors.objects().iter().map(|o| o.id).collect::<Vec<_>>(),
            expected
        );
        assert!(survivors.is_empty());
    }

    #[test]
    fn remove_gr_obj_disjoint_heads_is_identity() {
        let store = store_with_node7();
        let h_ann = AnnHistory::new()
            .record_fired("ann", &[1])
            .add_object("ann", &[1], 10)
            .unwrap();
        let removed: BTreeSet<u64> = [99].into_iter().collect();
        assert_eq!(remove_gr_obj(&store, &removed, &h_ann), store);
    }

    #[test]
    fn remove_gr_obj_shared_object_two_entries() {
        let store = store_with_node7();
        let h_ann = AnnHistory::new()
            .record_fired("a", &[1])
            .add_object("a", &[1], 10)
            .unwrap()
            .record_fired("b", &[2])
            .add_object("b", &[2], 10)
            .unwrap();
        let removed: BTreeSet<u64> = [2].into_iter().collect();
        let survivors = remove_gr_obj(&store, &removed, &h_ann);
        let expected = removal_oracle(&store, &removed, &h_ann);
        assert_eq!(
            survivors.objects().iter().map(|o| o.id).collect::<Vec<_>>(),
            expected
        );
        assert!(survivors.is_empty());
    }

    #[test]
    fn ann_history_object_accumulation() {
        let h = AnnHistory::new().record_fired("r", &[1]);
        let h = h.add_object("r", &[1], 5).unwrap();
        let h = h.add_object("r", &[1], 6).unwrap();
        let h2 = h.add_object("r", &[1], 5).unwrap(); // idempotent
        assert_eq!(h, h2);
        let entry = h.entries().next().unwrap();
        assert_eq!(entry.object_ids, [5, 6].into_iter().collect());
        assert!(h.add_object("missing", &[1], 7).is_err());
    }

    #[test]
    fn contains_is_order_sensitive() {
        // Oracle: the key is the literal tuple, so [2,1] != [1,2].
        let h = AnnHistory::new().record_fired("r", &[1, 2]);
        assert!(h.contains("r", &[1, 2]));
        assert!(!h.contains("r", &[2, 1]));
        assert!(!AnnHistory::new().contains("r", &[1]));
    }
}
