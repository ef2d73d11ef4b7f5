//! Terms, substitutions and the built-in constraint theory.
//!
//! Everything the rule engine manipulates is a [`Term`]: variables carry a
//! display name plus a globally unique id so that rule variables can be
//! renamed apart from the running state. The built-in theory is deliberately
//! small — equality plus integer comparison and arithmetic — which covers
//! every guard and annotation condition the runtime supports.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Functor/arity pair identifying a constraint symbol.
pub type Functor = (String, usize);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    /// A logic variable: display name plus a unique id for renaming apart.
    Var { name: String, id: u64 },
    Int(i64),
    Atom(String),
    /// Compound term with arity >= 1.
    Compound(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>, id: u64) -> Term {
        Term::Var { name: name.into(), id }
    }

    pub fn atom(name: impl Into<String>) -> Term {
        Term::Atom(name.into())
    }

    pub fn compound(functor: impl Into<String>, args: Vec<Term>) -> Term {
        let functor = functor.into();
        debug_assert!(!args.is_empty(), "compound terms have arity >= 1");
        Term::Compound(functor, args)
    }

    /// Functor/arity of an atom or compound; variables and ints have none.
    pub fn functor(&self) -> Option<Functor> {
        match self {
            Term::Atom(name) => Some((name.clone(), 0)),
            Term::Compound(name, args) => Some((name.clone(), args.len())),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Compound(_, args) => args,
            _ => &[],
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var { .. } => false,
            Term::Int(_) | Term::Atom(_) => true,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Collect the ids of all variables occurring in the term, in order.
    pub fn collect_vars(&self, out: &mut Vec<u64>) {
        match self {
            Term::Var { id, .. } => {
                if !out.contains(id) {
                    out.push(*id);
                }
            }
            Term::Compound(_, args) => {
                for arg in args {
                    arg.collect_vars(out);
                }
            }
            _ => {}
        }
    }

    pub fn vars(&self) -> Vec<u64> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn occurs(&self, var: u64, subst: &Substitution) -> bool {
        match self {
            Term::Var { id, .. } => {
                if *id == var {
                    return true;
                }
                match subst.lookup(*id) {
                    Some(bound) => bound.clone().occurs(var, subst),
                    None => false,
                }
            }
            Term::Compound(_, args) => args.iter().any(|a| a.occurs(var, subst)),
            _ => false,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var { name, .. } => write!(f, "{name}"),
            Term::Int(n) => write!(f, "{n}"),
            Term::Atom(name) => write!(f, "{name}"),
            Term::Compound(name, args) => {
                write!(f, "{name}(")?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{arg}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// An idempotent variable binding map. The occurs check is enforced on every
/// insertion, so no binding ever maps a variable to a term containing itself.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Substitution {
    bindings: BTreeMap<u64, Term>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn lookup(&self, var: u64) -> Option<&Term> {
        self.bindings.get(&var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&u64, &Term)> {
        self.bindings.iter()
    }

    /// Follow variable chains until a non-variable or an unbound variable.
    pub fn walk<'a>(&'a self, term: &'a Term) -> &'a Term {
        let mut current = term;
        loop {
            match current {
                Term::Var { id, .. } => match self.bindings.get(id) {
                    Some(next) => current = next,
                    None => return current,
                },
                _ => return current,
            }
        }
    }

    /// Apply the substitution everywhere in a term.
    pub fn apply(&self, term: &Term) -> Term {
        let walked = self.walk(term);
        match walked {
            Term::Compound(name, args) => {
                Term::Compound(name.clone(), args.iter().map(|a| self.apply(a)).collect())
            }
            other => other.clone(),
        }
    }

    /// Bind `var` to `term`, refusing cycles. Returns false on occurs-check
    /// violation.
    pub fn bind(&mut self, var: u64, term: &Term) -> bool {
        let resolved = self.apply(term);
        if let Term::Var { id, .. } = &resolved {
            if *id == var {
                return true; // X = X
            }
        }
        if resolved.occurs(var, self) {
            return false;
        }
        self.bindings.insert(var, resolved);
        self.normalize();
        true
    }

    /// Re-resolve every binding so that no chains v1 -> v2 -> t remain.
    fn normalize(&mut self) {
        let keys: Vec<u64> = self.bindings.keys().copied().collect();
        for key in keys {
            let value = self.bindings[&key].clone();
            let resolved = self.apply(&value);
            self.bindings.insert(key, resolved);
        }
    }
}

/// The built-in store: bindings accumulated by `=` goals, a failure flag and
/// the global status flag used by transformed programs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuiltinStore {
    pub bindings: Substitution,
    pub failed: bool,
    pub status: bool,
}

impl BuiltinStore {
    pub fn new() -> BuiltinStore {
        BuiltinStore::default()
    }

    pub fn resolve(&self, term: &Term) -> Term {
        self.bindings.apply(term)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("non-ground arithmetic: {0}")]
    NonGroundArith(String),
    #[error("division by zero in {0}")]
    DivisionByZero(String),
    #[error("unsupported arithmetic operator: {0}")]
    UnsupportedArith(String),
    #[error("unsupported built-in: {0}/{1}")]
    UnsupportedBuiltin(String, usize),
}

/// One-way matching: variables of `pattern` may be bound, variables of
/// `target` never are. Bindings extend `subst` in place; on failure the
/// substitution is left in an unspecified state (callers discard it).
pub fn match_term(pattern: &Term, target: &Term, subst: &mut Substitution) -> bool {
    let p = subst.walk(pattern).clone();
    let t = subst.walk(target).clone();
    match (&p, &t) {
        (Term::Var { id, .. }, _) => {
            if let Term::Var { id: tid, .. } = &t {
                if tid == id {
                    return true;
                }
            }
            subst.bind(*id, &t)
        }
        (Term::Int(a), Term::Int(b)) => a == b,
        (Term::Atom(a), Term::Atom(b)) => a == b,
        (Term::Compound(f, args_p), Term::Compound(g, args_t)) => {
            f == g
                && args_p.len() == args_t.len()
                && args_p
                    .iter()
                    .zip(args_t)
                    .all(|(a, b)| match_term(a, b, subst))
        }
        _ => false,
    }
}

/// Full unification of two terms against a built-in store. Occurs-check
/// violations and clashes set the failed flag rather than raising.
pub fn unify(a: &Term, b: &Term, store: &BuiltinStore) -> BuiltinStore {
    let mut out = store.clone();
    if out.failed {
        return out;
    }
    if !unify_into(a, b, &mut out.bindings) {
        out.failed = true;
    }
    out
}

fn unify_into(a: &Term, b: &Term, subst: &mut Substitution) -> bool {
    let ra = subst.walk(a).clone();
    let rb = subst.walk(b).clone();
    match (&ra, &rb) {
        (Term::Var { id: ia, .. }, Term::Var { id: ib, .. }) if ia == ib => true,
        (Term::Var { id, .. }, _) => subst.bind(*id, &rb),
        (_, Term::Var { id, .. }) => subst.bind(*id, &ra),
        (Term::Int(x), Term::Int(y)) => x == y,
        (Term::Atom(x), Term::Atom(y)) => x == y,
        (Term::Compound(f, xs), Term::Compound(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| unify_into(x, y, subst))
        }
        _ => false,
    }
}

/// Integer evaluation of an arithmetic expression. Division truncates toward
/// zero. `valueOf(..)` leaves must have been substituted away by the caller.
pub fn eval_arith(expr: &Term, under: &Substitution) -> Result<i64, TermError> {
    let resolved = under.walk(expr).clone();
    match &resolved {
        Term::Int(n) => Ok(*n),
        Term::Var { name, .. } => Err(TermError::NonGroundArith(name.clone())),
        Term::Atom(name) => Err(TermError::UnsupportedArith(name.clone())),
        Term::Compound(op, args) => match (op.as_str(), args.len()) {
            ("+", 2) => Ok(eval_arith(&args[0], under)?.wrapping_add(eval_arith(&args[1], under)?)),
            ("-", 2) => Ok(eval_arith(&args[0], under)?.wrapping_sub(eval_arith(&args[1], under)?)),
            ("*", 2) => Ok(eval_arith(&args[0], under)?.wrapping_mul(eval_arith(&args[1], under)?)),
            ("/", 2) => {
                let num = eval_arith(&args[0], under)?;
                let den = eval_arith(&args[1], under)?;
                if den == 0 {
                    Err(TermError::DivisionByZero(expr.to_string()))
                } else {
                    Ok(num.wrapping_div(den))
                }
            }
            ("-", 1) => Ok(eval_arith(&args[0], under)?.wrapping_neg()),
            _ => Err(TermError::UnsupportedArith(format!("{op}/{}", args.len()))),
        },
    }
}

/// Built-in functors the engine recognises in guards and bodies.
pub fn is_builtin(functor: &str, arity: usize) -> bool {
    matches!(
        (functor, arity),
        ("true", 0)
            | ("fail", 0)
            | ("=", 2)
            | ("<", 2)
            | (">", 2)
            | ("=<", 2)
            | (">=", 2)
            | ("==", 2)
            | ("\\==", 2)
            | ("set", 2)
            | ("check", 2)
            | ("communicate_constraint", 1)
    )
}

pub fn is_builtin_term(term: &Term) -> bool {
    match term.functor() {
        Some((name, arity)) => is_builtin(&name, arity),
        None => false,
    }
}

/// Decidable guard entailment: every guard atom must be ground after applying
/// `under` plus the store bindings, and must hold. Comparisons over non-ground
/// terms are not entailed. Unknown guard symbols are a diagnostic error.
pub fn entails_guard(
    store: &BuiltinStore,
    guard: &[Term],
    under: &Substitution,
) -> Result<bool, TermError> {
    for atom in guard {
        if !entails_one(store, atom, under)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn entails_one(store: &BuiltinStore, atom: &Term, under: &Substitution) -> Result<bool, TermError> {
    let resolved = store.resolve(&under.apply(atom));
    let (name, arity) = match resolved.functor() {
        Some(f) => f,
        None => return Err(TermError::UnsupportedBuiltin(resolved.to_string(), 0)),
    };
    match (name.as_str(), arity) {
        ("true", 0) => Ok(true),
        ("fail", 0) => Ok(false),
        ("=", 2) | ("==", 2) => Ok(resolved.args()[0] == resolved.args()[1]),
        ("\\==", 2) => {
            let lhs = &resolved.args()[0];
            let rhs = &resolved.args()[1];
            Ok(lhs.is_ground() && rhs.is_ground() && lhs != rhs)
        }
        ("<", 2) | (">", 2) | ("=<", 2) | (">=", 2) => {
            let lhs = eval_arith(&resolved.args()[0], under);
            let rhs = eval_arith(&resolved.args()[1], under);
            match (lhs, rhs) {
                (Ok(a), Ok(b)) => Ok(match name.as_str() {
                    "<" => a < b,
                    ">" => a > b,
                    "=<" => a <= b,
                    _ => a >= b,
                }),
                // Non-ground or non-numeric comparison: not entailed.
                _ => Ok(false),
            }
        }
        ("check", 2) => {
            let target = &resolved.args()[0];
            let expected = &resolved.args()[1];
            if target != &Term::atom("status") {
                return Err(TermError::UnsupportedBuiltin(format!("check on {target}"), 2));
            }
            match expected {
                Term::Atom(b) if b == "true" => Ok(store.status),
                Term::Atom(b) if b == "false" => Ok(!store.status),
                _ => Ok(false),
            }
        }
        _ if is_builtin(&name, arity) => Err(TermError::UnsupportedBuiltin(name, arity)),
        _ => Err(TermError::UnsupportedBuiltin(name, arity)),
    }
}
