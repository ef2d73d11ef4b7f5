//! Recursive-descent parser for programs and queries.

use std::collections::BTreeMap;

use super::lexer::{lex, Spanned, Tok};
use super::{
    ChrRule, ConstraintAnnotationRule, OccurrenceTable, Program, RuleAnnotationRule, SyntaxError,
    AUX_PREFIX,
};
use crate::graphics::{ParamExpr, VisualKind, VisualTemplate};
use crate::term::{is_builtin, Functor, Term};

pub fn parse_program(source: &str) -> Result<Program, SyntaxError> {
    let tokens = lex(source)?;
    let mut parser = Parser::new(tokens);
    parser.program()
}

/// Comma-separated constraint terms; one variable scope for the whole query.
pub fn parse_query(source: &str) -> Result<Vec<Term>, SyntaxError> {
    let tokens = lex(source)?;
    if tokens.is_empty() {
        return Ok(Vec::new());
    }
    let mut parser = Parser::new(tokens);
    let mut scope = BTreeMap::new();
    let mut terms = vec![parser.expr(&mut scope)?];
    while parser.eat(&Tok::Comma) {
        terms.push(parser.expr(&mut scope)?);
    }
    parser.eat(&Tok::Dot);
    if !parser.at_end() {
        let (line, col) = parser.here();
        return Err(SyntaxError::at(line, col, "trailing input after query"));
    }
    Ok(terms)
}

struct RawAnnotation {
    name: Option<String>,
    heads: Vec<Term>,
    condition: Vec<Term>,
    rhs: Term,
    simplify: bool,
    line: usize,
    col: usize,
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    var_supply: u64,
}

impl Parser {
    fn new(tokens: Vec<Spanned>) -> Parser {
        Parser { tokens, pos: 0, var_supply: 0 }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn here(&self) -> (usize, usize) {
        match self.tokens.get(self.pos).or_else(|| self.tokens.last()) {
            Some(sp) => (sp.line, sp.col),
            None => (1, 1),
        }
    }

    fn err(&self, message: impl Into<String>) -> SyntaxError {
        let (line, col) = self.here();
        SyntaxError::at(line, col, message)
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|s| &s.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.tokens.get(self.pos + 1).map(|s| &s.tok)
    }

    fn next(&mut self) -> Option<Tok> {
        let tok = self.tokens.get(self.pos).map(|s| s.tok.clone());
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), SyntaxError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.err(format!(
                "expected {what}, found `{}`",
                self.peek().map(|t| t.to_string()).unwrap_or_else(|| "end of input".into())
            )))
        }
    }

    fn fresh_var(&mut self) -> u64 {
        let id = self.var_supply;
        self.var_supply += 1;
        id
    }

    // ---- expressions ------------------------------------------------

    fn expr(&mut self, scope: &mut BTreeMap<String, u64>) -> Result<Term, SyntaxError> {
        let lhs = self.additive(scope)?;
        let op = match self.peek() {
            Some(Tok::Eq) => "=",
            Some(Tok::Lt) => "<",
            Some(Tok::Gt) => ">",
            Some(Tok::Le) => "=<",
            Some(Tok::Ge) => ">=",
            Some(Tok::StrictEq) => "==",
            Some(Tok::StrictNeq) => "\\==",
            _ => return Ok(lhs),
        };
        self.pos += 1;
        let rhs = self.additive(scope)?;
        Ok(Term::compound(op, vec![lhs, rhs]))
    }

    fn additive(&mut self, scope: &mut BTreeMap<String, u64>) -> Result<Term, SyntaxError> {
        let mut lhs = self.multiplicative(scope)?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => "+",
                Some(Tok::Minus) => "-",
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.multiplicative(scope)?;
            lhs = Term::compound(op, vec![lhs, rhs]);
        }
    }

    fn multiplicative(&mut self, scope: &mut BTreeMap<String, u64>) -> Result<Term, SyntaxError> {
        let mut lhs = self.unary(scope)?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => "*",
                Some(Tok::Slash) => "/",
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary(scope)?;
            lhs = Term::compound(op, vec![lhs, rhs]);
        }
    }

    fn unary(&mut self, scope: &mut BTreeMap<String, u64>) -> Result<Term, SyntaxError> {
        if self.eat(&Tok::Minus) {
            let operand = self.unary(scope)?;
            return Ok(match operand {
                Term::Int(n) => Term::Int(-n),
                other => Term::compound("-", vec![other]),
            });
        }
        self.primary(scope)
    }

    fn primary(&mut self, scope: &mut BTreeMap<String, u64>) -> Result<Term, SyntaxError> {
        match self.next() {
            Some(Tok::Int(n)) => Ok(Term::Int(n)),
            Some(Tok::Var(name)) => {
                let id = if name == "_" {
                    self.fresh_var()
                } else {
                    match scope.get(&name) {
                        Some(id) => *id,
                        None => {
                            let id = self.fresh_var();
                            scope.insert(name.clone(), id);
                            id
                        }
                    }
                };
                Ok(Term::var(name, id))
            }
            Some(Tok::Atom(name)) => {
                if self.eat(&Tok::LParen) {
                    let mut args = vec![self.expr(scope)?];
                    while self.eat(&Tok::Comma) {
                        args.push(self.expr(scope)?);
                    }
                    self.expect(&Tok::RParen, "`)`")?;
                    Ok(Term::compound(name, args))
                } else {
                    Ok(Term::atom(name))
                }
            }
            Some(Tok::LParen) => {
                let inner = self.expr(scope)?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(inner)
            }
            other => Err(self.err(format!(
                "expected a term, found `{}`",
                other.map(|t| t.to_string()).unwrap_or_else(|| "end of input".into())
            ))),
        }
    }

    fn term_list(&mut self, scope: &mut BTreeMap<String, u64>) -> Result<Vec<Term>, SyntaxError> {
        let mut items = vec![self.expr(scope)?];
        while self.eat(&Tok::Comma) {
            items.push(self.expr(scope)?);
        }
        Ok(items)
    }

    // ---- clauses ----------------------------------------------------

    fn program(&mut self) -> Result<Program, SyntaxError> {
        let mut declarations: Vec<Functor> = Vec::new();
        let mut rules: Vec<ChrRule> = Vec::new();
        let mut raw_annotations: Vec<RawAnnotation> = Vec::new();
        let mut comm_head: Option<bool> = None;
        let mut unnamed_rules = 0usize;

        while !self.at_end() {
            match self.peek() {
                Some(Tok::DirectivePrefix) => self.declaration(&mut declarations)?,
                Some(Tok::Atom(a)) if a == "g" && self.peek2() != Some(&Tok::At) => {
                    let ann = self.annotation_clause()?;
                    raw_annotations.push(ann);
                }
                _ => {
                    let (line, col) = self.here();
                    let rule = self.chr_rule()?;
                    match comm_head_payload(&rule) {
                        Some(flag) => {
                            if comm_head.is_some() {
                                return Err(SyntaxError::at(line, col, "duplicate comm_head rule"));
                            }
                            comm_head = Some(flag);
                        }
                        None => {
                            let rule = if rule.name.is_empty() {
                                unnamed_rules += 1;
                                ChrRule { name: format!("rule_{}", rules.len() + 1), ..rule }
                            } else {
                                rule
                            };
                            let _ = unnamed_rules;
                            rules.push(rule);
                        }
                    }
                }
            }
        }

        if declarations.is_empty() {
            return Err(SyntaxError::at(1, 1, "no constraint declarations"));
        }
        validate_declarations(&declarations)?;
        validate_rules(&rules, &declarations)?;

        let mut constraint_annotations = Vec::new();
        let mut rule_annotations = Vec::new();
        for (ordinal, raw) in raw_annotations.into_iter().enumerate() {
            classify_annotation(
                raw,
                ordinal + 1,
                &rules,
                &declarations,
                &mut constraint_annotations,
                &mut rule_annotations,
            )?;
        }
        validate_annotation_names(&constraint_annotations, &rule_annotations)?;

        let occurrences = OccurrenceTable::build(&rules);
        let mut program = Program {
            declarations,
            rules,
            constraint_annotations,
            rule_annotations,
            comm_head: comm_head.unwrap_or(false),
            occurrences,
            var_supply: self.var_supply,
        };
        renumber_program_vars(&mut program);
        Ok(program)
    }

    fn declaration(&mut self, declarations: &mut Vec<Functor>) -> Result<(), SyntaxError> {
        self.expect(&Tok::DirectivePrefix, "`:-`")?;
        match self.next() {
            Some(Tok::Atom(a)) if a == "chr_constraint" => {}
            _ => return Err(self.err("expected `chr_constraint` after `:-`")),
        }
        loop {
            let name = match self.next() {
                Some(Tok::Atom(name)) => name,
                _ => return Err(self.err("expected constraint name")),
            };
            self.expect(&Tok::Slash, "`/` and an arity")?;
            let arity = match self.next() {
                Some(Tok::Int(n)) if n >= 0 => n as usize,
                _ => return Err(self.err("expected a non-negative arity")),
            };
            declarations.push((name, arity));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(&Tok::Dot, "`.`")
    }

    fn chr_rule(&mut self) -> Result<ChrRule, SyntaxError> {
        let mut scope = BTreeMap::new();
        let name = match (self.peek(), self.peek2()) {
            (Some(Tok::Atom(name)), Some(Tok::At)) => {
                let name = name.clone();
                self.pos += 2;
                name
            }
            _ => String::new(),
        };
        let first = self.term_list(&mut scope)?;
        let (kept, removed) = if self.eat(&Tok::Backslash) {
            let second = self.term_list(&mut scope)?;
            self.expect(&Tok::Simp, "`<=>` after `\\`")?;
            (first, second)
        } else if self.eat(&Tok::Simp) {
            (Vec::new(), first)
        } else if self.eat(&Tok::Prop) {
            (first, Vec::new())
        } else {
            return Err(self.err("expected `<=>`, `==>` or `\\` after rule heads"));
        };
        let items = self.term_list(&mut scope)?;
        let (guard, body) = if self.eat(&Tok::Bar) {
            (items, self.term_list(&mut scope)?)
        } else {
            (Vec::new(), items)
        };
        self.expect(&Tok::Dot, "`.` at end of rule")?;
        Ok(ChrRule { name, kept, removed, guard, body })
    }

    fn annotation_clause(&mut self) -> Result<RawAnnotation, SyntaxError> {
        let (line, col) = self.here();
        self.pos += 1; // consume `g`
        let mut scope = BTreeMap::new();
        let first = self.expr(&mut scope)?;
        let starts_term = matches!(
            self.peek(),
            Some(Tok::Atom(_)) | Some(Tok::Var(_)) | Some(Tok::Int(_)) | Some(Tok::LParen)
        );
        let (name, mut heads) = if starts_term {
            match &first {
                Term::Atom(name) => (Some(name.clone()), vec![self.expr(&mut scope)?]),
                _ => return Err(self.err("annotation rule name must be an atom")),
            }
        } else {
            (None, vec![first])
        };
        while self.eat(&Tok::Comma) {
            heads.push(self.expr(&mut scope)?);
        }
        let simplify = if self.eat(&Tok::Prop) {
            false
        } else if self.eat(&Tok::Simp) {
            true
        } else {
            return Err(self.err("expected `==>` or `<=>` in annotation rule"));
        };
        let items = self.term_list(&mut scope)?;
        let (condition, rhs) = if self.eat(&Tok::Bar) {
            (items, self.expr(&mut scope)?)
        } else {
            if items.len() != 1 {
                return Err(self.err("annotation rule produces a single output"));
            }
            (Vec::new(), items.into_iter().next().unwrap())
        };
        self.expect(&Tok::Dot, "`.` at end of annotation rule")?;
        Ok(RawAnnotation { name, heads, condition, rhs, simplify, line, col })
    }
}

/// Recognise `comm_head(T) ==> T=true.` / `T=false.` regardless of its name.
fn comm_head_payload(rule: &ChrRule) -> Option<bool> {
    if !rule.removed.is_empty() || rule.kept.len() != 1 || !rule.guard.is_empty() {
        return None;
    }
    let var_id = match &rule.kept[0] {
        Term::Compound(f, args) if f == "comm_head" && args.len() == 1 => match &args[0] {
            Term::Var { id, .. } => *id,
            _ => return None,
        },
        _ => return None,
    };
    if rule.body.len() != 1 {
        return None;
    }
    match &rule.body[0] {
        Term::Compound(eq, args) if eq == "=" && args.len() == 2 => match (&args[0], &args[1]) {
            (Term::Var { id, .. }, Term::Atom(value)) if *id == var_id => match value.as_str() {
                "true" => Some(true),
                "false" => Some(false),
                _ => None,
            },
            _ => None,
        },
        _ => None,
    }
}

fn validate_declarations(declarations: &[Functor]) -> Result<(), SyntaxError> {
    for (i, (name, arity)) in declarations.iter().enumerate() {
        if is_builtin(name, *arity) || VisualKind::from_name(name).is_some() {
            return Err(SyntaxError::at(1, 1, format!("cannot declare reserved symbol {name}/{arity}")));
        }
        if declarations[..i].contains(&(name.clone(), *arity)) {
            return Err(SyntaxError::at(1, 1, format!("duplicate declaration of {name}/{arity}")));
        }
    }
    Ok(())
}

fn constraint_functor(term: &Term) -> Result<Functor, String> {
    match term.functor() {
        Some(f) => Ok(f),
        None => Err(format!("`{term}` is not a constraint")),
    }
}

fn validate_rules(rules: &[ChrRule], declarations: &[Functor]) -> Result<(), SyntaxError> {
    let fail = |msg: String| SyntaxError::at(1, 1, msg);
    for (i, rule) in rules.iter().enumerate() {
        if rules[..i].iter().any(|r| r.name == rule.name) {
            return Err(fail(format!("duplicate rule name `{}`", rule.name)));
        }
        for head in rule.kept.iter().chain(&rule.removed) {
            let f = constraint_functor(head).map_err(&fail)?;
            if !declarations.contains(&f) {
                return Err(fail(format!(
                    "undeclared constraint {}/{} in head of `{}`",
                    f.0, f.1, rule.name
                )));
            }
        }
        for g in &rule.guard {
            match g.functor() {
                Some((name, arity)) if is_builtin(&name, arity) => {}
                _ => {
                    return Err(fail(format!(
                        "guard of `{}` contains non-built-in `{g}`",
                        rule.name
                    )))
                }
            }
        }
        for b in &rule.body {
            let f = constraint_functor(b).map_err(&fail)?;
            if !is_builtin(&f.0, f.1) && !declarations.contains(&f) {
                return Err(fail(format!(
                    "undeclared constraint {}/{} in body of `{}`",
                    f.0, f.1, rule.name
                )));
            }
        }
    }
    Ok(())
}

fn classify_annotation(
    raw: RawAnnotation,
    ordinal: usize,
    rules: &[ChrRule],
    declarations: &[Functor],
    constraint_annotations: &mut Vec<ConstraintAnnotationRule>,
    rule_annotations: &mut Vec<RuleAnnotationRule>,
) -> Result<(), SyntaxError> {
    let fail = |msg: String| SyntaxError::at(raw.line, raw.col, msg);

    // A single bare atom naming a CHR rule is a rule annotation.
    let target_rule = match raw.heads.as_slice() {
        [Term::Atom(name)] if rules.iter().any(|r| &r.name == name) => Some(name.clone()),
        _ => None,
    };

    if let Some(target) = target_rule {
        if raw.simplify {
            return Err(fail("rule annotations use `==>`".into()));
        }
        let aux = raw.rhs;
        let aux_f = aux
            .functor()
            .ok_or_else(|| fail(format!("`{aux}` is not an auxiliary constraint")))?;
        if !aux_f.0.starts_with(AUX_PREFIX) {
            return Err(fail(format!(
                "auxiliary constraint `{}` must carry the `{AUX_PREFIX}` prefix",
                aux_f.0
            )));
        }
        if !declarations.contains(&aux_f) {
            return Err(fail(format!("undeclared auxiliary constraint {}/{}", aux_f.0, aux_f.1)));
        }
        let rule = rules.iter().find(|r| r.name == target).unwrap();
        let mut rule_var_names = Vec::new();
        for head in rule.kept.iter().chain(&rule.removed).chain(&rule.guard).chain(&rule.body) {
            collect_var_names(head, &mut rule_var_names);
        }
        let mut used = Vec::new();
        collect_var_names(&aux, &mut used);
        for c in &raw.condition {
            collect_var_names(c, &mut used);
        }
        for name in used {
            if !rule_var_names.contains(&name) {
                return Err(fail(format!(
                    "variable `{name}` does not occur in rule `{target}`"
                )));
            }
        }
        validate_condition(&raw.condition).map_err(&fail)?;
        rule_annotations.push(RuleAnnotationRule {
            name: raw.name.unwrap_or_else(|| format!("rule_ann_{ordinal}")),
            target_rule: target,
            condition: raw.condition,
            aux_constraint: aux,
        });
        return Ok(());
    }

    // Otherwise it is a constraint annotation rule.
    let mut head_vars = Vec::new();
    for head in &raw.heads {
        let f = constraint_functor(head).map_err(&fail)?;
        if !declarations.contains(&f) {
            return Err(fail(format!("undeclared constraint {}/{} in annotation head", f.0, f.1)));
        }
        collect_var_names(head, &mut head_vars);
    }
    validate_condition(&raw.condition).map_err(&fail)?;
    let mut cond_vars = Vec::new();
    for c in &raw.condition {
        collect_var_names(c, &mut cond_vars);
    }
    for name in cond_vars {
        if !head_vars.contains(&name) {
            return Err(fail(format!("condition variable `{name}` not bound by annotation heads")));
        }
    }
    let template = template_from_term(&raw.rhs, &head_vars).map_err(&fail)?;
    constraint_annotations.push(ConstraintAnnotationRule {
        name: raw.name.unwrap_or_else(|| format!("ann_rule_{ordinal}")),
        heads: raw.heads,
        condition: raw.condition,
        template,
        simplify: raw.simplify,
    });
    Ok(())
}

fn validate_condition(condition: &[Term]) -> Result<(), String> {
    for c in condition {
        match c.functor() {
            Some((name, arity)) if is_builtin(&name, arity) => {}
            _ => return Err(format!("annotation condition `{c}` is not a built-in")),
        }
    }
    Ok(())
}

fn validate_annotation_names(
    constraint_annotations: &[ConstraintAnnotationRule],
    rule_annotations: &[RuleAnnotationRule],
) -> Result<(), SyntaxError> {
    let mut seen: Vec<&str> = Vec::new();
    for name in constraint_annotations
        .iter()
        .map(|a| a.name.as_str())
        .chain(rule_annotations.iter().map(|a| a.name.as_str()))
    {
        if seen.contains(&name) {
            return Err(SyntaxError::at(1, 1, format!("duplicate annotation rule name `{name}`")));
        }
        seen.push(name);
    }
    Ok(())
}

fn collect_var_names(term: &Term, out: &mut Vec<String>) {
    match term {
        Term::Var { name, .. } => {
            if name != "_" && !out.contains(name) {
                out.push(name.clone());
            }
        }
        Term::Compound(_, args) => {
            for arg in args {
                collect_var_names(arg, out);
            }
        }
        _ => {}
    }
}

/// Convert an annotation-rule output term into a visual template. `valueOf`
/// references must name head arguments; all-uppercase identifiers (RECT,
/// CIRC) are symbolic constants.
fn template_from_term(term: &Term, head_vars: &[String]) -> Result<VisualTemplate, String> {
    let (functor, args) = match term {
        Term::Compound(f, args) => (f.clone(), args.clone()),
        _ => return Err(format!("`{term}` is not a visual template")),
    };
    let kind = VisualKind::from_name(&functor)
        .ok_or_else(|| format!("unknown visual template `{functor}`"))?;
    if args.len() != kind.arity() {
        return Err(format!(
            "`{functor}` takes {} parameters, got {}",
            kind.arity(),
            args.len()
        ));
    }
    let params: Result<Vec<ParamExpr>, String> =
        args.iter().map(|a| param_from_term(a, head_vars)).collect();
    Ok(VisualTemplate { kind, params: params? })
}

fn param_from_term(term: &Term, head_vars: &[String]) -> Result<ParamExpr, String> {
    match term {
        Term::Int(_) => Ok(ParamExpr::Const(term.clone())),
        Term::Atom(name) if name == "random" => Ok(ParamExpr::Random),
        Term::Atom(_) => Ok(ParamExpr::Const(term.clone())),
        Term::Var { name, .. } => {
            if name.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit()) {
                // Symbolic constant such as RECT.
                Ok(ParamExpr::Const(Term::atom(name.clone())))
            } else {
                Err(format!("parameter references `{name}` directly; use valueOf({name})"))
            }
        }
        Term::Compound(f, args) if f == "valueOf" && args.len() == 1 => {
            let name = value_of_target(args, head_vars)?;
            Ok(ParamExpr::ValueOf(name))
        }
        Term::Compound(f, args)
            if f.ends_with("valueOf") && f.len() > "valueOf".len() && args.len() == 1 =>
        {
            let name = value_of_target(args, head_vars)?;
            let prefix = f[..f.len() - "valueOf".len()].to_string();
            Ok(ParamExpr::NameConcat { prefix, arg: name })
        }
        Term::Compound(f, args) if f == "prologValue" && args.len() == 1 => {
            validate_arith_param(&args[0], head_vars)?;
            Ok(ParamExpr::PrologValue(args[0].clone()))
        }
        Term::Compound(f, _) if matches!(f.as_str(), "+" | "-" | "*" | "/") => {
            validate_arith_param(term, head_vars)?;
            Ok(ParamExpr::PrologValue(term.clone()))
        }
        other => Err(format!("unsupported annotation parameter `{other}`")),
    }
}

fn value_of_target(args: &[Term], head_vars: &[String]) -> Result<String, String> {
    match &args[0] {
        Term::Var { name, .. } => {
            if head_vars.contains(name) {
                Ok(name.clone())
            } else {
                Err(format!("valueOf({name}) does not name an annotation head argument"))
            }
        }
        other => Err(format!("valueOf expects a head argument, got `{other}`")),
    }
}

fn validate_arith_param(term: &Term, head_vars: &[String]) -> Result<(), String> {
    match term {
        Term::Int(_) => Ok(()),
        Term::Compound(f, args) if f == "valueOf" && args.len() == 1 => {
            value_of_target(args, head_vars).map(|_| ())
        }
        Term::Compound(f, args) if matches!(f.as_str(), "+" | "-" | "*" | "/") => {
            for arg in args {
                validate_arith_param(arg, head_vars)?;
            }
            Ok(())
        }
        other => Err(format!("`{other}` is not valid annotation arithmetic")),
    }
}

/// Renumber all clause variables deterministically: clauses in stored order,
/// variables by first occurrence. Keeps ids unique across clauses and makes
/// parse∘print a fixpoint on the AST.
pub(crate) fn renumber_program_vars(program: &mut Program) {
    let mut supply: u64 = 0;
    let renumber_clause = |terms: Vec<&mut Term>, supply: &mut u64| {
        let mut map: BTreeMap<u64, u64> = BTreeMap::new();
        for term in terms {
            renumber_term(term, &mut map, supply);
        }
    };
    for rule in &mut program.rules {
        let terms: Vec<&mut Term> = rule
            .kept
            .iter_mut()
            .chain(rule.removed.iter_mut())
            .chain(rule.guard.iter_mut())
            .chain(rule.body.iter_mut())
            .collect();
        renumber_clause(terms, &mut supply);
    }
    for ann in &mut program.constraint_annotations {
        let mut terms: Vec<&mut Term> =
            ann.heads.iter_mut().chain(ann.condition.iter_mut()).collect();
        let mut map: BTreeMap<u64, u64> = BTreeMap::new();
        for term in terms.iter_mut() {
            renumber_term(term, &mut map, &mut supply);
        }
        for param in &mut ann.template.params {
            if let ParamExpr::PrologValue(expr) = param {
                renumber_term(expr, &mut map, &mut supply);
            }
        }
    }
    for ra in &mut program.rule_annotations {
        let terms: Vec<&mut Term> =
            std::iter::once(&mut ra.aux_constraint).chain(ra.condition.iter_mut()).collect();
        renumber_clause(terms, &mut supply);
    }
    program.var_supply = supply;
}

fn renumber_term(term: &mut Term, map: &mut BTreeMap<u64, u64>, supply: &mut u64) {
    match term {
        Term::Var { id, .. } => {
            let new_id = *map.entry(*id).or_insert_with(|| {
                let fresh = *supply;
                *supply += 1;
                fresh
            });
            *id = new_id;
        }
        Term::Compound(_, args) => {
            for arg in args {
                renumber_term(arg, map, supply);
            }
        }
        _ => {}
    }
}
