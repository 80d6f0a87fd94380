//! Parser for the `:strips` + `:typing` subset of PDDL.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Sexp {
    Symbol(String, Pos),
    List(Vec<Sexp>, Pos),
}

fn syntax(pos: Pos, msg: impl Into<String>) -> Error {
    Error::Syntax {
        line: pos.line,
        col: pos.col,
        msg: msg.into(),
    }
}

fn undeclared(pos: Pos, symbol: &str) -> Error {
    Error::UndeclaredSymbol {
        line: pos.line,
        col: pos.col,
        symbol: symbol.to_string(),
    }
}

#[derive(Debug, PartialEq)]
enum Token {
    Open(Pos),
    Close(Pos),
    Symbol(String, Pos),
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut line = 1;
    let mut col = 0;
    let mut current: Option<(String, Pos)> = None;
    let mut in_comment = false;

    let flush = |current: &mut Option<(String, Pos)>, tokens: &mut Vec<Token>| {
        if let Some((s, p)) = current.take() {
            tokens.push(Token::Symbol(s, p));
        }
    };

    for ch in text.chars() {
        if ch == '\n' {
            flush(&mut current, &mut tokens);
            in_comment = false;
            line += 1;
            col = 0;
            continue;
        }
        col += 1;
        if in_comment {
            continue;
        }
        let pos = Pos { line, col };
        match ch {
            ';' => {
                flush(&mut current, &mut tokens);
                in_comment = true;
            }
            '(' => {
                flush(&mut current, &mut tokens);
                tokens.push(Token::Open(pos));
            }
            ')' => {
                flush(&mut current, &mut tokens);
                tokens.push(Token::Close(pos));
            }
            c if c.is_whitespace() => flush(&mut current, &mut tokens),
            c => match &mut current {
                Some((s, _)) => s.extend(c.to_lowercase()),
                None => current = Some((c.to_lowercase().collect(), pos)),
            },
        }
    }
    flush(&mut current, &mut tokens);
    tokens
}

fn parse_sexp(text: &str) -> Result<Sexp> {
    let tokens = tokenize(text);
    let mut stack: Vec<(Vec<Sexp>, Pos)> = Vec::new();
    let mut root = None;
    for tok in tokens {
        match tok {
            Token::Open(p) => stack.push((Vec::new(), p)),
            Token::Close(p) => {
                let (items, open) = stack.pop().ok_or_else(|| syntax(p, "unbalanced `)`"))?;
                let list = Sexp::List(items, open);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None if root.is_none() => root = Some(list),
                    None => return Err(syntax(p, "trailing input after top-level form")),
                }
            }
            Token::Symbol(s, p) => match stack.last_mut() {
                Some((parent, _)) => parent.push(Sexp::Symbol(s, p)),
                None => return Err(syntax(p, format!("unexpected symbol `{s}` at top level"))),
            },
        }
    }
    if let Some((_, p)) = stack.last() {
        return Err(syntax(*p, "unclosed `(`"));
    }
    root.ok_or_else(|| syntax(Pos { line: 1, col: 1 }, "empty input"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    pub name: String,
    pub params: Vec<TypedName>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Const(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Literal {
    pub predicate: String,
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<TypedName>,
    pub pre: Vec<Literal>,
    pub add: Vec<Literal>,
    pub del: Vec<Literal>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl GroundAtom {
    pub fn name(&self) -> String {
        if self.args.is_empty() {
            self.predicate.clone()
        } else {
            format!("{}({})", self.predicate, self.args.join(","))
        }
    }
}

/// A parsed domain/problem pair before grounding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedTask {
    pub domain_name: String,
    pub problem_name: String,
    /// `(type, parent)`; `object` is the implicit root and is not listed.
    pub types: Vec<(String, String)>,
    pub predicates: Vec<Predicate>,
    pub schemas: Vec<ActionSchema>,
    /// Domain constants followed by problem objects, in declaration order.
    pub objects: Vec<TypedName>,
    pub init: Vec<GroundAtom>,
    pub goal: Vec<GroundAtom>,
}

impl LiftedTask {
    pub fn parent_of(&self, ty: &str) -> Option<&str> {
        self.types
            .iter()
            .find(|(t, _)| t == ty)
            .map(|(_, p)| p.as_str())
    }

    /// True if `ty` equals `ancestor` or inherits from it.
    pub fn is_subtype(&self, ty: &str, ancestor: &str) -> bool {
        let mut cur = ty;
        let mut hops = 0;
        loop {
            if cur == ancestor || ancestor == "object" {
                return true;
            }
            match self.parent_of(cur) {
                Some(p) if hops <= self.types.len() => {
                    cur = p;
                    hops += 1;
                }
                _ => return false,
            }
        }
    }
}

const SUPPORTED_REQUIREMENTS: &[&str] = &[":strips", ":typing"];

fn symbol(s: &Sexp) -> Result<(&str, Pos)> {
    match s {
        Sexp::Symbol(v, p) => Ok((v.as_str(), *p)),
        Sexp::List(_, p) => Err(syntax(*p, "expected a symbol, found a list")),
    }
}

fn list(s: &Sexp) -> Result<(&[Sexp], Pos)> {
    match s {
        Sexp::List(v, p) => Ok((v.as_slice(), *p)),
        Sexp::Symbol(v, p) => Err(syntax(*p, format!("expected a list, found `{v}`"))),
    }
}

fn keyword_of(s: &Sexp) -> Option<&str> {
    match s {
        Sexp::List(items, _) => match items.first() {
            Some(Sexp::Symbol(k, _)) => Some(k.as_str()),
            _ => None,
        },
        _ => None,
    }
}

/// Parses `a b - t c - u d` into typed names; untyped trailing names get `object`.
fn typed_list(items: &[Sexp]) -> Result<Vec<(String, String, Pos)>> {
    let mut out = Vec::new();
    let mut pending: Vec<(String, Pos)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let (s, p) = symbol(&items[i])?;
        if s == "-" {
            let ty = items
                .get(i + 1)
                .ok_or_else(|| syntax(p, "`-` without a type"))?;
            if let Sexp::List(_, lp) = ty {
                return Err(syntax(*lp, "`either` and other compound types are not supported"));
            }
            let (ty, tp) = symbol(ty)?;
            if pending.is_empty() {
                return Err(syntax(tp, "type annotation with no names before it"));
            }
            for (n, np) in pending.drain(..) {
                out.push((n, ty.to_string(), np));
            }
            i += 2;
        } else {
            pending.push((s.to_string(), p));
            i += 1;
        }
    }
    out.extend(pending.into_iter().map(|(n, p)| (n, "object".to_string(), p)));
    Ok(out)
}

fn check_requirements(items: &[Sexp]) -> Result<()> {
    for item in items {
        let (req, _) = symbol(item)?;
        if !SUPPORTED_REQUIREMENTS.contains(&req) {
            return Err(Error::UnsupportedRequirement(req.to_string()));
        }
    }
    Ok(())
}

struct DomainDecls {
    name: String,
    types: Vec<(String, String)>,
    constants: Vec<TypedName>,
    predicates: Vec<Predicate>,
    schemas: Vec<ActionSchema>,
}

fn expect_define<'a>(root: &'a Sexp, kind: &str) -> Result<(String, &'a [Sexp])> {
    let (items, pos) = list(root)?;
    match items.first() {
        Some(Sexp::Symbol(s, _)) if s == "define" => {}
        _ => return Err(syntax(pos, "expected `(define ...)`")),
    }
    let header = items
        .get(1)
        .ok_or_else(|| syntax(pos, format!("missing `({kind} <name>)`")))?;
    let (h, hp) = list(header)?;
    match h {
        [Sexp::Symbol(k, _), name] if k == kind => Ok((symbol(name)?.0.to_string(), &items[2..])),
        _ => Err(syntax(hp, format!("expected `({kind} <name>)`"))),
    }
}

struct Scope<'a> {
    predicates: &'a HashMap<String, usize>,
    objects: &'a HashSet<String>,
    vars: HashSet<String>,
}

impl Scope<'_> {
    fn literal(&self, s: &Sexp) -> Result<Literal> {
        let (items, pos) = list(s)?;
        let (head, hp) = match items.first() {
            Some(h) => symbol(h)?,
            None => return Err(syntax(pos, "empty literal")),
        };
        match head {
            "not" => return Err(Error::UnsupportedRequirement(":negative-preconditions".into())),
            "=" => return Err(Error::UnsupportedRequirement(":equality".into())),
            "or" | "imply" | "exists" | "forall" => {
                return Err(Error::UnsupportedRequirement(":adl".into()))
            }
            "when" => return Err(Error::UnsupportedRequirement(":conditional-effects".into())),
            _ => {}
        }
        let arity = *self
            .predicates
            .get(head)
            .ok_or_else(|| undeclared(hp, head))?;
        let mut terms = Vec::with_capacity(items.len() - 1);
        for t in &items[1..] {
            let (name, tp) = symbol(t)?;
            if name.starts_with('?') {
                if !self.vars.contains(name) {
                    return Err(undeclared(tp, name));
                }
                terms.push(Term::Var(name.to_string()));
            } else {
                if !self.objects.contains(name) {
                    return Err(undeclared(tp, name));
                }
                terms.push(Term::Const(name.to_string()));
            }
        }
        if terms.len() != arity {
            return Err(syntax(
                hp,
                format!("`{head}` expects {arity} arguments, got {}", terms.len()),
            ));
        }
        Ok(Literal {
            predicate: head.to_string(),
            terms,
        })
    }

    /// A conjunction of positive literals: `(and l*)` or a single literal.
    fn conjunction(&self, s: &Sexp) -> Result<Vec<Literal>> {
        match keyword_of(s) {
            Some("and") => {
                let (items, _) = list(s)?;
                items[1..].iter().map(|l| self.literal(l)).collect()
            }
            _ => {
                if let Sexp::List(items, _) = s {
                    if items.is_empty() {
                        return Ok(Vec::new());
                    }
                }
                Ok(vec![self.literal(s)?])
            }
        }
    }

    fn effect(&self, s: &Sexp) -> Result<(Vec<Literal>, Vec<Literal>)> {
        let parts: Vec<&Sexp> = match keyword_of(s) {
            Some("and") => list(s)?.0[1..].iter().collect(),
            _ => vec![s],
        };
        let mut add = Vec::new();
        let mut del = Vec::new();
        for part in parts {
            match keyword_of(part) {
                Some("not") => {
                    let (items, pos) = list(part)?;
                    if items.len() != 2 {
                        return Err(syntax(pos, "`not` takes exactly one literal"));
                    }
                    del.push(self.literal(&items[1])?);
                }
                Some("forall") => return Err(Error::UnsupportedRequirement(":adl".into())),
                _ => add.push(self.literal(part)?),
            }
        }
        Ok((add, del))
    }
}

fn parse_domain(text: &str) -> Result<DomainDecls> {
    let root = parse_sexp(text)?;
    let (name, sections) = expect_define(&root, "domain")?;
    let mut decls = DomainDecls {
        name,
        types: Vec::new(),
        constants: Vec::new(),
        predicates: Vec::new(),
        schemas: Vec::new(),
    };
    let mut action_forms = Vec::new();

    for section in sections {
        let (items, pos) = list(section)?;
        let (key, _) = symbol(items.first().ok_or_else(|| syntax(pos, "empty section"))?)?;
        match key {
            ":requirements" => check_requirements(&items[1..])?,
            ":types" => {
                for (t, parent, _) in typed_list(&items[1..])? {
                    if t != "object" {
                        decls.types.push((t, parent));
                    }
                }
            }
            ":constants" => {
                for (n, ty, _) in typed_list(&items[1..])? {
                    decls.constants.push(TypedName { name: n, ty });
                }
            }
            ":predicates" => {
                for p in &items[1..] {
                    let (pi, pp) = list(p)?;
                    let (pname, _) =
                        symbol(pi.first().ok_or_else(|| syntax(pp, "empty predicate"))?)?;
                    let params = typed_list(&pi[1..])?
                        .into_iter()
                        .map(|(name, ty, _)| TypedName { name, ty })
                        .collect();
                    decls.predicates.push(Predicate {
                        name: pname.to_string(),
                        params,
                    });
                }
            }
            ":action" => action_forms.push(section),
            other => {
                return Err(syntax(pos, format!("unsupported domain section `{other}`")));
            }
        }
    }

    let known_types: HashSet<&str> = decls
        .types
        .iter()
        .map(|(t, _)| t.as_str())
        .chain(std::iter::once("object"))
        .collect();
    let check_type = |ty: &str, pos: Pos| {
        if known_types.contains(ty) {
            Ok(())
        } else {
            Err(undeclared(pos, ty))
        }
    };
    for (_, parent) in &decls.types {
        check_type(parent, Pos::default())?;
    }

    let predicates: HashMap<String, usize> = decls
        .predicates
        .iter()
        .map(|p| (p.name.clone(), p.params.len()))
        .collect();
    let constants: HashSet<String> = decls.constants.iter().map(|c| c.name.clone()).collect();

    for form in action_forms {
        let (items, pos) = list(form)?;
        let (aname, _) = symbol(items.get(1).ok_or_else(|| syntax(pos, "action without a name"))?)?;
        let mut schema = ActionSchema {
            name: aname.to_string(),
            params: Vec::new(),
            pre: Vec::new(),
            add: Vec::new(),
            del: Vec::new(),
        };
        let mut scope = Scope {
            predicates: &predicates,
            objects: &constants,
            vars: HashSet::new(),
        };
        let mut i = 2;
        while i < items.len() {
            let (key, kp) = symbol(&items[i])?;
            let value = items
                .get(i + 1)
                .ok_or_else(|| syntax(kp, format!("`{key}` without a value")))?;
            match key {
                ":parameters" => {
                    for (n, ty, np) in typed_list(list(value)?.0)? {
                        if !n.starts_with('?') {
                            return Err(syntax(np, format!("parameter `{n}` must start with `?`")));
                        }
                        check_type(&ty, np)?;
                        scope.vars.insert(n.clone());
                        schema.params.push(TypedName { name: n, ty });
                    }
                }
                ":precondition" => schema.pre = scope.conjunction(value)?,
                ":effect" => {
                    let (add, del) = scope.effect(value)?;
                    schema.add = add;
                    schema.del = del;
                }
                other => return Err(syntax(kp, format!("unsupported action field `{other}`"))),
            }
            i += 2;
        }
        decls.schemas.push(schema);
    }
    Ok(decls)
}

/// Parses a domain and problem into a [`LiftedTask`]. Symbols are lower-cased
/// and `;` comments are stripped.
pub fn parse_pddl(domain_text: &str, problem_text: &str) -> Result<LiftedTask> {
    let domain = parse_domain(domain_text)?;
    let root = parse_sexp(problem_text)?;
    let (problem_name, sections) = expect_define(&root, "problem")?;

    let known_types: HashSet<&str> = domain
        .types
        .iter()
        .map(|(t, _)| t.as_str())
        .chain(std::iter::once("object"))
        .collect();
    let predicates: HashMap<String, usize> = domain
        .predicates
        .iter()
        .map(|p| (p.name.clone(), p.params.len()))
        .collect();

    let mut objects = domain.constants.clone();
    let mut init_form = None;
    let mut goal_form = None;
    for section in sections {
        let (items, pos) = list(section)?;
        let (key, _) = symbol(items.first().ok_or_else(|| syntax(pos, "empty section"))?)?;
        match key {
            ":domain" => {
                let (d, dp) = symbol(items.get(1).ok_or_else(|| syntax(pos, "missing domain name"))?)?;
                if d != domain.name {
                    return Err(undeclared(dp, d));
                }
            }
            ":requirements" => check_requirements(&items[1..])?,
            ":objects" => {
                for (n, ty, np) in typed_list(&items[1..])? {
                    if !known_types.contains(ty.as_str()) {
                        return Err(undeclared(np, &ty));
                    }
                    objects.push(TypedName { name: n, ty });
                }
            }
            ":init" => init_form = Some(&items[1..]),
            ":goal" => goal_form = Some((items.get(1), pos)),
            other => return Err(syntax(pos, format!("unsupported problem section `{other}`"))),
        }
    }

    let object_names: HashSet<String> = objects.iter().map(|o| o.name.clone()).collect();
    let scope = Scope {
        predicates: &predicates,
        objects: &object_names,
        vars: HashSet::new(),
    };
    let ground = |lit: Literal| GroundAtom {
        predicate: lit.predicate,
        args: lit
            .terms
            .into_iter()
            .map(|t| match t {
                Term::Const(c) | Term::Var(c) => c,
            })
            .collect(),
    };

    let mut init = Vec::new();
    for atom in init_form.unwrap_or(&[]) {
        init.push(ground(scope.literal(atom)?));
    }
    let goal = match goal_form {
        Some((Some(g), _)) => scope
            .conjunction(g)?
            .into_iter()
            .map(ground)
            .collect::<Vec<_>>(),
        _ => Vec::new(),
    };
    if goal.is_empty() {
        return Err(Error::EmptyGoal);
    }

    Ok(LiftedTask {
        domain_name: domain.name,
        problem_name,
        types: domain.types,
        predicates: domain.predicates,
        schemas: domain.schemas,
        objects,
        init,
        goal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOMAIN: &str = "(define (domain d) (:requirements :strips)
        (:predicates (p ?x) (q ?x))
        (:action a :parameters (?x) :precondition (p ?x) :effect (and (q ?x) (not (p ?x)))))";

    #[test]
    fn empty_goal_is_an_error() {
        let err = parse_pddl(DOMAIN, "(define (problem p) (:domain d) (:init) (:goal (and)))");
        assert!(matches!(err, Err(Error::EmptyGoal)));
    }

    #[test]
    fn adl_requirement_rejected() {
        let dom = "(define (domain d) (:requirements :adl) (:predicates (p)))";
        match parse_pddl(dom, "(define (problem p) (:domain d) (:goal (p)))") {
            Err(Error::UnsupportedRequirement(r)) => assert_eq!(r, ":adl"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_precondition_rejected() {
        let dom = "(define (domain d) (:predicates (p))
            (:action a :parameters () :precondition (not (p)) :effect (p)))";
        assert!(matches!(
            parse_pddl(dom, "(define (problem p) (:domain d) (:goal (p)))"),
            Err(Error::UnsupportedRequirement(_))
        ));
    }

    #[test]
    fn undeclared_symbol_is_positioned() {
        let prob = "(define (problem p) (:domain d)\n (:objects o)\n (:init (r o)) (:goal (q o)))";
        match parse_pddl(DOMAIN, prob) {
            Err(Error::UndeclaredSymbol { line, col, symbol }) => {
                assert_eq!((line, col, symbol.as_str()), (3, 10, "r"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unbalanced_parens_are_positioned() {
        match parse_pddl(DOMAIN, "(define (problem p)\n  (:domain d)") {
            Err(Error::Syntax { line, col, .. }) => assert_eq!((line, col), (1, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn comments_and_case_are_normalized() {
        let prob = "; header\n(DEFINE (PROBLEM P) (:DOMAIN D) ; trailing\n (:objects O1) (:init (P O1)) (:goal (Q o1)))";
        let t = parse_pddl(DOMAIN, prob).unwrap();
        assert_eq!(t.objects[0].name, "o1");
        assert_eq!(t.init[0].name(), "p(o1)");
        assert_eq!(t.goal[0].name(), "q(o1)");
    }

    #[test]
    fn typed_lists_and_inheritance() {
        let dom = "(define (domain d) (:requirements :strips :typing)
            (:types ball room - object red - ball)
            (:predicates (at ?b - ball ?r - room)))";
        let t = parse_pddl(dom, "(define (problem p) (:domain d) (:objects b1 - red r1 - room) (:goal (at b1 r1)))").unwrap();
        assert!(t.is_subtype("red", "ball"));
        assert!(!t.is_subtype("room", "ball"));
        assert_eq!(t.objects[0].ty, "red");
    }
}
