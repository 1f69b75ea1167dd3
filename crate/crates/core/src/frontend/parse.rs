//! The problem format: a small SyGuS-style subset over LIA.

use std::collections::HashMap;

use num_bigint::BigInt;
use thiserror::Error;

use super::sexpr::{parse_sexps, ParseError, Pos, Sexp};
use crate::term::{
    Grammar, Nonterminal, ProblemError, Rule, Sort, SynthFun, SynthProblem, Term, Var,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InputError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("invalid problem: {0}")]
    Problem(#[from] ProblemError),
}

fn err<T>(pos: Pos, msg: impl Into<String>) -> Result<T, InputError> {
    Err(ParseError::new(pos, msg).into())
}

fn parse_sort(e: &Sexp) -> Result<Sort, InputError> {
    match e.atom() {
        Some("Int") => Ok(Sort::Int),
        Some("Bool") => Ok(Sort::Bool),
        _ => err(e.pos(), "expected Int or Bool"),
    }
}

fn parse_int(tok: &str) -> Option<BigInt> {
    let digits = tok.strip_prefix('-').unwrap_or(tok);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    tok.parse().ok()
}

fn is_symbol(tok: &str) -> bool {
    let first = tok.chars().next();
    first.is_some_and(|c| !c.is_ascii_digit() && c != '-')
        || (tok.len() > 1 && tok.starts_with('-') && parse_int(tok).is_none())
}

#[derive(Clone)]
enum Binding {
    Var(Var),
    Fun { params: Vec<Sort>, ret: Sort },
}

struct Scope<'a> {
    names: &'a HashMap<String, Binding>,
}

impl Scope<'_> {
    fn term(&self, e: &Sexp) -> Result<Term, InputError> {
        match e {
            Sexp::Atom(tok, pos) => {
                if let Some(v) = parse_int(tok) {
                    return Ok(Term::Int(v));
                }
                match tok.as_str() {
                    "true" => return Ok(Term::Bool(true)),
                    "false" => return Ok(Term::Bool(false)),
                    _ => {}
                }
                match self.names.get(tok) {
                    Some(Binding::Var(v)) => Ok(Term::Var(v.clone())),
                    Some(Binding::Fun { params, ret }) if params.is_empty() => {
                        Ok(Term::apply(tok, Vec::new(), *ret))
                    }
                    Some(Binding::Fun { .. }) => err(*pos, format!("function {tok} needs arguments")),
                    None => err(*pos, format!("unknown symbol {tok}")),
                }
            }
            Sexp::List(items, pos) => {
                let Some((head, rest)) = items.split_first() else {
                    return err(*pos, "empty application");
                };
                let Some(op) = head.atom() else {
                    return err(head.pos(), "expected an operator");
                };
                let args = rest.iter().map(|a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                self.apply(op, args, *pos)
            }
        }
    }

    fn apply(&self, op: &str, mut args: Vec<Term>, pos: Pos) -> Result<Term, InputError> {
        let n = args.len();
        let arity = |ok: bool| -> Result<(), InputError> {
            if ok {
                Ok(())
            } else {
                err(pos, format!("wrong number of arguments to {op}"))
            }
        };
        let binary = |f: fn(Term, Term) -> Term, mut args: Vec<Term>| -> Result<Term, InputError> {
            arity(args.len() == 2)?;
            let b = args.pop().expect("two");
            let a = args.pop().expect("two");
            Ok(f(a, b))
        };
        match op {
            "+" => {
                arity(n >= 1)?;
                Ok(if n == 1 { args.pop().expect("one") } else { Term::add(args) })
            }
            "-" => {
                arity(n >= 1)?;
                let mut it = args.into_iter();
                let first = it.next().expect("one");
                if n == 1 {
                    return Ok(Term::neg(first));
                }
                let mut parts = vec![first];
                parts.extend(it.map(Term::neg));
                Ok(Term::add(parts))
            }
            "*" => {
                arity(n == 2)?;
                let b = args.pop().expect("two");
                let a = args.pop().expect("two");
                match (a, b) {
                    (Term::Int(x), Term::Int(y)) => Ok(Term::Int(x * y)),
                    (Term::Int(c), t) | (t, Term::Int(c)) => Ok(Term::scale(c, t)),
                    _ => err(pos, "multiplication needs an integer literal operand"),
                }
            }
            "<=" => binary(Term::le, args),
            "<" => binary(Term::lt, args),
            ">=" => binary(Term::ge, args),
            ">" => binary(Term::gt, args),
            "=" => binary(Term::eq, args),
            "=>" => {
                arity(n >= 2)?;
                let mut acc = args.pop().expect("two");
                while let Some(a) = args.pop() {
                    acc = Term::implies(a, acc);
                }
                Ok(acc)
            }
            "not" => {
                arity(n == 1)?;
                Ok(Term::not(args.pop().expect("one")))
            }
            "and" => Ok(if n == 1 { args.pop().expect("one") } else { Term::and(args) }),
            "or" => Ok(if n == 1 { args.pop().expect("one") } else { Term::or(args) }),
            "ite" => {
                arity(n == 3)?;
                let e = args.pop().expect("three");
                let t = args.pop().expect("three");
                let c = args.pop().expect("three");
                Ok(Term::ite(c, t, e))
            }
            f => match self.names.get(f) {
                Some(Binding::Fun { params, ret }) => {
                    arity(params.len() == n)?;
                    Ok(Term::apply(f, args, *ret))
                }
                _ => err(pos, format!("unknown function {f}")),
            },
        }
    }
}

fn expect_len(e: &Sexp, items: &[Sexp], n: usize, what: &str) -> Result<(), InputError> {
    if items.len() == n {
        Ok(())
    } else {
        err(e.pos(), format!("malformed {what}"))
    }
}

fn name_of<'a>(e: &'a Sexp, what: &str) -> Result<&'a str, InputError> {
    match e.atom() {
        Some(a) if is_symbol(a) => Ok(a),
        _ => err(e.pos(), format!("expected {what} name")),
    }
}

fn sorted_names(e: &Sexp, what: &str) -> Result<Vec<(String, Sort, Pos)>, InputError> {
    let items = e
        .list()
        .ok_or_else(|| InputError::from(ParseError::new(e.pos(), format!("expected {what} list"))))?;
    items
        .iter()
        .map(|it| match it.list() {
            Some([n, s]) => Ok((name_of(n, what)?.to_string(), parse_sort(s)?, it.pos())),
            _ => err(it.pos(), format!("expected ({what} Sort)")),
        })
        .collect()
}

fn parse_grammar(
    decl: &[Sexp],
    params: &[Var],
    ret: Sort,
    pos: Pos,
) -> Result<Grammar, InputError> {
    // either a declaration list followed by rule groups, or rule groups alone
    let groups_expr = match decl {
        [groups] => groups,
        [_, groups] => groups,
        _ => return err(pos, "malformed grammar"),
    };
    let groups = groups_expr
        .list()
        .ok_or_else(|| InputError::from(ParseError::new(groups_expr.pos(), "expected rule groups")))?;
    let mut nonterminals = Vec::new();
    for g in groups {
        match g.list() {
            Some([n, s, _]) => nonterminals.push(Nonterminal {
                name: name_of(n, "nonterminal")?.into(),
                sort: parse_sort(s)?,
            }),
            _ => return err(g.pos(), "expected (Nonterminal Sort (productions))"),
        }
    }
    if let [decls, _] = decl {
        let declared = sorted_names(decls, "nonterminal")?;
        let same = declared.len() == nonterminals.len()
            && declared
                .iter()
                .zip(&nonterminals)
                .all(|((n, s, _), nt)| **n == *nt.name && *s == nt.sort);
        if !same {
            return err(decls.pos(), "nonterminal declarations do not match the rule groups");
        }
    }
    let Some(start) = nonterminals.first() else {
        return err(pos, "grammar has no nonterminals");
    };
    if start.sort != ret {
        return err(pos, "grammar start symbol does not have the return sort");
    }
    let mut names: HashMap<String, Binding> = HashMap::new();
    for p in params {
        names.insert(p.name.to_string(), Binding::Var(p.clone()));
    }
    for nt in &nonterminals {
        if names.insert(nt.name.to_string(), Binding::Var(Var::new(&nt.name, nt.sort))).is_some() {
            return err(pos, format!("nonterminal {} shadows a parameter", nt.name));
        }
    }
    let scope = Scope { names: &names };
    let mut rules = Vec::new();
    for (g, nt) in groups.iter().zip(&nonterminals) {
        let prods = &g.list().expect("checked")[2];
        let prods = prods
            .list()
            .ok_or_else(|| InputError::from(ParseError::new(prods.pos(), "expected a production list")))?;
        for p in prods {
            if let Some([head, ..]) = p.list() {
                if matches!(head.atom(), Some("Constant" | "Variable")) {
                    return err(p.pos(), "Constant and Variable productions are not supported");
                }
            }
            rules.push(Rule {
                lhs: nt.name.clone(),
                rhs: scope.term(p)?,
            });
        }
    }
    Ok(Grammar {
        start: start.name.clone(),
        nonterminals,
        rules,
        params: params.to_vec(),
    })
}

/// Parse and validate a problem.
pub fn parse_problem(text: &str) -> Result<SynthProblem, InputError> {
    let cmds = parse_sexps(text)?;
    let mut names: HashMap<String, Binding> = HashMap::new();
    let mut functions = Vec::new();
    let mut universals = Vec::new();
    let mut constraints = Vec::new();
    let mut checked = false;
    for cmd in &cmds {
        let Some(items) = cmd.list() else {
            return err(cmd.pos(), "expected a command");
        };
        let Some(head) = items.first().and_then(Sexp::atom) else {
            return err(cmd.pos(), "expected a command");
        };
        if checked {
            return err(cmd.pos(), "command after (check-synth)");
        }
        match head {
            "set-logic" => {
                expect_len(cmd, items, 2, "set-logic")?;
                if items[1].atom() != Some("LIA") {
                    return err(items[1].pos(), "only the LIA logic is supported");
                }
            }
            "synth-fun" => {
                if items.len() != 4 && items.len() != 5 && items.len() != 6 {
                    return err(cmd.pos(), "malformed synth-fun");
                }
                let name = name_of(&items[1], "function")?;
                let params: Vec<Var> = sorted_names(&items[2], "parameter")?
                    .into_iter()
                    .map(|(n, s, _)| Var::new(&n, s))
                    .collect();
                let ret = parse_sort(&items[3])?;
                let grammar = if items.len() > 4 {
                    Some(parse_grammar(&items[4..], &params, ret, cmd.pos())?)
                } else {
                    None
                };
                let binding = Binding::Fun {
                    params: params.iter().map(|p| p.sort).collect(),
                    ret,
                };
                if names.insert(name.to_string(), binding).is_some() {
                    return err(items[1].pos(), format!("{name} is already declared"));
                }
                functions.push(SynthFun {
                    name: name.into(),
                    params,
                    ret,
                    grammar,
                });
            }
            "declare-var" => {
                expect_len(cmd, items, 3, "declare-var")?;
                let name = name_of(&items[1], "variable")?;
                let v = Var::new(name, parse_sort(&items[2])?);
                if names.insert(name.to_string(), Binding::Var(v.clone())).is_some() {
                    return err(items[1].pos(), format!("{name} is already declared"));
                }
                universals.push(v);
            }
            "constraint" => {
                expect_len(cmd, items, 2, "constraint")?;
                let t = Scope { names: &names }.term(&items[1])?;
                if t.sort_of().ok() != Some(Sort::Bool) {
                    return err(items[1].pos(), "constraint is not a well-sorted Bool term");
                }
                constraints.push(t);
            }
            "check-synth" => {
                expect_len(cmd, items, 1, "check-synth")?;
                checked = true;
            }
            other => return err(items[0].pos(), format!("unsupported command {other}")),
        }
    }
    if !checked {
        let end = cmds.last().map_or(Pos { line: 1, col: 1 }, Sexp::pos);
        return err(end, "missing (check-synth)");
    }
    let constraint = match constraints.len() {
        0 => Term::Bool(true),
        1 => constraints.pop().expect("one"),
        _ => Term::and(constraints),
    };
    let p = SynthProblem {
        functions,
        universals,
        constraint,
    };
    p.validate()?;
    Ok(p)
}
