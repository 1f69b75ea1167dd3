use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use super::{Op, Symbol, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(BigInt),
    Bool(bool),
}

impl Value {
    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Value::Int(v) => Some(v),
            Value::Bool(_) => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            Value::Int(_) => None,
        }
    }

    pub fn to_term(&self) -> Term {
        match self {
            Value::Int(v) => Term::Int(v.clone()),
            Value::Bool(b) => Term::Bool(*b),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// Map from variable names to values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Assignment {
    bindings: BTreeMap<Symbol, Value>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn set(&mut self, var: &Var, value: Value) {
        self.bindings.insert(var.name.clone(), value);
    }

    pub fn set_int(&mut self, name: &str, v: i64) {
        self.bindings.insert(name.into(), Value::Int(BigInt::from(v)));
    }

    pub fn set_bool(&mut self, name: &str, b: bool) {
        self.bindings.insert(name.into(), Value::Bool(b));
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.bindings.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &Value)> {
        self.bindings.iter()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

impl FromIterator<(Var, Value)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (Var, Value)>>(iter: I) -> Self {
        let mut a = Assignment::new();
        for (v, val) in iter {
            a.set(&v, val);
        }
        a
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("sort mismatch during evaluation: {0}")]
    SortMismatch(String),
    #[error("cannot evaluate uninterpreted function {0}")]
    Uninterpreted(String),
    #[error("cannot evaluate a lambda")]
    Lambda,
}

pub fn evaluate(t: &Term, a: &Assignment) -> Result<Value, EvalError> {
    match t {
        Term::Int(v) => Ok(Value::Int(v.clone())),
        Term::Bool(b) => Ok(Value::Bool(*b)),
        Term::Var(v) => {
            let val = a
                .get(&v.name)
                .ok_or_else(|| EvalError::Unbound(v.name.to_string()))?;
            let ok = matches!(
                (val, v.sort),
                (Value::Int(_), super::Sort::Int) | (Value::Bool(_), super::Sort::Bool)
            );
            if !ok {
                return Err(EvalError::SortMismatch(format!("value {val} for {}", v.name)));
            }
            Ok(val.clone())
        }
        Term::Apply(name, ..) => Err(EvalError::Uninterpreted(name.to_string())),
        Term::Lambda(_) => Err(EvalError::Lambda),
        Term::App(op, args) => eval_app(*op, args, a),
    }
}

fn int(t: &Term, a: &Assignment) -> Result<BigInt, EvalError> {
    match evaluate(t, a)? {
        Value::Int(v) => Ok(v),
        Value::Bool(_) => Err(EvalError::SortMismatch("expected Int".into())),
    }
}

fn boolean(t: &Term, a: &Assignment) -> Result<bool, EvalError> {
    match evaluate(t, a)? {
        Value::Bool(b) => Ok(b),
        Value::Int(_) => Err(EvalError::SortMismatch("expected Bool".into())),
    }
}

fn eval_app(op: Op, args: &[Term], a: &Assignment) -> Result<Value, EvalError> {
    let arg = |i: usize| {
        args.get(i)
            .ok_or_else(|| EvalError::SortMismatch(format!("missing argument to {}", op.symbol())))
    };
    Ok(match op {
        Op::Add => {
            let mut s = BigInt::zero();
            for t in args {
                s += int(t, a)?;
            }
            Value::Int(s)
        }
        Op::Mul => Value::Int(int(arg(0)?, a)? * int(arg(1)?, a)?),
        Op::Le => Value::Bool(int(arg(0)?, a)? <= int(arg(1)?, a)?),
        Op::Lt => Value::Bool(int(arg(0)?, a)? < int(arg(1)?, a)?),
        Op::Ge => Value::Bool(int(arg(0)?, a)? >= int(arg(1)?, a)?),
        Op::Gt => Value::Bool(int(arg(0)?, a)? > int(arg(1)?, a)?),
        Op::Eq => Value::Bool(evaluate(arg(0)?, a)? == evaluate(arg(1)?, a)?),
        Op::Not => Value::Bool(!boolean(arg(0)?, a)?),
        Op::And => {
            let mut r = true;
            for t in args {
                r &= boolean(t, a)?;
            }
            Value::Bool(r)
        }
        Op::Or => {
            let mut r = false;
            for t in args {
                r |= boolean(t, a)?;
            }
            Value::Bool(r)
        }
        Op::Implies => Value::Bool(!boolean(arg(0)?, a)? || boolean(arg(1)?, a)?),
        Op::Ite => {
            if boolean(arg(0)?, a)? {
                evaluate(arg(1)?, a)?
            } else {
                evaluate(arg(2)?, a)?
            }
        }
    })
}
