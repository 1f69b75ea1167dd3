use std::fmt;

use num_bigint::Sign;
use num_traits::One;

use super::{Lambda, Op, Term};

fn write_int(f: &mut fmt::Formatter<'_>, v: &num_bigint::BigInt) -> fmt::Result {
    if v.sign() == Sign::Minus {
        write!(f, "(- {})", v.magnitude())
    } else {
        write!(f, "{v}")
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(v) => write_int(f, v),
            Term::Bool(b) => write!(f, "{b}"),
            Term::Var(v) => f.write_str(&v.name),
            Term::App(Op::Mul, args) if args.len() == 2 => match &args[0] {
                Term::Int(c) if (-c).is_one() => write!(f, "(- {})", args[1]),
                c => write!(f, "(* {c} {})", args[1]),
            },
            Term::App(op, args) => {
                write!(f, "({}", op.symbol())?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
            Term::Apply(name, args, _) => {
                if args.is_empty() {
                    return f.write_str(name);
                }
                write!(f, "({name}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
            Term::Lambda(l) => write!(f, "{l}"),
        }
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(lambda (")?;
        for (i, p) in self.params.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "({} {})", p.name, p.sort)?;
        }
        write!(f, ") {})", self.body)
    }
}
