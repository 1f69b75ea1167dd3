use std::fmt;

use num_bigint::Sign;

use super::{normalize, RewriteError};
use crate::term::{Op, Sort, Term};

/// Injective byte encoding of a normal form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(Vec<u8>);

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalKey(")?;
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        write!(f, ")")
    }
}

pub fn canonical_key(t: &Term) -> Result<CanonicalKey, RewriteError> {
    Ok(key_of_normal(&normalize(t)?))
}

/// Key of a term that is already normalized.
pub fn key_of_normal(t: &Term) -> CanonicalKey {
    let mut out = Vec::with_capacity(32);
    encode(t, &mut out);
    CanonicalKey(out)
}

fn put_len(n: usize, out: &mut Vec<u8>) {
    out.extend_from_slice(&(n as u32).to_le_bytes());
}

fn put_str(s: &str, out: &mut Vec<u8>) {
    put_len(s.len(), out);
    out.extend_from_slice(s.as_bytes());
}

fn sort_byte(s: Sort) -> u8 {
    match s {
        Sort::Int => 0,
        Sort::Bool => 1,
    }
}

fn op_byte(op: Op) -> u8 {
    op as u8
}

fn encode(t: &Term, out: &mut Vec<u8>) {
    match t {
        Term::Int(v) => {
            out.push(0);
            let (sign, mag) = v.to_bytes_le();
            out.push(match sign {
                Sign::Minus => 0,
                Sign::NoSign => 1,
                Sign::Plus => 2,
            });
            put_len(mag.len(), out);
            out.extend_from_slice(&mag);
        }
        Term::Bool(b) => {
            out.push(1);
            out.push(*b as u8);
        }
        Term::Var(v) => {
            out.push(2);
            out.push(sort_byte(v.sort));
            put_str(&v.name, out);
        }
        Term::App(op, args) => {
            out.push(3);
            out.push(op_byte(*op));
            put_len(args.len(), out);
            for a in args {
                encode(a, out);
            }
        }
        Term::Apply(name, args, sort) => {
            out.push(4);
            out.push(sort_byte(*sort));
            put_str(name, out);
            put_len(args.len(), out);
            for a in args {
                encode(a, out);
            }
        }
        Term::Lambda(l) => {
            out.push(5);
            put_len(l.params.len(), out);
            for p in &l.params {
                out.push(sort_byte(p.sort));
                put_str(&p.name, out);
            }
            encode(&l.body, out);
        }
    }
}
