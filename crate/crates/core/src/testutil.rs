//! Random terms for unit tests.

use num_bigint::BigInt;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::term::{Assignment, Term};

pub const INT_VARS: [&str; 3] = ["x", "y", "z"];
pub const BOOL_VARS: [&str; 2] = ["b", "c"];

pub fn int_term(rng: &mut impl Rng, depth: u32) -> Term {
    if depth == 0 || rng.gen_bool(0.3) {
        return if rng.gen_bool(0.5) {
            Term::int(rng.gen_range(-3..=3))
        } else {
            Term::int_var(INT_VARS[rng.gen_range(0..INT_VARS.len())])
        };
    }
    match rng.gen_range(0..5) {
        0 | 1 => {
            let k = rng.gen_range(2..=3);
            Term::add((0..k).map(|_| int_term(rng, depth - 1)).collect())
        }
        2 => Term::scale(BigInt::from(rng.gen_range(-3..=3)), int_term(rng, depth - 1)),
        3 => Term::sub(int_term(rng, depth - 1), int_term(rng, depth - 1)),
        _ => Term::ite(
            bool_term(rng, depth - 1),
            int_term(rng, depth - 1),
            int_term(rng, depth - 1),
        ),
    }
}

pub fn bool_term(rng: &mut impl Rng, depth: u32) -> Term {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..3) {
            0 => Term::Bool(rng.gen_bool(0.5)),
            _ => Term::bool_var(BOOL_VARS[rng.gen_range(0..BOOL_VARS.len())]),
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..11) {
        0 => Term::le(int_term(rng, d), int_term(rng, d)),
        1 => Term::lt(int_term(rng, d), int_term(rng, d)),
        2 => Term::ge(int_term(rng, d), int_term(rng, d)),
        3 => Term::gt(int_term(rng, d), int_term(rng, d)),
        4 => Term::eq(int_term(rng, d), int_term(rng, d)),
        5 => Term::eq(bool_term(rng, d), bool_term(rng, d)),
        6 => Term::not(bool_term(rng, d)),
        7 => Term::and((0..rng.gen_range(2..=3)).map(|_| bool_term(rng, d)).collect()),
        8 => Term::or((0..rng.gen_range(2..=3)).map(|_| bool_term(rng, d)).collect()),
        9 => Term::implies(bool_term(rng, d), bool_term(rng, d)),
        _ => Term::ite(bool_term(rng, d), bool_term(rng, d), bool_term(rng, d)),
    }
}

pub fn arb_bool_term() -> impl Strategy<Value = Term> {
    any::<u64>().prop_map(|s| bool_term(&mut ChaCha8Rng::seed_from_u64(s), 4))
}

pub fn arb_int_term() -> impl Strategy<Value = Term> {
    any::<u64>().prop_map(|s| int_term(&mut ChaCha8Rng::seed_from_u64(s), 4))
}

/// `count` random assignments to all test variables, ints in [-6, 6].
pub fn assignments(seed: u64, count: usize) -> Vec<Assignment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut a = Assignment::new();
            for v in INT_VARS {
                a.set_int(v, rng.gen_range(-6..=6));
            }
            for v in BOOL_VARS {
                a.set_bool(v, rng.gen_bool(0.5));
            }
            a
        })
        .collect()
}
