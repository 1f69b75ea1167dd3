use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::classify::{extract_io_examples, io_inputs};
use crate::frontend::parse_problem;
use crate::solver::are_equivalent;
use crate::term::{evaluate, Assignment, Grammar, Sort, SynthProblem, Term, Value, Var};

const MAX_SYM: &str = "(set-logic LIA)
(synth-fun f ((x Int) (y Int)) Int
  ((I Int) (B Bool))
  ((I Int (0 x y (+ I 1) (ite B I I)))
   (B Bool ((<= I I) (>= I I) (= I I) (not B)))))
(declare-var x Int)
(declare-var y Int)
(constraint (>= (f x y) x))
(constraint (= (f x y) (f y x)))
(check-synth)";

const EXAMPLES_XY: &str = "(set-logic LIA)
(synth-fun f ((x Int) (y Int)) Int
  ((I Int) (B Bool))
  ((I Int (0 1 x y (+ I I) (ite B I I)))
   (B Bool ((<= I I) (= I I) (not B)))))
(declare-var x Int)
(declare-var y Int)
(constraint (=> (and (= x 1) (= y 0)) (= (f x y) 1)))
(constraint (=> (and (= x 2) (= y 1)) (= (f x y) 3)))
(constraint (=> (and (= x 7) (= y 1)) (= (f x y) 8)))
(check-synth)";

fn problem(text: &str) -> SynthProblem {
    parse_problem(text).expect("test problem parses")
}

fn grammar_of(text: &str) -> Grammar {
    problem(text).functions[0].grammar.clone().expect("grammar")
}

fn xy() -> Vec<Var> {
    vec![Var::int("x"), Var::int("y")]
}

fn max_sym_family() -> DatatypeFamily {
    grammar_to_datatypes(&grammar_of(MAX_SYM)).unwrap()
}

fn default_family() -> DatatypeFamily {
    grammar_to_datatypes(&default_grammar(&xy(), Sort::Int)).unwrap()
}

fn ctor_names(f: &DatatypeFamily, dt: usize) -> Vec<String> {
    f.datatypes[dt].ctors.iter().map(|c| c.name.to_string()).collect()
}

fn value(f: &DatatypeFamily, text: &str) -> DtValue {
    f.parse_value(f.start, text).unwrap()
}

fn point(xs: &[i64]) -> Vec<Value> {
    xs.iter().map(|&v| Value::Int(v.into())).collect()
}

#[test]
fn example_grammar_is_flattened_and_minimized() {
    let f = max_sym_family();
    assert_eq!(f.datatypes.len(), 3);
    assert_eq!(ctor_names(&f, 0), ["0", "x", "y", "plus", "if"]);
    assert_eq!(ctor_names(&f, 1), ["leq", "eq", "not"]);
    let aux = &f.datatypes[2];
    assert_eq!(&*aux.name, "I1");
    assert_eq!(ctor_names(&f, 2), ["1"]);
    assert_eq!(f.datatypes[0].ctors[3].args, [0, 2]);
    assert_eq!(f.dropped.len(), 1);
    assert_eq!(f.dropped[0].rhs.to_string(), "(>= I I)");
}

#[test]
fn single_datatype_grammars() {
    let g = "(set-logic LIA)
(synth-fun f ((x Int)) Int ((I Int (x 1 (+ I I)))))
(constraint true)
(check-synth)";
    let f = grammar_to_datatypes(&grammar_of(g)).unwrap();
    assert_eq!(f.datatypes.len(), 1);
    assert_eq!(ctor_names(&f, 0), ["x", "1", "plus"]);

    let g = "(set-logic LIA)
(synth-fun f () Int ((I Int (3))))
(constraint true)
(check-synth)";
    let f = grammar_to_datatypes(&grammar_of(g)).unwrap();
    assert_eq!(ctor_names(&f, 0), ["3"]);
    let mut e = Enumerator::new(&f, EnumOptions::default());
    assert_eq!(f.show(&e.next_candidate().unwrap().value), "3");
    assert!(e.next_candidate().is_none());
}

#[test]
fn unit_rules_are_inlined() {
    let g = "(set-logic LIA)
(synth-fun f ((x Int)) Int ((S Int (C (+ S S))) (C Int (x 0))))
(constraint true)
(check-synth)";
    let f = grammar_to_datatypes(&grammar_of(g)).unwrap();
    assert_eq!(ctor_names(&f, 0), ["x", "0", "plus"]);
}

#[test]
fn default_grammar_families() {
    let f = default_family();
    assert_eq!(ctor_names(&f, 0), ["0", "1", "x", "y", "plus", "if"]);
    assert_eq!(ctor_names(&f, 1), ["leq", "eq", "not"]);
    assert_eq!(f.start, 0);

    let g = default_grammar(&[], Sort::Int);
    g.validate().unwrap();
    assert_eq!(ctor_names(&grammar_to_datatypes(&g).unwrap(), 0), ["0", "1", "plus", "if"]);

    let g = default_grammar(&[Var::int("x")], Sort::Bool);
    g.validate().unwrap();
    let f = grammar_to_datatypes(&g).unwrap();
    assert_eq!(f.datatypes[f.start].sort, Sort::Bool);
}

#[test]
fn analogs_and_eval() {
    let f = max_sym_family();
    let v = value(&f, "plus(x, 1)");
    assert_eq!(f.to_analog(&v), Term::plus(Term::int_var("x"), Term::int(1)));
    assert_eq!(f.eval_dt(&v, &point(&[2, 3])), Ok(Value::Int(3.into())));
    assert_eq!(f.eval_dt(&value(&f, "x"), &point(&[2, 3])), Ok(Value::Int(2.into())));
    let v = value(&f, "if(leq(y, x), x, y)");
    assert_eq!(f.to_analog(&v).to_string(), "(ite (<= y x) x y)");
    assert_eq!(f.to_analog(&value(&f, "0")), Term::int(0));
    let v = value(&f, "if(leq(x, y), plus(0, 1), 0)");
    assert_eq!(f.eval_dt(&v, &point(&[2, 3])), Ok(Value::Int(1.into())));
    assert_eq!(f.eval_dt(&v, &point(&[2])), Err(DtError::Arity { expected: 2, got: 1 }));
}

/// Random value of `dt`, falling back to the shallowest constructors at depth 0.
fn random_value(f: &DatatypeFamily, dt: usize, depth: u32, rng: &mut impl Rng) -> DtValue {
    let ctors = &f.datatypes[dt].ctors;
    let ci = if depth == 0 {
        let leaves: Vec<usize> = (0..ctors.len()).filter(|&i| ctors[i].args.is_empty()).collect();
        if leaves.is_empty() {
            // every datatype here reaches a leaf within one more step
            (0..ctors.len())
                .find(|&i| ctors[i].args.iter().all(|&a| f.datatypes[a].ctors.iter().any(|c| c.args.is_empty())))
                .expect("shallow constructor")
        } else {
            leaves[rng.gen_range(0..leaves.len())]
        }
    } else {
        rng.gen_range(0..ctors.len())
    };
    let children = ctors[ci]
        .args
        .iter()
        .map(|&a| Arc::new(random_value(f, a, depth.saturating_sub(1), rng)))
        .collect();
    DtValue::new(dt, ci, children)
}

#[test]
fn eval_agrees_with_analog_evaluation() {
    let fams = [max_sym_family(), default_family()];
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for i in 0..500 {
        let f = &fams[i % 2];
        let v = random_value(f, f.start, 4, &mut rng);
        let pt = point(&[rng.gen_range(-9..=9), rng.gen_range(-9..=9)]);
        let mut a = Assignment::new();
        for (p, val) in f.params.iter().zip(&pt) {
            a.set(p, val.clone());
        }
        assert_eq!(f.eval_dt(&v, &pt).unwrap(), evaluate(&f.to_analog(&v), &a).unwrap(), "{}", f.show(&v));
    }
}

#[test]
fn blocking_patterns() {
    let f = max_sym_family();
    let p = make_blocking_pattern(&value(&f, "plus(x, 1)"), Justification::Rewriter);
    assert_eq!(p.display(&f).to_string(), "{ε=plus, I#1=x, I1#1=1}");
    let p = make_blocking_pattern(&value(&f, "x"), Justification::Rewriter);
    assert_eq!(p.display(&f).to_string(), "{ε=x}");
    let p = make_blocking_pattern(&value(&f, "if(leq(0, y), x, 0)"), Justification::Rewriter);
    assert_eq!(p.constraints.len(), 6);
    assert!(p.blocks(&value(&f, "if(leq(0, y), x, 0)")));
    assert!(!p.blocks(&value(&f, "if(leq(0, y), x, y)")));
}

fn rewriter_generalized(f: &DatatypeFamily, text: &str) -> BlockingPattern {
    let v = value(f, text);
    let key = crate::rewrite::canonical_key(&f.to_analog(&v)).unwrap();
    generalize_pattern(f, &v, Witness::Rewriter(&key))
}

#[test]
fn generalization_drops_irrelevant_positions() {
    let f = default_family();
    let p = rewriter_generalized(&f, "plus(x, 0)");
    assert_eq!(p.display(&f).to_string(), "{ε=plus, I#2=0}");
    assert!(p.blocks(&value(&f, "plus(if(leq(x, y), x, 1), 0)")));

    let p = rewriter_generalized(&f, "if(leq(0, 1), x, 0)");
    assert_eq!(p.display(&f).to_string(), "{ε=if, B#1=leq, B#1.I#1=0, B#1.I#2=1}");
    assert!(p.blocks(&value(&f, "if(leq(0, 1), y, plus(x, x))")));
}

#[test]
fn generalization_respects_datatypes() {
    let g = "(set-logic LIA)
(synth-fun f ((x Int) (y Int)) Int
  ((I Int (x (+ J K))) (J Int (0 1 x y (+ I I))) (K Int (0))))
(constraint true)
(check-synth)";
    let f = grammar_to_datatypes(&grammar_of(g)).unwrap();
    let p = rewriter_generalized(&f, "plus(x, 0)");
    assert_eq!(p.display(&f).to_string(), "{ε=plus, J#1=x, K#1=0}");
    assert!(!p.blocks(&value(&f, "plus(y, 0)")));
}

#[test]
fn shifting_patterns() {
    let f = default_family();
    let p = rewriter_generalized(&f, "plus(x, 0)");
    let root = SelectorPath::root();
    assert_eq!(shift_pattern(&f, &p, 0, &root).unwrap(), p);
    let at = root.child(Step { dt: 0, n: 1 });
    let s = shift_pattern(&f, &p, 0, &at).unwrap();
    assert_eq!(s.display(&f).to_string(), "{I#1=plus, I#1.I#2=0}");
    assert!(s.blocks(&value(&f, "plus(plus(x, 0), y)")));
    assert!(!s.blocks(&value(&f, "plus(y, plus(x, 0))")));
    assert!(p.blocks_anywhere(&value(&f, "plus(y, plus(x, 0))")));
    let bad = root.child(Step { dt: 1, n: 1 });
    assert_eq!(shift_pattern(&f, &p, 0, &bad), Err(PatternError::TypeMismatch));
}

#[test]
fn signatures() {
    let f = grammar_to_datatypes(&grammar_of(EXAMPLES_XY)).unwrap();
    let pts = vec![point(&[1, 1]), point(&[2, 1]), point(&[7, 1])];
    let sig = |t: &str| signature_of(&f, &value(&f, t), &pts).unwrap();
    assert_eq!(sig("x"), point(&[1, 2, 7]));
    assert_eq!(sig("if(leq(1, y), 1, x)"), point(&[1, 1, 1]));
    assert_eq!(sig("0"), point(&[0, 0, 0]));
    assert_eq!(sig("plus(x, x)"), point(&[2, 4, 14]));
}

#[test]
fn candidates_come_in_size_order_without_repeats() {
    let f = default_family();
    let mut e = Enumerator::new(
        &f,
        EnumOptions {
            max_size: 3,
            ..EnumOptions::default()
        },
    );
    let mut seen = std::collections::HashSet::new();
    let mut last = 0;
    let mut first = None;
    while let Some(c) = e.next_candidate() {
        first.get_or_insert_with(|| f.show(&c.value));
        assert!(c.value.size() >= last);
        last = c.value.size();
        assert!(seen.insert(c.value.clone()));
    }
    assert_eq!(first.as_deref(), Some("0"));
    let s = &e.stats;
    assert_eq!(s.enumerated, s.retained + s.pruned_rewriter + s.pruned_signature + s.blocked_exact);
}

#[test]
fn learned_patterns_block_nested_positions() {
    let f = default_family();
    let opts = EnumOptions {
        max_size: 2,
        seeds: false,
        trace: true,
        ..EnumOptions::default()
    };
    let mut e = Enumerator::new(&f, opts);
    let mut yielded = Vec::new();
    while let Some(c) = e.next_candidate() {
        yielded.push(f.show(&c.value));
    }
    let pruned: Vec<&str> = e
        .trace
        .iter()
        .filter(|t| t.decision == Decision::PrunedRewriter)
        .map(|t| t.value.as_str())
        .collect();
    assert!(pruned.contains(&"plus(0, 0)"));
    for v in ["plus(plus(x, 0), y)", "plus(plus(y, 0), x)", "plus(y, 0)"] {
        assert!(!yielded.iter().any(|y| y == v), "{v}");
    }
    assert!(yielded.iter().any(|y| y == "plus(x, y)"));
}

#[test]
fn enumeration_solves_example_problem() {
    let p = problem(MAX_SYM);
    let out = solve_enum(&p, &max_sym_family(), EnumOptions::default());
    let s = out.result.unwrap();
    let body = &s.get("f").unwrap().body;
    let want = Term::ite(
        Term::le(Term::int_var("y"), Term::int_var("x")),
        Term::int_var("x"),
        Term::int_var("y"),
    );
    assert!(are_equivalent(body, &want).unwrap(), "{body}");
    assert!(out.stats.enumerated <= 5000);
}

#[test]
fn enumeration_with_signatures_fits_examples() {
    let p = problem(EXAMPLES_XY);
    let pts = io_inputs(&extract_io_examples(&p).unwrap());
    assert_eq!(pts, vec![point(&[1, 0]), point(&[2, 1]), point(&[7, 1])]);
    let f = grammar_to_datatypes(p.functions[0].grammar.as_ref().unwrap()).unwrap();
    let out = solve_enum(
        &p,
        &f,
        EnumOptions {
            signature_points: Some(pts.clone()),
            ..EnumOptions::default()
        },
    );
    let s = out.result.unwrap();
    let body = &s.get("f").unwrap().body;
    for (pt, want) in pts.iter().zip([1, 3, 8]) {
        let mut a = Assignment::new();
        a.set(&Var::int("x"), pt[0].clone());
        a.set(&Var::int("y"), pt[1].clone());
        assert_eq!(evaluate(body, &a), Ok(Value::Int(want.into())), "{body}");
    }
    let st = &out.stats;
    assert_eq!(st.enumerated, st.retained + st.pruned_rewriter + st.pruned_signature + st.blocked_exact);
}

#[test]
fn identity_is_found_first() {
    let p = problem(
        "(set-logic LIA)
(synth-fun f ((x Int)) Int)
(declare-var x Int)
(constraint (= (f x) x))
(check-synth)",
    );
    let f = grammar_to_datatypes(&default_grammar(&[Var::int("x")], Sort::Int)).unwrap();
    let out = solve_enum(&p, &f, EnumOptions::default());
    assert_eq!(out.result.unwrap().get("f").unwrap().body, Term::int_var("x"));
    assert_eq!(out.stats.retained, 1);
}

#[test]
fn several_functions_are_rejected() {
    let p = problem(
        "(set-logic LIA)
(synth-fun f ((x Int)) Int)
(synth-fun g ((x Int)) Int)
(declare-var x Int)
(constraint (= (f x) (g x)))
(check-synth)",
    );
    let out = solve_enum(&p, &default_family(), EnumOptions::default());
    assert_eq!(out.result, Err(EnumError::MultipleFunctions));
}

#[test]
fn exhaustion_is_reported() {
    let p = problem(
        "(set-logic LIA)
(synth-fun f ((x Int)) Int ((I Int (0 1))))
(declare-var x Int)
(constraint (= (f x) x))
(check-synth)",
    );
    let f = grammar_to_datatypes(p.functions[0].grammar.as_ref().unwrap()).unwrap();
    let out = solve_enum(&p, &f, EnumOptions::default());
    assert_eq!(out.result, Err(EnumError::Exhausted(8)));
    assert_eq!(out.stats.blocked_exact, 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printed_values_read_back(seed in any::<u64>()) {
        let f = max_sym_family();
        let v = random_value(&f, f.start, 3, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(f.parse_value(f.start, &f.show(&v)).unwrap(), v);
    }

    #[test]
    fn exact_patterns_block_only_their_value(a in any::<u64>(), b in any::<u64>()) {
        let f = default_family();
        let v = random_value(&f, f.start, 3, &mut ChaCha8Rng::seed_from_u64(a));
        let w = random_value(&f, f.start, 3, &mut ChaCha8Rng::seed_from_u64(b));
        let p = make_blocking_pattern(&v, Justification::Refuted);
        prop_assert!(p.blocks(&v));
        prop_assert_eq!(p.blocks(&w), v == w);
    }
}
