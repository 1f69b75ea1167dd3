use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::classify::{to_first_order, to_single_invocation};
use crate::frontend::parse_problem;
use crate::solver::{are_equivalent, check_sat, check_valid, Validity};
use crate::term::{apply_solution, evaluate, Grammar, SynthProblem, Value, Var};

fn problem(text: &str) -> SynthProblem {
    parse_problem(&format!("(set-logic LIA)\n{text}\n(check-synth)")).expect("test problem parses")
}

const BETWEEN: &str = "(synth-fun f ((x Int) (y Int)) Int) (declare-var x Int) (declare-var y Int)
(constraint (=> (> x (+ y 1)) (and (> x (f x y)) (> (f x y) y))))
(constraint (=> (> y (+ x 1)) (and (> y (f x y)) (> (f x y) x))))";

const TABLE: &str = "(synth-fun f ((x Int)) Int) (declare-var x Int)
(constraint (=> (= x 1) (= (f x) 2)))
(constraint (=> (= x 2) (= (f x) 3)))
(constraint (=> (= x 7) (= (f x) 8)))";

fn x() -> Term {
    Term::int_var("x")
}

fn y() -> Term {
    Term::int_var("y")
}

fn same(a: &Term, b: &Term) -> bool {
    normalize(a).unwrap() == normalize(b).unwrap()
}

fn verifies(p: &SynthProblem, s: &Solution) -> bool {
    check_valid(&apply_solution(p, s).unwrap()).unwrap() == Validity::Valid
}

fn solved(p: &SynthProblem) -> (InstanceTrace, Solution) {
    match solve_cegqi(&to_first_order(p).unwrap(), &CegqiOptions::default()) {
        CegqiResult::Solved { trace, solution } => (trace, solution),
        CegqiResult::GaveUp { reason, .. } => panic!("gave up: {reason}"),
    }
}

#[test]
fn strictly_between() {
    let p = problem(BETWEEN);
    let (trace, s) = solved(&p);
    assert_eq!(trace.len(), 2);
    assert!(same(&trace.instances[0][0], &Term::plus(x(), Term::int(1))));
    assert!(same(&trace.instances[1][0], &Term::plus(y(), Term::int(1))));
    let want = Term::ite(
        Term::le(x(), Term::plus(y(), Term::int(1))),
        Term::plus(x(), Term::int(1)),
        Term::plus(y(), Term::int(1)),
    );
    assert!(are_equivalent(&s.get("f").unwrap().body, &want).unwrap());
    assert!(verifies(&p, &s));
}

#[test]
fn example_table() {
    let p = problem(TABLE);
    let (trace, s) = solved(&p);
    let mut consts: Vec<String> = trace.instances.iter().map(|t| t[0].to_string()).collect();
    consts.sort();
    assert_eq!(consts, ["2", "3", "8"]);
    let body = &s.get("f").unwrap().body;
    for (xv, want) in [(1, 2), (2, 3), (7, 8)] {
        let mut a = Assignment::new();
        a.set_int("x", xv);
        assert_eq!(evaluate(body, &a), Ok(Value::Int(want.into())));
    }
    assert!(verifies(&p, &s));
}

#[test]
fn constant_goal() {
    let p = problem("(synth-fun f () Int) (constraint (= f 0))");
    let (trace, s) = solved(&p);
    assert_eq!(trace.instances, vec![vec![Term::int(0)]]);
    assert_eq!(s.get("f").unwrap().body, Term::int(0));
}

#[test]
fn equalities_are_selected() {
    let p = problem("(synth-fun f ((x Int)) Int) (declare-var x Int) (constraint (= (f x) x))");
    let fo = to_first_order(&p).unwrap();
    let mut m = Assignment::new();
    m.set_int("x", 4);
    m.set(&fo.instvars[0], Value::Int(4.into()));
    assert_eq!(select_terms(&m, &fo), vec![x()]);
}

#[test]
fn extraction_nests_instances() {
    let p = problem(BETWEEN);
    let fo = to_first_order(&p).unwrap();
    let trace = InstanceTrace {
        instances: vec![vec![Term::plus(x(), Term::int(1))], vec![Term::plus(y(), Term::int(1))]],
        gamma: Vec::new(),
    };
    let s = extract_solution(&trace, &fo).unwrap();
    let want = Term::ite(
        Term::le(x(), Term::plus(y(), Term::int(1))),
        Term::plus(x(), Term::int(1)),
        Term::plus(y(), Term::int(1)),
    );
    assert!(are_equivalent(&s.get("f").unwrap().body, &want).unwrap());
    assert_eq!(
        extract_solution(&InstanceTrace::default(), &fo),
        Err(ExtractError::EmptyTrace)
    );
}

#[test]
fn unrealizable_is_reported() {
    let p = problem("(synth-fun f ((x Int)) Int) (declare-var x Int) (constraint (> (f x) (f x)))");
    let r = solve_cegqi(&to_first_order(&p).unwrap(), &CegqiOptions::default());
    assert!(matches!(r, CegqiResult::GaveUp { reason: GaveUpReason::Unrealizable, .. }));
}

#[test]
fn iteration_cap_is_reported() {
    let p = problem(TABLE);
    let opts = CegqiOptions {
        max_iters: 1,
        ..CegqiOptions::default()
    };
    let r = solve_cegqi(&to_first_order(&p).unwrap(), &opts);
    assert!(matches!(r, CegqiResult::GaveUp { reason: GaveUpReason::IterationCap, ref trace } if trace.len() == 1));
}

/// Random single-invocation conjecture over `f(x, y)`: guarded bounds on the
/// output relative to the inputs.
fn template(rng: &mut impl Rng) -> SynthProblem {
    let side = |rng: &mut ChaCha8Rng| {
        let v = if rng.gen_bool(0.5) { "x" } else { "y" };
        let c = rng.gen_range(-2..=2);
        format!("(+ {v} {c})")
    };
    let mut rng = ChaCha8Rng::seed_from_u64(rng.gen());
    let mut cs = String::new();
    for _ in 0..rng.gen_range(1..=3) {
        let op = ["<=", ">=", "=", "<", ">"][rng.gen_range(0..5)];
        let bound = format!("({op} (f x y) {})", side(&mut rng));
        let c = if rng.gen_bool(0.5) {
            let g = ["<=", ">="][rng.gen_range(0..2)];
            format!("(=> ({g} x {}) {bound})", side(&mut rng))
        } else {
            bound
        };
        cs.push_str(&format!("(constraint {c})\n"));
    }
    problem(&format!(
        "(synth-fun f ((x Int) (y Int)) Int) (declare-var x Int) (declare-var y Int)\n{cs}"
    ))
}

#[test]
fn solutions_of_random_conjectures_verify() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut solved = 0;
    for _ in 0..100 {
        let p = template(&mut rng);
        if let CegqiResult::Solved { solution, .. } = solve_cegqi(&to_first_order(&p).unwrap(), &CegqiOptions::default()) {
            assert!(verifies(&p, &solution), "{}", p.constraint);
            solved += 1;
        }
    }
    assert!(solved >= 50, "only {solved} solved");
}

/// The loop of `solve_cegqi`, checking that each new instance is false in
/// the model it was chosen from.
fn check_progress(p: &SynthProblem) {
    let fo = to_first_order(p).unwrap();
    let pos = positive_body(&fo);
    let mut gamma: Vec<Term> = Vec::new();
    for _ in 0..16 {
        let mut parts = gamma.clone();
        parts.push(pos.clone());
        let crate::solver::SatResult::Sat(m) = check_sat(&Term::and(parts)).unwrap() else {
            return;
        };
        let ts = select_terms(&m, &fo);
        let inst = substitute(&fo.body, &instance_map(&fo, &ts)).unwrap();
        assert_eq!(evaluate(&inst, &m), Ok(Value::Bool(false)), "{inst}");
        gamma.push(inst);
        if check_sat(&Term::and(gamma.clone())).unwrap() == crate::solver::SatResult::Unsat {
            return;
        }
    }
}

#[test]
fn each_instance_refutes_its_model() {
    check_progress(&problem(BETWEEN));
    check_progress(&problem(TABLE));
    let mut rng = ChaCha8Rng::seed_from_u64(405);
    for _ in 0..40 {
        check_progress(&template(&mut rng));
    }
}

#[test]
fn auxiliary_form_solves_to_max() {
    let p = problem(
        "(synth-fun f ((x Int) (y Int)) Int) (declare-var x Int) (declare-var y Int) (declare-var z Int)
(constraint (=> (or (and (>= x y) (= x z)) (and (>= y x) (= y z))) (= (f x y) z)))",
    );
    let q = to_single_invocation(&p).unwrap();
    let (_, s) = solved(&q);
    assert!(verifies(&p, &s));
    let want = Term::ite(Term::ge(x(), y()), x(), y());
    assert!(are_equivalent(&s.get("f").unwrap().body, &want).unwrap());
}

fn restricted_grammar() -> Grammar {
    problem(
        "(synth-fun f ((x Int) (y Int)) Int
  ((I Int) (B Bool))
  ((I Int (0 1 x y (+ I I) (ite B I I)))
   (B Bool ((> I I) (= I I) (not B)))))
(declare-var x Int) (declare-var y Int) (constraint true)",
    )
    .functions[0]
        .grammar
        .clone()
        .unwrap()
}

#[test]
fn reconstruction_into_restricted_grammar() {
    let g = restricted_grammar();
    let t = Term::ite(
        Term::le(x(), Term::plus(y(), Term::int(1))),
        Term::plus(x(), Term::int(1)),
        Term::plus(y(), Term::int(1)),
    );
    assert!(!g.generates_start(&t));
    let r = reconstruct_term(&t, &g, "I", &ReconstructOptions::default()).unwrap();
    assert!(g.generates_start(&r), "{r}");
    assert!(are_equivalent(&t, &r).unwrap());

    let ok = Term::ite(Term::gt(x(), y()), x(), y());
    assert_eq!(reconstruct_term(&ok, &g, "I", &ReconstructOptions::default()).unwrap(), ok);
}

#[test]
fn constants_are_rebuilt_from_sums() {
    let p = problem("(synth-fun f () Int ((I Int (0 1 (+ I I))))) (constraint true)");
    let g = p.functions[0].grammar.clone().unwrap();
    let r = reconstruct_term(&Term::int(2), &g, "I", &ReconstructOptions::default()).unwrap();
    assert_eq!(r, Term::plus(Term::int(1), Term::int(1)));
}

#[test]
fn reconstruction_gives_up_within_budget() {
    let p = problem("(synth-fun f ((x Int)) Int ((I Int (0 (+ I 1))))) (declare-var x Int) (constraint true)");
    let g = p.functions[0].grammar.clone().unwrap();
    let opts = ReconstructOptions {
        max_size: 3,
        ..ReconstructOptions::default()
    };
    assert_eq!(reconstruct_term(&x(), &g, "I", &opts), Err(ReconstructError::BudgetExhausted));
}

#[test]
fn whole_solutions_are_reconstructed() {
    let mut p = problem(BETWEEN);
    p.functions[0].grammar = Some(restricted_grammar());
    let (_, s) = solved(&p);
    let r = reconstruct(&s, &p, &ReconstructOptions::default()).unwrap();
    let body = &r.get("f").unwrap().body;
    assert!(p.functions[0].grammar.as_ref().unwrap().generates_start(body));
    assert!(verifies(&p, &r));
    assert_eq!(r.get("f").unwrap().params, vec![Var::int("x"), Var::int("y")]);
}
