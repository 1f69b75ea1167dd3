mod common;

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{datatype_values, eval, grammar_terms, load, xy_env, V};
use synthlia::classify::{extract_io_examples, io_inputs};
use synthlia::enumerate::{audit, default_grammar, grammar_to_datatypes, DatatypeFamily, Decision, EnumOptions, Justification};
use synthlia::rewrite::{canonical_key, CanonicalKey};
use synthlia::term::{Grammar, Sort, Term, Value, Var};

const MAX: usize = 4;

fn xy_default() -> Grammar {
    default_grammar(&[Var::int("x"), Var::int("y")], Sort::Int)
}

fn start_terms(g: &Grammar, max: usize) -> Vec<Term> {
    grammar_terms(g, max).remove(&*g.start).unwrap().into_iter().flatten().collect()
}

fn start_analogs(f: &DatatypeFamily, max: usize) -> Vec<Term> {
    datatype_values(f, max)[f.start]
        .iter()
        .flatten()
        .map(|v| f.to_analog(v))
        .collect()
}

fn key(t: &Term) -> CanonicalKey {
    canonical_key(t).unwrap()
}

#[test]
fn default_grammar_encoding_is_exact() {
    let g = xy_default();
    let f = grammar_to_datatypes(&g).unwrap();
    assert!(f.dropped.is_empty());
    let terms: HashSet<Term> = start_terms(&g, MAX).into_iter().collect();
    let analogs = start_analogs(&f, MAX);
    assert_eq!(analogs.len(), terms.len());
    assert_eq!(analogs.into_iter().collect::<HashSet<_>>(), terms);
}

#[test]
fn minimized_encoding_covers_the_grammar() {
    let g = load("max_sym").functions[0].grammar.clone().unwrap();
    let f = grammar_to_datatypes(&g).unwrap();
    assert!(!f.dropped.is_empty());
    let terms = start_terms(&g, MAX);
    let analogs = start_analogs(&f, MAX);
    let term_set: HashSet<&Term> = terms.iter().collect();
    for a in &analogs {
        assert!(term_set.contains(a), "{a} is not a grammar term");
    }
    let analog_keys: HashSet<CanonicalKey> = analogs.iter().map(key).collect();
    for t in &terms {
        assert!(analog_keys.contains(&key(t)), "no analog for {t}");
    }
}

fn rewriter_audit(g: &Grammar) -> (DatatypeFamily, synthlia::enumerate::Audit) {
    let f = grammar_to_datatypes(g).unwrap();
    let a = audit(
        &f,
        EnumOptions {
            max_size: MAX,
            ..EnumOptions::default()
        },
    );
    (f, a)
}

#[test]
fn rewriter_pruning_loses_no_normal_form() {
    for g in [xy_default(), load("max_sym").functions[0].grammar.clone().unwrap()] {
        let (f, a) = rewriter_audit(&g);
        let terms = start_terms(&g, MAX);
        let all: HashSet<CanonicalKey> = terms.iter().map(key).collect();
        let kept: Vec<CanonicalKey> = a.retained.iter().map(|c| key(&c.analog)).collect();
        let kept_set: HashSet<&CanonicalKey> = kept.iter().collect();
        assert_eq!(kept.len(), kept_set.len(), "retained keys repeat");
        assert!(a.retained.len() < terms.len());
        assert_eq!(kept_set.len(), all.len());
        assert!(all.iter().all(|k| kept_set.contains(k)));
        let st = &a.stats;
        assert_eq!(st.enumerated, st.retained + st.pruned_rewriter + st.pruned_signature + st.blocked_exact);
        for c in &a.retained {
            assert!(c.value.size() <= MAX);
            assert_eq!(f.to_analog(&c.value), c.analog);
        }
    }
}

#[test]
fn pruned_values_equal_a_retained_one() {
    let (f, a) = rewriter_audit(&xy_default());
    let by_key: HashMap<CanonicalKey, &Term> = a.retained.iter().map(|c| (key(&c.analog), &c.analog)).collect();
    let envs: Vec<_> = (-3..=3).flat_map(|x| (-3..=3).map(move |y| xy_env(x, y))).collect();
    let mut checked = 0;
    for p in a.pruned.iter().filter(|p| p.value.dt == f.start) {
        let t = f.to_analog(&p.value);
        let twin = by_key.get(&key(&t)).unwrap_or_else(|| panic!("{t} has no retained twin"));
        for env in &envs {
            assert_eq!(eval(&t, env), eval(twin, env), "{t} vs {twin}");
        }
        checked += 1;
    }
    assert!(checked > 0);
}

#[test]
fn pattern_blocked_values_have_smaller_twins() {
    let g = xy_default();
    let (f, a) = rewriter_audit(&g);
    let learned: Vec<_> = a
        .patterns
        .iter()
        .filter(|p| p.justification == Justification::Rewriter && p.shiftable())
        .collect();
    assert!(!learned.is_empty());
    let mut smallest: HashMap<CanonicalKey, usize> = HashMap::new();
    for c in &a.retained {
        let s = smallest.entry(key(&c.analog)).or_insert(usize::MAX);
        *s = (*s).min(c.value.size());
    }
    let values = datatype_values(&f, MAX);
    let mut blocked: Vec<_> = values[f.start]
        .iter()
        .flatten()
        .filter(|v| learned.iter().any(|p| p.blocks_anywhere(v)))
        .collect();
    blocked.shuffle(&mut ChaCha8Rng::seed_from_u64(7));
    assert!(blocked.len() >= 200);
    for v in blocked.into_iter().take(200) {
        let k = key(&f.to_analog(v));
        let s = smallest.get(&k).unwrap_or_else(|| panic!("{} lost", f.show(v)));
        assert!(*s <= v.size(), "{} only has larger twins", f.show(v));
    }
}

fn example_points() -> Vec<Vec<Value>> {
    io_inputs(&extract_io_examples(&load("examples_xy")).unwrap())
}

fn signature(t: &Term, pts: &[Vec<Value>]) -> Vec<V> {
    pts.iter()
        .map(|p| {
            let n = |v: &Value| match v {
                Value::Int(n) => i64::try_from(n).unwrap(),
                Value::Bool(_) => unreachable!(),
            };
            eval(t, &xy_env(n(&p[0]), n(&p[1])))
        })
        .collect()
}

#[test]
fn signature_pruning_keeps_every_behaviour() {
    let p = load("examples_xy");
    let g = p.functions[0].grammar.clone().unwrap();
    let f = grammar_to_datatypes(&g).unwrap();
    let pts = example_points();
    let a = audit(
        &f,
        EnumOptions {
            max_size: MAX,
            signature_points: Some(pts.clone()),
            trace: true,
            ..EnumOptions::default()
        },
    );
    let all: HashSet<Vec<V>> = start_terms(&g, MAX).iter().map(|t| signature(t, &pts)).collect();
    let kept: Vec<Vec<V>> = a.retained.iter().map(|c| signature(&c.analog, &pts)).collect();
    let kept_set: HashSet<&Vec<V>> = kept.iter().collect();
    assert_eq!(kept.len(), kept_set.len(), "retained signatures repeat");
    assert_eq!(kept_set.len(), all.len());
    assert!(all.iter().all(|s| kept_set.contains(s)));
    assert!(a.stats.pruned_signature > 0);
    let pruned_sig = a.pruned.iter().filter(|p| p.justification == Justification::Signature);
    for p in pruned_sig {
        assert!(kept_set.contains(&signature(&f.to_analog(&p.value), &pts)));
    }
    let traced = a.trace.iter().filter(|t| t.decision == Decision::PrunedSignature).count();
    assert_eq!(traced, a.stats.pruned_signature);
}
