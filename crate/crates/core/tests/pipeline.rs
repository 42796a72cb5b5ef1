mod common;

use std::collections::BTreeSet;

use proptest::collection::vec;
use proptest::prelude::*;

use auf1::forest::extract_forest;
use auf1::formula::{
    check_fragment, infer_blocks, is_nnf, parse_formula, render_formula, to_nnf, Binder, Formula,
    Fragment, Signature, Var,
};
use auf1::normal_form::NormalForm;
use auf1::semantics::{
    complete_pre, evaluate, is_forall_compatible, one_type_of, pre_substructure, Assignment,
    Structure,
};
use auf1::smallmodel::shrink;
use auf1::solver::{decide, solve_bounded, SearchConfig};

use common::{all_structures, default_corpus, eval, models, pre_compatible, Case, Env};

const VARS: [&str; 3] = ["x", "y", "z"];

fn sig() -> Signature {
    Signature::from_relations([("E", 0), ("P", 1), ("R", 2)])
        .unwrap()
        .with_equality(true)
}

fn arb_formula() -> impl Strategy<Value = Formula> {
    let var = prop::sample::select(VARS.to_vec());
    let leaf = prop_oneof![
        var.clone().prop_map(|v| Formula::atom("P", [v])),
        (var.clone(), var.clone()).prop_map(|(a, b)| Formula::atom("R", [a, b])),
        Just(Formula::atom("E", Vec::<&str>::new())),
        (var.clone(), var.clone()).prop_map(|(a, b)| Formula::Eq(a.into(), b.into())),
    ];
    leaf.prop_recursive(4, 32, 3, move |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            vec(inner.clone(), 0..3).prop_map(Formula::And),
            vec(inner.clone(), 0..3).prop_map(Formula::Or),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::imp(a, b)),
            (
                vec((any::<bool>(), prop::sample::select(VARS.to_vec())), 1..3),
                inner
            )
                .prop_map(|(bs, body)| {
                    let mut seen = BTreeSet::new();
                    let prefix: Vec<Binder> = bs
                        .into_iter()
                        .filter(|(_, v)| seen.insert(*v))
                        .map(|(all, v)| {
                            if all {
                                Binder::forall(v)
                            } else {
                                Binder::exists(v)
                            }
                        })
                        .collect();
                    Formula::block(prefix, body)
                }),
        ]
    })
}

fn arb_structure() -> impl Strategy<Value = Structure> {
    (1usize..=3, vec(any::<bool>(), 13), any::<bool>()).prop_map(|(n, bits, e)| {
        let mut s = Structure::empty(&sig(), n).unwrap();
        s.set("E", &[], e).unwrap();
        for a in 0..n {
            s.set("P", &[a], bits[a]).unwrap();
            for b in 0..n {
                s.set("R", &[a, b], bits[3 + a * 3 + b]).unwrap();
            }
        }
        s
    })
}

fn arb_case() -> impl Strategy<Value = (Formula, Structure, [usize; 3])> {
    (
        arb_formula(),
        arb_structure(),
        [0usize..3, 0usize..3, 0usize..3],
    )
        .prop_map(|(f, s, a)| {
            let n = s.size();
            (f, s, a.map(|e| e % n))
        })
}

fn env_of(a: [usize; 3]) -> Env {
    VARS.iter()
        .zip(a)
        .map(|(v, e)| (v.to_string(), e))
        .collect()
}

fn assignment_of(a: [usize; 3]) -> Assignment {
    VARS.iter()
        .zip(a)
        .map(|(v, e)| (Var::from(*v), e))
        .collect()
}

proptest! {
    #[test]
    fn evaluation_matches_the_oracle((f, s, a) in arb_case()) {
        prop_assert_eq!(evaluate(&s, &f, &assignment_of(a)).unwrap(), eval(&s, &f, &mut env_of(a)));
    }

    #[test]
    fn nnf_preserves_truth_and_is_idempotent((f, s, a) in arb_case()) {
        let g = to_nnf(&f);
        prop_assert!(is_nnf(&g));
        prop_assert_eq!(to_nnf(&g), g.clone());
        prop_assert_eq!(eval(&s, &g, &mut env_of(a)), eval(&s, &f, &mut env_of(a)));
    }

    #[test]
    fn block_inference_preserves_truth_and_is_idempotent((f, s, a) in arb_case()) {
        let g = infer_blocks(&f);
        prop_assert_eq!(infer_blocks(&g), g.clone());
        prop_assert_eq!(eval(&s, &g, &mut env_of(a)), eval(&s, &f, &mut env_of(a)));
    }

    #[test]
    fn parse_inverts_render(f in arb_formula()) {
        let g = infer_blocks(&f);
        prop_assert_eq!(parse_formula(&render_formula(&g), &sig()).unwrap(), g);
    }

    #[test]
    fn fragments_are_nested(f in arb_formula(), eq in any::<bool>()) {
        let s = check_fragment(&f, Fragment::SUf1, eq).accepted;
        let m = check_fragment(&f, Fragment::Auf1Minus, eq).accepted;
        let a = check_fragment(&f, Fragment::Auf1, eq).accepted;
        prop_assert!(!s || m, "sUF1 member outside AUF1-");
        prop_assert!(!m || a, "AUF1- member outside AUF1");
    }

    #[test]
    fn one_types_agree_with_singleton_pre_structures(s in arb_structure()) {
        for e in 0..s.size() {
            let ty = one_type_of(&s, e);
            let pre = pre_substructure(&s, &[e].into_iter().collect()).unwrap();
            prop_assert_eq!(pre.type_of(e).unwrap(), ty);
        }
    }
}

#[test]
fn corpus_nnf_preserves_truth() {
    for c in default_corpus().iter().take(40) {
        let g = to_nnf(&c.problem.formula);
        assert_eq!(to_nnf(&g), g);
        for n in 1..=2 {
            for s in all_structures(&c.problem.signature, n) {
                assert_eq!(models(&s, &g), models(&s, &c.problem.formula), "{}", c.text);
            }
        }
    }
}

#[test]
fn corpus_covers_the_intended_shapes() {
    let corpus = default_corpus();
    let ternary = corpus
        .iter()
        .filter(|c| c.problem.signature.max_arity() == 3)
        .count();
    let nullary = corpus
        .iter()
        .filter(|c| !c.problem.signature.nullary().is_empty())
        .count();
    let several = corpus.iter().filter(|c| c.branches.len() > 1).count();
    let deep = corpus
        .iter()
        .filter(|c| c.branches.iter().any(|b| b.normal_form.k_max() == 2))
        .count();
    assert!(corpus.len() >= 100);
    assert!(
        ternary > 10 && nullary > 5 && several > 10 && deep > 10,
        "{ternary} {nullary} {several} {deep}"
    );
}

#[test]
fn normal_form_size_is_linear() {
    // corpus maximum is about 2.2
    for c in default_corpus() {
        let ratio = c.wnf.size() as f64 / c.problem.formula.size() as f64;
        assert!(ratio <= 4.0, "{ratio} for {}", c.text);
        let binders = c.problem.formula.all_variables().len() * c.problem.formula.block_count();
        assert!(c.wnf.conjuncts.len() <= 1 + binders, "{}", c.text);
    }
}

#[test]
fn branches_agree_with_the_input_on_each_domain_size() {
    for c in default_corpus().iter().take(60) {
        for n in 1..=2 {
            let direct = all_structures(&c.problem.signature, n)
                .iter()
                .any(|s| models(s, &c.problem.formula));
            let via_branch = c.branches.iter().any(|b| {
                let g = b.normal_form.to_formula();
                all_structures(&b.normal_form.signature, n)
                    .iter()
                    .any(|m| models(m, &g))
            });
            assert_eq!(direct, via_branch, "size {n}: {}", c.text);
        }
    }
}

/// Satisfiable corpus cases: branch normal form and the solver's model of it.
fn sat_cases(corpus: &[Case]) -> Vec<(NormalForm, Structure)> {
    corpus
        .iter()
        .filter_map(|c| {
            let r = decide(
                &c.problem.formula,
                &c.problem.signature,
                &SearchConfig::new(3),
            )
            .unwrap();
            let bits = r.branch?;
            let b = c.branches.iter().find(|b| b.bits == bits).unwrap();
            Some((b.normal_form.clone(), r.witness.unwrap()))
        })
        .collect()
}

fn subsets_up_to(n: usize, m: usize) -> Vec<BTreeSet<usize>> {
    (1u32..1 << n)
        .map(|bits| {
            (0..n)
                .filter(|&i| bits >> i & 1 == 1)
                .collect::<BTreeSet<usize>>()
        })
        .filter(|h| h.len() <= m)
        .collect()
}

#[test]
fn pre_substructures_of_models_are_compatible() {
    for (nf, s) in sat_cases(&default_corpus()) {
        let s = common::duplicate(&s, 0, 1);
        for h in subsets_up_to(s.size(), nf.m_max()) {
            let pre = pre_substructure(&s, &h).unwrap();
            assert!(is_forall_compatible(&pre, &nf), "{nf}");
            assert!(pre_compatible(&pre, &nf));
        }
    }
}

#[test]
fn completions_are_compatible() {
    let mut completed = 0;
    for (nf, s) in sat_cases(&default_corpus()) {
        let types: Vec<_> = (0..s.size()).map(|e| one_type_of(&s, e)).collect();
        for i in 0..types.len() {
            for j in 0..types.len() {
                let elements = [(0, types[i].clone()), (1, types[j].clone())];
                if let Ok(pre) = complete_pre(&elements, &nf) {
                    completed += 1;
                    assert!(is_forall_compatible(&pre, &nf));
                    assert!(pre_compatible(&pre, &nf));
                }
            }
        }
    }
    assert!(completed > 0);
}

#[test]
fn solver_models_are_self_certifying_and_monotone() {
    for c in default_corpus() {
        let f = &c.problem.formula;
        let sig = &c.problem.signature;
        if let Some(m) = decide(f, sig, &SearchConfig::new(3)).unwrap().model {
            assert!(models(&m, f), "{}", c.text);
        }
        let base = solve_bounded(f, sig, &SearchConfig::new(2)).unwrap();
        if let Some(m) = &base.model {
            assert!(models(m, f));
            let wider = solve_bounded(f, sig, &SearchConfig::new(3)).unwrap();
            assert_eq!(wider.model.as_ref(), Some(m), "{}", c.text);
        }
    }
}

#[test]
fn extraction_is_deterministic() {
    for (nf, s) in sat_cases(&default_corpus()) {
        assert_eq!(
            extract_forest(&s, &nf).unwrap(),
            extract_forest(&s, &nf).unwrap()
        );
    }
}

#[test]
fn small_models_have_distinct_branch_sets_and_compatible_labels() {
    let mut checked = 0;
    for (nf, s) in sat_cases(&default_corpus()) {
        if nf.m_exists() == 0 {
            continue;
        }
        let a = shrink(&s, &nf).unwrap();
        let again = shrink(&s, &nf).unwrap();
        assert_eq!((&a.forest, &a.model), (&again.forest, &again.model));
        assert_eq!(a.model.size(), a.domain.size());
        let mut sets = BTreeSet::new();
        for tree in &a.forest.trees {
            for b in tree.branches() {
                assert!(sets.insert(tree.set(&b)), "two branches share a label set");
                assert!(pre_compatible(tree.branch_label(&b).unwrap(), &nf));
            }
        }
        checked += 1;
    }
    assert!(checked > 10);
}
