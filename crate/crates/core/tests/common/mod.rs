//! Seeded corpus generation and brute-force oracles shared by the
//! integration tests. Nothing here calls the library's evaluator, verifier
//! or compatibility checks.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use auf1::forest::{NodeKind, SatisfactionForest};
use auf1::formula::{
    check_fragment, parse_problem, Formula, Fragment, Problem, Quantifier, Signature,
};
use auf1::normal_form::{
    to_weak_normal_form, zero_ary_branches, Branch, NormalForm, WeakNormalForm,
};
use auf1::semantics::{Fact, PreStructure, Structure};

pub const CORPUS_SEED: u64 = 0x5eed_a0f1;
pub const CORPUS_SIZE: usize = 120;

/// A generated sentence with its pipeline products.
pub struct Case {
    pub text: String,
    pub problem: Problem,
    pub wnf: WeakNormalForm,
    pub branches: Vec<Branch>,
}

struct Gen {
    rng: ChaCha8Rng,
    rels: Vec<(String, usize)>,
    nested_left: usize,
}

impl Gen {
    fn atom_over(&mut self, vars: &[&str]) -> Option<String> {
        let fits: Vec<(String, usize)> = self
            .rels
            .iter()
            .filter(|(_, a)| *a >= vars.len() && *a > 0)
            .cloned()
            .collect();
        let (name, arity) = fits.choose(&mut self.rng)?.clone();
        // every variable at least once, the rest random
        let mut args: Vec<&str> = vars.to_vec();
        while args.len() < arity {
            args.push(vars[self.rng.gen_range(0..vars.len())]);
        }
        args.shuffle(&mut self.rng);
        Some(format!("({name} {})", args.join(" ")))
    }

    fn literal(&mut self, vars: &[&str]) -> String {
        let full = vars.len() > 1 && self.rng.gen_bool(0.6);
        let atom = if full { self.atom_over(vars) } else { None };
        let atom = atom.unwrap_or_else(|| {
            let (name, arity) = self.rels[self.rng.gen_range(0..self.rels.len())].clone();
            if arity == 0 {
                format!("({name})")
            } else {
                let v = vars[self.rng.gen_range(0..vars.len())];
                format!("({name}{})", format!(" {v}").repeat(arity))
            }
        });
        if self.rng.gen_bool(0.4) {
            format!("(not {atom})")
        } else {
            atom
        }
    }

    fn matrix(&mut self, vars: &[&str], fresh: &mut Vec<&'static str>, depth: usize) -> String {
        let leaves = self.rng.gen_range(1..=3);
        let mut items = Vec::new();
        for _ in 0..leaves {
            if depth == 0 && self.nested_left > 0 && !fresh.is_empty() && self.rng.gen_bool(0.3) {
                self.nested_left -= 1;
                let free = vars[self.rng.gen_range(0..vars.len())];
                let y = fresh.pop().unwrap();
                let q = if self.rng.gen_bool(0.5) {
                    "forall"
                } else {
                    "exists"
                };
                let body = self.matrix(&[free, y], fresh, depth + 1);
                items.push(format!("({q} ({y}) {body})"));
            } else {
                items.push(self.literal(vars));
            }
        }
        if items.len() == 1 {
            items.pop().unwrap()
        } else {
            let op = if self.rng.gen_bool(0.5) { "and" } else { "or" };
            format!("({op} {})", items.join(" "))
        }
    }

    fn top_block(&mut self, fresh: &mut Vec<&'static str>) -> String {
        let two = self.rng.gen_bool(0.6);
        let vars: Vec<&str> = if two { vec!["x", "y"] } else { vec!["x"] };
        let body = self.matrix(&vars, fresh, 0);
        let pattern = self.rng.gen_range(0..3);
        match (two, pattern) {
            (false, 0) | (false, 2) => format!("(forall (x) {body})"),
            (false, _) => format!("(exists (x) {body})"),
            (true, 0) => format!("(forall (x y) {body})"),
            (true, 1) => format!("(exists (x y) {body})"),
            (true, _) => format!("(forall (x) (exists (y) {body}))"),
        }
    }

    fn sentence(&mut self) -> (String, String) {
        let first = self.rng.gen_range(1..=3);
        let mut rels = vec![("R".to_string(), first)];
        if self.rng.gen_bool(0.7) {
            // at most 12 atoms over two elements
            let budget = 12 - (1usize << first);
            let options: Vec<usize> = (0..=3)
                .filter(|&a| (1usize << a) <= budget || a == 0)
                .collect();
            let a = *options.choose(&mut self.rng).unwrap();
            rels.push((if a == 0 { "E" } else { "P" }.to_string(), a));
        }
        self.rels = rels;
        self.nested_left = 1;
        let mut fresh = vec!["t", "z"];
        let n = self.rng.gen_range(1..=3);
        let mut parts = Vec::new();
        for _ in 0..n {
            parts.push(self.top_block(&mut fresh));
        }
        let decls: String = self
            .rels
            .iter()
            .map(|(r, a)| format!("(decl {r} {a}) "))
            .collect();
        let body = if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            let op = if self.rng.gen_bool(0.7) { "and" } else { "or" };
            format!("({op} {})", parts.join(" "))
        };
        (decls, body)
    }
}

/// `count` closed AUF1⁻ sentences, at most two relations of arity at most
/// three, every normal-form prefix at most two long.
pub fn corpus(seed: u64, count: usize) -> Vec<Case> {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        rels: Vec::new(),
        nested_left: 0,
    };
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    while out.len() < count {
        let (decls, body) = g.sentence();
        let text = format!("{decls}{body}");
        if !seen.insert(text.clone()) {
            continue;
        }
        let problem = parse_problem(&text, false).expect("generated text parses");
        if !check_fragment(&problem.formula, Fragment::Auf1Minus, false).accepted {
            continue;
        }
        let wnf = to_weak_normal_form(&problem.formula, &problem.signature)
            .expect("fragment member normalizes");
        let branches = zero_ary_branches(&wnf);
        if branches.iter().any(|b| b.normal_form.k_max() > 2) {
            continue;
        }
        out.push(Case {
            text,
            problem,
            wnf,
            branches,
        });
    }
    out
}

pub fn default_corpus() -> Vec<Case> {
    corpus(CORPUS_SEED, CORPUS_SIZE)
}

// ---------------------------------------------------------------------------
// Evaluation

pub type Env = BTreeMap<String, usize>;

fn element(env: &Env, v: &auf1::formula::Var) -> usize {
    *env.get(v.name()).unwrap_or_else(|| panic!("unbound {v}"))
}

/// Direct recursive evaluation.
pub fn eval(s: &Structure, f: &Formula, env: &mut Env) -> bool {
    match f {
        Formula::Atom(a) => {
            let t: Vec<usize> = a.args.iter().map(|v| element(env, v)).collect();
            s.holds(&a.relation, &t).expect("relation in signature")
        }
        Formula::Eq(x, y) => element(env, x) == element(env, y),
        Formula::Not(g) => !eval(s, g, env),
        Formula::And(gs) => gs.iter().all(|g| eval(s, g, env)),
        Formula::Or(gs) => gs.iter().any(|g| eval(s, g, env)),
        Formula::Imp(a, b) => !eval(s, a, env) || eval(s, b, env),
        Formula::Block(prefix, body) => eval_prefix(s, prefix, 0, body, env),
    }
}

fn eval_prefix(
    s: &Structure,
    prefix: &[auf1::formula::Binder],
    i: usize,
    body: &Formula,
    env: &mut Env,
) -> bool {
    let Some(b) = prefix.get(i) else {
        return eval(s, body, env);
    };
    let name = b.var.name().to_string();
    let saved = env.get(&name).copied();
    let mut result = b.quantifier == Quantifier::Forall;
    for e in 0..s.size() {
        env.insert(name.clone(), e);
        let v = eval_prefix(s, prefix, i + 1, body, env);
        if b.quantifier == Quantifier::Forall && !v {
            result = false;
            break;
        }
        if b.quantifier == Quantifier::Exists && v {
            result = true;
            break;
        }
    }
    match saved {
        Some(e) => env.insert(name, e),
        None => env.remove(&name),
    };
    result
}

pub fn models(s: &Structure, f: &Formula) -> bool {
    eval(s, f, &mut Env::new())
}

/// Tuples over `0..n` of length `arity`, first position most significant.
pub fn tuples(n: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |e| {
                    let mut u = t.clone();
                    u.push(e);
                    u
                })
            })
            .collect();
    }
    out
}

pub fn atom_count(sig: &Signature, n: usize) -> usize {
    sig.relations().map(|(_, a)| n.pow(a as u32)).sum()
}

/// Every structure of size `n` over `sig`, in the order of an atom counter
/// whose first atom is most significant.
pub fn all_structures(sig: &Signature, n: usize) -> Vec<Structure> {
    let atoms: Vec<(String, Vec<usize>)> = sig
        .relations()
        .flat_map(|(r, a)| tuples(n, a).into_iter().map(move |t| (r.to_string(), t)))
        .collect();
    assert!(atoms.len() <= 24, "too many atoms to enumerate");
    let total = 1u64 << atoms.len();
    (0..total)
        .map(|bits| {
            let mut s = Structure::empty(sig, n).unwrap();
            for (i, (r, t)) in atoms.iter().enumerate() {
                if bits >> (atoms.len() - 1 - i) & 1 == 1 {
                    s.set(r, t, true).unwrap();
                }
            }
            s
        })
        .collect()
}

/// Whether some structure of size at most `max` satisfies `f`.
pub fn brute_sat(f: &Formula, sig: &Signature, max: usize) -> Option<Structure> {
    (1..=max).find_map(|n| all_structures(sig, n).into_iter().find(|s| models(s, f)))
}

/// `s` with element `e` copied `extra` times; without equality every
/// sentence keeps its truth value.
pub fn duplicate(s: &Structure, e: usize, extra: usize) -> Structure {
    let sig = s.signature();
    let n = s.size();
    let mut out = Structure::empty(&sig, n + extra).unwrap();
    let back = |x: usize| if x >= n { e } else { x };
    for (r, a) in sig.relations() {
        for t in tuples(n + extra, a) {
            let src: Vec<usize> = t.iter().map(|&x| back(x)).collect();
            if s.holds(r, &src).unwrap() {
                out.set(r, &t, true).unwrap();
            }
        }
    }
    out
}

/// The 1-type of `e` as the truth values of `R(e, …, e)` in name order.
pub fn one_type(s: &Structure, e: usize) -> Vec<bool> {
    s.signature()
        .relations()
        .map(|(r, a)| s.holds(r, &vec![e; a]).unwrap())
        .collect()
}

// ---------------------------------------------------------------------------
// Pre-structures and forests

fn pre_eval(pre: &PreStructure, f: &Formula, env: &Env) -> Option<bool> {
    Some(match f {
        Formula::Atom(a) => {
            let t: Vec<usize> = a.args.iter().map(|v| element(env, v)).collect();
            *pre.truth.get(&Fact::new(&a.relation, t))?
        }
        Formula::Eq(x, y) => element(env, x) == element(env, y),
        Formula::Not(g) => !pre_eval(pre, g, env)?,
        Formula::And(gs) => {
            let mut all = true;
            for g in gs {
                all &= pre_eval(pre, g, env)?;
            }
            all
        }
        Formula::Or(gs) => {
            let mut any = false;
            for g in gs {
                any |= pre_eval(pre, g, env)?;
            }
            any
        }
        Formula::Imp(a, b) => !pre_eval(pre, a, env)? || pre_eval(pre, b, env)?,
        Formula::Block(..) => return None,
    })
}

/// Atoms a pre-structure on `elems` must define: argument set equal to
/// `elems` or a singleton.
pub fn required_facts(sig: &Signature, elems: &BTreeSet<usize>) -> BTreeSet<Fact> {
    let list: Vec<usize> = elems.iter().copied().collect();
    let mut out = BTreeSet::new();
    for (r, a) in sig.relations() {
        for t in tuples(list.len(), a) {
            let args: Vec<usize> = t.iter().map(|&i| list[i]).collect();
            let used: BTreeSet<usize> = args.iter().copied().collect();
            if used.len() == 1 || used == *elems {
                out.insert(Fact::new(r, args));
            }
        }
    }
    out
}

/// Every assignment of `vars` onto exactly `elems`.
fn covering_assignments(vars: &[auf1::formula::Var], elems: &BTreeSet<usize>) -> Vec<Env> {
    let list: Vec<usize> = elems.iter().copied().collect();
    tuples(list.len(), vars.len())
        .into_iter()
        .filter(|t| t.iter().collect::<BTreeSet<_>>().len() == list.len())
        .map(|t| {
            vars.iter()
                .zip(t)
                .map(|(v, i)| (v.name().to_string(), list[i]))
                .collect()
        })
        .collect()
}

pub fn pre_compatible(pre: &PreStructure, nf: &NormalForm) -> bool {
    nf.universal.iter().all(|u| {
        covering_assignments(&u.vars, &pre.elements)
            .iter()
            .all(|env| pre_eval(pre, &u.matrix, env) == Some(true))
    })
}

/// Whether every assignment of the given 1-types to at most `m` fresh
/// elements extends to a compatible pre-structure.
pub fn types_compatible(types: &BTreeSet<Vec<(String, bool)>>, nf: &NormalForm, m: usize) -> bool {
    let types: Vec<&Vec<(String, bool)>> = types.iter().collect();
    let sig = &nf.signature;
    for size in 1..=m {
        let elems: BTreeSet<usize> = (0..size).collect();
        let facts = required_facts(sig, &elems);
        let covering: Vec<Fact> = facts
            .iter()
            .filter(|f| f.args.iter().collect::<BTreeSet<_>>().len() == size && size > 1)
            .cloned()
            .collect();
        for choice in tuples(types.len(), size) {
            let mut base = BTreeMap::new();
            for (e, &ti) in choice.iter().enumerate() {
                for (r, v) in types[ti] {
                    let a = sig.arity(r).unwrap();
                    base.insert(Fact::new(r, vec![e; a]), *v);
                }
            }
            let found = (0u64..1 << covering.len()).any(|bits| {
                let mut truth = base.clone();
                for (i, f) in covering.iter().enumerate() {
                    truth.insert(f.clone(), bits >> i & 1 == 1);
                }
                pre_compatible(
                    &PreStructure {
                        elements: elems.clone(),
                        truth,
                    },
                    nf,
                )
            });
            if !found {
                return false;
            }
        }
    }
    true
}

fn type_entries(pre: &PreStructure, e: usize) -> Vec<(String, bool)> {
    pre.truth
        .iter()
        .filter(|(f, _)| f.args.iter().all(|&x| x == e))
        .map(|(f, &v)| (f.relation.clone(), v))
        .collect()
}

/// Root-to-leaf node paths of tree `t`.
fn paths(fst: &SatisfactionForest, t: usize) -> Vec<Vec<usize>> {
    let tree = &fst.trees[t];
    let mut out = Vec::new();
    let mut stack: Vec<Vec<usize>> = tree.roots.iter().rev().map(|&r| vec![r]).collect();
    while let Some(p) = stack.pop() {
        let last = *p.last().unwrap();
        let children = &tree.nodes[last].children;
        if children.is_empty() {
            out.push(p);
        } else {
            for &c in children.iter().rev() {
                let mut q = p.clone();
                q.push(c);
                stack.push(q);
            }
        }
    }
    out
}

/// Direct check of every tree and forest condition.
pub fn forest_is_valid(fst: &SatisfactionForest, nf: &NormalForm) -> bool {
    if fst.domain == 0 || fst.trees.len() != nf.existential.len() {
        return false;
    }
    let domain: BTreeSet<usize> = (0..fst.domain).collect();
    let mut all: Vec<(BTreeSet<usize>, &PreStructure)> = Vec::new();
    for (t, tree) in fst.trees.iter().enumerate() {
        if tree.conjunct != t {
            return false;
        }
        let conj = &nf.existential[t];
        let k = conj.prefix.len();
        // shape
        let mut level_nodes: Vec<usize> = Vec::new();
        let mut parents: Vec<Vec<usize>> = vec![tree.roots.clone()];
        for depth in 0..k {
            let want = match conj.prefix[depth].quantifier {
                Quantifier::Forall => NodeKind::Universal,
                Quantifier::Exists => NodeKind::Existential,
            };
            let mut next = Vec::new();
            for group in &parents {
                let labels: Vec<usize> = group.iter().map(|&c| tree.nodes[c].label).collect();
                let distinct: BTreeSet<usize> = labels.iter().copied().collect();
                let ok = match want {
                    NodeKind::Universal => labels.len() == fst.domain && distinct == domain,
                    NodeKind::Existential => labels.len() == 1 && labels[0] < fst.domain,
                };
                if !ok {
                    return false;
                }
                for &c in group {
                    let n = &tree.nodes[c];
                    if n.kind != want || (depth + 1 < k) == n.pre.is_some() {
                        return false;
                    }
                    next.push(n.children.clone());
                    level_nodes.push(c);
                }
            }
            parents = next;
        }
        if parents.iter().any(|g| !g.is_empty()) {
            return false;
        }
        for p in paths(fst, t) {
            if p.len() != k {
                return false;
            }
            let seq: Vec<usize> = p.iter().map(|&c| tree.nodes[c].label).collect();
            let set: BTreeSet<usize> = seq.iter().copied().collect();
            let Some(pre) = tree.nodes[*p.last().unwrap()].pre.as_ref() else {
                return false;
            };
            let keys: BTreeSet<Fact> = pre.truth.keys().cloned().collect();
            if pre.elements != set || keys != required_facts(&nf.signature, &set) {
                return false;
            }
            let env: Env = conj
                .prefix
                .iter()
                .zip(&seq)
                .map(|(b, &e)| (b.var.name().to_string(), e))
                .collect();
            if pre_eval(pre, &conj.matrix, &env) != Some(true) || !pre_compatible(pre, nf) {
                return false;
            }
            all.push((set, pre));
        }
    }
    let mut types: BTreeMap<usize, Vec<(String, bool)>> = BTreeMap::new();
    let mut labels: BTreeMap<&BTreeSet<usize>, &PreStructure> = BTreeMap::new();
    for (set, pre) in &all {
        for &e in set.iter() {
            let ty = type_entries(pre, e);
            if types.entry(e).or_insert_with(|| ty.clone()) != &ty {
                return false;
            }
        }
        if labels.entry(set).or_insert(pre) != pre {
            return false;
        }
    }
    let typeset: BTreeSet<Vec<(String, bool)>> = types.into_values().collect();
    let m = nf
        .universal
        .iter()
        .map(|u| u.vars.len())
        .max()
        .unwrap_or(0)
        .max(nf.signature.max_arity())
        .max(1);
    types_compatible(&typeset, nf, m)
}
