use std::collections::{BTreeMap, BTreeSet};

use super::domain::{build_small_domain, SmallDomain};
use super::ext::{build_ext, ExtensionFunction};
use super::SmallModelError;
use crate::forest::{build_model, NodeKind, SatisfactionForest, SatisfactionTree};
use crate::formula::{Quantifier, Var};
use crate::normal_form::{ExistentialConjunct, NormalForm};
use crate::semantics::{
    defined_tuples, one_type_of, Assignment, Evaluator, Fact, PreStructure, Structure,
};

/// The shrunken forest over a [`SmallDomain`] together with the model
/// rebuilt from it.
#[derive(Clone, Debug)]
pub struct Shrunk {
    pub domain: SmallDomain,
    pub forest: SatisfactionForest,
    pub model: Structure,
}

struct Ctx<'a> {
    s: &'a Structure,
    nf: &'a NormalForm,
    dom: &'a SmallDomain,
    ext: &'a ExtensionFunction,
    /// Type index (from 1) of every source element.
    source_type: Vec<usize>,
    /// Least source element of each type, by type index − 1.
    representative: Vec<usize>,
}

/// Copies a model of `nf` into a satisfaction forest over the small domain
/// by following pattern elements of `s`, then rebuilds a model from it.
pub fn shrink(s: &Structure, nf: &NormalForm) -> Result<Shrunk, SmallModelError> {
    let dom = build_small_domain(s, nf)?;
    if !Evaluator::new(&nf.to_formula()).holds(s)? {
        return Err(SmallModelError::NotAModel);
    }
    let ext = build_ext(dom.k)?;
    let source_type: Vec<usize> = (0..s.size())
        .map(|e| {
            dom.index_of(&one_type_of(s, e))
                .expect("type realized in the source")
        })
        .collect();
    let mut representative = vec![usize::MAX; dom.l()];
    for (e, &l) in source_type.iter().enumerate().rev() {
        representative[l - 1] = e;
    }
    let ctx = Ctx {
        s,
        nf,
        dom: &dom,
        ext: &ext,
        source_type,
        representative,
    };
    let trees = nf
        .existential
        .iter()
        .enumerate()
        .map(|(i, c)| shrink_tree(&ctx, i, c))
        .collect::<Result<Vec<_>, _>>()?;
    let forest = SatisfactionForest {
        domain: dom.size(),
        trees,
    };
    let model = build_model(&forest, nf)?;
    Ok(Shrunk {
        domain: dom,
        forest,
        model,
    })
}

struct TreeState<'a> {
    tree: SatisfactionTree,
    suffixes: Vec<Evaluator>,
    vars: Vec<Var>,
    conjunct: &'a ExistentialConjunct,
    /// Leaf labels already used, per `Set⁻` of the branch.
    used_leaves: BTreeMap<BTreeSet<usize>, BTreeSet<usize>>,
}

fn shrink_tree(
    ctx: &Ctx,
    i: usize,
    c: &ExistentialConjunct,
) -> Result<SatisfactionTree, SmallModelError> {
    let mut st = TreeState {
        tree: SatisfactionTree::new(i),
        suffixes: (1..=c.k()).map(|j| Evaluator::new(&c.suffix(j))).collect(),
        vars: c.variables(),
        conjunct: c,
        used_leaves: BTreeMap::new(),
    };
    let mut path: Vec<(usize, usize)> = Vec::new();
    grow(ctx, &mut st, None, &mut path)?;
    Ok(st.tree)
}

/// `path` holds `(label, pattern)` for the ancestors of the node being added.
fn grow(
    ctx: &Ctx,
    st: &mut TreeState,
    parent: Option<usize>,
    path: &mut Vec<(usize, usize)>,
) -> Result<(), SmallModelError> {
    let j = path.len();
    let k = st.conjunct.k();
    if j == k {
        let leaf = parent.expect("prefixes are nonempty");
        st.tree.nodes[leaf].pre = Some(copy_pre(ctx, path));
        return Ok(());
    }
    match st.conjunct.prefix[j].quantifier {
        Quantifier::Forall => {
            for b in 0..ctx.dom.size() {
                let pat = match path.iter().find(|(l, _)| *l == b) {
                    Some(&(_, p)) => p,
                    None => ctx.representative[ctx.dom.type_index(b) - 1],
                };
                let id = st.tree.push(parent, NodeKind::Universal, b);
                path.push((b, pat));
                grow(ctx, st, Some(id), path)?;
                path.pop();
            }
        }
        Quantifier::Exists => {
            let mut a: Assignment = st
                .vars
                .iter()
                .cloned()
                .zip(path.iter().map(|&(_, p)| p))
                .collect();
            let mut witness = None;
            for w in 0..ctx.s.size() {
                a.insert(st.vars[j].clone(), w);
                if st.suffixes[j].eval(ctx.s, &a)? {
                    witness = Some(w);
                    break;
                }
            }
            let w = witness.ok_or(SmallModelError::NotAModel)?;
            let l = ctx.source_type[w];
            let label = if j + 1 < k {
                match path.iter().find(|&&(_, p)| p == w) {
                    Some(&(lab, _)) => lab,
                    None => (0..ctx.dom.size())
                        .find(|&e| {
                            ctx.dom.type_index(e) == l && path.iter().all(|&(lab, _)| lab != e)
                        })
                        .expect("every type has elements outside any branch"),
                }
            } else {
                leaf_label(ctx, st, path, l)?
            };
            let id = st.tree.push(parent, NodeKind::Existential, label);
            path.push((label, w));
            grow(ctx, st, Some(id), path)?;
            path.pop();
        }
    }
    Ok(())
}

/// `(s, i, t, l)` with `s` the layer added by `ext` to the ancestors'
/// layers and `t` the least value unused by earlier branches with the same
/// `Set⁻`.
fn leaf_label(
    ctx: &Ctx,
    st: &mut TreeState,
    path: &[(usize, usize)],
    l: usize,
) -> Result<usize, SmallModelError> {
    let set_minus: BTreeSet<usize> = path.iter().map(|&(lab, _)| lab).collect();
    let layers: BTreeSet<usize> = set_minus.iter().map(|&e| ctx.dom.layer(e)).collect();
    let s = ctx
        .ext
        .new_element(&layers)
        .ok_or(SmallModelError::ExtUndefined(layers.into_iter().collect()))?;
    let i = st.tree.conjunct + 1;
    let used = st.used_leaves.entry(set_minus).or_default();
    let t = (1..=ctx.dom.t_count)
        .find(|&t| !used.contains(&ctx.dom.element(s, i, t, l)))
        .ok_or(SmallModelError::PoolExhausted)?;
    let label = ctx.dom.element(s, i, t, l);
    used.insert(label);
    Ok(label)
}

/// The pre-structure on the branch labels whose atoms are read off the
/// source through the patterns.
fn copy_pre(ctx: &Ctx, path: &[(usize, usize)]) -> PreStructure {
    let pat: BTreeMap<usize, usize> = path.iter().copied().collect();
    let elements: BTreeSet<usize> = pat.keys().copied().collect();
    let mut truth = BTreeMap::new();
    for (r, a) in ctx.nf.signature.relations().filter(|&(_, a)| a > 0) {
        for t in defined_tuples(&elements, a) {
            let src: Vec<usize> = t.iter().map(|e| pat[e]).collect();
            let v = ctx
                .s
                .holds(r, &src)
                .expect("source interprets the normal form's relations");
            truth.insert(Fact::new(r, t), v);
        }
    }
    PreStructure { elements, truth }
}
