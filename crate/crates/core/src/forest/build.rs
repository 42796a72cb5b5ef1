use std::collections::{BTreeSet, HashMap};

use super::{verify_forest, ForestError, SatisfactionForest};
use crate::normal_form::NormalForm;
use crate::semantics::{typeset_compatible_with, CompatError, OneType, Structure, UniversalPart};

/// Builds a structure over the forest's domain that satisfies `nf`:
/// 1-types from the first branch (trees in order, branches depth-first)
/// containing each element, covering atoms from every branch label, and the
/// least compatible completion on every other element set small enough for
/// a universal conjunct to inspect. Atoms over larger sets are false.
pub fn build_model(fst: &SatisfactionForest, nf: &NormalForm) -> Result<Structure, ForestError> {
    let report = verify_forest(fst, nf);
    if !report.passed() {
        return Err(ForestError::Invalid(Box::new(report)));
    }
    let part = UniversalPart::new(nf);
    let n = fst.domain;
    let mut s = Structure::empty(&nf.signature, n).expect("domain is nonempty");

    let mut types: Vec<Option<OneType>> = vec![None; n];
    let mut first_seen = None;
    let branches = fst.branches();
    for (t, b) in &branches {
        let tree = &fst.trees[*t];
        let pre = tree
            .branch_label(b)
            .expect("verified branches are labelled");
        for &e in &pre.elements {
            if types[e].is_none() {
                let ty = pre.type_of(e).expect("element of the pre-structure");
                first_seen.get_or_insert_with(|| ty.clone());
                types[e] = Some(ty);
            }
        }
    }
    let fallback = match first_seen {
        Some(ty) => ty,
        None => OneType::all(&nf.signature)
            .into_iter()
            .find(|ty| typeset_compatible_with(&part, &[ty.clone()].into(), nf.m_max()))
            .ok_or(ForestError::Completion {
                elements: Vec::new(),
                source: CompatError::NoCompletion,
            })?,
    };
    let vectors: Vec<Vec<bool>> = types
        .iter()
        .map(|t| part.type_vector(t.as_ref().unwrap_or(&fallback)))
        .collect();
    for (e, v) in vectors.iter().enumerate() {
        for ((r, a), &bit) in part.rels.iter().zip(v) {
            s.set(r, &vec![e; *a], bit)
                .expect("relation of the signature");
        }
    }

    let mut defined: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
    for (t, b) in &branches {
        let pre = fst.trees[*t]
            .branch_label(b)
            .expect("verified branches are labelled");
        for (fact, v) in pre.covering() {
            s.set(&fact.relation, &fact.args, v)
                .expect("relation of the signature");
        }
        defined.insert(pre.elements.clone());
    }

    let top = nf.m_max().min(part.max_l());
    let mut cache: HashMap<Vec<Vec<bool>>, Vec<bool>> = HashMap::new();
    for m in 2..=top.min(n) {
        let layout = part.covering_layout(m);
        for_each_subset(n, m, &mut |h| {
            if defined.contains(&h.iter().copied().collect::<BTreeSet<_>>()) {
                return Ok(());
            }
            let key: Vec<Vec<bool>> = h.iter().map(|&e| vectors[e].clone()).collect();
            let bits = match cache.get(&key) {
                Some(b) => b.clone(),
                None => {
                    let fault = |source| ForestError::Completion {
                        elements: h.to_vec(),
                        source,
                    };
                    let b = part
                        .complete(&key)
                        .map_err(fault)?
                        .ok_or_else(|| fault(CompatError::NoCompletion))?;
                    cache.insert(key, b.clone());
                    b
                }
            };
            for ((ri, local), v) in layout.iter().zip(bits) {
                let args: Vec<usize> = local.iter().map(|&i| h[i]).collect();
                s.set(&part.rels[*ri].0, &args, v)
                    .expect("relation of the signature");
            }
            Ok(())
        })?;
    }
    Ok(s)
}

/// Calls `f` on every increasing sequence of `m` elements of `0..n`.
fn for_each_subset(
    n: usize,
    m: usize,
    f: &mut dyn FnMut(&[usize]) -> Result<(), ForestError>,
) -> Result<(), ForestError> {
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        f(&idx)?;
        let Some(pos) = (0..m).rev().find(|&i| idx[i] < n - m + i) else {
            return Ok(());
        };
        idx[pos] += 1;
        for i in pos + 1..m {
            idx[i] = idx[i - 1] + 1;
        }
    }
}
