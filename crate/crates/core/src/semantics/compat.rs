//! Compatibility of pre-structures and sets of 1-types with the universal
//! conjuncts of a normal form, and lexicographically least completions.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::eval::{compile, Compiled};
use super::structure::all_tuples;
use super::types::{evaluate_pre, Fact, OneType, PreStructure};
use super::Assignment;
use crate::ground::{ground, solve, Cnf, Limits, Lit, Outcome, Val};
use crate::normal_form::NormalForm;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompatError {
    #[error("no compatible pre-structure realizes the given 1-types")]
    NoCompletion,
    #[error("elements must be distinct and nonempty")]
    BadElements,
    #[error("atom over {0} of {1} elements is neither covering nor single-element")]
    NonUniform(String, usize),
}

/// Tuples over `0..m` of length `arity` that use every position.
pub(crate) fn local_covering(m: usize, arity: usize) -> Vec<Vec<usize>> {
    all_tuples(m, arity)
        .filter(|t| t.iter().collect::<BTreeSet<_>>().len() == m)
        .collect()
}

/// The universal conjuncts of a normal form, compiled for repeated
/// completion queries over local element sets `0..m`.
#[derive(Clone, Debug)]
pub(crate) struct UniversalPart {
    /// Relations of positive arity, in name order.
    pub rels: Vec<(String, usize)>,
    conjuncts: Vec<(Compiled, Vec<Option<usize>>, Vec<usize>)>,
    max_l: usize,
}

impl UniversalPart {
    pub fn new(nf: &NormalForm) -> Self {
        let rels: Vec<(String, usize)> = nf
            .signature
            .relations()
            .filter(|&(_, a)| a > 0)
            .map(|(n, a)| (n.to_string(), a))
            .collect();
        let conjuncts = nf
            .universal
            .iter()
            .map(|c| {
                let compiled = compile(&c.matrix);
                let slots = c
                    .vars
                    .iter()
                    .map(|v| compiled.free.iter().find(|(n, _)| n == v).map(|(_, s)| *s))
                    .collect();
                let rel_pos = compiled
                    .relations
                    .iter()
                    .map(|(n, _)| rels.iter().position(|(r, _)| r == n).unwrap_or(usize::MAX))
                    .collect();
                (compiled, slots, rel_pos)
            })
            .collect();
        UniversalPart {
            rels,
            conjuncts,
            max_l: nf.universal.iter().map(|c| c.l()).max().unwrap_or(0),
        }
    }

    pub fn max_l(&self) -> usize {
        self.max_l
    }

    /// Type of `ty` as a vector aligned with `rels`; missing entries are false.
    pub fn type_vector(&self, ty: &OneType) -> Vec<bool> {
        self.rels
            .iter()
            .map(|(r, _)| ty.get(r).unwrap_or(false))
            .collect()
    }

    /// Covering tuples over `0..m` for every relation, in atom order.
    pub fn covering_layout(&self, m: usize) -> Vec<(usize, Vec<usize>)> {
        if m < 2 {
            return Vec::new();
        }
        self.rels
            .iter()
            .enumerate()
            .flat_map(|(ri, (_, a))| local_covering(m, *a).into_iter().map(move |t| (ri, t)))
            .collect()
    }

    /// Lexicographically least truth vector over `covering_layout(types.len())`
    /// making the pre-structure compatible, or `None`.
    pub fn complete(&self, types: &[Vec<bool>]) -> Result<Option<Vec<bool>>, CompatError> {
        let m = types.len();
        let layout = self.covering_layout(m);
        let index: HashMap<(usize, Vec<usize>), usize> = layout
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, k)| (k, i))
            .collect();
        let mut cnf = Cnf::new(layout.len());
        for (compiled, slots, rel_pos) in &self.conjuncts {
            let l = slots.len();
            if l < m {
                continue;
            }
            for seq in local_covering(m, l) {
                let mut env = vec![0; compiled.slots];
                for (i, s) in slots.iter().enumerate() {
                    if let Some(s) = s {
                        env[*s] = seq[i];
                    }
                }
                let mut atom = |rel: usize, tuple: &[usize]| -> Result<Val, CompatError> {
                    let ri = rel_pos[rel];
                    let name = &compiled.relations[rel].0;
                    if ri == usize::MAX {
                        return Err(CompatError::NonUniform(name.clone(), m));
                    }
                    let used: BTreeSet<&usize> = tuple.iter().collect();
                    if used.len() == 1 {
                        return Ok(Val::Const(types[tuple[0]][ri]));
                    }
                    match index.get(&(ri, tuple.to_vec())) {
                        Some(&v) => Ok(Val::Lit(Lit::new(v, true))),
                        None => Err(CompatError::NonUniform(name.clone(), m)),
                    }
                };
                let v = ground(&mut cnf, &compiled.root, m, &mut env, &mut atom)?;
                cnf.assert(v);
                if cnf.is_trivially_unsat() {
                    return Ok(None);
                }
            }
        }
        let mut nodes = 0;
        Ok(match solve(&cnf, &Limits::default(), &mut nodes) {
            Outcome::Sat(bits) => Some(bits),
            Outcome::Unsat => None,
            Outcome::Timeout => unreachable!("no deadline set"),
        })
    }
}

/// True iff every universal conjunct holds on `p` under every sequence of
/// its elements that uses all of them. Conjuncts with fewer variables than
/// elements impose nothing. Atoms outside the pre-structure make the
/// answer false.
pub fn is_forall_compatible(p: &PreStructure, nf: &NormalForm) -> bool {
    let elems: Vec<usize> = p.elements.iter().copied().collect();
    let m = elems.len();
    for c in &nf.universal {
        if c.l() < m {
            continue;
        }
        for seq in local_covering(m, c.l()) {
            let a: Assignment = c
                .vars
                .iter()
                .cloned()
                .zip(seq.iter().map(|&i| elems[i]))
                .collect();
            if evaluate_pre(p, &c.matrix, &a) != Ok(true) {
                return false;
            }
        }
    }
    true
}

/// True iff for every `m ≤ m_max` and every assignment of the given types to
/// `m` distinct elements some compatible pre-structure realizes it.
pub fn is_typeset_compatible(types: &BTreeSet<OneType>, nf: &NormalForm, m_max: usize) -> bool {
    let part = UniversalPart::new(nf);
    typeset_compatible_with(&part, types, m_max)
}

pub(crate) fn typeset_compatible_with(
    part: &UniversalPart,
    types: &BTreeSet<OneType>,
    m_max: usize,
) -> bool {
    let vectors: Vec<Vec<bool>> = types.iter().map(|t| part.type_vector(t)).collect();
    let top = m_max.min(part.max_l());
    for m in 1..=top {
        let mut failed = false;
        for_each_multiset(vectors.len(), m, &mut |idx| {
            let chosen: Vec<Vec<bool>> = idx.iter().map(|&i| vectors[i].clone()).collect();
            if !matches!(part.complete(&chosen), Ok(Some(_))) {
                failed = true;
            }
            !failed
        });
        if failed {
            return false;
        }
    }
    true
}

/// Calls `f` on every nondecreasing index sequence of length `m` over `0..n`
/// until it returns false.
fn for_each_multiset(n: usize, m: usize, f: &mut dyn FnMut(&[usize]) -> bool) {
    if n == 0 {
        return;
    }
    let mut idx = vec![0; m];
    loop {
        if !f(&idx) {
            return;
        }
        let Some(pos) = (0..m).rev().find(|&i| idx[i] + 1 < n) else {
            return;
        };
        let v = idx[pos] + 1;
        for x in &mut idx[pos..] {
            *x = v;
        }
    }
}

/// The compatible pre-structure on the given elements with the given types
/// whose covering atoms, ordered by relation name then tuple, form the
/// lexicographically least truth vector (false before true).
pub fn complete_pre(
    elements: &[(usize, OneType)],
    nf: &NormalForm,
) -> Result<PreStructure, CompatError> {
    let mut sorted: Vec<&(usize, OneType)> = elements.iter().collect();
    sorted.sort_by_key(|(e, _)| *e);
    if sorted.is_empty() || sorted.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(CompatError::BadElements);
    }
    let part = UniversalPart::new(nf);
    let vectors: Vec<Vec<bool>> = sorted.iter().map(|(_, t)| part.type_vector(t)).collect();
    let bits = part.complete(&vectors)?.ok_or(CompatError::NoCompletion)?;
    let elems: Vec<usize> = sorted.iter().map(|(e, _)| *e).collect();
    let mut p = PreStructure {
        elements: elems.iter().copied().collect(),
        truth: Default::default(),
    };
    for (i, &e) in elems.iter().enumerate() {
        for (ri, (r, a)) in part.rels.iter().enumerate() {
            p.truth.insert(Fact::new(r, vec![e; *a]), vectors[i][ri]);
        }
    }
    for ((ri, t), v) in part.covering_layout(elems.len()).into_iter().zip(bits) {
        let args = t.into_iter().map(|i| elems[i]).collect();
        p.truth.insert(Fact::new(&part.rels[ri].0, args), v);
    }
    Ok(p)
}
