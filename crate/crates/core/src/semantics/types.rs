use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use super::eval::Assignment;
use super::structure::{all_tuples, Structure};
use crate::formula::{Formula, Signature, Var};

/// Truth values of the single-variable atoms `R(x, …, x)`, one per relation
/// of arity at least 1, keyed by relation name.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OneType(pub BTreeMap<String, bool>);

impl OneType {
    pub fn get(&self, rel: &str) -> Option<bool> {
        self.0.get(rel).copied()
    }

    /// Every 1-type over the relations of positive arity in `sig`, ordered
    /// by truth vectors with false before true.
    pub fn all(sig: &Signature) -> Vec<OneType> {
        let names: Vec<&str> = sig
            .relations()
            .filter(|&(_, a)| a > 0)
            .map(|(n, _)| n)
            .collect();
        let n = names.len();
        assert!(n < 32, "too many relations to list every 1-type");
        (0u64..1 << n)
            .map(|bits| {
                OneType(
                    names
                        .iter()
                        .enumerate()
                        .map(|(i, name)| (name.to_string(), bits >> (n - 1 - i) & 1 == 1))
                        .collect(),
                )
            })
            .collect()
    }
}

impl fmt::Display for OneType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (r, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{r}:{v}")?;
        }
        write!(f, "}}")
    }
}

/// A ground atom over element indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fact {
    pub relation: String,
    pub args: Vec<usize>,
}

impl Fact {
    pub fn new(relation: &str, args: Vec<usize>) -> Fact {
        Fact {
            relation: relation.to_string(),
            args,
        }
    }
}

/// A partially defined structure on `elements`: truth values are fixed
/// exactly for atoms whose arguments are all of `elements` or a single one
/// of them.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PreStructure {
    pub elements: BTreeSet<usize>,
    pub truth: BTreeMap<Fact, bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PreError {
    #[error("pre-structures need at least one element")]
    Empty,
    #[error("atom {0:?} is not defined by the pre-structure")]
    UndefinedAtom(Fact),
    #[error("unbound variable `{0}`")]
    Unbound(Var),
    #[error("element {0} is not in the pre-structure")]
    ForeignElement(usize),
    #[error("formula is not quantifier-free")]
    Quantified,
}

/// Tuples of length `arity` over `elements` that use every element or just
/// one, in lexicographic order.
pub fn defined_tuples(elements: &BTreeSet<usize>, arity: usize) -> Vec<Vec<usize>> {
    let elems: Vec<usize> = elements.iter().copied().collect();
    let m = elems.len();
    if arity == 0 {
        return Vec::new();
    }
    all_tuples(m, arity)
        .filter(|t| {
            let used: BTreeSet<usize> = t.iter().copied().collect();
            used.len() == 1 || used.len() == m
        })
        .map(|t| t.into_iter().map(|i| elems[i]).collect())
        .collect()
}

/// Tuples of length `arity` over `elements` that use every element.
pub fn covering_tuples(elements: &BTreeSet<usize>, arity: usize) -> Vec<Vec<usize>> {
    let m = elements.len();
    defined_tuples(elements, arity)
        .into_iter()
        .filter(|t| t.iter().collect::<BTreeSet<_>>().len() == m)
        .collect()
}

/// The atomic 1-type realized by `e` in `s`.
pub fn one_type_of(s: &Structure, e: usize) -> OneType {
    OneType(
        s.signature()
            .relations()
            .filter(|&(_, a)| a > 0)
            .map(|(r, a)| {
                let v = s.holds(r, &vec![e; a]).expect("element within range");
                (r.to_string(), v)
            })
            .collect(),
    )
}

/// The pre-structure of `s` on `h`.
pub fn pre_substructure(s: &Structure, h: &BTreeSet<usize>) -> Result<PreStructure, PreError> {
    if h.is_empty() {
        return Err(PreError::Empty);
    }
    if let Some(&e) = h.iter().find(|&&e| e >= s.size()) {
        return Err(PreError::ForeignElement(e));
    }
    let mut truth = BTreeMap::new();
    for (r, a) in s.signature().relations() {
        for t in defined_tuples(h, a) {
            let v = s.holds(r, &t).expect("tuple within range");
            truth.insert(Fact::new(r, t), v);
        }
    }
    Ok(PreStructure {
        elements: h.clone(),
        truth,
    })
}

impl PreStructure {
    /// The pre-structure on one element with the given type.
    pub fn from_type(e: usize, ty: &OneType, sig: &Signature) -> PreStructure {
        let mut truth = BTreeMap::new();
        for (r, a) in sig.relations().filter(|&(_, a)| a > 0) {
            truth.insert(Fact::new(r, vec![e; a]), ty.get(r).unwrap_or(false));
        }
        PreStructure {
            elements: [e].into_iter().collect(),
            truth,
        }
    }

    /// The 1-type of `e` as recorded here.
    pub fn type_of(&self, e: usize) -> Option<OneType> {
        if !self.elements.contains(&e) {
            return None;
        }
        let mut ty = BTreeMap::new();
        for (f, &v) in &self.truth {
            if !f.args.is_empty() && f.args.iter().all(|&x| x == e) {
                ty.insert(f.relation.clone(), v);
            }
        }
        Some(OneType(ty))
    }

    /// Atoms whose arguments use every element (for a singleton: its type atoms).
    pub fn covering(&self) -> impl Iterator<Item = (&Fact, bool)> {
        let m = self.elements.len();
        self.truth
            .iter()
            .filter(move |(f, _)| f.args.iter().collect::<BTreeSet<_>>().len() == m)
            .map(|(f, &v)| (f, v))
    }

    /// True when `truth` is defined on exactly the atom domain over `sig`.
    pub fn is_total_over(&self, sig: &Signature) -> bool {
        let mut expected = 0;
        for (r, a) in sig.relations() {
            for t in defined_tuples(&self.elements, a) {
                expected += 1;
                if !self.truth.contains_key(&Fact::new(r, t)) {
                    return false;
                }
            }
        }
        expected == self.truth.len()
    }
}

/// Evaluates a quantifier-free formula on a pre-structure.
pub fn evaluate_pre(p: &PreStructure, qf: &Formula, a: &Assignment) -> Result<bool, PreError> {
    let lookup = |v: &Var| -> Result<usize, PreError> {
        let e = *a.get(v).ok_or_else(|| PreError::Unbound(v.clone()))?;
        if p.elements.contains(&e) {
            Ok(e)
        } else {
            Err(PreError::ForeignElement(e))
        }
    };
    Ok(match qf {
        Formula::Atom(at) => {
            let args = at.args.iter().map(lookup).collect::<Result<Vec<_>, _>>()?;
            let fact = Fact::new(&at.relation, args);
            *p.truth.get(&fact).ok_or(PreError::UndefinedAtom(fact))?
        }
        Formula::Eq(x, y) => lookup(x)? == lookup(y)?,
        Formula::Not(g) => !evaluate_pre(p, g, a)?,
        Formula::And(fs) => {
            for g in fs {
                if !evaluate_pre(p, g, a)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(fs) => {
            for g in fs {
                if evaluate_pre(p, g, a)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Imp(x, y) => !evaluate_pre(p, x, a)? || evaluate_pre(p, y, a)?,
        Formula::Block(..) => return Err(PreError::Quantified),
    })
}
