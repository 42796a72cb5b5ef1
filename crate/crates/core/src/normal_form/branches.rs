use std::collections::BTreeMap;

use super::simplify::{substitute_nullary, Simplified};
use super::{valuation_bits, ExistentialConjunct, NormalForm, UniversalConjunct, WeakNormalForm};
use crate::formula::{Quantifier, Signature};
use crate::semantics::{Structure, StructureError};

/// The normal form obtained from one valuation of the 0-ary symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    /// Valuation as a bit string over the 0-ary symbols in name order.
    pub bits: String,
    pub valuation: BTreeMap<String, bool>,
    pub normal_form: NormalForm,
}

/// The branch for valuation number `index` (binary counting, first 0-ary
/// symbol most significant), or `None` when the valuation falsifies a
/// conjunct. `index` must be below `2^z`.
pub fn branch_at(w: &WeakNormalForm, index: u64) -> Option<Branch> {
    let names = w.signature.nullary();
    let z = names.len();
    let valuation: BTreeMap<String, bool> = names
        .into_iter()
        .enumerate()
        .map(|(i, n)| (n, index >> (z - 1 - i) & 1 == 1))
        .collect();
    let mut nf = NormalForm {
        signature: w.signature.without_nullary(),
        existential: Vec::new(),
        universal: Vec::new(),
    };
    for c in &w.conjuncts {
        if let Some(g) = &c.guard {
            if !valuation[g] {
                continue;
            }
        }
        let matrix = match substitute_nullary(&c.matrix, &valuation) {
            Simplified::Const(true) => continue,
            Simplified::Const(false) => return None,
            Simplified::Formula(m) => m,
        };
        match c.prefix.last() {
            None => unreachable!("quantifier-free conjuncts mention only 0-ary symbols"),
            Some(b) if b.quantifier == Quantifier::Exists => {
                nf.existential.push(ExistentialConjunct {
                    prefix: c.prefix.clone(),
                    matrix,
                })
            }
            Some(_) => {
                debug_assert!(c.prefix.iter().all(|b| b.quantifier == Quantifier::Forall));
                nf.universal.push(UniversalConjunct {
                    vars: c.prefix.iter().map(|b| b.var.clone()).collect(),
                    matrix,
                })
            }
        }
    }
    Some(Branch {
        bits: valuation_bits(&valuation),
        valuation,
        normal_form: nf,
    })
}

/// The branch whose valuation is written as `bits` (one character per
/// 0-ary symbol in name order), or `None` when the length is wrong or the
/// valuation falsifies a conjunct.
pub fn branch_with_bits(w: &WeakNormalForm, bits: &str) -> Option<Branch> {
    let z = w.signature.nullary().len();
    if bits.len() != z || z > 63 || !bits.chars().all(|c| c == '0' || c == '1') {
        return None;
    }
    let index = if z == 0 {
        0
    } else {
        u64::from_str_radix(bits, 2).ok()?
    };
    branch_at(w, index)
}

/// The branch selected by the 0-ary values of `expanded`, a structure over
/// the signature of `w`.
pub fn branch_of_model(w: &WeakNormalForm, expanded: &Structure) -> Option<Branch> {
    let bits: String = w
        .signature
        .nullary()
        .iter()
        .map(|n| match expanded.holds(n, &[]) {
            Ok(true) => '1',
            _ => '0',
        })
        .collect();
    branch_with_bits(w, &bits)
}

impl Branch {
    /// The part of `expanded` over this branch's normal-form signature.
    pub fn restrict(&self, expanded: &Structure) -> Structure {
        expanded.reduct(|r| self.normal_form.signature.contains(r))
    }

    /// The relations of `sig` read off a model of the branch normal form,
    /// with 0-ary symbols set from the valuation.
    pub fn project(
        &self,
        witness: &Structure,
        sig: &Signature,
    ) -> Result<Structure, StructureError> {
        let mut m = Structure::empty(sig, witness.size())?;
        for (name, arity) in sig.relations() {
            if arity == 0 {
                m.set(
                    name,
                    &[],
                    self.valuation.get(name).copied().unwrap_or(false),
                )?;
            } else {
                for t in witness.tuples(name)? {
                    m.set(name, &t, true)?;
                }
            }
        }
        Ok(m)
    }
}

/// Number of 0-ary valuations of `w`, or `None` when it does not fit in 64 bits.
pub fn valuation_count(w: &WeakNormalForm) -> Option<u64> {
    1u64.checked_shl(w.signature.nullary().len() as u32)
}

/// Every surviving branch, in binary counting order of the valuations.
pub fn zero_ary_branches(w: &WeakNormalForm) -> Vec<Branch> {
    let n = valuation_count(w).expect("too many 0-ary symbols to enumerate");
    (0..n).filter_map(|i| branch_at(w, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_problem;
    use crate::normal_form::to_weak_normal_form;

    fn branches(text: &str) -> Vec<Branch> {
        let p = parse_problem(text, false).unwrap();
        zero_ary_branches(&to_weak_normal_form(&p.formula, &p.signature).unwrap())
    }

    #[test]
    fn no_nullary_symbols_gives_one_branch() {
        let b = branches("(decl R 2) (forall (x) (exists (y) (R x y)))");
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].bits, "");
        assert_eq!(b[0].normal_form.m_exists(), 1);
    }

    #[test]
    fn disjunction_of_subsentences() {
        let b = branches("(decl P 1) (decl Q 1) (or (exists (x) (P x)) (forall (x) (Q x)))");
        let bits: Vec<&str> = b.iter().map(|b| b.bits.as_str()).collect();
        assert_eq!(bits, vec!["01", "10", "11"]);
        assert_eq!(b[0].normal_form.universal.len(), 1);
        assert_eq!(b[0].normal_form.m_exists(), 0);
        assert_eq!(b[1].normal_form.m_exists(), 1);
        assert_eq!(b[2].normal_form.m_exists(), 1);
        assert_eq!(b[2].normal_form.universal.len(), 1);
    }

    #[test]
    fn false_conjunct_kills_every_branch() {
        assert!(branches("(decl E 0) (and (E) (not (E)))").is_empty());
        let b = branches("(decl E 0) (decl P 1) (and (E) (forall (x) (or (E) (P x))))");
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].bits, "1");
        assert!(b[0].normal_form.universal.is_empty());
    }

    #[test]
    fn branches_by_bits() {
        let p = parse_problem(
            "(decl P 1) (decl Q 1) (or (exists (x) (P x)) (forall (x) (Q x)))",
            false,
        )
        .unwrap();
        let w = to_weak_normal_form(&p.formula, &p.signature).unwrap();
        assert_eq!(branch_with_bits(&w, "10").unwrap().bits, "10");
        assert!(branch_with_bits(&w, "00").is_none());
        assert!(branch_with_bits(&w, "1").is_none());
        let mut s = Structure::empty(&w.signature, 1).unwrap();
        s.set("@E_2", &[], true).unwrap();
        assert_eq!(branch_of_model(&w, &s).unwrap().bits, "01");
    }
}
