use std::collections::BTreeSet;

use super::{ForestError, NodeKind, SatisfactionForest, SatisfactionTree};
use crate::formula::Quantifier;
use crate::normal_form::{ExistentialConjunct, NormalForm};
use crate::semantics::{pre_substructure, Assignment, Evaluator, Structure};

/// Builds the forest of `s` for `nf`: universal levels branch over every
/// element, existential levels take the least witness of the remaining
/// suffix, and each branch is labelled by the pre-substructure on its labels.
pub fn extract_forest(s: &Structure, nf: &NormalForm) -> Result<SatisfactionForest, ForestError> {
    let trees = nf
        .existential
        .iter()
        .enumerate()
        .map(|(i, c)| extract_tree(s, i, c))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SatisfactionForest {
        domain: s.size(),
        trees,
    })
}

fn extract_tree(
    s: &Structure,
    index: usize,
    c: &ExistentialConjunct,
) -> Result<SatisfactionTree, ForestError> {
    // suffixes[j] is free in x₁ … x_{j+1}
    let suffixes: Vec<Evaluator> = (1..=c.k()).map(|j| Evaluator::new(&c.suffix(j))).collect();
    let vars = c.variables();
    let mut tree = SatisfactionTree::new(index);
    let mut labels = Vec::new();
    grow(s, c, &suffixes, &vars, &mut tree, None, &mut labels)?;
    Ok(tree)
}

fn grow(
    s: &Structure,
    c: &ExistentialConjunct,
    suffixes: &[Evaluator],
    vars: &[crate::formula::Var],
    tree: &mut SatisfactionTree,
    parent: Option<usize>,
    labels: &mut Vec<usize>,
) -> Result<(), ForestError> {
    let j = labels.len();
    if j == c.k() {
        let set: BTreeSet<usize> = labels.iter().copied().collect();
        let leaf = parent.expect("prefixes are nonempty");
        tree.nodes[leaf].pre = Some(pre_substructure(s, &set).expect("labels lie in the domain"));
        return Ok(());
    }
    let chosen: Vec<(NodeKind, usize)> = match c.prefix[j].quantifier {
        Quantifier::Forall => (0..s.size()).map(|b| (NodeKind::Universal, b)).collect(),
        Quantifier::Exists => {
            let mut a: Assignment = vars.iter().cloned().zip(labels.iter().copied()).collect();
            let mut found = None;
            for b in 0..s.size() {
                a.insert(vars[j].clone(), b);
                if suffixes[j].eval(s, &a)? {
                    found = Some(b);
                    break;
                }
            }
            let b = found.ok_or_else(|| ForestError::NoWitness {
                conjunct: tree.conjunct,
                labels: labels.clone(),
            })?;
            vec![(NodeKind::Existential, b)]
        }
    };
    for (kind, b) in chosen {
        let id = tree.push(parent, kind, b);
        labels.push(b);
        grow(s, c, suffixes, vars, tree, Some(id), labels)?;
        labels.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_problem;
    use crate::normal_form::{to_weak_normal_form, zero_ary_branches};

    fn nf(text: &str) -> NormalForm {
        let p = parse_problem(text, false).unwrap();
        let w = to_weak_normal_form(&p.formula, &p.signature).unwrap();
        zero_ary_branches(&w).remove(0).normal_form
    }

    #[test]
    fn loop_model_gives_single_branch() {
        let nf = nf("(decl R 2) (forall (x) (exists (y) (R x y)))");
        let s = Structure::parse("(size 1) (rel R (0 0))", &nf.signature).unwrap();
        let f = extract_forest(&s, &nf).unwrap();
        assert_eq!(f.trees.len(), 1);
        let t = &f.trees[0];
        assert_eq!(t.branches(), vec![vec![0, 1]]);
        assert_eq!(t.nodes[0].kind, NodeKind::Universal);
        assert_eq!(t.nodes[1].kind, NodeKind::Existential);
        assert_eq!(t.branch_label(&[0, 1]).unwrap().elements.len(), 1);
    }

    #[test]
    fn cycle_witnesses_are_successors() {
        let nf = nf("(decl R 2) (forall (x) (exists (y) (R x y)))");
        let s = Structure::parse("(size 3) (rel R (0 1) (1 2) (2 0))", &nf.signature).unwrap();
        let f = extract_forest(&s, &nf).unwrap();
        let t = &f.trees[0];
        let seqs: Vec<Vec<usize>> = t.branches().iter().map(|b| t.seq(b)).collect();
        assert_eq!(seqs, vec![vec![0, 1], vec![1, 2], vec![2, 0]]);
    }

    #[test]
    fn universal_only_gives_no_trees() {
        let nf = nf("(decl P 1) (forall (x) (P x))");
        let s = Structure::parse("(size 2) (rel P (0) (1))", &nf.signature).unwrap();
        assert!(extract_forest(&s, &nf).unwrap().trees.is_empty());
    }

    #[test]
    fn missing_witness_is_reported() {
        let nf = nf("(decl R 2) (forall (x) (exists (y) (R x y)))");
        let s = Structure::parse("(size 2) (rel R (0 1))", &nf.signature).unwrap();
        assert_eq!(
            extract_forest(&s, &nf),
            Err(ForestError::NoWitness {
                conjunct: 0,
                labels: vec![1]
            })
        );
    }
}
