use super::{Binder, Formula};

/// Negation normal form: negations only directly above atoms and equalities,
/// implications eliminated. Block prefixes are dualized under negation.
pub fn to_nnf(f: &Formula) -> Formula {
    pos(f)
}

fn pos(f: &Formula) -> Formula {
    match f {
        Formula::Atom(_) | Formula::Eq(..) => f.clone(),
        Formula::Not(g) => neg(g),
        Formula::And(fs) => Formula::And(fs.iter().map(pos).collect()),
        Formula::Or(fs) => Formula::Or(fs.iter().map(pos).collect()),
        Formula::Imp(a, b) => Formula::Or(vec![neg(a), pos(b)]),
        Formula::Block(prefix, body) => Formula::block(prefix.clone(), pos(body)),
    }
}

fn neg(f: &Formula) -> Formula {
    match f {
        Formula::Atom(_) | Formula::Eq(..) => Formula::not(f.clone()),
        Formula::Not(g) => pos(g),
        Formula::And(fs) => Formula::Or(fs.iter().map(neg).collect()),
        Formula::Or(fs) => Formula::And(fs.iter().map(neg).collect()),
        Formula::Imp(a, b) => Formula::And(vec![pos(a), neg(b)]),
        Formula::Block(prefix, body) => Formula::block(
            prefix
                .iter()
                .map(|b| Binder {
                    quantifier: b.quantifier.dual(),
                    var: b.var.clone(),
                })
                .collect(),
            neg(body),
        ),
    }
}

/// True when negation only occurs directly above atoms and there are no
/// implications.
pub fn is_nnf(f: &Formula) -> bool {
    match f {
        Formula::Atom(_) | Formula::Eq(..) => true,
        Formula::Not(g) => matches!(g.as_ref(), Formula::Atom(_) | Formula::Eq(..)),
        Formula::Imp(..) => false,
        _ => f.children().into_iter().all(is_nnf),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, Signature};

    fn sig() -> Signature {
        Signature::from_relations([("P", 1), ("Q", 1), ("R", 2)]).unwrap()
    }

    fn nnf_of(text: &str) -> Formula {
        to_nnf(&parse_formula(text, &sig()).unwrap())
    }

    fn p(text: &str) -> Formula {
        parse_formula(text, &sig()).unwrap()
    }

    #[test]
    fn de_morgan() {
        assert_eq!(
            nnf_of("(not (and (P x) (Q x)))"),
            p("(or (not (P x)) (not (Q x)))")
        );
    }

    #[test]
    fn quantifier_dualization() {
        assert_eq!(
            nnf_of("(not (forall (x) (exists (y) (R x y))))"),
            p("(exists (x) (forall (y) (not (R x y))))")
        );
    }

    #[test]
    fn implication_elimination() {
        assert_eq!(nnf_of("(imp (P x) (Q x))"), p("(or (not (P x)) (Q x))"));
    }

    #[test]
    fn idempotent_and_nnf() {
        let f = nnf_of("(not (imp (forall (x) (not (not (P x)))) (exists (y) (not (R y y)))))");
        assert!(is_nnf(&f));
        assert_eq!(to_nnf(&f), f);
    }
}
