use std::collections::BTreeMap;

use crate::formula::Formula;

/// A formula after constant propagation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Simplified {
    Const(bool),
    Formula(Formula),
}

/// Replaces every 0-ary atom named in `valuation` by its value and folds the
/// resulting constants. Quantifiers over a constant body fold to the constant
/// because domains are nonempty.
pub fn substitute_nullary(f: &Formula, valuation: &BTreeMap<String, bool>) -> Simplified {
    use Simplified::{Const, Formula as F};
    match f {
        Formula::Atom(a) if a.args.is_empty() => match valuation.get(&a.relation) {
            Some(&v) => Const(v),
            None => F(f.clone()),
        },
        Formula::Atom(_) => F(f.clone()),
        Formula::Eq(x, y) if x == y => Const(true),
        Formula::Eq(..) => F(f.clone()),
        Formula::Not(g) => match substitute_nullary(g, valuation) {
            Const(b) => Const(!b),
            F(g) => F(Formula::not(g)),
        },
        Formula::And(fs) | Formula::Or(fs) => {
            let is_and = matches!(f, Formula::And(_));
            let mut kept = Vec::new();
            for g in fs {
                match substitute_nullary(g, valuation) {
                    Const(b) if b == is_and => {}
                    Const(b) => return Const(b),
                    F(g) => kept.push(g),
                }
            }
            match kept.len() {
                0 => Const(is_and),
                1 => F(kept.pop().expect("one item")),
                _ if is_and => F(Formula::And(kept)),
                _ => F(Formula::Or(kept)),
            }
        }
        Formula::Imp(a, b) => {
            let na = Formula::not((**a).clone());
            substitute_nullary(&Formula::Or(vec![na, (**b).clone()]), valuation)
        }
        Formula::Block(prefix, body) => match substitute_nullary(body, valuation) {
            Const(b) => Const(b),
            F(g) => F(Formula::block(prefix.clone(), g)),
        },
    }
}
