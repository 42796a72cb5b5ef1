use std::collections::BTreeSet;

use super::{infer_blocks, Atom, Binder, Formula, Quantifier, Signature, Var};
use crate::sexpr::{read_all, ParseError, SExpr};

const KEYWORDS: &[&str] = &["decl", "not", "and", "or", "imp", "forall", "exists", "="];

/// A parsed input file: declarations plus one formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    pub signature: Signature,
    pub formula: Formula,
}

fn check_name(s: &SExpr, what: &str) -> Result<String, ParseError> {
    let name = s.expect_symbol(what)?;
    if KEYWORDS.contains(&name) {
        return Err(ParseError::new(
            s.pos(),
            format!("keyword `{name}` used as {what}"),
        ));
    }
    Ok(name.to_string())
}

/// Parses a single formula over `sig`. Open formulas are accepted. Nested
/// quantifiers are merged into maximal blocks.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    let items = read_all(text)?;
    match items.as_slice() {
        [one] => Ok(infer_blocks(&formula_from_sexpr(one, sig)?)),
        [] => Err(ParseError::new(Default::default(), "empty input")),
        [_, extra, ..] => Err(ParseError::new(extra.pos(), "trailing input after formula")),
    }
}

/// Parses `decl* formula`.
pub fn parse_problem(text: &str, allow_equality: bool) -> Result<Problem, ParseError> {
    let items = read_all(text)?;
    let mut sig = Signature::new().with_equality(allow_equality);
    let mut rest = items.as_slice();
    while let Some((first, tail)) = rest.split_first() {
        if first.head() != Some("decl") {
            break;
        }
        let parts = first.expect_list("declaration")?;
        if parts.len() != 3 {
            return Err(ParseError::new(first.pos(), "expected (decl NAME ARITY)"));
        }
        let name = check_name(&parts[1], "relation name")?;
        let arity = parts[2].expect_usize("arity")?;
        sig.declare(&name, arity)
            .map_err(|e| ParseError::new(parts[1].pos(), e.to_string()))?;
        rest = tail;
    }
    match rest {
        [one] => Ok(Problem {
            formula: infer_blocks(&formula_from_sexpr(one, &sig)?),
            signature: sig,
        }),
        [] => Err(ParseError::new(Default::default(), "missing formula")),
        [_, extra, ..] => Err(ParseError::new(extra.pos(), "trailing input after formula")),
    }
}

fn formula_from_sexpr(e: &SExpr, sig: &Signature) -> Result<Formula, ParseError> {
    let items = e.expect_list("formula")?;
    let Some((head, args)) = items.split_first() else {
        return Err(ParseError::new(e.pos(), "empty formula"));
    };
    let head_name = head.expect_symbol("connective or relation name")?;
    let sub = |s: &SExpr| formula_from_sexpr(s, sig);
    match head_name {
        "not" => match args {
            [g] => Ok(Formula::not(sub(g)?)),
            _ => Err(ParseError::new(e.pos(), "`not` takes one formula")),
        },
        "and" | "or" => {
            // `(and)` is true and `(or)` is false.
            let fs = args.iter().map(sub).collect::<Result<Vec<_>, _>>()?;
            Ok(if head_name == "and" {
                Formula::And(fs)
            } else {
                Formula::Or(fs)
            })
        }
        "imp" => match args {
            [a, b] => Ok(Formula::imp(sub(a)?, sub(b)?)),
            _ => Err(ParseError::new(e.pos(), "`imp` takes two formulas")),
        },
        "forall" | "exists" => {
            let [vars, body] = args else {
                return Err(ParseError::new(
                    e.pos(),
                    format!("expected ({head_name} (VAR+) FORMULA)"),
                ));
            };
            let q = if head_name == "forall" {
                Quantifier::Forall
            } else {
                Quantifier::Exists
            };
            let vars = vars.expect_list("variable list")?;
            if vars.is_empty() {
                return Err(ParseError::new(e.pos(), "empty variable list"));
            }
            let mut seen = BTreeSet::new();
            let mut prefix = Vec::new();
            for v in vars {
                let name = check_name(v, "variable")?;
                if !seen.insert(name.clone()) {
                    return Err(ParseError::new(
                        v.pos(),
                        format!("variable `{name}` bound twice in one block"),
                    ));
                }
                prefix.push(Binder {
                    quantifier: q,
                    var: Var(name),
                });
            }
            Ok(Formula::block(prefix, sub(body)?))
        }
        "=" => {
            if !sig.equality_allowed {
                return Err(ParseError::new(
                    e.pos(),
                    "equality is not enabled for this signature",
                ));
            }
            match args {
                [x, y] => Ok(Formula::Eq(
                    Var(check_name(x, "variable")?),
                    Var(check_name(y, "variable")?),
                )),
                _ => Err(ParseError::new(e.pos(), "`=` takes two variables")),
            }
        }
        "decl" => Err(ParseError::new(
            e.pos(),
            "declarations must precede the formula",
        )),
        rel => {
            let Some(arity) = sig.arity(rel) else {
                return Err(ParseError::new(
                    head.pos(),
                    format!("undeclared relation `{rel}`"),
                ));
            };
            if args.len() != arity {
                return Err(ParseError::new(
                    e.pos(),
                    format!(
                        "relation `{rel}` has arity {arity} but is applied to {} arguments",
                        args.len()
                    ),
                ));
            }
            let args = args
                .iter()
                .map(|a| check_name(a, "variable").map(Var))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Formula::Atom(Atom {
                relation: rel.to_string(),
                args,
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::render_formula;

    fn sig() -> Signature {
        Signature::from_relations([("P", 1), ("R", 3), ("S", 4), ("T", 2)]).unwrap()
    }

    #[test]
    fn parses_merged_block() {
        let sig = Signature::from_relations([("R", 2)]).unwrap();
        let f = parse_formula("(forall (x) (exists (y) (R x y)))", &sig).unwrap();
        assert_eq!(
            f,
            Formula::block(
                vec![Binder::forall("x"), Binder::exists("y")],
                Formula::atom("R", ["x", "y"])
            )
        );
    }

    #[test]
    fn parses_guarded_triple_example() {
        let text = "(forall (x y z) (imp (and (P x)(P y)(P z)) (or (R x y z) (not (S z z x y)))))";
        let f = parse_formula(text, &sig()).unwrap();
        let Formula::Block(prefix, body) = &f else {
            panic!("expected block")
        };
        assert_eq!(prefix.len(), 3);
        assert!(matches!(body.as_ref(), Formula::Imp(..)));
        assert_eq!(parse_formula(&render_formula(&f), &sig()).unwrap(), f);
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        let sig = Signature::from_relations([("R", 2)]).unwrap();
        let err = parse_formula("(R x)", &sig).unwrap_err();
        assert!(err.message.contains("arity"), "{err}");
    }

    #[test]
    fn undeclared_relation_and_equality_errors() {
        let err = parse_formula("(Q x)", &sig()).unwrap_err();
        assert!(err.message.contains("undeclared"));
        let err = parse_formula("(forall (x y) (= x y))", &sig()).unwrap_err();
        assert!(err.message.contains("equality"));
        let ok = parse_formula("(forall (x y) (= x y))", &sig().with_equality(true));
        assert!(ok.is_ok());
    }

    #[test]
    fn duplicate_block_variable_rejected() {
        let err = parse_formula("(forall (x x) (P x))", &sig()).unwrap_err();
        assert!(err.message.contains("bound twice"));
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_formula("(and\n  (P x)\n  (foo", &sig()).unwrap_err();
        assert_eq!(err.pos.line, 3);
    }

    #[test]
    fn problem_with_declarations() {
        let p = parse_problem(
            "; comment\n(decl P 1)\n(decl E 0)\n(or (E) (exists (x) (P x)))",
            false,
        )
        .unwrap();
        assert_eq!(p.signature.arity("E"), Some(0));
        assert!(matches!(p.formula, Formula::Or(_)));
        assert!(parse_problem("(decl P 1) (decl P 2) (P x)", false).is_err());
        assert!(parse_problem("(decl not 1) (not x)", false).is_err());
    }

    #[test]
    fn empty_connectives_are_constants() {
        assert_eq!(
            parse_formula("(and)", &sig()).unwrap(),
            Formula::And(vec![])
        );
        assert_eq!(parse_formula("(or)", &sig()).unwrap(), Formula::Or(vec![]));
    }
}
