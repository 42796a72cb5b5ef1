//! `(forest (domain N) (tree I node*) …)` with trees numbered from 1 and
//! `node := (u LABEL node+) | (e LABEL node?) | (leaf LABEL (pre entry*))`.
//! A `pre` entry is a covering atom `(R (i j …) true|false)` or a 1-type
//! `(type i (R true|false) …)`.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::{NodeKind, SatisfactionForest, SatisfactionTree};
use crate::formula::Signature;
use crate::semantics::{Fact, PreStructure};
use crate::sexpr::{read_all, ParseError, SExpr};

pub fn render_forest(fst: &SatisfactionForest) -> String {
    let mut out = String::new();
    writeln!(out, "(forest (domain {})", fst.domain).unwrap();
    for t in &fst.trees {
        write!(out, "  (tree {}", t.conjunct + 1).unwrap();
        for &r in &t.roots {
            out.push('\n');
            render_node(&mut out, t, r, 2);
        }
        out.push(')');
        out.push('\n');
    }
    out.push(')');
    out.push('\n');
    out
}

fn render_node(out: &mut String, t: &SatisfactionTree, n: usize, depth: usize) {
    let node = &t.nodes[n];
    let pad = "  ".repeat(depth);
    match (&node.pre, node.kind) {
        (Some(pre), _) => {
            write!(out, "{pad}(leaf {} {})", node.label, render_pre(pre)).unwrap();
            return;
        }
        (None, NodeKind::Universal) => write!(out, "{pad}(u {}", node.label).unwrap(),
        (None, NodeKind::Existential) => write!(out, "{pad}(e {}", node.label).unwrap(),
    }
    for &c in &node.children {
        out.push('\n');
        render_node(out, t, c, depth + 1);
    }
    out.push(')');
}

fn render_pre(p: &PreStructure) -> String {
    let mut parts = vec!["pre".to_string()];
    if p.elements.len() > 1 {
        for (fact, v) in p.covering() {
            let args: Vec<String> = fact.args.iter().map(|a| a.to_string()).collect();
            parts.push(format!("({} ({}) {v})", fact.relation, args.join(" ")));
        }
    }
    for &e in &p.elements {
        let ty = p.type_of(e).expect("element of the pre-structure");
        let mut entry = format!("(type {e}");
        for (r, v) in &ty.0 {
            write!(entry, " ({r} {v})").unwrap();
        }
        entry.push(')');
        parts.push(entry);
    }
    format!("({})", parts.join(" "))
}

/// Parses a forest; 1-type entries are expanded using the arities in `sig`.
pub fn parse_forest(text: &str, sig: &Signature) -> Result<SatisfactionForest, ParseError> {
    let items = read_all(text)?;
    let [top] = items.as_slice() else {
        return Err(ParseError::new(
            Default::default(),
            "expected a single (forest …) form",
        ));
    };
    let parts = top.expect_list("(forest …)")?;
    if top.head() != Some("forest") || parts.len() < 2 {
        return Err(ParseError::new(
            top.pos(),
            "expected (forest (domain N) tree*)",
        ));
    }
    let dom = parts[1].expect_list("(domain N)")?;
    if parts[1].head() != Some("domain") || dom.len() != 2 {
        return Err(ParseError::new(parts[1].pos(), "expected (domain N)"));
    }
    let domain = dom[1].expect_usize("domain size")?;
    let mut trees = Vec::new();
    for t in &parts[2..] {
        let tp = t.expect_list("(tree I node*)")?;
        if t.head() != Some("tree") || tp.len() < 2 {
            return Err(ParseError::new(t.pos(), "expected (tree I node*)"));
        }
        let index = tp[1].expect_usize("tree index")?;
        if index == 0 {
            return Err(ParseError::new(tp[1].pos(), "trees are numbered from 1"));
        }
        let mut tree = SatisfactionTree::new(index - 1);
        for n in &tp[2..] {
            parse_node(n, &mut tree, None, sig)?;
        }
        trees.push(tree);
    }
    Ok(SatisfactionForest { domain, trees })
}

fn parse_node(
    e: &SExpr,
    tree: &mut SatisfactionTree,
    parent: Option<usize>,
    sig: &Signature,
) -> Result<(), ParseError> {
    let parts = e.expect_list("forest node")?;
    let head = e.head().unwrap_or("");
    if parts.len() < 2 {
        return Err(ParseError::new(e.pos(), "node needs a label"));
    }
    let label = parts[1].expect_usize("node label")?;
    match head {
        "u" | "e" => {
            let kind = if head == "u" {
                NodeKind::Universal
            } else {
                NodeKind::Existential
            };
            let id = tree.push(parent, kind, label);
            for c in &parts[2..] {
                parse_node(c, tree, Some(id), sig)?;
            }
        }
        "leaf" => {
            let [_, _, pre] = parts else {
                return Err(ParseError::new(e.pos(), "expected (leaf LABEL (pre …))"));
            };
            let id = tree.push(parent, NodeKind::Existential, label);
            tree.nodes[id].pre = Some(parse_pre(pre, sig)?);
        }
        _ => {
            return Err(ParseError::new(
                e.pos(),
                "expected (u …), (e …) or (leaf …)",
            ))
        }
    }
    Ok(())
}

fn parse_bool(e: &SExpr) -> Result<bool, ParseError> {
    match e.as_symbol() {
        Some("true") => Ok(true),
        Some("false") => Ok(false),
        _ => Err(ParseError::new(e.pos(), "expected true or false")),
    }
}

fn parse_pre(e: &SExpr, sig: &Signature) -> Result<PreStructure, ParseError> {
    let parts = e.expect_list("(pre …)")?;
    if e.head() != Some("pre") {
        return Err(ParseError::new(e.pos(), "expected (pre …)"));
    }
    let mut truth = BTreeMap::new();
    let mut elements = std::collections::BTreeSet::new();
    for entry in &parts[1..] {
        let p = entry.expect_list("pre-structure entry")?;
        match entry.head() {
            Some("type") if p.len() >= 2 => {
                let el = p[1].expect_usize("element")?;
                elements.insert(el);
                for a in &p[2..] {
                    let ap = a.expect_list("(R true|false)")?;
                    let [r, v] = ap else {
                        return Err(ParseError::new(a.pos(), "expected (R true|false)"));
                    };
                    let name = r.expect_symbol("relation name")?;
                    let arity = match sig.arity(name) {
                        Some(k) if k > 0 => k,
                        _ => {
                            return Err(ParseError::new(
                                r.pos(),
                                format!("unknown relation `{name}`"),
                            ))
                        }
                    };
                    truth.insert(Fact::new(name, vec![el; arity]), parse_bool(v)?);
                }
            }
            Some(name) if p.len() == 3 => {
                if sig.arity(name).is_none() {
                    return Err(ParseError::new(
                        p[0].pos(),
                        format!("unknown relation `{name}`"),
                    ));
                }
                let args = p[1]
                    .expect_list("argument tuple")?
                    .iter()
                    .map(|x| x.expect_usize("element"))
                    .collect::<Result<Vec<_>, _>>()?;
                elements.extend(args.iter().copied());
                truth.insert(Fact::new(name, args), parse_bool(&p[2])?);
            }
            _ => {
                return Err(ParseError::new(
                    entry.pos(),
                    "expected (R (i …) true|false) or (type i …)",
                ))
            }
        }
    }
    Ok(PreStructure { elements, truth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::extract_forest;
    use crate::formula::parse_problem;
    use crate::normal_form::{to_weak_normal_form, zero_ary_branches};
    use crate::semantics::Structure;

    #[test]
    fn round_trip() {
        let p = parse_problem(
            "(decl R 2) (decl P 1) (forall (x) (exists (y) (and (R x y) (not (P y)))))",
            false,
        )
        .unwrap();
        let w = to_weak_normal_form(&p.formula, &p.signature).unwrap();
        let nf = zero_ary_branches(&w).remove(0).normal_form;
        let s = Structure::parse(
            "(size 3) (rel R (0 1) (1 2) (2 2)) (rel P (0))",
            &nf.signature,
        )
        .unwrap();
        let f = extract_forest(&s, &nf).unwrap();
        let text = render_forest(&f);
        assert!(text.starts_with("(forest (domain 3)\n  (tree 1\n    (u 0\n      (leaf 1 (pre (R (0 1) true) (R (1 0) false)"));
        assert_eq!(parse_forest(&text, &nf.signature).unwrap(), f);
    }

    #[test]
    fn malformed_nodes_are_rejected() {
        let sig = Signature::from_relations([("R", 2)]).unwrap();
        assert!(parse_forest("(forest (domain 2) (tree 1 (x 0)))", &sig).is_err());
        assert!(parse_forest("(forest (domain 2) (tree 0))", &sig).is_err());
        let err = parse_forest(
            "(forest (domain 2)\n (tree 1 (leaf 0 (pre (Q (0) true)))))",
            &sig,
        )
        .unwrap_err();
        assert_eq!(err.pos.line, 2);
    }
}
