//! First-order formulas over purely relational signatures.
//!
//! Quantifiers are grouped into blocks: a [`Formula::Block`] carries a
//! nonempty prefix of `(quantifier, variable)` binders over a body. The
//! parser returns block-maximal trees (see [`infer_blocks`]).

mod fragment;
mod nnf;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use fragment::{
    check_fragment, segment_blocks, Fragment, MembershipReport, Note, Rule, Violation,
};
pub use nnf::{is_nnf, to_nnf};
pub use parse::{parse_formula, parse_problem, Problem};

/// A variable name.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(String);

impl Var {
    pub fn new(name: impl Into<String>) -> Self {
        Var(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var(s.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantifier {
    Forall,
    Exists,
}

impl Quantifier {
    pub fn dual(self) -> Self {
        match self {
            Quantifier::Forall => Quantifier::Exists,
            Quantifier::Exists => Quantifier::Forall,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Quantifier::Forall => "forall",
            Quantifier::Exists => "exists",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Binder {
    pub quantifier: Quantifier,
    pub var: Var,
}

impl Binder {
    pub fn forall(var: impl Into<Var>) -> Self {
        Binder {
            quantifier: Quantifier::Forall,
            var: var.into(),
        }
    }

    pub fn exists(var: impl Into<Var>) -> Self {
        Binder {
            quantifier: Quantifier::Exists,
            var: var.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub relation: String,
    pub args: Vec<Var>,
}

impl Atom {
    /// The set of distinct variables among the arguments.
    pub fn var_set(&self) -> BTreeSet<&Var> {
        self.args.iter().collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(Atom),
    Eq(Var, Var),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Block(Vec<Binder>, Box<Formula>),
}

impl Formula {
    pub fn atom<I, V>(relation: &str, args: I) -> Formula
    where
        I: IntoIterator<Item = V>,
        V: Into<Var>,
    {
        Formula::Atom(Atom {
            relation: relation.to_string(),
            args: args.into_iter().map(Into::into).collect(),
        })
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    pub fn block(prefix: Vec<Binder>, body: Formula) -> Formula {
        Formula::Block(prefix, Box::new(body))
    }

    pub fn forall<I: IntoIterator<Item = &'static str>>(vars: I, body: Formula) -> Formula {
        Formula::block(vars.into_iter().map(Binder::forall).collect(), body)
    }

    pub fn exists<I: IntoIterator<Item = &'static str>>(vars: I, body: Formula) -> Formula {
        Formula::block(vars.into_iter().map(Binder::exists).collect(), body)
    }

    /// Immediate subformulas, in locator order.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(_) | Formula::Eq(..) => Vec::new(),
            Formula::Not(f) | Formula::Block(_, f) => vec![f],
            Formula::And(fs) | Formula::Or(fs) => fs.iter().collect(),
            Formula::Imp(a, b) => vec![a, b],
        }
    }

    /// Subformula at a child-index path.
    pub fn at(&self, path: &[usize]) -> Option<&Formula> {
        let mut cur = self;
        for &i in path {
            cur = *cur.children().get(i)?;
        }
        Some(cur)
    }

    /// Number of nodes plus atom arguments and binders.
    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(a) => 1 + a.args.len(),
            Formula::Eq(..) => 3,
            Formula::Not(f) => 1 + f.size(),
            Formula::And(fs) | Formula::Or(fs) => 1 + fs.iter().map(Formula::size).sum::<usize>(),
            Formula::Imp(a, b) => 1 + a.size() + b.size(),
            Formula::Block(p, f) => 1 + p.len() + f.size(),
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Atom(_) | Formula::Eq(..) => true,
            Formula::Block(..) => false,
            _ => self.children().into_iter().all(Formula::is_quantifier_free),
        }
    }

    pub fn contains_equality(&self) -> bool {
        match self {
            Formula::Eq(..) => true,
            Formula::Atom(_) => false,
            _ => self.children().into_iter().any(Formula::contains_equality),
        }
    }

    /// Number of quantifier blocks.
    pub fn block_count(&self) -> usize {
        let own = usize::from(matches!(self, Formula::Block(..)));
        own + self
            .children()
            .into_iter()
            .map(Formula::block_count)
            .sum::<usize>()
    }

    /// Every atom occurring in the formula, in left-to-right order.
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        fn go<'a>(f: &'a Formula, out: &mut Vec<&'a Atom>) {
            if let Formula::Atom(a) = f {
                out.push(a);
            }
            for c in f.children() {
                go(c, out);
            }
        }
        go(self, &mut out);
        out
    }

    /// Names of every variable occurring free or bound.
    pub fn all_variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        fn go(f: &Formula, out: &mut BTreeSet<Var>) {
            match f {
                Formula::Atom(a) => out.extend(a.args.iter().cloned()),
                Formula::Eq(x, y) => {
                    out.insert(x.clone());
                    out.insert(y.clone());
                }
                Formula::Block(p, _) => out.extend(p.iter().map(|b| b.var.clone())),
                _ => {}
            }
            for c in f.children() {
                go(c, out);
            }
        }
        go(self, &mut out);
        out
    }
}

/// Standard free-variable set.
pub fn free_variables(f: &Formula) -> BTreeSet<Var> {
    match f {
        Formula::Atom(a) => a.args.iter().cloned().collect(),
        Formula::Eq(x, y) => [x.clone(), y.clone()].into_iter().collect(),
        Formula::Block(prefix, body) => {
            let mut fv = free_variables(body);
            for b in prefix {
                fv.remove(&b.var);
            }
            fv
        }
        _ => f.children().into_iter().flat_map(free_variables).collect(),
    }
}

/// Merges directly nested quantifier blocks into maximal blocks. A chain of
/// nested prefixes is regrouped from the outside in; a new block starts only
/// where a variable would be bound twice.
pub fn infer_blocks(f: &Formula) -> Formula {
    match f {
        Formula::Atom(_) | Formula::Eq(..) => f.clone(),
        Formula::Not(g) => Formula::not(infer_blocks(g)),
        Formula::And(fs) => Formula::And(fs.iter().map(infer_blocks).collect()),
        Formula::Or(fs) => Formula::Or(fs.iter().map(infer_blocks).collect()),
        Formula::Imp(a, b) => Formula::imp(infer_blocks(a), infer_blocks(b)),
        Formula::Block(prefix, body) => {
            let mut chain = prefix.clone();
            let mut cur: &Formula = body;
            while let Formula::Block(p, b) = cur {
                chain.extend(p.iter().cloned());
                cur = b;
            }
            let mut groups: Vec<Vec<Binder>> = vec![Vec::new()];
            for b in chain {
                let last = groups.last_mut().expect("non-empty");
                if last.iter().any(|o| o.var == b.var) {
                    groups.push(vec![b]);
                } else {
                    last.push(b);
                }
            }
            groups
                .into_iter()
                .rev()
                .fold(infer_blocks(cur), |acc, g| Formula::block(g, acc))
        }
    }
}

/// A finite relational signature. Constants and function symbols do not exist.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    relations: BTreeMap<String, usize>,
    pub equality_allowed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("relation `{0}` declared twice")]
    Duplicate(String),
}

impl Signature {
    pub fn new() -> Self {
        Signature::default()
    }

    /// Builds a signature from `(name, arity)` pairs; later duplicates are an error.
    pub fn from_relations<'a, I>(rels: I) -> Result<Self, SignatureError>
    where
        I: IntoIterator<Item = (&'a str, usize)>,
    {
        let mut sig = Signature::new();
        for (name, arity) in rels {
            sig.declare(name, arity)?;
        }
        Ok(sig)
    }

    pub fn with_equality(mut self, allowed: bool) -> Self {
        self.equality_allowed = allowed;
        self
    }

    pub fn declare(&mut self, name: &str, arity: usize) -> Result<(), SignatureError> {
        if self.relations.contains_key(name) {
            return Err(SignatureError::Duplicate(name.to_string()));
        }
        self.relations.insert(name.to_string(), arity);
        Ok(())
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.relations.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.relations.contains_key(name)
    }

    /// Relations in name order.
    pub fn relations(&self) -> impl Iterator<Item = (&str, usize)> {
        self.relations.iter().map(|(n, a)| (n.as_str(), *a))
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn max_arity(&self) -> usize {
        self.relations.values().copied().max().unwrap_or(0)
    }

    /// Names of the 0-ary relations, in name order.
    pub fn nullary(&self) -> Vec<String> {
        self.relations
            .iter()
            .filter(|(_, &a)| a == 0)
            .map(|(n, _)| n.clone())
            .collect()
    }

    /// The same signature without its 0-ary relations.
    pub fn without_nullary(&self) -> Signature {
        Signature {
            relations: self
                .relations
                .iter()
                .filter(|(_, &a)| a > 0)
                .map(|(n, a)| (n.clone(), *a))
                .collect(),
            equality_allowed: self.equality_allowed,
        }
    }

    /// Restriction to the relations named in `names`.
    pub fn restrict<'a, I: IntoIterator<Item = &'a str>>(&self, names: I) -> Signature {
        let keep: BTreeSet<&str> = names.into_iter().collect();
        Signature {
            relations: self
                .relations
                .iter()
                .filter(|(n, _)| keep.contains(n.as_str()))
                .map(|(n, a)| (n.clone(), *a))
                .collect(),
            equality_allowed: self.equality_allowed,
        }
    }

    /// `(decl NAME ARITY)` lines for every relation.
    pub fn render_decls(&self) -> String {
        let mut out = String::new();
        for (n, a) in self.relations() {
            out.push_str(&format!("(decl {n} {a})\n"));
        }
        out
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => {
                write!(f, "({}", a.relation)?;
                for v in &a.args {
                    write!(f, " {v}")?;
                }
                write!(f, ")")
            }
            Formula::Eq(x, y) => write!(f, "(= {x} {y})"),
            Formula::Not(g) => write!(f, "(not {g})"),
            Formula::And(fs) | Formula::Or(fs) => {
                let op = if matches!(self, Formula::And(_)) {
                    "and"
                } else {
                    "or"
                };
                write!(f, "({op}")?;
                for g in fs {
                    write!(f, " {g}")?;
                }
                write!(f, ")")
            }
            Formula::Imp(a, b) => write!(f, "(imp {a} {b})"),
            Formula::Block(prefix, body) => {
                // one s-expression per run of equal quantifiers
                let mut runs: Vec<(Quantifier, Vec<&Var>)> = Vec::new();
                for b in prefix {
                    match runs.last_mut() {
                        Some((q, vs)) if *q == b.quantifier => vs.push(&b.var),
                        _ => runs.push((b.quantifier, vec![&b.var])),
                    }
                }
                for (q, vs) in &runs {
                    write!(f, "({} (", q.keyword())?;
                    for (i, v) in vs.iter().enumerate() {
                        if i > 0 {
                            write!(f, " ")?;
                        }
                        write!(f, "{v}")?;
                    }
                    write!(f, ") ")?;
                }
                write!(f, "{body}")?;
                for _ in &runs {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

/// Renders a formula in the s-expression grammar accepted by [`parse_formula`].
pub fn render_formula(f: &Formula) -> String {
    f.to_string()
}
