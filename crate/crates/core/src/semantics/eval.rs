//! Tarskian evaluation over finite structures.
//!
//! Formulas are compiled once into a slot-addressed tree so that repeated
//! evaluation (enumeration, model checking of large outputs) avoids name
//! lookups.

use std::collections::BTreeMap;

use thiserror::Error;

use super::structure::Structure;
use crate::formula::{Formula, Quantifier, Var};

/// Values for (some of) the free variables of a formula.
pub type Assignment = BTreeMap<Var, usize>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(Var),
    #[error("relation `{0}` is not interpreted by the structure")]
    UnknownRelation(String),
    #[error(
        "relation `{rel}` has arity {expected} in the structure but is used with {found} arguments"
    )]
    Arity {
        rel: String,
        expected: usize,
        found: usize,
    },
    #[error("element {element} is outside a domain of size {size}")]
    OutOfRange { element: usize, size: usize },
}

#[derive(Clone, Debug)]
pub(crate) enum CNode {
    Atom { rel: usize, args: Box<[usize]> },
    Eq(usize, usize),
    Not(Box<CNode>),
    And(Vec<CNode>),
    Or(Vec<CNode>),
    Quant(Quantifier, usize, Box<CNode>),
}

/// A formula compiled against a list of relation names.
#[derive(Clone, Debug)]
pub(crate) struct Compiled {
    pub root: CNode,
    pub slots: usize,
    /// Free variables with their slots, in name order.
    pub free: Vec<(Var, usize)>,
    /// Relation names referenced by `CNode::Atom::rel`, with their arities.
    pub relations: Vec<(String, usize)>,
}

struct Compiler {
    scope: Vec<(Var, usize)>,
    slots: usize,
    free: Vec<(Var, usize)>,
    relations: Vec<(String, usize)>,
}

impl Compiler {
    fn lookup(&mut self, v: &Var) -> usize {
        if let Some((_, s)) = self.scope.iter().rev().find(|(n, _)| n == v) {
            return *s;
        }
        if let Some((_, s)) = self.free.iter().find(|(n, _)| n == v) {
            return *s;
        }
        let s = self.slots;
        self.slots += 1;
        self.free.push((v.clone(), s));
        s
    }

    fn relation(&mut self, name: &str, arity: usize) -> usize {
        if let Some(i) = self.relations.iter().position(|(n, _)| n == name) {
            return i;
        }
        self.relations.push((name.to_string(), arity));
        self.relations.len() - 1
    }

    fn go(&mut self, f: &Formula) -> CNode {
        match f {
            Formula::Atom(a) => {
                let rel = self.relation(&a.relation, a.args.len());
                let args = a.args.iter().map(|v| self.lookup(v)).collect();
                CNode::Atom { rel, args }
            }
            Formula::Eq(x, y) => CNode::Eq(self.lookup(x), self.lookup(y)),
            Formula::Not(g) => CNode::Not(Box::new(self.go(g))),
            Formula::And(fs) => CNode::And(fs.iter().map(|g| self.go(g)).collect()),
            Formula::Or(fs) => CNode::Or(fs.iter().map(|g| self.go(g)).collect()),
            Formula::Imp(a, b) => {
                let a = self.go(a);
                let b = self.go(b);
                CNode::Or(vec![CNode::Not(Box::new(a)), b])
            }
            Formula::Block(prefix, body) => {
                let mark = self.scope.len();
                let mut slots = Vec::new();
                for b in prefix {
                    let s = self.slots;
                    self.slots += 1;
                    self.scope.push((b.var.clone(), s));
                    slots.push((b.quantifier, s));
                }
                let mut node = self.go(body);
                self.scope.truncate(mark);
                for (q, s) in slots.into_iter().rev() {
                    node = CNode::Quant(q, s, Box::new(node));
                }
                node
            }
        }
    }
}

pub(crate) fn compile(f: &Formula) -> Compiled {
    let mut c = Compiler {
        scope: Vec::new(),
        slots: 0,
        free: Vec::new(),
        relations: Vec::new(),
    };
    let root = c.go(f);
    c.free.sort();
    Compiled {
        root,
        slots: c.slots,
        free: c.free,
        relations: c.relations,
    }
}

impl Compiled {
    /// Relation positions inside `s`, aligned with `self.relations`.
    pub(crate) fn bind(&self, s: &Structure) -> Result<Vec<usize>, EvalError> {
        self.relations
            .iter()
            .map(|(name, arity)| {
                let pos = s
                    .position(name)
                    .ok_or_else(|| EvalError::UnknownRelation(name.clone()))?;
                let expected = s.arity(name).unwrap_or(0);
                if expected != *arity {
                    return Err(EvalError::Arity {
                        rel: name.clone(),
                        expected,
                        found: *arity,
                    });
                }
                Ok(pos)
            })
            .collect()
    }

    /// Initial environment from an assignment covering the free variables.
    pub(crate) fn env(&self, s: &Structure, a: &Assignment) -> Result<Vec<usize>, EvalError> {
        let mut env = vec![0; self.slots];
        for (v, slot) in &self.free {
            let e = *a
                .get(v)
                .ok_or_else(|| EvalError::UnboundVariable(v.clone()))?;
            if e >= s.size() {
                return Err(EvalError::OutOfRange {
                    element: e,
                    size: s.size(),
                });
            }
            env[*slot] = e;
        }
        Ok(env)
    }
}

pub(crate) fn eval_node(
    node: &CNode,
    s: &Structure,
    rels: &[usize],
    env: &mut [usize],
    buf: &mut Vec<usize>,
) -> bool {
    match node {
        CNode::Atom { rel, args } => {
            let mark = buf.len();
            buf.extend(args.iter().map(|&a| env[a]));
            let v = s.holds_at(rels[*rel], &buf[mark..]);
            buf.truncate(mark);
            v
        }
        CNode::Eq(x, y) => env[*x] == env[*y],
        CNode::Not(g) => !eval_node(g, s, rels, env, buf),
        CNode::And(gs) => gs.iter().all(|g| eval_node(g, s, rels, env, buf)),
        CNode::Or(gs) => gs.iter().any(|g| eval_node(g, s, rels, env, buf)),
        CNode::Quant(q, slot, body) => {
            let saved = env[*slot];
            let want = *q == Quantifier::Exists;
            let mut result = !want;
            for e in 0..s.size() {
                env[*slot] = e;
                if eval_node(body, s, rels, env, buf) == want {
                    result = want;
                    break;
                }
            }
            env[*slot] = saved;
            result
        }
    }
}

/// A formula prepared for repeated evaluation.
#[derive(Clone, Debug)]
pub struct Evaluator {
    compiled: Compiled,
}

impl Evaluator {
    pub fn new(f: &Formula) -> Self {
        Evaluator {
            compiled: compile(f),
        }
    }

    pub fn eval(&self, s: &Structure, a: &Assignment) -> Result<bool, EvalError> {
        let rels = self.compiled.bind(s)?;
        let mut env = self.compiled.env(s, a)?;
        Ok(eval_node(
            &self.compiled.root,
            s,
            &rels,
            &mut env,
            &mut Vec::new(),
        ))
    }

    /// Evaluates a sentence (or a formula whose free variables are unused).
    pub fn holds(&self, s: &Structure) -> Result<bool, EvalError> {
        self.eval(s, &Assignment::new())
    }
}

/// Standard first-order truth value of `f` in `s` under `a`.
pub fn evaluate(s: &Structure, f: &Formula, a: &Assignment) -> Result<bool, EvalError> {
    Evaluator::new(f).eval(s, a)
}
