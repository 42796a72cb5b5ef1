use super::{FreshKind, NormalFormError, Rewrite, WeakNormalForm, WnfConjunct};
use crate::formula::{free_variables, segment_blocks, Binder, Formula, Fragment, Signature, Var};
use crate::semantics::{evaluate, Assignment, Evaluator, Structure};

struct Rewriter {
    signature: Signature,
    conjuncts: Vec<WnfConjunct>,
    trace: Vec<Rewrite>,
    next_unary: usize,
    next_nullary: usize,
}

impl Rewriter {
    fn fresh(&mut self, kind: FreshKind) -> String {
        loop {
            let name = match kind {
                FreshKind::Unary => {
                    self.next_unary += 1;
                    format!("@P_{}", self.next_unary)
                }
                FreshKind::Nullary => {
                    self.next_nullary += 1;
                    format!("@E_{}", self.next_nullary)
                }
            };
            if !self.signature.contains(&name) {
                let arity = usize::from(kind == FreshKind::Unary);
                self.signature
                    .declare(&name, arity)
                    .expect("name checked to be unused");
                return name;
            }
        }
    }

    /// Abbreviates every block inside `f`, innermost-leftmost first.
    fn rewrite(&mut self, f: &Formula, path: &mut Vec<usize>) -> Result<Formula, NormalFormError> {
        let mut sub = |g: &Formula, i: usize, me: &mut Self| -> Result<Formula, NormalFormError> {
            path.push(i);
            let r = me.rewrite(g, path);
            path.pop();
            r
        };
        Ok(match f {
            Formula::Atom(_) | Formula::Eq(..) => f.clone(),
            Formula::Not(g) => Formula::not(sub(g, 0, self)?),
            Formula::And(gs) | Formula::Or(gs) => {
                let mut out = Vec::with_capacity(gs.len());
                for (i, g) in gs.iter().enumerate() {
                    out.push(sub(g, i, self)?);
                }
                if matches!(f, Formula::And(_)) {
                    Formula::And(out)
                } else {
                    Formula::Or(out)
                }
            }
            Formula::Imp(a, b) => Formula::imp(sub(a, 0, self)?, sub(b, 1, self)?),
            Formula::Block(prefix, body) => {
                let body = sub(body, 0, self)?;
                let block = Formula::block(prefix.clone(), body.clone());
                let fv: Vec<Var> = free_variables(&block).into_iter().collect();
                match fv.as_slice() {
                    [] => {
                        let e = self.fresh(FreshKind::Nullary);
                        self.conjuncts.push(WnfConjunct {
                            guard: Some(e.clone()),
                            prefix: prefix.clone(),
                            matrix: body,
                        });
                        self.trace.push(Rewrite {
                            locator: path.clone(),
                            symbol: e.clone(),
                            kind: FreshKind::Nullary,
                            variable: None,
                            replaced: block,
                        });
                        Formula::atom(&e, Vec::<Var>::new())
                    }
                    [y] => {
                        let p = self.fresh(FreshKind::Unary);
                        let mut full = vec![Binder::forall(y.clone())];
                        full.extend(prefix.iter().cloned());
                        self.conjuncts.push(WnfConjunct {
                            guard: None,
                            prefix: full,
                            matrix: Formula::Or(vec![
                                Formula::not(Formula::atom(&p, [y.clone()])),
                                body,
                            ]),
                        });
                        self.trace.push(Rewrite {
                            locator: path.clone(),
                            symbol: p.clone(),
                            kind: FreshKind::Unary,
                            variable: Some(y.clone()),
                            replaced: block,
                        });
                        Formula::atom(&p, [y.clone()])
                    }
                    _ => return Err(NormalFormError::TooManyFree(fv)),
                }
            }
        })
    }
}

fn flatten_and<'a>(
    f: &'a Formula,
    path: &mut Vec<usize>,
    out: &mut Vec<(Vec<usize>, &'a Formula)>,
) {
    match f {
        Formula::And(gs) => {
            for (i, g) in gs.iter().enumerate() {
                path.push(i);
                flatten_and(g, path, out);
                path.pop();
            }
        }
        _ => out.push((path.clone(), f)),
    }
}

/// Rewrites a closed AUF₁⁻ sentence into conjuncts of the shapes
/// `Q̄ ψ` and `E → Q̄ ψ` plus at most one quantifier-free conjunct over 0-ary
/// symbols. Each inner block with one free variable `y` becomes a fresh
/// unary `@P_n(y)` with the conjunct `∀y Q̄ (¬@P_n(y) ∨ ψ)`; each inner
/// subsentence becomes a fresh 0-ary `@E_n` guarding its block.
pub fn to_weak_normal_form(
    f: &Formula,
    sig: &Signature,
) -> Result<WeakNormalForm, NormalFormError> {
    let fv = free_variables(f);
    if !fv.is_empty() {
        return Err(NormalFormError::NotClosed(fv.into_iter().collect()));
    }
    let (segmented, _) = segment_blocks(f, Fragment::Auf1Minus, sig.equality_allowed)
        .map_err(NormalFormError::Fragment)?;
    let mut rw = Rewriter {
        signature: sig.clone(),
        conjuncts: Vec::new(),
        trace: Vec::new(),
        next_unary: 0,
        next_nullary: 0,
    };
    let mut items = Vec::new();
    flatten_and(&segmented, &mut Vec::new(), &mut items);
    let mut top = Vec::new();
    let mut own = Vec::new();
    for (mut path, item) in items {
        match item {
            Formula::Block(prefix, body) => {
                path.push(0);
                let matrix = rw.rewrite(body, &mut path)?;
                own.push(WnfConjunct {
                    guard: None,
                    prefix: prefix.clone(),
                    matrix,
                });
            }
            other => top.push(rw.rewrite(other, &mut path)?),
        }
    }
    let mut conjuncts = Vec::new();
    if !top.is_empty() {
        let matrix = if top.len() == 1 {
            top.pop().expect("one item")
        } else {
            Formula::And(top)
        };
        conjuncts.push(WnfConjunct {
            guard: None,
            prefix: Vec::new(),
            matrix,
        });
    }
    conjuncts.extend(own);
    conjuncts.extend(rw.conjuncts);
    Ok(WeakNormalForm {
        conjuncts,
        signature: rw.signature,
        trace: rw.trace,
    })
}

/// Expands a model of `f` to the signature of `w`, interpreting each fresh
/// unary symbol by the truth set of the block it abbreviates and each fresh
/// 0-ary symbol by the truth value of its subsentence.
pub fn expand_model(
    s: &Structure,
    f: &Formula,
    w: &WeakNormalForm,
) -> Result<Structure, NormalFormError> {
    let holds = evaluate(s, f, &Assignment::new())
        .map_err(|e| NormalFormError::Structure(e.to_string()))?;
    if !holds {
        return Err(NormalFormError::NotAModel);
    }
    let mut out = s.clone();
    let structure_err =
        |e: crate::semantics::StructureError| NormalFormError::Structure(e.to_string());
    for r in &w.trace {
        let ev = Evaluator::new(&r.replaced);
        match (&r.kind, &r.variable) {
            (FreshKind::Unary, Some(y)) => {
                out.add_relation(&r.symbol, 1).map_err(structure_err)?;
                for a in 0..out.size() {
                    let asg: Assignment = [(y.clone(), a)].into_iter().collect();
                    let v = ev
                        .eval(&out, &asg)
                        .map_err(|e| NormalFormError::Structure(e.to_string()))?;
                    out.set(&r.symbol, &[a], v).map_err(structure_err)?;
                }
            }
            _ => {
                out.add_relation(&r.symbol, 0).map_err(structure_err)?;
                let v = ev
                    .holds(&out)
                    .map_err(|e| NormalFormError::Structure(e.to_string()))?;
                out.set(&r.symbol, &[], v).map_err(structure_err)?;
            }
        }
    }
    Ok(out)
}
