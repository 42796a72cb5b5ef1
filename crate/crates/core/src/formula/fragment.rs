//! Membership checks for sUF1, AUF1, AUF1⁻ and FO².
//!
//! A parsed formula only shows maximal quantifier chains, while the
//! formation rules build formulas from explicit blocks. A chain is accepted
//! when some split into consecutive segments satisfies the rules for every
//! segment. The split with the fewest segments is kept (ties go to the
//! longest outermost segment) and is what [`segment_blocks`] returns.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::nnf::to_nnf;
use super::{free_variables, infer_blocks, Atom, Binder, Formula, Quantifier, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Fragment {
    /// Strongly uniform one-dimensional fragment: homogeneous blocks.
    SUf1,
    /// Uniform one-dimensional fragment with alternation inside blocks.
    Auf1,
    /// AUF1 in NNF where each block is all-universal or ends existentially.
    Auf1Minus,
    /// Two-variable fragment.
    Fo2,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown fragment `{0}` (expected one of suf1, auf1, auf1m, fo2)")]
pub struct UnknownFragment(pub String);

impl FromStr for Fragment {
    type Err = UnknownFragment;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "suf1" => Ok(Fragment::SUf1),
            "auf1" => Ok(Fragment::Auf1),
            "auf1m" | "auf1minus" | "auf1-" => Ok(Fragment::Auf1Minus),
            "fo2" => Ok(Fragment::Fo2),
            _ => Err(UnknownFragment(s.to_string())),
        }
    }
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fragment::SUf1 => "sUF1",
            Fragment::Auf1 => "AUF1",
            Fragment::Auf1Minus => "AUF1minus",
            Fragment::Fo2 => "FO2",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    OneDimensionality,
    Uniformity,
    BlockShape,
    VariableCount,
    EqualityUse,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::OneDimensionality => "one-dimensionality",
            Rule::Uniformity => "uniformity",
            Rule::BlockShape => "block-shape",
            Rule::VariableCount => "variable-count",
            Rule::EqualityUse => "equality-use",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Child-index path into the checked formula.
    pub path: Vec<usize>,
    pub subformula: String,
    pub rule: Rule,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at {}: {} [{}]",
            self.rule,
            fmt_path(&self.path),
            self.detail,
            self.subformula
        )
    }
}

/// Informational remarks that do not affect acceptance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Note {
    ConvertedToNnf,
    VacuousBinding { path: Vec<usize>, var: Var },
    EqualityPresent,
}

impl fmt::Display for Note {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Note::ConvertedToNnf => write!(f, "formula converted to NNF before checking"),
            Note::VacuousBinding { path, var } => write!(
                f,
                "variable `{var}` bound at {} does not occur in its matrix",
                fmt_path(path)
            ),
            Note::EqualityPresent => write!(
                f,
                "equality used freely; finite-model guarantees do not cover it"
            ),
        }
    }
}

fn fmt_path(path: &[usize]) -> String {
    if path.is_empty() {
        return "/".to_string();
    }
    path.iter().map(|i| format!("/{i}")).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipReport {
    pub fragment: Fragment,
    pub accepted: bool,
    pub violations: Vec<Violation>,
    pub notes: Vec<Note>,
}

/// Checks `f` against the formation rules of `fragment`.
pub fn check_fragment(f: &Formula, fragment: Fragment, equality_allowed: bool) -> MembershipReport {
    match segment_blocks(f, fragment, equality_allowed) {
        Ok((_, report)) | Err(report) => report,
    }
}

/// Like [`check_fragment`], but on success also returns the formula with its
/// quantifier chains split into the accepted segments (after NNF for AUF1⁻).
pub fn segment_blocks(
    f: &Formula,
    fragment: Fragment,
    equality_allowed: bool,
) -> Result<(Formula, MembershipReport), MembershipReport> {
    let mut notes = Vec::new();
    let input = if fragment == Fragment::Auf1Minus {
        notes.push(Note::ConvertedToNnf);
        infer_blocks(&to_nnf(f))
    } else {
        infer_blocks(f)
    };
    let mut violations = Vec::new();

    if input.contains_equality() {
        if !equality_allowed || fragment == Fragment::SUf1 {
            let detail = if equality_allowed {
                "sUF1 is defined without equality"
            } else {
                "equality is not enabled"
            };
            for (path, g) in find_equalities(&input) {
                violations.push(Violation {
                    path,
                    subformula: g.to_string(),
                    rule: Rule::EqualityUse,
                    detail: detail.to_string(),
                });
            }
        } else {
            notes.push(Note::EqualityPresent);
        }
    }

    let segmented = if fragment == Fragment::Fo2 {
        check_fo2(&input, &mut violations);
        input
    } else {
        let mut ck = Checker {
            fragment,
            violations: &mut violations,
            notes: &mut notes,
        };
        ck.walk(&input, &mut Vec::new())
    };

    let accepted = violations.is_empty();
    let report = MembershipReport {
        fragment,
        accepted,
        violations,
        notes,
    };
    if accepted {
        Ok((segmented, report))
    } else {
        Err(report)
    }
}

fn find_equalities(f: &Formula) -> Vec<(Vec<usize>, &Formula)> {
    let mut out = Vec::new();
    fn go<'a>(f: &'a Formula, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, &'a Formula)>) {
        if matches!(f, Formula::Eq(..)) {
            out.push((path.clone(), f));
        }
        for (i, c) in f.children().into_iter().enumerate() {
            path.push(i);
            go(c, path, out);
            path.pop();
        }
    }
    go(f, &mut Vec::new(), &mut out);
    out
}

fn check_fo2(f: &Formula, violations: &mut Vec<Violation>) {
    let vars = f.all_variables();
    if vars.len() > 2 {
        violations.push(Violation {
            path: Vec::new(),
            subformula: f.to_string(),
            rule: Rule::VariableCount,
            detail: format!("{} distinct variables occur", vars.len()),
        });
    }
    fn go(f: &Formula, path: &mut Vec<usize>, violations: &mut Vec<Violation>) {
        if let Formula::Atom(a) = f {
            if a.args.len() > 2 {
                violations.push(Violation {
                    path: path.clone(),
                    subformula: f.to_string(),
                    rule: Rule::VariableCount,
                    detail: format!("relation `{}` used with arity {}", a.relation, a.args.len()),
                });
            }
        }
        for (i, c) in f.children().into_iter().enumerate() {
            path.push(i);
            go(c, path, violations);
            path.pop();
        }
    }
    go(f, &mut Vec::new(), violations);
}

struct Checker<'a> {
    fragment: Fragment,
    violations: &'a mut Vec<Violation>,
    notes: &'a mut Vec<Note>,
}

/// Why a single candidate segment is not a legal block.
struct SegmentFault {
    rule: Rule,
    path: Vec<usize>,
    subformula: String,
    detail: String,
}

impl Checker<'_> {
    /// Walks Boolean structure outside block matrices.
    fn walk(&mut self, f: &Formula, path: &mut Vec<usize>) -> Formula {
        match f {
            Formula::Atom(a) => {
                if a.var_set().len() > 1 {
                    self.violations.push(Violation {
                        path: path.clone(),
                        subformula: f.to_string(),
                        rule: Rule::Uniformity,
                        detail: "atom with several variables outside any quantifier block"
                            .to_string(),
                    });
                }
                f.clone()
            }
            Formula::Eq(..) => f.clone(),
            Formula::Block(prefix, body) => self.block(prefix, body, path),
            _ => self.rebuild(f, path, |ck, c, p| ck.walk(c, p)),
        }
    }

    /// Walks a block matrix: direct atoms are left to the segment check,
    /// nested blocks are checked on their own.
    fn matrix(&mut self, f: &Formula, path: &mut Vec<usize>) -> Formula {
        match f {
            Formula::Atom(_) | Formula::Eq(..) => f.clone(),
            Formula::Block(prefix, body) => self.block(prefix, body, path),
            _ => self.rebuild(f, path, |ck, c, p| ck.matrix(c, p)),
        }
    }

    fn rebuild(
        &mut self,
        f: &Formula,
        path: &mut Vec<usize>,
        mut sub: impl FnMut(&mut Self, &Formula, &mut Vec<usize>) -> Formula,
    ) -> Formula {
        let mut kids = Vec::new();
        for (i, c) in f.children().into_iter().enumerate() {
            path.push(i);
            kids.push(sub(self, c, path));
            path.pop();
        }
        match f {
            Formula::Not(_) => Formula::not(kids.pop().unwrap()),
            Formula::And(_) => Formula::And(kids),
            Formula::Or(_) => Formula::Or(kids),
            Formula::Imp(..) => {
                let b = kids.pop().unwrap();
                let a = kids.pop().unwrap();
                Formula::imp(a, b)
            }
            _ => unreachable!("rebuild on a leaf or block"),
        }
    }

    fn shape_ok(&self, seg: &[Binder]) -> bool {
        let all = |q| seg.iter().all(|b| b.quantifier == q);
        match self.fragment {
            Fragment::SUf1 => all(Quantifier::Forall) || all(Quantifier::Exists),
            Fragment::Auf1Minus => {
                all(Quantifier::Forall)
                    || seg.last().map(|b| b.quantifier) == Some(Quantifier::Exists)
            }
            Fragment::Auf1 | Fragment::Fo2 => true,
        }
    }

    /// Faults of the candidate segment `prefix[i..j]`, given the free
    /// variables of its matrix and (for the innermost segment) the direct
    /// atoms of the body.
    fn segment_faults(
        &self,
        seg: &[Binder],
        matrix_fv: &BTreeSet<Var>,
        body_atoms: Option<&[(Vec<usize>, &Atom)]>,
        block_path: &[usize],
        block_text: &dyn Fn() -> String,
        first_only: bool,
    ) -> Vec<SegmentFault> {
        let mut faults = Vec::new();
        let bound: BTreeSet<&Var> = seg.iter().map(|b| &b.var).collect();
        let outside: Vec<&Var> = matrix_fv.iter().filter(|v| !bound.contains(v)).collect();
        if outside.len() > 1 {
            faults.push(SegmentFault {
                rule: Rule::OneDimensionality,
                path: block_path.to_vec(),
                subformula: block_text(),
                detail: format!(
                    "block leaves {} variables free ({})",
                    outside.len(),
                    outside
                        .iter()
                        .map(|v| v.name())
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            });
            if first_only {
                return faults;
            }
        }
        if !self.shape_ok(seg) {
            let detail = match self.fragment {
                Fragment::SUf1 => "block mixes universal and existential quantifiers",
                _ => "block is neither all-universal nor ends with an existential quantifier",
            };
            faults.push(SegmentFault {
                rule: Rule::BlockShape,
                path: block_path.to_vec(),
                subformula: block_text(),
                detail: detail.to_string(),
            });
            if first_only {
                return faults;
            }
        }
        if let Some(atoms) = body_atoms {
            let full: BTreeSet<&Var> = bound
                .iter()
                .copied()
                .chain(outside.iter().copied())
                .collect();
            for (path, atom) in atoms {
                let vs = atom.var_set();
                if vs.len() > 1 && vs != full {
                    faults.push(SegmentFault {
                        rule: Rule::Uniformity,
                        path: path.clone(),
                        subformula: Formula::Atom((*atom).clone()).to_string(),
                        detail: format!(
                            "atom uses {{{}}} but the block's variables are {{{}}}",
                            vs.iter().map(|v| v.name()).collect::<Vec<_>>().join(", "),
                            full.iter().map(|v| v.name()).collect::<Vec<_>>().join(", ")
                        ),
                    });
                    if first_only {
                        return faults;
                    }
                }
            }
        }
        faults
    }

    fn block(&mut self, prefix: &[Binder], body: &Formula, path: &mut Vec<usize>) -> Formula {
        let block_path = path.clone();
        path.push(0);
        let new_body = self.matrix(body, path);
        let mut atoms = Vec::new();
        collect_direct_atoms(body, path, &mut atoms);
        path.pop();

        let n = prefix.len();
        // fv[j] = free variables of `prefix[j..] body`
        let mut fv = vec![BTreeSet::new(); n + 1];
        fv[n] = free_variables(body);
        for j in (0..n).rev() {
            let mut s = fv[j + 1].clone();
            s.remove(&prefix[j].var);
            fv[j] = s;
        }

        let text = || Formula::block(prefix.to_vec(), body.clone()).to_string();
        // best[i] = (segments, next cut) for the suffix starting at i
        let mut best: Vec<Option<(usize, usize)>> = vec![None; n + 1];
        best[n] = Some((0, n));
        for i in (0..n).rev() {
            for j in (i + 1..=n).rev() {
                let Some((count, _)) = best[j] else { continue };
                let body_atoms = (j == n).then_some(atoms.as_slice());
                let ok = self
                    .segment_faults(&prefix[i..j], &fv[j], body_atoms, &block_path, &text, true)
                    .is_empty();
                if ok && best[i].is_none_or(|(c, _)| count + 1 < c) {
                    best[i] = Some((count + 1, j));
                }
            }
        }

        if best[0].is_none() {
            let faults =
                self.segment_faults(prefix, &fv[n], Some(&atoms), &block_path, &text, false);
            debug_assert!(!faults.is_empty());
            for fault in faults {
                self.violations.push(Violation {
                    path: fault.path,
                    subformula: fault.subformula,
                    rule: fault.rule,
                    detail: fault.detail,
                });
            }
            return Formula::block(prefix.to_vec(), new_body);
        }

        let mut cuts = vec![0];
        while let Some(&i) = cuts.last() {
            if i == n {
                break;
            }
            cuts.push(best[i].unwrap().1);
        }
        for w in cuts.windows(2) {
            for b in &prefix[w[0]..w[1]] {
                if !fv[w[1]].contains(&b.var) {
                    self.notes.push(Note::VacuousBinding {
                        path: block_path.clone(),
                        var: b.var.clone(),
                    });
                }
            }
        }
        let mut out = new_body;
        for w in cuts.windows(2).rev() {
            out = Formula::block(prefix[w[0]..w[1]].to_vec(), out);
        }
        out
    }
}

fn collect_direct_atoms<'a>(
    f: &'a Formula,
    path: &mut Vec<usize>,
    out: &mut Vec<(Vec<usize>, &'a Atom)>,
) {
    match f {
        Formula::Atom(a) => out.push((path.clone(), a)),
        Formula::Eq(..) | Formula::Block(..) => {}
        _ => {
            for (i, c) in f.children().into_iter().enumerate() {
                path.push(i);
                collect_direct_atoms(c, path, out);
                path.pop();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, Signature};

    fn sig() -> Signature {
        Signature::from_relations([("P", 1), ("Q", 1), ("R", 3), ("R2", 2), ("S", 4), ("T", 2)])
            .unwrap()
    }

    fn check(text: &str, fragment: Fragment) -> MembershipReport {
        check_fragment(&parse_formula(text, &sig()).unwrap(), fragment, false)
    }

    const GUARDED_TRIPLE: &str =
        "(forall (x y z) (imp (and (P x) (P y) (P z)) (or (R x y z) (not (S z z x y)))))";
    const NESTED_SUF1: &str =
        "(forall (x) (imp (P x) (exists (y z) (and (not (R y z x)) (or (not (R x y z)) (P y))))))";
    const PAIR_WITNESS: &str =
        "(forall (x y) (exists (z) (or (and (not (P x)) (not (P y))) (R x y z))))";
    const ALTERNATING: &str =
        "(forall (x) (or (P x) (exists (y) (forall (z) (exists (t) (S x y z t))))))";
    const THREE_SUCCESSORS: &str = "(forall (x y z) (or (R x y z) (and (exists (t) (T x t)) (exists (t) (T y t)) (exists (t) (T z t)))))";

    #[test]
    fn suf1_examples_accepted() {
        for text in [GUARDED_TRIPLE, NESTED_SUF1] {
            for frag in [Fragment::SUf1, Fragment::Auf1Minus, Fragment::Auf1] {
                let r = check(text, frag);
                assert!(r.accepted, "{frag} rejected {text}: {:?}", r.violations);
            }
        }
    }

    #[test]
    fn auf1minus_examples_accepted() {
        for text in [PAIR_WITNESS, ALTERNATING, THREE_SUCCESSORS] {
            let r = check(text, Fragment::Auf1Minus);
            assert!(r.accepted, "{text}: {:?}", r.violations);
            assert!(r.notes.contains(&Note::ConvertedToNnf));
        }
    }

    #[test]
    fn trailing_universal_block() {
        let text = "(forall (x) (exists (y) (forall (z) (R x y z))))";
        let r = check(text, Fragment::Auf1Minus);
        assert!(!r.accepted);
        assert!(r.violations.iter().any(|v| v.rule == Rule::BlockShape));
        assert!(check(text, Fragment::Auf1).accepted);
    }

    #[test]
    fn non_uniform_atoms_rejected() {
        let r = check("(exists (x y z) (and (R2 x y) (R2 y z)))", Fragment::SUf1);
        assert!(!r.accepted);
        assert!(r.violations.iter().any(|v| v.rule == Rule::Uniformity));
    }

    #[test]
    fn split_into_two_blocks_is_found() {
        // exists x forall y R(x,y) counts as two one-variable blocks
        let f = parse_formula("(exists (x) (forall (y) (T x y)))", &sig()).unwrap();
        let (seg, r) = segment_blocks(&f, Fragment::SUf1, false).unwrap();
        assert!(r.accepted);
        let Formula::Block(outer, inner) = &seg else {
            panic!()
        };
        assert_eq!(outer.len(), 1);
        assert!(matches!(inner.as_ref(), Formula::Block(p, _) if p.len() == 1));
        assert!(segment_blocks(&f, Fragment::Auf1Minus, false).is_ok());
    }

    #[test]
    fn fewest_segments_preferred() {
        let f = parse_formula("(forall (x) (exists (y) (T x y)))", &sig()).unwrap();
        let (seg, _) = segment_blocks(&f, Fragment::Auf1Minus, false).unwrap();
        assert!(matches!(&seg, Formula::Block(p, b) if p.len() == 2 && b.is_quantifier_free()));
    }

    #[test]
    fn one_dimensionality_violation() {
        let r = check(
            "(forall (x) (exists (y) (forall (z) (R x y z))))",
            Fragment::SUf1,
        );
        assert!(!r.accepted);
        let r = check("(and (P x) (exists (z) (R x y z)))", Fragment::Auf1);
        assert!(r
            .violations
            .iter()
            .any(|v| v.rule == Rule::OneDimensionality));
    }

    #[test]
    fn vacuous_binding_is_noted() {
        let r = check("(forall (x y) (P x))", Fragment::SUf1);
        assert!(r.accepted);
        assert!(r
            .notes
            .iter()
            .any(|n| matches!(n, Note::VacuousBinding { var, .. } if var.name() == "y")));
    }

    #[test]
    fn fo2_variable_count() {
        assert!(check("(forall (x) (exists (y) (T x y)))", Fragment::Fo2).accepted);
        let r = check(GUARDED_TRIPLE, Fragment::Fo2);
        assert!(r.violations.iter().all(|v| v.rule == Rule::VariableCount));
        assert!(!r.accepted);
    }

    #[test]
    fn equality_handling() {
        let sig = sig().with_equality(true);
        let f = parse_formula(
            "(forall (x) (exists (y) (and (T x y) (not (= x y)))))",
            &sig,
        )
        .unwrap();
        let r = check_fragment(&f, Fragment::Auf1Minus, true);
        assert!(r.accepted);
        assert!(r.notes.contains(&Note::EqualityPresent));
        let r = check_fragment(&f, Fragment::Auf1Minus, false);
        assert!(r.violations.iter().any(|v| v.rule == Rule::EqualityUse));
        let r = check_fragment(&f, Fragment::SUf1, true);
        assert!(!r.accepted);
    }

    #[test]
    fn unknown_fragment_identifier() {
        assert!("guarded".parse::<Fragment>().is_err());
        assert_eq!("auf1m".parse::<Fragment>().unwrap(), Fragment::Auf1Minus);
    }
}
