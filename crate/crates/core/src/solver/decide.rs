use std::time::Instant;

use super::search::{Problem, SizeOutcome};
use super::{SearchConfig, SearchStats, SolveError, SolveResult, Status};
use crate::formula::{Formula, Signature};
use crate::normal_form::{branch_at, to_weak_normal_form, valuation_count, Branch, NormalForm};
use crate::semantics::Evaluator;
use crate::smallmodel::t_pool;

/// `2K · m∃ · (K−1)^(K−1) · 2^r` where `r` counts relations of positive
/// arity (one single-variable atom each); 1 without existential conjuncts.
/// Saturates at `u64::MAX`.
pub fn theoretical_bound(nf: &NormalForm) -> u64 {
    if nf.m_exists() == 0 {
        return 1;
    }
    let k = nf.k_max() as u64;
    let r = nf.signature.relations().filter(|&(_, a)| a > 0).count() as u32;
    let types = 1u64.checked_shl(r).unwrap_or(u64::MAX);
    (2 * k)
        .saturating_mul(nf.m_exists() as u64)
        .saturating_mul(t_pool(k as usize) as u64)
        .saturating_mul(types)
}

/// Decides `f` by searching each 0-ary branch of its weak normal form, size
/// by size up to `cfg.max_size`; within a size, branches go in binary
/// counting order of their valuations. Branches stop at their theoretical
/// bound unless `f` uses equality, in which case no bound applies and UNSAT
/// is never claimed complete.
pub fn decide(f: &Formula, sig: &Signature, cfg: &SearchConfig) -> Result<SolveResult, SolveError> {
    if cfg.max_size == 0 {
        return Err(SolveError::ZeroSize);
    }
    let start = Instant::now();
    let deadline = cfg.time_budget.map(|b| start + b);
    let w = to_weak_normal_form(f, sig)?;
    let count = valuation_count(&w).ok_or(SolveError::TooManyNullary)?;
    let branches: Vec<Branch> = (0..count).filter_map(|i| branch_at(&w, i)).collect();
    let formulas: Vec<Formula> = branches
        .iter()
        .map(|b| b.normal_form.to_formula())
        .collect();
    let problems = branches
        .iter()
        .zip(&formulas)
        .map(|(b, f)| Problem::new(f, &b.normal_form.signature))
        .collect::<Result<Vec<_>, _>>()?;
    let equality = f.contains_equality();
    let bounds: Vec<Option<u64>> = branches
        .iter()
        .map(|b| (!equality).then(|| theoretical_bound(&b.normal_form)))
        .collect();

    let mut stats = SearchStats::default();
    for n in 1..=cfg.max_size {
        for (bi, b) in branches.iter().enumerate() {
            if bounds[bi].is_some_and(|bound| (n as u64) > bound) {
                continue;
            }
            stats.searches += 1;
            let outcome =
                problems[bi].search(n, cfg.isomorphism_pruning, deadline, &mut stats.nodes)?;
            stats.elapsed = start.elapsed();
            match outcome {
                SizeOutcome::Model(witness) => {
                    let model = b.project(&witness, sig)?;
                    if !Evaluator::new(f).holds(&model)? {
                        return Err(SolveError::Internal(format!(
                            "branch {} model does not satisfy the input",
                            b.bits
                        )));
                    }
                    return Ok(SolveResult {
                        status: Status::Sat,
                        model: Some(model),
                        branch: Some(b.bits.clone()),
                        witness: Some(witness),
                        stats,
                    });
                }
                SizeOutcome::NoModel => {}
                SizeOutcome::Timeout => {
                    return Ok(SolveResult {
                        status: Status::Unknown(format!("time budget exhausted at size {n}")),
                        model: None,
                        branch: None,
                        witness: None,
                        stats,
                    })
                }
            }
        }
    }
    stats.elapsed = start.elapsed();
    let exhausted = bounds
        .iter()
        .all(|b| b.is_some_and(|bound| bound <= cfg.max_size as u64));
    let status = if !equality && exhausted {
        Status::UnsatComplete
    } else {
        Status::UnsatUpTo(cfg.max_size)
    };
    Ok(SolveResult {
        status,
        model: None,
        branch: None,
        witness: None,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_problem;
    use crate::normal_form::zero_ary_branches;

    fn run(text: &str, eq: bool, max: usize) -> SolveResult {
        let p = parse_problem(text, eq).unwrap();
        decide(&p.formula, &p.signature, &SearchConfig::new(max)).unwrap()
    }

    fn nf(text: &str) -> NormalForm {
        let p = parse_problem(text, false).unwrap();
        zero_ary_branches(&to_weak_normal_form(&p.formula, &p.signature).unwrap())
            .remove(0)
            .normal_form
    }

    #[test]
    fn bounds() {
        assert_eq!(
            theoretical_bound(&nf("(decl R 2) (forall (x) (exists (y) (R x y)))")),
            8
        );
        assert_eq!(theoretical_bound(&nf("(decl P 1) (forall (x) (P x))")), 1);
        assert_eq!(
            theoretical_bound(&nf(
                "(decl P 1) (decl R 3) (forall (x) (exists (y) (R x y y)))"
            )),
            16
        );
    }

    #[test]
    fn unary_or_deep_block_is_sat() {
        let r = run(
            "(decl P 1) (decl S 4) (forall (x) (or (P x) (exists (y) (forall (z) (exists (t) (S x y z t))))))",
            false,
            2,
        );
        assert_eq!(r.status, Status::Sat);
        assert_eq!(r.model.unwrap().size(), 1);
    }

    #[test]
    fn contradiction_is_complete() {
        let r = run(
            "(decl P 1) (and (forall (x) (P x)) (forall (x) (not (P x))))",
            false,
            3,
        );
        assert_eq!(r.status, Status::UnsatComplete);
        let r = run("(decl E 0) (and (E) (not (E)))", false, 1);
        assert_eq!(r.status, Status::UnsatComplete);
    }

    #[test]
    fn small_cap_leaves_unsat_open() {
        let r = run(
            "(decl R 2) (and (forall (x) (exists (y) (R x y))) (forall (x) (not (R x x))) \
             (forall (x y) (or (not (R x y)) (not (R y x)))))",
            false,
            2,
        );
        assert_eq!(r.status, Status::UnsatUpTo(2));
        let r = run(
            "(decl R 2) (and (forall (x) (exists (y) (R x y))) (forall (x) (not (R x x))) \
             (forall (x y) (or (not (R x y)) (not (R y x)))))",
            false,
            3,
        );
        assert_eq!(r.status, Status::Sat);
    }

    #[test]
    fn nullary_valuation_is_reported() {
        let r = run(
            "(decl P 1) (decl Q 1) (or (exists (x) (P x)) (forall (x) (Q x)))",
            false,
            1,
        );
        assert_eq!(r.status, Status::Sat);
        assert_eq!(r.branch.as_deref(), Some("01"));
        let w = r.witness.unwrap();
        assert!(w.signature().contains("Q"));
    }

    #[test]
    fn equality_never_claims_completeness() {
        let r = run("(decl P 1) (and (exists (x) (P x)) (forall (x y) (or (= x y) (not (P x)))) (forall (x) (not (P x))))", true, 2);
        assert_eq!(r.status, Status::UnsatUpTo(2));
    }
}
