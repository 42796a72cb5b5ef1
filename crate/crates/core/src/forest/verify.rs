use std::collections::{BTreeSet, HashMap};
use std::fmt;

use super::{NodeKind, SatisfactionForest, SatisfactionTree};
use crate::formula::Quantifier;
use crate::normal_form::NormalForm;
use crate::semantics::{
    evaluate_pre, is_forall_compatible, typeset_compatible_with, Assignment, OneType, PreStructure,
    UniversalPart,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    T1,
    T2,
    T3,
    T4,
    T5,
    F1,
    F2,
    F3,
    F4,
}

impl Condition {
    pub const ALL: [Condition; 9] = [
        Condition::T1,
        Condition::T2,
        Condition::T3,
        Condition::T4,
        Condition::T5,
        Condition::F1,
        Condition::F2,
        Condition::F3,
        Condition::F4,
    ];
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Where a failure was found. Tree and branch indices are 0-based; branches
/// are numbered depth-first within their tree.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Locator {
    pub tree: Option<usize>,
    pub branches: Vec<(usize, usize)>,
    pub element: Option<usize>,
}

impl fmt::Display for Locator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(t) = self.tree {
            parts.push(format!("tree {}", t + 1));
        }
        for (t, b) in &self.branches {
            parts.push(format!("branch {}.{}", t + 1, b + 1));
        }
        if let Some(e) = self.element {
            parts.push(format!("element {e}"));
        }
        write!(f, "{}", parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub locator: Locator,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionOutcome {
    pub condition: Condition,
    /// First failure found, if any.
    pub failure: Option<Failure>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForestReport {
    /// Malformations outside every condition, such as an empty domain.
    pub structural: Vec<String>,
    /// One entry per condition, in `Condition::ALL` order.
    pub outcomes: Vec<ConditionOutcome>,
    /// Largest element-set size used for the 1-type compatibility check.
    pub m_max: usize,
}

impl ForestReport {
    pub fn passed(&self) -> bool {
        self.structural.is_empty() && self.outcomes.iter().all(|o| o.failure.is_none())
    }

    pub fn failed(&self) -> Vec<Condition> {
        self.outcomes
            .iter()
            .filter(|o| o.failure.is_some())
            .map(|o| o.condition)
            .collect()
    }

    pub fn outcome(&self, c: Condition) -> &ConditionOutcome {
        &self.outcomes[c as usize]
    }
}

impl fmt::Display for ForestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.structural {
            writeln!(f, "malformed: {s}")?;
        }
        for o in &self.outcomes {
            match &o.failure {
                None => writeln!(f, "{} pass", o.condition)?,
                Some(x) => writeln!(f, "{} FAIL at {}: {}", o.condition, x.locator, x.detail)?,
            }
        }
        write!(f, "m_max {}", self.m_max)
    }
}

/// A branch whose leaf sits at the right depth and carries a pre-structure
/// over exactly the branch's labels.
struct GoodBranch<'a> {
    tree: usize,
    index: usize,
    seq: Vec<usize>,
    set: BTreeSet<usize>,
    pre: &'a PreStructure,
}

struct Checker {
    outcomes: Vec<ConditionOutcome>,
}

impl Checker {
    fn fail(&mut self, c: Condition, locator: Locator, detail: impl Into<String>) {
        let o = &mut self.outcomes[c as usize];
        if o.failure.is_none() {
            o.failure = Some(Failure {
                locator,
                detail: detail.into(),
            });
        }
    }
}

/// Checks every tree and forest condition for `fst` against `nf`.
pub fn verify_forest(fst: &SatisfactionForest, nf: &NormalForm) -> ForestReport {
    let mut ck = Checker {
        outcomes: Condition::ALL
            .iter()
            .map(|&condition| ConditionOutcome {
                condition,
                failure: None,
            })
            .collect(),
    };
    let mut structural = Vec::new();
    let m_max = nf.m_max();
    if fst.domain == 0 {
        structural.push("empty domain".to_string());
    }

    if fst.trees.len() != nf.m_exists() {
        ck.fail(
            Condition::F1,
            Locator::default(),
            format!(
                "{} trees for {} existential conjuncts",
                fst.trees.len(),
                nf.m_exists()
            ),
        );
    }
    let mut good = Vec::new();
    for (t, tree) in fst.trees.iter().enumerate() {
        if tree.conjunct != t {
            ck.fail(
                Condition::F1,
                Locator {
                    tree: Some(t),
                    ..Locator::default()
                },
                format!("tree is for conjunct {}", tree.conjunct + 1),
            );
        }
        let Some(conj) = nf.existential.get(t) else {
            continue;
        };
        let quantifiers: Vec<Quantifier> = conj.prefix.iter().map(|b| b.quantifier).collect();
        check_shape(&mut ck, fst.domain, t, tree, &quantifiers);
        for (index, b) in tree.branches().into_iter().enumerate() {
            if b.len() != quantifiers.len() {
                continue;
            }
            let set = tree.set(&b);
            // T2 presupposes a pre-structure on exactly Set of the branch.
            let loc = Locator {
                tree: Some(t),
                branches: vec![(t, index)],
                element: None,
            };
            let Some(pre) = tree.branch_label(&b) else {
                ck.fail(Condition::T2, loc, "leaf has no pre-structure");
                continue;
            };
            if pre.elements != set {
                ck.fail(
                    Condition::T2,
                    loc,
                    format!(
                        "pre-structure is over {:?}, branch labels are {:?}",
                        pre.elements, set
                    ),
                );
                continue;
            }
            if !pre.is_total_over(&nf.signature) {
                ck.fail(
                    Condition::T2,
                    loc,
                    "pre-structure does not define exactly the atoms over its elements",
                );
                continue;
            }
            good.push(GoodBranch {
                tree: t,
                index,
                seq: tree.seq(&b),
                set,
                pre,
            });
        }
    }

    // T2 and T5, per branch.
    let mut compat_cache: HashMap<&PreStructure, bool> = HashMap::new();
    for g in &good {
        let conj = &nf.existential[g.tree];
        let a: Assignment = conj
            .variables()
            .into_iter()
            .zip(g.seq.iter().copied())
            .collect();
        let loc = Locator {
            tree: Some(g.tree),
            branches: vec![(g.tree, g.index)],
            element: None,
        };
        match evaluate_pre(g.pre, &conj.matrix, &a) {
            Ok(true) => {}
            Ok(false) => ck.fail(
                Condition::T2,
                loc.clone(),
                "matrix is false on the branch label",
            ),
            Err(e) => ck.fail(
                Condition::T2,
                loc.clone(),
                format!("matrix cannot be evaluated: {e}"),
            ),
        }
        let ok = *compat_cache
            .entry(g.pre)
            .or_insert_with(|| is_forall_compatible(g.pre, nf));
        if !ok {
            ck.fail(
                Condition::T5,
                loc,
                "branch label is not compatible with the universal conjuncts",
            );
        }
    }

    // T3/F2: 1-types of shared elements. T4/F3: labels of equal sets.
    let mut first_type: HashMap<(usize, usize), (usize, OneType)> = HashMap::new();
    let mut first_label: HashMap<(usize, &BTreeSet<usize>), (usize, &PreStructure)> =
        HashMap::new();
    for g in &good {
        for &e in &g.set {
            let ty = g.pre.type_of(e).expect("element of the pre-structure");
            match first_type.get(&(g.tree, e)) {
                Some((b, t0)) if *t0 != ty => ck.fail(
                    Condition::T3,
                    Locator {
                        tree: Some(g.tree),
                        branches: vec![(g.tree, *b), (g.tree, g.index)],
                        element: Some(e),
                    },
                    format!("1-types {t0} and {ty} differ"),
                ),
                Some(_) => {}
                None => {
                    first_type.insert((g.tree, e), (g.index, ty));
                }
            }
        }
        match first_label.get(&(g.tree, &g.set)) {
            Some((b, p)) if *p != g.pre => ck.fail(
                Condition::T4,
                Locator {
                    tree: Some(g.tree),
                    branches: vec![(g.tree, *b), (g.tree, g.index)],
                    element: None,
                },
                "branches over the same elements carry different pre-structures",
            ),
            Some(_) => {}
            None => {
                first_label.insert((g.tree, &g.set), (g.index, g.pre));
            }
        }
    }
    let mut types_by_element: HashMap<usize, Vec<(usize, usize, &OneType)>> = HashMap::new();
    for ((t, e), (b, ty)) in &first_type {
        types_by_element.entry(*e).or_default().push((*t, *b, ty));
    }
    let mut elements: Vec<&usize> = types_by_element.keys().collect();
    elements.sort();
    for e in elements {
        let mut v = types_by_element[e].clone();
        v.sort_by_key(|x| (x.0, x.1));
        if let Some(w) = v.windows(2).find(|w| w[0].2 != w[1].2) {
            ck.fail(
                Condition::F2,
                Locator {
                    tree: None,
                    branches: vec![(w[0].0, w[0].1), (w[1].0, w[1].1)],
                    element: Some(*e),
                },
                format!("1-types {} and {} differ", w[0].2, w[1].2),
            );
        }
    }
    let mut labels_by_set: HashMap<&BTreeSet<usize>, Vec<(usize, usize, &PreStructure)>> =
        HashMap::new();
    for ((t, set), (b, p)) in &first_label {
        labels_by_set.entry(*set).or_default().push((*t, *b, p));
    }
    let mut sets: Vec<&&BTreeSet<usize>> = labels_by_set.keys().collect();
    sets.sort();
    for set in sets {
        let mut v = labels_by_set[*set].clone();
        v.sort_by_key(|x| (x.0, x.1));
        if let Some(w) = v.windows(2).find(|w| w[0].2 != w[1].2) {
            ck.fail(
                Condition::F3,
                Locator {
                    tree: None,
                    branches: vec![(w[0].0, w[0].1), (w[1].0, w[1].1)],
                    element: None,
                },
                format!("branches over {set:?} carry different pre-structures"),
            );
        }
    }

    // F4 over every 1-type recorded in a branch label.
    let types: BTreeSet<OneType> = good
        .iter()
        .flat_map(|g| {
            g.set
                .iter()
                .map(|&e| g.pre.type_of(e).expect("element of the pre-structure"))
        })
        .collect();
    let part = UniversalPart::new(nf);
    if !typeset_compatible_with(&part, &types, m_max) {
        let listed: Vec<String> = types.iter().map(|t| t.to_string()).collect();
        ck.fail(
            Condition::F4,
            Locator::default(),
            format!(
                "1-types {{{}}} are not compatible up to {m_max} elements",
                listed.join(", ")
            ),
        );
    }

    ForestReport {
        structural,
        outcomes: ck.outcomes,
        m_max,
    }
}

/// T1: labels come from the domain, node kinds follow the prefix, universal
/// parents have one child per domain element, existential parents exactly
/// one, and only leaves at depth k carry pre-structures.
fn check_shape(
    ck: &mut Checker,
    domain: usize,
    t: usize,
    tree: &SatisfactionTree,
    quantifiers: &[Quantifier],
) {
    let loc = || Locator {
        tree: Some(t),
        ..Locator::default()
    };
    let check_children = |ck: &mut Checker, children: &[usize], level: usize| {
        let Some(q) = quantifiers.get(level) else {
            if !children.is_empty() {
                ck.fail(
                    Condition::T1,
                    loc(),
                    format!("nodes below depth {}", quantifiers.len()),
                );
            }
            return;
        };
        let want = match q {
            Quantifier::Forall => NodeKind::Universal,
            Quantifier::Exists => NodeKind::Existential,
        };
        if let Some(&c) = children.iter().find(|&&c| tree.nodes[c].kind != want) {
            ck.fail(
                Condition::T1,
                loc(),
                format!(
                    "node labelled {} at level {} should be {want:?}",
                    tree.nodes[c].label,
                    level + 1
                ),
            );
        }
        match q {
            Quantifier::Forall => {
                let labels: BTreeSet<usize> =
                    children.iter().map(|&c| tree.nodes[c].label).collect();
                if children.len() != domain || labels.len() != children.len() {
                    ck.fail(
                        Condition::T1,
                        loc(),
                        format!(
                            "universal level {} has {} children with {} distinct labels over a domain of {domain}",
                            level + 1,
                            children.len(),
                            labels.len()
                        ),
                    );
                }
            }
            Quantifier::Exists => {
                if children.len() != 1 {
                    ck.fail(
                        Condition::T1,
                        loc(),
                        format!(
                            "existential level {} has {} children",
                            level + 1,
                            children.len()
                        ),
                    );
                }
            }
        }
    };
    check_children(ck, &tree.roots, 0);
    for n in &tree.nodes {
        if n.label >= domain {
            ck.fail(
                Condition::T1,
                loc(),
                format!("label {} outside the domain", n.label),
            );
        }
        if n.pre.is_some() && !n.children.is_empty() {
            ck.fail(
                Condition::T1,
                loc(),
                format!("inner node labelled {} carries a pre-structure", n.label),
            );
        }
        check_children(ck, &n.children, n.level);
    }
}
