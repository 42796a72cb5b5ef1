use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::matching::{hall_matching, BipartiteGraph};
use super::SmallModelError;

/// Subsets of `1..=n` of size `l`, each sorted, in lexicographic order.
pub fn subsets(n: usize, l: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(l);
    fn go(start: usize, n: usize, l: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == l {
            out.push(cur.clone());
            return;
        }
        for x in start..=n {
            if n - x + 1 < l - cur.len() {
                break;
            }
            cur.push(x);
            go(x + 1, n, l, cur, out);
            cur.pop();
        }
    }
    go(1, n, l, &mut cur, &mut out);
    out
}

/// Injective map from the subsets of `1..=2K` of size below `K` (the empty
/// set included) to supersets with exactly one more element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionFunction {
    pub k: usize,
    map: BTreeMap<Vec<usize>, Vec<usize>>,
}

impl ExtensionFunction {
    pub fn get(&self, s: &BTreeSet<usize>) -> Option<&[usize]> {
        let key: Vec<usize> = s.iter().copied().collect();
        self.map.get(&key).map(Vec::as_slice)
    }

    /// The unique element of `ext(s) ∖ s`.
    pub fn new_element(&self, s: &BTreeSet<usize>) -> Option<usize> {
        self.get(s)?.iter().copied().find(|x| !s.contains(x))
    }

    /// Entries sorted by domain-set size, then lexicographically.
    pub fn entries(&self) -> Vec<(&[usize], &[usize])> {
        let mut v: Vec<(&[usize], &[usize])> = self
            .map
            .iter()
            .map(|(a, b)| (a.as_slice(), b.as_slice()))
            .collect();
        v.sort_by(|a, b| (a.0.len(), a.0).cmp(&(b.0.len(), b.0)));
        v
    }

    /// Checks the superset, size-increment and injectivity properties and
    /// that the domain is exactly the subsets of size below `K`.
    pub fn check(&self) -> Result<(), String> {
        let n = 2 * self.k;
        let expected: usize = (0..self.k).map(|l| subsets(n, l).len()).sum();
        if self.map.len() != expected {
            return Err(format!("{} entries, expected {expected}", self.map.len()));
        }
        let mut images = BTreeSet::new();
        for (s, t) in &self.map {
            if s.len() >= self.k || s.iter().any(|&x| x == 0 || x > n) {
                return Err(format!("{s:?} is outside the domain"));
            }
            if t.len() != s.len() + 1
                || !s.iter().all(|x| t.contains(x))
                || t.iter().any(|&x| x == 0 || x > n)
            {
                return Err(format!("{s:?} -> {t:?} does not add exactly one element"));
            }
            if !images.insert(t) {
                return Err(format!("{t:?} is hit twice"));
            }
        }
        Ok(())
    }
}

fn render_set(s: &[usize]) -> String {
    let parts: Vec<String> = s.iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

impl fmt::Display for ExtensionFunction {
    /// One `{…} -> {…}` line per nonempty domain set.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, t) in self.entries().into_iter().filter(|(s, _)| !s.is_empty()) {
            writeln!(f, "{} -> {}", render_set(s), render_set(t))?;
        }
        Ok(())
    }
}

/// Builds `ext` level by level from covering matchings of the containment
/// graphs between `l`- and `(l+1)`-subsets of `1..=2K`; `∅` maps to `{1}`.
pub fn build_ext(k: usize) -> Result<ExtensionFunction, SmallModelError> {
    if k == 0 {
        return Err(SmallModelError::ZeroK);
    }
    let n = 2 * k;
    let mut map = BTreeMap::new();
    map.insert(Vec::new(), vec![1]);
    for l in 1..k {
        let left = subsets(n, l);
        let right = subsets(n, l + 1);
        let index: BTreeMap<&[usize], usize> = right
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_slice(), i))
            .collect();
        let mut g = BipartiteGraph::new(left.len(), right.len());
        for (u, s) in left.iter().enumerate() {
            for x in (1..=n).filter(|x| !s.contains(x)) {
                let mut t = s.clone();
                t.push(x);
                t.sort_unstable();
                g.add_edge(u, index[t.as_slice()]);
            }
        }
        let m = hall_matching(&g).map_err(|v| SmallModelError::Hall {
            level: l,
            violation: v,
        })?;
        for (u, v) in m.into_iter().enumerate() {
            map.insert(left[u].clone(), right[v].clone());
        }
    }
    Ok(ExtensionFunction { k, map })
}
