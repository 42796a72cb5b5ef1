use std::collections::BTreeSet;

/// Left vertices `0..left`, right vertices `0..right`; `adj[u]` lists the
/// right neighbours of left vertex `u`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteGraph {
    pub left: usize,
    pub right: usize,
    pub adj: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    pub fn new(left: usize, right: usize) -> Self {
        BipartiteGraph {
            left,
            right,
            adj: vec![Vec::new(); left],
        }
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(
            u < self.left && v < self.right,
            "edge ({u}, {v}) out of range"
        );
        if !self.adj[u].contains(&v) {
            self.adj[u].push(v);
            self.adj[u].sort_unstable();
        }
    }

    /// Right vertices adjacent to some vertex of `w`.
    pub fn neighbourhood(&self, w: &[usize]) -> BTreeSet<usize> {
        w.iter()
            .flat_map(|&u| self.adj[u].iter().copied())
            .collect()
    }
}

/// A left subset whose neighbourhood is smaller than itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HallViolation {
    pub left: Vec<usize>,
    pub neighbourhood: Vec<usize>,
}

/// A matching covering the left side (`result[u]` is the partner of `u`), or
/// a Hall violator. Augmenting paths are tried with left vertices in index
/// order and neighbours in increasing order.
pub fn hall_matching(g: &BipartiteGraph) -> Result<Vec<usize>, HallViolation> {
    let mut owner: Vec<Option<usize>> = vec![None; g.right];
    for u in 0..g.left {
        let mut seen = vec![false; g.right];
        let mut reached = vec![u];
        if !augment(g, u, &mut owner, &mut seen, &mut reached) {
            // every neighbour of `reached` was visited and is matched inside it
            let mut left = reached;
            left.sort_unstable();
            left.dedup();
            let neighbourhood = g.neighbourhood(&left).into_iter().collect();
            return Err(HallViolation {
                left,
                neighbourhood,
            });
        }
    }
    let mut partner = vec![usize::MAX; g.left];
    for (v, o) in owner.iter().enumerate() {
        if let Some(u) = o {
            partner[*u] = v;
        }
    }
    Ok(partner)
}

fn augment(
    g: &BipartiteGraph,
    u: usize,
    owner: &mut [Option<usize>],
    seen: &mut [bool],
    reached: &mut Vec<usize>,
) -> bool {
    for &v in &g.adj[u] {
        if seen[v] {
            continue;
        }
        seen[v] = true;
        match owner[v] {
            None => {
                owner[v] = Some(u);
                return true;
            }
            Some(w) => {
                reached.push(w);
                if augment(g, w, owner, seen, reached) {
                    owner[v] = Some(u);
                    return true;
                }
            }
        }
    }
    false
}
