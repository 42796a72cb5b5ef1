//! Grounding of formulas over a fixed finite domain into clauses, and a
//! clause-learning search for their lexicographically least solution over
//! the atom variables.
//!
//! Atom variables come first. Auxiliary variables are full Tseitin
//! definitions, so they are fixed by the atom variables.

use std::collections::BinaryHeap;
use std::time::Instant;

use crate::formula::Quantifier;
use crate::semantics::eval::CNode;

/// A literal: `var * 2 + negated`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Lit(u32);

impl Lit {
    pub fn new(var: usize, positive: bool) -> Lit {
        Lit((var as u32) << 1 | u32::from(!positive))
    }

    pub fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn positive(self) -> bool {
        self.0 & 1 == 0
    }

    fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

/// Value of a ground subformula: a constant or a literal equivalent to it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Val {
    Const(bool),
    Lit(Lit),
}

impl std::ops::Not for Val {
    type Output = Val;
    fn not(self) -> Val {
        match self {
            Val::Const(b) => Val::Const(!b),
            Val::Lit(l) => Val::Lit(!l),
        }
    }
}

/// Clause database under construction.
#[derive(Clone, Debug)]
pub(crate) struct Cnf {
    atoms: usize,
    vars: usize,
    clauses: Vec<Vec<Lit>>,
    unsat: bool,
}

impl Cnf {
    /// A clause set whose first `atoms` variables are the decision variables.
    pub fn new(atoms: usize) -> Cnf {
        Cnf {
            atoms,
            vars: atoms,
            clauses: Vec::new(),
            unsat: false,
        }
    }

    fn fresh(&mut self) -> Lit {
        self.vars += 1;
        Lit::new(self.vars - 1, true)
    }

    pub fn add_clause(&mut self, mut c: Vec<Lit>) {
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0] == !w[1]) {
            return;
        }
        if c.is_empty() {
            self.unsat = true;
        }
        self.clauses.push(c);
    }

    /// Requires `v` to hold.
    pub fn assert(&mut self, v: Val) {
        match v {
            Val::Const(true) => {}
            Val::Const(false) => self.unsat = true,
            Val::Lit(l) => self.add_clause(vec![l]),
        }
    }

    /// Conjunction with constant folding; returns a literal defined by full
    /// Tseitin clauses when more than one literal remains.
    pub fn and(&mut self, items: impl IntoIterator<Item = Val>) -> Val {
        let mut lits = Vec::new();
        for v in items {
            match v {
                Val::Const(true) => {}
                Val::Const(false) => return Val::Const(false),
                Val::Lit(l) => lits.push(l),
            }
        }
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] == !w[1]) {
            return Val::Const(false);
        }
        match lits.len() {
            0 => Val::Const(true),
            1 => Val::Lit(lits[0]),
            _ => {
                let p = self.fresh();
                let mut back = vec![p];
                for &l in &lits {
                    self.clauses.push(vec![!p, l]);
                    back.push(!l);
                }
                self.clauses.push(back);
                Val::Lit(p)
            }
        }
    }

    pub fn or(&mut self, items: impl IntoIterator<Item = Val>) -> Val {
        let negated: Vec<Val> = items.into_iter().map(|v| !v).collect();
        !self.and(negated)
    }

    pub fn is_trivially_unsat(&self) -> bool {
        self.unsat
    }
}

/// Grounds a compiled formula over `0..size`. `atom` maps a relation index of
/// the compiled formula and an element tuple to a value.
pub(crate) fn ground<E>(
    cnf: &mut Cnf,
    node: &CNode,
    size: usize,
    env: &mut [usize],
    atom: &mut dyn FnMut(usize, &[usize]) -> Result<Val, E>,
) -> Result<Val, E> {
    Ok(match node {
        CNode::Atom { rel, args } => {
            let tuple: Vec<usize> = args.iter().map(|&a| env[a]).collect();
            atom(*rel, &tuple)?
        }
        CNode::Eq(x, y) => Val::Const(env[*x] == env[*y]),
        CNode::Not(g) => !ground(cnf, g, size, env, atom)?,
        CNode::And(gs) | CNode::Or(gs) => {
            let is_and = matches!(node, CNode::And(_));
            let mut vals = Vec::with_capacity(gs.len());
            for g in gs {
                let v = ground(cnf, g, size, env, atom)?;
                if v == Val::Const(!is_and) {
                    return Ok(v);
                }
                vals.push(v);
            }
            if is_and {
                cnf.and(vals)
            } else {
                cnf.or(vals)
            }
        }
        CNode::Quant(q, slot, body) => {
            let is_and = *q == Quantifier::Forall;
            let saved = env[*slot];
            let mut vals = Vec::with_capacity(size);
            let mut short = None;
            for e in 0..size {
                env[*slot] = e;
                let v = ground(cnf, body, size, env, atom)?;
                if v == Val::Const(!is_and) {
                    short = Some(v);
                    break;
                }
                vals.push(v);
            }
            env[*slot] = saved;
            if let Some(v) = short {
                return Ok(v);
            }
            if is_and {
                cnf.and(vals)
            } else {
                cnf.or(vals)
            }
        }
    })
}

/// Result of a search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Outcome {
    /// Values of the atom variables.
    Sat(Vec<bool>),
    Unsat,
    Timeout,
}

/// Optional search controls.
#[derive(Clone, Debug, Default)]
pub(crate) struct Limits {
    pub deadline: Option<Instant>,
    /// Permutations of the atom variables. Only assignments that are
    /// lexicographically no greater than their image under each of them are
    /// kept; the least solution always is.
    pub symmetries: Vec<Vec<usize>>,
}

const NO_REASON: usize = usize::MAX;

enum Answer {
    Sat,
    Unsat,
    Timeout,
}

/// Conflict-driven clause learning over a fixed clause set, reusable across
/// calls with different assumptions.
struct Solver<'a> {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    value: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<usize>,
    phase: Vec<bool>,
    activity: Vec<f64>,
    bump: f64,
    heap: BinaryHeap<(u64, usize)>,
    seen: Vec<bool>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    head: usize,
    /// A conflict was derived without assumptions.
    broken: bool,
    limits: &'a Limits,
    conflicts: u64,
}

fn lit_value(value: &[i8], l: Lit) -> i8 {
    let v = value[l.var()];
    if v < 0 {
        -1
    } else if l.positive() {
        v
    } else {
        1 - v
    }
}

fn luby(mut i: u64) -> u64 {
    // i-th element (0-based) of 1,1,2,1,1,2,4,...
    let mut size = 1;
    let mut seq = 0;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1 << seq
}

impl<'a> Solver<'a> {
    fn new(vars: usize, limits: &'a Limits) -> Self {
        Solver {
            clauses: Vec::new(),
            watches: vec![Vec::new(); vars * 2],
            value: vec![-1; vars],
            level: vec![0; vars],
            reason: vec![NO_REASON; vars],
            phase: vec![false; vars],
            activity: vec![0.0; vars],
            bump: 1.0,
            heap: (0..vars).map(|v| (0, v)).collect(),
            seen: vec![false; vars],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            head: 0,
            broken: false,
            limits,
            conflicts: 0,
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn assign(&mut self, l: Lit, reason: usize) {
        let v = l.var();
        self.value[v] = i8::from(l.positive());
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Adds a clause at level 0.
    fn add_clause(&mut self, c: &[Lit]) {
        if self.broken {
            return;
        }
        match c {
            [] => self.broken = true,
            [u] => match lit_value(&self.value, *u) {
                0 => self.broken = true,
                -1 => self.assign(*u, NO_REASON),
                _ => {}
            },
            _ => {
                let ci = self.clauses.len();
                self.watches[c[0].index()].push(ci);
                self.watches[c[1].index()].push(ci);
                self.clauses.push(c.to_vec());
            }
        }
    }

    fn backtrack(&mut self, lvl: usize) {
        if self.decision_level() <= lvl {
            return;
        }
        let keep = self.trail_lim[lvl];
        for l in self.trail.drain(keep..) {
            let v = l.var();
            self.value[v] = -1;
            self.phase[v] = l.positive();
            self.heap.push((self.activity[v].to_bits(), v));
        }
        self.trail_lim.truncate(lvl);
        self.head = self.head.min(keep);
    }

    /// Unit propagation; the index of a falsified clause on conflict.
    fn propagate(&mut self) -> Option<usize> {
        while self.head < self.trail.len() {
            let falsified = !self.trail[self.head];
            self.head += 1;
            let mut ws = std::mem::take(&mut self.watches[falsified.index()]);
            let mut i = 0;
            let mut conflict = None;
            while i < ws.len() {
                let ci = ws[i];
                let c = &mut self.clauses[ci];
                if c[0] == falsified {
                    c.swap(0, 1);
                }
                let first = c[0];
                if lit_value(&self.value, first) == 1 {
                    i += 1;
                    continue;
                }
                if let Some(k) = (2..c.len()).find(|&k| lit_value(&self.value, c[k]) != 0) {
                    c.swap(1, k);
                    let w = c[1].index();
                    self.watches[w].push(ci);
                    ws.swap_remove(i);
                    continue;
                }
                i += 1;
                match lit_value(&self.value, first) {
                    0 => {
                        conflict = Some(ci);
                        break;
                    }
                    -1 => self.assign(first, ci),
                    _ => {}
                }
            }
            self.watches[falsified.index()] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.bump;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.bump *= 1e-100;
            self.heap = (0..self.value.len())
                .filter(|&v| self.value[v] < 0)
                .map(|v| (self.activity[v].to_bits(), v))
                .collect();
        }
        if self.value[v] < 0 {
            self.heap.push((self.activity[v].to_bits(), v));
        }
    }

    /// First-UIP learning; the learnt clause (asserting literal first) and
    /// the level to return to.
    fn analyze(&mut self, mut confl: usize) -> (Vec<Lit>, usize) {
        let current = self.decision_level() as u32;
        let mut learnt = vec![Lit(0)];
        let mut pending = 0;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        loop {
            let start = usize::from(p.is_some());
            for j in start..self.clauses[confl].len() {
                let q = self.clauses[confl][j];
                let v = q.var();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v);
                    if self.level[v] == current {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var()] {
                    break;
                }
            }
            let lit = self.trail[idx];
            self.seen[lit.var()] = false;
            pending -= 1;
            p = Some(lit);
            if pending == 0 {
                break;
            }
            confl = self.reason[lit.var()];
        }
        learnt[0] = !p.expect("conflict has a literal at the current level");
        for l in &learnt[1..] {
            self.seen[l.var()] = false;
        }
        let mut back = 0;
        if learnt.len() > 1 {
            let mut best = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].var()] > self.level[learnt[best].var()] {
                    best = k;
                }
            }
            learnt.swap(1, best);
            back = self.level[learnt[1].var()] as usize;
        }
        self.bump *= 1.0 / 0.95;
        (learnt, back)
    }

    fn pick(&mut self) -> Option<Lit> {
        while let Some((act, v)) = self.heap.pop() {
            if self.value[v] < 0 && act == self.activity[v].to_bits() {
                return Some(Lit::new(v, self.phase[v]));
            }
        }
        None
    }

    /// Searches for an assignment extending `assumptions`; on success the
    /// model is left in `self.value` until the next call.
    fn search(&mut self, assumptions: &[Lit], nodes: &mut u64) -> Answer {
        if self.broken {
            return Answer::Unsat;
        }
        self.backtrack(0);
        let mut restart = 0;
        let mut budget = 100 * luby(restart);
        loop {
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                if self.decision_level() == 0 {
                    self.broken = true;
                    return Answer::Unsat;
                }
                let (learnt, back) = self.analyze(confl);
                self.backtrack(back);
                if learnt.len() == 1 {
                    self.assign(learnt[0], NO_REASON);
                } else {
                    let ci = self.clauses.len();
                    self.watches[learnt[0].index()].push(ci);
                    self.watches[learnt[1].index()].push(ci);
                    let first = learnt[0];
                    self.clauses.push(learnt);
                    self.assign(first, ci);
                }
                if self.conflicts % 256 == 0 {
                    if let Some(d) = self.limits.deadline {
                        if Instant::now() >= d {
                            self.backtrack(0);
                            return Answer::Timeout;
                        }
                    }
                }
                budget -= 1;
                if budget == 0 {
                    restart += 1;
                    budget = 100 * luby(restart);
                    self.backtrack(0);
                }
                continue;
            }
            let lvl = self.decision_level();
            if lvl < assumptions.len() {
                let a = assumptions[lvl];
                match lit_value(&self.value, a) {
                    0 => {
                        self.backtrack(0);
                        return Answer::Unsat;
                    }
                    1 => self.trail_lim.push(self.trail.len()),
                    _ => {
                        self.trail_lim.push(self.trail.len());
                        self.assign(a, NO_REASON);
                    }
                }
                continue;
            }
            let Some(d) = self.pick() else {
                return Answer::Sat;
            };
            *nodes += 1;
            if *nodes % 512 == 0 {
                if let Some(dl) = self.limits.deadline {
                    if Instant::now() >= dl {
                        self.backtrack(0);
                        return Answer::Timeout;
                    }
                }
            }
            self.trail_lim.push(self.trail.len());
            self.assign(d, NO_REASON);
        }
    }
}

/// Lex-leader constraint `a ≤ a∘p` over the first `atoms` variables, with
/// fresh chain variables numbered from `next`.
fn lex_leader(p: &[usize], atoms: usize, next: &mut usize, out: &mut Vec<Vec<Lit>>) {
    // `on` means every earlier position is equal to its image.
    let mut on: Option<Lit> = None;
    for (i, &j) in p.iter().enumerate().take(atoms) {
        if i == j {
            continue;
        }
        let a = Lit::new(i, true);
        let b = Lit::new(j, true);
        let mut c = vec![!a, b];
        c.extend(on.map(|y| !y));
        out.push(c);
        let y = Lit::new(*next, true);
        *next += 1;
        for side in [a, !b] {
            let mut c = vec![!side, y];
            c.extend(on.map(|y| !y));
            out.push(c);
        }
        on = Some(y);
    }
}

/// Decides the clause set and returns its least solution over the atom
/// variables (first atom most significant, false before true). Atom
/// variables that occur in no clause are set false. `nodes` receives the
/// number of decisions made.
pub(crate) fn solve(cnf: &Cnf, limits: &Limits, nodes: &mut u64) -> Outcome {
    if cnf.unsat {
        return Outcome::Unsat;
    }
    let mut extra = Vec::new();
    let mut vars = cnf.vars;
    for p in &limits.symmetries {
        lex_leader(p, cnf.atoms, &mut vars, &mut extra);
    }
    let mut s = Solver::new(vars, limits);
    let mut occurs = vec![false; cnf.atoms];
    for c in cnf.clauses.iter().chain(&extra) {
        for l in c {
            if l.var() < cnf.atoms {
                occurs[l.var()] = true;
            }
        }
        s.add_clause(c);
    }
    for (v, _) in occurs.iter().enumerate().filter(|(_, o)| !**o) {
        s.add_clause(&[Lit::new(v, false)]);
    }
    match s.search(&[], nodes) {
        Answer::Unsat => return Outcome::Unsat,
        Answer::Timeout => return Outcome::Timeout,
        Answer::Sat => {}
    }
    let mut model: Vec<bool> = s.value[..cnf.atoms].iter().map(|&v| v == 1).collect();
    // Fix atoms in order, preferring false whenever some solution allows it.
    let mut prefix = Vec::with_capacity(cnf.atoms);
    for v in 0..cnf.atoms {
        if model[v] {
            prefix.push(Lit::new(v, false));
            match s.search(&prefix, nodes) {
                Answer::Sat => model = s.value[..cnf.atoms].iter().map(|&v| v == 1).collect(),
                Answer::Unsat => {
                    prefix.pop();
                    prefix.push(Lit::new(v, true));
                }
                Answer::Timeout => return Outcome::Timeout,
            }
        } else {
            prefix.push(Lit::new(v, false));
        }
    }
    Outcome::Sat(model)
}
