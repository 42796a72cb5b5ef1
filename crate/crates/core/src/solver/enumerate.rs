use crate::formula::Signature;
use crate::semantics::{index_tuple, tuple_index, Structure, StructureError};

/// Atom permutation induced by an element permutation: atom `i` of the
/// concatenated relation tables maps to the atom of the permuted tuple.
pub(crate) fn atom_permutation(layout: &[(usize, usize)], n: usize, perm: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut offset = 0;
    for &(arity, len) in layout {
        for i in 0..len {
            let t: Vec<usize> = index_tuple(n, arity, i)
                .into_iter()
                .map(|e| perm[e])
                .collect();
            out.push(offset + tuple_index(n, &t));
        }
        offset += len;
    }
    out
}

/// `(arity, table length)` for each relation of `sig` in name order.
pub(crate) fn table_layout(sig: &Signature, n: usize) -> Vec<(usize, usize)> {
    sig.relations().map(|(_, a)| (a, n.pow(a as u32))).collect()
}

pub(crate) fn structure_from_bits(
    sig: &Signature,
    n: usize,
    bits: &[bool],
) -> Result<Structure, StructureError> {
    let mut s = Structure::empty(sig, n)?;
    let mut offset = 0;
    for pos in 0..sig.len() {
        let table = s.bits_at_mut(pos);
        let len = table.len();
        table.copy_from_slice(&bits[offset..offset + len]);
        offset += len;
    }
    Ok(s)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    fn go(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == p.len() {
            out.push(p.clone());
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            go(k + 1, p, out);
            p.swap(k, i);
        }
    }
    go(0, &mut p, &mut out);
    out.retain(|q| q.iter().enumerate().any(|(i, &x)| i != x));
    out
}

/// All structures over `sig` with domain `0..n`, ordered by their atom
/// vectors (relation tables concatenated in name order, false before true,
/// first atom most significant).
pub struct StructureEnumerator {
    sig: Signature,
    n: usize,
    bits: Vec<bool>,
    started: bool,
    done: bool,
    /// Atom permutations for isomorphism pruning, empty when disabled.
    perms: Vec<Vec<usize>>,
}

impl StructureEnumerator {
    fn is_least(&self) -> bool {
        self.perms.iter().all(|p| {
            for (i, &a) in self.bits.iter().enumerate() {
                let b = self.bits[p[i]];
                if a != b {
                    return !a;
                }
            }
            true
        })
    }

    fn advance(&mut self) -> bool {
        for b in self.bits.iter_mut().rev() {
            if *b {
                *b = false;
            } else {
                *b = true;
                return true;
            }
        }
        false
    }
}

impl Iterator for StructureEnumerator {
    type Item = Structure;

    fn next(&mut self) -> Option<Structure> {
        loop {
            if self.done {
                return None;
            }
            if self.started && !self.advance() {
                self.done = true;
                return None;
            }
            self.started = true;
            if self.is_least() {
                return Some(
                    structure_from_bits(&self.sig, self.n, &self.bits)
                        .expect("size checked on creation"),
                );
            }
        }
    }
}

/// Enumerates every structure of size `n` over `sig`; with `prune_isomorphic`
/// only the lexicographically least member of each isomorphism class.
pub fn enumerate_structures(
    sig: &Signature,
    n: usize,
    prune_isomorphic: bool,
) -> Result<StructureEnumerator, StructureError> {
    Structure::empty(sig, n)?;
    let layout = table_layout(sig, n);
    let total: usize = layout.iter().map(|&(_, l)| l).sum();
    let perms = if prune_isomorphic {
        permutations(n)
            .iter()
            .map(|p| atom_permutation(&layout, n, p))
            .collect()
    } else {
        Vec::new()
    };
    Ok(StructureEnumerator {
        sig: sig.clone(),
        n,
        bits: vec![false; total],
        started: false,
        done: false,
        perms,
    })
}

/// `2^(number of atoms)`, or `None` on overflow.
pub fn count_structures(sig: &Signature, n: usize) -> Option<u128> {
    let mut atoms: u32 = 0;
    for (_, a) in sig.relations() {
        let len = u32::try_from(n.checked_pow(a as u32)?).ok()?;
        atoms = atoms.checked_add(len)?;
    }
    1u128.checked_shl(atoms)
}
