use std::fmt;

use thiserror::Error;

use crate::formula::Signature;
use crate::sexpr::{read_all, ParseError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("structures must have a nonempty domain")]
    EmptyDomain,
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("relation `{rel}` has arity {arity}, got a tuple of length {len}")]
    Arity {
        rel: String,
        arity: usize,
        len: usize,
    },
    #[error("element {element} out of range for a domain of size {size}")]
    OutOfRange { element: usize, size: usize },
    #[error("relation `{rel}` with arity {arity} over {size} elements is too large to store")]
    TooLarge {
        rel: String,
        arity: usize,
        size: usize,
    },
}

const MAX_TABLE: usize = 1 << 28;

/// Interpretation of one relation as a dense truth table indexed by tuples in
/// lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relation {
    arity: usize,
    bits: Vec<bool>,
}

impl Relation {
    pub fn arity(&self) -> usize {
        self.arity
    }
}

/// A finite structure with domain `{0, …, size-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Structure {
    size: usize,
    rels: Vec<(String, Relation)>,
}

pub(crate) fn tuple_index(size: usize, tuple: &[usize]) -> usize {
    tuple.iter().fold(0, |acc, &e| acc * size + e)
}

pub(crate) fn index_tuple(size: usize, arity: usize, mut idx: usize) -> Vec<usize> {
    let mut t = vec![0; arity];
    for slot in t.iter_mut().rev() {
        *slot = idx % size;
        idx /= size;
    }
    t
}

/// Every tuple of the given length over `0..size`, in lexicographic order.
pub fn all_tuples(size: usize, arity: usize) -> impl Iterator<Item = Vec<usize>> {
    let count = size.pow(arity as u32);
    (0..count).map(move |i| index_tuple(size, arity, i))
}

impl Structure {
    /// The structure over `sig` in which every relation is empty.
    pub fn empty(sig: &Signature, size: usize) -> Result<Self, StructureError> {
        if size == 0 {
            return Err(StructureError::EmptyDomain);
        }
        let mut rels = Vec::new();
        for (name, arity) in sig.relations() {
            let len = size
                .checked_pow(arity as u32)
                .filter(|&l| l <= MAX_TABLE)
                .ok_or_else(|| StructureError::TooLarge {
                    rel: name.to_string(),
                    arity,
                    size,
                })?;
            rels.push((
                name.to_string(),
                Relation {
                    arity,
                    bits: vec![false; len],
                },
            ));
        }
        Ok(Structure { size, rels })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn signature(&self) -> Signature {
        Signature::from_relations(self.rels.iter().map(|(n, r)| (n.as_str(), r.arity)))
            .expect("structure relations are unique")
    }

    pub fn relation_names(&self) -> impl Iterator<Item = &str> {
        self.rels.iter().map(|(n, _)| n.as_str())
    }

    pub(crate) fn position(&self, rel: &str) -> Option<usize> {
        self.rels
            .binary_search_by(|(n, _)| n.as_str().cmp(rel))
            .ok()
    }

    pub fn arity(&self, rel: &str) -> Option<usize> {
        self.position(rel).map(|i| self.rels[i].1.arity)
    }

    fn relation(&self, rel: &str) -> Result<&Relation, StructureError> {
        self.position(rel)
            .map(|i| &self.rels[i].1)
            .ok_or_else(|| StructureError::UnknownRelation(rel.to_string()))
    }

    fn check_tuple(&self, rel: &str, r: &Relation, tuple: &[usize]) -> Result<(), StructureError> {
        if tuple.len() != r.arity {
            return Err(StructureError::Arity {
                rel: rel.to_string(),
                arity: r.arity,
                len: tuple.len(),
            });
        }
        if let Some(&e) = tuple.iter().find(|&&e| e >= self.size) {
            return Err(StructureError::OutOfRange {
                element: e,
                size: self.size,
            });
        }
        Ok(())
    }

    /// Truth value of `rel(tuple)`.
    pub fn holds(&self, rel: &str, tuple: &[usize]) -> Result<bool, StructureError> {
        let r = self.relation(rel)?;
        self.check_tuple(rel, r, tuple)?;
        Ok(r.bits[tuple_index(self.size, tuple)])
    }

    pub fn set(&mut self, rel: &str, tuple: &[usize], value: bool) -> Result<(), StructureError> {
        let i = self
            .position(rel)
            .ok_or_else(|| StructureError::UnknownRelation(rel.to_string()))?;
        let r = &self.rels[i].1;
        self.check_tuple(rel, r, tuple)?;
        let idx = tuple_index(self.size, tuple);
        self.rels[i].1.bits[idx] = value;
        Ok(())
    }

    /// Fast access by relation position, unchecked beyond slice bounds.
    pub(crate) fn holds_at(&self, pos: usize, tuple: &[usize]) -> bool {
        self.rels[pos].1.bits[tuple_index(self.size, tuple)]
    }

    pub(crate) fn bits_at_mut(&mut self, pos: usize) -> &mut [bool] {
        &mut self.rels[pos].1.bits
    }

    /// True tuples of `rel`, in lexicographic order.
    pub fn tuples(&self, rel: &str) -> Result<Vec<Vec<usize>>, StructureError> {
        let r = self.relation(rel)?;
        Ok(r.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| index_tuple(self.size, r.arity, i))
            .collect())
    }

    /// Adds an empty relation; a relation with the same name and arity is
    /// left untouched.
    pub fn add_relation(&mut self, name: &str, arity: usize) -> Result<(), StructureError> {
        match self.position(name) {
            Some(i) if self.rels[i].1.arity == arity => Ok(()),
            Some(i) => Err(StructureError::Arity {
                rel: name.to_string(),
                arity: self.rels[i].1.arity,
                len: arity,
            }),
            None => {
                let len = self
                    .size
                    .checked_pow(arity as u32)
                    .filter(|&l| l <= MAX_TABLE)
                    .ok_or_else(|| StructureError::TooLarge {
                        rel: name.to_string(),
                        arity,
                        size: self.size,
                    })?;
                let at = self.rels.partition_point(|(n, _)| n.as_str() < name);
                self.rels.insert(
                    at,
                    (
                        name.to_string(),
                        Relation {
                            arity,
                            bits: vec![false; len],
                        },
                    ),
                );
                Ok(())
            }
        }
    }

    /// Keeps only the relations for which `keep` returns true.
    pub fn reduct(&self, keep: impl Fn(&str) -> bool) -> Structure {
        Structure {
            size: self.size,
            rels: self.rels.iter().filter(|(n, _)| keep(n)).cloned().collect(),
        }
    }

    /// Parses the structure file format against a signature. Relations of
    /// the signature that the file omits are empty.
    pub fn parse(text: &str, sig: &Signature) -> Result<Structure, ParseError> {
        let items = read_all(text)?;
        let Some((first, rest)) = items.split_first() else {
            return Err(ParseError::new(Default::default(), "missing (size N)"));
        };
        let head = first.expect_list("(size N)")?;
        if first.head() != Some("size") || head.len() != 2 {
            return Err(ParseError::new(first.pos(), "expected (size N)"));
        }
        let size = head[1].expect_usize("domain size")?;
        let mut s = Structure::empty(sig, size)
            .map_err(|e| ParseError::new(head[1].pos(), e.to_string()))?;
        for entry in rest {
            let parts = entry.expect_list("structure entry")?;
            match entry.head() {
                Some("rel") if parts.len() >= 2 => {
                    let name = parts[1].expect_symbol("relation name")?;
                    for t in &parts[2..] {
                        let elems = t.expect_list("tuple")?;
                        let tuple = elems
                            .iter()
                            .map(|e| e.expect_usize("element index"))
                            .collect::<Result<Vec<_>, _>>()?;
                        s.set(name, &tuple, true)
                            .map_err(|e| ParseError::new(t.pos(), e.to_string()))?;
                    }
                    if let Err(e) = s.relation(name) {
                        return Err(ParseError::new(parts[1].pos(), e.to_string()));
                    }
                }
                Some("prop") if parts.len() == 3 => {
                    let name = parts[1].expect_symbol("proposition name")?;
                    let value = match parts[2].as_symbol() {
                        Some("true") => true,
                        Some("false") => false,
                        _ => return Err(ParseError::new(parts[2].pos(), "expected true or false")),
                    };
                    s.set(name, &[], value)
                        .map_err(|e| ParseError::new(parts[1].pos(), e.to_string()))?;
                }
                _ => {
                    return Err(ParseError::new(
                        entry.pos(),
                        "expected (rel NAME tuple*) or (prop NAME true|false)",
                    ))
                }
            }
        }
        Ok(s)
    }
}

impl fmt::Display for Structure {
    /// Renders in the structure file format, one entry per line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(size {})", self.size)?;
        for (name, r) in &self.rels {
            if r.arity == 0 {
                writeln!(f, "(prop {name} {})", r.bits[0])?;
                continue;
            }
            write!(f, "(rel {name}")?;
            for (i, _) in r.bits.iter().enumerate().filter(|(_, &b)| b) {
                let t = index_tuple(self.size, r.arity, i);
                let parts: Vec<String> = t.iter().map(|e| e.to_string()).collect();
                write!(f, " ({})", parts.join(" "))?;
            }
            writeln!(f, ")")?;
        }
        Ok(())
    }
}
