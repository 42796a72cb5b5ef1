use super::SmallModelError;
use crate::normal_form::NormalForm;
use crate::semantics::{one_type_of, OneType, Structure};

/// The domain `[2K] × [m∃] × [(K−1)^(K−1)] × [L]`, with coordinates
/// numbered from 1 and elements identified by their mixed-radix index
/// `(((s−1)·m∃ + (i−1))·T + (t−1))·L + (l−1)` where `T = (K−1)^(K−1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmallDomain {
    pub k: usize,
    pub m_exists: usize,
    /// `(K−1)^(K−1)`, with `0⁰ = 1`.
    pub t_count: usize,
    /// 1-types realized in the source, ordered by first realizing element.
    pub types: Vec<OneType>,
}

/// Saturating `(k−1)^(k−1)` with `0⁰ = 1`.
pub fn t_pool(k: usize) -> usize {
    let b = k.saturating_sub(1);
    (0..b).fold(1usize, |acc, _| acc.saturating_mul(b))
}

impl SmallDomain {
    pub fn new(k: usize, m_exists: usize, types: Vec<OneType>) -> Self {
        SmallDomain {
            k,
            m_exists,
            t_count: t_pool(k),
            types,
        }
    }

    pub fn l(&self) -> usize {
        self.types.len()
    }

    pub fn size(&self) -> usize {
        (2 * self.k)
            .saturating_mul(self.m_exists)
            .saturating_mul(self.t_count)
            .saturating_mul(self.l())
    }

    pub fn element(&self, s: usize, i: usize, t: usize, l: usize) -> usize {
        debug_assert!((1..=2 * self.k).contains(&s) && (1..=self.m_exists).contains(&i));
        debug_assert!((1..=self.t_count).contains(&t) && (1..=self.l()).contains(&l));
        (((s - 1) * self.m_exists + (i - 1)) * self.t_count + (t - 1)) * self.l() + (l - 1)
    }

    /// `(s, i, t, l)` of an element.
    pub fn coords(&self, e: usize) -> (usize, usize, usize, usize) {
        let l = e % self.l();
        let rest = e / self.l();
        let t = rest % self.t_count;
        let rest = rest / self.t_count;
        let i = rest % self.m_exists;
        let s = rest / self.m_exists;
        (s + 1, i + 1, t + 1, l + 1)
    }

    pub fn layer(&self, e: usize) -> usize {
        self.coords(e).0
    }

    /// Index `l` (from 1) of the type associated with an element.
    pub fn type_index(&self, e: usize) -> usize {
        self.coords(e).3
    }

    pub fn type_of(&self, e: usize) -> &OneType {
        &self.types[self.type_index(e) - 1]
    }

    /// Index (from 1) of `ty` in the enumeration.
    pub fn index_of(&self, ty: &OneType) -> Option<usize> {
        self.types.iter().position(|t| t == ty).map(|p| p + 1)
    }

    pub fn render(&self, e: usize) -> String {
        let (s, i, t, l) = self.coords(e);
        format!("({s},{i},{t},{l})")
    }
}

/// The domain for shrinking `s`: `K` is the longest existential prefix and
/// the types are those realized in `s`.
pub fn build_small_domain(s: &Structure, nf: &NormalForm) -> Result<SmallDomain, SmallModelError> {
    if nf.m_exists() == 0 {
        return Err(SmallModelError::NoExistential);
    }
    if s.size() == 0 {
        return Err(SmallModelError::EmptySource);
    }
    let mut types: Vec<OneType> = Vec::new();
    for e in 0..s.size() {
        let ty = one_type_of(s, e);
        if !types.contains(&ty) {
            types.push(ty);
        }
    }
    Ok(SmallDomain::new(nf.k_max(), nf.m_exists(), types))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_problem;
    use crate::normal_form::{to_weak_normal_form, zero_ary_branches};

    fn ty(i: usize) -> OneType {
        OneType([("P".to_string(), i == 1)].into_iter().collect())
    }

    #[test]
    fn sizes() {
        assert_eq!(SmallDomain::new(3, 2, vec![ty(0), ty(1)]).size(), 96);
        assert_eq!(SmallDomain::new(1, 1, vec![ty(0), ty(1)]).size(), 4);
        assert_eq!(t_pool(1), 1);
        assert_eq!(t_pool(2), 1);
        assert_eq!(t_pool(4), 27);
    }

    #[test]
    fn coordinates_round_trip() {
        let d = SmallDomain::new(3, 2, vec![ty(0), ty(1)]);
        for e in 0..d.size() {
            let (s, i, t, l) = d.coords(e);
            assert_eq!(d.element(s, i, t, l), e);
        }
        assert_eq!(d.coords(0), (1, 1, 1, 1));
        assert_eq!(d.render(95), "(6,2,4,2)");
    }

    #[test]
    fn cycle_domain_has_four_elements() {
        let p = parse_problem("(decl R 2) (forall (x) (exists (y) (R x y)))", false).unwrap();
        let w = to_weak_normal_form(&p.formula, &p.signature).unwrap();
        let nf = zero_ary_branches(&w).remove(0).normal_form;
        let s = Structure::parse("(size 3) (rel R (0 1) (1 2) (2 0))", &nf.signature).unwrap();
        let d = build_small_domain(&s, &nf).unwrap();
        assert_eq!((d.k, d.l(), d.size()), (2, 1, 4));
    }
}
