use super::VertexSet;
use crate::error::{Error, Result};

/// A total function between finite labeled sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteFunction {
    domain: VertexSet,
    codomain: VertexSet,
    map: Vec<usize>,
}

impl FiniteFunction {
    /// `map[i]` is the codomain index of domain element `i`.
    pub fn new(domain: VertexSet, codomain: VertexSet, map: Vec<usize>) -> Result<Self> {
        if map.len() != domain.len() {
            return Err(Error::DomainMismatch(format!(
                "function defined on {} of {} domain elements",
                map.len(),
                domain.len()
            )));
        }
        if let Some(&bad) = map.iter().find(|&&y| y >= codomain.len()) {
            return Err(Error::DomainMismatch(format!(
                "image index {bad} outside codomain of size {}",
                codomain.len()
            )));
        }
        Ok(FiniteFunction {
            domain,
            codomain,
            map,
        })
    }

    /// Builds a function from `(domain label, codomain label)` pairs; every
    /// domain label must appear exactly once.
    pub fn from_pairs(domain: VertexSet, codomain: VertexSet, pairs: &[(&str, &str)]) -> Result<Self> {
        let mut map = vec![None; domain.len()];
        for (x, y) in pairs {
            let i = domain.index_of(x)?;
            let j = codomain.index_of(y)?;
            if map[i].replace(j).is_some() {
                return Err(Error::DuplicateLabel(x.to_string()));
            }
        }
        let map = map
            .into_iter()
            .enumerate()
            .map(|(i, m)| m.ok_or_else(|| Error::DomainMismatch(format!("`{}` is unmapped", domain.label(i)))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(domain, codomain, map)
    }

    pub fn identity(set: VertexSet) -> Self {
        let map = (0..set.len()).collect();
        FiniteFunction {
            domain: set.clone(),
            codomain: set,
            map,
        }
    }

    pub fn constant(domain: VertexSet, codomain: VertexSet, target: usize) -> Result<Self> {
        let map = vec![target; domain.len()];
        Self::new(domain, codomain, map)
    }

    pub fn domain(&self) -> &VertexSet {
        &self.domain
    }

    pub fn codomain(&self) -> &VertexSet {
        &self.codomain
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn apply_label(&self, label: &str) -> Result<&str> {
        let i = self.domain.index_of(label)?;
        Ok(self.codomain.label(self.map[i]))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    /// `self` after `first`: `x -> self(first(x))`.
    pub fn after(&self, first: &FiniteFunction) -> Result<FiniteFunction> {
        if first.codomain != self.domain {
            return Err(Error::DomainMismatch(
                "cannot compose functions: codomain and domain differ".into(),
            ));
        }
        Ok(FiniteFunction {
            domain: first.domain.clone(),
            codomain: self.codomain.clone(),
            map: first.map.iter().map(|&i| self.map[i]).collect(),
        })
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.codomain.len()];
        self.map.iter().all(|&y| !std::mem::replace(&mut seen[y], true))
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.codomain.len()];
        for &y in &self.map {
            seen[y] = true;
        }
        seen.into_iter().all(|s| s)
    }

    pub fn preimage(&self, y: usize) -> impl Iterator<Item = usize> + '_ {
        self.map
            .iter()
            .enumerate()
            .filter(move |(_, &v)| v == y)
            .map(|(i, _)| i)
    }

    /// Same map with relabeled codomain of equal size.
    pub fn with_codomain(&self, codomain: VertexSet) -> Result<FiniteFunction> {
        if codomain.len() != self.codomain.len() {
            return Err(Error::DimensionMismatch("codomain sizes differ".into()));
        }
        Ok(FiniteFunction {
            domain: self.domain.clone(),
            codomain,
            map: self.map.clone(),
        })
    }

    /// Pairs of labels `(x, f(x))` in domain order.
    pub fn label_pairs(&self) -> Vec<(String, String)> {
        self.map
            .iter()
            .enumerate()
            .map(|(i, &j)| (self.domain.label(i).to_string(), self.codomain.label(j).to_string()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vs(l: &[&str]) -> VertexSet {
        VertexSet::new(l.iter().copied()).unwrap()
    }

    #[test]
    fn from_pairs_requires_totality() {
        let r = FiniteFunction::from_pairs(vs(&["a", "b"]), vs(&["x"]), &[("a", "x")]);
        assert!(matches!(r, Err(Error::DomainMismatch(_))));
        let r = FiniteFunction::from_pairs(vs(&["a"]), vs(&["x"]), &[("a", "y")]);
        assert!(matches!(r, Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn composition_and_properties() {
        let f = FiniteFunction::from_pairs(vs(&["a", "b"]), vs(&["x", "y"]), &[("a", "y"), ("b", "x")]).unwrap();
        let g = FiniteFunction::constant(vs(&["x", "y"]), vs(&["*"]), 0).unwrap();
        let h = g.after(&f).unwrap();
        assert_eq!(h.as_slice(), &[0, 0]);
        assert!(f.is_injective() && f.is_surjective());
        assert!(!h.is_injective());
        assert!(f.after(&g).is_err());
    }
}
