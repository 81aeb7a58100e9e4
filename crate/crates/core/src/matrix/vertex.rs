use std::fmt;

use indexmap::IndexSet;

use crate::error::{Error, Result};

/// An ordered set of distinct labels. The order is the index order used by
/// matrices.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct VertexSet(IndexSet<String>);

impl VertexSet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = IndexSet::new();
        for l in labels {
            let l = l.into();
            if set.contains(&l) {
                return Err(Error::DuplicateLabel(l));
            }
            set.insert(l);
        }
        Ok(VertexSet(set))
    }

    pub fn empty() -> Self {
        VertexSet(IndexSet::new())
    }

    /// `prefix0, prefix1, ...`
    pub fn numbered(prefix: &str, n: usize) -> Self {
        VertexSet((0..n).map(|i| format!("{prefix}{i}")).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.0.contains(label)
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.0
            .get_index_of(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn label(&self, i: usize) -> &str {
        &self.0[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn to_vec(&self) -> Vec<String> {
        self.0.iter().cloned().collect()
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.to_vec().join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates() {
        assert_eq!(
            VertexSet::new(["a", "b", "a"]),
            Err(Error::DuplicateLabel("a".into()))
        );
    }

    #[test]
    fn keeps_insertion_order() {
        let v = VertexSet::new(["z", "a", "m"]).unwrap();
        assert_eq!(v.index_of("a").unwrap(), 1);
        assert_eq!(v.label(2), "m");
        assert!(v.index_of("q").is_err());
    }
}
