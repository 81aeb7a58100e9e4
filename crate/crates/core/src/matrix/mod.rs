//! Quantale-valued matrices over labeled finite vertex sets.

mod closure;
mod function;
mod vertex;

pub use closure::{ClosureAlgorithm, SeriesResult};
pub use function::FiniteFunction;
pub use vertex::VertexSet;

use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::quantale::Quantale;

/// A `rows x cols` array of quantale elements, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RMatrix<Q: Quantale> {
    q: Q,
    rows: VertexSet,
    cols: VertexSet,
    entries: Vec<Q::Elem>,
}

impl<Q: Quantale> RMatrix<Q> {
    pub fn new(q: Q, rows: VertexSet, cols: VertexSet, entries: Vec<Q::Elem>) -> Result<Self> {
        if entries.len() != rows.len() * cols.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {}x{} matrix",
                entries.len(),
                rows.len(),
                cols.len()
            )));
        }
        for e in &entries {
            q.check(e)?;
        }
        Ok(RMatrix {
            q,
            rows,
            cols,
            entries,
        })
    }

    /// Square matrix from nested rows.
    pub fn square(q: Q, vertices: VertexSet, rows: Vec<Vec<Q::Elem>>) -> Result<Self> {
        Self::from_rows(q, vertices.clone(), vertices, rows)
    }

    pub fn from_rows(
        q: Q,
        rows: VertexSet,
        cols: VertexSet,
        data: Vec<Vec<Q::Elem>>,
    ) -> Result<Self> {
        if data.len() != rows.len() || data.iter().any(|r| r.len() != cols.len()) {
            return Err(Error::DimensionMismatch(format!(
                "row data does not match a {}x{} shape",
                rows.len(),
                cols.len()
            )));
        }
        Self::new(q, rows, cols, data.into_iter().flatten().collect())
    }

    pub fn from_fn(
        q: Q,
        rows: VertexSet,
        cols: VertexSet,
        mut f: impl FnMut(usize, usize) -> Q::Elem,
    ) -> Self {
        let mut entries = Vec::with_capacity(rows.len() * cols.len());
        for i in 0..rows.len() {
            for j in 0..cols.len() {
                entries.push(f(i, j));
            }
        }
        RMatrix {
            q,
            rows,
            cols,
            entries,
        }
    }

    /// Bottom everywhere: the quantale's "zero" matrix.
    pub fn zero(q: Q, rows: VertexSet, cols: VertexSet) -> Self {
        let b = q.bottom();
        let n = rows.len() * cols.len();
        RMatrix {
            q,
            rows,
            cols,
            entries: vec![b; n],
        }
    }

    /// Unit on the diagonal, bottom elsewhere.
    pub fn identity(q: Q, vertices: VertexSet) -> Self {
        let (u, b) = (q.unit(), q.bottom());
        Self::from_fn(q, vertices.clone(), vertices, |i, j| {
            if i == j {
                u.clone()
            } else {
                b.clone()
            }
        })
    }

    pub fn quantale(&self) -> &Q {
        &self.q
    }

    pub fn rows(&self) -> &VertexSet {
        &self.rows
    }

    pub fn cols(&self) -> &VertexSet {
        &self.cols
    }

    pub fn entries(&self) -> &[Q::Elem] {
        &self.entries
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Q::Elem {
        &self.entries[i * self.cols.len() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Q::Elem) {
        let n = self.cols.len();
        self.entries[i * n + j] = value;
    }

    pub fn get_by_label(&self, row: &str, col: &str) -> Result<&Q::Elem> {
        let i = self.rows.index_of(row)?;
        let j = self.cols.index_of(col)?;
        Ok(self.get(i, j))
    }

    pub fn row(&self, i: usize) -> &[Q::Elem] {
        let n = self.cols.len();
        &self.entries[i * n..(i + 1) * n]
    }

    pub fn to_rows(&self) -> Vec<Vec<Q::Elem>> {
        (0..self.rows.len()).map(|i| self.row(i).to_vec()).collect()
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                self.rows.len(),
                self.cols.len()
            )))
        }
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        self.q.same_instance(&other.q)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "shapes {}x{} and {}x{} (or their labels) differ",
                self.rows.len(),
                self.cols.len(),
                other.rows.len(),
                other.cols.len()
            )));
        }
        Ok(())
    }

    /// Matrix product: `(MN)(i,k) = join_j M(i,j) N(j,k)`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.mul_with(other, Execution::default())
    }

    pub fn mul_with(&self, other: &Self, exec: Execution) -> Result<Self> {
        self.q.same_instance(&other.q)?;
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows.len(),
                self.cols.len(),
                other.rows.len(),
                other.cols.len()
            )));
        }
        let q = &self.q;
        let (inner, width) = (self.cols.len(), other.cols.len());
        let mut entries = vec![q.bottom(); self.rows.len() * width];
        par::for_each_row(exec, &mut entries, width, |i, out| {
            let lhs = &self.entries[i * inner..(i + 1) * inner];
            for (j, a) in lhs.iter().enumerate() {
                if q.is_bottom(a) {
                    continue;
                }
                let rhs = &other.entries[j * width..(j + 1) * width];
                for (cell, b) in out.iter_mut().zip(rhs) {
                    *cell = q.join(cell, &q.mul(a, b));
                }
            }
        });
        Ok(RMatrix {
            q: self.q.clone(),
            rows: self.rows.clone(),
            cols: other.cols.clone(),
            entries,
        })
    }

    /// Pointwise join.
    pub fn join(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| self.q.join(a, b))
            .collect();
        Ok(RMatrix {
            q: self.q.clone(),
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            entries,
        })
    }

    /// Pointwise order.
    pub fn leq(&self, other: &Self) -> Result<bool> {
        self.same_shape(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .all(|(a, b)| self.q.leq(a, b)))
    }

    /// Equality up to the instance's tolerance, including labels.
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.q == other.q
            && self.rows == other.rows
            && self.cols == other.cols
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| self.q.same(a, b))
    }

    /// `n`-th power of a square matrix; the 0th power is the identity.
    pub fn pow(&self, n: usize) -> Result<Self> {
        self.require_square()?;
        let mut acc = Self::identity(self.q.clone(), self.rows.clone());
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Pushforward of a square matrix along `f`: entry `(y, y')` is the join of
    /// `M(x, x')` over the preimage of `(y, y')`.
    pub fn pushforward(&self, f: &FiniteFunction) -> Result<Self> {
        self.require_square()?;
        self.pushforward_rect(f, f)
    }

    /// Pushforward pushing rows along `f` and columns along `g`.
    pub fn pushforward_rect(&self, f: &FiniteFunction, g: &FiniteFunction) -> Result<Self> {
        if f.domain() != &self.rows {
            return Err(Error::DomainMismatch(
                "row function domain differs from matrix rows".into(),
            ));
        }
        if g.domain() != &self.cols {
            return Err(Error::DomainMismatch(
                "column function domain differs from matrix columns".into(),
            ));
        }
        let mut out = Self::zero(self.q.clone(), f.codomain().clone(), g.codomain().clone());
        for i in 0..self.rows.len() {
            for j in 0..self.cols.len() {
                let (y, y2) = (f.apply(i), g.apply(j));
                let v = self.q.join(out.get(y, y2), self.get(i, j));
                out.set(y, y2, v);
            }
        }
        Ok(out)
    }

    /// Reindexing: entry `(a, b)` is `M(f(a), g(b))`.
    pub fn restrict(&self, f: &FiniteFunction, g: &FiniteFunction) -> Result<Self> {
        if f.codomain() != &self.rows || g.codomain() != &self.cols {
            return Err(Error::DomainMismatch(
                "restriction maps must land in the matrix index sets".into(),
            ));
        }
        Ok(Self::from_fn(
            self.q.clone(),
            f.domain().clone(),
            g.domain().clone(),
            |a, b| self.get(f.apply(a), g.apply(b)).clone(),
        ))
    }

    /// Block-diagonal sum with bottom off-diagonal blocks.
    pub fn direct_sum(
        &self,
        other: &Self,
        rows: VertexSet,
        cols: VertexSet,
    ) -> Result<Self> {
        self.q.same_instance(&other.q)?;
        if rows.len() != self.rows.len() + other.rows.len()
            || cols.len() != self.cols.len() + other.cols.len()
        {
            return Err(Error::DimensionMismatch("direct sum labels".into()));
        }
        let (r0, c0) = (self.rows.len(), self.cols.len());
        let b = self.q.bottom();
        Ok(Self::from_fn(self.q.clone(), rows, cols, |i, j| {
            match (i < r0, j < c0) {
                (true, true) => self.get(i, j).clone(),
                (false, false) => other.get(i - r0, j - c0).clone(),
                _ => b.clone(),
            }
        }))
    }

    /// Same entries with new labels of equal size.
    pub fn relabel(&self, rows: VertexSet, cols: VertexSet) -> Result<Self> {
        if rows.len() != self.rows.len() || cols.len() != self.cols.len() {
            return Err(Error::DimensionMismatch("relabel sizes differ".into()));
        }
        Ok(RMatrix {
            q: self.q.clone(),
            rows,
            cols,
            entries: self.entries.clone(),
        })
    }

    /// Conjugates a square matrix by the permutation `perm`, where
    /// `perm[old] = new`.
    pub fn permute(&self, perm: &[usize], labels: VertexSet) -> Result<Self> {
        self.require_square()?;
        if perm.len() != self.rows.len() || labels.len() != perm.len() {
            return Err(Error::DimensionMismatch("permutation size".into()));
        }
        let mut out = Self::zero(self.q.clone(), labels.clone(), labels);
        for i in 0..perm.len() {
            for j in 0..perm.len() {
                out.set(perm[i], perm[j], self.get(i, j).clone());
            }
        }
        Ok(out)
    }

    /// Apply `f` to every entry, changing the quantale.
    pub fn map_entries<R: Quantale>(&self, r: R, f: impl Fn(&Q::Elem) -> R::Elem) -> RMatrix<R> {
        RMatrix {
            q: r,
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            entries: self.entries.iter().map(f).collect(),
        }
    }

    /// Whether the `(i, j)` entry is the bottom element.
    pub fn is_bottom_at(&self, i: usize, j: usize) -> bool {
        self.q.is_bottom(self.get(i, j))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantale::{Boolean, Tropical};

    const INF: f64 = f64::INFINITY;

    pub(crate) fn vs(labels: &[&str]) -> VertexSet {
        VertexSet::new(labels.iter().copied()).unwrap()
    }

    fn trop(labels: &[&str], rows: Vec<Vec<f64>>) -> RMatrix<Tropical> {
        RMatrix::square(Tropical, vs(labels), rows).unwrap()
    }

    /// Brute-force product used as an oracle.
    fn naive_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut out = vec![vec![INF; b[0].len()]; a.len()];
        for i in 0..a.len() {
            for k in 0..b[0].len() {
                for j in 0..b.len() {
                    out[i][k] = out[i][k].min(a[i][j] + b[j][k]);
                }
            }
        }
        out
    }

    #[test]
    fn tropical_product_matches_brute_force() {
        let m = vec![vec![0.0, 3.0], vec![INF, 0.0]];
        let expected = naive_mul(&m, &m);
        assert_eq!(expected, vec![vec![0.0, 3.0], vec![INF, 0.0]]);
        let a = trop(&["a", "b"], m);
        assert_eq!(a.mul(&a).unwrap().to_rows(), expected);
    }

    #[test]
    fn boolean_square_of_single_edge_is_empty() {
        let a = RMatrix::square(Boolean, vs(&["a", "b"]), vec![vec![false, true], vec![false, false]])
            .unwrap();
        let sq = a.mul(&a).unwrap();
        assert_eq!(sq.to_rows(), vec![vec![false, false], vec![false, false]]);
    }

    #[test]
    fn identity_and_zero() {
        let x = vs(&["a", "b"]);
        assert_eq!(
            RMatrix::identity(Tropical, x.clone()).to_rows(),
            vec![vec![0.0, INF], vec![INF, 0.0]]
        );
        assert_eq!(
            RMatrix::zero(Tropical, x.clone(), x.clone()).to_rows(),
            vec![vec![INF, INF], vec![INF, INF]]
        );
        assert_eq!(
            RMatrix::identity(Boolean, x).to_rows(),
            vec![vec![true, false], vec![false, true]]
        );
    }

    #[test]
    fn unit_laws_for_product_and_join() {
        let m = trop(&["a", "b"], vec![vec![1.0, 2.5], vec![INF, 4.0]]);
        let id = RMatrix::identity(Tropical, m.rows().clone());
        let zero = RMatrix::zero(Tropical, m.rows().clone(), m.cols().clone());
        assert_eq!(m.mul(&id).unwrap(), m);
        assert_eq!(id.mul(&m).unwrap(), m);
        assert_eq!(m.join(&zero).unwrap(), m);
        let n = trop(&["a", "b"], vec![vec![0.5, 9.0], vec![1.0, INF]]);
        assert!(m.leq(&m.join(&n).unwrap()).unwrap());
    }

    #[test]
    fn join_keeps_glued_minimum() {
        let a = trop(&["v"], vec![vec![0.2]]);
        let b = trop(&["v"], vec![vec![6.0]]);
        assert_eq!(a.join(&b).unwrap().to_rows(), vec![vec![0.2]]);
    }

    #[test]
    fn mismatched_shapes_are_rejected() {
        let a = trop(&["a", "b"], vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let b = trop(&["a"], vec![vec![0.0]]);
        assert!(matches!(a.mul(&b), Err(Error::DimensionMismatch(_))));
        assert!(matches!(a.join(&b), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn pushforward_along_inclusion() {
        let m = trop(
            &["a", "b", "c"],
            vec![vec![1.0, 2.0, 0.1], vec![3.0, 0.0, 0.2], vec![INF, 1.0, 0.2]],
        );
        let f = FiniteFunction::from_pairs(
            m.rows().clone(),
            vs(&["a", "b", "cd", "e"]),
            &[("a", "a"), ("b", "b"), ("c", "cd")],
        )
        .unwrap();
        let p = m.pushforward(&f).unwrap();
        assert_eq!(
            p.to_rows(),
            vec![
                vec![1.0, 2.0, 0.1, INF],
                vec![3.0, 0.0, 0.2, INF],
                vec![INF, 1.0, 0.2, INF],
                vec![INF, INF, INF, INF],
            ]
        );
    }

    #[test]
    fn pushforward_to_a_point_takes_min() {
        let m = trop(&["a", "b"], vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        let f = FiniteFunction::constant(m.rows().clone(), vs(&["*"]), 0).unwrap();
        assert_eq!(m.pushforward(&f).unwrap().to_rows(), vec![vec![1.0]]);
        let id = FiniteFunction::identity(m.rows().clone());
        assert_eq!(m.pushforward(&id).unwrap(), m);
    }

    #[test]
    fn pushforward_domain_is_checked() {
        let m = trop(&["a", "b"], vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        let f = FiniteFunction::identity(vs(&["a"]));
        assert!(matches!(m.pushforward(&f), Err(Error::DomainMismatch(_))));
    }
}
