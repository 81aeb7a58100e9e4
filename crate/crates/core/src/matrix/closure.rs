//! Solutions of the path problem `F(M) = join_{n >= 0} M^n`.
//!
//! Three routes are provided: pivot elimination using the quantale's local
//! star ([`RMatrix::closure_fw`]), the truncated power series
//! ([`RMatrix::closure_series`]), and repeated squaring of `1 + M`
//! ([`RMatrix::closure_fix`]). They agree on every instance; the series is
//! the reference oracle.

use super::RMatrix;
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::quantale::Quantale;

/// Selects the closure route.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ClosureAlgorithm {
    /// Pivot elimination.
    #[default]
    Elimination,
    /// Power series, stopped when it stabilizes, capped at `max_terms`.
    Series { max_terms: usize },
    /// Repeated squaring of `1 + M`, capped at `max_iters`.
    Squaring { max_iters: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesResult<Q: Quantale> {
    pub closure: RMatrix<Q>,
    /// First `K` with `series(K) == series(K + 1)`.
    pub stabilized_at: usize,
}

impl<Q: Quantale> RMatrix<Q> {
    pub fn closure(&self, algo: ClosureAlgorithm) -> Result<Self> {
        match algo {
            ClosureAlgorithm::Elimination => self.closure_fw(),
            ClosureAlgorithm::Series { max_terms } => {
                Ok(self.closure_series_stable(max_terms)?.closure)
            }
            ClosureAlgorithm::Squaring { max_iters } => self.closure_fix(max_iters),
        }
    }

    pub fn closure_fw(&self) -> Result<Self> {
        self.closure_fw_with(Execution::default())
    }

    /// Pivot elimination in label order: for each pivot `k`,
    /// `A(i,j) += A(i,k) * star(A(k,k)) * A(k,j)`, then the identity is joined in.
    pub fn closure_fw_with(&self, exec: Execution) -> Result<Self> {
        self.require_square()?;
        let q = &self.q;
        let n = self.rows.len();
        let mut a = self.entries.clone();
        for k in 0..n {
            let pivot = q.star(&a[k * n + k])?;
            let col_k: Vec<Q::Elem> = (0..n).map(|i| a[i * n + k].clone()).collect();
            let row_k: Vec<Q::Elem> = a[k * n..(k + 1) * n].to_vec();
            // (pivot * A(k, j)) once per column
            let tail: Vec<Q::Elem> = row_k.iter().map(|x| q.mul(&pivot, x)).collect();
            par::for_each_row(exec, &mut a, n, |i, row| {
                let head = &col_k[i];
                if q.is_bottom(head) {
                    return;
                }
                for (cell, t) in row.iter_mut().zip(&tail) {
                    *cell = q.join(cell, &q.mul(head, t));
                }
            });
        }
        let unit = q.unit();
        for i in 0..n {
            a[i * n + i] = q.join(&a[i * n + i], &unit);
        }
        Ok(RMatrix {
            q: self.q.clone(),
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            entries: a,
        })
    }

    /// `join_{0 <= n <= k} M^n`.
    pub fn closure_series(&self, k: usize) -> Result<Self> {
        self.require_square()?;
        let mut acc = Self::identity(self.q.clone(), self.rows.clone());
        let mut power = acc.clone();
        for _ in 0..k {
            power = power.mul(self)?;
            acc = acc.join(&power)?;
        }
        Ok(acc)
    }

    /// Extends the series until adding the next power changes nothing.
    /// Once `series(K + 1) == series(K)` every later partial sum is equal too.
    pub fn closure_series_stable(&self, max_terms: usize) -> Result<SeriesResult<Q>> {
        self.require_square()?;
        let mut acc = Self::identity(self.q.clone(), self.rows.clone());
        let mut power = acc.clone();
        for k in 0..=max_terms {
            power = power.mul(self)?;
            let next = acc.join(&power)?;
            if next == acc {
                return Ok(SeriesResult {
                    closure: acc,
                    stabilized_at: k,
                });
            }
            acc = next;
        }
        Err(Error::NonConvergence {
            iterations: max_terms,
        })
    }

    /// Squares `P = 1 + M` until `P * P == P`.
    pub fn closure_fix(&self, max_iters: usize) -> Result<Self> {
        Ok(self.closure_fix_counted(max_iters)?.0)
    }

    /// Like [`RMatrix::closure_fix`], also returning the number of squarings
    /// performed (an R-category is returned after one).
    pub fn closure_fix_counted(&self, max_iters: usize) -> Result<(Self, usize)> {
        self.require_square()?;
        let mut p = Self::identity(self.q.clone(), self.rows.clone()).join(self)?;
        for iter in 1..=max_iters {
            let sq = p.mul(&p)?;
            if sq == p {
                return Ok((p, iter));
            }
            p = sq;
        }
        Err(Error::NonConvergence {
            iterations: max_iters,
        })
    }

    /// Identity and composition laws of an enriched category:
    /// `1 <= M` and `M * M <= M`.
    pub fn is_rcategory(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let id = Self::identity(self.q.clone(), self.rows.clone());
        let Ok(sq) = self.mul(self) else {
            return false;
        };
        id.leq(self).unwrap_or(false) && sq.leq(self).unwrap_or(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::VertexSet;
    use crate::quantale::{Boolean, TruncatedLanguage, Tropical, WordSet};

    const INF: f64 = f64::INFINITY;

    fn vs(l: &[&str]) -> VertexSet {
        VertexSet::new(l.iter().copied()).unwrap()
    }

    #[test]
    fn single_edge_closure() {
        let m = RMatrix::square(Tropical, vs(&["a", "b"]), vec![vec![INF, 3.0], vec![INF, INF]]).unwrap();
        assert_eq!(m.closure_fw().unwrap().to_rows(), vec![vec![0.0, 3.0], vec![INF, 0.0]]);
    }

    #[test]
    fn composite_closure_entry() {
        let m = RMatrix::square(
            Tropical,
            vs(&["a", "b", "c~d", "e"]),
            vec![
                vec![1.0, 2.0, 0.1, INF],
                vec![3.0, 0.0, 0.2, INF],
                vec![INF, 1.0, 0.2, INF],
                vec![INF, INF, 0.0, 9.0],
            ],
        )
        .unwrap();
        let oracle = m.closure_series(8).unwrap();
        assert_eq!(*oracle.get_by_label("a", "b").unwrap(), 1.1);
        let fw = m.closure_fw().unwrap();
        assert_eq!(fw, oracle);
        assert_eq!(*fw.get_by_label("a", "b").unwrap(), 1.1);
    }

    /// Reachability by depth-first search.
    fn reach(adj: &[Vec<bool>]) -> Vec<Vec<bool>> {
        let n = adj.len();
        let mut out = vec![vec![false; n]; n];
        for s in 0..n {
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                if out[s][u] {
                    continue;
                }
                out[s][u] = true;
                stack.extend((0..n).filter(|&v| adj[u][v]));
            }
        }
        out
    }

    #[test]
    fn boolean_cycle_closure() {
        let adj = vec![
            vec![false, true, false],
            vec![false, false, true],
            vec![true, false, false],
        ];
        let expected = reach(&adj);
        assert!(expected.iter().flatten().all(|&b| b));
        let m = RMatrix::square(Boolean, vs(&["x", "y", "z"]), adj).unwrap();
        assert_eq!(m.closure_fw().unwrap().to_rows(), expected);
    }

    #[test]
    fn series_edge_cases() {
        let m = RMatrix::square(Tropical, vs(&["a", "b"]), vec![vec![2.0, 1.0], vec![INF, 5.0]]).unwrap();
        let id = RMatrix::identity(Tropical, m.rows().clone());
        assert_eq!(m.closure_series(0).unwrap(), id);
        assert_eq!(m.closure_series(1).unwrap(), id.join(&m).unwrap());
    }

    #[test]
    fn acyclic_series_at_size_matches_elimination() {
        let m = RMatrix::square(
            Tropical,
            vs(&["a", "b", "c", "d"]),
            vec![
                vec![INF, 1.0, 4.0, INF],
                vec![INF, INF, 2.0, 7.0],
                vec![INF, INF, INF, 1.0],
                vec![INF, INF, INF, INF],
            ],
        )
        .unwrap();
        assert_eq!(m.closure_series(4).unwrap(), m.closure_fw().unwrap());
    }

    #[test]
    fn fixpoint_on_rcategory_is_immediate() {
        let m = RMatrix::square(Tropical, vs(&["a", "b"]), vec![vec![0.0, 3.0], vec![INF, 0.0]]).unwrap();
        assert!(m.is_rcategory());
        let (p, iters) = m.closure_fix_counted(10).unwrap();
        assert_eq!(p, m);
        assert_eq!(iters, 1);
    }

    #[test]
    fn fixpoint_reports_non_convergence() {
        let m = RMatrix::square(
            Tropical,
            vs(&["a", "b", "c", "d"]),
            vec![
                vec![INF, 1.0, INF, INF],
                vec![INF, INF, 1.0, INF],
                vec![INF, INF, INF, 1.0],
                vec![INF, INF, INF, INF],
            ],
        )
        .unwrap();
        assert_eq!(m.closure_fix(1), Err(Error::NonConvergence { iterations: 1 }));
        assert!(m.closure_fix(5).is_ok());
    }

    #[test]
    fn language_fixpoint_matches_series() {
        let l = TruncatedLanguage::new(['a', 'b'], 3);
        let m = RMatrix::square(
            l.clone(),
            vs(&["p", "q"]),
            vec![
                vec![WordSet::of(&["a"]), WordSet::of(&["b"])],
                vec![WordSet::of(&["ab"]), WordSet::empty()],
            ],
        )
        .unwrap();
        let series = m.closure_series(3).unwrap();
        assert_eq!(m.closure_fix(10).unwrap(), series);
        assert_eq!(m.closure_fw().unwrap(), series);
        // words longer than 3 vanish: "aaaa" never appears
        assert!(series.get(0, 0).iter().all(|w| w.len() <= 3));
    }

    #[test]
    fn rcategory_checks() {
        let id = RMatrix::identity(Tropical, vs(&["a", "b"]));
        assert!(id.is_rcategory());
        let bad = RMatrix::square(Tropical, vs(&["a", "b"]), vec![vec![5.0, 3.0], vec![INF, 0.0]]).unwrap();
        assert!(!bad.is_rcategory());
        let m = RMatrix::square(Tropical, vs(&["a", "b"]), vec![vec![5.0, 3.0], vec![1.0, 2.0]]).unwrap();
        assert!(m.closure_fw().unwrap().is_rcategory());
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let n = 12;
        let labels = VertexSet::numbered("v", n);
        let m = RMatrix::from_fn(Tropical, labels.clone(), labels, |i, j| {
            if (i * 7 + j * 3) % 5 == 0 {
                INF
            } else {
                ((i * 13 + j * 5) % 17) as f64 / 4.0
            }
        });
        let s = m.closure_fw_with(Execution::Sequential).unwrap();
        let p = m.closure_fw_with(Execution::Parallel).unwrap();
        assert_eq!(s, p);
        assert_eq!(
            m.mul_with(&m, Execution::Sequential).unwrap(),
            m.mul_with(&m, Execution::Parallel).unwrap()
        );
    }
}
