//! Weight domains for path problems.
//!
//! A [`Quantale`] bundles a complete join (with `bottom` as the empty join)
//! and a join-preserving monoidal product (with `unit` as identity). The
//! "zero" of a quantale is always its bottom, never the numeral 0: in the
//! min-plus instance [`Tropical`], `bottom` is `+inf` and `unit` is `0.0`.
//!
//! Each instance also supplies a local [`Quantale::star`], the join of all
//! powers of one element, which drives pivoting in matrix closure.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// Tolerance used by [`Viterbi`] for equality and order.
pub const VITERBI_TOL: f64 = 1e-12;

pub trait Quantale: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    type Elem: Clone + fmt::Debug + PartialEq + Send + Sync;

    /// Textual tag used in files and on the command line.
    fn tag(&self) -> String;

    fn bottom(&self) -> Self::Elem;
    fn unit(&self) -> Self::Elem;
    fn join(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    /// Join over `n >= 0` of `a^n`.
    fn star(&self, a: &Self::Elem) -> Result<Self::Elem>;

    /// Whether `a` is a valid element of this instance.
    fn contains(&self, a: &Self::Elem) -> bool;

    /// Equality, with an instance-specific tolerance.
    fn same(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        a == b
    }

    /// `a <= b` in the quantale order, i.e. `join(a, b) == b`.
    fn leq(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.same(&self.join(a, b), b)
    }

    fn is_commutative(&self) -> bool {
        true
    }

    /// Exact comparison with `bottom`.
    fn is_bottom(&self, a: &Self::Elem) -> bool {
        *a == self.bottom()
    }

    fn check(&self, a: &Self::Elem) -> Result<()> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(Error::InvalidElement {
                instance: self.tag(),
                value: format!("{a:?}"),
            })
        }
    }

    /// [`Quantale::join`] that rejects elements foreign to this instance.
    fn try_join(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.join(a, b))
    }

    /// [`Quantale::mul`] that rejects elements foreign to this instance.
    fn try_mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul(a, b))
    }

    /// Join of a finite sequence; `bottom` when empty.
    fn join_all<'a, I>(&self, items: I) -> Self::Elem
    where
        I: IntoIterator<Item = &'a Self::Elem>,
        Self::Elem: 'a,
    {
        items
            .into_iter()
            .fold(self.bottom(), |acc, x| self.join(&acc, x))
    }

    fn same_instance(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::InstanceMismatch {
                left: self.tag(),
                right: other.tag(),
            })
        }
    }
}

/// Computes `star(a)` by iterating `acc <- unit + a * acc` from `unit`
/// until it stops changing.
pub fn star_by_iteration<Q: Quantale>(q: &Q, a: &Q::Elem, max_iters: usize) -> Result<Q::Elem> {
    let unit = q.unit();
    let mut acc = unit.clone();
    for _ in 0..max_iters {
        let next = q.join(&unit, &q.mul(a, &acc));
        if next == acc {
            return Ok(acc);
        }
        acc = next;
    }
    Err(Error::NonConvergence {
        iterations: max_iters,
    })
}

fn nonnegative(a: f64) -> bool {
    !a.is_nan() && a >= 0.0
}

/// `([0, inf], min, +)`: shortest paths.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tropical;

impl Quantale for Tropical {
    type Elem = f64;

    fn tag(&self) -> String {
        "tropical".into()
    }
    fn bottom(&self) -> f64 {
        f64::INFINITY
    }
    fn unit(&self) -> f64 {
        0.0
    }
    fn join(&self, a: &f64, b: &f64) -> f64 {
        a.min(*b)
    }
    fn mul(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn star(&self, _a: &f64) -> Result<f64> {
        Ok(0.0)
    }
    fn contains(&self, a: &f64) -> bool {
        nonnegative(*a)
    }
    fn leq(&self, a: &f64, b: &f64) -> bool {
        b <= a
    }
}

/// `([0, inf], max, min)`: maximum capacity (bottleneck) paths.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Capacity;

impl Quantale for Capacity {
    type Elem = f64;

    fn tag(&self) -> String {
        "capacity".into()
    }
    fn bottom(&self) -> f64 {
        0.0
    }
    fn unit(&self) -> f64 {
        f64::INFINITY
    }
    fn join(&self, a: &f64, b: &f64) -> f64 {
        a.max(*b)
    }
    fn mul(&self, a: &f64, b: &f64) -> f64 {
        a.min(*b)
    }
    fn star(&self, _a: &f64) -> Result<f64> {
        Ok(f64::INFINITY)
    }
    fn contains(&self, a: &f64) -> bool {
        nonnegative(*a)
    }
    fn leq(&self, a: &f64, b: &f64) -> bool {
        a <= b
    }
}

/// `([0, 1], max, *)`: most likely paths.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Viterbi;

impl Quantale for Viterbi {
    type Elem = f64;

    fn tag(&self) -> String {
        "viterbi".into()
    }
    fn bottom(&self) -> f64 {
        0.0
    }
    fn unit(&self) -> f64 {
        1.0
    }
    fn join(&self, a: &f64, b: &f64) -> f64 {
        a.max(*b)
    }
    fn mul(&self, a: &f64, b: &f64) -> f64 {
        a * b
    }
    fn star(&self, _a: &f64) -> Result<f64> {
        Ok(1.0)
    }
    fn contains(&self, a: &f64) -> bool {
        (0.0..=1.0).contains(a)
    }
    fn same(&self, a: &f64, b: &f64) -> bool {
        (a - b).abs() <= VITERBI_TOL
    }
    fn leq(&self, a: &f64, b: &f64) -> bool {
        *a <= b + VITERBI_TOL
    }
}

/// `({false, true}, or, and)`: reachability.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Boolean;

impl Quantale for Boolean {
    type Elem = bool;

    fn tag(&self) -> String {
        "boolean".into()
    }
    fn bottom(&self) -> bool {
        false
    }
    fn unit(&self) -> bool {
        true
    }
    fn join(&self, a: &bool, b: &bool) -> bool {
        *a || *b
    }
    fn mul(&self, a: &bool, b: &bool) -> bool {
        *a && *b
    }
    fn star(&self, _a: &bool) -> Result<bool> {
        Ok(true)
    }
    fn contains(&self, _a: &bool) -> bool {
        true
    }
    fn leq(&self, a: &bool, b: &bool) -> bool {
        !*a || *b
    }
}

/// A word over a finite alphabet, ordered by length and then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word(String);

impl Word {
    pub fn new(s: impl Into<String>) -> Self {
        Word(s.into())
    }

    pub fn empty() -> Self {
        Word(String::new())
    }

    pub fn len(&self) -> usize {
        self.0.chars().count()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A finite language; iteration order is the canonical length-then-lex order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash, PartialOrd, Ord)]
pub struct WordSet(pub BTreeSet<Word>);

impl WordSet {
    pub fn empty() -> Self {
        WordSet(BTreeSet::new())
    }

    pub fn epsilon() -> Self {
        WordSet::of(&[""])
    }

    pub fn of(words: &[&str]) -> Self {
        WordSet(words.iter().map(|w| Word::new(*w)).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Word> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Sets of words of length at most `max_len`, under union and truncated
/// concatenation. Concatenation is not commutative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedLanguage {
    alphabet: BTreeSet<char>,
    max_len: usize,
}

impl TruncatedLanguage {
    pub fn new(alphabet: impl IntoIterator<Item = char>, max_len: usize) -> Self {
        TruncatedLanguage {
            alphabet: alphabet.into_iter().collect(),
            max_len,
        }
    }

    pub fn alphabet(&self) -> &BTreeSet<char> {
        &self.alphabet
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// All words of length at most `max_len`, in canonical order.
    pub fn all_words(&self) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        let mut layer = vec![String::new()];
        for _ in 0..self.max_len {
            let mut next = Vec::new();
            for w in &layer {
                for c in &self.alphabet {
                    let mut s = w.clone();
                    s.push(*c);
                    next.push(s);
                }
            }
            out.extend(next.iter().cloned().map(Word));
            layer = next;
        }
        out
    }
}

impl Quantale for TruncatedLanguage {
    type Elem = WordSet;

    fn tag(&self) -> String {
        let letters: String = self.alphabet.iter().collect();
        format!("language({},{})", self.max_len, letters)
    }
    fn bottom(&self) -> WordSet {
        WordSet::empty()
    }
    fn unit(&self) -> WordSet {
        WordSet::epsilon()
    }
    fn join(&self, a: &WordSet, b: &WordSet) -> WordSet {
        WordSet(a.0.union(&b.0).cloned().collect())
    }
    fn mul(&self, a: &WordSet, b: &WordSet) -> WordSet {
        let mut out = BTreeSet::new();
        for u in &a.0 {
            for v in &b.0 {
                if u.len() + v.len() <= self.max_len {
                    out.insert(Word(format!("{}{}", u.0, v.0)));
                }
            }
        }
        WordSet(out)
    }
    fn star(&self, a: &WordSet) -> Result<WordSet> {
        // Each round adds words at least one letter longer, so L + 1 rounds
        // reach the fixpoint and one more confirms it.
        star_by_iteration(self, a, self.max_len + 2)
    }
    fn contains(&self, a: &WordSet) -> bool {
        a.0.iter()
            .all(|w| w.len() <= self.max_len && w.0.chars().all(|c| self.alphabet.contains(&c)))
    }
    fn leq(&self, a: &WordSet, b: &WordSet) -> bool {
        a.0.is_subset(&b.0)
    }
    fn is_commutative(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lang2() -> TruncatedLanguage {
        TruncatedLanguage::new(['a', 'b', 'c'], 2)
    }

    #[test]
    fn tropical_join_and_mul() {
        assert_eq!(Tropical.join(&3.0, &5.0), 3.0);
        assert_eq!(Tropical.mul(&3.0, &5.0), 8.0);
        assert_eq!(Tropical.join(&4.5, &Tropical.bottom()), 4.5);
        assert_eq!(Tropical.mul(&4.5, &Tropical.unit()), 4.5);
        assert_eq!(Tropical.mul(&4.5, &Tropical.bottom()), f64::INFINITY);
    }

    #[test]
    fn language_join_and_truncated_mul() {
        let l = lang2();
        assert_eq!(l.join(&WordSet::of(&["a"]), &WordSet::of(&["ab"])), WordSet::of(&["a", "ab"]));
        // "abc" has length 3 > 2
        assert_eq!(l.mul(&WordSet::of(&["a"]), &WordSet::of(&["bc"])), WordSet::empty());
        assert_eq!(l.mul(&WordSet::of(&["a"]), &WordSet::of(&["b"])), WordSet::of(&["ab"]));
    }

    #[test]
    fn language_mismatch_is_rejected() {
        let l = lang2();
        let foreign = WordSet::of(&["z"]);
        assert!(matches!(
            l.try_join(&WordSet::of(&["a"]), &foreign),
            Err(Error::InvalidElement { .. })
        ));
        let long = WordSet::of(&["abc"]);
        assert!(l.try_mul(&long, &WordSet::epsilon()).is_err());
        let other = TruncatedLanguage::new(['a'], 2);
        assert!(l.same_instance(&other).is_err());
    }

    #[test]
    fn star_examples() {
        // join of {0, 2.5, 5.0, ...} under min
        let mut acc = f64::INFINITY;
        let mut pow = 0.0;
        for _ in 0..50 {
            acc = acc.min(pow);
            pow += 2.5;
        }
        assert_eq!(Tropical.star(&2.5).unwrap(), acc);
        assert!(Boolean.star(&false).unwrap());
        let mut sup: f64 = 0.0;
        let mut p = 1.0;
        for _ in 0..50 {
            sup = sup.max(p);
            p *= 0.7;
        }
        assert_eq!(Viterbi.star(&0.7).unwrap(), sup);
        assert_eq!(Capacity.star(&3.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn language_star_stabilizes() {
        let l = lang2();
        let s = l.star(&WordSet::of(&["a", "bc"])).unwrap();
        assert_eq!(s, WordSet::of(&["", "a", "aa", "bc"]));
        assert_eq!(s, l.join(&l.unit(), &l.mul(&WordSet::of(&["a", "bc"]), &s)));
    }

    #[test]
    fn star_of_bottom_is_unit() {
        assert_eq!(Tropical.star(&Tropical.bottom()).unwrap(), Tropical.unit());
        assert_eq!(Capacity.star(&Capacity.bottom()).unwrap(), Capacity.unit());
        assert_eq!(Viterbi.star(&Viterbi.bottom()).unwrap(), Viterbi.unit());
        assert_eq!(Boolean.star(&Boolean.bottom()).unwrap(), Boolean.unit());
        let l = lang2();
        assert_eq!(l.star(&l.bottom()).unwrap(), l.unit());
    }

    #[test]
    fn iteration_reports_non_convergence() {
        // {e, a, aa} needs three rounds
        let r = star_by_iteration(&lang2(), &WordSet::of(&["a"]), 1);
        assert_eq!(r, Err(Error::NonConvergence { iterations: 1 }));
    }

    #[test]
    fn words_sort_by_length_first() {
        let ws = WordSet::of(&["b", "aa", "a", ""]);
        let order: Vec<&str> = ws.iter().map(|w| w.as_str()).collect();
        assert_eq!(order, vec!["", "a", "b", "aa"]);
    }

    fn grid() -> impl Strategy<Value = f64> {
        prop_oneof![
            4 => (0u32..40).prop_map(|k| k as f64 / 4.0),
            1 => Just(f64::INFINITY),
        ]
    }

    proptest! {
        #[test]
        fn tropical_leq_matches_join(a in grid(), b in grid()) {
            prop_assert_eq!(Tropical.leq(&a, &b), Tropical.join(&a, &b) == b);
        }

        #[test]
        fn capacity_distributes(a in grid(), b in grid(), c in grid()) {
            let q = Capacity;
            prop_assert_eq!(q.mul(&a, &q.join(&b, &c)), q.join(&q.mul(&a, &b), &q.mul(&a, &c)));
        }

        #[test]
        fn viterbi_star_fixpoint(a in 0.0f64..=1.0) {
            let s = Viterbi.star(&a).unwrap();
            prop_assert!(Viterbi.same(&s, &Viterbi.join(&1.0, &Viterbi.mul(&a, &s))));
        }
    }
}
