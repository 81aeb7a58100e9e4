//! Pushouts of finite sets and open matrices (cospans of matrices).
//!
//! An [`OpenMatrix`] `X -> Y` is a square matrix on a carrier set `V`
//! together with legs `X -> V` and `Y -> V`. Composition glues the output
//! carrier vertices of the first with the input carrier vertices of the
//! second by pushout, then joins the two pushed-forward matrices.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::matrix::{FiniteFunction, RMatrix, VertexSet};
use crate::quantale::Quantale;

/// Minimal union-find over `0..n`.
#[derive(Debug, Clone)]
pub(crate) struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Keeps the smaller root, so each root is its class minimum.
    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// The pushout `A -> Q <- B` of a span `A <- Z -> B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushoutResult {
    pub quotient: VertexSet,
    pub left_leg: FiniteFunction,
    pub right_leg: FiniteFunction,
}

/// Pushout of finite sets: `A ⊔ B` modulo `f(z) ~ g(z)`.
///
/// Classes are ordered by their first member (elements of `A` before those of
/// `B`). A class is labeled by its distinct member labels, sorted and joined
/// with `~`; when two classes would get the same label, members of those
/// classes are qualified with `l:` or `r:` by origin.
pub fn pushout(f: &FiniteFunction, g: &FiniteFunction) -> Result<PushoutResult> {
    if f.domain() != g.domain() {
        return Err(Error::DomainMismatch(
            "pushout legs must share their domain".into(),
        ));
    }
    let (a, b) = (f.codomain(), g.codomain());
    let na = a.len();
    let mut ds = DisjointSets::new(na + b.len());
    for z in 0..f.domain().len() {
        ds.union(f.apply(z), na + g.apply(z));
    }

    let mut class_of = vec![usize::MAX; na + b.len()];
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut root_class = HashMap::new();
    for e in 0..na + b.len() {
        let r = ds.find(e);
        let c = *root_class.entry(r).or_insert_with(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        class_of[e] = c;
        members[c].push(e);
    }

    let raw = |e: usize| -> &str {
        if e < na {
            a.label(e)
        } else {
            b.label(e - na)
        }
    };
    let joined = |names: BTreeSet<String>| names.into_iter().collect::<Vec<_>>().join("~");

    let mut labels: Vec<String> = members
        .iter()
        .map(|ms| joined(ms.iter().map(|&e| raw(e).to_string()).collect()))
        .collect();

    let mut counts: HashMap<&str, usize> = HashMap::new();
    for l in &labels {
        *counts.entry(l.as_str()).or_default() += 1;
    }
    let clashing: Vec<bool> = labels.iter().map(|l| counts[l.as_str()] > 1).collect();
    for (c, ms) in members.iter().enumerate() {
        if clashing[c] {
            labels[c] = joined(
                ms.iter()
                    .map(|&e| {
                        let side = if e < na { "l" } else { "r" };
                        format!("{side}:{}", raw(e))
                    })
                    .collect(),
            );
        }
    }

    let mut used = HashSet::new();
    for (c, label) in labels.iter_mut().enumerate() {
        if !used.insert(label.clone()) {
            let mut k = c;
            while !used.insert(format!("{label}#{k}")) {
                k += 1;
            }
            *label = format!("{label}#{k}");
        }
    }

    let quotient = VertexSet::new(labels)?;
    let left_leg = FiniteFunction::new(a.clone(), quotient.clone(), class_of[..na].to_vec())?;
    let right_leg = FiniteFunction::new(b.clone(), quotient.clone(), class_of[na..].to_vec())?;
    Ok(PushoutResult {
        quotient,
        left_leg,
        right_leg,
    })
}

/// Disjoint union `A ⊔ B` with injections; elements of `A` come first.
pub fn coproduct(a: &VertexSet, b: &VertexSet) -> Result<PushoutResult> {
    let empty = VertexSet::empty();
    let f = FiniteFunction::new(empty.clone(), a.clone(), vec![])?;
    let g = FiniteFunction::new(empty, b.clone(), vec![])?;
    pushout(&f, &g)
}

/// The copairing `[f, g]: A ⊔ B -> C` through a coproduct.
pub(crate) fn copair(
    sum: &PushoutResult,
    f: &FiniteFunction,
    g: &FiniteFunction,
) -> Result<FiniteFunction> {
    if f.codomain() != g.codomain() {
        return Err(Error::DomainMismatch("copairing needs a shared codomain".into()));
    }
    let mut map = vec![0; sum.quotient.len()];
    for i in 0..f.domain().len() {
        map[sum.left_leg.apply(i)] = f.apply(i);
    }
    for j in 0..g.domain().len() {
        map[sum.right_leg.apply(j)] = g.apply(j);
    }
    FiniteFunction::new(sum.quotient.clone(), f.codomain().clone(), map)
}

/// A square matrix on a carrier set with input and output legs.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenMatrix<Q: Quantale> {
    leg_in: FiniteFunction,
    leg_out: FiniteFunction,
    mat: RMatrix<Q>,
}

impl<Q: Quantale> OpenMatrix<Q> {
    pub fn new(leg_in: FiniteFunction, leg_out: FiniteFunction, mat: RMatrix<Q>) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch("open matrix apex must be square".into()));
        }
        if leg_in.codomain() != mat.rows() || leg_out.codomain() != mat.rows() {
            return Err(Error::DomainMismatch(
                "legs must land in the carrier of the apex matrix".into(),
            ));
        }
        Ok(OpenMatrix {
            leg_in,
            leg_out,
            mat,
        })
    }

    /// Builds an open matrix from boundary labels and `(boundary, carrier)` pairs.
    pub fn from_labels(
        mat: RMatrix<Q>,
        inputs: VertexSet,
        outputs: VertexSet,
        leg_in: &[(&str, &str)],
        leg_out: &[(&str, &str)],
    ) -> Result<Self> {
        let carrier = mat.rows().clone();
        let li = FiniteFunction::from_pairs(inputs, carrier.clone(), leg_in)?;
        let lo = FiniteFunction::from_pairs(outputs, carrier, leg_out)?;
        Self::new(li, lo, mat)
    }

    /// Identity on `X`: carrier `X`, identity legs, bottom apex.
    pub fn identity(q: Q, x: VertexSet) -> Self {
        let id = FiniteFunction::identity(x.clone());
        OpenMatrix {
            leg_in: id.clone(),
            leg_out: id,
            mat: RMatrix::zero(q, x.clone(), x),
        }
    }

    /// Identity for solved (category-level) open matrices: identity apex.
    pub fn identity_category(q: Q, x: VertexSet) -> Self {
        let id = FiniteFunction::identity(x.clone());
        OpenMatrix {
            leg_in: id.clone(),
            leg_out: id,
            mat: RMatrix::identity(q, x),
        }
    }

    pub fn quantale(&self) -> &Q {
        self.mat.quantale()
    }

    pub fn inputs(&self) -> &VertexSet {
        self.leg_in.domain()
    }

    pub fn outputs(&self) -> &VertexSet {
        self.leg_out.domain()
    }

    pub fn carrier(&self) -> &VertexSet {
        self.mat.rows()
    }

    pub fn leg_in(&self) -> &FiniteFunction {
        &self.leg_in
    }

    pub fn leg_out(&self) -> &FiniteFunction {
        &self.leg_out
    }

    pub fn matrix(&self) -> &RMatrix<Q> {
        &self.mat
    }

    /// Same boundaries and legs with a different apex on the same carrier.
    pub fn with_matrix(&self, mat: RMatrix<Q>) -> Result<Self> {
        Self::new(self.leg_in.clone(), self.leg_out.clone(), mat)
    }

    /// Checks that `self: X -> Y` and `next: Y -> Z` share `Y` exactly.
    pub fn check_composable(&self, next: &Self) -> Result<()> {
        self.quantale().same_instance(next.quantale())?;
        if self.outputs() != next.inputs() {
            return Err(Error::BoundaryMismatch {
                left: self.outputs().to_vec(),
                right: next.inputs().to_vec(),
            });
        }
        Ok(())
    }

    /// The pushout of carriers over the shared boundary.
    pub fn gluing(&self, next: &Self) -> Result<PushoutResult> {
        self.check_composable(next)?;
        pushout(&self.leg_out, &next.leg_in)
    }

    /// Horizontal composite `self ; next`.
    pub fn compose(&self, next: &Self) -> Result<Self> {
        let po = self.gluing(next)?;
        let mat = self
            .mat
            .pushforward(&po.left_leg)?
            .join(&next.mat.pushforward(&po.right_leg)?)?;
        let leg_in = po.left_leg.after(&self.leg_in)?;
        let leg_out = po.right_leg.after(&next.leg_out)?;
        Self::new(leg_in, leg_out, mat)
    }

    /// Parallel composite: disjoint union of carriers and boundaries,
    /// block-diagonal apex.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        self.quantale().same_instance(other.quantale())?;
        let carrier = coproduct(self.carrier(), other.carrier())?;
        let ins = coproduct(self.inputs(), other.inputs())?;
        let outs = coproduct(self.outputs(), other.outputs())?;
        let leg_in = copair(
            &ins,
            &carrier.left_leg.after(&self.leg_in)?,
            &carrier.right_leg.after(&other.leg_in)?,
        )?;
        let leg_out = copair(
            &outs,
            &carrier.left_leg.after(&self.leg_out)?,
            &carrier.right_leg.after(&other.leg_out)?,
        )?;
        let mat = self
            .mat
            .direct_sum(&other.mat, carrier.quotient.clone(), carrier.quotient.clone())?;
        Self::new(leg_in, leg_out, mat)
    }

    /// Transports the open matrix along a carrier bijection `perm[old] = new`.
    pub fn permute_carrier(&self, perm: &[usize], labels: VertexSet) -> Result<Self> {
        let f = FiniteFunction::new(self.carrier().clone(), labels.clone(), perm.to_vec())?;
        if !f.is_injective() || !f.is_surjective() {
            return Err(Error::DomainMismatch("carrier relabeling must be a bijection".into()));
        }
        Self::new(
            f.after(&self.leg_in)?,
            f.after(&self.leg_out)?,
            self.mat.permute(perm, labels)?,
        )
    }
}

/// Outcome of checking a candidate 2-morphism between open matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoMorphismCheck {
    Holds,
    /// Some map's domain or codomain does not match the open matrices.
    ShapeMismatch,
    /// `g . leg_in != leg_in' . f`
    InputSquare,
    /// `g . leg_out != leg_out' . h`
    OutputSquare,
    /// `g_*(M) <= N` fails.
    NotDominated,
}

impl TwoMorphismCheck {
    pub fn holds(self) -> bool {
        self == TwoMorphismCheck::Holds
    }
}

/// Checks whether `(f, g, h)` is a 2-morphism from `m` to `n`: both leg
/// squares commute and the pushforward of `m` along `g` lies below `n`.
pub fn check_two_morphism<Q: Quantale>(
    f: &FiniteFunction,
    g: &FiniteFunction,
    h: &FiniteFunction,
    m: &OpenMatrix<Q>,
    n: &OpenMatrix<Q>,
) -> TwoMorphismCheck {
    let shapes_ok = f.domain() == m.inputs()
        && f.codomain() == n.inputs()
        && g.domain() == m.carrier()
        && g.codomain() == n.carrier()
        && h.domain() == m.outputs()
        && h.codomain() == n.outputs()
        && m.quantale() == n.quantale();
    if !shapes_ok {
        return TwoMorphismCheck::ShapeMismatch;
    }
    let (Ok(gi), Ok(ifn)) = (g.after(&m.leg_in), n.leg_in.after(f)) else {
        return TwoMorphismCheck::ShapeMismatch;
    };
    if gi != ifn {
        return TwoMorphismCheck::InputSquare;
    }
    let (Ok(go), Ok(ohn)) = (g.after(&m.leg_out), n.leg_out.after(h)) else {
        return TwoMorphismCheck::ShapeMismatch;
    };
    if go != ohn {
        return TwoMorphismCheck::OutputSquare;
    }
    match m.mat.pushforward(g).and_then(|p| p.leq(&n.mat)) {
        Ok(true) => TwoMorphismCheck::Holds,
        Ok(false) => TwoMorphismCheck::NotDominated,
        Err(_) => TwoMorphismCheck::ShapeMismatch,
    }
}

/// Searches for a carrier bijection `perm` (old index to new index) taking
/// `m` to `n`: legs are matched and matrices agree entrywise. Boundaries must
/// carry the same labels. This is the equality used for composites, which are
/// only determined up to relabeling of the carrier.
pub fn find_isomorphism<Q: Quantale>(m: &OpenMatrix<Q>, n: &OpenMatrix<Q>) -> Option<Vec<usize>> {
    if m.quantale() != n.quantale()
        || m.inputs() != n.inputs()
        || m.outputs() != n.outputs()
        || m.carrier().len() != n.carrier().len()
    {
        return None;
    }
    let size = m.carrier().len();
    let mut perm: Vec<Option<usize>> = vec![None; size];
    let mut taken = vec![false; size];
    let forced = m
        .leg_in
        .as_slice()
        .iter()
        .zip(n.leg_in.as_slice())
        .chain(m.leg_out.as_slice().iter().zip(n.leg_out.as_slice()));
    for (&a, &b) in forced {
        match perm[a] {
            Some(x) if x != b => return None,
            Some(_) => {}
            None => {
                if taken[b] {
                    return None;
                }
                perm[a] = Some(b);
                taken[b] = true;
            }
        }
    }
    let q = m.quantale();
    let consistent = |perm: &[Option<usize>]| {
        (0..size).all(|i| {
            (0..size).all(|j| match (perm[i], perm[j]) {
                (Some(a), Some(b)) => q.same(m.mat.get(i, j), n.mat.get(a, b)),
                _ => true,
            })
        })
    };
    if !consistent(&perm) {
        return None;
    }

    fn search<Q: Quantale>(
        i: usize,
        perm: &mut Vec<Option<usize>>,
        taken: &mut Vec<bool>,
        ok: &dyn Fn(&[Option<usize>], usize) -> bool,
    ) -> bool {
        if i == perm.len() {
            return true;
        }
        if perm[i].is_some() {
            return search::<Q>(i + 1, perm, taken, ok);
        }
        for b in 0..perm.len() {
            if taken[b] {
                continue;
            }
            perm[i] = Some(b);
            taken[b] = true;
            if ok(perm, i) && search::<Q>(i + 1, perm, taken, ok) {
                return true;
            }
            perm[i] = None;
            taken[b] = false;
        }
        false
    }

    let check_new = |perm: &[Option<usize>], i: usize| {
        let a = perm[i].expect("just assigned");
        (0..size).all(|j| match perm[j] {
            Some(b) => {
                q.same(m.mat.get(i, j), n.mat.get(a, b)) && q.same(m.mat.get(j, i), n.mat.get(b, a))
            }
            None => true,
        })
    };
    if search::<Q>(0, &mut perm, &mut taken, &check_new) {
        Some(perm.into_iter().map(|p| p.expect("complete")).collect())
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantale::{Boolean, Tropical};

    const INF: f64 = f64::INFINITY;

    fn vs(l: &[&str]) -> VertexSet {
        VertexSet::new(l.iter().copied()).unwrap()
    }

    pub(crate) fn worked_m() -> OpenMatrix<Tropical> {
        let mat = RMatrix::square(
            Tropical,
            vs(&["a", "b", "c"]),
            vec![vec![1.0, 2.0, 0.1], vec![3.0, 0.0, 0.2], vec![INF, 1.0, 0.2]],
        )
        .unwrap();
        OpenMatrix::from_labels(mat, vs(&["1", "2"]), vs(&["3"]), &[("1", "a"), ("2", "b")], &[("3", "c")])
            .unwrap()
    }

    pub(crate) fn worked_n() -> OpenMatrix<Tropical> {
        let mat = RMatrix::square(Tropical, vs(&["d", "e"]), vec![vec![6.0, INF], vec![0.0, 9.0]]).unwrap();
        OpenMatrix::from_labels(mat, vs(&["3"]), vs(&["4"]), &[("3", "d")], &[("4", "e")]).unwrap()
    }

    #[test]
    fn pushout_glues_c_and_d() {
        let z = vs(&["3"]);
        let f = FiniteFunction::from_pairs(z.clone(), vs(&["a", "b", "c"]), &[("3", "c")]).unwrap();
        let g = FiniteFunction::from_pairs(z, vs(&["d", "e"]), &[("3", "d")]).unwrap();
        let po = pushout(&f, &g).unwrap();
        assert_eq!(po.quotient, vs(&["a", "b", "c~d", "e"]));
        assert_eq!(po.left_leg.after(&f).unwrap(), po.right_leg.after(&g).unwrap());
    }

    #[test]
    fn pushout_over_empty_is_disjoint_union() {
        let po = coproduct(&vs(&["a", "b"]), &vs(&["c"])).unwrap();
        assert_eq!(po.quotient, vs(&["a", "b", "c"]));
        let clash = coproduct(&vs(&["a", "b"]), &vs(&["a"])).unwrap();
        assert_eq!(clash.quotient, vs(&["l:a", "b", "r:a"]));
    }

    #[test]
    fn pushout_of_identities_is_isomorphic() {
        let z = vs(&["x", "y"]);
        let id = FiniteFunction::identity(z.clone());
        let po = pushout(&id, &id).unwrap();
        assert_eq!(po.quotient.len(), 2);
        assert_eq!(po.quotient, z);
    }

    #[test]
    fn composes_the_worked_example() {
        let c = worked_m().compose(&worked_n()).unwrap();
        assert_eq!(c.carrier(), &vs(&["a", "b", "c~d", "e"]));
        assert_eq!(
            c.matrix().to_rows(),
            vec![
                vec![1.0, 2.0, 0.1, INF],
                vec![3.0, 0.0, 0.2, INF],
                vec![INF, 1.0, 0.2, INF],
                vec![INF, INF, 0.0, 9.0],
            ]
        );
        assert_eq!(c.leg_in().label_pairs(), vec![("1".into(), "a".into()), ("2".into(), "b".into())]);
        assert_eq!(c.leg_out().label_pairs(), vec![("4".into(), "e".into())]);
    }

    #[test]
    fn boundary_mismatch_names_labels() {
        let err = worked_n().compose(&worked_m()).unwrap_err();
        assert_eq!(
            err,
            Error::BoundaryMismatch {
                left: vec!["4".into()],
                right: vec!["1".into(), "2".into()]
            }
        );
    }

    #[test]
    fn identity_is_a_unit_up_to_relabeling() {
        let m = worked_m();
        let right = m.compose(&OpenMatrix::identity(Tropical, m.outputs().clone())).unwrap();
        assert!(find_isomorphism(&right, &m).is_some());
        let left = OpenMatrix::identity(Tropical, m.inputs().clone()).compose(&m).unwrap();
        assert!(find_isomorphism(&left, &m).is_some());
        let id = OpenMatrix::identity(Tropical, vs(&["p", "q"]));
        assert!(find_isomorphism(&id.compose(&id).unwrap(), &id).is_some());
    }

    #[test]
    fn boolean_edges_glue_into_a_path() {
        let edge = |s: &str, t: &str, i: &str, o: &str| {
            let mat = RMatrix::square(Boolean, vs(&[s, t]), vec![vec![false, true], vec![false, false]]).unwrap();
            OpenMatrix::from_labels(mat, vs(&[i]), vs(&[o]), &[(i, s)], &[(o, t)]).unwrap()
        };
        let c = edge("u", "v", "x", "y").compose(&edge("w", "z", "y", "o")).unwrap();
        // brute-force quotient: v and w are identified
        assert_eq!(c.carrier(), &vs(&["u", "v~w", "z"]));
        assert_eq!(
            c.matrix().to_rows(),
            vec![
                vec![false, true, false],
                vec![false, false, true],
                vec![false, false, false]
            ]
        );
    }

    #[test]
    fn tensor_is_block_diagonal() {
        let one = |v: &str, w: f64| {
            let mat = RMatrix::square(Tropical, vs(&[v]), vec![vec![w]]).unwrap();
            OpenMatrix::from_labels(mat, vs(&[v]), vs(&[v]), &[(v, v)], &[(v, v)]).unwrap()
        };
        let t = one("p", 5.0).tensor(&one("q", 7.0)).unwrap();
        assert_eq!(t.matrix().to_rows(), vec![vec![5.0, INF], vec![INF, 7.0]]);
        let empty = OpenMatrix::identity(Tropical, VertexSet::empty());
        let m = worked_m();
        assert_eq!(m.tensor(&empty).unwrap(), m);
        assert_eq!(empty.tensor(&m).unwrap(), m);
    }

    #[test]
    fn two_morphism_checks() {
        let m = worked_m();
        let (f, g, h) = (
            FiniteFunction::identity(m.inputs().clone()),
            FiniteFunction::identity(m.carrier().clone()),
            FiniteFunction::identity(m.outputs().clone()),
        );
        assert!(check_two_morphism(&f, &g, &h, &m, &m).holds());

        // collapse b and c of a two-edge matrix
        let src = RMatrix::square(
            Tropical,
            vs(&["a", "b", "c"]),
            vec![vec![INF, 4.0, 2.0], vec![INF, INF, INF], vec![INF, INF, INF]],
        )
        .unwrap();
        let src = OpenMatrix::from_labels(src, vs(&["i"]), vs(&["o"]), &[("i", "a")], &[("o", "b")]).unwrap();
        let g = FiniteFunction::from_pairs(
            src.carrier().clone(),
            vs(&["a", "bc"]),
            &[("a", "a"), ("b", "bc"), ("c", "bc")],
        )
        .unwrap();
        let pushed = src.matrix().pushforward(&g).unwrap();
        assert_eq!(pushed.to_rows(), vec![vec![INF, 2.0], vec![INF, INF]]);
        let target = |w: f64| {
            let mat = RMatrix::square(Tropical, vs(&["a", "bc"]), vec![vec![INF, w], vec![INF, INF]]).unwrap();
            OpenMatrix::from_labels(mat, vs(&["i"]), vs(&["o"]), &[("i", "a")], &[("o", "bc")]).unwrap()
        };
        let f = FiniteFunction::identity(vs(&["i"]));
        let h = FiniteFunction::identity(vs(&["o"]));
        assert!(check_two_morphism(&f, &g, &h, &src, &target(2.0)).holds());
        // the entry 3 is above 2 in the order (larger distance), so 2 <= 3 fails
        assert_eq!(
            check_two_morphism(&f, &g, &h, &src, &target(3.0)),
            TwoMorphismCheck::NotDominated
        );
        let bad_g = FiniteFunction::constant(src.carrier().clone(), vs(&["a", "bc"]), 1).unwrap();
        assert_eq!(
            check_two_morphism(&f, &bad_g, &h, &src, &target(2.0)),
            TwoMorphismCheck::InputSquare
        );
    }
}
