//! Resource nets: Petri nets over natural, integer or `k`-bounded markings.
//!
//! A transition consumes its source marking and produces its target marking.
//! Open nets carry input and output legs into their places and compose by
//! pushout of places. Black-boxing an open net gives its bounded
//! reachability relation between boundary markings, with the number of
//! witnessing firing sequences per length.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::cospan::{coproduct, pushout, PushoutResult};
use crate::error::{Error, Result};
use crate::matrix::{FiniteFunction, VertexSet};

/// Coefficient domain of markings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResourceKind {
    /// Multisets: nonnegative counts.
    Natural,
    /// Signed counts; every transition is always enabled.
    Integer,
    /// Counts in `{0, .., k-1}` modulo `k * x = x`; `k = 2` gives sets.
    Bounded(u32),
}

impl ResourceKind {
    pub fn bounded(k: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidElement {
                instance: "bounded".into(),
                value: format!("k = {k} (need k >= 2)"),
            });
        }
        Ok(ResourceKind::Bounded(k))
    }

    /// Coefficient addition. For `Bounded(k)` sums past `k - 1` wrap back
    /// into `{1, .., k-1}`, the quotient of the naturals by `k ~ 1`.
    pub fn add(self, a: i64, b: i64) -> i64 {
        match self {
            ResourceKind::Natural | ResourceKind::Integer => a + b,
            ResourceKind::Bounded(k) => {
                let k = i64::from(k);
                let s = a + b;
                if s < k {
                    s
                } else {
                    (s - 1) % (k - 1) + 1
                }
            }
        }
    }

    pub fn contains(self, a: i64) -> bool {
        match self {
            ResourceKind::Natural => a >= 0,
            ResourceKind::Integer => true,
            ResourceKind::Bounded(k) => (0..i64::from(k)).contains(&a),
        }
    }

    /// Image of a natural count under the canonical map from the naturals.
    pub fn from_count(self, n: u64) -> i64 {
        match self {
            ResourceKind::Natural | ResourceKind::Integer => n as i64,
            ResourceKind::Bounded(k) => {
                if n < u64::from(k) {
                    n as i64
                } else {
                    ((n - 1) % u64::from(k - 1) + 1) as i64
                }
            }
        }
    }

    /// All coefficient values up to `cap`.
    fn coefficients(self, cap: i64) -> Vec<i64> {
        match self {
            ResourceKind::Bounded(k) => (0..i64::from(k).min(cap + 1)).collect(),
            _ => (0..=cap).collect(),
        }
    }
}

impl fmt::Display for ResourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResourceKind::Natural => f.write_str("natural"),
            ResourceKind::Integer => f.write_str("integer"),
            ResourceKind::Bounded(k) => write!(f, "bounded:{k}"),
        }
    }
}

impl std::str::FromStr for ResourceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "natural" => Ok(ResourceKind::Natural),
            "integer" => Ok(ResourceKind::Integer),
            _ => {
                let k = s
                    .strip_prefix("bounded:")
                    .and_then(|k| k.parse::<u32>().ok())
                    .ok_or_else(|| Error::InvalidElement {
                        instance: "kind".into(),
                        value: s.into(),
                    })?;
                ResourceKind::bounded(k)
            }
        }
    }
}

/// A marking, stored densely in place order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marking(Vec<i64>);

impl Marking {
    pub fn zero(places: usize) -> Self {
        Marking(vec![0; places])
    }

    pub fn new(coeffs: Vec<i64>) -> Self {
        Marking(coeffs)
    }

    /// Builds a marking from `(place, coefficient)` pairs; repeated places add up.
    pub fn from_labels(kind: ResourceKind, places: &VertexSet, pairs: &[(&str, i64)]) -> Result<Self> {
        let mut m = Marking::zero(places.len());
        for (p, c) in pairs {
            let i = places.index_of(p)?;
            m.0[i] = kind.add(m.0[i], *c);
        }
        m.check(kind)?;
        Ok(m)
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn get(&self, i: usize) -> i64 {
        self.0[i]
    }

    pub fn check(&self, kind: ResourceKind) -> Result<()> {
        match self.0.iter().find(|&&c| !kind.contains(c)) {
            Some(c) => Err(Error::InvalidMarking(format!("coefficient {c} is not valid for {kind}"))),
            None => Ok(()),
        }
    }

    pub fn add(&self, other: &Marking, kind: ResourceKind) -> Marking {
        Marking(self.0.iter().zip(&other.0).map(|(&a, &b)| kind.add(a, b)).collect())
    }

    /// Pushforward along a place map, combining merged places with `kind`'s addition.
    pub fn pushforward(&self, f: &FiniteFunction, kind: ResourceKind) -> Marking {
        let mut out = vec![0; f.codomain().len()];
        for (i, &c) in self.0.iter().enumerate() {
            let j = f.apply(i);
            out[j] = kind.add(out[j], c);
        }
        Marking(out)
    }

    /// Nonzero `(place, coefficient)` pairs in place order.
    pub fn support<'a>(&'a self, places: &'a VertexSet) -> impl Iterator<Item = (&'a str, i64)> + 'a {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| (places.label(i), c))
    }

    /// Renders as `2p + q`, or `0` for the empty marking.
    pub fn display(&self, places: &VertexSet) -> String {
        let mut out = String::new();
        for (p, c) in self.support(places) {
            if !out.is_empty() {
                out.push_str(if c < 0 { " - " } else { " + " });
            } else if c < 0 {
                out.push('-');
            }
            match c.abs() {
                1 => out.push_str(p),
                n => out.push_str(&format!("{n}{p}")),
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub id: String,
    pub src: Marking,
    pub tgt: Marking,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QNet {
    kind: ResourceKind,
    places: VertexSet,
    transitions: Vec<Transition>,
}

impl QNet {
    pub fn new(kind: ResourceKind, places: VertexSet, transitions: Vec<Transition>) -> Result<Self> {
        let mut ids = HashSet::new();
        for t in &transitions {
            if !ids.insert(t.id.as_str()) {
                return Err(Error::DuplicateLabel(t.id.clone()));
            }
            for m in [&t.src, &t.tgt] {
                if m.len() != places.len() {
                    return Err(Error::InvalidMarking(format!(
                        "transition `{}` has a marking over {} places, net has {}",
                        t.id,
                        m.len(),
                        places.len()
                    )));
                }
                m.check(kind)?;
            }
        }
        Ok(QNet {
            kind,
            places,
            transitions,
        })
    }

    /// Builds a net from `(id, src pairs, tgt pairs)` triples.
    #[allow(clippy::type_complexity)]
    pub fn from_labels(
        kind: ResourceKind,
        places: VertexSet,
        transitions: &[(&str, &[(&str, i64)], &[(&str, i64)])],
    ) -> Result<Self> {
        let ts = transitions
            .iter()
            .map(|(id, s, t)| {
                Ok(Transition {
                    id: id.to_string(),
                    src: Marking::from_labels(kind, &places, s)?,
                    tgt: Marking::from_labels(kind, &places, t)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(kind, places, ts)
    }

    pub fn kind(&self) -> ResourceKind {
        self.kind
    }

    pub fn places(&self) -> &VertexSet {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition_ids(&self) -> VertexSet {
        VertexSet::new(self.transitions.iter().map(|t| t.id.clone())).expect("ids are unique")
    }

    pub fn transition_index(&self, id: &str) -> Result<usize> {
        self.transitions
            .iter()
            .position(|t| t.id == id)
            .ok_or_else(|| Error::UnknownTransition(id.to_string()))
    }

    pub fn marking(&self, pairs: &[(&str, i64)]) -> Result<Marking> {
        Marking::from_labels(self.kind, &self.places, pairs)
    }

    /// Every marking reachable from `m` in one firing of `tau`, sorted.
    pub fn fire(&self, m: &Marking, tau: &str) -> Result<Vec<Marking>> {
        let k = self.transition_index(tau)?;
        Ok(self.fire_index(m, k).into_iter().map(|(r, _)| r).collect())
    }

    /// Results of firing with the context used; for bounded kinds a result may
    /// arise from several contexts and is listed once, with its least context.
    fn fire_index(&self, m: &Marking, k: usize) -> Vec<(Marking, Marking)> {
        let t = &self.transitions[k];
        match self.kind {
            ResourceKind::Natural => {
                if m.0.iter().zip(&t.src.0).all(|(a, s)| a >= s) {
                    let ctx = Marking(m.0.iter().zip(&t.src.0).map(|(a, s)| a - s).collect());
                    vec![(ctx.add(&t.tgt, self.kind), ctx)]
                } else {
                    Vec::new()
                }
            }
            ResourceKind::Integer => {
                let ctx = Marking(m.0.iter().zip(&t.src.0).map(|(a, s)| a - s).collect());
                vec![(ctx.add(&t.tgt, self.kind), ctx)]
            }
            ResourceKind::Bounded(q) => {
                // per place, the contexts r with s (+) r = m
                let choices: Vec<Vec<i64>> = (0..m.len())
                    .map(|p| {
                        (0..i64::from(q))
                            .filter(|&r| self.kind.add(t.src.0[p], r) == m.0[p])
                            .collect()
                    })
                    .collect();
                if choices.iter().any(Vec::is_empty) {
                    return Vec::new();
                }
                let mut out: BTreeMap<Marking, Marking> = BTreeMap::new();
                for ctx in cartesian(&choices) {
                    let ctx = Marking(ctx);
                    let r = ctx.add(&t.tgt, self.kind);
                    out.entry(r).or_insert(ctx);
                }
                out.into_iter().collect()
            }
        }
    }

    /// Deterministic firing with the least context `r`. For natural and
    /// integer nets this is the only firing; for bounded nets it is one of
    /// possibly several.
    pub fn fire_minimal(&self, m: &Marking, tau: &str) -> Result<Option<Marking>> {
        let k = self.transition_index(tau)?;
        let t = &self.transitions[k];
        if let ResourceKind::Bounded(q) = self.kind {
            let mut ctx = Vec::with_capacity(m.len());
            for p in 0..m.len() {
                match (0..i64::from(q)).find(|&r| self.kind.add(t.src.0[p], r) == m.0[p]) {
                    Some(r) => ctx.push(r),
                    None => return Ok(None),
                }
            }
            return Ok(Some(Marking(ctx).add(&t.tgt, self.kind)));
        }
        Ok(self.fire_index(m, k).into_iter().next().map(|(r, _)| r))
    }

    /// Markings reachable from `m0` in at most `depth` firings, each with a
    /// shortest witness. Natural and integer markings with a coefficient of
    /// absolute value above `coeff_cap` are pruned and counted.
    pub fn reachable(&self, m0: &Marking, depth: usize, coeff_cap: Option<i64>) -> Reachability {
        let mut seen: BTreeMap<Marking, FiringSequence> = BTreeMap::new();
        seen.insert(m0.clone(), FiringSequence::start(m0.clone()));
        let mut frontier = vec![m0.clone()];
        let mut pruned = BTreeSet::new();
        for _ in 0..depth {
            let mut next = Vec::new();
            for m in &frontier {
                for k in 0..self.transitions.len() {
                    for (r, ctx) in self.fire_index(m, k) {
                        if seen.contains_key(&r) {
                            continue;
                        }
                        let over = !matches!(self.kind, ResourceKind::Bounded(_))
                            && coeff_cap.is_some_and(|cap| r.0.iter().any(|c| c.abs() > cap));
                        if over {
                            pruned.insert(r);
                            continue;
                        }
                        let mut w = seen[m].clone();
                        w.steps.push((self.transitions[k].id.clone(), ctx));
                        seen.insert(r.clone(), w);
                        next.push(r);
                    }
                }
            }
            frontier = next;
        }
        Reachability {
            markings: seen,
            pruned: pruned.len(),
        }
    }

    /// Number of firing sequences of each length `0..=depth` from `m0`,
    /// per final marking. With `phases`, a sequence must fire transitions in
    /// nondecreasing phase order.
    pub fn sequence_counts(
        &self,
        m0: &Marking,
        depth: usize,
        phases: Option<&[usize]>,
    ) -> Vec<BTreeMap<Marking, u64>> {
        let phase_of = |k: usize| phases.map_or(0, |p| p[k]);
        let mut layer: HashMap<(Marking, usize), u64> = HashMap::new();
        layer.insert((m0.clone(), 0), 1);
        let mut out = Vec::with_capacity(depth + 1);
        for n in 0..=depth {
            let mut by_marking: BTreeMap<Marking, u64> = BTreeMap::new();
            for ((m, _), c) in &layer {
                *by_marking.entry(m.clone()).or_default() += c;
            }
            out.push(by_marking);
            if n == depth {
                break;
            }
            let mut next: HashMap<(Marking, usize), u64> = HashMap::new();
            for ((m, phase), c) in &layer {
                for k in 0..self.transitions.len() {
                    if phase_of(k) < *phase {
                        continue;
                    }
                    for (r, _) in self.fire_index(m, k) {
                        *next.entry((r, phase_of(k))).or_default() += c;
                    }
                }
            }
            layer = next;
        }
        out
    }

    /// Reinterprets the net over another coefficient domain.
    pub fn translate(&self, to: ResourceKind) -> Result<QNet> {
        let map = |m: &Marking| -> Marking {
            Marking(m.0.iter().map(|&c| to.from_count(c as u64)).collect())
        };
        match (self.kind, to) {
            (a, b) if a == b => Ok(self.clone()),
            (ResourceKind::Natural, ResourceKind::Integer) | (ResourceKind::Natural, ResourceKind::Bounded(_)) => {
                let ts = self
                    .transitions
                    .iter()
                    .map(|t| Transition {
                        id: t.id.clone(),
                        src: map(&t.src),
                        tgt: map(&t.tgt),
                    })
                    .collect();
                QNet::new(to, self.places.clone(), ts)
            }
            (from, to) => Err(Error::UnsupportedTranslation {
                from: from.to_string(),
                to: to.to_string(),
            }),
        }
    }
}

fn cartesian(choices: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::with_capacity(choices.len())];
    for options in choices {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |&c| {
                    let mut v = prefix.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    out
}

pub fn fire(net: &QNet, m: &Marking, tau: &str) -> Result<Vec<Marking>> {
    net.fire(m, tau)
}

pub fn reachable(net: &QNet, m0: &Marking, depth: usize, coeff_cap: Option<i64>) -> Reachability {
    net.reachable(m0, depth, coeff_cap)
}

pub fn translate_net(net: &QNet, to: ResourceKind) -> Result<QNet> {
    net.translate(to)
}

/// An initial marking and the transitions fired from it, each with the
/// context `r` left untouched by that firing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiringSequence {
    pub initial: Marking,
    pub steps: Vec<(String, Marking)>,
}

impl FiringSequence {
    pub fn start(initial: Marking) -> Self {
        FiringSequence {
            initial,
            steps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Replays the sequence, checking each step, and returns the final marking.
    pub fn replay(&self, net: &QNet) -> Result<Marking> {
        let mut m = self.initial.clone();
        for (id, ctx) in &self.steps {
            let t = &net.transitions[net.transition_index(id)?];
            if t.src.add(ctx, net.kind) != m {
                return Err(Error::InvalidMarking(format!("`{id}` is not enabled with the recorded context")));
            }
            m = ctx.add(&t.tgt, net.kind);
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reachability {
    /// Reached markings with a shortest witness, in canonical order.
    pub markings: BTreeMap<Marking, FiringSequence>,
    /// Distinct markings dropped for exceeding the coefficient cap.
    pub pruned: usize,
}

/// A sequence of places, for pre-nets whose arcs are ordered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreNet {
    pub places: VertexSet,
    pub transitions: Vec<(String, Vec<usize>, Vec<usize>)>,
}

impl PreNet {
    pub fn from_labels(places: VertexSet, transitions: &[(&str, &[&str], &[&str])]) -> Result<Self> {
        let ts = transitions
            .iter()
            .map(|(id, s, t)| {
                let idx = |xs: &[&str]| xs.iter().map(|p| places.index_of(p)).collect::<Result<Vec<_>>>();
                Ok((id.to_string(), idx(s)?, idx(t)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PreNet {
            places,
            transitions: ts,
        })
    }

    /// Forgets the order of each transition's inputs and outputs.
    pub fn abelianize(&self) -> Result<QNet> {
        let count = |xs: &[usize]| {
            let mut m = Marking::zero(self.places.len());
            for &p in xs {
                m.0[p] += 1;
            }
            m
        };
        let ts = self
            .transitions
            .iter()
            .map(|(id, s, t)| Transition {
                id: id.clone(),
                src: count(s),
                tgt: count(t),
            })
            .collect();
        QNet::new(ResourceKind::Natural, self.places.clone(), ts)
    }
}

/// A net with input and output legs into its places.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenNet {
    net: QNet,
    leg_in: FiniteFunction,
    leg_out: FiniteFunction,
}

/// How the pieces of a composite open net sit inside it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetGluing {
    pub places: PushoutResult,
    pub left_transitions: FiniteFunction,
    pub right_transitions: FiniteFunction,
}

impl NetGluing {
    /// Phase of each composite transition: 0 for the left piece, 1 for the right.
    pub fn phases(&self) -> Vec<usize> {
        let mut out = vec![0; self.left_transitions.codomain().len()];
        for &k in self.right_transitions.as_slice() {
            out[k] = 1;
        }
        out
    }
}

impl OpenNet {
    pub fn new(net: QNet, leg_in: FiniteFunction, leg_out: FiniteFunction) -> Result<Self> {
        if leg_in.codomain() != net.places() || leg_out.codomain() != net.places() {
            return Err(Error::DomainMismatch("legs must land in the net's places".into()));
        }
        Ok(OpenNet { net, leg_in, leg_out })
    }

    pub fn from_labels(
        net: QNet,
        inputs: VertexSet,
        outputs: VertexSet,
        leg_in: &[(&str, &str)],
        leg_out: &[(&str, &str)],
    ) -> Result<Self> {
        let p = net.places().clone();
        let li = FiniteFunction::from_pairs(inputs, p.clone(), leg_in)?;
        let lo = FiniteFunction::from_pairs(outputs, p, leg_out)?;
        Self::new(net, li, lo)
    }

    /// Places `x`, no transitions, identity legs.
    pub fn identity(kind: ResourceKind, x: VertexSet) -> Self {
        let id = FiniteFunction::identity(x.clone());
        OpenNet {
            net: QNet {
                kind,
                places: x,
                transitions: Vec::new(),
            },
            leg_in: id.clone(),
            leg_out: id,
        }
    }

    pub fn net(&self) -> &QNet {
        &self.net
    }

    pub fn inputs(&self) -> &VertexSet {
        self.leg_in.domain()
    }

    pub fn outputs(&self) -> &VertexSet {
        self.leg_out.domain()
    }

    pub fn leg_in(&self) -> &FiniteFunction {
        &self.leg_in
    }

    pub fn leg_out(&self) -> &FiniteFunction {
        &self.leg_out
    }

    pub fn compose(&self, next: &OpenNet) -> Result<OpenNet> {
        Ok(self.compose_with_gluing(next)?.0)
    }

    /// Places glued by pushout over the shared boundary; transitions side by
    /// side with their markings pushed forward.
    pub fn compose_with_gluing(&self, next: &OpenNet) -> Result<(OpenNet, NetGluing)> {
        let kind = self.net.kind;
        if kind != next.net.kind {
            return Err(Error::KindMismatch {
                left: kind.to_string(),
                right: next.net.kind.to_string(),
            });
        }
        if self.outputs() != next.inputs() {
            return Err(Error::BoundaryMismatch {
                left: self.outputs().to_vec(),
                right: next.inputs().to_vec(),
            });
        }
        let po = pushout(&self.leg_out, &next.leg_in)?;
        let ids = coproduct(&self.net.transition_ids(), &next.net.transition_ids())?;
        let mut ts = Vec::new();
        for (side, leg, tmap) in [(&self.net, &po.left_leg, &ids.left_leg), (&next.net, &po.right_leg, &ids.right_leg)] {
            for (k, t) in side.transitions.iter().enumerate() {
                ts.push(Transition {
                    id: ids.quotient.label(tmap.apply(k)).to_string(),
                    src: t.src.pushforward(leg, kind),
                    tgt: t.tgt.pushforward(leg, kind),
                });
            }
        }
        let net = QNet::new(kind, po.quotient.clone(), ts)?;
        let composite = OpenNet::new(
            net,
            po.left_leg.after(&self.leg_in)?,
            po.right_leg.after(&next.leg_out)?,
        )?;
        let gluing = NetGluing {
            places: po,
            left_transitions: ids.left_leg,
            right_transitions: ids.right_leg,
        };
        Ok((composite, gluing))
    }

    /// Input images are never produced into; output images are never consumed from.
    pub fn is_functional(&self) -> bool {
        let ts = &self.net.transitions;
        self.leg_in.as_slice().iter().all(|&p| ts.iter().all(|t| t.tgt.0[p] == 0))
            && self.leg_out.as_slice().iter().all(|&p| ts.iter().all(|t| t.src.0[p] == 0))
    }

    /// Boundary markings with every coefficient at most `cap`.
    pub fn input_markings(&self, cap: i64) -> Vec<Marking> {
        let coeffs = self.net.kind.coefficients(cap);
        cartesian(&vec![coeffs; self.inputs().len()]).into_iter().map(Marking).collect()
    }

    /// Output-boundary markings whose leg image is `m`. Integer coefficients
    /// are split without mixing signs, so the preimage stays finite.
    pub fn output_preimages(&self, m: &Marking) -> Vec<Marking> {
        let kind = self.net.kind;
        let mut fibers: Vec<Vec<usize>> = vec![Vec::new(); m.len()];
        for (y, &p) in self.leg_out.as_slice().iter().enumerate() {
            fibers[p].push(y);
        }
        let mut partial = vec![vec![0i64; self.outputs().len()]];
        for (p, fiber) in fibers.iter().enumerate() {
            let target = m.0[p];
            if fiber.is_empty() {
                if target != 0 {
                    return Vec::new();
                }
                continue;
            }
            let splits = split(kind, target, fiber.len());
            partial = partial
                .into_iter()
                .flat_map(|base| {
                    splits.iter().map(move |s| {
                        let mut v = base.clone();
                        for (&y, &c) in fiber.iter().zip(s) {
                            v[y] = c;
                        }
                        v
                    })
                })
                .collect();
        }
        partial.into_iter().map(Marking).collect()
    }
}

/// All ways to write `target` as an ordered sum of `parts` coefficients.
fn split(kind: ResourceKind, target: i64, parts: usize) -> Vec<Vec<i64>> {
    let options: Vec<i64> = match kind {
        ResourceKind::Bounded(k) => (0..i64::from(k)).collect(),
        _ if target >= 0 => (0..=target).collect(),
        _ => (target..=0).collect(),
    };
    cartesian(&vec![options; parts])
        .into_iter()
        .filter(|v| v.iter().fold(0, |acc, &c| kind.add(acc, c)) == target)
        .collect()
}

pub fn compose_open_net(p: &OpenNet, q: &OpenNet) -> Result<OpenNet> {
    p.compose(q)
}

pub fn is_functional_net(p: &OpenNet) -> bool {
    p.is_functional()
}

/// A bounded reachability relation between boundary markings. Each related
/// pair carries the number of witnessing firing sequences of each length
/// `0..=depth`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachRelation {
    pub inputs: VertexSet,
    pub outputs: VertexSet,
    pub depth: usize,
    pub pairs: BTreeMap<(Marking, Marking), Vec<u64>>,
}

impl ReachRelation {
    pub fn related(&self) -> BTreeSet<(Marking, Marking)> {
        self.pairs.keys().cloned().collect()
    }

    pub fn total(&self, x: &Marking, y: &Marking) -> u64 {
        self.pairs
            .get(&(x.clone(), y.clone()))
            .map_or(0, |c| c.iter().sum())
    }

    /// Output markings that appear in the relation.
    pub fn output_markings(&self) -> BTreeSet<Marking> {
        self.pairs.keys().map(|(_, y)| y.clone()).collect()
    }

    /// Relational composite truncated at `depth` total firings. Counts follow
    /// `count^n(x, z) = sum_y sum_{i+j=n} count^i(x, y) * count^j(y, z)`.
    pub fn compose(&self, next: &ReachRelation, depth: usize) -> Result<ReachRelation> {
        if self.outputs != next.inputs {
            return Err(Error::BoundaryMismatch {
                left: self.outputs.to_vec(),
                right: next.inputs.to_vec(),
            });
        }
        let mut by_input: HashMap<&Marking, Vec<(&Marking, &Vec<u64>)>> = HashMap::new();
        for ((y, z), c) in &next.pairs {
            by_input.entry(y).or_default().push((z, c));
        }
        let mut pairs: BTreeMap<(Marking, Marking), Vec<u64>> = BTreeMap::new();
        for ((x, y), left) in &self.pairs {
            let Some(rights) = by_input.get(y) else {
                continue;
            };
            for (z, right) in rights {
                let mut counts = vec![0u64; depth + 1];
                for (i, a) in left.iter().enumerate() {
                    for (j, b) in right.iter().enumerate() {
                        if i + j <= depth {
                            counts[i + j] += a * b;
                        }
                    }
                }
                if counts.iter().any(|&c| c > 0) {
                    let entry = pairs.entry((x.clone(), (*z).clone())).or_insert_with(|| vec![0; depth + 1]);
                    for (e, c) in entry.iter_mut().zip(counts) {
                        *e += c;
                    }
                }
            }
        }
        Ok(ReachRelation {
            inputs: self.inputs.clone(),
            outputs: next.outputs.clone(),
            depth,
            pairs,
        })
    }

    pub fn render(&self) -> Vec<String> {
        self.pairs
            .iter()
            .map(|((x, y), c)| {
                format!(
                    "{} -> {}  sequences by length {:?}",
                    x.display(&self.inputs),
                    y.display(&self.outputs),
                    c
                )
            })
            .collect()
    }
}

/// Reachability relation from all input markings with coefficients at most
/// `boundary_cap`, through at most `depth` firings.
pub fn blackbox_reach(p: &OpenNet, boundary_cap: i64, depth: usize) -> ReachRelation {
    blackbox_reach_from(p, &p.input_markings(boundary_cap), depth, None)
}

/// Reachability relation from the given input markings. With `phases`,
/// only sequences firing transitions in nondecreasing phase are counted.
pub fn blackbox_reach_from(
    p: &OpenNet,
    inputs: &[Marking],
    depth: usize,
    phases: Option<&[usize]>,
) -> ReachRelation {
    let kind = p.net.kind;
    let mut pairs: BTreeMap<(Marking, Marking), Vec<u64>> = BTreeMap::new();
    for x in inputs {
        let start = x.pushforward(&p.leg_in, kind);
        for (n, layer) in p.net.sequence_counts(&start, depth, phases).into_iter().enumerate() {
            for (m, c) in layer {
                for y in p.output_preimages(&m) {
                    pairs.entry((x.clone(), y)).or_insert_with(|| vec![0; depth + 1])[n] += c;
                }
            }
        }
    }
    ReachRelation {
        inputs: p.inputs().clone(),
        outputs: p.outputs().clone(),
        depth,
        pairs,
    }
}

/// Both sides of the compositionality check for open nets `p ; q`: the
/// relational composite of the pieces' relations and the composite's own
/// relation, with sequences counted phase by phase (all of `p`'s firings
/// before `q`'s).
pub fn reach_sides(
    p: &OpenNet,
    q: &OpenNet,
    boundary_cap: i64,
    depth: usize,
) -> Result<(ReachRelation, ReachRelation)> {
    let left = blackbox_reach(p, boundary_cap, depth);
    let mids: Vec<Marking> = left.output_markings().into_iter().collect();
    let right = blackbox_reach_from(q, &mids, depth, None);
    let composed = left.compose(&right, depth)?;
    let (whole, gluing) = p.compose_with_gluing(q)?;
    let phases = gluing.phases();
    let direct = blackbox_reach_from(&whole, &whole.input_markings(boundary_cap), depth, Some(&phases));
    Ok((composed, direct))
}
