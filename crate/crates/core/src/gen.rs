//! Seeded random instances for property checks and the `gen` command.
//!
//! Numeric weights are drawn from dyadic grids so that sums and products
//! stay exact in `f64`, which lets closure algorithms be compared with `==`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cospan::OpenMatrix;
use crate::matrix::{FiniteFunction, RMatrix, VertexSet};
use crate::netgraph::{Edge, Graph, OpenGraph};
use crate::qnet::{Marking, OpenNet, QNet, ResourceKind, Transition};
use crate::quantale::{Boolean, Capacity, Quantale, Tropical, TruncatedLanguage, Viterbi, Word, WordSet};

/// Seed used when neither `--seed` nor `OPENPATH_SEED` is given.
pub const DEFAULT_SEED: u64 = 20_240_611;

/// Environment variable that overrides [`DEFAULT_SEED`].
pub const SEED_ENV: &str = "OPENPATH_SEED";

/// `OPENPATH_SEED` if set and numeric, else [`DEFAULT_SEED`].
pub fn seed_from_env() -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

/// Instances that can draw random elements.
pub trait Sample: Quantale {
    fn sample<R: Rng>(&self, rng: &mut R) -> Self::Elem;
}

impl Sample for Tropical {
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        if rng.gen_bool(0.35) {
            f64::INFINITY
        } else {
            f64::from(rng.gen_range(0..=40)) / 4.0
        }
    }
}

impl Sample for Capacity {
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match rng.gen_range(0..10) {
            0..=2 => 0.0,
            3 => f64::INFINITY,
            _ => f64::from(rng.gen_range(1..=40)) / 4.0,
        }
    }
}

impl Sample for Viterbi {
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        if rng.gen_bool(0.35) {
            0.0
        } else {
            f64::from(rng.gen_range(1..=8)) / 8.0
        }
    }
}

impl Sample for Boolean {
    fn sample<R: Rng>(&self, rng: &mut R) -> bool {
        rng.gen_bool(0.4)
    }
}

impl Sample for TruncatedLanguage {
    fn sample<R: Rng>(&self, rng: &mut R) -> WordSet {
        let letters: Vec<char> = self.alphabet().iter().copied().collect();
        let n = rng.gen_range(0..=2);
        let words = (0..n).map(|_| {
            let len = rng.gen_range(0..=self.max_len());
            Word::new((0..len).map(|_| *letters.choose(rng).expect("nonempty alphabet")).collect::<String>())
        });
        WordSet(words.collect())
    }
}

/// A deterministic source of random instances.
pub struct Generator {
    rng: ChaCha8Rng,
}

impl Generator {
    pub fn new(seed: u64) -> Self {
        Generator {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn square<Q: Sample>(&mut self, q: &Q, vs: &VertexSet) -> RMatrix<Q> {
        self.rect(q, vs, vs)
    }

    pub fn rect<Q: Sample>(&mut self, q: &Q, rows: &VertexSet, cols: &VertexSet) -> RMatrix<Q> {
        let rng = &mut self.rng;
        RMatrix::from_fn(q.clone(), rows.clone(), cols.clone(), |_, _| q.sample(rng))
    }

    /// A square matrix on `v0..v{n-1}` with `1 <= n <= max`.
    pub fn matrix<Q: Sample>(&mut self, q: &Q, max: usize) -> RMatrix<Q> {
        let n = self.rng.gen_range(1..=max);
        self.square(q, &VertexSet::numbered("v", n))
    }

    fn function(&mut self, dom: &VertexSet, cod: &VertexSet, injective: bool) -> FiniteFunction {
        let map = if injective {
            let mut all: Vec<usize> = (0..cod.len()).collect();
            all.shuffle(&mut self.rng);
            all.truncate(dom.len());
            all
        } else {
            (0..dom.len()).map(|_| self.rng.gen_range(0..cod.len())).collect()
        };
        FiniteFunction::new(dom.clone(), cod.clone(), map).expect("map lands in codomain")
    }

    /// An open matrix on `prefix0..` with random legs; the output leg is
    /// injective when asked.
    pub fn open_matrix<Q: Sample>(
        &mut self,
        q: &Q,
        prefix: &str,
        inputs: &VertexSet,
        outputs: &VertexSet,
        injective_out: bool,
    ) -> OpenMatrix<Q> {
        let lo = if injective_out { outputs.len() } else { 1 };
        let n = self.rng.gen_range(lo.max(1)..=lo.max(1) + 3);
        let vs = VertexSet::numbered(prefix, n);
        let li = self.function(inputs, &vs, false);
        let lout = self.function(outputs, &vs, injective_out);
        OpenMatrix::new(li, lout, self.square(q, &vs)).expect("legs match carrier")
    }

    fn boundary(&mut self, prefix: &str) -> VertexSet {
        VertexSet::numbered(prefix, self.rng.gen_range(1..=3))
    }

    /// A composable pair with no constraints on legs or weights.
    pub fn arbitrary_pair<Q: Sample>(&mut self, q: &Q) -> (OpenMatrix<Q>, OpenMatrix<Q>) {
        let (x, y, z) = (self.boundary("x"), self.boundary("y"), self.boundary("z"));
        let m = self.open_matrix(q, "v", &x, &y, false);
        let n = self.open_matrix(q, "w", &y, &z, false);
        (m, n)
    }

    /// A composable pair of functional open matrices whose gluing is direct:
    /// the left piece's output leg is injective.
    pub fn functional_pair<Q: Sample>(&mut self, q: &Q) -> (OpenMatrix<Q>, OpenMatrix<Q>) {
        let (x, y, z) = (self.boundary("x"), self.boundary("y"), self.boundary("z"));
        let m = functionalize(self.open_matrix(q, "v", &x, &y, true));
        let n = functionalize(self.open_matrix(q, "w", &y, &z, false));
        (m, n)
    }

    /// `len` composable functional open matrices with injective output legs,
    /// so every gluing along the chain is direct.
    pub fn functional_chain<Q: Sample>(&mut self, q: &Q, len: usize) -> Vec<OpenMatrix<Q>> {
        let mut boundary = self.boundary("b0_");
        let mut out = Vec::with_capacity(len);
        for k in 0..len {
            let next = self.boundary(&format!("b{}_", k + 1));
            let m = self.open_matrix(q, &format!("m{k}_"), &boundary, &next, true);
            out.push(functionalize(m));
            boundary = next;
        }
        out
    }

    /// A random graph on `1..=max_vertices` vertices.
    pub fn graph(&mut self, prefix: &str, max_vertices: usize) -> Graph {
        let n = self.rng.gen_range(1..=max_vertices);
        let vs = VertexSet::numbered(prefix, n);
        let m = self.rng.gen_range(0..=n + 2);
        let edges = (0..m)
            .map(|i| Edge {
                id: format!("{prefix}e{i}"),
                src: self.rng.gen_range(0..n),
                tgt: self.rng.gen_range(0..n),
            })
            .collect();
        Graph::new(vs, edges).expect("fresh edge ids")
    }

    fn open_graph(&mut self, prefix: &str, inputs: &VertexSet, outputs: &VertexSet, max_vertices: usize) -> OpenGraph {
        let min = outputs.len().min(max_vertices);
        let mut g = self.graph(prefix, max_vertices);
        while g.vertices().len() < min {
            g = self.graph(prefix, max_vertices);
        }
        let li = self.function(inputs, g.vertices(), false);
        let lo = self.function(outputs, g.vertices(), true);
        let edges = g
            .edges()
            .iter()
            .filter(|e| !li.as_slice().contains(&e.tgt) && !lo.as_slice().contains(&e.src))
            .cloned()
            .collect();
        let g = Graph::new(g.vertices().clone(), edges).expect("subset of valid edges");
        OpenGraph::new(g, li, lo).expect("legs match vertices")
    }

    /// A composable pair of functional open graphs with at most
    /// `max_vertices` vertices each. Both legs over the shared boundary are
    /// injective, so each boundary vertex is counted once.
    pub fn functional_graph_pair(&mut self, max_vertices: usize) -> (OpenGraph, OpenGraph) {
        let cap = max_vertices.min(3);
        let x = VertexSet::numbered("x", self.rng.gen_range(1..=2));
        let y = VertexSet::numbered("y", self.rng.gen_range(1..=cap));
        let z = VertexSet::numbered("z", self.rng.gen_range(1..=2));
        let g = self.open_graph("v", &x, &y, max_vertices);
        let h = self.open_graph_in(&y, &z, max_vertices);
        (g, h)
    }

    fn open_graph_in(&mut self, inputs: &VertexSet, outputs: &VertexSet, max_vertices: usize) -> OpenGraph {
        // injective input leg on the right piece
        let n = self.rng.gen_range(inputs.len()..=max_vertices.max(inputs.len()));
        let vs = VertexSet::numbered("w", n);
        let li = self.function(inputs, &vs, true);
        let lo = self.function(outputs, &vs, false);
        let m = self.rng.gen_range(0..=n + 2);
        let edges: Vec<Edge> = (0..m)
            .map(|i| Edge {
                id: format!("we{i}"),
                src: self.rng.gen_range(0..n),
                tgt: self.rng.gen_range(0..n),
            })
            .filter(|e| !li.as_slice().contains(&e.tgt) && !lo.as_slice().contains(&e.src))
            .collect();
        OpenGraph::new(Graph::new(vs, edges).expect("fresh edge ids"), li, lo).expect("legs match vertices")
    }

    fn marking(&mut self, places: usize, allowed: &[usize], max: i64) -> Marking {
        let mut m = vec![0; places];
        for &p in allowed {
            if self.rng.gen_bool(0.5) {
                m[p] = self.rng.gen_range(1..=max);
            }
        }
        Marking::new(m)
    }

    fn open_net(
        &mut self,
        prefix: &str,
        inputs: &VertexSet,
        outputs: &VertexSet,
        injective_in: bool,
        injective_out: bool,
        functional: bool,
    ) -> OpenNet {
        let need = inputs.len().max(outputs.len());
        let n = self.rng.gen_range(need.max(1)..=3);
        let places = VertexSet::numbered(prefix, n);
        let li = self.function(inputs, &places, injective_in);
        let lo = self.function(outputs, &places, injective_out);
        let all: Vec<usize> = (0..n).collect();
        let no_in: Vec<usize> = all.iter().copied().filter(|p| !functional || !li.as_slice().contains(p)).collect();
        let no_out: Vec<usize> = all.iter().copied().filter(|p| !functional || !lo.as_slice().contains(p)).collect();
        let count = self.rng.gen_range(0..=2);
        let mut ts = Vec::new();
        for k in 0..count {
            let mut src = self.marking(n, &no_out, 2);
            if src.is_empty() {
                if let Some(&p) = no_out.choose(&mut self.rng) {
                    src = Marking::new((0..n).map(|i| i64::from(i == p)).collect());
                }
            }
            let tgt = self.marking(n, &no_in, 2);
            ts.push(Transition {
                id: format!("{prefix}t{k}"),
                src,
                tgt,
            });
        }
        let net = QNet::new(ResourceKind::Natural, places, ts).expect("valid markings");
        OpenNet::new(net, li, lo).expect("legs match places")
    }

    /// A composable pair of functional natural open nets with at most three
    /// places and two transitions each, and injective legs over the shared
    /// boundary.
    pub fn functional_net_pair(&mut self) -> (OpenNet, OpenNet) {
        let x = VertexSet::numbered("x", self.rng.gen_range(1..=2));
        let y = VertexSet::numbered("y", self.rng.gen_range(1..=2));
        let z = VertexSet::numbered("z", self.rng.gen_range(1..=2));
        let p = self.open_net("p", &x, &y, false, true, true);
        let q = self.open_net("q", &y, &z, true, false, true);
        (p, q)
    }

    /// Like [`Generator::functional_net_pair`] without the functionality
    /// constraint: transitions may touch boundary places freely.
    pub fn net_pair(&mut self) -> (OpenNet, OpenNet) {
        let x = VertexSet::numbered("x", self.rng.gen_range(1..=2));
        let y = VertexSet::numbered("y", self.rng.gen_range(1..=2));
        let z = VertexSet::numbered("z", self.rng.gen_range(1..=2));
        let p = self.open_net("p", &x, &y, false, true, false);
        let q = self.open_net("q", &y, &z, true, false, false);
        (p, q)
    }
}

/// Clears the columns of input images and the rows of output images.
pub fn functionalize<Q: Quantale>(m: OpenMatrix<Q>) -> OpenMatrix<Q> {
    let ins = m.leg_in().as_slice().to_vec();
    let outs = m.leg_out().as_slice().to_vec();
    let q = m.quantale().clone();
    let src = m.matrix();
    let mat = RMatrix::from_fn(q.clone(), src.rows().clone(), src.cols().clone(), |i, j| {
        if ins.contains(&j) || outs.contains(&i) {
            q.bottom()
        } else {
            src.get(i, j).clone()
        }
    });
    m.with_matrix(mat).expect("same carrier")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pathsolve::{gluing_is_direct, is_functional};

    #[test]
    fn same_seed_same_output() {
        let a = Generator::new(7).matrix(&Tropical, 6);
        let b = Generator::new(7).matrix(&Tropical, 6);
        assert_eq!(a, b);
    }

    #[test]
    fn functional_pairs_are_functional_and_direct() {
        let mut g = Generator::new(1);
        for _ in 0..50 {
            let (m, n) = g.functional_pair(&Viterbi);
            assert!(is_functional(&m) && is_functional(&n));
            assert!(gluing_is_direct(m.leg_out(), n.leg_in()));
            m.compose(&n).unwrap();
        }
    }

    #[test]
    fn generated_graphs_and_nets_are_functional() {
        let mut g = Generator::new(2);
        for _ in 0..50 {
            let (a, b) = g.functional_graph_pair(5);
            assert!(a.is_functional() && b.is_functional());
            assert!(a.graph().vertices().len() <= 5 && b.graph().vertices().len() <= 5);
            a.compose(&b).unwrap();
            let (p, q) = g.functional_net_pair();
            assert!(p.is_functional() && q.is_functional());
            assert!(p.net().places().len() <= 3 && p.net().transitions().len() <= 2);
            p.compose(&q).unwrap();
        }
    }

    #[test]
    fn language_samples_are_members() {
        let l = TruncatedLanguage::new(['a', 'b'], 3);
        let mut g = Generator::new(3);
        for _ in 0..100 {
            assert!(l.contains(&l.sample(g.rng())));
        }
    }
}
