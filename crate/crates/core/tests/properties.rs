use compath::cospan::find_isomorphism;
use compath::gen::{Generator, Sample};
use compath::matrix::{FiniteFunction, VertexSet};
use compath::netgraph::blackbox_graph;
use compath::pathsolve::{check_lax, solve_compositional, CompositionExpr, SolveMode};
use compath::qnet::{blackbox_reach, reach_sides, Marking, ResourceKind};
use compath::{Boolean, Capacity, ClosureAlgorithm, Execution, Tropical, TruncatedLanguage, Viterbi};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn random_function(g: &mut Generator, dom: &VertexSet, cod: &VertexSet) -> FiniteFunction {
    let map = (0..dom.len()).map(|_| g.rng().gen_range(0..cod.len())).collect();
    FiniteFunction::new(dom.clone(), cod.clone(), map).unwrap()
}

fn element_laws<Q: Sample>(q: &Q, g: &mut Generator) {
    assert!(q.same(&q.star(&q.bottom()).unwrap(), &q.unit()));
    for _ in 0..20 {
        let (a, b) = (q.sample(g.rng()), q.sample(g.rng()));
        assert_eq!(q.leq(&a, &b), q.same(&q.join(&a, &b), &b));
    }
}

fn closure_laws<Q: Sample>(q: &Q, g: &mut Generator) {
    let m = g.matrix(q, 8);
    let n = m.rows().len();
    let fw = m.closure_fw().unwrap();
    let series = m.closure_series_stable(4 * n + 4).unwrap();
    assert!(series.stabilized_at <= 2 * n, "stabilized at {} for |X| = {n}", series.stabilized_at);
    assert!(fw.approx_eq(&series.closure));
    assert!(fw.is_rcategory());
    assert!(fw.closure_fw().unwrap().approx_eq(&fw));

    // least among R-categories above M
    let extra = g.square(q, m.rows());
    let c = m.join(&extra).unwrap().closure_fw().unwrap();
    assert!(c.is_rcategory());
    assert!(fw.leq(&c).unwrap());
    // monotone
    assert!(fw.leq(&m.join(&extra).unwrap().closure_fw().unwrap()).unwrap());

    // pivot order does not matter
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(g.rng());
    let labels = VertexSet::numbered("p", n);
    let conj = m.permute(&perm, labels.clone()).unwrap().closure_fw().unwrap();
    assert!(conj.approx_eq(&fw.permute(&perm, labels).unwrap()));

    // pushforward is functorial
    let mid = VertexSet::numbered("y", g.rng().gen_range(1..=4));
    let end = VertexSet::numbered("z", g.rng().gen_range(1..=3));
    let f = random_function(g, m.rows(), &mid);
    let h = random_function(g, &mid, &end);
    let once = m.pushforward(&h.after(&f).unwrap()).unwrap();
    let twice = m.pushforward(&f).unwrap().pushforward(&h).unwrap();
    assert!(once.approx_eq(&twice));

    // sequential and parallel agree exactly
    assert_eq!(m.closure_fw_with(Execution::Sequential).unwrap(), m.closure_fw_with(Execution::Parallel).unwrap());
    assert_eq!(
        m.mul_with(&extra, Execution::Sequential).unwrap(),
        m.mul_with(&extra, Execution::Parallel).unwrap()
    );
}

fn cospan_laws<Q: Sample>(q: &Q, g: &mut Generator) {
    let x = VertexSet::numbered("x", g.rng().gen_range(1..=2));
    let y = VertexSet::numbered("y", g.rng().gen_range(1..=2));
    let z = VertexSet::numbered("z", g.rng().gen_range(1..=2));
    let w = VertexSet::numbered("w", g.rng().gen_range(1..=2));
    let a = g.open_matrix(q, "a", &x, &y, false);
    let b = g.open_matrix(q, "b", &y, &z, false);
    let c = g.open_matrix(q, "c", &z, &w, false);
    let left = a.compose(&b).unwrap().compose(&c).unwrap();
    let right = a.compose(&b.compose(&c).unwrap()).unwrap();
    assert!(find_isomorphism(&left, &right).is_some(), "associativity");

    let a2 = g.open_matrix(q, "d", &x, &y, false);
    let b2 = g.open_matrix(q, "e", &y, &z, false);
    let outer = a.compose(&b).unwrap().tensor(&a2.compose(&b2).unwrap()).unwrap();
    let inner = a.tensor(&a2).unwrap().compose(&b.tensor(&b2).unwrap()).unwrap();
    assert!(find_isomorphism(&outer, &inner).is_some(), "interchange");
}

fn solve_laws<Q: Sample>(q: &Q, g: &mut Generator) {
    let (m, n) = g.arbitrary_pair(q);
    assert!(check_lax(&m, &n, ClosureAlgorithm::Elimination).unwrap());

    let len = g.rng().gen_range(2..=4);
    let chain = g.functional_chain(q, len);
    let expr = chain
        .into_iter()
        .map(CompositionExpr::leaf)
        .reduce(CompositionExpr::compose)
        .unwrap();
    let fast = solve_compositional(&expr, ClosureAlgorithm::Elimination, SolveMode::Compositional).unwrap();
    let glued = solve_compositional(&expr, ClosureAlgorithm::Elimination, SolveMode::Glued).unwrap();
    assert_eq!(fast.fast_nodes, len - 1);
    assert_eq!(fast.result, glued.result);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantale_elements(seed in any::<u64>()) {
        let mut g = Generator::new(seed);
        element_laws(&Tropical, &mut g);
        element_laws(&Capacity, &mut g);
        element_laws(&Viterbi, &mut g);
        element_laws(&Boolean, &mut g);
        element_laws(&TruncatedLanguage::new(['a', 'b'], 3), &mut g);
    }

    #[test]
    fn closure_properties(seed in any::<u64>()) {
        let mut g = Generator::new(seed);
        closure_laws(&Tropical, &mut g);
        closure_laws(&Capacity, &mut g);
        closure_laws(&Viterbi, &mut g);
        closure_laws(&Boolean, &mut g);
    }

    #[test]
    fn language_closure_agrees_with_series(seed in any::<u64>()) {
        let mut g = Generator::new(seed);
        let l = TruncatedLanguage::new(['a', 'b'], 3);
        let n = g.rng().gen_range(1..=4);
        let m = g.square(&l, &VertexSet::numbered("v", n));
        let fw = m.closure_fw().unwrap();
        prop_assert_eq!(&fw, &m.closure_series_stable(64).unwrap().closure);
        prop_assert!(fw.is_rcategory());
    }

    #[test]
    fn composition_is_associative_and_interchanges(seed in any::<u64>()) {
        let mut g = Generator::new(seed);
        cospan_laws(&Tropical, &mut g);
        cospan_laws(&Boolean, &mut g);
        cospan_laws(&Viterbi, &mut g);
    }

    #[test]
    fn lax_and_strategy_agreement(seed in any::<u64>()) {
        let mut g = Generator::new(seed);
        solve_laws(&Tropical, &mut g);
        solve_laws(&Capacity, &mut g);
        solve_laws(&Viterbi, &mut g);
        solve_laws(&Boolean, &mut g);
    }

    /// Every composite boundary path splits once, from left edges to right edges.
    #[test]
    fn functional_graph_paths_cross_once(seed in any::<u64>()) {
        let mut g = Generator::new(seed);
        let (a, b) = g.functional_graph_pair(5);
        let c = a.compose(&b).unwrap();
        let table = blackbox_graph(&c, 6);
        for x in 0..table.rows().len() {
            for z in 0..table.cols().len() {
                for p in table.get(x, z) {
                    let crossings = p.edges.windows(2).filter(|w| w[0].starts_with("we") != w[1].starts_with("we")).count();
                    prop_assert!(crossings <= 1);
                    prop_assert!(p.edges.iter().skip_while(|e| e.starts_with("ve")).all(|e| e.starts_with("we")));
                }
            }
        }
    }

    #[test]
    fn natural_firing_is_deterministic_and_conserves(seed in any::<u64>()) {
        let mut g = Generator::new(seed);
        let (p, _) = g.net_pair();
        let net = p.net();
        let zint = net.translate(ResourceKind::Integer).unwrap();
        for _ in 0..10 {
            let m = Marking::new((0..net.places().len()).map(|_| g.rng().gen_range(0..4)).collect());
            for t in net.transitions() {
                let out = net.fire(&m, &t.id).unwrap();
                prop_assert!(out.len() <= 1);
                for r in &out {
                    for i in 0..m.len() {
                        prop_assert_eq!(r.get(i) - m.get(i), t.tgt.get(i) - t.src.get(i));
                    }
                    prop_assert!(zint.fire(&m, &t.id).unwrap().contains(r));
                }
            }
        }
    }

    #[test]
    fn net_relations_are_lax(seed in any::<u64>()) {
        let mut g = Generator::new(seed);
        let (p, q) = g.net_pair();
        let (composed, _) = reach_sides(&p, &q, 2, 4).unwrap();
        let whole = blackbox_reach(&p.compose(&q).unwrap(), 2, 4);
        prop_assert!(composed.related().is_subset(&whole.related()));
    }
}
