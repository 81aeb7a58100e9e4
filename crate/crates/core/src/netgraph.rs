//! Directed multigraphs, their path categories, open graphs and black-boxed
//! path tables.
//!
//! Path semantics are always truncated at an explicit length bound `K`: the
//! free category on a graph with a reachable cycle is infinite.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::cospan::{coproduct, pushout, PushoutResult};
use crate::error::{Error, Result};
use crate::matrix::{FiniteFunction, VertexSet};
use crate::par::{self, Execution};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub src: usize,
    pub tgt: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertices: VertexSet,
    edges: Vec<Edge>,
}

impl Graph {
    pub fn new(vertices: VertexSet, edges: Vec<Edge>) -> Result<Self> {
        let mut ids = HashSet::new();
        for e in &edges {
            if !ids.insert(e.id.as_str()) {
                return Err(Error::DuplicateLabel(e.id.clone()));
            }
            if e.src >= vertices.len() || e.tgt >= vertices.len() {
                return Err(Error::DomainMismatch(format!("edge `{}` has an unknown endpoint", e.id)));
            }
        }
        Ok(Graph { vertices, edges })
    }

    /// Builds a graph from `(id, src, tgt)` label triples.
    pub fn from_labels(vertices: VertexSet, edges: &[(&str, &str, &str)]) -> Result<Self> {
        let edges = edges
            .iter()
            .map(|(id, s, t)| {
                Ok(Edge {
                    id: id.to_string(),
                    src: vertices.index_of(s)?,
                    tgt: vertices.index_of(t)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(vertices, edges)
    }

    pub fn edgeless(vertices: VertexSet) -> Self {
        Graph {
            vertices,
            edges: Vec::new(),
        }
    }

    pub fn vertices(&self) -> &VertexSet {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_ids(&self) -> VertexSet {
        VertexSet::new(self.edges.iter().map(|e| e.id.clone())).expect("edge ids are unique")
    }

    pub fn has_incoming(&self, v: usize) -> bool {
        self.edges.iter().any(|e| e.tgt == v)
    }

    pub fn has_outgoing(&self, v: usize) -> bool {
        self.edges.iter().any(|e| e.src == v)
    }

    /// Number of paths of length `n` between every ordered pair of vertices.
    pub fn path_counts(&self, n: usize) -> Vec<Vec<u64>> {
        let size = self.vertices.len();
        let mut counts: Vec<Vec<u64>> = (0..size)
            .map(|i| (0..size).map(|j| u64::from(i == j)).collect())
            .collect();
        for _ in 0..n {
            let mut next = vec![vec![0u64; size]; size];
            for (u, row) in counts.iter().enumerate() {
                for e in &self.edges {
                    next[u][e.tgt] += row[e.src];
                }
            }
            counts = next;
        }
        counts
    }

    /// All paths of length at most `max_len` starting at `start`, grouped by
    /// nothing; callers filter by endpoint.
    fn paths_from(&self, start: usize, max_len: usize) -> Vec<Path> {
        let mut out = vec![Path::identity(self.vertices.label(start))];
        let mut frontier = vec![(start, Vec::<usize>::new())];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for (v, edges) in &frontier {
                for (k, e) in self.edges.iter().enumerate() {
                    if e.src == *v {
                        let mut es = edges.clone();
                        es.push(k);
                        out.push(self.path_of(start, &es));
                        next.push((e.tgt, es));
                    }
                }
            }
            frontier = next;
        }
        out
    }

    fn path_of(&self, start: usize, edges: &[usize]) -> Path {
        let end = edges.last().map_or(start, |&k| self.edges[k].tgt);
        Path {
            start: self.vertices.label(start).to_string(),
            end: self.vertices.label(end).to_string(),
            edges: edges.iter().map(|&k| self.edges[k].id.clone()).collect(),
        }
    }
}

/// A path: a start vertex and a chain of composable edges. Ordered by length,
/// then by the edge-id sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    pub start: String,
    pub end: String,
    pub edges: Vec<String>,
}

impl Path {
    pub fn identity(vertex: &str) -> Self {
        Path {
            start: vertex.to_string(),
            end: vertex.to_string(),
            edges: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// `self` followed by `next`; endpoints are not checked. Identity paths
    /// are neutral on either side.
    pub fn concat(&self, next: &Path) -> Path {
        if next.is_empty() {
            return self.clone();
        }
        if self.is_empty() {
            return next.clone();
        }
        let mut edges = self.edges.clone();
        edges.extend(next.edges.iter().cloned());
        Path {
            start: self.start.clone(),
            end: next.end.clone(),
            edges,
        }
    }
}

impl Ord for Path {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.edges.len(), &self.edges, &self.start, &self.end).cmp(&(
            other.edges.len(),
            &other.edges,
            &other.start,
            &other.end,
        ))
    }
}

impl PartialOrd for Path {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.edges.is_empty() {
            write!(f, "id({})", self.start)
        } else {
            write!(f, "{}", self.edges.join("."))
        }
    }
}

/// Finite table of path sets indexed by boundary pairs, truncated at `bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathTable {
    rows: VertexSet,
    cols: VertexSet,
    bound: usize,
    cells: Vec<BTreeSet<Path>>,
}

impl PathTable {
    pub fn empty(rows: VertexSet, cols: VertexSet, bound: usize) -> Self {
        let cells = vec![BTreeSet::new(); rows.len() * cols.len()];
        PathTable {
            rows,
            cols,
            bound,
            cells,
        }
    }

    pub fn rows(&self) -> &VertexSet {
        &self.rows
    }

    pub fn cols(&self) -> &VertexSet {
        &self.cols
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn get(&self, i: usize, j: usize) -> &BTreeSet<Path> {
        &self.cells[i * self.cols.len() + j]
    }

    pub fn get_by_label(&self, row: &str, col: &str) -> Result<&BTreeSet<Path>> {
        Ok(self.get(self.rows.index_of(row)?, self.cols.index_of(col)?))
    }

    fn get_mut(&mut self, i: usize, j: usize) -> &mut BTreeSet<Path> {
        let c = self.cols.len();
        &mut self.cells[i * c + j]
    }

    pub fn counts(&self) -> Vec<Vec<usize>> {
        (0..self.rows.len())
            .map(|i| (0..self.cols.len()).map(|j| self.get(i, j).len()).collect())
            .collect()
    }

    /// Keeps only paths of length exactly `n`.
    pub fn of_length(&self, n: usize) -> PathTable {
        let mut out = self.clone();
        for cell in &mut out.cells {
            cell.retain(|p| p.len() == n);
        }
        out
    }

    /// Drops paths longer than `bound`.
    pub fn truncate(&self, bound: usize) -> PathTable {
        let mut out = self.clone();
        out.bound = bound.min(self.bound);
        for cell in &mut out.cells {
            cell.retain(|p| p.len() <= bound);
        }
        out
    }

    /// Renames vertices and edges in every path, e.g. to view a component's
    /// paths inside a composite graph.
    pub fn transport(&self, vertices: &FiniteFunction, edges: &FiniteFunction) -> Result<PathTable> {
        let v = |s: &str| -> Result<String> { Ok(vertices.apply_label(s)?.to_string()) };
        let mut out = self.clone();
        for cell in &mut out.cells {
            *cell = cell
                .iter()
                .map(|p| {
                    Ok(Path {
                        start: v(&p.start)?,
                        end: v(&p.end)?,
                        edges: p
                            .edges
                            .iter()
                            .map(|e| Ok(edges.apply_label(e)?.to_string()))
                            .collect::<Result<_>>()?,
                    })
                })
                .collect::<Result<_>>()?;
        }
        Ok(out)
    }

    /// Composition over the shared discrete boundary: every concatenation
    /// `p . q` with `p` in `self(x, y)` and `q` in `next(y, z)`, deduplicated.
    /// The bound of the result is the sum of the bounds.
    pub fn compose(&self, next: &PathTable) -> Result<PathTable> {
        if self.cols != next.rows {
            return Err(Error::BoundaryMismatch {
                left: self.cols.to_vec(),
                right: next.rows.to_vec(),
            });
        }
        let mut out = PathTable::empty(self.rows.clone(), next.cols.clone(), self.bound + next.bound);
        for x in 0..self.rows.len() {
            for y in 0..self.cols.len() {
                for z in 0..next.cols.len() {
                    for p in self.get(x, y) {
                        for q in next.get(y, z) {
                            out.get_mut(x, z).insert(p.concat(q));
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Identity table on a discrete boundary: one identity path per label.
    pub fn identity(x: &VertexSet) -> PathTable {
        let mut out = PathTable::empty(x.clone(), x.clone(), 0);
        for i in 0..x.len() {
            out.get_mut(i, i).insert(Path::identity(x.label(i)));
        }
        out
    }
}

/// Paths of length exactly `n` between all vertex pairs.
pub fn paths_of_length(g: &Graph, n: usize) -> PathTable {
    free_category(g, n).of_length(n)
}

/// All paths of length at most `k` between all vertex pairs.
pub fn free_category(g: &Graph, k: usize) -> PathTable {
    let id = FiniteFunction::identity(g.vertices.clone());
    restricted_paths(g, &id, &id, k, Execution::default())
}

fn restricted_paths(
    g: &Graph,
    rows: &FiniteFunction,
    cols: &FiniteFunction,
    k: usize,
    exec: Execution,
) -> PathTable {
    let starts: Vec<usize> = (0..g.vertices.len()).collect();
    let by_start = par::map(exec, &starts, |&s| g.paths_from(s, k));
    let mut out = PathTable::empty(rows.domain().clone(), cols.domain().clone(), k);
    for i in 0..rows.domain().len() {
        let s = rows.apply(i);
        for j in 0..cols.domain().len() {
            let end = g.vertices.label(cols.apply(j));
            let cell = by_start[s].iter().filter(|p| p.end == end).cloned().collect();
            *out.get_mut(i, j) = cell;
        }
    }
    out
}

/// A graph with input and output legs into its vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenGraph {
    graph: Graph,
    leg_in: FiniteFunction,
    leg_out: FiniteFunction,
}

/// How the pieces of a composite open graph sit inside it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphGluing {
    pub vertices: PushoutResult,
    pub left_edges: FiniteFunction,
    pub right_edges: FiniteFunction,
}

impl OpenGraph {
    pub fn new(graph: Graph, leg_in: FiniteFunction, leg_out: FiniteFunction) -> Result<Self> {
        if leg_in.codomain() != graph.vertices() || leg_out.codomain() != graph.vertices() {
            return Err(Error::DomainMismatch("legs must land in the graph's vertices".into()));
        }
        Ok(OpenGraph {
            graph,
            leg_in,
            leg_out,
        })
    }

    pub fn from_labels(
        graph: Graph,
        inputs: VertexSet,
        outputs: VertexSet,
        leg_in: &[(&str, &str)],
        leg_out: &[(&str, &str)],
    ) -> Result<Self> {
        let v = graph.vertices().clone();
        let li = FiniteFunction::from_pairs(inputs, v.clone(), leg_in)?;
        let lo = FiniteFunction::from_pairs(outputs, v, leg_out)?;
        Self::new(graph, li, lo)
    }

    /// Identity on `x`: vertices `x`, no edges, identity legs.
    pub fn identity(x: VertexSet) -> Self {
        let id = FiniteFunction::identity(x.clone());
        OpenGraph {
            graph: Graph::edgeless(x),
            leg_in: id.clone(),
            leg_out: id,
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
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

    pub fn compose(&self, next: &OpenGraph) -> Result<OpenGraph> {
        Ok(self.compose_with_gluing(next)?.0)
    }

    /// Vertex pushout over the shared boundary and disjoint union of edges.
    pub fn compose_with_gluing(&self, next: &OpenGraph) -> Result<(OpenGraph, GraphGluing)> {
        if self.outputs() != next.inputs() {
            return Err(Error::BoundaryMismatch {
                left: self.outputs().to_vec(),
                right: next.inputs().to_vec(),
            });
        }
        let po = pushout(&self.leg_out, &next.leg_in)?;
        let edge_sum = coproduct(&self.graph.edge_ids(), &next.graph.edge_ids())?;
        let mut edges = Vec::with_capacity(edge_sum.quotient.len());
        for (k, e) in self.graph.edges.iter().enumerate() {
            edges.push(Edge {
                id: edge_sum.quotient.label(edge_sum.left_leg.apply(k)).to_string(),
                src: po.left_leg.apply(e.src),
                tgt: po.left_leg.apply(e.tgt),
            });
        }
        for (k, e) in next.graph.edges.iter().enumerate() {
            edges.push(Edge {
                id: edge_sum.quotient.label(edge_sum.right_leg.apply(k)).to_string(),
                src: po.right_leg.apply(e.src),
                tgt: po.right_leg.apply(e.tgt),
            });
        }
        let graph = Graph::new(po.quotient.clone(), edges)?;
        let composite = OpenGraph::new(
            graph,
            po.left_leg.after(&self.leg_in)?,
            po.right_leg.after(&next.leg_out)?,
        )?;
        let gluing = GraphGluing {
            vertices: po,
            left_edges: edge_sum.left_leg,
            right_edges: edge_sum.right_leg,
        };
        Ok((composite, gluing))
    }

    /// Inputs are sources and outputs are sinks.
    pub fn is_functional(&self) -> bool {
        self.leg_in.as_slice().iter().all(|&v| !self.graph.has_incoming(v))
            && self.leg_out.as_slice().iter().all(|&v| !self.graph.has_outgoing(v))
    }

    /// Number of length-`n` paths between boundary images.
    pub fn boundary_counts(&self, n: usize) -> Vec<Vec<u64>> {
        let all = self.graph.path_counts(n);
        self.leg_in
            .as_slice()
            .iter()
            .map(|&u| self.leg_out.as_slice().iter().map(|&v| all[u][v]).collect())
            .collect()
    }
}

pub fn compose_open_graph(g: &OpenGraph, h: &OpenGraph) -> Result<OpenGraph> {
    g.compose(h)
}

pub fn is_functional_graph(c: &OpenGraph) -> bool {
    c.is_functional()
}

/// Paths of length at most `k` from input images to output images.
pub fn blackbox_graph(c: &OpenGraph, k: usize) -> PathTable {
    restricted_paths(&c.graph, &c.leg_in, &c.leg_out, k, Execution::default())
}

pub fn profunctor_compose(p: &PathTable, q: &PathTable) -> Result<PathTable> {
    p.compose(q)
}

/// Split-sum of component counts at length `n`:
/// `sum_{i+j=n} sum_y count_G^i(x, y) * count_H^j(y, z)`.
pub fn split_sum_counts(g: &OpenGraph, h: &OpenGraph, n: usize) -> Vec<Vec<u64>> {
    let (nx, ny, nz) = (g.inputs().len(), g.outputs().len(), h.outputs().len());
    let mut out = vec![vec![0u64; nz]; nx];
    for i in 0..=n {
        let a = g.boundary_counts(i);
        let b = h.boundary_counts(n - i);
        for x in 0..nx {
            for z in 0..nz {
                out[x][z] += (0..ny).map(|y| a[x][y] * b[y][z]).sum::<u64>();
            }
        }
    }
    out
}
