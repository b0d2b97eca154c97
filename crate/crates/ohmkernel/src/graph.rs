//! Simple undirected graphs, their Laplacians, and seeded random generation.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::Rng;
use thiserror::Error;

use crate::rng;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("edge endpoint out of range: ({a}, {b}) with {n} vertices")]
    EndpointOutOfRange { a: usize, b: usize, n: usize },
    #[error("self-loop at vertex {v}")]
    SelfLoop { v: usize },
    #[error("edge probability {p} outside [0, 1]")]
    InvalidProbability { p: f64 },
}

/// What to do with self-loops in raw edge input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelfLoopPolicy {
    /// Drop them and count how many were dropped.
    #[default]
    Drop,
    /// Fail on the first one.
    Reject,
}

/// Result of building a graph from a raw edge list.
#[derive(Debug, Clone)]
pub struct GraphBuild {
    pub graph: Graph,
    /// Self-loops dropped under [`SelfLoopPolicy::Drop`].
    pub self_loops_dropped: usize,
}

/// Immutable simple undirected graph: a vertex count and a deduplicated set
/// of unordered edges over `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    /// Sorted lexicographically, each stored with `a < b`.
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Build a graph from raw ordered pairs. Duplicate and reversed-duplicate
    /// pairs collapse to one undirected edge.
    pub fn from_edge_list(
        n: usize,
        raw_edges: &[(usize, usize)],
        policy: SelfLoopPolicy,
    ) -> Result<GraphBuild, GraphError> {
        let mut set = BTreeSet::new();
        let mut self_loops = 0usize;
        for &(a, b) in raw_edges {
            if a >= n || b >= n {
                return Err(GraphError::EndpointOutOfRange { a, b, n });
            }
            if a == b {
                match policy {
                    SelfLoopPolicy::Drop => {
                        self_loops += 1;
                        continue;
                    }
                    SelfLoopPolicy::Reject => return Err(GraphError::SelfLoop { v: a }),
                }
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(GraphBuild {
            graph: Self::from_canonical_edges(n, set.into_iter().collect()),
            self_loops_dropped: self_loops,
        })
    }

    /// [`Graph::from_edge_list`] with the default drop policy, discarding the
    /// self-loop count.
    pub fn simple(n: usize, raw_edges: &[(usize, usize)]) -> Result<Graph, GraphError> {
        Ok(Self::from_edge_list(n, raw_edges, SelfLoopPolicy::Drop)?.graph)
    }

    fn from_canonical_edges(n: usize, edges: Vec<(usize, usize)>) -> Graph {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        Graph { n, edges, adj }
    }

    /// Erdos-Renyi graph G(n, p): each of the n(n-1)/2 vertex pairs is an
    /// edge independently with probability `p`.
    ///
    /// Deterministic in `(n, p, seed)`: pairs are visited in lexicographic
    /// order (`a < b`) and each consumes exactly one `f64` from a ChaCha8
    /// stream seeded with `seed`; the pair is kept iff that draw is `< p`.
    pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph, GraphError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(GraphError::InvalidProbability { p });
        }
        let mut rng = rng::seeded(seed);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                if rng.gen::<f64>() < p {
                    edges.push((a, b));
                }
            }
        }
        Ok(Self::from_canonical_edges(n, edges))
    }

    /// Complete graph on `n` vertices.
    pub fn complete(n: usize) -> Graph {
        let edges = (0..n)
            .flat_map(|a| ((a + 1)..n).map(move |b| (a, b)))
            .collect();
        Self::from_canonical_edges(n, edges)
    }

    /// Path graph 0-1-...-(n-1).
    pub fn path(n: usize) -> Graph {
        let edges = (1..n).map(|b| (b - 1, b)).collect();
        Self::from_canonical_edges(n, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in lexicographic order, each with `a < b`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Laplacian L = D - A.
    pub fn laplacian(&self) -> LaplacianMatrix {
        let mut m = DMatrix::<f64>::zeros(self.n, self.n);
        for &(a, b) in &self.edges {
            m[(a, b)] = -1.0;
            m[(b, a)] = -1.0;
            m[(a, a)] += 1.0;
            m[(b, b)] += 1.0;
        }
        LaplacianMatrix(m)
    }

    /// Label each vertex with its connected component (labels `0..count`,
    /// assigned in order of the smallest vertex in each component).
    pub fn connected_components(&self) -> Components {
        const UNSEEN: usize = usize::MAX;
        let mut labels = vec![UNSEEN; self.n];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..self.n {
            if labels[start] != UNSEEN {
                continue;
            }
            labels[start] = count;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &w in &self.adj[v] {
                    if labels[w] == UNSEEN {
                        labels[w] = count;
                        stack.push(w);
                    }
                }
            }
            count += 1;
        }
        Components { labels, count }
    }

    /// Unweighted shortest-path distances from `source` (`None` if
    /// unreachable). BFS.
    pub fn bfs_distances(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[source] = Some(0);
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v].unwrap();
            for &w in &self.adj[v] {
                if dist[w].is_none() {
                    dist[w] = Some(dv + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

/// Connected-component labelling of a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    /// Component label per vertex, in `0..count`.
    pub labels: Vec<usize>,
    pub count: usize,
}

impl Components {
    pub fn same_component(&self, a: usize, b: usize) -> bool {
        self.labels[a] == self.labels[b]
    }
}

/// Dense symmetric Laplacian L = D - A of a simple undirected graph.
///
/// Entries are exact small integers stored as `f64`: `L[i][i] = deg(i)`,
/// `L[i][j] = -1` for an edge, `0` otherwise. Rows sum to zero and the
/// matrix is positive semi-definite.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix(pub(crate) DMatrix<f64>);

impl LaplacianMatrix {
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_edge_list_collapses_reversed_duplicates() {
        let g = Graph::simple(2, &[(0, 1), (1, 0)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn from_edge_list_empty() {
        let g = Graph::simple(3, &[]).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn from_edge_list_rejects_out_of_range_endpoint() {
        let err = Graph::simple(2, &[(0, 2)]).unwrap_err();
        assert_eq!(err, GraphError::EndpointOutOfRange { a: 0, b: 2, n: 2 });
        assert!(err.to_string().contains("(0, 2)"));
    }

    #[test]
    fn self_loop_policies() {
        let build = Graph::from_edge_list(3, &[(0, 0), (0, 1), (2, 2)], SelfLoopPolicy::Drop)
            .unwrap();
        assert_eq!(build.self_loops_dropped, 2);
        assert_eq!(build.graph.edge_count(), 1);

        let err = Graph::from_edge_list(3, &[(0, 0)], SelfLoopPolicy::Reject).unwrap_err();
        assert_eq!(err, GraphError::SelfLoop { v: 0 });
    }

    #[test]
    fn laplacian_single_edge() {
        let g = Graph::simple(2, &[(0, 1)]).unwrap();
        let l = g.laplacian();
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert_eq!(l.as_matrix(), &expected);
    }

    #[test]
    fn laplacian_triangle() {
        let l = Graph::complete(3).laplacian();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 2.0 } else { -1.0 };
                assert_eq!(l.as_matrix()[(i, j)], want);
            }
        }
    }

    #[test]
    fn laplacian_edgeless_is_zero() {
        let l = Graph::simple(3, &[]).unwrap().laplacian();
        assert!(l.as_matrix().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn components_of_path_pairs_and_isolated() {
        assert_eq!(Graph::path(3).connected_components().count, 1);

        let g = Graph::simple(4, &[(0, 1), (2, 3)]).unwrap();
        let c = g.connected_components();
        assert_eq!(c.count, 2);
        assert!(c.same_component(0, 1));
        assert!(!c.same_component(1, 2));

        assert_eq!(Graph::simple(3, &[]).unwrap().connected_components().count, 3);
    }

    #[test]
    fn erdos_renyi_extremes() {
        assert_eq!(Graph::erdos_renyi(10, 0.0, 7).unwrap().edge_count(), 0);
        assert_eq!(Graph::erdos_renyi(10, 1.0, 7).unwrap().edge_count(), 45);
    }

    #[test]
    fn erdos_renyi_rejects_bad_probability() {
        assert!(Graph::erdos_renyi(5, -0.1, 0).is_err());
        assert!(Graph::erdos_renyi(5, 1.5, 0).is_err());
        assert!(Graph::erdos_renyi(5, f64::NAN, 0).is_err());
    }

    #[test]
    fn erdos_renyi_edge_count_within_three_sigma() {
        // Binomial(19900, 0.5): mean 9950, sigma = sqrt(19900 * 0.25) ~ 70.5.
        let sigma = (19900.0f64 * 0.25).sqrt();
        let lo = (9950.0 - 3.0 * sigma) as usize;
        let hi = (9950.0 + 3.0 * sigma) as usize;
        for seed in [42, 0, 1, 2, 3] {
            let m = Graph::erdos_renyi(200, 0.5, seed).unwrap().edge_count();
            assert!((lo..=hi).contains(&m), "seed {seed}: {m} outside [{lo}, {hi}]");
        }
    }

    #[test]
    fn erdos_renyi_is_deterministic() {
        for seed in 0..20 {
            let a = Graph::erdos_renyi(30, 0.3, seed).unwrap();
            let b = Graph::erdos_renyi(30, 0.3, seed).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn laplacian_rows_sum_to_zero_exactly() {
        for seed in 0..10 {
            let g = Graph::erdos_renyi(40, 0.2, seed).unwrap();
            let l = g.laplacian();
            for i in 0..40 {
                let row_sum: f64 = l.as_matrix().row(i).iter().sum();
                assert_eq!(row_sum, 0.0);
            }
        }
    }
}
