//! Weighted locally finite graphs, bounded domains and the vertex measure.
//!
//! Vertices carry nonnegative integer identifiers. Internally every vertex is
//! addressed by its position in the ascending identifier order (its *index*),
//! so all neighbor iteration is deterministic.

mod domain;
mod function;
pub mod text;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

pub use domain::{make_domain, Domain};
pub use function::VertexFunction;

/// Vertex identifier as it appears in graph files and user-facing data.
pub type VertexId = usize;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("edge list is empty")]
    EmptyEdgeList,
    #[error("conflicting weights for edge ({x},{y}): {first} vs {second}")]
    ConflictingWeight {
        x: VertexId,
        y: VertexId,
        first: f64,
        second: f64,
    },
    #[error("self loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("edge ({x},{y}) has non-positive or non-finite weight {weight}")]
    NonpositiveWeight { x: VertexId, y: VertexId, weight: f64 },
    #[error("vertex {0} has no incident edge")]
    IsolatedVertex(VertexId),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("vertices {x} and {y} are not connected")]
    Unreachable { x: VertexId, y: VertexId },
    #[error("omega is empty")]
    EmptyOmega,
    #[error("omega is not connected as an induced subgraph")]
    DisconnectedOmega,
    #[error("domain has an empty interior")]
    EmptyInterior,
    #[error("domain has an empty boundary")]
    EmptyBoundary,
    #[error("function has no value at vertex {0}")]
    MissingValue(VertexId),
    #[error("function value at vertex {vertex} is not finite ({value})")]
    NonFiniteValue { vertex: VertexId, value: f64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// An undirected graph with symmetric positive edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    ids: Vec<VertexId>,
    adjacency: Vec<Vec<(usize, f64)>>,
    measure: Vec<f64>,
}

impl WeightedGraph {
    /// Builds a graph from raw weighted edges.
    ///
    /// Each edge may be given in one or both orientations; when both are
    /// present the weights must agree exactly.
    pub fn from_edges(raw_edges: &[(VertexId, VertexId, f64)]) -> Result<Self, GraphError> {
        Self::from_parts(&[], raw_edges)
    }

    /// Like [`WeightedGraph::from_edges`], additionally declaring vertices
    /// that must be present (an declared vertex without edges is an error).
    pub fn from_parts(
        vertices: &[VertexId],
        raw_edges: &[(VertexId, VertexId, f64)],
    ) -> Result<Self, GraphError> {
        if raw_edges.is_empty() {
            return Err(GraphError::EmptyEdgeList);
        }
        let mut weights: BTreeMap<(VertexId, VertexId), f64> = BTreeMap::new();
        let mut ids: BTreeSet<VertexId> = vertices.iter().copied().collect();
        for &(x, y, w) in raw_edges {
            if x == y {
                return Err(GraphError::SelfLoop(x));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(GraphError::NonpositiveWeight { x, y, weight: w });
            }
            let key = (x.min(y), x.max(y));
            match weights.get(&key) {
                Some(&prev) if prev != w => {
                    return Err(GraphError::ConflictingWeight {
                        x,
                        y,
                        first: prev,
                        second: w,
                    })
                }
                Some(_) => {}
                None => {
                    weights.insert(key, w);
                }
            }
            ids.insert(x);
            ids.insert(y);
        }
        let ids: Vec<VertexId> = ids.into_iter().collect();
        let position = |id: VertexId| ids.binary_search(&id).expect("id collected above");
        let mut adjacency = vec![Vec::new(); ids.len()];
        for (&(x, y), &w) in &weights {
            let (ix, iy) = (position(x), position(y));
            adjacency[ix].push((iy, w));
            adjacency[iy].push((ix, w));
        }
        for (i, nbrs) in adjacency.iter_mut().enumerate() {
            if nbrs.is_empty() {
                return Err(GraphError::IsolatedVertex(ids[i]));
            }
            nbrs.sort_by_key(|&(j, _)| j);
        }
        let measure = adjacency
            .iter()
            .map(|nbrs| nbrs.iter().map(|&(_, w)| w).sum())
            .collect();
        Ok(Self {
            ids,
            adjacency,
            measure,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Vertex identifiers in ascending order.
    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn id(&self, index: usize) -> VertexId {
        self.ids[index]
    }

    pub fn index_of(&self, id: VertexId) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    pub(crate) fn require_index(&self, id: VertexId) -> Result<usize, GraphError> {
        self.index_of(id).ok_or(GraphError::UnknownVertex(id))
    }

    /// Neighbors of the vertex at `index` with their weights, ascending.
    pub fn neighbors(&self, index: usize) -> &[(usize, f64)] {
        &self.adjacency[index]
    }

    /// `w(x,y)` by identifier; zero off the edge set.
    pub fn weight(&self, x: VertexId, y: VertexId) -> Result<f64, GraphError> {
        let ix = self.require_index(x)?;
        let iy = self.require_index(y)?;
        Ok(self.weight_by_index(ix, iy))
    }

    pub fn weight_by_index(&self, ix: usize, iy: usize) -> f64 {
        self.adjacency[ix]
            .binary_search_by_key(&iy, |&(j, _)| j)
            .map(|k| self.adjacency[ix][k].1)
            .unwrap_or(0.0)
    }

    /// `m(x) = Σ_y w(x,y)`.
    pub fn vertex_measure(&self, x: VertexId) -> Result<f64, GraphError> {
        Ok(self.measure[self.require_index(x)?])
    }

    /// Measures of all vertices in index order.
    pub fn measures(&self) -> &[f64] {
        &self.measure
    }

    /// Edge-count distance via breadth-first search.
    pub fn distance(&self, x: VertexId, y: VertexId) -> Result<usize, GraphError> {
        let ix = self.require_index(x)?;
        let iy = self.require_index(y)?;
        let dist = self.bfs(ix, |_| true);
        dist[iy].ok_or(GraphError::Unreachable { x, y })
    }

    /// BFS distances from `start`, only walking through vertices accepted by `allowed`.
    pub(crate) fn bfs(&self, start: usize, allowed: impl Fn(usize) -> bool) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertex_count()];
        dist[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap_or(0);
            for &(y, _) in &self.adjacency[v] {
                if dist[y].is_none() && allowed(y) {
                    dist[y] = Some(d + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }
}

/// Validates raw edges into a graph. Same as [`WeightedGraph::from_edges`].
pub fn validate_graph(raw_edges: &[(VertexId, VertexId, f64)]) -> Result<WeightedGraph, GraphError> {
    WeightedGraph::from_edges(raw_edges)
}

/// `Σ_{x∈Ω} u(x) m(x)`.
pub fn integrate(
    graph: &WeightedGraph,
    omega: &[VertexId],
    u: &VertexFunction,
) -> Result<f64, GraphError> {
    let mut total = 0.0;
    for &x in omega {
        let m = graph.vertex_measure(x)?;
        let value = u.get(x).ok_or(GraphError::MissingValue(x))?;
        total += value * m;
    }
    Ok(total)
}
