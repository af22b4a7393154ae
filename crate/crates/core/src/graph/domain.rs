use std::sync::Arc;

use super::{GraphError, VertexFunction, VertexId, WeightedGraph};

/// A finite vertex subset `Ω` with its vertex boundary and interior.
///
/// `∂Ω` holds the vertices of `Ω` with a neighbor outside `Ω`; `Ω°` is the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    graph: Arc<WeightedGraph>,
    omega: Vec<usize>,
    in_omega: Vec<bool>,
    boundary: Vec<usize>,
    interior: Vec<usize>,
    is_boundary: Vec<bool>,
    connected: bool,
}

impl Domain {
    /// Builds the domain. A disconnected `Ω` is accepted and reported by
    /// [`Domain::is_connected`]; use [`Domain::new_connected`] to reject it.
    pub fn new(graph: Arc<WeightedGraph>, omega: &[VertexId]) -> Result<Self, GraphError> {
        if omega.is_empty() {
            return Err(GraphError::EmptyOmega);
        }
        let n = graph.vertex_count();
        let mut in_omega = vec![false; n];
        for &id in omega {
            in_omega[graph.require_index(id)?] = true;
        }
        let omega: Vec<usize> = (0..n).filter(|&i| in_omega[i]).collect();
        let mut is_boundary = vec![false; n];
        for &x in &omega {
            is_boundary[x] = graph.neighbors(x).iter().any(|&(y, _)| !in_omega[y]);
        }
        let boundary: Vec<usize> = omega.iter().copied().filter(|&x| is_boundary[x]).collect();
        let interior: Vec<usize> = omega.iter().copied().filter(|&x| !is_boundary[x]).collect();
        let reached = graph.bfs(omega[0], |y| in_omega[y]);
        let connected = omega.iter().all(|&x| reached[x].is_some());
        let domain = Self {
            graph,
            omega,
            in_omega,
            boundary,
            interior,
            is_boundary,
            connected,
        };
        debug_assert!(domain.interior_closed());
        Ok(domain)
    }

    pub fn new_connected(graph: Arc<WeightedGraph>, omega: &[VertexId]) -> Result<Self, GraphError> {
        let d = Self::new(graph, omega)?;
        if !d.connected {
            return Err(GraphError::DisconnectedOmega);
        }
        Ok(d)
    }

    /// Hypotheses shared by every solver: `Ω° ≠ ∅` and `∂Ω ≠ ∅`.
    pub fn require_solvable(&self) -> Result<(), GraphError> {
        if self.interior.is_empty() {
            return Err(GraphError::EmptyInterior);
        }
        if self.boundary.is_empty() {
            return Err(GraphError::EmptyBoundary);
        }
        Ok(())
    }

    fn interior_closed(&self) -> bool {
        self.interior
            .iter()
            .all(|&x| self.graph.neighbors(x).iter().all(|&(y, _)| self.in_omega[y]))
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn graph_arc(&self) -> &Arc<WeightedGraph> {
        &self.graph
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    /// Graph indices of `Ω`, ascending.
    pub fn omega_indices(&self) -> &[usize] {
        &self.omega
    }

    pub fn boundary_indices(&self) -> &[usize] {
        &self.boundary
    }

    pub fn interior_indices(&self) -> &[usize] {
        &self.interior
    }

    pub fn contains_index(&self, index: usize) -> bool {
        self.in_omega[index]
    }

    pub fn is_boundary_index(&self, index: usize) -> bool {
        self.is_boundary[index]
    }

    pub fn is_interior_index(&self, index: usize) -> bool {
        self.in_omega[index] && !self.is_boundary[index]
    }

    fn ids_of(&self, indices: &[usize]) -> Vec<VertexId> {
        indices.iter().map(|&i| self.graph.id(i)).collect()
    }

    pub fn omega(&self) -> Vec<VertexId> {
        self.ids_of(&self.omega)
    }

    pub fn boundary(&self) -> Vec<VertexId> {
        self.ids_of(&self.boundary)
    }

    pub fn interior(&self) -> Vec<VertexId> {
        self.ids_of(&self.interior)
    }

    pub fn measure(&self, index: usize) -> f64 {
        self.graph.measures()[index]
    }

    /// Dense field over all graph vertices: `u` on `Ω`, zero elsewhere.
    pub fn dense(&self, u: &VertexFunction) -> Result<Vec<f64>, GraphError> {
        let mut out = vec![0.0; self.graph.vertex_count()];
        for &x in &self.omega {
            let id = self.graph.id(x);
            out[x] = u.get(id).ok_or(GraphError::MissingValue(id))?;
        }
        Ok(out)
    }

    /// Like [`Domain::dense`] but only requires values on the given indices.
    pub(crate) fn dense_on(&self, u: &VertexFunction, indices: &[usize]) -> Result<Vec<f64>, GraphError> {
        let mut out = vec![0.0; self.graph.vertex_count()];
        for &x in indices {
            let id = self.graph.id(x);
            out[x] = u.get(id).ok_or(GraphError::MissingValue(id))?;
        }
        Ok(out)
    }

    /// Restriction of a dense field to `Ω`.
    pub fn function_on_omega(&self, dense: &[f64]) -> VertexFunction {
        self.omega
            .iter()
            .map(|&x| (self.graph.id(x), dense[x]))
            .collect()
    }

    /// `∫_Ω u dm` of a dense field.
    pub fn integrate_dense(&self, u: &[f64]) -> f64 {
        self.omega.iter().map(|&x| u[x] * self.measure(x)).sum()
    }

    pub fn integrate(&self, u: &VertexFunction) -> Result<f64, GraphError> {
        Ok(self.integrate_dense(&self.dense(u)?))
    }

    /// Extends `u` (given on `Ω`) by zero to every vertex of the graph.
    pub fn zero_extend(&self, u: &VertexFunction) -> Result<VertexFunction, GraphError> {
        let dense = self.dense(u)?;
        Ok(self
            .graph
            .ids()
            .iter()
            .zip(dense)
            .map(|(&id, v)| (id, v))
            .collect())
    }
}

/// Free-function form of [`Domain::new`].
pub fn make_domain(graph: Arc<WeightedGraph>, omega: &[VertexId]) -> Result<Domain, GraphError> {
    Domain::new(graph, omega)
}
