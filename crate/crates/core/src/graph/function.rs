use std::collections::BTreeMap;

use super::{GraphError, VertexId};

/// A finite real value per vertex of some vertex set.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VertexFunction {
    values: BTreeMap<VertexId, f64>,
}

impl VertexFunction {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(
        pairs: impl IntoIterator<Item = (VertexId, f64)>,
    ) -> Result<Self, GraphError> {
        let mut f = Self::new();
        for (vertex, value) in pairs {
            f.set(vertex, value)?;
        }
        Ok(f)
    }

    pub fn constant(vertices: &[VertexId], value: f64) -> Self {
        Self {
            values: vertices.iter().map(|&v| (v, value)).collect(),
        }
    }

    pub fn set(&mut self, vertex: VertexId, value: f64) -> Result<(), GraphError> {
        if !value.is_finite() {
            return Err(GraphError::NonFiniteValue { vertex, value });
        }
        self.values.insert(vertex, value);
        Ok(())
    }

    pub fn get(&self, vertex: VertexId) -> Option<f64> {
        self.values.get(&vertex).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(vertex, value)` pairs in ascending vertex order.
    pub fn iter(&self) -> impl Iterator<Item = (VertexId, f64)> + '_ {
        self.values.iter().map(|(&k, &v)| (k, v))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.values().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

impl FromIterator<(VertexId, f64)> for VertexFunction {
    /// Panics on non-finite values; use [`VertexFunction::from_pairs`] for fallible input.
    fn from_iter<I: IntoIterator<Item = (VertexId, f64)>>(iter: I) -> Self {
        Self::from_pairs(iter).expect("finite vertex values")
    }
}
