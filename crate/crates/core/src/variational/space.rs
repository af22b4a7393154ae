//! Finite-dimensional coordinates for `W^{m,p}_0(Ω)`.
//!
//! A function in the space vanishes off `Ω` and satisfies `|∇^k u| = 0` on
//! `∂Ω` for every `k < m`. Each of these conditions is linear: an even order
//! `k = 2j` asks `Δ^j u(b) = 0`, an odd order `k = 2j+1` asks
//! `Δ^j u(y) = Δ^j u(b)` for every neighbor `y` of `b`. The space is the null
//! space of the stacked conditions. When that null space is spanned by vertex
//! indicators (always the case for `m = 1`) plain coordinates are used;
//! otherwise an orthonormal basis from an SVD.

use nalgebra::DMatrix;

use super::VariationalError;
use crate::calculus::OperatorContext;

#[derive(Debug, Clone, PartialEq)]
enum Basis {
    /// Free vertex indices; the coordinate is the value there.
    Coordinates(Vec<usize>),
    /// Basis vectors as dense fields over all graph vertices.
    Dense(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeSpace {
    n: usize,
    basis: Basis,
}

impl FreeSpace {
    /// Coordinates on the given vertex indices.
    pub fn coordinates(n: usize, free: Vec<usize>) -> Self {
        Self {
            n,
            basis: Basis::Coordinates(free),
        }
    }

    /// The space `W^{m,p}_0(Ω)` seen through `ctx`.
    pub fn new(ctx: &OperatorContext, m: usize) -> Result<Self, VariationalError> {
        if m == 0 {
            return Err(VariationalError::InvalidParameters("order m must be at least 1".into()));
        }
        let d = ctx.domain();
        d.require_solvable()?;
        let n = d.graph().vertex_count();
        let omega = d.omega_indices();
        let matrix = constraint_matrix(ctx, m);
        let rows = matrix.len();
        let cols = omega.len();
        let scale = matrix.iter().flatten().fold(0.0_f64, |a, v| a.max(v.abs()));
        let zero_column = |c: usize| matrix.iter().all(|row| row[c].abs() <= 1e-13 * scale.max(1.0));
        let coordinate_free: Vec<usize> = (0..cols).filter(|&c| zero_column(c)).collect();

        let padded = rows.max(cols);
        let a = DMatrix::from_fn(padded, cols, |r, c| if r < rows { matrix[r][c] } else { 0.0 });
        let svd = a.svd(false, true);
        let v_t = svd.v_t.expect("requested V^T");
        let sigma_max = svd.singular_values.iter().fold(0.0_f64, |m, &s| m.max(s));
        let threshold = 1e-12 * sigma_max.max(1.0);
        let null: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] <= threshold)
            .collect();

        if null.is_empty() {
            return Err(VariationalError::DegenerateDomain);
        }
        let basis = if coordinate_free.len() == null.len() {
            Basis::Coordinates(coordinate_free.iter().map(|&c| omega[c]).collect())
        } else {
            Basis::Dense(
                null.iter()
                    .map(|&i| {
                        let mut field = vec![0.0; n];
                        for (c, &x) in omega.iter().enumerate() {
                            field[x] = v_t[(i, c)];
                        }
                        field
                    })
                    .collect(),
            )
        };
        Ok(Self { n, basis })
    }

    pub fn dim(&self) -> usize {
        match &self.basis {
            Basis::Coordinates(free) => free.len(),
            Basis::Dense(vectors) => vectors.len(),
        }
    }

    pub fn is_coordinate(&self) -> bool {
        matches!(self.basis, Basis::Coordinates(_))
    }

    /// Free vertex indices when the basis is made of indicators.
    pub fn free_indices(&self) -> Option<&[usize]> {
        match &self.basis {
            Basis::Coordinates(free) => Some(free),
            Basis::Dense(_) => None,
        }
    }

    /// Basis vector `j` as a dense field.
    pub fn basis_vector(&self, j: usize) -> Vec<f64> {
        match &self.basis {
            Basis::Coordinates(free) => {
                let mut e = vec![0.0; self.n];
                e[free[j]] = 1.0;
                e
            }
            Basis::Dense(vectors) => vectors[j].clone(),
        }
    }

    /// Adds `Σ_j c_j φ_j` to `base`.
    pub fn embed_into(&self, c: &[f64], base: &mut [f64]) {
        match &self.basis {
            Basis::Coordinates(free) => {
                for (&x, &v) in free.iter().zip(c) {
                    base[x] += v;
                }
            }
            Basis::Dense(vectors) => {
                for (phi, &v) in vectors.iter().zip(c) {
                    if v != 0.0 {
                        for (b, p) in base.iter_mut().zip(phi) {
                            *b += v * p;
                        }
                    }
                }
            }
        }
    }

    /// `Σ_j c_j φ_j` as a dense field.
    pub fn embed(&self, c: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.embed_into(c, &mut out);
        out
    }

    /// `(⟨φ_j, g⟩)_j`: the chain rule for a gradient given per vertex.
    pub fn pull_back(&self, g: &[f64]) -> Vec<f64> {
        match &self.basis {
            Basis::Coordinates(free) => free.iter().map(|&x| g[x]).collect(),
            Basis::Dense(vectors) => vectors
                .iter()
                .map(|phi| phi.iter().zip(g).map(|(a, b)| a * b).sum())
                .collect(),
        }
    }

    /// Coordinates of a dense field, or `ConstraintViolation` if it is not in
    /// the space (tolerance `1e-10·(1 + ‖u‖_∞)`).
    pub fn coordinates_of(&self, u: &[f64]) -> Result<Vec<f64>, VariationalError> {
        let c = self.pull_back(u);
        let back = self.embed(&c);
        let scale = 1.0 + u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let gap = back
            .iter()
            .zip(u)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        if gap > 1e-10 * scale {
            return Err(VariationalError::ConstraintViolation(gap));
        }
        Ok(c)
    }
}

/// Rows are the linear boundary conditions, columns the vertices of `Ω`.
fn constraint_matrix(ctx: &OperatorContext, m: usize) -> Vec<Vec<f64>> {
    let d = ctx.domain();
    let g = d.graph();
    let n = g.vertex_count();
    let omega = d.omega_indices();
    let boundary = d.boundary_indices();
    // Columns first: iterated Laplacians of each indicator.
    let columns: Vec<Vec<f64>> = omega
        .iter()
        .map(|&z| {
            let mut e = vec![0.0; n];
            e[z] = 1.0;
            let mut col = Vec::new();
            let mut lifted = e;
            for k in 0..m {
                if k > 0 && k % 2 == 0 {
                    lifted = ctx.laplacian_field(&lifted);
                }
                for &b in boundary {
                    if k % 2 == 0 {
                        col.push(lifted[b]);
                    } else {
                        for &(y, _) in g.neighbors(b) {
                            if ctx.active(y) {
                                col.push(lifted[y] - lifted[b]);
                            }
                        }
                    }
                }
            }
            col
        })
        .collect();
    let rows = columns.first().map_or(0, Vec::len);
    (0..rows)
        .map(|r| columns.iter().map(|col| col[r]).collect())
        .collect()
}

/// `max_{b∈∂Ω, k<m} |∇^k u|(b)`.
pub fn boundary_defect(ctx: &OperatorContext, u: &[f64], m: usize) -> f64 {
    let boundary = ctx.domain().boundary_indices();
    (0..m)
        .flat_map(|k| {
            let s = ctx.m_slope_field(u, k);
            boundary.iter().map(move |&b| s[b]).collect::<Vec<_>>()
        })
        .fold(0.0_f64, f64::max)
}
