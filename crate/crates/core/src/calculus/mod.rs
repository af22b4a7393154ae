//! Discrete differential operators on a bounded domain.
//!
//! All kernels work on dense fields indexed by graph vertex index. Which
//! neighbors a sum sees is fixed by the [`ExtensionMode`] of the
//! [`OperatorContext`]:
//!
//! * `ZeroExtend`: sums run over all of `V`; the input field vanishes off `Ω`
//!   and iterated Laplacians are evaluated on all of `V`.
//! * `RestrictToOmega`: sums run over neighbors inside `Ω` only, while the
//!   measure `m(x)` stays the global one.
//!
//! The p-Laplacian carries the factor `1/(2m(x))`, so that `Δ_2 = Δ` and
//! `L_{1,p} = -Δ_p` hold exactly.

pub mod exact;

use thiserror::Error;

use crate::graph::{Domain, GraphError, VertexFunction, VertexId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalculusError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("vertex {0} is not in omega")]
    OutsideDomain(VertexId),
    #[error("vertex {0} is not an interior vertex")]
    InteriorOnly(VertexId),
    #[error("invalid exponent {0}")]
    InvalidExponent(f64),
    #[error("derivative order must be at least 1")]
    InvalidOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtensionMode {
    /// Functions in `W^{m,p}_0(Ω)`, extended by zero to all of `V`.
    ZeroExtend,
    /// Functions in `W^{1,p}(Ω)` carrying boundary data; sums stay in `Ω`.
    RestrictToOmega,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorContext {
    domain: Domain,
    mode: ExtensionMode,
}

/// `s^{p-2}` with the convention `0^{p-2} = 0` (and exactly `1` for `p = 2`).
#[inline]
pub fn p_weight(s: f64, p: f64) -> f64 {
    if p == 2.0 {
        1.0
    } else if s == 0.0 {
        0.0
    } else {
        s.powf(p - 2.0)
    }
}

/// Value of `L_{m,p}u(x)` obtained by pairing against the indicator of `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpLaplacianValue {
    pub value: f64,
    /// Whether the indicator of `x` satisfies the `C^m_0` boundary conditions.
    /// When false the value is the pairing against the raw indicator.
    pub indicator_admissible: bool,
}

impl OperatorContext {
    pub fn new(domain: Domain, mode: ExtensionMode) -> Self {
        Self { domain, mode }
    }

    pub fn zero_extend(domain: Domain) -> Self {
        Self::new(domain, ExtensionMode::ZeroExtend)
    }

    pub fn restrict(domain: Domain) -> Self {
        Self::new(domain, ExtensionMode::RestrictToOmega)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn mode(&self) -> ExtensionMode {
        self.mode
    }

    fn n(&self) -> usize {
        self.domain.graph().vertex_count()
    }

    /// Vertices on which fields live: all of `V`, or `Ω` when restricted.
    #[inline]
    pub(crate) fn active(&self, y: usize) -> bool {
        match self.mode {
            ExtensionMode::ZeroExtend => true,
            ExtensionMode::RestrictToOmega => self.domain.contains_index(y),
        }
    }

    fn omega_index(&self, x: VertexId) -> Result<usize, CalculusError> {
        let i = self.domain.graph().require_index(x)?;
        if !self.domain.contains_index(i) {
            return Err(CalculusError::OutsideDomain(x));
        }
        Ok(i)
    }

    fn interior_index(&self, x: VertexId) -> Result<usize, CalculusError> {
        let i = self.omega_index(x)?;
        if !self.domain.is_interior_index(i) {
            return Err(CalculusError::InteriorOnly(x));
        }
        Ok(i)
    }

    /// Dense field from a vertex function, zero off `Ω`.
    pub fn field(&self, u: &VertexFunction) -> Result<Vec<f64>, CalculusError> {
        Ok(self.domain.dense(u)?)
    }

    // ----- dense kernels -------------------------------------------------

    /// `Δu(x)` for a dense field.
    pub fn laplacian_at(&self, u: &[f64], x: usize) -> f64 {
        let g = self.domain.graph();
        let sum: f64 = g
            .neighbors(x)
            .iter()
            .filter(|&&(y, _)| self.active(y))
            .map(|&(y, w)| w * (u[y] - u[x]))
            .sum();
        sum / self.domain.measure(x)
    }

    /// `Δu` on every active vertex; zero elsewhere.
    pub fn laplacian_field(&self, u: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|x| if self.active(x) { self.laplacian_at(u, x) } else { 0.0 })
            .collect()
    }

    /// `Δ^k u`.
    pub fn iterated_laplacian(&self, u: &[f64], k: usize) -> Vec<f64> {
        let mut cur = u.to_vec();
        for _ in 0..k {
            cur = self.laplacian_field(&cur);
        }
        cur
    }

    /// Applies the transpose of the (active-set) Laplacian matrix.
    fn laplacian_transpose(&self, r: &[f64]) -> Vec<f64> {
        let g = self.domain.graph();
        let mut out = vec![0.0; self.n()];
        for v in 0..self.n() {
            if !self.active(v) || r[v] == 0.0 {
                continue;
            }
            let scaled = r[v] / self.domain.measure(v);
            for &(y, w) in g.neighbors(v) {
                if self.active(y) {
                    out[y] += w * scaled;
                    out[v] -= w * scaled;
                }
            }
        }
        out
    }

    /// `Γ(u,v)(x)`.
    pub fn gradient_form_at(&self, u: &[f64], v: &[f64], x: usize) -> f64 {
        let g = self.domain.graph();
        let sum: f64 = g
            .neighbors(x)
            .iter()
            .filter(|&&(y, _)| self.active(y))
            .map(|&(y, w)| w * (u[y] - u[x]) * (v[y] - v[x]))
            .sum();
        sum / (2.0 * self.domain.measure(x))
    }

    /// `|∇u|(x)`.
    pub fn slope_at(&self, u: &[f64], x: usize) -> f64 {
        self.gradient_form_at(u, u, x).max(0.0).sqrt()
    }

    /// `|∇^m u|` at every vertex of `Ω` (zero elsewhere). `m = 0` gives `|u|`.
    pub fn m_slope_field(&self, u: &[f64], m: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        let lifted = self.iterated_laplacian(u, m / 2);
        for &x in self.domain.omega_indices() {
            out[x] = if m % 2 == 1 {
                self.slope_at(&lifted, x)
            } else {
                lifted[x].abs()
            };
        }
        out
    }

    /// `Δ_p u(x) = (1/(2m(x))) Σ_{y} (|∇u|^{p-2}(y) + |∇u|^{p-2}(x)) w(x,y)(u(y)-u(x))`.
    pub fn p_laplacian_at(&self, u: &[f64], p: f64, x: usize) -> f64 {
        let g = self.domain.graph();
        let sx = p_weight(self.slope_at(u, x), p);
        let sum: f64 = g
            .neighbors(x)
            .iter()
            .filter(|&&(y, _)| self.active(y) && self.domain.contains_index(y))
            .map(|&(y, w)| (p_weight(self.slope_at(u, y), p) + sx) * w * (u[y] - u[x]))
            .sum();
        sum / (2.0 * self.domain.measure(x))
    }

    /// Right-hand side of the distributional definition of `L_{m,p}`:
    /// `∫_Ω |∇^m u|^{p-2} Γ(Δ^k u, Δ^k φ) dm` (m odd) or
    /// `∫_Ω |∇^m u|^{p-2} Δ^k u Δ^k φ dm` (m even).
    pub fn mp_bilinear_dense(&self, u: &[f64], phi: &[f64], m: usize, p: f64) -> f64 {
        let k = m / 2;
        let lu = self.iterated_laplacian(u, k);
        let lphi = self.iterated_laplacian(phi, k);
        self.domain
            .omega_indices()
            .iter()
            .map(|&x| {
                let mx = self.domain.measure(x);
                if m % 2 == 1 {
                    let s = self.slope_at(&lu, x);
                    mx * p_weight(s, p) * self.gradient_form_at(&lu, &lphi, x)
                } else {
                    mx * p_weight(lu[x].abs(), p) * lu[x] * lphi[x]
                }
            })
            .sum()
    }

    /// All pairings `mp_bilinear(u, e_z)` at once, via the adjoint of `Δ^k`.
    ///
    /// Entry `z` of the result is the partial derivative of
    /// `(1/p) ∫_Ω |∇^m u|^p dm` with respect to `u(z)`.
    pub fn mp_gradient_dense(&self, u: &[f64], m: usize, p: f64) -> Vec<f64> {
        let g = self.domain.graph();
        let k = m / 2;
        let lu = self.iterated_laplacian(u, k);
        let mut r = vec![0.0; self.n()];
        for &x in self.domain.omega_indices() {
            if m % 2 == 1 {
                let c = 0.5 * p_weight(self.slope_at(&lu, x), p);
                if c == 0.0 {
                    continue;
                }
                for &(y, w) in g.neighbors(x) {
                    if self.active(y) {
                        let d = c * w * (lu[y] - lu[x]);
                        r[y] += d;
                        r[x] -= d;
                    }
                }
            } else {
                r[x] += self.domain.measure(x) * p_weight(lu[x].abs(), p) * lu[x];
            }
        }
        for _ in 0..k {
            r = self.laplacian_transpose(&r);
        }
        r
    }

    /// `(Σ_{x∈Ω} |u(x)|^p m(x))^{1/p}`, or the max over `Ω` for `p = ∞`.
    pub fn lp_norm_dense(&self, u: &[f64], p: f64) -> f64 {
        lp_norm_on(&self.domain, u, p)
    }

    /// `‖∇^m u‖_{L^p(Ω)}`.
    pub fn sobolev0_norm_dense(&self, u: &[f64], m: usize, p: f64) -> f64 {
        self.lp_norm_dense(&self.m_slope_field(u, m), p)
    }

    /// `Σ_{k=0}^m ‖∇^k u‖_{L^p(Ω)}`.
    pub fn sobolev_norm_dense(&self, u: &[f64], m: usize, p: f64) -> f64 {
        (0..=m).map(|k| self.sobolev0_norm_dense(u, k, p)).sum()
    }

    /// `Σ_{x∈Ω} m(x) |∇^m u|^p(x)`, i.e. `Φ(u)^p`.
    pub fn energy_power_dense(&self, u: &[f64], m: usize, p: f64) -> f64 {
        let s = self.m_slope_field(u, m);
        self.domain
            .omega_indices()
            .iter()
            .map(|&x| self.domain.measure(x) * s[x].powf(p))
            .sum()
    }

    /// Whether the indicator of `x` satisfies `|∇^k e_x| = 0` on `∂Ω` for `k < m`.
    pub fn indicator_admissible(&self, x: usize, m: usize) -> bool {
        let mut e = vec![0.0; self.n()];
        e[x] = 1.0;
        (0..m).all(|k| {
            let s = self.m_slope_field(&e, k);
            self.domain
                .boundary_indices()
                .iter()
                .all(|&b| s[b].abs() <= 1e-13)
        })
    }

    // ----- vertex-function API ------------------------------------------

    pub fn laplacian(&self, u: &VertexFunction, x: VertexId) -> Result<f64, CalculusError> {
        let i = self.omega_index(x)?;
        Ok(self.laplacian_at(&self.field(u)?, i))
    }

    pub fn gradient_form(
        &self,
        u: &VertexFunction,
        v: &VertexFunction,
        x: VertexId,
    ) -> Result<f64, CalculusError> {
        let i = self.omega_index(x)?;
        Ok(self.gradient_form_at(&self.field(u)?, &self.field(v)?, i))
    }

    pub fn slope(&self, u: &VertexFunction, x: VertexId) -> Result<f64, CalculusError> {
        let i = self.omega_index(x)?;
        Ok(self.slope_at(&self.field(u)?, i))
    }

    pub fn m_slope(&self, u: &VertexFunction, m: usize, x: VertexId) -> Result<f64, CalculusError> {
        if m == 0 {
            return Err(CalculusError::InvalidOrder);
        }
        let i = self.omega_index(x)?;
        Ok(self.m_slope_field(&self.field(u)?, m)[i])
    }

    pub fn p_laplacian(&self, u: &VertexFunction, p: f64, x: VertexId) -> Result<f64, CalculusError> {
        check_exponent(p)?;
        let i = self.interior_index(x)?;
        Ok(self.p_laplacian_at(&self.field(u)?, p, i))
    }

    pub fn mp_bilinear(
        &self,
        u: &VertexFunction,
        phi: &VertexFunction,
        m: usize,
        p: f64,
    ) -> Result<f64, CalculusError> {
        check_order_exponent(m, p)?;
        Ok(self.mp_bilinear_dense(&self.field(u)?, &self.field(phi)?, m, p))
    }

    /// `L_{m,p}u(x)` by duality: `mp_bilinear(u, e_x) / m(x)`.
    pub fn mp_laplacian(
        &self,
        u: &VertexFunction,
        m: usize,
        p: f64,
        x: VertexId,
    ) -> Result<MpLaplacianValue, CalculusError> {
        check_order_exponent(m, p)?;
        let i = self.interior_index(x)?;
        Ok(self.mp_laplacian_at(&self.field(u)?, m, p, i))
    }

    pub fn mp_laplacian_at(&self, u: &[f64], m: usize, p: f64, x: usize) -> MpLaplacianValue {
        let mut e = vec![0.0; self.n()];
        e[x] = 1.0;
        MpLaplacianValue {
            value: self.mp_bilinear_dense(u, &e, m, p) / self.domain.measure(x),
            indicator_admissible: m == 1 || self.indicator_admissible(x, m),
        }
    }

    pub fn sobolev_norm(&self, u: &VertexFunction, m: usize, p: f64) -> Result<f64, CalculusError> {
        check_norm_exponent(p)?;
        Ok(self.sobolev_norm_dense(&self.field(u)?, m, p))
    }

    pub fn sobolev0_norm(&self, u: &VertexFunction, m: usize, p: f64) -> Result<f64, CalculusError> {
        check_norm_exponent(p)?;
        Ok(self.sobolev0_norm_dense(&self.field(u)?, m, p))
    }
}

fn check_exponent(p: f64) -> Result<(), CalculusError> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(CalculusError::InvalidExponent(p))
    }
}

fn check_norm_exponent(p: f64) -> Result<(), CalculusError> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(CalculusError::InvalidExponent(p))
    }
}

fn check_order_exponent(m: usize, p: f64) -> Result<(), CalculusError> {
    if m == 0 {
        return Err(CalculusError::InvalidOrder);
    }
    check_exponent(p)
}

pub(crate) fn lp_norm_on(domain: &Domain, u: &[f64], p: f64) -> f64 {
    let omega = domain.omega_indices();
    if p.is_infinite() {
        return omega.iter().fold(0.0, |acc, &x| acc.max(u[x].abs()));
    }
    let sum: f64 = omega
        .iter()
        .map(|&x| u[x].abs().powf(p) * domain.measure(x))
        .sum();
    sum.powf(1.0 / p)
}

/// `‖u‖_{L^p(Ω)}` for `p ∈ [1, ∞]` (pass `f64::INFINITY` for the sup norm).
pub fn lp_norm(domain: &Domain, u: &VertexFunction, p: f64) -> Result<f64, CalculusError> {
    check_norm_exponent(p)?;
    Ok(lp_norm_on(domain, &domain.dense(u)?, p))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use approx::assert_relative_eq;

    use super::*;
    use crate::graph::WeightedGraph;

    fn path(n: usize) -> Arc<WeightedGraph> {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        Arc::new(WeightedGraph::from_edges(&edges).unwrap())
    }

    fn vf(pairs: &[(usize, f64)]) -> VertexFunction {
        VertexFunction::from_pairs(pairs.iter().copied()).unwrap()
    }

    fn full_ctx(n: usize) -> OperatorContext {
        let omega: Vec<_> = (0..n).collect();
        OperatorContext::zero_extend(Domain::new(path(n), &omega).unwrap())
    }

    fn three_path_ctx() -> OperatorContext {
        OperatorContext::zero_extend(Domain::new(path(3), &[0, 1]).unwrap())
    }

    #[test]
    fn laplacian_on_quadratic() {
        let ctx = full_ctx(4);
        let u = vf(&[(0, 0.0), (1, 1.0), (2, 4.0), (3, 9.0)]);
        assert_eq!(ctx.laplacian(&u, 1).unwrap(), 1.0);
        assert_eq!(ctx.laplacian(&u, 0).unwrap(), 1.0);
        let c = vf(&[(0, 3.0), (1, 3.0), (2, 3.0), (3, 3.0)]);
        for x in 0..4 {
            assert_eq!(ctx.laplacian(&c, x).unwrap(), 0.0);
        }
    }

    #[test]
    fn gradient_form_and_slope() {
        let ctx = full_ctx(3);
        let u = vf(&[(0, 0.0), (1, 1.0), (2, 4.0)]);
        assert_eq!(ctx.gradient_form(&u, &u, 1).unwrap(), 2.5);
        assert_relative_eq!(ctx.slope(&u, 1).unwrap(), 2.5f64.sqrt(), max_relative = 1e-15);
        let c = vf(&[(0, 2.0), (1, 2.0), (2, 2.0)]);
        assert_eq!(ctx.gradient_form(&u, &c, 1).unwrap(), 0.0);
        assert_eq!(ctx.slope(&c, 0).unwrap(), 0.0);
    }

    #[test]
    fn slope_sees_zero_extended_neighbor() {
        let ctx = three_path_ctx();
        let u = vf(&[(0, 1.0), (1, 0.0)]);
        assert_relative_eq!(ctx.slope(&u, 0).unwrap(), 0.5f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(ctx.slope(&u, 1).unwrap(), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn m_slope_cases() {
        let ctx = full_ctx(4);
        let u = vf(&[(0, 0.0), (1, 1.0), (2, 4.0), (3, 9.0)]);
        assert_eq!(ctx.m_slope(&u, 2, 1).unwrap(), 1.0);
        assert_eq!(ctx.m_slope(&u, 1, 2).unwrap(), ctx.slope(&u, 2).unwrap());
        let c = vf(&[(0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0)]);
        for m in 1..5 {
            assert_eq!(ctx.m_slope(&c, m, 1).unwrap(), 0.0);
        }
        assert_eq!(ctx.m_slope(&u, 0, 1), Err(CalculusError::InvalidOrder));
    }

    #[test]
    fn p_laplacian_hand_value() {
        let ctx = three_path_ctx();
        let u = vf(&[(0, 1.0), (1, 0.0)]);
        let expected = -(0.25 + 1.0 / (2.0 * 2f64.sqrt()));
        assert_relative_eq!(ctx.p_laplacian(&u, 3.0, 0).unwrap(), expected, max_relative = 1e-15);
        assert_relative_eq!(expected, -0.6035534, epsilon = 1e-7);
        assert_eq!(ctx.p_laplacian(&u, 3.0, 1), Err(CalculusError::InteriorOnly(1)));
        let c = vf(&[(0, 0.0), (1, 0.0)]);
        assert_eq!(ctx.p_laplacian(&c, 3.0, 0).unwrap(), 0.0);
    }

    #[test]
    fn mp_bilinear_hand_value() {
        let ctx = three_path_ctx();
        let u = vf(&[(0, 1.0), (1, 0.0)]);
        assert_relative_eq!(ctx.mp_bilinear(&u, &u, 1, 2.0).unwrap(), 1.0, max_relative = 1e-15);
        let zero = vf(&[(0, 0.0), (1, 0.0)]);
        assert_eq!(ctx.mp_bilinear(&u, &zero, 1, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn mp_laplacian_of_zero() {
        let ctx = OperatorContext::zero_extend(Domain::new(path(8), &[0, 1, 2, 3, 4, 5]).unwrap());
        let zero = VertexFunction::constant(&[0, 1, 2, 3, 4, 5], 0.0);
        for m in 1..4 {
            assert_eq!(ctx.mp_laplacian(&zero, m, 3.0, 1).unwrap().value, 0.0);
        }
    }

    #[test]
    fn indicator_admissibility_depends_on_distance_to_boundary() {
        // Ω = {0..5} on a path of 8 vertices: ∂Ω = {5}.
        let ctx = OperatorContext::zero_extend(Domain::new(path(8), &[0, 1, 2, 3, 4, 5]).unwrap());
        assert!(ctx.indicator_admissible(4, 1));
        assert!(!ctx.indicator_admissible(4, 2));
        assert!(ctx.indicator_admissible(3, 2));
        assert!(ctx.indicator_admissible(0, 3));
    }

    #[test]
    fn norms() {
        let d = Domain::new(path(3), &[0, 1]).unwrap();
        let ones = vf(&[(0, 1.0), (1, 1.0)]);
        assert_eq!(lp_norm(&d, &ones, 1.0).unwrap(), 3.0);
        let u = vf(&[(0, 2.0), (1, -5.0)]);
        assert_eq!(lp_norm(&d, &u, f64::INFINITY).unwrap(), 5.0);
        let ctx = OperatorContext::zero_extend(d);
        for t in [0.0, 0.5, -3.0] {
            let u = vf(&[(0, t), (1, 0.0)]);
            assert_relative_eq!(ctx.sobolev0_norm(&u, 1, 2.0).unwrap(), f64::abs(t), max_relative = 1e-15);
            assert!(ctx.sobolev_norm(&u, 1, 2.0).unwrap() >= ctx.sobolev0_norm(&u, 1, 2.0).unwrap());
        }
    }

    #[test]
    fn restricted_mode_ignores_exterior_neighbors() {
        let ctx = OperatorContext::restrict(Domain::new(path(3), &[0, 1]).unwrap());
        let u = vf(&[(0, 1.0), (1, 0.0)]);
        // At vertex 1 only neighbor 0 counts: Γ = (1/4)·1.
        assert_eq!(ctx.gradient_form(&u, &u, 1).unwrap(), 0.25);
        assert_eq!(ctx.laplacian(&u, 1).unwrap(), 0.5);
    }
}
