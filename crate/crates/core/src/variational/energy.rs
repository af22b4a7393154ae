//! The energy `E_λ(u) = Φ(u)^p/p − λ∫_Ω F(x,u) dm` on free coordinates.

use super::{FreeSpace, Nonlinearity, VariationalError};
use crate::calculus::OperatorContext;
use crate::graph::VertexFunction;
use crate::optim::Objective;

#[derive(Debug, Clone)]
pub struct EnergyFunctional {
    ctx: OperatorContext,
    space: FreeSpace,
    m: usize,
    p: f64,
    lambda: f64,
    nonlinearity: Nonlinearity,
}

impl EnergyFunctional {
    pub fn new(
        ctx: OperatorContext,
        m: usize,
        p: f64,
        lambda: f64,
        nonlinearity: Nonlinearity,
    ) -> Result<Self, VariationalError> {
        let space = FreeSpace::new(&ctx, m)?;
        Self::with_space(ctx, space, m, p, lambda, nonlinearity)
    }

    pub fn with_space(
        ctx: OperatorContext,
        space: FreeSpace,
        m: usize,
        p: f64,
        lambda: f64,
        nonlinearity: Nonlinearity,
    ) -> Result<Self, VariationalError> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(VariationalError::InvalidParameters(format!("p = {p} must exceed 1")));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(VariationalError::InvalidParameters(format!("lambda = {lambda} must be nonnegative")));
        }
        Ok(Self {
            ctx,
            space,
            m,
            p,
            lambda,
            nonlinearity,
        })
    }

    pub fn context(&self) -> &OperatorContext {
        &self.ctx
    }

    pub fn space(&self) -> &FreeSpace {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nonlinearity
    }

    /// `Φ(u) = ‖∇^m u‖_{L^p(Ω)}` of the function with coordinates `c`.
    pub fn phi(&self, c: &[f64]) -> f64 {
        self.ctx.sobolev0_norm_dense(&self.space.embed(c), self.m, self.p)
    }

    /// `λ∫_Ω F(x,u) dm`.
    fn psi(&self, u: &[f64]) -> Result<f64, VariationalError> {
        let d = self.ctx.domain();
        let mut total = 0.0;
        for &x in d.omega_indices() {
            if u[x] != 0.0 {
                total += d.measure(x) * self.nonlinearity.primitive(x, u[x])?;
            }
        }
        Ok(self.lambda * total)
    }

    pub fn value_dense(&self, u: &[f64]) -> Result<f64, VariationalError> {
        Ok(self.ctx.energy_power_dense(u, self.m, self.p) / self.p - self.psi(u)?)
    }

    /// Per-vertex gradient `∂E/∂u(z)` before restriction to the space.
    pub fn gradient_dense(&self, u: &[f64]) -> Result<Vec<f64>, VariationalError> {
        let d = self.ctx.domain();
        let mut g = self.ctx.mp_gradient_dense(u, self.m, self.p);
        if self.lambda != 0.0 {
            for &x in d.omega_indices() {
                g[x] -= self.lambda * d.measure(x) * self.nonlinearity.eval(x, u[x])?;
            }
        }
        Ok(g)
    }

    pub fn value_coords(&self, c: &[f64]) -> Result<f64, VariationalError> {
        self.value_dense(&self.space.embed(c))
    }

    /// `(E'(u)[φ_j])_j`.
    pub fn gradient_coords(&self, c: &[f64]) -> Result<Vec<f64>, VariationalError> {
        Ok(self.space.pull_back(&self.gradient_dense(&self.space.embed(c))?))
    }

    /// Euler–Lagrange residual `max_j |E'(u)[φ_j]| / ‖φ_j‖_{L¹(Ω)}`. For
    /// indicator coordinates this is `max_x |L_{m,p}u(x) − λf(x,u(x))|`.
    pub fn euler_lagrange_residual(&self, c: &[f64]) -> Result<f64, VariationalError> {
        let g = self.gradient_coords(c)?;
        let d = self.ctx.domain();
        Ok(g.iter()
            .enumerate()
            .map(|(j, gj)| {
                let phi = self.space.basis_vector(j);
                let l1: f64 = d.omega_indices().iter().map(|&x| phi[x].abs() * d.measure(x)).sum();
                gj.abs() / l1
            })
            .fold(0.0, f64::max))
    }

    fn dense_of(&self, u: &VertexFunction) -> Result<(Vec<f64>, Vec<f64>), VariationalError> {
        let dense = self.ctx.field(u)?;
        let c = self.space.coordinates_of(&dense)?;
        Ok((dense, c))
    }

    /// `E_λ(u)` for `u` given on `Ω`.
    pub fn energy_value(&self, u: &VertexFunction) -> Result<f64, VariationalError> {
        let (dense, _) = self.dense_of(u)?;
        self.value_dense(&dense)
    }

    /// The gradient represented as a function on `Ω`: `Σ_j E'(u)[φ_j] φ_j`.
    /// With indicator coordinates its value at a free vertex `x` is
    /// `m(x)(L_{m,p}u(x) − λf(x,u(x)))` and it vanishes at the other vertices.
    pub fn energy_gradient(&self, u: &VertexFunction) -> Result<VertexFunction, VariationalError> {
        let (_, c) = self.dense_of(u)?;
        let g = self.gradient_coords(&c)?;
        Ok(self.ctx.domain().function_on_omega(&self.space.embed(&g)))
    }
}

/// `E_λ` restricted to the ball `{Φ ≤ ρ}`, projected radially.
pub(crate) struct BallObjective<'a> {
    pub ef: &'a EnergyFunctional,
    pub rho: f64,
}

impl Objective for BallObjective<'_> {
    type Error = VariationalError;

    fn value(&self, x: &[f64]) -> Result<f64, VariationalError> {
        self.ef.value_coords(x)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>, VariationalError> {
        self.ef.gradient_coords(x)
    }

    fn project(&self, x: &mut [f64]) {
        let phi = self.ef.phi(x);
        if phi > self.rho {
            let s = self.rho / phi;
            x.iter_mut().for_each(|v| *v *= s);
        }
    }
}
