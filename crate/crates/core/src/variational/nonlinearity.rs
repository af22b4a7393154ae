//! Vertex-dependent nonlinearities `f(x, t)` and their primitives in `t`.

use std::collections::BTreeMap;

use super::VariationalError;
use crate::expr::{BoundExpr, Expr, ExprError};
use crate::graph::{Domain, VertexFunction};

/// Growth bound `|f(x,t)| ≤ a(x) + b(x)|t|^q`, dense over graph indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Growth {
    pub q: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    /// `a(x) + b(x)·sgn(t)|t|^q`.
    Power { a: Vec<f64>, b: Vec<f64>, q: f64 },
    /// `α(x)·e^{β(x)t}`.
    Exponential { alpha: Vec<f64>, beta: Vec<f64> },
    /// A parsed expression; `slots[x]` holds the bound values at vertex index `x`.
    Expression { expr: BoundExpr, slots: Vec<Vec<f64>> },
}

/// A Carathéodory function on a domain. Vertex arguments are graph indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    kind: Kind,
    growth: Option<Growth>,
}

fn dense(domain: &Domain, u: &VertexFunction) -> Result<Vec<f64>, VariationalError> {
    Ok(domain.dense(u)?)
}

fn sgn(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else if t < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn powsgn(t: f64, q: f64) -> f64 {
    sgn(t) * t.abs().powf(q)
}

impl Nonlinearity {
    /// `f ≡ 0`.
    pub fn zero(domain: &Domain) -> Self {
        let n = domain.graph().vertex_count();
        Self {
            kind: Kind::Power {
                a: vec![0.0; n],
                b: vec![0.0; n],
                q: 1.0,
            },
            growth: Some(Growth {
                q: 1.0,
                a: vec![0.0; n],
                b: vec![0.0; n],
            }),
        }
    }

    /// `f(x,t) = a(x) − b(x)·sgn(t)|t|^q`, with growth data `(q, |a|, |b|)`.
    pub fn yamabe(
        domain: &Domain,
        a: &VertexFunction,
        b: &VertexFunction,
        q: f64,
    ) -> Result<Self, VariationalError> {
        let a = dense(domain, a)?;
        let b = dense(domain, b)?;
        Ok(Self {
            growth: Some(Growth {
                q,
                a: a.iter().map(|v| v.abs()).collect(),
                b: b.iter().map(|v| v.abs()).collect(),
            }),
            kind: Kind::Power {
                a,
                b: b.iter().map(|v| -v).collect(),
                q,
            },
        })
    }

    /// `f(x,t) = a(x) + b(x)·sgn(t)|t|^q`, with growth data `(q, |a|, |b|)`.
    pub fn power(
        domain: &Domain,
        a: &VertexFunction,
        b: &VertexFunction,
        q: f64,
    ) -> Result<Self, VariationalError> {
        let a = dense(domain, a)?;
        let b = dense(domain, b)?;
        Ok(Self {
            growth: Some(Growth {
                q,
                a: a.iter().map(|v| v.abs()).collect(),
                b: b.iter().map(|v| v.abs()).collect(),
            }),
            kind: Kind::Power { a, b, q },
        })
    }

    /// `f(x,t) = α(x)·e^{β(x)t}`.
    pub fn exponential(
        domain: &Domain,
        alpha: &VertexFunction,
        beta: &VertexFunction,
    ) -> Result<Self, VariationalError> {
        Ok(Self {
            kind: Kind::Exponential {
                alpha: dense(domain, alpha)?,
                beta: dense(domain, beta)?,
            },
            growth: None,
        })
    }

    /// Binds an expression's identifiers to per-vertex coefficients or scalars.
    /// Coefficients take precedence over scalars of the same name.
    pub fn expression(
        domain: &Domain,
        expr: &Expr,
        coefficients: &BTreeMap<String, VertexFunction>,
        scalars: &BTreeMap<String, f64>,
    ) -> Result<Self, VariationalError> {
        let names = expr.identifiers();
        let bound = expr.bind(&names)?;
        let n = domain.graph().vertex_count();
        let mut slots = vec![vec![0.0; names.len()]; n];
        for (k, name) in names.iter().enumerate() {
            if let Some(coef) = coefficients.get(name) {
                let values = dense(domain, coef)?;
                for (x, row) in slots.iter_mut().enumerate() {
                    row[k] = values[x];
                }
            } else if let Some(&value) = scalars.get(name) {
                for row in slots.iter_mut() {
                    row[k] = value;
                }
            } else {
                return Err(ExprError::UnknownIdentifier {
                    name: name.clone(),
                    line: 0,
                    column: 0,
                }
                .into());
            }
        }
        Ok(Self {
            kind: Kind::Expression { expr: bound, slots },
            growth: None,
        })
    }

    /// Attaches growth data `(q, a, b)` certifying `|f| ≤ a + b|t|^q`.
    pub fn with_growth(
        mut self,
        domain: &Domain,
        q: f64,
        a: &VertexFunction,
        b: &VertexFunction,
    ) -> Result<Self, VariationalError> {
        self.growth = Some(Growth {
            q,
            a: dense(domain, a)?,
            b: dense(domain, b)?,
        });
        Ok(self)
    }

    pub fn growth(&self) -> Option<&Growth> {
        self.growth.as_ref()
    }

    pub fn is_expression(&self) -> bool {
        matches!(self.kind, Kind::Expression { .. })
    }

    /// `f(x, t)`.
    pub fn eval(&self, x: usize, t: f64) -> Result<f64, VariationalError> {
        Ok(match &self.kind {
            Kind::Power { a, b, q } => a[x] + b[x] * powsgn(t, *q),
            Kind::Exponential { alpha, beta } => {
                let v = alpha[x] * (beta[x] * t).exp();
                if !v.is_finite() {
                    return Err(ExprError::Eval("exponential overflow".into()).into());
                }
                v
            }
            Kind::Expression { expr, slots } => expr.eval(t, &slots[x])?,
        })
    }

    /// `∂_t f(x, t)`, using `0` at kinks.
    pub fn derivative(&self, x: usize, t: f64) -> Result<f64, VariationalError> {
        Ok(match &self.kind {
            Kind::Power { b, q, .. } => {
                if b[x] == 0.0 {
                    0.0
                } else if t != 0.0 {
                    b[x] * q * t.abs().powf(q - 1.0)
                } else if *q > 1.0 {
                    0.0
                } else if *q == 1.0 {
                    b[x]
                } else {
                    return Err(ExprError::Eval("derivative of |t|^q at 0 with q < 1".into()).into());
                }
            }
            Kind::Exponential { alpha, beta } => alpha[x] * beta[x] * (beta[x] * t).exp(),
            Kind::Expression { expr, slots } => expr.eval_dual(t, &slots[x])?.deriv,
        })
    }

    /// `F(x,t) = ∫_0^t f(x,τ) dτ`; closed form where available, adaptive
    /// Simpson quadrature otherwise.
    pub fn primitive(&self, x: usize, t: f64) -> Result<f64, VariationalError> {
        Ok(match &self.kind {
            Kind::Power { a, b, q } => a[x] * t + b[x] * t.abs().powf(q + 1.0) / (q + 1.0),
            Kind::Exponential { alpha, beta } => {
                if beta[x] == 0.0 {
                    alpha[x] * t
                } else {
                    alpha[x] * (beta[x] * t).exp_m1() / beta[x]
                }
            }
            Kind::Expression { expr, slots } => {
                adaptive_simpson(|s| Ok(expr.eval(s, &slots[x])?), 0.0, t, 1e-12)?
            }
        })
    }

    /// Spot-checks the growth bound on `Ω × grid`; returns the first violation.
    pub fn check_growth(&self, domain: &Domain, grid: &[f64]) -> Result<Option<(usize, f64)>, VariationalError> {
        let Some(growth) = &self.growth else {
            return Ok(None);
        };
        for &x in domain.omega_indices() {
            for &t in grid {
                let f = self.eval(x, t)?;
                let bound = growth.a[x] + growth.b[x] * t.abs().powf(growth.q);
                if f.abs() > bound + 1e-12 * (1.0 + bound) {
                    return Ok(Some((x, t)));
                }
            }
        }
        Ok(None)
    }
}

/// `∫_a^b f` by adaptive Simpson with absolute tolerance `tol`.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64, VariationalError>
where
    F: Fn(f64) -> Result<f64, VariationalError>,
{
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, VariationalError>
where
    F: Fn(f64) -> Result<f64, VariationalError>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Below the rounding floor of the running estimate no refinement helps.
    let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    if delta.abs() <= 15.0 * tol.max(floor) {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(VariationalError::QuadratureFailure { a, b });
    }
    let l = simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?;
    let r = simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?;
    Ok(l + r)
}
