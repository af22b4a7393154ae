//! Monotone semilinear Dirichlet problems `−Δ_p u + g(x,u) = f`, `u = h` on `∂Ω`.
//!
//! With `g` non-decreasing in `t` the functional
//! `J(u) = (1/p)‖∇u‖^p_{L^p(Ω)} + ∫_{Ω°} G(x,u) dm − ∫_{Ω°} f u dm`
//! is convex and its critical points on `{u = h on ∂Ω}` are exactly the
//! solutions. Sums see only neighbors inside `Ω`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{sup_distance, SolveError, SolveOptions, SolveReport, SolveStatus};
use crate::calculus::OperatorContext;
use crate::graph::{Domain, VertexFunction};
use crate::optim::{projected_descent, DescentOptions, DescentOutcome, Objective};
use crate::variational::{Nonlinearity, VariationalError};

struct DirichletObjective<'a> {
    ctx: &'a OperatorContext,
    p: f64,
    g: &'a Nonlinearity,
    f: &'a [f64],
    base: &'a [f64],
    free: &'a [usize],
}

impl DirichletObjective<'_> {
    fn field(&self, c: &[f64]) -> Vec<f64> {
        let mut u = self.base.to_vec();
        for (&x, &v) in self.free.iter().zip(c) {
            u[x] = v;
        }
        u
    }
}

impl Objective for DirichletObjective<'_> {
    type Error = VariationalError;

    fn value(&self, c: &[f64]) -> Result<f64, VariationalError> {
        let u = self.field(c);
        let d = self.ctx.domain();
        let mut total = self.ctx.energy_power_dense(&u, 1, self.p) / self.p;
        for &x in self.free {
            total += d.measure(x) * (self.g.primitive(x, u[x])? - self.f[x] * u[x]);
        }
        Ok(total)
    }

    fn gradient(&self, c: &[f64]) -> Result<Vec<f64>, VariationalError> {
        let u = self.field(c);
        let d = self.ctx.domain();
        let grad = self.ctx.mp_gradient_dense(&u, 1, self.p);
        self.free
            .iter()
            .map(|&x| Ok(grad[x] + d.measure(x) * (self.g.eval(x, u[x])? - self.f[x])))
            .collect()
    }
}

/// `max_{x∈Ω°} |−Δ_p u(x) + g(x,u(x)) − f(x)|` with sums restricted to `Ω`.
/// Accepts `p ≥ 1`; this is the only path for `p = 1`.
pub fn semilinear_residual(
    domain: &Domain,
    p: f64,
    g: &Nonlinearity,
    f: &VertexFunction,
    u: &VertexFunction,
) -> Result<f64, SolveError> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(SolveError::HypothesisViolated(format!("p = {p} must be at least 1")));
    }
    let ctx = OperatorContext::restrict(domain.clone());
    let u = domain.dense(u)?;
    let f = domain.dense_on(f, domain.interior_indices())?;
    dense_residual(&ctx, p, g, &f, &u)
}

fn dense_residual(ctx: &OperatorContext, p: f64, g: &Nonlinearity, f: &[f64], u: &[f64]) -> Result<f64, SolveError> {
    let mut worst = 0.0_f64;
    for &x in ctx.domain().interior_indices() {
        let r = -ctx.p_laplacian_at(u, p, x) + g.eval(x, u[x])? - f[x];
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Grid certification that `t ↦ g(x,t)` is non-decreasing on every interior vertex.
fn check_monotone(domain: &Domain, g: &Nonlinearity, opts: &SolveOptions) -> Result<(), SolveError> {
    let (lo, hi) = opts.monotone_range;
    let n = opts.monotone_points.max(2);
    let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    for &x in domain.interior_indices() {
        let mut prev: Option<f64> = None;
        for &t in &grid {
            let v = g.eval(x, t)?;
            if let Some(pv) = prev {
                if v < pv - 1e-12 * (1.0 + pv.abs()) {
                    return Err(SolveError::NonMonotoneG {
                        vertex: domain.graph().id(x),
                        t,
                    });
                }
            }
            if let Ok(dv) = g.derivative(x, t) {
                if dv < -1e-12 * (1.0 + v.abs()) {
                    return Err(SolveError::NonMonotoneG {
                        vertex: domain.graph().id(x),
                        t,
                    });
                }
            }
            prev = Some(v);
        }
    }
    Ok(())
}

struct Setup {
    ctx: OperatorContext,
    f: Vec<f64>,
    base: Vec<f64>,
    free: Vec<usize>,
}

fn setup(domain: &Domain, p: f64, f: &VertexFunction, h: &VertexFunction) -> Result<Setup, SolveError> {
    if p == 1.0 {
        return Err(SolveError::HypothesisViolated(
            "p = 1 has no solve path; use semilinear_residual to verify a given solution".into(),
        ));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(SolveError::HypothesisViolated(format!("p = {p} must exceed 1")));
    }
    domain.require_solvable()?;
    Ok(Setup {
        ctx: OperatorContext::restrict(domain.clone()),
        f: domain.dense_on(f, domain.interior_indices())?,
        base: domain.dense_on(h, domain.boundary_indices())?,
        free: domain.interior_indices().to_vec(),
    })
}

fn descend(setup: &Setup, p: f64, g: &Nonlinearity, start: Vec<f64>, opts: &SolveOptions) -> Result<DescentOutcome, SolveError> {
    let objective = DirichletObjective {
        ctx: &setup.ctx,
        p,
        g,
        f: &setup.f,
        base: &setup.base,
        free: &setup.free,
    };
    let descent = DescentOptions {
        tol: opts.gradient_tol,
        max_iter: opts.max_iter.unwrap_or((500 * setup.free.len()).max(20_000)),
        ..DescentOptions::default()
    };
    Ok(projected_descent(&objective, start, &descent)?)
}

fn dirichlet_core(
    domain: &Domain,
    p: f64,
    g: &Nonlinearity,
    f: &VertexFunction,
    h: &VertexFunction,
    opts: &SolveOptions,
) -> Result<SolveReport, SolveError> {
    let s = setup(domain, p, f, h)?;
    check_monotone(domain, g, opts)?;
    let out = descend(&s, p, g, vec![0.0; s.free.len()], opts)?;
    let mut u = s.base.clone();
    for (&x, &v) in s.free.iter().zip(&out.x) {
        u[x] = v;
    }
    let residual = dense_residual(&s.ctx, p, g, &s.f, &u)?;
    let boundary_ok = domain
        .boundary_indices()
        .iter()
        .all(|&b| (u[b] - s.base[b]).abs() <= opts.boundary_tol);
    let status = if residual <= opts.residual_tol && boundary_ok {
        SolveStatus::Converged
    } else {
        SolveStatus::Diverged
    };
    let mut report = SolveReport::new(domain.function_on_omega(&u), status);
    report.residual_inf = residual;
    report.boundary_ok = boundary_ok;
    report.iterations = out.iterations;
    report.energy_final = Some(out.value);
    report.energy_trace = out.trace;

    if opts.uniqueness_witness && status == SolveStatus::Converged && !s.free.is_empty() {
        let scale = 1.0 + s.f.iter().chain(&s.base).fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x005e_ed0f_u64);
        let mut gap = 0.0_f64;
        for _ in 0..2 {
            let start: Vec<f64> = (0..s.free.len()).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
            let alt = descend(&s, p, g, start, opts)?;
            if alt.converged() {
                gap = gap.max(sup_distance(&alt.x, &out.x));
            } else {
                report.notes.push("a witness start did not converge".into());
            }
        }
        report.uniqueness_gap = Some(gap);
        if gap > opts.uniqueness_tol {
            return Err(SolveError::UniquenessWitnessFailed { gap });
        }
    }
    Ok(report)
}

/// Solves `−Δ_p u + g(x,u) = f` in `Ω°`, `u = h` on `∂Ω`, for `g` with
/// `g(x,0) = 0` and non-decreasing in `t`. `f` is read on `Ω°`, `h` on `∂Ω`.
pub fn solve_semilinear_dirichlet(
    domain: &Domain,
    p: f64,
    g: &Nonlinearity,
    f: &VertexFunction,
    h: &VertexFunction,
    opts: &SolveOptions,
) -> Result<SolveReport, SolveError> {
    for &x in domain.interior_indices() {
        let g0 = g.eval(x, 0.0)?;
        if g0.abs() > 1e-12 {
            return Err(SolveError::HypothesisViolated(format!(
                "g(x,0) must vanish; g({}, 0) = {g0}",
                domain.graph().id(x)
            )));
        }
    }
    dirichlet_core(domain, p, g, f, h, opts)
}

/// `−Δ_p u + b|u|^{q−1}u = a` in `Ω°`, `u = 0` on `∂Ω`.
pub fn solve_yamabe_wellposed(
    domain: &Domain,
    p: f64,
    a: &VertexFunction,
    b: &VertexFunction,
    q: f64,
    opts: &SolveOptions,
) -> Result<SolveReport, SolveError> {
    if !(q.is_finite() && q >= p - 1.0 - 1e-12) {
        return Err(SolveError::HypothesisViolated(format!("q = {q} must be at least p - 1")));
    }
    let b_dense = domain.dense(b)?;
    if domain.omega_indices().iter().any(|&x| b_dense[x] < 0.0) {
        return Err(SolveError::HypothesisViolated("b must be nonnegative".into()));
    }
    let omega = domain.omega();
    let zero = VertexFunction::constant(&omega, 0.0);
    let g = Nonlinearity::power(domain, &zero, b, q)?;
    dirichlet_core(domain, p, &g, a, &zero, opts)
}

/// `−Δ_p u + α e^{βu} = f` in `Ω°`, `u = h` on `∂Ω`, with `α, β ≥ 0`.
/// Here `g(x,0) = α(x)` need not vanish; the solve only uses monotonicity.
pub fn solve_kazdan_warner(
    domain: &Domain,
    p: f64,
    alpha: &VertexFunction,
    beta: &VertexFunction,
    f: &VertexFunction,
    h: &VertexFunction,
    opts: &SolveOptions,
) -> Result<SolveReport, SolveError> {
    let al = domain.dense(alpha)?;
    let be = domain.dense(beta)?;
    if domain.omega_indices().iter().any(|&x| al[x] < 0.0 || be[x] < 0.0) {
        return Err(SolveError::HypothesisViolated("alpha and beta must be nonnegative".into()));
    }
    let g = Nonlinearity::exponential(domain, alpha, beta)?;
    dirichlet_core(domain, p, &g, f, h, opts)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;
    use std::sync::Arc;

    use super::*;
    use crate::expr::parse_expression;
    use crate::graph::WeightedGraph;

    fn three_path() -> Domain {
        let g = Arc::new(WeightedGraph::from_edges(&[(0, 1, 1.0), (1, 2, 1.0)]).unwrap());
        Domain::new(g, &[0, 1]).unwrap()
    }

    fn vf(pairs: &[(usize, f64)]) -> VertexFunction {
        VertexFunction::from_pairs(pairs.iter().copied()).unwrap()
    }

    fn expr_g(d: &Domain, src: &str) -> Nonlinearity {
        Nonlinearity::expression(d, &parse_expression(src).unwrap(), &BTreeMap::new(), &BTreeMap::new()).unwrap()
    }

    #[test]
    fn linear_g() {
        let d = three_path();
        let r = solve_semilinear_dirichlet(
            &d,
            2.0,
            &expr_g(&d, "t"),
            &vf(&[(0, 1.0)]),
            &vf(&[(1, 0.0)]),
            &SolveOptions::default(),
        )
        .unwrap();
        assert!(r.converged());
        assert!((r.solution.get(0).unwrap() - 0.5).abs() < 1e-10);
        assert!(r.uniqueness_gap.unwrap() <= 1e-6);
    }

    #[test]
    fn cubic_g() {
        let d = three_path();
        let r = solve_semilinear_dirichlet(
            &d,
            2.0,
            &expr_g(&d, "t^3"),
            &vf(&[(0, 2.0)]),
            &vf(&[(1, 0.0)]),
            &SolveOptions::default(),
        )
        .unwrap();
        assert!((r.solution.get(0).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_data() {
        let d = three_path();
        let r = solve_semilinear_dirichlet(
            &d,
            3.0,
            &expr_g(&d, "t"),
            &vf(&[(0, 0.0)]),
            &vf(&[(1, 0.0)]),
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(r.solution.sup_norm(), 0.0);
    }

    #[test]
    fn rejects_bad_g() {
        let d = three_path();
        let f = vf(&[(0, 1.0)]);
        let h = vf(&[(1, 0.0)]);
        let o = SolveOptions::default();
        assert!(matches!(
            solve_semilinear_dirichlet(&d, 2.0, &expr_g(&d, "-t"), &f, &h, &o),
            Err(SolveError::NonMonotoneG { .. })
        ));
        assert!(matches!(
            solve_semilinear_dirichlet(&d, 2.0, &expr_g(&d, "t + 1"), &f, &h, &o),
            Err(SolveError::HypothesisViolated(_))
        ));
        assert!(matches!(
            solve_semilinear_dirichlet(&d, 1.0, &expr_g(&d, "t"), &f, &h, &o),
            Err(SolveError::HypothesisViolated(_))
        ));
    }

    #[test]
    fn wellposed_examples() {
        let d = three_path();
        let one = VertexFunction::constant(&[0, 1], 1.0);
        let o = SolveOptions::default();
        let r = solve_yamabe_wellposed(&d, 2.0, &one, &one, 1.0, &o).unwrap();
        assert!((r.solution.get(0).unwrap() - 0.5).abs() < 1e-10);
        let zero = VertexFunction::constant(&[0, 1], 0.0);
        let r = solve_yamabe_wellposed(&d, 2.0, &zero, &one, 1.0, &o).unwrap();
        assert_eq!(r.solution.sup_norm(), 0.0);
        // −Δ₃u(0) = 0.6035534·t² = 2.
        let a = vf(&[(0, 2.0), (1, 0.0)]);
        let r = solve_yamabe_wellposed(&d, 3.0, &a, &zero, 2.0, &o).unwrap();
        let k = 0.25 + 1.0 / (2.0 * 2f64.sqrt());
        assert!((r.solution.get(0).unwrap() - (2.0 / k).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn kazdan_warner_examples() {
        let d = three_path();
        let one = VertexFunction::constant(&[0, 1], 1.0);
        let h = vf(&[(1, 0.0)]);
        let o = SolveOptions::default();
        let e = std::f64::consts::E;
        let r = solve_kazdan_warner(&d, 2.0, &one, &one, &vf(&[(0, 1.0 + e)]), &h, &o).unwrap();
        assert!((r.solution.get(0).unwrap() - 1.0).abs() < 1e-10);
        let r = solve_kazdan_warner(&d, 2.0, &one, &one, &vf(&[(0, 1.0)]), &h, &o).unwrap();
        assert!(r.solution.get(0).unwrap().abs() < 1e-10);
    }

    #[test]
    fn residual_accepts_p_one() {
        let d = three_path();
        let g = expr_g(&d, "t");
        let u = vf(&[(0, 0.5), (1, 0.0)]);
        assert!(semilinear_residual(&d, 2.0, &g, &vf(&[(0, 1.0)]), &u).unwrap() < 1e-15);
        assert!(semilinear_residual(&d, 1.0, &g, &vf(&[(0, 1.0)]), &u).is_ok());
    }
}
