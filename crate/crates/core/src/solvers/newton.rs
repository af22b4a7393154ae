use nalgebra::{DMatrix, DVector};

use super::{SolveError, SolveOptions, SolveReport, SolveStatus};
use crate::calculus::OperatorContext;
use crate::graph::{Domain, VertexFunction};
use crate::variational::Nonlinearity;

/// Newton's method for `−Δu + g(x,u) = f` in `Ω°`, `u = 0` on `∂Ω`, from `u = 0`.
///
/// Requires `∂_t g(x,0) = 0`. A nonzero `g(x,0)` is allowed: the equation is
/// the same after moving it to the right-hand side. Divergence is reported as
/// a status since the small-data neighborhood is not known a priori.
pub fn solve_small_data_newton(
    domain: &Domain,
    g: &Nonlinearity,
    f: &VertexFunction,
    opts: &SolveOptions,
) -> Result<SolveReport, SolveError> {
    domain.require_solvable()?;
    let free = domain.interior_indices();
    for &x in free {
        let dg = g.derivative(x, 0.0)?;
        if dg.abs() > 1e-12 {
            return Err(SolveError::HypothesisViolated(format!(
                "∂_t g(x,0) must vanish; got {dg} at vertex {}",
                domain.graph().id(x)
            )));
        }
    }
    let ctx = OperatorContext::zero_extend(domain.clone());
    let graph = domain.graph();
    let fd = domain.dense_on(f, free)?;
    let n = free.len();
    let mut slot = vec![usize::MAX; graph.vertex_count()];
    for (i, &x) in free.iter().enumerate() {
        slot[x] = i;
    }

    let residual = |u: &[f64]| -> Result<Vec<f64>, SolveError> {
        free.iter()
            .map(|&x| Ok(-ctx.laplacian_at(u, x) + g.eval(x, u[x])? - fd[x]))
            .collect()
    };
    let sup = |r: &[f64]| r.iter().fold(0.0_f64, |m, v| m.max(v.abs()));

    let mut u = vec![0.0; graph.vertex_count()];
    let mut r = residual(&u)?;
    let mut history = vec![sup(&r)];
    let mut iterations = 0;
    let mut diverged = false;
    while *history.last().expect("nonempty") > opts.newton_tol && iterations < opts.newton_max_iter {
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for (i, &x) in free.iter().enumerate() {
            jac[(i, i)] = 1.0 + g.derivative(x, u[x])?;
            for &(y, w) in graph.neighbors(x) {
                if slot[y] != usize::MAX {
                    jac[(i, slot[y])] -= w / domain.measure(x);
                }
            }
        }
        let rhs = DVector::from_iterator(n, r.iter().map(|v| -v));
        let step = jac.lu().solve(&rhs).ok_or(SolveError::SingularJacobian)?;
        for (i, &x) in free.iter().enumerate() {
            u[x] += step[i];
        }
        iterations += 1;
        r = match residual(&u) {
            Ok(r) => r,
            Err(_) => {
                diverged = true;
                break;
            }
        };
        let s = sup(&r);
        if !s.is_finite() {
            diverged = true;
            break;
        }
        history.push(s);
    }

    let final_residual = *history.last().expect("nonempty");
    let status = if !diverged && final_residual <= opts.newton_tol {
        SolveStatus::Converged
    } else {
        SolveStatus::Diverged
    };
    let mut report = SolveReport::new(domain.function_on_omega(&u), status);
    report.residual_inf = final_residual;
    report.boundary_ok = domain.boundary_indices().iter().all(|&b| u[b] == 0.0);
    report.iterations = iterations;
    report.newton_residuals = history;
    Ok(report)
}
