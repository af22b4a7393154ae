//! Projected gradient descent with Barzilai–Borwein steps and monotone Armijo
//! backtracking.
//!
//! The projection need not be Euclidean (the solvers use radial scaling onto
//! a norm ball); stationarity is measured by `‖x − P(x − ∇f(x))‖_∞`.
//! If the line search stalls, a short Newton polish on the gradient follows.

use nalgebra::{DMatrix, DVector};

/// A differentiable objective on `R^n` with an optional feasibility projection.
pub trait Objective {
    type Error;

    fn value(&self, x: &[f64]) -> Result<f64, Self::Error>;

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>, Self::Error>;

    /// Maps `x` into the feasible set. Identity by default.
    fn project(&self, _x: &mut [f64]) {}
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentOptions {
    /// Stop when the projected-gradient ∞-norm is at most this.
    pub tol: f64,
    pub max_iter: usize,
    pub armijo: f64,
    pub shrink: f64,
    pub max_backtracks: usize,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
            armijo: 1e-4,
            shrink: 0.5,
            max_backtracks: 80,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescentStatus {
    Converged,
    MaxIterations,
    /// The line search found no acceptable step.
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    /// Final `‖x − P(x − ∇f(x))‖_∞`.
    pub pg_norm: f64,
    pub iterations: usize,
    /// Objective value after every accepted descent step, starting with the
    /// initial one. A final Newton polish is not recorded.
    pub trace: Vec<f64>,
    pub status: DescentStatus,
}

impl DescentOutcome {
    pub fn converged(&self) -> bool {
        self.status == DescentStatus::Converged
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn projected_gradient_norm<O: Objective>(obj: &O, x: &[f64], g: &[f64]) -> f64 {
    let mut y: Vec<f64> = x.iter().zip(g).map(|(a, b)| a - b).collect();
    obj.project(&mut y);
    x.iter().zip(&y).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
}

const POLISH_STEPS: usize = 20;

/// Newton steps on `∇f = 0` with a central-difference Jacobian, each kept
/// only if it stays feasible and strictly lowers `‖∇f‖_∞`. Near a minimizer
/// the gradient is still resolved when differences in `f` are lost to
/// rounding, which is where the line search stalls.
fn newton_polish<O: Objective>(obj: &O, x: &[f64], g: &[f64], steps: usize) -> Option<(Vec<f64>, f64, Vec<f64>)> {
    let n = x.len();
    let mut x = x.to_vec();
    let mut g = g.to_vec();
    let mut improved = false;
    for _ in 0..steps {
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let h = 1e-6 * (1.0 + x[j].abs());
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let (Ok(gp), Ok(gm)) = (obj.gradient(&xp), obj.gradient(&xm)) else {
                break;
            };
            for i in 0..n {
                jac[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        let rhs = DVector::from_iterator(n, g.iter().map(|v| -v));
        let Some(step) = jac.lu().solve(&rhs) else { break };
        let xt: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a + d).collect();
        let mut xproj = xt.clone();
        obj.project(&mut xproj);
        if xproj != xt {
            break;
        }
        let Ok(gt) = obj.gradient(&xt) else { break };
        if !(inf_norm(&gt) < inf_norm(&g)) {
            break;
        }
        x = xt;
        g = gt;
        improved = true;
    }
    if !improved {
        return None;
    }
    let f = obj.value(&x).ok()?;
    Some((x, f, g))
}

/// Minimizes `obj` from `x0`. Errors only if the objective cannot be
/// evaluated at the (projected) starting point; failed trial evaluations
/// count as rejected steps.
pub fn projected_descent<O: Objective>(
    obj: &O,
    x0: Vec<f64>,
    opts: &DescentOptions,
) -> Result<DescentOutcome, O::Error> {
    let mut x = x0;
    obj.project(&mut x);
    let mut f = obj.value(&x)?;
    let mut g = obj.gradient(&x)?;
    let mut pg = projected_gradient_norm(obj, &x, &g);
    let mut trace = vec![f];
    let mut alpha = 1.0 / inf_norm(&g).max(1.0);
    let mut iterations = 0;
    let mut status = DescentStatus::MaxIterations;

    while iterations < opts.max_iter {
        if pg <= opts.tol {
            status = DescentStatus::Converged;
            break;
        }
        let mut accepted = None;
        let mut step = alpha;
        for _ in 0..opts.max_backtracks {
            let mut xt: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            obj.project(&mut xt);
            let d: Vec<f64> = xt.iter().zip(&x).map(|(a, b)| a - b).collect();
            if inf_norm(&d) == 0.0 {
                break;
            }
            if let Ok(ft) = obj.value(&xt) {
                if ft <= f + opts.armijo * dot(&g, &d) {
                    if let Ok(gt) = obj.gradient(&xt) {
                        accepted = Some((xt, ft, gt));
                        break;
                    }
                } else if ft <= f {
                    // Sufficient decrease can be lost to rounding near a
                    // minimizer; accept if stationarity still improves.
                    if let Ok(gt) = obj.gradient(&xt) {
                        if projected_gradient_norm(obj, &xt, &gt) < pg {
                            accepted = Some((xt, ft, gt));
                            break;
                        }
                    }
                }
            }
            step *= opts.shrink;
        }
        let Some((xt, ft, gt)) = accepted else {
            status = DescentStatus::Stalled;
            break;
        };
        let s: Vec<f64> = xt.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gt.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        alpha = if sy > 0.0 {
            (dot(&s, &s) / sy).clamp(1e-20, 1e20)
        } else {
            (step * 2.0).min(1e20)
        };
        x = xt;
        f = ft;
        g = gt;
        pg = projected_gradient_norm(obj, &x, &g);
        trace.push(f);
        iterations += 1;
    }
    if status != DescentStatus::Converged {
        if let Some((xp, fp, gp)) = newton_polish(obj, &x, &g, POLISH_STEPS) {
            x = xp;
            f = fp;
            g = gp;
            pg = projected_gradient_norm(obj, &x, &g);
        }
        if pg <= opts.tol {
            status = DescentStatus::Converged;
        }
    }
    Ok(DescentOutcome {
        x,
        value: f,
        gradient: g,
        pg_norm: pg,
        iterations,
        trace,
        status,
    })
}
