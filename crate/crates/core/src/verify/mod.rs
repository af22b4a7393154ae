//! Executable inequality checks, literal-summation oracles and random
//! instance generation.
//!
//! Every check first replays its input through [`semilinear_residual`] and
//! rejects anything that is not a solution to `1e-8`; the inequalities are
//! only claimed for solutions.

mod instance;
mod monotone;
mod oracle;
mod suite;

use thiserror::Error;

use crate::calculus::{p_weight, CalculusError, OperatorContext};
use crate::graph::{Domain, GraphError, VertexFunction};
use crate::solvers::{semilinear_residual, SolveError};
use crate::variational::{Nonlinearity, VariationalError};

pub use instance::{random_domain, random_instance, random_problem_on, InstanceKind, InstanceParams};
pub use monotone::MonotoneH;
pub use oracle::{oracle_mp_laplacian, oracle_sobolev_constant};
pub use suite::{run_suite, InstanceSource, Suite, SuiteInstance};

/// Residual sup norm below which an input counts as a solution.
pub const SOLUTION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("input is not a solution: residual {residual:e}")]
    NotASolution { residual: f64 },
    #[error("boundary data mismatch: {0}")]
    BoundaryData(String),
    #[error("H is not admissible: {0}")]
    HNotAdmissible(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error(transparent)]
    Variational(#[from] VariationalError),
}

/// One inequality `lhs ≤ rhs` checked up to `tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub slack: f64,
    pub tolerance: f64,
    pub context: String,
}

impl CheckResult {
    pub fn new(name: &str, lhs: f64, rhs: f64, tolerance: f64, context: impl Into<String>) -> Self {
        let slack = rhs - lhs;
        Self {
            name: name.to_string(),
            passed: slack >= -tolerance,
            lhs,
            rhs,
            slack,
            tolerance,
            context: context.into(),
        }
    }
}

fn require_solution(
    domain: &Domain,
    p: f64,
    g: &Nonlinearity,
    f: &VertexFunction,
    u: &VertexFunction,
) -> Result<Vec<f64>, VerifyError> {
    let residual = semilinear_residual(domain, p, g, f, u)?;
    if !(residual <= SOLUTION_TOL) {
        return Err(VerifyError::NotASolution { residual });
    }
    Ok(domain.dense(u)?)
}

fn require_zero_boundary(domain: &Domain, u: &[f64]) -> Result<(), VerifyError> {
    for &b in domain.boundary_indices() {
        if u[b].abs() > 1e-12 {
            return Err(VerifyError::BoundaryData(format!(
                "u({}) = {} but u must vanish on the boundary",
                domain.graph().id(b),
                u[b]
            )));
        }
    }
    Ok(())
}

/// L¹ contraction: `∫|g(x,u₁) − g(x,u₂)| dm ≤ ∫|f₁ − f₂| dm` for solutions
/// of `−Δ_p u_i + g(x,u_i) = f_i` sharing their boundary values.
///
/// Both integrals run over `Ω°`, where the data live; on `∂Ω` the integrand
/// on the left vanishes because `u₁ = u₂` there.
pub fn check_oscillation(
    domain: &Domain,
    g: &Nonlinearity,
    u1: &VertexFunction,
    u2: &VertexFunction,
    f1: &VertexFunction,
    f2: &VertexFunction,
    p: f64,
) -> Result<CheckResult, VerifyError> {
    let a = require_solution(domain, p, g, f1, u1)?;
    let b = require_solution(domain, p, g, f2, u2)?;
    for &x in domain.boundary_indices() {
        if (a[x] - b[x]).abs() > 1e-12 {
            return Err(VerifyError::BoundaryData(format!(
                "solutions differ at boundary vertex {}",
                domain.graph().id(x)
            )));
        }
    }
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for &x in domain.interior_indices() {
        let mx = domain.measure(x);
        lhs += mx * (g.eval(x, a[x])? - g.eval(x, b[x])?).abs();
        rhs += mx * (interior_value(domain, f1, x)? - interior_value(domain, f2, x)?).abs();
    }
    Ok(CheckResult::new(
        "oscillation",
        lhs,
        rhs,
        SOLUTION_TOL * (1.0 + rhs),
        format!("p={p}"),
    ))
}

fn interior_value(domain: &Domain, f: &VertexFunction, x: usize) -> Result<f64, VerifyError> {
    let id = domain.graph().id(x);
    f.get(id).ok_or(VerifyError::Graph(GraphError::MissingValue(id)))
}

/// `∫_Ω f·H(u) dm ≥ 0` for a solution of `−Δ_p u = f`, `u = 0` on `∂Ω`.
///
/// Returns three results: the inequality itself (tolerance
/// `1e-10·(1+|rhs|)`), agreement of `∫ f·H(u)` with
/// `∫ |∇u|^{p−2} Γ(u, H(u)) dm` to `1e-8·(1+|rhs|)`, and termwise
/// nonnegativity of every edge summand `w(u(y)−u(x))(H(u(y))−H(u(x)))`.
pub fn check_h_inequality(
    domain: &Domain,
    u: &VertexFunction,
    f: &VertexFunction,
    h: &MonotoneH,
    p: f64,
) -> Result<[CheckResult; 3], VerifyError> {
    h.validate()?;
    let ud = require_solution(domain, p, &Nonlinearity::zero(domain), f, u)?;
    require_zero_boundary(domain, &ud)?;
    let ctx = OperatorContext::restrict(domain.clone());
    let graph = domain.graph();
    let mut hu = vec![0.0; graph.vertex_count()];
    for &x in domain.omega_indices() {
        hu[x] = h.eval(ud[x]);
    }

    let mut rhs = 0.0;
    for &x in domain.interior_indices() {
        rhs += domain.measure(x) * interior_value(domain, f, x)? * hu[x];
    }
    let mut identity = 0.0;
    let mut worst_term = 0.0_f64;
    for &x in domain.omega_indices() {
        let s = p_weight(ctx.slope_at(&ud, x), p);
        identity += domain.measure(x) * s * ctx.gradient_form_at(&ud, &hu, x);
        for &(y, w) in graph.neighbors(x) {
            if domain.contains_index(y) {
                worst_term = worst_term.min(w * (ud[y] - ud[x]) * (hu[y] - hu[x]));
            }
        }
    }
    let context = format!("H={h:?}, p={p}");
    Ok([
        CheckResult::new("h_inequality", 0.0, rhs, 1e-10 * (1.0 + rhs.abs()), context.clone()),
        CheckResult::new(
            "h_identity",
            (rhs - identity).abs(),
            0.0,
            SOLUTION_TOL * (1.0 + rhs.abs()),
            context.clone(),
        ),
        CheckResult::new("h_termwise", -worst_term, 0.0, 0.0, context),
    ])
}

/// The level-set sign inequalities for a solution of `−Δ_p u = f`, `u = 0`
/// on `∂Ω`, each to tolerance `1e-10`:
///
/// * `∫_{u ≥ M} f dm ≥ 0`
/// * `∫_{u ≤ −M} f dm ≤ 0`
/// * `∫_{|u| ≥ M} f·sgn(u) dm ≥ 0`
///
/// The third is the difference of the first two.
pub fn check_sign_inequality(
    domain: &Domain,
    u: &VertexFunction,
    f: &VertexFunction,
    level: f64,
    p: f64,
) -> Result<[CheckResult; 3], VerifyError> {
    if !(level > 0.0 && level.is_finite()) {
        return Err(VerifyError::InvalidParameters(format!("M = {level} must be positive")));
    }
    let ud = require_solution(domain, p, &Nonlinearity::zero(domain), f, u)?;
    require_zero_boundary(domain, &ud)?;
    let (mut upper, mut lower, mut signed) = (0.0, 0.0, 0.0);
    for &x in domain.interior_indices() {
        let v = domain.measure(x) * interior_value(domain, f, x)?;
        let t = ud[x];
        if t >= level {
            upper += v;
        }
        if t <= -level {
            lower += v;
        }
        if t.abs() >= level {
            let sgn = if t > 0.0 {
                1.0
            } else if t < 0.0 {
                -1.0
            } else {
                0.0
            };
            signed += v * sgn;
        }
    }
    let context = format!("M={level}, p={p}");
    Ok([
        CheckResult::new("sign_upper", 0.0, upper, 1e-10, context.clone()),
        CheckResult::new("sign_lower", lower, 0.0, 1e-10, context.clone()),
        CheckResult::new("sign_abs", 0.0, signed, 1e-10, context),
    ])
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::graph::WeightedGraph;
    use crate::solvers::{solve_semilinear_dirichlet, SolveOptions};
    use crate::variational::Nonlinearity;

    fn three_path() -> Domain {
        let g = Arc::new(WeightedGraph::from_edges(&[(0, 1, 1.0), (1, 2, 1.0)]).unwrap());
        Domain::new(g, &[0, 1]).unwrap()
    }

    fn vf(pairs: &[(usize, f64)]) -> VertexFunction {
        VertexFunction::from_pairs(pairs.iter().copied()).unwrap()
    }

    fn identity_g(d: &Domain) -> Nonlinearity {
        let zero = VertexFunction::constant(&d.omega(), 0.0);
        let one = VertexFunction::constant(&d.omega(), 1.0);
        Nonlinearity::power(d, &zero, &one, 1.0).unwrap()
    }

    #[test]
    fn oscillation_hand_instance() {
        let d = three_path();
        let g = identity_g(&d);
        let u1 = vf(&[(0, 0.5), (1, 0.0)]);
        let u2 = vf(&[(0, 1.5), (1, 0.0)]);
        let r = check_oscillation(&d, &g, &u1, &u2, &vf(&[(0, 1.0)]), &vf(&[(0, 3.0)]), 2.0).unwrap();
        assert!(r.passed);
        assert!((r.lhs - 1.0).abs() < 1e-15);
        assert!((r.rhs - 2.0).abs() < 1e-15);
    }

    #[test]
    fn oscillation_same_data() {
        let d = three_path();
        let g = identity_g(&d);
        let u = vf(&[(0, 0.5), (1, 0.0)]);
        let f = vf(&[(0, 1.0)]);
        let r = check_oscillation(&d, &g, &u, &u, &f, &f, 2.0).unwrap();
        assert_eq!((r.lhs, r.rhs, r.slack), (0.0, 0.0, 0.0));
        assert!(r.passed);
    }

    #[test]
    fn rejects_non_solutions() {
        let d = three_path();
        let g = identity_g(&d);
        let u = vf(&[(0, 0.6), (1, 0.0)]);
        let f = vf(&[(0, 1.0)]);
        assert!(matches!(
            check_oscillation(&d, &g, &u, &u, &f, &f, 2.0),
            Err(VerifyError::NotASolution { .. })
        ));
        assert!(matches!(
            check_h_inequality(&d, &u, &f, &MonotoneH::Identity, 2.0),
            Err(VerifyError::NotASolution { .. })
        ));
    }

    #[test]
    fn h_identity_gives_energy() {
        // −Δu = f on the 3-path: u(0) = f(0).
        let d = three_path();
        let u = vf(&[(0, 2.0), (1, 0.0)]);
        let f = vf(&[(0, 2.0)]);
        let [ineq, ident, term] = check_h_inequality(&d, &u, &f, &MonotoneH::Identity, 2.0).unwrap();
        assert!(ineq.passed && ident.passed && term.passed);
        assert!((ineq.rhs - 4.0).abs() < 1e-14);
        let h = MonotoneH::truncation(3.0, 8).unwrap();
        let [ineq, ..] = check_h_inequality(&d, &u, &f, &h, 2.0).unwrap();
        assert_eq!(ineq.rhs, 0.0);
    }

    #[test]
    fn sign_checks() {
        let d = three_path();
        let u = vf(&[(0, -1.0), (1, 0.0)]);
        let f = vf(&[(0, -1.0)]);
        let [up, low, abs] = check_sign_inequality(&d, &u, &f, 0.5, 2.0).unwrap();
        assert!(up.passed && low.passed && abs.passed);
        assert_eq!(low.lhs, -1.0);
        assert_eq!(abs.rhs, 1.0);
        let [up, low, abs] = check_sign_inequality(&d, &u, &f, 2.0, 2.0).unwrap();
        assert_eq!((up.rhs, low.lhs, abs.rhs), (0.0, 0.0, 0.0));
    }

    #[test]
    fn solver_output_passes_p3() {
        let d = three_path();
        let f = vf(&[(0, 1.5)]);
        let zero = VertexFunction::constant(&d.omega(), 0.0);
        let r = solve_semilinear_dirichlet(&d, 3.0, &Nonlinearity::zero(&d), &f, &zero, &SolveOptions::default())
            .unwrap();
        let checks = check_h_inequality(&d, &r.solution, &f, &MonotoneH::Identity, 3.0).unwrap();
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
        let signs = check_sign_inequality(&d, &r.solution, &f, 0.1, 3.0).unwrap();
        assert!(signs.iter().all(|c| c.passed), "{signs:?}");
    }
}
