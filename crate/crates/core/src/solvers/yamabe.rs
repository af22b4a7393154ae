use super::{SolveError, SolveOptions, SolveReport, SolveStatus};
use crate::calculus::OperatorContext;
use crate::graph::Domain;
use crate::variational::{
    boundary_defect, lambda_rho, minimize_on_ball, sobolev_constant, threshold_lambda, BallOptions,
    EnergyFunctional, FreeSpace, Nonlinearity, SobolevOptions,
};

const GROWTH_GRID: usize = 401;

/// Existence solve for `L_{m,p}u = λf(x,u)` with vanishing boundary slopes.
///
/// Computes `C` (`q = ∞`) and `Λ`, picks the radius maximizing `λ_ρ` (or
/// doubles from 1 in the limit case `q = p − 1`), minimizes the energy on
/// that ball and retries once with `2ρ` if the minimizer touches the sphere.
pub fn solve_yamabe_mp(
    domain: &Domain,
    m: usize,
    p: f64,
    lambda: f64,
    f: &Nonlinearity,
    opts: &SolveOptions,
) -> Result<SolveReport, SolveError> {
    let hyp = |msg: String| Err(SolveError::HypothesisViolated(msg));
    if !(p > 1.0 && p.is_finite()) {
        return hyp(format!("p = {p} must exceed 1"));
    }
    if m == 0 {
        return hyp("order m must be at least 1".into());
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return hyp(format!("lambda = {lambda} must be positive"));
    }
    let Some(growth) = f.growth() else {
        return hyp("the nonlinearity needs growth data (q, a, b)".into());
    };
    let q = growth.q;
    if !(q.is_finite() && q >= p - 1.0 - 1e-12) {
        return hyp(format!("q = {q} must be at least p - 1 = {}", p - 1.0));
    }
    let omega = domain.omega_indices();
    if omega.iter().any(|&x| growth.a[x] < 0.0 || growth.b[x] < 0.0) {
        return hyp("growth coefficients a, b must be nonnegative".into());
    }
    let norm_a: f64 = omega.iter().map(|&x| growth.a[x] * domain.measure(x)).sum();
    let norm_b: f64 = omega.iter().map(|&x| growth.b[x] * domain.measure(x)).sum();
    if !(norm_a > 0.0 && norm_b > 0.0) {
        return hyp(format!("need ‖a‖₁ > 0 and ‖b‖₁ > 0, got {norm_a} and {norm_b}"));
    }
    let grid: Vec<f64> = (0..GROWTH_GRID)
        .map(|i| -10.0 + 20.0 * i as f64 / (GROWTH_GRID - 1) as f64)
        .collect();
    if let Some((x, t)) = f.check_growth(domain, &grid)? {
        return hyp(format!(
            "growth bound fails at vertex {} for t = {t}",
            domain.graph().id(x)
        ));
    }

    let ctx = OperatorContext::zero_extend(domain.clone());
    let space = FreeSpace::new(&ctx, m)?;
    let c = sobolev_constant(
        domain,
        m,
        p,
        f64::INFINITY,
        &SobolevOptions {
            seed: opts.seed,
            ..SobolevOptions::default()
        },
    )?
    .value;
    let threshold = threshold_lambda(p, q, c, norm_a, norm_b)?;
    let mut notes = Vec::new();
    if lambda >= threshold.lambda {
        notes.push(format!(
            "lambda = {lambda} is not below the threshold {}; existence is not guaranteed",
            threshold.lambda
        ));
    }
    let mut rho = if threshold.rho_star.is_finite() {
        threshold.rho_star
    } else {
        let mut rho = 1.0;
        for _ in 0..64 {
            if lambda_rho(rho, p, q, c, norm_a, norm_b)? > lambda {
                break;
            }
            rho *= 2.0;
        }
        rho
    };

    let free_nonzero_at_origin = {
        let mut any = false;
        for j in 0..space.dim() {
            let phi = space.basis_vector(j);
            for &x in omega {
                if phi[x] != 0.0 && f.eval(x, 0.0)? != 0.0 {
                    any = true;
                }
            }
        }
        any
    };

    let ef = EnergyFunctional::with_space(ctx.clone(), space, m, p, lambda, f.clone())?;
    let ball = BallOptions {
        random_starts: opts.random_starts,
        seed: opts.seed,
        tol: opts.gradient_tol,
        max_iter: opts.max_iter,
    };
    let mut min = minimize_on_ball(&ef, rho, &ball)?;
    if !min.interior {
        notes.push(format!("minimizer touched the sphere at rho = {rho}; retrying with 2rho"));
        rho *= 2.0;
        min = minimize_on_ball(&ef, rho, &ball)?;
    }
    let residual = ef.euler_lagrange_residual(&min.coords)?;
    let boundary_ok = boundary_defect(&ctx, &min.dense, m) <= opts.boundary_tol;
    let status = if !min.interior {
        SolveStatus::BoundaryTouching
    } else if residual <= opts.residual_tol && boundary_ok {
        SolveStatus::Converged
    } else {
        SolveStatus::Diverged
    };
    if free_nonzero_at_origin && min.u.sup_norm() == 0.0 {
        notes.push("f(·,0) does not vanish but the minimizer is zero".into());
    }

    let mut report = SolveReport::new(min.u, status);
    report.residual_inf = residual;
    report.boundary_ok = boundary_ok;
    report.interior_flag = Some(min.interior);
    report.iterations = min.iterations;
    report.energy_final = Some(min.energy);
    report.energy_trace = min.trace;
    report.lambda_used = Some(lambda);
    report.lambda_threshold = Some(threshold.lambda);
    report.rho_used = Some(rho);
    report.embedding_constant = Some(c);
    report.notes = notes;
    Ok(report)
}
