//! End-to-end solvers.
//!
//! | kind                  | equation                                            | method                          |
//! |-----------------------|-----------------------------------------------------|---------------------------------|
//! | `YamabeMp`            | `L_{m,p}u = λf(x,u)`, `|∇^j u| = 0` on `∂Ω`, `j<m`  | ball-constrained minimization   |
//! | `SemilinearDirichlet` | `−Δ_p u + g(x,u) = f` in `Ω°`, `u = h` on `∂Ω`      | convex minimization             |
//! | `YamabeWellPosed`     | `−Δ_p u + b|u|^{q−1}u = a`, `u = 0` on `∂Ω`          | delegates to the Dirichlet path |
//! | `KazdanWarner`        | `−Δ_p u + αe^{βu} = f`, `u = h` on `∂Ω`             | convex minimization             |
//! | `SmallDataLaplace`    | `−Δu + g(x,u) = f`, `u = 0` on `∂Ω`                 | Newton with dense LU            |
//!
//! Violated hypotheses are errors. Numerical outcomes (a minimizer touching
//! the ball, non-convergence) are reported through [`SolveStatus`].

mod dirichlet;
mod newton;
mod yamabe;

use thiserror::Error;

use crate::calculus::CalculusError;
use crate::graph::{Domain, GraphError, VertexFunction, VertexId};
use crate::variational::{Nonlinearity, VariationalError};

pub use dirichlet::{
    semilinear_residual, solve_kazdan_warner, solve_semilinear_dirichlet, solve_yamabe_wellposed,
};
pub use newton::solve_small_data_newton;
pub use yamabe::solve_yamabe_mp;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("g(x, ·) is not non-decreasing at vertex {vertex} near t = {t}")]
    NonMonotoneG { vertex: VertexId, t: f64 },
    #[error("singular Jacobian")]
    SingularJacobian,
    #[error("independent starts disagree by {gap:e} in sup norm")]
    UniquenessWitnessFailed { gap: f64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error(transparent)]
    Variational(#[from] VariationalError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemKind {
    YamabeMp {
        lambda: f64,
        /// Must carry growth data `(q, a, b)`.
        f: Nonlinearity,
    },
    SemilinearDirichlet {
        g: Nonlinearity,
        f: VertexFunction,
        h: VertexFunction,
    },
    YamabeWellPosed {
        a: VertexFunction,
        b: VertexFunction,
        q: f64,
    },
    KazdanWarner {
        alpha: VertexFunction,
        beta: VertexFunction,
        f: VertexFunction,
        h: VertexFunction,
    },
    SmallDataLaplace {
        g: Nonlinearity,
        f: VertexFunction,
    },
}

impl ProblemKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::YamabeMp { .. } => "yamabe_mp",
            ProblemKind::SemilinearDirichlet { .. } => "semilinear_dirichlet",
            ProblemKind::YamabeWellPosed { .. } => "yamabe_wellposed",
            ProblemKind::KazdanWarner { .. } => "kazdan_warner",
            ProblemKind::SmallDataLaplace { .. } => "small_data_laplace",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub domain: Domain,
    pub m: usize,
    pub p: f64,
    pub kind: ProblemKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Pointwise equation residual required for `Converged`.
    pub residual_tol: f64,
    /// Projected-gradient tolerance of the descent solvers.
    pub gradient_tol: f64,
    pub boundary_tol: f64,
    pub seed: u64,
    pub random_starts: usize,
    pub max_iter: Option<usize>,
    /// `t`-range and point count of the monotonicity grid for `g`.
    pub monotone_range: (f64, f64),
    pub monotone_points: usize,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub uniqueness_tol: f64,
    /// Re-solve from two random starts and compare (uniqueness witness).
    pub uniqueness_witness: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            residual_tol: 1e-8,
            gradient_tol: 1e-10,
            boundary_tol: 1e-12,
            seed: 0,
            random_starts: 8,
            max_iter: None,
            monotone_range: (-10.0, 10.0),
            monotone_points: 2048,
            newton_tol: 1e-12,
            newton_max_iter: 50,
            uniqueness_tol: 1e-6,
            uniqueness_witness: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    BoundaryTouching,
    Diverged,
    HypothesisViolated,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Converged => "Converged",
            SolveStatus::BoundaryTouching => "BoundaryTouching",
            SolveStatus::Diverged => "Diverged",
            SolveStatus::HypothesisViolated => "HypothesisViolated",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Values on `Ω`.
    pub solution: VertexFunction,
    /// Sup norm of the equation residual on the free vertices.
    pub residual_inf: f64,
    pub boundary_ok: bool,
    /// Ball-minimizer interiority (`YamabeMp` only).
    pub interior_flag: Option<bool>,
    pub iterations: usize,
    pub energy_final: Option<f64>,
    pub energy_trace: Vec<f64>,
    pub lambda_used: Option<f64>,
    /// `Λ` for `YamabeMp`.
    pub lambda_threshold: Option<f64>,
    pub rho_used: Option<f64>,
    /// Embedding constant (`q = ∞`) used for `Λ`.
    pub embedding_constant: Option<f64>,
    /// Newton residual sup norms, starting with the initial guess.
    pub newton_residuals: Vec<f64>,
    /// Largest sup-norm gap between independent starts, when witnessed.
    pub uniqueness_gap: Option<f64>,
    pub status: SolveStatus,
    pub notes: Vec<String>,
}

impl SolveReport {
    fn new(solution: VertexFunction, status: SolveStatus) -> Self {
        Self {
            solution,
            residual_inf: 0.0,
            boundary_ok: true,
            interior_flag: None,
            iterations: 0,
            energy_final: None,
            energy_trace: Vec::new(),
            lambda_used: None,
            lambda_threshold: None,
            rho_used: None,
            embedding_constant: None,
            newton_residuals: Vec::new(),
            uniqueness_gap: None,
            status,
            notes: Vec::new(),
        }
    }

    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    /// Successive ratios `r_{k+1}/r_k` of the Newton residuals.
    pub fn newton_ratios(&self) -> Vec<f64> {
        self.newton_residuals.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

/// Dispatches on the problem kind.
pub fn solve(spec: &ProblemSpec, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    let d = &spec.domain;
    match &spec.kind {
        ProblemKind::YamabeMp { lambda, f } => solve_yamabe_mp(d, spec.m, spec.p, *lambda, f, opts),
        ProblemKind::SemilinearDirichlet { g, f, h } => {
            require_first_order(spec)?;
            solve_semilinear_dirichlet(d, spec.p, g, f, h, opts)
        }
        ProblemKind::YamabeWellPosed { a, b, q } => {
            require_first_order(spec)?;
            solve_yamabe_wellposed(d, spec.p, a, b, *q, opts)
        }
        ProblemKind::KazdanWarner { alpha, beta, f, h } => {
            require_first_order(spec)?;
            solve_kazdan_warner(d, spec.p, alpha, beta, f, h, opts)
        }
        ProblemKind::SmallDataLaplace { g, f } => {
            require_first_order(spec)?;
            if spec.p != 2.0 {
                return Err(SolveError::HypothesisViolated(format!(
                    "small-data Laplace problems need p = 2, got {}",
                    spec.p
                )));
            }
            solve_small_data_newton(d, g, f, opts)
        }
    }
}

fn require_first_order(spec: &ProblemSpec) -> Result<(), SolveError> {
    if spec.m != 1 {
        return Err(SolveError::HypothesisViolated(format!(
            "{} problems are first order, got m = {}",
            spec.kind.name(),
            spec.m
        )));
    }
    Ok(())
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}
