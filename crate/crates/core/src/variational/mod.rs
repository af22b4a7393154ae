//! Embedding constants, existence thresholds, the energy functional and
//! ball-constrained minimization for problems of the form `L_{m,p}u = λf(x,u)`.

mod ball;
mod energy;
mod nonlinearity;
mod sobolev;
mod space;
mod threshold;

use thiserror::Error;

use crate::calculus::CalculusError;
use crate::expr::ExprError;
use crate::graph::GraphError;

pub use ball::{minimize_on_ball, BallMinimum, BallOptions};
pub use energy::EnergyFunctional;
pub use nonlinearity::{adaptive_simpson, Growth, Nonlinearity};
pub use sobolev::{sobolev_constant, NormBall, SobolevConstant, SobolevOptions};
pub use space::{boundary_defect, FreeSpace};
pub use threshold::{is_limit_case, lambda_rho, threshold_lambda, Threshold};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VariationalError {
    #[error(transparent)]
    Graph(GraphError),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("adaptive quadrature did not converge on [{a}, {b}]")]
    QuadratureFailure { a: f64, b: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("the space W^{{m,p}}_0 of this domain is trivial")]
    DegenerateDomain,
    #[error("function violates the boundary conditions (defect {0:e})")]
    ConstraintViolation(f64),
}

impl From<GraphError> for VariationalError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::EmptyInterior => VariationalError::DegenerateDomain,
            other => VariationalError::Graph(other),
        }
    }
}
