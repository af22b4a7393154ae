//! Discrete calculus on weighted graphs and semilinear `(m,p)`-Laplacian
//! problems on bounded domains.
//!
//! * [`graph`]: weighted graphs, domains, the vertex measure.
//! * [`calculus`]: `Δ`, `Γ`, slopes, `Δ_p`, `L_{m,p}` and Sobolev norms.
//! * [`expr`]: the nonlinearity expression language with forward derivatives.
//! * [`variational`]: embedding constants, existence thresholds, energies and
//!   ball-constrained minimization.
//! * [`solvers`]: end-to-end solve pipelines.
//! * [`verify`]: inequality checks, literal-summation oracles and random instances.

// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod expr;
pub mod graph;
pub mod optim;
pub mod solvers;
pub mod variational;
pub mod verify;
