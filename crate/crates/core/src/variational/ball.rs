//! Multi-start minimization of `E_λ` over `{Φ ≤ ρ}`.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::energy::BallObjective;
use super::{EnergyFunctional, VariationalError};
use crate::graph::VertexFunction;
use crate::optim::{projected_descent, DescentOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct BallOptions {
    /// Random starts in addition to `u = 0`.
    pub random_starts: usize,
    pub seed: u64,
    /// Projected-gradient tolerance.
    pub tol: f64,
    /// Iteration cap; `None` means `500·dim`.
    pub max_iter: Option<usize>,
}

impl Default for BallOptions {
    fn default() -> Self {
        Self {
            random_starts: 8,
            seed: 0,
            tol: 1e-10,
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallMinimum {
    pub u: VertexFunction,
    pub coords: Vec<f64>,
    pub dense: Vec<f64>,
    pub energy: f64,
    pub phi: f64,
    pub rho: f64,
    /// `Φ(u) ≤ ρ(1 − 1e−9)`.
    pub interior: bool,
    pub converged: bool,
    pub pg_norm: f64,
    pub iterations: usize,
    pub trace: Vec<f64>,
    /// Which start produced the winner (0 is `u = 0`).
    pub start: usize,
}

/// A uniformly scaled random point of the ball: random direction, radius `ρ·U(0,1)`.
pub(crate) fn random_point(ef: &EnergyFunctional, rho: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let dim = ef.space().dim();
    loop {
        let c: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let phi = ef.phi(&c);
        if phi > 0.0 {
            let r = rho * rng.random_range(0.0..1.0) / phi;
            return c.iter().map(|v| v * r).collect();
        }
    }
}

/// Lowest energy first; within `1e-12` the smaller `Φ`, then lexicographic values.
fn tie_break(a: &BallMinimum, b: &BallMinimum) -> Ordering {
    if (a.energy - b.energy).abs() > 1e-12 {
        return a.energy.total_cmp(&b.energy);
    }
    a.phi.total_cmp(&b.phi).then_with(|| {
        a.dense
            .iter()
            .zip(&b.dense)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

pub fn minimize_on_ball(ef: &EnergyFunctional, rho: f64, opts: &BallOptions) -> Result<BallMinimum, VariationalError> {
    if !(rho > 0.0) {
        return Err(VariationalError::InvalidParameters(format!("rho = {rho} must be positive")));
    }
    let dim = ef.space().dim();
    let descent = DescentOptions {
        tol: opts.tol,
        max_iter: opts.max_iter.unwrap_or(500 * dim.max(1)),
        ..DescentOptions::default()
    };
    let starts: Vec<Vec<f64>> = {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        std::iter::once(vec![0.0; dim])
            .chain((0..opts.random_starts).map(|_| random_point(ef, rho, &mut rng)))
            .collect()
    };
    let objective = BallObjective { ef, rho };
    let runs: Vec<BallMinimum> = starts
        .into_par_iter()
        .enumerate()
        .map(|(start, x0)| {
            let out = projected_descent(&objective, x0, &descent)?;
            let dense = ef.space().embed(&out.x);
            let phi = ef.phi(&out.x);
            Ok(BallMinimum {
                u: ef.context().domain().function_on_omega(&dense),
                coords: out.x.clone(),
                dense,
                energy: out.value,
                phi,
                rho,
                interior: phi <= rho * (1.0 - 1e-9),
                converged: out.converged(),
                pg_norm: out.pg_norm,
                iterations: out.iterations,
                trace: out.trace,
                start,
            })
        })
        .collect::<Result<_, VariationalError>>()?;
    Ok(runs
        .into_iter()
        .min_by(tie_break)
        .expect("at least the zero start"))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::calculus::OperatorContext;
    use crate::graph::{Domain, WeightedGraph};
    use crate::variational::Nonlinearity;

    fn three_path_ctx() -> OperatorContext {
        let g = Arc::new(WeightedGraph::from_edges(&[(0, 1, 1.0), (1, 2, 1.0)]).unwrap());
        OperatorContext::zero_extend(Domain::new(g, &[0, 1]).unwrap())
    }

    #[test]
    fn zero_nonlinearity_gives_zero() {
        let ctx = three_path_ctx();
        let d = ctx.domain().clone();
        let ef = EnergyFunctional::new(ctx, 1, 2.0, 1.0, Nonlinearity::zero(&d)).unwrap();
        let out = minimize_on_ball(&ef, 1.0, &BallOptions::default()).unwrap();
        assert!(out.interior && out.converged);
        assert_eq!(out.coords, vec![0.0]);
    }

    #[test]
    fn yamabe_path_instance() {
        let ctx = three_path_ctx();
        let d = ctx.domain().clone();
        let one = VertexFunction::constant(&[0, 1], 1.0);
        let f = Nonlinearity::yamabe(&d, &one, &one, 1.0).unwrap();
        let ef = EnergyFunctional::new(ctx, 1, 2.0, 0.3, f).unwrap();
        let out = minimize_on_ball(&ef, 16.0, &BallOptions::default()).unwrap();
        assert!(out.interior && out.converged);
        assert!((out.coords[0] - 0.3 / 1.3).abs() < 1e-9);
        assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn deterministic() {
        let ctx = three_path_ctx();
        let d = ctx.domain().clone();
        let one = VertexFunction::constant(&[0, 1], 1.0);
        let f = Nonlinearity::yamabe(&d, &one, &one, 2.0).unwrap();
        let ef = EnergyFunctional::new(ctx, 1, 3.0, 0.5, f).unwrap();
        let opts = BallOptions {
            seed: 11,
            ..BallOptions::default()
        };
        assert_eq!(minimize_on_ball(&ef, 0.2, &opts).unwrap(), minimize_on_ball(&ef, 0.2, &opts).unwrap());
    }
}
