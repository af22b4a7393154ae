//! Best constants in `‖u‖_{L^q(Ω)} ≤ C‖∇^m u‖_{L^p(Ω)}` on `W^{m,p}_0(Ω)`.
//!
//! The building block is the support function of the unit ball,
//! `σ(ℓ) = max{ℓ·c : Φ(c) ≤ 1} = 1 / min{Φ(c) : ℓ·c = 1}`, a smooth convex
//! minimization over an affine hyperplane. For `q = ∞` the constant is the
//! largest support value of a point evaluation. For finite `q` an alternating
//! (power-type) ascent on `‖u‖_q/Φ(u)` is run from several starts; the result
//! is a lower bound for `C`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{FreeSpace, VariationalError};
use crate::calculus::OperatorContext;
use crate::graph::{Domain, VertexFunction};
use crate::optim::{projected_descent, DescentOptions, Objective};

#[derive(Debug, Clone, PartialEq)]
pub struct SobolevOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_power_iter: usize,
}

impl Default for SobolevOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            seed: 0,
            max_power_iter: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SobolevConstant {
    pub value: f64,
    /// A function attaining the value, normalized to `Φ = 1`.
    pub maximizer: VertexFunction,
    pub q: f64,
    /// True for finite `q`, where the value comes from a local ascent.
    pub lower_bound_only: bool,
}

/// Unit-ball geometry of `Φ = ‖∇^m ·‖_{L^p}` on a free space.
pub struct NormBall<'a> {
    ctx: &'a OperatorContext,
    space: &'a FreeSpace,
    m: usize,
    p: f64,
}

struct HyperplaneObjective<'a> {
    ball: &'a NormBall<'a>,
    /// Point with `ℓ·c0 = 1`.
    c0: Vec<f64>,
    /// Orthonormal basis of `ℓ^⊥`, as columns.
    directions: Vec<Vec<f64>>,
}

impl HyperplaneObjective<'_> {
    fn point(&self, z: &[f64]) -> Vec<f64> {
        let mut c = self.c0.clone();
        for (dir, &zi) in self.directions.iter().zip(z) {
            for (cj, dj) in c.iter_mut().zip(dir) {
                *cj += zi * dj;
            }
        }
        c
    }
}

impl Objective for HyperplaneObjective<'_> {
    type Error = VariationalError;

    fn value(&self, z: &[f64]) -> Result<f64, VariationalError> {
        let u = self.ball.space.embed(&self.point(z));
        Ok(self.ball.ctx.energy_power_dense(&u, self.ball.m, self.ball.p) / self.ball.p)
    }

    fn gradient(&self, z: &[f64]) -> Result<Vec<f64>, VariationalError> {
        let u = self.ball.space.embed(&self.point(z));
        let gc = self.ball.space.pull_back(&self.ball.ctx.mp_gradient_dense(&u, self.ball.m, self.ball.p));
        Ok(self
            .directions
            .iter()
            .map(|dir| dir.iter().zip(&gc).map(|(a, b)| a * b).sum())
            .collect())
    }
}

/// Columns 1.. of the Householder reflection sending `ℓ` to a multiple of `e_0`
/// (after reordering so the pivot is the largest entry).
fn orthogonal_complement(ell: &[f64]) -> Vec<Vec<f64>> {
    let dim = ell.len();
    let norm = ell.iter().map(|v| v * v).sum::<f64>().sqrt();
    let pivot = (0..dim)
        .max_by(|&a, &b| ell[a].abs().total_cmp(&ell[b].abs()))
        .expect("nonempty");
    let mut v: Vec<f64> = ell.iter().map(|x| x / norm).collect();
    v[pivot] += v[pivot].signum();
    let vv: f64 = v.iter().map(|x| x * x).sum();
    (0..dim)
        .filter(|&i| i != pivot)
        .map(|i| {
            (0..dim)
                .map(|j| f64::from(u8::from(i == j)) - 2.0 * v[j] * v[i] / vv)
                .collect()
        })
        .collect()
}

impl<'a> NormBall<'a> {
    pub fn new(ctx: &'a OperatorContext, space: &'a FreeSpace, m: usize, p: f64) -> Self {
        Self { ctx, space, m, p }
    }

    pub fn phi(&self, c: &[f64]) -> f64 {
        self.ctx.sobolev0_norm_dense(&self.space.embed(c), self.m, self.p)
    }

    /// `(σ(ℓ), argmax)`; the maximizer has `Φ = 1`. Zero functionals give `(0, 0)`.
    pub fn support(&self, ell: &[f64]) -> Result<(f64, Vec<f64>), VariationalError> {
        let dim = ell.len();
        let norm2: f64 = ell.iter().map(|v| v * v).sum();
        if norm2 == 0.0 {
            return Ok((0.0, vec![0.0; dim]));
        }
        let objective = HyperplaneObjective {
            ball: self,
            c0: ell.iter().map(|v| v / norm2).collect(),
            directions: orthogonal_complement(ell),
        };
        let opts = DescentOptions {
            tol: 1e-13,
            max_iter: 20_000,
            ..DescentOptions::default()
        };
        let out = projected_descent(&objective, vec![0.0; dim - 1], &opts)?;
        let c = objective.point(&out.x);
        let phi = self.phi(&c);
        if phi == 0.0 {
            return Err(VariationalError::DegenerateDomain);
        }
        Ok((1.0 / phi, c.iter().map(|v| v / phi).collect()))
    }
}

fn check_exponents(p: f64, q: f64) -> Result<(), VariationalError> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(VariationalError::InvalidParameters(format!("p = {p} must exceed 1")));
    }
    if !(q >= 1.0) {
        return Err(VariationalError::InvalidParameters(format!("q = {q} must be at least 1")));
    }
    Ok(())
}

/// The embedding constant for `W^{m,p}_0(Ω) ⊂ L^q(Ω)`; `q = f64::INFINITY` allowed.
pub fn sobolev_constant(
    domain: &Domain,
    m: usize,
    p: f64,
    q: f64,
    opts: &SobolevOptions,
) -> Result<SobolevConstant, VariationalError> {
    check_exponents(p, q)?;
    let ctx = OperatorContext::zero_extend(domain.clone());
    let space = FreeSpace::new(&ctx, m)?;
    let ball = NormBall::new(&ctx, &space, m, p);
    let (sup_value, sup_arg) = sup_norm_constant(&ball)?;
    if q.is_infinite() {
        return Ok(SobolevConstant {
            value: sup_value,
            maximizer: domain.function_on_omega(&space.embed(&sup_arg)),
            q,
            lower_bound_only: false,
        });
    }
    let dim = space.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let starts: Vec<Vec<f64>> = std::iter::once(sup_arg)
        .chain((0..opts.restarts).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()))
        .collect();
    let runs: Vec<(f64, Vec<f64>)> = starts
        .into_par_iter()
        .map(|c| power_ascent(&ball, c, q, opts.max_power_iter))
        .collect::<Result<_, _>>()?;
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.0 > runs[best].0 {
            best = i;
        }
    }
    let (value, c) = runs.into_iter().nth(best).expect("nonempty");
    Ok(SobolevConstant {
        value,
        maximizer: domain.function_on_omega(&space.embed(&c)),
        q,
        lower_bound_only: true,
    })
}

/// `max_x σ(e_x)`.
fn sup_norm_constant(ball: &NormBall<'_>) -> Result<(f64, Vec<f64>), VariationalError> {
    let omega = ball.ctx.domain().omega_indices();
    let results: Vec<(f64, Vec<f64>)> = omega
        .par_iter()
        .map(|&x| {
            let mut e = vec![0.0; ball.ctx.domain().graph().vertex_count()];
            e[x] = 1.0;
            ball.support(&ball.space.pull_back(&e))
        })
        .collect::<Result<_, _>>()?;
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.0 > results[best].0 {
            best = i;
        }
    }
    Ok(results.into_iter().nth(best).expect("omega is nonempty"))
}

/// Alternates `ℓ ← dual of u in L^q(m)` and `u ← argmax_{Φ≤1} ℓ·u`; each step
/// does not decrease `‖u‖_q/Φ(u)`.
fn power_ascent(ball: &NormBall<'_>, c: Vec<f64>, q: f64, max_iter: usize) -> Result<(f64, Vec<f64>), VariationalError> {
    let d = ball.ctx.domain();
    let ratio = |c: &[f64]| {
        let phi = ball.phi(c);
        if phi == 0.0 {
            0.0
        } else {
            ball.ctx.lp_norm_dense(&ball.space.embed(c), q) / phi
        }
    };
    let mut best_c = c;
    let mut best = ratio(&best_c);
    for _ in 0..max_iter {
        let u = ball.space.embed(&best_c);
        let mut w = vec![0.0; u.len()];
        for &x in d.omega_indices() {
            let s = u[x].signum() * f64::from(u8::from(u[x] != 0.0));
            w[x] = d.measure(x) * s * if q == 1.0 { 1.0 } else { u[x].abs().powf(q - 1.0) };
        }
        let ell = ball.space.pull_back(&w);
        let (_, next) = ball.support(&ell)?;
        let r = ratio(&next);
        if r <= best * (1.0 + 1e-13) {
            if r > best {
                best = r;
                best_c = next;
            }
            break;
        }
        best = r;
        best_c = next;
    }
    Ok((best, best_c))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::graph::WeightedGraph;

    fn three_path() -> Domain {
        let g = Arc::new(WeightedGraph::from_edges(&[(0, 1, 1.0), (1, 2, 1.0)]).unwrap());
        Domain::new(g, &[0, 1]).unwrap()
    }

    #[test]
    fn one_degree_of_freedom() {
        let d = three_path();
        let opts = SobolevOptions::default();
        let c = sobolev_constant(&d, 1, 2.0, f64::INFINITY, &opts).unwrap();
        assert!((c.value - 1.0).abs() < 1e-12);
        let c1 = sobolev_constant(&d, 1, 2.0, 1.0, &opts).unwrap();
        assert!((c1.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complement_is_orthonormal() {
        let ell = [0.3, -2.0, 0.5, 1.0];
        let cols = orthogonal_complement(&ell);
        assert_eq!(cols.len(), 3);
        for (i, a) in cols.iter().enumerate() {
            let dot_ell: f64 = a.iter().zip(&ell).map(|(x, y)| x * y).sum();
            assert!(dot_ell.abs() < 1e-14);
            for (j, b) in cols.iter().enumerate() {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn degenerate_domain() {
        let d = three_path();
        assert!(matches!(
            sobolev_constant(&d, 2, 2.0, f64::INFINITY, &SobolevOptions::default()),
            Err(VariationalError::DegenerateDomain)
        ));
    }
}
