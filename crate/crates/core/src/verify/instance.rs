use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::VerifyError;
use crate::calculus::OperatorContext;
use crate::graph::{Domain, VertexFunction, WeightedGraph};
use crate::solvers::{ProblemKind, ProblemSpec};
use crate::variational::{sobolev_constant, threshold_lambda, FreeSpace, Nonlinearity, SobolevOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InstanceKind {
    YamabeMp,
    SemilinearDirichlet,
    YamabeWellPosed,
    KazdanWarner,
    SmallDataLaplace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceParams {
    pub min_vertices: usize,
    pub max_vertices: usize,
    /// Extra edges beyond the spanning tree, at most this many.
    pub max_extra_edges: usize,
    /// Exponents drawn for solved kinds.
    pub exponents: Vec<f64>,
    /// Orders drawn for `YamabeMp`.
    pub orders: Vec<usize>,
    /// `λ = lambda_fraction · Λ` for `YamabeMp`.
    pub lambda_fraction: f64,
    /// Half-width of the uniform draw for `f` in `SmallDataLaplace`.
    pub small_data: f64,
    pub max_retries: usize,
}

impl Default for InstanceParams {
    fn default() -> Self {
        Self {
            min_vertices: 4,
            max_vertices: 10,
            max_extra_edges: 4,
            exponents: vec![2.0, 3.0],
            orders: vec![1, 2, 3],
            lambda_fraction: 0.9,
            small_data: 0.1,
            max_retries: 100,
        }
    }
}

/// A connected random graph (random tree plus extra edges, weights uniform
/// in `[0.5, 2]`) with a connected `Ω` that has a nonempty boundary and
/// interior.
pub fn random_domain<R: Rng + ?Sized>(rng: &mut R, params: &InstanceParams) -> Result<Domain, VerifyError> {
    if params.min_vertices < 3 || params.max_vertices < params.min_vertices {
        return Err(VerifyError::InvalidParameters(format!(
            "vertex bounds [{}, {}] need 3 ≤ min ≤ max",
            params.min_vertices, params.max_vertices
        )));
    }
    for _ in 0..params.max_retries.max(1) {
        let n = rng.random_range(params.min_vertices..=params.max_vertices);
        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        let mut adjacent = vec![vec![false; n]; n];
        let mut add = |x: usize, y: usize, rng: &mut R, edges: &mut Vec<_>| {
            if x != y && !adjacent[x][y] {
                adjacent[x][y] = true;
                adjacent[y][x] = true;
                edges.push((x, y, rng.random_range(0.5..=2.0)));
            }
        };
        for v in 1..n {
            let parent = rng.random_range(0..v);
            add(parent, v, rng, &mut edges);
        }
        let extra = rng.random_range(0..=params.max_extra_edges);
        for _ in 0..extra {
            let x = rng.random_range(0..n);
            let y = rng.random_range(0..n);
            add(x, y, rng, &mut edges);
        }
        let graph = Arc::new(WeightedGraph::from_edges(&edges)?);

        // Grow Ω from a random seed vertex through random frontier picks.
        let size = rng.random_range(3..n.max(4));
        let mut in_omega = vec![false; n];
        let start = rng.random_range(0..n);
        in_omega[start] = true;
        let mut omega = vec![start];
        while omega.len() < size.min(n - 1) {
            let frontier: Vec<usize> = omega
                .iter()
                .flat_map(|&x| graph.neighbors(x).iter().map(|&(y, _)| y))
                .filter(|&y| !in_omega[y])
                .collect();
            let Some(&next) = frontier.choose(rng) else { break };
            in_omega[next] = true;
            omega.push(next);
        }
        let ids: Vec<usize> = omega.iter().map(|&x| graph.id(x)).collect();
        let domain = Domain::new_connected(graph, &ids)?;
        if domain.require_solvable().is_ok() {
            return Ok(domain);
        }
    }
    Err(VerifyError::InvalidParameters("no admissible domain within the retry budget".into()))
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, ids: &[usize], lo: f64, hi: f64) -> VertexFunction {
    ids.iter().map(|&id| (id, rng.random_range(lo..=hi))).collect()
}

/// Problem data of the given kind on a fixed domain.
///
/// * `YamabeMp`: `f = a − b·sgn(t)|t|^q`, `a, b ∈ [0.5, 2]`, `q ∈ [p−1, p+1]`,
///   `λ = lambda_fraction · Λ`.
/// * `SemilinearDirichlet`: `g = c·sgn(t)|t|^r`, `c ∈ [0.5, 2]`,
///   `r ∈ {1, 2, 3}`, `f ∈ [−2, 2]`, `h ∈ [−1, 1]`.
/// * `YamabeWellPosed`: `a ∈ [0, 2]`, `b ∈ [0.5, 2]`, `q ∈ [p−1, p+1]`.
/// * `KazdanWarner`: `α, β ∈ [0, 1]`, `f ∈ [−2, 2]`, `h ∈ [−1, 1]`.
/// * `SmallDataLaplace`: `g = t³`, `f ∈ [−δ, δ]` with `δ = small_data`, `p = 2`.
pub fn random_problem_on<R: Rng + ?Sized>(
    rng: &mut R,
    domain: &Domain,
    p: f64,
    m: usize,
    params: &InstanceParams,
    kind: InstanceKind,
) -> Result<ProblemSpec, VerifyError> {
    let omega = domain.omega();
    let interior = domain.interior();
    let boundary = domain.boundary();
    let boundary_data = |rng: &mut R| -> VertexFunction {
        let mut h = uniform(rng, &boundary, -1.0, 1.0);
        for &x in &interior {
            h.set(x, 0.0).expect("finite");
        }
        h
    };
    let kind = match kind {
        InstanceKind::YamabeMp => {
            let a = uniform(rng, &omega, 0.5, 2.0);
            let b = uniform(rng, &omega, 0.5, 2.0);
            let q = p - 1.0 + rng.random_range(0.0..=2.0);
            let norm_a = domain.integrate(&a)?;
            let norm_b = domain.integrate(&b)?;
            let c = sobolev_constant(domain, m, p, f64::INFINITY, &SobolevOptions::default())?.value;
            let lambda = params.lambda_fraction * threshold_lambda(p, q, c, norm_a, norm_b)?.lambda;
            ProblemKind::YamabeMp {
                lambda,
                f: Nonlinearity::yamabe(domain, &a, &b, q)?,
            }
        }
        InstanceKind::SemilinearDirichlet => {
            let c = uniform(rng, &omega, 0.5, 2.0);
            let r = *[1.0, 2.0, 3.0].choose(rng).expect("nonempty");
            let zero = VertexFunction::constant(&omega, 0.0);
            ProblemKind::SemilinearDirichlet {
                g: Nonlinearity::power(domain, &zero, &c, r)?,
                f: uniform(rng, &interior, -2.0, 2.0),
                h: boundary_data(rng),
            }
        }
        InstanceKind::YamabeWellPosed => ProblemKind::YamabeWellPosed {
            a: uniform(rng, &omega, 0.0, 2.0),
            b: uniform(rng, &omega, 0.5, 2.0),
            q: p - 1.0 + rng.random_range(0.0..=2.0),
        },
        InstanceKind::KazdanWarner => ProblemKind::KazdanWarner {
            alpha: uniform(rng, &omega, 0.0, 1.0),
            beta: uniform(rng, &omega, 0.0, 1.0),
            f: uniform(rng, &interior, -2.0, 2.0),
            h: boundary_data(rng),
        },
        InstanceKind::SmallDataLaplace => {
            let zero = VertexFunction::constant(&omega, 0.0);
            let one = VertexFunction::constant(&omega, 1.0);
            let delta = params.small_data;
            ProblemKind::SmallDataLaplace {
                g: Nonlinearity::power(domain, &zero, &one, 3.0)?,
                f: uniform(rng, &interior, -delta, delta),
            }
        }
    };
    Ok(ProblemSpec {
        domain: domain.clone(),
        m,
        p,
        kind,
    })
}

/// Deterministic random problem: the same seed and parameters give the same
/// spec bit for bit.
pub fn random_instance(seed: u64, params: &InstanceParams, kind: InstanceKind) -> Result<ProblemSpec, VerifyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |rng: &mut ChaCha8Rng, xs: &[f64]| -> Result<f64, VerifyError> {
        xs.choose(rng)
            .copied()
            .ok_or_else(|| VerifyError::InvalidParameters("empty exponent list".into()))
    };
    match kind {
        InstanceKind::SmallDataLaplace => {
            let d = random_domain(&mut rng, params)?;
            random_problem_on(&mut rng, &d, 2.0, 1, params, kind)
        }
        InstanceKind::YamabeMp => {
            for _ in 0..params.max_retries.max(1) {
                let d = random_domain(&mut rng, params)?;
                let p = pick(&mut rng, &params.exponents)?;
                let m = *params
                    .orders
                    .choose(&mut rng)
                    .ok_or_else(|| VerifyError::InvalidParameters("empty order list".into()))?;
                // Higher orders need room for the boundary conditions.
                if FreeSpace::new(&OperatorContext::zero_extend(d.clone()), m).is_err() {
                    continue;
                }
                return random_problem_on(&mut rng, &d, p, m, params, kind);
            }
            Err(VerifyError::InvalidParameters("no domain admits the drawn order".into()))
        }
        _ => {
            let d = random_domain(&mut rng, params)?;
            let p = pick(&mut rng, &params.exponents)?;
            random_problem_on(&mut rng, &d, p, 1, params, kind)
        }
    }
}
