use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::instance::{random_domain, random_problem_on, InstanceKind, InstanceParams};
use super::{
    check_h_inequality, check_oscillation, check_sign_inequality, oracle_mp_laplacian, CheckResult, MonotoneH,
    VerifyError,
};
use crate::calculus::OperatorContext;
use crate::graph::{Domain, VertexFunction};
use crate::solvers::{solve_semilinear_dirichlet, ProblemKind, SolveOptions};
use crate::variational::Nonlinearity;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Oscillation,
    H,
    Sign,
    Oracle,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Oscillation => "oscillation",
            Suite::H => "h",
            Suite::Sign => "sign",
            Suite::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "oscillation" => Ok(Suite::Oscillation),
            "h" => Ok(Suite::H),
            "sign" => Ok(Suite::Sign),
            "oracle" => Ok(Suite::Oracle),
            other => Err(format!("unknown suite '{other}' (expected oscillation, h, sign or oracle)")),
        }
    }
}

/// Where suite instances live: fresh random domains, or data drawn on one
/// fixed domain and exponent.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    Random(InstanceParams),
    Fixed { domain: Domain, p: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteInstance {
    pub index: usize,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    /// Set when the instance could not be solved or checked.
    pub error: Option<String>,
}

impl SuiteInstance {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.passed)
    }
}

const H_SAMPLES: usize = 8;
const TRUNCATION_ORDERS: [u32; 3] = [2, 8, 32];
const SIGN_LEVELS: usize = 4;
const ORACLE_ORDERS: [usize; 3] = [1, 2, 3];
const ORACLE_EXPONENTS: [f64; 3] = [1.5, 2.0, 3.0];

/// Runs `n` instances in parallel. Instance `i` uses seed `seed + i`;
/// results come back in instance order.
pub fn run_suite(suite: Suite, source: &InstanceSource, n: usize, seed: u64, opts: &SolveOptions) -> Vec<SuiteInstance> {
    (0..n)
        .into_par_iter()
        .map(|index| {
            let instance_seed = seed.wrapping_add(index as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(instance_seed);
            let opts = SolveOptions {
                seed: instance_seed,
                ..opts.clone()
            };
            let outcome = match suite {
                Suite::Oscillation => oscillation_instance(&mut rng, source, &opts),
                Suite::H => h_instance(&mut rng, source, &opts),
                Suite::Sign => sign_instance(&mut rng, source, &opts),
                Suite::Oracle => oracle_instance(&mut rng, source),
            };
            match outcome {
                Ok(checks) => SuiteInstance {
                    index,
                    seed: instance_seed,
                    checks,
                    error: None,
                },
                Err(e) => SuiteInstance {
                    index,
                    seed: instance_seed,
                    checks: Vec::new(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

fn draw_domain(rng: &mut ChaCha8Rng, source: &InstanceSource) -> Result<(Domain, f64, InstanceParams), VerifyError> {
    match source {
        InstanceSource::Random(params) => {
            let d = random_domain(rng, params)?;
            let p = *params
                .exponents
                .choose(rng)
                .ok_or_else(|| VerifyError::InvalidParameters("empty exponent list".into()))?;
            Ok((d, p, params.clone()))
        }
        InstanceSource::Fixed { domain, p } => Ok((domain.clone(), *p, InstanceParams::default())),
    }
}

fn describe(domain: &Domain) -> String {
    format!(
        "|V|={}, |Ω|={}, |Ω°|={}",
        domain.graph().vertex_count(),
        domain.omega_indices().len(),
        domain.interior_indices().len()
    )
}

fn with_context(mut checks: Vec<CheckResult>, prefix: &str) -> Vec<CheckResult> {
    for c in &mut checks {
        c.context = format!("{prefix}; {}", c.context);
    }
    checks
}

fn oscillation_instance(
    rng: &mut ChaCha8Rng,
    source: &InstanceSource,
    opts: &SolveOptions,
) -> Result<Vec<CheckResult>, VerifyError> {
    let (d, p, params) = draw_domain(rng, source)?;
    let spec = random_problem_on(rng, &d, p, 1, &params, InstanceKind::SemilinearDirichlet)?;
    let ProblemKind::SemilinearDirichlet { g, f, h } = spec.kind else {
        unreachable!("requested a SemilinearDirichlet instance")
    };
    let f2: VertexFunction = d.interior().into_iter().map(|x| (x, rng.random_range(-2.0..=2.0))).collect();
    let u1 = solve_semilinear_dirichlet(&d, p, &g, &f, &h, opts)?.solution;
    let u2 = solve_semilinear_dirichlet(&d, p, &g, &f2, &h, opts)?.solution;
    let check = check_oscillation(&d, &g, &u1, &u2, &f, &f2, p)?;
    Ok(with_context(vec![check], &describe(&d)))
}

/// Solves `−Δ_p u = f`, `u = 0` on `∂Ω`, for random `f`.
fn poisson_instance(
    rng: &mut ChaCha8Rng,
    source: &InstanceSource,
    opts: &SolveOptions,
) -> Result<(Domain, f64, VertexFunction, VertexFunction), VerifyError> {
    let (d, p, _) = draw_domain(rng, source)?;
    let f: VertexFunction = d.interior().into_iter().map(|x| (x, rng.random_range(-2.0..=2.0))).collect();
    let zero = VertexFunction::constant(&d.omega(), 0.0);
    let u = solve_semilinear_dirichlet(&d, p, &Nonlinearity::zero(&d), &f, &zero, opts)?.solution;
    Ok((d, p, f, u))
}

fn random_level(rng: &mut ChaCha8Rng, sup: f64) -> f64 {
    if sup > 0.0 {
        // (0, sup]
        sup * (1.0 - rng.random_range(0.0..1.0))
    } else {
        1.0
    }
}

fn h_instance(rng: &mut ChaCha8Rng, source: &InstanceSource, opts: &SolveOptions) -> Result<Vec<CheckResult>, VerifyError> {
    let (d, p, f, u) = poisson_instance(rng, source, opts)?;
    let sup = u.sup_norm();
    let mut hs = vec![MonotoneH::Identity];
    for _ in 0..H_SAMPLES {
        hs.push(MonotoneH::random(rng, sup.max(1e-3) * 1.5));
    }
    let level = random_level(rng, sup);
    let orders: Vec<u32> = TRUNCATION_ORDERS
        .iter()
        .copied()
        .filter(|&n| f64::from(n) * level > 1.0)
        .collect();
    if orders.is_empty() {
        hs.push(MonotoneH::truncation(level, (1.0 / level).floor() as u32 + 1)?);
    }
    for n in orders {
        hs.push(MonotoneH::truncation(level, n)?);
    }
    let mut checks = Vec::new();
    for h in &hs {
        checks.extend(check_h_inequality(&d, &u, &f, h, p)?);
    }
    Ok(with_context(checks, &describe(&d)))
}

fn sign_instance(rng: &mut ChaCha8Rng, source: &InstanceSource, opts: &SolveOptions) -> Result<Vec<CheckResult>, VerifyError> {
    let (d, p, f, u) = poisson_instance(rng, source, opts)?;
    let sup = u.sup_norm();
    let mut checks = Vec::new();
    for _ in 0..SIGN_LEVELS {
        let level = random_level(rng, sup);
        checks.extend(check_sign_inequality(&d, &u, &f, level, p)?);
    }
    Ok(with_context(checks, &describe(&d)))
}

/// Compares `L_{m,p}` against the literal-summation oracle on every interior
/// vertex (relative `1e-11`) and, for `m = 1`, against `−Δ_p` (relative `1e-10`).
fn oracle_instance(rng: &mut ChaCha8Rng, source: &InstanceSource) -> Result<Vec<CheckResult>, VerifyError> {
    let (d, p, _) = draw_domain(rng, source)?;
    let p = match source {
        InstanceSource::Random(_) => *ORACLE_EXPONENTS.choose(rng).expect("nonempty"),
        InstanceSource::Fixed { .. } => p,
    };
    let m = *ORACLE_ORDERS.choose(rng).expect("nonempty");
    let ctx = if rng.random_bool(0.5) {
        OperatorContext::zero_extend(d.clone())
    } else {
        OperatorContext::restrict(d.clone())
    };
    let u: VertexFunction = d.omega().into_iter().map(|x| (x, rng.random_range(-1.0..=1.0))).collect();
    let prefix = format!("{}, m={m}, p={p}, mode={:?}", describe(&d), ctx.mode());
    let mut checks = Vec::new();
    for x in d.interior() {
        let fast = ctx.mp_laplacian(&u, m, p, x)?.value;
        let slow = oracle_mp_laplacian(&ctx, &u, m, p, x)?;
        let scale = fast.abs().max(slow.abs());
        checks.push(CheckResult::new(
            "mp_laplacian_oracle",
            (fast - slow).abs(),
            0.0,
            1e-11 * scale,
            format!("{prefix}, x={x}"),
        ));
        if m == 1 {
            let minus_plap = -ctx.p_laplacian(&u, p, x)?;
            let scale = fast.abs().max(minus_plap.abs());
            checks.push(CheckResult::new(
                "first_order_duality",
                (fast - minus_plap).abs(),
                0.0,
                1e-10 * scale,
                format!("{prefix}, x={x}"),
            ));
        }
    }
    Ok(checks)
}
