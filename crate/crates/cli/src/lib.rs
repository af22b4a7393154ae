//! The `graphpde` command line.
//!
//! Exit codes: 0 success, 1 a solve that did not converge or a failed check,
//! 2 a parse or validation error (diagnostic on standard error).

pub mod jsonl;
pub mod problem;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use graphpde::calculus::OperatorContext;
use graphpde::graph::{Domain, VertexFunction, VertexId};
use graphpde::solvers::{solve, SolveError, SolveReport, SolveStatus};
use graphpde::variational::{lambda_rho, sobolev_constant, threshold_lambda, SobolevOptions};
use graphpde::verify::{oracle_mp_laplacian, oracle_sobolev_constant, run_suite, CheckResult, InstanceParams, InstanceSource, Suite};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use jsonl::{number, Record};
use problem::{load_graph, omega_from_args, ProblemError, ProblemFile};

pub const SEED_ENV: &str = "GRAPHPDE_SEED";

#[derive(Debug, Parser)]
#[command(name = "graphpde", version, about = "Semilinear (m,p)-Laplacian problems on weighted graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a graph file and optionally a domain; print counts, measures, ∂Ω and Ω°.
    Validate {
        graph: PathBuf,
        /// Vertex ids of Ω.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        omega: Vec<VertexId>,
        /// Domain file with one `omega ...` line.
        #[arg(long)]
        domain: Option<PathBuf>,
    },
    /// Solve the problem described by a problem file.
    Solve {
        problem: PathBuf,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Embedding constant, existence threshold and a CSV sample of λ_ρ.
    Threshold {
        problem: PathBuf,
        #[arg(long, default_value_t = 41)]
        samples: usize,
    },
    /// Embedding constant of W^{m,p}_0 into L^q with a sampled lower bound.
    SobolevConstant {
        graph: PathBuf,
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        omega: Vec<VertexId>,
        #[arg(long)]
        domain: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// `inf` for the sup norm.
        #[arg(long, default_value = "inf")]
        q: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a verification suite on the problem's domain (or on random domains).
    Verify {
        problem: PathBuf,
        #[arg(long, value_parser = parse_suite)]
        suite: Suite,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Draw a fresh random domain per instance instead of using the problem's.
        #[arg(long)]
        random: bool,
    },
    /// Compare the calculus against literal-summation oracles on the problem's domain.
    Oracle {
        problem: PathBuf,
        #[arg(long, default_value_t = 4)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse()
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("{0}")]
    Invalid(String),
    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string())
}

/// Runs the CLI with `GRAPHPDE_SEED` taken from the process environment.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let env_seed = std::env::var(SEED_ENV).ok();
    run_with_env(args, env_seed.as_deref(), out, err)
}

/// Runs the CLI with an explicit value for `GRAPHPDE_SEED`.
pub fn run_with_env<I, T>(args: I, env_seed: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                2
            } else {
                let _ = write!(out, "{}", e.render());
                0
            };
            return code;
        }
    };
    let result = dispatch(cli.command, env_seed, out);
    let _ = out.flush();
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn dispatch(command: Command, env_seed: Option<&str>, out: &mut dyn Write) -> Result<bool, CliError> {
    match command {
        Command::Validate { graph, omega, domain } => validate(&graph, &omega, domain.as_deref(), out),
        Command::Solve { problem, out: path } => {
            let pf = load_problem(&problem, env_seed)?;
            solve_command(&pf, path.as_deref(), out)
        }
        Command::Threshold { problem, samples } => {
            let pf = load_problem(&problem, env_seed)?;
            threshold_command(&pf, samples, out)
        }
        Command::SobolevConstant {
            graph,
            omega,
            domain,
            m,
            p,
            q,
            samples,
            seed,
        } => {
            let seed = resolve_seed(seed, env_seed, 0)?;
            sobolev_command(&graph, &omega, domain.as_deref(), m, p, q, samples, seed, out)
        }
        Command::Verify {
            problem,
            suite,
            n,
            seed,
            random,
        } => {
            let mut pf = load_problem(&problem, env_seed)?;
            pf.seed = resolve_seed(seed, None, pf.seed)?;
            pf.options.seed = pf.seed;
            verify_command(&pf, suite, n, random, out)
        }
        Command::Oracle { problem, samples, seed } => {
            let mut pf = load_problem(&problem, env_seed)?;
            pf.seed = resolve_seed(seed, None, pf.seed)?;
            pf.options.seed = pf.seed;
            oracle_command(&pf, samples, out)
        }
    }
}

/// Flag beats environment beats file.
fn resolve_seed(flag: Option<u64>, env: Option<&str>, file: u64) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match env {
        Some(text) => text
            .trim()
            .parse()
            .map_err(|_| CliError::Invalid(format!("{SEED_ENV} must be a nonnegative integer, got `{text}`"))),
        None => Ok(file),
    }
}

fn load_problem(path: &Path, env_seed: Option<&str>) -> Result<ProblemFile, CliError> {
    let mut pf = ProblemFile::load(path)?;
    pf.seed = resolve_seed(None, env_seed, pf.seed)?;
    pf.options.seed = pf.seed;
    Ok(pf)
}

fn line(out: &mut dyn Write, record: Record) -> Result<(), CliError> {
    writeln!(out, "{}", record.finish())?;
    Ok(())
}

fn validate(graph: &Path, omega: &[VertexId], domain_file: Option<&Path>, out: &mut dyn Write) -> Result<bool, CliError> {
    let g = load_graph(graph)?;
    let domain = match omega_from_args(omega, domain_file)? {
        Some(omega) => Some(Domain::new(g.clone(), &omega).map_err(invalid)?),
        None => None,
    };
    line(
        out,
        Record::new("graph")
            .int("vertices", g.vertex_count() as u64)
            .int("edges", g.edge_count() as u64),
    )?;
    for (i, &id) in g.ids().iter().enumerate() {
        line(
            out,
            Record::new("vertex")
                .int("id", id as u64)
                .int("degree", g.neighbors(i).len() as u64)
                .num("measure", g.measures()[i]),
        )?;
    }
    let Some(d) = domain else {
        return Ok(true);
    };
    let problem = match d.require_solvable() {
        Err(e) => Some(e.to_string()),
        Ok(()) if !d.is_connected() => Some("omega is not connected as an induced subgraph".to_string()),
        Ok(()) => None,
    };
    let mut rec = Record::new("domain")
        .ints("omega", &d.omega())
        .ints("boundary", &d.boundary())
        .ints("interior", &d.interior())
        .bool("connected", d.is_connected())
        .bool("solvable", problem.is_none());
    if let Some(msg) = &problem {
        rec = rec.str("problem", msg);
    }
    line(out, rec)?;
    Ok(problem.is_none())
}

fn report_record(pf: &ProblemFile, r: &SolveReport) -> Record {
    let d = &pf.domain;
    let solution = d.omega().into_iter().map(|x| (x, r.solution.get(x).unwrap_or(f64::NAN)));
    Record::new("solve_report")
        .str("kind", &pf.kind)
        .int("seed", pf.seed)
        .str("status", r.status.as_str())
        .num("residual_inf", r.residual_inf)
        .bool("boundary_ok", r.boundary_ok)
        .opt_bool("interior", r.interior_flag)
        .int("iterations", r.iterations as u64)
        .opt_num("energy_final", r.energy_final)
        .opt_num("lambda_used", r.lambda_used)
        .opt_num("lambda_threshold", r.lambda_threshold)
        .opt_num("rho_used", r.rho_used)
        .opt_num("embedding_constant", r.embedding_constant)
        .opt_num("uniqueness_gap", r.uniqueness_gap)
        .nums("newton_residuals", &r.newton_residuals)
        .nums("energy_trace", &r.energy_trace)
        .vertex_map("solution", solution)
        .strs("notes", &r.notes)
}

fn solve_command(pf: &ProblemFile, path: Option<&Path>, out: &mut dyn Write) -> Result<bool, CliError> {
    let spec = pf.spec()?;
    let (record, status, residual) = match solve(&spec, &pf.options) {
        Ok(r) => (report_record(pf, &r), r.status, Some(r.residual_inf)),
        Err(e @ (SolveError::Graph(_) | SolveError::Calculus(_) | SolveError::Variational(_))) => {
            return Err(invalid(e))
        }
        Err(e) => {
            let status = match e {
                SolveError::HypothesisViolated(_) | SolveError::NonMonotoneG { .. } => SolveStatus::HypothesisViolated,
                _ => SolveStatus::Diverged,
            };
            let rec = Record::new("solve_report")
                .str("kind", &pf.kind)
                .int("seed", pf.seed)
                .str("status", status.as_str())
                .str("error", &e.to_string());
            (rec, status, None)
        }
    };
    let summary = Record::new("solve_summary")
        .str("status", status.as_str())
        .opt_num("residual_inf", residual);
    match path {
        Some(path) => {
            let mut file = std::fs::File::create(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
            writeln!(file, "{}", record.finish())?;
        }
        None => line(out, record)?,
    }
    line(out, summary)?;
    Ok(status == SolveStatus::Converged)
}

fn l1_norm(d: &Domain, f: &VertexFunction, name: &str) -> Result<f64, CliError> {
    let dense = d.dense(f).map_err(invalid)?;
    let mut total = 0.0;
    for &x in d.omega_indices() {
        if dense[x] < 0.0 {
            return Err(CliError::Invalid(format!(
                "coefficient `{name}` must be nonnegative (vertex {})",
                d.graph().id(x)
            )));
        }
        total += dense[x] * d.measure(x);
    }
    Ok(total)
}

fn csv_number(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else {
        number(x)
    }
}

fn threshold_command(pf: &ProblemFile, samples: usize, out: &mut dyn Write) -> Result<bool, CliError> {
    let (q, a, b) = pf.growth()?;
    let d = &pf.domain;
    let norm_a = l1_norm(d, a, "a")?;
    let norm_b = l1_norm(d, b, "b")?;
    let c = sobolev_constant(
        d,
        pf.m,
        pf.p,
        f64::INFINITY,
        &SobolevOptions {
            seed: pf.seed,
            ..SobolevOptions::default()
        },
    )
    .map_err(invalid)?
    .value;
    let t = threshold_lambda(pf.p, q, c, norm_a, norm_b).map_err(invalid)?;
    writeln!(out, "# embedding_constant = {}", csv_number(c))?;
    writeln!(out, "# rho_star = {}", csv_number(t.rho_star))?;
    writeln!(out, "# threshold = {}", csv_number(t.lambda))?;
    writeln!(out, "rho,lambda_rho")?;
    let center = if t.rho_star.is_finite() { t.rho_star.log10() } else { 0.0 };
    for i in 0..samples {
        let s = if samples > 1 { i as f64 / (samples - 1) as f64 } else { 0.5 };
        let rho = 10f64.powf(center - 3.0 + 6.0 * s);
        let value = lambda_rho(rho, pf.p, q, c, norm_a, norm_b).map_err(invalid)?;
        writeln!(out, "{},{}", csv_number(rho), csv_number(value))?;
    }
    Ok(true)
}

#[allow(clippy::too_many_arguments)]
fn sobolev_command(
    graph: &Path,
    omega: &[VertexId],
    domain_file: Option<&Path>,
    m: usize,
    p: f64,
    q: f64,
    samples: usize,
    seed: u64,
    out: &mut dyn Write,
) -> Result<bool, CliError> {
    let g = load_graph(graph)?;
    let omega = omega_from_args(omega, domain_file)?
        .ok_or_else(|| CliError::Invalid("sobolev-constant needs --omega or --domain".into()))?;
    let d = Domain::new_connected(g, &omega).map_err(invalid)?;
    d.require_solvable().map_err(invalid)?;
    let c = sobolev_constant(&d, m, p, q, &SobolevOptions { seed, ..SobolevOptions::default() }).map_err(invalid)?;
    let lower = oracle_sobolev_constant(&d, m, p, q, samples, seed).map_err(invalid)?;
    let consistent = lower <= c.value * (1.0 + 1e-9);
    line(
        out,
        Record::new("sobolev_constant")
            .int("m", m as u64)
            .num("p", p)
            .opt_num("q", q.is_finite().then_some(q))
            .bool("q_infinite", q.is_infinite())
            .num("constant", c.value)
            .bool("lower_bound_only", c.lower_bound_only)
            .num("oracle_lower_bound", lower)
            .int("oracle_samples", samples as u64)
            .int("seed", seed)
            .bool("consistent", consistent),
    )?;
    Ok(consistent)
}

fn check_record(suite: &str, instance: usize, seed: u64, c: &CheckResult) -> Record {
    Record::new("check")
        .str("suite", suite)
        .int("instance", instance as u64)
        .int("seed", seed)
        .str("check", &c.name)
        .num("lhs", c.lhs)
        .num("rhs", c.rhs)
        .num("slack", c.slack)
        .num("tolerance", c.tolerance)
        .bool("passed", c.passed)
        .str("context", &c.context)
}

fn verify_command(pf: &ProblemFile, suite: Suite, n: usize, random: bool, out: &mut dyn Write) -> Result<bool, CliError> {
    let source = if random {
        InstanceSource::Random(InstanceParams::default())
    } else {
        InstanceSource::Fixed {
            domain: pf.domain.clone(),
            p: pf.p,
        }
    };
    let results = run_suite(suite, &source, n, pf.seed, &pf.options);
    let (mut checks, mut failed_checks, mut failed_instances) = (0u64, 0u64, 0u64);
    for inst in &results {
        for c in &inst.checks {
            checks += 1;
            failed_checks += u64::from(!c.passed);
            line(out, check_record(suite.name(), inst.index, inst.seed, c))?;
        }
        if let Some(e) = &inst.error {
            line(
                out,
                Record::new("instance_error")
                    .str("suite", suite.name())
                    .int("instance", inst.index as u64)
                    .int("seed", inst.seed)
                    .str("error", e),
            )?;
        }
        failed_instances += u64::from(!inst.passed());
    }
    let passed = failed_instances == 0;
    line(
        out,
        Record::new("verify_summary")
            .str("suite", suite.name())
            .int("seed", pf.seed)
            .int("instances", results.len() as u64)
            .int("checks", checks)
            .int("failed_checks", failed_checks)
            .int("failed_instances", failed_instances)
            .bool("passed", passed),
    )?;
    Ok(passed)
}

fn oracle_command(pf: &ProblemFile, samples: usize, out: &mut dyn Write) -> Result<bool, CliError> {
    let d = &pf.domain;
    let (m, p) = (pf.m, pf.p);
    if m == 0 || !(p > 1.0 && p.is_finite()) {
        return Err(CliError::Invalid(format!("oracle needs m ≥ 1 and finite p > 1, got m={m}, p={p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(pf.seed);
    let mut all = Vec::new();
    for sample in 0..samples {
        let u: VertexFunction = d.omega().into_iter().map(|x| (x, rng.random_range(-1.0..=1.0))).collect();
        for ctx in [OperatorContext::zero_extend(d.clone()), OperatorContext::restrict(d.clone())] {
            let context = |x: VertexId| format!("sample={sample}, mode={:?}, m={m}, p={p}, x={x}", ctx.mode());
            for x in d.interior() {
                let fast = ctx.mp_laplacian(&u, m, p, x).map_err(invalid)?.value;
                let slow = oracle_mp_laplacian(&ctx, &u, m, p, x).map_err(invalid)?;
                let scale = fast.abs().max(slow.abs());
                all.push(CheckResult::new("mp_laplacian_oracle", (fast - slow).abs(), 0.0, 1e-11 * scale, context(x)));
                if m == 1 {
                    let minus_plap = -ctx.p_laplacian(&u, p, x).map_err(invalid)?;
                    let scale = fast.abs().max(minus_plap.abs());
                    all.push(CheckResult::new(
                        "first_order_duality",
                        (fast - minus_plap).abs(),
                        0.0,
                        1e-10 * scale,
                        context(x),
                    ));
                }
            }
        }
    }
    let q = pf.q.unwrap_or(f64::INFINITY);
    let c = sobolev_constant(d, m, p, q, &SobolevOptions { seed: pf.seed, ..SobolevOptions::default() })
        .map_err(invalid)?
        .value;
    let lower = oracle_sobolev_constant(d, m, p, q, 1000, pf.seed).map_err(invalid)?;
    all.push(CheckResult::new(
        "sobolev_lower_bound",
        lower,
        c,
        1e-9 * c,
        format!("m={m}, p={p}, q={q}, samples=1000"),
    ));
    let mut failed = 0u64;
    for check in &all {
        failed += u64::from(!check.passed);
        line(out, check_record("oracle", 0, pf.seed, check))?;
    }
    line(
        out,
        Record::new("oracle_summary")
            .int("seed", pf.seed)
            .int("checks", all.len() as u64)
            .int("failed_checks", failed)
            .bool("passed", failed == 0),
    )?;
    Ok(failed == 0)
}
