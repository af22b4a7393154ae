//! Problem files: `key = value` lines, `#` comments.
//!
//! ```text
//! graph = path3.graph          # relative to the problem file
//! omega = 0 1
//! kind = yamabe_mp
//! m = 1
//! p = 2
//! q = 1
//! lambda = 0.2
//! coef a = const 1
//! coef b = 0:1 1:2
//! f_expr = a - b*powsgn(t, q)
//! seed = 7
//! ```
//!
//! Vertex data (`coef NAME`, `f`, `h`) is either `const V` or `id:value` pairs.
//! `param NAME = V` binds an extra scalar for expressions; `q`, `p`, `lambda`
//! and `m` are bound automatically when set.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use graphpde::expr::{parse_expression_with, Expr, ExprError};
use graphpde::graph::text::{parse_graph, parse_id_list, parse_omega};
use graphpde::graph::{Domain, GraphError, VertexFunction, VertexId};
use graphpde::solvers::{ProblemKind, ProblemSpec, SolveOptions};
use graphpde::variational::Nonlinearity;
use thiserror::Error;

pub const KINDS: [&str; 5] = [
    "yamabe_mp",
    "semilinear_dirichlet",
    "yamabe_wellposed",
    "kazdan_warner",
    "small_data_laplace",
];

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{path}: {source}")]
    Graph {
        path: String,
        #[source]
        source: GraphError,
    },
    #[error("{0}")]
    Invalid(String),
}

fn line_err(line: usize, message: impl Into<String>) -> ProblemError {
    ProblemError::Line {
        line,
        message: message.into(),
    }
}

pub fn read_text(path: &Path) -> Result<String, ProblemError> {
    std::fs::read_to_string(path).map_err(|source| ProblemError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_graph(path: &Path) -> Result<Arc<graphpde::graph::WeightedGraph>, ProblemError> {
    let text = read_text(path)?;
    parse_graph(&text).map(Arc::new).map_err(|source| ProblemError::Graph {
        path: path.display().to_string(),
        source,
    })
}

/// A value with the file line it came from; `column` is where the value starts.
#[derive(Debug, Clone)]
struct Located {
    line: usize,
    column: usize,
    text: String,
}

#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub graph_path: PathBuf,
    pub domain: Domain,
    pub kind: String,
    pub m: usize,
    pub p: f64,
    pub q: Option<f64>,
    pub lambda: Option<f64>,
    pub coefficients: BTreeMap<String, VertexFunction>,
    pub params: BTreeMap<String, f64>,
    pub f_expr: Option<Expr>,
    pub g_expr: Option<Expr>,
    pub f_data: Option<VertexFunction>,
    pub h: Option<VertexFunction>,
    pub seed: u64,
    pub options: SolveOptions,
}

fn parse_num(v: &Located, key: &str) -> Result<f64, ProblemError> {
    let x: f64 = v
        .text
        .parse()
        .map_err(|_| line_err(v.line, format!("`{key}` needs a number, got `{}`", v.text)))?;
    if x.is_nan() {
        return Err(line_err(v.line, format!("`{key}` is NaN")));
    }
    Ok(x)
}

fn parse_int<T: std::str::FromStr>(v: &Located, key: &str) -> Result<T, ProblemError> {
    v.text
        .parse()
        .map_err(|_| line_err(v.line, format!("`{key}` needs a nonnegative integer, got `{}`", v.text)))
}

fn parse_bool(v: &Located, key: &str) -> Result<bool, ProblemError> {
    match v.text.as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(line_err(v.line, format!("`{key}` needs true or false, got `{other}`"))),
    }
}

/// `const V` expands to `fill`; otherwise `id:value` pairs.
fn parse_vertex_values(v: &Located, fill: &[VertexId]) -> Result<VertexFunction, ProblemError> {
    let tokens: Vec<&str> = v.text.split_whitespace().collect();
    if let ["const", value] = tokens.as_slice() {
        let x: f64 = value
            .parse()
            .map_err(|_| line_err(v.line, format!("invalid constant `{value}`")))?;
        if !x.is_finite() {
            return Err(line_err(v.line, format!("constant `{value}` is not finite")));
        }
        return Ok(VertexFunction::constant(fill, x));
    }
    if tokens.is_empty() {
        return Err(line_err(v.line, "empty vertex data"));
    }
    let mut out = VertexFunction::new();
    for tok in tokens {
        let (id, value) = tok
            .split_once(':')
            .ok_or_else(|| line_err(v.line, format!("expected `id:value`, got `{tok}`")))?;
        let id: VertexId = id
            .parse()
            .map_err(|_| line_err(v.line, format!("invalid vertex id `{id}`")))?;
        let x: f64 = value
            .parse()
            .map_err(|_| line_err(v.line, format!("invalid value `{value}`")))?;
        if out.get(id).is_some() {
            return Err(line_err(v.line, format!("vertex {id} given twice")));
        }
        out.set(id, x).map_err(|e| line_err(v.line, e.to_string()))?;
    }
    Ok(out)
}

fn require_on(
    data: &VertexFunction,
    vertices: &[VertexId],
    what: &str,
    line: usize,
    domain: &Domain,
) -> Result<(), ProblemError> {
    for &x in vertices {
        if data.get(x).is_none() {
            return Err(line_err(line, format!("{what} has no value at vertex {x}")));
        }
    }
    for (x, _) in data.iter() {
        if domain.graph().index_of(x).is_none() {
            return Err(line_err(line, format!("{what} names unknown vertex {x}")));
        }
    }
    Ok(())
}

fn parse_expr(v: &Located, known: &dyn Fn(&str) -> bool) -> Result<Expr, ProblemError> {
    parse_expression_with(&v.text, known).map_err(|e| {
        let (col, msg) = match e {
            ExprError::Syntax { column, message, .. } => (column, message),
            ExprError::UnknownIdentifier { name, column, .. } => (column, format!("unknown identifier `{name}`")),
            ExprError::Eval(m) => (1, m),
        };
        line_err(v.line, format!("column {}: {msg}", v.column + col - 1))
    })
}

impl ProblemFile {
    pub fn load(path: &Path) -> Result<Self, ProblemError> {
        let text = read_text(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses `text`; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ProblemError> {
        let mut scalar: BTreeMap<String, Located> = BTreeMap::new();
        let mut coefs: Vec<(String, Located)> = Vec::new();
        let mut params: BTreeMap<String, f64> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            if body.trim().is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| line_err(line, format!("expected `key = value`, got `{}`", raw.trim())))?;
            let value_start = body.len() - body[key.len() + 1..].trim_start().len();
            let loc = Located {
                line,
                column: value_start + 1,
                text: value.trim().to_string(),
            };
            let words: Vec<&str> = key.split_whitespace().collect();
            match words.as_slice() {
                ["coef", name] | ["param", name] => {
                    if !is_identifier(name) || *name == "t" {
                        return Err(line_err(line, format!("invalid name `{name}`")));
                    }
                    let taken = coefs.iter().any(|(n, _)| n == name) || params.contains_key(*name);
                    if taken {
                        return Err(line_err(line, format!("`{name}` defined twice")));
                    }
                    if words[0] == "coef" {
                        coefs.push((name.to_string(), loc));
                    } else {
                        params.insert(name.to_string(), parse_num(&loc, name)?);
                    }
                }
                [key] => {
                    if !KNOWN_KEYS.contains(key) {
                        return Err(line_err(line, format!("unknown key `{key}`")));
                    }
                    if scalar.insert(key.to_string(), loc).is_some() {
                        return Err(line_err(line, format!("`{key}` given twice")));
                    }
                }
                _ => return Err(line_err(line, format!("malformed key `{}`", key.trim()))),
            }
        }

        let get = |k: &str| scalar.get(k);
        let need = |k: &str| {
            get(k).ok_or_else(|| ProblemError::Invalid(format!("missing required key `{k}`")))
        };

        let graph_loc = need("graph")?;
        let graph_path = base.join(&graph_loc.text);
        let graph = load_graph(&graph_path)?;
        let omega_loc = need("omega")?;
        let omega = parse_id_list(&omega_loc.text, omega_loc.line)
            .map_err(|e| line_err(omega_loc.line, e.to_string()))?;
        let domain = Domain::new_connected(graph, &omega)
            .and_then(|d| d.require_solvable().map(|_| d))
            .map_err(|e| line_err(omega_loc.line, e.to_string()))?;

        let kind_loc = need("kind")?;
        if !KINDS.contains(&kind_loc.text.as_str()) {
            return Err(line_err(
                kind_loc.line,
                format!("unknown kind `{}` (expected one of {})", kind_loc.text, KINDS.join(", ")),
            ));
        }
        let m = match get("m") {
            Some(v) => parse_int::<usize>(v, "m")?,
            None => 1,
        };
        let p = match get("p") {
            Some(v) => parse_num(v, "p")?,
            None => 2.0,
        };
        let q = get("q").map(|v| parse_num(v, "q")).transpose()?;
        let lambda = get("lambda").map(|v| parse_num(v, "lambda")).transpose()?;

        let omega_ids = domain.omega();
        let mut coefficients = BTreeMap::new();
        for (name, loc) in &coefs {
            let values = parse_vertex_values(loc, &omega_ids)?;
            require_on(&values, &omega_ids, &format!("coefficient `{name}`"), loc.line, &domain)?;
            coefficients.insert(name.clone(), values);
        }
        let f_data = match get("f") {
            Some(loc) => {
                let values = parse_vertex_values(loc, &omega_ids)?;
                require_on(&values, &domain.interior(), "`f`", loc.line, &domain)?;
                Some(values)
            }
            None => None,
        };
        let h = match get("h") {
            Some(loc) => {
                let values = parse_vertex_values(loc, &domain.boundary())?;
                require_on(&values, &domain.boundary(), "`h`", loc.line, &domain)?;
                Some(values)
            }
            None => None,
        };

        for (name, value) in [("p", Some(p)), ("q", q), ("lambda", lambda), ("m", Some(m as f64))] {
            if let Some(v) = value {
                params.entry(name.to_string()).or_insert(v);
            }
        }
        let known = |name: &str| name == "t" || coefficients.contains_key(name) || params.contains_key(name);
        let f_expr = get("f_expr").map(|v| parse_expr(v, &known)).transpose()?;
        let g_expr = get("g_expr").map(|v| parse_expr(v, &known)).transpose()?;

        let seed = match get("seed") {
            Some(v) => parse_int::<u64>(v, "seed")?,
            None => 0,
        };
        let options = parse_options(&scalar, seed)?;

        Ok(Self {
            graph_path,
            domain,
            kind: kind_loc.text.clone(),
            m,
            p,
            q,
            lambda,
            coefficients,
            params,
            f_expr,
            g_expr,
            f_data,
            h,
            seed,
            options,
        })
    }

    fn coef(&self, name: &str) -> Result<&VertexFunction, ProblemError> {
        self.coefficients
            .get(name)
            .ok_or_else(|| ProblemError::Invalid(format!("kind `{}` needs `coef {name}`", self.kind)))
    }

    fn need_q(&self) -> Result<f64, ProblemError> {
        self.q
            .ok_or_else(|| ProblemError::Invalid(format!("kind `{}` needs `q`", self.kind)))
    }

    fn need_f(&self) -> Result<VertexFunction, ProblemError> {
        self.f_data
            .clone()
            .ok_or_else(|| ProblemError::Invalid(format!("kind `{}` needs `f`", self.kind)))
    }

    fn boundary_values(&self) -> VertexFunction {
        self.h
            .clone()
            .unwrap_or_else(|| VertexFunction::constant(&self.domain.boundary(), 0.0))
    }

    fn expression(&self, expr: &Expr) -> Result<Nonlinearity, ProblemError> {
        Nonlinearity::expression(&self.domain, expr, &self.coefficients, &self.params)
            .map_err(|e| ProblemError::Invalid(e.to_string()))
    }

    fn g(&self) -> Result<Nonlinearity, ProblemError> {
        let expr = self
            .g_expr
            .as_ref()
            .ok_or_else(|| ProblemError::Invalid(format!("kind `{}` needs `g_expr`", self.kind)))?;
        self.expression(expr)
    }

    /// Growth data `(q, a, b)` of the Yamabe nonlinearity.
    pub fn growth(&self) -> Result<(f64, &VertexFunction, &VertexFunction), ProblemError> {
        Ok((self.need_q()?, self.coef("a")?, self.coef("b")?))
    }

    /// The solver input for this file.
    pub fn spec(&self) -> Result<ProblemSpec, ProblemError> {
        let d = &self.domain;
        let invalid = |e: graphpde::variational::VariationalError| ProblemError::Invalid(e.to_string());
        let kind = match self.kind.as_str() {
            "yamabe_mp" => {
                let lambda = self
                    .lambda
                    .ok_or_else(|| ProblemError::Invalid("kind `yamabe_mp` needs `lambda`".into()))?;
                let (q, a, b) = self.growth()?;
                let f = match &self.f_expr {
                    Some(expr) => self.expression(expr)?.with_growth(d, q, a, b).map_err(invalid)?,
                    None => Nonlinearity::yamabe(d, a, b, q).map_err(invalid)?,
                };
                ProblemKind::YamabeMp { lambda, f }
            }
            "semilinear_dirichlet" => ProblemKind::SemilinearDirichlet {
                g: self.g()?,
                f: self.need_f()?,
                h: self.boundary_values(),
            },
            "yamabe_wellposed" => ProblemKind::YamabeWellPosed {
                a: self.coef("a")?.clone(),
                b: self.coef("b")?.clone(),
                q: self.need_q()?,
            },
            "kazdan_warner" => ProblemKind::KazdanWarner {
                alpha: self.coef("alpha")?.clone(),
                beta: self.coef("beta")?.clone(),
                f: self.need_f()?,
                h: self.boundary_values(),
            },
            "small_data_laplace" => {
                if self.h.is_some() {
                    return Err(ProblemError::Invalid(
                        "kind `small_data_laplace` has zero boundary values; remove `h`".into(),
                    ));
                }
                ProblemKind::SmallDataLaplace {
                    g: self.g()?,
                    f: self.need_f()?,
                }
            }
            other => unreachable!("kind `{other}` was validated at parse time"),
        };
        Ok(ProblemSpec {
            domain: d.clone(),
            m: self.m,
            p: self.p,
            kind,
        })
    }
}

const KNOWN_KEYS: [&str; 23] = [
    "graph",
    "omega",
    "kind",
    "m",
    "p",
    "q",
    "lambda",
    "f_expr",
    "g_expr",
    "f",
    "h",
    "seed",
    "residual_tol",
    "gradient_tol",
    "boundary_tol",
    "random_starts",
    "max_iter",
    "monotone_range",
    "monotone_points",
    "newton_tol",
    "newton_max_iter",
    "uniqueness_tol",
    "uniqueness_witness",
];

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_options(scalar: &BTreeMap<String, Located>, seed: u64) -> Result<SolveOptions, ProblemError> {
    let mut o = SolveOptions {
        seed,
        ..SolveOptions::default()
    };
    let positive = |key: &str, target: &mut f64| -> Result<(), ProblemError> {
        if let Some(v) = scalar.get(key) {
            let x = parse_num(v, key)?;
            if !(x > 0.0 && x.is_finite()) {
                return Err(line_err(v.line, format!("`{key}` must be positive")));
            }
            *target = x;
        }
        Ok(())
    };
    positive("residual_tol", &mut o.residual_tol)?;
    positive("gradient_tol", &mut o.gradient_tol)?;
    positive("boundary_tol", &mut o.boundary_tol)?;
    positive("newton_tol", &mut o.newton_tol)?;
    positive("uniqueness_tol", &mut o.uniqueness_tol)?;
    if let Some(v) = scalar.get("random_starts") {
        o.random_starts = parse_int(v, "random_starts")?;
    }
    if let Some(v) = scalar.get("max_iter") {
        o.max_iter = Some(parse_int(v, "max_iter")?);
    }
    if let Some(v) = scalar.get("monotone_points") {
        o.monotone_points = parse_int(v, "monotone_points")?;
        if o.monotone_points < 2 {
            return Err(line_err(v.line, "`monotone_points` must be at least 2"));
        }
    }
    if let Some(v) = scalar.get("newton_max_iter") {
        o.newton_max_iter = parse_int(v, "newton_max_iter")?;
    }
    if let Some(v) = scalar.get("uniqueness_witness") {
        o.uniqueness_witness = parse_bool(v, "uniqueness_witness")?;
    }
    if let Some(v) = scalar.get("monotone_range") {
        let bounds: Vec<f64> = v
            .text
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| line_err(v.line, "`monotone_range` needs two numbers"))?;
        match bounds.as_slice() {
            [lo, hi] if lo < hi && lo.is_finite() && hi.is_finite() => o.monotone_range = (*lo, *hi),
            _ => return Err(line_err(v.line, "`monotone_range` needs two finite numbers lo < hi")),
        }
    }
    Ok(o)
}

/// Reads `omega` from either an inline id list or a domain file.
pub fn omega_from_args(ids: &[VertexId], file: Option<&Path>) -> Result<Option<Vec<VertexId>>, ProblemError> {
    match (ids.is_empty(), file) {
        (true, None) => Ok(None),
        (false, None) => Ok(Some(ids.to_vec())),
        (true, Some(path)) => {
            let text = read_text(path)?;
            parse_omega(&text).map(Some).map_err(|source| ProblemError::Graph {
                path: path.display().to_string(),
                source,
            })
        }
        (false, Some(_)) => Err(ProblemError::Invalid(
            "give either --omega or --domain, not both".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dir_with_graph() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("path3.graph"), "e 0 1 1\ne 1 2 1\n").unwrap();
        dir
    }

    fn parse(text: &str) -> Result<ProblemFile, ProblemError> {
        let dir = dir_with_graph();
        ProblemFile::parse(text, dir.path())
    }

    const YAMABE: &str = "graph = path3.graph\nomega = 0 1\nkind = yamabe_mp\nq = 1\nlambda = 0.2\n\
                          coef a = const 1\ncoef b = 0:1 1:1\nf_expr = a - b*powsgn(t, q)\n";

    #[test]
    fn parses_yamabe_file() {
        let pf = parse(YAMABE).unwrap();
        assert_eq!(pf.domain.interior(), vec![0]);
        assert_eq!(pf.p, 2.0);
        let spec = pf.spec().unwrap();
        let ProblemKind::YamabeMp { lambda, f } = &spec.kind else { panic!() };
        assert_eq!(*lambda, 0.2);
        assert_eq!(f.eval(0, 2.0).unwrap(), -1.0);
        assert_eq!(f.growth().unwrap().q, 1.0);
    }

    #[test]
    fn unknown_identifier_reports_line_and_column() {
        let text = YAMABE.replace("a - b*", "a - c*");
        let err = parse(&text).unwrap_err().to_string();
        assert_eq!(err, "line 8: column 14: unknown identifier `c`");
    }

    #[test]
    fn coefficient_must_cover_omega() {
        let text = YAMABE.replace("0:1 1:1", "0:1");
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.contains("no value at vertex 1"), "{err}");
    }

    #[test]
    fn kind_requirements() {
        let text = YAMABE.replace("lambda = 0.2\n", "");
        let err = parse(&text).unwrap().spec().unwrap_err().to_string();
        assert!(err.contains("needs `lambda`"), "{err}");
        let err = parse(&YAMABE.replace("yamabe_mp", "nope")).unwrap_err().to_string();
        assert!(err.starts_with("line 3: unknown kind"), "{err}");
    }

    #[test]
    fn rejects_duplicates_and_unknown_keys() {
        assert!(parse(&format!("{YAMABE}q = 2\n")).unwrap_err().to_string().contains("twice"));
        assert!(parse(&format!("{YAMABE}colour = red\n")).unwrap_err().to_string().contains("unknown key"));
    }

    #[test]
    fn dirichlet_defaults_boundary_to_zero() {
        let text = "graph = path3.graph\nomega = 0 1\nkind = semilinear_dirichlet\np = 3\n\
                    g_expr = powsgn(t, 3)\nf = 0:1\nresidual_tol = 1e-9\nmonotone_range = -5 5\n";
        let pf = parse(text).unwrap();
        assert_eq!(pf.options.residual_tol, 1e-9);
        assert_eq!(pf.options.monotone_range, (-5.0, 5.0));
        let ProblemKind::SemilinearDirichlet { h, .. } = pf.spec().unwrap().kind else { panic!() };
        assert_eq!(h.get(1), Some(0.0));
    }
}
