//! Plain-text graph and domain files.
//!
//! Graph files contain `v <id>` vertex declarations and `e <id> <id> <weight>`
//! edges; `#` starts a comment. Domain files contain one `omega <id> ...` line.

use super::{GraphError, VertexId, WeightedGraph};

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

fn parse_id(token: &str, line: usize) -> Result<VertexId, GraphError> {
    token.parse().map_err(|_| GraphError::Parse {
        line,
        message: format!("invalid vertex id `{token}`"),
    })
}

pub fn parse_graph(text: &str) -> Result<WeightedGraph, GraphError> {
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let tokens: Vec<&str> = strip_comment(raw).split_whitespace().collect();
        match tokens.as_slice() {
            [] => {}
            ["v", id] => vertices.push(parse_id(id, line)?),
            ["e", x, y, w] => {
                let weight: f64 = w.parse().map_err(|_| GraphError::Parse {
                    line,
                    message: format!("invalid weight `{w}`"),
                })?;
                edges.push((parse_id(x, line)?, parse_id(y, line)?, weight));
            }
            _ => {
                return Err(GraphError::Parse {
                    line,
                    message: format!("unrecognized line `{}`", raw.trim()),
                })
            }
        }
    }
    WeightedGraph::from_parts(&vertices, &edges)
}

/// Parses a whitespace-separated id list (the part after `omega`).
pub fn parse_id_list(text: &str, line: usize) -> Result<Vec<VertexId>, GraphError> {
    text.split_whitespace().map(|t| parse_id(t, line)).collect()
}

pub fn parse_omega(text: &str) -> Result<Vec<VertexId>, GraphError> {
    let mut found = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = strip_comment(raw).trim();
        if body.is_empty() {
            continue;
        }
        let rest = body.strip_prefix("omega").ok_or_else(|| GraphError::Parse {
            line,
            message: "expected `omega <id> ...`".into(),
        })?;
        if found.is_some() {
            return Err(GraphError::Parse {
                line,
                message: "duplicate omega line".into(),
            });
        }
        found = Some(parse_id_list(rest, line)?);
    }
    found.ok_or(GraphError::Parse {
        line: 0,
        message: "no omega line".into(),
    })
}
