//! Edge-list text format.
//!
//! ```text
//! # comment
//! n m
//! u v
//! ...
//! ```
//!
//! A coloring of `K_m` is the header line `complete m` followed by its red graph in the
//! format above.

use super::{Graph, GraphError, TwoColoring};
use std::fmt::Write as _;

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then_some((i + 1, body))
    })
}

fn parse_pair(line: usize, body: &str) -> Result<(usize, usize), GraphError> {
    let bad = |msg: &str| GraphError::Parse { line, msg: msg.to_string() };
    let mut it = body.split_whitespace();
    let a = it.next().ok_or_else(|| bad("expected two integers"))?;
    let b = it.next().ok_or_else(|| bad("expected two integers"))?;
    if it.next().is_some() {
        return Err(bad("expected two integers"));
    }
    let a = a.parse().map_err(|_| bad("not a non-negative integer"))?;
    let b = b.parse().map_err(|_| bad("not a non-negative integer"))?;
    Ok((a, b))
}

fn parse_lines<'a>(mut lines: impl Iterator<Item = (usize, &'a str)>) -> Result<Graph, GraphError> {
    let (hline, header) = lines.next().ok_or(GraphError::Parse { line: 0, msg: "missing header".into() })?;
    let (n, m) = parse_pair(hline, header)?;
    let mut edges = Vec::with_capacity(m);
    let mut last = hline;
    for (line, body) in lines {
        edges.push(parse_pair(line, body)?);
        last = line;
    }
    if edges.len() != m {
        return Err(GraphError::Parse { line: last, msg: format!("header promises {m} edges, found {}", edges.len()) });
    }
    Graph::from_edges(n, &edges)
}

pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    parse_lines(content_lines(text))
}

pub fn write_edge_list(g: &Graph) -> String {
    let mut s = format!("{} {}\n", g.n(), g.edge_count());
    for (u, v) in g.edges() {
        writeln!(s, "{u} {v}").unwrap();
    }
    s
}

pub fn parse_coloring(text: &str) -> Result<TwoColoring, GraphError> {
    let mut lines = content_lines(text);
    let (line, header) = lines.next().ok_or(GraphError::Parse { line: 0, msg: "missing header".into() })?;
    let m: usize = header
        .strip_prefix("complete")
        .and_then(|rest| rest.trim().parse().ok())
        .ok_or(GraphError::Parse { line, msg: "expected `complete m`".into() })?;
    let red = parse_lines(lines)?;
    if red.n() != m {
        return Err(GraphError::Parse { line, msg: format!("red graph has {} vertices, expected {m}", red.n()) });
    }
    Ok(TwoColoring::from_red(red))
}

pub fn write_coloring(c: &TwoColoring) -> String {
    format!("complete {}\n{}", c.m(), write_edge_list(c.red()))
}
