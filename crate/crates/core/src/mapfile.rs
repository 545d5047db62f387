//! Line-based map files.
//!
//! ```text
//! # comment
//! node 0 0
//! node 1 0 cap=2
//! edge 0 0 1 0 dur=3
//! ```
//!
//! `cap=` and `dur=` may trail any record and override the defaults passed to
//! [`MapSpec::build`].

use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::{Cell, EdgeSpec, GraphError, NodeSpec, ResourceDefaults, ResourceGraph};
use crate::Tick;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MapSpec {
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<EdgeSpec>,
}

impl MapSpec {
    pub fn from_grid_parts(nodes: &[Cell], edges: &[(Cell, Cell)]) -> Self {
        Self {
            nodes: nodes.iter().copied().map(NodeSpec::new).collect(),
            edges: edges.iter().map(|&(a, b)| EdgeSpec::new(a, b)).collect(),
        }
    }

    pub fn build(&self, defaults: ResourceDefaults) -> Result<ResourceGraph, GraphError> {
        ResourceGraph::build(&self.nodes, &self.edges, defaults)
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut spec = MapSpec::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| ParseError { line, message };
            let mut fields = content.split_whitespace();
            let keyword = fields.next().unwrap_or_default();
            let rest: Vec<&str> = fields.collect();
            let coords_needed = match keyword {
                "node" => 2,
                "edge" => 4,
                other => return Err(err(format!("unknown record `{other}`"))),
            };
            if rest.len() < coords_needed {
                return Err(err(format!(
                    "`{keyword}` needs {coords_needed} coordinates, found {}",
                    rest.len()
                )));
            }
            let coords = rest[..coords_needed]
                .iter()
                .map(|s| parse_num::<i32>(s).map_err(&err))
                .collect::<Result<Vec<_>, _>>()?;
            let (mut capacity, mut duration) = (None, None);
            for extra in &rest[coords_needed..] {
                match extra.split_once('=') {
                    Some(("cap", v)) => capacity = Some(parse_num::<u32>(v).map_err(&err)?),
                    Some(("dur", v)) => duration = Some(parse_num::<Tick>(v).map_err(&err)?),
                    _ => return Err(err(format!("unexpected field `{extra}`"))),
                }
            }
            if keyword == "node" {
                spec.nodes.push(NodeSpec {
                    cell: Cell::new(coords[0], coords[1]),
                    capacity,
                    duration,
                });
            } else {
                spec.edges.push(EdgeSpec {
                    a: Cell::new(coords[0], coords[1]),
                    b: Cell::new(coords[2], coords[3]),
                    capacity,
                    duration,
                });
            }
        }
        Ok(spec)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            let _ = write!(out, "node {} {}", n.cell.x, n.cell.y);
            push_overrides(&mut out, n.capacity, n.duration);
        }
        for e in &self.edges {
            let _ = write!(out, "edge {} {} {} {}", e.a.x, e.a.y, e.b.x, e.b.y);
            push_overrides(&mut out, e.capacity, e.duration);
        }
        out
    }
}

fn push_overrides(out: &mut String, capacity: Option<u32>, duration: Option<Tick>) {
    if let Some(c) = capacity {
        let _ = write!(out, " cap={c}");
    }
    if let Some(d) = duration {
        let _ = write!(out, " dur={d}");
    }
    out.push('\n');
}

fn parse_num<T: FromStr>(s: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("invalid number `{s}`"))
}
