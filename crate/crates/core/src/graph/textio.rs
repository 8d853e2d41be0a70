//! Line-oriented graph format.
//!
//! ```text
//! n m
//! i j w      (m lines, 1-based node indices)
//! ```
//!
//! Weights are written with Rust's shortest round-trip float formatting, so a
//! write/parse cycle reproduces every weight bit for bit. Blank lines and lines
//! starting with `#` are ignored.

use std::fmt::Write as _;

use super::{Edge, WeightedGraph};
use crate::error::{Error, Result};

pub fn write_graph(graph: &WeightedGraph) -> String {
    let mut s = String::with_capacity(24 * (graph.m() + 1));
    let _ = writeln!(s, "{} {}", graph.n(), graph.m());
    for e in graph.edges() {
        let _ = writeln!(s, "{} {} {}", e.i + 1, e.j + 1, e.w);
    }
    s
}

pub fn parse_graph(text: &str) -> Result<WeightedGraph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let mut fields = header.split_whitespace();
    let n: usize = parse_field(fields.next(), hline, "node count")?;
    let m: usize = parse_field(fields.next(), hline, "edge count")?;
    if fields.next().is_some() {
        return Err(Error::Parse {
            line: hline,
            msg: "header must be \"n m\"".into(),
        });
    }

    let mut edges = Vec::with_capacity(m.min(1 << 20));
    for (line, l) in lines {
        let mut f = l.split_whitespace();
        let i: usize = parse_field(f.next(), line, "node i")?;
        let j: usize = parse_field(f.next(), line, "node j")?;
        let w: f64 = parse_field(f.next(), line, "weight")?;
        if f.next().is_some() {
            return Err(Error::Parse {
                line,
                msg: "edge line must be \"i j w\"".into(),
            });
        }
        if i == 0 || j == 0 || i > n || j > n {
            return Err(Error::Parse {
                line,
                msg: format!("node index out of range 1..={n}"),
            });
        }
        if edges.len() == m {
            return Err(Error::Parse {
                line,
                msg: format!("more than the {m} declared edges"),
            });
        }
        edges.push(Edge {
            i: i - 1,
            j: j - 1,
            w,
        });
    }
    if edges.len() != m {
        return Err(Error::Parse {
            line: text.lines().count(),
            msg: format!("expected {m} edges, found {}", edges.len()),
        });
    }
    WeightedGraph::new(n, edges).map_err(|e| Error::Parse {
        line: 0,
        msg: e.to_string(),
    })
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, line: usize, what: &str) -> Result<T> {
    let f = field.ok_or_else(|| Error::Parse {
        line,
        msg: format!("missing {what}"),
    })?;
    f.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid {what}: {f:?}"),
    })
}
