//! Plain-text instance files.
//!
//! ```text
//! # comment
//! k n m
//! v v v      (m lines of k vertex ids, any order)
//! ```
//!
//! Blank lines and lines starting with `#` are skipped. The writer emits the
//! canonical form: header, then edges in lexicographic order with sorted
//! vertices, single spaces and a trailing newline.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;

pub fn to_text(h: &Hypergraph) -> String {
    let mut out = String::with_capacity(16 + h.num_edges() * h.k() * 6);
    let _ = writeln!(out, "{} {} {}", h.k(), h.num_vertices(), h.num_edges());
    for e in h.edges() {
        for (i, v) in e.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

pub fn parse(text: &str) -> Result<Hypergraph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        msg: "missing header".into(),
    })?;
    let nums = parse_ints(hline, header)?;
    if nums.len() != 3 {
        return Err(Error::Parse {
            line: hline,
            msg: format!("header needs `k n m`, found {} fields", nums.len()),
        });
    }
    let (k, n, m) = (nums[0] as usize, nums[1] as usize, nums[2] as usize);
    let mut edges = Vec::with_capacity(m);
    for (line, l) in lines {
        let e = parse_ints(line, l)?;
        if e.len() != k {
            return Err(Error::Parse {
                line,
                msg: format!("edge has {} vertices, expected {k}", e.len()),
            });
        }
        if edges.len() == m {
            return Err(Error::Parse {
                line,
                msg: format!("more than the {m} edges announced"),
            });
        }
        edges.push(e);
    }
    if edges.len() != m {
        return Err(Error::Parse {
            line: text.lines().count(),
            msg: format!("expected {m} edges, found {}", edges.len()),
        });
    }
    Hypergraph::new(k, n, edges)
}

fn parse_ints(line: usize, l: &str) -> Result<Vec<u32>> {
    l.split_whitespace()
        .map(|t| {
            t.parse::<u32>().map_err(|_| Error::Parse {
                line,
                msg: format!("not a vertex id: `{t}`"),
            })
        })
        .collect()
}

pub fn read(path: impl AsRef<Path>) -> Result<Hypergraph> {
    parse(&std::fs::read_to_string(path)?)
}

pub fn write(path: impl AsRef<Path>, h: &Hypergraph) -> Result<()> {
    std::fs::write(path, to_text(h))?;
    Ok(())
}
