//! Text formats: signed edge lists and symmetric Matrix Market files.
//!
//! Edge list: a header `n m`, then `m` lines `i j s` with 0-based vertices and
//! `s` the edge sign (`+1` or `-1`). Blank lines and lines starting with `#`
//! are ignored. The matrix of an edge list has `M_ij = -s` and a zero diagonal.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{NodalError, Result};
use crate::graph::{SignedEdge, SignedGraph};
use crate::matrix::DenseSymmetricMatrix;

fn perr(line: usize, msg: impl Into<String>) -> NodalError {
    NodalError::Parse { line, msg: msg.into() }
}

/// Non-empty, non-comment lines with their 1-based numbers.
fn content_lines<'a>(text: &'a str, comment: &'a str) -> impl Iterator<Item = (usize, &'a str)> + 'a {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(move |(_, l)| !l.is_empty() && !l.starts_with(comment))
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| perr(line, format!("invalid {what} '{tok}'")))
}

pub fn parse_edge_list(text: &str) -> Result<SignedGraph> {
    let mut lines = content_lines(text, "#");
    let (hl, header) = lines.next().ok_or_else(|| perr(1, "empty input"))?;
    let mut it = header.split_whitespace();
    let n: usize = field(it.next(), hl, "vertex count")?;
    let m: usize = field(it.next(), hl, "edge count")?;
    if it.next().is_some() {
        return Err(perr(hl, "header must be 'n m'"));
    }
    let mut edges = Vec::with_capacity(m);
    let mut last = hl;
    for (ln, l) in lines {
        last = ln;
        let mut it = l.split_whitespace();
        let i: usize = field(it.next(), ln, "vertex")?;
        let j: usize = field(it.next(), ln, "vertex")?;
        let s: i64 = field(it.next(), ln, "sign")?;
        if it.next().is_some() {
            return Err(perr(ln, "expected 'i j s'"));
        }
        if i >= n || j >= n {
            return Err(perr(ln, format!("vertex out of range (n = {n})")));
        }
        if i == j {
            return Err(perr(ln, "self-loop"));
        }
        if s != 1 && s != -1 {
            return Err(perr(ln, format!("sign must be +1 or -1, got {s}")));
        }
        if edges.len() == m {
            return Err(perr(ln, format!("more than {m} edges")));
        }
        edges.push(SignedEdge { i, j, sign: s as i8 });
    }
    if edges.len() != m {
        return Err(perr(last, format!("expected {m} edges, found {}", edges.len())));
    }
    SignedGraph::from_edges(n, &edges).map_err(|e| perr(last, e.to_string()))
}

pub fn write_edge_list(g: &SignedGraph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.edges().len());
    for e in g.edges() {
        let _ = writeln!(out, "{} {} {}", e.i, e.j, if e.sign > 0 { "+1" } else { "-1" });
    }
    out
}

/// Reads `%%MatrixMarket matrix coordinate real|integer symmetric`, lower
/// triangle only (`i >= j`), 1-based.
pub fn parse_matrix_market(text: &str) -> Result<DenseSymmetricMatrix> {
    let first = text.lines().next().ok_or_else(|| perr(1, "empty input"))?;
    let banner: Vec<String> = first.split_whitespace().map(str::to_ascii_lowercase).collect();
    if banner.len() != 5 || banner[0] != "%%matrixmarket" || banner[1] != "matrix" || banner[2] != "coordinate" {
        return Err(perr(1, "expected '%%MatrixMarket matrix coordinate <field> symmetric'"));
    }
    if banner[3] != "real" && banner[3] != "integer" {
        return Err(perr(1, format!("unsupported field '{}'", banner[3])));
    }
    if banner[4] != "symmetric" {
        return Err(perr(1, format!("unsupported symmetry '{}'", banner[4])));
    }
    let mut lines = content_lines(text, "%");
    let (sl, size) = lines.next().ok_or_else(|| perr(1, "missing size line"))?;
    let mut it = size.split_whitespace();
    let rows: usize = field(it.next(), sl, "row count")?;
    let cols: usize = field(it.next(), sl, "column count")?;
    let nnz: usize = field(it.next(), sl, "entry count")?;
    if rows != cols {
        return Err(perr(sl, format!("matrix is {rows}x{cols}, not square")));
    }
    let mut m = DenseSymmetricMatrix::zeros(rows);
    let mut seen = std::collections::HashSet::new();
    let mut count = 0;
    let mut last = sl;
    for (ln, l) in lines {
        last = ln;
        let mut it = l.split_whitespace();
        let i: usize = field(it.next(), ln, "row index")?;
        let j: usize = field(it.next(), ln, "column index")?;
        let v: f64 = field(it.next(), ln, "value")?;
        if it.next().is_some() {
            return Err(perr(ln, "expected 'i j value'"));
        }
        if i == 0 || j == 0 || i > rows || j > rows {
            return Err(perr(ln, format!("index out of range 1..={rows}")));
        }
        if i < j {
            return Err(perr(ln, "symmetric files store the lower triangle (i >= j)"));
        }
        if !v.is_finite() {
            return Err(perr(ln, "non-finite value"));
        }
        if !seen.insert((i, j)) {
            return Err(perr(ln, format!("duplicate entry ({i}, {j})")));
        }
        m.set(i - 1, j - 1, v);
        count += 1;
    }
    if count != nnz {
        return Err(perr(last, format!("expected {nnz} entries, found {count}")));
    }
    Ok(m)
}

pub fn write_matrix_market(m: &DenseSymmetricMatrix) -> String {
    let n = m.n();
    let entries: Vec<(usize, usize, f64)> =
        (0..n).flat_map(|j| (j..n).map(move |i| (i, j))).map(|(i, j)| (i, j, m.get(i, j))).filter(|e| e.2 != 0.0).collect();
    let mut out = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
    let _ = writeln!(out, "{n} {n} {}", entries.len());
    for (i, j, v) in entries {
        let _ = writeln!(out, "{} {} {}", i + 1, j + 1, v);
    }
    out
}

/// Parses either format, choosing Matrix Market when the banner is present.
pub fn parse_matrix(text: &str) -> Result<DenseSymmetricMatrix> {
    if text.trim_start().starts_with("%%MatrixMarket") || text.trim_start().starts_with("%%matrixmarket") {
        parse_matrix_market(text)
    } else {
        Ok(parse_edge_list(text)?.to_matrix())
    }
}

pub fn read_matrix(path: &Path) -> Result<DenseSymmetricMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| NodalError::Io(format!("{}: {e}", path.display())))?;
    parse_matrix(&text)
}
