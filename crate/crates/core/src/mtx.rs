//! Matrix Market coordinate I/O.
//!
//! Loading conventions: diagonal entries are dropped, values are taken by
//! magnitude, repeated entries for the same position are summed, pattern
//! matrices get unit weights, and general (unsymmetric) matrices are
//! symmetrized by keeping `max(|a_ij|, |a_ji|)`. Node ids that never occur
//! in an off-diagonal entry are compacted away.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::graph::{connected_components, WeightedGraph};

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Keep only the largest connected component instead of failing.
    pub largest_component: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<WeightedGraph> {
    load_matrix_market_with(path, LoadOptions::default())
}

pub fn load_matrix_market_with(path: impl AsRef<Path>, opts: LoadOptions) -> Result<WeightedGraph> {
    let path = path.as_ref();
    let file = File::open(path)?;
    let reader: Box<dyn Read> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(GzDecoder::new(file))
    } else {
        Box::new(file)
    };
    parse_matrix_market(BufReader::new(reader), opts)
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_header(line: &str, lineno: usize) -> Result<(Field, Symmetry)> {
    let lower = line.to_ascii_lowercase();
    let mut tok = lower.split_whitespace();
    if tok.next() != Some("%%matrixmarket") {
        return Err(parse_err(lineno, "missing %%MatrixMarket banner"));
    }
    if tok.next() != Some("matrix") {
        return Err(parse_err(lineno, "object must be 'matrix'"));
    }
    if tok.next() != Some("coordinate") {
        return Err(parse_err(lineno, "only coordinate format is supported"));
    }
    let field = match tok.next() {
        Some("real") | Some("integer") | Some("double") => Field::Real,
        Some("pattern") => Field::Pattern,
        Some(other) => return Err(parse_err(lineno, format!("unsupported field '{other}'"))),
        None => return Err(parse_err(lineno, "missing field type")),
    };
    let symmetry = match tok.next() {
        Some("general") => Symmetry::General,
        Some("symmetric") | Some("skew-symmetric") => Symmetry::Symmetric,
        Some(other) => return Err(parse_err(lineno, format!("unsupported symmetry '{other}'"))),
        None => return Err(parse_err(lineno, "missing symmetry")),
    };
    Ok((field, symmetry))
}

fn parse_index(tok: Option<&str>, dim: usize, lineno: usize) -> Result<usize> {
    let s = tok.ok_or_else(|| parse_err(lineno, "missing index"))?;
    let i: usize = s
        .parse()
        .map_err(|_| parse_err(lineno, format!("bad index '{s}'")))?;
    if i == 0 || i > dim {
        return Err(parse_err(lineno, format!("index {i} outside 1..={dim}")));
    }
    Ok(i - 1)
}

/// Parses Matrix Market text from any buffered reader.
pub fn parse_matrix_market<R: BufRead>(reader: R, opts: LoadOptions) -> Result<WeightedGraph> {
    let mut lines = reader.lines().enumerate();
    let (field, symmetry) = match lines.next() {
        Some((i, line)) => parse_header(&line?, i + 1)?,
        None => return Err(parse_err(1, "empty file")),
    };

    let mut dims = None;
    for (i, line) in lines.by_ref() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let nums: Vec<&str> = t.split_whitespace().collect();
        if nums.len() != 3 {
            return Err(parse_err(i + 1, "size line must have three integers"));
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| parse_err(i + 1, format!("bad size '{s}'")))
        };
        let (rows, cols, nnz) = (parse(nums[0])?, parse(nums[1])?, parse(nums[2])?);
        if rows != cols {
            return Err(parse_err(i + 1, "matrix must be square"));
        }
        dims = Some((rows, nnz));
        break;
    }
    let (dim, nnz) = dims.ok_or_else(|| parse_err(0, "missing size line"))?;

    // ordered (row, col) -> summed magnitude
    let mut entries: FxHashMap<(usize, usize), f64> = FxHashMap::default();
    let mut seen = 0usize;
    for (i, line) in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let lineno = i + 1;
        let mut tok = t.split_whitespace();
        let r = parse_index(tok.next(), dim, lineno)?;
        let c = parse_index(tok.next(), dim, lineno)?;
        let val = match field {
            Field::Pattern => 1.0,
            Field::Real => {
                let s = tok
                    .next()
                    .ok_or_else(|| parse_err(lineno, "missing value"))?;
                let v: f64 = s
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("bad value '{s}'")))?;
                if !v.is_finite() {
                    return Err(parse_err(lineno, "non-finite value"));
                }
                v.abs()
            }
        };
        seen += 1;
        if r == c || val == 0.0 {
            continue;
        }
        let key = match symmetry {
            Symmetry::Symmetric => (r.min(c), r.max(c)),
            Symmetry::General => (r, c),
        };
        *entries.entry(key).or_insert(0.0) += val;
    }
    if seen != nnz {
        return Err(parse_err(0, format!("expected {nnz} entries, found {seen}")));
    }

    let mut pairs: FxHashMap<(usize, usize), f64> = FxHashMap::default();
    for ((r, c), w) in entries {
        let slot = pairs.entry((r.min(c), r.max(c))).or_insert(0.0);
        // symmetric keys are already unique; general keys keep the max
        *slot = slot.max(w);
    }
    if pairs.is_empty() {
        return Err(Error::EmptyGraph);
    }

    let mut used = vec![false; dim];
    for &(u, v) in pairs.keys() {
        used[u] = true;
        used[v] = true;
    }
    let mut relabel = vec![usize::MAX; dim];
    let mut n = 0;
    for (old, &u) in used.iter().enumerate() {
        if u {
            relabel[old] = n;
            n += 1;
        }
    }
    let g = WeightedGraph::from_edges(
        n,
        pairs
            .into_iter()
            .map(|((u, v), w)| (relabel[u], relabel[v], w)),
    )?;
    let comps = connected_components(&g).len();
    if comps > 1 {
        if opts.largest_component {
            return Ok(g.largest_component());
        }
        return Err(Error::DisconnectedGraph { components: comps });
    }
    Ok(g)
}

/// Writes `g` as a real symmetric coordinate matrix (lower triangle,
/// off-diagonal entries only). Weights use shortest round-trip formatting.
pub fn write_matrix_market(g: &WeightedGraph, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_matrix_market_to(g, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn write_matrix_market_to<W: Write>(g: &WeightedGraph, out: &mut W) -> Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(out, "{} {} {}", g.n_nodes(), g.n_nodes(), g.n_edges())?;
    for e in g.edges() {
        writeln!(out, "{} {} {}", e.v + 1, e.u + 1, e.w)?;
    }
    Ok(())
}
