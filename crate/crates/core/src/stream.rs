//! Edge-stream files: one `u v w` triple per line, batches separated by a
//! line holding only `#`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

pub type Batch = Vec<(usize, usize, f64)>;

pub fn read_stream(path: impl AsRef<Path>) -> Result<Vec<Batch>> {
    parse_stream(BufReader::new(File::open(path)?))
}

/// Blank lines are skipped. A trailing `#` does not open an empty batch.
pub fn parse_stream<R: BufRead>(reader: R) -> Result<Vec<Batch>> {
    let mut batches = Vec::new();
    let mut cur: Batch = Vec::new();
    let mut open = false;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if t == "#" {
            batches.push(std::mem::take(&mut cur));
            open = false;
            continue;
        }
        let bad = |msg: &str| Error::Parse {
            line: i + 1,
            msg: msg.to_string(),
        };
        let mut it = t.split_whitespace();
        let (Some(a), Some(b), Some(c), None) = (it.next(), it.next(), it.next(), it.next()) else {
            return Err(bad("expected `u v w`"));
        };
        let u: usize = a.parse().map_err(|_| bad("bad node id"))?;
        let v: usize = b.parse().map_err(|_| bad("bad node id"))?;
        let w: f64 = c.parse().map_err(|_| bad("bad weight"))?;
        cur.push((u, v, w));
        open = true;
    }
    if open {
        batches.push(cur);
    }
    Ok(batches)
}

pub fn write_stream(batches: &[Batch], path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_stream_to(batches, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn write_stream_to<W: Write>(batches: &[Batch], out: &mut W) -> Result<()> {
    for b in batches {
        for &(u, v, w) in b {
            writeln!(out, "{u} {v} {w}")?;
        }
        writeln!(out, "#")?;
    }
    Ok(())
}

fn check_sizes(iterations: usize, per_iter: usize) -> Result<usize> {
    if iterations == 0 || per_iter == 0 {
        return Err(Error::InvalidArgument(
            "iterations and edges per iteration must be positive".into(),
        ));
    }
    Ok(iterations * per_iter)
}

/// Samples `iterations * per_iter` edges of `g` missing from `h0`, without
/// replacement, keeping their weights in `g`.
pub fn synth_stream(
    g: &WeightedGraph,
    h0: &WeightedGraph,
    iterations: usize,
    per_iter: usize,
    seed: u64,
) -> Result<Vec<Batch>> {
    let total = check_sizes(iterations, per_iter)?;
    if g.n_nodes() != h0.n_nodes() {
        return Err(Error::NodeSetMismatch(g.n_nodes(), h0.n_nodes()));
    }
    let mut cand: Vec<(usize, usize, f64)> = g
        .edges()
        .iter()
        .filter(|e| h0.find_edge(e.u, e.v).is_none())
        .map(|e| (e.u, e.v, e.w))
        .collect();
    if cand.len() < total {
        return Err(Error::NotEnoughCandidates {
            available: cand.len(),
            requested: total,
        });
    }
    cand.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    cand.truncate(total);
    Ok(cand.chunks(per_iter).map(<[_]>::to_vec).collect())
}

/// Samples node pairs that are not edges of `g`, all with weight `w`.
pub fn synth_stream_non_edges(
    g: &WeightedGraph,
    iterations: usize,
    per_iter: usize,
    w: f64,
    seed: u64,
) -> Result<Vec<Batch>> {
    let total = check_sizes(iterations, per_iter)?;
    let n = g.n_nodes();
    let available = (n * n.saturating_sub(1) / 2).saturating_sub(g.n_edges());
    if available < total {
        return Err(Error::NotEnoughCandidates {
            available,
            requested: total,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = FxHashSet::default();
    let mut out = Vec::with_capacity(total);
    while out.len() < total {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        let key = (a.min(b), a.max(b));
        if a == b || g.find_edge(a, b).is_some() || !seen.insert(key) {
            continue;
        }
        out.push((key.0, key.1, w));
    }
    Ok(out.chunks(per_iter).map(<[_]>::to_vec).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn parse_batches() {
        let text = "0 1 1.5\n2 3 2\n#\n\n4 5 0.5\n#\n";
        let b = parse_stream(Cursor::new(text)).unwrap();
        assert_eq!(b, vec![vec![(0, 1, 1.5), (2, 3, 2.0)], vec![(4, 5, 0.5)]]);
        let b = parse_stream(Cursor::new("0 1 1\n#\n1 2 1")).unwrap();
        assert_eq!(b.len(), 2);
        assert!(parse_stream(Cursor::new("0 1\n")).is_err());
        assert!(parse_stream(Cursor::new("0 x 1\n")).is_err());
    }

    #[test]
    fn round_trip() {
        let b = vec![vec![(0, 1, 0.1), (1, 2, 3.0)], vec![(3, 4, 1e-3)]];
        let mut buf = Vec::new();
        write_stream_to(&b, &mut buf).unwrap();
        assert_eq!(parse_stream(Cursor::new(buf)).unwrap(), b);
    }

    fn k(n: usize) -> WeightedGraph {
        WeightedGraph::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, 1.0)))).unwrap()
    }

    #[test]
    fn synth_from_missing_edges() {
        let g = k(8);
        let h = WeightedGraph::from_edges(8, (0..7).map(|i| (i, i + 1, 1.0))).unwrap();
        let s = synth_stream(&g, &h, 3, 4, 9).unwrap();
        assert_eq!(s.len(), 3);
        let mut keys: Vec<_> = s.iter().flatten().map(|&(u, v, _)| (u, v)).collect();
        assert!(keys.iter().all(|&(u, v)| h.find_edge(u, v).is_none()));
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), 12);
        assert_ne!(s, synth_stream(&g, &h, 3, 4, 10).unwrap());
        assert!(matches!(synth_stream(&g, &h, 3, 0, 9), Err(Error::InvalidArgument(_))));
        assert!(matches!(
            synth_stream(&g, &h, 10, 3, 9),
            Err(Error::NotEnoughCandidates { available: 21, requested: 30 })
        ));
    }

    #[test]
    fn synth_non_edges() {
        let g = WeightedGraph::from_edges(6, (0..5).map(|i| (i, i + 1, 1.0))).unwrap();
        let s = synth_stream_non_edges(&g, 2, 5, 1.0, 0).unwrap();
        assert!(s.iter().flatten().all(|&(u, v, _)| g.find_edge(u, v).is_none()));
        assert!(synth_stream_non_edges(&g, 4, 3, 1.0, 0).is_err());
    }
}
