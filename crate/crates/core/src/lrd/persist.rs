//! Binary container for the one-time setup results.
//!
//! Layout: 8 magic bytes, a little-endian `u32` version, then four sections
//! (`GRPH`, `EMBD`, `HIER`, `INDX`). Each section is a 4-byte tag, a `u64`
//! payload length, the payload and a CRC-32 of the payload.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{ClusterPairIndex, LrdHierarchy, MergeRecord};
use crate::error::{Error, Result};
use crate::graph::{Edge, WeightedGraph};
use crate::resistance::ResistanceEmbedder;

pub const SETUP_MAGIC: &[u8; 8] = b"INGRASS\0";
pub const SETUP_VERSION: u32 = 1;

const TAGS: [&[u8; 4]; 4] = [b"GRPH", b"EMBD", b"HIER", b"INDX"];

/// Everything the update phase needs from setup.
#[derive(Debug, Clone, PartialEq)]
pub struct SetupArtifact {
    /// Initial sparsifier.
    pub graph: WeightedGraph,
    pub embedder: ResistanceEmbedder,
    pub hierarchy: LrdHierarchy,
    pub index: ClusterPairIndex,
}

#[derive(Default)]
struct Enc(Vec<u8>);

impl Enc {
    fn u32(&mut self, x: u32) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn u64(&mut self, x: u64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn f64(&mut self, x: f64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn len(&mut self, x: usize) {
        self.u64(x as u64);
    }
}

struct Dec<'a> {
    buf: &'a [u8],
    tag: &'static str,
}

impl<'a> Dec<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        if self.buf.len() < k {
            return Err(Error::VersionMismatch(format!(
                "section {} payload is shorter than its contents",
                self.tag
            )));
        }
        let (head, rest) = self.buf.split_at(k);
        self.buf = rest;
        Ok(head)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn len(&mut self) -> Result<usize> {
        let x = self.u64()?;
        usize::try_from(x).map_err(|_| {
            Error::VersionMismatch(format!("length {x} overflows in section {}", self.tag))
        })
    }
    fn finish(self) -> Result<()> {
        if !self.buf.is_empty() {
            return Err(Error::VersionMismatch(format!(
                "{} trailing bytes in section {}",
                self.buf.len(),
                self.tag
            )));
        }
        Ok(())
    }
}

fn encode_graph(g: &WeightedGraph) -> Vec<u8> {
    let mut e = Enc::default();
    e.len(g.n_nodes());
    e.len(g.n_edges());
    for ed in g.edges() {
        e.u32(ed.u as u32);
        e.u32(ed.v as u32);
        e.f64(ed.w);
    }
    e.0
}

fn decode_graph(mut d: Dec) -> Result<WeightedGraph> {
    let n = d.len()?;
    let m = d.len()?;
    let mut edges = Vec::with_capacity(m.min(d.buf.len() / 16));
    for _ in 0..m {
        let (u, v, w) = (d.u32()? as usize, d.u32()? as usize, d.f64()?);
        edges.push(Edge { u, v, w });
    }
    d.finish()?;
    let canonical = edges
        .windows(2)
        .all(|p| p[0].key() < p[1].key())
        && edges.iter().all(|e| e.u < e.v && e.v < n && e.w > 0.0);
    if !canonical {
        return Err(Error::VersionMismatch("GRPH edges are not canonical".into()));
    }
    Ok(WeightedGraph::from_sorted_edges(n, edges))
}

fn encode_embedder(emb: &ResistanceEmbedder) -> Vec<u8> {
    let mut e = Enc::default();
    let n = emb.vectors().first().map_or(0, Vec::len);
    e.len(n);
    e.len(emb.dim());
    for &r in emb.rayleigh() {
        e.f64(r);
    }
    for v in emb.vectors() {
        for &x in v {
            e.f64(x);
        }
    }
    e.0
}

fn decode_embedder(mut d: Dec, n_graph: usize) -> Result<ResistanceEmbedder> {
    let n = d.len()?;
    let k = d.len()?;
    let rayleigh = (0..k).map(|_| d.f64()).collect::<Result<Vec<_>>>()?;
    let mut vectors = Vec::new();
    for _ in 0..k {
        vectors.push((0..n).map(|_| d.f64()).collect::<Result<Vec<_>>>()?);
    }
    d.finish()?;
    let n = if k == 0 { n_graph } else { n };
    if n != n_graph {
        return Err(Error::EmbedderMismatch {
            embedder: n,
            graph: n_graph,
        });
    }
    ResistanceEmbedder::from_parts(n, vectors, rayleigh)
}

fn encode_hierarchy(h: &LrdHierarchy) -> Vec<u8> {
    let mut e = Enc::default();
    e.len(h.n);
    e.len(h.levels());
    e.f64(h.growth);
    for &t in &h.thresholds {
        e.f64(t);
    }
    for a in &h.assignment {
        a.iter().for_each(|&c| e.u32(c));
    }
    for d in &h.diameter {
        d.iter().for_each(|&x| e.f64(x));
    }
    for s in &h.size {
        s.iter().for_each(|&x| e.u32(x));
    }
    e.len(h.merges.len());
    for m in &h.merges {
        e.u32(m.level);
        e.u32(m.u);
        e.u32(m.v);
        e.f64(m.resistance);
        e.f64(m.bound);
    }
    e.0
}

fn decode_hierarchy(mut d: Dec, n_graph: usize) -> Result<LrdHierarchy> {
    let n = d.len()?;
    if n != n_graph {
        return Err(Error::NodeSetMismatch(n, n_graph));
    }
    let levels = d.len()?;
    let growth = d.f64()?;
    let thresholds = (0..=levels).map(|_| d.f64()).collect::<Result<Vec<_>>>()?;
    let mut assignment = Vec::with_capacity(levels + 1);
    for _ in 0..=levels {
        let a = (0..n).map(|_| d.u32()).collect::<Result<Vec<_>>>()?;
        if a.iter().any(|&c| c as usize >= n) {
            return Err(Error::VersionMismatch("HIER cluster id out of range".into()));
        }
        assignment.push(a);
    }
    let mut diameter = Vec::with_capacity(levels + 1);
    for _ in 0..=levels {
        diameter.push((0..n).map(|_| d.f64()).collect::<Result<Vec<_>>>()?);
    }
    let mut size = Vec::with_capacity(levels + 1);
    for _ in 0..=levels {
        size.push((0..n).map(|_| d.u32()).collect::<Result<Vec<_>>>()?);
    }
    let k = d.len()?;
    let mut merges = Vec::with_capacity(k.min(d.buf.len() / 28));
    for _ in 0..k {
        merges.push(MergeRecord {
            level: d.u32()?,
            u: d.u32()?,
            v: d.u32()?,
            resistance: d.f64()?,
            bound: d.f64()?,
        });
    }
    d.finish()?;
    Ok(LrdHierarchy {
        n,
        growth,
        thresholds,
        rows: super::node_major(&assignment, n),
        assignment,
        diameter,
        size,
        merges,
    })
}

fn encode_index(idx: &ClusterPairIndex) -> Vec<u8> {
    let mut e = Enc::default();
    e.len(idx.levels());
    for level in 1..=idx.levels() {
        let cross = idx.cross_slots(level);
        e.len(cross.len());
        for ((a, b), ids) in cross {
            e.u32(a);
            e.u32(b);
            e.len(ids.len());
            ids.iter().for_each(|&id| e.u32(id));
        }
        let intra = idx.intra_slots(level);
        e.len(intra.len());
        for (c, ids) in intra {
            e.u32(c);
            e.len(ids.len());
            ids.iter().for_each(|&id| e.u32(id));
        }
    }
    e.0
}

fn decode_index(mut d: Dec) -> Result<ClusterPairIndex> {
    let levels = d.len()?;
    let mut idx = ClusterPairIndex::empty(levels);
    for level in 1..=levels {
        for _ in 0..d.len()? {
            let (a, b) = (d.u32()?, d.u32()?);
            for _ in 0..d.len()? {
                idx.push_cross(level, a, b, d.u32()?);
            }
        }
        for _ in 0..d.len()? {
            let c = d.u32()?;
            for _ in 0..d.len()? {
                idx.push_intra(level, c, d.u32()?);
            }
        }
    }
    d.finish()?;
    Ok(idx)
}

/// Writes `art` to `path`.
pub fn save_setup(art: &SetupArtifact, path: impl AsRef<Path>) -> Result<()> {
    let payloads = [
        encode_graph(&art.graph),
        encode_embedder(&art.embedder),
        encode_hierarchy(&art.hierarchy),
        encode_index(&art.index),
    ];
    let total: usize = payloads.iter().map(|p| p.len() + 16).sum::<usize>() + 12;
    let mut out = Vec::with_capacity(total);
    out.extend_from_slice(SETUP_MAGIC);
    out.extend_from_slice(&SETUP_VERSION.to_le_bytes());
    for (tag, p) in TAGS.iter().zip(&payloads) {
        out.extend_from_slice(*tag);
        out.extend_from_slice(&(p.len() as u64).to_le_bytes());
        out.extend_from_slice(p);
        out.extend_from_slice(&crc32fast::hash(p).to_le_bytes());
    }
    let mut f = fs::File::create(path)?;
    f.write_all(&out)?;
    f.sync_all()?;
    Ok(())
}

/// Reads an artifact written by [`save_setup`], verifying the magic, the
/// version, every section checksum and the index against the hierarchy.
pub fn load_setup(path: impl AsRef<Path>) -> Result<SetupArtifact> {
    let buf = fs::read(path)?;
    parse_setup(&buf)
}

fn tag_name(tag: &[u8; 4]) -> &'static str {
    match tag {
        b"GRPH" => "GRPH",
        b"EMBD" => "EMBD",
        b"HIER" => "HIER",
        _ => "INDX",
    }
}

pub(crate) fn parse_setup(buf: &[u8]) -> Result<SetupArtifact> {
    let head = &buf[..buf.len().min(8)];
    if head != &SETUP_MAGIC[..head.len()] {
        return Err(Error::VersionMismatch("not a setup artifact (bad magic)".into()));
    }
    if buf.len() < 12 {
        return Err(Error::ChecksumFailure("header".into()));
    }
    let version = u32::from_le_bytes(buf[8..12].try_into().unwrap());
    if version != SETUP_VERSION {
        return Err(Error::VersionMismatch(format!(
            "file version {version}, supported {SETUP_VERSION}"
        )));
    }
    let mut rest = &buf[12..];
    let mut sections: Vec<&[u8]> = Vec::with_capacity(4);
    for tag in TAGS {
        let name = tag_name(tag);
        if rest.len() < 12 {
            return Err(Error::ChecksumFailure(name.into()));
        }
        if &rest[..4] != tag {
            return Err(Error::VersionMismatch(format!("expected section {name}")));
        }
        let len = u64::from_le_bytes(rest[4..12].try_into().unwrap());
        let body = &rest[12..];
        if (body.len() as u64) < len.saturating_add(4) {
            return Err(Error::ChecksumFailure(name.into()));
        }
        let len = len as usize;
        let payload = &body[..len];
        let crc = u32::from_le_bytes(body[len..len + 4].try_into().unwrap());
        if crc32fast::hash(payload) != crc {
            return Err(Error::ChecksumFailure(name.into()));
        }
        sections.push(payload);
        rest = &body[len + 4..];
    }
    if !rest.is_empty() {
        return Err(Error::VersionMismatch(format!(
            "{} trailing bytes after last section",
            rest.len()
        )));
    }
    let dec = |i: usize| Dec {
        buf: sections[i],
        tag: tag_name(TAGS[i]),
    };
    let graph = decode_graph(dec(0))?;
    let embedder = decode_embedder(dec(1), graph.n_nodes())?;
    let hierarchy = decode_hierarchy(dec(2), graph.n_nodes())?;
    let index = decode_index(dec(3))?;
    let edges = super::EdgeList::from_graph(&graph);
    index.check_consistency(&edges, &hierarchy)?;
    Ok(SetupArtifact {
        graph,
        embedder,
        hierarchy,
        index,
    })
}
