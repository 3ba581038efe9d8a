//! Binary index snapshots.
//!
//! Layout: the magic `BCKT`, a little-endian `u32` format version, then a
//! fixed sequence of sections. Each section is a four-byte tag, a `u64`
//! payload length, the payload and a CRC-32 of the payload. Integers are
//! little-endian; store keys are written as their raw big-endian bytes.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::grid::{Bounds, Grid};
use crate::index::{Index, IndexStats, TrajRecord, WordPolicy};
use crate::model::Point;
use crate::store::{Key, OrderedKv};
use crate::vocab::Vocabulary;

pub const MAGIC: &[u8; 4] = b"BCKT";
pub const FORMAT_VERSION: u32 = 1;

const SECTIONS: [&[u8; 4]; 6] = [b"STAT", b"VOCB", b"GRID", b"TRAJ", b"CMP1", b"CMP2"];

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("not an index snapshot (bad magic)")]
    BadMagic,
    #[error("snapshot format version {found}, expected {FORMAT_VERSION}")]
    VersionMismatch { found: u32 },
    #[error("corrupt snapshot: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn corrupt(msg: impl Into<String>) -> SnapshotError {
    SnapshotError::Corrupt(msg.into())
}

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.buf.extend_from_slice(s.as_bytes());
    }
    fn kv(&mut self, kv: &OrderedKv) {
        self.u64(kv.len() as u64);
        for (k, list) in kv.iter() {
            self.buf.extend_from_slice(k.as_bytes());
            self.u32(list.len() as u32);
            for &v in list {
                self.u32(v);
            }
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], SnapshotError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| corrupt("truncated"))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8, SnapshotError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, SnapshotError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, SnapshotError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, SnapshotError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn len(&mut self) -> Result<usize, SnapshotError> {
        let n = self.u64()?;
        // Every element takes at least one byte, so longer counts are corrupt.
        if n > (self.buf.len() - self.pos) as u64 {
            return Err(corrupt("length exceeds section"));
        }
        Ok(n as usize)
    }
    fn str(&mut self) -> Result<String, SnapshotError> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| corrupt("invalid utf-8"))
    }
    fn sorted_u32s(&mut self) -> Result<Vec<u32>, SnapshotError> {
        let n = self.u32()? as usize;
        if n > (self.buf.len() - self.pos) / 4 {
            return Err(corrupt("list exceeds section"));
        }
        let list = (0..n).map(|_| self.u32()).collect::<Result<Vec<_>, _>>()?;
        if list.is_empty() || !list.windows(2).all(|w| w[0] < w[1]) {
            return Err(corrupt("posting list not sorted"));
        }
        Ok(list)
    }
    fn kv(&mut self) -> Result<OrderedKv, SnapshotError> {
        let n = self.len()?;
        let mut kv = OrderedKv::new();
        let mut prev: Option<Key> = None;
        for _ in 0..n {
            let key = Key::from_bytes(self.take(8)?.try_into().unwrap());
            if prev.is_some_and(|p| p >= key) {
                return Err(corrupt("keys out of order"));
            }
            prev = Some(key);
            kv.put_list(key, self.sorted_u32s()?);
        }
        Ok(kv)
    }
    fn finish(&self) -> Result<(), SnapshotError> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(corrupt("trailing bytes in section"))
        }
    }
}

fn write_stats(w: &mut Writer, s: &IndexStats) {
    w.u64(s.trajectory_count as u64);
    w.u64(s.total_places as u64);
    w.u64(s.keyword_slots);
    w.u64(s.leaf_count as u64);
    w.u64(s.vocabulary_size as u64);
    w.u64(s.component1_entries as u64);
    w.u64(s.component2_entries as u64);
    w.f64(s.total_path_length);
}

/// Serializes the index.
pub fn to_bytes(index: &Index) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());

    let mut sections: Vec<Writer> = (0..SECTIONS.len()).map(|_| Writer::default()).collect();

    write_stats(&mut sections[0], &index.stats());

    let v = &mut sections[1];
    let vocab = index.vocab();
    v.u64(vocab.len() as u64);
    for (i, word) in vocab.words().iter().enumerate() {
        v.str(word);
        v.u32(vocab.df(i as u32));
        v.u64(vocab.place_freq(i as u32));
    }

    let g = &mut sections[2];
    let grid = index.grid();
    let b = grid.bounds();
    g.f64(b.min_x);
    g.f64(b.min_y);
    g.f64(b.side);
    g.u8(grid.max_level());
    g.u64(grid.segment_limit() as u64);
    g.u8(index.policy().code());
    g.u64(grid.leaf_count() as u64);
    for leaf in grid.leaves() {
        g.u32(leaf.code);
        g.u8(leaf.level);
    }

    let t = &mut sections[3];
    t.u64(index.trajs.len() as u64);
    for r in &index.trajs {
        t.str(&r.name);
        t.u32(r.points.len() as u32);
        for p in &r.points {
            t.f64(p.x);
            t.f64(p.y);
        }
    }

    sections[4].kv(&index.comp1);
    sections[5].kv(&index.comp2);

    for (tag, section) in SECTIONS.iter().zip(sections) {
        out.extend_from_slice(*tag);
        out.extend_from_slice(&(section.buf.len() as u64).to_le_bytes());
        out.extend_from_slice(&section.buf);
        out.extend_from_slice(&crc32fast::hash(&section.buf).to_le_bytes());
    }
    out
}

/// Parses and verifies a snapshot.
pub fn from_bytes(bytes: &[u8]) -> Result<Index, SnapshotError> {
    let mut r = Reader::new(bytes);
    if r.take(4).ok() != Some(&MAGIC[..]) {
        return Err(SnapshotError::BadMagic);
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(SnapshotError::VersionMismatch { found: version });
    }
    let mut payloads = Vec::with_capacity(SECTIONS.len());
    for tag in SECTIONS {
        if r.take(4)? != &tag[..] {
            return Err(corrupt(format!(
                "expected section {}",
                String::from_utf8_lossy(tag)
            )));
        }
        let n = r.u64()?;
        let n = usize::try_from(n).map_err(|_| corrupt("section too large"))?;
        let payload = r.take(n)?;
        let crc = r.u32()?;
        if crc32fast::hash(payload) != crc {
            return Err(corrupt(format!(
                "checksum mismatch in section {}",
                String::from_utf8_lossy(tag)
            )));
        }
        payloads.push(payload);
    }
    r.finish()?;

    let mut v = Reader::new(payloads[1]);
    let n = v.len()?;
    let mut words = Vec::with_capacity(n);
    let mut df = Vec::with_capacity(n);
    let mut pf = Vec::with_capacity(n);
    for _ in 0..n {
        words.push(v.str()?);
        df.push(v.u32()?);
        pf.push(v.u64()?);
    }
    v.finish()?;
    let vocab = Vocabulary::from_parts(words, df, pf);
    if vocab.words().len() != vocab.len() {
        return Err(corrupt("duplicate vocabulary word"));
    }

    let mut g = Reader::new(payloads[2]);
    let bounds = Bounds::new(g.f64()?, g.f64()?, g.f64()?)
        .map_err(|e| corrupt(e.to_string()))?;
    let max_level = g.u8()?;
    let segment_limit = g.u64()? as usize;
    let policy = WordPolicy::from_code(g.u8()?).ok_or_else(|| corrupt("unknown word policy"))?;
    let count = g.len()?;
    let mut leaves = BTreeMap::new();
    for _ in 0..count {
        let code = g.u32()?;
        let level = g.u8()?;
        if level > max_level || leaves.insert(code, level).is_some() {
            return Err(corrupt("invalid leaf"));
        }
    }
    g.finish()?;
    check_tiling(&leaves, max_level)?;
    Grid::root(bounds, segment_limit, max_level).map_err(|e| corrupt(e.to_string()))?;
    let grid = Grid::from_parts(bounds, max_level, segment_limit, leaves);

    let mut t = Reader::new(payloads[3]);
    let n = t.len()?;
    let mut trajs = Vec::with_capacity(n);
    for _ in 0..n {
        let name = t.str()?;
        let m = t.u32()? as usize;
        if m == 0 || m > payloads[3].len() / 16 {
            return Err(corrupt("invalid place count"));
        }
        let mut points = Vec::with_capacity(m);
        for _ in 0..m {
            let p = Point::new(t.f64()?, t.f64()?);
            if !bounds.contains(p) {
                return Err(corrupt("place outside bounds"));
            }
            points.push(p);
        }
        trajs.push(TrajRecord::new(name, points));
    }
    t.finish()?;

    let mut c1 = Reader::new(payloads[4]);
    let comp1 = c1.kv()?;
    c1.finish()?;
    let mut c2 = Reader::new(payloads[5]);
    let comp2 = c2.kv()?;
    c2.finish()?;
    for (k, places) in comp2.iter() {
        let len = trajs
            .get(k.first() as usize)
            .map(|r| r.points.len())
            .ok_or_else(|| corrupt("place posting for unknown trajectory"))?;
        if places[0] == 0 || *places.last().unwrap() as usize > len || k.second() as usize >= vocab.len() {
            return Err(corrupt("place posting out of range"));
        }
    }

    let index = Index::from_parts(grid, policy, vocab, trajs, comp1, comp2)
        .map_err(|e| corrupt(e.to_string()))?;

    let mut expected = Writer::default();
    write_stats(&mut expected, &index.stats());
    if expected.buf != payloads[0] {
        return Err(corrupt("stored statistics disagree with contents"));
    }
    Ok(index)
}

/// Leaves must tile the code space exactly.
fn check_tiling(leaves: &BTreeMap<u32, u8>, max_level: u8) -> Result<(), SnapshotError> {
    let total = 1u64 << (2 * max_level as u32);
    let mut next = 0u64;
    for (&code, &level) in leaves {
        let span = 1u64 << (2 * (max_level - level) as u32);
        if code as u64 != next || !(code as u64).is_multiple_of(span) {
            return Err(corrupt("leaves do not tile the space"));
        }
        next += span;
    }
    if next != total {
        return Err(corrupt("leaves do not tile the space"));
    }
    Ok(())
}

pub fn save(index: &Index, path: impl AsRef<Path>) -> Result<(), SnapshotError> {
    fs::write(path, to_bytes(index))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Index, SnapshotError> {
    from_bytes(&fs::read(path)?)
}
