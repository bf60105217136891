//! Model files.
//!
//! Binary layout (little-endian):
//!
//! ```text
//! magic      8 bytes  "DEFRELMB"
//! version    u32
//! geometry   u8       0 = euclidean, 1 = hyperbolic
//! dim        u32
//! curvature  f64
//! vocab      u64
//! roles      u32
//! entities   vocab x { len u32, utf-8 word, dim x f64, b_s f64, b_o f64 }
//! relations  roles x { len u32, utf-8 role name, dim x f64 (r), dim x f64 (R diagonal) }
//! ```
//!
//! The text layout carries the same records, tab separated, with every float
//! written to 17 significant digits:
//!
//! ```text
//! defrel-text 1
//! geometry<TAB>hyperbolic
//! dim<TAB>2
//! curvature<TAB>1.0000000000000000e0
//! vocab<TAB>V
//! roles<TAB>11
//! E<TAB>word<TAB>x_1 .. x_d<TAB>b_s<TAB>b_o
//! R<TAB>role<TAB>r_1 .. r_d<TAB>R_1 .. R_d
//! ```

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Curvature;
use crate::model::{Geometry, ModelState, RelationParams, Role, Vocabulary};

pub const MAGIC: &[u8; 8] = b"DEFRELMB";
pub const FORMAT_VERSION: u32 = 1;
const TEXT_HEADER: &str = "defrel-text";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Binary,
    Text,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Format> {
        match s {
            "binary" | "bin" => Ok(Format::Binary),
            "text" | "txt" => Ok(Format::Text),
            other => Err(Error::Invalid(format!("unknown model format {other:?}"))),
        }
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so `path` never holds a partial file.
pub fn write_atomic<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<&mut File>) -> io::Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        write(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn encode_binary(state: &ModelState) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + state.entities.len() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(match state.geometry {
        Geometry::Euclidean => 0,
        Geometry::Hyperbolic => 1,
    });
    out.extend_from_slice(&(state.dim as u32).to_le_bytes());
    out.extend_from_slice(&state.curvature.value().to_le_bytes());
    out.extend_from_slice(&(state.num_entities() as u64).to_le_bytes());
    out.extend_from_slice(&(state.relations.len() as u32).to_le_bytes());
    let put_str = |out: &mut Vec<u8>, s: &str| {
        out.extend_from_slice(&(s.len() as u32).to_le_bytes());
        out.extend_from_slice(s.as_bytes());
    };
    let put_f64s = |out: &mut Vec<u8>, xs: &[f64]| xs.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes()));
    for (id, word) in state.vocab.words().iter().enumerate() {
        put_str(&mut out, word);
        put_f64s(&mut out, state.entity(id));
        put_f64s(&mut out, &[state.subject_bias[id], state.object_bias[id]]);
    }
    for (role, rel) in Role::ALL.iter().zip(&state.relations) {
        put_str(&mut out, role.name());
        put_f64s(&mut out, &rel.translation);
        put_f64s(&mut out, &rel.diag);
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Corrupt {
                offset: self.pos as u64,
                msg: format!("truncated while reading {what} ({n} bytes needed, {} left)", self.buf.len() - self.pos),
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        let bytes = self.take(n * 8, what)?;
        Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn string(&mut self, what: &str) -> Result<String> {
        let at = self.pos as u64;
        let n = self.u32(what)? as usize;
        let bytes = self.take(n, what)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| Error::Corrupt { offset: at, msg: format!("{what} is not UTF-8") })
    }

    fn corrupt(&self, msg: impl Into<String>) -> Error {
        Error::Corrupt { offset: self.pos as u64, msg: msg.into() }
    }
}

pub fn decode_binary(buf: &[u8]) -> Result<ModelState> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(8, "magic")? != MAGIC {
        return Err(Error::Corrupt { offset: 0, msg: "bad magic".into() });
    }
    let version = r.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(Error::Version { found: version, expected: FORMAT_VERSION });
    }
    let geometry = match r.u8("geometry")? {
        0 => Geometry::Euclidean,
        1 => Geometry::Hyperbolic,
        g => return Err(r.corrupt(format!("unknown geometry tag {g}"))),
    };
    let dim = r.u32("dim")? as usize;
    let curvature = Curvature::new(r.f64("curvature")?).map_err(|e| r.corrupt(e.to_string()))?;
    let vocab_size = r.u64("vocab size")? as usize;
    let roles = r.u32("role count")? as usize;
    if roles != Role::COUNT {
        return Err(r.corrupt(format!("expected {} roles, header says {roles}", Role::COUNT)));
    }
    if dim == 0 {
        return Err(r.corrupt("zero dimension"));
    }
    // Reject absurd headers before allocating.
    let min_record = 4 + 8 * (dim + 2);
    if vocab_size.saturating_mul(min_record) > buf.len() {
        return Err(r.corrupt(format!("vocab size {vocab_size} exceeds file size")));
    }
    let mut words = Vec::with_capacity(vocab_size);
    let mut entities = Vec::with_capacity(vocab_size * dim);
    let mut subject_bias = Vec::with_capacity(vocab_size);
    let mut object_bias = Vec::with_capacity(vocab_size);
    for _ in 0..vocab_size {
        words.push(r.string("entity word")?);
        entities.extend(r.f64s(dim, "entity vector")?);
        subject_bias.push(r.f64("subject bias")?);
        object_bias.push(r.f64("object bias")?);
    }
    let mut relations = Vec::with_capacity(roles);
    for expected in Role::ALL {
        let at = r.pos;
        let name = r.string("role name")?;
        if name != expected.name() {
            return Err(Error::Corrupt { offset: at as u64, msg: format!("expected role {expected}, found {name:?}") });
        }
        let translation = r.f64s(dim, "role translation")?;
        let diag = r.f64s(dim, "role diagonal")?;
        relations.push(RelationParams { translation, diag });
    }
    if r.pos != buf.len() {
        return Err(r.corrupt("trailing bytes"));
    }
    let vocab = Vocabulary::from_ordered(words).map_err(|e| Error::Corrupt { offset: 0, msg: e.to_string() })?;
    Ok(ModelState { geometry, curvature, dim, vocab, entities, subject_bias, object_bias, relations })
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn encode_text(state: &ModelState) -> String {
    let mut out = String::new();
    out.push_str(&format!("{TEXT_HEADER} {FORMAT_VERSION}\n"));
    out.push_str(&format!("geometry\t{}\n", state.geometry));
    out.push_str(&format!("dim\t{}\n", state.dim));
    out.push_str(&format!("curvature\t{}\n", fmt_f64(state.curvature.value())));
    out.push_str(&format!("vocab\t{}\n", state.num_entities()));
    out.push_str(&format!("roles\t{}\n", state.relations.len()));
    for (id, word) in state.vocab.words().iter().enumerate() {
        out.push_str("E\t");
        out.push_str(word);
        for x in state.entity(id).iter().chain([&state.subject_bias[id], &state.object_bias[id]]) {
            out.push('\t');
            out.push_str(&fmt_f64(*x));
        }
        out.push('\n');
    }
    for (role, rel) in Role::ALL.iter().zip(&state.relations) {
        out.push_str("R\t");
        out.push_str(role.name());
        for x in rel.translation.iter().chain(&rel.diag) {
            out.push('\t');
            out.push_str(&fmt_f64(*x));
        }
        out.push('\n');
    }
    out
}

pub fn decode_text(path: &Path, text: &str) -> Result<ModelState> {
    let err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| lines.next().ok_or_else(|| err(0, format!("truncated: missing {what}")));

    let (n, head) = next("header")?;
    let version = head
        .strip_prefix(TEXT_HEADER)
        .and_then(|v| v.trim().parse::<u32>().ok())
        .ok_or_else(|| err(n, "not a model file".into()))?;
    if version != FORMAT_VERSION {
        return Err(Error::Version { found: version, expected: FORMAT_VERSION });
    }
    let mut field = |key: &str| -> Result<(usize, String)> {
        let (n, l) = next(key)?;
        match l.split_once('\t') {
            Some((k, v)) if k == key => Ok((n, v.to_string())),
            _ => Err(err(n, format!("expected {key}"))),
        }
    };
    let (n, g) = field("geometry")?;
    let geometry: Geometry = g.parse().map_err(|e: Error| err(n, e.to_string()))?;
    let (n, d) = field("dim")?;
    let dim: usize = d.parse().ok().filter(|d| *d > 0).ok_or_else(|| err(n, "bad dim".into()))?;
    let (n, c) = field("curvature")?;
    let curvature = c
        .parse::<f64>()
        .ok()
        .and_then(|c| Curvature::new(c).ok())
        .ok_or_else(|| err(n, "bad curvature".into()))?;
    let (n, v) = field("vocab")?;
    let vocab_size: usize = v.parse().map_err(|_| err(n, "bad vocab size".into()))?;
    let (n, m) = field("roles")?;
    if m.parse::<usize>().ok() != Some(Role::COUNT) {
        return Err(err(n, format!("expected {} roles", Role::COUNT)));
    }

    let floats = |n: usize, fields: &[&str]| -> Result<Vec<f64>> {
        fields.iter().map(|f| f.parse::<f64>().map_err(|_| err(n, format!("bad number {f:?}")))).collect()
    };
    let mut words = Vec::with_capacity(vocab_size);
    let mut entities = Vec::with_capacity(vocab_size * dim);
    let mut subject_bias = Vec::with_capacity(vocab_size);
    let mut object_bias = Vec::with_capacity(vocab_size);
    for _ in 0..vocab_size {
        let (n, l) = next("entity record")?;
        let f: Vec<&str> = l.split('\t').collect();
        if f.len() != dim + 4 || f[0] != "E" {
            return Err(err(n, "malformed entity record".into()));
        }
        let xs = floats(n, &f[2..])?;
        words.push(f[1].to_string());
        entities.extend_from_slice(&xs[..dim]);
        subject_bias.push(xs[dim]);
        object_bias.push(xs[dim + 1]);
    }
    let mut relations = Vec::with_capacity(Role::COUNT);
    for expected in Role::ALL {
        let (n, l) = next("relation record")?;
        let f: Vec<&str> = l.split('\t').collect();
        if f.len() != 2 * dim + 2 || f[0] != "R" || f[1] != expected.name() {
            return Err(err(n, format!("malformed relation record (expected {expected})")));
        }
        let xs = floats(n, &f[2..])?;
        relations.push(RelationParams { translation: xs[..dim].to_vec(), diag: xs[dim..].to_vec() });
    }
    if let Some((n, l)) = next("end").ok().filter(|(_, l)| !l.trim().is_empty()) {
        return Err(err(n, format!("unexpected trailing line {l:?}")));
    }
    let vocab = Vocabulary::from_ordered(words).map_err(|e| err(0, e.to_string()))?;
    Ok(ModelState { geometry, curvature, dim, vocab, entities, subject_bias, object_bias, relations })
}

pub fn save_model(state: &ModelState, path: &Path, format: Format) -> Result<()> {
    let bytes = match format {
        Format::Binary => encode_binary(state),
        Format::Text => encode_text(state).into_bytes(),
    };
    write_atomic(path, |w| w.write_all(&bytes))
}

/// Loads either layout, detected from the leading bytes.
pub fn load_model(path: &Path) -> Result<ModelState> {
    let buf = fs::read(path).map_err(|e| Error::io(path, e))?;
    if buf.starts_with(MAGIC) {
        decode_binary(&buf)
    } else if buf.starts_with(TEXT_HEADER.as_bytes()) {
        let text = std::str::from_utf8(&buf).map_err(|e| Error::Corrupt {
            offset: e.valid_up_to() as u64,
            msg: "invalid UTF-8".into(),
        })?;
        decode_text(path, text)
    } else {
        decode_binary(&buf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::init_model;
    use proptest::prelude::*;

    fn model(geometry: Geometry, dim: usize, seed: u64) -> ModelState {
        let vocab = Vocabulary::from_words(["alpha", "beta", "gamma_ray", "δέλτα"]);
        let mut m = init_model(vocab, dim, geometry, Curvature::new(0.7).unwrap(), seed).unwrap();
        m.subject_bias[1] = -0.125;
        m.object_bias[3] = 1.0 / 3.0;
        m.relations[2].translation[0] = 1e-300;
        m.relations[4].diag[dim - 1] = -2.5;
        m
    }

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let m = model(Geometry::Hyperbolic, 3, 4);
        let back = decode_binary(&encode_binary(&m)).unwrap();
        assert_eq!(back, m);
        assert_eq!(encode_binary(&back), encode_binary(&m));
    }

    #[test]
    fn text_round_trip() {
        let m = model(Geometry::Euclidean, 2, 9);
        let text = encode_text(&m);
        assert!(text.starts_with("defrel-text 1\ngeometry\teuclidean\ndim\t2\n"));
        let back = decode_text(Path::new("m.txt"), &text).unwrap();
        for (a, b) in back.entities.iter().zip(&m.entities) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(back, m);
    }

    #[test]
    fn truncation_names_offset() {
        let bytes = encode_binary(&model(Geometry::Hyperbolic, 3, 1));
        for cut in [4, 13, 40, bytes.len() - 1] {
            match decode_binary(&bytes[..cut]) {
                Err(Error::Corrupt { offset, .. }) => assert!(offset <= cut as u64),
                other => panic!("cut {cut}: {other:?}"),
            }
        }
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(decode_binary(&extra), Err(Error::Corrupt { .. })));
    }

    #[test]
    fn version_mismatch() {
        let mut bytes = encode_binary(&model(Geometry::Hyperbolic, 2, 1));
        bytes[8..12].copy_from_slice(&7u32.to_le_bytes());
        assert!(matches!(decode_binary(&bytes), Err(Error::Version { found: 7, expected: 1 })));
        let text = encode_text(&model(Geometry::Hyperbolic, 2, 1)).replacen("defrel-text 1", "defrel-text 2", 1);
        assert!(matches!(decode_text(Path::new("x"), &text), Err(Error::Version { found: 2, .. })));
    }

    #[test]
    fn truncated_text() {
        let text = encode_text(&model(Geometry::Hyperbolic, 2, 1));
        let cut: String = text.lines().take(8).map(|l| format!("{l}\n")).collect();
        assert!(matches!(decode_text(Path::new("x"), &cut), Err(Error::Parse { .. })));
    }

    #[test]
    fn save_and_load_files() {
        let dir = tempfile::tempdir().unwrap();
        let m = model(Geometry::Hyperbolic, 4, 2);
        for (name, fmt) in [("m.bin", Format::Binary), ("m.txt", Format::Text)] {
            let p = dir.path().join(name);
            save_model(&m, &p, fmt).unwrap();
            assert_eq!(load_model(&p).unwrap(), m);
        }
        let p = dir.path().join("junk");
        fs::write(&p, b"garbage!").unwrap();
        assert!(load_model(&p).is_err());
    }

    proptest! {
        #[test]
        fn binary_round_trip_any_values(xs in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 8)) {
            let mut m = model(Geometry::Euclidean, 2, 0);
            m.entities.copy_from_slice(&xs);
            let back = decode_binary(&encode_binary(&m)).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
