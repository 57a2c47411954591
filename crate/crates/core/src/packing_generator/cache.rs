//! The `APKG` binary cache.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic "APKG" | version u32 | fingerprint [u8; 32] | exact u8 | dim u8
//! | cutoff kind u8 | cutoff value f64 | scale i128
//! | levels u32 | peak frontier u64 | nodes u64 | dedup hits u64 | pruned u64
//! | descriptor length u32 | descriptor bytes | record count u64 | records
//! ```
//!
//! Exact records are `4 x i128` holding coordinates multiplied by `scale`;
//! float records are `4 x f64` (circles) or `5 x f64` (spheres) in the order
//! `b, bhat, b*x, b*y(, b*z)`.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::engine::GenerationStats;
use super::spec::{GenerationCutoff, PackingSpec};
use super::store::{PackingStore, Records};
use crate::error::{CacheError, Error, Result};

pub const MAGIC: &[u8; 4] = b"APKG";
pub const FORMAT_VERSION: u32 = 1;

fn mode_name(exact: bool) -> &'static str {
    if exact {
        "exact"
    } else {
        "float"
    }
}

/// Serializes the store into a byte buffer.
pub fn to_bytes(store: &PackingStore) -> Vec<u8> {
    let mut out = Vec::with_capacity(128 + store.len() * 64);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&store.fingerprint());
    out.push(store.is_exact() as u8);
    out.push(store.dim() as u8);
    out.push(store.cutoff.kind_code());
    out.extend_from_slice(&store.cutoff.value_f64().to_le_bytes());
    let scale: i128 = match &store.records {
        Records::Exact4 { scale, .. } => *scale,
        _ => 1,
    };
    out.extend_from_slice(&scale.to_le_bytes());
    let st = &store.stats;
    out.extend_from_slice(&st.levels.to_le_bytes());
    for v in [st.peak_frontier, st.nodes_expanded, st.dedup_hits, st.pruned] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let desc = store.spec.descriptor();
    out.extend_from_slice(&(desc.len() as u32).to_le_bytes());
    out.extend_from_slice(desc.as_bytes());
    out.extend_from_slice(&(store.len() as u64).to_le_bytes());
    match &store.records {
        Records::Exact4 { rows, .. } => {
            for r in rows {
                for x in r {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
        }
        Records::Float4(rows) => {
            for r in rows {
                for x in r {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
        }
        Records::Float5(rows) => {
            for r in rows {
                for x in r {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
        }
    }
    out
}

/// Writes the cache atomically (temporary file, then rename).
pub fn save(store: &PackingStore, path: &Path) -> Result<()> {
    let bytes = to_bytes(store);
    let tmp = path.with_extension("apkg.tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        w.write_all(&bytes)?;
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

struct Reader<R: Read> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner.read_exact(&mut buf).map_err(|e| truncated(e, what))?;
        Ok(buf)
    }
    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.bytes::<1>(what)?[0])
    }
    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes(what)?))
    }
    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes(what)?))
    }
    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes(what)?))
    }
    fn i128(&mut self, what: &str) -> Result<i128> {
        Ok(i128::from_le_bytes(self.bytes(what)?))
    }
}

fn truncated(e: io::Error, what: &str) -> Error {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        CacheError::Truncated(format!("while reading {what}")).into()
    } else {
        Error::Io(e)
    }
}

/// Parses a cache from any reader.
pub fn read_from<R: Read>(inner: R) -> Result<PackingStore> {
    let mut r = Reader { inner };
    let magic: [u8; 4] = r.bytes("magic").map_err(|e| match e {
        Error::Cache(CacheError::Truncated(_)) => CacheError::BadMagic.into(),
        other => other,
    })?;
    if &magic != MAGIC {
        return Err(CacheError::BadMagic.into());
    }
    let version = r.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(CacheError::Version {
            found: version,
            expected: FORMAT_VERSION,
        }
        .into());
    }
    let fingerprint: [u8; 32] = r.bytes("fingerprint")?;
    let exact = r.u8("mode flag")? != 0;
    let dim = r.u8("dimension")?;
    let kind = r.u8("cutoff kind")?;
    let value = r.f64("cutoff value")?;
    let cutoff = GenerationCutoff::from_code(kind, value)
        .ok_or_else(|| CacheError::Corrupt(format!("unknown cutoff kind {kind}")))?;
    let scale = r.i128("scale")?;
    let stats = GenerationStats {
        levels: r.u32("statistics")?,
        peak_frontier: r.u64("statistics")?,
        nodes_expanded: r.u64("statistics")?,
        dedup_hits: r.u64("statistics")?,
        pruned: r.u64("statistics")?,
    };
    let len = r.u32("descriptor length")? as usize;
    if len > 1 << 20 {
        return Err(CacheError::Corrupt("descriptor too long".into()).into());
    }
    let mut desc = vec![0u8; len];
    r.inner
        .read_exact(&mut desc)
        .map_err(|e| truncated(e, "descriptor"))?;
    let desc = String::from_utf8(desc).map_err(|_| CacheError::Corrupt("descriptor is not UTF-8".into()))?;
    let spec = PackingSpec::from_descriptor(&desc)
        .map_err(|e| CacheError::Corrupt(format!("bad descriptor: {e}")))?;
    if spec.fingerprint() != fingerprint {
        return Err(CacheError::Fingerprint {
            found: hex::encode(fingerprint),
            expected: hex::encode(spec.fingerprint()),
        }
        .into());
    }
    if spec.is_exact() != exact || spec.dim() as u8 != dim {
        return Err(CacheError::Corrupt("header disagrees with descriptor".into()).into());
    }
    let count = r.u64("record count")? as usize;
    let width = if exact { 16 * 4 } else { 8 * (dim as usize + 2) };
    let mut body = Vec::new();
    r.inner
        .read_to_end(&mut body)
        .map_err(|e| truncated(e, "records"))?;
    if body.len() < count * width {
        return Err(CacheError::Truncated(format!(
            "expected {} record bytes, found {}",
            count * width,
            body.len()
        ))
        .into());
    }
    if body.len() > count * width {
        return Err(CacheError::Corrupt("trailing bytes after records".into()).into());
    }
    let records = if exact {
        let rows = body
            .chunks_exact(64)
            .map(|c| {
                let mut r = [0i128; 4];
                for (k, x) in r.iter_mut().enumerate() {
                    *x = i128::from_le_bytes(c[16 * k..16 * k + 16].try_into().unwrap());
                }
                r
            })
            .collect();
        Records::Exact4 { scale, rows }
    } else if dim == 2 {
        Records::Float4(float_rows::<4>(&body))
    } else {
        Records::Float5(float_rows::<5>(&body))
    };
    Ok(PackingStore {
        spec,
        cutoff,
        records,
        stats,
    })
}

fn float_rows<const D: usize>(body: &[u8]) -> Vec<[f64; D]> {
    body.chunks_exact(8 * D)
        .map(|c| {
            let mut r = [0.0; D];
            for (k, x) in r.iter_mut().enumerate() {
                *x = f64::from_le_bytes(c[8 * k..8 * k + 8].try_into().unwrap());
            }
            r
        })
        .collect()
}

pub fn load(path: &Path) -> Result<PackingStore> {
    read_from(BufReader::new(File::open(path)?))
}

/// Loads a cache and checks it against what the caller's pipeline expects.
pub fn load_expecting(
    path: &Path,
    spec: Option<&PackingSpec>,
    exact: Option<bool>,
) -> Result<PackingStore> {
    let store = load(path)?;
    if let Some(want) = exact {
        if store.is_exact() != want {
            return Err(CacheError::ModeMismatch {
                found: mode_name(store.is_exact()),
                expected: mode_name(want),
            }
            .into());
        }
    }
    if let Some(spec) = spec {
        if spec.fingerprint() != store.fingerprint() {
            return Err(CacheError::Fingerprint {
                found: hex::encode(store.fingerprint()),
                expected: hex::encode(spec.fingerprint()),
            }
            .into());
        }
    }
    Ok(store)
}
