//! On-disk cache for kernel tables.
//!
//! Layout (little endian): magic `CLKT`, format version `u32`, `d: u32`,
//! mode `u8`, three zero bytes, `kmax: u32`, `radius: u32`, value count
//! `u64`, then the `f64` payload. The cache only ever stores values that were
//! computed by this crate, so loading one gives bit-identical results to
//! recomputing.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::kernel::{FreeKernel, KernelMode};

pub const CACHE_MAGIC: &[u8; 4] = b"CLKT";
pub const CACHE_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CacheKey {
    pub d: u32,
    pub mode: KernelMode,
    pub kmax: u32,
    pub radius: u32,
}

impl CacheKey {
    pub fn file_name(&self) -> String {
        format!("kernel-d{}-{:?}-k{}-r{}.bin", self.d, self.mode, self.kmax, self.radius).to_lowercase()
    }
}

pub fn write_table(path: &Path, key: &CacheKey, values: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(32 + 8 * values.len());
    buf.extend_from_slice(CACHE_MAGIC);
    buf.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    buf.extend_from_slice(&key.d.to_le_bytes());
    buf.push(key.mode.code());
    buf.extend_from_slice(&[0, 0, 0]);
    buf.extend_from_slice(&key.kmax.to_le_bytes());
    buf.extend_from_slice(&key.radius.to_le_bytes());
    buf.extend_from_slice(&(values.len() as u64).to_le_bytes());
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    fs::File::create(&tmp)?.write_all(&buf)?;
    fs::rename(tmp, path)?;
    Ok(())
}

pub fn read_table(path: &Path) -> Result<(CacheKey, Vec<f64>)> {
    let bad = |reason: &str| Error::Format { path: path.to_path_buf(), reason: reason.into() };
    let mut buf = Vec::new();
    fs::File::open(path)?.read_to_end(&mut buf)?;
    if buf.len() < 32 || &buf[..4] != CACHE_MAGIC {
        return Err(bad("not a kernel cache file"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(buf[o..o + 4].try_into().unwrap());
    if u32_at(4) != CACHE_VERSION {
        return Err(bad("unsupported cache version"));
    }
    let mode = KernelMode::from_code(buf[12]).ok_or_else(|| bad("unknown kernel mode"))?;
    let key = CacheKey { d: u32_at(8), mode, kmax: u32_at(16), radius: u32_at(20) };
    let n = u64::from_le_bytes(buf[24..32].try_into().unwrap()) as usize;
    if buf.len() != 32 + 8 * n {
        return Err(bad("payload length does not match header"));
    }
    let values = buf[32..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((key, values))
}

/// `p_k(0,0)` for `k ≤ kmax` from the free kernel, through the cache
/// directory when one is given.
pub fn cached_return_probs(dir: Option<&Path>, d: usize, kmax: usize) -> Result<Vec<f64>> {
    let key = CacheKey { d: d as u32, mode: KernelMode::Free, kmax: kmax as u32, radius: kmax.div_ceil(2) as u32 };
    let path: Option<PathBuf> = dir.map(|p| p.join(key.file_name()));
    if let Some(p) = &path {
        if p.exists() {
            let (found, values) = read_table(p)?;
            if found != key || values.len() != kmax + 1 {
                return Err(Error::Format { path: p.clone(), reason: "cache header does not match its file name".into() });
            }
            return Ok(values);
        }
    }
    let values = FreeKernel::new(d, kmax)?.return_probs();
    if let Some(p) = &path {
        write_table(p, &key, &values)?;
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_round_trip_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let a = cached_return_probs(Some(dir.path()), 4, 12).unwrap();
        let b = cached_return_probs(Some(dir.path()), 4, 12).unwrap();
        let c = cached_return_probs(None, 4, 12).unwrap();
        assert_eq!(a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), c.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        assert_eq!(a, b);
    }

    #[test]
    fn truncated_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.bin");
        let key = CacheKey { d: 3, mode: KernelMode::Torus, kmax: 2, radius: 1 };
        write_table(&p, &key, &[1.0, 0.0, 0.5]).unwrap();
        assert_eq!(read_table(&p).unwrap().0, key);
        let bytes = std::fs::read(&p).unwrap();
        std::fs::write(&p, &bytes[..bytes.len() - 1]).unwrap();
        assert!(matches!(read_table(&p), Err(Error::Format { .. })));
    }
}
