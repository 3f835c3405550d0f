//! On-disk cache of spectral bases.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic   8 bytes  "GSSLEIG1"
//! n       u64
//! p       u64
//! key     32 bytes SHA-256 of the affinity matrix and p
//! lambda  p × f64
//! u       n × p f64, row-major
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use gssl_core::spectral::SpectralBasis;
use gssl_core::{CsrMatrix, Mat};
use sha2::{Digest, Sha256};

use crate::error::{GsslError, Result};

const MAGIC: &[u8; 8] = b"GSSLEIG1";
const HEADER: usize = 8 + 8 + 8 + 32;

/// Content key of `(W, p)`.
pub fn basis_key(w: &CsrMatrix, p: usize) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update((w.rows() as u64).to_le_bytes());
    for &i in w.indptr() {
        h.update((i as u64).to_le_bytes());
    }
    for &j in w.indices() {
        h.update((j as u64).to_le_bytes());
    }
    for &v in w.values() {
        h.update(v.to_bits().to_le_bytes());
    }
    h.update((p as u64).to_le_bytes());
    h.finalize().into()
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Cache file path for `key` inside `dir`.
pub fn cache_path(dir: &Path, key: &[u8; 32]) -> PathBuf {
    dir.join(format!("{}.eig", hex(key)))
}

pub fn encode(basis: &SpectralBasis, key: &[u8; 32]) -> Vec<u8> {
    let (n, p) = (basis.n(), basis.p());
    let mut out = Vec::with_capacity(HEADER + 8 * p * (n + 1));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(p as u64).to_le_bytes());
    out.extend_from_slice(key);
    for &v in &basis.lambda {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for &v in basis.u.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn u64_at(bytes: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

/// Decodes a cache file, checking it belongs to `expected_key`.
pub fn decode(path: &Path, bytes: &[u8], expected_key: &[u8; 32]) -> Result<SpectralBasis> {
    if bytes.len() < HEADER || &bytes[..8] != MAGIC {
        return Err(GsslError::data(path, "not a spectral cache file (bad magic or short header)"));
    }
    let n = usize::try_from(u64_at(bytes, 8)).map_err(|_| GsslError::data(path, "n overflows"))?;
    let p = usize::try_from(u64_at(bytes, 16)).map_err(|_| GsslError::data(path, "p overflows"))?;
    if &bytes[24..56] != expected_key {
        return Err(GsslError::data(path, "cache key does not match this graph and p"));
    }
    let floats = n
        .checked_add(1)
        .and_then(|r| r.checked_mul(p))
        .ok_or_else(|| GsslError::data(path, "size overflows"))?;
    if bytes.len() != HEADER + 8 * floats {
        return Err(GsslError::data(
            path,
            format!("expected {} bytes for n={n}, p={p}, found {}", HEADER + 8 * floats, bytes.len()),
        ));
    }
    let vals: Vec<f64> = bytes[HEADER..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let lambda = vals[..p].to_vec();
    let u = Mat::from_vec(n, p, vals[p..].to_vec())?;
    Ok(SpectralBasis { u, lambda })
}

/// Loads the basis for `(w, p)` from `dir`, computing and storing it with
/// `compute` on a miss.
pub fn load_or_compute(
    dir: &Path,
    w: &CsrMatrix,
    p: usize,
    compute: impl FnOnce() -> Result<SpectralBasis>,
) -> Result<SpectralBasis> {
    let key = basis_key(w, p);
    let path = cache_path(dir, &key);
    if let Ok(bytes) = fs::read(&path) {
        return decode(&path, &bytes, &key);
    }
    let basis = compute()?;
    fs::create_dir_all(dir).map_err(|e| GsslError::io(dir, e))?;
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| GsslError::io(&tmp, e))?;
    f.write_all(&encode(&basis, &key)).map_err(|e| GsslError::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, &path).map_err(|e| GsslError::io(&path, e))?;
    Ok(basis)
}
