//! Run manifests and dataset fingerprints.

use std::path::{Path, PathBuf};

use rdae::{Error, Result};
use sha2::{Digest, Sha256};

/// First eight bytes of the SHA-256 digest, as hex.
pub fn fingerprint(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut v = [0u8; 8];
    v.copy_from_slice(&digest[..8]);
    format!("{:016x}", u64::from_be_bytes(v))
}

/// `<path>.manifest.toml`
pub fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.toml");
    PathBuf::from(s)
}

pub fn write(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let text = toml::to_string(value)
        .map_err(|e| Error::Internal(format!("manifest serialization failed: {e}")))?;
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}
