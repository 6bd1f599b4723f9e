//! The `.htc` cube container.
//!
//! Layout (little-endian):
//!
//! ```text
//! offset  size   field
//! 0       4      magic "HTC1"
//! 4       4      n1 (u32)
//! 8       4      n2 (u32)
//! 12      4      n3 (u32)
//! 16      4*n    payload: n = n1*n2*n3 IEEE-754 f32 samples in cube
//!                storage order (index (i,j,k) at i + n1*j + n1*n2*k)
//! ```
//!
//! The file size must be exactly `16 + 4*n` bytes. Samples are promoted
//! to f64 in memory and truncated back to f32 on write, so a
//! write-after-read roundtrip reproduces the payload bit-for-bit.

use std::fs;
use std::path::Path;

use star_core::Cube;

use crate::{CliError, Result};

pub const MAGIC: [u8; 4] = *b"HTC1";
pub const HEADER_LEN: usize = 16;

/// Serializes a cube; NaN/Inf samples are refused.
pub fn encode_cube(cube: &Cube) -> Result<Vec<u8>> {
    cube.ensure_finite("cube payload")?;
    let (n1, n2, n3) = cube.dims();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * cube.len());
    out.extend_from_slice(&MAGIC);
    for dim in [n1, n2, n3] {
        let v = u32::try_from(dim)
            .map_err(|_| CliError::Format(format!("dimension {dim} exceeds u32")))?;
        out.extend_from_slice(&v.to_le_bytes());
    }
    for &sample in cube.data() {
        out.extend_from_slice(&(sample as f32).to_le_bytes());
    }
    Ok(out)
}

/// Parses a cube from raw bytes.
pub fn decode_cube(bytes: &[u8]) -> Result<Cube> {
    if bytes.len() < HEADER_LEN {
        return Err(CliError::Format(format!(
            "file too short for a header: {} bytes",
            bytes.len()
        )));
    }
    if bytes[..4] != MAGIC {
        return Err(CliError::Format(format!(
            "bad magic {:02x?}, expected {:02x?}",
            &bytes[..4],
            MAGIC
        )));
    }
    let dim_at = |off: usize| {
        u32::from_le_bytes(bytes[off..off + 4].try_into().expect("bounds checked")) as usize
    };
    let (n1, n2, n3) = (dim_at(4), dim_at(8), dim_at(12));
    if n1 == 0 || n2 == 0 || n3 == 0 {
        return Err(CliError::Format(format!(
            "zero dimension in header: {n1}x{n2}x{n3}"
        )));
    }
    let n = n1
        .checked_mul(n2)
        .and_then(|v| v.checked_mul(n3))
        .ok_or_else(|| CliError::Format("dimension product overflows".into()))?;
    let want = HEADER_LEN + 4 * n;
    if bytes.len() != want {
        return Err(CliError::Format(format!(
            "payload size mismatch: file is {} bytes, header implies {want}",
            bytes.len()
        )));
    }
    let mut data = Vec::with_capacity(n);
    for chunk in bytes[HEADER_LEN..].chunks_exact(4) {
        let v = f32::from_le_bytes(chunk.try_into().expect("chunks_exact"));
        data.push(v as f64);
    }
    let cube = Cube::from_vec((n1, n2, n3), data)?;
    cube.ensure_finite("cube payload")?;
    Ok(cube)
}

pub fn read_cube(path: &Path) -> Result<Cube> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::Format(format!("cannot read {}: {e}", path.display())))?;
    decode_cube(&bytes)
}

pub fn write_cube(path: &Path, cube: &Cube) -> Result<()> {
    let bytes = encode_cube(cube)?;
    fs::write(path, bytes)
        .map_err(|e| CliError::Format(format!("cannot write {}: {e}", path.display())))
}
