//! Binary parameter dumps.
//!
//! Layout, all little-endian: magic `ACNET\0\0\0`, format version (u32),
//! element width in bytes (u32), the six shape fields (u32 each), config hash
//! length (u32) and bytes, parameter count (u64), then the raw parameters.

use std::io::{Read, Write};

use thiserror::Error;

use super::{Net, NetShape, Scalar};

const MAGIC: &[u8; 8] = b"ACNET\0\0\0";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a network checkpoint")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("checkpoint holds {found}-byte floats, expected {expected}")]
    Dtype { found: u32, expected: u32 },
    #[error("parameter count {found} does not match shape ({expected})")]
    Count { found: u64, expected: u64 },
    #[error("checkpoint config hash {found} does not match {expected}")]
    ConfigHash { found: String, expected: String },
}

pub fn save_checkpoint<F: Scalar, W: Write>(net: &Net<F>, config_hash: &str, mut out: W) -> Result<(), CheckpointError> {
    let s = net.shape();
    let mut buf = Vec::with_capacity(64 + net.params.len() * F::BYTES);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(F::BYTES as u32).to_le_bytes());
    for dim in [s.input, s.seq_len, s.embed, s.hidden, s.dense, s.outputs] {
        buf.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    buf.extend_from_slice(&(config_hash.len() as u32).to_le_bytes());
    buf.extend_from_slice(config_hash.as_bytes());
    buf.extend_from_slice(&(net.params.len() as u64).to_le_bytes());
    for &p in &net.params {
        p.write_le(&mut buf);
    }
    out.write_all(&buf)?;
    Ok(())
}

fn u32_at(r: &mut impl Read) -> Result<u32, CheckpointError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// Reads a checkpoint, returning the network and its recorded config hash.
/// Pass `expect_hash` to refuse checkpoints from a different configuration.
pub fn load_checkpoint<F: Scalar, R: Read>(
    mut input: R,
    expect_hash: Option<&str>,
) -> Result<(Net<F>, String), CheckpointError> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = u32_at(&mut input)?;
    if version != VERSION {
        return Err(CheckpointError::Version(version));
    }
    let width = u32_at(&mut input)?;
    if width as usize != F::BYTES {
        return Err(CheckpointError::Dtype { found: width, expected: F::BYTES as u32 });
    }
    let mut dims = [0usize; 6];
    for d in &mut dims {
        *d = u32_at(&mut input)? as usize;
    }
    let shape =
        NetShape { input: dims[0], seq_len: dims[1], embed: dims[2], hidden: dims[3], dense: dims[4], outputs: dims[5] };
    let hash_len = u32_at(&mut input)? as usize;
    let mut hash = vec![0u8; hash_len];
    input.read_exact(&mut hash)?;
    let hash = String::from_utf8_lossy(&hash).into_owned();
    if let Some(expected) = expect_hash {
        if expected != hash {
            return Err(CheckpointError::ConfigHash { found: hash, expected: expected.to_string() });
        }
    }
    let mut count = [0u8; 8];
    input.read_exact(&mut count)?;
    let count = u64::from_le_bytes(count);
    let expected = shape.param_count() as u64;
    if count != expected {
        return Err(CheckpointError::Count { found: count, expected });
    }
    let mut raw = vec![0u8; count as usize * F::BYTES];
    input.read_exact(&mut raw)?;
    let params = raw.chunks_exact(F::BYTES).map(F::read_le).collect();
    Ok((Net::from_params(shape, params), hash))
}
