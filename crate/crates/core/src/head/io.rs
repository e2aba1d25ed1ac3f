use std::path::Path;

use super::{HeadError, HeadParams};
use crate::codec::{DecodeError, Decoder, Encoder};

const MAGIC: &[u8; 4] = b"CBHP";
const VERSION: u32 = 1;

pub fn params_to_bytes(params: &HeadParams) -> Vec<u8> {
    let mut e = Encoder::new(MAGIC, VERSION);
    e.u64(params.input_width() as u64);
    e.u64(params.hidden() as u64);
    e.f64s(params.as_slice());
    e.finish()
}

pub fn params_from_bytes(bytes: &[u8]) -> Result<HeadParams, HeadError> {
    let mut d = Decoder::new(bytes, MAGIC, VERSION)?;
    let width = d.u64()? as usize;
    let hidden = d.u64()? as usize;
    if width == 0 || hidden == 0 {
        return Err(DecodeError::Invalid(format!("degenerate shape {width}x{hidden}")).into());
    }
    let n = hidden
        .checked_mul(width)
        .and_then(|x| x.checked_add(2 * hidden + 1))
        .ok_or_else(|| DecodeError::Invalid("shape overflows".into()))?;
    let data = d.f64s(n)?;
    d.finish()?;
    if data.iter().any(|v| !v.is_finite()) {
        return Err(DecodeError::Invalid("non-finite weight".into()).into());
    }
    Ok(HeadParams::from_parts(width, hidden, data))
}

pub fn save_params(params: &HeadParams, path: impl AsRef<Path>) -> Result<(), HeadError> {
    let path = path.as_ref();
    std::fs::write(path, params_to_bytes(params)).map_err(|source| HeadError::Io { path: path.display().to_string(), source })
}

/// Reads a head file. With `expected_width`, a head trained for a different
/// encoder width is rejected.
pub fn load_params(path: impl AsRef<Path>, expected_width: Option<usize>) -> Result<HeadParams, HeadError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| HeadError::Io { path: path.display().to_string(), source })?;
    let params = params_from_bytes(&bytes)?;
    if let Some(expected) = expected_width {
        if params.input_width() != expected {
            return Err(HeadError::Dimension { expected, found: params.input_width() });
        }
    }
    Ok(params)
}
