//! Binary field checkpoints.
//!
//! Fixed little-endian layout, bit-exact across platforms:
//!
//! ```text
//! offset  size  field
//!      0     8  magic  "NSLABFLD"
//!      8     4  format version (u32, currently 1)
//!     12     4  n, points per axis (u32)
//!     16     8  box length (f64)
//!     24     8  snapshot time (f64; NaN when unset)
//!     32     4  component count (u32, always 3)
//!     36     -  payload: components in order, modes row-major over the
//!               (k1, k2, k3) storage lattice (non-negative wavenumbers
//!               first, then the wrapped negatives), each amplitude as
//!               interleaved (re, im) IEEE 754 binary64
//! ```
//!
//! The payload holds `2 · 3 · n³` binary64 values. The dealias fraction is
//! a grid policy, not field data; loaded fields carry the default rule.

use std::fmt;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use nslab_core::{GridSpec, SpectralVectorField};
use num_complex::Complex;

pub const MAGIC: [u8; 8] = *b"NSLABFLD";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 36;

#[derive(Debug)]
pub enum CheckpointError {
    Io(io::Error),
    /// Header magic mismatch at byte offset 0.
    BadMagic,
    BadVersion { got: u32 },
    BadHeader { offset: usize, reason: String },
    /// File ends before the structure it should hold.
    Truncated { offset: usize, needed: usize },
    TrailingBytes { offset: usize, extra: usize },
}

impl fmt::Display for CheckpointError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckpointError::Io(e) => write!(f, "io error: {e}"),
            CheckpointError::BadMagic => {
                write!(f, "corrupt checkpoint: bad magic at byte offset 0")
            }
            CheckpointError::BadVersion { got } => {
                write!(f, "corrupt checkpoint: unsupported version {got} at byte offset 8")
            }
            CheckpointError::BadHeader { offset, reason } => {
                write!(f, "corrupt checkpoint: {reason} at byte offset {offset}")
            }
            CheckpointError::Truncated { offset, needed } => write!(
                f,
                "corrupt checkpoint: truncated at byte offset {offset}, {needed} more bytes expected"
            ),
            CheckpointError::TrailingBytes { offset, extra } => write!(
                f,
                "corrupt checkpoint: {extra} unexpected trailing bytes at byte offset {offset}"
            ),
        }
    }
}

impl std::error::Error for CheckpointError {}

impl From<io::Error> for CheckpointError {
    fn from(e: io::Error) -> Self {
        CheckpointError::Io(e)
    }
}

pub fn write_field(path: &Path, field: &SpectralVectorField) -> io::Result<()> {
    let grid = field.grid();
    let mut out = io::BufWriter::new(fs::File::create(path)?);
    out.write_all(&MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(grid.n() as u32).to_le_bytes())?;
    out.write_all(&grid.box_length().to_le_bytes())?;
    out.write_all(&field.meta.time.unwrap_or(f64::NAN).to_le_bytes())?;
    out.write_all(&3u32.to_le_bytes())?;
    for c in 0..3 {
        for v in field.component(c) {
            out.write_all(&v.re.to_le_bytes())?;
            out.write_all(&v.im.to_le_bytes())?;
        }
    }
    out.flush()
}

fn read_u32(bytes: &[u8], offset: usize) -> u32 {
    u32::from_le_bytes(bytes[offset..offset + 4].try_into().expect("bounds checked"))
}

fn read_f64(bytes: &[u8], offset: usize) -> f64 {
    f64::from_le_bytes(bytes[offset..offset + 8].try_into().expect("bounds checked"))
}

pub fn read_field(path: &Path) -> Result<SpectralVectorField, CheckpointError> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < HEADER_LEN {
        return Err(CheckpointError::Truncated {
            offset: bytes.len(),
            needed: HEADER_LEN - bytes.len(),
        });
    }
    if bytes[..8] != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = read_u32(&bytes, 8);
    if version != VERSION {
        return Err(CheckpointError::BadVersion { got: version });
    }
    let n = read_u32(&bytes, 12) as usize;
    if n < 4 || n % 2 != 0 || n > 1 << 12 {
        return Err(CheckpointError::BadHeader {
            offset: 12,
            reason: format!("invalid points per axis {n}"),
        });
    }
    let box_length = read_f64(&bytes, 16);
    if !(box_length.is_finite() && box_length > 0.0) {
        return Err(CheckpointError::BadHeader {
            offset: 16,
            reason: format!("invalid box length {box_length}"),
        });
    }
    let time = read_f64(&bytes, 24);
    let components = read_u32(&bytes, 32) as usize;
    if components != 3 {
        return Err(CheckpointError::BadHeader {
            offset: 32,
            reason: format!("expected 3 components, found {components}"),
        });
    }
    let point_count = n * n * n;
    let expected = HEADER_LEN + 16 * 3 * point_count;
    if bytes.len() < expected {
        return Err(CheckpointError::Truncated {
            offset: bytes.len(),
            needed: expected - bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(CheckpointError::TrailingBytes {
            offset: expected,
            extra: bytes.len() - expected,
        });
    }

    let grid = GridSpec::new(
        n,
        box_length,
        nslab_core::grid::DEFAULT_DEALIAS_FRACTION,
    )
    .map_err(|e| CheckpointError::BadHeader {
        offset: 12,
        reason: e.to_string(),
    })?;
    let mut coeffs = [
        Vec::with_capacity(point_count),
        Vec::with_capacity(point_count),
        Vec::with_capacity(point_count),
    ];
    let mut offset = HEADER_LEN;
    for comp in coeffs.iter_mut() {
        for _ in 0..point_count {
            let re = read_f64(&bytes, offset);
            let im = read_f64(&bytes, offset + 8);
            comp.push(Complex::new(re, im));
            offset += 16;
        }
    }
    let mut field = SpectralVectorField::from_components(grid, coeffs).map_err(|e| {
        CheckpointError::BadHeader {
            offset: HEADER_LEN,
            reason: e.to_string(),
        }
    })?;
    if !time.is_nan() {
        field.meta.time = Some(time);
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nslab_core::generators;

    fn tempfile(name: &str) -> std::path::PathBuf {
        let mut p = std::env::temp_dir();
        p.push(format!("nslab-ckpt-{}-{name}", std::process::id()));
        p
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let g = GridSpec::cubic(8).unwrap();
        let mut f = generators::random_solenoidal(g, 99, 1.0);
        f.meta.time = Some(0.625);
        let path = tempfile("roundtrip");
        write_field(&path, &f).unwrap();
        let back = read_field(&path).unwrap();
        assert_eq!(back.meta.time, Some(0.625));
        assert_eq!(back.grid().n(), 8);
        for c in 0..3 {
            for (a, b) in f.component(c).iter().zip(back.component(c)) {
                assert_eq!(a.re.to_bits(), b.re.to_bits());
                assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn unset_time_round_trips_as_none() {
        let g = GridSpec::cubic(4).unwrap();
        let f = SpectralVectorField::zero(g);
        let path = tempfile("notime");
        write_field(&path, &f).unwrap();
        assert_eq!(read_field(&path).unwrap().meta.time, None);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn corruption_reports_byte_offsets() {
        let g = GridSpec::cubic(4).unwrap();
        let f = SpectralVectorField::zero(g);
        let path = tempfile("corrupt");
        write_field(&path, &f).unwrap();
        let bytes = std::fs::read(&path).unwrap();

        // Bad magic.
        let mut bad = bytes.clone();
        bad[0] = b'X';
        std::fs::write(&path, &bad).unwrap();
        assert!(matches!(read_field(&path), Err(CheckpointError::BadMagic)));

        // Truncated payload.
        std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
        match read_field(&path) {
            Err(CheckpointError::Truncated { needed: 8, .. }) => {}
            other => panic!("expected truncation, got {other:?}"),
        }

        // Wrong component count at offset 32.
        let mut bad = bytes.clone();
        bad[32] = 2;
        std::fs::write(&path, &bad).unwrap();
        match read_field(&path) {
            Err(CheckpointError::BadHeader { offset: 32, .. }) => {}
            other => panic!("expected header error, got {other:?}"),
        }
        std::fs::remove_file(&path).ok();
    }
}
