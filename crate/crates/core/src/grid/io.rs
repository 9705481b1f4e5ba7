//! `HEF1` binary field stacks and per-plane CSV export.
//!
//! Layout (all integers little-endian):
//!
//! | bytes        | content                                   |
//! |--------------|-------------------------------------------|
//! | 0..4         | magic `HEF1`                              |
//! | 4..8         | `u32` version, always 1                   |
//! | 8..12        | `u32` plane count                         |
//! | 12..16       | `u32` n                                   |
//! | 16..         | planes, each `n·n` `f64` LE, row-major    |

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::{GridError, PeriodicGrid, ScalarField};

pub const MAGIC: &[u8; 4] = b"HEF1";
pub const VERSION: u32 = 1;

pub fn write_hef1<W: Write>(mut out: W, planes: &[ScalarField]) -> Result<(), GridError> {
    let n = planes.first().map_or(0, |p| p.grid().n());
    if let Some(bad) = planes.iter().find(|p| p.grid().n() != n) {
        return Err(GridError::GridMismatch(n, bad.grid().n()));
    }
    let mut buf = Vec::with_capacity(16 + planes.len() * n * n * 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(planes.len() as u32).to_le_bytes());
    buf.extend_from_slice(&(n as u32).to_le_bytes());
    for p in planes {
        for v in p.values() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_hef1<R: Read>(mut input: R) -> Result<Vec<ScalarField>, GridError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    decode_hef1(&bytes)
}

pub fn decode_hef1(bytes: &[u8]) -> Result<Vec<ScalarField>, GridError> {
    let bad = |msg: &str| GridError::Format(msg.to_string());
    if bytes.len() < 16 {
        return Err(bad("truncated header"));
    }
    if &bytes[0..4] != MAGIC {
        return Err(bad("bad magic"));
    }
    let word = |k: usize| u32::from_le_bytes(bytes[4 * k..4 * k + 4].try_into().unwrap());
    let (version, count, n) = (word(1), word(2) as usize, word(3) as usize);
    if version != VERSION {
        return Err(GridError::Format(format!("unsupported version {version}")));
    }
    let plane_bytes = n
        .checked_mul(n)
        .and_then(|s| s.checked_mul(8))
        .ok_or_else(|| bad("plane size overflows"))?;
    let expected = plane_bytes
        .checked_mul(count)
        .and_then(|s| s.checked_add(16))
        .ok_or_else(|| bad("file size overflows"))?;
    if bytes.len() != expected {
        return Err(GridError::Format(format!(
            "expected {expected} bytes for {count} planes of {n}x{n}, found {}",
            bytes.len()
        )));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let grid = PeriodicGrid::new(n)?;
    bytes[16..]
        .chunks_exact(plane_bytes)
        .map(|chunk| {
            let values = chunk
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect();
            ScalarField::new(&grid, values)
        })
        .collect()
}

pub fn save_hef1(path: &Path, planes: &[ScalarField]) -> Result<(), GridError> {
    let mut buf = Vec::new();
    write_hef1(&mut buf, planes)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_hef1(path: &Path) -> Result<Vec<ScalarField>, GridError> {
    decode_hef1(&fs::read(path)?)
}

/// One plane as `n` lines of `n` comma-separated values (row `p` is `y = p/n`).
pub fn write_csv<W: Write>(mut out: W, field: &ScalarField) -> Result<(), GridError> {
    let n = field.grid().n();
    let mut s = String::new();
    for row in field.values().chunks(n) {
        for (m, v) in row.iter().enumerate() {
            if m > 0 {
                s.push(',');
            }
            s.push_str(&format!("{v:?}"));
        }
        s.push('\n');
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout_is_bit_exact() {
        let g = PeriodicGrid::new(8).unwrap();
        let f = ScalarField::constant(&g, 1.5);
        let mut buf = Vec::new();
        write_hef1(&mut buf, &[f.clone(), f]).unwrap();
        assert_eq!(&buf[0..4], b"HEF1");
        assert_eq!(&buf[4..8], &[1, 0, 0, 0]);
        assert_eq!(&buf[8..12], &[2, 0, 0, 0]);
        assert_eq!(&buf[12..16], &[8, 0, 0, 0]);
        assert_eq!(buf.len(), 16 + 2 * 64 * 8);
        assert_eq!(&buf[16..24], &1.5f64.to_le_bytes());
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(matches!(decode_hef1(b"HEF"), Err(GridError::Format(_))));
        let mut buf = Vec::new();
        let g = PeriodicGrid::new(8).unwrap();
        write_hef1(&mut buf, &[ScalarField::zeros(&g)]).unwrap();
        let mut wrong_magic = buf.clone();
        wrong_magic[0] = b'X';
        assert!(decode_hef1(&wrong_magic).is_err());
        let mut wrong_version = buf.clone();
        wrong_version[4] = 2;
        assert!(decode_hef1(&wrong_version).is_err());
        assert!(decode_hef1(&buf[..buf.len() - 1]).is_err());
        let mut nan = buf.clone();
        nan[16..24].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(matches!(decode_hef1(&nan), Err(GridError::NonFinite { .. })));
    }

    #[test]
    fn csv_has_n_rows() {
        let g = PeriodicGrid::new(8).unwrap();
        let f = ScalarField::from_fn(&g, |x, y| x + 10.0 * y).unwrap();
        let mut out = Vec::new();
        write_csv(&mut out, &f).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 8);
        assert_eq!(lines[1].split(',').count(), 8);
        assert_eq!(lines[1].split(',').nth(2).unwrap().parse::<f64>().unwrap(), 0.25 + 1.25);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn hef1_round_trips(planes in prop::collection::vec(prop::collection::vec(-1e300f64..1e300, 64), 0..4)) {
            let g = PeriodicGrid::new(8).unwrap();
            let fields: Vec<ScalarField> = planes.into_iter().map(|v| ScalarField::new(&g, v).unwrap()).collect();
            let mut buf = Vec::new();
            write_hef1(&mut buf, &fields).unwrap();
            let back = decode_hef1(&buf).unwrap();
            prop_assert_eq!(back, fields);
        }
    }
}
