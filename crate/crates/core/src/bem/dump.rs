//! Binary matrix dump: 8-byte magic, `N` as little-endian u64, element size
//! as little-endian u64 (always 8), then `N * N` little-endian f64 values in
//! row-major order.

use std::path::Path;

use faer::Mat;

use crate::error::{Error, Result};

pub const MAGIC: [u8; 8] = *b"NPBEMMAT";
const HEADER_LEN: usize = 24;

pub fn encode_matrix(m: &Mat<f64>) -> Result<Vec<u8>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "dump format stores square matrices, got {}x{}",
            n,
            m.ncols()
        )));
    }
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * n * n);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&8u64.to_le_bytes());
    for i in 0..n {
        for j in 0..n {
            out.extend_from_slice(&m[(i, j)].to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_matrix(bytes: &[u8]) -> Result<Mat<f64>> {
    if bytes.len() < HEADER_LEN || bytes[..8] != MAGIC {
        return Err(Error::MalformedDump("missing magic header".into()));
    }
    let word = |k: usize| u64::from_le_bytes(bytes[k..k + 8].try_into().unwrap());
    let n = word(8) as usize;
    let elem = word(16);
    if elem != 8 {
        return Err(Error::MalformedDump(format!("unsupported element size {elem}")));
    }
    let expected = n
        .checked_mul(n)
        .and_then(|nn| nn.checked_mul(8))
        .and_then(|b| b.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::MalformedDump(format!("dimension {n} overflows")))?;
    if bytes.len() != expected {
        return Err(Error::MalformedDump(format!(
            "expected {expected} bytes for N = {n}, found {}",
            bytes.len()
        )));
    }
    let body = &bytes[HEADER_LEN..];
    Ok(Mat::from_fn(n, n, |i, j| {
        let k = 8 * (i * n + j);
        f64::from_le_bytes(body[k..k + 8].try_into().unwrap())
    }))
}

pub fn write_matrix(path: &Path, m: &Mat<f64>) -> Result<()> {
    std::fs::write(path, encode_matrix(m)?).map_err(|e| Error::io(path, e))
}

pub fn read_matrix(path: &Path) -> Result<Mat<f64>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_matrix(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn roundtrip_is_bit_exact(n in 0usize..6, seed in any::<u64>()) {
            let m = Mat::from_fn(n, n, |i, j| {
                f64::from_bits(seed.rotate_left((i * 7 + j) as u32) & 0x7fef_ffff_ffff_ffff)
            });
            let back = decode_matrix(&encode_matrix(&m).unwrap()).unwrap();
            for i in 0..n {
                for j in 0..n {
                    prop_assert_eq!(m[(i, j)].to_bits(), back[(i, j)].to_bits());
                }
            }
        }
    }

    #[test]
    fn header_layout() {
        let m = Mat::from_fn(2, 2, |i, j| (2 * i + j) as f64);
        let bytes = encode_matrix(&m).unwrap();
        assert_eq!(&bytes[..8], b"NPBEMMAT");
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), 8);
        // row-major: second value is m[(0, 1)]
        assert_eq!(f64::from_le_bytes(bytes[32..40].try_into().unwrap()), 1.0);
    }

    #[test]
    fn rejects_corrupt_input() {
        assert!(decode_matrix(b"short").is_err());
        let mut bytes = encode_matrix(&Mat::from_fn(3, 3, |_, _| 1.0)).unwrap();
        bytes.pop();
        assert!(decode_matrix(&bytes).is_err());
        bytes[0] = b'X';
        assert!(decode_matrix(&bytes).is_err());
        assert!(encode_matrix(&Mat::<f64>::zeros(2, 3)).is_err());
    }
}
