//! Discriminant cache file.
//!
//! Layout: the magic bytes `QFD1`, a little-endian `u64` count, then that many
//! little-endian `u64` values in strictly ascending order.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"QFD1";

pub fn write_cache<W: Write>(mut w: W, values: &[u64]) -> Result<()> {
    if values.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::validation("cache values must be strictly ascending"));
    }
    w.write_all(MAGIC)?;
    w.write_all(&(values.len() as u64).to_le_bytes())?;
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_cache<R: Read>(mut r: R) -> Result<Vec<u64>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Format("missing magic".into()))?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let mut word = [0u8; 8];
    r.read_exact(&mut word)
        .map_err(|_| Error::Format("missing count".into()))?;
    let count = u64::from_le_bytes(word);
    let mut values = Vec::with_capacity(count.min(1 << 24) as usize);
    for i in 0..count {
        r.read_exact(&mut word)
            .map_err(|_| Error::Format(format!("truncated after {i} of {count} values")))?;
        values.push(u64::from_le_bytes(word));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after declared count".into()));
    }
    if values.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::Format("values not strictly ascending".into()));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_exact_layout() {
        let mut buf = Vec::new();
        write_cache(&mut buf, &[5, 8, 12]).unwrap();
        let mut expected = b"QFD1".to_vec();
        expected.extend_from_slice(&[3, 0, 0, 0, 0, 0, 0, 0]);
        expected.extend_from_slice(&[5, 0, 0, 0, 0, 0, 0, 0]);
        expected.extend_from_slice(&[8, 0, 0, 0, 0, 0, 0, 0]);
        expected.extend_from_slice(&[12, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(buf, expected);
        assert_eq!(read_cache(&buf[..]).unwrap(), vec![5, 8, 12]);
    }

    #[test]
    fn rejects_malformed() {
        assert!(read_cache(&b"QFD2"[..]).is_err());
        let mut buf = Vec::new();
        write_cache(&mut buf, &[5, 8]).unwrap();
        assert!(read_cache(&buf[..buf.len() - 1]).is_err());
        let mut extra = buf.clone();
        extra.push(0);
        assert!(read_cache(&extra[..]).is_err());
        assert!(write_cache(Vec::new(), &[8, 5]).is_err());
    }
}
