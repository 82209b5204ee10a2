//! Flat little-endian parameter container.
//!
//! ```text
//! "DMK1"
//! repeated until EOF:
//!   u32 name_len, name (UTF-8), u32 rank, rank × u64 dims, product(dims) × f64
//! ```

use std::io::{ErrorKind, Read, Write};

use super::{AutodiffError, Tensor};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"DMK1";

pub fn write_checkpoint<W: Write>(mut w: W, records: &[(&str, &Tensor)]) -> Result<(), AutodiffError> {
    w.write_all(CHECKPOINT_MAGIC)?;
    for (name, t) in records {
        let len = u32::try_from(name.len()).map_err(|_| AutodiffError::Checkpoint("name too long".into()))?;
        w.write_all(&len.to_le_bytes())?;
        w.write_all(name.as_bytes())?;
        w.write_all(&(t.rank() as u32).to_le_bytes())?;
        for d in t.shape() {
            w.write_all(&(*d as u64).to_le_bytes())?;
        }
        for v in t.data() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn bad(msg: impl Into<String>) -> AutodiffError {
    AutodiffError::Checkpoint(msg.into())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, AutodiffError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|_| bad("truncated record"))?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Vec<(String, Tensor)>, AutodiffError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| bad("missing magic"))?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(bad("bad magic"));
    }
    let mut out = Vec::new();
    loop {
        let mut lb = [0u8; 4];
        match r.read(&mut lb[..1]) {
            Ok(0) => break,
            Ok(_) => r.read_exact(&mut lb[1..]).map_err(|_| bad("truncated record"))?,
            Err(e) if e.kind() == ErrorKind::Interrupted => continue,
            Err(e) => return Err(e.into()),
        }
        let name_len = u32::from_le_bytes(lb) as usize;
        let mut name = vec![0u8; name_len];
        r.read_exact(&mut name).map_err(|_| bad("truncated name"))?;
        let name = String::from_utf8(name).map_err(|_| bad("name is not UTF-8"))?;
        let rank = read_u32(&mut r)? as usize;
        if rank == 0 || rank > 8 {
            return Err(bad(format!("{name}: unsupported rank {rank}")));
        }
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            let mut b = [0u8; 8];
            r.read_exact(&mut b).map_err(|_| bad("truncated dims"))?;
            shape.push(usize::try_from(u64::from_le_bytes(b)).map_err(|_| bad("dimension overflow"))?);
        }
        let n = shape.iter().try_fold(1usize, |a, d| a.checked_mul(*d)).ok_or_else(|| bad("size overflow"))?;
        let mut bytes = vec![0u8; n.checked_mul(8).ok_or_else(|| bad("size overflow"))?];
        r.read_exact(&mut bytes).map_err(|_| bad(format!("{name}: truncated payload")))?;
        let data = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        out.push((name, Tensor::new(shape, data)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let t = Tensor::new(vec![1, 2], vec![1.0, -2.5]).unwrap();
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &[("ab", &t)]).unwrap();
        let mut expect = b"DMK1".to_vec();
        expect.extend(2u32.to_le_bytes());
        expect.extend(b"ab");
        expect.extend(2u32.to_le_bytes());
        expect.extend(1u64.to_le_bytes());
        expect.extend(2u64.to_le_bytes());
        expect.extend(1.0f64.to_le_bytes());
        expect.extend((-2.5f64).to_le_bytes());
        assert_eq!(buf, expect);
        let back = read_checkpoint(&buf[..]).unwrap();
        assert_eq!(back, vec![("ab".to_string(), t)]);
    }

    #[test]
    fn corrupt_inputs() {
        assert!(read_checkpoint(&b"DMK2"[..]).is_err());
        assert!(read_checkpoint(&b"DM"[..]).is_err());
        assert_eq!(read_checkpoint(&b"DMK1"[..]).unwrap(), vec![]);
        let t = Tensor::new(vec![2], vec![1.0, 2.0]).unwrap();
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &[("w", &t)]).unwrap();
        for cut in 5..buf.len() {
            assert!(read_checkpoint(&buf[..cut]).is_err(), "cut at {cut}");
        }
    }
}
