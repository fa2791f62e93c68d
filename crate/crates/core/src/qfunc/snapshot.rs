//! Flat little-endian parameter snapshots.
//!
//! ```text
//! offset  size  field
//! 0       8     magic "RDQNQF01"
//! 8       4     kind: u32 (1 = tabular, 2 = mlp)
//! 12      4     reserved: u32, must be 0
//! tabular:
//! 16      8     num_states: u64
//! 24      8     num_actions: u64
//! 32      8     learning_rate: f64
//! 40      8·S·A table, row-major by state
//! mlp:
//! 16      8     input_dim: u64
//! 24      8     hidden_dim: u64
//! 32      8     num_actions: u64
//! 40      8     learning_rate: f64
//! 48      8·P   parameters in order W1, b1, W2, b2 (row-major)
//! ```
//!
//! The blob must be exactly as long as the header implies.

use super::{MlpQ, QNet, TabularQ};
use crate::error::{Error, Result};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"RDQNQF01";
const KIND_TABULAR: u32 = 1;
const KIND_MLP: u32 = 2;

pub fn encode_snapshot(q: &QNet) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(SNAPSHOT_MAGIC);
    let values: Vec<f64> = match q {
        QNet::Tabular(t) => {
            out.extend_from_slice(&KIND_TABULAR.to_le_bytes());
            out.extend_from_slice(&0u32.to_le_bytes());
            out.extend_from_slice(&(t.num_states() as u64).to_le_bytes());
            out.extend_from_slice(&(super::QFunction::num_actions(t) as u64).to_le_bytes());
            out.extend_from_slice(&t.learning_rate().to_le_bytes());
            t.table().to_vec()
        }
        QNet::Mlp(m) => {
            out.extend_from_slice(&KIND_MLP.to_le_bytes());
            out.extend_from_slice(&0u32.to_le_bytes());
            out.extend_from_slice(&(m.input_dim() as u64).to_le_bytes());
            out.extend_from_slice(&(m.hidden_dim() as u64).to_le_bytes());
            out.extend_from_slice(&(super::QFunction::num_actions(m) as u64).to_le_bytes());
            out.extend_from_slice(&m.learning_rate().to_le_bytes());
            m.parameters()
        }
    };
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() < n {
            return Err(Error::Decode("snapshot truncated".into()));
        }
        let (head, tail) = self.bytes.split_at(n);
        self.bytes = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn dim(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Decode("dimension overflows usize".into()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// Reads exactly `count` trailing f64 values and requires nothing after them.
    fn rest_f64(&mut self, count: usize) -> Result<Vec<f64>> {
        let expected = count
            .checked_mul(8)
            .ok_or_else(|| Error::Decode("parameter count overflows".into()))?;
        if self.bytes.len() != expected {
            return Err(Error::Decode(format!(
                "payload is {} bytes, header implies {expected}",
                self.bytes.len()
            )));
        }
        Ok(self
            .bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

fn checked_product(dims: &[usize]) -> Result<usize> {
    dims.iter()
        .try_fold(1usize, |acc, d| acc.checked_mul(*d))
        .ok_or_else(|| Error::Decode("dimensions overflow".into()))
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<QNet> {
    let mut r = Reader { bytes };
    if r.take(8)? != SNAPSHOT_MAGIC {
        return Err(Error::Decode("bad snapshot magic".into()));
    }
    let kind = r.u32()?;
    if r.u32()? != 0 {
        return Err(Error::Decode("reserved header field is nonzero".into()));
    }
    match kind {
        KIND_TABULAR => {
            let states = r.dim()?;
            let actions = r.dim()?;
            let lr = r.f64()?;
            let count = checked_product(&[states, actions])?;
            let table = r.rest_f64(count)?;
            let q = TabularQ::from_table(table, states, actions, lr)
                .map_err(|e| Error::Decode(e.to_string()))?;
            Ok(QNet::Tabular(q))
        }
        KIND_MLP => {
            let input = r.dim()?;
            let hidden = r.dim()?;
            let actions = r.dim()?;
            let lr = r.f64()?;
            let w1 = checked_product(&[hidden, input])?;
            let w2 = checked_product(&[actions, hidden])?;
            let count = w1
                .checked_add(hidden)
                .and_then(|c| c.checked_add(w2))
                .and_then(|c| c.checked_add(actions))
                .ok_or_else(|| Error::Decode("parameter count overflows".into()))?;
            let params = r.rest_f64(count)?;
            let mut net =
                MlpQ::zeros(input, hidden, actions, lr).map_err(|e| Error::Decode(e.to_string()))?;
            net.set_parameters(&params)
                .map_err(|e| Error::Decode(e.to_string()))?;
            Ok(QNet::Mlp(net))
        }
        other => Err(Error::Decode(format!("unknown snapshot kind {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};

    #[test]
    fn round_trip_both_kinds() {
        let mut t = TabularQ::zeros(3, 2, 0.25).unwrap();
        t.set(2, 1, -7.125).unwrap();
        let q = QNet::Tabular(t);
        let bytes = encode_snapshot(&q);
        assert_eq!(bytes.len(), 40 + 6 * 8);
        assert_eq!(decode_snapshot(&bytes).unwrap(), q);

        let mut rng = stream(2, Stream::Init);
        let m = QNet::Mlp(MlpQ::new(4, 5, 2, 1e-3, &mut rng).unwrap());
        let bytes = encode_snapshot(&m);
        assert_eq!(bytes.len(), 48 + (20 + 5 + 10 + 2) * 8);
        assert_eq!(decode_snapshot(&bytes).unwrap(), m);
    }

    #[test]
    fn header_layout_is_little_endian() {
        let q = QNet::Tabular(TabularQ::zeros(1, 2, 0.5).unwrap());
        let bytes = encode_snapshot(&q);
        assert_eq!(&bytes[0..8], b"RDQNQF01");
        assert_eq!(&bytes[8..12], &[1, 0, 0, 0]);
        assert_eq!(&bytes[16..24], &[1, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(&bytes[24..32], &[2, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(&bytes[32..40], &0.5f64.to_le_bytes());
    }

    #[test]
    fn rejects_malformed() {
        let q = QNet::Tabular(TabularQ::zeros(2, 2, 0.5).unwrap());
        let bytes = encode_snapshot(&q);
        assert!(decode_snapshot(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode_snapshot(&extra).is_err());
        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(decode_snapshot(&bad_magic).is_err());
        let mut huge = bytes.clone();
        huge[16..24].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(decode_snapshot(&huge).is_err());
        assert!(decode_snapshot(&[]).is_err());
    }
}
