//! Packed bit rows.
//!
//! A [`BitRow`] stores bits MSB-first within each byte, with the final byte
//! zero-padded. This is exactly the layout of the hex strings in codebook and
//! word files, so serialization is a straight hex encode of the backing bytes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitRowError {
    #[error("hex string has {got} characters, expected {want} for {bits} bits")]
    HexLength { got: usize, want: usize, bits: usize },
    #[error("invalid hex character {0:?}")]
    HexDigit(char),
    #[error("padding bits beyond position {bits} must be zero")]
    DirtyPadding { bits: usize },
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitRow {
    len: usize,
    bytes: Vec<u8>,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        BitRow {
            len,
            bytes: vec![0u8; len.div_ceil(8)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut row = BitRow::zeros(len);
        for j in 0..len {
            row.set(j, true);
        }
        row
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut row = BitRow::zeros(bits.len());
        for (j, &b) in bits.iter().enumerate() {
            row.set(j, b);
        }
        row
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, j: usize) -> bool {
        debug_assert!(j < self.len, "bit index {j} out of range {}", self.len);
        self.bytes[j / 8] & (0x80 >> (j % 8)) != 0
    }

    #[inline]
    pub fn set(&mut self, j: usize, value: bool) {
        debug_assert!(j < self.len, "bit index {j} out of range {}", self.len);
        let mask = 0x80 >> (j % 8);
        if value {
            self.bytes[j / 8] |= mask;
        } else {
            self.bytes[j / 8] &= !mask;
        }
    }

    pub fn flip(&mut self, j: usize) {
        let v = self.get(j);
        self.set(j, !v);
    }

    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |j| self.get(j))
    }

    /// Positions where the bit is set, ascending.
    pub fn one_positions(&self) -> Vec<usize> {
        (0..self.len).filter(|&j| self.get(j)).collect()
    }

    pub fn to_hex(&self) -> String {
        let mut out = String::with_capacity(self.bytes.len() * 2);
        for b in &self.bytes {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }

    pub fn from_hex(hex: &str, len: usize) -> Result<Self, BitRowError> {
        let want = len.div_ceil(8) * 2;
        if hex.len() != want {
            return Err(BitRowError::HexLength {
                got: hex.len(),
                want,
                bits: len,
            });
        }
        let mut bytes = Vec::with_capacity(len.div_ceil(8));
        let chars: Vec<char> = hex.chars().collect();
        for pair in chars.chunks(2) {
            let hi = pair[0].to_digit(16).ok_or(BitRowError::HexDigit(pair[0]))?;
            let lo = pair[1].to_digit(16).ok_or(BitRowError::HexDigit(pair[1]))?;
            bytes.push((hi * 16 + lo) as u8);
        }
        let row = BitRow { len, bytes };
        // Reject dirty padding so every word has a unique encoding.
        for j in len..row.bytes.len() * 8 {
            if row.bytes[j / 8] & (0x80 >> (j % 8)) != 0 {
                return Err(BitRowError::DirtyPadding { bits: len });
            }
        }
        Ok(row)
    }
}

impl std::fmt::Debug for BitRow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitRow[{}; ", self.len)?;
        let shown = self.len.min(64);
        for j in 0..shown {
            write!(f, "{}", if self.get(j) { '1' } else { '0' })?;
        }
        if self.len > shown {
            write!(f, "...")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn set_get_roundtrip() {
        let mut row = BitRow::zeros(13);
        row.set(0, true);
        row.set(7, true);
        row.set(8, true);
        row.set(12, true);
        assert!(row.get(0) && row.get(7) && row.get(8) && row.get(12));
        assert!(!row.get(1) && !row.get(11));
        assert_eq!(row.count_ones(), 4);
        row.flip(0);
        assert!(!row.get(0));
    }

    #[test]
    fn hex_layout_is_msb_first() {
        // Bit 0 is the MSB of the first byte.
        let mut row = BitRow::zeros(12);
        row.set(0, true);
        row.set(11, true);
        assert_eq!(row.to_hex(), "8010");
    }

    #[test]
    fn from_hex_rejects_bad_input() {
        assert_eq!(
            BitRow::from_hex("80", 12).unwrap_err(),
            BitRowError::HexLength { got: 2, want: 4, bits: 12 }
        );
        assert!(matches!(
            BitRow::from_hex("80zz", 12).unwrap_err(),
            BitRowError::HexDigit('z')
        ));
        // Bit 12 of a 12-bit row sits in the padding and must be zero.
        assert_eq!(
            BitRow::from_hex("8018", 12).unwrap_err(),
            BitRowError::DirtyPadding { bits: 12 }
        );
    }

    proptest! {
        #[test]
        fn hex_roundtrip(bits in proptest::collection::vec(any::<bool>(), 0..200)) {
            let row = BitRow::from_bits(&bits);
            let back = BitRow::from_hex(&row.to_hex(), bits.len()).unwrap();
            prop_assert_eq!(row, back);
        }
    }
}
