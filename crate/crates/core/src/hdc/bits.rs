use crate::error::{Error, Result};
use std::fmt;

/// Packed bit string. Bit `i` corresponds to hypervector element `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Self {
        let mut out = Self::zeros(0);
        for b in bits {
            if out.len.is_multiple_of(64) {
                out.words.push(0);
            }
            if b {
                out.words[out.len / 64] |= 1 << (out.len % 64);
            }
            out.len += 1;
        }
        out
    }

    /// Low `len` bits of `value`, bit 0 first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        Self { words: if len == 0 { vec![] } else { vec![value & mask] }, len }
    }

    /// Parse from the printed form (element 0 first).
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidParameter(format!("bit string contains {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::from_bools)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len);
        if value {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn xor(&self, other: &Self) -> Result<Self> {
        if self.len != other.len {
            return Err(Error::DimensionMismatch { expected: self.len, actual: other.len });
        }
        Ok(Self { words: self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect(), len: self.len })
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn count_zeros(&self) -> usize {
        self.len - self.count_ones()
    }

    /// Value as an integer when it fits in one word.
    pub fn to_u64(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_display_and_xor() {
        let a = BitString::parse("10110").unwrap();
        let b = BitString::parse("01101").unwrap();
        assert_eq!(a.xor(&b).unwrap().to_string(), "11011");
        assert_eq!(a.to_u64(), Some(0b01101));
        assert_eq!(BitString::from_u64(0b01101, 5), a);
        assert_eq!(a.count_zeros(), 2);
        assert!(BitString::parse("10x").is_err());
    }

    #[test]
    fn crosses_word_boundary() {
        let bits: Vec<bool> = (0..130).map(|i| i % 3 == 0).collect();
        let s = BitString::from_bools(bits.clone());
        assert_eq!(s.len(), 130);
        assert_eq!(s.iter().collect::<Vec<_>>(), bits);
        assert_eq!(s.to_u64(), None);
    }
}
