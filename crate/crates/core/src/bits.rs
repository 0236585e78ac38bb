//! Fixed-width bit strings.
//!
//! Bit 0 is the leftmost character of the printed form and the lowest wire
//! label. When a bit string encodes an integer, bit 0 is the most significant
//! bit, so lexicographic order on strings of equal width coincides with
//! numeric order.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitsError {
    #[error("invalid bit character {found:?} at position {pos}")]
    InvalidChar { pos: usize, found: char },
    #[error("value {value} does not fit in {width} bits")]
    Overflow { value: u64, width: usize },
    #[error("width {width} exceeds the 64-bit conversion limit")]
    TooWide { width: usize },
}

/// A bit string of fixed width. Equality and ordering are lexicographic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn new(bits: Vec<bool>) -> Self {
        Bits(bits)
    }

    pub fn zeros(width: usize) -> Self {
        Bits(vec![false; width])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.0[i] = value;
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    pub fn push(&mut self, value: bool) {
        self.0.push(value);
    }

    /// Encodes `value` most-significant-bit first.
    pub fn from_uint(value: u64, width: usize) -> Result<Self, BitsError> {
        if width > 64 {
            return Err(BitsError::TooWide { width });
        }
        if width < 64 && value >= (1u64 << width) {
            return Err(BitsError::Overflow { value, width });
        }
        Ok(Bits(
            (0..width).map(|i| (value >> (width - 1 - i)) & 1 == 1).collect(),
        ))
    }

    /// Reads the string as an unsigned integer, most-significant-bit first.
    pub fn to_uint(&self) -> Result<u64, BitsError> {
        if self.len() > 64 {
            return Err(BitsError::TooWide { width: self.len() });
        }
        Ok(self
            .0
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | u64::from(b)))
    }

    pub fn concat(&self, other: &Bits) -> Bits {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Bits(v)
    }

    pub fn slice(&self, start: usize, len: usize) -> Bits {
        Bits(self.0[start..start + len].to_vec())
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bits {
    type Err = BitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .enumerate()
            .map(|(pos, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                found => Err(BitsError::InvalidChar { pos, found }),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Bits)
    }
}

impl From<Vec<bool>> for Bits {
    fn from(v: Vec<bool>) -> Self {
        Bits(v)
    }
}
