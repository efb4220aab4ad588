use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Fixed-length binary vector of at most 64 variables.
///
/// Bit `i` is variable `i` and, on the simulator, qubit `i`. The basis index
/// of a bitstring is `sum(bit_i << i)`, so qubit 0 is the least significant
/// bit of the index. The textual form lists variables left to right starting
/// at variable 0 (`"110"` has variables 0 and 1 set, index `0b011 = 3`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitstring {
    index: u64,
    len: usize,
}

impl Bitstring {
    pub const MAX_LEN: usize = 64;

    pub fn zeros(len: usize) -> Result<Self> {
        Self::from_index(0, len)
    }

    /// Builds a bitstring from a basis index; bits above `len` must be clear.
    pub fn from_index(index: u64, len: usize) -> Result<Self> {
        if len > Self::MAX_LEN {
            return Err(Error::Capacity { what: "bitstring", n: len, max: Self::MAX_LEN });
        }
        if len < 64 && index >> len != 0 {
            return Err(Error::Encoding(format!("index {index} does not fit in {len} bits")));
        }
        Ok(Bitstring { index, len })
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if bits.len() > Self::MAX_LEN {
            return Err(Error::Capacity { what: "bitstring", n: bits.len(), max: Self::MAX_LEN });
        }
        let mut index = 0u64;
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => index |= 1 << i,
                other => return Err(Error::Encoding(format!("bit value {other} is not 0 or 1"))),
            }
        }
        Ok(Bitstring { index, len: bits.len() })
    }

    #[inline]
    pub fn index(&self) -> u64 {
        self.index
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn bit(&self, i: usize) -> u8 {
        debug_assert!(i < self.len);
        ((self.index >> i) & 1) as u8
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.bit(i)).collect()
    }

    /// Spin value of variable `i` under `q = (1 - z) / 2`: bit 0 is +1, bit 1 is -1.
    #[inline]
    pub fn spin(&self, i: usize) -> f64 {
        1.0 - 2.0 * self.bit(i) as f64
    }

    pub fn with_flipped(&self, i: usize) -> Self {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        Bitstring { index: self.index ^ (1 << i), len: self.len }
    }

    pub fn count_ones(&self) -> u32 {
        self.index.count_ones()
    }

    pub fn ensure_len(&self, expected: usize) -> Result<()> {
        if self.len != expected {
            return Err(Error::LengthMismatch { expected, got: self.len });
        }
        Ok(())
    }
}

/// Formats a basis index of an `n`-qubit register in variable order.
pub fn index_to_string(index: u64, n: usize) -> String {
    (0..n).map(|i| if (index >> i) & 1 == 1 { '1' } else { '0' }).collect()
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&index_to_string(self.index, self.len))
    }
}

impl fmt::Debug for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bitstring({self})")
    }
}

impl FromStr for Bitstring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Encoding(format!("unexpected character {other:?} in bitstring"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Bitstring::from_bits(&bits)
    }
}

impl Serialize for Bitstring {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Bitstring {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
