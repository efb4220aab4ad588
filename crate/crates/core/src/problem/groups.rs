//! Two-bit substituent codes: H = 10, Me = 11, CN = 00, F = 01.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Bitstring;
use crate::error::{Error, Result};

/// Default number of substitution sites (12 bits).
pub const DEFAULT_SITES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupCode {
    H,
    Me,
    CN,
    F,
}

impl GroupCode {
    pub const ALL: [GroupCode; 4] = [GroupCode::H, GroupCode::Me, GroupCode::CN, GroupCode::F];

    /// The two bits in text order (first bit, second bit).
    pub fn bits(self) -> [u8; 2] {
        match self {
            GroupCode::H => [1, 0],
            GroupCode::Me => [1, 1],
            GroupCode::CN => [0, 0],
            GroupCode::F => [0, 1],
        }
    }

    pub fn from_bits(first: u8, second: u8) -> Self {
        match (first, second) {
            (1, 0) => GroupCode::H,
            (1, 1) => GroupCode::Me,
            (0, 0) => GroupCode::CN,
            _ => GroupCode::F,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            GroupCode::H => "H",
            GroupCode::Me => "Me",
            GroupCode::CN => "CN",
            GroupCode::F => "F",
        }
    }
}

impl fmt::Display for GroupCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for GroupCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "H" => Ok(GroupCode::H),
            "Me" => Ok(GroupCode::Me),
            "CN" => Ok(GroupCode::CN),
            "F" => Ok(GroupCode::F),
            other => Err(Error::Encoding(format!("unknown group label {other:?}"))),
        }
    }
}

/// Concatenates the two-bit codes of each site in order.
pub fn encode_groups(groups: &[GroupCode]) -> Result<Bitstring> {
    let bits: Vec<u8> = groups.iter().flat_map(|g| g.bits()).collect();
    Bitstring::from_bits(&bits)
}

/// Parses labels such as `["Me", "CN"]` and encodes them.
pub fn encode_labels<S: AsRef<str>>(labels: &[S]) -> Result<Bitstring> {
    let groups = labels.iter().map(|l| l.as_ref().parse()).collect::<Result<Vec<GroupCode>>>()?;
    encode_groups(&groups)
}

pub fn decode_groups(x: &Bitstring) -> Result<Vec<GroupCode>> {
    if !x.len().is_multiple_of(2) {
        return Err(Error::Encoding(format!("bitstring length {} is odd", x.len())));
    }
    Ok((0..x.len() / 2).map(|s| GroupCode::from_bits(x.bit(2 * s), x.bit(2 * s + 1))).collect())
}

/// Hyphen-joined labels, e.g. `Me-CN-Me-CN-Me-H`.
pub fn group_string(x: &Bitstring) -> Result<String> {
    Ok(decode_groups(x)?.iter().map(|g| g.label()).collect::<Vec<_>>().join("-"))
}

/// Number of distinct group kinds present in a structure.
pub fn distinct_groups(x: &Bitstring) -> Result<usize> {
    let mut groups = decode_groups(x)?;
    groups.sort();
    groups.dedup();
    Ok(groups.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use GroupCode::*;

    #[test]
    fn encodes_reference_structures() {
        assert_eq!(encode_groups(&[Me, CN, Me, CN, Me, H]).unwrap().to_string(), "110011001110");
        assert_eq!(encode_groups(&[CN; 6]).unwrap().to_string(), "000000000000");
        assert_eq!(encode_groups(&[Me; 6]).unwrap().to_string(), "111111111111");
    }

    #[test]
    fn decodes_reference_structures() {
        let x: Bitstring = "000000000001".parse().unwrap();
        assert_eq!(decode_groups(&x).unwrap(), vec![CN, CN, CN, CN, CN, F]);
        let x: Bitstring = "110011001110".parse().unwrap();
        assert_eq!(decode_groups(&x).unwrap(), vec![Me, CN, Me, CN, Me, H]);
        assert_eq!(group_string(&x).unwrap(), "Me-CN-Me-CN-Me-H");
    }

    #[test]
    fn codes_are_distinct() {
        let mut codes: Vec<_> = GroupCode::ALL.iter().map(|g| g.bits()).collect();
        codes.sort();
        codes.dedup();
        assert_eq!(codes.len(), 4);
    }

    #[test]
    fn unknown_label_is_an_encoding_error() {
        assert!(matches!(encode_labels(&["Me", "Cl"]), Err(Error::Encoding(_))));
    }

    #[test]
    fn odd_length_cannot_be_decoded() {
        let x: Bitstring = "101".parse().unwrap();
        assert!(decode_groups(&x).is_err());
    }

    #[test]
    fn encode_decode_identity_over_all_structures() {
        for index in 0..4096u64 {
            let x = Bitstring::from_index(index, 12).unwrap();
            let groups = decode_groups(&x).unwrap();
            assert_eq!(encode_groups(&groups).unwrap(), x);
        }
    }

    #[test]
    fn distinct_group_strata() {
        let mut counts = [0usize; 5];
        for index in 0..4096u64 {
            let x = Bitstring::from_index(index, 12).unwrap();
            counts[distinct_groups(&x).unwrap()] += 1;
        }
        // 4 single-group, 6 * (2^6 - 2) two-group
        assert_eq!(counts[1], 4);
        assert_eq!(counts[2], 372);
        assert_eq!(counts[1] + counts[2] + counts[3] + counts[4], 4096);
    }
}
