//! The group G = Z_2^r, its character group, and the epsilon functions.
//!
//! Elements and characters are stored as bit masks where the first
//! coordinate is the most significant bit, so numeric order on the mask
//! agrees with lexicographic order on the printed bit string.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Largest supported rank.
pub const MAX_RANK: u8 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("dimension mismatch: {left} vs {right}")]
    Dimension { left: u8, right: u8 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("rank {0} exceeds the supported maximum of 4")]
    Rank(u8),
    #[error("non-binary group element {0:?}")]
    NonBinary(String),
}

fn check_rank(r: u8) -> Result<(), GroupError> {
    if r == 0 || r > MAX_RANK {
        return Err(GroupError::Rank(r));
    }
    Ok(())
}

fn parse_bits(s: &str) -> Result<(u8, u8), GroupError> {
    if s.is_empty() || !s.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(GroupError::NonBinary(s.to_string()));
    }
    let r = u8::try_from(s.len()).map_err(|_| GroupError::Rank(u8::MAX))?;
    check_rank(r)?;
    let mut bits = 0u8;
    for b in s.bytes() {
        bits = (bits << 1) | (b - b'0');
    }
    Ok((r, bits))
}

fn write_bits(f: &mut fmt::Formatter<'_>, r: u8, bits: u8) -> fmt::Result {
    for i in (0..r).rev() {
        f.write_str(if bits >> i & 1 == 1 { "1" } else { "0" })?;
    }
    Ok(())
}

macro_rules! bitvec_type {
    ($name:ident) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name {
            r: u8,
            bits: u8,
        }

        impl $name {
            pub fn new(r: u8, bits: u8) -> Result<Self, GroupError> {
                check_rank(r)?;
                if bits >> r != 0 {
                    return Err(GroupError::Domain(format!("mask {bits:#b} does not fit rank {r}")));
                }
                Ok(Self { r, bits })
            }

            pub fn from_bits(bits: &[u8]) -> Result<Self, GroupError> {
                let r = u8::try_from(bits.len()).map_err(|_| GroupError::Rank(u8::MAX))?;
                check_rank(r)?;
                let mut mask = 0u8;
                for &b in bits {
                    if b > 1 {
                        return Err(GroupError::NonBinary(format!("{bits:?}")));
                    }
                    mask = (mask << 1) | b;
                }
                Ok(Self { r, bits: mask })
            }

            pub fn zero(r: u8) -> Result<Self, GroupError> {
                Self::new(r, 0)
            }

            /// The i-th coordinate vector (0-based from the left).
            pub fn unit(r: u8, i: u8) -> Result<Self, GroupError> {
                check_rank(r)?;
                if i >= r {
                    return Err(GroupError::Domain(format!("coordinate {i} out of range for rank {r}")));
                }
                Ok(Self { r, bits: 1 << (r - 1 - i) })
            }

            pub fn rank(self) -> u8 {
                self.r
            }

            pub fn mask(self) -> u8 {
                self.bits
            }

            pub fn is_zero(self) -> bool {
                self.bits == 0
            }

            pub fn bit(self, i: u8) -> u8 {
                self.bits >> (self.r - 1 - i) & 1
            }

            pub fn add(self, other: Self) -> Result<Self, GroupError> {
                if self.r != other.r {
                    return Err(GroupError::Dimension { left: self.r, right: other.r });
                }
                Ok(Self { r: self.r, bits: self.bits ^ other.bits })
            }

            /// All 2^r values in increasing lexicographic order.
            pub fn all(r: u8) -> Result<Vec<Self>, GroupError> {
                check_rank(r)?;
                Ok((0..1u8 << r).map(|bits| Self { r, bits }).collect())
            }

            pub fn nonzero(r: u8) -> Result<Vec<Self>, GroupError> {
                Ok(Self::all(r)?.into_iter().filter(|x| !x.is_zero()).collect())
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write_bits(f, self.r, self.bits)
            }
        }

        impl FromStr for $name {
            type Err = GroupError;
            fn from_str(s: &str) -> Result<Self, GroupError> {
                let (r, bits) = parse_bits(s)?;
                Ok(Self { r, bits })
            }
        }
    };
}

bitvec_type!(GroupElement);
bitvec_type!(Character);

impl GroupElement {
    pub fn as_character(self) -> Character {
        Character { r: self.r, bits: self.bits }
    }
}

impl Character {
    pub fn as_element(self) -> GroupElement {
        GroupElement { r: self.r, bits: self.bits }
    }
}

/// The pairing chi(g) = sum chi_i g_i mod 2.
pub fn pair(chi: Character, g: GroupElement) -> Result<u8, GroupError> {
    if chi.r != g.r {
        return Err(GroupError::Dimension { left: chi.r, right: g.r });
    }
    Ok(((chi.bits & g.bits).count_ones() % 2) as u8)
}

pub fn epsilon(chi: Character, g: GroupElement) -> Result<u8, GroupError> {
    if g.is_zero() {
        return Err(GroupError::Domain("epsilon is defined for nonzero g only".into()));
    }
    pair(chi, g)
}

pub fn epsilon2(chi: Character, chi2: Character, g: GroupElement) -> Result<u8, GroupError> {
    Ok(epsilon(chi, g)? & epsilon(chi2, g)?)
}

/// The F_2-linear span of a set of elements, always containing 0.
pub fn span(r: u8, elements: &[GroupElement]) -> Result<BTreeSet<GroupElement>, GroupError> {
    let mut out = BTreeSet::new();
    out.insert(GroupElement::zero(r)?);
    for &g in elements {
        if g.r != r {
            return Err(GroupError::Dimension { left: r, right: g.r });
        }
        if out.contains(&g) {
            continue;
        }
        let shifted: Vec<_> = out.iter().map(|h| GroupElement { r, bits: h.bits ^ g.bits }).collect();
        out.extend(shifted);
    }
    Ok(out)
}

/// Dimension of a subgroup given as a set (log2 of its size).
pub fn dimension(subgroup: &BTreeSet<GroupElement>) -> u8 {
    subgroup.len().trailing_zeros() as u8
}

pub fn is_subgroup(r: u8, set: &BTreeSet<GroupElement>) -> bool {
    let Ok(zero) = GroupElement::zero(r) else { return false };
    if !set.contains(&zero) || set.iter().any(|g| g.r != r) {
        return false;
    }
    set.iter().all(|a| set.iter().all(|b| set.contains(&GroupElement { r, bits: a.bits ^ b.bits })))
}

/// Canonical representative of the coset g + H: its lexicographically smallest member.
pub fn quotient_image(g: GroupElement, subgroup: &BTreeSet<GroupElement>) -> Result<GroupElement, GroupError> {
    if !is_subgroup(g.r, subgroup) {
        return Err(GroupError::Domain("not a subgroup of matching rank".into()));
    }
    Ok(subgroup
        .iter()
        .map(|h| GroupElement { r: g.r, bits: g.bits ^ h.bits })
        .min()
        .expect("subgroup contains zero"))
}

/// A surjective linear map G -> Z_2^(r-s) whose kernel is the given subgroup.
///
/// The subgroup is put in reduced echelon form; the quotient coordinates are
/// the non-pivot positions of an element after eliminating the pivots.
#[derive(Debug, Clone)]
pub struct QuotientMap {
    r: u8,
    basis: Vec<u8>,
    pivots: Vec<u8>,
    free: Vec<u8>,
}

impl QuotientMap {
    pub fn new(r: u8, subgroup: &BTreeSet<GroupElement>) -> Result<Self, GroupError> {
        if !is_subgroup(r, subgroup) {
            return Err(GroupError::Domain("not a subgroup of matching rank".into()));
        }
        let mut rows: Vec<u8> = Vec::new();
        for g in subgroup {
            let mut v = g.bits;
            for &row in &rows {
                let lead = 7 - row.leading_zeros() as u8;
                if v >> lead & 1 == 1 {
                    v ^= row;
                }
            }
            if v != 0 {
                let lead = 7 - v.leading_zeros() as u8;
                for row in rows.iter_mut() {
                    if *row >> lead & 1 == 1 {
                        *row ^= v;
                    }
                }
                rows.push(v);
            }
        }
        let pivots: Vec<u8> = rows.iter().map(|row| 7 - row.leading_zeros() as u8).collect();
        let free = (0..r).rev().filter(|b| !pivots.contains(b)).collect();
        Ok(Self { r, basis: rows, pivots, free })
    }

    pub fn target_rank(&self) -> u8 {
        self.free.len() as u8
    }

    pub fn apply(&self, g: GroupElement) -> Result<GroupElement, GroupError> {
        if g.r != self.r {
            return Err(GroupError::Dimension { left: self.r, right: g.r });
        }
        let mut v = g.bits;
        for (&row, &p) in self.basis.iter().zip(&self.pivots) {
            if v >> p & 1 == 1 {
                v ^= row;
            }
        }
        let mut out = 0u8;
        for &b in &self.free {
            out = (out << 1) | (v >> b & 1);
        }
        GroupElement::new(self.target_rank(), out)
    }
}

/// Greedy complement of a subgroup using coordinate vectors.
pub fn complement(r: u8, subgroup: &BTreeSet<GroupElement>) -> Result<Vec<GroupElement>, GroupError> {
    let mut current = subgroup.iter().copied().collect::<Vec<_>>();
    let mut chosen = Vec::new();
    for i in 0..r {
        let e = GroupElement::unit(r, i)?;
        let s = span(r, &current)?;
        if !s.contains(&e) {
            current.push(e);
            chosen.push(e);
        }
    }
    Ok(chosen)
}
