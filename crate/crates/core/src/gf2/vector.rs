use std::cmp::Ordering;
use std::fmt;
use std::ops::{BitAnd, BitXor, BitXorAssign};
use std::str::FromStr;

use crate::error::{Error, Result};

const WORD: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// A vector in F_2^n, packed 64 coordinates per word.
///
/// Coordinate `i` (0-based) lives in bit `i % 64` of word `i / 64`, so
/// coordinate 0 is both the least significant bit and the leftmost character
/// of the text form. Bits past `len` are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = BitVector {
            len,
            words: vec![u64::MAX; words_for(len)],
        };
        v.clear_tail();
        v
    }

    /// The standard basis vector with a single one at coordinate `i`.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    /// Builds a vector whose coordinate `i` is bit `i` of `bits`; higher bits are dropped.
    pub fn from_u64(len: usize, bits: u64) -> Self {
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = bits;
            v.clear_tail();
        }
        v
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % WORD == 0 {
                words.push(0);
            }
            if b {
                words[len / WORD] |= 1 << (len % WORD);
            }
            len += 1;
        }
        BitVector { len, words }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, ones: I) -> Self {
        let mut v = Self::zeros(len);
        for i in ones {
            v.set(i, true);
        }
        v
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
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "coordinate {i} out of range for length {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "coordinate {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "coordinate {i} out of range for length {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    /// Hamming weight.
    #[inline]
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Inner product over F_2.
    #[inline]
    pub fn dot(&self, other: &BitVector) -> bool {
        debug_assert_eq!(self.len, other.len);
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    #[inline]
    pub fn hamming_distance(&self, other: &BitVector) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &BitVector) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Coordinates holding a one, ascending.
    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD + b)
            })
        })
    }

    pub fn support(&self) -> Vec<usize> {
        self.ones_iter().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// The vector as an integer with coordinate `i` at bit `i`. Requires `len <= 64`.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= WORD, "vector of length {} does not fit in u64", self.len);
        self.words.first().copied().unwrap_or(0)
    }

    /// Coordinates `start..end` as a new vector.
    pub fn slice(&self, start: usize, end: usize) -> BitVector {
        assert!(start <= end && end <= self.len);
        BitVector::from_bools((start..end).map(|i| self.get(i)))
    }

    /// Copy of `self` truncated or zero-padded to `len` coordinates.
    pub fn resized(&self, len: usize) -> BitVector {
        let mut out = BitVector::zeros(len);
        let keep = words_for(len.min(self.len));
        out.words[..keep].copy_from_slice(&self.words[..keep]);
        out.clear_tail();
        out
    }

    pub fn concat(&self, other: &BitVector) -> BitVector {
        BitVector::from_bools(self.iter().chain(other.iter()))
    }

    /// Numeric comparison, treating coordinate `len - 1` as the most significant bit.
    pub fn cmp_numeric(&self, other: &BitVector) -> Ordering {
        self.len.cmp(&other.len).then_with(|| {
            for (a, b) in self.words.iter().rev().zip(other.words.iter().rev()) {
                match a.cmp(b) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub(crate) fn check_len(&self, expected: usize) -> Result<()> {
        if self.len != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: self.len,
            });
        }
        Ok(())
    }
}

impl PartialOrd for BitVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BitVector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_numeric(other)
    }
}

impl BitXor for &BitVector {
    type Output = BitVector;

    fn bitxor(self, rhs: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.xor_assign(rhs);
        out
    }
}

impl BitXorAssign<&BitVector> for BitVector {
    fn bitxor_assign(&mut self, rhs: &BitVector) {
        self.xor_assign(rhs);
    }
}

impl BitAnd for &BitVector {
    type Output = BitVector;

    fn bitand(self, rhs: &BitVector) -> BitVector {
        debug_assert_eq!(self.len, rhs.len);
        BitVector {
            len: self.len,
            words: self.words.iter().zip(&rhs.words).map(|(a, b)| a & b).collect(),
        }
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bits = s
            .chars()
            .enumerate()
            .map(|(col, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse {
                    line: 1,
                    message: format!("unexpected character {other:?} at column {}", col + 1),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BitVector::from_bools(bits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_form_is_coordinate_one_leftmost() {
        let v: BitVector = "1101".parse().unwrap();
        assert_eq!(v.len(), 4);
        assert!(v.get(0) && v.get(1) && !v.get(2) && v.get(3));
        assert_eq!(v.to_u64(), 0b1011);
        assert_eq!(v.to_string(), "1101");
    }

    #[test]
    fn tail_bits_stay_clear() {
        let v = BitVector::ones(70);
        assert_eq!(v.weight(), 70);
        let w = BitVector::from_u64(3, 0xff);
        assert_eq!(w.weight(), 3);
        assert_eq!(BitVector::ones(130).resized(65).weight(), 65);
    }

    #[test]
    fn dot_and_distance() {
        let a: BitVector = "1100".parse().unwrap();
        let b: BitVector = "1010".parse().unwrap();
        assert!(a.dot(&b));
        assert_eq!(a.hamming_distance(&b), 2);
        assert_eq!((&a ^ &b).to_string(), "0110");
    }

    #[test]
    fn numeric_order_uses_high_coordinates_first() {
        let a = BitVector::from_u64(70, 0);
        let mut b = a.clone();
        b.set(69, true);
        let c = BitVector::from_u64(70, u64::MAX);
        assert!(b > c);
        assert!(a < c);
    }

    #[test]
    fn rejects_bad_characters() {
        assert!("10x1".parse::<BitVector>().is_err());
    }

    #[test]
    fn support_and_slices() {
        let v: BitVector = "0110100".parse().unwrap();
        assert_eq!(v.support(), vec![1, 2, 4]);
        assert_eq!(v.slice(1, 4).to_string(), "110");
        assert_eq!(v.resized(9).to_string(), "011010000");
    }
}
