//! Fixed-length bit vectors, used as F2 vectors.

use std::cmp::Ordering;
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect();
        write!(f, "Bits({s})")
    }
}

impl Bits {
    pub fn zeros(len: usize) -> Bits {
        Bits {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn ones(len: usize) -> Bits {
        let mut b = Bits::zeros(len);
        for i in 0..len {
            b.set(i, true);
        }
        b
    }

    pub fn from_indices(len: usize, idx: impl IntoIterator<Item = usize>) -> Bits {
        let mut b = Bits::zeros(len);
        for i in idx {
            b.flip(i);
        }
        b
    }

    /// Low `len` bits of `mask`.
    pub fn from_mask(len: usize, mask: u64) -> Bits {
        assert!(len <= 64);
        let mut b = Bits::zeros(len);
        if len > 0 {
            b.words[0] = if len == 64 { mask } else { mask & ((1u64 << len) - 1) };
        }
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        if v {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1 << (i % 64);
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &Bits) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &Bits) -> Bits {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn and(&self, other: &Bits) -> Bits {
        Bits {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    /// Parity of the inner product.
    pub fn dot(&self, other: &Bits) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            % 2
            == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + t)
            })
        })
    }

    /// Lexicographic order on `(b_0, b_1, ...)` with `0 < 1`.
    pub fn lex_cmp(&self, other: &Bits) -> Ordering {
        for (a, b) in self.words.iter().zip(&other.words) {
            let d = a ^ b;
            if d != 0 {
                let i = d.trailing_zeros();
                return if a >> i & 1 == 0 {
                    Ordering::Less
                } else {
                    Ordering::Greater
                };
            }
        }
        Ordering::Equal
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let mut a = Bits::from_indices(130, [0, 64, 129]);
        assert_eq!(a.count_ones(), 3);
        assert_eq!(a.iter_ones().collect::<Vec<_>>(), vec![0, 64, 129]);
        let b = Bits::from_indices(130, [64, 5]);
        a.xor_assign(&b);
        assert_eq!(a.iter_ones().collect::<Vec<_>>(), vec![0, 5, 129]);
        assert!(a.dot(&Bits::from_indices(130, [5])));
        assert_eq!(a.first_one(), Some(0));
        assert!(Bits::zeros(7).is_zero());
    }

    #[test]
    fn lex_order() {
        let a = Bits::from_indices(4, [1]);
        let b = Bits::from_indices(4, [0]);
        assert_eq!(a.lex_cmp(&b), Ordering::Less);
        assert_eq!(b.lex_cmp(&a), Ordering::Greater);
        assert_eq!(a.lex_cmp(&a), Ordering::Equal);
    }
}
