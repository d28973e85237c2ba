//! Fixed-length dense bit vectors with a shifted-union kernel.

const WORD: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    pub fn new(len: usize) -> Self {
        Bits { words: vec![0; len.div_ceil(WORD)], len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        i < self.len && (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / WORD] |= 1 << (i % WORD);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + b)
            })
        })
    }

    pub fn is_subset_of(&self, other: &Bits) -> bool {
        self.words
            .iter()
            .zip(other.words.iter().chain(std::iter::repeat(&0)))
            .all(|(a, b)| a & !b == 0)
    }

    pub fn or_assign(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    /// Index range of words that contain at least one set bit.
    fn active_words(&self) -> Option<(usize, usize)> {
        let first = self.words.iter().position(|&w| w != 0)?;
        let last = self.words.iter().rposition(|&w| w != 0)?;
        Some((first, last))
    }

    /// `self |= src << shift`, where bit `i` of `src` lands on bit `i + shift`.
    /// Bits shifted outside `[0, len)` are dropped.
    pub fn or_shifted(&mut self, src: &Bits, shift: i64) {
        let Some((first, last)) = src.active_words() else {
            return;
        };
        let word_shift = shift.div_euclid(WORD as i64);
        let bit_shift = shift.rem_euclid(WORD as i64) as u32;
        let n = self.words.len() as i64;
        for wi in first..=last {
            let w = src.words[wi];
            if w == 0 {
                continue;
            }
            let lo = wi as i64 + word_shift;
            if (0..n).contains(&lo) {
                self.words[lo as usize] |= w << bit_shift;
            }
            if bit_shift != 0 {
                let hi = lo + 1;
                if (0..n).contains(&hi) {
                    self.words[hi as usize] |= w >> (WORD as u32 - bit_shift);
                }
            }
        }
        self.clear_tail();
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}
