//! Compact fixed-width bitsets used for markings and place sets.
//!
//! A [`Bits`] value always carries its width, so equality and ordering are
//! only meaningful between sets drawn from the same net. Widths are not
//! limited to a single machine word; composed nets can have hundreds of
//! places.

use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Bits {
    width: usize,
    words: Vec<u64>,
}

impl Bits {
    pub fn new(width: usize) -> Self {
        Bits {
            width,
            words: vec![0; width.div_ceil(64)],
        }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(width: usize, indices: I) -> Self {
        let mut b = Bits::new(width);
        for i in indices {
            b.set(i);
        }
        b
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn set(&mut self, i: usize) {
        assert!(i < self.width, "bit {i} out of range (width {})", self.width);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn clear(&mut self, i: usize) {
        assert!(i < self.width);
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.width);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_subset_of(&self, other: &Bits) -> bool {
        debug_assert_eq!(self.width, other.width);
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &Bits) -> bool {
        debug_assert_eq!(self.width, other.width);
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn union(&self, other: &Bits) -> Bits {
        debug_assert_eq!(self.width, other.width);
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a | b)
            .collect();
        Bits {
            width: self.width,
            words,
        }
    }

    pub fn union_with(&mut self, other: &Bits) {
        debug_assert_eq!(self.width, other.width);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersection(&self, other: &Bits) -> Bits {
        debug_assert_eq!(self.width, other.width);
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a & b)
            .collect();
        Bits {
            width: self.width,
            words,
        }
    }

    pub fn difference(&self, other: &Bits) -> Bits {
        debug_assert_eq!(self.width, other.width);
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a & !b)
            .collect();
        Bits {
            width: self.width,
            words,
        }
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, w)| {
            let mut w = *w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }

    /// The set as a single word; only valid for widths up to 64.
    pub fn as_mask(&self) -> u64 {
        assert!(self.width <= 64, "mask form requires width <= 64");
        self.words.first().copied().unwrap_or(0)
    }

    pub fn from_mask(width: usize, mask: u64) -> Self {
        assert!(width <= 64);
        assert!(width == 64 || mask >> width == 0, "mask has bits beyond width");
        Bits {
            width,
            words: if width == 0 { vec![] } else { vec![mask] },
        }
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, i) in self.ones().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}
