//! Fixed-size bitset backing residue windows.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bitset {
    words: Vec<u64>,
    len: u64,
}

impl Bitset {
    pub fn new(len: u64) -> Self {
        let words = vec![0u64; len.div_ceil(64) as usize];
        Bitset { words, len }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn set(&mut self, idx: u64) {
        debug_assert!(idx < self.len);
        self.words[(idx / 64) as usize] |= 1u64 << (idx % 64);
    }

    #[inline]
    pub fn get(&self, idx: u64) -> bool {
        debug_assert!(idx < self.len);
        self.words[(idx / 64) as usize] >> (idx % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Indices of set bits, ascending.
    pub fn iter_ones(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let base = i as u64 * 64;
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let bit = rest.trailing_zeros() as u64;
                    rest &= rest - 1;
                    Some(base + bit)
                }
            })
        })
    }
}
