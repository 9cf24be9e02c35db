//! Bitset over the cells of a grid box, used for level sets and sparse
//! witness sets.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMask {
    dim: usize,
    n: usize,
    bits: Vec<u64>,
}

impl GridMask {
    pub fn new(dim: usize, n: usize) -> Self {
        let total = n.pow(dim as u32);
        Self {
            dim,
            n,
            bits: vec![0; total.div_ceil(64)],
        }
    }

    pub fn from_predicate<F: FnMut(usize) -> bool>(dim: usize, n: usize, mut pred: F) -> Self {
        let mut m = Self::new(dim, n);
        for idx in 0..n.pow(dim as u32) {
            if pred(idx) {
                m.set(idx, true);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|w| *w == 0)
    }

    #[inline]
    pub fn get(&self, idx: usize) -> bool {
        (self.bits[idx / 64] >> (idx % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, idx: usize, value: bool) {
        let w = &mut self.bits[idx / 64];
        if value {
            *w |= 1 << (idx % 64);
        } else {
            *w &= !(1 << (idx % 64));
        }
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn union_in_place(&mut self, other: &GridMask) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    pub fn subtract_in_place(&mut self, other: &GridMask) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a &= !b;
        }
    }

    pub fn intersects(&self, other: &GridMask) -> bool {
        self.bits.iter().zip(&other.bits).any(|(a, b)| a & b != 0)
    }

    pub fn complement(&self) -> GridMask {
        let mut out = self.clone();
        for w in out.bits.iter_mut() {
            *w = !*w;
        }
        // clear padding beyond len
        let total = out.len();
        let tail = total % 64;
        if tail != 0 {
            let last = out.bits.len() - 1;
            out.bits[last] &= (1u64 << tail) - 1;
        }
        out
    }

    /// Iterates set cell indices.
    pub fn iter_set(&self) -> impl Iterator<Item = usize> + '_ {
        let len = self.len();
        (0..len).filter(move |i| self.get(*i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_count() {
        let mut m = GridMask::new(2, 16); // 256 cells
        assert!(m.is_empty());
        m.set(5, true);
        m.set(63, true);
        m.set(64, true);
        assert!(m.get(5) && m.get(63) && m.get(64) && !m.get(6));
        assert_eq!(m.count(), 3);
        m.set(5, false);
        assert_eq!(m.count(), 2);
    }

    #[test]
    fn complement_respects_length() {
        let m = GridMask::new(2, 8); // 64 cells exactly
        assert_eq!(m.complement().count(), 64);
        let m3 = GridMask::new(3, 2); // 8 cells, partial word
        assert_eq!(m3.complement().count(), 8);
    }

    #[test]
    fn union_subtract_intersect() {
        let mut a = GridMask::new(1, 16);
        let mut b = GridMask::new(1, 16);
        a.set(1, true);
        a.set(2, true);
        b.set(2, true);
        b.set(3, true);
        assert!(a.intersects(&b));
        let mut u = a.clone();
        u.union_in_place(&b);
        assert_eq!(u.count(), 3);
        let mut s = a.clone();
        s.subtract_in_place(&b);
        assert_eq!(s.count(), 1);
        assert!(s.get(1) && !s.get(2));
    }
}
