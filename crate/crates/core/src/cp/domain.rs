use std::fmt;

use crate::error::CpError;

/// Largest value a [`Domain`] can hold.
pub const MAX_VALUE: u32 = 63;

/// Finite set of small non-negative integers, stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Domain(pub(crate) u64);

impl Domain {
    pub const EMPTY: Domain = Domain(0);

    pub fn from_values<I: IntoIterator<Item = u32>>(values: I) -> Result<Self, CpError> {
        let mut bits = 0u64;
        for v in values {
            if v > MAX_VALUE {
                return Err(CpError::ValueTooLarge(v));
            }
            bits |= 1 << v;
        }
        Ok(Domain(bits))
    }

    /// `{lo, ..., hi}`; panics if `hi > MAX_VALUE`.
    pub fn range(lo: u32, hi: u32) -> Self {
        assert!(hi <= MAX_VALUE, "domain bound {hi} exceeds {MAX_VALUE}");
        if lo > hi {
            return Domain::EMPTY;
        }
        let width = hi - lo + 1;
        let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
        Domain(mask << lo)
    }

    pub fn singleton(v: u32) -> Self {
        assert!(v <= MAX_VALUE, "domain value {v} exceeds {MAX_VALUE}");
        Domain(1 << v)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, v: u32) -> bool {
        v <= MAX_VALUE && self.0 & (1 << v) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_fixed(self) -> bool {
        self.0.count_ones() == 1
    }

    /// The single value of a fixed domain.
    pub fn value(self) -> Option<u32> {
        self.is_fixed().then(|| self.0.trailing_zeros())
    }

    pub fn min(self) -> Option<u32> {
        (self.0 != 0).then(|| self.0.trailing_zeros())
    }

    pub fn max(self) -> Option<u32> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros())
    }

    pub fn can_be_zero(self) -> bool {
        self.0 & 1 != 0
    }

    pub fn can_be_nonzero(self) -> bool {
        self.0 & !1 != 0
    }

    pub fn without(self, v: u32) -> Self {
        if v > MAX_VALUE {
            self
        } else {
            Domain(self.0 & !(1 << v))
        }
    }

    pub fn intersect(self, other: Domain) -> Self {
        Domain(self.0 & other.0)
    }

    pub fn only_zero(self) -> Self {
        Domain(self.0 & 1)
    }

    pub fn nonzero(self) -> Self {
        Domain(self.0 & !1)
    }

    pub fn filter(self, mut keep: impl FnMut(u32) -> bool) -> Self {
        let mut out = 0u64;
        for v in self.values() {
            if keep(v) {
                out |= 1 << v;
            }
        }
        Domain(out)
    }

    /// Values in ascending order.
    pub fn values(self) -> impl DoubleEndedIterator<Item = u32> {
        (0..=MAX_VALUE).filter(move |&v| self.0 & (1 << v) != 0)
    }

    pub fn is_subset_of(self, other: Domain) -> bool {
        self.0 & !other.0 == 0
    }
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.values()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_set_operations() {
        let d = Domain::range(0, 2);
        assert_eq!(d.values().collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(d.len(), 3);
        assert_eq!(d.min(), Some(0));
        assert_eq!(d.max(), Some(2));
        assert!(d.can_be_zero() && d.can_be_nonzero());
        assert_eq!(d.nonzero().values().collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(d.only_zero(), Domain::singleton(0));
        assert_eq!(Domain::singleton(5).value(), Some(5));
        assert!(Domain::EMPTY.is_empty());
        assert_eq!(Domain::range(0, 63).len(), 64);
        assert!(Domain::from_values([64]).is_err());
        assert_eq!(d.values().rev().collect::<Vec<_>>(), vec![2, 1, 0]);
    }
}
