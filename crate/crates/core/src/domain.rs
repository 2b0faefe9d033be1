//! Domain representations: explicit value sets and contiguous intervals.
//!
//! Values range over `1..=d`. A [`SetDomain`] stores an arbitrary finite set
//! of values as a bitset; an [`IntervalDomain`] stores just a lower and upper
//! bound and stands for the contiguous range between them. Bounds-consistency
//! propagators work on intervals, domain-consistency ones on sets.

/// A domain value. Values are normalized to `1..=d` by construction or by the
/// instance file parser.
pub type Value = i32;

/// 0-based identifier of a variable, stable across propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl std::fmt::Display for VarId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "X{}", self.0 + 1)
    }
}

/// An explicit finite set of values, stored as a bitset (value `v` lives at
/// bit `v - 1`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SetDomain {
    words: Vec<u64>,
}

impl SetDomain {
    pub fn new() -> Self {
        SetDomain { words: Vec::new() }
    }

    pub fn from_values<I: IntoIterator<Item = Value>>(values: I) -> Self {
        let mut s = SetDomain::new();
        for v in values {
            s.insert(v);
        }
        s
    }

    pub fn from_range(lb: Value, ub: Value) -> Self {
        SetDomain::from_values(lb..=ub)
    }

    fn slot(v: Value) -> (usize, u64) {
        debug_assert!(v >= 1, "values are 1-based");
        let bit = (v - 1) as usize;
        (bit / 64, 1u64 << (bit % 64))
    }

    pub fn insert(&mut self, v: Value) {
        let (w, m) = Self::slot(v);
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= m;
    }

    pub fn remove(&mut self, v: Value) -> bool {
        let (w, m) = Self::slot(v);
        if w < self.words.len() && self.words[w] & m != 0 {
            self.words[w] &= !m;
            true
        } else {
            false
        }
    }

    pub fn contains(&self, v: Value) -> bool {
        if v < 1 {
            return false;
        }
        let (w, m) = Self::slot(v);
        w < self.words.len() && self.words[w] & m != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn min(&self) -> Option<Value> {
        for (i, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some((i * 64 + w.trailing_zeros() as usize) as Value + 1);
            }
        }
        None
    }

    pub fn max(&self) -> Option<Value> {
        for (i, &w) in self.words.iter().enumerate().rev() {
            if w != 0 {
                return Some((i * 64 + 63 - w.leading_zeros() as usize) as Value + 1);
            }
        }
        None
    }

    pub fn union_with(&mut self, other: &SetDomain) {
        if other.words.len() > self.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (i, &w) in other.words.iter().enumerate() {
            self.words[i] |= w;
        }
    }

    pub fn intersect_with(&mut self, other: &SetDomain) {
        for (i, w) in self.words.iter_mut().enumerate() {
            *w &= other.words.get(i).copied().unwrap_or(0);
        }
    }

    pub fn is_subset_of(&self, other: &SetDomain) -> bool {
        self.words
            .iter()
            .enumerate()
            .all(|(i, &w)| w & !other.words.get(i).copied().unwrap_or(0) == 0)
    }

    /// Iterate values in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = Value> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some((i * 64 + b) as Value + 1)
                }
            })
        })
    }

    /// True when the set is a contiguous range `min..=max`.
    pub fn is_contiguous(&self) -> bool {
        match (self.min(), self.max()) {
            (Some(lo), Some(hi)) => self.len() == (hi - lo + 1) as usize,
            _ => false,
        }
    }

    /// The tightest interval containing the set (`None` when empty).
    pub fn hull(&self) -> Option<IntervalDomain> {
        Some(IntervalDomain {
            lb: self.min()?,
            ub: self.max()?,
        })
    }
}

impl FromIterator<Value> for SetDomain {
    fn from_iter<I: IntoIterator<Item = Value>>(iter: I) -> Self {
        SetDomain::from_values(iter)
    }
}

/// A contiguous set `lb..=ub`; empty when `lb > ub`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IntervalDomain {
    pub lb: Value,
    pub ub: Value,
}

impl IntervalDomain {
    pub fn new(lb: Value, ub: Value) -> Self {
        IntervalDomain { lb, ub }
    }

    pub fn is_empty(&self) -> bool {
        self.lb > self.ub
    }

    pub fn len(&self) -> usize {
        if self.is_empty() {
            0
        } else {
            (self.ub - self.lb + 1) as usize
        }
    }

    pub fn contains(&self, v: Value) -> bool {
        self.lb <= v && v <= self.ub
    }

    pub fn to_set(&self) -> SetDomain {
        if self.is_empty() {
            SetDomain::new()
        } else {
            SetDomain::from_range(self.lb, self.ub)
        }
    }
}

impl std::fmt::Display for IntervalDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}..{}", self.lb, self.ub)
    }
}

/// A per-variable domain: either an explicit set or a contiguous interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Domain {
    Set(SetDomain),
    Interval(IntervalDomain),
}

impl Domain {
    pub fn min(&self) -> Option<Value> {
        match self {
            Domain::Set(s) => s.min(),
            Domain::Interval(iv) => (!iv.is_empty()).then_some(iv.lb),
        }
    }

    pub fn max(&self) -> Option<Value> {
        match self {
            Domain::Set(s) => s.max(),
            Domain::Interval(iv) => (!iv.is_empty()).then_some(iv.ub),
        }
    }

    pub fn contains(&self, v: Value) -> bool {
        match self {
            Domain::Set(s) => s.contains(v),
            Domain::Interval(iv) => iv.contains(v),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Domain::Set(s) => s.len(),
            Domain::Interval(iv) => iv.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_set(&self) -> SetDomain {
        match self {
            Domain::Set(s) => s.clone(),
            Domain::Interval(iv) => iv.to_set(),
        }
    }

    /// Lossless interval view: intervals pass through, contiguous sets
    /// convert, anything else is `None`.
    pub fn as_exact_interval(&self) -> Option<IntervalDomain> {
        match self {
            Domain::Interval(iv) => Some(*iv),
            Domain::Set(s) if s.is_contiguous() => s.hull(),
            _ => None,
        }
    }

    pub fn iter(&self) -> Box<dyn Iterator<Item = Value> + '_> {
        match self {
            Domain::Set(s) => Box::new(s.iter()),
            Domain::Interval(iv) => Box::new(iv.lb..=iv.ub),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_basic_ops() {
        let mut s = SetDomain::from_values([3, 1, 70]);
        assert!(s.contains(1) && s.contains(3) && s.contains(70));
        assert!(!s.contains(2));
        assert_eq!(s.min(), Some(1));
        assert_eq!(s.max(), Some(70));
        assert_eq!(s.len(), 3);
        assert!(s.remove(3));
        assert!(!s.remove(3));
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![1, 70]);
    }

    #[test]
    fn interval_to_set_and_back_is_identity_when_contiguous() {
        let iv = IntervalDomain::new(2, 5);
        let s = iv.to_set();
        assert!(s.is_contiguous());
        assert_eq!(s.hull(), Some(iv));

        let mut holed = s.clone();
        holed.remove(3);
        assert!(!holed.is_contiguous());
    }

    #[test]
    fn empty_interval() {
        let iv = IntervalDomain::new(4, 3);
        assert!(iv.is_empty());
        assert_eq!(iv.len(), 0);
        assert!(iv.to_set().is_empty());
    }
}
