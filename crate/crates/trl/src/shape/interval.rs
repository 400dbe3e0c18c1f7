//! Leaf lattices: integer intervals, set cardinalities and string shapes.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Non-empty integer interval; `None` bounds are infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IntRange {
    pub lo: Option<i64>,
    pub hi: Option<i64>,
}

fn widen_lo(old: Option<i64>, new: Option<i64>) -> Option<i64> {
    match (old, new) {
        (_, None) => None,
        (None, _) => None,
        (Some(o), Some(n)) if n >= o => Some(o),
        // Unstable lower bound: drop to the next threshold below, else to -inf.
        (Some(_), Some(n)) if n >= 1 => Some(1),
        (Some(_), Some(n)) if n >= 0 => Some(0),
        _ => None,
    }
}

fn widen_hi(old: Option<i64>, new: Option<i64>) -> Option<i64> {
    match (old, new) {
        (_, None) | (None, _) => None,
        (Some(o), Some(n)) if n <= o => Some(o),
        (Some(_), Some(n)) if n <= 0 => Some(0),
        (Some(_), Some(n)) if n <= 1 => Some(1),
        _ => None,
    }
}

impl IntRange {
    pub const FULL: IntRange = IntRange { lo: None, hi: None };

    pub fn new(lo: Option<i64>, hi: Option<i64>) -> Option<IntRange> {
        match (lo, hi) {
            (Some(l), Some(h)) if l > h => None,
            _ => Some(IntRange { lo, hi }),
        }
    }

    pub fn point(n: i64) -> IntRange {
        IntRange {
            lo: Some(n),
            hi: Some(n),
        }
    }

    pub fn contains(&self, n: i64) -> bool {
        self.lo.map_or(true, |l| l <= n) && self.hi.map_or(true, |h| n <= h)
    }

    pub fn leq(&self, other: &IntRange) -> bool {
        let lo_ok = match (self.lo, other.lo) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => a >= b,
        };
        let hi_ok = match (self.hi, other.hi) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => a <= b,
        };
        lo_ok && hi_ok
    }

    pub fn join(&self, other: &IntRange) -> IntRange {
        IntRange {
            lo: self.lo.zip(other.lo).map(|(a, b)| a.min(b)),
            hi: self.hi.zip(other.hi).map(|(a, b)| a.max(b)),
        }
    }

    pub fn meet(&self, other: &IntRange) -> Option<IntRange> {
        let lo = match (self.lo, other.lo) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        let hi = match (self.hi, other.hi) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        IntRange::new(lo, hi)
    }

    /// Interval widening with thresholds {0, 1}.
    pub fn widen(&self, new: &IntRange) -> IntRange {
        IntRange {
            lo: widen_lo(self.lo, new.lo),
            hi: widen_hi(self.hi, new.hi),
        }
    }

    /// Number of members, if finite and representable.
    pub fn size(&self) -> Option<u64> {
        let (l, h) = (self.lo?, self.hi?);
        u64::try_from(h as i128 - l as i128 + 1).ok()
    }

    /// Over-approximation of `self \ other` by trimming end points.
    pub fn rel_complement(&self, other: &IntRange) -> Option<IntRange> {
        if self.leq(other) {
            return None;
        }
        let Some(common) = self.meet(other) else {
            return Some(*self);
        };
        // `other` covers a prefix of `self`: keep what lies above it.
        if other.lo.map_or(true, |ol| self.lo.is_some_and(|sl| ol <= sl)) {
            if let Some(h) = common.hi {
                return IntRange::new(h.checked_add(1), self.hi).or(Some(*self));
            }
        }
        // `other` covers a suffix.
        if other.hi.map_or(true, |oh| self.hi.is_some_and(|sh| oh >= sh)) {
            if let Some(l) = common.lo {
                return IntRange::new(self.lo, l.checked_sub(1)).or(Some(*self));
            }
        }
        Some(*self)
    }
}

impl fmt::Display for IntRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lo {
            Some(l) => write!(f, "[{l};")?,
            None => write!(f, "[-inf;")?,
        }
        match self.hi {
            Some(h) => write!(f, "{h}]"),
            None => write!(f, "inf]"),
        }
    }
}

/// Non-empty cardinality interval over the naturals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Card {
    pub lo: u64,
    pub hi: Option<u64>,
}

impl Card {
    pub const ANY: Card = Card { lo: 0, hi: None };
    pub const EMPTY_SET: Card = Card { lo: 0, hi: Some(0) };

    pub fn new(lo: u64, hi: Option<u64>) -> Option<Card> {
        match hi {
            Some(h) if lo > h => None,
            _ => Some(Card { lo, hi }),
        }
    }

    pub fn exactly(n: u64) -> Card {
        Card { lo: n, hi: Some(n) }
    }

    pub fn contains(&self, n: u64) -> bool {
        self.lo <= n && self.hi.map_or(true, |h| n <= h)
    }

    pub fn is_empty_set(&self) -> bool {
        self.hi == Some(0)
    }

    pub fn leq(&self, other: &Card) -> bool {
        self.lo >= other.lo
            && match (self.hi, other.hi) {
                (_, None) => true,
                (None, Some(_)) => false,
                (Some(a), Some(b)) => a <= b,
            }
    }

    pub fn join(&self, other: &Card) -> Card {
        Card {
            lo: self.lo.min(other.lo),
            hi: self.hi.zip(other.hi).map(|(a, b)| a.max(b)),
        }
    }

    pub fn meet(&self, other: &Card) -> Option<Card> {
        let hi = match (self.hi, other.hi) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        Card::new(self.lo.max(other.lo), hi)
    }

    pub fn widen(&self, new: &Card) -> Card {
        let lo = if new.lo >= self.lo {
            self.lo
        } else if new.lo >= 1 {
            1
        } else {
            0
        };
        let hi = match (self.hi, new.hi) {
            (Some(o), Some(n)) if n <= o => Some(o),
            (Some(_), Some(n)) if n <= 1 => Some(1),
            _ => None,
        };
        Card { lo, hi }
    }

    /// Cardinalities of a set with one more element.
    pub fn succ(&self) -> Card {
        Card {
            lo: self.lo.saturating_add(1),
            hi: self.hi.map(|h| h.saturating_add(1)),
        }
    }

    /// Cardinalities left after removing one element; `None` when the set must be empty.
    pub fn pred(&self) -> Option<Card> {
        match self.hi {
            Some(0) => None,
            hi => Some(Card {
                lo: self.lo.saturating_sub(1),
                hi: hi.map(|h| h - 1),
            }),
        }
    }

    /// Cardinalities left after removing between `taken.lo` and `taken.hi` elements.
    pub fn minus(&self, taken: &Card) -> Option<Card> {
        let hi = match (self.hi, taken.lo) {
            (Some(h), l) if l > h => return None,
            (Some(h), l) => Some(h - l),
            (None, _) => None,
        };
        let lo = match taken.hi {
            Some(th) => self.lo.saturating_sub(th),
            None => 0,
        };
        Card::new(lo, hi)
    }

    pub fn add(&self, other: &Card) -> Card {
        Card {
            lo: self.lo.saturating_add(other.lo),
            hi: self.hi.zip(other.hi).map(|(a, b)| a.saturating_add(b)),
        }
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hi {
            Some(h) => write!(f, "[{};{}]", self.lo, h),
            None => write!(f, "[{};inf]", self.lo),
        }
    }
}

/// Bound on tracked string constants before collapsing to any string.
pub const MAX_STR_CONSTS: usize = 8;

/// Non-empty string shape.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strs {
    Consts(BTreeSet<String>),
    Any,
}

impl Strs {
    pub fn consts<I: IntoIterator<Item = String>>(items: I) -> Option<Strs> {
        let set: BTreeSet<String> = items.into_iter().collect();
        match set.len() {
            0 => None,
            n if n > MAX_STR_CONSTS => Some(Strs::Any),
            _ => Some(Strs::Consts(set)),
        }
    }

    pub fn contains(&self, s: &str) -> bool {
        match self {
            Strs::Any => true,
            Strs::Consts(set) => set.contains(s),
        }
    }

    pub fn leq(&self, other: &Strs) -> bool {
        match (self, other) {
            (_, Strs::Any) => true,
            (Strs::Any, _) => false,
            (Strs::Consts(a), Strs::Consts(b)) => a.is_subset(b),
        }
    }

    pub fn join(&self, other: &Strs) -> Strs {
        match (self, other) {
            (Strs::Consts(a), Strs::Consts(b)) => {
                Strs::consts(a.union(b).cloned()).expect("union of non-empty sets")
            }
            _ => Strs::Any,
        }
    }

    pub fn meet(&self, other: &Strs) -> Option<Strs> {
        match (self, other) {
            (Strs::Any, s) | (s, Strs::Any) => Some(s.clone()),
            (Strs::Consts(a), Strs::Consts(b)) => Strs::consts(a.intersection(b).cloned()),
        }
    }

    pub fn rel_complement(&self, other: &Strs) -> Option<Strs> {
        match (self, other) {
            (_, Strs::Any) => None,
            (Strs::Any, _) => Some(Strs::Any),
            (Strs::Consts(a), Strs::Consts(b)) => Strs::consts(a.difference(b).cloned()),
        }
    }

    pub fn size(&self) -> Option<u64> {
        match self {
            Strs::Any => None,
            Strs::Consts(s) => Some(s.len() as u64),
        }
    }
}
