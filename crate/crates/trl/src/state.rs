//! Abstract stores, result sets and binding environments.

use std::collections::BTreeMap;
use std::fmt;

use crate::ast::Name;
use crate::kind::ResKind;
use crate::shape::{Card, Shape};

/// Join-semilattice with widening, as needed by fixed-point iteration.
pub trait Lattice: Clone + PartialEq {
    fn join(&self, other: &Self) -> Self;
    /// Upper bound of `self` (the previous iterate) and `new` that stabilizes ascending chains.
    fn widen(&self, new: &Self) -> Self;
    fn leq(&self, other: &Self) -> bool;
    /// Whether the element denotes nothing.
    fn is_bottom(&self) -> bool;
}

impl Lattice for Shape {
    fn join(&self, other: &Self) -> Self {
        Shape::join(self, other)
    }
    fn widen(&self, new: &Self) -> Self {
        Shape::widen(self, new)
    }
    fn leq(&self, other: &Self) -> bool {
        Shape::leq(self, other)
    }
    fn is_bottom(&self) -> bool {
        Shape::is_bottom(self)
    }
}

impl Lattice for Card {
    fn join(&self, other: &Self) -> Self {
        Card::join(self, other)
    }
    fn widen(&self, new: &Self) -> Self {
        Card::widen(self, &self.join(new))
    }
    fn leq(&self, other: &Self) -> bool {
        Card::leq(self, other)
    }
    fn is_bottom(&self) -> bool {
        false
    }
}

/// Sequences of equal length, ordered pointwise.
impl Lattice for Vec<Shape> {
    fn join(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        self.iter().zip(other).map(|(a, b)| a.join(b)).collect()
    }
    fn widen(&self, new: &Self) -> Self {
        self.iter().zip(new).map(|(a, b)| a.widen(b)).collect()
    }
    fn leq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.iter().zip(other).all(|(a, b)| a.leq(b))
    }
    fn is_bottom(&self) -> bool {
        self.iter().any(Shape::is_bottom)
    }
}

/// Element shape and cardinality of a set under traversal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarSeq {
    pub elem: Shape,
    pub card: Card,
}

impl StarSeq {
    pub fn empty() -> Self {
        StarSeq {
            elem: Shape::bottom(),
            card: Card::EMPTY_SET,
        }
    }

    pub fn to_set(&self) -> Shape {
        Shape::set(&self.elem, self.card)
    }
}

impl Lattice for StarSeq {
    fn join(&self, other: &Self) -> Self {
        StarSeq {
            elem: self.elem.join(&other.elem),
            card: self.card.join(&other.card),
        }
    }
    fn widen(&self, new: &Self) -> Self {
        StarSeq {
            elem: self.elem.widen(&new.elem),
            card: Lattice::widen(&self.card, &new.card),
        }
    }
    fn leq(&self, other: &Self) -> bool {
        self.to_set().leq(&other.to_set())
    }
    fn is_bottom(&self) -> bool {
        self.to_set().is_bottom()
    }
}

/// Store entry: whether the variable may be unassigned, and the shape of its value if assigned.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slot {
    pub maybe_unassigned: bool,
    pub shape: Shape,
}

impl Slot {
    pub fn assigned(shape: Shape) -> Self {
        Slot {
            maybe_unassigned: false,
            shape,
        }
    }

    pub fn maybe(shape: Shape) -> Self {
        Slot {
            maybe_unassigned: true,
            shape,
        }
    }

    /// The entry of a variable that is certainly unassigned.
    pub fn unassigned() -> Self {
        Slot::maybe(Shape::bottom())
    }

    fn is_unassigned(&self) -> bool {
        self.maybe_unassigned && self.shape.is_bottom()
    }
}

/// Abstract store. Absent variables are certainly unassigned.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AbstractStore {
    slots: BTreeMap<Name, Slot>,
}

impl AbstractStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, x: &Name) -> Slot {
        self.slots.get(x).cloned().unwrap_or_else(Slot::unassigned)
    }

    pub fn set(&mut self, x: &Name, slot: Slot) {
        if slot.is_unassigned() {
            self.slots.remove(x);
        } else {
            self.slots.insert(x.clone(), slot);
        }
    }

    pub fn with(mut self, x: &Name, slot: Slot) -> Self {
        self.set(x, slot);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Slot)> {
        self.slots.iter()
    }

    fn names<'a>(&'a self, other: &'a Self) -> impl Iterator<Item = &'a Name> {
        let mut all: Vec<&Name> = self.slots.keys().chain(other.slots.keys()).collect();
        all.sort();
        all.dedup();
        all.into_iter()
    }

    /// Pointwise meet; `None` when some variable is assigned yet has no possible value.
    pub fn meet(&self, other: &Self) -> Option<Self> {
        let mut out = AbstractStore::new();
        for x in self.names(other) {
            let (a, b) = (self.get(x), other.get(x));
            let slot = Slot {
                maybe_unassigned: a.maybe_unassigned && b.maybe_unassigned,
                shape: a.shape.meet(&b.shape),
            };
            if !slot.maybe_unassigned && slot.shape.is_bottom() {
                return None;
            }
            out.set(x, slot);
        }
        Some(out)
    }

    /// Keep only the given variables.
    pub fn restrict(&self, keep: impl Fn(&Name) -> bool) -> Self {
        AbstractStore {
            slots: self.slots.iter().filter(|(k, _)| keep(k)).map(|(k, v)| (k.clone(), v.clone())).collect(),
        }
    }

    fn pointwise(&self, other: &Self, f: impl Fn(&Shape, &Shape) -> Shape) -> Self {
        let mut out = AbstractStore::new();
        for x in self.names(other) {
            let (a, b) = (self.get(x), other.get(x));
            out.set(
                x,
                Slot {
                    maybe_unassigned: a.maybe_unassigned || b.maybe_unassigned,
                    shape: f(&a.shape, &b.shape),
                },
            );
        }
        out
    }
}

impl Lattice for AbstractStore {
    fn join(&self, other: &Self) -> Self {
        self.pointwise(other, Shape::join)
    }
    fn widen(&self, new: &Self) -> Self {
        self.pointwise(new, Shape::widen)
    }
    fn leq(&self, other: &Self) -> bool {
        self.names(other).all(|x| {
            let (a, b) = (self.get(x), other.get(x));
            (!a.maybe_unassigned || b.maybe_unassigned) && a.shape.leq(&b.shape)
        })
    }
    fn is_bottom(&self) -> bool {
        false
    }
}

impl fmt::Display for AbstractStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (x, s)) in self.slots.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            let flag = if s.maybe_unassigned { "tt" } else { "ff" };
            write!(f, "{x} -> ({flag}, {})", s.shape)?;
        }
        f.write_str("]")
    }
}

impl<A: Lattice, B: Lattice> Lattice for (A, B) {
    fn join(&self, other: &Self) -> Self {
        (self.0.join(&other.0), self.1.join(&other.1))
    }
    fn widen(&self, new: &Self) -> Self {
        (self.0.widen(&new.0), self.1.widen(&new.1))
    }
    fn leq(&self, other: &Self) -> bool {
        self.0.leq(&other.0) && self.1.leq(&other.1)
    }
    fn is_bottom(&self) -> bool {
        self.0.is_bottom() || self.1.is_bottom()
    }
}

/// One result kind's value (absent for `fail` without a value and for errors) and store.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResEntry<V> {
    pub value: Option<V>,
    pub store: AbstractStore,
}

/// Partial map from result kinds to values and stores.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Results<V> {
    entries: BTreeMap<ResKind, ResEntry<V>>,
}

pub type ResultSet = Results<Shape>;

impl<V> Default for Results<V> {
    fn default() -> Self {
        Results {
            entries: BTreeMap::new(),
        }
    }
}

impl<V: Lattice> Results<V> {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(kind: ResKind, value: Option<V>, store: AbstractStore) -> Self {
        let mut r = Self::empty();
        r.add(kind, value, store);
        r
    }

    pub fn success(value: V, store: AbstractStore) -> Self {
        Self::single(ResKind::Success, Some(value), store)
    }

    pub fn error(store: AbstractStore) -> Self {
        Self::single(ResKind::Error, None, store)
    }

    /// Join one entry in. Successes without a possible value are dropped.
    pub fn add(&mut self, kind: ResKind, value: Option<V>, store: AbstractStore) {
        let value = match (kind, value) {
            (ResKind::Error, _) => None,
            (_, Some(v)) if v.is_bottom() => {
                if kind == ResKind::Success {
                    return;
                }
                None
            }
            (ResKind::Success, None) => return,
            (_, v) => v,
        };
        let entry = match self.entries.remove(&kind) {
            None => ResEntry { value, store },
            Some(old) => ResEntry {
                value: join_opt(&old.value, &value),
                store: old.store.join(&store),
            },
        };
        self.entries.insert(kind, entry);
    }

    pub fn get(&self, kind: ResKind) -> Option<&ResEntry<V>> {
        self.entries.get(&kind)
    }

    pub fn value(&self, kind: ResKind) -> Option<&V> {
        self.get(kind).and_then(|e| e.value.as_ref())
    }

    pub fn kinds(&self) -> impl Iterator<Item = ResKind> + '_ {
        self.entries.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ResKind, &ResEntry<V>)> {
        self.entries.iter().map(|(k, e)| (*k, e))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn remove(&mut self, kind: ResKind) -> Option<ResEntry<V>> {
        self.entries.remove(&kind)
    }

    pub fn absorb(&mut self, other: Results<V>) {
        for (k, e) in other.entries {
            self.add(k, e.value, e.store);
        }
    }

    pub fn map<W: Lattice>(self, mut f: impl FnMut(ResKind, Option<V>) -> Option<W>) -> Results<W> {
        let mut out = Results::empty();
        for (k, e) in self.entries {
            let w = f(k, e.value);
            out.add(k, w, e.store);
        }
        out
    }
}

fn join_opt<V: Lattice>(a: &Option<V>, b: &Option<V>) -> Option<V> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.join(y)),
        (Some(x), None) | (None, Some(x)) => Some(x.clone()),
        (None, None) => None,
    }
}

fn widen_opt<V: Lattice>(a: &Option<V>, b: &Option<V>) -> Option<V> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.widen(y)),
        (Some(x), None) | (None, Some(x)) => Some(x.clone()),
        (None, None) => None,
    }
}

fn leq_opt<V: Lattice>(a: &Option<V>, b: &Option<V>) -> bool {
    match (a, b) {
        (None, _) => true,
        (Some(x), None) => x.is_bottom(),
        (Some(x), Some(y)) => x.leq(y),
    }
}

impl<V: Lattice> Lattice for Results<V> {
    fn join(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.absorb(other.clone());
        out
    }
    fn widen(&self, new: &Self) -> Self {
        let mut out = self.clone();
        for (k, e) in &new.entries {
            let merged = match self.entries.get(k) {
                None => e.clone(),
                Some(old) => ResEntry {
                    value: widen_opt(&old.value, &e.value),
                    store: old.store.widen(&e.store),
                },
            };
            out.entries.insert(*k, merged);
        }
        out
    }
    fn leq(&self, other: &Self) -> bool {
        self.entries.iter().all(|(k, e)| {
            other
                .entries
                .get(k)
                .is_some_and(|o| leq_opt(&e.value, &o.value) && e.store.leq(&o.store))
        })
    }
    fn is_bottom(&self) -> bool {
        self.entries.is_empty()
    }
}

impl fmt::Display for ResultSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (k, e)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match &e.value {
                Some(v) => write!(f, "{k} -> <{v}, {}>", e.store)?,
                None => write!(f, "{k} -> <., {}>", e.store)?,
            }
        }
        f.write_str("]")
    }
}

/// Shapes bound by a successful pattern match.
pub type AbstractBinding = BTreeMap<Name, Shape>;

/// Combine two partial bindings; `None` when a shared name has no common value.
///
/// The flag is set when a shared name might still be bound to two different
/// values, so that the concrete match may fail even though the shapes meet.
pub fn merge_bindings(a: &AbstractBinding, b: &AbstractBinding) -> (Option<AbstractBinding>, bool) {
    let mut out = a.clone();
    let mut may_conflict = false;
    for (x, s) in b {
        match out.get(x) {
            None => {
                out.insert(x.clone(), s.clone());
            }
            Some(prev) => {
                let m = prev.meet(s);
                if m.is_bottom() {
                    return (None, true);
                }
                if !(prev == s && prev.count() == Some(1)) {
                    may_conflict = true;
                }
                out.insert(x.clone(), m);
            }
        }
    }
    (Some(out), may_conflict)
}
