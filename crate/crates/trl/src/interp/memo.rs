//! Trace memoization: per-key cached (input, output) pairs resolved by
//! widened fixed-point iteration.

use std::collections::BTreeMap;

use crate::ast::{Name, SiteId, TypeExpr};
use crate::shape::{Card, Shape};
use crate::state::{AbstractStore, Lattice, ResultSet, Results, StarSeq};

/// Key of one memo entry: a finite abstraction of the input.
pub type PartitionKey = TypeExpr;

/// Set nesting kept in partition keys.
pub const KEY_DEPTH: usize = 2;

pub fn partition_key(s: &Shape) -> PartitionKey {
    s.type_of().truncate(KEY_DEPTH)
}

pub type Table<K, I, O> = BTreeMap<K, (I, O)>;

pub type VisitInput = (Shape, AbstractStore);
pub type StarInput = ((Shape, Card), AbstractStore);

/// All memo tables of one analysis.
#[derive(Clone, Debug, Default)]
pub struct Tables {
    /// Depth-wise traversal of single values.
    pub visit: Table<(SiteId, PartitionKey), VisitInput, ResultSet>,
    /// Breadth-wise traversal of set elements.
    pub star: Table<(SiteId, PartitionKey), StarInput, Results<StarSeq>>,
    pub call: Table<(Name, Vec<PartitionKey>), AbstractStore, ResultSet>,
}

/// What to do after a memo lookup.
pub enum Lookup<I, O> {
    Hit(O),
    /// Start iterating from this (possibly widened) input.
    Iterate(I),
}

/// Hit when a stored input covers the query, otherwise widen the stored input with it.
pub fn lookup<K: Ord, I: Lattice, O: Clone>(table: &Table<K, I, O>, key: &K, input: I) -> Lookup<I, O> {
    match table.get(key) {
        Some((stored, out)) if input.leq(stored) => Lookup::Hit(out.clone()),
        Some((stored, _)) => Lookup::Iterate(stored.widen(&stored.join(&input))),
        None => Lookup::Iterate(input),
    }
}
