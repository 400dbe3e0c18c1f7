use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::ast::{Name, Schema, TypeExpr};

/// Runtime values. The derived order is the canonical order used for set traversal.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConcreteValue {
    Int(i64),
    Str(String),
    Cons(Name, Vec<ConcreteValue>),
    Set(BTreeSet<ConcreteValue>),
}

pub type ConcreteStore = BTreeMap<Name, ConcreteValue>;
pub type BindingEnv = BTreeMap<Name, ConcreteValue>;

impl ConcreteValue {
    pub fn cons(k: &str, args: Vec<ConcreteValue>) -> Self {
        ConcreteValue::Cons(Name::new(k), args)
    }

    pub fn set<I: IntoIterator<Item = ConcreteValue>>(items: I) -> Self {
        ConcreteValue::Set(items.into_iter().collect())
    }

    pub fn str(s: &str) -> Self {
        ConcreteValue::Str(s.to_string())
    }

    /// Tree depth; leaves and nullary constructors have depth 1.
    pub fn depth(&self) -> usize {
        match self {
            ConcreteValue::Int(_) | ConcreteValue::Str(_) => 1,
            ConcreteValue::Cons(_, args) => 1 + args.iter().map(Self::depth).max().unwrap_or(0),
            ConcreteValue::Set(items) => 1 + items.iter().map(Self::depth).max().unwrap_or(0),
        }
    }

    /// Number of nodes, leaves included.
    pub fn size(&self) -> usize {
        match self {
            ConcreteValue::Int(_) | ConcreteValue::Str(_) => 1,
            ConcreteValue::Cons(_, args) => 1 + args.iter().map(Self::size).sum::<usize>(),
            ConcreteValue::Set(items) => 1 + items.iter().map(Self::size).sum::<usize>(),
        }
    }

    /// Dynamic type membership.
    pub fn has_type(&self, t: &TypeExpr, schema: &Schema) -> bool {
        match (t, self) {
            (TypeExpr::Value, _) => true,
            (TypeExpr::Void, _) => false,
            (TypeExpr::Int, ConcreteValue::Int(_)) => true,
            (TypeExpr::Str, ConcreteValue::Str(_)) => true,
            (TypeExpr::Set(inner), ConcreteValue::Set(items)) => items.iter().all(|v| v.has_type(inner, schema)),
            (TypeExpr::Adt(adt), ConcreteValue::Cons(k, _)) => schema.ctor(k).is_some_and(|s| &s.adt == adt),
            _ => false,
        }
    }
}

impl fmt::Display for ConcreteValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConcreteValue::Int(n) => write!(f, "{n}"),
            ConcreteValue::Str(s) => write!(f, "{s:?}"),
            ConcreteValue::Cons(k, args) => {
                write!(f, "{k}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            ConcreteValue::Set(items) => {
                f.write_str("{")?;
                for (i, a) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str("}")
            }
        }
    }
}

impl fmt::Debug for ConcreteValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_and_display() {
        let v = ConcreteValue::cons("suc", vec![ConcreteValue::cons("zero", vec![])]);
        assert_eq!(v.depth(), 2);
        assert_eq!(v.to_string(), "suc(zero())");
        let s = ConcreteValue::set([ConcreteValue::Int(2), ConcreteValue::Int(1), ConcreteValue::Int(2)]);
        assert_eq!(s.to_string(), "{1, 2}");
        assert_eq!(ConcreteValue::set([]).depth(), 1);
    }

    #[test]
    fn canonical_order_is_by_constructor_then_children() {
        let a = ConcreteValue::cons("a", vec![ConcreteValue::Int(9)]);
        let b = ConcreteValue::cons("b", vec![ConcreteValue::Int(0)]);
        let a2 = ConcreteValue::cons("a", vec![ConcreteValue::Int(10)]);
        assert!(a < b && a < a2);
    }
}
