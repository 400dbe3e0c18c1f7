//! Bounded enumeration of the values a shape denotes, and membership tests.

use std::collections::{BTreeSet, HashMap};

use super::{Card, IntRange, Node, NodeId, Shape, Strs};
use crate::ast::Schema;
use crate::concrete::ConcreteValue;

/// Limits for enumeration: maximal tree depth and maximal set size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub depth: usize,
    pub width: usize,
}

impl Bounds {
    pub fn new(depth: usize, width: usize) -> Self {
        Bounds { depth, width }
    }
}

/// Strings used for unconstrained string shapes.
const SAMPLE_STRS: [&str; 2] = ["a", "b"];
/// Integer ranges up to this size are enumerated exactly.
const EXACT_INT_RANGE: u64 = 8;

/// Representative integers of a range: all of them when the range is small,
/// otherwise its end points and a few values around zero.
fn sample_ints(r: &IntRange) -> Vec<i64> {
    if let (Some(lo), Some(hi), Some(n)) = (r.lo, r.hi, r.size()) {
        if n <= EXACT_INT_RANGE {
            return (lo..=hi).collect();
        }
    }
    let mut picks: BTreeSet<i64> = [-1, 0, 1, 2].into_iter().filter(|n| r.contains(*n)).collect();
    for end in [r.lo, r.hi].into_iter().flatten() {
        picks.insert(end);
    }
    if let Some(lo) = r.lo {
        picks.insert(lo.saturating_add(1));
    }
    if let Some(hi) = r.hi {
        picks.insert(hi.saturating_sub(1));
    }
    picks.into_iter().filter(|n| r.contains(*n)).collect()
}

fn sample_strs(s: &Strs) -> Vec<ConcreteValue> {
    match s {
        Strs::Consts(cs) => cs.iter().map(|c| ConcreteValue::Str(c.clone())).collect(),
        Strs::Any => SAMPLE_STRS.iter().map(|c| ConcreteValue::str(c)).collect(),
    }
}

struct Enumerator<'a> {
    shape: &'a Shape,
    schema: &'a Schema,
    width: usize,
    cache: HashMap<(NodeId, usize), BTreeSet<ConcreteValue>>,
    top_cache: HashMap<usize, BTreeSet<ConcreteValue>>,
}

impl Enumerator<'_> {
    fn node(&mut self, id: NodeId, depth: usize) -> BTreeSet<ConcreteValue> {
        if depth == 0 {
            return BTreeSet::new();
        }
        if let Some(hit) = self.cache.get(&(id, depth)) {
            return hit.clone();
        }
        let out = match self.shape.node(id).clone() {
            Node::Bottom => BTreeSet::new(),
            Node::Top => self.top(depth),
            Node::Int(r) => sample_ints(&r).into_iter().map(ConcreteValue::Int).collect(),
            Node::Str(s) => sample_strs(&s).into_iter().collect(),
            Node::Set { elem, card } => {
                let elems: Vec<ConcreteValue> = self.node(elem, depth - 1).into_iter().collect();
                subsets(&elems, &card, self.width)
            }
            Node::Data { alts, .. } => {
                let mut out = BTreeSet::new();
                for (k, args) in alts {
                    let per_arg: Vec<Vec<ConcreteValue>> =
                        args.iter().map(|a| self.node(*a, depth - 1).into_iter().collect()).collect();
                    for combo in product(&per_arg) {
                        out.insert(ConcreteValue::Cons(k.clone(), combo));
                    }
                }
                out
            }
        };
        self.cache.insert((id, depth), out.clone());
        out
    }

    /// Every well-typed value up to the given depth.
    fn top(&mut self, depth: usize) -> BTreeSet<ConcreteValue> {
        if depth == 0 {
            return BTreeSet::new();
        }
        if let Some(hit) = self.top_cache.get(&depth) {
            return hit.clone();
        }
        let mut out: BTreeSet<ConcreteValue> = sample_ints(&IntRange::FULL).into_iter().map(ConcreteValue::Int).collect();
        out.extend(sample_strs(&Strs::Any));
        let inner: Vec<ConcreteValue> = self.top(depth - 1).into_iter().collect();
        out.extend(subsets(&inner, &Card::ANY, self.width));
        for adt in self.schema.adt_names() {
            let whole = Shape::of_type(&crate::ast::TypeExpr::Adt(adt.clone()), self.schema);
            out.extend(concretize_bounded(&whole, self.schema, Bounds::new(depth, self.width)));
        }
        self.top_cache.insert(depth, out.clone());
        out
    }
}

fn product(per_arg: &[Vec<ConcreteValue>]) -> Vec<Vec<ConcreteValue>> {
    per_arg.iter().fold(vec![vec![]], |acc, options| {
        acc.iter()
            .flat_map(|prefix| {
                options.iter().map(move |o| {
                    let mut next = prefix.clone();
                    next.push(o.clone());
                    next
                })
            })
            .collect()
    })
}

/// All subsets of `elems` whose size lies in `card` and is at most `width`.
fn subsets(elems: &[ConcreteValue], card: &Card, width: usize) -> BTreeSet<ConcreteValue> {
    let mut out = BTreeSet::new();
    let mut chosen = Vec::new();
    fn go(
        elems: &[ConcreteValue],
        start: usize,
        chosen: &mut Vec<ConcreteValue>,
        card: &Card,
        width: usize,
        out: &mut BTreeSet<ConcreteValue>,
    ) {
        if card.contains(chosen.len() as u64) {
            out.insert(ConcreteValue::set(chosen.iter().cloned()));
        }
        if chosen.len() == width || card.hi.is_some_and(|h| chosen.len() as u64 >= h) {
            return;
        }
        for i in start..elems.len() {
            chosen.push(elems[i].clone());
            go(elems, i + 1, chosen, card, width, out);
            chosen.pop();
        }
    }
    go(elems, 0, &mut chosen, card, width, &mut out);
    out
}

/// The values of `shape` with depth and set width within `bounds`.
///
/// Unbounded integer ranges and unconstrained strings are sampled rather than
/// enumerated, so the result is a subset of the denotation.
pub fn concretize_bounded(shape: &Shape, schema: &Schema, bounds: Bounds) -> BTreeSet<ConcreteValue> {
    let mut e = Enumerator {
        shape,
        schema,
        width: bounds.width,
        cache: HashMap::new(),
        top_cache: HashMap::new(),
    };
    e.node(NodeId(0), bounds.depth)
}

/// Whether `v` is one of the values denoted by `shape`.
pub fn contains(shape: &Shape, v: &ConcreteValue) -> bool {
    node_contains(shape, NodeId(0), v)
}

fn node_contains(shape: &Shape, id: NodeId, v: &ConcreteValue) -> bool {
    match (shape.node(id), v) {
        (Node::Top, _) => true,
        (Node::Int(r), ConcreteValue::Int(n)) => r.contains(*n),
        (Node::Str(s), ConcreteValue::Str(x)) => s.contains(x),
        (Node::Set { elem, card }, ConcreteValue::Set(items)) => {
            card.contains(items.len() as u64) && items.iter().all(|i| node_contains(shape, *elem, i))
        }
        (Node::Data { alts, .. }, ConcreteValue::Cons(k, args)) => alts.get(k).is_some_and(|ids| {
            ids.len() == args.len() && ids.iter().zip(args).all(|(id, a)| node_contains(shape, *id, a))
        }),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;
    use crate::parser::parse_program;

    fn ints(items: &[i64]) -> ConcreteValue {
        ConcreteValue::set(items.iter().map(|n| ConcreteValue::Int(*n)))
    }

    #[test]
    fn small_int_set() {
        let s = schema();
        let sh = Shape::set(&Shape::int(IntRange::new(Some(42), Some(43)).unwrap()), Card::new(1, Some(2)).unwrap());
        let got = concretize_bounded(&sh, &s, Bounds::new(2, 3));
        let want: BTreeSet<_> = [ints(&[42]), ints(&[43]), ints(&[42, 43])].into_iter().collect();
        assert_eq!(got, want);
    }

    #[test]
    fn data_with_interval_arguments() {
        let p = parse_program("data Pos = repl() | linecol(int line, int col);").unwrap();
        let schema = Schema::new(&p.datas).unwrap();
        let env = crate::shape::ShapeEnv::default();
        let sh = env.resolve_text("repl()", &schema).unwrap().join(
            &env.resolve_text("linecol(int[1;1], int[3;4])", &schema).unwrap(),
        );
        let got = concretize_bounded(&sh, &schema, Bounds::new(3, 3));
        let lc = |a, b| ConcreteValue::cons("linecol", vec![ConcreteValue::Int(a), ConcreteValue::Int(b)]);
        let want: BTreeSet<_> = [ConcreteValue::cons("repl", vec![]), lc(1, 3), lc(1, 4)].into_iter().collect();
        assert_eq!(got, want);
    }

    #[test]
    fn bottom_is_empty_and_membership_agrees() {
        let s = schema();
        assert!(concretize_bounded(&Shape::bottom(), &s, Bounds::new(4, 3)).is_empty());
        let e = expr(&s);
        let vals = concretize_bounded(&e, &s, Bounds::new(3, 3));
        assert!(vals.len() > 5);
        assert!(vals.iter().all(|v| contains(&e, v) && v.depth() <= 3));
        let z = zero(&s);
        assert!(contains(&nat(&s), &ConcreteValue::cons("zero", vec![])));
        assert!(!contains(&suc(&s, nat(&s)), &ConcreteValue::cons("zero", vec![])));
        assert!(contains(&z, &ConcreteValue::cons("zero", vec![])));
    }

    #[test]
    fn nat_depth_counts() {
        let s = schema();
        for d in 0..5 {
            assert_eq!(concretize_bounded(&nat(&s), &s, Bounds::new(d, 1)).len(), d);
        }
    }
}
