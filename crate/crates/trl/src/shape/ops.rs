//! Refinement operators used by matching and traversal.

use super::{Card, IntRange, Node, NodeId, RawGraph, Shape};
use crate::ast::{abstract_not_subtype_unchecked, abstract_subtype_unchecked, Name, Schema, TypeExpr};

/// Outcome of refining a shape to a type or rebuilding a value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Unfolded {
    Success(Shape),
    Error,
}

/// Children of a shape: constructor arguments, or the element shape and count of a set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Kids {
    Seq(Vec<Shape>),
    Star(Shape, Card),
}

/// The shape restricted to a single root alternative.
fn only_alt(s: &Shape, k: &Name) -> Shape {
    let Node::Data { adt, alts } = s.root() else {
        return s.clone();
    };
    let Some(args) = alts.get(k) else {
        return Shape::bottom();
    };
    let mut g = RawGraph::default();
    let offset = g.embed(s).0;
    let args = args.iter().map(|a| NodeId(a.0 + offset)).collect();
    let root = g.push(Node::Data {
        adt: adt.clone(),
        alts: [(k.clone(), args)].into_iter().collect(),
    });
    g.finish(root)
}

fn root_args(s: &Shape, k: &Name) -> Vec<Shape> {
    match s.root() {
        Node::Data { alts, .. } => alts
            .get(k)
            .map(|args| args.iter().map(|a| s.sub(*a)).collect())
            .unwrap_or_default(),
        _ => vec![],
    }
}

/// Refine a shape to the values of type `t`, one success per constructor for data types,
/// plus an error when some value may lie outside `t`.
pub fn unfold(vs: &Shape, t: &TypeExpr, schema: &Schema) -> Vec<Unfolded> {
    if vs.is_bottom() {
        return vec![];
    }
    let ty = Shape::of_type(t, schema);
    let refined = vs.meet(&ty);
    let mut out = Vec::new();
    match refined.root() {
        Node::Bottom => {}
        Node::Data { alts, .. } if matches!(t, TypeExpr::Adt(_)) => {
            for k in alts.keys() {
                out.push(Unfolded::Success(only_alt(&refined, k)));
            }
        }
        _ => out.push(Unfolded::Success(refined)),
    }
    if !vs.leq(&ty) {
        out.push(Unfolded::Error);
    }
    out
}

/// Remove constructor `k` from the root alternatives; other shapes are unchanged.
pub fn exclude(vs: &Shape, k: &Name) -> Shape {
    let Node::Data { adt, alts } = vs.root() else {
        return vs.clone();
    };
    if !alts.contains_key(k) {
        return vs.clone();
    }
    let mut g = RawGraph::default();
    let offset = g.embed(vs).0;
    let alts = alts
        .iter()
        .filter(|(k2, _)| *k2 != k)
        .map(|(k2, args)| (k2.clone(), args.iter().map(|a| NodeId(a.0 + offset)).collect()))
        .collect();
    let root = g.push(Node::Data {
        adt: adt.clone(),
        alts,
    });
    g.finish(root)
}

const COMPLEMENT_DEPTH: usize = 8;

/// Sound over-approximation of the values of `a` that are not values of `b`.
pub fn rel_complement(a: &Shape, b: &Shape) -> Shape {
    complement_at(a, b, 0)
}

fn complement_at(a: &Shape, b: &Shape, depth: usize) -> Shape {
    if a.leq(b) {
        return Shape::bottom();
    }
    if depth >= COMPLEMENT_DEPTH || a.meet(b).is_bottom() {
        return a.clone();
    }
    match (a.root(), b.root()) {
        (Node::Int(x), Node::Int(y)) => x.rel_complement(y).map_or_else(Shape::bottom, Shape::int),
        (Node::Str(x), Node::Str(y)) => x.rel_complement(y).map_or_else(Shape::bottom, Shape::strs),
        (Node::Set { elem: ea, card: ca }, Node::Set { elem: eb, card: cb }) => {
            if !ca.is_empty_set() && !cb.is_empty_set() && !a.sub(*ea).leq(&b.sub(*eb)) {
                return a.clone();
            }
            // Same element shapes: only sizes outside b's range remain.
            let as_range = |c: &Card| IntRange {
                lo: Some(c.lo as i64),
                hi: c.hi.map(|h| h as i64),
            };
            match as_range(ca).rel_complement(&as_range(cb)) {
                None => Shape::bottom(),
                Some(r) => {
                    let card = Card::new(r.lo.unwrap_or(0).max(0) as u64, r.hi.map(|h| h.max(0) as u64));
                    match card {
                        Some(card) => Shape::set(&a.sub(*ea), card),
                        None => Shape::bottom(),
                    }
                }
            }
        }
        (Node::Data { adt, alts }, Node::Data { .. }) => {
            let mut out = Vec::new();
            for k in alts.keys() {
                let ak = only_alt(a, k);
                let bk = only_alt(b, k);
                let args = root_args(a, k);
                if bk.is_bottom() {
                    out.push((k.clone(), args));
                    continue;
                }
                if ak.leq(&bk) {
                    continue;
                }
                let bargs = root_args(b, k);
                let differing: Vec<usize> = (0..args.len()).filter(|i| !args[*i].leq(&bargs[*i])).collect();
                if let [i] = differing[..] {
                    let narrowed = complement_at(&args[i], &bargs[i], depth + 1);
                    if narrowed.is_bottom() {
                        continue;
                    }
                    let mut args = args;
                    args[i] = narrowed;
                    out.push((k.clone(), args));
                } else {
                    out.push((k.clone(), args));
                }
            }
            Shape::data(adt, out)
        }
        _ => a.clone(),
    }
}

/// Refinement of both sides under the assumption that they are equal.
pub fn abstract_eq(a: &Shape, b: &Shape) -> Option<Shape> {
    let m = a.meet(b);
    (!m.is_bottom()).then_some(m)
}

/// Refinements of the pair under the assumption that the two values differ.
pub fn abstract_neq(a: &Shape, b: &Shape) -> Vec<(Shape, Shape)> {
    let m = a.meet(b);
    if m.is_bottom() {
        return vec![(a.clone(), b.clone())];
    }
    // Only a single shared value can be excluded from one side; with more
    // shared values two distinct ones may come from both sides at once.
    if m.count() != Some(1) {
        return vec![(a.clone(), b.clone())];
    }
    let mut out = Vec::new();
    let a2 = rel_complement(a, &m);
    if !a2.is_bottom() {
        out.push((a2, b.clone()));
    }
    let b2 = rel_complement(b, &m);
    if !b2.is_bottom() {
        out.push((a.clone(), b2));
    }
    out
}

/// Split a shape into refined parts with their children.
pub fn children(vs: &Shape, schema: &Schema) -> Vec<(Shape, Kids)> {
    match vs.root() {
        Node::Bottom => vec![],
        Node::Int(_) | Node::Str(_) => vec![(vs.clone(), Kids::Seq(vec![]))],
        Node::Set { elem, card } => vec![(vs.clone(), Kids::Star(vs.sub(*elem), *card))],
        Node::Data { alts, .. } => alts
            .keys()
            .map(|k| (only_alt(vs, k), Kids::Seq(root_args(vs, k))))
            .collect(),
        Node::Top => {
            let any_set = Shape::set(&Shape::top(), Card::ANY);
            let mut out = vec![(any_set, Kids::Star(Shape::top(), Card::ANY))];
            for adt in schema.adt_names() {
                for k in schema.ctors_of(adt) {
                    let sig = schema.ctor(k).expect("declared constructor");
                    let args: Vec<Shape> = sig.params.iter().map(|t| Shape::of_type(t, schema)).collect();
                    let whole = Shape::data(adt, vec![(k.clone(), args.clone())]);
                    if !whole.is_bottom() {
                        out.push((whole, Kids::Seq(args)));
                    }
                }
            }
            out.push((Shape::int(IntRange::FULL), Kids::Seq(vec![])));
            out.push((Shape::str_any(), Kids::Seq(vec![])));
            out
        }
    }
}

/// Rebuild a value of the refined shape `vs` from (possibly rewritten) children.
pub fn reconstruct(vs: &Shape, kids: &Kids, schema: &Schema) -> Vec<Unfolded> {
    match (vs.root(), kids) {
        (_, Kids::Seq(ks)) if ks.iter().any(Shape::is_bottom) => vec![],
        (Node::Data { adt, alts }, Kids::Seq(ks)) => {
            let Some(k) = alts.keys().next() else { return vec![] };
            let Some(sig) = schema.ctor(k) else { return vec![] };
            let mut out = Vec::new();
            let mut ok = true;
            let mut err = false;
            let mut typed = Vec::new();
            for (kid, ty) in ks.iter().zip(&sig.params) {
                let kt = kid.type_of();
                if abstract_not_subtype_unchecked(&kt, ty) {
                    err = true;
                }
                if abstract_subtype_unchecked(&kt, ty) {
                    let m = kid.meet(&Shape::of_type(ty, schema));
                    ok &= !m.is_bottom();
                    typed.push(m);
                } else {
                    ok = false;
                }
            }
            if ok {
                let rebuilt = Shape::data(adt, vec![(k.clone(), typed)]);
                if !rebuilt.is_bottom() {
                    out.push(Unfolded::Success(rebuilt));
                }
            }
            if err {
                out.push(Unfolded::Error);
            }
            out
        }
        (_, Kids::Seq(_)) => vec![Unfolded::Success(vs.clone())],
        (_, Kids::Star(elem, card)) => {
            let rebuilt = Shape::set(elem, *card);
            if rebuilt.is_bottom() {
                vec![]
            } else {
                vec![Unfolded::Success(rebuilt)]
            }
        }
    }
}
