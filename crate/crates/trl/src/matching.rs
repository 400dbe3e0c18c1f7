//! Abstract pattern matching: splits a shape into parts that match (with
//! bindings) and parts on which the match may fail.

use std::collections::BTreeMap;

use crate::ast::{Name, Pattern, Schema, StarPattern, TypeExpr};
use crate::shape::{abstract_eq, abstract_neq, children, exclude, unfold, Card, Kids, Node, Shape, Unfolded};
use crate::state::{AbstractBinding, AbstractStore, Lattice, Slot};

/// Beyond this many outcomes, outcomes with the same binding domain are joined.
pub const MAX_OUTCOMES: usize = 64;

/// One way a match may go: `binding` is `None` for a failed match.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchOutcome {
    pub binding: Option<AbstractBinding>,
    /// The matched value, refined by what the outcome reveals about it.
    pub value: Shape,
    pub store: AbstractStore,
}

impl MatchOutcome {
    pub fn is_success(&self) -> bool {
        self.binding.is_some()
    }
}

/// Match `vs` against `p` in `store`.
pub fn amatch(p: &Pattern, vs: &Shape, store: &AbstractStore, schema: &Schema) -> Vec<MatchOutcome> {
    let out = Matcher { schema }.go(p, vs, store, &AbstractBinding::new());
    collapse(out)
}

struct Matcher<'s> {
    schema: &'s Schema,
}

/// Where a variable's current value lives during matching.
enum Holder {
    Store,
    Binding,
}

/// Partial result of matching the remaining patterns of a set against its remaining elements.
#[derive(Clone)]
struct StarOut {
    rho: AbstractBinding,
    elem: Shape,
    card: Card,
    store: AbstractStore,
}

fn fail(value: Shape, store: AbstractStore) -> MatchOutcome {
    MatchOutcome {
        binding: None,
        value,
        store,
    }
}

fn succeed(rho: AbstractBinding, value: Shape, store: AbstractStore) -> MatchOutcome {
    MatchOutcome {
        binding: Some(rho),
        value,
        store,
    }
}

impl Matcher<'_> {
    fn go(&self, p: &Pattern, vs: &Shape, store: &AbstractStore, rho: &AbstractBinding) -> Vec<MatchOutcome> {
        if vs.is_bottom() {
            return vec![];
        }
        match p {
            Pattern::Var(x) => self.var(x, vs, store, rho),
            Pattern::Cons(k, ps) => self.cons(k, ps, vs, store, rho),
            Pattern::Set(sps) => self.set(sps, vs, store, rho),
        }
    }

    /// Compare against an existing value held in the store or the binding.
    fn compare(
        &self,
        x: &Name,
        held: &Shape,
        holder: Holder,
        vs: &Shape,
        store: &AbstractStore,
        rho: &AbstractBinding,
        out: &mut Vec<MatchOutcome>,
    ) {
        let put = |store: &AbstractStore, rho: &AbstractBinding, s: Shape| {
            let (mut store, mut rho) = (store.clone(), rho.clone());
            match holder {
                Holder::Store => store.set(x, Slot::assigned(s)),
                Holder::Binding => {
                    rho.insert(x.clone(), s);
                }
            }
            (store, rho)
        };
        if let Some(eq) = abstract_eq(vs, held) {
            let (st, r) = put(store, rho, eq.clone());
            out.push(succeed(r, eq, st));
        }
        for (v1, v2) in abstract_neq(vs, held) {
            let (st, _) = put(store, rho, v2);
            out.push(fail(v1, st));
        }
    }

    fn var(&self, x: &Name, vs: &Shape, store: &AbstractStore, rho: &AbstractBinding) -> Vec<MatchOutcome> {
        let slot = store.get(x);
        let mut out = Vec::new();
        if !slot.shape.is_bottom() {
            self.compare(x, &slot.shape, Holder::Store, vs, store, rho, &mut out);
        }
        if slot.maybe_unassigned {
            let unassigned = store.clone().with(x, Slot::unassigned());
            match rho.get(x) {
                Some(held) => self.compare(x, held, Holder::Binding, vs, &unassigned, rho, &mut out),
                None => {
                    let mut rho = rho.clone();
                    rho.insert(x.clone(), vs.clone());
                    out.push(succeed(rho, vs.clone(), unassigned));
                }
            }
        }
        out
    }

    fn cons(
        &self,
        k: &Name,
        ps: &[Pattern],
        vs: &Shape,
        store: &AbstractStore,
        rho: &AbstractBinding,
    ) -> Vec<MatchOutcome> {
        let Some(sig) = self.schema.ctor(k) else {
            return vec![fail(vs.clone(), store.clone())];
        };
        let mut out = Vec::new();
        for u in unfold(vs, &TypeExpr::Adt(sig.adt.clone()), self.schema) {
            let part = match u {
                Unfolded::Error => {
                    out.push(fail(exclude(vs, k), store.clone()));
                    continue;
                }
                Unfolded::Success(part) => part,
            };
            let same_ctor = matches!(part.root(), Node::Data { alts, .. } if alts.contains_key(k));
            if !same_ctor {
                out.push(fail(part, store.clone()));
                continue;
            }
            let args = match children(&part, self.schema).into_iter().next() {
                Some((_, Kids::Seq(args))) if args.len() == ps.len() => args,
                _ => continue,
            };
            self.cons_args(k, ps, &args, store, rho, &mut out);
        }
        out
    }

    fn cons_args(
        &self,
        k: &Name,
        ps: &[Pattern],
        args: &[Shape],
        store: &AbstractStore,
        rho: &AbstractBinding,
        out: &mut Vec<MatchOutcome>,
    ) {
        // Each partial holds the refined prefix of the arguments.
        let mut partials: Vec<(AbstractBinding, Vec<Shape>, AbstractStore)> = vec![(rho.clone(), vec![], store.clone())];
        for (i, (p, arg)) in ps.iter().zip(args).enumerate() {
            let mut next = Vec::new();
            for (rho, prefix, store) in &partials {
                for o in self.go(p, arg, store, rho) {
                    let mut refined = prefix.clone();
                    refined.push(o.value);
                    match o.binding {
                        Some(rho2) => next.push((rho2, refined, o.store)),
                        None => {
                            refined.extend(args[i + 1..].iter().cloned());
                            let value = Shape::cons(self.schema, k, refined);
                            if !value.is_bottom() {
                                out.push(fail(value, o.store));
                            }
                        }
                    }
                }
            }
            partials = collapse_partials(next);
        }
        for (rho, refined, store) in partials {
            let value = Shape::cons(self.schema, k, refined);
            if !value.is_bottom() {
                out.push(succeed(rho, value, store));
            }
        }
    }

    fn set(&self, sps: &[StarPattern], vs: &Shape, store: &AbstractStore, rho: &AbstractBinding) -> Vec<MatchOutcome> {
        let mut out = Vec::new();
        for u in unfold(vs, &TypeExpr::set_of(TypeExpr::Value), self.schema) {
            let part = match u {
                Unfolded::Error => {
                    out.push(fail(vs.clone(), store.clone()));
                    continue;
                }
                Unfolded::Success(part) => part,
            };
            let Some((_, Kids::Star(elem, card))) = children(&part, self.schema).into_iter().next() else {
                continue;
            };
            for s in self.star(sps, &elem, card, store, rho) {
                let Some(c) = s.card.meet(&card) else { continue };
                let value = Shape::set(&s.elem, c);
                out.push(succeed(s.rho, value, s.store));
            }
            if always_matches(sps, card, store, rho) {
                continue;
            }
            match single_probe(sps, store, rho) {
                // Fails exactly when no element matches the probe.
                Some(probe) => {
                    let misses = self
                        .go(probe, &elem, store, rho)
                        .into_iter()
                        .filter(|o| !o.is_success())
                        .fold(Shape::bottom(), |acc, o| acc.join(&o.value));
                    if !misses.is_bottom() {
                        out.push(fail(Shape::set(&misses, card), store.clone()));
                    } else if card.contains(0) {
                        out.push(fail(Shape::set(&Shape::bottom(), Card::EMPTY_SET), store.clone()));
                    }
                }
                None => out.push(fail(part, store.clone())),
            }
        }
        out
    }

    fn star(
        &self,
        sps: &[StarPattern],
        elem: &Shape,
        card: Card,
        store: &AbstractStore,
        rho: &AbstractBinding,
    ) -> Vec<StarOut> {
        let Some((head, rest)) = sps.split_first() else {
            if card.contains(0) {
                return vec![StarOut {
                    rho: rho.clone(),
                    elem: Shape::bottom(),
                    card: Card::EMPTY_SET,
                    store: store.clone(),
                }];
            }
            return vec![];
        };
        let mut out = Vec::new();
        match head {
            StarPattern::Plain(p) => {
                let Some(rest_card) = card.pred() else { return out };
                for o in self.go(p, elem, store, rho) {
                    let Some(rho2) = o.binding else { continue };
                    for r in self.star(rest, elem, rest_card, &o.store, &rho2) {
                        out.push(StarOut {
                            elem: o.value.join(&r.elem),
                            card: r.card.succ(),
                            ..r
                        });
                    }
                }
            }
            StarPattern::Star(x) => {
                let slot = store.get(x);
                if !slot.shape.is_bottom() {
                    self.bound_star(x, &slot.shape, Holder::Store, rest, elem, card, store, rho, &mut out);
                }
                if slot.maybe_unassigned {
                    let unassigned = store.clone().with(x, Slot::unassigned());
                    match rho.get(x) {
                        Some(held) => {
                            self.bound_star(x, held, Holder::Binding, rest, elem, card, &unassigned, rho, &mut out)
                        }
                        None => self.fresh_star(x, rest, elem, card, &unassigned, rho, &mut out),
                    }
                }
            }
        }
        collapse_star(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn bound_star(
        &self,
        x: &Name,
        held: &Shape,
        holder: Holder,
        rest: &[StarPattern],
        elem: &Shape,
        card: Card,
        store: &AbstractStore,
        rho: &AbstractBinding,
        out: &mut Vec<StarOut>,
    ) {
        let Some(bound) = Card::new(0, card.hi) else { return };
        let taken = held.meet(&Shape::set(elem, bound));
        let Node::Set { elem: te, card: tc } = taken.root() else { return };
        let (te, tc) = (taken.sub(*te), *tc);
        let Some(rest_card) = card.minus(&tc) else { return };
        let (mut store, mut rho) = (store.clone(), rho.clone());
        match holder {
            Holder::Store => store.set(x, Slot::assigned(taken.clone())),
            Holder::Binding => {
                rho.insert(x.clone(), taken.clone());
            }
        }
        for r in self.star(rest, elem, rest_card, &store, &rho) {
            out.push(StarOut {
                elem: if tc.is_empty_set() { r.elem.clone() } else { te.join(&r.elem) },
                card: r.card.add(&tc),
                ..r
            });
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn fresh_star(
        &self,
        x: &Name,
        rest: &[StarPattern],
        elem: &Shape,
        card: Card,
        store: &AbstractStore,
        rho: &AbstractBinding,
        out: &mut Vec<StarOut>,
    ) {
        let mut splits = vec![Card::EMPTY_SET, Card { lo: 0, hi: card.hi }, card];
        splits.sort();
        splits.dedup();
        for split in splits {
            let Some(rest_card) = card.minus(&split) else { continue };
            let mut rho = rho.clone();
            rho.insert(x.clone(), Shape::set(elem, split));
            for r in self.star(rest, elem, rest_card, store, &rho) {
                out.push(StarOut {
                    elem: if split.is_empty_set() { r.elem.clone() } else { elem.join(&r.elem) },
                    card: r.card.add(&split),
                    ..r
                });
            }
        }
    }
}

/// Whether a set pattern matches every set of the given cardinality.
fn always_matches(sps: &[StarPattern], card: Card, store: &AbstractStore, rho: &AbstractBinding) -> bool {
    if sps.is_empty() {
        return card.is_empty_set();
    }
    let mut seen = Vec::new();
    for sp in sps {
        let StarPattern::Star(x) = sp else { return false };
        if seen.contains(&x) || rho.contains_key(x) || store.get(x) != Slot::unassigned() {
            return false;
        }
        seen.push(x);
    }
    true
}

/// The one plain element pattern of `sps` when everything else is a fresh star
/// (at least one, to absorb the other elements) and all variables are fresh
/// and distinct, so elements match independently.
fn single_probe<'a>(sps: &'a [StarPattern], store: &AbstractStore, rho: &AbstractBinding) -> Option<&'a Pattern> {
    let mut probe = None;
    let mut names = Vec::new();
    for sp in sps {
        match sp {
            StarPattern::Plain(p) if probe.is_none() => {
                probe = Some(p);
                pattern_vars(p, &mut names);
            }
            StarPattern::Plain(_) => return None,
            StarPattern::Star(x) => names.push(x),
        }
    }
    let fresh = names.iter().enumerate().all(|(i, x)| {
        !names[..i].contains(x) && !rho.contains_key(*x) && store.get(x) == Slot::unassigned()
    });
    let has_star = sps.iter().any(|sp| matches!(sp, StarPattern::Star(_)));
    probe.filter(|_| fresh && has_star)
}

fn pattern_vars<'a>(p: &'a Pattern, out: &mut Vec<&'a Name>) {
    match p {
        Pattern::Var(x) => out.push(x),
        Pattern::Cons(_, args) => args.iter().for_each(|a| pattern_vars(a, out)),
        Pattern::Set(sps) => {
            for sp in sps {
                match sp {
                    StarPattern::Plain(q) => pattern_vars(q, out),
                    StarPattern::Star(x) => out.push(x),
                }
            }
        }
    }
}

fn collapse_partials(
    v: Vec<(AbstractBinding, Vec<Shape>, AbstractStore)>,
) -> Vec<(AbstractBinding, Vec<Shape>, AbstractStore)> {
    if v.len() <= MAX_OUTCOMES {
        return v;
    }
    let mut groups: BTreeMap<Vec<Name>, (AbstractBinding, Vec<Shape>, AbstractStore)> = BTreeMap::new();
    for (rho, args, store) in v {
        let key: Vec<Name> = rho.keys().cloned().collect();
        match groups.remove(&key) {
            None => groups.insert(key, (rho, args, store)),
            Some((r0, a0, s0)) => groups.insert(key, (join_binding(&r0, &rho), a0.join(&args), s0.join(&store))),
        };
    }
    groups.into_values().collect()
}

fn collapse_star(v: Vec<StarOut>) -> Vec<StarOut> {
    if v.len() <= MAX_OUTCOMES {
        return v;
    }
    let mut groups: BTreeMap<Vec<Name>, StarOut> = BTreeMap::new();
    for s in v {
        let key: Vec<Name> = s.rho.keys().cloned().collect();
        let merged = match groups.remove(&key) {
            None => s,
            Some(g) => StarOut {
                rho: join_binding(&g.rho, &s.rho),
                elem: g.elem.join(&s.elem),
                card: g.card.join(&s.card),
                store: g.store.join(&s.store),
            },
        };
        groups.insert(key, merged);
    }
    groups.into_values().collect()
}

fn join_binding(a: &AbstractBinding, b: &AbstractBinding) -> AbstractBinding {
    let mut out = a.clone();
    for (x, s) in b {
        let j = out.get(x).map_or_else(|| s.clone(), |p| p.join(s));
        out.insert(x.clone(), j);
    }
    out
}

/// Deduplicate, and join outcomes of the same kind and binding domain when there are too many.
fn collapse(v: Vec<MatchOutcome>) -> Vec<MatchOutcome> {
    let mut uniq: Vec<MatchOutcome> = Vec::new();
    for o in v {
        if !o.value.is_bottom() && !uniq.contains(&o) {
            uniq.push(o);
        }
    }
    if uniq.len() <= MAX_OUTCOMES {
        return uniq;
    }
    let mut groups: BTreeMap<Option<Vec<Name>>, MatchOutcome> = BTreeMap::new();
    for o in uniq {
        let key = o.binding.as_ref().map(|b| b.keys().cloned().collect());
        let merged = match groups.remove(&key) {
            None => o,
            Some(g) => MatchOutcome {
                binding: g.binding.as_ref().zip(o.binding.as_ref()).map(|(a, b)| join_binding(a, b)),
                value: g.value.join(&o.value),
                store: g.store.join(&o.store),
            },
        };
        groups.insert(key, merged);
    }
    groups.into_values().collect()
}
