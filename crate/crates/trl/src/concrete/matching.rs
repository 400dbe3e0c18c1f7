//! Backtracking pattern matching with non-linear variables and set patterns.

use std::collections::BTreeSet;

use super::value::{BindingEnv, ConcreteStore, ConcreteValue};
use crate::ast::{Name, Pattern, StarPattern};

/// All binding environments under which `v` matches `p`, in enumeration order, without repeats.
///
/// Variables already assigned in `store` must equal the matched value.
pub fn match_pattern(p: &Pattern, v: &ConcreteValue, store: &ConcreteStore) -> Vec<BindingEnv> {
    let mut out = Vec::new();
    go(p, v, store, BindingEnv::new(), &mut |rho| {
        if !out.contains(&rho) {
            out.push(rho);
        }
    });
    out
}

fn lookup<'a>(x: &Name, store: &'a ConcreteStore, rho: &'a BindingEnv) -> Option<&'a ConcreteValue> {
    store.get(x).or_else(|| rho.get(x))
}

fn go(p: &Pattern, v: &ConcreteValue, store: &ConcreteStore, rho: BindingEnv, k: &mut dyn FnMut(BindingEnv)) {
    match p {
        Pattern::Var(x) => match lookup(x, store, &rho) {
            Some(bound) if bound == v => k(rho),
            Some(_) => {}
            None => {
                let mut rho = rho;
                rho.insert(x.clone(), v.clone());
                k(rho)
            }
        },
        Pattern::Cons(kp, ps) => {
            if let ConcreteValue::Cons(kv, vs) = v {
                if kp == kv && ps.len() == vs.len() {
                    args(ps, vs, store, rho, k);
                }
            }
        }
        Pattern::Set(sps) => {
            if let ConcreteValue::Set(items) = v {
                star(sps, items.clone(), store, rho, k);
            }
        }
    }
}

fn args(ps: &[Pattern], vs: &[ConcreteValue], store: &ConcreteStore, rho: BindingEnv, k: &mut dyn FnMut(BindingEnv)) {
    match (ps.split_first(), vs.split_first()) {
        (None, _) => k(rho),
        (Some((p, rest_p)), Some((v, rest_v))) => {
            go(p, v, store, rho, &mut |rho2| args(rest_p, rest_v, store, rho2, k));
        }
        _ => {}
    }
}

fn star(
    sps: &[StarPattern],
    remaining: BTreeSet<ConcreteValue>,
    store: &ConcreteStore,
    rho: BindingEnv,
    k: &mut dyn FnMut(BindingEnv),
) {
    let Some((head, rest)) = sps.split_first() else {
        if remaining.is_empty() {
            k(rho);
        }
        return;
    };
    match head {
        StarPattern::Plain(p) => {
            for e in &remaining {
                let mut others = remaining.clone();
                others.remove(e);
                go(p, e, store, rho.clone(), &mut |rho2| star(rest, others.clone(), store, rho2, k));
            }
        }
        StarPattern::Star(x) => match lookup(x, store, &rho) {
            Some(ConcreteValue::Set(bound)) => {
                if bound.is_subset(&remaining) {
                    let others = remaining.difference(bound).cloned().collect();
                    star(rest, others, store, rho, k);
                }
            }
            Some(_) => {}
            None => {
                let items: Vec<ConcreteValue> = remaining.iter().cloned().collect();
                assert!(items.len() < 32, "set too large for subset enumeration");
                for mask in 0u32..(1 << items.len()) {
                    let (taken, others): (BTreeSet<_>, BTreeSet<_>) = items
                        .iter()
                        .enumerate()
                        .map(|(i, e)| (mask & (1 << i) != 0, e.clone()))
                        .fold((BTreeSet::new(), BTreeSet::new()), |(mut t, mut o), (inside, e)| {
                            if inside {
                                t.insert(e);
                            } else {
                                o.insert(e);
                            }
                            (t, o)
                        });
                    let mut rho2 = rho.clone();
                    rho2.insert(x.clone(), ConcreteValue::Set(taken));
                    star(rest, others, store, rho2, k);
                }
            }
        },
    }
}
