//! Lattice laws of the shape domain as seed-driven checks, with bounded
//! concretization as the independent oracle for operator soundness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trl::ast::{Name, Schema, TypeExpr};
use trl::concrete::ConcreteValue;
use trl::shape::{concretize_bounded, contains, exclude, rel_complement, unfold, Bounds, Card, Shape, Unfolded};

use super::shapes::{any_shape, cons_names, expr, nat, same_kind, schema};

/// Outcome of one law on one seed; the message describes the counterexample.
pub type Law = Result<(), String>;

pub const GAMMA: Bounds = Bounds { depth: 3, width: 2 };
pub const CHAIN_STEPS: usize = 20;

macro_rules! ensure {
    ($cond:expr) => {
        if !$cond {
            return Err(format!("failed: {}", stringify!($cond)));
        }
    };
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

macro_rules! ensure_eq {
    ($a:expr, $b:expr) => {
        ensure!($a == $b, "{:?} != {:?}", $a, $b)
    };
    ($a:expr, $b:expr, $($fmt:tt)+) => {
        ensure!($a == $b, $($fmt)+)
    };
}

fn gamma(s: &Shape, schema: &Schema) -> Vec<ConcreteValue> {
    concretize_bounded(s, schema, GAMMA).into_iter().collect()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn order_is_reflexive_and_antisymmetric(seed: u64) -> Law {
    let s = schema();
    let mut r = rng(seed);
    let a = any_shape(&mut r, &s);
    let b = any_shape(&mut r, &s);
    ensure!(a.leq(&a));
    // Canonical forms: mutual inclusion is structural equality.
    if a.leq(&b) && b.leq(&a) {
        ensure_eq!(&a, &b);
    }
    ensure!(Shape::bottom().leq(&a));
    ensure!(a.leq(&Shape::top()));
    Ok(())
}

pub fn order_is_transitive(seed: u64) -> Law {
    let s = schema();
    let mut r = rng(seed);
    let v = same_kind(&mut r, &s, 3);
    let (a, b, c) = (&v[0], v[0].join(&v[1]), v[0].join(&v[1]).join(&v[2]));
    ensure!(a.leq(&b) && b.leq(&c));
    ensure!(a.leq(&c));
    if v[1].leq(&v[2]) && v[0].leq(&v[1]) {
        ensure!(v[0].leq(&v[2]));
    }
    Ok(())
}

pub fn join_is_an_upper_bound(seed: u64) -> Law {
    let s = schema();
    let mut r = rng(seed);
    let v = if r.gen_bool(0.8) { same_kind(&mut r, &s, 2) } else { vec![any_shape(&mut r, &s), any_shape(&mut r, &s)] };
    let j = v[0].join(&v[1]);
    ensure!(v[0].leq(&j) && v[1].leq(&j));
    ensure!(j.equiv(&v[1].join(&v[0])));
    ensure_eq!(v[0].join(&v[0]), v[0].clone());
    ensure_eq!(v[0].join(&Shape::bottom()), v[0].clone());
    for c in gamma(&v[0], &s).iter().chain(&gamma(&v[1], &s)) {
        ensure!(contains(&j, c), "{} lost by join {}", c, j);
    }
    Ok(())
}

pub fn meet_is_a_lower_bound(seed: u64) -> Law {
    let s = schema();
    let mut r = rng(seed);
    let v = same_kind(&mut r, &s, 2);
    let m = v[0].meet(&v[1]);
    ensure!(m.leq(&v[0]) && m.leq(&v[1]));
    ensure!(m.equiv(&v[1].meet(&v[0])));
    ensure_eq!(v[0].meet(&v[0]), v[0].clone());
    for c in gamma(&v[0], &s) {
        ensure_eq!(contains(&m, &c), contains(&v[1], &c), "meet disagrees on {}", c);
    }
    Ok(())
}

pub fn order_agrees_with_concretization(seed: u64) -> Law {
    let s = schema();
    let mut r = rng(seed);
    let v = same_kind(&mut r, &s, 2);
    if v[0].leq(&v[1]) {
        for c in gamma(&v[0], &s) {
            ensure!(contains(&v[1], &c), "{} <= {} but {} escapes", v[0], v[1], c);
        }
    }
    for c in gamma(&v[0], &s) {
        ensure!(contains(&v[0], &c));
    }
    Ok(())
}

pub fn widening_is_an_upper_bound(seed: u64) -> Law {
    let s = schema();
    let mut r = rng(seed);
    let v = same_kind(&mut r, &s, 2);
    let w = v[0].widen(&v[1]);
    ensure!(v[0].leq(&w) && v[1].leq(&w), "{} widen {} = {}", v[0], v[1], w);
    for c in gamma(&v[0], &s).iter().chain(&gamma(&v[1], &s)) {
        ensure!(contains(&w, c));
    }
    Ok(())
}

pub fn widening_stabilizes_growing_chains(seed: u64) -> Law {
    let s = schema();
    let mut r = rng(seed);
    // Each step wraps the current element in a random context.
    let expr_chain = r.gen_bool(0.6);
    let mut x = if expr_chain { expr(&mut r, &s, 1) } else { nat(&mut r, &s, 1) };
    let mut w = x.clone();
    let mut changes = 0;
    let mut xs = vec![x.clone()];
    for _ in 0..2 * CHAIN_STEPS {
        let grown = if expr_chain {
            let other = expr(&mut r, &s, 1);
            let k = Shape::cons(&s, &"mult".into(), if r.gen_bool(0.5) { vec![x.clone(), other] } else { vec![other, x.clone()] });
            if r.gen_bool(0.3) { k.join(&Shape::cons(&s, &"cst".into(), vec![nat(&mut r, &s, 1)])) } else { k }
        } else {
            Shape::cons(&s, &"suc".into(), vec![x.clone()])
        };
        x = x.join(&grown);
        xs.push(x.clone());
        let next = w.widen(&w.join(&x));
        if next != w {
            changes += 1;
        }
        w = next;
    }
    ensure!(changes <= CHAIN_STEPS, "{} changes", changes);
    for xi in &xs {
        ensure!(xi.leq(&w));
    }
    Ok(())
}

pub fn interval_and_card_chains_stabilize(seed: u64) -> Law {
    let mut r = rng(seed);
    let mut w = Shape::int_point(0);
    let mut wc = Card::exactly(0);
    let mut changes = 0;
    for i in 1..=2 * CHAIN_STEPS as i64 {
        let x = Shape::int_point(if r.gen_bool(0.5) { i } else { -i });
        let next = w.widen(&w.join(&x));
        let next_c = wc.widen(&wc.join(&Card::exactly(i as u64)));
        if next != w || next_c != wc {
            changes += 1;
        }
        ensure!(x.leq(&next) && next_c.contains(i as u64));
        w = next;
        wc = next_c;
    }
    ensure!(changes <= CHAIN_STEPS);
    Ok(())
}

pub fn unfold_covers_every_value(seed: u64) -> Law {
    let s = schema();
    let mut r = rng(seed);
    let a = any_shape(&mut r, &s);
    let t = [TypeExpr::Adt("Nat".into()), TypeExpr::Adt("Expr".into()), TypeExpr::Int, TypeExpr::Str, TypeExpr::set_of(TypeExpr::Value)]
        [r.gen_range(0..5)].clone();
    let parts = unfold(&a, &t, &s);
    for c in gamma(&a, &s) {
        let ok = !c.has_type(&t, &s)
            || parts.iter().any(|p| matches!(p, Unfolded::Success(q) if contains(q, &c)));
        let error = parts.contains(&Unfolded::Error);
        ensure!(ok || error, "{} not covered when unfolding {} at {}", c, a, t);
        if !c.has_type(&t, &s) {
            ensure!(error, "{} has no error outcome at {}", a, t);
        }
    }
    Ok(())
}

pub fn exclusion_keeps_other_constructors(seed: u64) -> Law {
    let s = schema();
    let mut r = rng(seed);
    let a = if r.gen_bool(0.5) { expr(&mut r, &s, 3) } else { nat(&mut r, &s, 3) };
    let names = cons_names();
    let k: Name = names[r.gen_range(0..names.len())].into();
    let e = exclude(&a, &k);
    ensure!(e.leq(&a));
    for c in gamma(&a, &s) {
        let rooted_at_k = matches!(&c, ConcreteValue::Cons(root, _) if *root == k);
        if !rooted_at_k {
            ensure!(contains(&e, &c), "{} lost excluding {} from {}", c, k, a);
        }
    }
    Ok(())
}

pub fn complement_keeps_the_difference(seed: u64) -> Law {
    let s = schema();
    let mut r = rng(seed);
    let v = same_kind(&mut r, &s, 2);
    let d = rel_complement(&v[0], &v[1]);
    ensure!(d.leq(&v[0]));
    for c in gamma(&v[0], &s) {
        if !contains(&v[1], &c) {
            ensure!(contains(&d, &c), "{} lost in {} minus {}", c, v[0], v[1]);
        }
    }
    Ok(())
}

/// Every law, by name.
pub const LAWS: [(&str, fn(u64) -> Law); 11] = [
    ("order_is_reflexive_and_antisymmetric", order_is_reflexive_and_antisymmetric),
    ("order_is_transitive", order_is_transitive),
    ("join_is_an_upper_bound", join_is_an_upper_bound),
    ("meet_is_a_lower_bound", meet_is_a_lower_bound),
    ("order_agrees_with_concretization", order_agrees_with_concretization),
    ("widening_is_an_upper_bound", widening_is_an_upper_bound),
    ("widening_stabilizes_growing_chains", widening_stabilizes_growing_chains),
    ("interval_and_card_chains_stabilize", interval_and_card_chains_stabilize),
    ("unfold_covers_every_value", unfold_covers_every_value),
    ("exclusion_keeps_other_constructors", exclusion_keeps_other_constructors),
    ("complement_keeps_the_difference", complement_keeps_the_difference),
];
