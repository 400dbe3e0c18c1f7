//! Random shapes over naturals and expressions, ints, strings and sets,
//! including recursive refinement grammars.

use rand::seq::SliceRandom;
use rand::Rng;
use trl::ast::{check_program, Schema, TypeExpr};
use trl::parser::{parse_program, parse_refinement};
use trl::shape::{shapes_from_refinements, Card, IntRange, Shape};

pub const DECLS: &str = "data Nat = zero() | suc(Nat pred);
    data Expr = var(str nm) | cst(Nat vl) | mult(Expr el, Expr er);";

/// Recursive grammars used as building blocks.
const GRAMMARS: &str = "refine Even of Nat = zero() | suc(Odd);
    refine Odd of Nat = suc(Even);
    refine NoZeroMult of Expr = cst(suc(Nat)) | var(str) | mult(NoZeroMult, NoZeroMult);
    refine Simplified of Expr = cst(Nat) | var(str) | mult(NoZeroMult, NoZeroMult);
    refine LeftComb of Expr = var(str) | mult(LeftComb, cst(Nat));";

pub fn schema() -> Schema {
    check_program(&parse_program(DECLS).unwrap()).unwrap()
}

fn grammar(s: &Schema, name: &str) -> Shape {
    let decls = parse_refinement(GRAMMARS, s).unwrap();
    shapes_from_refinements(&decls, s).resolve_text(name, s).unwrap()
}

fn cons(s: &Schema, k: &str, args: Vec<Shape>) -> Shape {
    Shape::cons(s, &k.into(), args)
}

pub fn nat(rng: &mut impl Rng, s: &Schema, depth: usize) -> Shape {
    let pick = if depth == 0 { rng.gen_range(0..3) } else { rng.gen_range(0..5) };
    match pick {
        0 => cons(s, "zero", vec![]),
        1 => Shape::of_type(&TypeExpr::Adt("Nat".into()), s),
        2 => grammar(s, ["Even", "Odd"].choose(rng).unwrap()),
        3 => cons(s, "suc", vec![nat(rng, s, depth - 1)]),
        _ => nat(rng, s, depth - 1).join(&nat(rng, s, depth - 1)),
    }
}

pub fn expr(rng: &mut impl Rng, s: &Schema, depth: usize) -> Shape {
    let pick = if depth == 0 { rng.gen_range(0..3) } else { rng.gen_range(0..6) };
    match pick {
        0 => cons(s, "var", vec![string(rng)]),
        1 => Shape::of_type(&TypeExpr::Adt("Expr".into()), s),
        2 => grammar(s, ["NoZeroMult", "Simplified", "LeftComb"].choose(rng).unwrap()),
        3 => cons(s, "cst", vec![nat(rng, s, depth - 1)]),
        4 => cons(s, "mult", vec![expr(rng, s, depth - 1), expr(rng, s, depth - 1)]),
        _ => expr(rng, s, depth - 1).join(&expr(rng, s, depth - 1)),
    }
}

pub fn int(rng: &mut impl Rng) -> Shape {
    let lo = rng.gen_bool(0.8).then(|| rng.gen_range(-3..=3));
    let hi = rng.gen_bool(0.8).then(|| lo.unwrap_or(-3) + rng.gen_range(0..=4));
    Shape::int(IntRange::new(lo, hi).unwrap())
}

pub fn string(rng: &mut impl Rng) -> Shape {
    match rng.gen_range(0..4) {
        0 => Shape::str_any(),
        1 => Shape::str_const("a"),
        2 => Shape::str_const("b"),
        _ => Shape::str_const("a").join(&Shape::str_const("c")),
    }
}

pub fn card(rng: &mut impl Rng) -> Card {
    let lo = rng.gen_range(0..=2);
    let hi = rng.gen_bool(0.8).then(|| lo + rng.gen_range(0..=2));
    Card::new(lo, hi).unwrap()
}

pub fn set(rng: &mut impl Rng, s: &Schema, depth: usize) -> Shape {
    let elem = match rng.gen_range(0..3) {
        0 => int(rng),
        1 => string(rng),
        _ => nat(rng, s, depth.min(2)),
    };
    Shape::set(&elem, card(rng))
}

/// A shape of any kind; mixing kinds is rare since it mostly yields top.
pub fn any_shape(rng: &mut impl Rng, s: &Schema) -> Shape {
    match rng.gen_range(0..20) {
        0 => Shape::bottom(),
        1 => int(rng).join(&string(rng)),
        2..=4 => int(rng),
        5..=6 => string(rng),
        7..=9 => set(rng, s, 2),
        10..=13 => nat(rng, s, 3),
        _ => expr(rng, s, 3),
    }
}

/// Two or three shapes of one kind, so that their operations are informative.
pub fn same_kind(rng: &mut impl Rng, s: &Schema, n: usize) -> Vec<Shape> {
    let kind = rng.gen_range(0..5);
    (0..n)
        .map(|_| match kind {
            0 => int(rng),
            1 => string(rng),
            2 => set(rng, s, 2),
            3 => nat(rng, s, 3),
            _ => expr(rng, s, 3),
        })
        .collect()
}

pub fn cons_names() -> [&'static str; 5] {
    ["zero", "suc", "var", "cst", "mult"]
}
