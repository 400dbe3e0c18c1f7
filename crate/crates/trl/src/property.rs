//! Grammar queries over inferred shapes: constructor reachability and
//! argument restrictions, each with a witness when violated.

use std::fmt;

use thiserror::Error;

use crate::ast::{Name, Schema};
use crate::shape::{Node, NodeId, Shape};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Property {
    /// No value of the shape contains constructor `k` anywhere.
    Unreachable(Name),
    /// Every argument of every occurrence of `ctor` lies within `bound`.
    ArgsWithin { ctor: Name, bound: Shape },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    /// The offending constructor occurrence, as a shape.
    Violated { witness: Shape },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PropertyError {
    #[error("unknown constructor `{0}`")]
    UnknownConstructor(Name),
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::Unreachable(k) => write!(f, "{k} unreachable"),
            Property::ArgsWithin { ctor, bound } => write!(f, "arguments of {ctor} <= {bound}"),
        }
    }
}

/// Nodes reachable from the root.
fn reachable(shape: &Shape) -> Vec<NodeId> {
    let mut seen = vec![false; shape.nodes().len()];
    let mut order = Vec::new();
    let mut todo = vec![NodeId(0)];
    while let Some(n) = todo.pop() {
        if std::mem::replace(&mut seen[n.index()], true) {
            continue;
        }
        order.push(n);
        todo.extend(shape.node(n).successors());
    }
    order
}

/// Occurrences of `k` in the shape as (argument shapes) lists.
fn occurrences(shape: &Shape, k: &Name, schema: &Schema) -> Vec<Vec<Shape>> {
    let sig = schema.ctor(k).expect("checked by caller");
    let mut out = Vec::new();
    for n in reachable(shape) {
        match shape.node(n) {
            Node::Data { alts, .. } => {
                if let Some(args) = alts.get(k) {
                    out.push(args.iter().map(|a| shape.sub(*a)).collect());
                }
            }
            // Top holds values of every type, including any `k` term.
            Node::Top => out.push(sig.params.iter().map(|t| Shape::of_type(t, schema)).collect()),
            _ => {}
        }
    }
    out
}

pub fn check_property(inferred: &Shape, property: &Property, schema: &Schema) -> Result<Verdict, PropertyError> {
    let ctor = match property {
        Property::Unreachable(k) | Property::ArgsWithin { ctor: k, .. } => k,
    };
    if schema.ctor(ctor).is_none() {
        return Err(PropertyError::UnknownConstructor(ctor.clone()));
    }
    for args in occurrences(inferred, ctor, schema) {
        let violated = match property {
            Property::Unreachable(_) => true,
            Property::ArgsWithin { bound, .. } => args.iter().any(|a| !a.leq(bound)),
        };
        if violated {
            return Ok(Verdict::Violated {
                witness: Shape::cons(schema, ctor, args),
            });
        }
    }
    Ok(Verdict::Holds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{check_program, TypeExpr};
    use crate::parser::{parse_program, parse_refinement};
    use crate::shape::shapes_from_refinements;

    const FORMULA: &str = "data Formula = and(Formula l, Formula r) | atom(str name) | neg(Formula f)
        | imp(Formula l, Formula r) | or(Formula l, Formula r);";
    const FOUT: &str = "refine FOut of Formula = and(FOut, FOut) | atom(str) | neg(atom(str)) | or(FOut, FOut);";

    fn setup() -> (Schema, Shape, Shape) {
        let s = check_program(&parse_program(FORMULA).unwrap()).unwrap();
        let d = parse_refinement(FOUT, &s).unwrap();
        let fout = shapes_from_refinements(&d, &s).resolve_text("FOut", &s).unwrap();
        let fin = Shape::of_type(&TypeExpr::Adt("Formula".into()), &s);
        (s, fin, fout)
    }

    fn atom(s: &Schema) -> Shape {
        Shape::cons(s, &"atom".into(), vec![Shape::str_any()])
    }

    #[test]
    fn imp_unreachable_in_output() {
        let (s, _, fout) = setup();
        assert_eq!(check_property(&fout, &Property::Unreachable("imp".into()), &s), Ok(Verdict::Holds));
    }

    #[test]
    fn negations_only_on_atoms() {
        let (s, _, fout) = setup();
        let p = Property::ArgsWithin {
            ctor: "neg".into(),
            bound: atom(&s),
        };
        assert_eq!(check_property(&fout, &p, &s), Ok(Verdict::Holds));
    }

    #[test]
    fn input_contains_imp() {
        let (s, fin, _) = setup();
        let w = Shape::cons(&s, &"imp".into(), vec![fin.clone(), fin.clone()]);
        assert_eq!(
            check_property(&fin, &Property::Unreachable("imp".into()), &s),
            Ok(Verdict::Violated { witness: w })
        );
        let p = Property::ArgsWithin {
            ctor: "neg".into(),
            bound: atom(&s),
        };
        assert!(!check_property(&fin, &p, &s).unwrap().holds());
    }

    #[test]
    fn unknown_constructor_is_rejected() {
        let (s, fin, _) = setup();
        assert_eq!(
            check_property(&fin, &Property::Unreachable("xor".into()), &s),
            Err(PropertyError::UnknownConstructor("xor".into()))
        );
    }

    #[test]
    fn top_reaches_everything() {
        let (s, _, _) = setup();
        assert!(!check_property(&Shape::top(), &Property::Unreachable("atom".into()), &s)
            .unwrap()
            .holds());
        assert!(check_property(&Shape::int_point(1), &Property::Unreachable("atom".into()), &s)
            .unwrap()
            .holds());
    }
}
