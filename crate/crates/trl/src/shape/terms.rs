//! Building shapes from refinement declarations and shape literals.

use std::collections::BTreeMap;

use super::{type_node, Card, IntRange, Node, NodeId, RawGraph, Shape, Strs};
use crate::ast::{Name, Schema, TypeExpr};
use crate::parser::{parse_shape_term, ParseError, RefinementDecl, ShapeTerm};

/// Shapes of the nonterminals declared in refinement blocks.
#[derive(Clone, Debug, Default)]
pub struct ShapeEnv {
    decls: Vec<RefinementDecl>,
    shapes: BTreeMap<Name, Shape>,
}

impl ShapeEnv {
    pub fn get(&self, nonterminal: &Name) -> Option<&Shape> {
        self.shapes.get(nonterminal)
    }

    pub fn decls(&self) -> &[RefinementDecl] {
        &self.decls
    }

    pub fn names(&self) -> impl Iterator<Item = &Name> {
        self.shapes.keys()
    }

    /// Interpret a shape literal whose names may be nonterminals or data types.
    pub fn resolve_text(&self, text: &str, schema: &Schema) -> Result<Shape, ParseError> {
        let term = parse_shape_term(text, schema, &self.decls)?;
        Ok(self.resolve(&term, schema))
    }

    pub fn resolve(&self, term: &ShapeTerm, schema: &Schema) -> Shape {
        let mut g = RawGraph::default();
        let ids = decl_nodes(&mut g, &self.decls, schema);
        let root = term_node(&mut g, term, &TypeExpr::Value, schema, &ids);
        g.finish(root)
    }
}

fn decl_nodes(g: &mut RawGraph, decls: &[RefinementDecl], schema: &Schema) -> BTreeMap<Name, NodeId> {
    let ids: BTreeMap<Name, NodeId> = decls.iter().map(|d| (d.name.clone(), g.push(Node::Bottom))).collect();
    for d in decls {
        let mut alts = BTreeMap::new();
        for (k, args) in &d.alternatives {
            let sig = schema.ctor(k).expect("validated constructor");
            let args: Vec<NodeId> = args
                .iter()
                .zip(&sig.params)
                .map(|(a, ty)| term_node(g, a, ty, schema, &ids))
                .collect();
            alts.insert(k.clone(), args);
        }
        g.nodes[ids[&d.name].index()] = Node::Data {
            adt: d.base.clone(),
            alts,
        };
    }
    ids
}

fn term_node(
    g: &mut RawGraph,
    t: &ShapeTerm,
    expected: &TypeExpr,
    schema: &Schema,
    ids: &BTreeMap<Name, NodeId>,
) -> NodeId {
    match t {
        ShapeTerm::Named(n) => match ids.get(n) {
            Some(id) => *id,
            None => type_node(g, &TypeExpr::Adt(n.clone()), schema, &mut BTreeMap::new()),
        },
        ShapeTerm::Ctor(k, args) => {
            let sig = schema.ctor(k).expect("validated constructor");
            let args = args
                .iter()
                .zip(&sig.params)
                .map(|(a, ty)| term_node(g, a, ty, schema, ids))
                .collect();
            g.push(Node::Data {
                adt: sig.adt.clone(),
                alts: [(k.clone(), args)].into_iter().collect(),
            })
        }
        ShapeTerm::Int(lo, hi) => match IntRange::new(*lo, *hi) {
            Some(r) => g.push(Node::Int(r)),
            None => g.push(Node::Bottom),
        },
        ShapeTerm::Str(None) => g.push(Node::Str(Strs::Any)),
        ShapeTerm::Str(Some(set)) => match Strs::consts(set.iter().cloned()) {
            Some(s) => g.push(Node::Str(s)),
            None => g.push(Node::Bottom),
        },
        ShapeTerm::Set(e, lo, hi) => {
            let elem_ty = match expected {
                TypeExpr::Set(inner) => (**inner).clone(),
                _ => TypeExpr::Value,
            };
            let elem = term_node(g, e, &elem_ty, schema, ids);
            match Card::new(*lo, *hi) {
                Some(card) => g.push(Node::Set { elem, card }),
                None => g.push(Node::Bottom),
            }
        }
        // An unconstrained position still only holds values of its declared type.
        ShapeTerm::Value => type_node(g, expected, schema, &mut BTreeMap::new()),
        ShapeTerm::Void => g.push(Node::Bottom),
    }
}

/// Shapes for every nonterminal of the given (already validated) declarations.
pub fn shapes_from_refinements(decls: &[RefinementDecl], schema: &Schema) -> ShapeEnv {
    let mut g = RawGraph::default();
    let ids = decl_nodes(&mut g, decls, schema);
    let shapes = ids
        .iter()
        .map(|(name, id)| (name.clone(), g.clone().finish(*id)))
        .collect();
    ShapeEnv {
        decls: decls.to_vec(),
        shapes,
    }
}

/// A shape literal that refers only to data types.
pub fn shape_from_term(term: &ShapeTerm, schema: &Schema) -> Shape {
    ShapeEnv::default().resolve(term, schema)
}
