//! Abstract values: regular tree grammars over data, set, integer and string leaves.
//!
//! A [`Shape`] is a small self-contained graph whose nodes act as nonterminals.
//! Node 0 is the start symbol. Every public constructor returns a canonical
//! (minimized, renumbered) graph, so structural equality coincides with
//! equality of the denoted value sets.

mod concretize;
mod interval;
mod lattice;
mod normalize;
mod ops;
mod render;
mod terms;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::ast::{Name, Schema, TypeExpr};

pub use concretize::{concretize_bounded, contains, Bounds};
pub use interval::{Card, IntRange, Strs, MAX_STR_CONSTS};
pub use ops::{
    abstract_eq, abstract_neq, children, exclude, reconstruct, rel_complement, unfold, Kids,
    Unfolded,
};
pub use render::{Grammar, Rule};
pub use terms::{shape_from_term, shapes_from_refinements, ShapeEnv};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Bottom,
    Top,
    Int(IntRange),
    Str(Strs),
    Set { elem: NodeId, card: Card },
    Data {
        adt: Name,
        alts: BTreeMap<Name, Vec<NodeId>>,
    },
}

impl Node {
    pub(crate) fn successors(&self) -> Vec<NodeId> {
        match self {
            Node::Set { elem, .. } => vec![*elem],
            Node::Data { alts, .. } => alts.values().flatten().copied().collect(),
            _ => vec![],
        }
    }

    fn map_ids(&self, f: impl Fn(NodeId) -> NodeId) -> Node {
        match self {
            Node::Set { elem, card } => Node::Set {
                elem: f(*elem),
                card: *card,
            },
            Node::Data { adt, alts } => Node::Data {
                adt: adt.clone(),
                alts: alts
                    .iter()
                    .map(|(k, args)| (k.clone(), args.iter().map(|a| f(*a)).collect()))
                    .collect(),
            },
            other => other.clone(),
        }
    }
}

/// A canonical regular tree grammar; the start symbol is node 0.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Shape {
    nodes: Arc<Vec<Node>>,
}

const ROOT: NodeId = NodeId(0);

/// Mutable graph used while constructing shapes; normalized into a [`Shape`].
#[derive(Clone, Debug, Default)]
pub(crate) struct RawGraph {
    pub nodes: Vec<Node>,
}

impl RawGraph {
    pub fn push(&mut self, n: Node) -> NodeId {
        self.nodes.push(n);
        NodeId(self.nodes.len() as u32 - 1)
    }

    /// Copy all nodes of `s`, returning the id of its root.
    pub fn embed(&mut self, s: &Shape) -> NodeId {
        let offset = self.nodes.len() as u32;
        for n in s.nodes.iter() {
            self.nodes.push(n.map_ids(|id| NodeId(id.0 + offset)));
        }
        NodeId(offset)
    }

    pub fn finish(self, root: NodeId) -> Shape {
        normalize::normalize(self.nodes, root)
    }
}

impl Shape {
    pub fn bottom() -> Shape {
        Shape {
            nodes: Arc::new(vec![Node::Bottom]),
        }
    }

    pub fn top() -> Shape {
        Shape {
            nodes: Arc::new(vec![Node::Top]),
        }
    }

    pub fn int(r: IntRange) -> Shape {
        Shape {
            nodes: Arc::new(vec![Node::Int(r)]),
        }
    }

    pub fn int_point(n: i64) -> Shape {
        Shape::int(IntRange::point(n))
    }

    pub fn str_any() -> Shape {
        Shape::strs(Strs::Any)
    }

    pub fn strs(s: Strs) -> Shape {
        Shape {
            nodes: Arc::new(vec![Node::Str(s)]),
        }
    }

    pub fn str_const(s: &str) -> Shape {
        Shape::strs(Strs::Consts([s.to_string()].into_iter().collect()))
    }

    pub fn set(elem: &Shape, card: Card) -> Shape {
        let mut g = RawGraph::default();
        let root = g.push(Node::Bottom);
        let e = g.embed(elem);
        g.nodes[root.index()] = Node::Set { elem: e, card };
        g.finish(root)
    }

    /// A data shape with one alternative per entry; repeated constructors are joined.
    pub fn data(adt: &Name, alts: Vec<(Name, Vec<Shape>)>) -> Shape {
        let mut acc = Shape::bottom();
        for (k, args) in alts {
            let mut g = RawGraph::default();
            let root = g.push(Node::Bottom);
            let ids: Vec<NodeId> = args.iter().map(|a| g.embed(a)).collect();
            g.nodes[root.index()] = Node::Data {
                adt: adt.clone(),
                alts: [(k, ids)].into_iter().collect(),
            };
            acc = acc.join(&g.finish(root));
        }
        acc
    }

    /// A single-constructor shape, looking up the data type in the schema.
    pub fn cons(schema: &Schema, k: &Name, args: Vec<Shape>) -> Shape {
        let adt = schema.ctor(k).map(|s| s.adt.clone()).unwrap_or_else(|| k.clone());
        Shape::data(&adt, vec![(k.clone(), args)])
    }

    /// All well-typed values of a type.
    pub fn of_type(t: &TypeExpr, schema: &Schema) -> Shape {
        let mut g = RawGraph::default();
        let mut adts = BTreeMap::new();
        let root = type_node(&mut g, t, schema, &mut adts);
        g.finish(root)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn root(&self) -> &Node {
        self.node(ROOT)
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self.root(), Node::Bottom)
    }

    pub fn is_top(&self) -> bool {
        matches!(self.root(), Node::Top)
    }

    /// The grammar re-rooted at `id`.
    pub fn sub(&self, id: NodeId) -> Shape {
        if id == ROOT {
            return self.clone();
        }
        normalize::normalize(self.nodes.to_vec(), id)
    }

    /// The most precise type containing every value of the shape.
    pub fn type_of(&self) -> TypeExpr {
        self.type_of_node(ROOT, 0)
    }

    fn type_of_node(&self, id: NodeId, depth: usize) -> TypeExpr {
        match self.node(id) {
            Node::Bottom => TypeExpr::Void,
            Node::Top => TypeExpr::Value,
            Node::Int(_) => TypeExpr::Int,
            Node::Str(_) => TypeExpr::Str,
            Node::Data { adt, .. } => TypeExpr::Adt(adt.clone()),
            // Sets of sets can nest through recursion; stop descending eventually.
            Node::Set { .. } if depth > 8 => TypeExpr::set_of(TypeExpr::Value),
            Node::Set { elem, .. } => TypeExpr::set_of(self.type_of_node(*elem, depth + 1)),
        }
    }

    /// Number of values denoted, when finite and small enough to count.
    pub fn count(&self) -> Option<u64> {
        normalize::language_size(&self.nodes, ROOT)
    }

    /// Number of grammar nodes, a rough size measure.
    pub fn size(&self) -> usize {
        self.nodes.len()
    }
}

fn type_node(
    g: &mut RawGraph,
    t: &TypeExpr,
    schema: &Schema,
    adts: &mut BTreeMap<Name, NodeId>,
) -> NodeId {
    match t {
        TypeExpr::Void => g.push(Node::Bottom),
        TypeExpr::Value => g.push(Node::Top),
        TypeExpr::Int => g.push(Node::Int(IntRange::FULL)),
        TypeExpr::Str => g.push(Node::Str(Strs::Any)),
        TypeExpr::Set(inner) => {
            let elem = type_node(g, inner, schema, adts);
            g.push(Node::Set {
                elem,
                card: Card::ANY,
            })
        }
        TypeExpr::Adt(name) => {
            if let Some(id) = adts.get(name) {
                return *id;
            }
            let id = g.push(Node::Bottom);
            adts.insert(name.clone(), id);
            let mut alts = BTreeMap::new();
            for k in schema.ctors_of(name) {
                let sig = schema.ctor(k).expect("declared constructor");
                let args = sig
                    .params
                    .iter()
                    .map(|p| type_node(g, p, schema, adts))
                    .collect();
                alts.insert(k.clone(), args);
            }
            g.nodes[id.index()] = Node::Data {
                adt: name.clone(),
                alts,
            };
            id
        }
    }
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render::render_compact(self))
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use crate::parser::parse_program;

    pub const NAT_EXPR: &str = "data Nat = zero() | suc(Nat pred);
        data Expr = var(str nm) | cst(Nat vl) | mult(Expr el, Expr er);";

    pub fn schema() -> Schema {
        Schema::new(&parse_program(NAT_EXPR).unwrap().datas).unwrap()
    }

    pub fn nat(s: &Schema) -> Shape {
        Shape::of_type(&TypeExpr::Adt("Nat".into()), s)
    }

    pub fn expr(s: &Schema) -> Shape {
        Shape::of_type(&TypeExpr::Adt("Expr".into()), s)
    }

    pub fn zero(s: &Schema) -> Shape {
        Shape::cons(s, &"zero".into(), vec![])
    }

    pub fn suc(s: &Schema, a: Shape) -> Shape {
        Shape::cons(s, &"suc".into(), vec![a])
    }

    pub fn cst(s: &Schema, a: Shape) -> Shape {
        Shape::cons(s, &"cst".into(), vec![a])
    }

    pub fn var(s: &Schema) -> Shape {
        Shape::cons(s, &"var".into(), vec![Shape::str_any()])
    }

    pub fn mult(s: &Schema, a: Shape, b: Shape) -> Shape {
        Shape::cons(s, &"mult".into(), vec![a, b])
    }

    /// Parse a shape written in refinement syntax against the Nat/Expr schema.
    pub fn parse(s: &Schema, text: &str) -> Shape {
        let (decls, start) = match text.split_once("@") {
            Some((d, start)) => (d.to_string(), start.trim().to_string()),
            None => (String::new(), text.to_string()),
        };
        let decls = crate::parser::parse_refinement(&decls, s).unwrap();
        let env = shapes_from_refinements(&decls, s);
        env.resolve_text(&start, s).unwrap()
    }
}
