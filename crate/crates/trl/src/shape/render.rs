//! Textual and JSON rendering of shapes as refinement grammars.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Card, IntRange, Node, NodeId, Shape, Strs};
use crate::ast::{Schema, TypeExpr};

/// One named nonterminal: `refine name of base = alt | alt;`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub name: String,
    pub base: String,
    pub alternatives: Vec<String>,
}

/// A shape as a start term plus the nonterminals it refers to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grammar {
    pub start: String,
    pub rules: Vec<Rule>,
}

impl Grammar {
    /// Render with nonterminal names derived from the data types of the schema:
    /// nodes covering a whole data type print as that type.
    pub fn of(shape: &Shape, schema: &Schema) -> Grammar {
        Renderer::new(shape, Some(schema)).grammar()
    }

    /// Refinement declarations in the input syntax, one per line.
    pub fn declarations(&self) -> String {
        self.rules
            .iter()
            .map(|r| format!("refine {} of {} = {};\n", r.name, r.base, r.alternatives.join(" | ")))
            .collect()
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.start)?;
        if !self.rules.is_empty() {
            f.write_str(" where ")?;
            for (i, r) in self.rules.iter().enumerate() {
                if i > 0 {
                    f.write_str("; ")?;
                }
                write!(f, "{} = {}", r.name, r.alternatives.join(" | "))?;
            }
        }
        Ok(())
    }
}

/// Display form without schema knowledge: whole-type nodes are not recognised.
pub(crate) fn render_compact(shape: &Shape) -> String {
    Renderer::new(shape, None).grammar().to_string()
}

struct Renderer<'a> {
    shape: &'a Shape,
    /// Names of nodes printed as nonterminals or whole types.
    names: BTreeMap<NodeId, String>,
    named_rules: Vec<NodeId>,
}

impl<'a> Renderer<'a> {
    fn new(shape: &'a Shape, schema: Option<&Schema>) -> Self {
        let nodes = shape.nodes();
        let mut indegree = vec![0usize; nodes.len()];
        for n in nodes {
            for s in n.successors() {
                indegree[s.index()] += 1;
            }
        }
        let mut names = BTreeMap::new();
        let mut named_rules = Vec::new();
        let mut counters: BTreeMap<String, usize> = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            let id = NodeId(i as u32);
            let Node::Data { adt, alts } = n else { continue };
            if let Some(schema) = schema {
                let whole = Shape::of_type(&TypeExpr::Adt(adt.clone()), schema);
                if shape.sub(id) == whole {
                    names.insert(id, adt.to_string());
                    continue;
                }
            }
            let recursive = reaches(nodes, id, id);
            if alts.len() > 1 || indegree[i] > 1 || recursive {
                let c = counters.entry(adt.to_string()).or_insert(0);
                *c += 1;
                names.insert(id, format!("{adt}{c}"));
                named_rules.push(id);
            }
        }
        Renderer {
            shape,
            names,
            named_rules,
        }
    }

    fn grammar(&self) -> Grammar {
        let rules = self
            .named_rules
            .iter()
            .map(|id| {
                let Node::Data { adt, alts } = self.shape.node(*id) else {
                    unreachable!("only data nodes are named")
                };
                Rule {
                    name: self.names[id].clone(),
                    base: adt.to_string(),
                    alternatives: alts.iter().map(|(k, args)| self.ctor(k.as_str(), args)).collect(),
                }
            })
            .collect();
        Grammar {
            start: self.term(NodeId(0)),
            rules,
        }
    }

    fn ctor(&self, k: &str, args: &[NodeId]) -> String {
        let args: Vec<String> = args.iter().map(|a| self.term(*a)).collect();
        format!("{k}({})", args.join(", "))
    }

    fn term(&self, id: NodeId) -> String {
        if let Some(n) = self.names.get(&id) {
            return n.clone();
        }
        match self.shape.node(id) {
            Node::Bottom => "void".into(),
            Node::Top => "value".into(),
            Node::Int(r) => int_term(r),
            Node::Str(Strs::Any) => "str".into(),
            Node::Str(Strs::Consts(cs)) => {
                let items: Vec<String> = cs.iter().map(|c| format!("{c:?}")).collect();
                format!("str{{{}}}", items.join(", "))
            }
            Node::Set { elem, card } => {
                let inner = self.term(*elem);
                if *card == Card::ANY {
                    format!("{{{inner}}}")
                } else {
                    format!("{{{inner}}}{}", card_term(card))
                }
            }
            Node::Data { alts, .. } => {
                // Unnamed data nodes have exactly one alternative.
                let (k, args) = alts.iter().next().expect("non-empty data node");
                self.ctor(k.as_str(), args)
            }
        }
    }
}

fn bound(b: Option<i64>) -> String {
    b.map_or_else(|| "inf".to_string(), |n| n.to_string())
}

fn int_term(r: &IntRange) -> String {
    if *r == IntRange::FULL {
        "int".into()
    } else {
        format!("int[{};{}]", r.lo.map_or_else(|| "-inf".to_string(), |n| n.to_string()), bound(r.hi))
    }
}

fn card_term(c: &Card) -> String {
    format!("[{};{}]", c.lo, c.hi.map_or_else(|| "inf".to_string(), |h| h.to_string()))
}

/// Whether `to` is reachable from `from` by a non-empty path.
fn reaches(nodes: &[Node], from: NodeId, to: NodeId) -> bool {
    let mut seen = vec![false; nodes.len()];
    let mut stack = nodes[from.index()].successors();
    while let Some(n) = stack.pop() {
        if n == to {
            return true;
        }
        if !std::mem::replace(&mut seen[n.index()], true) {
            stack.extend(nodes[n.index()].successors());
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;

    #[test]
    fn whole_types_print_by_name() {
        let s = schema();
        assert_eq!(Grammar::of(&nat(&s), &s).to_string(), "Nat");
        assert_eq!(Grammar::of(&suc(&s, nat(&s)), &s).to_string(), "suc(Nat)");
        assert_eq!(Grammar::of(&Shape::set(&expr(&s), Card::new(1, Some(10)).unwrap()), &s).to_string(), "{Expr}[1;10]");
    }

    #[test]
    fn recursive_refinement_gets_a_rule() {
        let s = schema();
        let e1 = parse(
            &s,
            "refine E1 of Expr = cst(suc(Nat)) | var(str) | mult(E1, E1); @ E1",
        );
        let g = Grammar::of(&e1, &s);
        assert_eq!(g.start, "Expr1");
        assert_eq!(g.rules.len(), 1);
        assert_eq!(g.rules[0].alternatives, vec!["cst(suc(Nat))", "mult(Expr1, Expr1)", "var(str)"]);
        // The declarations parse back to the same shape.
        let again = parse(&s, &format!("{} @ {}", g.declarations(), g.start));
        assert_eq!(again, e1);
    }

    #[test]
    fn leaves_render_in_input_syntax() {
        let s = schema();
        let r = Shape::int(IntRange::new(Some(-3), None).unwrap());
        assert_eq!(Grammar::of(&r, &s).to_string(), "int[-3;inf]");
        assert_eq!(Shape::bottom().to_string(), "void");
        assert_eq!(Shape::str_const("x").to_string(), "str{\"x\"}");
    }

    #[test]
    fn json_round_trip() {
        let s = schema();
        let g = Grammar::of(&parse(&s, "refine E1 of Expr = var(str) | mult(E1, E1); @ E1"), &s);
        let text = serde_json::to_string(&g).unwrap();
        assert_eq!(serde_json::from_str::<Grammar>(&text).unwrap(), g);
    }
}
