//! Canonical forms: emptiness pruning, cardinality clamping, minimization, renumbering.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{Card, Node, NodeId, Shape};

/// Least fixpoint of "denotes at least one value".
fn nonempty(nodes: &[Node]) -> Vec<bool> {
    let mut ne = vec![false; nodes.len()];
    loop {
        let mut changed = false;
        for (i, n) in nodes.iter().enumerate() {
            if ne[i] {
                continue;
            }
            let v = match n {
                Node::Bottom => false,
                Node::Top | Node::Int(_) | Node::Str(_) => true,
                Node::Set { elem, card } => card.lo == 0 || ne[elem.index()],
                Node::Data { alts, .. } => alts.values().any(|args| args.iter().all(|a| ne[a.index()])),
            };
            if v {
                ne[i] = true;
                changed = true;
            }
        }
        if !changed {
            return ne;
        }
    }
}

/// Sizes above this are treated as infinite.
const SIZE_CAP: u64 = 1 << 40;

fn binomial_sum(m: u64, card: &Card) -> Option<u64> {
    if m > 62 {
        return None;
    }
    let hi = card.hi.map_or(m, |h| h.min(m));
    let mut total: u64 = 0;
    let mut c: u64 = 1; // C(m, 0)
    for k in 0..=hi {
        if k >= card.lo {
            total = total.checked_add(c)?;
        }
        c = c.checked_mul(m - k)? / (k + 1);
    }
    Some(total)
}

/// Finite language sizes; `None` means infinite (or too large to matter).
fn sizes(nodes: &[Node], ne: &[bool]) -> Vec<Option<u64>> {
    #[derive(Clone, Copy, PartialEq)]
    enum St {
        New,
        Active,
        Done,
    }
    let mut st = vec![St::New; nodes.len()];
    let mut out: Vec<Option<u64>> = vec![None; nodes.len()];

    fn go(i: usize, nodes: &[Node], ne: &[bool], st: &mut [St], out: &mut [Option<u64>]) -> Option<u64> {
        match st[i] {
            St::Done => return out[i],
            St::Active => return None,
            St::New => {}
        }
        if !ne[i] {
            st[i] = St::Done;
            out[i] = Some(0);
            return Some(0);
        }
        st[i] = St::Active;
        let r = match &nodes[i] {
            Node::Bottom => Some(0),
            Node::Top => None,
            Node::Int(r) => r.size(),
            Node::Str(s) => s.size(),
            Node::Set { elem, card } => {
                if card.is_empty_set() {
                    Some(1)
                } else {
                    go(elem.index(), nodes, ne, st, out).and_then(|m| binomial_sum(m, card))
                }
            }
            Node::Data { alts, .. } => {
                let mut total = Some(0u64);
                for args in alts.values() {
                    if !args.iter().all(|a| ne[a.index()]) {
                        continue;
                    }
                    let mut prod = Some(1u64);
                    for a in args {
                        let s = go(a.index(), nodes, ne, st, out);
                        prod = prod.zip(s).and_then(|(p, s)| p.checked_mul(s));
                    }
                    total = total.zip(prod).and_then(|(t, p)| t.checked_add(p));
                }
                total
            }
        };
        let r = r.filter(|&v| v <= SIZE_CAP);
        st[i] = St::Done;
        out[i] = r;
        r
    }

    for i in 0..nodes.len() {
        go(i, nodes, ne, &mut st, &mut out);
    }
    out
}

pub(crate) fn language_size(nodes: &[Node], root: NodeId) -> Option<u64> {
    let ne = nonempty(nodes);
    sizes(nodes, &ne)[root.index()]
}

/// Prune empty parts and clamp cardinalities until nothing changes.
fn prune(mut nodes: Vec<Node>) -> Vec<Node> {
    let bottom = NodeId(nodes.len() as u32);
    nodes.push(Node::Bottom);
    loop {
        let ne = nonempty(&nodes);
        let size = sizes(&nodes, &ne);
        let mut emptied = false;
        for i in 0..nodes.len() {
            if !ne[i] {
                nodes[i] = Node::Bottom;
                continue;
            }
            match &mut nodes[i] {
                Node::Set { elem, card } => {
                    let mut c = *card;
                    if !ne[elem.index()] {
                        c = c.meet(&Card::EMPTY_SET).expect("non-empty set node admits the empty set");
                    }
                    if let Some(m) = size[elem.index()] {
                        match Card::new(c.lo, Some(c.hi.map_or(m, |h| h.min(m)))) {
                            Some(clamped) => c = clamped,
                            None => {
                                nodes[i] = Node::Bottom;
                                emptied = true;
                                continue;
                            }
                        }
                    }
                    *card = c;
                    if c.is_empty_set() {
                        *elem = bottom;
                    }
                }
                Node::Data { alts, .. } => {
                    alts.retain(|_, args| args.iter().all(|a| ne[a.index()]));
                }
                _ => {}
            }
        }
        if !emptied {
            return nodes;
        }
    }
}

/// Coarsest partition compatible with labels and successor classes.
fn minimize(nodes: &[Node]) -> Vec<usize> {
    let mut class: Vec<usize> = {
        let mut ids = BTreeMap::new();
        nodes
            .iter()
            .map(|n| {
                let label = n.map_ids(|_| NodeId(0));
                let next = ids.len();
                *ids.entry(label).or_insert(next)
            })
            .collect()
    };
    let mut count = class.iter().max().map_or(0, |m| m + 1);
    loop {
        let mut ids = BTreeMap::new();
        let next_class: Vec<usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let succ: Vec<usize> = n.successors().iter().map(|s| class[s.index()]).collect();
                let next = ids.len();
                *ids.entry((class[i], succ)).or_insert(next)
            })
            .collect();
        let next_count = ids.len();
        class = next_class;
        if next_count == count {
            return class;
        }
        count = next_count;
    }
}

pub(crate) fn normalize(nodes: Vec<Node>, root: NodeId) -> Shape {
    let nodes = prune(nodes);
    if matches!(nodes[root.index()], Node::Bottom) {
        return Shape::bottom();
    }
    let class = minimize(&nodes);
    let mut rep: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, c) in class.iter().enumerate() {
        rep.entry(*c).or_insert(i);
    }

    // Preorder numbering of classes reachable from the root.
    let mut number: BTreeMap<usize, u32> = BTreeMap::new();
    let mut order = Vec::new();
    let mut stack = vec![class[root.index()]];
    while let Some(c) = stack.pop() {
        if number.contains_key(&c) {
            continue;
        }
        number.insert(c, order.len() as u32);
        order.push(c);
        let succ = nodes[rep[&c]].successors();
        for s in succ.iter().rev() {
            let sc = class[s.index()];
            if !number.contains_key(&sc) {
                stack.push(sc);
            }
        }
    }
    let out = order
        .iter()
        .map(|c| nodes[rep[c]].map_ids(|id| NodeId(number[&class[id.index()]])))
        .collect();
    Shape { nodes: Arc::new(out) }
}
