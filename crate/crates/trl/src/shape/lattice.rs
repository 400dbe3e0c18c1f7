//! Join, meet, inclusion and widening on grammars.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::{Card, Node, NodeId, RawGraph, Shape, ROOT};
use crate::ast::Name;

/// Depth below which same-signature nodes are kept apart by widening.
pub const WIDEN_DEPTH: usize = 2;

type Pair = (Option<NodeId>, Option<NodeId>);

/// Product construction over node pairs of two grammars.
struct Product<'a> {
    a: &'a Shape,
    b: &'a Shape,
    ids: HashMap<Pair, NodeId>,
    pending: Vec<(Pair, NodeId)>,
    g: RawGraph,
}

impl<'a> Product<'a> {
    fn new(a: &'a Shape, b: &'a Shape) -> Self {
        Product {
            a,
            b,
            ids: HashMap::new(),
            pending: Vec::new(),
            g: RawGraph::default(),
        }
    }

    fn get(&mut self, pair: Pair) -> NodeId {
        if let Some(id) = self.ids.get(&pair) {
            return *id;
        }
        let id = self.g.push(Node::Bottom);
        self.ids.insert(pair, id);
        self.pending.push((pair, id));
        id
    }

    fn left(&self, x: Option<NodeId>) -> Option<&'a Node> {
        x.map(|i| self.a.node(i)).filter(|n| !matches!(n, Node::Bottom))
    }

    fn right(&self, y: Option<NodeId>) -> Option<&'a Node> {
        y.map(|i| self.b.node(i)).filter(|n| !matches!(n, Node::Bottom))
    }

    /// Copy of a node from one side, paired with nothing on the other.
    fn copy(&mut self, n: &Node, left: bool) -> Node {
        let side = |id: NodeId| if left { (Some(id), None) } else { (None, Some(id)) };
        match n {
            Node::Set { elem, card } => Node::Set {
                elem: self.get(side(*elem)),
                card: *card,
            },
            Node::Data { adt, alts } => Node::Data {
                adt: adt.clone(),
                alts: alts
                    .iter()
                    .map(|(k, args)| (k.clone(), args.iter().map(|x| self.get(side(*x))).collect()))
                    .collect(),
            },
            other => other.clone(),
        }
    }

    fn run(mut self, f: impl Fn(&mut Self, Option<NodeId>, Option<NodeId>) -> Node) -> (RawGraph, HashMap<Pair, NodeId>, NodeId) {
        let root = self.get((Some(ROOT), Some(ROOT)));
        while let Some(((x, y), id)) = self.pending.pop() {
            let n = f(&mut self, x, y);
            self.g.nodes[id.index()] = n;
        }
        (self.g, self.ids, root)
    }
}

/// Union of alternatives with pairwise arguments; `leaf` combines leaves and mixed kinds.
fn upper_node(
    p: &mut Product,
    x: Option<NodeId>,
    y: Option<NodeId>,
    leaf: impl Fn(&Node, &Node) -> Node,
    card: impl Fn(&Card, &Card) -> Card,
) -> Node {
    match (p.left(x), p.right(y)) {
        (None, None) => Node::Bottom,
        (Some(n), None) => p.copy(n, true),
        (None, Some(n)) => p.copy(n, false),
        (Some(Node::Top), _) | (_, Some(Node::Top)) => Node::Top,
        (Some(Node::Set { elem: e1, card: c1 }), Some(Node::Set { elem: e2, card: c2 })) => Node::Set {
            elem: p.get((Some(*e1), Some(*e2))),
            card: card(c1, c2),
        },
        (Some(Node::Data { adt: a1, alts: k1 }), Some(Node::Data { adt: a2, alts: k2 })) if a1 == a2 => {
            let mut alts = BTreeMap::new();
            let ctors: BTreeSet<&Name> = k1.keys().chain(k2.keys()).collect();
            for k in ctors {
                let args = match (k1.get(k), k2.get(k)) {
                    (Some(xs), Some(ys)) => xs
                        .iter()
                        .zip(ys)
                        .map(|(u, v)| p.get((Some(*u), Some(*v))))
                        .collect(),
                    (Some(xs), None) => xs.iter().map(|u| p.get((Some(*u), None))).collect(),
                    (None, Some(ys)) => ys.iter().map(|v| p.get((None, Some(*v)))).collect(),
                    (None, None) => unreachable!(),
                };
                alts.insert(k.clone(), args);
            }
            Node::Data {
                adt: a1.clone(),
                alts,
            }
        }
        (Some(l), Some(r)) => leaf(l, r),
    }
}

fn join_leaf(l: &Node, r: &Node) -> Node {
    match (l, r) {
        (Node::Int(a), Node::Int(b)) => Node::Int(a.join(b)),
        (Node::Str(a), Node::Str(b)) => Node::Str(a.join(b)),
        _ => Node::Top,
    }
}

fn widen_leaf(l: &Node, r: &Node) -> Node {
    match (l, r) {
        (Node::Int(a), Node::Int(b)) => Node::Int(a.widen(&a.join(b))),
        (Node::Str(a), Node::Str(b)) => Node::Str(a.join(b)),
        _ => Node::Top,
    }
}

/// Structural signature used to decide which nodes widening may fold together.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Sig {
    Data(Name, Vec<Name>),
    Set,
}

fn sig(n: &Node) -> Option<Sig> {
    match n {
        Node::Data { adt, alts } => Some(Sig::Data(adt.clone(), alts.keys().cloned().collect())),
        Node::Set { .. } => Some(Sig::Set),
        _ => None,
    }
}

/// Coinductive inclusion check between nodes of two graphs.
pub(crate) fn leq_nodes(ga: &[Node], x: NodeId, gb: &[Node], y: NodeId) -> bool {
    let mut seen = HashSet::new();
    let mut work = vec![(x, y)];
    while let Some((x, y)) = work.pop() {
        if !seen.insert((x, y)) {
            continue;
        }
        match (&ga[x.index()], &gb[y.index()]) {
            (Node::Bottom, _) | (_, Node::Top) => {}
            (Node::Int(a), Node::Int(b)) if a.leq(b) => {}
            (Node::Str(a), Node::Str(b)) if a.leq(b) => {}
            (Node::Set { elem: e1, card: c1 }, Node::Set { elem: e2, card: c2 }) if c1.leq(c2) => {
                if !c1.is_empty_set() {
                    work.push((*e1, *e2));
                }
            }
            (Node::Data { adt: a1, alts: k1 }, Node::Data { adt: a2, alts: k2 }) if a1 == a2 => {
                for (k, xs) in k1 {
                    let Some(ys) = k2.get(k) else { return false };
                    work.extend(xs.iter().copied().zip(ys.iter().copied()));
                }
            }
            _ => return false,
        }
    }
    true
}

/// Union-find quotient of a raw graph with congruence closure.
struct Quotient {
    parent: Vec<usize>,
    content: Vec<Node>,
    queue: Vec<(NodeId, NodeId)>,
}

impl Quotient {
    fn new(nodes: Vec<Node>) -> Self {
        Quotient {
            parent: (0..nodes.len()).collect(),
            content: nodes,
            queue: Vec::new(),
        }
    }

    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut j = i;
        while self.parent[j] != r {
            let next = self.parent[j];
            self.parent[j] = r;
            j = next;
        }
        r
    }

    fn union(&mut self, x: NodeId, y: NodeId) {
        self.queue.push((x, y));
        while let Some((x, y)) = self.queue.pop() {
            let (rx, ry) = (self.find(x.index()), self.find(y.index()));
            if rx == ry {
                continue;
            }
            self.parent[rx] = ry;
            let a = std::mem::replace(&mut self.content[rx], Node::Bottom);
            let b = std::mem::replace(&mut self.content[ry], Node::Bottom);
            self.content[ry] = self.combine(a, b);
        }
    }

    fn combine(&mut self, a: Node, b: Node) -> Node {
        match (a, b) {
            (Node::Bottom, n) | (n, Node::Bottom) => n,
            (Node::Set { elem: e1, card: c1 }, Node::Set { elem: e2, card: c2 }) => {
                self.queue.push((e1, e2));
                Node::Set {
                    elem: e2,
                    card: c1.join(&c2),
                }
            }
            (Node::Data { adt: a1, alts: k1 }, Node::Data { adt: a2, alts: mut k2 }) if a1 == a2 => {
                for (k, xs) in k1 {
                    match k2.get(&k) {
                        Some(ys) => {
                            for (u, v) in xs.iter().zip(ys) {
                                self.queue.push((*u, *v));
                            }
                        }
                        None => {
                            k2.insert(k, xs);
                        }
                    }
                }
                Node::Data { adt: a2, alts: k2 }
            }
            (l, r) => join_leaf(&l, &r),
        }
    }

    fn finish(mut self, root: NodeId) -> Shape {
        let n = self.content.len();
        let mut g = RawGraph::default();
        for i in 0..n {
            let r = self.find(i);
            let node = self.content[r].clone();
            g.push(map_edges(node, |id| NodeId(self.find(id.index()) as u32)));
        }
        let r = NodeId(self.find(root.index()) as u32);
        g.finish(r)
    }
}

fn map_edges(node: Node, mut map: impl FnMut(NodeId) -> NodeId) -> Node {
    match node {
        Node::Set { elem, card } => Node::Set { elem: map(elem), card },
        Node::Data { adt, alts } => Node::Data {
            adt,
            alts: alts
                .into_iter()
                .map(|(k, args)| (k, args.into_iter().map(&mut map).collect()))
                .collect(),
        },
        other => other,
    }
}

/// Growing nodes already included in an ancestor of the same signature get
/// replaced by that ancestor. Unlike a merge this loses nothing, and it leaves
/// shared subterms alone.
fn redirect_pass(nodes: &[Node], root: NodeId, clash: &dyn Fn(NodeId) -> bool) -> Vec<(NodeId, NodeId)> {
    let mut redirects = Vec::new();
    let mut visited = vec![false; nodes.len()];
    let mut path: Vec<NodeId> = vec![root];
    let mut stack: Vec<(NodeId, usize)> = vec![(root, 0)];
    visited[root.index()] = true;
    while let Some((n, child)) = stack.last().copied() {
        let succ = nodes[n.index()].successors();
        if child >= succ.len() {
            stack.pop();
            path.pop();
            continue;
        }
        stack.last_mut().expect("non-empty").1 += 1;
        let c = succ[child];
        if visited[c.index()] {
            continue;
        }
        visited[c.index()] = true;
        if clash(c) {
            if let Some(sc) = sig(&nodes[c.index()]) {
                let cover = path.iter().rev().copied().find(|m| {
                    sig(&nodes[m.index()]).as_ref() == Some(&sc)
                        && unrolls(nodes, *m, c)
                        && leq_nodes(nodes, c, nodes, *m)
                });
                if let Some(m) = cover {
                    redirects.push((c, m));
                    continue;
                }
            }
        }
        path.push(c);
        stack.push((c, 0));
    }
    redirects
}

/// `c` has the ancestor `m`'s structure except where `c` stops at a finite
/// subterm, which is where an ascending chain is still unrolling.
fn unrolls(nodes: &[Node], m: NodeId, c: NodeId) -> bool {
    let mut seen = HashSet::new();
    let mut todo = vec![(m, c)];
    while let Some((x, y)) = todo.pop() {
        if x == y || !seen.insert((x, y)) {
            continue;
        }
        let (nx, ny) = (&nodes[x.index()], &nodes[y.index()]);
        match sig(nx) {
            Some(sx) if sig(ny).as_ref() == Some(&sx) => todo.extend(nx.successors().into_iter().zip(ny.successors())),
            _ if is_finite(nodes, y) => {}
            _ if leq_nodes(nodes, x, nodes, y) => {}
            _ => return false,
        }
    }
    true
}

/// No cycle is reachable from `n`.
fn is_finite(nodes: &[Node], n: NodeId) -> bool {
    // 0 unvisited, 1 on the stack, 2 done.
    let mut color = vec![0u8; nodes.len()];
    let mut stack = vec![(n, 0usize)];
    color[n.index()] = 1;
    while let Some((x, i)) = stack.last().copied() {
        let succ = nodes[x.index()].successors();
        if i >= succ.len() {
            color[x.index()] = 2;
            stack.pop();
            continue;
        }
        stack.last_mut().expect("non-empty").1 += 1;
        let y = succ[i];
        match color[y.index()] {
            0 => {
                color[y.index()] = 1;
                stack.push((y, 0));
            }
            1 => return false,
            _ => {}
        }
    }
    true
}

fn apply_redirects(nodes: Vec<Node>, redirects: &[(NodeId, NodeId)]) -> Vec<Node> {
    let mut target: Vec<NodeId> = (0..nodes.len()).map(|i| NodeId(i as u32)).collect();
    for (c, m) in redirects {
        target[c.index()] = *m;
    }
    // Targets are ancestors of their sources, so chains are finite unless they loop back.
    let resolve = |mut id: NodeId| {
        for _ in 0..target.len() {
            let next = target[id.index()];
            if next == id {
                break;
            }
            id = next;
        }
        id
    };
    nodes.into_iter().map(|n| map_edges(n, resolve)).collect()
}

/// One folding pass: returns pairs (node, ancestor) to identify.
fn fold_pass(
    nodes: &[Node],
    root: NodeId,
    clash: &dyn Fn(NodeId) -> bool,
) -> Vec<(NodeId, NodeId)> {
    let mut merges = Vec::new();
    let mut visited = vec![false; nodes.len()];
    let mut path: Vec<NodeId> = Vec::new();

    // Explicit DFS: (node, next child index).
    let mut stack: Vec<(NodeId, usize)> = vec![(root, 0)];
    visited[root.index()] = true;
    path.push(root);
    while let Some((n, child)) = stack.last().copied() {
        let succ = nodes[n.index()].successors();
        if child >= succ.len() {
            stack.pop();
            path.pop();
            continue;
        }
        stack.last_mut().expect("non-empty").1 += 1;
        let c = succ[child];
        if visited[c.index()] {
            continue;
        }
        visited[c.index()] = true;
        let depth = path.len();
        if let Some(sc) = sig(&nodes[c.index()]) {
            let ancestor = path
                .iter()
                .rev()
                .copied()
                .find(|m| sig(&nodes[m.index()]).as_ref() == Some(&sc));
            if let Some(m) = ancestor {
                if depth > WIDEN_DEPTH || (clash(c) && growth_variant(nodes, m, c)) {
                    merges.push((c, m));
                    continue;
                }
            }
        }
        path.push(c);
        stack.push((c, 0));
    }
    merges
}

/// Every argument of `m` that is not a recursive occurrence of `m`'s signature
/// is included in the corresponding argument of `n`.
fn growth_variant(nodes: &[Node], m: NodeId, n: NodeId) -> bool {
    let (nm, nn) = (&nodes[m.index()], &nodes[n.index()]);
    let sm = sig(nm);
    nm.successors()
        .into_iter()
        .zip(nn.successors())
        .all(|(ma, na)| sig(&nodes[ma.index()]) == sm || leq_nodes(nodes, ma, nodes, na))
}

impl Shape {
    pub fn join(&self, other: &Shape) -> Shape {
        if self.is_bottom() || self == other {
            return other.clone();
        }
        if other.is_bottom() {
            return self.clone();
        }
        let (g, _, root) = Product::new(self, other).run(|p, x, y| upper_node(p, x, y, join_leaf, Card::join));
        g.finish(root)
    }

    pub fn meet(&self, other: &Shape) -> Shape {
        if self == other || other.is_top() {
            return self.clone();
        }
        if self.is_top() {
            return other.clone();
        }
        // Here `None` stands for the top element.
        let (g, _, root) = Product::new(self, other).run(|p, x, y| {
            let nx = x.map(|i| p.a.node(i)).filter(|n| !matches!(n, Node::Top));
            let ny = y.map(|i| p.b.node(i)).filter(|n| !matches!(n, Node::Top));
            match (nx, ny) {
                (None, None) => Node::Top,
                (Some(n), None) => p.copy(n, true),
                (None, Some(n)) => p.copy(n, false),
                (Some(Node::Int(a)), Some(Node::Int(b))) => a.meet(b).map_or(Node::Bottom, Node::Int),
                (Some(Node::Str(a)), Some(Node::Str(b))) => a.meet(b).map_or(Node::Bottom, Node::Str),
                (Some(Node::Set { elem: e1, card: c1 }), Some(Node::Set { elem: e2, card: c2 })) => {
                    match c1.meet(c2) {
                        Some(card) => Node::Set {
                            elem: p.get((Some(*e1), Some(*e2))),
                            card,
                        },
                        None => Node::Bottom,
                    }
                }
                (Some(Node::Data { adt: a1, alts: k1 }), Some(Node::Data { adt: a2, alts: k2 })) if a1 == a2 => {
                    let mut alts = BTreeMap::new();
                    for (k, xs) in k1 {
                        if let Some(ys) = k2.get(k) {
                            let args = xs.iter().zip(ys).map(|(u, v)| p.get((Some(*u), Some(*v)))).collect();
                            alts.insert(k.clone(), args);
                        }
                    }
                    Node::Data {
                        adt: a1.clone(),
                        alts,
                    }
                }
                _ => Node::Bottom,
            }
        });
        g.finish(root)
    }

    pub fn leq(&self, other: &Shape) -> bool {
        self == other || leq_nodes(&self.nodes, ROOT, &other.nodes, ROOT)
    }

    /// Mutual inclusion. Canonical forms make this structural equality, but the
    /// check stays semantic so it does not depend on that invariant.
    pub fn equiv(&self, other: &Shape) -> bool {
        self.leq(other) && other.leq(self)
    }

    /// Upper bound of `self` (previous iterate) and `new` that stabilizes ascending chains.
    pub fn widen(&self, new: &Shape) -> Shape {
        if new.leq(self) {
            return self.clone();
        }
        let (g, ids, root) =
            Product::new(self, new).run(|p, x, y| upper_node(p, x, y, widen_leaf, |a, b| a.widen(&a.join(b))));
        let mut old_of: Vec<Option<NodeId>> = vec![None; g.nodes.len()];
        for ((x, _), id) in &ids {
            old_of[id.index()] = x.filter(|i| !matches!(self.node(*i), Node::Bottom));
        }
        let nodes = g.nodes;
        let clash = |n: NodeId| match old_of[n.index()] {
            None => true,
            Some(o) => sig(self.node(o)) != sig(&nodes[n.index()]),
        };
        let redirects = redirect_pass(&nodes, root, &clash);
        let nodes = apply_redirects(nodes.clone(), &redirects);
        let merges = fold_pass(&nodes, root, &clash);
        let mut q = Quotient::new(nodes.clone());
        for (n, m) in merges {
            q.union(n, m);
        }
        let mut shape = q.finish(root);
        loop {
            let merges = fold_pass(&shape.nodes, ROOT, &|_| false);
            if merges.is_empty() {
                return shape;
            }
            let mut q = Quotient::new(shape.nodes.to_vec());
            for (n, m) in merges {
                q.union(n, m);
            }
            shape = q.finish(ROOT);
        }
    }
}
