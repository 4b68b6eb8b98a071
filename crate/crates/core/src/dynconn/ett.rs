//! Euler tour forest backed by implicit treaps with parent links.
//!
//! Every vertex owns one node (index = vertex id). A tree edge `(u, v)` owns
//! two arc nodes, `u→v` and `v→u`. Each tree is stored as one treap whose
//! in-order sequence is a cyclic Euler tour.

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

pub(crate) const NIL: u32 = u32::MAX;

/// Own-node flag: this arc marks a tree edge whose level equals the forest level.
pub(crate) const TREE: u8 = 1;
/// Own-node flag: this vertex has non-tree edges at the forest level.
pub(crate) const NONTREE: u8 = 2;

#[derive(Debug, Clone)]
struct Node {
    left: u32,
    right: u32,
    parent: u32,
    prio: u32,
    /// Nodes in subtree.
    size: u32,
    /// Vertex nodes in subtree.
    verts: u32,
    flags: u8,
    agg: u8,
    ends: (u32, u32),
}

impl Node {
    fn new(prio: u32, ends: (u32, u32)) -> Self {
        let is_vertex = ends.0 == ends.1;
        Node {
            left: NIL,
            right: NIL,
            parent: NIL,
            prio,
            size: 1,
            verts: is_vertex as u32,
            flags: 0,
            agg: 0,
            ends,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct EulerForest {
    nodes: Vec<Node>,
    free: Vec<u32>,
    rng: SmallRng,
}

impl EulerForest {
    pub fn new(n: usize, seed: u64) -> Self {
        let mut rng = SmallRng::seed_from_u64(seed);
        let nodes = (0..n as u32)
            .map(|v| Node::new(rng.random(), (v, v)))
            .collect();
        EulerForest {
            nodes,
            free: Vec::new(),
            rng,
        }
    }

    fn alloc(&mut self, ends: (u32, u32)) -> u32 {
        let node = Node::new(self.rng.random(), ends);
        match self.free.pop() {
            Some(i) => {
                self.nodes[i as usize] = node;
                i
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as u32
            }
        }
    }

    #[inline]
    fn n(&self, x: u32) -> &Node {
        &self.nodes[x as usize]
    }

    #[inline]
    fn size(&self, x: u32) -> u32 {
        if x == NIL {
            0
        } else {
            self.n(x).size
        }
    }

    fn pull(&mut self, x: u32) {
        let (l, r) = (self.n(x).left, self.n(x).right);
        let mut size = 1;
        let mut verts = (self.n(x).ends.0 == self.n(x).ends.1) as u32;
        let mut agg = self.n(x).flags;
        for c in [l, r] {
            if c != NIL {
                let child = self.n(c);
                size += child.size;
                verts += child.verts;
                agg |= child.agg;
            }
        }
        let node = &mut self.nodes[x as usize];
        node.size = size;
        node.verts = verts;
        node.agg = agg;
    }

    fn set_parent(&mut self, child: u32, parent: u32) {
        if child != NIL {
            self.nodes[child as usize].parent = parent;
        }
    }

    fn merge(&mut self, a: u32, b: u32) -> u32 {
        if a == NIL {
            return b;
        }
        if b == NIL {
            return a;
        }
        if self.n(a).prio > self.n(b).prio {
            let r = self.n(a).right;
            let m = self.merge(r, b);
            self.nodes[a as usize].right = m;
            self.set_parent(m, a);
            self.pull(a);
            a
        } else {
            let l = self.n(b).left;
            let m = self.merge(a, l);
            self.nodes[b as usize].left = m;
            self.set_parent(m, b);
            self.pull(b);
            b
        }
    }

    /// Split the treap rooted at `t` into the first `k` nodes and the rest.
    fn split(&mut self, t: u32, k: u32) -> (u32, u32) {
        if t == NIL {
            return (NIL, NIL);
        }
        let l = self.n(t).left;
        let ls = self.size(l);
        if k <= ls {
            let (a, b) = self.split(l, k);
            self.nodes[t as usize].left = b;
            self.set_parent(b, t);
            self.set_parent(a, NIL);
            self.pull(t);
            (a, t)
        } else {
            let r = self.n(t).right;
            let (a, b) = self.split(r, k - ls - 1);
            self.nodes[t as usize].right = a;
            self.set_parent(a, t);
            self.set_parent(b, NIL);
            self.pull(t);
            (t, b)
        }
    }

    pub fn root(&self, mut x: u32) -> u32 {
        while self.n(x).parent != NIL {
            x = self.n(x).parent;
        }
        x
    }

    /// In-order position of `x` within its tour.
    fn index(&self, x: u32) -> u32 {
        let mut idx = self.size(self.n(x).left);
        let mut cur = x;
        loop {
            let p = self.n(cur).parent;
            if p == NIL {
                return idx;
            }
            if self.n(p).right == cur {
                idx += self.size(self.n(p).left) + 1;
            }
            cur = p;
        }
    }

    /// Rotate the tour containing vertex `v` so that it starts at `v`.
    fn reroot(&mut self, v: u32) -> u32 {
        let r = self.root(v);
        let i = self.index(v);
        let (a, b) = self.split(r, i);
        self.set_parent(a, NIL);
        self.set_parent(b, NIL);
        self.merge(b, a)
    }

    pub fn connected(&self, u: u32, v: u32) -> bool {
        self.root(u) == self.root(v)
    }

    /// Number of vertices in the tree rooted at treap root `r`.
    pub fn tree_vertices(&self, r: u32) -> u32 {
        self.n(r).verts
    }

    /// Join the trees of `u` and `v` with a new tree edge; returns the arc nodes.
    pub fn link(&mut self, u: u32, v: u32) -> (u32, u32) {
        let tu = self.reroot(u);
        let tv = self.reroot(v);
        let uv = self.alloc((u, v));
        let vu = self.alloc((v, u));
        let m = self.merge(tu, uv);
        let m = self.merge(m, tv);
        let m = self.merge(m, vu);
        self.set_parent(m, NIL);
        (uv, vu)
    }

    /// Remove the tree edge owning arcs `a1`, `a2` and release the arc nodes.
    pub fn cut(&mut self, a1: u32, a2: u32) {
        let r = self.root(a1);
        let (i1, i2) = (self.index(a1), self.index(a2));
        let (lo, hi) = if i1 < i2 { (i1, i2) } else { (i2, i1) };
        let (left, rest) = self.split(r, lo);
        let (mid, right) = self.split(rest, hi - lo + 1);
        let (first_arc, inner) = self.split(mid, 1);
        let inner_len = self.size(inner);
        let (inner, last_arc) = self.split(inner, inner_len - 1);
        debug_assert!(first_arc == a1 || first_arc == a2);
        debug_assert!(last_arc == a1 || last_arc == a2);
        self.set_parent(inner, NIL);
        let outer = self.merge(left, right);
        self.set_parent(outer, NIL);
        for a in [a1, a2] {
            self.nodes[a as usize].flags = 0;
            self.free.push(a);
        }
    }

    pub fn ends(&self, x: u32) -> (u32, u32) {
        self.n(x).ends
    }

    pub fn set_flag(&mut self, x: u32, bit: u8, on: bool) {
        let node = &mut self.nodes[x as usize];
        let before = node.flags;
        if on {
            node.flags |= bit;
        } else {
            node.flags &= !bit;
        }
        if node.flags == before {
            return;
        }
        let mut cur = x;
        while cur != NIL {
            self.pull(cur);
            cur = self.n(cur).parent;
        }
    }

    /// Any node carrying `bit` in the tree rooted at `r`.
    pub fn find_flagged(&self, r: u32, bit: u8) -> Option<u32> {
        if self.n(r).agg & bit == 0 {
            return None;
        }
        let mut x = r;
        loop {
            let node = self.n(x);
            if node.flags & bit != 0 {
                return Some(x);
            }
            x = if node.left != NIL && self.n(node.left).agg & bit != 0 {
                node.left
            } else {
                node.right
            };
        }
    }

    /// All nodes carrying `bit` in the tree rooted at `r`.
    pub fn collect_flagged(&self, r: u32, bit: u8) -> Vec<u32> {
        let mut out = Vec::new();
        let mut stack = vec![r];
        while let Some(x) = stack.pop() {
            if x == NIL || self.n(x).agg & bit == 0 {
                continue;
            }
            let node = self.n(x);
            if node.flags & bit != 0 {
                out.push(x);
            }
            stack.push(node.left);
            stack.push(node.right);
        }
        out
    }

    /// Vertex ids in the tree rooted at `r`.
    pub fn collect_vertices(&self, r: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.n(r).verts as usize);
        let mut stack = vec![r];
        while let Some(x) = stack.pop() {
            if x == NIL || self.n(x).verts == 0 {
                continue;
            }
            let node = self.n(x);
            if node.ends.0 == node.ends.1 {
                out.push(node.ends.0);
            }
            stack.push(node.left);
            stack.push(node.right);
        }
        out
    }
}
