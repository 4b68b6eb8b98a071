use std::collections::HashSet;

use super::Connectivity;

/// Union-find over the current edge set, rebuilt from scratch after any deletion.
///
/// Insertions are O(α(n)); the first query after a deletion pays O(n + m).
#[derive(Debug, Clone)]
pub struct RebuildUnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
    edges: HashSet<(usize, usize)>,
    dirty: bool,
}

impl RebuildUnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }

    fn refresh(&mut self) {
        if !self.dirty {
            return;
        }
        for (i, p) in self.parent.iter_mut().enumerate() {
            *p = i;
        }
        self.rank.fill(0);
        let edges: Vec<_> = self.edges.iter().copied().collect();
        for (a, b) in edges {
            self.union(a, b);
        }
        self.dirty = false;
    }
}

impl Connectivity for RebuildUnionFind {
    fn with_capacity(n: usize) -> Self {
        RebuildUnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
            edges: HashSet::new(),
            dirty: false,
        }
    }

    fn capacity(&self) -> usize {
        self.parent.len()
    }

    fn insert_edge(&mut self, a: usize, b: usize) {
        self.edges.insert((a.min(b), a.max(b)));
        if !self.dirty {
            self.union(a, b);
        }
    }

    fn delete_edge(&mut self, a: usize, b: usize) {
        if self.edges.remove(&(a.min(b), a.max(b))) {
            self.dirty = true;
        }
    }

    fn connected(&mut self, a: usize, b: usize) -> bool {
        self.refresh();
        self.find(a) == self.find(b)
    }

    fn component_key(&mut self, a: usize) -> usize {
        self.refresh();
        self.find(a)
    }

    fn component_members(&mut self, a: usize) -> Vec<usize> {
        self.refresh();
        let root = self.find(a);
        (0..self.parent.len())
            .filter(|&v| self.find(v) == root)
            .collect()
    }
}
