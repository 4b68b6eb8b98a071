//! Holm–de Lichtenberg–Thorup fully dynamic connectivity.
//!
//! Every edge carries a level. `forests[i]` spans the tree edges of level
//! `>= i`; a tree at level `i` has at most `n / 2^i` vertices. Deleting a tree
//! edge searches for a replacement from its level downwards, pushing the
//! smaller side's edges one level up as they are inspected, which bounds the
//! amortized cost at O(log² n) per update.

use std::collections::{HashMap, HashSet};

use super::ett::{EulerForest, NONTREE, TREE};
use super::Connectivity;

#[derive(Debug, Clone)]
struct EdgeRec {
    level: usize,
    /// Arc pairs for levels `0..=level` when this is a tree edge; empty otherwise.
    arcs: Vec<(u32, u32)>,
}

impl EdgeRec {
    fn is_tree(&self) -> bool {
        !self.arcs.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct HdtConnectivity {
    n: usize,
    forests: Vec<EulerForest>,
    /// `nontree[level][v]` = non-tree neighbours of `v` at `level`.
    nontree: Vec<HashMap<u32, HashSet<u32>>>,
    edges: HashMap<(u32, u32), EdgeRec>,
}

fn key(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl HdtConnectivity {
    fn ensure_level(&mut self, level: usize) {
        while self.forests.len() <= level {
            let seed = 0x5eed_0000 + self.forests.len() as u64;
            self.forests.push(EulerForest::new(self.n, seed));
            self.nontree.push(HashMap::new());
        }
    }

    fn add_nontree(&mut self, level: usize, a: u32, b: u32) {
        self.ensure_level(level);
        for (x, y) in [(a, b), (b, a)] {
            let set = self.nontree[level].entry(x).or_default();
            set.insert(y);
            if set.len() == 1 {
                self.forests[level].set_flag(x, NONTREE, true);
            }
        }
    }

    fn remove_nontree(&mut self, level: usize, a: u32, b: u32) {
        for (x, y) in [(a, b), (b, a)] {
            let now_empty = match self.nontree[level].get_mut(&x) {
                Some(set) => {
                    set.remove(&y);
                    set.is_empty()
                }
                None => false,
            };
            if now_empty {
                self.nontree[level].remove(&x);
                self.forests[level].set_flag(x, NONTREE, false);
            }
        }
    }

    /// Link `(a, b)` as a tree edge of `level` into forests `0..=level`.
    fn link_tree(&mut self, a: u32, b: u32, level: usize) -> Vec<(u32, u32)> {
        self.ensure_level(level);
        let arcs: Vec<(u32, u32)> = (0..=level).map(|i| self.forests[i].link(a, b)).collect();
        self.forests[level].set_flag(arcs[level].0, TREE, true);
        arcs
    }

    /// Look for a replacement edge at `level` after a tree edge between `u`
    /// and `v` was cut from forests `0..=level`.
    fn replace(&mut self, u: u32, v: u32, level: usize) -> Option<(u32, u32)> {
        let (ru, rv) = (self.forests[level].root(u), self.forests[level].root(v));
        let small =
            if self.forests[level].tree_vertices(ru) <= self.forests[level].tree_vertices(rv) {
                ru
            } else {
                rv
            };

        // Push the small side's level-`level` tree edges one level up.
        let promoted = self.forests[level].collect_flagged(small, TREE);
        if !promoted.is_empty() {
            self.ensure_level(level + 1);
        }
        for arc in promoted {
            let (a, b) = self.forests[level].ends(arc);
            self.forests[level].set_flag(arc, TREE, false);
            let up = self.forests[level + 1].link(a, b);
            self.forests[level + 1].set_flag(up.0, TREE, true);
            let rec = self
                .edges
                .get_mut(&key(a, b))
                .expect("tree arc has a record");
            rec.level = level + 1;
            rec.arcs.push(up);
        }

        // Scan the small side's non-tree edges at this level.
        while let Some(x) = self.forests[level].find_flagged(small, NONTREE) {
            let neighbours: Vec<u32> = self.nontree[level][&x].iter().copied().collect();
            for y in neighbours {
                self.remove_nontree(level, x, y);
                if self.forests[level].root(y) != small {
                    return Some((x, y));
                }
                self.edges.get_mut(&key(x, y)).expect("edge record").level = level + 1;
                self.add_nontree(level + 1, x, y);
            }
        }
        None
    }
}

impl Connectivity for HdtConnectivity {
    fn with_capacity(n: usize) -> Self {
        let mut s = HdtConnectivity {
            n,
            forests: Vec::new(),
            nontree: Vec::new(),
            edges: HashMap::new(),
        };
        s.ensure_level(0);
        s
    }

    fn capacity(&self) -> usize {
        self.n
    }

    fn insert_edge(&mut self, a: usize, b: usize) {
        let (a, b) = (a as u32, b as u32);
        let rec = if self.forests[0].connected(a, b) {
            self.add_nontree(0, a, b);
            EdgeRec {
                level: 0,
                arcs: Vec::new(),
            }
        } else {
            EdgeRec {
                level: 0,
                arcs: self.link_tree(a, b, 0),
            }
        };
        self.edges.insert(key(a, b), rec);
    }

    fn delete_edge(&mut self, a: usize, b: usize) {
        let (a, b) = (a as u32, b as u32);
        let Some(rec) = self.edges.remove(&key(a, b)) else {
            return;
        };
        if !rec.is_tree() {
            self.remove_nontree(rec.level, a, b);
            return;
        }
        for (i, &(x, y)) in rec.arcs.iter().enumerate() {
            self.forests[i].cut(x, y);
        }
        for level in (0..=rec.level).rev() {
            if let Some((x, y)) = self.replace(a, b, level) {
                let arcs = self.link_tree(x, y, level);
                let r = self.edges.get_mut(&key(x, y)).expect("edge record");
                r.level = level;
                r.arcs = arcs;
                return;
            }
        }
    }

    fn connected(&mut self, a: usize, b: usize) -> bool {
        self.forests[0].connected(a as u32, b as u32)
    }

    fn component_key(&mut self, a: usize) -> usize {
        self.forests[0].root(a as u32) as usize
    }

    fn component_members(&mut self, a: usize) -> Vec<usize> {
        let r = self.forests[0].root(a as u32);
        self.forests[0]
            .collect_vertices(r)
            .into_iter()
            .map(|v| v as usize)
            .collect()
    }
}
