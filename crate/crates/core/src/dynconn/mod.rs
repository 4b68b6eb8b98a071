//! Dynamic graph connectivity over the trajectories active at the current step.
//!
//! [`StepGraph`] owns the node and edge sets and enforces the update contract;
//! the [`Connectivity`] backend answers component queries. The default backend
//! is [`HdtConnectivity`]; [`RebuildUnionFind`] is the simple fallback.

mod ett;
mod hdt;
mod rebuild;

use std::collections::{BTreeSet, HashMap};

pub use hdt::HdtConnectivity;
pub use rebuild::RebuildUnionFind;

use crate::error::{Error, Result};

/// Connectivity engine over dense node indices `0..capacity`.
///
/// Callers guarantee edge endpoints are distinct and in range, never insert an
/// existing edge and never delete a missing one; [`StepGraph`] checks this.
pub trait Connectivity {
    fn with_capacity(n: usize) -> Self;
    fn capacity(&self) -> usize;
    fn insert_edge(&mut self, a: usize, b: usize);
    fn delete_edge(&mut self, a: usize, b: usize);
    fn connected(&mut self, a: usize, b: usize) -> bool;
    /// Identifier of `a`'s component, stable until the next mutation.
    fn component_key(&mut self, a: usize) -> usize;
    fn component_members(&mut self, a: usize) -> Vec<usize>;
}

/// The graph of directly ε-connected active trajectories at one step.
#[derive(Debug, Clone)]
pub struct StepGraph<C: Connectivity = HdtConnectivity> {
    present: Vec<bool>,
    adjacency: Vec<BTreeSet<usize>>,
    n_nodes: usize,
    n_edges: usize,
    conn: C,
}

impl<C: Connectivity> StepGraph<C> {
    pub fn with_capacity(n: usize) -> Self {
        StepGraph {
            present: vec![false; n],
            adjacency: vec![BTreeSet::new(); n],
            n_nodes: 0,
            n_edges: 0,
            conn: C::with_capacity(n),
        }
    }

    pub fn capacity(&self) -> usize {
        self.present.len()
    }

    pub fn node_count(&self) -> usize {
        self.n_nodes
    }

    pub fn edge_count(&self) -> usize {
        self.n_edges
    }

    pub fn contains_node(&self, id: usize) -> bool {
        self.present.get(id).copied().unwrap_or(false)
    }

    pub fn contains_edge(&self, a: usize, b: usize) -> bool {
        self.contains_node(a) && self.adjacency[a].contains(&b)
    }

    fn require_node(&self, id: usize) -> Result<()> {
        if self.contains_node(id) {
            Ok(())
        } else {
            Err(Error::contract(format!("node {id} is not present")))
        }
    }

    pub fn insert_node(&mut self, id: usize) -> Result<()> {
        if id >= self.capacity() {
            return Err(Error::contract(format!(
                "node {id} exceeds capacity {}",
                self.capacity()
            )));
        }
        if self.present[id] {
            return Err(Error::contract(format!("node {id} is already present")));
        }
        self.present[id] = true;
        self.n_nodes += 1;
        Ok(())
    }

    /// Remove a node together with its incident edges.
    pub fn delete_node(&mut self, id: usize) -> Result<()> {
        self.require_node(id)?;
        let neighbours: Vec<usize> = self.adjacency[id].iter().copied().collect();
        for other in neighbours {
            self.delete_edge(id, other)?;
        }
        self.present[id] = false;
        self.n_nodes -= 1;
        Ok(())
    }

    pub fn insert_edge(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_pair(a, b)?;
        if self.adjacency[a].contains(&b) {
            return Err(Error::contract(format!(
                "edge ({a}, {b}) is already present"
            )));
        }
        self.adjacency[a].insert(b);
        self.adjacency[b].insert(a);
        self.n_edges += 1;
        self.conn.insert_edge(a, b);
        Ok(())
    }

    pub fn delete_edge(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_pair(a, b)?;
        if !self.adjacency[a].remove(&b) {
            return Err(Error::contract(format!("edge ({a}, {b}) is not present")));
        }
        self.adjacency[b].remove(&a);
        self.n_edges -= 1;
        self.conn.delete_edge(a, b);
        Ok(())
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        if a == b {
            return Err(Error::contract(format!("self-loop on node {a}")));
        }
        self.require_node(a)?;
        self.require_node(b)
    }

    pub fn connected(&mut self, a: usize, b: usize) -> Result<bool> {
        self.require_node(a)?;
        self.require_node(b)?;
        Ok(self.conn.connected(a, b))
    }

    /// Component identifier of `id`, stable until the next mutation.
    pub fn component_key(&mut self, id: usize) -> Result<usize> {
        self.require_node(id)?;
        Ok(self.conn.component_key(id))
    }

    /// Sorted members of the component containing `id`.
    pub fn component_of(&mut self, id: usize) -> Result<Vec<usize>> {
        self.require_node(id)?;
        let mut members: Vec<usize> = self
            .conn
            .component_members(id)
            .into_iter()
            .filter(|&v| self.present[v])
            .collect();
        members.sort_unstable();
        Ok(members)
    }

    /// Connected-component partition; each part sorted, parts ordered by minimum id.
    pub fn components(&mut self) -> Vec<Vec<usize>> {
        let mut by_key: HashMap<usize, Vec<usize>> = HashMap::new();
        for id in 0..self.present.len() {
            if self.present[id] {
                by_key
                    .entry(self.conn.component_key(id))
                    .or_default()
                    .push(id);
            }
        }
        let mut parts: Vec<Vec<usize>> = by_key.into_values().collect();
        // Ids were visited in ascending order, so every part is already sorted.
        parts.sort_unstable_by_key(|p| p[0]);
        parts
    }

    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.present.len()).filter(|&i| self.present[i])
    }

    /// Sorted `(low, high)` edge list.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.nodes()
            .flat_map(|a| {
                self.adjacency[a]
                    .iter()
                    .copied()
                    .filter(move |&b| b > a)
                    .map(move |b| (a, b))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph<C: Connectivity>(n: usize, nodes: &[usize], edges: &[(usize, usize)]) -> StepGraph<C> {
        let mut g = StepGraph::<C>::with_capacity(n);
        for &v in nodes {
            g.insert_node(v).unwrap();
        }
        for &(a, b) in edges {
            g.insert_edge(a, b).unwrap();
        }
        g
    }

    fn examples<C: Connectivity>() {
        let mut g = graph::<C>(3, &[0, 1, 2], &[]);
        assert_eq!(g.components(), vec![vec![0], vec![1], vec![2]]);

        let mut g = graph::<C>(3, &[0, 1, 2], &[(0, 1), (1, 2)]);
        assert_eq!(g.components(), vec![vec![0, 1, 2]]);
        g.delete_edge(1, 2).unwrap();
        assert_eq!(g.components(), vec![vec![0, 1], vec![2]]);

        let mut g = graph::<C>(3, &[0, 1, 2], &[(0, 1), (1, 2)]);
        g.delete_node(1).unwrap();
        assert_eq!(g.components(), vec![vec![0], vec![2]]);
        assert_eq!(g.edge_count(), 0);

        let mut g = graph::<C>(3, &[0, 1, 2], &[(0, 1), (1, 2), (0, 2)]);
        g.delete_edge(0, 1).unwrap();
        assert_eq!(g.components(), vec![vec![0, 1, 2]]);

        let mut g = graph::<C>(4, &[], &[]);
        assert!(g.components().is_empty());

        let mut g = graph::<C>(4, &[0, 1, 2, 3], &[(0, 1), (0, 2), (0, 3)]);
        assert_eq!(g.components(), vec![vec![0, 1, 2, 3]]);
        assert_eq!(g.component_of(2).unwrap(), vec![0, 1, 2, 3]);

        let mut g = graph::<C>(4, &[0, 1], &[(0, 1)]);
        let before = (g.edges(), g.components());
        g.insert_node(3).unwrap();
        g.delete_node(3).unwrap();
        assert_eq!((g.edges(), g.components()), before);
    }

    #[test]
    fn examples_hdt() {
        examples::<HdtConnectivity>();
    }

    #[test]
    fn examples_rebuild() {
        examples::<RebuildUnionFind>();
    }

    #[test]
    fn contract_errors() {
        let mut g = graph::<HdtConnectivity>(3, &[0, 1], &[(0, 1)]);
        assert!(matches!(g.insert_node(0), Err(Error::Contract(m)) if m.contains('0')));
        assert!(g.insert_node(3).is_err());
        assert!(g.delete_node(2).is_err());
        assert!(g.insert_edge(0, 1).is_err());
        assert!(g.insert_edge(0, 0).is_err());
        assert!(g.insert_edge(0, 2).is_err());
        assert!(g.delete_edge(1, 0).is_ok());
        assert!(g.delete_edge(0, 1).is_err());
        assert!(g.component_of(2).is_err());
    }
}
