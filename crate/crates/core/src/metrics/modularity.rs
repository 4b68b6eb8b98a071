//! Greedy agglomerative modularity maximisation.
//!
//! Starts from singletons and repeatedly merges the pair of adjacent
//! communities with the largest modularity gain. Gains are compared as exact
//! integers (scaled by 4m²), and ties go to the lowest community pair, where a
//! community is named by its lowest vertex.

use std::collections::BTreeMap;

use super::SimpleGraph;

/// Communities of the greedy partition, each sorted, ordered by lowest vertex.
pub fn greedy_partition(g: &SimpleGraph) -> Vec<Vec<usize>> {
    let n = g.node_count();
    let m = g.edge_count() as i64;
    let mut members: Vec<Option<Vec<usize>>> = (0..n).map(|v| Some(vec![v])).collect();
    if m == 0 {
        return members.into_iter().flatten().collect();
    }
    let mut degree: Vec<i64> = (0..n).map(|v| g.degree(v) as i64).collect();
    // links[c][d] = number of edges between communities c and d.
    let mut links: Vec<BTreeMap<usize, i64>> = (0..n)
        .map(|v| g.neighbors(v).map(|w| (w, 1)).collect())
        .collect();

    loop {
        let mut best: Option<(i64, usize, usize)> = None;
        for (c, row) in links.iter().enumerate() {
            for (&d, &w) in row.range(c + 1..) {
                let gain = 4 * m * w - 2 * degree[c] * degree[d];
                if best.is_none_or(|(b, _, _)| gain > b) {
                    best = Some((gain, c, d));
                }
            }
        }
        let Some((gain, c, d)) = best else { break };
        if gain <= 0 {
            break;
        }
        // Fold d into c.
        let row = std::mem::take(&mut links[d]);
        for (e, w) in row {
            links[e].remove(&d);
            if e != c {
                *links[c].entry(e).or_insert(0) += w;
                *links[e].entry(c).or_insert(0) += w;
            }
        }
        links[c].remove(&d);
        degree[c] += degree[d];
        degree[d] = 0;
        let moved = members[d].take().expect("live community");
        let target = members[c].as_mut().expect("live community");
        target.extend(moved);
        target.sort_unstable();
    }
    members.into_iter().flatten().collect()
}

/// Newman modularity Q of `partition`; 0 for an edgeless graph.
pub fn modularity(g: &SimpleGraph, partition: &[Vec<usize>]) -> f64 {
    let m = g.edge_count();
    if m == 0 {
        return 0.0;
    }
    let mut label = vec![usize::MAX; g.node_count()];
    for (i, part) in partition.iter().enumerate() {
        for &v in part {
            label[v] = i;
        }
    }
    let mut inside = vec![0usize; partition.len()];
    let mut degree = vec![0usize; partition.len()];
    for v in 0..g.node_count() {
        degree[label[v]] += g.degree(v);
        for w in g.neighbors(v) {
            if w > v && label[w] == label[v] {
                inside[label[v]] += 1;
            }
        }
    }
    let m = m as f64;
    inside
        .iter()
        .zip(&degree)
        .map(|(&l, &d)| l as f64 / m - (d as f64 / (2.0 * m)).powi(2))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_triangles_split_at_bridge() {
        let g =
            SimpleGraph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]);
        let p = greedy_partition(&g);
        assert_eq!(p, vec![vec![0, 1, 2], vec![3, 4, 5]]);
        assert!((modularity(&g, &p) - 5.0 / 14.0).abs() < 1e-15);
    }

    #[test]
    fn edgeless_graph() {
        let g = SimpleGraph::from_edges(3, []);
        assert_eq!(greedy_partition(&g), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(modularity(&g, &greedy_partition(&g)), 0.0);
    }

    #[test]
    fn single_community_is_zero() {
        let g = SimpleGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]);
        assert!(modularity(&g, &[vec![0, 1, 2]]).abs() < 1e-15);
    }
}
