//! Exhaustive generation of connected graphs up to isomorphism.
//!
//! Graphs grow one vertex at a time by canonical augmentation: a child
//! `C = P + v` is kept only when `v` lies in the automorphism orbit of the
//! canonical deletion vertex of `C`, so every isomorphism class is reached
//! from exactly one parent class. The deletion vertex is chosen among the
//! non-cut vertices, which keeps every ancestor connected, and removing a
//! vertex never raises a degree, so a maximum-degree limit carries over to
//! all ancestors.

use std::collections::HashSet;

use crate::canon::canonical_labeling;
use crate::error::{Error, Result};
use crate::graph::{low_mask, BitIter, Graph};

/// Largest order accepted with a maximum degree of at most 4.
pub const MAX_ORDER_SUBQUARTIC: usize = 12;
/// Largest order accepted without a (small) degree limit.
pub const MAX_ORDER_UNBOUNDED: usize = 10;

/// Streams the connected graphs of order `n` with maximum degree at most
/// `max_degree` (`None` for no limit), one per isomorphism class.
pub fn enumerate_connected(n: usize, max_degree: Option<usize>) -> Result<ConnectedGraphs> {
    let limit = max_degree.unwrap_or(n.saturating_sub(1)).min(n.saturating_sub(1));
    let cap = if limit <= 4 {
        MAX_ORDER_SUBQUARTIC
    } else {
        MAX_ORDER_UNBOUNDED
    };
    if n < 2 || n > cap {
        return Err(Error::InvalidInput(format!(
            "built-in enumeration supports 2 ≤ n ≤ {cap} for maximum degree {}, got n = {n}; \
             feed larger families as a graph6 stream",
            max_degree.map_or("unbounded".to_string(), |d| d.to_string())
        )));
    }
    if limit == 0 {
        return Err(Error::InvalidInput(
            "maximum degree 0 admits no connected graph with n ≥ 2".into(),
        ));
    }
    let root = Graph::empty(1)?;
    Ok(ConnectedGraphs {
        target: n,
        max_degree: limit,
        stack: vec![Frame::new(root, limit)],
    })
}

pub struct ConnectedGraphs {
    target: usize,
    max_degree: usize,
    stack: Vec<Frame>,
}

struct Frame {
    parent: Graph,
    eligible: u64,
    subset: u64,
    seen: Option<HashSet<Graph>>,
}

impl Frame {
    fn new(parent: Graph, max_degree: usize) -> Frame {
        let n = parent.order();
        let eligible = (0..n)
            .filter(|&v| parent.degree(v) < max_degree)
            .fold(0u64, |m, v| m | 1u64 << v);
        // isomorphic children from symmetric subsets are removed by form
        let seen = (n > 1 && canonical_labeling(&parent).has_nontrivial_automorphisms())
            .then(HashSet::new);
        Frame {
            parent,
            eligible,
            subset: 0,
            seen,
        }
    }
}

impl Iterator for ConnectedGraphs {
    type Item = Graph;

    fn next(&mut self) -> Option<Graph> {
        loop {
            let frame = self.stack.last_mut()?;
            frame.subset = frame.subset.wrapping_sub(frame.eligible) & frame.eligible;
            if frame.subset == 0 {
                self.stack.pop();
                continue;
            }
            if frame.subset.count_ones() as usize > self.max_degree {
                continue;
            }
            let child = frame.parent.with_new_vertex(frame.subset);
            let Some(form) = accept(&child) else {
                continue;
            };
            if let Some(seen) = frame.seen.as_mut() {
                let form = form.unwrap_or_else(|| canonical_labeling(&child).form);
                if !seen.insert(form) {
                    continue;
                }
            }
            if child.order() == self.target {
                return Some(child);
            }
            let next = Frame::new(child, self.max_degree);
            self.stack.push(next);
        }
    }
}

/// Canonical-augmentation test for the last vertex of `child`.
/// Returns `None` to reject, or `Some(form)` with the canonical form when it
/// had to be computed.
fn accept(child: &Graph) -> Option<Option<Graph>> {
    let n = child.order();
    let v = n - 1;
    let keys: Vec<(u32, u32, u32)> = (0..n).map(|w| vertex_key(child, w)).collect();
    let key_v = keys[v];
    // the new vertex is never a cut vertex: removing it gives back the parent
    for w in 0..v {
        if keys[w] < key_v && !is_cut_vertex(child, w) {
            return None;
        }
    }
    let candidates: Vec<usize> = (0..n)
        .filter(|&w| keys[w] == key_v && (w == v || !is_cut_vertex(child, w)))
        .collect();
    if candidates.len() == 1 {
        return Some(None);
    }
    let canon = canonical_labeling(child);
    let chosen = *candidates
        .iter()
        .max_by_key(|&&w| canon.labels[w])
        .expect("candidates contain v");
    canon.same_orbit(v, chosen).then_some(Some(canon.form))
}

/// Isomorphism-invariant vertex key: degree, neighbour degree sum and the
/// number of edges inside the neighbourhood.
fn vertex_key(g: &Graph, w: usize) -> (u32, u32, u32) {
    let nbrs = g.neighbors(w);
    let mut degree_sum = 0;
    let mut inside = 0;
    for u in BitIter(nbrs) {
        let r = g.neighbors(u);
        degree_sum += r.count_ones();
        inside += (r & nbrs).count_ones();
    }
    (nbrs.count_ones(), degree_sum, inside / 2)
}

fn is_cut_vertex(g: &Graph, w: usize) -> bool {
    let n = g.order();
    let rest = low_mask(n) & !(1u64 << w);
    if rest == 0 {
        return false;
    }
    let start = rest.trailing_zeros() as usize;
    let mut reached = 1u64 << start;
    let mut frontier = reached;
    while frontier != 0 {
        let mut next = 0u64;
        for u in BitIter(frontier) {
            next |= g.neighbors(u);
        }
        frontier = next & rest & !reached;
        reached |= frontier;
    }
    reached != rest
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::canonical_form;

    /// Independent oracle: all labelled graphs, connected filter, dedup by
    /// the minimum edge-bit string over all vertex permutations.
    fn brute_force_count(n: usize, max_degree: usize) -> usize {
        let pairs = crate::graph::pair_count(n);
        let perms = permutations(n);
        let mut classes = HashSet::new();
        for mask in 0u64..(1 << pairs) {
            let bits: Vec<u8> = (0..pairs).map(|k| (mask >> k & 1) as u8).collect();
            let g = Graph::from_edge_bits(n, &bits).unwrap();
            if !g.is_connected() || g.max_degree() > max_degree {
                continue;
            }
            let key = perms
                .iter()
                .map(|p| g.permuted(p).to_edge_bits())
                .min()
                .unwrap();
            classes.insert(key);
        }
        classes.len()
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..n {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn three_vertices() {
        let graphs: Vec<_> = enumerate_connected(3, Some(2)).unwrap().collect();
        assert_eq!(graphs.len(), 2);
        let mut edge_counts: Vec<_> = graphs.iter().map(|g| g.edge_count()).collect();
        edge_counts.sort();
        assert_eq!(edge_counts, vec![2, 3]);
    }

    #[test]
    fn matches_brute_force_on_small_orders() {
        for n in 2..=5 {
            for d in 1..n {
                let ours = enumerate_connected(n, Some(d)).unwrap().count();
                assert_eq!(ours, brute_force_count(n, d), "n={n} max_degree={d}");
            }
        }
        assert_eq!(enumerate_connected(4, Some(3)).unwrap().count(), 6);
        assert_eq!(enumerate_connected(5, None).unwrap().count(), 21);
    }

    #[test]
    fn output_is_connected_bounded_and_duplicate_free() {
        for (n, d) in [(6, None), (7, Some(3)), (8, Some(2))] {
            let mut forms = HashSet::new();
            for g in enumerate_connected(n, d).unwrap() {
                assert!(g.is_well_formed());
                assert!(g.is_connected());
                assert!(g.max_degree() <= d.unwrap_or(n));
                assert!(forms.insert(canonical_form(&g)));
            }
        }
    }

    #[test]
    fn range_checks() {
        assert!(enumerate_connected(1, None).is_err());
        assert!(enumerate_connected(13, Some(4)).is_err());
        assert!(enumerate_connected(11, None).is_err());
        assert!(enumerate_connected(11, Some(5)).is_err());
        assert!(enumerate_connected(12, Some(4)).is_ok());
        assert!(enumerate_connected(3, Some(0)).is_err());
        // paths and cycles are the only connected graphs with maximum degree 2
        assert_eq!(enumerate_connected(9, Some(2)).unwrap().count(), 2);
    }
}
