//! Canonical labelling by colour refinement and individualisation.
//!
//! The search individualises each vertex of the first non-singleton cell in
//! turn, refines to an equitable partition and recurses. Every discrete
//! partition is a labelling; the canonical form is the lexicographically
//! smallest relabelled adjacency. Leaves that reproduce the current best
//! form yield automorphisms, which prune sibling subtrees and give the
//! vertex orbits.

use crate::graph::{BitIter, Graph};

#[derive(Clone, Debug)]
pub struct CanonicalLabeling {
    /// `labels[v]` is the canonical position of vertex `v`.
    pub labels: Vec<usize>,
    /// The graph relabelled by `labels`; equal for isomorphic inputs.
    pub form: Graph,
    /// Smallest vertex of the automorphism orbit of each vertex.
    pub orbits: Vec<usize>,
    pub generators: Vec<Vec<usize>>,
}

impl CanonicalLabeling {
    pub fn has_nontrivial_automorphisms(&self) -> bool {
        !self.generators.is_empty()
    }

    pub fn same_orbit(&self, u: usize, v: usize) -> bool {
        self.orbits[u] == self.orbits[v]
    }
}

pub fn canonical_labeling(g: &Graph) -> CanonicalLabeling {
    let n = g.order();
    let mut search = Search {
        g,
        best: None,
        generators: Vec::new(),
        prefix: Vec::with_capacity(n),
    };
    let root = refine(g, vec![(0..n).collect()]);
    search.descend(root);
    let (labels, form) = search.best.expect("search visits at least one leaf");
    let mut uf = UnionFind::new(n);
    for gen in &search.generators {
        for (v, &w) in gen.iter().enumerate() {
            uf.union(v, w);
        }
    }
    let orbits = (0..n).map(|v| uf.min_of(v)).collect();
    CanonicalLabeling {
        labels,
        form: Graph::from_rows_unchecked(n, form),
        orbits,
        generators: search.generators,
    }
}

pub fn canonical_form(g: &Graph) -> Graph {
    canonical_labeling(g).form
}

pub fn are_isomorphic(a: &Graph, b: &Graph) -> bool {
    if a.order() != b.order() || a.edge_count() != b.edge_count() {
        return false;
    }
    let (mut da, mut db) = (a.degrees(), b.degrees());
    da.sort_unstable();
    db.sort_unstable();
    da == db && canonical_form(a) == canonical_form(b)
}

type Partition = Vec<Vec<usize>>;

struct Search<'a> {
    g: &'a Graph,
    best: Option<(Vec<usize>, Vec<u64>)>,
    generators: Vec<Vec<usize>>,
    prefix: Vec<usize>,
}

impl Search<'_> {
    fn descend(&mut self, cells: Partition) {
        let n = self.g.order();
        if cells.len() == n {
            self.leaf(&cells);
            return;
        }
        let target = cells
            .iter()
            .position(|c| c.len() > 1)
            .expect("non-discrete partition has a non-singleton cell");
        let mut explored: Vec<usize> = Vec::new();
        let mut seen_gens = usize::MAX;
        let mut uf = UnionFind::new(n);
        for &w in &cells[target] {
            if !explored.is_empty() {
                if seen_gens != self.generators.len() {
                    uf = self.stabiliser_orbits();
                    seen_gens = self.generators.len();
                }
                let rw = uf.find(w);
                if explored.iter().any(|&e| uf.find(e) == rw) {
                    continue;
                }
            }
            let mut next = Vec::with_capacity(cells.len() + 1);
            next.extend_from_slice(&cells[..target]);
            next.push(vec![w]);
            next.push(cells[target].iter().copied().filter(|&x| x != w).collect());
            next.extend_from_slice(&cells[target + 1..]);
            let next = refine(self.g, next);
            self.prefix.push(w);
            self.descend(next);
            self.prefix.pop();
            explored.push(w);
        }
    }

    /// Orbits of the group generated by the automorphisms found so far that
    /// fix every individualised vertex on the current path.
    fn stabiliser_orbits(&self) -> UnionFind {
        let mut uf = UnionFind::new(self.g.order());
        for gen in &self.generators {
            if self.prefix.iter().all(|&p| gen[p] == p) {
                for (v, &w) in gen.iter().enumerate() {
                    uf.union(v, w);
                }
            }
        }
        uf
    }

    fn leaf(&mut self, cells: &Partition) {
        let n = self.g.order();
        let mut labels = vec![0; n];
        for (pos, cell) in cells.iter().enumerate() {
            labels[cell[0]] = pos;
        }
        let mut form = vec![0u64; n];
        for v in 0..n {
            let mut r = 0u64;
            for u in BitIter(self.g.neighbors(v)) {
                r |= 1u64 << labels[u];
            }
            form[labels[v]] = r;
        }
        match &self.best {
            None => self.best = Some((labels, form)),
            Some((best_labels, best_form)) => match form.cmp(best_form) {
                std::cmp::Ordering::Less => self.best = Some((labels, form)),
                std::cmp::Ordering::Equal => {
                    // γ = best⁻¹ ∘ current
                    let mut at_pos = vec![0; n];
                    for (v, &p) in best_labels.iter().enumerate() {
                        at_pos[p] = v;
                    }
                    let gamma: Vec<usize> = labels.iter().map(|&p| at_pos[p]).collect();
                    if gamma.iter().enumerate().any(|(v, &w)| v != w) {
                        self.generators.push(gamma);
                    }
                }
                std::cmp::Ordering::Greater => {}
            },
        }
    }
}

/// Refines an ordered partition to the coarsest equitable partition below it.
/// Cells split by the count of neighbours in every current cell; split
/// pieces are ordered by that signature, so the result is invariant under
/// relabelling.
fn refine(g: &Graph, mut cells: Partition) -> Partition {
    let n = g.order();
    let mut sig = vec![0u16; n * n];
    loop {
        let k = cells.len();
        if k == n {
            return cells;
        }
        let masks: Vec<u64> = cells
            .iter()
            .map(|c| c.iter().fold(0u64, |m, &v| m | 1u64 << v))
            .collect();
        let mut next: Partition = Vec::with_capacity(n);
        for cell in &cells {
            if cell.len() == 1 {
                next.push(cell.clone());
                continue;
            }
            for &v in cell {
                let row = g.neighbors(v);
                for (c, &m) in masks.iter().enumerate() {
                    sig[v * n + c] = (row & m).count_ones() as u16;
                }
            }
            let mut sorted = cell.clone();
            sorted.sort_by(|&a, &b| sig[a * n..a * n + k].cmp(&sig[b * n..b * n + k]));
            let mut start = 0;
            for i in 1..=sorted.len() {
                if i == sorted.len()
                    || sig[sorted[i] * n..sorted[i] * n + k]
                        != sig[sorted[start] * n..sorted[start] * n + k]
                {
                    next.push(sorted[start..i].to_vec());
                    start = i;
                }
            }
        }
        let changed = next.len() != k;
        cells = next;
        if !changed {
            return cells;
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller vertex as root so `min_of` is a plain find
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    fn min_of(&mut self, v: usize) -> usize {
        self.find(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_star, generate_windmill};

    fn all_perms(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in all_perms(n - 1) {
            for pos in 0..n {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn form_is_invariant_under_relabelling() {
        let graphs = [
            Graph::from_edge_bits(4, &[1, 1, 0, 1, 1, 0]).unwrap(),
            Graph::cycle(6).unwrap(),
            Graph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]).unwrap(),
            generate_windmill(2).unwrap(),
        ];
        for g in graphs {
            let reference = canonical_form(&g);
            for p in all_perms(g.order()).iter().step_by(7) {
                assert_eq!(canonical_form(&g.permuted(p)), reference);
            }
        }
    }

    #[test]
    fn labels_map_graph_onto_form() {
        let g = Graph::from_edges(7, &[(0, 1), (1, 2), (2, 3), (3, 0), (3, 4), (4, 5), (4, 6)])
            .unwrap();
        let c = canonical_labeling(&g);
        assert_eq!(g.permuted(&c.labels), c.form);
    }

    #[test]
    fn orbit_examples() {
        let star = canonical_labeling(&generate_star(6).unwrap());
        assert!(star.same_orbit(1, 5));
        assert!(!star.same_orbit(0, 1));

        let p4 = canonical_labeling(&Graph::path(4).unwrap());
        assert!(p4.same_orbit(0, 3));
        assert!(p4.same_orbit(1, 2));
        assert!(!p4.same_orbit(0, 1));

        let c8 = canonical_labeling(&Graph::cycle(8).unwrap());
        assert!((0..8).all(|v| c8.orbits[v] == 0));

        // spider with legs of length 1, 2, 3 is asymmetric
        let spider = Graph::from_edges(7, &[(0, 1), (0, 2), (2, 3), (0, 4), (4, 5), (5, 6)])
            .unwrap();
        let c = canonical_labeling(&spider);
        assert!(!c.has_nontrivial_automorphisms());
        assert!((0..7).all(|v| c.orbits[v] == v));
    }

    #[test]
    fn highly_symmetric_graphs_stay_cheap() {
        let k12 = Graph::complete(12).unwrap();
        let c = canonical_labeling(&k12);
        assert_eq!(c.form, k12);
        assert!(c.orbits.iter().all(|&o| o == 0));
        let k20 = Graph::complete(20).unwrap();
        assert_eq!(canonical_form(&k20), k20);
    }

    #[test]
    fn distinguishes_non_isomorphic_regular_graphs() {
        // C6 versus two triangles: both 2-regular on six vertices
        let c6 = Graph::cycle(6).unwrap();
        let two_k3 =
            Graph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]).unwrap();
        assert!(!are_isomorphic(&c6, &two_k3));
        assert!(are_isomorphic(&c6, &c6.permuted(&[3, 1, 4, 0, 5, 2])));
    }
}
