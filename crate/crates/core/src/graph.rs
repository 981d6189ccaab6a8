//! Simple undirected graphs on at most 64 vertices.
//!
//! Each vertex owns one `u64` row of the adjacency matrix, so neighbourhood
//! queries are single word operations. Two orderings of the upper triangle
//! are used in this crate:
//!
//! * **row-wise** `(0,1),(0,2),…,(0,n−1),(1,2),…,(n−2,n−1)`: the order in
//!   which the construction environment issues its actions
//!   ([`Graph::from_edge_bits`], [`Graph::to_edge_bits`]);
//! * **column-wise** `(0,1),(0,2),(1,2),(0,3),…`: the graph6 order, handled
//!   in [`crate::graph6`].

use std::fmt;

use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 64;

/// Number of unordered vertex pairs, `n(n−1)/2`.
#[inline]
pub const fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Row-wise index of the pair `(i, j)`, `i < j < n`.
#[inline]
pub fn row_wise_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    rows: Vec<u64>,
}

impl Graph {
    /// Edgeless graph on `n` vertices, `1 ≤ n ≤ 64`.
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_ORDER {
            return Err(Error::InvalidInput(format!(
                "graph order must be in 1..={MAX_ORDER}, got {n}"
            )));
        }
        Ok(Graph {
            n,
            rows: vec![0; n],
        })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::empty(n)?;
        for &(u, v) in edges {
            if u >= n || v >= n || u == v {
                return Err(Error::InvalidInput(format!(
                    "invalid edge ({u}, {v}) for order {n}"
                )));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    /// Builds a graph from its upper triangle listed in row-wise order.
    pub fn from_edge_bits(n: usize, bits: &[u8]) -> Result<Self> {
        let mut g = Graph::empty(n)?;
        if bits.len() != pair_count(n) {
            return Err(Error::InvalidInput(format!(
                "expected {} edge bits for order {n}, got {}",
                pair_count(n),
                bits.len()
            )));
        }
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                match bits[k] {
                    0 => {}
                    1 => g.add_edge(i, j),
                    b => {
                        return Err(Error::InvalidInput(format!(
                            "edge bit {k} is {b}, expected 0 or 1"
                        )))
                    }
                }
                k += 1;
            }
        }
        Ok(g)
    }

    /// Upper triangle in row-wise order; inverse of [`Graph::from_edge_bits`].
    pub fn to_edge_bits(&self) -> Vec<u8> {
        let mut bits = Vec::with_capacity(pair_count(self.n));
        for i in 0..self.n {
            for j in i + 1..self.n {
                bits.push(self.has_edge(i, j) as u8);
            }
        }
        bits
    }

    /// Complete graph `K_n`.
    pub fn complete(n: usize) -> Result<Self> {
        let mut g = Graph::empty(n)?;
        let full = low_mask(n);
        for v in 0..n {
            g.rows[v] = full & !(1u64 << v);
        }
        Ok(g)
    }

    /// Cycle `C_n`, `n ≥ 3`.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInput(format!("cycle needs n ≥ 3, got {n}")));
        }
        let mut g = Graph::empty(n)?;
        for v in 0..n {
            g.add_edge(v, (v + 1) % n);
        }
        Ok(g)
    }

    /// Path `P_n` on vertices `0−1−…−(n−1)`.
    pub fn path(n: usize) -> Result<Self> {
        let mut g = Graph::empty(n)?;
        for v in 1..n {
            g.add_edge(v - 1, v);
        }
        Ok(g)
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.rows[u] >> v & 1 == 1
    }

    /// Neighbourhood of `v` as a bit set.
    #[inline]
    pub fn neighbors(&self, v: usize) -> u64 {
        self.rows[v]
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.rows[v].count_ones() as usize
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum::<usize>() / 2
    }

    /// Unordered edges `(i, j)` with `i < j`, in row-wise order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            let upper = self.rows[i] & !low_mask(i + 1);
            BitIter(upper).map(move |j| (i, j))
        })
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.degree(v)).collect()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Average degree of the neighbours of each vertex, `m_v = Σ_{u∼v} d_u / d_v`.
    ///
    /// Fails on graphs with an isolated vertex, where `m_v` would be `0/0`.
    pub fn average_degrees(&self) -> Result<Vec<f64>> {
        let deg = self.degrees();
        (0..self.n)
            .map(|v| {
                if deg[v] == 0 {
                    return Err(Error::UndefinedInvariant(format!(
                        "vertex {v} is isolated, average neighbour degree is 0/0"
                    )));
                }
                let sum: usize = BitIter(self.rows[v]).map(|u| deg[u]).sum();
                Ok(sum as f64 / deg[v] as f64)
            })
            .collect()
    }

    pub fn degree_profile(&self) -> Result<DegreeProfile> {
        let avg = self.average_degrees()?;
        Ok(DegreeProfile {
            degrees: self.degrees().into_iter().map(|d| d as f64).collect(),
            average_degrees: avg,
        })
    }

    pub fn num_components(&self) -> usize {
        let mut unseen = low_mask(self.n);
        let mut count = 0;
        while unseen != 0 {
            count += 1;
            let start = unseen.trailing_zeros() as usize;
            let mut frontier = 1u64 << start;
            unseen &= !frontier;
            while frontier != 0 {
                let mut next = 0u64;
                for v in BitIter(frontier) {
                    next |= self.rows[v];
                }
                frontier = next & unseen;
                unseen &= !frontier;
            }
        }
        count
    }

    pub fn is_connected(&self) -> bool {
        self.num_components() == 1
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Graph {
        assert_eq!(perm.len(), self.n);
        let mut rows = vec![0u64; self.n];
        for v in 0..self.n {
            let mut r = 0u64;
            for u in BitIter(self.rows[v]) {
                r |= 1u64 << perm[u];
            }
            rows[perm[v]] = r;
        }
        Graph { n: self.n, rows }
    }

    /// Adds a new vertex `n` adjacent to the vertices in `nbrs`.
    pub(crate) fn with_new_vertex(&self, nbrs: u64) -> Graph {
        let n = self.n;
        debug_assert!(n < MAX_ORDER && nbrs & !low_mask(n) == 0);
        let mut rows = Vec::with_capacity(n + 1);
        rows.extend(
            self.rows
                .iter()
                .enumerate()
                .map(|(v, &r)| r | (nbrs >> v & 1) << n),
        );
        rows.push(nbrs);
        Graph { n: n + 1, rows }
    }

    pub(crate) fn from_rows_unchecked(n: usize, rows: Vec<u64>) -> Graph {
        debug_assert_eq!(rows.len(), n);
        let g = Graph { n, rows };
        debug_assert!(g.is_well_formed());
        g
    }

    pub(crate) fn add_edge(&mut self, u: usize, v: usize) {
        self.rows[u] |= 1u64 << v;
        self.rows[v] |= 1u64 << u;
    }

    /// Symmetric adjacency with an empty diagonal and no bits beyond `n`.
    pub fn is_well_formed(&self) -> bool {
        let outside = !low_mask(self.n);
        (0..self.n).all(|v| {
            let r = self.rows[v];
            r >> v & 1 == 0
                && r & outside == 0
                && BitIter(r).all(|u| self.rows[u] >> v & 1 == 1)
        })
    }

    /// Graphviz rendering; isolated vertices are listed too.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph G {\n");
        for v in 0..self.n {
            s.push_str(&format!("  {v};\n"));
        }
        for (i, j) in self.edges() {
            s.push_str(&format!("  {i} -- {j};\n"));
        }
        s.push_str("}\n");
        s
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges=[", self.n)?;
        for (k, (i, j)) in self.edges().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{i}-{j}")?;
        }
        f.write_str("])")
    }
}

/// Degrees and average neighbour degrees of every vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeProfile {
    pub degrees: Vec<f64>,
    pub average_degrees: Vec<f64>,
}

/// Star `K_{1,n−1}` with centre 0.
pub fn generate_star(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("star needs n ≥ 2, got {n}")));
    }
    let mut g = Graph::empty(n)?;
    for v in 1..n {
        g.add_edge(0, v);
    }
    Ok(g)
}

/// Windmill (friendship graph): `k` triangles sharing vertex 0, order `2k+1`.
pub fn generate_windmill(k: usize) -> Result<Graph> {
    if k == 0 || 2 * k + 1 > MAX_ORDER {
        return Err(Error::InvalidInput(format!(
            "windmill needs 1 ≤ k ≤ {}, got {k}",
            (MAX_ORDER - 1) / 2
        )));
    }
    let mut g = Graph::empty(2 * k + 1)?;
    for t in 0..k {
        let (a, b) = (2 * t + 1, 2 * t + 2);
        g.add_edge(0, a);
        g.add_edge(0, b);
        g.add_edge(a, b);
    }
    Ok(g)
}

#[inline]
pub(crate) fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Iterates the set bits of a word, lowest first.
#[derive(Clone, Copy)]
pub(crate) struct BitIter(pub u64);

impl Iterator for BitIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(b)
    }
}
