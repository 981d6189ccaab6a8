//! Dense symmetric eigenvalues by cyclic Jacobi rotations, and the
//! Laplacian spectral radius.

use crate::error::{Error, Result};
use crate::graph::{BitIter, Graph};

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 50;

/// Square symmetric matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    order: usize,
    entries: Vec<f64>,
}

impl SymMatrix {
    pub fn new(order: usize, entries: Vec<f64>) -> Result<Self> {
        if order == 0 || entries.len() != order * order {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for order {order}, got {}",
                order * order,
                entries.len()
            )));
        }
        for i in 0..order {
            for j in i + 1..order {
                if entries[i * order + j] != entries[j * order + i] {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(SymMatrix { order, entries })
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut entries = vec![0.0; n * n];
        for (i, &d) in diag.iter().enumerate() {
            entries[i * n + i] = d;
        }
        SymMatrix::new(n, entries)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.order + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.order).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum()
    }

    /// Simultaneous row and column permutation: entry `(i, j)` moves to
    /// `(perm[i], perm[j])`.
    pub fn permuted(&self, perm: &[usize]) -> SymMatrix {
        let n = self.order;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[perm[i] * n + perm[j]] = self.get(i, j);
            }
        }
        SymMatrix { order: n, entries }
    }
}

/// `L = D − A`.
pub fn laplacian(g: &Graph) -> SymMatrix {
    let n = g.order();
    let mut entries = vec![0.0; n * n];
    for v in 0..n {
        entries[v * n + v] = g.degree(v) as f64;
        for u in BitIter(g.neighbors(v)) {
            entries[v * n + u] = -1.0;
        }
    }
    SymMatrix { order: n, entries }
}

/// All eigenvalues in non-decreasing order.
///
/// Row-cyclic Jacobi sweeps run until the off-diagonal Frobenius norm drops
/// below `tol · ‖M‖_F`; failing that within [`MAX_SWEEPS`] sweeps is an error.
pub fn sym_eigenvalues(m: &SymMatrix, tol: f64) -> Result<Vec<f64>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let n = m.order;
    let mut a = m.entries.clone();
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalFailure("matrix has non-finite entries".into()));
    }
    let threshold = tol * m.frobenius_norm_sq().sqrt();
    for _sweep in 0..=MAX_SWEEPS {
        let off = off_diagonal_norm(&a, n);
        if off <= threshold {
            let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
            eig.sort_by(f64::total_cmp);
            return Ok(eig);
        }
        if !off.is_finite() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, n, p, q);
            }
        }
    }
    Err(Error::NumericalFailure(format!(
        "Jacobi iteration did not converge within {MAX_SWEEPS} sweeps"
    )))
}

/// Largest Laplacian eigenvalue μ(G).
pub fn lap_spectral_radius(g: &Graph) -> Result<f64> {
    let eig = sym_eigenvalues(&laplacian(g), DEFAULT_TOLERANCE)?;
    Ok(*eig.last().expect("graphs have at least one vertex"))
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += a[i * n + j] * a[i * n + j];
        }
    }
    (2.0 * s).sqrt()
}

/// One Jacobi rotation zeroing `a[p][q]`, `p < q`.
#[inline]
fn rotate(a: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq == 0.0 {
        return;
    }
    let app = a[p * n + p];
    let aqq = a[q * n + q];
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    a[p * n + p] = app - t * apq;
    a[q * n + q] = aqq + t * apq;
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a[r * n + p];
        let arq = a[r * n + q];
        let new_rp = c * arp - s * arq;
        let new_rq = s * arp + c * arq;
        a[r * n + p] = new_rp;
        a[p * n + r] = new_rp;
        a[r * n + q] = new_rq;
        a[q * n + r] = new_rq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_star;

    fn assert_close(actual: &[f64], expected: &[f64], tol: f64) {
        assert_eq!(actual.len(), expected.len());
        for (a, e) in actual.iter().zip(expected) {
            assert!((a - e).abs() <= tol, "{actual:?} vs {expected:?}");
        }
    }

    #[test]
    fn laplacian_examples() {
        let k2 = laplacian(&Graph::complete(2).unwrap());
        assert_eq!(k2.entries, vec![1.0, -1.0, -1.0, 1.0]);
        let k3 = laplacian(&Graph::complete(3).unwrap());
        assert!((0..3).all(|i| k3.get(i, i) == 2.0));
        assert!((0..3).all(|i| (0..3).all(|j| i == j || k3.get(i, j) == -1.0)));
        let p3 = laplacian(&Graph::path(3).unwrap());
        assert_eq!(
            p3.entries,
            vec![1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]
        );
        for i in 0..3 {
            assert_eq!((0..3).map(|j| p3.get(i, j)).sum::<f64>(), 0.0);
        }
    }

    #[test]
    fn eigenvalue_examples() {
        let d = SymMatrix::from_diagonal(&[3.0, 2.0]).unwrap();
        assert_eq!(sym_eigenvalues(&d, DEFAULT_TOLERANCE).unwrap(), vec![2.0, 3.0]);
        let k3 = sym_eigenvalues(&laplacian(&Graph::complete(3).unwrap()), 1e-12).unwrap();
        assert_close(&k3, &[0.0, 3.0, 3.0], 1e-12);
        let p3 = sym_eigenvalues(&laplacian(&Graph::path(3).unwrap()), 1e-12).unwrap();
        assert_close(&p3, &[0.0, 1.0, 3.0], 1e-12);
    }

    #[test]
    fn spectral_radius_of_complete_graphs_and_stars() {
        for n in 2..=12 {
            let mu = lap_spectral_radius(&Graph::complete(n).unwrap()).unwrap();
            assert!((mu - n as f64).abs() < 1e-9);
        }
        for n in 3..=12 {
            let mu = lap_spectral_radius(&generate_star(n).unwrap()).unwrap();
            assert!((mu - n as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SymMatrix::new(2, vec![1.0, 2.0, 3.0, 1.0]).is_err());
        assert!(SymMatrix::new(2, vec![1.0; 3]).is_err());
        let m = SymMatrix::new(2, vec![f64::NAN, 0.0, 0.0, 1.0]).unwrap_or(SymMatrix {
            order: 2,
            entries: vec![f64::NAN, 0.0, 0.0, 1.0],
        });
        assert!(matches!(
            sym_eigenvalues(&m, 1e-12),
            Err(Error::NumericalFailure(_))
        ));
        let ok = SymMatrix::from_diagonal(&[1.0]).unwrap();
        assert!(sym_eigenvalues(&ok, 0.0).is_err());
    }

    #[test]
    fn zero_matrix_and_single_vertex() {
        let z = SymMatrix::new(3, vec![0.0; 9]).unwrap();
        assert_eq!(sym_eigenvalues(&z, 1e-12).unwrap(), vec![0.0; 3]);
        assert_eq!(lap_spectral_radius(&Graph::empty(1).unwrap()).unwrap(), 0.0);
    }
}
