//! Complex Schur form with eigenvalue reordering.

use nalgebra::{Complex, DMatrix};

use crate::error::SolverError;

pub type C64 = Complex<f64>;

/// `a = q t q^H` with `t` upper triangular.
#[derive(Debug, Clone)]
pub struct ComplexSchur {
    pub q: DMatrix<C64>,
    pub t: DMatrix<C64>,
}

impl ComplexSchur {
    pub fn new(a: &DMatrix<f64>) -> Result<Self, SolverError> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(SolverError::DimensionMismatch("Schur input must be square".into()));
        }
        if n == 0 {
            return Ok(Self { q: DMatrix::zeros(0, 0), t: DMatrix::zeros(0, 0) });
        }
        if !a.iter().all(|v| v.is_finite()) {
            return Err(SolverError::DecompositionFailure);
        }
        let ac = a.map(|v| C64::new(v, 0.0));
        let (q, t) = nalgebra::linalg::Schur::try_new(ac, 1e-15, 10_000)
            .ok_or(SolverError::DecompositionFailure)?
            .unpack();
        let mut s = Self { q, t };
        s.triangularize();
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.dim()).map(|k| self.t[(k, k)]).collect()
    }

    /// Splits any 2x2 bump left on the subdiagonal.
    fn triangularize(&mut self) {
        let n = self.dim();
        let scale = self.t.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
        for k in 0..n.saturating_sub(1) {
            if self.t[(k + 1, k)].norm() <= 1e-14 * scale {
                self.t[(k + 1, k)] = C64::new(0.0, 0.0);
                continue;
            }
            let (a, b, c, d) = (self.t[(k, k)], self.t[(k, k + 1)], self.t[(k + 1, k)], self.t[(k + 1, k + 1)]);
            let half_tr = (a + d) * 0.5;
            let disc = ((a - d) * (a - d) * 0.25 + b * c).sqrt();
            let lambda = half_tr + disc;
            // Eigenvector of the block for `lambda`.
            let v = if (lambda - a).norm() > (lambda - d).norm() {
                [b, lambda - a]
            } else {
                [lambda - d, c]
            };
            self.rotate(k, v);
            self.t[(k + 1, k)] = C64::new(0.0, 0.0);
        }
    }

    /// Applies the unitary whose first column is `v` to rows/columns k, k+1.
    fn rotate(&mut self, k: usize, v: [C64; 2]) {
        let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        if norm == 0.0 {
            return;
        }
        let u0 = v[0] / norm;
        let u1 = v[1] / norm;
        // U = [[u0, -conj(u1)], [u1, conj(u0)]]
        let n = self.dim();
        for j in 0..n {
            let (x, y) = (self.t[(k, j)], self.t[(k + 1, j)]);
            self.t[(k, j)] = u0.conj() * x + u1.conj() * y;
            self.t[(k + 1, j)] = -u1 * x + u0 * y;
        }
        for i in 0..n {
            let (x, y) = (self.t[(i, k)], self.t[(i, k + 1)]);
            self.t[(i, k)] = x * u0 + y * u1;
            self.t[(i, k + 1)] = -x * u1.conj() + y * u0.conj();
            let (x, y) = (self.q[(i, k)], self.q[(i, k + 1)]);
            self.q[(i, k)] = x * u0 + y * u1;
            self.q[(i, k + 1)] = -x * u1.conj() + y * u0.conj();
        }
    }

    /// Swaps the adjacent diagonal entries k and k+1.
    fn swap(&mut self, k: usize) {
        let (a, b, c) = (self.t[(k, k)], self.t[(k, k + 1)], self.t[(k + 1, k + 1)]);
        let v = [b, c - a];
        if v[0].norm() == 0.0 && v[1].norm() == 0.0 {
            return;
        }
        self.rotate(k, v);
        self.t[(k + 1, k)] = C64::new(0.0, 0.0);
        self.t[(k, k)] = c;
        self.t[(k + 1, k + 1)] = a;
    }

    /// Moves the `k` largest-modulus eigenvalues to the bottom-right corner,
    /// keeping the relative order inside each group.
    pub fn order_largest_last(&mut self, k: usize) {
        let n = self.dim();
        let k = k.min(n);
        let mut idx: Vec<usize> = (0..n).collect();
        let moduli: Vec<f64> = self.eigenvalues().iter().map(|l| l.norm()).collect();
        idx.sort_by(|&i, &j| moduli[j].total_cmp(&moduli[i]).then(i.cmp(&j)));
        let mut selected = vec![false; n];
        for &i in idx.iter().take(k) {
            selected[i] = true;
        }
        loop {
            let mut moved = false;
            for p in 0..n.saturating_sub(1) {
                if selected[p] && !selected[p + 1] {
                    self.swap(p);
                    selected.swap(p, p + 1);
                    moved = true;
                }
            }
            if !moved {
                break;
            }
        }
    }

    pub fn reconstruct(&self) -> DMatrix<C64> {
        &self.q * &self.t * self.q.adjoint()
    }
}
