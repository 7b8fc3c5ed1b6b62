//! Column-pivoted Householder QR, used for numerical rank decisions and
//! full-rank least-squares solves.

use super::{LinalgError, Matrix, Vector};

/// Default relative threshold on the pivoted R diagonal for rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

struct ColPivQr {
    n: usize,
    /// Working array after factorization: R in the upper triangle.
    r: Matrix,
    /// Householder reflectors; `reflectors[k]` acts on rows `k..m`.
    reflectors: Vec<Vec<f64>>,
    /// Column permutation: the factorization is of `A[:, perm]`.
    perm: Vec<usize>,
}

impl ColPivQr {
    fn factor(a: &Matrix) -> ColPivQr {
        let m = a.rows();
        let n = a.cols();
        let mut w = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut reflectors = Vec::with_capacity(n.min(m));

        for k in 0..n.min(m) {
            // Pivot: bring the column with the largest trailing norm to position k.
            let mut best = k;
            let mut best_norm = trailing_norm(&w, k, k);
            for j in (k + 1)..n {
                let nj = trailing_norm(&w, k, j);
                if nj > best_norm {
                    best = j;
                    best_norm = nj;
                }
            }
            if best != k {
                swap_columns(&mut w, k, best);
                perm.swap(k, best);
            }

            if best_norm == 0.0 {
                // Remaining block is exactly zero; R diagonal stays zero.
                reflectors.push(Vec::new());
                continue;
            }

            // Householder vector for column k, rows k..m.
            let mut v: Vec<f64> = (k..m).map(|i| w.get(i, k)).collect();
            let alpha = -v[0].signum() * best_norm;
            v[0] -= alpha;
            let vtv: f64 = v.iter().map(|x| x * x).sum();
            if vtv == 0.0 {
                reflectors.push(Vec::new());
                w.set(k, k, alpha);
                continue;
            }

            // Apply H = I - 2 v v^T / (v^T v) to the trailing block.
            for j in k..n {
                let dot: f64 = (k..m).map(|i| v[i - k] * w.get(i, j)).sum();
                let c = 2.0 * dot / vtv;
                for i in k..m {
                    let val = w.get(i, j) - c * v[i - k];
                    w.set(i, j, val);
                }
            }
            w.set(k, k, alpha);
            for i in (k + 1)..m {
                w.set(i, k, 0.0);
            }
            reflectors.push(v);
        }

        ColPivQr { n, r: w, reflectors, perm }
    }

    /// Numerical rank: diagonal entries of the pivoted R above `tol` relative
    /// to the largest one. Pivoting makes |r_00| the largest diagonal entry.
    fn rank(&self, tol: f64) -> usize {
        assert!(tol > 0.0, "rank tolerance must be positive");
        let kmax = self.reflectors.len();
        if kmax == 0 {
            return 0;
        }
        let lead = self.r.get(0, 0).abs();
        if lead == 0.0 {
            return 0;
        }
        (0..kmax)
            .take_while(|&k| self.r.get(k, k).abs() > tol * lead)
            .count()
    }

    /// Least-squares solve assuming full column rank.
    fn solve(&self, v: &Vector) -> Vector {
        let m = self.r.rows();
        let n = self.n;
        let mut y: Vec<f64> = v.as_slice().to_vec();
        for (k, refl) in self.reflectors.iter().enumerate() {
            if refl.is_empty() {
                continue;
            }
            let vtv: f64 = refl.iter().map(|x| x * x).sum();
            let dot: f64 = (k..m).map(|i| refl[i - k] * y[i]).sum();
            let c = 2.0 * dot / vtv;
            for i in k..m {
                y[i] -= c * refl[i - k];
            }
        }
        // Back-substitution on the leading n rows of R.
        let mut z = vec![0.0; n];
        for k in (0..n).rev() {
            let mut acc = y[k];
            for (j, zj) in z.iter().enumerate().take(n).skip(k + 1) {
                acc -= self.r.get(k, j) * zj;
            }
            z[k] = acc / self.r.get(k, k);
        }
        // Undo the column permutation.
        let mut x = vec![0.0; n];
        for (k, &pk) in self.perm.iter().enumerate() {
            x[pk] = z[k];
        }
        Vector::raw(x)
    }
}

fn trailing_norm(w: &Matrix, row0: usize, j: usize) -> f64 {
    (row0..w.rows())
        .map(|i| w.get(i, j) * w.get(i, j))
        .sum::<f64>()
        .sqrt()
}

fn swap_columns(w: &mut Matrix, a: usize, b: usize) {
    for i in 0..w.rows() {
        let (x, y) = (w.get(i, a), w.get(i, b));
        w.set(i, a, y);
        w.set(i, b, x);
    }
}

/// Numerical column rank of `a`, with singular directions decided at the
/// relative threshold `tol` on the pivoted R diagonal.
pub fn column_rank(a: &Matrix, tol: f64) -> usize {
    ColPivQr::factor(a).rank(tol)
}

/// Least-squares solution of `a z ~ v` for a matrix with full column rank,
/// i.e. the action of the Moore-Penrose pseudoinverse `(A^T A)^{-1} A^T v`.
pub fn pseudo_inverse_apply(a: &Matrix, v: &Vector) -> Result<Vector, LinalgError> {
    assert_eq!(a.rows(), v.len(), "pseudo_inverse_apply: dimension mismatch");
    let qr = ColPivQr::factor(a);
    if qr.rank(DEFAULT_RANK_TOL) < a.cols() {
        return Err(LinalgError::RankDeficient);
    }
    Ok(qr.solve(v))
}

/// Alias for [`pseudo_inverse_apply`] under the name used elsewhere in the
/// crate for clarity at call sites.
pub fn least_squares(a: &Matrix, v: &Vector) -> Result<Vector, LinalgError> {
    pseudo_inverse_apply(a, v)
}
