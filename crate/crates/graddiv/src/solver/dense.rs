use std::ops::{Index, IndexMut};

use super::SolverError;

/// Small dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DMat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let nr = rows.len();
        let nc = if nr > 0 { rows[0].len() } else { 0 };
        let mut m = Self::zeros(nr, nc);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), nc);
            m.data[i * nc..(i + 1) * nc].copy_from_slice(r);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> DMat {
        let mut t = DMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `self^T * x`.
    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            for (j, a) in self.row(i).iter().enumerate() {
                y[j] += a * xi;
            }
        }
        y
    }

    pub fn matmul(&self, other: &DMat) -> DMat {
        assert_eq!(self.cols, other.rows);
        let mut c = DMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let or = other.row(k);
                let cr = c.row_mut(i);
                for j in 0..other.cols {
                    cr[j] += a * or[j];
                }
            }
        }
        c
    }

    /// `self^T * other`.
    pub fn matmul_tn(&self, other: &DMat) -> DMat {
        assert_eq!(self.rows, other.rows);
        let mut c = DMat::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let ar = self.row(k);
            let or = other.row(k);
            for i in 0..self.cols {
                let a = ar[i];
                if a == 0.0 {
                    continue;
                }
                let cr = c.row_mut(i);
                for j in 0..other.cols {
                    cr[j] += a * or[j];
                }
            }
        }
        c
    }

    pub fn max_abs_asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for DMat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Lower-triangular Cholesky factor of an SPD matrix.
#[derive(Clone, Debug)]
pub struct Cholesky {
    l: DMat,
}

impl Cholesky {
    /// The lower-triangular factor.
    pub fn factor(&self) -> &DMat {
        &self.l
    }

    pub fn new(a: &DMat) -> Result<Self, SolverError> {
        assert_eq!(a.rows(), a.cols());
        let n = a.rows();
        let mut l = DMat::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                if i == j {
                    if s <= 0.0 {
                        return Err(SolverError::NotPositiveDefinite { index: i, pivot: s });
                    }
                    l[(i, j)] = s.sqrt();
                } else {
                    l[(i, j)] = s / l[(j, j)];
                }
            }
        }
        Ok(Self { l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows();
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        // forward substitution L y = b
        for i in 0..n {
            for k in 0..i {
                y[i] -= self.l[(i, k)] * y[k];
            }
            y[i] /= self.l[(i, i)];
        }
        // back substitution L^T x = y
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                y[i] -= self.l[(k, i)] * y[k];
            }
            y[i] /= self.l[(i, i)];
        }
        y
    }

    /// Solves `A X = B` column by column.
    pub fn solve_mat(&self, b: &DMat) -> DMat {
        let n = self.l.rows();
        assert_eq!(b.rows(), n);
        let mut x = b.clone();
        for j in 0..b.cols() {
            for i in 0..n {
                for k in 0..i {
                    let lik = self.l[(i, k)];
                    let v = x[(k, j)];
                    x[(i, j)] -= lik * v;
                }
                x[(i, j)] /= self.l[(i, i)];
            }
            for i in (0..n).rev() {
                for k in (i + 1)..n {
                    let lki = self.l[(k, i)];
                    let v = x[(k, j)];
                    x[(i, j)] -= lki * v;
                }
                x[(i, j)] /= self.l[(i, i)];
            }
        }
        x
    }
}

/// Solves a general square system by LU with partial pivoting.
pub fn lu_solve(a: &DMat, b: &[f64]) -> Result<Vec<f64>, SolverError> {
    assert_eq!(a.rows(), a.cols());
    let n = a.rows();
    assert_eq!(b.len(), n);
    let mut lu = a.clone();
    let mut x = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (piv, piv_val) = (k..n)
            .map(|i| (i, lu[(i, k)].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if piv_val == 0.0 {
            return Err(SolverError::Singular(k));
        }
        if piv != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(piv, j)];
                lu[(piv, j)] = t;
            }
            perm.swap(k, piv);
            x.swap(k, piv);
        }
        for i in (k + 1)..n {
            let m = lu[(i, k)] / lu[(k, k)];
            lu[(i, k)] = m;
            for j in (k + 1)..n {
                let v = lu[(k, j)];
                lu[(i, j)] -= m * v;
            }
            x[i] -= m * x[k];
        }
    }
    for i in (0..n).rev() {
        for j in (i + 1)..n {
            x[i] -= lu[(i, j)] * x[j];
        }
        x[i] /= lu[(i, i)];
    }
    Ok(x)
}

/// Orthogonal splitting of coefficient space by the rows of `k` (m x n):
/// returns an n x n orthogonal matrix whose first `rank` columns span the
/// row space of `k` and whose remaining columns span its null space, via
/// Householder QR of `k^T` with column pivoting.
pub fn null_space_split(k: &DMat) -> (DMat, usize) {
    let m = k.rows();
    let n = k.cols();
    let mut a = k.transpose(); // n x m
    let mut q = DMat::identity(n);
    let steps = m.min(n);
    let mut diag = Vec::with_capacity(steps);
    let mut col_order: Vec<usize> = (0..m).collect();
    for step in 0..steps {
        // pivot: remaining column with the largest trailing norm
        let (piv, piv_norm) = (step..m)
            .map(|j| {
                let s: f64 = (step..n).map(|i| a[(i, j)] * a[(i, j)]).sum();
                (j, s.sqrt())
            })
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if piv != step {
            for i in 0..n {
                let t = a[(i, step)];
                a[(i, step)] = a[(i, piv)];
                a[(i, piv)] = t;
            }
            col_order.swap(step, piv);
        }
        if piv_norm == 0.0 {
            diag.push(0.0);
            continue;
        }
        // Householder vector for column `step`, rows step..n
        let alpha = -a[(step, step)].signum() * piv_norm;
        let mut v: Vec<f64> = (step..n).map(|i| a[(i, step)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            let beta = 2.0 / vnorm2;
            // apply H = I - beta v v^T to the trailing columns of a
            for j in step..m {
                let dot: f64 = (step..n).map(|i| v[i - step] * a[(i, j)]).sum();
                for i in step..n {
                    a[(i, j)] -= beta * dot * v[i - step];
                }
            }
            // accumulate Q <- Q H (H acts on columns step..n)
            for r in 0..n {
                let dot: f64 = (step..n).map(|i| v[i - step] * q[(r, i)]).sum();
                for i in step..n {
                    q[(r, i)] -= beta * dot * v[i - step];
                }
            }
        }
        diag.push(a[(step, step)].abs());
    }
    let scale = diag.iter().cloned().fold(0.0, f64::max);
    let rank = if scale == 0.0 {
        0
    } else {
        diag.iter().filter(|&&d| d > 1e-10 * scale).count()
    };
    (q, rank)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn sym_eigenvalues(a: &DMat) -> Vec<f64> {
    assert_eq!(a.rows(), a.cols());
    let n = a.rows();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off.sqrt() < 1e-15 * (1.0 + frobenius(&m)) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    eigs.sort_by(f64::total_cmp);
    eigs
}

fn frobenius(m: &DMat) -> f64 {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|v| v * v).sum::<f64>())
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cholesky_identity_returns_rhs() {
        let a = DMat::identity(4);
        let chol = Cholesky::new(&a).unwrap();
        let b = [1.0, -2.0, 3.5, 0.25];
        assert_eq!(chol.solve(&b), b.to_vec());
    }

    #[test]
    fn cholesky_2x2_hand_elimination() {
        let a = DMat::from_rows(&[&[4.0, 2.0], &[2.0, 3.0]]);
        let x = Cholesky::new(&a).unwrap().solve(&[10.0, 8.0]);
        assert!((x[0] - 7.0 / 4.0).abs() < 1e-14);
        assert!((x[1] - 3.0 / 2.0).abs() < 1e-14);
    }

    #[test]
    fn cholesky_random_spd_50_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 50;
        let mut g = DMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] = rng.random_range(-1.0..1.0);
            }
        }
        // A = G^T G + I is SPD
        let mut a = g.matmul_tn(&g);
        for i in 0..n {
            a[(i, i)] += 1.0;
        }
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = Cholesky::new(&a).unwrap().solve(&b);
        let r: f64 = a
            .matvec(&x)
            .iter()
            .zip(&b)
            .map(|(ax, bi)| (ax - bi) * (ax - bi))
            .sum::<f64>()
            .sqrt();
        let bn: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(r <= 1e-11 * bn, "residual {r:.3e} too large");
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = DMat::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(matches!(
            Cholesky::new(&a),
            Err(SolverError::NotPositiveDefinite { index: 1, .. })
        ));
    }

    #[test]
    fn lu_solves_unsymmetric() {
        let a = DMat::from_rows(&[&[0.0, 2.0, 1.0], &[1.0, -1.0, 0.0], &[3.0, 0.0, -2.0]]);
        let xe = [1.5, -0.25, 2.0];
        let b = a.matvec(&xe);
        let x = lu_solve(&a, &b).unwrap();
        for (xi, xei) in x.iter().zip(&xe) {
            assert!((xi - xei).abs() < 1e-13);
        }
    }

    #[test]
    fn null_space_split_of_rank_deficient_map() {
        // k maps R^4 -> R^3 with rank 2: rows (1,1,0,0), (0,0,2,0), (1,1,2,0)
        let k = DMat::from_rows(&[
            &[1.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 2.0, 0.0],
            &[1.0, 1.0, 2.0, 0.0],
        ]);
        let (q, rank) = null_space_split(&k);
        assert_eq!(rank, 2);
        // Q orthogonal
        let qtq = q.matmul_tn(&q);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((qtq[(i, j)] - want).abs() < 1e-13);
            }
        }
        // trailing columns lie in the null space of k
        for col in rank..4 {
            let x: Vec<f64> = (0..4).map(|i| q[(i, col)]).collect();
            let kx = k.matvec(&x);
            assert!(kx.iter().all(|v| v.abs() < 1e-13), "column {col}");
        }
        // leading columns lie in the row space: orthogonal to the null
        // vectors (1,-1,0,0) and (0,0,0,1)
        for col in 0..rank {
            let x: Vec<f64> = (0..4).map(|i| q[(i, col)]).collect();
            assert!((x[0] - x[1]).abs() < 1e-13, "column {col} not in row space");
            assert!(x[3].abs() < 1e-13);
        }
    }

    #[test]
    fn jacobi_eigenvalues_known_matrix() {
        // eigenvalues of [[2,1],[1,2]] are 1 and 3
        let a = DMat::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let e = sym_eigenvalues(&a);
        assert!((e[0] - 1.0).abs() < 1e-12 && (e[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_matches_trace_and_det() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 12;
        let mut a = DMat::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = rng.random_range(-1.0..1.0);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        let e = sym_eigenvalues(&a);
        let trace: f64 = (0..n).map(|i| a[(i, i)]).sum();
        assert!((e.iter().sum::<f64>() - trace).abs() < 1e-10);
    }
}
