//! Small dense/banded linear algebra kernels: banded LU with partial
//! pivoting (for the implicit time stepper), Householder least squares
//! (for generalized-Taylor fits), and a Gauss–Hermite rule.

use crate::error::{Error, Result};

/// Banded matrix with `kl` sub- and `ku` superdiagonals in LAPACK-style
/// band storage with `kl` extra rows for pivoting fill-in.
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    // data[r][j] holds A[i][j] at r = kl + ku + i − j.
    data: Vec<f64>,
    rows: usize,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let rows = 2 * kl + ku + 1;
        BandedMatrix {
            n,
            kl,
            ku,
            data: vec![0.0; rows * n],
            rows,
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        (self.kl + self.ku + i - j) * self.n + j
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(j + self.kl >= i && i + self.ku + self.kl >= j, "out of band");
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || i + self.ku + self.kl < j {
            return 0.0;
        }
        self.data[self.idx(i, j)]
    }

    /// In-place LU factorization with partial pivoting.
    pub fn factor(mut self) -> Result<BandedLu> {
        let n = self.n;
        let kl = self.kl;
        let ku = self.ku;
        let mut pivots = vec![0usize; n];
        for col in 0..n {
            let row_max = (col + kl).min(n - 1);
            let mut p = col;
            let mut best = self.get(col, col).abs();
            for r in (col + 1)..=row_max {
                let v = self.get(r, col).abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::NumericalFailure(format!(
                    "banded LU breakdown at column {col}"
                )));
            }
            pivots[col] = p;
            if p != col {
                let col_hi = (col + ku + kl).min(n - 1);
                for j in col..=col_hi {
                    let a = self.get(col, j);
                    let b = self.get(p, j);
                    self.set(col, j, b);
                    self.set(p, j, a);
                }
            }
            let diag = self.get(col, col);
            for r in (col + 1)..=row_max {
                let m = self.get(r, col) / diag;
                self.set(r, col, m);
                if m != 0.0 {
                    let col_hi = (col + ku + kl).min(n - 1);
                    for j in (col + 1)..=col_hi {
                        let v = self.get(r, j) - m * self.get(col, j);
                        self.set(r, j, v);
                    }
                }
            }
        }
        Ok(BandedLu {
            mat: self,
            pivots,
        })
    }
}

pub struct BandedLu {
    mat: BandedMatrix,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.mat.n;
        let kl = self.mat.kl;
        let ku = self.mat.ku;
        let mut x = b.to_vec();
        for col in 0..n {
            let p = self.pivots[col];
            if p != col {
                x.swap(col, p);
            }
            let row_max = (col + kl).min(n - 1);
            for r in (col + 1)..=row_max {
                x[r] -= self.mat.get(r, col) * x[col];
            }
        }
        for col in (0..n).rev() {
            let col_hi = (col + ku + kl).min(n - 1);
            let mut acc = x[col];
            for j in (col + 1)..=col_hi {
                acc -= self.mat.get(col, j) * x[j];
            }
            x[col] = acc / self.mat.get(col, col);
        }
        x
    }
}

/// Least-squares solution of an m×n system (m ≥ n) by Householder QR with
/// column equilibration. Returns the solution and a condition estimate
/// (ratio of extreme |R| diagonals of the equilibrated matrix).
pub fn lstsq(a: &[Vec<f64>], b: &[f64]) -> Result<(Vec<f64>, f64)> {
    let m = a.len();
    if m == 0 || b.len() != m {
        return Err(Error::InvalidArgument("lstsq shape mismatch".into()));
    }
    let n = a[0].len();
    if m < n {
        return Err(Error::InvalidArgument(format!(
            "lstsq needs at least as many rows ({m}) as columns ({n})"
        )));
    }
    // Column-major working copy, equilibrated.
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.iter().map(|row| row[j]).collect()).collect();
    let mut scales = vec![1.0f64; n];
    for (j, col) in cols.iter_mut().enumerate() {
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            scales[j] = norm;
            for v in col.iter_mut() {
                *v /= norm;
            }
        }
    }
    let mut rhs = b.to_vec();

    let mut rdiag = vec![0.0f64; n];
    for k in 0..n {
        // Householder vector for column k, rows k..m.
        let mut alpha = 0.0;
        for i in k..m {
            alpha += cols[k][i] * cols[k][i];
        }
        alpha = alpha.sqrt();
        if alpha == 0.0 {
            return Err(Error::IllConditioned { condition: f64::INFINITY });
        }
        if cols[k][k] > 0.0 {
            alpha = -alpha;
        }
        rdiag[k] = alpha;
        let v0 = cols[k][k] - alpha;
        cols[k][k] = v0;
        let vnorm2: f64 = (k..m).map(|i| cols[k][i] * cols[k][i]).sum();
        if vnorm2 == 0.0 {
            return Err(Error::IllConditioned { condition: f64::INFINITY });
        }
        for j in (k + 1)..n {
            let dot: f64 = (k..m).map(|i| cols[k][i] * cols[j][i]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..m {
                cols[j][i] -= f * cols[k][i];
            }
        }
        let dot: f64 = (k..m).map(|i| cols[k][i] * rhs[i]).sum();
        let f = 2.0 * dot / vnorm2;
        for i in k..m {
            rhs[i] -= f * cols[k][i];
        }
    }

    let dmax = rdiag.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let dmin = rdiag.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let condition = if dmin > 0.0 { dmax / dmin } else { f64::INFINITY };
    if !(dmin > 1e-13 * dmax) {
        return Err(Error::IllConditioned { condition });
    }

    // Back-substitute R x = Q^T b (R strict upper part lives above rdiag).
    let mut x = vec![0.0f64; n];
    for k in (0..n).rev() {
        let mut acc = rhs[k];
        for j in (k + 1)..n {
            // R[k][j] is stored in cols[j][k] for k < j.
            acc -= cols[j][k] * x[j];
        }
        x[k] = acc / rdiag[k];
    }
    for j in 0..n {
        x[j] /= scales[j];
    }
    Ok((x, condition))
}

/// Nodes and weights of the n-point Gauss–Hermite rule for
/// ∫ e^{−x²} f(x) dx, via Newton refinement on the orthonormal Hermite
/// polynomials and Christoffel weights w_i = 1/Σ_k p_k(x_i)².
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1 && n <= 256);
    // Orthonormal recurrence wrt e^{−x²}: p_{k+1} = √(2/(k+1)) x p_k − √(k/(k+1)) p_{k−1}.
    let eval = |x: f64| -> (f64, f64) {
        let mut prev = std::f64::consts::PI.powf(-0.25);
        if n == 1 {
            return (prev, 0.0);
        }
        let mut cur = std::f64::consts::SQRT_2 * x * prev;
        for k in 1..n {
            let kf = k as f64;
            let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
            prev = cur;
            cur = next;
        }
        // cur = p_n, prev = p_{n−1}; p_n' = √(2n) p_{n−1}
        (cur, (2.0 * n as f64).sqrt() * prev)
    };

    // Bracket roots by scanning; node spacing is at least ~π/√(2n+1) / 2.
    let bound = ((2 * n + 1) as f64).sqrt() + 1.0;
    let step = 0.2 * std::f64::consts::PI / ((2 * n + 1) as f64).sqrt();
    let mut roots = Vec::with_capacity(n);
    let mut x_prev = -bound;
    let mut f_prev = eval(x_prev).0;
    let mut x = x_prev + step;
    while x < bound + step {
        let f = eval(x).0;
        if f_prev != 0.0 && f != 0.0 && f_prev.signum() != f.signum() {
            // Newton from the midpoint.
            let mut r = 0.5 * (x_prev + x);
            for _ in 0..60 {
                let (p, dp) = eval(r);
                let delta = p / dp;
                r -= delta;
                if delta.abs() < 1e-15 * r.abs().max(1.0) {
                    break;
                }
            }
            roots.push(r);
        }
        x_prev = x;
        f_prev = f;
        x += step;
    }
    assert_eq!(roots.len(), n, "Gauss-Hermite root scan missed nodes");

    let weights = roots
        .iter()
        .map(|&r| {
            let mut prev = std::f64::consts::PI.powf(-0.25);
            let mut sum = prev * prev;
            if n > 1 {
                let mut cur = std::f64::consts::SQRT_2 * r * prev;
                sum += cur * cur;
                for k in 1..(n - 1) {
                    let kf = k as f64;
                    let next =
                        (2.0 / (kf + 1.0)).sqrt() * r * cur - (kf / (kf + 1.0)).sqrt() * prev;
                    prev = cur;
                    cur = next;
                    sum += cur * cur;
                }
            }
            1.0 / sum
        })
        .collect();
    (roots, weights)
}
