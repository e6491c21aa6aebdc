//! Compressed sparse rows and the two inner solvers used by policy iteration.

#[derive(Clone, Debug, Default)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn with_capacity(n: usize, nnz: usize) -> Self {
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        CsrMatrix {
            n,
            row_ptr,
            cols: Vec::with_capacity(nnz),
            vals: Vec::with_capacity(nnz),
        }
    }

    /// Appends the next row; `entries` may repeat columns, which are summed.
    pub fn push_row(&mut self, entries: &mut Vec<(usize, f64)>) {
        entries.sort_unstable_by_key(|e| e.0);
        let mut last = usize::MAX;
        for &(c, v) in entries.iter() {
            if c == last {
                *self.vals.last_mut().unwrap() += v;
            } else {
                self.cols.push(c);
                self.vals.push(v);
                last = c;
            }
        }
        self.row_ptr.push(self.cols.len());
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|r| self.row(r).find(|e| e.0 == r).map_or(0.0, |e| e.1))
            .collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate().take(self.n) {
            let mut acc = 0.0;
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[p] * x[self.cols[p]];
            }
            *out = acc;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InnerSolver {
    /// Restarted GMRES with diagonal preconditioning.
    Gmres { restart: usize, rel_tol: f64, max_iter: usize },
    /// Damped Jacobi sweeps.
    Jacobi { damping: f64, rel_tol: f64, max_sweeps: usize },
}

impl Default for InnerSolver {
    fn default() -> Self {
        InnerSolver::Gmres {
            restart: 60,
            rel_tol: 1e-13,
            max_iter: 4000,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LinearStats {
    pub iterations: usize,
    pub rel_residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual(a: &CsrMatrix, x: &[f64], b: &[f64], r: &mut [f64]) {
    a.matvec(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
}

pub fn solve(a: &CsrMatrix, b: &[f64], x: &mut [f64], solver: InnerSolver) -> LinearStats {
    match solver {
        InnerSolver::Gmres {
            restart,
            rel_tol,
            max_iter,
        } => gmres(a, b, x, restart, rel_tol, max_iter),
        InnerSolver::Jacobi {
            damping,
            rel_tol,
            max_sweeps,
        } => jacobi(a, b, x, damping, rel_tol, max_sweeps),
    }
}

/// Damped Jacobi, `x ← x + ω D⁻¹(b − Ax)`.
pub fn jacobi(a: &CsrMatrix, b: &[f64], x: &mut [f64], damping: f64, rel_tol: f64, max_sweeps: usize) -> LinearStats {
    let n = a.dim();
    let diag = a.diagonal();
    let bnorm = norm(b).max(f64::MIN_POSITIVE);
    let mut r = vec![0.0; n];
    let mut sweeps = 0;
    let mut rel = f64::INFINITY;
    while sweeps < max_sweeps {
        residual(a, x, b, &mut r);
        rel = norm(&r) / bnorm;
        if rel <= rel_tol {
            break;
        }
        for i in 0..n {
            x[i] += damping * r[i] / diag[i];
        }
        sweeps += 1;
    }
    LinearStats {
        iterations: sweeps,
        rel_residual: rel,
    }
}

/// Right-preconditioned restarted GMRES (modified Gram–Schmidt, Givens).
pub fn gmres(a: &CsrMatrix, b: &[f64], x: &mut [f64], restart: usize, rel_tol: f64, max_iter: usize) -> LinearStats {
    let n = a.dim();
    let m = restart.max(1);
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d).collect();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return LinearStats {
            iterations: 0,
            rel_residual: 0.0,
        };
    }
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut basis: Vec<Vec<f64>> = vec![vec![0.0; n]; m + 1];
    let mut hess = vec![vec![0.0; m]; m + 1];
    let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
    let mut g = vec![0.0; m + 1];
    let mut total = 0;
    let mut rel;
    loop {
        residual(a, x, b, &mut r);
        let beta = norm(&r);
        rel = beta / bnorm;
        if rel <= rel_tol || total >= max_iter {
            break;
        }
        for (vi, ri) in basis[0].iter_mut().zip(&r) {
            *vi = ri / beta;
        }
        g.iter_mut().for_each(|v| *v = 0.0);
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            for i in 0..n {
                z[i] = inv_diag[i] * basis[k][i];
            }
            a.matvec(&z, &mut w);
            for j in 0..=k {
                let hjk: f64 = w.iter().zip(&basis[j]).map(|(a, b)| a * b).sum();
                hess[j][k] = hjk;
                for (wi, vi) in w.iter_mut().zip(&basis[j]) {
                    *wi -= hjk * vi;
                }
            }
            let hn = norm(&w);
            hess[k + 1][k] = hn;
            if hn > 0.0 {
                for (vi, wi) in basis[k + 1].iter_mut().zip(&w) {
                    *vi = wi / hn;
                }
            }
            for j in 0..k {
                let t = cs[j] * hess[j][k] + sn[j] * hess[j + 1][k];
                hess[j + 1][k] = -sn[j] * hess[j][k] + cs[j] * hess[j + 1][k];
                hess[j][k] = t;
            }
            let d = hess[k][k].hypot(hess[k + 1][k]);
            cs[k] = hess[k][k] / d;
            sn[k] = hess[k + 1][k] / d;
            hess[k][k] = d;
            hess[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            total += 1;
            if g[k + 1].abs() / bnorm <= rel_tol * 0.5 || hn == 0.0 || total >= max_iter {
                break;
            }
        }
        // back substitution for y, then x += M⁻¹ V y
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= hess[i][j] * y[j];
            }
            y[i] = s / hess[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for i in 0..n {
                x[i] += inv_diag[i] * yj * basis[j][i];
            }
        }
    }
    LinearStats {
        iterations: total,
        rel_residual: rel,
    }
}
