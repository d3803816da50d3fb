//! Block Lanczos with full reorthogonalization and thick restarts.
//!
//! The projected matrix is assembled from the Gram-Schmidt coefficients, so it
//! stays exact after a restart that keeps the lowest Ritz vectors. The start
//! block holds `k` random vectors, which lets degenerate levels of multiplicity
//! up to `k` come out with the right count. When the Krylov space becomes
//! invariant the iteration continues from a fresh random direction.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::par::{self, Exec};

/// A real symmetric operator known only through its action.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    /// `y = A x`; `y` is fully overwritten.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("eigenpair count must be in 1..=6, got {0}")]
    BadCount(usize),
    #[error("requested {k} eigenpairs of a {dim}-dimensional operator")]
    CountExceedsDim { k: usize, dim: usize },
    #[error("tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
    #[error("Lanczos did not converge after {restarts} restarts (best residual {best_residual:e})")]
    NotConverged { restarts: usize, best_residual: f64 },
}

#[derive(Debug, Clone)]
pub struct LanczosOptions {
    /// Number of lowest eigenpairs wanted.
    pub k: usize,
    /// Bound on `||A v - lambda v||` for every returned pair.
    pub tol: f64,
    pub seed: u64,
    /// Largest basis before a thick restart.
    pub max_basis: usize,
    pub max_restarts: usize,
    /// Start-block size; 0 means `k`. Degenerate levels with multiplicity above
    /// the block size may be under-counted.
    pub block: usize,
    /// Upper bound on the memory held by the basis, in bytes.
    pub memory_budget: usize,
    pub exec: Exec,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            k: 3,
            tol: 1e-10,
            seed: 0,
            max_basis: 32,
            max_restarts: 200,
            block: 0,
            memory_budget: 1 << 31,
            exec: Exec::default(),
        }
    }
}

/// Lowest eigenpairs in ascending order.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    pub residual_norms: Vec<f64>,
}

const BLOCK: usize = 1 << 14;

pub(crate) fn dot(exec: Exec, a: &[f64], b: &[f64]) -> f64 {
    // fixed blocking keeps the summation order independent of the executor
    let nb = a.len().div_ceil(BLOCK);
    let part = |c: usize| {
        let lo = c * BLOCK;
        let hi = (lo + BLOCK).min(a.len());
        a[lo..hi].iter().zip(&b[lo..hi]).map(|(x, y)| x * y).sum::<f64>()
    };
    let exec = if nb > 4 { exec } else { Exec::Sequential };
    par::map_indexed(exec, nb, part).into_iter().sum()
}

fn axpy(exec: Exec, alpha: f64, x: &[f64], y: &mut [f64]) {
    let exec = if y.len() > 4 * BLOCK { exec } else { Exec::Sequential };
    par::for_each_chunk(exec, y, BLOCK, |off, ys| {
        for (j, v) in ys.iter_mut().enumerate() {
            *v += alpha * x[off + j];
        }
    });
}

fn norm(exec: Exec, a: &[f64]) -> f64 {
    dot(exec, a, a).sqrt()
}

fn scale(a: &mut [f64], s: f64) {
    a.iter_mut().for_each(|x| *x *= s);
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Gram-Schmidt of `w` against `basis`, repeated while the norm drops sharply.
/// Overlaps are accumulated into `coef`. Returns the final norm.
fn orthogonalize(exec: Exec, w: &mut [f64], basis: &[Vec<f64>], coef: &mut [f64]) -> f64 {
    let mut before = norm(exec, w);
    for _pass in 0..3 {
        for (i, v) in basis.iter().enumerate() {
            let c = dot(exec, v, w);
            axpy(exec, -c, v, w);
            coef[i] += c;
        }
        let after = norm(exec, w);
        if after > 0.7 * before {
            return after;
        }
        before = after;
    }
    before
}

/// Symmetric eigen-decomposition with eigenvalues sorted ascending.
pub fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let s = m.nrows();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(s, s);
    for (c, &i) in order.iter().enumerate() {
        vecs.set_column(c, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Working state: orthonormal `basis`, of which the first `done` vectors have
/// had the operator applied. `t[(i, j)] = <v_i, A v_j>` whenever `i` or `j` is
/// below `done`.
struct Krylov {
    basis: Vec<Vec<f64>>,
    t: DMatrix<f64>,
    done: usize,
}

impl Krylov {
    /// Try to append `w` (already orthogonalized, norm `nw`) as a new vector.
    fn push(&mut self, mut w: Vec<f64>, nw: f64) {
        scale(&mut w, 1.0 / nw);
        self.basis.push(w);
    }

    fn ritz(&self) -> (Vec<f64>, DMatrix<f64>) {
        let d = self.done;
        sorted_eigen(self.t.view((0, 0), (d, d)).into_owned())
    }

    /// Residual norm estimate of the Ritz pair with coefficients `s`.
    fn residual_estimate(&self, s: &[f64]) -> f64 {
        let d = self.done;
        (d..self.basis.len())
            .map(|p| {
                let r: f64 = (0..d).map(|j| self.t[(p, j)] * s[j]).sum();
                r * r
            })
            .sum::<f64>()
            .sqrt()
    }

    fn combine(&self, exec: Exec, s: &[f64], n: usize) -> Vec<f64> {
        let mut y = vec![0.0; n];
        for (j, &c) in s.iter().enumerate() {
            if c != 0.0 {
                axpy(exec, c, &self.basis[j], &mut y);
            }
        }
        y
    }
}

/// Lowest `opts.k` eigenpairs of `op`.
pub fn lowest_eigenpairs<O: LinearOperator + ?Sized>(
    op: &O,
    opts: &LanczosOptions,
) -> Result<EigenResult, SolverError> {
    let k = opts.k;
    if !(1..=6).contains(&k) {
        return Err(SolverError::BadCount(k));
    }
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(SolverError::BadTolerance(opts.tol));
    }
    let n = op.dim();
    if k > n {
        return Err(SolverError::CountExceedsDim { k, dim: n });
    }
    let exec = opts.exec;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let block = if opts.block == 0 { k } else { opts.block.min(k) };
    let by_memory = opts.memory_budget / (8 * n.max(1));
    let cap = opts.max_basis.min(by_memory).max(4 * k + 8).min(n);
    let keep = (cap / 2).max(k + block).min(cap.saturating_sub(block));

    let cap_t = cap + block + 1;
    let mut kr = Krylov {
        basis: Vec::with_capacity(cap_t),
        t: DMatrix::zeros(cap_t, cap_t),
        done: 0,
    };
    let mut scratch = vec![0.0; cap_t];
    for _ in 0..block {
        let mut v = random_vector(&mut rng, n);
        let nv = orthogonalize(exec, &mut v, &kr.basis, &mut scratch);
        kr.push(v, nv);
    }

    let mut restarts = 0;
    let mut best = f64::INFINITY;
    let mut strict = 0.5;
    let mut w = vec![0.0; n];
    let mut scale_est: f64 = 0.0;
    loop {
        if kr.done == kr.basis.len() {
            // invariant subspace reached
            if kr.done == n {
                return Ok(extract(op, &kr, k, exec, n));
            }
            let mut v = random_vector(&mut rng, n);
            scratch.iter_mut().for_each(|x| *x = 0.0);
            let nv = orthogonalize(exec, &mut v, &kr.basis, &mut scratch);
            kr.push(v, nv);
        }
        let j = kr.done;
        op.apply(&kr.basis[j], &mut w);
        let len = kr.basis.len();
        let mut coef = vec![0.0; len];
        // local step: couplings to processed vectors are already known by symmetry
        let small = 1e-10 * scale_est.max(1.0);
        for i in 0..j {
            let c = kr.t[(i, j)];
            if c.abs() > small {
                axpy(exec, -c, &kr.basis[i], &mut w);
                coef[i] += c;
            }
        }
        let c = dot(exec, &kr.basis[j], &w);
        axpy(exec, -c, &kr.basis[j], &mut w);
        coef[j] += c;
        let nw = orthogonalize(exec, &mut w, &kr.basis, &mut coef);
        for (i, &c) in coef.iter().enumerate() {
            kr.t[(i, j)] = c;
            kr.t[(j, i)] = c;
        }
        kr.done += 1;
        scale_est = scale_est.max(coef[j].abs()).max(nw);
        if nw > 1e-12 * scale_est.max(1.0) && len < n {
            let q = kr.basis.len();
            kr.push(w.clone(), nw);
            kr.t[(q, j)] = nw;
            kr.t[(j, q)] = nw;
        }

        let done = kr.done;
        let full = kr.basis.len() >= cap || done == n;
        if done >= k && (done % block == 0 || full || done == kr.basis.len()) {
            let (vals, vecs) = kr.ritz();
            let est: Vec<f64> = (0..k)
                .map(|i| kr.residual_estimate(vecs.column(i).as_slice()))
                .collect();
            if est.iter().all(|&e| e <= strict * opts.tol) {
                let res = extract(op, &kr, k, exec, n);
                if res.residual_norms.iter().all(|&r| r <= opts.tol) {
                    return Ok(res);
                }
                best = best.min(res.residual_norms.iter().cloned().fold(0.0, f64::max));
                strict *= 0.1;
            }
            if full && done < n {
                best = best.min(est.iter().cloned().fold(0.0, f64::max));
                restarts += 1;
                if restarts > opts.max_restarts {
                    return Err(SolverError::NotConverged {
                        restarts: opts.max_restarts,
                        best_residual: best,
                    });
                }
                thick_restart(&mut kr, &vals, &vecs, keep.min(done), exec, n);
            }
        }
    }
}

/// Replace the processed part of the basis by its `p` lowest Ritz vectors.
fn thick_restart(kr: &mut Krylov, vals: &[f64], vecs: &DMatrix<f64>, p: usize, exec: Exec, n: usize) {
    let d = kr.done;
    let pending: Vec<Vec<f64>> = kr.basis.drain(d..).collect();
    let mut kept = Vec::with_capacity(p + pending.len());
    for a in 0..p {
        kept.push(kr.combine(exec, vecs.column(a).as_slice(), n));
    }
    let cap_t = kr.t.nrows();
    let mut t = DMatrix::zeros(cap_t, cap_t);
    for a in 0..p {
        t[(a, a)] = vals[a];
        for (c, _) in pending.iter().enumerate() {
            let coupling: f64 = (0..d).map(|j| kr.t[(d + c, j)] * vecs[(j, a)]).sum();
            t[(p + c, a)] = coupling;
            t[(a, p + c)] = coupling;
        }
    }
    kept.extend(pending);
    kr.basis = kept;
    kr.t = t;
    kr.done = p;
}

fn extract<O: LinearOperator + ?Sized>(op: &O, kr: &Krylov, k: usize, exec: Exec, n: usize) -> EigenResult {
    let (_, vecs) = kr.ritz();
    let mut hy = vec![0.0; n];
    let mut out = EigenResult {
        eigenvalues: Vec::with_capacity(k),
        eigenvectors: Vec::with_capacity(k),
        residual_norms: Vec::with_capacity(k),
    };
    for a in 0..k {
        let mut y = kr.combine(exec, vecs.column(a).as_slice(), n);
        let ny = norm(exec, &y);
        scale(&mut y, 1.0 / ny);
        op.apply(&y, &mut hy);
        let theta = dot(exec, &y, &hy);
        axpy(exec, -theta, &y, &mut hy);
        out.eigenvalues.push(theta);
        out.residual_norms.push(norm(exec, &hy));
        out.eigenvectors.push(y);
    }
    out
}
