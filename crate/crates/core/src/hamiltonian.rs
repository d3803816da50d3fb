//! Matrix-free ladder Hamiltonian on the full basis or the zero-momentum sector.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::lanczos::LinearOperator;
use crate::model::{Couplings, Lattice, ModelError};
use crate::par::{self, Exec};

const UNSET: u32 = u32::MAX;
const CHUNK: usize = 4096;

/// Which block of the Hilbert space an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    /// All `2^(2L)` configurations.
    Full,
    /// Translation-invariant states (crystal momentum zero).
    ZeroMomentum,
}

/// Basis of a sector. For the zero-momentum sector each basis vector is the
/// normalized uniform superposition over one translation orbit.
#[derive(Debug)]
pub struct Basis {
    lattice: Lattice,
    sector: Sector,
    reps: Vec<u32>,
    lookup: Vec<u32>,
    norms: Vec<f64>,
}

impl Basis {
    pub fn new(lattice: Lattice, sector: Sector) -> Basis {
        match sector {
            Sector::Full => Basis {
                lattice,
                sector,
                reps: Vec::new(),
                lookup: Vec::new(),
                norms: Vec::new(),
            },
            Sector::ZeroMomentum => Self::zero_momentum(lattice),
        }
    }

    fn zero_momentum(lattice: Lattice) -> Basis {
        let n = lattice.hilbert_dim();
        let mut lookup = vec![UNSET; n];
        let mut reps = Vec::new();
        let mut norms = Vec::new();
        for c in 0..n {
            if lookup[c] != UNSET {
                continue;
            }
            // c is the smallest member of its orbit since smaller ones are already assigned
            let idx = reps.len() as u32;
            let mut period = 0usize;
            let mut t = c as u64;
            loop {
                lookup[t as usize] = idx;
                period += 1;
                t = lattice.translate(t);
                if t == c as u64 {
                    break;
                }
            }
            reps.push(c as u32);
            norms.push((period as f64).sqrt());
        }
        Basis {
            lattice,
            sector: Sector::ZeroMomentum,
            reps,
            lookup,
            norms,
        }
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn dim(&self) -> usize {
        match self.sector {
            Sector::Full => self.lattice.hilbert_dim(),
            Sector::ZeroMomentum => self.reps.len(),
        }
    }

    /// A configuration representing basis vector `i`.
    #[inline]
    pub fn config(&self, i: usize) -> u64 {
        match self.sector {
            Sector::Full => i as u64,
            Sector::ZeroMomentum => self.reps[i] as u64,
        }
    }

    /// Number of configurations in the orbit of basis vector `i`.
    pub fn orbit_size(&self, i: usize) -> usize {
        match self.sector {
            Sector::Full => 1,
            Sector::ZeroMomentum => (self.norms[i] * self.norms[i]).round() as usize,
        }
    }

    /// Basis index containing configuration `bits`.
    #[inline]
    pub fn index_of(&self, bits: u64) -> usize {
        match self.sector {
            Sector::Full => bits as usize,
            Sector::ZeroMomentum => self.lookup[bits as usize] as usize,
        }
    }

    /// Expand sector amplitudes into full computational-basis amplitudes.
    pub fn to_full(&self, x: &[f64]) -> Vec<f64> {
        match self.sector {
            Sector::Full => x.to_vec(),
            Sector::ZeroMomentum => (0..self.lattice.hilbert_dim())
                .map(|c| {
                    let j = self.lookup[c] as usize;
                    x[j] / self.norms[j]
                })
                .collect(),
        }
    }

    /// Sum of `|x_i|^2 f(config_i)` for a translation-invariant diagonal `f`.
    pub fn diagonal_expectation<F: Fn(u64) -> f64>(&self, x: &[f64], f: F) -> f64 {
        x.iter()
            .enumerate()
            .map(|(i, a)| a * a * f(self.config(i)))
            .sum()
    }
}

/// Classical (Z-diagonal) energy of one configuration.
#[inline]
pub fn diagonal_energy(c: &Couplings, lat: &Lattice, bits: u64) -> f64 {
    let l = lat.len() as i64;
    let shifted = lat.translate(bits);
    let bond = bits ^ shifted;
    let zz_top = l - 2 * (bond & lat.top_mask()).count_ones() as i64;
    let zz_bottom = l - 2 * (bond & lat.bottom_mask()).count_ones() as i64;
    let zz_rung = l - 2 * ((bits ^ (bits >> 1)) & lat.top_mask()).count_ones() as i64;
    let (z_top, z_bottom) = crate::model::row_sums(lat, bits);
    c.k * (zz_top - zz_bottom - zz_rung - z_top) as f64 + 0.5 * c.u * z_bottom as f64
}

/// Off-diagonal terms as (spin-flip mask, matrix element).
pub fn flip_terms(c: &Couplings, lat: &Lattice) -> Vec<(u64, f64)> {
    let mut out = Vec::new();
    let mut push = |mask: u64, coef: f64| {
        if coef != 0.0 {
            out.push((mask, coef));
        }
    };
    for i in 0..lat.len() {
        push(lat.top_bit(i), -c.gamma_t);
        push(lat.bottom_bit(i), -c.gamma_b);
        push(lat.top_bit(i) | lat.top_bit(i + 1), -c.xi_tt);
        push(lat.bottom_bit(i) | lat.bottom_bit(i + 1), -c.xi_bb);
        push(lat.top_bit(i) | lat.bottom_bit(i), -c.xi_tb);
    }
    out
}

/// The ladder Hamiltonian restricted to one sector, applied on the fly.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    couplings: Couplings,
    basis: Arc<Basis>,
    diag: Vec<f64>,
    flips: Vec<(u64, f64)>,
    exec: Exec,
}

/// Full-basis operator for `couplings` on `lattice`.
pub fn build_hamiltonian(couplings: Couplings, lattice: Lattice) -> Result<Hamiltonian, ModelError> {
    Hamiltonian::new(couplings, Arc::new(Basis::new(lattice, Sector::Full)))
}

impl Hamiltonian {
    pub fn new(couplings: Couplings, basis: Arc<Basis>) -> Result<Self, ModelError> {
        couplings.validate()?;
        Ok(Self::from_parts(couplings, basis, true))
    }

    fn from_parts(couplings: Couplings, basis: Arc<Basis>, with_diagonal: bool) -> Self {
        let lat = basis.lattice();
        let diag = if with_diagonal {
            (0..basis.dim())
                .map(|i| diagonal_energy(&couplings, &lat, basis.config(i)))
                .collect()
        } else {
            vec![0.0; basis.dim()]
        };
        let flips = flip_terms(&couplings, &lat);
        Hamiltonian {
            couplings,
            basis,
            diag,
            flips,
            exec: Exec::default(),
        }
    }

    /// `dH/dGamma` for a uniform transverse field: `-sum_i (Xt_i + Xb_i)`.
    pub fn gamma_derivative(basis: Arc<Basis>) -> Self {
        let c = Couplings {
            gamma_t: 1.0,
            gamma_b: 1.0,
            ..Default::default()
        };
        Self::from_parts(c, basis, false)
    }

    /// `dH/dXi_tt`: `-sum_i Xt_i Xt_{i+1}`.
    pub fn xi_tt_derivative(basis: Arc<Basis>) -> Self {
        let c = Couplings {
            xi_tt: 1.0,
            ..Default::default()
        };
        Self::from_parts(c, basis, false)
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn couplings(&self) -> &Couplings {
        &self.couplings
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn lattice(&self) -> Lattice {
        self.basis.lattice()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    fn apply_range(&self, offset: usize, x: &[f64], out: &mut [f64]) {
        let b = &*self.basis;
        match b.sector {
            Sector::Full => {
                for (j, y) in out.iter_mut().enumerate() {
                    let i = offset + j;
                    let mut acc = self.diag[i] * x[i];
                    for &(m, coef) in &self.flips {
                        acc += coef * x[i ^ m as usize];
                    }
                    *y = acc;
                }
            }
            Sector::ZeroMomentum => {
                for (j, y) in out.iter_mut().enumerate() {
                    let i = offset + j;
                    let rep = b.reps[i] as usize;
                    let ni = b.norms[i];
                    let mut acc = self.diag[i] * x[i];
                    for &(m, coef) in &self.flips {
                        let t = b.lookup[rep ^ m as usize] as usize;
                        acc += coef * ni / b.norms[t] * x[t];
                    }
                    *y = acc;
                }
            }
        }
    }

    /// Single-threaded application, regardless of the configured executor.
    pub fn apply_sequential(&self, x: &[f64], y: &mut [f64]) {
        self.apply_range(0, x, y);
    }

    /// Dense matrix of the operator (for small sectors only).
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply_sequential(&e, &mut col);
            e[j] = 0.0;
            for i in 0..n {
                m[(i, j)] = col[i];
            }
        }
        m
    }
}

impl LinearOperator for Hamiltonian {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        if self.exec.is_parallel() && y.len() > CHUNK {
            par::for_each_chunk(self.exec, y, CHUNK, |off, out| self.apply_range(off, x, out));
        } else {
            self.apply_range(0, x, y);
        }
    }
}
