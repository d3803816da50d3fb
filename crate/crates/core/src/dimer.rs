//! Dimer picture of the large-K ladder.
//!
//! Zero-penalty spin configurations map one-to-one onto hardcore dimer
//! coverings of the dual two-leg ladder. The dual sites sit at `x = i + ½`,
//! one above the top row and one between the rows. Edges are stored as bit
//! sets indexed by site `i` (0-based):
//!
//! * `top` bit `i`: upper horizontal dimer over top site `i` (a down top spin),
//! * `bottom` bit `i`: lower horizontal dimer across rung `i` (anti-aligned rung),
//! * `vertical` bit `i`: vertical dimer at `x = i + ½` (top pair `i, i+1` both up).
//!
//! The winding number is the top-minus-bottom dimer count of a plaquette,
//! weighted by the sublattice sign `(−1)^(i+1)` so that it takes the same value
//! on every plaquette.

use std::collections::HashMap;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::lanczos::{lowest_eigenpairs, sorted_eigen, LanczosOptions, LinearOperator, SolverError};
use crate::model::SpinConfig;

/// Longest ladder handled by the dimer routines.
pub const MAX_DIMER_LENGTH: usize = 20;
/// Largest dimer basis accepted by [`build_dimer_hamiltonian`].
pub const MAX_DIMER_BASIS: usize = 20_000;
// Columnar blocks up to this size are diagonalized densely.
const DENSE_LIMIT: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DimerError {
    #[error("dimer ladder length must be even and within 4..={MAX_DIMER_LENGTH}, got {0}")]
    BadLength(usize),
    #[error("dimer basis of {0} states exceeds the limit of {MAX_DIMER_BASIS}")]
    BasisTooLarge(usize),
    #[error("{name} is not finite ({value})")]
    NonFinite { name: &'static str, value: f64 },
    #[error("U must be positive for a crossing search, got {0}")]
    NonPositiveU(f64),
    #[error("no level crossing for Gamma_t/U in [{lo}, {hi}]")]
    NoCrossing { lo: f64, hi: f64 },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

fn check_length(l: usize) -> Result<(), DimerError> {
    if l < 4 || l % 2 != 0 || l > MAX_DIMER_LENGTH {
        return Err(DimerError::BadLength(l));
    }
    Ok(())
}

fn rot_right(mask: u32, l: usize) -> u32 {
    // bit i of the result is bit i+1 of the input
    let full = (1u32 << l) - 1;
    ((mask >> 1) | (mask << (l - 1))) & full
}

/// Sublattice sign `(−1)^(i+1)` of 0-based site `i`.
fn sublattice(i: usize) -> i32 {
    if i % 2 == 0 {
        -1
    } else {
        1
    }
}

/// Hardcore dimer covering of the dual ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DimerCovering {
    pub l: usize,
    pub top: u32,
    pub bottom: u32,
    pub vertical: u32,
    pub winding: i8,
}

impl DimerCovering {
    /// Builds a covering from edge sets, or `None` if some dual site is not
    /// touched exactly once or the winding differs between plaquettes.
    pub fn from_edges(l: usize, top: u32, bottom: u32, vertical: u32) -> Option<Self> {
        if !(2..=31).contains(&l) {
            return None;
        }
        let full = (1u32 << l) - 1;
        if (top | bottom | vertical) & !full != 0 {
            return None;
        }
        // Dual site j (x = j + ½) meets horizontal edges j and j+1 and vertical j.
        for row in [top, bottom] {
            for j in 0..l {
                let h = (row >> j & 1) + (row >> ((j + 1) % l) & 1);
                if h + (vertical >> j & 1) != 1 {
                    return None;
                }
            }
        }
        let w = |i: usize| sublattice(i) * ((top >> i & 1) as i32 - (bottom >> i & 1) as i32);
        let w0 = w(0);
        if (1..l).any(|i| w(i) != w0) {
            return None;
        }
        Some(DimerCovering {
            l,
            top,
            bottom,
            vertical,
            winding: w0 as i8,
        })
    }

    pub fn vertical_count(&self) -> u32 {
        self.vertical.count_ones()
    }

    /// Plaquettes holding both a top and a bottom horizontal dimer.
    pub fn double_count(&self) -> u32 {
        (self.top & self.bottom).count_ones()
    }
}

/// Columnar (bottom row up, no adjacent down top spins) or staggered (bottom
/// row down, top row Néel).
fn in_ground_space(down_top: u32, bottom_up: u32, l: usize) -> bool {
    let full = (1u32 << l) - 1;
    if bottom_up == full {
        down_top & rot_right(down_top, l) == 0
    } else if bottom_up == 0 {
        let even = (0..l).step_by(2).fold(0u32, |m, i| m | 1 << i);
        down_top == even || down_top == full & !even
    } else {
        false
    }
}

fn covering_from_rows(l: usize, down_top: u32, bottom_up: u32) -> Option<DimerCovering> {
    if !in_ground_space(down_top, bottom_up, l) {
        return None;
    }
    let full = (1u32 << l) - 1;
    let up_top = full & !down_top;
    let vertical = up_top & rot_right(up_top, l);
    // Rung frustrated when top and bottom disagree.
    let bottom = up_top ^ bottom_up;
    DimerCovering::from_edges(l, down_top, bottom, vertical)
}

/// Dimer covering of a zero-penalty configuration, `None` otherwise.
pub fn spin_to_dimer(config: &SpinConfig) -> Option<DimerCovering> {
    let l = config.lattice().len();
    let mut down_top = 0u32;
    let mut bottom_up = 0u32;
    for i in 0..l {
        if !config.top_up(i) {
            down_top |= 1 << i;
        }
        if config.bottom_up(i) {
            bottom_up |= 1 << i;
        }
    }
    covering_from_rows(l, down_top, bottom_up)
}

/// Inverse of [`spin_to_dimer`].
pub fn dimer_to_spin(cov: &DimerCovering) -> Result<SpinConfig, crate::model::ModelError> {
    let l = cov.l;
    let top: Vec<bool> = (0..l).map(|i| cov.top >> i & 1 == 0).collect();
    let bottom = vec![cov.winding == 0; l];
    SpinConfig::from_rows(&top, &bottom)
}

/// `F_1 = 2`, `F_2 = 3`, `F_n = F_{n−1} + F_{n−2}`.
pub fn fibonacci(n: usize) -> u64 {
    let (mut a, mut b) = (2u64, 3u64);
    if n <= 1 {
        return if n == 1 { a } else { 1 };
    }
    for _ in 2..n {
        let c = a + b;
        a = b;
        b = c;
    }
    b
}

/// Top-row down masks of all columnar configurations, ascending.
///
/// Built site by site: a down spin may only follow an up spin, and the last
/// site may be down only if the first is up.
pub fn columnar_masks(l: usize) -> Result<Vec<u32>, DimerError> {
    check_length(l)?;
    fn extend(l: usize, i: usize, mask: u32, prev_down: bool, out: &mut Vec<u32>) {
        if i == l {
            out.push(mask);
            return;
        }
        extend(l, i + 1, mask, false, out);
        let wraps = i == l - 1 && mask & 1 != 0;
        if !prev_down && !wraps {
            extend(l, i + 1, mask | 1 << i, true, out);
        }
    }
    let mut out = Vec::new();
    extend(l, 0, 0, false, &mut out);
    out.sort_unstable();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectorCensus {
    pub l: usize,
    pub columnar_count: u64,
    pub staggered_count: u64,
    pub total: u64,
}

/// Counts the zero-penalty states of a length-`l` ladder.
pub fn enumerate_ground_space(l: usize) -> Result<SectorCensus, DimerError> {
    let columnar = columnar_masks(l)?.len() as u64;
    debug_assert_eq!(columnar, fibonacci(l - 1) + fibonacci(l - 3));
    Ok(SectorCensus {
        l,
        columnar_count: columnar,
        staggered_count: 2,
        total: columnar + 2,
    })
}

/// Coverings of the ground space ordered by winding, then by top mask.
pub fn dimer_basis(l: usize) -> Result<Vec<DimerCovering>, DimerError> {
    let full = (1u32 << l) - 1;
    let even = (0..l).step_by(2).fold(0u32, |m, i| m | 1 << i);
    let mut out: Vec<DimerCovering> = columnar_masks(l)?
        .into_iter()
        .map(|d| covering_from_rows(l, d, full).expect("columnar mask is a covering"))
        .chain([even, full & !even].into_iter().map(|d| covering_from_rows(l, d, 0).expect("Néel state is a covering")))
        .collect();
    out.sort_by_key(|c| (c.winding, c.top));
    Ok(out)
}

/// Quantum dimer Hamiltonian in the covering basis.
#[derive(Debug, Clone)]
pub struct DimerHamiltonian {
    pub l: usize,
    pub u: f64,
    pub gamma_t: f64,
    pub xi_tt: f64,
    pub basis: Vec<DimerCovering>,
    pub diagonal: Vec<f64>,
    /// Off-diagonal elements `(row, col, value)`, each unordered pair once per direction.
    pub off_diagonal: Vec<(usize, usize, f64)>,
}

// Plaquette flip at i: verticals at i−1 and i <-> top and bottom dimers at i.
fn plaquette_flips(c: &DimerCovering) -> Vec<DimerCovering> {
    let l = c.l;
    let mut out = Vec::new();
    for i in 0..l {
        let left = (i + l - 1) % l;
        let bit = 1u32 << i;
        let lv = 1u32 << left;
        if c.vertical & lv != 0 && c.vertical & bit != 0 {
            out.push(DimerCovering { vertical: c.vertical & !(lv | bit), top: c.top | bit, bottom: c.bottom | bit, ..*c });
        } else if c.top & bit != 0 && c.bottom & bit != 0 {
            out.push(DimerCovering { vertical: c.vertical | lv | bit, top: c.top & !bit, bottom: c.bottom & !bit, ..*c });
        }
    }
    out
}

// Shift on plaquettes (i, i+1): "=" on i with a vertical at i+1 <-> a vertical
// at i−1 with "=" on i+1.
fn pair_shifts(c: &DimerCovering) -> Vec<DimerCovering> {
    let l = c.l;
    let mut out = Vec::new();
    for i in 0..l {
        let a = 1u32 << i;
        let b = 1u32 << ((i + 1) % l);
        let left = 1u32 << ((i + l - 1) % l);
        let right = b;
        if c.top & a != 0 && c.bottom & a != 0 && c.vertical & right != 0 {
            out.push(DimerCovering {
                top: (c.top & !a) | b,
                bottom: (c.bottom & !a) | b,
                vertical: (c.vertical & !right) | left,
                ..*c
            });
        }
        if c.top & b != 0 && c.bottom & b != 0 && c.vertical & left != 0 {
            out.push(DimerCovering {
                top: (c.top & !b) | a,
                bottom: (c.bottom & !b) | a,
                vertical: (c.vertical & !left) | right,
                ..*c
            });
        }
    }
    out
}

/// Assembles the dimer Hamiltonian: `U` per vertical dimer, `2U` per doubly
/// occupied plaquette, `−Γt` plaquette flips and `−Ξtt` two-plaquette shifts.
pub fn build_dimer_hamiltonian(u: f64, gamma_t: f64, xi_tt: f64, l: usize) -> Result<DimerHamiltonian, DimerError> {
    for (name, value) in [("U", u), ("gamma_t", gamma_t), ("xi_tt", xi_tt)] {
        if !value.is_finite() {
            return Err(DimerError::NonFinite { name, value });
        }
    }
    check_length(l)?;
    let size = fibonacci(l - 1) + fibonacci(l - 3) + 2;
    if size as usize > MAX_DIMER_BASIS {
        return Err(DimerError::BasisTooLarge(size as usize));
    }
    let basis = dimer_basis(l)?;
    let index: HashMap<(u32, u32, u32), usize> =
        basis.iter().enumerate().map(|(i, c)| ((c.top, c.bottom, c.vertical), i)).collect();
    let diagonal = basis.iter().map(|c| u * (c.vertical_count() as f64 + 2.0 * c.double_count() as f64)).collect();
    let mut acc: HashMap<(usize, usize), f64> = HashMap::new();
    for (j, c) in basis.iter().enumerate() {
        for (moves, amp) in [(plaquette_flips(c), -gamma_t), (pair_shifts(c), -xi_tt)] {
            if amp == 0.0 {
                continue;
            }
            for m in moves {
                let i = *index.get(&(m.top, m.bottom, m.vertical)).expect("moves stay in the ground space");
                *acc.entry((i, j)).or_insert(0.0) += amp;
            }
        }
    }
    let mut off_diagonal: Vec<(usize, usize, f64)> = acc.into_iter().map(|((i, j), v)| (i, j, v)).collect();
    off_diagonal.sort_by_key(|e| (e.0, e.1));
    Ok(DimerHamiltonian {
        l,
        u,
        gamma_t,
        xi_tt,
        basis,
        diagonal,
        off_diagonal,
    })
}

impl DimerHamiltonian {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.diagonal.clone()));
        for &(i, j, v) in &self.off_diagonal {
            m[(i, j)] += v;
        }
        m
    }

    /// Indices of the states with winding `w`.
    pub fn sector(&self, w: i8) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.basis[i].winding == w).collect()
    }

    /// Lowest energy within the winding-`w` block.
    pub fn sector_ground_energy(&self, w: i8) -> Result<f64, DimerError> {
        let idx = self.sector(w);
        let block = Block::new(self, &idx);
        if idx.len() <= DENSE_LIMIT {
            let (vals, _) = sorted_eigen(block.dense());
            return Ok(vals[0]);
        }
        let opts = LanczosOptions { k: 1, tol: 1e-10, ..Default::default() };
        Ok(lowest_eigenpairs(&block, &opts)?.eigenvalues[0])
    }
}

/// Restriction of a dimer Hamiltonian to a subset of basis states.
struct Block {
    diag: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
}

impl Block {
    fn new(h: &DimerHamiltonian, idx: &[usize]) -> Self {
        let pos: HashMap<usize, usize> = idx.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let mut rows = vec![Vec::new(); idx.len()];
        for &(i, j, v) in &h.off_diagonal {
            if let (Some(&p), Some(&q)) = (pos.get(&i), pos.get(&j)) {
                rows[p].push((q, v));
            }
        }
        Block {
            diag: idx.iter().map(|&i| h.diagonal[i]).collect(),
            rows,
        }
    }

    fn dense(&self) -> DMatrix<f64> {
        let n = self.diag.len();
        let mut m = DMatrix::zeros(n, n);
        for p in 0..n {
            m[(p, p)] = self.diag[p];
            for &(q, v) in &self.rows[p] {
                m[(p, q)] += v;
            }
        }
        m
    }
}

impl LinearOperator for Block {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (p, yp) in y.iter_mut().enumerate() {
            *yp = self.diag[p] * x[p] + self.rows[p].iter().map(|&(q, v)| v * x[q]).sum::<f64>();
        }
    }
}

/// Strict crossing between the columnar ground level and the staggered level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimerCrossing {
    pub gamma_over_u: f64,
    /// Columnar minus staggered energy at the returned point.
    pub residual: f64,
}

/// `Γt/U` in `[lo, hi]` where the columnar ground energy meets the staggered
/// energy, located by bisection to `1e-8`. Energies are in units of `U = 1`.
pub fn dimer_level_crossing(xi_tt_over_u: f64, l: usize, lo: f64, hi: f64) -> Result<DimerCrossing, DimerError> {
    let f = |g: f64| -> Result<f64, DimerError> {
        let h = build_dimer_hamiltonian(1.0, g, xi_tt_over_u, l)?;
        let stag = h.sector_ground_energy(1)?.min(h.sector_ground_energy(-1)?);
        Ok(h.sector_ground_energy(0)? - stag)
    };
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a)?, f(b)?);
    if fa == 0.0 {
        return Ok(DimerCrossing { gamma_over_u: a, residual: 0.0 });
    }
    if fb == 0.0 {
        return Ok(DimerCrossing { gamma_over_u: b, residual: 0.0 });
    }
    if fa * fb > 0.0 {
        return Err(DimerError::NoCrossing { lo, hi });
    }
    let sa = fa.signum();
    while b - a > 1e-8 {
        let m = 0.5 * (a + b);
        if f(m)?.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    let m = 0.5 * (a + b);
    Ok(DimerCrossing { gamma_over_u: m, residual: f(m)? })
}
