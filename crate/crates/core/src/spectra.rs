//! Low-lying spectrum, order parameters and minimum-gap analysis.
//!
//! Gap scans run in the zero-momentum sector by default. In the full space the
//! two translated Néel patterns of the staggered phase are split only by an
//! exponentially small tunnelling amplitude, so `E1 - E0` there measures that
//! splitting instead of the avoided crossing between the two phases.

use std::sync::Arc;

use thiserror::Error;

use crate::hamiltonian::{Basis, Hamiltonian, Sector};
use crate::lanczos::{dot, lowest_eigenpairs, EigenResult, LanczosOptions, SolverError};
use crate::model::{row_sums, staggered_top, Couplings, Lattice, ModelError};
use crate::par::{self, Exec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("eigensolver failed at {axis} = {at}: {source}")]
    SolverAt {
        axis: &'static str,
        at: f64,
        source: SolverError,
    },
    #[error("state norm {0} differs from 1 by more than 1e-8")]
    NotNormalized(f64),
    #[error("state has length {got}, basis has dimension {want}")]
    WrongLength { got: usize, want: usize },
    #[error("ground state is degenerate within {threshold:e} (gap {gap:e}); derivative undefined")]
    Degenerate { gap: f64, threshold: f64 },
    #[error("need at least two eigenvalues for a gap")]
    NoGap,
    #[error("scan range [{lo}, {hi}] is empty")]
    EmptyRange { lo: f64, hi: f64 },
    #[error("coarse grid needs at least 16 points, got {0}")]
    CoarseGridTooSmall(usize),
    #[error("refinement tolerance must be positive, got {0}")]
    BadRefineTol(f64),
    #[error("axis values are measured in units of U, which is zero in the template")]
    ZeroUnit,
    #[error("sizes must be even, ascending and at most 12: {0:?}")]
    BadSizes(Vec<usize>),
    #[error("need at least two points for a fit, got {0}")]
    TooFewPoints(usize),
    #[error("gap {gap} at L = {l} is not positive; cannot take its logarithm")]
    NonPositiveGap { l: usize, gap: f64 },
}

fn check_state(basis: &Basis, state: &[f64]) -> Result<(), SpectraError> {
    if state.len() != basis.dim() {
        return Err(SpectraError::WrongLength {
            got: state.len(),
            want: basis.dim(),
        });
    }
    let n = dot(Exec::Sequential, state, state).sqrt();
    if (n - 1.0).abs() > 1e-8 {
        return Err(SpectraError::NotNormalized(n));
    }
    Ok(())
}

/// `< |sum_i (-1)^i Zt_i| / L >`, the staggered magnetization of the top row.
pub fn staggered_top_magnetization(basis: &Basis, state: &[f64]) -> Result<f64, SpectraError> {
    check_state(basis, state)?;
    let lat = basis.lattice();
    let l = lat.len() as f64;
    Ok(basis.diagonal_expectation(state, |c| staggered_top(&lat, c).abs() as f64 / l))
}

/// `< sum_i Zb_i / L >`, the magnetization of the bottom row.
pub fn bottom_magnetization(basis: &Basis, state: &[f64]) -> Result<f64, SpectraError> {
    check_state(basis, state)?;
    let lat = basis.lattice();
    let l = lat.len() as f64;
    Ok(basis.diagonal_expectation(state, |c| row_sums(&lat, c).1 as f64 / l))
}

/// `< (sum_i (-1)^i Zt_i)^2 > / L^2`, the staggered structure factor of the top row.
pub fn staggered_order_parameter(basis: &Basis, state: &[f64]) -> Result<f64, SpectraError> {
    check_state(basis, state)?;
    let lat = basis.lattice();
    let l2 = (lat.len() * lat.len()) as f64;
    Ok(basis.diagonal_expectation(state, |c| {
        let s = staggered_top(&lat, c) as f64;
        s * s / l2
    }))
}

/// Ground-state energy derivatives from expectation values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyDerivatives {
    /// `dE0/dGamma` for a uniform transverse field on both rows.
    pub d_gamma: f64,
    /// `dE0/dXi_tt`.
    pub d_xi: f64,
}

/// Hellmann-Feynman derivatives of the lowest level in `eig`. Refuses when the
/// two lowest levels are closer than `100 * tol`.
pub fn hellmann_feynman_derivatives(
    basis: &Arc<Basis>,
    eig: &EigenResult,
    tol: f64,
) -> Result<EnergyDerivatives, SpectraError> {
    let threshold = 100.0 * tol;
    if eig.eigenvalues.len() >= 2 {
        let gap = eig.eigenvalues[1] - eig.eigenvalues[0];
        if gap < threshold {
            return Err(SpectraError::Degenerate { gap, threshold });
        }
    }
    expectation_derivatives(basis, &eig.eigenvectors[0])
}

/// `<psi| dH/dGamma |psi>` and `<psi| dH/dXi_tt |psi>` for any normalized state.
pub fn expectation_derivatives(basis: &Arc<Basis>, state: &[f64]) -> Result<EnergyDerivatives, SpectraError> {
    check_state(basis, state)?;
    let mut tmp = vec![0.0; state.len()];
    let mut expect = |op: Hamiltonian| {
        use crate::lanczos::LinearOperator;
        op.apply(state, &mut tmp);
        dot(Exec::Sequential, state, &tmp)
    };
    Ok(EnergyDerivatives {
        d_gamma: expect(Hamiltonian::gamma_derivative(basis.clone())),
        d_xi: expect(Hamiltonian::xi_tt_derivative(basis.clone())),
    })
}

/// Solver settings shared by all spectral calculations.
#[derive(Debug, Clone)]
pub struct SpectrumOptions {
    pub lanczos: LanczosOptions,
    pub sector: Sector,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            lanczos: LanczosOptions::default(),
            sector: Sector::ZeroMomentum,
        }
    }
}

impl SpectrumOptions {
    fn solver(&self) -> LanczosOptions {
        let mut o = self.lanczos.clone();
        if self.sector == Sector::ZeroMomentum && o.block == 0 {
            // no symmetry-protected degeneracies remain once momentum is fixed
            o.block = 1;
        }
        o
    }
}

/// Lowest eigenpairs of the ladder in the chosen sector.
pub fn lowest_states(couplings: Couplings, basis: &Arc<Basis>, opts: &SpectrumOptions) -> Result<EigenResult, SpectraError> {
    let h = Hamiltonian::new(couplings, basis.clone())?.with_exec(opts.lanczos.exec);
    Ok(lowest_eigenpairs(&h, &opts.solver())?)
}

/// Everything measured at one parameter point.
#[derive(Debug, Clone)]
pub struct PointObservables {
    pub energies: Vec<f64>,
    pub gap: f64,
    pub m_top_staggered: f64,
    pub m_bottom: f64,
    pub s_staggered: f64,
    /// `None` when the ground level is degenerate.
    pub derivatives: Option<EnergyDerivatives>,
}

pub fn observables(couplings: Couplings, basis: &Arc<Basis>, opts: &SpectrumOptions) -> Result<PointObservables, SpectraError> {
    let eig = lowest_states(couplings, basis, opts)?;
    if eig.eigenvalues.len() < 2 {
        return Err(SpectraError::NoGap);
    }
    let psi = &eig.eigenvectors[0];
    let derivatives = match hellmann_feynman_derivatives(basis, &eig, opts.lanczos.tol) {
        Ok(d) => Some(d),
        Err(SpectraError::Degenerate { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(PointObservables {
        gap: eig.eigenvalues[1] - eig.eigenvalues[0],
        m_top_staggered: staggered_top_magnetization(basis, psi)?,
        m_bottom: bottom_magnetization(basis, psi)?,
        s_staggered: staggered_order_parameter(basis, psi)?,
        energies: eig.eigenvalues,
        derivatives,
    })
}

/// Parameter swept by a scan, in units of the template's `U`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Uniform transverse field on both rows.
    Gamma,
    /// Top-row XX coupling.
    XiTT,
    /// Rung coupling `K`.
    K,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Gamma => "gamma_over_u",
            Axis::XiTT => "xi_tt_over_u",
            Axis::K => "k_over_u",
        }
    }

    /// Template with the swept coupling set to `x * U`.
    pub fn apply(self, template: &Couplings, x: f64) -> Result<Couplings, SpectraError> {
        if template.u == 0.0 {
            return Err(SpectraError::ZeroUnit);
        }
        let v = x * template.u;
        let mut c = *template;
        match self {
            Axis::Gamma => {
                c.gamma_t = v;
                c.gamma_b = v;
            }
            Axis::XiTT => c.xi_tt = v,
            Axis::K => c.k = v,
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapMinimum {
    pub location: f64,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct GapScan {
    pub axis: Axis,
    /// Coarse grid as (parameter, gap).
    pub samples: Vec<(f64, f64)>,
    /// Refined local minima in ascending parameter order.
    pub minima: Vec<GapMinimum>,
    pub global_min: GapMinimum,
}

/// Scan settings besides the template and lattice.
#[derive(Debug, Clone)]
pub struct ScanSpec {
    pub axis: Axis,
    pub lo: f64,
    pub hi: f64,
    pub n_coarse: usize,
    pub refine_tol: f64,
}

impl ScanSpec {
    pub fn new(axis: Axis, lo: f64, hi: f64, n_coarse: usize) -> Self {
        ScanSpec {
            axis,
            lo,
            hi,
            n_coarse,
            refine_tol: 1e-4,
        }
    }

    fn validate(&self) -> Result<(), SpectraError> {
        if !(self.lo < self.hi) {
            return Err(SpectraError::EmptyRange { lo: self.lo, hi: self.hi });
        }
        if self.n_coarse < 16 {
            return Err(SpectraError::CoarseGridTooSmall(self.n_coarse));
        }
        if !(self.refine_tol > 0.0) {
            return Err(SpectraError::BadRefineTol(self.refine_tol));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.n_coarse;
        (0..n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

fn gap_at(
    template: &Couplings,
    basis: &Arc<Basis>,
    axis: Axis,
    x: f64,
    opts: &SpectrumOptions,
) -> Result<f64, SpectraError> {
    let c = axis.apply(template, x)?;
    let eig = lowest_states(c, basis, opts).map_err(|e| match e {
        SpectraError::Solver(source) => SpectraError::SolverAt {
            axis: axis.name(),
            at: x,
            source,
        },
        other => other,
    })?;
    if eig.eigenvalues.len() < 2 {
        return Err(SpectraError::NoGap);
    }
    Ok(eig.eigenvalues[1] - eig.eigenvalues[0])
}

/// Indices of coarse local minima, endpoints included.
pub fn local_minima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    (0..n)
        .filter(|&i| {
            let left = i == 0 || values[i] < values[i - 1];
            let right = i + 1 == n || values[i] <= values[i + 1];
            left && right && n > 1
        })
        .collect()
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
pub fn golden_section<F, E>(mut a: f64, mut b: f64, tol: f64, f: F) -> Result<(f64, f64), E>
where
    F: Fn(f64) -> Result<f64, E>,
{
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

/// Coarse gap scan followed by golden-section refinement of every local minimum.
pub fn gap_scan(
    template: &Couplings,
    lattice: Lattice,
    spec: &ScanSpec,
    opts: &SpectrumOptions,
) -> Result<GapScan, SpectraError> {
    let basis = Arc::new(Basis::new(lattice, opts.sector));
    gap_scan_in(template, &basis, spec, opts)
}

/// As [`gap_scan`] with a prebuilt basis.
pub fn gap_scan_in(
    template: &Couplings,
    basis: &Arc<Basis>,
    spec: &ScanSpec,
    opts: &SpectrumOptions,
) -> Result<GapScan, SpectraError> {
    spec.validate()?;
    let grid = spec.grid();
    let exec = opts.lanczos.exec;
    let gaps: Vec<f64> = par::map_indexed(exec, grid.len(), |i| gap_at(template, basis, spec.axis, grid[i], opts))
        .into_iter()
        .collect::<Result<_, _>>()?;
    let idx = local_minima(&gaps);
    let last = grid.len() - 1;
    let refined: Vec<GapMinimum> = par::map_indexed(exec, idx.len(), |m| {
        let i = idx[m];
        let a = grid[i.saturating_sub(1)];
        let b = grid[(i + 1).min(last)];
        let (x, g) = golden_section(a, b, spec.refine_tol, |x| gap_at(template, basis, spec.axis, x, opts))?;
        // never report worse than the coarse sample that seeded the search
        Ok(if g <= gaps[i] {
            GapMinimum { location: x, gap: g }
        } else {
            GapMinimum {
                location: grid[i],
                gap: gaps[i],
            }
        })
    })
    .into_iter()
    .collect::<Result<_, SpectraError>>()?;
    let global_min = *refined
        .iter()
        .min_by(|a, b| a.gap.total_cmp(&b.gap))
        .expect("a finite grid always has a minimum");
    Ok(GapScan {
        axis: spec.axis,
        samples: grid.into_iter().zip(gaps).collect(),
        minima: refined,
        global_min,
    })
}

/// Least-squares line through `(L, ln gap)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapScalingFit {
    pub sizes: Vec<usize>,
    pub log_gaps: Vec<f64>,
    /// Slope of `ln gap` against `L` (the decay rate is its negative).
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl GapScalingFit {
    /// Slope of `log10 gap` against `L`.
    pub fn slope_per_decade(&self) -> f64 {
        self.slope / std::f64::consts::LN_10
    }
}

/// Closed-form least squares on `ln gap = slope * L + intercept`.
pub fn fit_log_gaps(sizes: &[usize], gaps: &[f64]) -> Result<GapScalingFit, SpectraError> {
    if sizes.len() < 2 || sizes.len() != gaps.len() {
        return Err(SpectraError::TooFewPoints(sizes.len().min(gaps.len())));
    }
    for (&l, &g) in sizes.iter().zip(gaps) {
        if !(g > 0.0) {
            return Err(SpectraError::NonPositiveGap { l, gap: g });
        }
    }
    let x: Vec<f64> = sizes.iter().map(|&l| l as f64).collect();
    let y: Vec<f64> = gaps.iter().map(|g| g.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(GapScalingFit {
        sizes: sizes.to_vec(),
        log_gaps: y,
        slope,
        intercept,
        r_squared,
    })
}

/// Minimum-gap scan at every size, then the exponential fit of the minima.
pub fn gap_scaling_fit(
    template: &Couplings,
    sizes: &[usize],
    spec: &ScanSpec,
    opts: &SpectrumOptions,
) -> Result<(GapScalingFit, Vec<GapScan>), SpectraError> {
    let ok = sizes.windows(2).all(|w| w[0] < w[1]) && sizes.iter().all(|&l| l % 2 == 0 && l <= 12);
    if !ok || sizes.is_empty() {
        return Err(SpectraError::BadSizes(sizes.to_vec()));
    }
    let mut scans = Vec::with_capacity(sizes.len());
    for &l in sizes {
        scans.push(gap_scan(template, Lattice::new(l)?, spec, opts)?);
    }
    let gaps: Vec<f64> = scans.iter().map(|s| s.global_min.gap).collect();
    Ok((fit_log_gaps(sizes, &gaps)?, scans))
}
