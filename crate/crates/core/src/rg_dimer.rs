//! Three-site block RG of the ladder in the large-K (dimer) limit.
//!
//! Each step picks a variational block projector, then maps the couplings
//! `(U, Γ, V, Ξ)` to their renormalized values. `V` is the longitudinal field on
//! the top row generated by the transformation. The bookkeeping variable
//! `Ū(l)` defined by `U(l) = 3^l (U − Ū(l))` does not depend on `U`, and its
//! limit is the critical value of the bare `U`.

use nalgebra::{Matrix3, SymmetricEigen};
use thiserror::Error;

use crate::par::{map_indexed, Exec};

/// Golden ratio.
pub const PHI: f64 = 1.618_033_988_749_895;
/// Linear block size of one RG step.
pub const BLOCK_SCALE: f64 = 3.0;
/// Largest number of RG steps a flow may take.
pub const MAX_STEPS: usize = 200;
/// Default convergence threshold on successive `Ū(l)`.
pub const DEFAULT_UBAR_TOL: f64 = 1e-10;

const PHI2: f64 = PHI * PHI;
const FEASIBILITY_TOL: f64 = 1e-8;
const THETA_GRID: usize = 720;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RgError {
    #[error("{name} is not finite ({value})")]
    NonFinite { name: &'static str, value: f64 },
    #[error("variational point violates its normalization by {0:e}")]
    Infeasible(f64),
    #[error("at most {MAX_STEPS} RG steps are allowed, got {0}")]
    TooManySteps(usize),
    #[error("flow did not converge in {steps} steps (last increment {increment:e})")]
    NotConverged { steps: usize, increment: f64 },
    #[error("U = {0} is critical; the scaling dimension needs an off-critical U")]
    CriticalU(f64),
    #[error("flow tail too short to estimate the scaling dimension ({0} converged steps)")]
    ShortTail(usize),
    #[error("projector with beta1 = beta2 = 0 does not keep the dimer structure")]
    StructureBreaking,
    #[error("penalty {config} must be positive, got {value}")]
    NonPositivePenalty { config: &'static str, value: f64 },
    #[error("phase boundary needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("no boundary point with Xi/U = {0} in the searched range")]
    NoBoundary(f64),
}

fn finite(name: &'static str, value: f64) -> Result<(), RgError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(RgError::NonFinite { name, value })
    }
}

/// Couplings of the effective dimer-limit Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DimerRgCouplings {
    /// Longitudinal field on the bottom row.
    pub u: f64,
    /// Transverse field on the top row.
    pub gamma: f64,
    /// Longitudinal field on the top row; zero for the bare ladder.
    pub v: f64,
    /// XX coupling along the top row.
    pub xi: f64,
}

impl DimerRgCouplings {
    /// Bare couplings of the ladder (`V = 0`).
    pub fn bare(u: f64, gamma: f64, xi: f64) -> Self {
        DimerRgCouplings { u, gamma, v: 0.0, xi }
    }

    pub fn scaled(&self, c: f64) -> Self {
        DimerRgCouplings {
            u: c * self.u,
            gamma: c * self.gamma,
            v: c * self.v,
            xi: c * self.xi,
        }
    }

    pub fn validate(&self) -> Result<(), RgError> {
        finite("U", self.u)?;
        finite("Gamma", self.gamma)?;
        finite("V", self.v)?;
        finite("Xi", self.xi)
    }
}

/// Parameters of the block projector.
///
/// The first block state is `α1|↑↓↑⟩ + α2|↑↑↑⟩` on the top row, the second mixes
/// the orthogonal combination (weight `z`) with `|↓↑↓⟩` (`β1`) and the two
/// one-defect states (`β2` each). Normalization: `α1² + α2² = 1` and
/// `z² + β1² + 2β2² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationalPoint {
    pub alpha1: f64,
    pub alpha2: f64,
    pub z: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl Default for VariationalPoint {
    fn default() -> Self {
        VariationalPoint {
            alpha1: 1.0,
            alpha2: 0.0,
            z: 0.0,
            beta1: 1.0,
            beta2: 0.0,
        }
    }
}

impl VariationalPoint {
    /// Point from `α = (cos θ, sin θ)` and `(z, β1, √2 β2)` on the unit sphere.
    pub fn from_angles(theta: f64, polar: f64, azimuth: f64) -> Self {
        let (s, c) = polar.sin_cos();
        VariationalPoint {
            alpha1: theta.cos(),
            alpha2: theta.sin(),
            z: c,
            beta1: s * azimuth.cos(),
            beta2: s * azimuth.sin() / std::f64::consts::SQRT_2,
        }
    }

    /// Largest violation of the two normalization conditions.
    pub fn constraint_residual(&self) -> f64 {
        let a = self.alpha1 * self.alpha1 + self.alpha2 * self.alpha2 - 1.0;
        let b = self.z * self.z + self.beta1 * self.beta1 + 2.0 * self.beta2 * self.beta2 - 1.0;
        a.abs().max(b.abs())
    }

    /// Gauge partner with `(α1, α2, z)` negated.
    pub fn flip_alpha(&self) -> Self {
        VariationalPoint {
            alpha1: -self.alpha1,
            alpha2: -self.alpha2,
            z: -self.z,
            ..*self
        }
    }

    /// Gauge partner with `(z, β1, β2)` negated.
    pub fn flip_beta(&self) -> Self {
        VariationalPoint {
            z: -self.z,
            beta1: -self.beta1,
            beta2: -self.beta2,
            ..*self
        }
    }

    /// Representative with `α2 ≥ 0` and `β2 ≥ 0`; ties fall back to `α1`, then `β1`, then `z`.
    pub fn canonical(&self) -> Self {
        let mut p = *self;
        if p.alpha2 < 0.0 || (p.alpha2 == 0.0 && p.alpha1 < 0.0) {
            p = p.flip_alpha();
        }
        let flip = if p.beta2 != 0.0 {
            p.beta2 < 0.0
        } else if p.beta1 != 0.0 {
            p.beta1 < 0.0
        } else {
            p.z < 0.0
        };
        if flip {
            p = p.flip_beta();
        }
        p
    }

    fn check(&self) -> Result<(), RgError> {
        let r = self.constraint_residual();
        if r.is_finite() && r <= FEASIBILITY_TOL {
            Ok(())
        } else {
            Err(RgError::Infeasible(r))
        }
    }
}

fn objective_unchecked(gamma: f64, v: f64, xi: f64, p: &VariationalPoint) -> f64 {
    let w = PHI2 - p.z * p.z;
    -gamma * (w * p.alpha1 * p.alpha2 + 2.0 * p.beta2 * (p.beta1 + p.z * p.alpha1))
        - v * (w * p.alpha1 * p.alpha1 + p.beta1 * p.beta1)
        + 2.0 * xi * p.beta2 * p.z * p.alpha2
}

/// Trace of the renormalized Hamiltonian over the dimer subspace, as a
/// function of the projector parameters.
pub fn variational_objective(gamma: f64, v: f64, xi: f64, point: &VariationalPoint) -> Result<f64, RgError> {
    finite("gamma", gamma)?;
    finite("v", v)?;
    finite("xi", xi)?;
    point.check()?;
    Ok(objective_unchecked(gamma, v, xi, point))
}

// For fixed α the objective is a quadratic form in c = (z, β1, √2 β2) on the
// unit sphere plus a constant, so its minimum over c is the lowest eigenvalue
// of a 3x3 matrix. That leaves a smooth one-dimensional problem in θ with
// period π.
struct Reduced {
    gamma: f64,
    v: f64,
    xi: f64,
}

struct Slice {
    value: f64,
    slope: f64,
    c: [f64; 3],
}

impl Reduced {
    fn eval(&self, theta: f64) -> Slice {
        let (a2, a1) = theta.sin_cos();
        let (g, v, xi) = (self.gamma, self.v, self.xi);
        let r2 = std::f64::consts::FRAC_1_SQRT_2;
        let m11 = g * a1 * a2 + v * a1 * a1;
        let m13 = (-g * a1 + xi * a2) * r2;
        let m23 = -g * r2;
        let m = Matrix3::new(m11, 0.0, m13, 0.0, -v, m23, m13, m23, 0.0);
        let eig = SymmetricEigen::new(m);
        let (mut i0, mut lo) = (0, eig.eigenvalues[0]);
        for i in 1..3 {
            if eig.eigenvalues[i] < lo {
                lo = eig.eigenvalues[i];
                i0 = i;
            }
        }
        let col = eig.eigenvectors.column(i0);
        let c = [col[0], col[1], col[2]];

        let cos2 = a1 * a1 - a2 * a2;
        let value = -g * PHI2 * a1 * a2 - v * PHI2 * a1 * a1 + lo;
        // Hellmann-Feynman derivative of the eigenvalue.
        let dm11 = g * cos2 - 2.0 * v * a1 * a2;
        let dm13 = (g * a2 + xi * a1) * r2;
        let slope = -g * PHI2 * cos2 + 2.0 * v * PHI2 * a1 * a2 + dm11 * c[0] * c[0] + 2.0 * dm13 * c[0] * c[2];
        Slice { value, slope, c }
    }

    fn point(&self, theta: f64) -> VariationalPoint {
        let s = self.eval(theta);
        let n = (s.c[0] * s.c[0] + s.c[1] * s.c[1] + s.c[2] * s.c[2]).sqrt();
        VariationalPoint {
            alpha1: theta.cos(),
            alpha2: theta.sin(),
            z: s.c[0] / n,
            beta1: s.c[1] / n,
            beta2: s.c[2] / n / std::f64::consts::SQRT_2,
        }
    }

    // Refines a grid minimum bracketed by [lo, hi]. Bisection on the slope when
    // it changes sign, golden section on the value otherwise.
    fn refine(&self, lo: f64, hi: f64) -> (f64, f64) {
        let (mut a, mut b) = (lo, hi);
        if self.eval(a).slope < 0.0 && self.eval(b).slope > 0.0 {
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if self.eval(m).slope < 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            let m = 0.5 * (a + b);
            return (m, self.eval(m).value);
        }
        let inv = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - inv * (b - a);
        let mut d = a + inv * (b - a);
        let (mut fc, mut fd) = (self.eval(c).value, self.eval(d).value);
        for _ in 0..200 {
            if (b - a).abs() < 1e-15 {
                break;
            }
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv * (b - a);
                fc = self.eval(c).value;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv * (b - a);
                fd = self.eval(d).value;
            }
        }
        let m = 0.5 * (a + b);
        (m, self.eval(m).value)
    }
}

/// Global minimizer of [`variational_objective`], in canonical gauge.
///
/// All-zero couplings return the default point `α1 = β1 = 1`.
pub fn minimize_variational(gamma: f64, v: f64, xi: f64) -> Result<VariationalPoint, RgError> {
    finite("gamma", gamma)?;
    finite("v", v)?;
    finite("xi", xi)?;
    if gamma == 0.0 && v == 0.0 && xi == 0.0 {
        return Ok(VariationalPoint::default());
    }
    let red = Reduced { gamma, v, xi };
    let h = std::f64::consts::PI / THETA_GRID as f64;
    let values: Vec<f64> = (0..THETA_GRID).map(|i| red.eval(i as f64 * h).value).collect();
    let scale = gamma.abs().max(v.abs()).max(xi.abs());

    let mut best: Option<(f64, f64)> = None;
    for i in 0..THETA_GRID {
        let prev = values[(i + THETA_GRID - 1) % THETA_GRID];
        let next = values[(i + 1) % THETA_GRID];
        if values[i] > prev || values[i] > next {
            continue;
        }
        let t = i as f64 * h;
        let (mut theta, mut value) = red.refine(t - h, t + h);
        if values[i] <= value {
            // Keeps exact zeros such as α2 = 0 when refinement gains nothing.
            (theta, value) = (t, values[i]);
        }
        // Earlier candidates win ties so that degenerate cases stay deterministic.
        let better = match best {
            None => true,
            Some((_, b)) => value < b - 1e-13 * scale,
        };
        if better {
            best = Some((theta, value));
        }
    }
    let (theta, _) = best.unwrap_or((0.0, values[0]));
    let p = red.point(theta).canonical();
    p.check()?;
    Ok(p)
}

/// Bracketed quantities shared by the `U` and `Ū` recurrences.
fn u_increment(c: &DimerRgCouplings, p: &VariationalPoint) -> f64 {
    let VariationalPoint { alpha1: a1, alpha2: a2, z, beta1: b1, beta2: b2 } = *p;
    c.gamma * (2.0 * b2 * (b1 + z * a1) + (1.0 - z * z) * a1 * a2) - c.v * (2.0 - (1.0 - z * z) * a1 * a1 - b1 * b1)
        - 2.0 * c.xi * b2 * z * a2
}

/// Renormalized `(Γ, V, Ξ)` for the projector `p`; `U` is handled separately.
fn renormalize(c: &DimerRgCouplings, p: &VariationalPoint) -> (f64, f64, f64) {
    let VariationalPoint { alpha1: a1, alpha2: a2, z, beta1: b1, beta2: b2 } = *p;
    let gamma = c.gamma * (2.0 * b2 * a2 + z * (a1 * a1 - a2 * a2)) - 2.0 * c.v * z * a1 * a2 + 2.0 * c.xi * b2 * a1;
    let v = c.gamma * (2.0 * b2 * (b1 + z * a1) - (1.0 + z * z) * a1 * a2) + c.v * (1.0 - (1.0 + z * z) * a1 * a1 + b1 * b1)
        - 2.0 * c.xi * b2 * z * a2;
    let xi = c.xi * a2 * a2 * b2 * b2;
    (gamma, v, xi)
}

/// One point of an RG trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub l: usize,
    pub couplings: DimerRgCouplings,
    pub ubar: f64,
    /// Projector chosen for the couplings of this state.
    pub point: VariationalPoint,
    /// Current system length relative to the bare one, `3^-l`.
    pub length_ratio: f64,
    /// Bare `U`; with `ubar` it fixes `couplings.u = 3^l (bare_u − ubar)`.
    pub bare_u: f64,
}

impl FlowState {
    /// Start of a flow; `bare.v` is normally zero.
    pub fn initial(bare: DimerRgCouplings) -> Result<Self, RgError> {
        bare.validate()?;
        let point = minimize_variational(bare.gamma, bare.v, bare.xi)?;
        Ok(FlowState {
            l: 0,
            couplings: bare,
            ubar: 0.0,
            point,
            length_ratio: 1.0,
            bare_u: bare.u,
        })
    }
}

/// One RG step.
pub fn rg_step(state: &FlowState) -> Result<FlowState, RgError> {
    let c = &state.couplings;
    let inc = u_increment(c, &state.point);
    let ubar = state.ubar + BLOCK_SCALE.powi(-(state.l as i32) - 1) * inc;
    let (gamma, v, xi) = renormalize(c, &state.point);
    let l = state.l + 1;
    let couplings = DimerRgCouplings {
        u: BLOCK_SCALE.powi(l as i32) * (state.bare_u - ubar),
        gamma,
        v,
        xi,
    };
    couplings.validate()?;
    let point = minimize_variational(gamma, v, xi)?;
    Ok(FlowState {
        l,
        couplings,
        ubar,
        point,
        length_ratio: state.length_ratio / BLOCK_SCALE,
        bare_u: state.bare_u,
    })
}

/// Iterates [`rg_step`] up to `l_max` times, stopping once
/// `|Ū(l+1) − Ū(l)| < ubar_tol`. Every state, including the bare one, is returned.
pub fn run_flow(bare: DimerRgCouplings, l_max: usize, ubar_tol: f64) -> Result<Vec<FlowState>, RgError> {
    if l_max > MAX_STEPS {
        return Err(RgError::TooManySteps(l_max));
    }
    let mut states = vec![FlowState::initial(bare)?];
    for _ in 0..l_max {
        let next = rg_step(states.last().unwrap())?;
        let done = (next.ubar - states.last().unwrap().ubar).abs() < ubar_tol;
        states.push(next);
        if done {
            break;
        }
    }
    Ok(states)
}

/// Critical bare `U` for transverse field `gamma` and XX coupling `xi`.
pub fn critical_ubar(gamma: f64, xi: f64, ubar_tol: f64) -> Result<f64, RgError> {
    let states = run_flow(DimerRgCouplings::bare(0.0, gamma, xi), MAX_STEPS, ubar_tol)?;
    let n = states.len();
    let increment = (states[n - 1].ubar - states[n - 2].ubar).abs();
    if increment >= ubar_tol && increment != 0.0 {
        return Err(RgError::NotConverged { steps: n - 1, increment });
    }
    Ok(states[n - 1].ubar)
}

/// Ground-state phase in the dimer limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Symmetric,
    Staggered,
    Critical,
}

impl Phase {
    pub fn label(self) -> &'static str {
        match self {
            Phase::Symmetric => "symmetric",
            Phase::Staggered => "staggered",
            Phase::Critical => "critical",
        }
    }
}

/// Relative width of the band classified as critical.
pub const CRITICAL_TOL: f64 = 1e-9;

pub fn classify_phase(u: f64, gamma: f64, xi: f64) -> Result<Phase, RgError> {
    finite("U", u)?;
    let ubar = critical_ubar(gamma, xi, 0.0)?;
    let d = u - ubar;
    Ok(if d.abs() <= CRITICAL_TOL * u.abs().max(1.0) {
        Phase::Critical
    } else if d < 0.0 {
        Phase::Symmetric
    } else {
        Phase::Staggered
    })
}

/// Point on the dimer-limit phase boundary in the `(Ξ/U, Γ/U)` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub xi_over_u: f64,
    pub gamma_over_u: f64,
}

/// Boundary point on the ray through `(gamma, xi)`.
pub fn boundary_point(gamma: f64, xi: f64) -> Result<BoundaryPoint, RgError> {
    let ubar = critical_ubar(gamma, xi, 0.0)?;
    Ok(BoundaryPoint {
        xi_over_u: xi / ubar,
        gamma_over_u: gamma / ubar,
    })
}

// Ray ratio t = Ξ/Γ whose boundary point has Ξ/U = target, i.e. the root of
// t − target·Ū(1, t). Bracketed by expansion, then solved by Illinois regula falsi.
fn ray_for_xi_over_u(target: f64) -> Result<f64, RgError> {
    let h = |t: f64| -> Result<f64, RgError> { Ok(t - target * critical_ubar(1.0, t, 0.0)?) };
    if target == 0.0 {
        return Ok(0.0);
    }
    let guess = target * critical_ubar(1.0, 0.0, 0.0)?;
    let (mut a, mut b) = (0.0, guess);
    let (mut fa, mut fb) = (h(a)?, h(b)?);
    let mut grow = 0;
    while fa * fb > 0.0 {
        grow += 1;
        if grow > 40 {
            return Err(RgError::NoBoundary(target));
        }
        a = b;
        fa = fb;
        b *= 1.5;
        fb = h(b)?;
    }
    let mut side = 0;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = h(c)?;
        if fc == 0.0 || (b - a).abs() <= 1e-14 * c.abs().max(1.0) {
            return Ok(c);
        }
        if fc * fb < 0.0 {
            a = b;
            fa = fb;
            side = 0;
        } else {
            fa *= if side == 1 { 0.5 } else { 1.0 };
            side = 1;
        }
        b = c;
        fb = fc;
    }
    Ok(b)
}

/// Boundary point on the unit-field ray whose `Ξ/U` equals `xi_over_u`.
pub fn boundary_at_xi_over_u(xi_over_u: f64) -> Result<BoundaryPoint, RgError> {
    finite("xi_over_u", xi_over_u)?;
    boundary_point(1.0, ray_for_xi_over_u(xi_over_u)?)
}

/// Boundary points for `n_points` evenly spaced `Ξ/U` values spanning `range`.
pub fn phase_boundary(range: (f64, f64), n_points: usize, exec: Exec) -> Result<Vec<BoundaryPoint>, RgError> {
    if n_points < 2 {
        return Err(RgError::TooFewPoints(n_points));
    }
    finite("range start", range.0)?;
    finite("range end", range.1)?;
    let step = (range.1 - range.0) / (n_points - 1) as f64;
    map_indexed(exec, n_points, |i| boundary_at_xi_over_u(range.0 + step * i as f64))
    .into_iter()
    .collect()
}

/// Growth exponent of `U` near the unstable fixed point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingDimension {
    pub y_u: f64,
    /// Anomalous dimension `2 + d − 2 y_U` with `d = 1`.
    pub eta: f64,
    /// Steps of the converged tail used.
    pub tail: usize,
}

/// `y_U = log_3(U(l+1)/U(l))` along the converged tail of a flow started at bare `u`.
pub fn scaling_dimension_at(u: f64, gamma: f64, xi: f64) -> Result<ScalingDimension, RgError> {
    let states = run_flow(DimerRgCouplings::bare(u, gamma, xi), 60, 0.0)?;
    let ubar = states.last().unwrap().ubar;
    if (u - ubar).abs() <= CRITICAL_TOL * u.abs().max(1.0) {
        return Err(RgError::CriticalU(u));
    }
    // Tail: states whose Ū no longer moves at the 1e-14 level.
    let tail: Vec<&FlowState> = states.iter().filter(|s| (s.ubar - ubar).abs() <= 1e-14 * ubar.abs().max(1.0)).collect();
    if tail.len() < 3 {
        return Err(RgError::ShortTail(tail.len()));
    }
    let (a, b) = (tail[tail.len() - 2], tail[tail.len() - 1]);
    let y_u = (b.couplings.u / a.couplings.u).ln() / BLOCK_SCALE.ln();
    Ok(ScalingDimension {
        y_u,
        eta: 2.0 + 1.0 - 2.0 * y_u,
        tail: tail.len(),
    })
}

/// [`scaling_dimension_at`] with `U` one percent above its critical value.
pub fn scaling_dimension_yu(gamma: f64, xi: f64) -> Result<ScalingDimension, RgError> {
    let ubar = critical_ubar(gamma, xi, 0.0)?;
    let u = ubar + 0.01 * ubar.abs().max(1e-3);
    scaling_dimension_at(u, gamma, xi)
}

/// Two-column configurations outside the dimer subspace, written `top/bottom`
/// with `u` for up and `d` for down.
pub const PENALTY_CONFIGS: [&str; 11] = [
    "dd/uu", "uu/dd", "dd/dd", "uu/du", "du/du", "ud/du", "dd/du", "uu/ud", "du/ud", "ud/ud", "dd/ud",
];

/// Energy penalties (units of K) of the configurations in [`PENALTY_CONFIGS`] order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyTable(pub [f64; 11]);

impl PenaltyTable {
    /// Penalties of the bare ladder.
    pub fn bare() -> Self {
        PenaltyTable([4.0, 2.0, 2.0, 3.0, 1.0, 3.0, 5.0, 3.0, 3.0, 1.0, 5.0])
    }

    pub fn get(&self, config: &str) -> Option<f64> {
        PENALTY_CONFIGS.iter().position(|c| *c == config).map(|i| self.0[i])
    }

    fn check_positive(&self) -> Result<(), RgError> {
        for (config, &value) in PENALTY_CONFIGS.iter().zip(self.0.iter()) {
            if !(value > 0.0 && value.is_finite()) {
                return Err(RgError::NonPositivePenalty { config, value });
            }
        }
        Ok(())
    }
}

/// Penalties after one block step with projector `point`.
pub fn renormalized_penalties(table: &PenaltyTable, point: &VariationalPoint) -> Result<PenaltyTable, RgError> {
    table.check_positive()?;
    point.check()?;
    let (b1, b2, b3, z) = (point.beta1 * point.beta1, point.beta2 * point.beta2, point.beta2 * point.beta2, point.z * point.z);
    if b1 == 0.0 && b2 == 0.0 {
        return Err(RgError::StructureBreaking);
    }
    let k = &table.0;
    let (dd_uu, uu_dd, dd_dd, uu_du, du_du, ud_du, dd_du, uu_ud, du_ud, ud_ud, dd_ud) =
        (k[0], k[1], k[2], k[3], k[4], k[5], k[6], k[7], k[8], k[9], k[10]);
    let out = PenaltyTable([
        dd_uu * (b1 + b2) * (b1 + b3),
        uu_dd,
        dd_dd,
        uu_du,
        du_du,
        uu_du * (z + b2) + ud_du * (b1 + b3),
        du_du * (z + b2) + dd_du * (b1 + b3),
        uu_ud,
        uu_ud * (z + b3) + du_ud * (b1 + b2),
        ud_ud,
        ud_ud * (z + b3) + dd_ud * (b1 + b2),
    ]);
    Ok(out)
}
