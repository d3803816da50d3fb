//! Two-site block RG of the transverse-field Ising chain with XX coupling.
//!
//! This is the large-U limit of the ladder: the bottom row freezes and the
//! top row becomes (after a sublattice gauge transformation) a ferromagnetic
//! chain `−K ZZ − Γ X − Ξ XX`. Couplings are measured in units of `K`.

use thiserror::Error;

/// Linear block size of one step.
pub const CHAIN_BLOCK_SCALE: f64 = 2.0;
/// Flow cutoffs used by [`chain_flow_classify`].
pub const SYMMETRIC_CUTOFF: f64 = 1e6;
pub const STAGGERED_CUTOFF: f64 = 1e-6;
/// Distance from the unstable fixed point treated as critical.
pub const CRITICAL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("{name} is not finite ({value})")]
    NonFinite { name: &'static str, value: f64 },
    #[error("gamma must be non-negative, got {0}")]
    NegativeGamma(f64),
    #[error("|xi| = {xi_abs} is outside the projection range |xi| <= {bound}")]
    OutOfRange { xi_abs: f64, bound: f64 },
}

/// `γ = Γ/K` and `ξ = Ξ/K`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChainCouplings {
    pub gamma: f64,
    pub xi: f64,
}

impl ChainCouplings {
    pub fn new(gamma: f64, xi: f64) -> Result<Self, ChainError> {
        let c = ChainCouplings { gamma, xi };
        c.validate()?;
        Ok(c)
    }

    /// Finite, `γ ≥ 0`, and `|ξ| ≤ √(1 + γ²)`. Inside the range the two lowest
    /// block levels are separated from the other two; the edge is kept so the
    /// critical curve can be followed to its endpoint `(0, 1)`.
    pub fn validate(&self) -> Result<(), ChainError> {
        for (name, value) in [("gamma", self.gamma), ("xi", self.xi)] {
            if !value.is_finite() {
                return Err(ChainError::NonFinite { name, value });
            }
        }
        if self.gamma < 0.0 {
            return Err(ChainError::NegativeGamma(self.gamma));
        }
        let bound = (1.0 + self.gamma * self.gamma).sqrt();
        if self.xi.abs() > bound {
            return Err(ChainError::OutOfRange { xi_abs: self.xi.abs(), bound });
        }
        Ok(())
    }
}

fn step_unchecked(gamma: f64, xi: f64) -> f64 {
    let g2 = gamma * gamma;
    g2 + xi * (1.0 + 2.0 * g2) / (1.0 + g2).sqrt()
}

/// One block step; the XX coupling does not survive it.
pub fn chain_rg_step(c: ChainCouplings) -> Result<ChainCouplings, ChainError> {
    c.validate()?;
    Ok(ChainCouplings {
        gamma: step_unchecked(c.gamma, c.xi),
        xi: 0.0,
    })
}

/// `ξ` on the critical curve, where one step lands on `γ = 1`.
pub fn chain_critical_xi(gamma: f64) -> Result<f64, ChainError> {
    if !gamma.is_finite() {
        return Err(ChainError::NonFinite { name: "gamma", value: gamma });
    }
    if gamma < 0.0 {
        return Err(ChainError::NegativeGamma(gamma));
    }
    let g2 = gamma * gamma;
    Ok((1.0 - g2) * (1.0 + g2).sqrt() / (1.0 + 2.0 * g2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainPhase {
    /// Antiferromagnetic order on the top row.
    Staggered,
    /// Paramagnet.
    Symmetric,
    Critical,
}

impl ChainPhase {
    pub fn label(self) -> &'static str {
        match self {
            ChainPhase::Staggered => "antiferromagnetic_staggered",
            ChainPhase::Symmetric => "paramagnetic_symmetric",
            ChainPhase::Critical => "critical",
        }
    }
}

/// Phase reached by the flow. After the first step only `γ → γ²` remains.
pub fn chain_flow_classify(c: ChainCouplings) -> Result<ChainPhase, ChainError> {
    // A negative renormalized field is a sign gauge; only |γ| matters from here on.
    let mut g = chain_rg_step(c)?.gamma.abs();
    if (g - 1.0).abs() <= CRITICAL_TOL {
        return Ok(ChainPhase::Critical);
    }
    loop {
        if g > SYMMETRIC_CUTOFF {
            return Ok(ChainPhase::Symmetric);
        }
        if g < STAGGERED_CUTOFF {
            return Ok(ChainPhase::Staggered);
        }
        g *= g;
    }
}

/// Central finite-difference slope `dγ'/dγ` at `ξ = 0`.
pub fn chain_rg_slope(gamma: f64, h: f64) -> f64 {
    (step_unchecked(gamma + h, 0.0) - step_unchecked(gamma - h, 0.0)) / (2.0 * h)
}

/// Linearization of the flow about the unstable fixed point `γ = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuEstimate {
    pub slope: f64,
    pub y_gamma: f64,
    pub nu: f64,
}

pub fn chain_nu_exponent() -> NuEstimate {
    let slope = chain_rg_slope(1.0, 1e-6);
    let y_gamma = slope.log2();
    NuEstimate {
        slope,
        y_gamma,
        nu: 1.0 / y_gamma,
    }
}

// Direct check of the closed-form step: project a four-site open segment onto
// the two lowest states of each two-site block and compare the 4x4 spectrum
// with the renormalized two-block Hamiltonian.
#[cfg(test)]
pub(crate) mod projection {
    use nalgebra::{DMatrix, SymmetricEigen};

    fn pauli() -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let x = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let z = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        (DMatrix::identity(2, 2), x, z)
    }

    fn kron_all(ops: &[&DMatrix<f64>]) -> DMatrix<f64> {
        ops.iter().skip(1).fold(ops[0].clone(), |acc, m| acc.kronecker(m))
    }

    fn sorted(m: DMatrix<f64>) -> Vec<f64> {
        let mut v: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Spectrum of the projected segment and of the closed-form two-block Hamiltonian.
    pub(crate) fn spectra(k: f64, gamma: f64, xi: f64) -> (Vec<f64>, Vec<f64>) {
        let (i, x, z) = pauli();
        let intra = -k * kron_all(&[&z, &z]) - gamma * kron_all(&[&x, &i]) - xi * kron_all(&[&x, &x]);
        let eig = SymmetricEigen::new(intra.clone());
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let mut q = DMatrix::zeros(4, 2);
        for (c, &j) in order.iter().take(2).enumerate() {
            q.set_column(c, &eig.eigenvectors.column(j));
        }
        let q2 = q.kronecker(&q);

        let i2 = DMatrix::<f64>::identity(4, 4);
        let inter = -k * kron_all(&[&i, &z, &z, &i]) - gamma * kron_all(&[&i, &x, &i, &i]) - xi * kron_all(&[&i, &x, &x, &i]);
        let h4 = intra.kronecker(&i2) + i2.kronecker(&intra) + inter;
        let projected = q2.transpose() * h4 * &q2;

        let root = (k * k + gamma * gamma).sqrt();
        let k_r = k * k / root;
        let g_r = super::step_unchecked(gamma / k, xi / k) * k_r;
        let closed = DMatrix::<f64>::identity(4, 4) * (-2.0 * root) - k_r * kron_all(&[&z, &z]) - g_r * kron_all(&[&x, &i]) - xi * kron_all(&[&i, &x]);
        (sorted(projected), sorted(closed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn step_examples() {
        let c = |g, x| ChainCouplings::new(g, x).unwrap();
        assert_eq!(chain_rg_step(c(1.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert_eq!(chain_rg_step(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert_eq!(chain_rg_step(c(0.0, 1.0)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn validity_rejections() {
        assert!(matches!(ChainCouplings::new(-0.1, 0.0), Err(ChainError::NegativeGamma(_))));
        assert!(matches!(ChainCouplings::new(0.0, 1.01), Err(ChainError::OutOfRange { .. })));
        assert!(matches!(ChainCouplings::new(f64::NAN, 0.0), Err(ChainError::NonFinite { .. })));
    }

    #[test]
    fn critical_curve_examples() {
        assert_eq!(chain_critical_xi(1.0).unwrap(), 0.0);
        assert_eq!(chain_critical_xi(0.0).unwrap(), 1.0);
        let x = chain_critical_xi(2.0).unwrap();
        assert_relative_eq!(x, -3.0 * 5f64.sqrt() / 9.0, epsilon = 1e-15);
        assert_relative_eq!(x, -0.745_355_99, epsilon = 1e-8);
        assert_relative_eq!(chain_rg_step(ChainCouplings::new(2.0, x).unwrap()).unwrap().gamma, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn classification() {
        let c = |g, x| ChainCouplings::new(g, x).unwrap();
        assert_eq!(chain_flow_classify(c(0.5, 0.0)).unwrap(), ChainPhase::Staggered);
        assert_eq!(chain_flow_classify(c(2.0, 0.0)).unwrap(), ChainPhase::Symmetric);
        assert_eq!(chain_flow_classify(c(1.0, 0.0)).unwrap(), ChainPhase::Critical);
        let x = chain_critical_xi(0.8).unwrap();
        assert_eq!(chain_flow_classify(c(0.8, x)).unwrap(), ChainPhase::Critical);
    }

    #[test]
    fn nu_is_one() {
        let nu = chain_nu_exponent();
        assert_relative_eq!(nu.slope, 2.0, epsilon = 1e-5);
        assert_relative_eq!(nu.nu, 1.0, epsilon = 1e-5);
        assert!(chain_rg_slope(0.0, 1e-6).abs() < 1e-12);
    }

    #[test]
    fn block_projection_matches_closed_form() {
        for &(g, x) in &[(0.0, 0.0), (1.0, 0.0), (0.5, 0.3), (2.0, -1.5), (0.7, -0.9), (1.3, 1.2)] {
            let (p, c) = projection::spectra(1.0, g, x);
            for (a, b) in p.iter().zip(&c) {
                assert!((a - b).abs() < 1e-12, "gamma {g} xi {x}: {p:?} vs {c:?}");
            }
        }
    }

    proptest! {
        #[test]
        fn curve_lands_on_fixed_point(g in 0.0..3.0f64) {
            let x = chain_critical_xi(g).unwrap();
            if g > 0.0 {
                prop_assert!(x.abs() < (1.0 + g * g).sqrt());
            }
            prop_assert!((step_unchecked(g, x) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn xi_dies_after_one_step(g in 0.0..3.0f64, f in -0.99..0.99f64) {
            let c = ChainCouplings::new(g, f * (1.0 + g * g).sqrt()).unwrap();
            let s = chain_rg_step(c).unwrap();
            prop_assert_eq!(s.xi, 0.0);
        }

        #[test]
        fn projection_agrees(k in 0.2..3.0f64, g in 0.0..3.0f64, f in -0.95..0.95f64) {
            let x = f * (k * k + g * g).sqrt();
            let (p, c) = projection::spectra(k, g, x);
            for (a, b) in p.iter().zip(&c) {
                prop_assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
            }
        }
    }
}
