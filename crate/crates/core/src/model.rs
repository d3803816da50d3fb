//! Couplings, lattice geometry and basis-state encoding for the two-leg ladder.
//!
//! A configuration of the `2L` spins is packed into a `u64`: bit `2i` is the
//! top-row spin at site `i` (0-based), bit `2i + 1` the bottom-row spin.
//! A set bit means the spin points up (Z = +1).

use std::fmt;

use thiserror::Error;

/// Largest allowed number of spins (`2L`).
pub const MAX_SPINS: usize = 26;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("ladder length must be even and at least 4, got {0}")]
    BadLength(usize),
    #[error("ladder with {0} spins exceeds the {MAX_SPINS}-spin limit")]
    TooLarge(usize),
    #[error("coupling {name} is not finite ({value})")]
    NonFinite { name: &'static str, value: f64 },
    #[error("rung coupling K must be positive, got {0}")]
    NonPositiveK(f64),
    #[error("curing transform needs zero transverse fields (gamma_t = {0}, gamma_b = {1})")]
    TransverseFieldPresent(f64, f64),
    #[error("configuration bits {bits:#x} do not fit a ladder of length {l}")]
    BitsOutOfRange { bits: u64, l: usize },
    #[error("cannot parse configuration: {0}")]
    Parse(String),
}

/// Energy couplings of the ladder Hamiltonian.
///
/// `k` sets the frustrated Ising part, `u` the longitudinal field on the bottom
/// row, `gamma_*` the transverse fields and `xi_*` the XX couplings along the
/// top row, along the bottom row and across rungs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Couplings {
    pub k: f64,
    pub u: f64,
    pub gamma_t: f64,
    pub gamma_b: f64,
    pub xi_tt: f64,
    pub xi_bb: f64,
    pub xi_tb: f64,
}

impl Couplings {
    /// Uniform transverse field `gamma` on both rows and top-row XX coupling `xi_tt`.
    pub fn uniform(k: f64, u: f64, gamma: f64, xi_tt: f64) -> Self {
        Couplings {
            k,
            u,
            gamma_t: gamma,
            gamma_b: gamma,
            xi_tt,
            xi_bb: 0.0,
            xi_tb: 0.0,
        }
    }

    fn named(&self) -> [(&'static str, f64); 7] {
        [
            ("K", self.k),
            ("U", self.u),
            ("gamma_t", self.gamma_t),
            ("gamma_b", self.gamma_b),
            ("xi_tt", self.xi_tt),
            ("xi_bb", self.xi_bb),
            ("xi_tb", self.xi_tb),
        ]
    }

    /// All fields finite and `K > 0`.
    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, value) in self.named() {
            if !value.is_finite() {
                return Err(ModelError::NonFinite { name, value });
            }
        }
        if self.k <= 0.0 {
            return Err(ModelError::NonPositiveK(self.k));
        }
        Ok(())
    }
}

/// Periodic two-leg ladder with `l` rungs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lattice {
    l: usize,
}

impl Lattice {
    pub fn new(l: usize) -> Result<Self, ModelError> {
        if l < 4 || l % 2 != 0 {
            return Err(ModelError::BadLength(l));
        }
        if 2 * l > MAX_SPINS {
            return Err(ModelError::TooLarge(2 * l));
        }
        Ok(Lattice { l })
    }

    pub fn len(&self) -> usize {
        self.l
    }

    pub fn spins(&self) -> usize {
        2 * self.l
    }

    /// Dimension of the full computational basis, `2^(2L)`.
    pub fn hilbert_dim(&self) -> usize {
        1usize << self.spins()
    }

    pub fn full_mask(&self) -> u64 {
        (1u64 << self.spins()) - 1
    }

    /// Bits of the top row.
    pub fn top_mask(&self) -> u64 {
        0x5555_5555_5555_5555 & self.full_mask()
    }

    /// Bits of the bottom row.
    pub fn bottom_mask(&self) -> u64 {
        0xAAAA_AAAA_AAAA_AAAA & self.full_mask()
    }

    pub fn top_bit(&self, i: usize) -> u64 {
        1 << (2 * (i % self.l))
    }

    pub fn bottom_bit(&self, i: usize) -> u64 {
        1 << (2 * (i % self.l) + 1)
    }

    /// Translate a configuration by one rung (site `i` moves to `i + 1`).
    #[inline]
    pub fn translate(&self, bits: u64) -> u64 {
        let n = self.spins();
        ((bits << 2) | (bits >> (n - 2))) & self.full_mask()
    }
}

/// Z eigenvalues of the top row, bottom row and their sums for one configuration.
#[inline]
pub(crate) fn row_sums(lat: &Lattice, bits: u64) -> (i64, i64) {
    let l = lat.len() as i64;
    let up_t = (bits & lat.top_mask()).count_ones() as i64;
    let up_b = (bits & lat.bottom_mask()).count_ones() as i64;
    (2 * up_t - l, 2 * up_b - l)
}

/// Staggered sum of the top row, `sum_i (-1)^i Zt_i` with sites counted from 1.
#[inline]
pub(crate) fn staggered_top(lat: &Lattice, bits: u64) -> i64 {
    // sites 1, 3, 5.. (0-based even) carry sign -1
    let top = bits & lat.top_mask();
    let even_sites = top & 0x1111_1111_1111_1111;
    let odd_sites = top & 0x4444_4444_4444_4444;
    let half = (lat.len() / 2) as i64;
    let s_even = 2 * even_sites.count_ones() as i64 - half;
    let s_odd = 2 * odd_sites.count_ones() as i64 - half;
    s_odd - s_even
}

/// A computational basis state of a given ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    bits: u64,
    l: usize,
}

impl SpinConfig {
    pub fn new(lattice: Lattice, bits: u64) -> Result<Self, ModelError> {
        if bits & !lattice.full_mask() != 0 {
            return Err(ModelError::BitsOutOfRange {
                bits,
                l: lattice.len(),
            });
        }
        Ok(SpinConfig {
            bits,
            l: lattice.len(),
        })
    }

    /// Build from explicit rows, `true` meaning spin up.
    pub fn from_rows(top: &[bool], bottom: &[bool]) -> Result<Self, ModelError> {
        if top.len() != bottom.len() {
            return Err(ModelError::Parse("rows differ in length".into()));
        }
        let lat = Lattice::new(top.len())?;
        let mut bits = 0u64;
        for i in 0..top.len() {
            if top[i] {
                bits |= lat.top_bit(i);
            }
            if bottom[i] {
                bits |= lat.bottom_bit(i);
            }
        }
        SpinConfig::new(lat, bits)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn lattice(&self) -> Lattice {
        Lattice { l: self.l }
    }

    pub fn top_up(&self, i: usize) -> bool {
        self.bits & self.lattice().top_bit(i) != 0
    }

    pub fn bottom_up(&self, i: usize) -> bool {
        self.bits & self.lattice().bottom_bit(i) != 0
    }

    /// Parse the two-row arrow form produced by `Display`.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let rows: Vec<&str> = text.lines().map(str::trim).filter(|r| !r.is_empty()).collect();
        if rows.len() != 2 {
            return Err(ModelError::Parse(format!("expected 2 rows, got {}", rows.len())));
        }
        let decode = |row: &str| -> Result<Vec<bool>, ModelError> {
            row.chars()
                .map(|c| match c {
                    '↑' => Ok(true),
                    '↓' => Ok(false),
                    other => Err(ModelError::Parse(format!("unexpected character {other:?}"))),
                })
                .collect()
        };
        SpinConfig::from_rows(&decode(rows[0])?, &decode(rows[1])?)
    }
}

impl fmt::Display for SpinConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arrow = |up: bool| if up { '↑' } else { '↓' };
        let top: String = (0..self.l).map(|i| arrow(self.top_up(i))).collect();
        let bottom: String = (0..self.l).map(|i| arrow(self.bottom_up(i))).collect();
        write!(f, "{top}\n{bottom}")
    }
}

/// Outcome of the sufficient-condition stoquasticity check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stoquasticity {
    StoquasticAsGiven,
    StoquasticAfterCuring,
    NonStoquastic,
    Undetermined,
}

impl Stoquasticity {
    pub fn label(self) -> &'static str {
        match self {
            Stoquasticity::StoquasticAsGiven => "stoquastic_as_given",
            Stoquasticity::StoquasticAfterCuring => "stoquastic_after_curing",
            Stoquasticity::NonStoquastic => "non_stoquastic",
            Stoquasticity::Undetermined => "undetermined",
        }
    }
}

/// Classify using only the known sufficient conditions; everything else is
/// `Undetermined`.
pub fn classify_stoquasticity(c: &Couplings) -> Stoquasticity {
    let xis = [c.xi_tt, c.xi_bb, c.xi_tb];
    if xis.iter().all(|&x| x >= 0.0) {
        return Stoquasticity::StoquasticAsGiven;
    }
    if c.gamma_t == 0.0 && c.gamma_b == 0.0 && xis.iter().all(|&x| x <= 0.0) {
        return Stoquasticity::StoquasticAfterCuring;
    }
    let fields = c.gamma_t > 0.0 && c.gamma_b > 0.0;
    let negative_xx = xis.iter().any(|&x| x < 0.0);
    let bounded = (c.u / 2.0).abs() < c.k && c.xi_tb.abs() < c.k;
    if fields && negative_xx && bounded {
        Stoquasticity::NonStoquastic
    } else {
        Stoquasticity::Undetermined
    }
}

/// Conjugate by `Z` on every other site of each row (and the matching rung
/// pattern), which flips the sign of all XX couplings. Only a symmetry when no
/// transverse field is present.
pub fn apply_curing_transform(c: &Couplings) -> Result<Couplings, ModelError> {
    if c.gamma_t != 0.0 || c.gamma_b != 0.0 {
        return Err(ModelError::TransverseFieldPresent(c.gamma_t, c.gamma_b));
    }
    Ok(Couplings {
        xi_tt: -c.xi_tt,
        xi_bb: -c.xi_bb,
        xi_tb: -c.xi_tb,
        ..*c
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lattice_rejects_bad_lengths() {
        assert_eq!(Lattice::new(3), Err(ModelError::BadLength(3)));
        assert_eq!(Lattice::new(2), Err(ModelError::BadLength(2)));
        assert_eq!(Lattice::new(14), Err(ModelError::TooLarge(28)));
        assert_eq!(Lattice::new(4).unwrap().hilbert_dim(), 256);
    }

    #[test]
    fn couplings_validation() {
        let mut c = Couplings::uniform(5.0, 1.0, 1.0, 0.0);
        assert!(c.validate().is_ok());
        c.k = 0.0;
        assert_eq!(c.validate(), Err(ModelError::NonPositiveK(0.0)));
        c.k = 1.0;
        c.xi_bb = f64::NAN;
        assert!(matches!(c.validate(), Err(ModelError::NonFinite { name: "xi_bb", .. })));
    }

    #[test]
    fn translate_moves_one_rung() {
        let lat = Lattice::new(4).unwrap();
        assert_eq!(lat.translate(lat.top_bit(0)), lat.top_bit(1));
        assert_eq!(lat.translate(lat.bottom_bit(3)), lat.bottom_bit(0));
        let mut b = 0b1011_0110;
        for _ in 0..4 {
            b = lat.translate(b);
        }
        assert_eq!(b, 0b1011_0110);
    }

    #[test]
    fn staggered_sum_of_neel() {
        let lat = Lattice::new(6).unwrap();
        // up on sites 2, 4, 6 (1-based), i.e. odd 0-based indices
        let bits = lat.top_bit(1) | lat.top_bit(3) | lat.top_bit(5);
        assert_eq!(staggered_top(&lat, bits), 6);
        let other = lat.top_bit(0) | lat.top_bit(2) | lat.top_bit(4);
        assert_eq!(staggered_top(&lat, other), -6);
        assert_eq!(staggered_top(&lat, lat.top_mask()), 0);
        assert_eq!(row_sums(&lat, lat.top_mask()), (6, -6));
    }

    #[test]
    fn render_example() {
        let c = SpinConfig::from_rows(&[true, false, true, false], &[true; 4]).unwrap();
        assert_eq!(c.to_string(), "↑↓↑↓\n↑↑↑↑");
        assert!(SpinConfig::parse("↑↓↑\n↑↑").is_err());
        assert!(SpinConfig::parse("↑↓x↓\n↑↑↑↑").is_err());
    }

    #[test]
    fn stoquasticity_examples() {
        let c = Couplings {
            k: 5.0,
            u: 1.0,
            gamma_t: 1.0,
            gamma_b: 1.0,
            xi_tt: -1.0,
            xi_bb: 0.0,
            xi_tb: 0.0,
        };
        assert_eq!(classify_stoquasticity(&c), Stoquasticity::NonStoquastic);
        let pos = Couplings { xi_tt: 0.5, xi_tb: 2.0, ..c };
        assert_eq!(classify_stoquasticity(&pos), Stoquasticity::StoquasticAsGiven);
        let cured = Couplings {
            gamma_t: 0.0,
            gamma_b: 0.0,
            xi_tt: -1.0,
            xi_bb: -1.0,
            xi_tb: -1.0,
            ..c
        };
        assert_eq!(classify_stoquasticity(&cured), Stoquasticity::StoquasticAfterCuring);
        // large rung field falls outside the known condition
        let big_u = Couplings { u: 20.0, ..c };
        assert_eq!(classify_stoquasticity(&big_u), Stoquasticity::Undetermined);
    }

    #[test]
    fn curing_flips_xx_signs() {
        let c = Couplings {
            k: 1.0,
            u: 1.0,
            xi_tt: -1.0,
            xi_bb: -2.0,
            xi_tb: -0.5,
            ..Default::default()
        };
        let d = apply_curing_transform(&c).unwrap();
        assert_eq!((d.xi_tt, d.xi_bb, d.xi_tb), (1.0, 2.0, 0.5));
        let zero = Couplings { k: 1.0, ..Default::default() };
        assert_eq!(apply_curing_transform(&zero).unwrap(), zero);
        let with_field = Couplings { gamma_b: 0.1, ..c };
        assert!(apply_curing_transform(&with_field).is_err());
    }

    proptest! {
        #[test]
        fn render_round_trip(bits in 0u64..(1 << 16)) {
            let lat = Lattice::new(8).unwrap();
            let c = SpinConfig::new(lat, bits).unwrap();
            let back = SpinConfig::parse(&c.to_string()).unwrap();
            prop_assert_eq!(back, c);
        }

        #[test]
        fn translation_preserves_row_sums(bits in 0u64..(1 << 20)) {
            let lat = Lattice::new(10).unwrap();
            let t = lat.translate(bits);
            prop_assert_eq!(row_sums(&lat, bits), row_sums(&lat, t));
            prop_assert_eq!(staggered_top(&lat, bits), -staggered_top(&lat, t));
        }
    }
}
