//! Dispersion, momentum ladders, spinors and plane-wave mode functions for
//! the section `[0, 2L]` and its two halves.
//!
//! Units are `hbar = c = 1`; mass is an inverse length. Section modes carry
//! momenta `p_m = pi m / L` and are periodic on the whole section, while
//! subsection modes carry `q_m = 2 pi m / L` and are periodic on each half.
//!
//! Every mode function is normalized to unit norm on its own region, so the
//! whole-section prefactor is `1/sqrt(2L)` and the subsection one `1/sqrt(L)`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldConfig {
    pub mass: f64,
    pub half_length: f64,
    pub time: f64,
    pub truncation: usize,
}

impl FieldConfig {
    pub fn new(mass: f64, half_length: f64, time: f64, truncation: usize) -> Result<Self> {
        if !(mass >= 0.0) || !mass.is_finite() {
            return Err(Error::InvalidConfig(format!("mass must be finite and >= 0, got {mass}")));
        }
        if !(half_length > 0.0) || !half_length.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "half length must be finite and > 0, got {half_length}"
            )));
        }
        if !time.is_finite() {
            return Err(Error::InvalidConfig(format!("time must be finite, got {time}")));
        }
        if truncation < 1 {
            return Err(Error::InvalidConfig("truncation must be >= 1".into()));
        }
        Ok(Self { mass, half_length, time, truncation })
    }

    /// Unit half length, `mass = mu_l`, `t = 0`.
    pub fn with_mu_l(mu_l: f64, truncation: usize) -> Result<Self> {
        Self::new(mu_l, 1.0, 0.0, truncation)
    }

    pub fn at_time(self, time: f64) -> Self {
        Self { time, ..self }
    }

    pub fn with_truncation(self, truncation: usize) -> Self {
        Self { truncation: truncation.max(1), ..self }
    }

    /// Section size in units of the Compton wavelength.
    pub fn mu_l(&self) -> f64 {
        self.mass * self.half_length
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ladder {
    Section,
    Subsection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeIndex {
    pub index: i64,
    pub ladder: Ladder,
}

impl ModeIndex {
    pub fn section(index: i64) -> Self {
        Self { index, ladder: Ladder::Section }
    }

    pub fn subsection(index: i64) -> Self {
        Self { index, ladder: Ladder::Subsection }
    }

    pub fn momentum(&self, cfg: &FieldConfig) -> f64 {
        momentum(*self, cfg)
    }
}

pub fn energy(p: f64, mass: f64) -> f64 {
    mass.hypot(p)
}

pub fn momentum(mode: ModeIndex, cfg: &FieldConfig) -> f64 {
    let base = std::f64::consts::PI * mode.index as f64 / cfg.half_length;
    match mode.ladder {
        Ladder::Section => base,
        Ladder::Subsection => 2.0 * base,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    PositiveFrequency,
    NegativeFrequency,
}

/// Two-component real spinor of the free 1-D Dirac Hamiltonian
/// `sigma_x p + sigma_z mu`, eigenvalue `+eps` or `-eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spinor {
    pub upper: f64,
    pub lower: f64,
    pub branch: Branch,
}

impl Spinor {
    pub fn new(p: f64, mass: f64, branch: Branch) -> Result<Self> {
        let eps = energy(p, mass);
        let denom = (2.0 * eps * (eps + mass)).sqrt();
        if denom == 0.0 {
            return Err(Error::DegenerateDispersion);
        }
        let (upper, lower) = match branch {
            Branch::PositiveFrequency => ((eps + mass) / denom, p / denom),
            Branch::NegativeFrequency => (-p / denom, (eps + mass) / denom),
        };
        Ok(Self { upper, lower, branch })
    }

    pub fn dot(&self, other: &Spinor) -> f64 {
        self.upper * other.upper + self.lower * other.lower
    }

    pub fn norm(&self) -> f64 {
        self.upper.hypot(self.lower)
    }
}

/// `u+(q) . u+(p)` in closed form.
pub fn spinor_overlap(q: f64, p: f64, mass: f64) -> Result<f64> {
    let (eq, ep) = (energy(q, mass), energy(p, mass));
    let denom = 2.0 * (ep * eq * (ep + mass) * (eq + mass)).sqrt();
    if denom == 0.0 {
        return Err(Error::DegenerateDispersion);
    }
    Ok(((ep + mass) * (eq + mass) + p * q) / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Whole,
    Left,
    Right,
}

impl Region {
    pub fn interval(&self, cfg: &FieldConfig) -> (f64, f64) {
        let l = cfg.half_length;
        match self {
            Region::Whole => (0.0, 2.0 * l),
            Region::Left => (0.0, l),
            Region::Right => (l, 2.0 * l),
        }
    }

    pub fn contains(&self, x: f64, cfg: &FieldConfig) -> bool {
        let (a, b) = self.interval(cfg);
        (a..=b).contains(&x)
    }

    pub fn length(&self, cfg: &FieldConfig) -> f64 {
        let (a, b) = self.interval(cfg);
        b - a
    }

    /// Natural momentum ladder of the region's own basis.
    pub fn ladder(&self) -> Ladder {
        match self {
            Region::Whole => Ladder::Section,
            Region::Left | Region::Right => Ladder::Subsection,
        }
    }
}

/// Plane-wave mode `e^{i p (x - x0) - i eps t} / sqrt(|region|)`, with `x0`
/// the left edge of the region, so the Right basis is the Left one
/// translated by `L`. Subsection modes vanish outside their half.
pub fn mode_function(mode: ModeIndex, region: Region, x: f64, t: f64, cfg: &FieldConfig) -> C64 {
    if region != Region::Whole && !region.contains(x, cfg) {
        return C64::new(0.0, 0.0);
    }
    let (x0, _) = region.interval(cfg);
    let p = momentum(mode, cfg);
    let phase = p * (x - x0) - energy(p, cfg.mass) * t;
    C64::from_polar(1.0 / region.length(cfg).sqrt(), phase)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn cfg() -> FieldConfig {
        FieldConfig::new(1.0, PI, 0.0, 8).unwrap()
    }

    #[test]
    fn energy_examples() {
        assert_eq!(energy(0.0, 1.0), 1.0);
        assert_eq!(energy(3.0, 4.0), 5.0);
        assert_eq!(energy(1.0, 0.0), 1.0);
        assert_eq!(energy(-3.0, 4.0), energy(3.0, 4.0));
    }

    #[test]
    fn momentum_ladders() {
        let c = cfg();
        assert_eq!(momentum(ModeIndex::section(0), &c), 0.0);
        assert_abs_diff_eq!(momentum(ModeIndex::section(2), &c), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(momentum(ModeIndex::subsection(1), &c), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            ModeIndex::subsection(-3).momentum(&c),
            ModeIndex::section(-6).momentum(&c),
            epsilon = 1e-15
        );
    }

    #[test]
    fn rest_frame_spinors() {
        let up = Spinor::new(0.0, 1.0, Branch::PositiveFrequency).unwrap();
        let dn = Spinor::new(0.0, 1.0, Branch::NegativeFrequency).unwrap();
        assert_eq!((up.upper, up.lower), (1.0, 0.0));
        assert_eq!((dn.upper, dn.lower), (0.0, 1.0));
        let s = Spinor::new(3.0, 4.0, Branch::PositiveFrequency).unwrap();
        assert_abs_diff_eq!(s.upper * s.upper + s.lower * s.lower, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn massless_zero_momentum_is_degenerate() {
        assert_eq!(
            Spinor::new(0.0, 0.0, Branch::PositiveFrequency),
            Err(Error::DegenerateDispersion)
        );
        assert_eq!(spinor_overlap(0.0, 1.0, 0.0), Err(Error::DegenerateDispersion));
    }

    #[test]
    fn spinors_are_eigenvectors() {
        // sigma_x p + sigma_z mu acting on (u, l) gives (p l + mu u, p u - mu l)
        for &(p, mu) in &[(0.3, 1.0), (-2.0, 0.5), (7.0, 0.0)] {
            let eps = energy(p, mu);
            for (branch, sign) in [(Branch::PositiveFrequency, 1.0), (Branch::NegativeFrequency, -1.0)] {
                let s = Spinor::new(p, mu, branch).unwrap();
                let hu = p * s.lower + mu * s.upper;
                let hl = p * s.upper - mu * s.lower;
                assert_abs_diff_eq!(hu, sign * eps * s.upper, epsilon = 1e-12);
                assert_abs_diff_eq!(hl, sign * eps * s.lower, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn spinor_overlap_examples() {
        for &mu in &[0.1, 1.0, 10.0] {
            assert_abs_diff_eq!(spinor_overlap(2.5, 2.5, mu).unwrap(), 1.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(spinor_overlap(-1.7, 1.7, 0.0).unwrap(), 0.0, epsilon = 1e-12);
        let closed = spinor_overlap(1.0, 2.0, 1.0).unwrap();
        let a = Spinor::new(1.0, 1.0, Branch::PositiveFrequency).unwrap();
        let b = Spinor::new(2.0, 1.0, Branch::PositiveFrequency).unwrap();
        assert!(closed > 0.0 && closed < 1.0);
        assert_abs_diff_eq!(closed, a.dot(&b), epsilon = 1e-12);
    }

    #[test]
    fn mode_function_support_and_zero_mode() {
        let c = cfg();
        let l = c.half_length;
        let left = mode_function(ModeIndex::subsection(2), Region::Left, 1.5 * l, 0.0, &c);
        assert_eq!(left, C64::new(0.0, 0.0));
        let right = mode_function(ModeIndex::subsection(2), Region::Right, 0.5 * l, 0.0, &c);
        assert_eq!(right, C64::new(0.0, 0.0));
        for &x in &[0.0, 0.7, 4.0] {
            let z = mode_function(ModeIndex::section(0), Region::Whole, x, 0.0, &c);
            assert_abs_diff_eq!(z.re, 1.0 / (2.0 * l).sqrt(), epsilon = 1e-15);
            assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn config_validation() {
        assert!(FieldConfig::new(-1.0, 1.0, 0.0, 4).is_err());
        assert!(FieldConfig::new(1.0, 0.0, 0.0, 4).is_err());
        assert!(FieldConfig::new(1.0, 1.0, 0.0, 0).is_err());
        assert!(FieldConfig::new(1.0, 1.0, f64::NAN, 4).is_err());
        assert_eq!(FieldConfig::with_mu_l(2.0, 3).unwrap().mu_l(), 2.0);
    }
}
