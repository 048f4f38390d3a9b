//! Bogolubov coefficients connecting a subsection quasi-particle basis to the
//! whole-section basis,
//!
//! ```text
//! c_m = sum_k ( alpha_{m,k} a_k + conj(beta_{m,k}) b_k^+ )
//! ```
//!
//! Even section columns are pure Kronecker terms (`1/sqrt2` at `k = 2m` for
//! alpha, `W_m` at `k = -2m` for beta). Odd columns come from the resonant
//! terms `A_{n,m,k}` and `B_{n,m,k}` with `n = (k - 1) / 2`, each scaled by a
//! calibration constant that is fixed once against the quadrature oracle.
//!
//! The coefficients are the exact overlaps for the field expansion that pairs
//! `u-(p)` with `e^{-ipx}`. That expansion is not orthonormal, so rows are not
//! canonical: `sum_k |alpha|^2 + |beta|^2` tends to `1 + O(|W_m|^2)` rather
//! than 1 (see [`BogolubovPair::canonicity`]).

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{energy, mode_function, momentum, spinor_overlap, Branch, FieldConfig, ModeIndex, Region, Spinor};
use crate::fock::QuasiOperator;
use crate::quadrature::GaussLegendre;

const I: C64 = C64::new(0.0, 1.0);

/// Tolerance between successive quadrature orders in the overlap oracle.
pub const ORACLE_TOLERANCE: f64 = 1e-8;

/// Prefactors `c` in `alpha_odd = -(i/c) A` and `beta_odd = -(i/c) B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub alpha: f64,
    pub beta: f64,
}

impl Calibration {
    /// `c_alpha = -sqrt(2) pi`, `c_beta = +sqrt(2) pi`: the half-interval
    /// Fourier integral on `[0, L]` in closed form.
    pub const fn analytic() -> Self {
        Self { alpha: -SQRT_2 * PI, beta: SQRT_2 * PI }
    }

    /// The literal `sqrt(2 pi)` prefactor, both families with the same sign.
    pub fn printed() -> Self {
        let c = (2.0 * PI).sqrt();
        Self { alpha: c, beta: c }
    }

    /// Fit both constants at `mu L = 1, t = 0, m = 0, k = 1` on the left
    /// half by dividing the oracle overlap into the closed-form numerators.
    pub fn from_oracle() -> Result<Self> {
        let cfg = FieldConfig::new(1.0, 1.0, 0.0, 1)?;
        let a = coeff_a(0, 0, 1, &cfg)?;
        let b = coeff_b(0, 0, 1, &cfg)?;
        let oa = overlap_oracle(0, 1, Region::Left, BranchPair::PlusPlus, &cfg, default_panels(0, 1))?;
        let ob = overlap_oracle(0, 1, Region::Left, BranchPair::PlusMinus, &cfg, default_panels(0, 1))?;
        // entry = -(i/c) X  =>  c = -i X / entry
        let ca = -I * a / oa;
        let cb = -I * b / ob;
        Ok(Self { alpha: ca.re, beta: cb.re })
    }
}

impl Default for Calibration {
    fn default() -> Self {
        Self::analytic()
    }
}

/// `W_m = q_m e^{-2i eps(q_m) t} / (sqrt2 eps(q_m))`, with `W_0 = 0`.
pub fn coeff_w(m: i64, cfg: &FieldConfig) -> C64 {
    if m == 0 {
        return C64::new(0.0, 0.0);
    }
    let q = momentum(ModeIndex::subsection(m), cfg);
    let eq = energy(q, cfg.mass);
    C64::from_polar(q / (SQRT_2 * eq), -2.0 * eq * cfg.time)
}

pub fn coeff_a(n: i64, m: i64, k: i64, cfg: &FieldConfig) -> Result<C64> {
    let q = momentum(ModeIndex::subsection(m), cfg);
    let p = momentum(ModeIndex::section(k), cfg);
    let s = spinor_overlap(q, p, cfg.mass)?;
    let (eq, ep) = (energy(q, cfg.mass), energy(p, cfg.mass));
    let denom = (n - m) as f64 + 0.5;
    Ok(C64::from_polar(s / denom, (eq - ep) * cfg.time))
}

pub fn coeff_b(n: i64, m: i64, k: i64, cfg: &FieldConfig) -> Result<C64> {
    let mu = cfg.mass;
    let q = momentum(ModeIndex::subsection(m), cfg);
    let p = momentum(ModeIndex::section(k), cfg);
    let (eq, ep) = (energy(q, mu), energy(p, mu));
    let norm = 2.0 * (ep * eq * (ep + mu) * (eq + mu)).sqrt();
    if norm == 0.0 {
        return Err(Error::DegenerateDispersion);
    }
    let numer = p * (eq + mu) - q * (ep + mu);
    let denom = (n + m) as f64 + 0.5;
    Ok(C64::from_polar(numer / norm / denom, -(eq + ep) * cfg.time))
}

fn region_phase(k: i64, region: Region) -> f64 {
    match region {
        Region::Right if k.rem_euclid(2) == 1 => -1.0,
        _ => 1.0,
    }
}

pub fn alpha_entry(m: i64, k: i64, region: Region, cfg: &FieldConfig, cal: &Calibration) -> Result<C64> {
    if k.rem_euclid(2) == 0 {
        let v = if k == 2 * m { FRAC_1_SQRT_2 } else { 0.0 };
        return Ok(C64::new(v, 0.0));
    }
    let n = (k - 1) / 2;
    Ok(-I / cal.alpha * coeff_a(n, m, k, cfg)? * region_phase(k, region))
}

pub fn beta_entry(m: i64, k: i64, region: Region, cfg: &FieldConfig, cal: &Calibration) -> Result<C64> {
    if k.rem_euclid(2) == 0 {
        return Ok(if k == -2 * m { coeff_w(m, cfg) } else { C64::new(0.0, 0.0) });
    }
    let n = (k - 1) / 2;
    Ok(-I / cal.beta * coeff_b(n, m, k, cfg)? * region_phase(k, region))
}

/// Which spinor pair enters the overlap: `(+,+)` estimates alpha, `(+,-)`
/// estimates beta.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchPair {
    PlusPlus,
    PlusMinus,
}

/// Panel count for the 16-point composite rule that resolves the slowest
/// oscillation `|k - 2m|` or `|k + 2m|` on a half interval with margin.
pub fn default_panels(m: i64, k: i64) -> usize {
    let j = (k - 2 * m).unsigned_abs().max((k + 2 * m).unsigned_abs()) as usize;
    4 + j / 2
}

/// Quadrature estimate of one coefficient, built only from spinor dot
/// products and mode functions:
///
/// ```text
/// alpha_{m,k} =      u+(q).u+(p)  int phi*_{m,region} phi_k
/// beta_{m,k}  = conj(u+(q).u-(p)  int phi*_{m,region} phi*_k)
/// ```
///
/// Evaluated with `panels` and `2 * panels` panels; the two must agree to
/// [`ORACLE_TOLERANCE`].
pub fn overlap_oracle(
    m: i64,
    k: i64,
    region: Region,
    pair: BranchPair,
    cfg: &FieldConfig,
    panels: usize,
) -> Result<C64> {
    let sub = ModeIndex { index: m, ladder: region.ladder() };
    let sec = ModeIndex::section(k);
    let q = momentum(sub, cfg);
    let p = momentum(sec, cfg);
    let left = Spinor::new(q, cfg.mass, Branch::PositiveFrequency)?;
    let right = match pair {
        BranchPair::PlusPlus => Spinor::new(p, cfg.mass, Branch::PositiveFrequency)?,
        BranchPair::PlusMinus => Spinor::new(p, cfg.mass, Branch::NegativeFrequency)?,
    };
    let spin = left.dot(&right);
    let t = cfg.time;
    let (a, b) = region.interval(cfg);
    let rule = GaussLegendre::new(16);
    let value = match pair {
        BranchPair::PlusPlus => rule.integrate_checked(
            |x| mode_function(sub, region, x, t, cfg).conj() * mode_function(sec, Region::Whole, x, t, cfg),
            a,
            b,
            panels,
            ORACLE_TOLERANCE,
        )?,
        BranchPair::PlusMinus => rule
            .integrate_checked(
                |x| (mode_function(sub, region, x, t, cfg) * mode_function(sec, Region::Whole, x, t, cfg)).conj(),
                a,
                b,
                panels,
                ORACLE_TOLERANCE,
            )?
            .conj(),
    };
    Ok(value * spin)
}

/// Row `m` of the transform over section columns `-N..=N`, as a quasi-operator.
pub fn coefficient_row(m: i64, region: Region, cfg: &FieldConfig, cal: &Calibration) -> Result<QuasiOperator> {
    let n = cfg.truncation as i64;
    let mut alpha = Vec::with_capacity(2 * n as usize + 1);
    let mut beta = Vec::with_capacity(2 * n as usize + 1);
    for k in -n..=n {
        alpha.push(alpha_entry(m, k, region, cfg, cal)?);
        beta.push(beta_entry(m, k, region, cfg, cal)?);
    }
    Ok(QuasiOperator::new(alpha, beta))
}

/// Truncated transform `|m|, |k| <= N` for one subsection.
#[derive(Debug, Clone)]
pub struct BogolubovPair {
    pub alpha: DMatrix<C64>,
    pub beta: DMatrix<C64>,
    pub region: Region,
    pub cfg: FieldConfig,
}

impl BogolubovPair {
    pub fn build(region: Region, cfg: &FieldConfig, cal: &Calibration) -> Result<Self> {
        let n = cfg.truncation as i64;
        let dim = 2 * cfg.truncation + 1;
        let rows: Vec<QuasiOperator> = (-n..=n)
            .into_par_iter()
            .map(|m| coefficient_row(m, region, cfg, cal))
            .collect::<Result<_>>()?;
        let alpha = DMatrix::from_fn(dim, dim, |r, c| rows[r].alpha[c]);
        let beta = DMatrix::from_fn(dim, dim, |r, c| rows[r].beta[c]);
        Ok(Self { alpha, beta, region, cfg: *cfg })
    }

    pub fn truncation(&self) -> usize {
        self.cfg.truncation
    }

    fn slot(&self, i: i64) -> usize {
        let n = self.cfg.truncation as i64;
        assert!(i.abs() <= n, "index {i} outside truncation {n}");
        (i + n) as usize
    }

    pub fn alpha(&self, m: i64, k: i64) -> C64 {
        self.alpha[(self.slot(m), self.slot(k))]
    }

    pub fn beta(&self, m: i64, k: i64) -> C64 {
        self.beta[(self.slot(m), self.slot(k))]
    }

    pub fn row(&self, m: i64) -> QuasiOperator {
        let r = self.slot(m);
        QuasiOperator::new(
            self.alpha.row(r).iter().copied().collect(),
            self.beta.row(r).iter().copied().collect(),
        )
    }

    /// `sum_k |alpha_{m,k}|^2 + |beta_{m,k}|^2` for row `m`.
    pub fn canonicity(&self, m: i64) -> f64 {
        self.row(m).anticommutator()
    }

    /// Columnar dump `m,k,re_alpha,im_alpha,re_beta,im_beta`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "m,k,re_alpha,im_alpha,re_beta,im_beta")?;
        let n = self.cfg.truncation as i64;
        for m in -n..=n {
            for k in -n..=n {
                let (a, b) = (self.alpha(m, k), self.beta(m, k));
                writeln!(out, "{m},{k},{:.17e},{:.17e},{:.17e},{:.17e}", a.re, a.im, b.re, b.im)?;
            }
        }
        Ok(())
    }
}

/// Canonicity residual `|sum_{|k|<=N} (|alpha|^2 + |beta|^2) - 1|` of row `m`.
pub fn canonicity_residual(m: i64, region: Region, cfg: &FieldConfig, cal: &Calibration) -> Result<f64> {
    Ok((coefficient_row(m, region, cfg, cal)?.anticommutator() - 1.0).abs())
}
