//! Smeared detectors: oscillator wave packets centred on phase-space points.
//!
//! A point `(x, p)` at width `sigma` is labelled by `alpha = sigma x + i p / (2 sigma)`,
//! the eigenvalue of `b = sigma x^ + i p^ / (2 sigma)`. Detector mode `(alpha, n)`
//! is the displaced number state `D(alpha)|n>`. Its momentum wavefunction is
//!
//! ```text
//! phi_{alpha,n}(p) = (-i)^n (sigma sqrt2)^{-1/2} h_n((p - p_alpha) / (sigma sqrt2))
//!                    * exp(-i p x_alpha + i p_alpha x_alpha / 2)
//! ```
//!
//! with `h_n` the normalized Hermite functions. The constant phase
//! `e^{i p_alpha x_alpha / 2}` puts the overlap in the symmetric form
//! `<alpha|beta> = exp(-|alpha-beta|^2/2 + (alpha* beta - alpha beta*)/2)`.
//!
//! Modes at different points are not orthogonal. The overlap (Gram) matrix
//! plays the role of the anticommutator `{a_{alpha,n}, a^+_{beta,m}}`.

use std::f64::consts::PI;
use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{Factor, GramSpan};
use crate::quadrature::GaussLegendre;

/// Highest oscillator level the recurrences are trusted for.
pub const MAX_LEVEL: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub sigma: f64,
    pub x: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(sigma: f64, x: f64, p: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidConfig(format!("detector width must be > 0, got {sigma}")));
        }
        Ok(Self { sigma, x, p })
    }

    pub fn origin(sigma: f64) -> Result<Self> {
        Self::new(sigma, 0.0, 0.0)
    }

    pub fn from_label(sigma: f64, label: C64) -> Result<Self> {
        Self::new(sigma, label.re / sigma, 2.0 * sigma * label.im)
    }

    pub fn label(&self) -> C64 {
        C64::new(self.sigma * self.x, self.p / (2.0 * self.sigma))
    }

    pub fn mode(self, level: usize) -> DetectorMode {
        DetectorMode { point: self, level }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorMode {
    pub point: PhasePoint,
    pub level: usize,
}

fn check_widths(a: &PhasePoint, b: &PhasePoint) -> Result<()> {
    if (a.sigma - b.sigma).abs() > 1e-12 * a.sigma.max(b.sigma) {
        return Err(Error::WidthMismatch(a.sigma, b.sigma));
    }
    Ok(())
}

fn check_level(n: usize) -> Result<()> {
    if n > MAX_LEVEL {
        return Err(Error::LevelTooHigh { level: n, limit: MAX_LEVEL });
    }
    Ok(())
}

/// `<a|b>` for level-0 detectors.
pub fn overlap_ground(a: &PhasePoint, b: &PhasePoint) -> Result<C64> {
    check_widths(a, b)?;
    let (al, be) = (a.label(), b.label());
    Ok((-(al - be).norm_sqr() / 2.0 + (al.conj() * be - al * be.conj()) / 2.0).exp())
}

/// Generalized Laguerre polynomial `L_n^{(k)}(x)` by upward recurrence.
fn laguerre(n: usize, k: usize, x: f64) -> f64 {
    let k = k as f64;
    let (mut l0, mut l1) = (1.0, 1.0 + k - x);
    if n == 0 {
        return l0;
    }
    for j in 1..n {
        let j = j as f64;
        let l2 = ((2.0 * j + 1.0 + k - x) * l1 - (j + k) * l0) / (j + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

/// `<m| D(gamma) |n>` for the displacement operator.
pub fn displacement_element(m: usize, n: usize, gamma: C64) -> C64 {
    let r2 = gamma.norm_sqr();
    let (lo, hi) = (m.min(n), m.max(n));
    // sqrt(lo! / hi!)
    let ratio = ((lo + 1)..=hi).fold(1.0, |acc, j| acc / (j as f64).sqrt());
    let power = if m >= n { gamma } else { -gamma.conj() };
    power.powi((hi - lo) as i32) * (ratio * (-r2 / 2.0).exp() * laguerre(lo, hi - lo, r2))
}

/// Gram entry `<a.point, a.level | b.point, b.level>`.
pub fn overlap_general(a: &DetectorMode, b: &DetectorMode) -> Result<C64> {
    check_widths(&a.point, &b.point)?;
    check_level(a.level)?;
    check_level(b.level)?;
    let (al, be) = (a.point.label(), b.point.label());
    let phase = ((al.conj() * be - al * be.conj()) / 2.0).exp();
    Ok(phase * displacement_element(a.level, b.level, be - al))
}

pub fn gram(modes: &[DetectorMode]) -> Result<DMatrix<C64>> {
    let n = modes.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = overlap_general(&modes[i], &modes[j])?;
        }
    }
    Ok(g)
}

pub fn min_eigenvalue(gram: &DMatrix<C64>) -> f64 {
    gram.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Normalized Hermite functions `h_0 ..= h_n` at `s`.
fn hermite_functions(n: usize, s: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(n + 1);
    h.push(PI.powf(-0.25) * (-s * s / 2.0).exp());
    if n >= 1 {
        h.push(std::f64::consts::SQRT_2 * s * h[0]);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * s * h[k] - (kf / (kf + 1.0)).sqrt() * h[k - 1];
        h.push(next);
    }
    h
}

/// Momentum-space wavefunction of a detector mode.
pub fn detector_wavefunction(mode: &DetectorMode, p: f64) -> Result<C64> {
    check_level(mode.level)?;
    let pt = &mode.point;
    let width = pt.sigma * std::f64::consts::SQRT_2;
    let s = (p - pt.p) / width;
    let h = hermite_functions(mode.level, s)[mode.level];
    let level_phase = C64::new(0.0, -1.0).powi(mode.level as i32);
    let phase = C64::from_polar(1.0, -p * pt.x + pt.p * pt.x / 2.0);
    Ok(level_phase * phase * (h / width.sqrt()))
}

/// `int conj(phi_a(p)) phi_b(p) dp` by composite Gauss-Legendre quadrature.
pub fn overlap_quadrature(a: &DetectorMode, b: &DetectorMode) -> Result<C64> {
    check_widths(&a.point, &b.point)?;
    let width = a.point.sigma * std::f64::consts::SQRT_2;
    let top = a.level.max(b.level) as f64;
    let reach = width * ((2.0 * top + 1.0).sqrt() + 10.0);
    let lo = a.point.p.min(b.point.p) - reach;
    let hi = a.point.p.max(b.point.p) + reach;
    let freq = (a.point.x - b.point.x).abs() + (2.0 * top + 1.0).sqrt() / width;
    let panels = 8 + ((hi - lo) * freq / PI).ceil() as usize;
    let rule = GaussLegendre::new(20);
    rule.integrate_checked(
        |p| {
            let fa = detector_wavefunction(a, p).unwrap_or_default();
            let fb = detector_wavefunction(b, p).unwrap_or_default();
            fa.conj() * fb
        },
        lo,
        hi,
        panels,
        1e-12,
    )
}

/// One-body density matrix of the Slater state built on `state` modes,
/// sandwiched between two detector modes: `<u| rho |v>`.
fn projected(state: &[DetectorMode], ginv: &DMatrix<C64>, u: &DetectorMode, v: &DetectorMode) -> Result<C64> {
    let left: Vec<C64> = state.iter().map(|s| overlap_general(u, s)).collect::<Result<_>>()?;
    let right: Vec<C64> = state.iter().map(|s| overlap_general(s, v)).collect::<Result<_>>()?;
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..state.len() {
        for j in 0..state.len() {
            acc += left[i] * ginv[(i, j)] * right[j];
        }
    }
    Ok(acc)
}

fn inverse_gram(state: &[DetectorMode]) -> Result<DMatrix<C64>> {
    gram(state)?
        .try_inverse()
        .ok_or_else(|| Error::InvalidConfig("state modes are linearly dependent".into()))
}

/// `<a^+_d a_d>` in the Slater state of `state` modes (`<d|rho|d>`).
pub fn registration_probability(state: &[DetectorMode], detector: &DetectorMode) -> Result<f64> {
    if state.is_empty() {
        return Ok(0.0);
    }
    Ok(projected(state, &inverse_gram(state)?, detector, detector)?.re)
}

/// Single particle at the origin, level-0 detector at `b`: `e^{-|b|^2}`.
pub fn register_prob_one(b: &PhasePoint) -> f64 {
    (-b.label().norm_sqr()).exp()
}

/// Particles at the origin in levels 0 and 1: `(1 + |b|^2) e^{-|b|^2}`.
pub fn register_prob_two(b: &PhasePoint) -> f64 {
    let r = b.label().norm_sqr();
    (1.0 + r) * (-r).exp()
}

fn origin_state(sigma: f64, particles: usize) -> Result<Vec<DetectorMode>> {
    let o = PhasePoint::origin(sigma)?;
    Ok((0..particles).map(|n| o.mode(n)).collect())
}

pub fn register_prob_one_gram(b: &PhasePoint) -> Result<f64> {
    registration_probability(&origin_state(b.sigma, 1)?, &b.mode(0))
}

pub fn register_prob_two_gram(b: &PhasePoint) -> Result<f64> {
    registration_probability(&origin_state(b.sigma, 2)?, &b.mode(0))
}

/// `<n_b n_a> - <n_b><n_a>` in the Slater state of `state`, by Wick:
/// `<a|rho|b> (<b|a> - <b|rho|a>)`. Complex when the detector modes do not
/// commute.
pub fn joint_correlation_in(state: &[DetectorMode], a: &DetectorMode, b: &DetectorMode) -> Result<C64> {
    let ginv = inverse_gram(state)?;
    let rho_ab = projected(state, &ginv, a, b)?;
    let rho_ba = projected(state, &ginv, b, a)?;
    Ok(rho_ab * (overlap_general(b, a)? - rho_ba))
}

/// Same quantity by explicit Fock-space evaluation inside the span of the
/// state and detector modes.
pub fn joint_correlation_fock(state: &[DetectorMode], a: &DetectorMode, b: &DetectorMode) -> Result<C64> {
    let mut modes = state.to_vec();
    modes.push(*a);
    modes.push(*b);
    let span = GramSpan::new(&gram(&modes)?, 1e-12)?;
    let ns = state.len();
    let (da, db) = (&span.modes[ns], &span.modes[ns + 1]);
    let creators: Vec<Factor<'_>> = span.modes[..ns].iter().map(Factor::Create).collect();
    let bra: Vec<Factor<'_>> = span.modes[..ns].iter().rev().map(Factor::Annihilate).collect();
    let sandwich = |inner: &[Factor<'_>]| -> C64 {
        let expr: Vec<Factor<'_>> = bra.iter().chain(inner).chain(&creators).copied().collect();
        span.space.vacuum_expectation(&expr)
    };
    let norm = sandwich(&[]);
    let nb = sandwich(&[Factor::Create(db), Factor::Annihilate(db)]) / norm;
    let na = sandwich(&[Factor::Create(da), Factor::Annihilate(da)]) / norm;
    let nbna = sandwich(&[Factor::Create(db), Factor::Annihilate(db), Factor::Create(da), Factor::Annihilate(da)]) / norm;
    Ok(nbna - nb * na)
}

/// Joint-registration correlation `C(a, b)` for the two-particle state at the
/// origin (levels 0 and 1) and level-0 detectors at `a` and `b`. Returns the
/// real (symmetrized) part; it is exactly real when `a` and `b` lie on a
/// common line through the origin.
pub fn joint_correlation(a: &PhasePoint, b: &PhasePoint) -> Result<f64> {
    check_widths(a, b)?;
    Ok(joint_correlation_in(&origin_state(a.sigma, 2)?, &a.mode(0), &b.mode(0))?.re)
}

/// Mean of `C(a, b e^{i theta})` over the relative phase `theta`.
pub fn joint_correlation_radial_mean(sigma: f64, a: f64, b: f64, samples: usize) -> Result<f64> {
    let pa = PhasePoint::from_label(sigma, C64::new(a, 0.0))?;
    let mut acc = 0.0;
    for j in 0..samples {
        let theta = 2.0 * PI * j as f64 / samples as f64;
        let pb = PhasePoint::from_label(sigma, C64::from_polar(b, theta))?;
        acc += joint_correlation(&pa, &pb)?;
    }
    Ok(acc / samples as f64)
}

/// Rows `beta,p_one,p_two` for detectors on the real axis.
pub fn write_registration_csv<W: Write>(sigma: f64, betas: &[f64], mut out: W) -> Result<()> {
    let io = |e: io::Error| Error::InvalidConfig(format!("write failed: {e}"));
    writeln!(out, "beta,p_one,p_two").map_err(io)?;
    for &b in betas {
        let pt = PhasePoint::from_label(sigma, C64::new(b, 0.0))?;
        writeln!(out, "{b},{:.17e},{:.17e}", register_prob_one(&pt), register_prob_two(&pt)).map_err(io)?;
    }
    Ok(())
}

/// Grid rows `a,b,c_real_axis,c_radial_mean` for the joint correlation.
pub fn write_correlation_csv<W: Write>(sigma: f64, grid: &[f64], mut out: W) -> Result<()> {
    let io = |e: io::Error| Error::InvalidConfig(format!("write failed: {e}"));
    let cells: Vec<(f64, f64)> = grid.iter().flat_map(|&a| grid.iter().map(move |&b| (a, b))).collect();
    let rows: Vec<(f64, f64, f64, f64)> = cells
        .par_iter()
        .map(|&(a, b)| {
            let pa = PhasePoint::from_label(sigma, C64::new(a, 0.0))?;
            let pb = PhasePoint::from_label(sigma, C64::new(b, 0.0))?;
            Ok((a, b, joint_correlation(&pa, &pb)?, joint_correlation_radial_mean(sigma, a, b, 64)?))
        })
        .collect::<Result<_>>()?;
    writeln!(out, "a,b,c_real_axis,c_radial_mean").map_err(io)?;
    for (a, b, c, r) in rows {
        writeln!(out, "{a},{b},{c:.17e},{r:.17e}").map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockSpace;
    use approx::assert_abs_diff_eq;

    fn pt(sigma: f64, re: f64, im: f64) -> PhasePoint {
        PhasePoint::from_label(sigma, C64::new(re, im)).unwrap()
    }

    #[test]
    fn label_roundtrip() {
        let p = PhasePoint::new(0.7, 1.3, -0.4).unwrap();
        let q = PhasePoint::from_label(0.7, p.label()).unwrap();
        assert_abs_diff_eq!(p.x, q.x, epsilon = 1e-15);
        assert_abs_diff_eq!(p.p, q.p, epsilon = 1e-15);
        assert_eq!(PhasePoint::origin(2.0).unwrap().label(), C64::new(0.0, 0.0));
        assert!(PhasePoint::new(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn ground_overlap_properties() {
        let a = pt(1.0, 0.3, -1.2);
        let b = pt(1.0, -0.5, 0.4);
        assert_abs_diff_eq!(overlap_ground(&a, &a).unwrap().re, 1.0, epsilon = 1e-15);
        let ab = overlap_ground(&a, &b).unwrap();
        let ba = overlap_ground(&b, &a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-15);
        assert_abs_diff_eq!(ab.norm(), (-(a.label() - b.label()).norm_sqr() / 2.0).exp(), epsilon = 1e-15);
        let o = PhasePoint::origin(1.0).unwrap();
        assert_abs_diff_eq!(overlap_ground(&o, &b).unwrap().norm(), (-b.label().norm_sqr() / 2.0).exp(), epsilon = 1e-15);
        assert_eq!(overlap_ground(&a, &pt(2.0, 0.0, 0.0)), Err(Error::WidthMismatch(1.0, 2.0)));
    }

    #[test]
    fn ground_overlap_matches_quadrature() {
        for sigma in [0.5, 1.0, 3.0] {
            let a = pt(sigma, 0.3, -1.2).mode(0);
            let b = pt(sigma, -0.5, 0.9).mode(0);
            let q = overlap_quadrature(&a, &b).unwrap();
            let c = overlap_ground(&a.point, &b.point).unwrap();
            assert!((q - c).norm() < 1e-10, "sigma {sigma}: {q} vs {c}");
        }
    }

    #[test]
    fn wavefunction_levels() {
        let o = PhasePoint::origin(1.0).unwrap();
        let g = detector_wavefunction(&o.mode(0), 0.4).unwrap();
        let want = (1.0 / (2.0 * PI).sqrt()).sqrt() * (-0.16f64 / 4.0).exp();
        assert_abs_diff_eq!(g.re, want, epsilon = 1e-15);
        let n1 = overlap_quadrature(&o.mode(1), &o.mode(1)).unwrap();
        assert_abs_diff_eq!(n1.re, 1.0, epsilon = 1e-12);
        let off = overlap_quadrature(&o.mode(0), &o.mode(1)).unwrap();
        assert!(off.norm() < 1e-12);
        assert!(matches!(detector_wavefunction(&o.mode(31), 0.0), Err(Error::LevelTooHigh { .. })));
    }

    #[test]
    fn unit_norm_up_to_level_cap() {
        let a = pt(0.8, 0.7, -0.3);
        for n in [0, 5, 17, 30] {
            let q = overlap_quadrature(&a.mode(n), &a.mode(n)).unwrap();
            assert_abs_diff_eq!(q.re, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn general_overlap_matches_quadrature() {
        let cases = [(0, 0), (0, 1), (1, 0), (2, 3), (4, 1), (7, 7)];
        for (m, n) in cases {
            let a = pt(1.2, 0.4, 0.9).mode(m);
            let b = pt(1.2, -0.8, -0.2).mode(n);
            let q = overlap_quadrature(&a, &b).unwrap();
            let c = overlap_general(&a, &b).unwrap();
            assert!((q - c).norm() < 1e-10, "({m},{n}): {q} vs {c}");
        }
    }

    #[test]
    fn general_overlap_reductions() {
        let a = pt(1.0, 0.6, -0.7);
        let b = pt(1.0, -0.2, 1.1);
        assert_eq!(overlap_general(&a.mode(0), &a.mode(1)).unwrap().norm(), 0.0);
        assert!((overlap_general(&a.mode(3), &a.mode(3)).unwrap() - 1.0).norm() < 1e-15);
        let g0 = overlap_general(&a.mode(0), &b.mode(0)).unwrap();
        assert!((g0 - overlap_ground(&a, &b).unwrap()).norm() < 1e-15);
        let o = PhasePoint::origin(1.0).unwrap();
        let r = b.label().norm_sqr();
        let v = overlap_general(&o.mode(1), &b.mode(0)).unwrap();
        assert_abs_diff_eq!(v.norm_sqr(), r * (-r).exp(), epsilon = 1e-15);
    }

    #[test]
    fn registration_closed_forms() {
        let o = PhasePoint::origin(1.0).unwrap();
        assert_eq!(register_prob_one(&o), 1.0);
        assert_eq!(register_prob_two(&o), 1.0);
        let b = pt(1.0, 0.6, 0.8);
        assert_abs_diff_eq!(register_prob_one(&b), (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(register_prob_two(&b), 2.0 * (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(register_prob_one_gram(&b).unwrap(), register_prob_one(&b), epsilon = 1e-12);
        assert_abs_diff_eq!(register_prob_two_gram(&b).unwrap(), register_prob_two(&b), epsilon = 1e-12);
    }

    #[test]
    fn vacuum_registers_nothing() {
        let d = pt(1.0, 0.2, 0.3).mode(0);
        assert_eq!(registration_probability(&[], &d).unwrap(), 0.0);
        let span = GramSpan::new(&gram(&[d]).unwrap(), 1e-12).unwrap();
        let m = &span.modes[0];
        let n = span.space.vacuum_expectation(&[Factor::Create(m), Factor::Annihilate(m)]);
        assert_eq!(n, C64::new(0.0, 0.0));
        let _ = FockSpace::new(1, 0).unwrap();
    }

    #[test]
    fn joint_correlation_special_points() {
        let o = PhasePoint::origin(1.0).unwrap();
        for b in [0.0, 0.5, 2.0, 5.0] {
            let pb = pt(1.0, b, 0.0);
            assert!(joint_correlation(&o, &pb).unwrap().abs() < 1e-12);
        }
        // a = b: variance n(1 - n) of the detector occupation
        let a = pt(1.0, 0.9, 0.0);
        let n = register_prob_two(&a);
        assert_abs_diff_eq!(joint_correlation(&a, &a).unwrap(), n * (1.0 - n), epsilon = 1e-12);
    }

    #[test]
    fn joint_correlation_routes_agree() {
        let state = [PhasePoint::origin(1.0).unwrap().mode(0), PhasePoint::origin(1.0).unwrap().mode(1)];
        for (a, b) in [((0.5, 0.0), (1.5, 0.0)), ((0.4, 0.7), (-1.0, 0.2)), ((2.0, 0.0), (2.0, 0.0))] {
            let da = pt(1.0, a.0, a.1).mode(0);
            let db = pt(1.0, b.0, b.1).mode(0);
            let wick = joint_correlation_in(&state, &da, &db).unwrap();
            let fock = joint_correlation_fock(&state, &da, &db).unwrap();
            assert!((wick - fock).norm() < 1e-10, "{wick} vs {fock}");
        }
    }

    #[test]
    fn radial_mean_of_origin_row_vanishes() {
        assert!(joint_correlation_radial_mean(1.0, 0.0, 1.3, 16).unwrap().abs() < 1e-12);
    }

    #[test]
    fn csv_emitters() {
        let mut buf = Vec::new();
        write_registration_csv(1.0, &[0.0, 1.0], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("beta,p_one,p_two"));
        assert!(text.lines().nth(1).unwrap().starts_with("0,1.0"));
        let mut buf = Vec::new();
        write_correlation_csv(1.0, &[0.0, 1.5, 3.0], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 9);
    }
}
