//! Exact fermionic Fock space on a handful of modes.
//!
//! Modes are ordered particles first (`a_0 .. a_{P-1}`), then antiparticles
//! (`b_0 .. b_{Q-1}`). Annihilators are built with Jordan-Wigner sign strings:
//! for basis state `s` (bit `j` = occupation of mode `j`),
//! `a_j |s> = (-1)^{popcount(s & (2^j - 1))} |s ^ 2^j>` when bit `j` is set.
//!
//! This is the ground truth for vacuum expectations of products of
//! quasi-particle operators `c = sum_j alpha_j a_j + conj(beta_j) b_j^+`.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub const MAX_MODES: usize = 12;
pub const MAX_RANDOM_MODES: usize = 6;

/// `c = sum_j alpha_j a_j + conj(beta_j) b_j^+`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiOperator {
    pub alpha: Vec<C64>,
    pub beta: Vec<C64>,
}

impl QuasiOperator {
    pub fn new(alpha: Vec<C64>, beta: Vec<C64>) -> Self {
        Self { alpha, beta }
    }

    /// Pure annihilator combination with no antiparticle part.
    pub fn particle(alpha: Vec<C64>) -> Self {
        Self { alpha, beta: Vec::new() }
    }

    /// `{c, c^+} = sum |alpha|^2 + |beta|^2`; equal to 1 for a canonical row.
    pub fn anticommutator(&self) -> f64 {
        self.alpha.iter().chain(&self.beta).map(|z| z.norm_sqr()).sum()
    }

    /// `<0| c^+ c |0> = sum |beta|^2` in the section vacuum.
    pub fn vacuum_occupation(&self) -> f64 {
        self.beta.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            alpha: self.alpha.iter().map(|z| z * s).collect(),
            beta: self.beta.iter().map(|z| z * s).collect(),
        }
    }

    /// Rescaled so that `{c, c^+} = 1`.
    pub fn normalized(&self) -> Self {
        self.scaled(1.0 / self.anticommutator().sqrt())
    }
}

/// `<0| c^+ f |0> <0| c f^+ |0>` for two quasi-operators on the same section
/// modes: the connected part of `<c^+ c f^+ f>` in a quasi-free vacuum.
pub fn pair_correlation(c: &QuasiOperator, f: &QuasiOperator) -> C64 {
    let dot = |x: &[C64], y: &[C64]| -> C64 { x.iter().zip(y).map(|(a, b)| a * b.conj()).sum() };
    dot(&c.beta, &f.beta) * dot(&c.alpha, &f.alpha)
}

/// One factor in an operator product.
#[derive(Debug, Clone, Copy)]
pub enum Factor<'a> {
    Annihilate(&'a QuasiOperator),
    Create(&'a QuasiOperator),
}

#[derive(Debug, Clone)]
struct SignedEntry {
    row: usize,
    col: usize,
    sign: f64,
}

#[derive(Debug, Clone)]
pub struct FockSpace {
    n_particle: usize,
    n_anti: usize,
    annihilators: Vec<Vec<SignedEntry>>,
}

impl FockSpace {
    pub fn new(n_particle: usize, n_anti: usize) -> Result<Self> {
        let n = n_particle + n_anti;
        if n > MAX_MODES {
            return Err(Error::DimensionTooLarge { requested: n, limit: MAX_MODES });
        }
        let dim = 1usize << n;
        let annihilators = (0..n)
            .map(|j| {
                let bit = 1usize << j;
                (0..dim)
                    .filter(|s| s & bit != 0)
                    .map(|s| {
                        let parity = (s & (bit - 1)).count_ones();
                        SignedEntry { row: s ^ bit, col: s, sign: if parity % 2 == 0 { 1.0 } else { -1.0 } }
                    })
                    .collect()
            })
            .collect();
        Ok(Self { n_particle, n_anti, annihilators })
    }

    pub fn n_modes(&self) -> usize {
        self.n_particle + self.n_anti
    }

    pub fn n_particle(&self) -> usize {
        self.n_particle
    }

    pub fn n_anti(&self) -> usize {
        self.n_anti
    }

    pub fn dim(&self) -> usize {
        1 << self.n_modes()
    }

    pub fn vacuum(&self) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.dim()];
        v[0] = C64::new(1.0, 0.0);
        v
    }

    fn particle_mode(&self, j: usize) -> usize {
        j
    }

    fn anti_mode(&self, j: usize) -> usize {
        self.n_particle + j
    }

    fn accumulate(&self, mode: usize, dagger: bool, coeff: C64, input: &[C64], out: &mut [C64]) {
        if coeff == C64::new(0.0, 0.0) {
            return;
        }
        for e in &self.annihilators[mode] {
            if dagger {
                out[e.col] += coeff * e.sign * input[e.row];
            } else {
                out[e.row] += coeff * e.sign * input[e.col];
            }
        }
    }

    fn check_shape(&self, op: &QuasiOperator) {
        assert!(
            op.alpha.len() <= self.n_particle && op.beta.len() <= self.n_anti,
            "quasi-operator with {} + {} coefficients does not fit a {} + {} mode space",
            op.alpha.len(),
            op.beta.len(),
            self.n_particle,
            self.n_anti
        );
    }

    pub fn apply(&self, factor: Factor<'_>, input: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        match factor {
            Factor::Annihilate(op) => {
                self.check_shape(op);
                for (j, a) in op.alpha.iter().enumerate() {
                    self.accumulate(self.particle_mode(j), false, *a, input, &mut out);
                }
                for (j, b) in op.beta.iter().enumerate() {
                    self.accumulate(self.anti_mode(j), true, b.conj(), input, &mut out);
                }
            }
            Factor::Create(op) => {
                self.check_shape(op);
                for (j, a) in op.alpha.iter().enumerate() {
                    self.accumulate(self.particle_mode(j), true, a.conj(), input, &mut out);
                }
                for (j, b) in op.beta.iter().enumerate() {
                    self.accumulate(self.anti_mode(j), false, *b, input, &mut out);
                }
            }
        }
        out
    }

    /// `<0| F_1 F_2 ... F_n |0>`, applying factors right to left.
    pub fn vacuum_expectation(&self, expr: &[Factor<'_>]) -> C64 {
        let mut v = self.vacuum();
        for f in expr.iter().rev() {
            v = self.apply(*f, &v);
        }
        v[0]
    }

    /// Dense matrix of the annihilator (or creator) of raw mode `mode`.
    pub fn dense(&self, mode: usize, dagger: bool) -> DMatrix<C64> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for e in &self.annihilators[mode] {
            let (r, c) = if dagger { (e.col, e.row) } else { (e.row, e.col) };
            m[(r, c)] = C64::new(e.sign, 0.0);
        }
        m
    }

    /// Coordinate listing `row col value` of an annihilator, for debugging.
    pub fn dump_coordinate(&self, mode: usize) -> String {
        let mut s = String::new();
        for e in &self.annihilators[mode] {
            let _ = writeln!(s, "{} {} {}", e.row, e.col, e.sign);
        }
        s
    }
}

/// `U = exp(iH)` for Hermitian `H` of size `2n`; quasi-operator `i` takes
/// `alpha = U[i, 0..n]` and `conj(beta) = U[i, n..2n]`.
pub fn canonical_transform_from_generator(h: &DMatrix<C64>) -> Vec<QuasiOperator> {
    assert!(h.is_square() && h.nrows() % 2 == 0, "generator must be square of even size");
    let n = h.nrows() / 2;
    let eig = h.clone().symmetric_eigen();
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, l)));
    let u = &eig.eigenvectors * phases * eig.eigenvectors.adjoint();
    (0..n)
        .map(|i| {
            let alpha = (0..n).map(|j| u[(i, j)]).collect();
            let beta = (0..n).map(|j| u[(i, n + j)].conj()).collect();
            QuasiOperator::new(alpha, beta)
        })
        .collect()
}

/// Seeded random canonical transform on `n_modes` particle and antiparticle
/// modes, exact up to rounding.
pub fn random_canonical_transform(n_modes: usize, seed: u64) -> Result<Vec<QuasiOperator>> {
    if n_modes > MAX_RANDOM_MODES {
        return Err(Error::DimensionTooLarge { requested: n_modes, limit: MAX_RANDOM_MODES });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = 2 * n_modes;
    let g = DMatrix::from_fn(size, size, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re, im)
    });
    let h = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    Ok(canonical_transform_from_generator(&h))
}

fn orthonormal_basis(vectors: &[&[C64]], tol: f64) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let scale = vectors.iter().map(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).fold(0.0, f64::max);
    for v in vectors {
        let mut w: Vec<C64> = v.to_vec();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for e in &basis {
                let proj: C64 = e.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                for (wi, ei) in w.iter_mut().zip(e) {
                    *wi -= proj * ei;
                }
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > tol * scale.max(1.0) {
            basis.push(w.into_iter().map(|z| z / norm).collect());
        }
    }
    basis
}

/// Quasi-operators re-expressed on orthonormal modes spanning their
/// coefficient vectors, with a Fock space to evaluate them in.
///
/// The new particle modes `A_r = sum_j e_r[j] a_j` (and likewise for the
/// antiparticles) are canonical, and the section vacuum is their vacuum, so
/// every vacuum expectation is unchanged.
#[derive(Debug, Clone)]
pub struct SpanReduction {
    pub ops: Vec<QuasiOperator>,
    pub space: FockSpace,
}

impl SpanReduction {
    pub fn new(ops: &[QuasiOperator]) -> Result<Self> {
        let tol = 1e-12;
        let alphas: Vec<&[C64]> = ops.iter().map(|o| o.alpha.as_slice()).collect();
        let betas: Vec<&[C64]> = ops.iter().map(|o| o.beta.as_slice()).collect();
        let ea = orthonormal_basis(&alphas, tol);
        let eb = orthonormal_basis(&betas, tol);
        let coords = |basis: &[Vec<C64>], v: &[C64]| -> Vec<C64> {
            basis.iter().map(|e| e.iter().zip(v).map(|(a, b)| a.conj() * b).sum()).collect()
        };
        let reduced = ops
            .iter()
            .map(|o| QuasiOperator::new(coords(&ea, &o.alpha), coords(&eb, &o.beta)))
            .collect();
        let space = FockSpace::new(ea.len(), eb.len())?;
        Ok(Self { ops: reduced, space })
    }
}

/// Particle-mode operators `a(v_j)` for vectors known only through their
/// Gram matrix `G_ij = <v_i|v_j>`, expressed on an orthonormal basis of
/// their span (eigenvectors of `G` with eigenvalue above `tol * max`).
#[derive(Debug, Clone)]
pub struct GramSpan {
    pub modes: Vec<QuasiOperator>,
    pub space: FockSpace,
}

impl GramSpan {
    pub fn new(gram: &DMatrix<C64>, tol: f64) -> Result<Self> {
        let eig = gram.clone().symmetric_eigen();
        let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..gram.nrows()).filter(|&r| eig.eigenvalues[r] > tol * top).collect();
        let space = FockSpace::new(keep.len(), 0)?;
        let modes = (0..gram.ncols())
            .map(|j| {
                // <e_r|v_j> = sum_i conj(V_ir) G_ij / sqrt(lambda_r); a(v_j) carries its conjugate
                let alpha = keep
                    .iter()
                    .map(|&r| {
                        let s: C64 = (0..gram.nrows()).map(|i| eig.eigenvectors[(i, r)].conj() * gram[(i, j)]).sum();
                        (s / eig.eigenvalues[r].sqrt()).conj()
                    })
                    .collect();
                QuasiOperator::particle(alpha)
            })
            .collect();
        Ok(Self { modes, space })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn max_abs(m: &DMatrix<C64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn dimensions() {
        assert_eq!(FockSpace::new(1, 1).unwrap().dim(), 4);
        assert_eq!(FockSpace::new(2, 2).unwrap().dim(), 16);
        assert!(matches!(FockSpace::new(7, 6), Err(Error::DimensionTooLarge { requested: 13, .. })));
    }

    #[test]
    fn car_identities_are_exact() {
        for (p, q) in [(1, 1), (2, 2), (3, 2), (3, 3)] {
            let s = FockSpace::new(p, q).unwrap();
            let id = DMatrix::<C64>::identity(s.dim(), s.dim());
            for i in 0..s.n_modes() {
                for j in 0..s.n_modes() {
                    let (ai, aj) = (s.dense(i, false), s.dense(j, false));
                    let ajd = s.dense(j, true);
                    let mixed = &ai * &ajd + &ajd * &ai;
                    let want = if i == j { id.clone() } else { DMatrix::zeros(s.dim(), s.dim()) };
                    assert!(max_abs(&(mixed - want)) <= 1e-13, "{{a_{i}, a_{j}^+}}");
                    assert!(max_abs(&(&ai * &aj + &aj * &ai)) <= 1e-13, "{{a_{i}, a_{j}}}");
                }
            }
            // vacuum is annihilated by every annihilator
            let vac = s.vacuum();
            for i in 0..s.n_modes() {
                let v = &s.dense(i, false) * nalgebra::DVector::from_vec(vac.clone());
                assert!(v.iter().all(|z| z.norm() == 0.0));
            }
        }
    }

    #[test]
    fn distinct_modes_anticommute() {
        let s = FockSpace::new(2, 0).unwrap();
        let m = s.dense(0, false) * s.dense(1, true) + s.dense(1, true) * s.dense(0, false);
        assert_eq!(max_abs(&m), 0.0);
    }

    #[test]
    fn occupation_of_quasi_operators() {
        let s = FockSpace::new(1, 1).unwrap();
        let c = QuasiOperator::new(vec![C64::new(1.0, 0.0)], vec![C64::new(0.0, 0.0)]);
        assert_eq!(s.vacuum_expectation(&[Factor::Create(&c), Factor::Annihilate(&c)]), C64::new(0.0, 0.0));
        // 2-mode Bogolubov: c = cos(th) a + sin(th) e^{-i phi} b^+
        let (th, phi) = (0.4_f64, 1.1_f64);
        let c = QuasiOperator::new(vec![C64::new(th.cos(), 0.0)], vec![C64::from_polar(th.sin(), phi)]);
        let n = s.vacuum_expectation(&[Factor::Create(&c), Factor::Annihilate(&c)]);
        assert_abs_diff_eq!(n.re, th.sin().powi(2), epsilon = 1e-15);
        assert_abs_diff_eq!(n.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn section_number_is_zero_in_vacuum() {
        let s = FockSpace::new(3, 3).unwrap();
        for j in 0..3 {
            let mut alpha = vec![C64::new(0.0, 0.0); 3];
            alpha[j] = C64::new(1.0, 0.0);
            let a = QuasiOperator::particle(alpha);
            assert_eq!(s.vacuum_expectation(&[Factor::Create(&a), Factor::Annihilate(&a)]), C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn zero_generator_is_identity() {
        let ops = canonical_transform_from_generator(&DMatrix::zeros(4, 4));
        assert_eq!(ops.len(), 2);
        for (i, op) in ops.iter().enumerate() {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(op.alpha[j].re, want, epsilon = 1e-15);
                assert_abs_diff_eq!(op.beta[j].norm(), 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn random_transform_is_reproducible_and_canonical() {
        let a = random_canonical_transform(2, 7).unwrap();
        let b = random_canonical_transform(2, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_canonical_transform(2, 8).unwrap());
        assert!(random_canonical_transform(7, 0).is_err());
        for n in 1..=4 {
            let ops = random_canonical_transform(n, 100 + n as u64).unwrap();
            let s = FockSpace::new(n, n).unwrap();
            for (i, ci) in ops.iter().enumerate() {
                assert_abs_diff_eq!(ci.anticommutator(), 1.0, epsilon = 1e-12);
                for (j, cj) in ops.iter().enumerate() {
                    let ac = s.vacuum_expectation(&[Factor::Annihilate(ci), Factor::Create(cj)])
                        + s.vacuum_expectation(&[Factor::Create(cj), Factor::Annihilate(ci)]);
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((ac - want).norm() <= 1e-12);
                    let cc = s.vacuum_expectation(&[Factor::Annihilate(ci), Factor::Annihilate(cj)])
                        + s.vacuum_expectation(&[Factor::Annihilate(cj), Factor::Annihilate(ci)]);
                    assert!(cc.norm() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn seeded_two_mode_snapshot() {
        let ops = random_canonical_transform(2, 2024).unwrap();
        let again = random_canonical_transform(2, 2024).unwrap();
        for (a, b) in ops.iter().zip(&again) {
            for (x, y) in a.alpha.iter().chain(&a.beta).zip(b.alpha.iter().chain(&b.beta)) {
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
    }

    #[test]
    fn pair_correlation_matches_fock() {
        let ops = random_canonical_transform(3, 11).unwrap();
        let s = FockSpace::new(3, 3).unwrap();
        let (c, f) = (&ops[0], &ops[2]);
        let four = s.vacuum_expectation(&[Factor::Create(c), Factor::Annihilate(c), Factor::Create(f), Factor::Annihilate(f)]);
        let nc = s.vacuum_expectation(&[Factor::Create(c), Factor::Annihilate(c)]);
        let nf = s.vacuum_expectation(&[Factor::Create(f), Factor::Annihilate(f)]);
        assert!((four - nc * nf - pair_correlation(c, f)).norm() <= 1e-12);
    }

    #[test]
    fn span_reduction_preserves_expectations() {
        // 5 section modes is past what we'd want to build directly for many
        // operators, but reduces to 2 + 2
        let mk = |s: u64| -> QuasiOperator {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let mut draw = || C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
            QuasiOperator::new((0..5).map(|_| draw()).collect(), (0..5).map(|_| draw()).collect())
        };
        let (c, f) = (mk(1), mk(2));
        let full = FockSpace::new(5, 5).unwrap();
        let red = SpanReduction::new(&[c.clone(), f.clone()]).unwrap();
        assert_eq!(red.space.n_modes(), 4);
        let (rc, rf) = (&red.ops[0], &red.ops[1]);
        let e_full = full.vacuum_expectation(&[Factor::Create(&c), Factor::Annihilate(&c), Factor::Create(&f), Factor::Annihilate(&f)]);
        let e_red = red.space.vacuum_expectation(&[Factor::Create(rc), Factor::Annihilate(rc), Factor::Create(rf), Factor::Annihilate(rf)]);
        assert!((e_full - e_red).norm() <= 1e-10 * e_full.norm().max(1.0));
    }

    #[test]
    fn gram_span_reproduces_gram() {
        // three vectors in C^2: rank 2
        let v = [
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.6, 0.0), C64::new(0.0, 0.8)],
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        ];
        let g = DMatrix::from_fn(3, 3, |i, j| v[i].iter().zip(&v[j]).map(|(a, b)| a.conj() * b).sum::<C64>());
        let span = GramSpan::new(&g, 1e-12).unwrap();
        assert_eq!(span.space.n_modes(), 2);
        for i in 0..3 {
            for j in 0..3 {
                let s = &span.space;
                let (ai, aj) = (&span.modes[i], &span.modes[j]);
                let ac = s.vacuum_expectation(&[Factor::Annihilate(ai), Factor::Create(aj)]);
                assert!((ac - g[(i, j)]).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn coordinate_dump() {
        let s = FockSpace::new(1, 1).unwrap();
        let dump = s.dump_coordinate(1);
        // a_1 on |11> = 3 picks up the sign of mode 0
        assert!(dump.contains("1 3 -1"));
        assert_eq!(dump.lines().count(), 2);
    }
}
