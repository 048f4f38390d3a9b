//! Vacuum noise seen by a subsection basis: occupation spectra and the
//! Left/Right filling-number correlation matrix.
//!
//! The quasi-mode operators `c_k` built from truncated coefficient rows have
//! `{c_k, c_k^+} = S_k`, which is not 1 (see [`crate::bogoliubov`]). Reported
//! occupations and correlations are those of the normalized modes
//! `c_k / sqrt(S_k)`: `n_k = sum_j |beta_{k,j}|^2 / S_k`. The raw sums are kept
//! alongside.

use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::bogoliubov::{coefficient_row, Calibration};
use crate::error::{Error, Result};
use crate::field::{FieldConfig, Region};
use crate::fock::{pair_correlation, QuasiOperator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Occupation {
    /// Occupation of the normalized quasi-mode.
    pub value: f64,
    /// `sum_j |beta_{k,j}|^2`.
    pub raw: f64,
    /// `sum_j |alpha_{k,j}|^2 + |beta_{k,j}|^2`.
    pub norm: f64,
}

fn check_covers(k: i64, cfg: &FieldConfig) -> Result<()> {
    let need = 2 * k.unsigned_abs() as usize;
    if cfg.truncation < need {
        return Err(Error::InvalidConfig(format!(
            "truncation {} does not reach section column {} of mode {k}",
            cfg.truncation, need
        )));
    }
    Ok(())
}

pub fn occupation_detail(k: i64, region: Region, cfg: &FieldConfig, cal: &Calibration) -> Result<Occupation> {
    check_covers(k, cfg)?;
    let row = coefficient_row(k, region, cfg, cal)?;
    let (raw, norm) = (row.vacuum_occupation(), row.anticommutator());
    Ok(Occupation { value: raw / norm, raw, norm })
}

/// Vacuum occupation of subsection mode `k` (Left basis; Right is identical).
pub fn occupation(k: i64, cfg: &FieldConfig, cal: &Calibration) -> Result<f64> {
    Ok(occupation_detail(k, Region::Left, cfg, cal)?.value)
}

#[derive(Debug, Clone)]
pub struct OccupationSpectrum {
    /// `values[i]` is the occupation of mode `k = i + 1`.
    pub values: Vec<f64>,
    pub raw: Vec<f64>,
    pub norms: Vec<f64>,
    pub cfg: FieldConfig,
    pub truncation_used: usize,
    pub region: Region,
}

impl OccupationSpectrum {
    pub fn at(&self, k: usize) -> f64 {
        self.values[k - 1]
    }
}

pub fn spectrum(k_max: usize, cfg: &FieldConfig, cal: &Calibration) -> Result<OccupationSpectrum> {
    spectrum_in(k_max, Region::Left, cfg, cal)
}

pub fn spectrum_in(k_max: usize, region: Region, cfg: &FieldConfig, cal: &Calibration) -> Result<OccupationSpectrum> {
    if k_max < 1 {
        return Err(Error::InvalidConfig("k_max must be >= 1".into()));
    }
    let occ: Vec<Occupation> = (1..=k_max as i64)
        .into_par_iter()
        .map(|k| occupation_detail(k, region, cfg, cal))
        .collect::<Result<_>>()?;
    Ok(OccupationSpectrum {
        values: occ.iter().map(|o| o.value).collect(),
        raw: occ.iter().map(|o| o.raw).collect(),
        norms: occ.iter().map(|o| o.norm).collect(),
        cfg: *cfg,
        truncation_used: cfg.truncation,
        region,
    })
}

/// Smallest cutoff of the form `2^j + 1` covering every mode in `ks`.
fn first_cutoff(ks: &[i64], start: usize) -> usize {
    let need = ks.iter().map(|k| 2 * k.unsigned_abs() as usize).max().unwrap_or(0).max(start);
    let mut n = 2;
    while n + 1 < need {
        n *= 2;
    }
    n + 1
}

/// Doubling probe over cutoffs `2^j + 1`: the first `N` at which every
/// occupation in `ks` changes by less than `rel_tol` relative to the
/// previous cutoff.
pub fn probe_truncation(ks: &[i64], cfg: &FieldConfig, cal: &Calibration, rel_tol: f64) -> Result<usize> {
    const MAX_CUTOFF: usize = (1 << 22) + 1;
    let mut n = first_cutoff(ks, 65);
    let eval = |n: usize| -> Result<Vec<f64>> {
        let c = cfg.with_truncation(n);
        ks.iter().map(|&k| occupation(k, &c, cal)).collect()
    };
    let mut prev = eval(n)?;
    while n < MAX_CUTOFF {
        let next_n = 2 * (n - 1) + 1;
        let next = eval(next_n)?;
        let settled = prev.iter().zip(&next).all(|(a, b)| (a - b).abs() <= rel_tol * b.abs().max(f64::MIN_POSITIVE));
        n = next_n;
        prev = next;
        if settled {
            return Ok(n);
        }
    }
    Ok(n)
}

/// Range of the alpha contraction in the correlation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaContraction {
    Full,
    /// Keep only the even (Kronecker) columns of alpha.
    EvenColumns,
}

#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    /// `entries[(k - 1, m - 1)] = D_{c,k; f,m}`.
    pub entries: DMatrix<C64>,
    pub cfg: FieldConfig,
    pub truncation_used: usize,
    pub contraction: AlphaContraction,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

impl CorrelationMatrix {
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, k: usize, m: usize) -> C64 {
        self.entries[(k - 1, m - 1)]
    }

    /// Median off-diagonal `|D|` over median diagonal `|D|`.
    pub fn near_diagonal_ratio(&self) -> f64 {
        let n = self.size();
        let diag = (0..n).map(|i| self.entries[(i, i)].norm()).collect();
        let off = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| self.entries[(i, j)].norm())
            .collect();
        median(off) / median(diag)
    }

    pub fn max_diagonal_imag(&self) -> f64 {
        (0..self.size()).map(|i| self.entries[(i, i)].im.abs()).fold(0.0, f64::max)
    }

    /// Rows `k,m,re_d,im_d`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "k,m,re_d,im_d")?;
        for k in 1..=self.size() {
            for m in 1..=self.size() {
                let d = self.get(k, m);
                writeln!(out, "{k},{m},{:.17e},{:.17e}", d.re, d.im)?;
            }
        }
        Ok(())
    }
}

fn contracted(row: &QuasiOperator, contraction: AlphaContraction, n: i64) -> QuasiOperator {
    let row = row.normalized();
    match contraction {
        AlphaContraction::Full => row,
        AlphaContraction::EvenColumns => {
            let alpha = row
                .alpha
                .iter()
                .enumerate()
                .map(|(i, a)| if (i as i64 - n).rem_euclid(2) == 0 { *a } else { C64::new(0.0, 0.0) })
                .collect();
            QuasiOperator::new(alpha, row.beta)
        }
    }
}

/// `D_{c,k; f,m} = <c^+_k c_k f^+_m f_m> - <c^+_k c_k><f^+_m f_m>` for the
/// normalized Left mode `k` and Right mode `m`.
pub fn cross_correlation(k: i64, m: i64, cfg: &FieldConfig, cal: &Calibration) -> Result<C64> {
    check_covers(k, cfg)?;
    check_covers(m, cfg)?;
    let c = coefficient_row(k, Region::Left, cfg, cal)?.normalized();
    let f = coefficient_row(m, Region::Right, cfg, cal)?.normalized();
    Ok(pair_correlation(&c, &f))
}

pub fn correlation_matrix(
    k_max: usize,
    cfg: &FieldConfig,
    cal: &Calibration,
    contraction: AlphaContraction,
) -> Result<CorrelationMatrix> {
    if k_max < 1 {
        return Err(Error::InvalidConfig("k_max must be >= 1".into()));
    }
    check_covers(k_max as i64, cfg)?;
    let n = cfg.truncation as i64;
    let rows = |region: Region| -> Result<Vec<QuasiOperator>> {
        (1..=k_max as i64)
            .into_par_iter()
            .map(|k| Ok(contracted(&coefficient_row(k, region, cfg, cal)?, contraction, n)))
            .collect()
    };
    let (left, right) = (rows(Region::Left)?, rows(Region::Right)?);
    let entries = DMatrix::from_fn(k_max, k_max, |i, j| pair_correlation(&left[i], &right[j]));
    Ok(CorrelationMatrix { entries, cfg: *cfg, truncation_used: cfg.truncation, contraction })
}

/// Columns `k, n_mu_l=<v>...`, one per spectrum; all must share `k` range.
pub fn write_spectra_csv<W: Write>(spectra: &[OccupationSpectrum], mut out: W) -> io::Result<()> {
    write!(out, "k")?;
    for s in spectra {
        write!(out, ",n_mu_l={}", s.cfg.mu_l())?;
    }
    writeln!(out)?;
    let rows = spectra.iter().map(|s| s.values.len()).min().unwrap_or(0);
    for i in 0..rows {
        write!(out, "{}", i + 1)?;
        for s in spectra {
            write!(out, ",{:.17e}", s.values[i])?;
        }
        writeln!(out)?;
    }
    Ok(())
}
