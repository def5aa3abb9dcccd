use std::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::{inner, ComplexMatrix};
use crate::error::{Error, Result};
use crate::tolerances;

/// Eigenvalues (descending) and matching unit eigenvectors of a Hermitian
/// matrix.
///
/// Each eigenvector's first component with modulus above
/// [`tolerances::PHASE_COMPONENT`] is real and positive. Inside a degenerate
/// cluster the vectors are orthonormalized and ordered lexicographically by
/// their components, so identical inputs always give identical labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralEnsemble {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<Complex64>>,
}

impl SpectralEnsemble {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.eigenvectors.first().map_or(0, Vec::len)
    }

    /// `sum_k lambda_k |v_k><v_k|`.
    pub fn reconstruct(&self) -> Result<ComplexMatrix> {
        let mut m = ComplexMatrix::zeros(self.dim())?;
        for (lambda, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            m = m + ComplexMatrix::outer(v)?.scale(Complex64::new(*lambda, 0.0));
        }
        Ok(m)
    }

    /// Largest `|<v_i|v_j> - delta_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.eigenvectors.iter().enumerate() {
            for (j, b) in self.eigenvectors.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((inner(a, b) - target).norm());
            }
        }
        worst
    }

    /// Index ranges of eigenvalue clusters closer than
    /// [`tolerances::DEGENERACY`].
    pub fn clusters(&self) -> Vec<std::ops::Range<usize>> {
        clusters_of(&self.eigenvalues)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Eigendecomposition of a Hermitian 2x2 or 4x4 matrix by cyclic complex
/// Jacobi rotations.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<SpectralEnsemble> {
    let deviation = m.hermiticity_defect();
    if !(deviation <= tolerances::HERMITIAN) {
        return Err(Error::NotHermitian { deviation });
    }
    let n = m.dim();
    let (values, vectors) = eig_raw(n, m.hermitian_part().entries())?;

    let mut pairs: Vec<(f64, Vec<Complex64>)> = values.into_iter().zip(vectors).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (eigenvalues, mut eigenvectors): (Vec<f64>, Vec<Vec<Complex64>>) = pairs.into_iter().unzip();

    for range in clusters_of(&eigenvalues) {
        if range.len() > 1 {
            gram_schmidt(&mut eigenvectors[range.clone()]);
            for v in &mut eigenvectors[range.clone()] {
                fix_phase(v);
            }
            eigenvectors[range].sort_by(|a, b| lexicographic_desc(a, b));
        }
    }
    for v in &mut eigenvectors {
        fix_phase(v);
    }

    Ok(SpectralEnsemble {
        eigenvalues,
        eigenvectors,
    })
}

/// `exp(-i t H / hbar)` through the eigendecomposition of `H`.
pub fn propagator_from_hermitian(h: &ComplexMatrix, t: f64, hbar: Hbar) -> Result<ComplexMatrix> {
    if !t.is_finite() {
        return Err(Error::param("t", "time must be finite"));
    }
    let spectrum = hermitian_eig(h)?;
    let scale = t / hbar.value();
    let mut u = ComplexMatrix::zeros(h.dim())?;
    for (lambda, v) in spectrum.eigenvalues.iter().zip(&spectrum.eigenvectors) {
        let phase = Complex64::from_polar(1.0, -lambda * scale);
        u = u + ComplexMatrix::outer(v)?.scale(phase);
    }
    Ok(u)
}

/// Units in which a Hamiltonian handed to [`propagator_from_hermitian`] is
/// expressed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hbar {
    /// `H` in angular frequency (rad/s); `hbar = 1`.
    Unit,
    /// `H` in peV, `hbar` in peV s.
    PeVSecond,
}

impl Hbar {
    pub fn value(self) -> f64 {
        match self {
            Hbar::Unit => 1.0,
            Hbar::PeVSecond => crate::states::PLANCK_PEV_S / std::f64::consts::TAU,
        }
    }
}

/// Unsorted eigenpairs of a Hermitian `n x n` row-major buffer, `n <= 4`.
pub(crate) fn eig_raw(n: usize, entries: &[Complex64]) -> Result<(Vec<f64>, Vec<Vec<Complex64>>)> {
    debug_assert_eq!(entries.len(), n * n);
    let mut a = entries.to_vec();
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = Complex64::new(1.0, 0.0);
    }
    jacobi_sweeps(n, &mut a, &mut v)?;
    let values = (0..n).map(|i| a[i * n + i].re).collect();
    let vectors = (0..n).map(|k| (0..n).map(|i| v[i * n + k]).collect()).collect();
    Ok((values, vectors))
}

fn off_diagonal_norm(n: usize, a: &[Complex64]) -> f64 {
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[i * n + j].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

fn jacobi_sweeps(n: usize, a: &mut [Complex64], v: &mut [Complex64]) -> Result<()> {
    let norm = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok(());
    }
    let threshold = tolerances::JACOBI_OFF_DIAGONAL * norm;
    for _ in 0..tolerances::JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(n, a) <= threshold {
            return Ok(());
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(n, a, v, p, q);
            }
        }
    }
    let off_norm = off_diagonal_norm(n, a);
    if off_norm <= threshold {
        Ok(())
    } else {
        Err(Error::NoConvergence {
            sweeps: tolerances::JACOBI_MAX_SWEEPS,
            off_norm,
        })
    }
}

/// Annihilates `a[p][q]` with the unitary
/// `G = [[c, s e^{i phi}], [-s e^{-i phi}, c]]` acting on `(p, q)`:
/// `A <- G^dagger A G`, `V <- V G`.
fn rotate(n: usize, a: &mut [Complex64], v: &mut [Complex64], p: usize, q: usize) {
    let apq = a[p * n + q];
    let magnitude = apq.norm();
    if magnitude == 0.0 {
        return;
    }
    let phase = apq / magnitude;
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let theta = (aqq - app) / (2.0 * magnitude);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let s_phase = phase * s;

    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * c - s_phase.conj() * akq;
        a[k * n + q] = s_phase * akp + akq * c;
    }
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = apk * c - s_phase * aqk;
        a[q * n + k] = s_phase.conj() * apk + aqk * c;
    }
    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = vkp * c - s_phase.conj() * vkq;
        v[k * n + q] = s_phase * vkp + vkq * c;
    }
    a[p * n + q] = Complex64::new(0.0, 0.0);
    a[q * n + p] = Complex64::new(0.0, 0.0);
    a[p * n + p].im = 0.0;
    a[q * n + q].im = 0.0;
}

pub(crate) fn clusters_of(sorted_desc: &[f64]) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=sorted_desc.len() {
        if i == sorted_desc.len() || (sorted_desc[i - 1] - sorted_desc[i]).abs() >= tolerances::DEGENERACY {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Modified Gram-Schmidt in place, preserving order.
pub(crate) fn gram_schmidt(vectors: &mut [Vec<Complex64>]) {
    for i in 0..vectors.len() {
        for j in 0..i {
            let (head, tail) = vectors.split_at_mut(i);
            let proj = inner(&head[j], &tail[0]);
            for (x, y) in tail[0].iter_mut().zip(&head[j]) {
                *x -= proj * y;
            }
        }
        normalize(&mut vectors[i]);
    }
}

pub(crate) fn normalize(v: &mut [Complex64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in v.iter_mut() {
            *z /= norm;
        }
    }
}

/// Rotates `v` so its first non-negligible component is real positive.
pub fn fix_phase(v: &mut [Complex64]) {
    if let Some(k) = v.iter().position(|z| z.norm() > tolerances::PHASE_COMPONENT) {
        let modulus = v[k].norm();
        let unit = v[k].conj() / modulus;
        for z in v.iter_mut() {
            *z *= unit;
        }
        v[k] = Complex64::new(modulus, 0.0);
    }
}

pub(crate) fn lexicographic_desc(a: &[Complex64], b: &[Complex64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let ord = y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}
