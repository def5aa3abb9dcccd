//! Independent reference implementations used as test oracles.
//!
//! Nothing here calls into the library's numerics: eigenproblems go through
//! nalgebra, the propagator through a Taylor series, and eigenvalues can also
//! be taken from the characteristic polynomial.

#![allow(dead_code, clippy::needless_range_loop)]

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use num_complex::Complex64;

pub type M4 = Matrix4<Complex64>;
pub type V4 = Vector4<Complex64>;

pub const H_PEV_S: f64 = 4.135667696e-3;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Oracle-side model parameters.
#[derive(Clone, Copy, Debug)]
pub struct Model {
    pub beta_a_inv: f64,
    pub beta_b_inv: f64,
    pub nu0: f64,
    pub coupling: f64,
    pub alpha: Complex64,
}

impl Model {
    pub fn correlated() -> Self {
        Self {
            beta_a_inv: 4.7,
            beta_b_inv: 3.3,
            nu0: 1e3,
            coupling: 215.1,
            alpha: c(0.17, 0.03),
        }
    }

    pub fn uncorrelated() -> Self {
        Self {
            beta_a_inv: 4.3,
            beta_b_inv: 3.7,
            alpha: c(0.0, 0.0),
            ..Self::correlated()
        }
    }

    pub fn spacing(&self) -> f64 {
        H_PEV_S * self.nu0
    }

    pub fn delta_beta(&self) -> f64 {
        1.0 / self.beta_a_inv - 1.0 / self.beta_b_inv
    }

    /// Excited-state population `1 / (1 + e^{beta E})`.
    pub fn excited(&self, beta_inv: f64) -> f64 {
        1.0 / (1.0 + (self.spacing() / beta_inv).exp())
    }

    pub fn rho0(&self) -> M4 {
        let (pa, pb) = (self.excited(self.beta_a_inv), self.excited(self.beta_b_inv));
        let pops = [(1.0 - pa) * (1.0 - pb), (1.0 - pa) * pb, pa * (1.0 - pb), pa * pb];
        let mut m = M4::zeros();
        for (i, p) in pops.iter().enumerate() {
            m[(i, i)] = c(*p, 0.0);
        }
        m[(1, 2)] = self.alpha;
        m[(2, 1)] = self.alpha.conj();
        m
    }

    /// Interaction in rad/s: only `<10|H|01> = i pi J / 2` and its conjugate.
    pub fn h_int(&self) -> M4 {
        let mut h = M4::zeros();
        let g = std::f64::consts::PI * self.coupling / 2.0;
        h[(2, 1)] = c(0.0, g);
        h[(1, 2)] = c(0.0, -g);
        h
    }

    /// `exp(-i H t)` by Taylor series.
    pub fn propagator(&self, t: f64) -> M4 {
        let x = self.h_int() * c(0.0, -t);
        let mut term = M4::identity();
        let mut sum = M4::identity();
        for k in 1..80 {
            term = term * x / c(k as f64, 0.0);
            sum += term;
            if term.norm() < 1e-20 {
                break;
            }
        }
        sum
    }

    /// Energy of qubit A in the state `v`.
    pub fn energy_a(&self, v: &Vector2<Complex64>) -> f64 {
        v[1].norm_sqr() * self.spacing()
    }
}

/// Closed-form propagator: rotation by `pi J t / 2` in span{|01>, |10>}.
pub fn analytic_propagator(coupling: f64, t: f64) -> M4 {
    let theta = std::f64::consts::PI * coupling * t / 2.0;
    let mut u = M4::identity();
    u[(1, 1)] = c(theta.cos(), 0.0);
    u[(2, 2)] = c(theta.cos(), 0.0);
    u[(1, 2)] = c(-theta.sin(), 0.0);
    u[(2, 1)] = c(theta.sin(), 0.0);
    u
}

/// Eigenpairs sorted by descending eigenvalue.
pub fn eig4(m: &M4) -> Vec<(f64, V4)> {
    let e = (*m).symmetric_eigen();
    let mut out: Vec<(f64, V4)> = (0..4).map(|k| (e.eigenvalues[k], e.eigenvectors.column(k).into_owned())).collect();
    out.sort_by(|a, b| b.0.total_cmp(&a.0));
    out
}

pub fn eig2(m: &Matrix2<Complex64>) -> Vec<(f64, Vector2<Complex64>)> {
    let e = (*m).symmetric_eigen();
    let mut out: Vec<(f64, Vector2<Complex64>)> =
        (0..2).map(|k| (e.eigenvalues[k], e.eigenvectors.column(k).into_owned())).collect();
    out.sort_by(|a, b| b.0.total_cmp(&a.0));
    out
}

pub fn trace_out_b(m: &M4) -> Matrix2<Complex64> {
    Matrix2::from_fn(|i, j| m[(2 * i, 2 * j)] + m[(2 * i + 1, 2 * j + 1)])
}

pub fn trace_out_a(m: &M4) -> Matrix2<Complex64> {
    Matrix2::from_fn(|i, j| m[(i, j)] + m[(2 + i, 2 + j)])
}

pub fn product(a: &Vector2<Complex64>, b: &Vector2<Complex64>) -> V4 {
    V4::from_fn(|k, _| a[k / 2] * b[k % 2])
}

pub fn ov(a: &V4, b: &V4) -> f64 {
    a.dotc(b).norm_sqr()
}

/// Eigenvalues of a Hermitian 4x4 matrix from its characteristic polynomial:
/// Faddeev-LeVerrier coefficients, Durand-Kerner roots, then one Newton
/// polish per root.
pub fn char_poly_eigenvalues(m: &M4) -> Vec<f64> {
    let n = 4;
    // coeffs[k] multiplies lambda^k; monic.
    let mut coeffs = vec![c(0.0, 0.0); n + 1];
    coeffs[n] = c(1.0, 0.0);
    let mut mk = M4::zeros();
    for k in 1..=n {
        mk = m * mk + M4::identity() * coeffs[n - k + 1];
        coeffs[n - k] = -(m * mk).trace() / c(k as f64, 0.0);
    }
    let eval = |z: Complex64| coeffs.iter().rev().fold(c(0.0, 0.0), |acc, a| acc * z + a);
    let deriv = |z: Complex64| {
        (1..=n)
            .rev()
            .fold(c(0.0, 0.0), |acc, k| acc * z + coeffs[k] * c(k as f64, 0.0))
    };
    let scale = 1.0 + coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let seed = c(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * scale).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let denom = (0..n).filter(|&j| j != i).fold(c(1.0, 0.0), |acc, j| acc * (roots[i] - roots[j]));
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-16 {
            break;
        }
    }
    for r in roots.iter_mut() {
        let d = deriv(*r);
        if d.norm() > 1e-12 {
            *r -= eval(*r) / d;
        }
    }
    let mut out: Vec<f64> = roots.iter().map(|r| r.re).collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// One oracle path, in the library's label order (`b1` fastest).
#[derive(Clone, Copy, Debug)]
pub struct OraclePath {
    pub s: usize,
    pub a0: usize,
    pub b0: usize,
    pub a1: usize,
    pub b1: usize,
    pub p_forward: f64,
    pub p_reverse: f64,
    pub p_retro: f64,
    /// `E_a1 - E_a0` before snapping.
    pub heat: f64,
    pub exp_minus: [f64; 10],
}

/// Names of `OraclePath::exp_minus` entries.
pub const ORACLE_FUNCTIONALS: [&str; 10] =
    ["sigma", "i0", "i1", "j0", "j1", "c0", "c1", "sigma_a", "sigma_b", "gamma"];

pub struct OracleTables {
    pub paths: Vec<OraclePath>,
    pub rho_t: M4,
    pub u: M4,
}

/// Brute-force enumeration of all 64 paths for a nondegenerate model.
pub fn oracle_tables(model: &Model, t: f64) -> OracleTables {
    let rho0 = model.rho0();
    let u = model.propagator(t);
    let rho_t = u * rho0 * u.adjoint();
    let s0 = eig4(&rho0);
    let s1 = eig4(&rho_t);
    let a0 = eig2(&trace_out_b(&rho0));
    let b0 = eig2(&trace_out_a(&rho0));
    let a1 = eig2(&trace_out_b(&rho_t));
    let b1 = eig2(&trace_out_a(&rho_t));
    let rho_a0 = trace_out_b(&rho0);
    let rho_b0 = trace_out_a(&rho0);

    // s* = eigenvector of rho_t with the largest overlap with U|s>.
    let pair: Vec<usize> = s0
        .iter()
        .map(|(_, v)| {
            let w = u * v;
            (0..4).max_by(|&i, &j| ov(&s1[i].1, &w).total_cmp(&ov(&s1[j].1, &w))).unwrap()
        })
        .collect();

    let marg_a1 = |i: usize| (a1[i].1.adjoint() * trace_out_b(&rho_t) * a1[i].1)[(0, 0)].re;
    let marg_b1 = |i: usize| (b1[i].1.adjoint() * trace_out_a(&rho_t) * b1[i].1)[(0, 0)].re;
    let joint = |rho: &M4, v: &V4| (v.adjoint() * rho * v)[(0, 0)].re;

    let mut paths = Vec::with_capacity(64);
    for s in 0..4 {
        for ia0 in 0..2 {
            for ib0 in 0..2 {
                for ia1 in 0..2 {
                    for ib1 in 0..2 {
                        let v0 = product(&a0[ia0].1, &b0[ib0].1);
                        let v1 = product(&a1[ia1].1, &b1[ib1].1);
                        let sv = &s0[s].1;
                        let ss = &s1[pair[s]].1;
                        let ud = u.adjoint();
                        let o1 = ov(&v0, sv);
                        let o2 = ov(&v1, &(u * sv));
                        let o3 = ov(&v1, ss);
                        let o4 = ov(&v0, &(ud * ss));
                        let p_forward = s0[s].0 * o1 * o2;
                        let p_reverse = s0[s].0 * ov(&v1, sv) * ov(&v0, &(ud * sv));
                        let p_retro = s1[pair[s]].0 * o3 * o4;
                        let heat = model.energy_a(&a1[ia1].1) - model.energy_a(&a0[ia0].1);

                        let mut exp_minus = [f64::NAN; 10];
                        if p_forward >= 1e-14 {
                            let q = (heat / model.spacing()).round() * model.spacing();
                            let local0 = a0[ia0].0 * b0[ib0].0;
                            let local1 = marg_a1(ia1) * marg_b1(ib1);
                            let j0p = joint(&rho0, &v0);
                            let j1p = joint(&rho_t, &v1);
                            let i0 = (s0[s].0 / local0).ln();
                            let i1 = (s1[pair[s]].0 / local1).ln();
                            let sa = (marg_a1(ia1) / (a1[ia1].1.adjoint() * rho_a0 * a1[ia1].1)[(0, 0)].re).ln();
                            let sb = (marg_b1(ib1) / (b1[ib1].1.adjoint() * rho_b0 * b1[ib1].1)[(0, 0)].re).ln();
                            let gamma = (o1 * o2 / (o3 * o4)).ln();
                            let sigma = -q * model.delta_beta() - i0 + i1 + sa + sb - gamma;
                            let values = [
                                sigma,
                                i0,
                                i1,
                                (j0p / local0).ln(),
                                (j1p / local1).ln(),
                                (s0[s].0 / j0p).ln(),
                                (s1[pair[s]].0 / j1p).ln(),
                                sa,
                                sb,
                                gamma,
                            ];
                            for (slot, x) in exp_minus.iter_mut().zip(values) {
                                *slot = (-x).exp();
                            }
                        }
                        paths.push(OraclePath {
                            s,
                            a0: ia0,
                            b0: ib0,
                            a1: ia1,
                            b1: ib1,
                            p_forward,
                            p_reverse,
                            p_retro,
                            heat,
                            exp_minus,
                        });
                    }
                }
            }
        }
    }
    OracleTables { paths, rho_t, u }
}

impl OracleTables {
    /// `<e^{-X}>` over the forward measure for `ORACLE_FUNCTIONALS[k]`.
    pub fn average(&self, k: usize) -> f64 {
        self.paths
            .iter()
            .filter(|p| p.p_forward >= 1e-14)
            .map(|p| p.p_forward * p.exp_minus[k])
            .sum()
    }

    /// Forward heat masses on `(-h nu0, 0, +h nu0)`.
    pub fn forward_heat(&self, spacing: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        for p in &self.paths {
            out[((p.heat / spacing).round() as i32 + 1) as usize] += p.p_forward;
        }
        out
    }

    /// Time-reversed masses binned by the reverse heat `E_a0 - E_a1`.
    pub fn reverse_heat(&self, spacing: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        for p in &self.paths {
            out[((-p.heat / spacing).round() as i32 + 1) as usize] += p.p_reverse;
        }
        out
    }
}

pub fn to_oracle(m: &qheat_core::ComplexMatrix) -> M4 {
    M4::from_fn(|i, j| m[(i, j)])
}

pub fn rand_hermitian4(entries: &[f64]) -> M4 {
    let mut m = M4::zeros();
    let mut k = 0;
    for i in 0..4 {
        m[(i, i)] = c(entries[k], 0.0);
        k += 1;
        for j in i + 1..4 {
            m[(i, j)] = c(entries[k], entries[k + 1]);
            m[(j, i)] = m[(i, j)].conj();
            k += 2;
        }
    }
    m
}

pub fn to_library(m: &M4) -> qheat_core::ComplexMatrix {
    qheat_core::ComplexMatrix::from_fn(4, |i, j| m[(i, j)]).unwrap()
}
