//! Dense-matrix reference constructions, written directly from the defining
//! formulas and independent of the FFT-based implementation under test.

#![allow(dead_code)]

use cpdsss::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

pub type Mat = Vec<Vec<Complex64>>;

/// Circulant matrix with the given first column: `C[i][j] = c[(i - j) mod n]`.
pub fn dense_circulant(first_col: &[Complex64], n: usize) -> Mat {
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    c[..first_col.len()].copy_from_slice(first_col);
    (0..n)
        .map(|i| (0..n).map(|j| c[(i + n - j) % n]).collect())
        .collect()
}

pub fn matvec(a: &Mat, x: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
        .collect()
}

pub fn hermitian(a: &Mat) -> Mat {
    let n = a.len();
    let m = a[0].len();
    (0..m)
        .map(|i| (0..n).map(|j| a[j][i].conj()).collect())
        .collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let inner = b.len();
    let m = b[0].len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..inner).map(|t| a[i][t] * b[t][j]).sum())
                .collect()
        })
        .collect()
}

/// Zadoff-Chu sequence straight from the closed form, `1/sqrt(n)` scaled.
pub fn zc_reference(n: usize, u: usize) -> Vec<Complex64> {
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|k| {
            let k = k as f64;
            let phase = if n.is_multiple_of(2) {
                -PI * u as f64 * k * k / n as f64
            } else {
                -PI * u as f64 * k * (k + 1.0) / n as f64
            };
            Complex64::from_polar(scale, phase)
        })
        .collect()
}

pub fn cyclic_shift(x: &[Complex64], d: usize) -> Vec<Complex64> {
    let n = x.len();
    (0..n).map(|k| x[(k + n - d) % n]).collect()
}

/// Tall expander: places `n/l` values at stride `l`.
pub fn dense_expand(symbols: &[Complex64], n: usize, l: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (i, s) in symbols.iter().enumerate() {
        out[i * l] = *s;
    }
    out
}

pub fn dense_compress(frame: &[Complex64], l: usize) -> Vec<Complex64> {
    frame.iter().step_by(l).copied().collect()
}

pub fn rel_err(got: &[Complex64], want: &[Complex64]) -> f64 {
    let num: f64 = got
        .iter()
        .zip(want)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let den: f64 = want.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    num / den
}

pub fn random_vec<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect()
}
