//! Zadoff-Chu sequences and the FFT-diagonalized spreading operator.
//!
//! A length-`n` ZC sequence scaled to unit total power has constant-modulus
//! samples `1/sqrt(n)` and mutually orthogonal cyclic shifts. The spreading
//! matrix `Z` whose columns are those shifts is circulant and unitary, so it
//! is represented here only by its frequency-domain diagonal and applied in
//! O(n log n).

use crate::fft;
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// A Zadoff-Chu sequence of length `n` with root `u`, scaled to unit power.
#[derive(Debug, Clone)]
pub struct ZcSequence {
    n: usize,
    u: usize,
    samples: Vec<Complex64>,
}

/// Generates a unit-power ZC sequence.
///
/// Even `n` uses `z[k] = exp(-jπuk²/n)/sqrt(n)`, odd `n` uses
/// `z[k] = exp(-jπuk(k+1)/n)/sqrt(n)`. The root must satisfy `gcd(u, n) = 1`.
pub fn generate_zc(n: usize, u: usize) -> Result<ZcSequence> {
    if n < 2 {
        return Err(Error::InvalidLength(n));
    }
    if gcd(u % n, n) != 1 {
        return Err(Error::InvalidRoot { root: u, n });
    }
    let scale = 1.0 / (n as f64).sqrt();
    let nf = n as f64;
    let uf = u as f64;
    let samples = (0..n)
        .map(|k| {
            let kf = k as f64;
            let phase = if n.is_multiple_of(2) {
                -PI * uf * kf * kf / nf
            } else {
                -PI * uf * kf * (kf + 1.0) / nf
            };
            Complex64::from_polar(scale, phase)
        })
        .collect();
    Ok(ZcSequence { n, u, samples })
}

impl ZcSequence {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn root(&self) -> usize {
        self.u
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// The sequence cyclically shifted down by `d` samples: `out[k] = z[(k - d) mod n]`.
    ///
    /// This is column `d` of the spreading matrix.
    pub fn cyclic_shift(&self, d: usize) -> Vec<Complex64> {
        let d = d % self.n;
        let mut out = Vec::with_capacity(self.n);
        out.extend_from_slice(&self.samples[self.n - d..]);
        out.extend_from_slice(&self.samples[..self.n - d]);
        out
    }
}

/// Frequency-domain representation of the circulant spreading matrix `Z`.
///
/// `lambda_z` is the DFT of the first column (the ZC sequence itself); since
/// `Z` is unitary every diagonal entry has unit magnitude, and the despreading
/// diagonal is the elementwise conjugate.
#[derive(Debug, Clone)]
pub struct SpreadingOperator {
    n: usize,
    lambda_z: Vec<Complex64>,
}

/// Builds the spreading operator for a ZC sequence.
pub fn spreading_operator(z: &ZcSequence) -> SpreadingOperator {
    SpreadingOperator {
        n: z.len(),
        lambda_z: fft::dft_of(z.samples()),
    }
}

impl SpreadingOperator {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn lambda(&self) -> &[Complex64] {
        &self.lambda_z
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got,
            });
        }
        Ok(())
    }

    /// Applies `Z` to a symbol vector: `IDFT(lambda_z ⊙ DFT(s))`.
    pub fn spread(&self, s: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(s.len())?;
        let mut spec = fft::dft_of(s);
        for (v, l) in spec.iter_mut().zip(&self.lambda_z) {
            *v *= l;
        }
        fft::idft(&mut spec);
        Ok(spec)
    }

    /// Applies `Zᴴ` to a received vector, undoing the spreading.
    pub fn despread(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(y.len())?;
        let mut spec = fft::dft_of(y);
        for (v, l) in spec.iter_mut().zip(&self.lambda_z) {
            *v *= l.conj();
        }
        fft::idft(&mut spec);
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(v: &[Complex64]) -> f64 {
        v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(generate_zc(1, 1), Err(Error::InvalidLength(1))));
        assert!(matches!(
            generate_zc(16, 4),
            Err(Error::InvalidRoot { root: 4, n: 16 })
        ));
    }

    #[test]
    fn n4_u1_matches_direct_evaluation() {
        // z[k] = exp(-jπk²/4)/2 for k = 0..3
        let z = generate_zc(4, 1).unwrap();
        let e = Complex64::from_polar(0.5, -PI / 4.0);
        let expected = [Complex64::new(0.5, 0.0), e, Complex64::new(-0.5, 0.0), e];
        for (a, b) in z.samples().iter().zip(&expected) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn constant_modulus_n2048() {
        let z = generate_zc(2048, 1).unwrap();
        let want = 1.0 / 2048f64.sqrt();
        for s in z.samples() {
            assert!((s.norm() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_gram_is_identity_n16() {
        // Brute-force Gram matrix of all 16 cyclic shifts, root 3.
        let z = generate_zc(16, 3).unwrap();
        for i in 0..16 {
            let zi = z.cyclic_shift(i);
            for j in 0..16 {
                let zj = z.cyclic_shift(j);
                let dot: Complex64 = zi.iter().zip(&zj).map(|(a, b)| a.conj() * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot.norm() - want).abs() < 1e-10, "({i},{j}) -> {dot}");
            }
        }
    }

    #[test]
    fn operator_matches_dense_shift_construction() {
        // Dense Z built by explicit cyclic shifts, n = 8.
        let z = generate_zc(8, 1).unwrap();
        let op = spreading_operator(&z);
        for col in 0..8 {
            let mut e = vec![Complex64::new(0.0, 0.0); 8];
            e[col] = Complex64::new(1.0, 0.0);
            let got = op.spread(&e).unwrap();
            let want = z.cyclic_shift(col);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn lambda_is_unimodular() {
        let z = generate_zc(64, 5).unwrap();
        let op = spreading_operator(&z);
        for l in op.lambda() {
            assert!((l.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn despread_inverts_spread_and_preserves_norm() {
        let z = generate_zc(256, 1).unwrap();
        let op = spreading_operator(&z);
        let s: Vec<Complex64> = (0..256)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.61).cos()))
            .collect();
        let spread = op.spread(&s).unwrap();
        assert!((norm(&spread) - norm(&s)).abs() / norm(&s) < 1e-9);
        let back = op.despread(&spread).unwrap();
        for (a, b) in s.iter().zip(&back) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let z = generate_zc(16, 1).unwrap();
        let op = spreading_operator(&z);
        let s = vec![Complex64::new(1.0, 0.0); 8];
        assert!(matches!(op.spread(&s), Err(Error::LengthMismatch { .. })));
        assert!(matches!(op.despread(&s), Err(Error::LengthMismatch { .. })));
    }
}
