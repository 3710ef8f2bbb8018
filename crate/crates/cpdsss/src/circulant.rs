//! Circulant operator algebra over frequency-domain diagonals, plus the
//! symbol-rate expander.
//!
//! A circulant is stored as its first column (the zero-padded impulse
//! response) together with the cached DFT of that column. The diagonal is
//! authoritative for arithmetic; the first column is kept for reporting and
//! estimation. The expander `E_L` is never materialized: expand/compress are
//! index operations.

use crate::fft;
use crate::{Error, Result};
use num_complex::Complex64;

/// An `n x n` circulant matrix represented by its first column and its
/// frequency response.
#[derive(Debug, Clone)]
pub struct CirculantOperator {
    n: usize,
    first_col: Vec<Complex64>,
    freq: Vec<Complex64>,
}

impl CirculantOperator {
    /// Builds the circulant whose first column is `h` zero-padded to length `n`.
    pub fn from_impulse(h: &[Complex64], n: usize) -> Result<Self> {
        if h.len() > n {
            return Err(Error::ImpulseTooLong { len: h.len(), n });
        }
        let mut first_col = vec![Complex64::new(0.0, 0.0); n];
        first_col[..h.len()].copy_from_slice(h);
        let freq = fft::dft_of(&first_col);
        Ok(CirculantOperator { n, first_col, freq })
    }

    /// The identity operator of dimension `n`.
    pub fn identity(n: usize) -> Self {
        let mut first_col = vec![Complex64::new(0.0, 0.0); n];
        first_col[0] = Complex64::new(1.0, 0.0);
        CirculantOperator {
            n,
            first_col,
            freq: vec![Complex64::new(1.0, 0.0); n],
        }
    }

    /// Builds an operator directly from its frequency diagonal.
    pub fn from_freq(freq: Vec<Complex64>) -> Self {
        let first_col = fft::idft_of(&freq);
        CirculantOperator {
            n: freq.len(),
            first_col,
            freq,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn first_col(&self) -> &[Complex64] {
        &self.first_col
    }

    pub fn freq(&self) -> &[Complex64] {
        &self.freq
    }

    /// Energy of the first column, `‖h‖²`. Every diagonal entry of `CᴴC`
    /// equals this value.
    pub fn col_energy(&self) -> f64 {
        self.first_col.iter().map(|x| x.norm_sqr()).sum()
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

    /// Circular convolution of the first column with `x`, i.e. `C·x`.
    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(x.len())?;
        let mut spec = fft::dft_of(x);
        for (v, f) in spec.iter_mut().zip(&self.freq) {
            *v *= f;
        }
        fft::idft(&mut spec);
        Ok(spec)
    }

    /// `Cᴴ·x`, via the conjugated diagonal.
    pub fn apply_hermitian(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(x.len())?;
        let mut spec = fft::dft_of(x);
        for (v, f) in spec.iter_mut().zip(&self.freq) {
            *v *= f.conj();
        }
        fft::idft(&mut spec);
        Ok(spec)
    }

    /// The product of two circulants as a single diagonal multiply.
    /// Circulants commute, so `a.compose(b) == b.compose(a)`.
    pub fn compose(&self, other: &CirculantOperator) -> Result<CirculantOperator> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                a: self.n,
                b: other.n,
            });
        }
        let freq = self
            .freq
            .iter()
            .zip(&other.freq)
            .map(|(a, b)| a * b)
            .collect();
        Ok(CirculantOperator::from_freq(freq))
    }

    /// The Hermitian transpose `Cᴴ` as an operator.
    pub fn hermitian(&self) -> CirculantOperator {
        CirculantOperator::from_freq(self.freq.iter().map(|f| f.conj()).collect())
    }

    /// The operator scaled by a real factor.
    pub fn scaled(&self, a: f64) -> CirculantOperator {
        CirculantOperator {
            n: self.n,
            first_col: self.first_col.iter().map(|x| x * a).collect(),
            freq: self.freq.iter().map(|x| x * a).collect(),
        }
    }

    /// Dense materialization (column `i` is the cyclic shift of the first
    /// column by `i`). Used by the dense log-det path and by oracles.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let n = self.n;
        (0..n)
            .map(|row| {
                (0..n)
                    .map(|col| self.first_col[(row + n - col) % n])
                    .collect()
            })
            .collect()
    }
}

/// Shape of the expander matrix `E_L`: an `n x n/l` selection placing `n/l`
/// symbols every `l` samples.
#[derive(Debug, Clone, Copy)]
pub struct ExpanderSpec {
    n: usize,
    l: usize,
}

impl ExpanderSpec {
    pub fn new(n: usize, l: usize) -> Result<Self> {
        if l == 0 || !n.is_multiple_of(l) {
            return Err(Error::BadFactor { l, n });
        }
        Ok(ExpanderSpec { n, l })
    }

    pub fn frame_len(&self) -> usize {
        self.n
    }

    pub fn factor(&self) -> usize {
        self.l
    }

    /// Number of symbol positions, `n/l`.
    pub fn symbols(&self) -> usize {
        self.n / self.l
    }

    /// `E_L·s`: `s[i]` lands at index `i·l`, zeros elsewhere.
    pub fn expand(&self, s: &[Complex64]) -> Result<Vec<Complex64>> {
        if s.len() != self.symbols() {
            return Err(Error::LengthMismatch {
                expected: self.symbols(),
                got: s.len(),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        for (i, v) in s.iter().enumerate() {
            out[i * self.l] = *v;
        }
        Ok(out)
    }

    /// `E_Lᴴ·y`: reads every `l`-th sample.
    pub fn compress(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        if y.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: y.len(),
            });
        }
        Ok((0..self.symbols()).map(|i| y[i * self.l]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn rand_vec(rng: &mut ChaCha12Rng, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect()
    }

    /// Dense oracle: matrix built by explicit cyclic shifts of the padded
    /// impulse, applied by direct matrix-vector product.
    fn dense_matvec(h: &[Complex64], n: usize, x: &[Complex64]) -> Vec<Complex64> {
        let mut padded = vec![Complex64::new(0.0, 0.0); n];
        padded[..h.len()].copy_from_slice(h);
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for row in 0..n {
            for col in 0..n {
                out[row] += padded[(row + n - col) % n] * x[col];
            }
        }
        out
    }

    fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        let num: f64 = a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let den: f64 = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        num / den.max(1e-300)
    }

    #[test]
    fn identity_from_single_tap() {
        let c = CirculantOperator::from_impulse(&[Complex64::new(1.0, 0.0)], 8).unwrap();
        for f in c.freq() {
            assert!((f - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
        let x = vec![Complex64::new(2.0, -1.0); 8];
        let y = c.apply(&x).unwrap();
        assert!(rel_err(&y, &x) < 1e-12);
    }

    #[test]
    fn delay_tap_shifts_basis_vector() {
        let h = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        let c = CirculantOperator::from_impulse(&h, 8).unwrap();
        let mut e0 = vec![Complex64::new(0.0, 0.0); 8];
        e0[0] = Complex64::new(1.0, 0.0);
        let y = c.apply(&e0).unwrap();
        assert!((y[1] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let tail: f64 = y
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != 1)
            .map(|(_, v)| v.norm())
            .sum();
        assert!(tail < 1e-12);
    }

    #[test]
    fn impulse_longer_than_frame_rejected() {
        let h = vec![Complex64::new(1.0, 0.0); 9];
        assert!(matches!(
            CirculantOperator::from_impulse(&h, 8),
            Err(Error::ImpulseTooLong { len: 9, n: 8 })
        ));
    }

    #[test]
    fn apply_matches_dense_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for &n in &[16usize, 64] {
            let h = rand_vec(&mut rng, 5);
            let x = rand_vec(&mut rng, n);
            let c = CirculantOperator::from_impulse(&h, n).unwrap();
            let got = c.apply(&x).unwrap();
            let want = dense_matvec(&h, n, &x);
            assert!(rel_err(&got, &want) < 1e-10);
        }
    }

    #[test]
    fn hermitian_apply_matches_dense_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let n = 64;
        let h = rand_vec(&mut rng, 5);
        let x = rand_vec(&mut rng, n);
        let c = CirculantOperator::from_impulse(&h, n).unwrap();
        let got = c.apply_hermitian(&x).unwrap();
        // Dense Cᴴ x via conjugate-transposed matvec.
        let mut padded = vec![Complex64::new(0.0, 0.0); n];
        padded[..h.len()].copy_from_slice(&h);
        let mut want = vec![Complex64::new(0.0, 0.0); n];
        for row in 0..n {
            for col in 0..n {
                want[row] += padded[(col + n - row) % n].conj() * x[col];
            }
        }
        assert!(rel_err(&got, &want) < 1e-10);
    }

    #[test]
    fn adjoint_identity() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let n = 64;
        let c = CirculantOperator::from_impulse(&rand_vec(&mut rng, 7), n).unwrap();
        let x = rand_vec(&mut rng, n);
        let y = rand_vec(&mut rng, n);
        let lhs: Complex64 = c
            .apply(&x)
            .unwrap()
            .iter()
            .zip(&y)
            .map(|(a, b)| a.conj() * b)
            .sum();
        let rhs: Complex64 = x
            .iter()
            .zip(c.apply_hermitian(&y).unwrap().iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn compose_matches_sequential_application() {
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        let n = 128;
        let a = CirculantOperator::from_impulse(&rand_vec(&mut rng, 6), n).unwrap();
        let b = CirculantOperator::from_impulse(&rand_vec(&mut rng, 9), n).unwrap();
        let x = rand_vec(&mut rng, n);
        let ab = a.compose(&b).unwrap();
        let got = ab.apply(&x).unwrap();
        let want = a.apply(&b.apply(&x).unwrap()).unwrap();
        assert!(rel_err(&got, &want) < 1e-10);
        // Commutativity on the diagonals.
        let ba = b.compose(&a).unwrap();
        for (p, q) in ab.freq().iter().zip(ba.freq()) {
            assert!((p - q).norm() < 1e-12);
        }
    }

    #[test]
    fn gram_diagonal_is_col_energy() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let n = 64;
        let a = CirculantOperator::from_impulse(&rand_vec(&mut rng, 10), n).unwrap();
        let gram = a.hermitian().compose(&a).unwrap();
        let dense = gram.to_dense();
        let energy = a.col_energy();
        for (i, row) in dense.iter().enumerate() {
            assert!((row[i] - Complex64::new(energy, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn dense_materialization_matches_shift_construction() {
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let n = 32;
        let h = rand_vec(&mut rng, 5);
        let c = CirculantOperator::from_impulse(&h, n).unwrap();
        let dense = c.to_dense();
        let mut padded = vec![Complex64::new(0.0, 0.0); n];
        padded[..h.len()].copy_from_slice(&h);
        for col in 0..n {
            for row in 0..n {
                let want = padded[(row + n - col) % n];
                assert!((dense[row][col] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn expander_basics() {
        let e = ExpanderSpec::new(8, 4).unwrap();
        let s = [Complex64::new(1.0, 1.0), Complex64::new(2.0, -2.0)];
        let x = e.expand(&s).unwrap();
        assert_eq!(x.len(), 8);
        assert!((x[0] - s[0]).norm() < 1e-15);
        assert!((x[4] - s[1]).norm() < 1e-15);
        let zero_mass: f64 = x
            .iter()
            .enumerate()
            .filter(|(i, _)| i % 4 != 0)
            .map(|(_, v)| v.norm())
            .sum();
        assert!(zero_mass == 0.0);
        let back = e.compress(&x).unwrap();
        assert!((back[0] - s[0]).norm() < 1e-15);
        assert!((back[1] - s[1]).norm() < 1e-15);
    }

    #[test]
    fn expander_l1_is_identity_and_compress_reads_strides() {
        let e = ExpanderSpec::new(4, 1).unwrap();
        let s: Vec<Complex64> = (0..4).map(|i| Complex64::new(i as f64, 0.0)).collect();
        assert_eq!(e.expand(&s).unwrap(), s);

        let e = ExpanderSpec::new(8, 2).unwrap();
        let y: Vec<Complex64> = (0..8).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let got = e.compress(&y).unwrap();
        let want = [0.0, 2.0, 4.0, 6.0];
        for (g, w) in got.iter().zip(&want) {
            assert!((g.re - w).abs() < 1e-15 && g.im == 0.0);
        }
    }

    #[test]
    fn expander_rejects_non_divisor() {
        assert!(matches!(
            ExpanderSpec::new(8, 3),
            Err(Error::BadFactor { l: 3, n: 8 })
        ));
    }
}
