//! Project-wide DFT convention and plan cache.
//!
//! Forward transform uses the `e^{-j2πkf/n}` kernel with no scaling; the
//! inverse carries the `1/n` factor. Every circulant diagonal in the crate is
//! expressed in this convention, so diagonals compose by plain elementwise
//! multiplication.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type PlanKey = (usize, bool);
type PlanCache = Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>;

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut cache = cache.lock().unwrap();
    cache
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// In-place forward DFT (unscaled).
pub fn dft(x: &mut [Complex64]) {
    plan(x.len(), false).process(x);
}

/// In-place inverse DFT (scaled by `1/n`).
pub fn idft(x: &mut [Complex64]) {
    let n = x.len();
    plan(n, true).process(x);
    let scale = 1.0 / n as f64;
    for v in x.iter_mut() {
        *v *= scale;
    }
}

/// Forward DFT of a slice into a new vector.
pub fn dft_of(x: &[Complex64]) -> Vec<Complex64> {
    let mut out = x.to_vec();
    dft(&mut out);
    out
}

/// Inverse DFT of a slice into a new vector.
pub fn idft_of(x: &[Complex64]) -> Vec<Complex64> {
    let mut out = x.to_vec();
    idft(&mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let x: Vec<Complex64> = (0..16)
            .map(|i| Complex64::new(i as f64, -(i as f64) * 0.5))
            .collect();
        let back = idft_of(&dft_of(&x));
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn forward_kernel_sign() {
        // DFT of a one-sample delay is e^{-j2πf/n}.
        let mut x = vec![Complex64::new(0.0, 0.0); 8];
        x[1] = Complex64::new(1.0, 0.0);
        let spec = dft_of(&x);
        let expected = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI / 8.0);
        assert!((spec[1] - expected).norm() < 1e-12);
    }
}
