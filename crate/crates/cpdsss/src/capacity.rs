//! SINR measurement and capacity computation.
//!
//! Per-user capacity follows Shannon's theorem on the measured SINR, where
//! the SINR is the reciprocal of the symbol-estimate error variance at unit
//! signal gain. The ideal-receiver capacity is the log-det of
//! `I + L·(σ_s²/σ_v²)·HG E_L E_Lᴴ GᴴHᴴ`, evaluated either on circulant
//! frequency bins (fast path, exact via spectral aliasing for any L) or by a
//! dense Hermitian log-det (cross-check path). All capacities are reported in
//! bits per channel use (per payload sample).

use crate::circulant::CirculantOperator;
use crate::linkops::DetectionResult;
use crate::{Error, Result};
use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;

/// A measured linear SINR with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy)]
pub struct SinrEstimate {
    pub user: usize,
    pub rho: f64,
    pub sample_count: usize,
    pub std_error: f64,
}

/// Pools symbol-estimate errors over frames and inverts the error variance.
///
/// All results must belong to the same user and be paired at unit symbol
/// scale. An exact match yields `rho = +inf`.
pub fn measure_sinr(results: &[DetectionResult]) -> Result<SinrEstimate> {
    let first = results.first().ok_or(Error::EmptyStream)?;
    let user = first.user;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut count = 0usize;
    for r in results {
        if r.estimated.len() != r.transmitted.len() {
            return Err(Error::LengthMismatch {
                expected: r.transmitted.len(),
                got: r.estimated.len(),
            });
        }
        for (e, s) in r.estimated.iter().zip(&r.transmitted) {
            let err = (e - s).norm_sqr();
            sum += err;
            sum_sq += err * err;
            count += 1;
        }
    }
    let mean = sum / count as f64;
    if mean == 0.0 {
        return Ok(SinrEstimate {
            user,
            rho: f64::INFINITY,
            sample_count: count,
            std_error: 0.0,
        });
    }
    let var_of_err = (sum_sq / count as f64 - mean * mean).max(0.0);
    let se_mean = (var_of_err / count as f64).sqrt();
    // First-order propagation of the error-variance uncertainty through 1/x.
    let std_error = se_mean / (mean * mean);
    Ok(SinrEstimate {
        user,
        rho: 1.0 / mean,
        sample_count: count,
        std_error,
    })
}

/// Shannon capacity per payload sample: `(1/L)·log2(1 + rho)`.
pub fn per_user_capacity(rho: f64, l: usize) -> f64 {
    (1.0 + rho).log2() / l as f64
}

/// The effective channel entering the ideal-capacity determinant.
///
/// UL: a vertical stack of per-antenna circulants (no precoding); the Gram
/// `Σ_m H^(m)ᴴH^(m)` is circulant with bins `Σ_m |λ_f^(m)|²`. DL: the row
/// stack times the precoder stack collapses to the single circulant
/// `Σ_m H^(m)G^(m)`.
#[derive(Debug, Clone)]
pub enum EffectiveChannel {
    UlStack(Vec<CirculantOperator>),
    DlComposite(CirculantOperator),
}

impl EffectiveChannel {
    /// Builds the DL composite `Σ_m H^(m)G^(m)` from channels and precoders.
    pub fn dl(channels: &[CirculantOperator], precoders: &[CirculantOperator]) -> Result<Self> {
        if channels.len() != precoders.len() || channels.is_empty() {
            return Err(Error::DimensionMismatch {
                a: channels.len(),
                b: precoders.len(),
            });
        }
        let n = channels[0].dim();
        let mut freq = vec![Complex64::new(0.0, 0.0); n];
        for (h, g) in channels.iter().zip(precoders) {
            let hg = h.compose(g)?;
            for (a, b) in freq.iter_mut().zip(hg.freq()) {
                *a += b;
            }
        }
        Ok(EffectiveChannel::DlComposite(CirculantOperator::from_freq(
            freq,
        )))
    }

    pub fn dim(&self) -> usize {
        match self {
            EffectiveChannel::UlStack(ops) => ops[0].dim(),
            EffectiveChannel::DlComposite(op) => op.dim(),
        }
    }

    /// Per-frequency power of the effective Gram matrix.
    pub fn gram_bins(&self) -> Vec<f64> {
        match self {
            EffectiveChannel::UlStack(ops) => {
                let n = ops[0].dim();
                let mut bins = vec![0.0; n];
                for op in ops {
                    for (b, f) in bins.iter_mut().zip(op.freq()) {
                        *b += f.norm_sqr();
                    }
                }
                bins
            }
            EffectiveChannel::DlComposite(op) => op.freq().iter().map(|f| f.norm_sqr()).collect(),
        }
    }
}

/// Ideal capacity in bits per channel use, fast path.
///
/// `det(I + L·snr·A E_L E_Lᴴ Aᴴ)` reduces to the `n/L` eigenvalues of the
/// symbol-rate Gram, which are the `L`-fold aliased averages of the
/// frequency bins: `μ_r = (1/L)·Σ_a g_{r + a·n/L}`.
pub fn ideal_capacity(effective: &EffectiveChannel, l: usize, snr_linear: f64) -> Result<f64> {
    let n = effective.dim();
    if l == 0 || !n.is_multiple_of(l) {
        return Err(Error::BadFactor { l, n });
    }
    let bins = effective.gram_bins();
    let q = n / l;
    let mut total = 0.0;
    for r in 0..q {
        let mut mu = 0.0;
        for a in 0..l {
            mu += bins[r + a * q];
        }
        mu /= l as f64;
        total += (1.0 + l as f64 * snr_linear * mu).log2();
    }
    Ok(total / n as f64)
}

/// Ideal capacity via a dense Hermitian log-det of the `n/L x n/L` matrix
/// `I + L·snr·E_Lᴴ Aᴴ A E_L`, built from dense materializations. Slow;
/// cross-checks the fast path.
pub fn ideal_capacity_dense(
    effective: &EffectiveChannel,
    l: usize,
    snr_linear: f64,
) -> Result<f64> {
    let n = effective.dim();
    if l == 0 || !n.is_multiple_of(l) {
        return Err(Error::BadFactor { l, n });
    }
    let q = n / l;
    // Dense Gram Aᴴ A summed over the stack.
    let mut gram = DMatrix::<Complex64>::zeros(n, n);
    let add_gram = |gram: &mut DMatrix<Complex64>, op: &CirculantOperator| {
        let dense = op.to_dense();
        for row in 0..n {
            for col in 0..n {
                let acc: Complex64 = dense.iter().map(|r| r[row].conj() * r[col]).sum();
                gram[(row, col)] += acc;
            }
        }
    };
    match effective {
        EffectiveChannel::UlStack(ops) => {
            for op in ops {
                add_gram(&mut gram, op);
            }
        }
        EffectiveChannel::DlComposite(op) => add_gram(&mut gram, op),
    }
    // I + L·snr·Eᴴ(AᴴA)E on the symbol positions.
    let mut reduced = DMatrix::<Complex64>::identity(q, q);
    let c = l as f64 * snr_linear;
    for row in 0..q {
        for col in 0..q {
            reduced[(row, col)] += gram[(row * l, col * l)] * c;
        }
    }
    let chol = Cholesky::new(reduced)
        .ok_or_else(|| Error::Config("ideal capacity matrix is not positive definite".into()))?;
    let log_det: f64 = (0..q).map(|i| chol.l_dirty()[(i, i)].re.ln()).sum::<f64>() * 2.0;
    Ok(log_det / std::f64::consts::LN_2 / n as f64)
}

/// Time-reversal precoders for one user across the gateway antennas:
/// `G^(m) = Ĥ^(m)ᴴ·c` with `c` chosen so the stacked precoder satisfies
/// `tr(GᴴG) = N`. For unit-norm per-antenna estimates `c = 1/sqrt(M)`.
pub fn tr_precoder(est_ops: &[CirculantOperator]) -> Result<Vec<CirculantOperator>> {
    if est_ops.is_empty() {
        return Err(Error::Config("need at least one antenna".into()));
    }
    let total_energy: f64 = est_ops.iter().map(|op| op.col_energy()).sum();
    let c = 1.0 / total_energy.sqrt();
    Ok(est_ops.iter().map(|op| op.hermitian().scaled(c)).collect())
}

/// One measured capacity point.
#[derive(Debug, Clone)]
pub struct CapacityRecord {
    pub snr_db: f64,
    pub k: usize,
    pub m: usize,
    pub l: usize,
    pub user: usize,
    pub trial: usize,
    pub sinr_linear: f64,
    pub capacity_bpcu: f64,
    pub ideal_capacity_bpcu: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn result_with_noise(n: usize, var: f64, rng: &mut impl Rng) -> DetectionResult {
        let s: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let sigma = (var / 2.0).sqrt();
        let e = s
            .iter()
            .map(|x| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                x + Complex64::new(re * sigma, im * sigma)
            })
            .collect();
        DetectionResult {
            user: 0,
            estimated: e,
            transmitted: s,
        }
    }

    #[test]
    fn exact_match_gives_infinite_rho() {
        let s = vec![Complex64::new(1.0, -1.0); 8];
        let r = DetectionResult {
            user: 3,
            estimated: s.clone(),
            transmitted: s,
        };
        let est = measure_sinr(&[r]).unwrap();
        assert!(est.rho.is_infinite());
        assert_eq!(est.user, 3);
    }

    #[test]
    fn known_noise_variance_gives_expected_rho() {
        let mut rng = seeds::substream(20, &[0]);
        let r = result_with_noise(10_000, 0.01, &mut rng);
        let est = measure_sinr(&[r]).unwrap();
        assert!((est.rho / 100.0 - 1.0).abs() < 0.05, "rho {}", est.rho);
        assert!(est.std_error > 0.0);
    }

    #[test]
    fn empty_stream_is_an_error() {
        assert!(matches!(measure_sinr(&[]), Err(Error::EmptyStream)));
    }

    #[test]
    fn capacity_formula() {
        assert_eq!(per_user_capacity(0.0, 1), 0.0);
        assert!((per_user_capacity(1.0, 1) - 1.0).abs() < 1e-12);
        assert!((per_user_capacity(3.0, 2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flat_channel_ideal_capacity() {
        let eff = EffectiveChannel::UlStack(vec![CirculantOperator::identity(32)]);
        let snr = 0.5;
        let got = ideal_capacity(&eff, 1, snr).unwrap();
        assert!((got - (1.0 + snr).log2()).abs() < 1e-12);
    }

    #[test]
    fn fast_path_matches_dense_at_n64() {
        let mut rng = seeds::substream(21, &[0]);
        let profile = crate::channel::ChannelProfile {
            l_h: 12,
            tau: 5.0,
            normalize: true,
        };
        for &l in &[1usize, 2, 4] {
            let h = crate::channel::draw_impulse(&profile, &mut rng);
            let op = CirculantOperator::from_impulse(&h, 64).unwrap();
            let eff = EffectiveChannel::UlStack(vec![op]);
            let fast = ideal_capacity(&eff, l, 0.3).unwrap();
            let dense = ideal_capacity_dense(&eff, l, 0.3).unwrap();
            assert!(
                (fast - dense).abs() / dense.abs() < 1e-8,
                "l={l}: fast {fast}, dense {dense}"
            );
        }
    }

    #[test]
    fn rate_reduction_cannot_raise_ideal_capacity() {
        let mut rng = seeds::substream(22, &[0]);
        let profile = crate::channel::ChannelProfile {
            l_h: 12,
            tau: 5.0,
            normalize: true,
        };
        for _ in 0..20 {
            let h = crate::channel::draw_impulse(&profile, &mut rng);
            let op = CirculantOperator::from_impulse(&h, 64).unwrap();
            let eff = EffectiveChannel::UlStack(vec![op]);
            let c1 = ideal_capacity(&eff, 1, 0.2).unwrap();
            let c4 = ideal_capacity(&eff, 4, 0.2).unwrap();
            assert!(c1 >= c4 - 1e-12, "c1 {c1} < c4 {c4}");
        }
    }

    #[test]
    fn ideal_capacity_is_monotone_in_snr() {
        let mut rng = seeds::substream(23, &[0]);
        let profile = crate::channel::ChannelProfile::dispersive_default();
        let h = crate::channel::draw_impulse(&profile, &mut rng);
        let op = CirculantOperator::from_impulse(&h, 256).unwrap();
        let eff = EffectiveChannel::UlStack(vec![op]);
        let mut prev = 0.0;
        for snr_db in (-40..0).step_by(5) {
            let snr = 10f64.powf(snr_db as f64 / 10.0);
            let c = ideal_capacity(&eff, 1, snr).unwrap();
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn tr_precoder_flat_channel_is_identity() {
        let ops = vec![CirculantOperator::identity(16)];
        let g = tr_precoder(&ops).unwrap();
        for f in g[0].freq() {
            assert!((f - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn tr_precoder_trace_constraint() {
        let mut rng = seeds::substream(24, &[0]);
        let profile = crate::channel::ChannelProfile::dispersive_default();
        for &m in &[1usize, 4] {
            let ops: Vec<CirculantOperator> = (0..m)
                .map(|_| {
                    let h = crate::channel::draw_impulse(&profile, &mut rng);
                    CirculantOperator::from_impulse(&h, 256).unwrap()
                })
                .collect();
            let precoders = tr_precoder(&ops).unwrap();
            // tr(GᴴG) = Σ_m n·‖g^(m)‖² over the stack.
            let trace: f64 = precoders.iter().map(|g| 256.0 * g.col_energy()).sum();
            assert!((trace - 256.0).abs() < 1e-9, "trace {trace}");
        }
    }

    #[test]
    fn tr_effective_channel_bins_are_real_nonnegative() {
        let mut rng = seeds::substream(25, &[0]);
        let profile = crate::channel::ChannelProfile {
            l_h: 12,
            tau: 5.0,
            normalize: true,
        };
        let h = crate::channel::draw_impulse(&profile, &mut rng);
        let op = CirculantOperator::from_impulse(&h, 64).unwrap();
        let precoders = tr_precoder(std::slice::from_ref(&op)).unwrap();
        let eff = EffectiveChannel::dl(std::slice::from_ref(&op), &precoders).unwrap();
        if let EffectiveChannel::DlComposite(c) = &eff {
            for (f, hf) in c.freq().iter().zip(op.freq()) {
                assert!(f.im.abs() < 1e-9);
                assert!(f.re >= -1e-12);
                assert!((f.re - hf.norm_sqr()).abs() < 1e-9);
            }
        } else {
            unreachable!();
        }
    }

    #[test]
    fn tr_precoding_beats_no_precoding_at_equal_power() {
        // Perfect-CSI TR vs identity precoder, 100 random channels, n = 64.
        let mut rng = seeds::substream(26, &[0]);
        let profile = crate::channel::ChannelProfile {
            l_h: 12,
            tau: 5.0,
            normalize: true,
        };
        let snr = 0.01;
        for _ in 0..100 {
            let h = crate::channel::draw_impulse(&profile, &mut rng);
            let op = CirculantOperator::from_impulse(&h, 64).unwrap();
            let precoders = tr_precoder(std::slice::from_ref(&op)).unwrap();
            let tr = ideal_capacity(
                &EffectiveChannel::dl(std::slice::from_ref(&op), &precoders).unwrap(),
                1,
                snr,
            )
            .unwrap();
            let eq = ideal_capacity(&EffectiveChannel::UlStack(vec![op]), 1, snr).unwrap();
            assert!(tr >= eq - 1e-12, "tr {tr} < equal-power {eq}");
        }
    }
}
