//! End-to-end transceiver chains: multi-user UL matched-filter detection and
//! DL time-reversal precoding for single- and multi-antenna gateways.
//!
//! Chains operate in the despread domain: spreading and despreading are
//! unitary and cancel exactly, so a received frame is synthesized directly as
//! `Σ_k H_k E_L s_k + v` (the equivalence with the spread-domain path is a
//! tested invariant). Symbols enter at unit power and are scaled by `sqrt(L)`
//! inside the chain; detector outputs are returned at unit scale so that
//! symbol-estimate errors compare like with like.

use crate::channel::ChannelSet;
use crate::circulant::{CirculantOperator, ExpanderSpec};
use crate::fft;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Symbol constellation for data frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SymbolSource {
    #[default]
    Qpsk,
    Gaussian,
}

/// All parameters of one simulated link configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkScenario {
    pub n: usize,
    pub n_cp: usize,
    pub l: usize,
    pub k: usize,
    pub m: usize,
    pub snr_db: f64,
    pub symbol_source: SymbolSource,
    pub frames_per_trial: usize,
    pub trials: usize,
    pub seed: u64,
}

impl LinkScenario {
    /// Noise variance per despread sample for unit symbol power and
    /// unit-energy channels.
    pub fn noise_var(&self) -> f64 {
        10f64.powf(-self.snr_db / 10.0)
    }

    pub fn validate(&self, l_h: usize) -> Result<()> {
        if self.l == 0 || !self.n.is_multiple_of(self.l) {
            return Err(Error::BadFactor {
                l: self.l,
                n: self.n,
            });
        }
        if self.k == 0 || !self.n.is_multiple_of(self.k) {
            return Err(Error::BadFactor {
                l: self.k,
                n: self.n,
            });
        }
        if self.m == 0 {
            return Err(Error::Config("antenna count must be at least 1".into()));
        }
        if l_h > self.n_cp || self.n_cp > self.n {
            return Err(Error::Config(format!(
                "need l_h <= n_cp <= n, got l_h={l_h}, n_cp={}, n={}",
                self.n_cp, self.n
            )));
        }
        if self.trials == 0 || self.frames_per_trial == 0 {
            return Err(Error::Config(
                "trials and frames_per_trial must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// One user's unit-power symbol vector for a frame (`n/l` symbols).
#[derive(Debug, Clone)]
pub struct SymbolFrame {
    pub user: usize,
    pub symbols: Vec<Complex64>,
}

/// Draws a unit-power symbol vector.
pub fn draw_symbols<R: Rng + ?Sized>(
    source: SymbolSource,
    len: usize,
    rng: &mut R,
) -> Vec<Complex64> {
    match source {
        SymbolSource::Qpsk => {
            let a = std::f64::consts::FRAC_1_SQRT_2;
            (0..len)
                .map(|_| {
                    let re = if rng.gen::<bool>() { a } else { -a };
                    let im = if rng.gen::<bool>() { a } else { -a };
                    Complex64::new(re, im)
                })
                .collect()
        }
        SymbolSource::Gaussian => {
            let s = (0.5f64).sqrt();
            (0..len)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re * s, im * s)
                })
                .collect()
        }
    }
}

/// A detected frame paired with what was transmitted, both at unit symbol
/// scale.
#[derive(Debug, Clone)]
pub struct DetectionResult {
    pub user: usize,
    pub estimated: Vec<Complex64>,
    pub transmitted: Vec<Complex64>,
}

/// Per-(user, antenna) circulant operators plus the `hᴴh` scaling constants,
/// for either true channels or estimates.
#[derive(Debug, Clone)]
pub struct OperatorBank {
    n: usize,
    ops: Vec<Vec<CirculantOperator>>,
    energies: Vec<Vec<f64>>,
}

impl OperatorBank {
    pub fn new(ops: Vec<Vec<CirculantOperator>>) -> Result<Self> {
        if ops.is_empty() || ops[0].is_empty() {
            return Err(Error::Config("operator bank must cover k x m".into()));
        }
        let n = ops[0][0].dim();
        let m = ops[0].len();
        for per_user in &ops {
            if per_user.len() != m {
                return Err(Error::Config("ragged operator bank".into()));
            }
            for op in per_user {
                if op.dim() != n {
                    return Err(Error::DimensionMismatch { a: op.dim(), b: n });
                }
            }
        }
        let energies = ops
            .iter()
            .map(|per_user| per_user.iter().map(|op| op.col_energy()).collect())
            .collect();
        Ok(OperatorBank { n, ops, energies })
    }

    /// Builds operators from true impulse responses.
    pub fn from_channel_set(set: &ChannelSet, n: usize) -> Result<Self> {
        let ops = (0..set.users())
            .map(|u| {
                (0..set.antennas())
                    .map(|m| CirculantOperator::from_impulse(set.impulse(u, m), n))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        OperatorBank::new(ops)
    }

    pub fn frame_len(&self) -> usize {
        self.n
    }

    pub fn users(&self) -> usize {
        self.ops.len()
    }

    pub fn antennas(&self) -> usize {
        self.ops[0].len()
    }

    pub fn op(&self, user: usize, antenna: usize) -> Result<&CirculantOperator> {
        self.ops
            .get(user)
            .and_then(|per_user| per_user.get(antenna))
            .ok_or(Error::MissingEstimate { user, antenna })
    }

    /// `hᴴh` for a (user, antenna) pair.
    pub fn energy(&self, user: usize, antenna: usize) -> Result<f64> {
        self.energies
            .get(user)
            .and_then(|per_user| per_user.get(antenna))
            .copied()
            .ok_or(Error::MissingEstimate { user, antenna })
    }

    /// Mean `hᴴh` across antennas for one user (the DL gain-control value).
    pub fn mean_energy(&self, user: usize) -> Result<f64> {
        let per_user = self
            .energies
            .get(user)
            .ok_or(Error::MissingEstimate { user, antenna: 0 })?;
        Ok(per_user.iter().sum::<f64>() / per_user.len() as f64)
    }

    pub fn user_ops(&self, user: usize) -> Result<&[CirculantOperator]> {
        self.ops
            .get(user)
            .map(|v| v.as_slice())
            .ok_or(Error::MissingEstimate { user, antenna: 0 })
    }
}

fn complex_noise<R: Rng + ?Sized>(rng: &mut R, n: usize, var: f64) -> Vec<Complex64> {
    let sigma = (var / 2.0).sqrt();
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * sigma, im * sigma)
        })
        .collect()
}

/// Spectrum of `E_L·(sqrt(L)·s)`: the small DFT of the scaled symbols,
/// periodically tiled to the full frame length.
fn expanded_spectrum(symbols: &[Complex64], n: usize, l: usize) -> Vec<Complex64> {
    let scale = (l as f64).sqrt();
    let scaled: Vec<Complex64> = symbols.iter().map(|s| s * scale).collect();
    let small = fft::dft_of(&scaled);
    let q = small.len();
    (0..n).map(|f| small[f % q]).collect()
}

fn check_frames(frames: &[SymbolFrame], k: usize, q: usize) -> Result<()> {
    if frames.len() != k {
        return Err(Error::DimensionMismatch {
            a: frames.len(),
            b: k,
        });
    }
    for f in frames {
        if f.symbols.len() != q {
            return Err(Error::LengthMismatch {
                expected: q,
                got: f.symbols.len(),
            });
        }
    }
    Ok(())
}

/// Synthesizes the despread UL frame at every antenna:
/// `y_m = Σ_k H_{k,m} E_L (sqrt(L) s_k) + v_m`.
pub fn ul_channel_output<R: Rng + ?Sized>(
    channels: &OperatorBank,
    frames: &[SymbolFrame],
    l: usize,
    noise_var: f64,
    rng: &mut R,
) -> Result<Vec<Vec<Complex64>>> {
    let n = channels.frame_len();
    let expander = ExpanderSpec::new(n, l)?;
    check_frames(frames, channels.users(), expander.symbols())?;
    let spectra: Vec<Vec<Complex64>> = frames
        .iter()
        .map(|f| expanded_spectrum(&f.symbols, n, l))
        .collect();
    let mut out = Vec::with_capacity(channels.antennas());
    for m in 0..channels.antennas() {
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        for (user, spec) in spectra.iter().enumerate() {
            let freq = channels.op(user, m)?.freq();
            for ((a, s), f) in acc.iter_mut().zip(spec).zip(freq) {
                *a += s * f;
            }
        }
        fft::idft(&mut acc);
        if noise_var > 0.0 {
            for (a, v) in acc.iter_mut().zip(complex_noise(rng, n, noise_var)) {
                *a += v;
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// Matched-filter detection for every user from per-antenna despread frames.
///
/// For user `i`: `(1/M) Σ_m Ĥ_i^(m)ᴴ y_m / (ĥ_i^(m)ᴴ ĥ_i^(m))`, compressed to
/// the symbol positions and returned at unit symbol scale.
pub fn ul_mf_detect_all(
    received: &[Vec<Complex64>],
    est: &OperatorBank,
    l: usize,
) -> Result<Vec<Vec<Complex64>>> {
    let n = est.frame_len();
    let m_ant = est.antennas();
    if received.len() != m_ant {
        return Err(Error::DimensionMismatch {
            a: received.len(),
            b: m_ant,
        });
    }
    let expander = ExpanderSpec::new(n, l)?;
    let spectra: Vec<Vec<Complex64>> = received
        .iter()
        .map(|y| {
            if y.len() != n {
                Err(Error::LengthMismatch {
                    expected: n,
                    got: y.len(),
                })
            } else {
                Ok(fft::dft_of(y))
            }
        })
        .collect::<Result<_>>()?;
    let unscale = 1.0 / (m_ant as f64 * (l as f64).sqrt());
    let mut out = Vec::with_capacity(est.users());
    for user in 0..est.users() {
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        for (m, spec) in spectra.iter().enumerate() {
            let freq = est.op(user, m)?.freq();
            let inv_energy = 1.0 / est.energy(user, m)?;
            for ((a, s), f) in acc.iter_mut().zip(spec).zip(freq) {
                *a += s * f.conj() * inv_energy;
            }
        }
        fft::idft(&mut acc);
        let mut symbols = expander.compress(&acc)?;
        for s in symbols.iter_mut() {
            *s *= unscale;
        }
        out.push(symbols);
    }
    Ok(out)
}

/// Matched-filter detection for a single user. See [`ul_mf_detect_all`].
pub fn ul_mf_detect(
    received: &[Vec<Complex64>],
    est: &OperatorBank,
    user: usize,
    l: usize,
) -> Result<Vec<Complex64>> {
    if user >= est.users() {
        return Err(Error::UserOutOfRange {
            user,
            k: est.users(),
        });
    }
    Ok(ul_mf_detect_all(received, est, l)?.swap_remove(user))
}

/// Time-reversal precoded DL transmit frames, one per antenna:
/// `t_m = Σ_k Ĥ_k^(m)ᴴ E_L (sqrt(L) s_k) / sqrt(M)`.
pub fn dl_precode_transmit(
    est: &OperatorBank,
    frames: &[SymbolFrame],
    l: usize,
) -> Result<Vec<Vec<Complex64>>> {
    let n = est.frame_len();
    let expander = ExpanderSpec::new(n, l)?;
    check_frames(frames, est.users(), expander.symbols())?;
    let spectra: Vec<Vec<Complex64>> = frames
        .iter()
        .map(|f| expanded_spectrum(&f.symbols, n, l))
        .collect();
    let split = 1.0 / (est.antennas() as f64).sqrt();
    let mut out = Vec::with_capacity(est.antennas());
    for m in 0..est.antennas() {
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        for (user, spec) in spectra.iter().enumerate() {
            let freq = est.op(user, m)?.freq();
            for ((a, s), f) in acc.iter_mut().zip(spec).zip(freq) {
                *a += s * f.conj() * split;
            }
        }
        fft::idft(&mut acc);
        out.push(acc);
    }
    Ok(out)
}

/// DL reception and detection for one user given the per-antenna transmit
/// frames and that user's true channels.
///
/// The user receives `Σ_m H_i^(m) t_m + v_i`, scales by
/// `1/(sqrt(M)·scaling)` where `scaling` is the gain-control estimate of
/// `ĥ_iᴴĥ_i`, and reads the symbol positions.
pub fn dl_receive_detect<R: Rng + ?Sized>(
    true_ops: &[CirculantOperator],
    transmit: &[Vec<Complex64>],
    scaling: f64,
    l: usize,
    noise_var: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if true_ops.len() != transmit.len() {
        return Err(Error::DimensionMismatch {
            a: true_ops.len(),
            b: transmit.len(),
        });
    }
    let n = true_ops
        .first()
        .ok_or(Error::Config("need at least one antenna".into()))?
        .dim();
    let expander = ExpanderSpec::new(n, l)?;
    let mut acc = vec![Complex64::new(0.0, 0.0); n];
    for (op, t) in true_ops.iter().zip(transmit) {
        if t.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: t.len(),
            });
        }
        let spec = fft::dft_of(t);
        for ((a, s), f) in acc.iter_mut().zip(&spec).zip(op.freq()) {
            *a += s * f;
        }
    }
    fft::idft(&mut acc);
    if noise_var > 0.0 {
        for (a, v) in acc.iter_mut().zip(complex_noise(rng, n, noise_var)) {
            *a += v;
        }
    }
    let m = true_ops.len() as f64;
    let unscale = 1.0 / (m.sqrt() * scaling * (l as f64).sqrt());
    let mut symbols = expander.compress(&acc)?;
    for s in symbols.iter_mut() {
        *s *= unscale;
    }
    Ok(symbols)
}

/// DL reception for all users at once; transmit spectra are computed once and
/// reused across users. Noise is drawn per user in user order.
pub fn dl_receive_detect_all<R: Rng + ?Sized>(
    true_channels: &OperatorBank,
    est: &OperatorBank,
    transmit: &[Vec<Complex64>],
    l: usize,
    noise_var: f64,
    rng: &mut R,
) -> Result<Vec<Vec<Complex64>>> {
    let n = true_channels.frame_len();
    let m_ant = true_channels.antennas();
    if transmit.len() != m_ant {
        return Err(Error::DimensionMismatch {
            a: transmit.len(),
            b: m_ant,
        });
    }
    let expander = ExpanderSpec::new(n, l)?;
    let spectra: Vec<Vec<Complex64>> = transmit
        .iter()
        .map(|t| {
            if t.len() != n {
                Err(Error::LengthMismatch {
                    expected: n,
                    got: t.len(),
                })
            } else {
                Ok(fft::dft_of(t))
            }
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(true_channels.users());
    for user in 0..true_channels.users() {
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        for (m, spec) in spectra.iter().enumerate() {
            let freq = true_channels.op(user, m)?.freq();
            for ((a, s), f) in acc.iter_mut().zip(spec).zip(freq) {
                *a += s * f;
            }
        }
        fft::idft(&mut acc);
        if noise_var > 0.0 {
            for (a, v) in acc.iter_mut().zip(complex_noise(rng, n, noise_var)) {
                *a += v;
            }
        }
        let unscale = 1.0 / ((m_ant as f64).sqrt() * est.mean_energy(user)? * (l as f64).sqrt());
        let mut symbols = expander.compress(&acc)?;
        for s in symbols.iter_mut() {
            *s *= unscale;
        }
        out.push(symbols);
    }
    Ok(out)
}
