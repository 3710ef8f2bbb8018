//! Pilot-frame construction and impulse-response estimation.
//!
//! Each user sends a single pilot symbol of amplitude `sqrt(n)` on its own
//! cyclic shift of the ZC sequence, so one pilot frame carries all users at
//! the same total power as a data frame. After despreading, the samples in
//! each user's window are that user's impulse response scaled by `sqrt(n)`;
//! dividing the window by `sqrt(n)` yields the raw estimate. The per-sample
//! noise variance of the estimate is `σ_v²/n` — a `10·log10(n)` dB gain over
//! the operating SNR.

use crate::zc_spread::ZcSequence;
use crate::{Error, Result};
use num_complex::Complex64;

/// Shift assignment and window bounds for a pilot frame shared by `k` users.
#[derive(Debug, Clone)]
pub struct PilotPlan {
    n: usize,
    k: usize,
    n_cp: usize,
    shifts: Vec<usize>,
    window_len: usize,
    pilot_amplitude: f64,
}

impl PilotPlan {
    /// Spaces users `n/k` samples apart and bounds the estimation window by
    /// `min(n/k, n_cp)`.
    pub fn new(n: usize, k: usize, n_cp: usize) -> Result<Self> {
        if k == 0 || !n.is_multiple_of(k) {
            return Err(Error::BadFactor { l: k, n });
        }
        let spacing = n / k;
        let window_len = spacing.min(n_cp);
        let shifts = (0..k).map(|i| i * spacing).collect();
        Ok(PilotPlan {
            n,
            k,
            n_cp,
            shifts,
            window_len,
            pilot_amplitude: (n as f64).sqrt(),
        })
    }

    pub fn frame_len(&self) -> usize {
        self.n
    }

    pub fn users(&self) -> usize {
        self.k
    }

    pub fn cp_len(&self) -> usize {
        self.n_cp
    }

    pub fn shift(&self, user: usize) -> Result<usize> {
        self.shifts
            .get(user)
            .copied()
            .ok_or(Error::UserOutOfRange { user, k: self.k })
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn pilot_amplitude(&self) -> f64 {
        self.pilot_amplitude
    }
}

/// One user's estimated impulse response at one antenna.
#[derive(Debug, Clone)]
pub struct ChannelEstimate {
    pub user: usize,
    pub antenna: usize,
    pub taps: Vec<Complex64>,
}

impl ChannelEstimate {
    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|x| x.norm_sqr()).sum()
    }

    /// The taps scaled to unit energy (gain control ahead of MF/TR use).
    pub fn unit_normalized(&self) -> Vec<Complex64> {
        let scale = 1.0 / self.energy().sqrt();
        self.taps.iter().map(|x| x * scale).collect()
    }
}

/// The transmit-side pilot frame for one user: the ZC sequence cyclically
/// shifted by the user's offset and scaled by `sqrt(n)`.
pub fn build_pilot_frame(plan: &PilotPlan, z: &ZcSequence, user: usize) -> Result<Vec<Complex64>> {
    if z.len() != plan.n {
        return Err(Error::LengthMismatch {
            expected: plan.n,
            got: z.len(),
        });
    }
    let d = plan.shift(user)?;
    let mut frame = z.cyclic_shift(d);
    for v in frame.iter_mut() {
        *v *= plan.pilot_amplitude;
    }
    Ok(frame)
}

/// Estimates every user's impulse response at every antenna from the
/// despread pilot frames (one received vector per antenna).
///
/// The estimate for user `u` at antenna `m` is
/// `despread[m][d_u .. d_u + window_len] / sqrt(n)`. Antennas are processed
/// independently; no denoising is applied.
pub fn estimate_channels(
    despread: &[Vec<Complex64>],
    plan: &PilotPlan,
) -> Result<Vec<Vec<ChannelEstimate>>> {
    let scale = 1.0 / plan.pilot_amplitude;
    let mut out = Vec::with_capacity(plan.k);
    for user in 0..plan.k {
        let d = plan.shift(user)?;
        if d + plan.window_len > plan.n {
            return Err(Error::WindowOverrun {
                shift: d,
                window: plan.window_len,
                n: plan.n,
            });
        }
        let mut per_user = Vec::with_capacity(despread.len());
        for (antenna, y) in despread.iter().enumerate() {
            if y.len() != plan.n {
                return Err(Error::LengthMismatch {
                    expected: plan.n,
                    got: y.len(),
                });
            }
            let taps = y[d..d + plan.window_len]
                .iter()
                .map(|v| v * scale)
                .collect();
            per_user.push(ChannelEstimate {
                user,
                antenna,
                taps,
            });
        }
        out.push(per_user);
    }
    Ok(out)
}
