//! Random dispersive channel generation.
//!
//! Taps are independent circularly-symmetric complex Gaussians with an
//! exponential power decay `p_l ∝ exp(-l/tau)`. With the default profile
//! (130 taps, tau = 25) the expected first/last tap power ratio is
//! `exp(129/25) ≈ 174`. Realizations are normalized to unit energy so that
//! every user sees the same channel gain, as under power control.

use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::io::{BufRead, Write};

/// Tap count, decay constant, and normalization policy for channel draws.
#[derive(Debug, Clone, Copy)]
pub struct ChannelProfile {
    pub l_h: usize,
    pub tau: f64,
    pub normalize: bool,
}

impl ChannelProfile {
    /// The profile used throughout the reference experiments: 130 taps,
    /// tau = 25 samples, unit-energy realizations.
    pub fn dispersive_default() -> Self {
        ChannelProfile {
            l_h: 130,
            tau: 25.0,
            normalize: true,
        }
    }

    /// Single-tap (frequency-flat) channel.
    pub fn flat() -> Self {
        ChannelProfile {
            l_h: 1,
            tau: 1.0,
            normalize: true,
        }
    }
}

/// Draws one impulse response from the profile.
pub fn draw_impulse<R: Rng + ?Sized>(profile: &ChannelProfile, rng: &mut R) -> Vec<Complex64> {
    let mut h: Vec<Complex64> = (0..profile.l_h)
        .map(|l| {
            let sigma = (0.5 * (-(l as f64) / profile.tau).exp()).sqrt();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * sigma, im * sigma)
        })
        .collect();
    if profile.normalize {
        let energy: f64 = h.iter().map(|x| x.norm_sqr()).sum();
        let scale = 1.0 / energy.sqrt();
        for v in h.iter_mut() {
            *v *= scale;
        }
    }
    h
}

/// True impulse responses for `k` users at `m` gateway antennas.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    k: usize,
    m: usize,
    impulses: Vec<Vec<Vec<Complex64>>>,
}

/// Draws `k·m` independent impulse responses. Deterministic given the RNG
/// state; draws are ordered user-major, antenna-minor.
pub fn draw_channel_set<R: Rng + ?Sized>(
    k: usize,
    m: usize,
    profile: &ChannelProfile,
    rng: &mut R,
) -> ChannelSet {
    let impulses = (0..k)
        .map(|_| (0..m).map(|_| draw_impulse(profile, rng)).collect())
        .collect();
    ChannelSet { k, m, impulses }
}

impl ChannelSet {
    pub fn users(&self) -> usize {
        self.k
    }

    pub fn antennas(&self) -> usize {
        self.m
    }

    pub fn impulse(&self, user: usize, antenna: usize) -> &[Complex64] {
        &self.impulses[user][antenna]
    }

    pub fn from_impulses(impulses: Vec<Vec<Vec<Complex64>>>) -> Result<Self> {
        let k = impulses.len();
        if k == 0 {
            return Err(Error::Config("channel set needs at least one user".into()));
        }
        let m = impulses[0].len();
        if m == 0 || impulses.iter().any(|u| u.len() != m) {
            return Err(Error::Config(
                "channel set needs a uniform antenna count".into(),
            ));
        }
        Ok(ChannelSet { k, m, impulses })
    }

    /// Writes rows `trial,user,antenna,tap_index,re,im` (no header).
    pub fn write_csv<W: Write>(&self, w: &mut W, trial: usize) -> Result<()> {
        for (user, per_ant) in self.impulses.iter().enumerate() {
            for (antenna, taps) in per_ant.iter().enumerate() {
                for (tap, v) in taps.iter().enumerate() {
                    writeln!(w, "{trial},{user},{antenna},{tap},{},{}", v.re, v.im)?;
                }
            }
        }
        Ok(())
    }

    /// Reads the rows of a single trial written by [`ChannelSet::write_csv`].
    pub fn read_csv<R: BufRead>(r: &mut R, trial: usize) -> Result<Self> {
        let mut impulses: Vec<Vec<Vec<Complex64>>> = Vec::new();
        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with("trial") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 {
                return Err(Error::Config(format!("bad channel CSV row: {line}")));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse()
                    .map_err(|_| Error::Config(format!("bad number in channel CSV: {s}")))
            };
            let t: usize = fields[0]
                .parse()
                .map_err(|_| Error::Config(format!("bad trial id: {}", fields[0])))?;
            if t != trial {
                continue;
            }
            let user: usize = fields[1]
                .parse()
                .map_err(|_| Error::Config(format!("bad user id: {}", fields[1])))?;
            let antenna: usize = fields[2]
                .parse()
                .map_err(|_| Error::Config(format!("bad antenna id: {}", fields[2])))?;
            let re = parse(fields[4])?;
            let im = parse(fields[5])?;
            if impulses.len() <= user {
                impulses.resize(user + 1, Vec::new());
            }
            if impulses[user].len() <= antenna {
                impulses[user].resize(antenna + 1, Vec::new());
            }
            impulses[user][antenna].push(Complex64::new(re, im));
        }
        ChannelSet::from_impulses(impulses)
    }
}
