//! Experiment orchestration: scenario sweeps, Monte Carlo trial management,
//! aggregation, and CSV emission.
//!
//! All randomness is derived from `(master seed, cell id, trial id, stage)`
//! substreams, so results are independent of execution order and thread
//! count. Trials run in parallel; aggregation reduces in trial order.

use crate::capacity::{
    ideal_capacity, measure_sinr, per_user_capacity, tr_precoder, CapacityRecord, EffectiveChannel,
};
use crate::chanest::{build_pilot_frame, estimate_channels, PilotPlan};
use crate::channel::{draw_channel_set, ChannelProfile};
use crate::circulant::CirculantOperator;
use crate::linkops::{
    dl_precode_transmit, dl_receive_detect_all, draw_symbols, ul_channel_output, ul_mf_detect_all,
    DetectionResult, OperatorBank, SymbolFrame, SymbolSource,
};
use crate::seeds;
use crate::zc_spread::{generate_zc, spreading_operator};
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;

/// Link direction of a simulated cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Ul,
    Dl,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Ul => write!(f, "ul"),
            Direction::Dl => write!(f, "dl"),
        }
    }
}

/// Channel-state-information mode of a simulated cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsiMode {
    Perfect,
    Estimated,
}

impl fmt::Display for CsiMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CsiMode::Perfect => write!(f, "perfect"),
            CsiMode::Estimated => write!(f, "estimated"),
        }
    }
}

fn default_zc_root() -> usize {
    1
}

fn default_frames() -> usize {
    2
}

fn default_trials() -> usize {
    50
}

fn default_true() -> bool {
    true
}

/// Full sweep description: the cross product of SNR, user count, antenna
/// count, direction, and CSI mode, with shared waveform parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n: usize,
    pub n_cp: usize,
    #[serde(default = "default_zc_root")]
    pub zc_root: usize,
    pub l: usize,
    pub snr_db: Vec<f64>,
    pub k: Vec<usize>,
    pub m: Vec<usize>,
    pub l_h: usize,
    pub tau: f64,
    #[serde(default = "default_true")]
    pub normalize_channels: bool,
    pub direction: Vec<Direction>,
    pub csi_mode: Vec<CsiMode>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_frames")]
    pub frames_per_trial: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub symbol_source: SymbolSource,
    /// When set, capacities are multiplied by `n/(n + n_cp)` to charge for
    /// the cyclic prefix. Off by default.
    #[serde(default)]
    pub cp_overhead: bool,
}

impl SweepConfig {
    pub fn profile(&self) -> ChannelProfile {
        ChannelProfile {
            l_h: self.l_h,
            tau: self.tau,
            normalize: self.normalize_channels,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.l == 0 || !self.n.is_multiple_of(self.l) {
            return Err(Error::Config(format!(
                "l = {} must divide n = {}",
                self.l, self.n
            )));
        }
        for &k in &self.k {
            if k == 0 || !self.n.is_multiple_of(k) {
                return Err(Error::Config(format!("k = {k} must divide n = {}", self.n)));
            }
        }
        for &m in &self.m {
            if m == 0 {
                return Err(Error::Config("m must be at least 1".into()));
            }
        }
        if self.l_h > self.n_cp || self.n_cp > self.n {
            return Err(Error::Config(format!(
                "need l_h <= n_cp <= n, got l_h={}, n_cp={}, n={}",
                self.l_h, self.n_cp, self.n
            )));
        }
        if self.trials == 0 || self.frames_per_trial == 0 {
            return Err(Error::Config(
                "trials and frames_per_trial must be >= 1".into(),
            ));
        }
        if self.snr_db.is_empty()
            || self.k.is_empty()
            || self.m.is_empty()
            || self.direction.is_empty()
            || self.csi_mode.is_empty()
        {
            return Err(Error::Config("sweep axes must be non-empty".into()));
        }
        generate_zc(self.n, self.zc_root)?;
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SweepConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Cells in deterministic sweep order.
    pub fn cells(&self) -> Vec<CellSpec> {
        let mut out = Vec::new();
        for &snr_db in &self.snr_db {
            for &k in &self.k {
                for &m in &self.m {
                    for &direction in &self.direction {
                        for &csi_mode in &self.csi_mode {
                            out.push(CellSpec {
                                snr_db,
                                k,
                                m,
                                direction,
                                csi_mode,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

/// One point of the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSpec {
    pub snr_db: f64,
    pub k: usize,
    pub m: usize,
    pub direction: Direction,
    pub csi_mode: CsiMode,
}

impl CellSpec {
    /// Seed-derivation path for this cell; depends only on the cell's own
    /// parameters, not on its position in the grid.
    fn seed_path(&self) -> [u64; 5] {
        [
            self.snr_db.to_bits(),
            self.k as u64,
            self.m as u64,
            match self.direction {
                Direction::Ul => 0,
                Direction::Dl => 1,
            },
            match self.csi_mode {
                CsiMode::Perfect => 0,
                CsiMode::Estimated => 1,
            },
        ]
    }
}

/// Measured records plus aggregate statistics for one cell.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub spec: CellSpec,
    pub records: Vec<CapacityRecord>,
    pub mean_capacity_bpcu: f64,
    pub stderr: f64,
    pub ideal_capacity_bpcu: f64,
}

/// A completed sweep: one [`CellResult`] per grid point, in sweep order.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub cells: Vec<CellResult>,
}

// RNG stage tags under each (cell, trial).
const STAGE_CHANNELS: u64 = 0;
const STAGE_PILOT_NOISE: u64 = 1;
const STAGE_SYMBOLS: u64 = 2;
const STAGE_LINK_NOISE: u64 = 3;

fn add_noise<R: rand::Rng + ?Sized>(x: &mut [Complex64], var: f64, rng: &mut R) {
    use rand_distr::StandardNormal;
    let sigma = (var / 2.0).sqrt();
    for v in x.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *v += Complex64::new(re * sigma, im * sigma);
    }
}

fn estimated_bank(
    cfg: &SweepConfig,
    cell: &CellSpec,
    trial: u64,
    true_bank: &OperatorBank,
    noise_var: f64,
) -> Result<OperatorBank> {
    let n = cfg.n;
    let z = generate_zc(n, cfg.zc_root)?;
    let zop = spreading_operator(&z);
    let plan = PilotPlan::new(n, cell.k, cfg.n_cp)?;
    let pilots: Vec<Vec<Complex64>> = (0..cell.k)
        .map(|u| build_pilot_frame(&plan, &z, u))
        .collect::<Result<_>>()?;
    let mut despreads = Vec::with_capacity(cell.m);
    let cell_path = cell.seed_path();
    for m in 0..cell.m {
        let mut rx = vec![Complex64::new(0.0, 0.0); n];
        for (u, pilot) in pilots.iter().enumerate() {
            let through = true_bank.op(u, m)?.apply(pilot)?;
            for (a, b) in rx.iter_mut().zip(&through) {
                *a += b;
            }
        }
        if noise_var > 0.0 {
            let mut rng = seeds::substream(
                cfg.seed,
                &[
                    cell_path[0],
                    cell_path[1],
                    cell_path[2],
                    cell_path[3],
                    cell_path[4],
                    trial,
                    STAGE_PILOT_NOISE,
                    m as u64,
                ],
            );
            add_noise(&mut rx, noise_var, &mut rng);
        }
        despreads.push(zop.despread(&rx)?);
    }
    let estimates = estimate_channels(&despreads, &plan)?;
    let ops = estimates
        .iter()
        .map(|per_user| {
            per_user
                .iter()
                .map(|e| CirculantOperator::from_impulse(&e.unit_normalized(), n))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    OperatorBank::new(ops)
}

fn run_trial(cfg: &SweepConfig, cell: &CellSpec, trial: usize) -> Result<Vec<CapacityRecord>> {
    let n = cfg.n;
    let noise_var = 10f64.powf(-cell.snr_db / 10.0);
    let profile = cfg.profile();
    let cp = cell.seed_path();
    let base = [cp[0], cp[1], cp[2], cp[3], cp[4], trial as u64];
    let path = |stage: u64, extra: &[u64]| -> Vec<u64> {
        let mut p = base.to_vec();
        p.push(stage);
        p.extend_from_slice(extra);
        p
    };

    let mut chan_rng = seeds::substream(cfg.seed, &path(STAGE_CHANNELS, &[]));
    let set = draw_channel_set(cell.k, cell.m, &profile, &mut chan_rng);
    let true_bank = OperatorBank::from_channel_set(&set, n)?;
    let est_bank = match cell.csi_mode {
        CsiMode::Perfect => true_bank.clone(),
        CsiMode::Estimated => estimated_bank(cfg, cell, trial as u64, &true_bank, noise_var)?,
    };

    let q = n / cfg.l;
    let mut pooled: Vec<Vec<DetectionResult>> = (0..cell.k).map(|_| Vec::new()).collect();
    for frame in 0..cfg.frames_per_trial {
        let frames: Vec<SymbolFrame> = (0..cell.k)
            .map(|user| {
                let mut rng =
                    seeds::substream(cfg.seed, &path(STAGE_SYMBOLS, &[frame as u64, user as u64]));
                SymbolFrame {
                    user,
                    symbols: draw_symbols(cfg.symbol_source, q, &mut rng),
                }
            })
            .collect();
        let mut noise_rng = seeds::substream(cfg.seed, &path(STAGE_LINK_NOISE, &[frame as u64]));
        let detected = match cell.direction {
            Direction::Ul => {
                let rx = ul_channel_output(&true_bank, &frames, cfg.l, noise_var, &mut noise_rng)?;
                ul_mf_detect_all(&rx, &est_bank, cfg.l)?
            }
            Direction::Dl => {
                let tx = dl_precode_transmit(&est_bank, &frames, cfg.l)?;
                dl_receive_detect_all(&true_bank, &est_bank, &tx, cfg.l, noise_var, &mut noise_rng)?
            }
        };
        for (user, est) in detected.into_iter().enumerate() {
            pooled[user].push(DetectionResult {
                user,
                estimated: est,
                transmitted: frames[user].symbols.clone(),
            });
        }
    }

    let snr_linear = 10f64.powf(cell.snr_db / 10.0);
    let overhead = if cfg.cp_overhead {
        n as f64 / (n + cfg.n_cp) as f64
    } else {
        1.0
    };
    let mut records = Vec::with_capacity(cell.k);
    for (user, results) in pooled.iter().enumerate() {
        let sinr = measure_sinr(results)?;
        let capacity = per_user_capacity(sinr.rho, cfg.l) * overhead;
        // Ideal single-user reference on the same channel draw: log-det with
        // no precoding for UL and perfect-CSI TR for DL.
        let user_ops = true_bank.user_ops(user)?;
        let effective = match cell.direction {
            Direction::Ul => EffectiveChannel::UlStack(user_ops.to_vec()),
            Direction::Dl => {
                let precoders = tr_precoder(user_ops)?;
                EffectiveChannel::dl(user_ops, &precoders)?
            }
        };
        let ideal = ideal_capacity(&effective, cfg.l, snr_linear)? * overhead;
        records.push(CapacityRecord {
            snr_db: cell.snr_db,
            k: cell.k,
            m: cell.m,
            l: cfg.l,
            user,
            trial,
            sinr_linear: sinr.rho,
            capacity_bpcu: capacity,
            ideal_capacity_bpcu: ideal,
        });
    }
    Ok(records)
}

/// Runs every trial of one cell and aggregates.
pub fn run_cell(cfg: &SweepConfig, cell: &CellSpec) -> Result<CellResult> {
    let per_trial: Vec<Result<Vec<CapacityRecord>>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| run_trial(cfg, cell, trial))
        .collect();
    let mut records = Vec::with_capacity(cfg.trials * cell.k);
    for r in per_trial {
        records.extend(r?);
    }
    let count = records.len() as f64;
    let mean = records.iter().map(|r| r.capacity_bpcu).sum::<f64>() / count;
    let var = records
        .iter()
        .map(|r| (r.capacity_bpcu - mean).powi(2))
        .sum::<f64>()
        / (count - 1.0).max(1.0);
    let stderr = (var / count).sqrt();
    let ideal = records.iter().map(|r| r.ideal_capacity_bpcu).sum::<f64>() / count;
    Ok(CellResult {
        spec: *cell,
        records,
        mean_capacity_bpcu: mean,
        stderr,
        ideal_capacity_bpcu: ideal,
    })
}

/// Runs the full sweep grid.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let cells = cfg.cells();
    let results = cells
        .iter()
        .map(|cell| run_cell(cfg, cell))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { cells: results })
}

impl SweepResult {
    /// Per-record CSV:
    /// `snr_db,k,m,l,direction,csi_mode,user,trial,sinr_linear,capacity_bpcu`.
    pub fn write_records_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(
            w,
            "snr_db,k,m,l,direction,csi_mode,user,trial,sinr_linear,capacity_bpcu"
        )?;
        for cell in &self.cells {
            for r in &cell.records {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{}",
                    r.snr_db,
                    r.k,
                    r.m,
                    r.l,
                    cell.spec.direction,
                    cell.spec.csi_mode,
                    r.user,
                    r.trial,
                    r.sinr_linear,
                    r.capacity_bpcu
                )?;
            }
        }
        Ok(())
    }

    /// Aggregate CSV, one row per cell:
    /// `snr_db,k,m,l,direction,csi_mode,mean_capacity_bpcu,stderr,ideal_capacity_bpcu`.
    pub fn write_aggregates_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(
            w,
            "snr_db,k,m,l,direction,csi_mode,mean_capacity_bpcu,stderr,ideal_capacity_bpcu"
        )?;
        for cell in &self.cells {
            let s = &cell.spec;
            let l = cell.records.first().map(|r| r.l).unwrap_or(1);
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                s.snr_db,
                s.k,
                s.m,
                l,
                s.direction,
                s.csi_mode,
                cell.mean_capacity_bpcu,
                cell.stderr,
                cell.ideal_capacity_bpcu
            )?;
        }
        Ok(())
    }
}

fn base_config(trials: usize) -> SweepConfig {
    SweepConfig {
        n: 2048,
        n_cp: 160,
        zc_root: 1,
        l: 1,
        snr_db: (-8..=0).map(|i| (i * 5) as f64).collect(),
        k: vec![32],
        m: vec![1],
        l_h: 130,
        tau: 25.0,
        normalize_channels: true,
        direction: vec![Direction::Ul],
        csi_mode: vec![CsiMode::Perfect],
        trials,
        frames_per_trial: 2,
        seed: 1,
        symbol_source: SymbolSource::Qpsk,
        cp_overhead: false,
    }
}

/// Single-antenna UL per-user capacity vs SNR for K in {1, 2, 8, 32}.
pub fn fig1_config(trials: usize) -> SweepConfig {
    SweepConfig {
        k: vec![1, 2, 8, 32],
        ..base_config(trials)
    }
}

/// Multi-antenna DL per-user capacity vs SNR for M in {1, 8, 32, 128}, K = 32.
pub fn fig2_config(trials: usize) -> SweepConfig {
    SweepConfig {
        m: vec![1, 8, 32, 128],
        direction: vec![Direction::Dl],
        ..base_config(trials)
    }
}

/// DL per-user capacity with perfect vs estimated CSI, K = 32,
/// M in {1, 8, 32, 128}.
pub fn fig3_config(trials: usize) -> SweepConfig {
    SweepConfig {
        m: vec![1, 8, 32, 128],
        direction: vec![Direction::Dl],
        csi_mode: vec![CsiMode::Perfect, CsiMode::Estimated],
        ..base_config(trials)
    }
}
