use clap::{Parser, Subcommand};
use cpdsss::capacity::{ideal_capacity, ideal_capacity_dense, EffectiveChannel};
use cpdsss::channel::{draw_channel_set, ChannelProfile};
use cpdsss::circulant::CirculantOperator;
use cpdsss::harness::{fig1_config, fig2_config, fig3_config, run_sweep, SweepConfig};
use cpdsss::plot::write_svg;
use cpdsss::zc_spread::{generate_zc, spreading_operator};
use cpdsss::{seeds, Complex64};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "cpdsss",
    about = "Link-level Monte Carlo simulator for multi-user cyclic-prefix DSSS capacity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct OutputArgs {
    /// Per-record CSV output path
    #[arg(long, default_value = "records.csv")]
    records: PathBuf,
    /// Aggregate CSV output path
    #[arg(long, default_value = "aggregates.csv")]
    aggregates: PathBuf,
    /// Optional SVG plot path
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(clap::Args)]
struct FigArgs {
    /// Monte Carlo trials per grid cell
    #[arg(long, default_value_t = 50)]
    trials: usize,
    /// Master seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep described by a TOML config file
    Sweep {
        /// Path to the sweep config
        config: PathBuf,
        /// Override the config's master seed
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Single-antenna UL capacity vs SNR for K in {1, 2, 8, 32}
    Fig1(FigArgs),
    /// Multi-antenna DL capacity vs SNR, K = 32, M in {1, 8, 32, 128}
    Fig2(FigArgs),
    /// DL capacity with perfect vs pilot-estimated CSI, K = 32
    Fig3(FigArgs),
    /// Run quick self-checks against dense-matrix oracles
    Validate,
    /// Write raw channel realizations as CSV
    DumpChannels {
        /// Output path
        #[arg(long, default_value = "channels.csv")]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        users: usize,
        #[arg(long, default_value_t = 1)]
        antennas: usize,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 130)]
        taps: usize,
        #[arg(long, default_value_t = 25.0)]
        tau: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn run_and_write(cfg: &SweepConfig, title: &str, out: &OutputArgs) -> cpdsss::Result<()> {
    let result = run_sweep(cfg)?;
    let mut records = BufWriter::new(File::create(&out.records)?);
    result.write_records_csv(&mut records)?;
    records.flush()?;
    let mut aggregates = BufWriter::new(File::create(&out.aggregates)?);
    result.write_aggregates_csv(&mut aggregates)?;
    aggregates.flush()?;
    eprintln!(
        "wrote {} records to {} and {} aggregate rows to {}",
        result.cells.iter().map(|c| c.records.len()).sum::<usize>(),
        out.records.display(),
        result.cells.len(),
        out.aggregates.display()
    );
    if let Some(svg) = &out.svg {
        let mut f = BufWriter::new(File::create(svg)?);
        write_svg(&result, title, &mut f)?;
        f.flush()?;
        eprintln!("wrote plot to {}", svg.display());
    }
    Ok(())
}

fn validate() -> cpdsss::Result<bool> {
    let mut all_ok = true;
    let mut check = |name: &str, ok: bool| {
        println!("{}: {name}", if ok { "PASS" } else { "FAIL" });
        all_ok &= ok;
    };

    // ZC spreading matrix is unitary (dense Gram at n = 16).
    {
        let n = 16;
        let z = generate_zc(n, 3)?;
        let op = spreading_operator(&z);
        let mut max_err = 0.0f64;
        for i in 0..n {
            let mut ei = vec![Complex64::new(0.0, 0.0); n];
            ei[i] = Complex64::new(1.0, 0.0);
            let col_i = op.spread(&ei)?;
            for j in 0..n {
                let mut ej = vec![Complex64::new(0.0, 0.0); n];
                ej[j] = Complex64::new(1.0, 0.0);
                let col_j = op.spread(&ej)?;
                let dot: Complex64 = col_i.iter().zip(&col_j).map(|(a, b)| a.conj() * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                max_err = max_err.max((dot - want).norm());
            }
        }
        check(
            "spreading operator is unitary (dense Gram, n=16)",
            max_err < 1e-10,
        );
    }

    // Circulant apply matches explicit dense matvec at n = 64.
    {
        let n = 64;
        let mut rng = seeds::substream(42, &[0]);
        let profile = ChannelProfile {
            l_h: 12,
            tau: 5.0,
            normalize: true,
        };
        let set = draw_channel_set(1, 1, &profile, &mut rng);
        let op = CirculantOperator::from_impulse(set.impulse(0, 0), n)?;
        let dense = op.to_dense();
        let x: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let fast = op.apply(&x)?;
        let mut err = 0.0f64;
        for (row, f) in dense.iter().zip(&fast) {
            let want: Complex64 = row.iter().zip(&x).map(|(a, b)| a * b).sum();
            err = err.max((want - f).norm());
        }
        check("circulant apply matches dense matvec (n=64)", err < 1e-10);
    }

    // Fast ideal capacity matches the dense log-det at n = 64, L in {1, 2, 4}.
    {
        let mut rng = seeds::substream(43, &[0]);
        let profile = ChannelProfile {
            l_h: 12,
            tau: 5.0,
            normalize: true,
        };
        let mut ok = true;
        for &l in &[1usize, 2, 4] {
            let set = draw_channel_set(1, 1, &profile, &mut rng);
            let op = CirculantOperator::from_impulse(set.impulse(0, 0), 64)?;
            let eff = EffectiveChannel::UlStack(vec![op]);
            let fast = ideal_capacity(&eff, l, 0.3)?;
            let dense = ideal_capacity_dense(&eff, l, 0.3)?;
            ok &= (fast - dense).abs() / dense.abs() < 1e-8;
        }
        check("ideal capacity fast path matches dense log-det (n=64)", ok);
    }

    // Flat-channel end-to-end SINR equals the operating SNR.
    {
        use cpdsss::harness::{run_cell, CellSpec, CsiMode, Direction};
        let cfg = SweepConfig::from_toml(
            r#"
            n = 512
            n_cp = 16
            l = 1
            snr_db = [-20.0]
            k = [1]
            m = [1]
            l_h = 1
            tau = 1.0
            direction = ["ul"]
            csi_mode = ["perfect"]
            trials = 10
            seed = 7
        "#,
        )?;
        let cell = CellSpec {
            snr_db: -20.0,
            k: 1,
            m: 1,
            direction: Direction::Ul,
            csi_mode: CsiMode::Perfect,
        };
        let result = run_cell(&cfg, &cell)?;
        let want = (1.0f64 + 0.01).log2();
        check(
            "flat-channel capacity equals log2(1 + snr) at -20 dB",
            (result.mean_capacity_bpcu / want - 1.0).abs() < 0.05,
        );
    }

    Ok(all_ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep { config, seed, out } => (|| {
            let text = std::fs::read_to_string(&config)?;
            let mut cfg = SweepConfig::from_toml(&text)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            run_and_write(&cfg, "capacity sweep", &out)
        })(),
        Command::Fig1(args) => {
            let mut cfg = fig1_config(args.trials);
            cfg.seed = args.seed;
            run_and_write(&cfg, "UL per-user capacity, M=1", &args.out)
        }
        Command::Fig2(args) => {
            let mut cfg = fig2_config(args.trials);
            cfg.seed = args.seed;
            run_and_write(&cfg, "DL per-user capacity, K=32", &args.out)
        }
        Command::Fig3(args) => {
            let mut cfg = fig3_config(args.trials);
            cfg.seed = args.seed;
            run_and_write(
                &cfg,
                "DL capacity, perfect vs estimated CSI, K=32",
                &args.out,
            )
        }
        Command::Validate => match validate() {
            Ok(true) => return ExitCode::SUCCESS,
            Ok(false) => return ExitCode::FAILURE,
            Err(e) => Err(e),
        },
        Command::DumpChannels {
            out,
            users,
            antennas,
            trials,
            taps,
            tau,
            seed,
        } => (|| {
            let profile = ChannelProfile {
                l_h: taps,
                tau,
                normalize: true,
            };
            let mut f = BufWriter::new(File::create(&out)?);
            writeln!(f, "trial,user,antenna,tap_index,re,im")?;
            for trial in 0..trials {
                let mut rng = seeds::substream(seed, &[trial as u64]);
                let set = draw_channel_set(users, antennas, &profile, &mut rng);
                set.write_csv(&mut f, trial)?;
            }
            f.flush()?;
            eprintln!("wrote {} trials to {}", trials, out.display());
            Ok(())
        })(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
