use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mirage_cli::cmd::{classify, data, eval, feasible, pipeline, plan, slot, track, train};
use mirage_cli::setup::{AttackerKind, Ctx};
use mirage_cli::Result;

#[derive(Parser)]
#[command(
    name = "mirage",
    about = "RIS sensing-spoofing simulator: attacks, tracking impact, and trajectory-level detection",
    version
)]
struct Cli {
    /// TOML configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed; overrides the configured one.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Who drives the RIS where a command involves an attacker.
    #[arg(long, global = true, value_enum, default_value_t = AttackerKind::Oracle)]
    attacker: AttackerKind,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sweep beam directions and report which spoof tones are feasible.
    FeasibleSet {
        /// Lowest beam direction in degrees.
        #[arg(long, default_value_t = 70.0)]
        theta0_min: f64,
        /// Highest beam direction in degrees.
        #[arg(long, default_value_t = 90.0)]
        theta0_max: f64,
        /// Sweep step in degrees.
        #[arg(long, default_value_t = 0.5)]
        theta0_step: f64,
    },
    /// Single-slot angle-bias experiment under receiver noise.
    SpoofSlot {
        /// Beam direction in degrees.
        #[arg(long, default_value_t = 85.0)]
        theta0: f64,
        #[arg(long, default_value_t = 600.0)]
        dmu_min: f64,
        #[arg(long, default_value_t = 1000.0)]
        dmu_max: f64,
        #[arg(long, default_value_t = 50.0)]
        dmu_step: f64,
        /// Noise trials per tone.
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Plan a spoofing attack: oracle search or policy-gradient training.
    PlanAttack {
        /// Train the policy without the feasibility mask (ablation).
        #[arg(long)]
        unmasked: bool,
    },
    /// Closed-loop beam tracking: attacked trace vs the clean baseline.
    Track,
    /// Generate the training and mixed test datasets.
    GenData,
    /// Learn the trajectory clustering and report the partition.
    Cluster,
    /// Train the full detector bundle (clusters, formulas, thresholds).
    LearnStl,
    /// Score a trained bundle on the test set.
    Detect,
    /// Everything end to end: data, training, detection, metrics.
    Pipeline,
    /// Recompute summary metrics from artifacts already on disk.
    Eval,
}

fn run(cli: &Cli) -> Result<()> {
    let ctx = Ctx::new(cli.config.as_deref(), cli.seed, &cli.out)?;
    match &cli.cmd {
        Cmd::FeasibleSet { theta0_min, theta0_max, theta0_step } => {
            feasible::run(&ctx, *theta0_min, *theta0_max, *theta0_step)
        }
        Cmd::SpoofSlot { theta0, dmu_min, dmu_max, dmu_step, trials } => slot::run(
            &ctx,
            &slot::SlotSweep {
                theta0_deg: *theta0,
                dmu_min: *dmu_min,
                dmu_max: *dmu_max,
                dmu_step: *dmu_step,
                trials: *trials,
            },
        ),
        Cmd::PlanAttack { unmasked } => plan::run(&ctx, cli.attacker, !unmasked),
        Cmd::Track => track::run(&ctx, cli.attacker),
        Cmd::GenData => data::run(&ctx, cli.attacker),
        Cmd::Cluster => train::cluster(&ctx),
        Cmd::LearnStl => train::learn_stl(&ctx),
        Cmd::Detect => classify::run(&ctx),
        Cmd::Pipeline => pipeline::run(&ctx, cli.attacker),
        Cmd::Eval => eval::run(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
