//! Shared command context: configuration, root seed, output directory, and
//! derived per-stage seeds.

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;

use mirage_attack::env::SpoofEnv;
use mirage_attack::grid::ActionGrid;
use mirage_core::config::SimConfig;
use mirage_core::rng::indexed_stream;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum AttackerKind {
    None,
    Ppo,
    Oracle,
}

impl AttackerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AttackerKind::None => "none",
            AttackerKind::Ppo => "ppo",
            AttackerKind::Oracle => "oracle",
        }
    }
}

pub struct Ctx {
    pub cfg: SimConfig,
    pub seed: u64,
    pub out: PathBuf,
}

impl Ctx {
    /// Resolve config file (defaults when absent), root seed (flag wins over
    /// the config), and create the output directory.
    pub fn new(config: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<Ctx> {
        let cfg = match config {
            Some(path) => SimConfig::load(path)?,
            None => SimConfig::defaults(),
        };
        cfg.scenario.validate()?;
        let seed = seed.unwrap_or(cfg.scenario.rng_seed);
        fs::create_dir_all(out)?;
        Ok(Ctx { cfg, seed, out: out.to_path_buf() })
    }

    pub fn env(&self) -> Result<SpoofEnv> {
        let grid = ActionGrid::new(self.cfg.attack.action_count, self.cfg.scenario.phase_interval_s)?;
        Ok(SpoofEnv::new(self.cfg.scenario.clone(), self.cfg.consistency.clone(), grid)?)
    }
}

/// Child seed for a named stage; every random quantity in the harness flows
/// from the root seed through one of these.
pub fn sub_seed(seed: u64, name: &str, index: u64) -> u64 {
    indexed_stream(seed, name, index).gen()
}
