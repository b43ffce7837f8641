//! Detector training verbs. `cluster` stops after the representation stage
//! and reports the partition; `learn-stl` runs the full pipeline (clustering,
//! per-cluster formula learning, benchmark calibration) and persists the
//! bundle into the output directory.

use std::fs;

use mirage_detect::{dtcr_train, DetectorBundle};

use crate::cmd::data::TRAIN_FILE;
use crate::dataset::{read_csv, Dataset};
use crate::error::{CliError, Result};
use crate::setup::{sub_seed, Ctx};

pub const ASSIGNMENTS_FILE: &str = "assignments.csv";

/// Same representation learning rate as the bundle trainer.
const CLUSTER_LR: f64 = 1e-2;

fn training_set(ctx: &Ctx) -> Result<Dataset> {
    let path = ctx.out.join(TRAIN_FILE);
    if !path.exists() {
        return Err(CliError::Config(format!(
            "{} not found; run gen-data first",
            path.display()
        )));
    }
    read_csv(&path)
}

pub fn bundle_seed(ctx: &Ctx) -> u64 {
    sub_seed(ctx.seed, "train-bundle", 0)
}

pub fn cluster(ctx: &Ctx) -> Result<()> {
    let data = training_set(ctx)?;
    let d = &ctx.cfg.detect;
    let (model, _) = dtcr_train(
        &data.trajs,
        d.clusters,
        d.cluster_iters,
        d.indicator_every,
        d.lambda0,
        d.latent_dim,
        CLUSTER_LR,
        bundle_seed(ctx),
    )?;
    let mut out = String::from("sample_id,cluster\n");
    for (i, &c) in model.assignment.iter().enumerate() {
        out.push_str(&format!("{i},{c}\n"));
    }
    fs::write(ctx.out.join(ASSIGNMENTS_FILE), out)?;
    if model.rank_deficient {
        return Err(CliError::Numerical(
            "indicator matrix went rank-deficient; partition is unreliable".into(),
        ));
    }
    Ok(())
}

pub fn learn_stl(ctx: &Ctx) -> Result<()> {
    let data = training_set(ctx)?;
    let bundle = DetectorBundle::train(&data.trajs, &ctx.cfg.detect, bundle_seed(ctx))?;
    bundle.save(&ctx.out)?;
    Ok(())
}
