//! End-to-end run: generate traffic, train the detector on the clean
//! training set, and score both detectors on the mixed test set. Everything
//! is derived from the root seed, so repeated runs are byte-identical.

use mirage_detect::DetectorBundle;

use crate::cmd::classify::{classify, write_outputs};
use crate::cmd::data::{generate, write};
use crate::cmd::plan::load_policy;
use crate::cmd::train::bundle_seed;
use crate::error::Result;
use crate::setup::{AttackerKind, Ctx};

pub fn run(ctx: &Ctx, attacker: AttackerKind) -> Result<()> {
    let policy = match attacker {
        AttackerKind::Ppo => Some(load_policy(ctx)?),
        _ => None,
    };
    let g = generate(ctx, attacker, policy.as_ref())?;
    write(ctx, &g)?;

    let bundle = DetectorBundle::train(&g.train.trajs, &ctx.cfg.detect, bundle_seed(ctx))?;
    bundle.save(&ctx.out)?;

    let rows = classify(&bundle, &g.test)?;
    write_outputs(ctx, &rows)
}
