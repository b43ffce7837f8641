//! Inference verb: run the formula detector and the distance-threshold
//! benchmark over a labeled test set and tally both confusion matrices.

use std::fs;

use mirage_detect::detector::Detection;
use mirage_detect::{benchmark_detect, detect, DetectorBundle, Verdict};

use crate::cmd::data::TEST_FILE;
use crate::confusion::ConfusionMatrix;
use crate::dataset::{read_csv, Dataset};
use crate::error::{CliError, Result};
use crate::setup::Ctx;

pub const DETECTIONS_FILE: &str = "detections.csv";
pub const CONFUSION_STL_FILE: &str = "confusion_stl.json";
pub const CONFUSION_BENCH_FILE: &str = "confusion_benchmark.json";
pub const METRICS_FILE: &str = "metrics.json";

pub struct RowDetection {
    pub sample_id: usize,
    pub label: Option<bool>,
    pub stl: Detection,
    pub benchmark: Verdict,
}

pub fn classify(bundle: &DetectorBundle, data: &Dataset) -> Result<Vec<RowDetection>> {
    data.trajs
        .iter()
        .enumerate()
        .map(|(i, traj)| {
            let stl = detect(traj, bundle)?;
            let benchmark = benchmark_detect(traj, &bundle.clusters, &bundle.thresholds)?;
            Ok(RowDetection {
                sample_id: i,
                label: data.labels.as_ref().map(|l| l[i]),
                stl,
                benchmark,
            })
        })
        .collect()
}

pub fn confusions(rows: &[RowDetection]) -> Option<(ConfusionMatrix, ConfusionMatrix)> {
    if rows.iter().any(|r| r.label.is_none()) {
        return None;
    }
    let stl = ConfusionMatrix::from_pairs(
        rows.iter().map(|r| (r.stl.verdict == Verdict::Spoofed, r.label.unwrap())),
    );
    let bench = ConfusionMatrix::from_pairs(
        rows.iter().map(|r| (r.benchmark == Verdict::Spoofed, r.label.unwrap())),
    );
    Some((stl, bench))
}

pub fn write_outputs(ctx: &Ctx, rows: &[RowDetection]) -> Result<()> {
    let mut out = String::from(
        "sample_id,label,stl_verdict,benchmark_verdict,cluster,robustness,distance\n",
    );
    for r in rows {
        let label = match r.label {
            Some(true) => "1",
            Some(false) => "0",
            None => "",
        };
        out.push_str(&format!(
            "{},{label},{},{},{},{},{}\n",
            r.sample_id,
            (r.stl.verdict == Verdict::Spoofed) as u8,
            (r.benchmark == Verdict::Spoofed) as u8,
            r.stl.cluster,
            r.stl.robustness,
            r.stl.distance
        ));
    }
    fs::write(ctx.out.join(DETECTIONS_FILE), out)?;

    if let Some((stl, bench)) = confusions(rows) {
        fs::write(
            ctx.out.join(CONFUSION_STL_FILE),
            serde_json::to_string_pretty(&stl)? + "\n",
        )?;
        fs::write(
            ctx.out.join(CONFUSION_BENCH_FILE),
            serde_json::to_string_pretty(&bench)? + "\n",
        )?;
        let metrics = serde_json::json!({
            "seed": ctx.seed,
            "scenario_hash": ctx.cfg.scenario.hash(),
            "test_size": rows.len(),
            "stl_accuracy": stl.accuracy,
            "benchmark_accuracy": bench.accuracy,
            "accuracy_gap": stl.accuracy - bench.accuracy,
        });
        fs::write(
            ctx.out.join(METRICS_FILE),
            serde_json::to_string_pretty(&metrics)? + "\n",
        )?;
    }
    Ok(())
}

pub fn run(ctx: &Ctx) -> Result<()> {
    let bundle = DetectorBundle::load(&ctx.out).map_err(|e| {
        CliError::Config(format!("no trained bundle in {}: {e}", ctx.out.display()))
    })?;
    let data = read_csv(&ctx.out.join(TEST_FILE))?;
    let rows = classify(&bundle, &data)?;
    write_outputs(ctx, &rows)
}
