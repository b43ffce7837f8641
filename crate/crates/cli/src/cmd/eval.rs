//! Recompute summary metrics from previously written artifacts. This is an
//! independent tally from the CSVs on disk, so it cross-checks whatever the
//! producing command reported.

use std::fs;
use std::path::Path;

use mirage_core::Real;

use crate::cmd::classify::DETECTIONS_FILE;
use crate::cmd::track::FILE as TRACK_FILE;
use crate::confusion::ConfusionMatrix;
use crate::error::{CliError, Result};
use crate::setup::Ctx;

pub const FILE: &str = "eval.json";

#[derive(Debug, Clone, serde::Serialize)]
pub struct DetectionEval {
    pub stl: ConfusionMatrix,
    pub benchmark: ConfusionMatrix,
    pub accuracy_gap: Real,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct TrackEval {
    pub slots: usize,
    pub max_rate_loss: Real,
    pub max_rate_loss_near_ris: Real,
    pub max_aod_error_rad: Real,
}

fn parse_flag(raw: &str, what: &str) -> Result<bool> {
    match raw {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(CliError::Config(format!("bad {what} flag {other:?}"))),
    }
}

pub fn eval_detections(path: &Path) -> Result<DetectionEval> {
    let mut r = csv::Reader::from_path(path)?;
    let mut stl_pairs = Vec::new();
    let mut bench_pairs = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let label = rec
            .get(1)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| CliError::Config("detections lack labels; nothing to score".into()))?;
        let label = parse_flag(label, "label")?;
        stl_pairs.push((parse_flag(rec.get(2).unwrap_or(""), "stl verdict")?, label));
        bench_pairs.push((parse_flag(rec.get(3).unwrap_or(""), "benchmark verdict")?, label));
    }
    let stl = ConfusionMatrix::from_pairs(stl_pairs);
    let benchmark = ConfusionMatrix::from_pairs(bench_pairs);
    Ok(DetectionEval { accuracy_gap: stl.accuracy - benchmark.accuracy, stl, benchmark })
}

/// "Near RIS" means the vehicle is within `radius` metres of the surface.
pub fn eval_track(path: &Path, ris_pos: (Real, Real), lane_y: Real, radius: Real) -> Result<TrackEval> {
    let mut r = csv::Reader::from_path(path)?;
    let mut ev = TrackEval {
        slots: 0,
        max_rate_loss: 0.0,
        max_rate_loss_near_ris: 0.0,
        max_aod_error_rad: 0.0,
    };
    let get = |rec: &csv::StringRecord, i: usize| -> Result<Real> {
        rec.get(i)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| CliError::Config(format!("track row missing column {i}")))
    };
    for rec in r.records() {
        let rec = rec?;
        let x = get(&rec, 1)?;
        let true_aod = get(&rec, 2)?;
        let aod_attacked = get(&rec, 4)?;
        let rate_base = get(&rec, 5)?;
        let rate_att = get(&rec, 6)?;
        if rate_base <= 0.0 {
            return Err(CliError::Numerical("non-positive baseline rate".into()));
        }
        let loss = (rate_base - rate_att) / rate_base;
        ev.slots += 1;
        ev.max_rate_loss = ev.max_rate_loss.max(loss);
        let near = (x - ris_pos.0).hypot(lane_y - ris_pos.1) <= radius;
        if near {
            ev.max_rate_loss_near_ris = ev.max_rate_loss_near_ris.max(loss);
        }
        ev.max_aod_error_rad = ev.max_aod_error_rad.max((aod_attacked - true_aod).abs());
    }
    if ev.slots == 0 {
        return Err(CliError::Config("empty tracking trace".into()));
    }
    Ok(ev)
}

pub fn run(ctx: &Ctx) -> Result<()> {
    let det_path = ctx.out.join(DETECTIONS_FILE);
    let track_path = ctx.out.join(TRACK_FILE);
    let detections = det_path.exists().then(|| eval_detections(&det_path)).transpose()?;
    let tracking = track_path
        .exists()
        .then(|| {
            // Lane height enters only through the near-RIS distance; use the
            // middle lane.
            let lanes = &ctx.cfg.road.lanes_y;
            let lane_y = lanes[lanes.len() / 2];
            eval_track(&track_path, ctx.cfg.scenario.ris_pos, lane_y, 10.0)
        })
        .transpose()?;
    if detections.is_none() && tracking.is_none() {
        return Err(CliError::Config(format!(
            "nothing to evaluate in {}",
            ctx.out.display()
        )));
    }

    if let Some(d) = &detections {
        println!(
            "detection: stl accuracy {:.4}, benchmark {:.4}, gap {:+.4} over {} samples",
            d.stl.accuracy,
            d.benchmark.accuracy,
            d.accuracy_gap,
            d.stl.total()
        );
    }
    if let Some(t) = &tracking {
        println!(
            "tracking: max rate loss {:.2}% ({:.2}% near RIS), max AoD error {:.3} rad over {} slots",
            100.0 * t.max_rate_loss,
            100.0 * t.max_rate_loss_near_ris,
            t.max_aod_error_rad,
            t.slots
        );
    }

    let report = serde_json::json!({
        "detection": detections,
        "tracking": tracking,
    });
    fs::write(ctx.out.join(FILE), serde_json::to_string_pretty(&report)? + "\n")?;
    Ok(())
}
