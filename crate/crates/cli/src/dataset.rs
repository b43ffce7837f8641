//! Trajectory dataset persistence: one CSV row per slot
//! (`sample_id,k,x,y,v[,label]`) plus a JSON manifest describing how the
//! set was produced. Floats are written in shortest round-trip form, so a
//! write/read cycle reproduces every bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use mirage_core::Real;

use crate::error::{CliError, Result};

pub type Traj = Vec<[Real; 3]>;

#[derive(Debug, Clone)]
pub struct Dataset {
    pub trajs: Vec<Traj>,
    /// Per-trajectory spoofed flag; `None` for unlabeled sets.
    pub labels: Option<Vec<bool>>,
}

/// Reproducibility record written next to each dataset.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DataManifest {
    pub seed: u64,
    pub scenario_hash: u64,
    pub slots: usize,
    /// Ground-truth motion patterns by count.
    pub pattern_mix: BTreeMap<String, usize>,
    pub clean: usize,
    pub spoofed: usize,
    pub attacker: String,
}

impl DataManifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<DataManifest> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }
}

pub fn write_csv(path: &Path, data: &Dataset) -> Result<()> {
    if let Some(labels) = &data.labels {
        if labels.len() != data.trajs.len() {
            return Err(CliError::Config(format!(
                "{} labels for {} trajectories",
                labels.len(),
                data.trajs.len()
            )));
        }
    }
    let mut w = csv::Writer::from_path(path)?;
    match &data.labels {
        Some(_) => w.write_record(["sample_id", "k", "x", "y", "v", "label"])?,
        None => w.write_record(["sample_id", "k", "x", "y", "v"])?,
    }
    for (id, traj) in data.trajs.iter().enumerate() {
        for (k, s) in traj.iter().enumerate() {
            let mut row = vec![
                id.to_string(),
                k.to_string(),
                s[0].to_string(),
                s[1].to_string(),
                s[2].to_string(),
            ];
            if let Some(labels) = &data.labels {
                row.push(if labels[id] { "1".into() } else { "0".into() });
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn field(rec: &csv::StringRecord, i: usize, line: u64) -> Result<Real> {
    let raw = rec
        .get(i)
        .ok_or_else(|| CliError::Config(format!("row {line}: missing column {i}")))?;
    let v: Real = raw
        .parse()
        .map_err(|_| CliError::Config(format!("row {line}: bad float {raw:?}")))?;
    if !v.is_finite() {
        return Err(CliError::Config(format!("row {line}: non-finite value {raw}")));
    }
    Ok(v)
}

pub fn read_csv(path: &Path) -> Result<Dataset> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let labeled = match headers.len() {
        5 => false,
        6 => true,
        n => {
            return Err(CliError::Config(format!(
                "{}: expected 5 or 6 columns, found {n}",
                path.display()
            )))
        }
    };
    let mut trajs: Vec<Traj> = Vec::new();
    let mut labels: Vec<bool> = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = line as u64 + 2;
        let id: usize = rec
            .get(0)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| CliError::Config(format!("row {line}: bad sample_id")))?;
        if id > trajs.len() {
            return Err(CliError::Config(format!(
                "row {line}: sample_id {id} out of order"
            )));
        }
        let sample = [field(&rec, 2, line)?, field(&rec, 3, line)?, field(&rec, 4, line)?];
        let label = if labeled {
            match rec.get(5) {
                Some("0") => false,
                Some("1") => true,
                other => {
                    return Err(CliError::Config(format!(
                        "row {line}: bad label {other:?}"
                    )))
                }
            }
        } else {
            false
        };
        if id == trajs.len() {
            trajs.push(Vec::new());
            labels.push(label);
        } else if labeled && labels[id] != label {
            return Err(CliError::Config(format!(
                "row {line}: label flips within sample {id}"
            )));
        }
        let k: usize = rec
            .get(1)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| CliError::Config(format!("row {line}: bad slot index")))?;
        if k != trajs[id].len() {
            return Err(CliError::Config(format!(
                "row {line}: slot {k} out of order in sample {id}"
            )));
        }
        trajs[id].push(sample);
    }
    if trajs.is_empty() {
        return Err(CliError::Config(format!("{}: empty dataset", path.display())));
    }
    Ok(Dataset { trajs, labels: labeled.then_some(labels) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact_at_full_precision() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let trajs: Vec<Traj> = vec![
            vec![[0.1 + 0.2, -9.969_209_968e3, 1.0 / 3.0], [1e-300, 2.5, 67.0]],
            vec![[5.0, 21.0, 10.123456789012345], [5.1, 21.0, 10.0]],
        ];
        let data = Dataset { trajs: trajs.clone(), labels: Some(vec![false, true]) };
        write_csv(&path, &data).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(back.trajs, trajs);
        assert_eq!(back.labels, Some(vec![false, true]));
    }

    #[test]
    fn unlabeled_files_read_without_labels() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let data = Dataset { trajs: vec![vec![[1.0, 2.0, 3.0]]], labels: None };
        write_csv(&path, &data).unwrap();
        assert_eq!(read_csv(&path).unwrap().labels, None);
    }

    #[test]
    fn nan_fields_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, "sample_id,k,x,y,v\n0,0,NaN,2.0,3.0\n").unwrap();
        assert!(matches!(read_csv(&path), Err(CliError::Config(_))));
    }
}
