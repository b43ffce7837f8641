//! End-to-end detector training and on-disk persistence. A bundle holds the
//! clustering stage, one formula per cluster, and the benchmark thresholds.
//! On disk: formulas as grammar text, centers/thresholds/shapes as JSON,
//! encoder weights as little-endian f64.

use std::fs;
use std::path::Path;

use mirage_core::config::DetectConfig;
use mirage_core::rng::stream;
use mirage_stl::{format_formula, parse_formula, StlFormula};

use crate::detector::calibrate_thresholds;
use crate::dtcr::{dtcr_train, ClusterModel};
use crate::gru::Autoencoder;
use crate::tlinet::tlinet_train;
use crate::{DetectError, Real, Result, Traj};

#[derive(Debug, Clone)]
pub struct DetectorBundle {
    pub clusters: ClusterModel,
    pub formulas: Vec<StlFormula>,
    pub thresholds: Vec<Real>,
}

#[derive(serde::Serialize, serde::Deserialize)]
struct Manifest {
    latent_dim: usize,
    encoder_params: usize,
    centers: Vec<Vec<Real>>,
    thresholds: Vec<Real>,
    assignment: Vec<usize>,
    rank_deficient: bool,
}

const CLUSTER_LR: Real = 1e-2;

impl DetectorBundle {
    /// Full training pipeline: cluster the one-class dataset, learn one
    /// formula per pseudo-labeled split, calibrate benchmark thresholds.
    pub fn train(data: &[Traj], cfg: &DetectConfig, seed: u64) -> Result<DetectorBundle> {
        let (clusters, pseudo) = dtcr_train(
            data,
            cfg.clusters,
            cfg.cluster_iters,
            cfg.indicator_every,
            cfg.lambda0,
            cfg.latent_dim,
            CLUSTER_LR,
            seed,
        )?;
        let mut formulas = Vec::with_capacity(cfg.clusters);
        for split in &pseudo {
            let lambdas = cfg.class_lambdas[split.class % cfg.class_lambdas.len()];
            let labeled: Vec<(Traj, bool)> = split
                .members
                .iter()
                .map(|&(d, in_class)| (data[d].clone(), in_class))
                .collect();
            let model = tlinet_train(
                &labeled,
                lambdas,
                cfg.formula_epochs,
                cfg.literal_task_labels,
                seed ^ (0x515 + split.class as u64),
            )?;
            formulas.push(model.formula);
        }
        let thresholds = calibrate_thresholds(&clusters, data)?;
        Ok(DetectorBundle { clusters, formulas, thresholds })
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let text: String = self
            .formulas
            .iter()
            .map(|f| format_formula(f) + "\n")
            .collect();
        fs::write(dir.join("formulas.stl"), text)?;

        let params = self.clusters.net.params();
        let mut raw = Vec::with_capacity(params.len() * 8);
        for p in &params {
            raw.extend_from_slice(&p.to_le_bytes());
        }
        fs::write(dir.join("encoder.bin"), raw)?;

        let manifest = Manifest {
            latent_dim: self.clusters.net.latent_dim,
            encoder_params: params.len(),
            centers: self.clusters.centers.clone(),
            thresholds: self.thresholds.clone(),
            assignment: self.clusters.assignment.clone(),
            rank_deficient: self.clusters.rank_deficient,
        };
        fs::write(dir.join("detector.json"), serde_json::to_vec_pretty(&manifest)?)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<DetectorBundle> {
        let manifest: Manifest =
            serde_json::from_slice(&fs::read(dir.join("detector.json"))?)?;

        let raw = fs::read(dir.join("encoder.bin"))?;
        if raw.len() != manifest.encoder_params * 8 {
            return Err(DetectError::InvalidInput(format!(
                "encoder file holds {} bytes, manifest expects {}",
                raw.len(),
                manifest.encoder_params * 8
            )));
        }
        let params: Vec<Real> = raw
            .chunks_exact(8)
            .map(|c| Real::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let mut shape_rng = stream(0, "bundle-shape");
        let mut net = Autoencoder::new(manifest.latent_dim, &mut shape_rng);
        if net.param_count() != params.len() {
            return Err(DetectError::InvalidInput(format!(
                "encoder of {} parameters cannot load {} values",
                net.param_count(),
                params.len()
            )));
        }
        net.set_params(&params);

        let formulas: Vec<StlFormula> = fs::read_to_string(dir.join("formulas.stl"))?
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(parse_formula)
            .collect::<std::result::Result<_, _>>()?;

        let p = manifest.centers.len();
        if formulas.len() != p || manifest.thresholds.len() != p {
            return Err(DetectError::InvalidInput(format!(
                "{} formulas and {} thresholds for {p} centers",
                formulas.len(),
                manifest.thresholds.len()
            )));
        }
        Ok(DetectorBundle {
            clusters: ClusterModel {
                net,
                centers: manifest.centers,
                assignment: manifest.assignment,
                rank_deficient: manifest.rank_deficient,
            },
            formulas,
            thresholds: manifest.thresholds,
        })
    }
}
