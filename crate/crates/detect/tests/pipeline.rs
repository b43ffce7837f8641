//! End-to-end defender pipeline on generated three-pattern traffic:
//! clustering purity against the generator labels, formula quality, and
//! bundle persistence.

use mirage_attack::gen::gen_ground_truth;
use mirage_core::config::{ConsistencyConfig, DetectConfig, RoadConfig};
use mirage_core::traj::MotionPattern;
use mirage_detect::dtcr::dtcr_train;
use mirage_detect::{detect, DetectorBundle, Verdict};

type Traj = Vec<[f64; 3]>;

const PATTERNS: [MotionPattern; 3] = [
    MotionPattern::Straight,
    MotionPattern::SingleLaneChange,
    MotionPattern::DoubleLaneChange,
];

fn corpus(per_pattern: usize, len: usize) -> (Vec<Traj>, Vec<usize>) {
    let road = RoadConfig::defaults();
    let cons = ConsistencyConfig::defaults();
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (li, pattern) in PATTERNS.iter().enumerate() {
        for s in 0..per_pattern {
            let t = gen_ground_truth(*pattern, len, 0.01, &road, &cons, (li * 1000 + s) as u64)
                .unwrap();
            data.push(t.features());
            labels.push(li);
        }
    }
    (data, labels)
}

fn purity(assignment: &[usize], labels: &[usize], p: usize) -> f64 {
    let n_labels = labels.iter().max().unwrap() + 1;
    let mut counts = vec![vec![0usize; n_labels]; p];
    for (&a, &l) in assignment.iter().zip(labels) {
        counts[a][l] += 1;
    }
    let hits: usize = counts.iter().map(|row| row.iter().max().unwrap()).sum();
    hits as f64 / labels.len() as f64
}

#[test]
fn clustering_separates_the_motion_patterns() {
    // Six clusters over three patterns: lane changes split by direction, so
    // each pattern spans about two clusters. Purity against the generator
    // labels only requires each cluster to be label-pure.
    let (data, labels) = corpus(60, 40);
    let (model, pseudo) = dtcr_train(&data, 6, 50, 5, 50.0, 16, 1e-2, 42).unwrap();
    let score = purity(&model.assignment, &labels, 6);
    assert!(score >= 0.8, "cluster purity {score}");

    // One-vs-rest construction: every trajectory appears in every split.
    assert_eq!(pseudo.len(), 6);
    let total: usize = pseudo.iter().map(|d| d.members.len()).sum();
    assert_eq!(total, 6 * data.len());
    for split in &pseudo {
        let in_class = split.members.iter().filter(|(_, c)| *c).count();
        assert_eq!(
            in_class,
            model.assignment.iter().filter(|&&a| a == split.class).count()
        );
    }
}

#[test]
fn trained_bundle_passes_resubstitution_and_round_trips() {
    let (data, _) = corpus(40, 40);
    let mut cfg = DetectConfig::defaults();
    cfg.clusters = 6;
    cfg.formula_epochs = 200;
    let bundle = DetectorBundle::train(&data, &cfg, 7).unwrap();

    assert_eq!(bundle.formulas.len(), 6);
    assert_eq!(bundle.thresholds.len(), 6);
    assert_eq!(bundle.clusters.centers.len(), 6);

    let clean = data
        .iter()
        .filter(|t| detect(t, &bundle).unwrap().verdict == Verdict::Clean)
        .count();
    assert!(
        clean as f64 / data.len() as f64 >= 0.85,
        "resubstitution: {clean}/{} clean",
        data.len()
    );

    let dir = tempfile::tempdir().unwrap();
    bundle.save(dir.path()).unwrap();
    let loaded = DetectorBundle::load(dir.path()).unwrap();
    assert_eq!(loaded.formulas, bundle.formulas);
    assert_eq!(loaded.thresholds, bundle.thresholds);
    assert_eq!(loaded.clusters, bundle.clusters);
    for t in data.iter().take(20) {
        let a = detect(t, &bundle).unwrap();
        let b = detect(t, &loaded).unwrap();
        assert_eq!(a.verdict, b.verdict);
        assert_eq!(a.cluster, b.cluster);
        assert_eq!(a.robustness, b.robustness);
    }
}
