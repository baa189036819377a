//! Round trips through the on-disk formats, using only the public API.

use dslab::algebra::{audit_theorem, AuditOptions, AuditReport, Verdict};
use dslab::dims::{ds_dimension, validate_witness, ShatterWitness, WitnessFile};
use dslab::oig::{min_max_orientation, OrientationFile};
use dslab::{build_oig, gen_cube, gen_random, load_class, Density, HypothesisClass};

#[test]
fn class_files_round_trip_and_report_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    let h = gen_random(3, 4, 20, 7).unwrap();
    let path = dir.path().join("h.json");
    h.save(&path).unwrap();
    let loaded = load_class(&path).unwrap();
    assert_eq!(loaded.class, h);
    assert_eq!(loaded.duplicates, 0);

    std::fs::write(&path, r#"{"k": 2, "n": 1, "hyps": [[2], [1], [2]]}"#).unwrap();
    let loaded = load_class(&path).unwrap();
    assert_eq!(loaded.duplicates, 1);
    assert_eq!(loaded.class.rows(), &[vec![1], vec![2]]);

    std::fs::write(&path, r#"{"k": 2, "n": 1, "hyps": [[3]]}"#).unwrap();
    assert!(matches!(load_class(&path), Err(dslab::Error::LabelOutOfRange { label: 3, k: 2 })));
    std::fs::write(&path, "{not json").unwrap();
    assert!(matches!(load_class(&path), Err(dslab::Error::Json(_))));
    assert!(matches!(load_class(dir.path().join("missing.json")), Err(dslab::Error::Io(_))));
}

#[test]
fn witness_files_revalidate() {
    let h = gen_cube(3, 1, 2, 3).unwrap();
    let dim = ds_dimension(&h, 1);
    assert_eq!(dim.value, 2);
    let witness = dim.witness.unwrap();
    let text = serde_json::to_string(&witness.to_file()).unwrap();
    let file: WitnessFile = serde_json::from_str(&text).unwrap();
    assert!(file.coords.iter().all(|&c| c >= 1), "witness coordinates are 1-based on disk");
    let back = ShatterWitness::from_file(file).unwrap();
    assert_eq!(back, witness);
    validate_witness(&h, &back).unwrap();

    let smaller = HypothesisClass::new(3, 3, h.rows()[..4].to_vec()).unwrap();
    assert!(validate_witness(&smaller, &back).is_err());
}

#[test]
fn orientation_export_names_every_edge() {
    let h = gen_cube(3, 2, 1, 2).unwrap();
    let graph = build_oig(&h);
    let (sigma, t_star) = min_max_orientation(&graph, 2);
    let file = sigma.to_file(&graph);
    let text = serde_json::to_string(&file).unwrap();
    let back: OrientationFile = serde_json::from_str(&text).unwrap();
    assert_eq!(back.edges.len(), graph.edges().len());
    for e in &back.edges {
        assert!(e.dir >= 1 && e.dir <= h.n());
        assert!(e.assign.len() <= 2);
    }
    let mut out = vec![0; h.len()];
    for (edge, e) in graph.edges().iter().zip(&back.edges) {
        for &v in &edge.members {
            if !e.assign.contains(&v) {
                out[v] += 1;
            }
        }
    }
    assert_eq!(out.into_iter().max().unwrap(), t_star);
}

#[test]
fn audit_reports_survive_serialization() {
    let h = gen_cube(3, 1, 1, 2).unwrap();
    let report = audit_theorem(&h, 1, 2, &AuditOptions::default()).unwrap();
    assert_eq!(report.verdict, Verdict::Pass);
    let text = serde_json::to_string(&report).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["verdict"], "PASS");
    let mu: Density = value["mu"].as_str().unwrap().parse().unwrap();
    assert_eq!(mu, report.mu);

    let mut back: AuditReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back.recompute_verdict(), Verdict::Pass);
    back.t_star += 1;
    back.checks = back.recompute_checks();
    assert_eq!(back.recompute_verdict(), Verdict::Fail);
}
