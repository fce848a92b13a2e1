mod common;

use std::fs;
use std::path::Path;

use common::*;
use nalgebra::DVector;
use netbif::bifurcation::{explore, BranchForest};
use netbif::io::{
    branch_csv, format_lattice, format_subspaces, load_inputs, parse_matrix, parse_subspaces, read_file, render_svg,
    verify_record, ForestRecord, Inputs, IoError, RunConfig,
};
use netbif::Error;

fn run_config(cfg: &RunConfig) -> (Inputs, BranchForest, ForestRecord) {
    let inputs = load_inputs(cfg).unwrap();
    let settings = cfg.explore_settings();
    let forest = explore(&inputs.system, &inputs.lattice, &inputs.group, &settings, cfg.start().as_ref()).unwrap();
    let n = inputs.system.n();
    let functional = cfg.functional.clone().unwrap_or_else(|| vec![1.0 / n as f64; n]);
    let record = ForestRecord::new(Some(cfg), &inputs.system, &inputs.lattice, &inputs.group, &settings, &functional, &forest);
    (inputs, forest, record)
}

fn strip_comments(text: &str) -> String {
    text.lines().filter(|l| !l.trim_start().starts_with('#')).map(|l| format!("{l}\n")).collect()
}

fn write_config(dir: &Path, matrix: &str, body: &str) -> RunConfig {
    fs::write(dir.join("net.mat"), matrix).unwrap();
    let path = dir.join("net.toml");
    fs::write(&path, format!("matrix = \"net.mat\"\n{body}")).unwrap();
    RunConfig::load(&path).unwrap()
}

#[test]
fn golden_files_match_computed_lattice() {
    let computed = load_inputs(&RunConfig::load(&data("diamond.toml")).unwrap()).unwrap();
    let supplied = load_inputs(&RunConfig::load(&data("diamond_files.toml")).unwrap()).unwrap();
    assert!(supplied.notices.is_empty(), "{:?}", supplied.notices);
    assert_eq!(strip_comments(&read_file(&data("diamond.subspaces")).unwrap()), format_subspaces(computed.lattice.subspaces()));
    assert_eq!(strip_comments(&read_file(&data("diamond.lattice")).unwrap()), format_lattice(&computed.lattice));
    assert_eq!(format_lattice(&supplied.lattice), format_lattice(&computed.lattice));
    assert_eq!(supplied.lattice.orbits(), computed.lattice.orbits());
    assert_eq!(supplied.group.order(), computed.group.order());
}

#[test]
fn record_round_trips_through_json() {
    let cfg = RunConfig::load(&data("diamond.toml")).unwrap();
    let (_, _, record) = run_config(&cfg);
    let text = record.to_json();
    let back = ForestRecord::from_json(&text).unwrap();
    assert_eq!(back, record);
    assert_eq!(back.to_json(), text);

    // The echoed configuration reproduces the run.
    let mut echoed = RunConfig::parse(&back.config.as_ref().unwrap().to_toml()).unwrap();
    echoed.base_dir = cfg.base_dir.clone();
    assert_eq!(echoed, cfg);
    assert_eq!(run_config(&echoed).2.to_json(), text);
}

#[test]
fn verify_accepts_a_fresh_run_and_rejects_tampering() {
    let cfg = RunConfig::load(&data("diamond.toml")).unwrap();
    let (_, forest, mut record) = run_config(&cfg);
    let report = verify_record(&record).unwrap();
    assert!(report.ok(), "{:?}", report.violations);
    assert_eq!(report.events_checked, forest.events.len());
    assert_eq!(report.points_checked, forest.branches.iter().map(|b| b.points.len()).sum::<usize>());
    assert!(report.max_residual <= 1e-8);

    record.branches[1].points[3].x[0] += 1e-3;
    let report = verify_record(&record).unwrap();
    assert!(!report.ok());
    assert!(report.violations.iter().any(|v| v.contains("point 3")));
}

#[test]
fn record_rejects_other_formats() {
    assert!(matches!(ForestRecord::from_json("{}"), Err(IoError::Record(_))));
    let cfg = RunConfig::load(&data("pitchfork.toml")).unwrap();
    let text = run_config(&cfg).2.to_json().replace("netbif-forest", "other");
    assert!(matches!(ForestRecord::from_json(&text), Err(IoError::Record(_))));
}

#[test]
fn non_invariant_subspace_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.subspaces"), "W0 trivial 0 ;\nWX synchrony 2 ; 1 0 | 1 0 | 0 1 | 0 1\n").unwrap();
    let cfg = write_config(
        dir.path(),
        &fs::read_to_string(data("diamond.mat")).unwrap(),
        "subspaces = \"bad.subspaces\"\ns_min = -1.0\ns_max = 1.0\n[dynamics]\nfamily = \"cubic_soft\"\n",
    );
    match load_inputs(&cfg) {
        Err(Error::Io(IoError::Validation(msg))) => assert!(msg.contains("WX"), "{msg}"),
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn malformed_subspace_lines_report_positions() {
    match parse_subspaces("W1 synchrony 1 ; 1 | 1\n", "f", 3) {
        Err(IoError::Parse { line, .. }) => assert_eq!(line, 1),
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse_subspaces("W1 synchrony 1 ; 1 | -1\n", "f", 2), Err(IoError::Validation(_))));
    assert!(matches!(parse_subspaces("\n# c\nW1 blob 1 ; 1\n", "f", 1), Err(IoError::Parse { line: 3, .. })));
}

#[test]
fn one_cell_zero_matrix() {
    let m = parse_matrix(&read_file(&data("one_cell.mat")).unwrap(), "one_cell.mat").unwrap();
    assert_eq!((m.nrows(), m.ncols()), (1, 1));
    assert!(m.is_zero());
}

#[test]
fn svg_marks_every_event() {
    let cfg = RunConfig::load(&data("diamond.toml")).unwrap();
    let (_, forest, record) = run_config(&cfg);
    let svg = render_svg(&record, &record.functional);
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert_eq!(svg.matches("<circle").count(), forest.events.len());
    assert_eq!(svg.matches("<polyline").count(), forest.branches.len());
    for b in &forest.branches {
        assert!(svg.contains(&format!("id=\"{}\"", b.id)));
    }
}

#[test]
fn svg_without_events_has_no_markers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &fs::read_to_string(data("diamond.mat")).unwrap(),
        "s_min = -3.0\ns_max = -1.5\n[dynamics]\nfamily = \"cubic_soft\"\n",
    );
    let (_, forest, record) = run_config(&cfg);
    assert!(forest.events.is_empty());
    assert_eq!(forest.branches.len(), 1);
    let svg = render_svg(&record, &record.functional);
    assert_eq!(svg.matches("<circle").count(), 0);
    assert_eq!(svg.matches("<polyline").count(), 1);
}

#[test]
fn csv_columns_follow_the_record() {
    let cfg = RunConfig::load(&data("diamond.toml")).unwrap();
    let (_, _, record) = run_config(&cfg);
    let b = &record.branches[0];
    let text = branch_csv(b, &record.functional);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[0], "s");
    assert_eq!(header.len(), 1 + b.points[0].y.len() + 4 + 2 + b.signature_ids.len());
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), b.points.len());
    for (row, p) in rows.iter().zip(&b.points) {
        assert_eq!(row[0], p.s);
        let x = DVector::from_column_slice(&p.x);
        let cx: f64 = record.functional.iter().zip(&p.x).map(|(c, v)| c * v).sum();
        let k = 1 + p.y.len() + 4;
        assert_eq!(row[k], cx);
        assert_eq!(row[k + 1], x.norm());
    }
}

#[test]
fn fourth_cell_functional_separates_the_two_synchrony_pair_branches() {
    let cfg = RunConfig::load(&data("diamond_files.toml")).unwrap();
    let (inputs, forest, _) = run_config(&cfg);
    let w6 = inputs.lattice.get(find_pattern(&inputs.lattice, "a b a b")).id.clone();
    let branches: Vec<_> = forest.branches.iter().filter(|b| b.subspace == w6).collect();
    assert_eq!(branches.len(), 2);
    let near = |b: &netbif::bifurcation::Branch| {
        let p = b.points.iter().min_by(|p, q| (p.s + 2.5).abs().total_cmp(&(q.s + 2.5).abs())).unwrap();
        assert!((p.s + 2.5).abs() < 0.1);
        (p.x[3].abs(), p.x.mean().abs())
    };
    let (e4a, mean_a) = near(branches[0]);
    let (e4b, mean_b) = near(branches[1]);
    assert!((e4a - e4b).abs() > 0.3, "{e4a} {e4b}");
    assert!((mean_a - mean_b).abs() < 0.05, "{mean_a} {mean_b}");
}
