use std::path::PathBuf;
use std::process::{Command, Output};

use modcurves::ingest::source::bundled_records;

fn modcurves(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modcurves")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch_file(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("modcurves-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn zeta_of_a_sextic() {
    let o = modcurves(&["zeta", "--curve", "x^6-26*x^3-27", "--p", "5"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next(), Some("t^4 - 2*t^2 + 25"));
}

#[test]
fn fit_a_table_row() {
    let o = modcurves(&["fit", "--row", "C_28"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next(), Some("y^2 = x^5 - 4*x^4 - 13*x^3 - 9*x^2 - x"));
}

#[test]
fn reproduce_all_rows() {
    let o = modcurves(&["reproduce"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("149/149 rows reproduced"));
}

#[test]
fn exit_codes() {
    assert_eq!(modcurves(&["fit"]).status.code(), Some(2));
    assert_eq!(modcurves(&["fit", "--row", "C_1"]).status.code(), Some(3));
    assert_eq!(modcurves(&["zeta", "--curve", "x^6-1", "--p", "3"]).status.code(), Some(3));
    assert_eq!(modcurves(&["collect", "--d", "41", "--twist", "none", "--n0", "2"]).status.code(), Some(3));
    let missing = std::env::temp_dir().join("modcurves-no-such-dir");
    let rec = scratch_file("f63.tsv", &format!("{}\n", bundled_records().into_iter().find(|r| r.level == 63).unwrap()));
    let o = modcurves(&["certify", "--newform", rec.to_str().unwrap(), "--coeffs", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn certify_needs_more_coefficients() {
    let rec = bundled_records().into_iter().find(|r| r.level == 63).unwrap();
    let path = scratch_file("f63-bundled.tsv", &format!("{rec}\n"));
    let o = modcurves(&["certify", "--newform", path.to_str().unwrap(), "--coeffs", "bundled"]);
    assert_eq!(o.status.code(), Some(5));
    let out = stdout(&o);
    assert!(out.starts_with("certificate\t"), "{out}");
    assert!(out.contains("verdict=indeterminate"));
}

#[test]
fn collect_then_sieve() {
    let o = modcurves(&["collect", "--d", "3", "--twist", "none", "--n0", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 7);
    assert!(text.contains("P=-27,0,0,-26,0,0,1"));
    let input = scratch_file("d3.txt", &text);
    let surv = input.with_file_name("d3-survivors.txt");
    let o = modcurves(&["sieve", "--in", input.to_str().unwrap(), "--branch", "no_twist", "--survivors", surv.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("no_twist branch: 7 candidates"));
    let kept = std::fs::read_to_string(&surv).unwrap();
    assert!(kept.lines().all(|l| l.starts_with("solution\t")));
}
