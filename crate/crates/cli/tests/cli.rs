use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(format!("{name}.cfg"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_z2cover")).args(args).output().expect("binary runs")
}

fn run_on(cmd: &str, path: &PathBuf, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--input", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn temp_config(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn invariants_of_two_lines_and_a_cubic() {
    let o = run_on("invariants", &fixture("p53"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("chi=1\n") && out.contains("k2=1\n") && out.contains("bicanonical=-H\n"), "{out}");
    let o = run_on("invariants", &fixture("p53"), &["--format", "tsv"]);
    assert!(stdout(&o).contains("k2\t1\n"));
}

#[test]
fn classify_conic_and_triangle() {
    let o = run_on("classify", &fixture("p57"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "Prop5.7/2.G22\n");
}

#[test]
fn classify_two_lines_is_not_totally_ramified() {
    let f = temp_config("[cover]\nr = 2\n[components]\nA = degree 1\nB = degree 1\n[branch]\n11 = A + B\n");
    let o = run_on("classify", &f.path().to_path_buf(), &[]);
    assert_eq!(o.status.code(), Some(6));
    let err = stderr(&o);
    assert!(err.contains("E-NOT-TOTALLY-RAMIFIED") && err.contains("not totally ramified"), "{err}");
}

#[test]
fn validate_reports_building_data() {
    let o = run_on("validate", &fixture("p59"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("status=valid\nr=4\n"), "{out}");
    assert_eq!(out.matches("=2H\n").count(), 5);
    assert_eq!(out.matches("=H\n").count(), 10);
}

#[test]
fn validate_catches_parity() {
    let f = temp_config("[cover]\nr = 2\n[components]\nA = degree 1\nB = degree 2\nC = degree 1\n[branch]\n10 = A\n01 = B\n11 = C\n");
    let o = run_on("validate", &f.path().to_path_buf(), &[]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("E-PARITY"));
}

#[test]
fn positioned_parse_errors() {
    let f = temp_config("[cover]\nr = 2\n[components]\nA = degree 1\n[branch]\n112 = A\n");
    let o = run_on("validate", &f.path().to_path_buf(), &[]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("E-BAD-ELEMENT") && err.contains("6:1") && err.contains("non-binary group element"), "{err}");
}

#[test]
fn missing_file() {
    let o = run(&["classify", "--input", "/nonexistent/x.cfg"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("E-IO"));
}

#[test]
fn resolve_prints_trail_and_a_parsable_model() {
    let o = run_on("resolve", &fixture("p51"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("# rounds: 2\n"), "{out}");
    let f = temp_config(&out);
    let again = run_on("resolve", &f.path().to_path_buf(), &[]);
    assert!(stdout(&again).starts_with("# rounds: 0\n"));
}

#[test]
fn reduce_keeps_the_label() {
    let o = run_on("reduce", &fixture("p410"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("# moves: 1\n"), "{out}");
    let f = temp_config(&out);
    assert_eq!(stdout(&run_on("classify", &f.path().to_path_buf(), &[])), "Prop4.10/P1s.222\n");
}

#[test]
fn normalize_outputs_a_document() {
    let f = temp_config("[cover]\nr = 2\n[components]\nA = degree 1\nB = degree 1\nC = degree 1\n[branch]\n10 = A + 2*C\n01 = B\n11 = C\n");
    let o = run_on("normalize", &f.path().to_path_buf(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "[cover]\nr = 2\n\n[components]\nA = degree 1\nB = degree 1\nC = degree 1\n\n[branch]\n01 = B\n10 = A\n11 = C\n");
}

#[test]
fn census_matches_golden_and_refuses_large_bounds() {
    let o = run(&["census", "-r", "2", "--max-degree", "3", "--format", "tsv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let golden = include_str!("../../core/tests/golden/census_r2_d3.tsv");
    assert_eq!(stdout(&o), golden);
    let o = run(&["census", "-r", "2", "--max-degree", "9"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("E-BOUNDS"));
    let text = stdout(&run(&["census", "-r", "2", "--max-degree", "1"]));
    assert!(text.starts_with("census r=2 max_degree=1 rows=2\n"), "{text}");
}
