use assert_cmd::Command;
use predicates::prelude::*;

fn plnc() -> Command {
    Command::cargo_bin("plnc").unwrap()
}

fn fixtures(dir: &str) -> String {
    format!("{}/../../fixtures/{dir}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn count_qpsk_two_by_two() {
    plnc()
        .args(["count", "--m", "4", "--na", "2", "--nb", "2"])
        .assert()
        .success()
        .stdout("nonremovable=28 removable=1456\n");
    plnc()
        .args(["count", "--m", "4", "--na", "2", "--nb", "2", "--k", "4"])
        .assert()
        .success()
        .stdout("k=4 removable=960 generators=5\n");
}

#[test]
fn verify_fixture_directories() {
    plnc()
        .args(["verify", "--maps", &fixtures("generators"), "--m", "4"])
        .assert()
        .success()
        .stdout("10 squares, all Latin, all captioned removals hold\n");
    plnc()
        .args(["verify", "--maps", &fixtures("bpsk")])
        .assert()
        .success();
}

#[test]
fn verify_reports_broken_caption() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(
        format!("{}/xor.txt", fixtures("bpsk")),
        dir.path().join("xor.txt"),
    )
    .unwrap();
    // the XOR square does not remove this subspace
    std::fs::write(dir.path().join("captions.txt"), "xor 0e:u:0,2\n").unwrap();
    plnc()
        .args(["verify", "--maps", dir.path().to_str().unwrap()])
        .assert()
        .code(1)
        .stderr(predicate::str::contains("xor: does not remove 0e:u:0,2"));
}

#[test]
fn exit_codes() {
    plnc().arg("bogus").assert().code(2);
    plnc()
        .args(["count", "--m", "3"])
        .assert()
        .code(1)
        .stderr(predicate::str::starts_with("error:"));
    plnc()
        .args(["simulate", "--snr", "5:0:10", "--scheme", "xor"])
        .assert()
        .code(1);
    plnc()
        .args(["simulate", "--scheme", "best"])
        .assert()
        .code(2);
    plnc().args(["verify"]).assert().code(2);
}

#[test]
fn xor_output_parses_back() {
    let out = plnc()
        .args(["xor", "--m", "2", "--n", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("2 2 2 4\n"));
    assert!(text.contains("# removes 12 subspaces"));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.txt");
    std::fs::write(&path, &text).unwrap();
    plnc()
        .args([
            "transform",
            "--input",
            path.to_str().unwrap(),
            "--transpose",
        ])
        .assert()
        .success()
        .stdout(predicate::str::starts_with("2 2 2 4\n0 1 2 3\n"));
    plnc()
        .args([
            "transform",
            "--input",
            path.to_str().unwrap(),
            "--transpose",
            "--extract",
            "1",
            "2",
        ])
        .assert()
        .code(2);
}

#[test]
fn simulate_is_seeded_and_pivots() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &str| {
        vec![
            "simulate",
            "--m",
            "2",
            "--na",
            "1",
            "--nb",
            "1",
            "--nr",
            "1",
            "--snr",
            "0:10:10",
            "--seed",
            "3",
            "--trials",
            "4096",
            "--min-errors",
            "10",
            "--out",
            out,
        ]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>()
    };
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    plnc().args(args(a.to_str().unwrap())).assert().success();
    let mut seq = args(b.to_str().unwrap());
    seq.push("--sequential".into());
    plnc().args(seq).assert().success();
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("scheme,snr_db,trials,bit_errors,ber,ci95\nadaptive,0,"));
    plnc()
        .args([
            "plotdata",
            "--input",
            a.to_str().unwrap(),
            "--scheme",
            "xor",
        ])
        .assert()
        .success()
        .stdout(predicate::str::starts_with("snr_db,xor,xor_ci95\n0,"));
}

#[test]
fn genmaps_then_simulate_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let lib = dir.path().join("bpsk22.maplib");
    plnc()
        .args([
            "genmaps",
            "--m",
            "2",
            "--na",
            "2",
            "--nb",
            "2",
            "--out",
            lib.to_str().unwrap(),
        ])
        .assert()
        .success()
        .stdout(predicate::str::ends_with("covered=32\n"));
    plnc()
        .args(["verify", "--lib", lib.to_str().unwrap(), "--m", "2"])
        .assert()
        .success();
    plnc()
        .args([
            "simulate",
            "--m",
            "2",
            "--na",
            "2",
            "--nb",
            "2",
            "--nr",
            "2",
            "--snr",
            "60",
            "--scheme",
            "adaptive",
            "--trials",
            "2048",
            "--lib",
            lib.to_str().unwrap(),
        ])
        .assert()
        .success()
        .stdout(predicate::str::contains("adaptive,60,2048,0,"));
}
