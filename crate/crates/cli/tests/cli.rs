use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cubesum_cli::appendix::{parse_rows, EMBEDDED_ROWS};
use cubesum_cli::record::{compute_record, RecordConfig, ResultRecord};
use cubesum_cli::scan::{run_scan, sibling, ScanOptions};

fn cubesum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cubesum"))
        .args(args)
        .env_remove("CUBESUM_PRECISION")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn ps(path: &Path) -> Vec<u64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| ResultRecord::from_line(l).unwrap().p)
        .collect()
}

fn scan_opts(dir: &Path, min: u64, max: u64, jobs: usize) -> ScanOptions {
    ScanOptions {
        min,
        max,
        out: dir.join("scan.jsonl"),
        jobs,
        config: RecordConfig { congruence_max: 60, ..RecordConfig::default() },
    }
}

#[test]
fn records_round_trip() {
    let cfg = RecordConfig::default();
    for p in [5u64, 113, 857] {
        let r = compute_record(p, &cfg, None).unwrap();
        let line = r.to_line();
        assert!(!line.contains('\n'));
        let back = ResultRecord::from_line(&line).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_line(), line);
    }
    let r = compute_record(5, &cfg, None).unwrap();
    assert!(r.congruence.as_ref().unwrap().all_pass);
    assert!(r.timings.is_none());
    assert!(compute_record(857, &cfg, None).unwrap().congruence.is_none());

    let timed = compute_record(11, &RecordConfig { timings: true, ..cfg.clone() }, None).unwrap();
    assert_eq!(ResultRecord::from_line(&timed.to_line()).unwrap(), timed);

    let mut v = serde_json::to_value(&r).unwrap();
    v["schema_version"] = 99.into();
    assert!(ResultRecord::from_line(&v.to_string()).is_err());
}

#[test]
fn scan_covers_the_family_below_100() {
    let dir = tempfile::tempdir().unwrap();
    let opts = scan_opts(dir.path(), 3 + 1, 100, 2);
    let s = run_scan(&opts).unwrap();
    assert_eq!(ps(&opts.out), vec![5, 11, 23, 29, 41, 47, 59, 83]);
    assert_eq!((s.primes, s.computed, s.reused), (8, 8, 0));
    assert!(!sibling(&opts.out, ".partial").exists());
    assert!(s.errors.is_empty() && s.congruence_failures.is_empty());

    // a second run reuses everything and rewrites the same bytes
    let before = fs::read(&opts.out).unwrap();
    let again = run_scan(&opts).unwrap();
    assert_eq!((again.computed, again.reused), (0, 8));
    assert_eq!(fs::read(&opts.out).unwrap(), before);
}

#[test]
fn scan_is_deterministic_across_job_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_scan(&scan_opts(a.path(), 50, 400, 1)).unwrap();
    run_scan(&scan_opts(b.path(), 50, 400, 3)).unwrap();
    let x = fs::read(a.path().join("scan.jsonl")).unwrap();
    let y = fs::read(b.path().join("scan.jsonl")).unwrap();
    assert!(!x.is_empty());
    assert_eq!(x, y);
}

#[test]
fn scan_resumes_and_quarantines() {
    let dir = tempfile::tempdir().unwrap();
    let opts = scan_opts(dir.path(), 4, 100, 1);
    run_scan(&opts).unwrap();
    let good = fs::read_to_string(&opts.out).unwrap();
    let lines: Vec<&str> = good.lines().collect();

    // drop two records, corrupt one, add an out-of-range and a foreign-seed record
    let mut foreign = ResultRecord::from_line(lines[2]).unwrap();
    foreign.seed ^= 1;
    let outside = compute_record(101, &opts.config, None).unwrap();
    let damaged = [
        lines[0].to_string(),
        lines[1][..lines[1].len() / 2].to_string(),
        foreign.to_line(),
        lines[4].to_string(),
        outside.to_line(),
        lines[6].to_string(),
    ]
    .join("\n");
    fs::write(&opts.out, damaged).unwrap();
    // a leftover partial file from an interrupted run also counts
    fs::write(sibling(&opts.out, ".partial"), format!("{}\n", lines[7])).unwrap();

    let s = run_scan(&opts).unwrap();
    assert_eq!(s.quarantined, 3);
    assert_eq!(s.reused, 4);
    assert_eq!(s.computed, 4);
    assert_eq!(fs::read_to_string(&opts.out).unwrap(), good);
    let q = fs::read_to_string(sibling(&opts.out, ".quarantine")).unwrap();
    assert_eq!(q.lines().count(), 3);
}

#[test]
fn scan_rejects_bad_ranges() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.jsonl");
    let out = out.to_str().unwrap();
    for (min, max) in [("3", "100"), ("50", "50"), ("90", "10")] {
        let o = cubesum(&["scan", "--min", min, "--max", max, "--out", out]);
        assert_eq!(o.status.code(), Some(2), "{min}..{max}");
    }
    let o = cubesum(&["scan", "--min", "4", "--max", "20", "--out", "/nonexistent/dir/x.jsonl"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scan_binary_prints_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.jsonl");
    let o = cubesum(&["scan", "--min", "4", "--max", "100", "--out", out.to_str().unwrap(), "--jobs", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(summary["primes"], 8);
    assert_eq!(summary["classes"].as_array().unwrap().len(), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("k ≥ 2"));
    assert_eq!(ps(&out), vec![5, 11, 23, 29, 41, 47, 59, 83]);
}

#[test]
fn embedded_appendix_parses() {
    let rows = parse_rows(EMBEDDED_ROWS).unwrap();
    assert_eq!(rows.len(), 52);
    assert_eq!(rows.iter().filter(|r| r.table == 2).count(), 26);
    let r113 = rows.iter().find(|r| r.p == 113).unwrap();
    assert_eq!((r113.class_group.clone(), r113.sha2_dim()), (vec![2, 2], 2));
    let r81077 = rows.iter().find(|r| r.p == 81077).unwrap();
    assert_eq!(r81077.sha2_dim(), 4);
}

#[test]
fn malformed_rows_name_their_line() {
    let text = "# comment\ntable\tp\tclass_group\tsha2\n5\t113\t2,2\t2,2\n5\t3209\t2;68\t2,2\n";
    let err = parse_rows(text).unwrap_err().to_string();
    assert!(err.contains("line 4"), "{err}");
    assert!(parse_rows("5\t113\t2,2\t2,2\n").unwrap_err().to_string().contains("line 1"));
    assert!(parse_rows("table\tp\tclass_group\tsha2\n7\t113\t2,2\t2,2\n").is_err());
    assert!(parse_rows("table\tp\tclass_group\tsha2\n5\t113\t2,2\n").unwrap_err().to_string().contains("line 2"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.tsv");
    fs::write(&path, text).unwrap();
    let o = cubesum(&["verify-appendix", "--rows", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
}

#[test]
fn verify_appendix_small_rows() {
    let o = cubesum(&["verify-appendix", "--max-p", "100"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0 rows checked, 0 mismatches"));

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rows.csv");
    let o = cubesum(&["verify-appendix", "--max-p", "3300", "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for p in ["113", "443", "857", "3209"] {
        assert!(out.contains(&format!("match p = {p}:")), "{out}");
    }
    assert!(out.contains("4 rows checked, 0 mismatches"));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("p,table,residue,"));

    // a wrong table entry is a mismatch
    let rows = dir.path().join("wrong.tsv");
    fs::write(&rows, "table\tp\tclass_group\tsha2\n5\t113\t4\t2,2\n").unwrap();
    let o = cubesum(&["verify-appendix", "--rows", rows.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("MISMATCH p = 113"));
}

#[test]
fn mislabeled_rows_are_flagged_not_failed() {
    let dir = tempfile::tempdir().unwrap();
    let rows = dir.path().join("label.tsv");
    // 443 ≡ 2 (mod 9), listed under the other table
    fs::write(&rows, "table\tp\tclass_group\tsha2\n5\t443\t2,2\t2,2\n").unwrap();
    let o = cubesum(&["verify-appendix", "--rows", rows.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("listed under p ≡ 5 but p ≡ 2"));
}

#[test]
fn per_prime_commands() {
    let o = cubesum(&["omega"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["omega"].as_str().unwrap().starts_with("3.059908"));

    let o = cubesum(&["--precision", "128", "lvalue", "--n", "10"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["algebraic_part"], "3");
    assert_eq!(v["precision_bits"], 128);

    let o = Command::new(env!("CARGO_BIN_EXE_cubesum"))
        .args(["omega"])
        .env("CUBESUM_PRECISION", "96")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["precision_bits"], 96);

    let o = cubesum(&["congruence", "--range", "4..30"]);
    assert_eq!(o.status.code(), Some(0));
    let ps: Vec<u64> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["p"].as_u64().unwrap())
        .collect();
    assert_eq!(ps, vec![5, 11, 23, 29]);

    let o = cubesum(&["classgroup", "--p", "3209"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["class_group"], serde_json::json!([2, 68]));
    assert_eq!(v["certificate"], "grh-analytic");

    let o = cubesum(&["selmer", "--p", "443"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["predicted_sha2"], "(Z/2)^2");
    assert_eq!(v["table_match"], true);
    let o = cubesum(&["selmer", "--p", "41"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["table_match"], serde_json::Value::Null);
}

#[test]
fn exit_codes() {
    assert_eq!(cubesum(&["selmer", "--p", "13"]).status.code(), Some(2));
    assert_eq!(cubesum(&["congruence", "--p", "7"]).status.code(), Some(2));
    assert_eq!(cubesum(&["congruence"]).status.code(), Some(2));
    assert_eq!(cubesum(&["congruence", "--p", "5", "--range", "4..9"]).status.code(), Some(2));
    assert_eq!(cubesum(&["lvalue", "--n", "14"]).status.code(), Some(2));
    assert_eq!(cubesum(&["classgroup", "--p", "5", "--effort", "extreme"]).status.code(), Some(2));
    assert_eq!(cubesum(&["--precision", "16", "omega"]).status.code(), Some(2));
    assert_eq!(cubesum(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cubesum(&["--help"]).status.code(), Some(0));
}
