use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nameguard(data: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nameguard"))
        .arg("--data")
        .arg(data)
        .args(args)
        .env_remove("NAMEGUARD_DATA")
        .env_remove("NAMEGUARD_WEBHOOK")
        .output()
        .expect("spawn nameguard")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_accepts_clean_name_on_empty_dir() {
    let dir = tempfile::tempdir().unwrap();
    let o = nameguard(dir.path(), &["verify", "Ivan.Petrenko"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "accept\n");
}

#[test]
fn verify_format_violation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = nameguard(dir.path(), &["verify", "ivan petrenko"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("require_correction format_violation\n"));
}

#[test]
fn verify_prohibited_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(nameguard(dir.path(), &["db", "add-prohibited", "spam"]).status.code(), Some(0));
    let o = nameguard(dir.path(), &["verify", "Spam.Lord", "--json"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(
        stdout(&o).trim(),
        r#"{"decision":"reject","reasons":[{"code":"prohibited_content","detail":"spam@0"}]}"#
    );
}

#[test]
fn batch_prints_one_tsv_line_per_name() {
    let dir = tempfile::tempdir().unwrap();
    let names = dir.path().join("names.txt");
    fs::write(&names, "Ivan.Petrenko\nanna shevchenko\nO'Neil.Smith\n").unwrap();
    let o = nameguard(dir.path(), &["batch", names.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<Vec<&str>> = out.lines().map(|l| l.split('\t').collect()).collect();
    assert_eq!(lines.len(), 3);
    assert!(lines.iter().all(|l| l.len() == 4));
    assert_eq!(lines[0][..3], ["Ivan.Petrenko", "accept", ""]);
    assert_eq!(lines[1][..3], ["anna shevchenko", "require_correction", "format_violation"]);
    assert_eq!(lines[2][1], "accept");
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = nameguard(dir.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = nameguard(dir.path(), &["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verify"));
}

#[test]
fn missing_batch_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = nameguard(dir.path(), &["batch", dir.path().join("nope.txt").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(74));
}

#[test]
fn malformed_store_names_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("registry.tsv"), "# header\n1\tIvan.Petrenko\n").unwrap();
    let o = nameguard(dir.path(), &["verify", "Ivan.Petrenko"]);
    assert_eq!(o.status.code(), Some(65));
    assert!(String::from_utf8_lossy(&o.stderr).contains("registry.tsv: line 2: expected 5 fields"));
}

#[test]
fn data_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_nameguard"))
        .args(["db", "add-blacklist", "Troll.King"])
        .env("NAMEGUARD_DATA", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(fs::read_to_string(dir.path().join("blacklist.tsv")).unwrap().contains("troll.king\t4"));
}

#[test]
fn register_sanction_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for name in ["Ivan.Petrenko", "Anna.Shevchenko", "Troll.King"] {
        let o = nameguard(d, &["register", name, "--email", "x@example.org"]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    }
    // A duplicate is refused with the correction exit code.
    assert_eq!(nameguard(d, &["register", "1van.Petrenko"]).status.code(), Some(1));

    assert_eq!(nameguard(d, &["status", "1", "verified"]).status.code(), Some(0));
    assert_eq!(nameguard(d, &["status", "2", "corrected_kept_name"]).status.code(), Some(0));
    let o = nameguard(d, &["sanction", "3", "4", "--rule", "prohibited_content"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(nameguard(d, &["verify", "Troll.King"]).status.code(), Some(2));

    let o = nameguard(d, &["report", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["total"], 3);
    assert_eq!(v["counts"]["blocked"], 1);
    assert_eq!(v["percentages"]["reliable"], 33);
    assert_eq!(v["efficiency"], 1.0);

    let o = nameguard(d, &["accounts", "--status", "blocked"]);
    assert_eq!(stdout(&o), "3\tTroll.King\tblocked\t1\n");
}

#[test]
fn scan_reports_new_term_hits() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(nameguard(d, &["register", "John.Spamer"]).status.code(), Some(0));
    assert_eq!(nameguard(d, &["db", "add-prohibited", "spam", "--severity", "flag"]).status.code(), Some(0));
    let o = nameguard(d, &["scan", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["counts"]["prohibited_content"], 1);
    assert_eq!(v["flags"]["prohibited_content"][0]["account_id"], 1);
}

#[test]
fn fold_tables_can_be_replaced() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(nameguard(d, &["db", "add-blacklist", "john.smith"]).status.code(), Some(0));
    // Built-in table folds `0` to `o`, so the folded key hits the blacklist.
    assert_eq!(nameguard(d, &["verify", "J0hn.Smith"]).status.code(), Some(2));

    let leet = d.join("leet.tsv");
    fs::write(&leet, "# only the one\n31\ti\n").unwrap();
    let o = nameguard(d, &["--leet", leet.to_str().unwrap(), "verify", "J0hn.Smith"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));

    fs::write(&leet, "zz\to\n").unwrap();
    let o = nameguard(d, &["--leet", leet.to_str().unwrap(), "verify", "A.B"]);
    assert_eq!(o.status.code(), Some(65));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
}
