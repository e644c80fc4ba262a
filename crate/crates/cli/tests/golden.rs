//! Runs every case in `tests/golden/cases.txt` in text and JSON mode and
//! compares with the stored output. Set `WITT_BLESS=1` to rewrite the files.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn cases() -> Vec<(String, Vec<String>)> {
    let text = fs::read_to_string(golden_dir().join("cases.txt")).unwrap();
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let (name, args) = l.split_once('|').expect("name | args");
            (name.trim().to_string(), args.split_whitespace().map(String::from).collect())
        })
        .collect()
}

fn run(args: &[String]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_witt")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn golden_outputs() {
    let bless = std::env::var_os("WITT_BLESS").is_some();
    let mut mismatches = Vec::new();
    for (name, args) in cases() {
        for (ext, json) in [("txt", false), ("json", true)] {
            let mut full = args.clone();
            if json {
                full.insert(0, "--json".into());
            }
            let (code, stdout) = run(&full);
            assert_eq!(code, 0, "{name}: exit {code}\n{stdout}");
            let path = golden_dir().join(format!("{name}.{ext}"));
            if bless {
                fs::write(&path, &stdout).unwrap();
            } else {
                let expected = fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing {}", path.display()));
                if expected != stdout {
                    mismatches.push(format!("{name}.{ext}:\n--- expected\n{expected}--- actual\n{stdout}"));
                }
            }
        }
    }
    assert!(mismatches.is_empty(), "{}", mismatches.join("\n"));
}

#[test]
fn every_subcommand_has_a_case() {
    let covered: Vec<String> = cases()
        .iter()
        .map(|(_, a)| match a[0].as_str() {
            "universal" | "lambda" => format!("{} {}", a[0], a[1]),
            other => other.to_string(),
        })
        .collect();
    for cmd in [
        "universal sum", "universal prod", "universal neg", "universal witt", "universal frob",
        "universal epsilon", "universal delta", "add", "mul", "neg", "ghost", "unghost", "teich", "frob",
        "versch", "project", "lambda to", "lambda from", "lambda d", "lambda mul", "artinhasse", "phi",
        "delta", "oracle", "selfcheck",
    ] {
        assert!(covered.iter().any(|c| c == cmd), "no golden case for {cmd}");
    }
}

#[test]
fn json_is_versioned() {
    let (_, out) = run(&["--json".into(), "universal".into(), "witt".into(), "--n".into(), "3".into()]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema"], 1);
}

fn run_err(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_witt")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn domain_errors_exit_one() {
    for args in [
        &["add", "--ring", "zloc:2", "--profile", "full:2", "1/2,0", "0,0"][..],
        &["frob", "--profile", "full:2", "--n", "3", "1,1"],
        &["unghost", "--ring", "int", "--profile", "full:2", "1,2"],
        &["universal", "sum", "--n", "30"],
        &["artinhasse", "--p", "4", "--terms", "3"],
        &["add", "--profile", "full:3", "1,2", "1,2,3"],
        &["phi", "--spec", "id", "--value", "2", "--upto", "0"],
    ] {
        let (code, _, stderr) = run_err(args);
        assert_eq!(code, 1, "{args:?}: {stderr}");
        assert_eq!(stderr.lines().count(), 1, "{args:?}: {stderr}");
        assert!(stderr.starts_with("error: "));
    }
}

#[test]
fn parse_errors_exit_two() {
    for args in [
        &["add", "--ring", "zzz", "--profile", "full:2", "1,0", "0,0"][..],
        &["add", "--profile", "full:2", "1,x", "0,0"],
        &["add", "--profile", "fool:2", "1,0", "0,0"],
        &["phi", "--spec", "other", "--value", "2", "--upto", "3"],
        &["frob", "--profile", "full:2", "1,1"],
        &["nosuchcommand"],
    ] {
        let (code, _, stderr) = run_err(args);
        assert_eq!(code, 2, "{args:?}: {stderr}");
    }
}

#[test]
fn json_errors() {
    let (code, stdout, _) = run_err(&["--json", "add", "--ring", "zmod:4", "--profile", "set:1,4", "1,0", "0,0"]);
    assert_eq!(code, 1);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["error"]["kind"], "domain");
}

#[test]
fn failing_selfcheck_exits_nonzero() {
    let (code, stdout, _) = run_err(&["selfcheck", "--check", "no_such_check"]);
    assert_eq!(code, 1);
    assert!(stdout.contains("FAIL  no_such_check"));
}
