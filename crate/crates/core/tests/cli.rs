use std::fs;
use std::process::Command;

fn dynbc(args: &[&str], dir: &std::path::Path) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_dynbc")).args(args).current_dir(dir).env_remove("DYNBC_SEED").output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn oracle_check_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(dynbc(&["verify", "--suite", "oracle-check"], dir.path()).0, 0);
    assert_eq!(dynbc(&["oracle-check"], dir.path()).0, 0);
    assert!(fs::read_to_string(dir.path().join("suite.csv")).unwrap().starts_with("id,worst_margin,pass\n"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(dynbc(&["solve", "--phi", "nonsense"], dir.path()).0, 2);
    assert_eq!(dynbc(&["rate", "--geometry", "ball", "--phi", "indicator:b=2"], dir.path()).0, 2);
    assert_eq!(dynbc(&["solve", "--eps", "0.9", "--geometry", "ball"], dir.path()).0, 2);
    assert_eq!(dynbc(&["--jobs", "0", "verify"], dir.path()).0, 2);
    assert_eq!(dynbc(&["--config", "missing.conf", "verify"], dir.path()).0, 2);
}

#[test]
fn solve_example_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["solve", "--geometry", "halfline", "--eps", "0.05", "--phi", "indicator:b=1", "--phib", "0", "--T", "0.2", "--jobs", "2"];
    let (code, stdout) = dynbc(&args, dir.path());
    assert_eq!(code, 0, "{stdout}");
    let first = fs::read(dir.path().join("solution.csv")).unwrap();
    assert_eq!(dynbc(&args, dir.path()).0, 0);
    assert_eq!(fs::read(dir.path().join("solution.csv")).unwrap(), first);
    let text = String::from_utf8(first).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.split(',').all(|c| c.split('e').next().unwrap().trim_start_matches('-').len() == 18), "{row}");
}

#[test]
fn config_file_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.conf"), "# small solve\ngeometry = ball\nphi = scaled-indicator:b=2\nphib = 1\neps = 2^-5\nT = 0.1\nnx = 3\nnt = 2\nout = result\n").unwrap();
    let (code, stdout) = dynbc(&["--config", "run.conf", "solve", "--nx", "4"], dir.path());
    assert_eq!(code, 0, "{stdout}");
    let text = fs::read_to_string(dir.path().join("result/solution.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 4 * 2);
    assert!(text.lines().nth(1).unwrap().starts_with("1.0000000000000000e0,"));
}

#[test]
fn seed_env_changes_only_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_dynbc"))
            .args(["verify", "--suite", "bounds", "--geometry", "halfline"])
            .current_dir(dir.path())
            .env("DYNBC_SEED", seed)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        String::from_utf8(out.stdout).unwrap()
    };
    assert!(run("11").contains("(seed 11)"));
    assert!(run("12").contains("(seed 12)"));
}
