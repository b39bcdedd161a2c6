use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn disco(args: &[&str], out_env: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_disco"));
    cmd.args(args).env_remove("DISCO_OUT");
    if let Some(dir) = out_env {
        cmd.env("DISCO_OUT", dir);
    }
    cmd.output().unwrap()
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn minimal_config_writes_one_score_and_one_listing() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("configs/minimal.json");
    let o = disco(
        &["compose", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()],
        None,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(listing(tmp.path()), ["minimal-v0.sco", "minimal-v0.txt"]);
    let score = fs::read_to_string(tmp.path().join("minimal-v0.sco")).unwrap();
    assert!(score.starts_with("; minimal "));
    assert_eq!(score.lines().filter(|l| l.starts_with("i ")).count(), 3);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("variant 0"), "{stdout}");
}

#[test]
fn same_seed_same_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("configs/demo.json");
    let run = |sub: &str| {
        let out = tmp.path().join(sub);
        let o = disco(
            &["compose", "--config", cfg.to_str().unwrap(), "--seed", "42", "--out", out.to_str().unwrap()],
            None,
        );
        assert!(o.status.success());
        listing(&out)
            .into_iter()
            .map(|f| (fs::read(out.join(&f)).unwrap(), f))
            .collect::<Vec<_>>()
    };
    assert_eq!(run("x"), run("y"));
}

#[test]
fn variants_differ() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("configs/demo.json");
    let o = disco(
        &["compose", "--config", cfg.to_str().unwrap(), "--variants", "3", "--out", tmp.path().to_str().unwrap()],
        None,
    );
    assert!(o.status.success());
    let scores: Vec<String> = (0..3)
        .map(|v| fs::read_to_string(tmp.path().join(format!("manifold-v{v}.sco"))).unwrap())
        .collect();
    assert_ne!(scores[0], scores[1]);
    assert_ne!(scores[1], scores[2]);
}

#[test]
fn output_dir_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("configs/minimal.json");
    let o = disco(&["compose", "--config", cfg.to_str().unwrap()], Some(tmp.path()));
    assert!(o.status.success());
    assert_eq!(listing(tmp.path()).len(), 2);
}

#[test]
fn format_flag_selects_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("configs/minimal.json");
    let o = disco(
        &["compose", "--config", cfg.to_str().unwrap(), "--format", "txt", "--out", tmp.path().to_str().unwrap()],
        None,
    );
    assert!(o.status.success());
    assert_eq!(listing(tmp.path()), ["minimal-v0.txt"]);
    let text = fs::read_to_string(tmp.path().join("minimal-v0.txt")).unwrap();
    assert!(text.starts_with("# minimal "));
    assert!(text.contains("  [A "), "{text}");
}

#[test]
fn errors_go_to_stderr_with_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("tests/fixtures/reference_error.json");
    let o = disco(
        &["compose", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with("error: ") && err.contains("organ"), "{err}");
    assert!(listing(tmp.path()).is_empty());
}

#[test]
fn missing_config_is_a_config_error() {
    let o = disco(&["compose", "--config", "/nonexistent/piece.json"], None);
    assert_eq!(o.status.code(), Some(2));
}
