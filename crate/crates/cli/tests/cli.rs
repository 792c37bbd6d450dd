use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use sha2::{Digest, Sha256};
use tempfile::TempDir;

struct Run {
    code: i32,
    dir: PathBuf,
    stderr: String,
}

impl Run {
    fn manifest(&self) -> Value {
        serde_json::from_str(&std::fs::read_to_string(self.dir.join("manifest.json")).unwrap()).unwrap()
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&std::fs::read_to_string(self.dir.join(name)).unwrap()).unwrap()
    }

    /// `(file, sha256)` pairs recorded in the manifest.
    fn hashes(&self) -> Vec<(String, String)> {
        self.manifest()["outputs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|o| (o["file"].as_str().unwrap().to_string(), o["sha256"].as_str().unwrap().to_string()))
            .collect()
    }
}

fn ncna(out: &Path, args: &[&str]) -> Run {
    let output = Command::new(env!("CARGO_BIN_EXE_ncna"))
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--quiet")
        .output()
        .expect("binary runs");
    Run { code: output.status.code().unwrap_or(-1), dir: out.to_path_buf(), stderr: String::from_utf8_lossy(&output.stderr).into() }
}

#[test]
fn manifest_hashes_match_written_files() {
    let tmp = TempDir::new().unwrap();
    let run = ncna(&tmp.path().join("synth"), &["synth", "--gate", "S"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let m = run.manifest();
    assert_eq!(m["status"], "ok");
    assert_eq!(m["command"], "synth");
    let hashes = run.hashes();
    assert!(hashes.iter().any(|(f, _)| f == "schedule.json"));
    for (file, sha) in hashes {
        let bytes = std::fs::read(run.dir.join(&file)).unwrap();
        assert_eq!(format!("{:x}", Sha256::digest(&bytes)), sha, "{file}");
    }
    let report = run.json("synth_report.json");
    assert!((report["half_area_over_pi"].as_f64().unwrap() - 0.6).abs() < 1e-3);
}

#[test]
fn equal_config_and_seed_give_equal_files() {
    let tmp = TempDir::new().unwrap();
    for args in [vec!["bell", "--shots", "10000", "--seed", "11"], vec!["rb", "--mode", "interleaved", "--gate", "H", "--epsilon", "0.05"]] {
        let a = ncna(&tmp.path().join("a"), &args);
        let b = ncna(&tmp.path().join("b"), &args);
        assert_eq!(a.code, 0, "{}", a.stderr);
        assert_eq!(a.hashes(), b.hashes(), "{args:?}");
        assert_eq!(a.manifest()["config_sha256"], b.manifest()["config_sha256"]);
    }
    let c = ncna(&tmp.path().join("c"), &["bell", "--shots", "10000", "--seed", "12"]);
    let a = ncna(&tmp.path().join("a"), &["bell", "--shots", "10000", "--seed", "11"]);
    assert_ne!(a.hashes(), c.hashes());
}

#[test]
fn echoed_config_reproduces_the_run() {
    let tmp = TempDir::new().unwrap();
    let first = ncna(&tmp.path().join("first"), &["evolve", "--gate", "custom", "--chi1", "30deg", "--xi1", "0", "--xi2", "0.75pi", "--gamma-prime", "0.4", "--epsilon", "0.03", "--init", "+i"]);
    assert_eq!(first.code, 0, "{}", first.stderr);
    let echo = first.manifest()["config"].as_str().unwrap().to_string();
    let cfg = tmp.path().join("echo.toml");
    std::fs::write(&cfg, &echo).unwrap();
    let second = ncna(&tmp.path().join("second"), &["--config", cfg.to_str().unwrap(), "evolve", "--init", "+i"]);
    assert_eq!(second.code, 0, "{}", second.stderr);
    assert_eq!(second.manifest()["config"].as_str().unwrap(), echo);
    assert_eq!(first.hashes(), second.hashes());
}

#[test]
fn exit_codes_follow_the_failure_class() {
    let tmp = TempDir::new().unwrap();

    let bad_gate = ncna(&tmp.path().join("bad_gate"), &["synth", "--gate", "Q"]);
    assert_eq!(bad_gate.code, 2);
    assert_eq!(bad_gate.manifest()["status"], "failed");

    let cfg = tmp.path().join("unknown.toml");
    std::fs::write(&cfg, "seed = 1\n[rb]\nsequence = 4\n").unwrap();
    let unknown = ncna(&tmp.path().join("unknown"), &["--config", cfg.to_str().unwrap(), "synth"]);
    assert_eq!(unknown.code, 2, "{}", unknown.stderr);

    let cfg = tmp.path().join("weights.toml");
    std::fs::write(&cfg, "[bell]\nweights = [3.0, 2.0, 1.0, 0.0]\n").unwrap();
    let rank = ncna(&tmp.path().join("rank"), &["--config", cfg.to_str().unwrap(), "bell"]);
    assert_eq!(rank.code, 3, "{}", rank.stderr);
    assert_eq!(rank.manifest()["status"], "failed");

    let planted = ncna(&tmp.path().join("planted"), &["rb", "--planted"]);
    assert_eq!(planted.code, 0, "{}", planted.stderr);
}

#[test]
fn ordering_check_reports_violations_with_exit_four() {
    let tmp = TempDir::new().unwrap();
    // The ε axis holds the ordering; the δ axis on the default Gaussian
    // envelope does not for every gate.
    let eps = ncna(&tmp.path().join("eps"), &["sweep", "--axis", "epsilon", "--gates", "S", "--grid", "-0.1,0,0.1", "--check-ordering"]);
    assert_eq!(eps.code, 0, "{}", eps.stderr);
    let delta = ncna(&tmp.path().join("delta"), &["sweep", "--axis", "delta", "--gates", "H", "--grid", "-0.1,0,0.1", "--check-ordering"]);
    assert_eq!(delta.code, 4, "{}", delta.stderr);
    assert_eq!(delta.manifest()["status"], "check-failed");
    assert!(delta.dir.join("sweep_delta.csv").exists());
}

#[test]
fn rb_and_sweep_agree_on_a_shared_point() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("shared.toml");
    std::fs::write(
        &cfg,
        "seed = 5\n[rb]\nlengths = [1, 4, 16]\nsequences = 6\n[sweep]\nlengths = [1, 4, 16]\nsequences = 6\nkinds = [\"geometric\"]\n",
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let rb = ncna(&tmp.path().join("rb"), &["--config", c, "rb", "--mode", "interleaved", "--gate", "S", "--epsilon", "0.05"]);
    assert_eq!(rb.code, 0, "{}", rb.stderr);
    let sweep = ncna(&tmp.path().join("sweep"), &["--config", c, "sweep", "--axis", "epsilon", "--gates", "S", "--grid", "0.05"]);
    assert_eq!(sweep.code, 0, "{}", sweep.stderr);
    let rb_f = rb.json("rb_fit.json")["interleaved_mean_F"].as_f64().unwrap();
    let csv = std::fs::read_to_string(sweep.dir.join("sweep_epsilon.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "mean_F").unwrap();
    let kind = header.iter().position(|h| *h == "kind").unwrap();
    let row: Vec<&str> = lines.map(|l| l.split(',').collect::<Vec<_>>()).find(|r| r[kind] == "geometric").unwrap();
    let sweep_f: f64 = row[col].parse().unwrap();
    assert!((rb_f - sweep_f).abs() < 1e-12, "rb {rb_f} vs sweep {sweep_f}");
    assert!(rb_f < 1.0);
}

#[test]
fn selftest_passes_and_lists_every_check() {
    let tmp = TempDir::new().unwrap();
    let run = ncna(&tmp.path().join("selftest"), &["selftest"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let checks = run.json("selftest.json");
    let checks = checks.as_array().unwrap();
    assert!(checks.len() >= 20);
    assert!(checks.iter().all(|c| c["pass"] == true));
}
