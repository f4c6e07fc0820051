use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
name = "small"
seed = 4
snr_db = 25.0

[radar]
frequency_step = 31746031.746031746
rotation_span = 3.2

[waveform]
length = 256
block = 128
overlap = 32

[recovery.rm]
k_max = 8

[[emitters]]
f_lo = 13.38e9
f_hi = 13.62e9
depth_db = 40

[[emitters]]
f_lo = 14.53e9
f_hi = 14.65e9
depth_db = 30
active_deg = [1.0, 3.2]
"#;

fn cisar(args: &[&str], dir: &Path) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_cisar"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn cisar");
    out
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = cisar(args, dir);
    assert!(
        out.status.success(),
        "cisar {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn same(a: &Path, b: &Path) {
    let x = std::fs::read(a).unwrap_or_else(|e| panic!("{}: {e}", a.display()));
    let y = std::fs::read(b).unwrap_or_else(|e| panic!("{}: {e}", b.display()));
    assert!(x == y, "{} and {} differ", a.display(), b.display());
}

#[test]
fn staged_commands_match_the_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(d.join("s.toml"), SMALL).unwrap();
    let table = ok(
        &[
            "run", "--config", "s.toml", "--case", "gt", "--case", "n-cs", "--out", "run",
        ],
        d,
    );
    assert_eq!(table.lines().count(), 3);
    assert!(table.lines().nth(1).unwrap().starts_with("small,gt,"));

    ok(&["design", "--config", "s.toml", "--out", "st"], d);
    same(&d.join("st/waveform.bin"), &d.join("run/n-cs/waveform.bin"));

    ok(
        &[
            "analyze",
            "--config",
            "s.toml",
            "--waveform",
            "st/waveform.bin",
            "--out",
            "st",
        ],
        d,
    );
    same(&d.join("st/psd.csv"), &d.join("run/n-cs/psd.csv"));
    same(&d.join("st/af.csv"), &d.join("run/n-cs/af.csv"));

    ok(
        &[
            "simulate",
            "--config",
            "s.toml",
            "--case",
            "n-cs",
            "--waveform",
            "st/waveform.bin",
            "--out",
            "st/ncs",
        ],
        d,
    );
    same(
        &d.join("st/ncs/data_masked.bin"),
        &d.join("run/n-cs/data_masked.bin"),
    );
    same(&d.join("st/ncs/mask.json"), &d.join("run/n-cs/mask.json"));
    ok(
        &[
            "recover",
            "--config",
            "s.toml",
            "--method",
            "sl0",
            "--data",
            "st/ncs/data_masked.bin",
            "--mask",
            "st/ncs/mask.json",
            "--out",
            "st/ncs",
        ],
        d,
    );
    same(&d.join("st/ncs/image.bin"), &d.join("run/n-cs/image.bin"));
    same(&d.join("st/ncs/trace.csv"), &d.join("run/n-cs/trace.csv"));
    same(&d.join("st/ncs/image.png"), &d.join("run/n-cs/image.png"));

    ok(
        &[
            "simulate",
            "--config",
            "s.toml",
            "--case",
            "gt",
            "--waveform",
            "st/reference.bin",
            "--out",
            "st/gt",
        ],
        d,
    );
    ok(&["image", "--data", "st/gt/data_masked.bin", "--out", "st/gt"], d);
    same(&d.join("st/gt/image.bin"), &d.join("run/gt/image.bin"));

    let row = ok(
        &[
            "metrics",
            "--ref",
            "st/gt/image.bin",
            "--in",
            "st/ncs/image.bin",
            "--scenario",
            "small",
            "--case",
            "n-cs",
        ],
        d,
    );
    let from_run = std::fs::read_to_string(d.join("run/n-cs/metrics.csv")).unwrap();
    assert_eq!(row.trim(), from_run.lines().nth(1).unwrap());
}

#[test]
fn rerun_from_manifest_is_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(d.join("s.toml"), SMALL).unwrap();
    ok(
        &[
            "run",
            "--config",
            "s.toml",
            "--case",
            "n-rm",
            "--seed",
            "11",
            "--out",
            "a",
            "--threads",
            "1",
        ],
        d,
    );
    ok(
        &[
            "run",
            "--config",
            "a/n-rm/manifest.json",
            "--case",
            "n-rm",
            "--out",
            "b",
            "--threads",
            "1",
        ],
        d,
    );
    for f in [
        "waveform.bin",
        "data_raw.bin",
        "data_masked.bin",
        "data_recovered.bin",
        "image.bin",
        "trace.csv",
        "metrics.csv",
    ] {
        same(&d.join("a/n-rm").join(f), &d.join("b/n-rm").join(f));
    }
    let manifest = std::fs::read_to_string(d.join("b/n-rm/manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 11"));
    assert!(manifest.contains("\"status\": \"ok\""));
}

#[test]
fn metrics_of_identical_images() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(d.join("s.toml"), SMALL).unwrap();
    ok(&["run", "--config", "s.toml", "--case", "gt", "--out", "r"], d);
    let row = ok(
        &[
            "metrics",
            "--ref",
            "r/gt/image.bin",
            "--in",
            "r/gt/image.bin",
            "--header",
        ],
        d,
    );
    let fields: Vec<&str> = row.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(fields[3].parse::<f64>().unwrap(), 1.0);
    assert_eq!(fields[4].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn failures_exit_nonzero_with_context() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(d.join("bad.toml"), SMALL.replace("block = 128", "block = 512")).unwrap();
    let out = cisar(&["run", "--config", "bad.toml", "--out", "x"], d);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("stage `config`") && err.contains("block 512"),
        "{err}"
    );

    std::fs::write(
        d.join("whole.toml"),
        format!("{SMALL}\n[[emitters]]\nf_lo = 13e9\nf_hi = 15e9\ndepth_db = 3\n"),
    )
    .unwrap();
    let out = cisar(
        &["run", "--config", "whole.toml", "--case", "notched", "--out", "w"],
        d,
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("stage `"));
    assert!(d.join("w/notched/manifest.json").exists() || !d.join("w/notched").exists());

    let out = cisar(&["metrics", "--ref", "missing.bin", "--in", "missing.bin"], d);
    assert!(!out.status.success());
    let out = cisar(&["run", "--case", "bogus"], d);
    assert!(!out.status.success());
}
