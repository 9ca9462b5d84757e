use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vidsource::frames_io::{encode_png, frame_file_name, ingest_frames};
use vidsource::imaging::Frame;

const SMALL: &str = "seed = 5\n[simulation]\nclips_per_camera = 4\nframes_per_clip = 2\nwidth = 64\nheight = 64\n\
                     [evaluation]\nfolds = 4\n[classifier.hyperparams.rf]\nn_trees = 15\n";

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new(config: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("config.toml"), config).unwrap();
        Workspace { dir }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_vidsource"))
            .current_dir(self.dir.path())
            .arg("--config")
            .arg(self.path("config.toml"))
            .args(args)
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> Output {
        let out = self.run(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        out
    }

    fn error(&self, args: &[&str]) -> serde_json::Value {
        let out = self.run(args);
        assert!(!out.status.success(), "{args:?} should fail");
        let stderr = String::from_utf8(out.stderr).unwrap();
        serde_json::from_str(stderr.lines().last().unwrap()).unwrap_or_else(|_| panic!("not JSON: {stderr}"))
    }
}

fn gradient(seed: u8) -> Frame {
    Frame::from_fn(16, 16, |x, y| [(x * 16) as u8 ^ seed, (y * 16) as u8, seed.wrapping_mul(7)]).unwrap()
}

fn write_frames(dir: &Path, frames: &[(usize, Frame)]) {
    std::fs::create_dir_all(dir).unwrap();
    for (i, f) in frames {
        std::fs::write(dir.join(frame_file_name(*i, "png")), encode_png(f).unwrap()).unwrap();
    }
}

#[test]
fn full_pipeline_with_defaults_under_out() {
    let ws = Workspace::new(SMALL);
    ws.ok(&["simulate"]);
    ws.ok(&["extract"]);
    ws.ok(&["select"]);
    ws.ok(&["train", "--selection", "out/selection.json"]);
    ws.ok(&["evaluate"]);
    for f in ["features.csv", "selection.json", "model.json", "report.json", "report.csv"] {
        assert!(ws.path("out").join(f).is_file(), "missing out/{f}");
    }
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(ws.path("out/report.json")).unwrap()).unwrap();
    assert_eq!(report["provenance"]["seed"], 5);
    assert_eq!(report["provenance"]["feature_count"], 88);

    // the model was trained on the subset; prediction projects the full CSV by name
    let out = ws.ok(&["predict"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "clip_id,frame,predicted,clip_majority");
    assert_eq!(lines.count(), 5 * 4 * 2);

    let out = ws.ok(&["predict", "--clip", "out/frames/camera-2/clip_003"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1 + 2);
}

#[test]
fn feature_csv_shape_and_determinism() {
    let ws = Workspace::new(SMALL);
    write_frames(&ws.path("frames/cam-a/c1"), &[(1, gradient(1)), (2, gradient(2)), (3, gradient(3))]);
    write_frames(&ws.path("frames/cam-b/c1"), &[(1, gradient(9)), (2, gradient(8)), (3, gradient(7))]);
    ws.ok(&["extract", "--frames", "frames", "--out", "a.csv"]);
    ws.ok(&["--jobs", "2", "extract", "--frames", "frames", "--out", "b.csv"]);
    let a = std::fs::read_to_string(ws.path("a.csv")).unwrap();
    assert_eq!(a, std::fs::read_to_string(ws.path("b.csv")).unwrap());
    let rows: Vec<&str> = a.lines().collect();
    assert_eq!(rows.len(), 1 + 6);
    assert!(rows.iter().all(|r| r.split(',').count() == 90));
    assert!(rows[0].ends_with(",label,clip_id"));
    assert!(rows[1].ends_with(",cam-a,cam-a/c1"));
    assert!(rows[6].ends_with(",cam-b,cam-b/c1"));
}

#[test]
fn corrupt_frame_names_clip_and_frame() {
    let ws = Workspace::new(SMALL);
    write_frames(&ws.path("frames/cam-a/c1"), &[(1, gradient(1)), (2, gradient(2))]);
    write_frames(&ws.path("frames/cam-b/c1"), &[(1, gradient(3)), (2, gradient(4)), (3, gradient(5))]);
    std::fs::write(ws.path("frames/cam-b/c1").join(frame_file_name(2, "png")), b"\x89PNG garbage").unwrap();
    let err = ws.error(&["extract", "--frames", "frames", "--out", "f.csv"]);
    assert_eq!(err["error"], "format");
    let msg = err["message"].as_str().unwrap();
    assert!(msg.contains("cam-b/c1") && msg.contains("frame 2"), "{msg}");
    assert!(!ws.path("f.csv").exists());
}

#[test]
fn too_few_clips_for_the_folds() {
    let ws = Workspace::new(SMALL);
    ws.ok(&["simulate"]);
    ws.ok(&["extract"]);
    let err = ws.error(&["--folds", "10", "evaluate"]);
    assert_eq!(err["error"], "invalid-input");
    assert!(err["message"].as_str().unwrap().contains("10"));
    assert!(!ws.path("out/report.json").exists());
}

#[test]
fn model_schema_mismatch() {
    let ws = Workspace::new(SMALL);
    ws.ok(&["simulate"]);
    ws.ok(&["extract"]);
    ws.ok(&["--classifier", "oner", "train"]);
    let model = std::fs::read_to_string(ws.path("out/model.json")).unwrap();
    assert!(model.contains("\"schema_version\": 1"));
    std::fs::write(ws.path("out/model.json"), model.replace("\"schema_version\": 1", "\"schema_version\": 7")).unwrap();
    let err = ws.error(&["predict"]);
    assert_eq!(err["error"], "schema-mismatch");
}

#[test]
fn usage_and_config_errors_are_json() {
    let ws = Workspace::new(SMALL);
    assert_eq!(ws.error(&[])["error"], "usage");
    assert_eq!(ws.error(&["extract", "--bogus"])["error"], "usage");
    assert_eq!(ws.error(&["--classifier", "perceptron", "train"])["error"], "usage");
    assert_eq!(ws.error(&["extract", "--frames", "nowhere"])["error"], "io");

    let bad = Workspace::new("[selection]\nkk = 3\n");
    assert_eq!(bad.error(&["show-config"])["error"], "format");
}

#[test]
fn show_config_applies_overrides() {
    let ws = Workspace::new(SMALL);
    let out = ws.ok(&["--seed", "99", "--k", "12", "show-config"]);
    let cfg: vidsource::config::PipelineConfig = toml::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(cfg.seed, 99);
    assert_eq!(cfg.selection.k, 12);
    assert_eq!(cfg.simulation.width, 64);
}

#[test]
fn ingest_orders_frames_by_index() {
    let dir = tempfile::tempdir().unwrap();
    write_frames(dir.path(), &[(3, gradient(3)), (1, gradient(1)), (2, gradient(2))]);
    let frames = ingest_frames(dir.path()).unwrap();
    assert_eq!(frames, vec![gradient(1), gradient(2), gradient(3)]);
}

#[test]
fn ingest_reports_the_missing_index() {
    let dir = tempfile::tempdir().unwrap();
    write_frames(dir.path(), &[(1, gradient(1)), (3, gradient(3))]);
    let err = ingest_frames(dir.path()).unwrap_err();
    assert_eq!(err.kind(), "ingest");
    assert!(err.to_string().contains("missing frame 2"), "{err}");
}

#[test]
fn ingest_rejects_an_empty_directory() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("notes.txt"), "x").unwrap();
    assert_eq!(ingest_frames(dir.path()).unwrap_err().kind(), "ingest");
}
