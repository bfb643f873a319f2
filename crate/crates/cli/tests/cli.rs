use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::Instant;

use tremorscope::report::parse_report;
use tremorscope::video::{load_sequence, SequenceFormat, VideoSequence};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tremorscope"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(p: &Path) -> VideoSequence {
    load_sequence(p, SequenceFormat::from_path(p), None).unwrap()
}

fn synth(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let out = path(dir, name);
    let mut args = vec!["synth", s(&out)];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn tremor_clip(dir: &Path) -> PathBuf {
    synth(
        dir,
        "tremor.y4m",
        &[
            "--kind",
            "composite",
            "--size",
            "48x48",
            "--duration",
            "12",
            "--fps",
            "30",
            "--component",
            "0.5,0.8,90,0,12,breathing",
            "--component",
            "0.2,6,0,4,9,tremor",
        ],
    )
}

#[test]
fn synth_writes_clip_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let clip = synth(dir.path(), "a.y4m", &["--size", "40x32", "--duration", "1"]);
    let seq = read(&clip);
    assert_eq!((seq.len(), seq.dims()), (30, Some((40, 32))));
    let truth = std::fs::read_to_string(path(dir.path(), "a.y4m.truth.txt")).unwrap();
    assert_eq!(
        tremorscope::synth::GroundTruth::parse(&truth)
            .unwrap()
            .samples
            .len(),
        30
    );
}

#[test]
fn magnify_dynamic_keeps_frame_count_and_size() {
    let dir = tempfile::tempdir().unwrap();
    let clip = synth(dir.path(), "a.y4m", &["--size", "64x48", "--duration", "1"]);
    let out = path(dir.path(), "m.y4m");
    let o = run(&[
        "magnify",
        s(&clip),
        s(&out),
        "--mode",
        "dynamic",
        "--alpha",
        "10",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (a, b) = (read(&clip), read(&out));
    assert_eq!((a.len(), a.dims()), (b.len(), b.dims()));
    assert_ne!(a, b);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("cmd=magnify") && err.contains("frames=30"),
        "{err}"
    );
}

#[test]
fn magnify_with_zero_alpha_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let clip = synth(
        dir.path(),
        "a.y4m",
        &["--size", "48x48", "--duration", "0.5"],
    );
    let out = path(dir.path(), "m.y4m");
    assert_eq!(
        code(&run(&[
            "magnify",
            s(&clip),
            s(&out),
            "--mode",
            "static",
            "--alpha",
            "0"
        ])),
        0
    );
    assert_eq!(std::fs::read(&clip).unwrap(), std::fs::read(&out).unwrap());
}

#[test]
fn temporal_mode_without_band_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let clip = synth(
        dir.path(),
        "a.y4m",
        &["--size", "48x48", "--duration", "0.5"],
    );
    let o = run(&[
        "magnify",
        s(&clip),
        s(&path(dir.path(), "m.y4m")),
        "--mode",
        "temporal",
    ]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error=config"));
    assert!(!path(dir.path(), "m.y4m").exists());
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "magnify",
        s(&path(dir.path(), "none.y4m")),
        s(&path(dir.path(), "m.y4m")),
        "--mode",
        "dynamic",
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(code(&run(&["magnify", "--frobnicate"])), 2);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn detect_finds_the_tremor_episode() {
    let dir = tempfile::tempdir().unwrap();
    let clip = tremor_clip(dir.path());
    let report = path(dir.path(), "r.json");
    let csv = path(dir.path(), "r.csv");
    let o = run(&["detect", s(&clip), "--report", s(&report), "--csv", s(&csv)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = parse_report(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(!r.episodes.is_empty());
    assert_eq!(r.source_id, "tremor.y4m");
    assert_eq!(r.config.regions.len(), 1);
    assert_eq!(
        std::fs::read_to_string(&csv).unwrap().lines().count(),
        r.episodes.len() + 1
    );
    let e = &r.episodes[0];
    assert!(e.start_s < 9.0 && e.end_s > 4.0, "{e:?}");
}

#[test]
fn detect_on_still_clip_reports_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let clip = synth(
        dir.path(),
        "still.y4m",
        &["--amplitude", "0", "--size", "32x32", "--duration", "8"],
    );
    let o = run(&["detect", s(&clip)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = parse_report(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert!(r.episodes.is_empty());
    assert_eq!(r.summary.flagged_seconds, 0.0);
}

#[test]
fn detect_with_magnification_echoes_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let clip = tremor_clip(dir.path());
    let o = run(&[
        "detect",
        s(&clip),
        "--magnify-first",
        "dynamic,5",
        "--region",
        "mid=8,8,32,32",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = parse_report(&String::from_utf8(o.stdout).unwrap()).unwrap();
    let m = r.config.magnification.unwrap();
    assert_eq!(m.alpha, 5.0);
    assert!(m.depth.is_some());
    assert_eq!(r.config.regions[0].id, "mid");
    assert!(r.episodes.iter().all(|e| e.region == "mid"));
}

#[test]
fn region_outside_the_frame_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let clip = synth(dir.path(), "a.y4m", &["--size", "32x32", "--duration", "5"]);
    let o = run(&["detect", s(&clip), "--region", "20,20,16,16"]);
    assert_eq!(code(&o), 2);
    let o = run(&["detect", s(&clip), "--tremor-band", "4,20"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn report_command_validates_and_exports() {
    let dir = tempfile::tempdir().unwrap();
    let clip = tremor_clip(dir.path());
    let report = path(dir.path(), "r.json");
    assert_eq!(code(&run(&["detect", s(&clip), "--report", s(&report)])), 0);
    let csv = path(dir.path(), "r.csv");
    let o = run(&["report", s(&report), "--csv", s(&csv)]);
    assert_eq!(code(&o), 0);
    assert!(csv.exists());
    let text = std::fs::read_to_string(&report)
        .unwrap()
        .replace("\"schema_version\": 1", "\"schema_version\": 9");
    std::fs::write(&report, text).unwrap();
    assert_eq!(code(&run(&["report", s(&report)])), 3);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let clip = tremor_clip(dir.path());
    let cfg = path(dir.path(), "cfg.toml");
    std::fs::write(&cfg, "threshold = 0.99\nwindow_s = 4.0\nsource_id = \"from-file\"\nregions = [\"a=0,0,24,24\"]\n").unwrap();
    let o = run(&["--config", s(&cfg), "detect", s(&clip)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = parse_report(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(
        (r.config.detector.threshold, r.source_id.as_str()),
        (0.99, "from-file")
    );
    assert_eq!(r.config.regions[0].id, "a");
    let o = run(&[
        "--config",
        s(&cfg),
        "detect",
        s(&clip),
        "--threshold",
        "0.3",
        "--region",
        "b=0,0,8,8",
    ]);
    let r = parse_report(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(r.config.detector.threshold, 0.3);
    assert_eq!(
        r.config
            .regions
            .iter()
            .map(|r| r.id.as_str())
            .collect::<Vec<_>>(),
        ["b"]
    );
}

#[test]
fn bad_config_files() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&run(&[
            "--config",
            s(&path(dir.path(), "nope.toml")),
            "bench",
            "--res",
            "32x32"
        ])),
        3
    );
    let cfg = path(dir.path(), "cfg.toml");
    std::fs::write(&cfg, "treshold = 0.4\n").unwrap();
    assert_eq!(
        code(&run(&["--config", s(&cfg), "bench", "--res", "32x32"])),
        2
    );
}

#[test]
fn bench_small_resolution() {
    let t = Instant::now();
    let o = run(&["bench", "--res", "64x64", "--seconds", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(t.elapsed().as_secs_f64() < 5.0);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("fps=") && err.contains("meets_target="),
        "{err}"
    );
    assert_eq!(code(&run(&["bench", "--res", "64by64"])), 2);
    assert_eq!(code(&run(&["bench", "--threads", "0"])), 2);
}

#[test]
fn stream_mode_matches_frame_count() {
    let dir = tempfile::tempdir().unwrap();
    let clip = synth(dir.path(), "a.y4m", &["--size", "48x32", "--duration", "1"]);
    let mut child = bin()
        .args(["magnify", "--stream", "--mode", "dynamic"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let bytes = std::fs::read(&clip).unwrap();
    let mut stdin = child.stdin.take().unwrap();
    let writer = std::thread::spawn(move || stdin.write_all(&bytes).unwrap());
    let o = child.wait_with_output().unwrap();
    writer.join().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = path(dir.path(), "s.y4m");
    std::fs::write(&out, &o.stdout).unwrap();
    let (a, b) = (read(&clip), read(&out));
    assert_eq!((a.len(), a.dims()), (b.len(), b.dims()));
}
