use std::path::Path;
use std::process::{Command, Output};

use vtext::evalkit::{read_annotations, write_annotations, AnnotatedBox, FrameAnnotation};
use vtext::pixelcore::io::write_gray;
use vtext::pixelcore::{Grid, Rect};

fn vtext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vtext")).args(args).output().expect("run vtext")
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(vtext(&["--help"]).status.code(), Some(0));
    assert_eq!(vtext(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(vtext(&["train", "nothing", "--data", "x", "--out", "y"]).status.code(), Some(2));
    assert_eq!(vtext(&["evaluate", "--pred", "/nonexistent/p", "--truth", "/nonexistent/t"]).status.code(), Some(2));
}

#[test]
fn evaluate_thresholds_set_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let truth = dir.path().join("truth.jsonl");
    let pred = dir.path().join("pred.jsonl");
    let frame = |boxes| FrameAnnotation { frame: "f.png".into(), boxes };
    write_annotations(&truth, &[frame(vec![AnnotatedBox::new(Rect::new(0, 0, 10, 10), "قلم")])]).unwrap();
    write_annotations(
        &pred,
        &[frame(vec![
            AnnotatedBox::new(Rect::new(0, 0, 10, 10), "قلم"),
            AnnotatedBox::new(Rect::new(40, 40, 5, 5), ""),
        ])],
    )
    .unwrap();
    let json = dir.path().join("report.json");
    let base = ["evaluate", "--pred", &s(&pred), "--truth", &s(&truth)];
    let ok = vtext(&[&base[..], &["--min-recall", "1", "--min-cr", "100", "--json", &s(&json)]].concat());
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["precision"], 0.5);
    let low = vtext(&[&base[..], &["--min-precision", "0.9"]].concat());
    assert_eq!(low.status.code(), Some(1));
    assert!(stderr(&low).contains("precision"));
    assert_eq!(vtext(&[&base[..], &["--iou", "0"]].concat()).status.code(), Some(2));
}

#[test]
fn detect_reports_missing_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let model = dir.path().join("model.json");
    let out = dir.path().join("out.jsonl");
    let o = vtext(&["detect", "--frames", &s(&empty), "--model", &s(&model), "--out", &s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not found"), "{}", stderr(&o));
    let o = vtext(&["detect", "--frames", &s(&empty), "--out", &s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no localizer model"));
    vtext::localizer::MlpModel::zeros().save(&model).unwrap();
    let o = vtext(&["detect", "--frames", &s(&empty), "--model", &s(&model), "--out", &s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no frames found"), "{}", stderr(&o));
}

#[test]
fn bad_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, "[mfi]\nno_such_key = 3\n").unwrap();
    let o = vtext(&["--config", &s(&cfg), "evaluate", "--pred", "a", "--truth", "b"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn full_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| s(&dir.path().join(n));
    let run = |args: &[&str]| {
        let o = vtext(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
        String::from_utf8_lossy(&o.stdout).into_owned()
    };
    let out = run(&["synthesize", "--out", &p("data"), "--clips", "8", "--frames", "5", "--glyph-renders", "1", "--seed", "3"]);
    assert!(out.contains("8 clips"));
    for f in ["truth.jsonl", "bands.csv", "glyphs.csv", "lexicon.txt", "spec.json", "clip_0001/frame_000001.png"] {
        assert!(dir.path().join("data").join(f).is_file(), "{f}");
    }
    run(&["train", "localizer", "--data", &p("data/bands.csv"), "--out", &p("loc.json")]);
    run(&["train", "recognizer", "--data", &p("data/glyphs.csv"), "--out", &p("rec.json")]);

    run(&["detect", "--frames", &p("data"), "--model", &p("loc.json"), "--out", &p("det1.jsonl")]);
    run(&["--jobs", "2", "detect", "--frames", &p("data"), "--model", &p("loc.json"), "--out", &p("det2.jsonl")]);
    assert_eq!(std::fs::read(p("det1.jsonl")).unwrap(), std::fs::read(p("det2.jsonl")).unwrap());
    let det = read_annotations(Path::new(&p("det1.jsonl"))).unwrap();
    assert_eq!(det.len(), 8);
    assert_eq!(det[0].frame, "clip_0001/frame_000003.png");

    run(&[
        "--debug-dir", &p("debug"), "recognize", "--frames", &p("data"), "--localizer", &p("loc.json"), "--recognizer",
        &p("rec.json"), "--lexicon", &p("data/lexicon.txt"), "--out", &p("rec.jsonl"),
    ]);
    let rec = read_annotations(Path::new(&p("rec.jsonl"))).unwrap();
    assert!(rec.iter().flat_map(|r| &r.boxes).all(|b| !b.text.is_empty() && b.corrected.is_some() && b.glyphs.is_some()));
    assert!(std::fs::read_dir(p("debug")).unwrap().count() > 0);
    let table = run(&["evaluate", "--pred", &p("rec.jsonl"), "--truth", &p("data/truth.jsonl")]);
    assert!(table.contains("recall") && table.contains("CR"));

    // a blank region has no text: an empty result, still success
    write_gray(Path::new(&p("blank.png")), &Grid::new(40, 20, 90u8)).unwrap();
    run(&["recognize", "--regions", &p("blank.png"), "--recognizer", &p("rec.json"), "--out", &p("blank.jsonl")]);
    assert!(read_annotations(Path::new(&p("blank.jsonl"))).unwrap().is_empty());
}
