use std::fs;
use std::process::{Command, Output};

fn avkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_avkit"))
        .args(args)
        .env("AVKIT_THREADS", "2")
        .env("RUST_LOG", "info")
        .output()
        .unwrap()
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

#[test]
fn demo_then_rerun_skips_everything() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("demo");
    let out = out.to_str().unwrap();
    let first = avkit(&["demo", "--out", out]);
    assert!(first.status.success(), "{}", text(&first));
    assert!(text(&first).contains("SAME_AUTH_NEAR"));
    let second = avkit(&["demo", "--out", out]);
    assert!(second.status.success());
    let log = text(&second);
    assert!(log.contains("Skipped") && !log.contains("Ran"), "{log}");
}

#[test]
#[cfg(unix)]
fn step_by_step_commands() {
    use std::os::unix::fs::PermissionsExt;

    let dir = tempfile::tempdir().unwrap();
    let p = |s: &str| dir.path().join(s).to_str().unwrap().to_string();
    let endpoint = dir.path().join("endpoint.sh");
    fs::write(
        &endpoint,
        r#"#!/bin/sh
echo '{"protocol":"verify/1"}'
while read -r line; do
  id=$(printf '%s' "$line" | sed 's/.*"sample_id":"\([^"]*\)".*/\1/')
  printf '{"sample_id":"%s","label":1,"confidence":0.6}\n' "$id"
done
"#,
    )
    .unwrap();
    fs::set_permissions(&endpoint, fs::Permissions::from_mode(0o755)).unwrap();
    assert!(avkit(&["demo", "--out", &p("d")]).status.success());
    let steps: Vec<Vec<String>> = vec![
        vec!["ingest".into(), "--manifest".into(), p("d/corpus/manifest.jsonl"), "--out".into(), p("c.bin")],
        vec!["pairgen".into(), "--corpus".into(), p("c.bin"), "--scale".into(), "100".into(), "--seed".into(), "3".into(), "--out".into(), p("pairs")],
        vec!["features".into(), "build".into(), "--train".into(), p("pairs/train.jsonl"), "--out".into(), p("f.model")],
        vec![
            "impostors".into(), "run".into(), "--test".into(), p("pairs/test.jsonl"), "--model".into(), p("f.model"),
            "--pool".into(), p("pairs/train.jsonl"), "--iterations".into(), "25".into(), "--out".into(), p("imp.jsonl"),
        ],
        vec![
            "external".into(), "--test".into(), p("pairs/test.jsonl"), "--endpoint".into(),
            p("endpoint.sh"), "--out".into(), p("ext.jsonl"),
        ],
        vec![
            "eval".into(), "--dataset".into(), p("pairs/test.jsonl"), "--results".into(), p("imp.jsonl"),
            "--compare".into(), p("ext.jsonl"), "--out".into(), p("report"),
        ],
    ];
    for args in &steps {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = avkit(&args);
        assert!(o.status.success(), "{args:?}: {}", text(&o));
    }
    for f in ["prf.csv", "by_category.csv", "by_distance.csv", "correlations.csv", "summary.txt", "mcnemar.txt"] {
        assert!(dir.path().join("report").join(f).exists(), "{f}");
    }
}

#[test]
fn missing_manifest_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "out_dir = \"out\"\nseeds = [1]\n[corpus]\nmanifest = \"absent.jsonl\"\n").unwrap();
    let o = avkit(&["pipeline", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(text(&o).contains("absent.jsonl"), "{}", text(&o));
}

#[test]
fn eval_rejects_unpaired_inputs() {
    let o = avkit(&["eval", "--dataset", "a.jsonl", "--dataset", "b.jsonl", "--results", "r.jsonl", "--out", "x"]);
    assert!(!o.status.success());
    assert!(text(&o).contains("one results file per dataset"), "{}", text(&o));
}
