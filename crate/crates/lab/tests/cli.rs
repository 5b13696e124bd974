use std::process::Command;

fn cwlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cwlab"))
}

#[test]
fn classify_writes_map_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let status = cwlab().args(["classify", "--out"]).arg(dir.path()).status().unwrap();
    assert!(status.success());
    let run = std::fs::read_dir(dir.path()).unwrap().next().unwrap().unwrap().path();
    assert!(run.file_name().unwrap().to_str().unwrap().starts_with("classify-"));
    assert!(run.join("region_map.csv").is_file());
    let manifest = std::fs::read_to_string(run.join("manifest.txt")).unwrap();
    assert!(manifest.contains("summary.cells = \"40000\""), "{manifest}");
}

#[test]
fn config_file_is_read_and_violations_are_listed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.txt");
    std::fs::write(&cfg, "grid.cfl = 5.0\ndata.width = -1.0\n").unwrap();
    let out = cwlab().arg("simulate").arg("--config").arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("data.width") && err.contains("CFL"), "{err}");
}

#[test]
fn show_config_round_trips_through_a_file() {
    let out = cwlab().arg("show-config").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let parsed = coupled_wave_lab::RunConfig::parse(&text).unwrap();
    assert_eq!(parsed, coupled_wave_lab::RunConfig::default());
}
