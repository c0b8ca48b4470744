use std::process::Command;

fn hdqf(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_hdqf")).args(args).output().unwrap()
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# codebook settings\nsize = 3\ndim = 16\nseed = 4\n").unwrap();
    let out = dir.path().join("out");
    let o = hdqf(&[
        "gen-codebook",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "9",
        "--set",
        "dim=8",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = std::fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("size = 3"), "{manifest}");
    assert!(manifest.contains("dim = 8"), "{manifest}");
    assert!(manifest.contains("seed = 9"), "{manifest}");
    let file = out.join("codebook_F2_N3_D8_seed9.hdqf");
    let books = hdqf_core::hdc::CodebookSet::read_from(std::fs::File::open(file).unwrap()).unwrap();
    assert_eq!((books.factors(), books.size(), books.dim(), books.seed()), (2, 3, 8, 9));
}

#[test]
fn bad_settings_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let o = hdqf(&["table1", "--set", "rows=25:3", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("D:F:N"));
    let o = hdqf(&["prob-vs-iter", "--mode", "quantum", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
}
