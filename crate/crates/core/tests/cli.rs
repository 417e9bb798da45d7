use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_illusion-lab"))
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn every_shipped_config_validates() {
    let mut seen = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let out = run(&["validate-config", "--config", path.to_str().unwrap()]);
            assert_eq!(
                code(&out),
                0,
                "{}: {}",
                path.display(),
                String::from_utf8_lossy(&out.stderr)
            );
            seen += 1;
        }
    }
    assert!(seen >= 7);
}

#[test]
fn run_writes_results_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("table1.toml");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = run(&[
            "proportion",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--quiet",
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stderr.is_empty());
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let text = String::from_utf8(bytes).unwrap();
    assert!(text.starts_with("# tool: illusion-lab\n"));
    assert!(text.contains("index,metric,value,ci_half_width,label\n"));
}

#[test]
fn results_go_to_stdout_without_a_destination() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "v.toml", "kind = \"variance-curves\"\n");
    let out = run(&[
        "variance-curves",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "9",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# seed: 9\n"));
    assert!(text.contains("conditional-variance"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("written to stdout"));
}

#[test]
fn config_problems_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let table1 = configs_dir().join("table1.toml");
    let mismatch = run(&["flat-max", "--config", table1.to_str().unwrap()]);
    assert_eq!(code(&mismatch), 2);

    let unknown_key = write(
        dir.path(),
        "k.toml",
        "kind = \"flat-max\"\n[flat-max]\nmatrix = 3\n",
    );
    assert_eq!(
        code(&run(&[
            "flat-max",
            "--config",
            unknown_key.to_str().unwrap()
        ])),
        2
    );
    assert_eq!(
        code(&run(&[
            "validate-config",
            "--config",
            unknown_key.to_str().unwrap()
        ])),
        2
    );

    let unknown_kind = write(dir.path(), "u.toml", "kind = \"tea-leaves\"\n");
    assert_eq!(
        code(&run(&[
            "validate-config",
            "--config",
            unknown_kind.to_str().unwrap()
        ])),
        2
    );

    let missing_preset = write(
        dir.path(),
        "p.toml",
        "kind = \"drift-replay\"\n[drift-replay]\npreset = \"nowhere\"\n",
    );
    assert_eq!(
        code(&run(&[
            "drift-replay",
            "--config",
            missing_preset.to_str().unwrap()
        ])),
        2
    );

    assert_eq!(
        code(&run(&["flat-max", "--config", "/no/such/file.toml"])),
        2
    );
    assert_eq!(code(&run(&["no-such-kind"])), 2);
}

fn rank_config(dir: &Path, csv: &Path) -> PathBuf {
    let text = format!(
        "kind = \"rank-disagreement\"\nreplicates = 2\n[rank-disagreement]\nclassifiers = [\"default\", \"lda\"]\n\
         metrics = [\"error-rate\", \"auc\"]\n[rank-disagreement.data]\ncsv = \"{}\"\nlabel-column = \"y\"\n",
        csv.file_name().unwrap().to_str().unwrap()
    );
    write(dir, "rank.toml", &text)
}

#[test]
fn ingestion_problems_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(
        dir.path(),
        "three.csv",
        "a,b,y\n1,2,x\n3,4,y\n5,6,z\n7,8,x\n",
    );
    let out = run(&[
        "rank-disagreement",
        "--config",
        rank_config(dir.path(), &csv).to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));

    let csv = write(
        dir.path(),
        "three.csv",
        "a,b,y\n1,2,x\n3,,y\n5,6,x\n7,8,y\n",
    );
    let out = run(&[
        "rank-disagreement",
        "--config",
        rank_config(dir.path(), &csv).to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("row 3") && err.contains("`b`"), "{err}");
}

#[test]
fn csv_datasets_run_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("a,b,y\n");
    for i in 0..40 {
        let y = if i % 2 == 0 { "rock" } else { "metal" };
        let shift = if i % 2 == 0 { 0.0 } else { 1.5 };
        text.push_str(&format!(
            "{},{},{y}\n",
            (i % 7) as f64 * 0.3 + shift,
            (i % 5) as f64 * 0.2
        ));
    }
    let csv = write(dir.path(), "two.csv", &text);
    let out = run(&[
        "rank-disagreement",
        "--config",
        rank_config(dir.path(), &csv).to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("kendall-tau"));
}
