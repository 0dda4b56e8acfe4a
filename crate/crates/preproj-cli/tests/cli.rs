use std::path::PathBuf;
use std::process::{Command, Output};

fn preproj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_preproj")).args(args).env("NUM_THREADS", "2").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("preproj-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn b2_config() -> PathBuf {
    scratch("b2.toml", "[cartan]\nC = [[2,-1],[-2,2]]\n[policy]\nseed = 3\n")
}

fn fixture(names: &str) -> PathBuf {
    let o = preproj(&["fixture", "--set", "b2", "--names", names]);
    assert!(o.status.success());
    scratch(&format!("{names}.json"), &stdout(&o))
}

#[test]
fn crystal_height_three() {
    let cfg = b2_config();
    let o = preproj(&["--config", cfg.to_str().unwrap(), "crystal", "--height", "3", "--check-axioms", "--check-kostant"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("nodes 14"), "{s}");
    assert!(s.contains("violations 0"));
    assert!(s.contains("mismatches 0"));
    let again = preproj(&["--config", cfg.to_str().unwrap(), "crystal", "--height", "3"]);
    assert_eq!(stdout(&again).lines().next(), s.lines().next());
}

#[test]
fn check_worked_example() {
    let m = fixture("E_1,T_1");
    let o = preproj(&["check", "--module", m.to_str().unwrap()]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("rank (2,1)"), "{s}");
    assert!(s.contains("phi* (2,0)"));
    assert!(s.contains("Ext1(M,E_i) (0,3)"));
}

#[test]
fn check_reports_broken_relations() {
    let bad = scratch(
        "bad.json",
        r#"{"cartan":{"C":[[2,-1],[-2,2]]},"field":{"kind":"Q"},"dims":[2,1],"arrows":{"eps_1":[["1","0"],["0","0"]]}}"#,
    );
    let o = preproj(&["check", "--module", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("fails"));
}

#[test]
fn conv_values() {
    let x = fixture("X");
    let o = preproj(&["conv", "serre", "--i", "1", "--j", "2", "--module", x.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "-2");
    let o = preproj(&["conv", "eval", "--module", x.to_str().unwrap(), "--word", "1,2,1"]);
    assert_eq!(stdout(&o).trim(), "1");
}

#[test]
fn lr_and_semican() {
    let cfg = b2_config();
    let c = cfg.to_str().unwrap();
    let o = preproj(&["--config", c, "lr", "--lambda", "1,1", "--mu", "0,2"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("(1,1) 2"));
    assert!(s.contains("dimension check 160 = 160"));
    let o = preproj(&["--config", c, "semican", "--weight", "2,1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("rho")).count(), 2);
}

#[test]
fn input_errors_exit_nonzero() {
    let o = preproj(&["crystal", "--height", "2"]);
    assert!(!o.status.success());
    let broken = scratch("broken.json", "{\"dims\": [1,");
    let o = preproj(&["check", "--module", broken.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
}

#[test]
fn fixture_rank_and_parse_exit_code() {
    let t1 = fixture("T_1");
    let o = preproj(&["check", "--module", t1.to_str().unwrap()]);
    assert!(stdout(&o).contains("rank (1,1)"));
    let broken = scratch("corrupt.json", "{\"field\": {\"kind\": \"Q\"}, \"dims\": [1,,]}");
    assert_eq!(preproj(&["check", "--module", broken.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn outputs_are_byte_identical() {
    let cfg = b2_config();
    let run = |threads: &str, out: &str| {
        let path = std::env::temp_dir().join(format!("preproj-cli-{}-{out}", std::process::id()));
        let o = Command::new(env!("CARGO_BIN_EXE_preproj"))
            .args(["--config", cfg.to_str().unwrap(), "crystal", "--height", "4", "--json"])
            .arg(&path)
            .arg("--dot")
            .arg(path.with_extension("dot"))
            .env("NUM_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success());
        (o.stdout, std::fs::read(&path).unwrap(), std::fs::read(path.with_extension("dot")).unwrap())
    };
    assert_eq!(run("1", "a.json"), run("4", "b.json"));
}
