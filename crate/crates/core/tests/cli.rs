use std::process::{Command, Output};

fn mieprop(args: &[&str], threads: Option<&str>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mieprop"));
    c.args(args);
    match threads {
        Some(n) => c.env("MIEPROP_THREADS", n),
        None => c.env_remove("MIEPROP_THREADS"),
    };
    c.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn kernel_run_writes_header_and_rows() {
    let o = mieprop(&["kernel", "--pairs", "3", "--t", "1"], None);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(!s.contains('\r'));
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "# mieprop kernel");
    assert!(lines.contains(&"# rho = 1"));
    let body: Vec<&&str> = lines.iter().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body.len(), 4);
    let cols = body[0].split(',').count();
    assert!(body.iter().all(|l| l.split(',').count() == cols));
    assert!(!s.contains("UNSAFE"));
}

#[test]
fn exit_codes() {
    assert_eq!(code(&mieprop(&["verify", "--zero-amplitude"], None)), 1);
    assert_eq!(code(&mieprop(&["kernel", "--h", "0.3"], None)), 2);
    assert_eq!(code(&mieprop(&["kernel", "--rho", "0.5"], None)), 2);
    assert_eq!(code(&mieprop(&["mie", "--bogus"], None)), 2);
    assert_eq!(code(&mieprop(&["kernel", "--pairs", "1", "--t", "1e9"], None)), 3);
    assert_eq!(code(&mieprop(&["kernel", "--pairs", "1"], Some("zero"))), 2);
}

#[test]
fn unsafe_runs_are_watermarked() {
    let o = mieprop(&["kernel", "--h", "0.3", "--unsafe-params", "--pairs", "1"], None);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).lines().take(3).any(|l| l.starts_with('#') && l.contains("UNSAFE")));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = std::env::temp_dir().join(format!("mieprop-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.cfg");
    std::fs::write(&bad, "rho = 1.5\nfoo = 2\n").unwrap();
    let o = mieprop(&["mie", "--config", bad.to_str().unwrap()], None);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("foo"));

    let good = dir.join("good.cfg");
    std::fs::write(&good, "# comment\nrho = 1.5\nh = 0.0625\n").unwrap();
    let o = mieprop(&["kernel", "--config", good.to_str().unwrap(), "--h", "0.125", "--pairs", "1"], None);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("# rho = 1.5") && s.contains("# h = 0.125"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn output_is_independent_of_thread_count() {
    let args = ["kernel", "--pairs", "6", "--t", "2"];
    let one = mieprop(&args, Some("1"));
    let four = mieprop(&args, Some("4"));
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
}
