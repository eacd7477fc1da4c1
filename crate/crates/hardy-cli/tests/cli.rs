//! End-to-end tests spawning the `hardy` binary.

use std::path::Path;
use std::process::{Command, Output};

fn hardy() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hardy"))
}

fn run(args: &[&str]) -> Output {
    hardy().args(args).output().expect("spawn hardy")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn grab(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no '{key}' line in:\n{out}"))
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn bounds_lebesgue_ergodic() {
    let o = run(&[
        "bounds", "--p", "2", "--q", "2", "--interval", "0,1", "--mu", "lebesgue", "--nu",
        "lebesgue", "--boundary", "ergodic",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!((grab(&out, "lower_A") - 0.25).abs() < 1e-8, "{out}");
    assert!((grab(&out, "upper_A") - 0.5).abs() < 1e-8, "{out}");
}

#[test]
fn bounds_lebesgue_dirichlet_left() {
    let o = run(&[
        "bounds", "--p", "2", "--q", "2", "--interval", "0,1", "--mu", "lebesgue", "--nu",
        "lebesgue", "--boundary", "dirichlet-left",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!((grab(&out, "lower_A") - 0.5).abs() < 1e-8);
    assert!((grab(&out, "upper_A") - 1.0).abs() < 1e-8);
}

#[test]
fn bounds_accepts_hyphen_valued_arguments() {
    // Ornstein-Uhlenbeck drift and an unbounded interval both start with '-'
    let o = run(&[
        "bounds", "--p", "2", "--q", "2", "--interval", "-inf,inf", "--a", "1", "--b", "-x",
        "--theta", "0", "--boundary", "ergodic",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let (lower, upper) = (grab(&out, "lower_A"), grab(&out, "upper_A"));
    // the spectral gap here is exactly 1, so A = 1 must sit inside
    assert!(lower <= 1.0 && 1.0 <= upper, "{out}");
    assert!(upper <= 2.0 * lower * (1.0 + 1e-9));
}

#[test]
fn bounds_elliptic_source_matches_lebesgue() {
    let direct = stdout(&run(&[
        "bounds", "--p", "2", "--q", "2", "--interval", "0,1", "--mu", "lebesgue", "--nu",
        "lebesgue", "--boundary", "ergodic",
    ]));
    let elliptic = stdout(&run(&[
        "bounds", "--p", "2", "--q", "2", "--interval", "0,1", "--a", "1", "--b", "0", "--theta",
        "0.5", "--boundary", "ergodic",
    ]));
    let (a, b) = (grab(&direct, "kappa"), grab(&elliptic, "kappa"));
    assert!((a - b).abs() <= 1e-10, "direct {a} vs elliptic {b}");
}

#[test]
fn bounds_writes_csv_row() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bounds.csv");
    let o = run(&[
        "bounds", "--p", "2", "--q", "4", "--interval", "0,1", "--mu", "lebesgue", "--nu",
        "lebesgue", "--boundary", "dirichlet-left", "--out", path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "boundary,p,q,b_plus,b_minus,b_star,b_substar,kappa,kappa0,lower_A,upper_A,factor"
    );
    let row = lines.next().unwrap();
    assert!(row.starts_with("dirichlet-left,"), "{row}");
}

#[test]
fn usage_errors_exit_2() {
    // missing measure source
    let o = run(&["bounds", "--p", "2", "--q", "2", "--interval", "0,1", "--boundary", "ergodic"]);
    assert_eq!(o.status.code(), Some(2));
    // unknown flag via clap
    let o = run(&["bounds", "--nonsense"]);
    assert_eq!(o.status.code(), Some(2));
    // bad density expression
    let o = run(&[
        "bounds", "--p", "2", "--q", "2", "--interval", "0,1", "--mu", "foo(", "--nu", "lebesgue",
        "--boundary", "ergodic",
    ]);
    assert_eq!(o.status.code(), Some(2));
    // sweep without --out
    let o = run(&["sweep", "--p", "2", "--r-range", "0.5,1", "--step", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numeric_failures_exit_3() {
    // the chain ordering breaks off the figure domains at small p: the
    // emission hard-check must reject the sweep
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    let o = run(&[
        "sweep", "--p", "1.2", "--r-range", "4.9,5.1", "--step", "0.1", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("ordering"), "{err}");
}

#[test]
fn exact_rows() {
    let o = run(&["exact", "--p", "3", "--q", "3"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let row = out.lines().nth(2).unwrap();
    let a: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((a - 0.656385051429763601).abs() < 1e-9, "{row}");

    let o = run(&["exact", "--p", "2", "--q", "4"]);
    let out = stdout(&o);
    let row = out.lines().nth(2).unwrap();
    let a: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((a - 0.709827942242355674).abs() < 1e-9, "{row}");
}

#[test]
fn exact_reading_flag() {
    let b = stdout(&run(&["exact", "--p", "2", "--q", "2"]));
    let a = stdout(&run(&["exact", "--p", "2", "--q", "2", "--delta1-reading", "a"]));
    let delta_b: f64 = b.lines().nth(2).unwrap().split(',').nth(4).unwrap().parse().unwrap();
    let delta_a: f64 = a.lines().nth(2).unwrap().split(',').nth(4).unwrap().parse().unwrap();
    assert!((delta_b - 0.653830243005915).abs() < 1e-8);
    assert!((delta_a - 0.721485828296126).abs() < 1e-8);
}

#[test]
fn sweep_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("a.csv");
    let p2 = dir.path().join("b.csv");
    for p in [&p1, &p2] {
        let o = run(&[
            "sweep", "--diagonal", "--p-range", "1.5,3.0", "--step", "0.25", "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(&p1).unwrap();
    let b = std::fs::read(&p2).unwrap();
    assert_eq!(a, b, "sweep output is not byte-stable");
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().next().unwrap(), "p,q,B,delta1_bar,A,A_star,delta1,kB");
    // diagonal: A and A* columns identical to 1e-10
    for line in text.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert!((f[4] - f[5]).abs() <= 1e-10, "{line}");
    }
}

#[test]
fn job_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let job = dir.path().join("run.job");
    std::fs::write(
        &job,
        "command = bounds\np = 2\nq = 2\ninterval = 0,1\nmu = lebesgue\nnu = lebesgue\nboundary = ergodic\n",
    )
    .unwrap();
    let o = run(&["bounds", "--job", job.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!((grab(&out, "lower_A") - 0.25).abs() < 1e-8);

    // flags override the file: switch the boundary on the same job
    let o = run(&["bounds", "--job", job.to_str().unwrap(), "--boundary", "dirichlet-left"]);
    let out = stdout(&o);
    assert!((grab(&out, "lower_A") - 0.5).abs() < 1e-8);

    // command mismatch is a usage error
    let o = run(&["exact", "--job", job.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    // unknown keys are rejected
    let bad = dir.path().join("bad.job");
    std::fs::write(&bad, "frobnicate = 1\n").unwrap();
    let o = run(&["bounds", "--job", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_quick_passes() {
    let o = run(&["verify", "--quick"]);
    assert!(
        o.status.success(),
        "stdout: {}\nstderr: {}",
        stdout(&o),
        String::from_utf8_lossy(&o.stderr)
    );
    let out = stdout(&o);
    assert!(out.contains("PASS  sandwich"), "{out}");
    assert!(out.contains("PASS  chain"), "{out}");
    assert!(out.contains("PASS  duality"), "{out}");
    assert!(out.contains("PASS  scaling"), "{out}");
    assert!(out.contains("PASS  oracle-agreement"), "{out}");
}

#[test]
fn verify_fault_injection_fails_with_named_invariant() {
    // negative control: scaling every upper bound by 0.9 must break the
    // sandwich check and exit 4
    let o = hardy()
        .args(["verify", "--quick"])
        .env("HARDY_VERIFY_FAULT", "upper-scale:0.9")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4), "stdout: {}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("FAIL  sandwich"), "{out}");
}

#[test]
fn job_file_example_exists_and_runs() {
    // the repository ships a sample job file; keep it working
    let sample = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/model-case.job");
    let o = run(&["bounds", "--job", sample.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}
