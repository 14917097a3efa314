use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_homeo-energy"));
    c.env_remove("HOMEO_ENERGY_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_map(dir: &Path, name: &str, json: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn analyze_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let map = write_map(dir.path(), "map.json", r#"{"kind": "mobius_trace", "params": {"a_re": 0.3, "a_im": 0.4}}"#);
    let mut reports = Vec::new();
    for (i, threads) in ["1", "2"].iter().enumerate() {
        let out = dir.path().join(format!("run{i}"));
        let o = run(&[
            "analyze", "--map", &map, "--lambda", "-0.5,1", "--levels", "10", "--disk-levels", "6", "--nb", "2048",
            "--threads", threads, "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        reports.push(std::fs::read(out.join("report.json")).unwrap());
        for f in ["terms.csv", "ratios.csv"] {
            let csv = std::fs::read_to_string(out.join(f)).unwrap();
            assert!(csv.lines().count() > 1, "{f}");
        }
    }
    assert_eq!(reports[0], reports[1]);
    let text = String::from_utf8(reports.pop().unwrap()).unwrap();
    homeo_energy::analysis::validate_report(&text).unwrap();
}

#[test]
fn validation_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let map = write_map(dir.path(), "map.json", r#"{"kind": "identity"}"#);
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();

    let o = run(&["analyze", "--map", &map, "--lambda", "0,-1", "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lambda = -1 is excluded"));

    let o = run(&["analyze", "--map", &map, "--conditions", "", "--out", out]);
    assert_eq!(o.status.code(), Some(1));

    let strict = write_map(dir.path(), "strict.json", r#"{"kind": "identity", "unknown": 3}"#);
    assert_eq!(run(&["analyze", "--map", &strict, "--out", out]).status.code(), Some(1));

    assert_eq!(run(&["verify", "nonsense"]).status.code(), Some(1));
    assert_eq!(run(&["--no-such-flag"]).status.code(), Some(1));
    assert_eq!(run(&["sweep", "--map", &map, "--conditions", "iii_direct"]).status.code(), Some(1));
}

#[test]
fn verify_suites_and_coarse_poisson() {
    let o = run(&["verify", "dyadic"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("PASS dyadic::seed_4_7_exact_set"));
    assert!(s.contains("PASS dyadic::counting_bound"));

    let o = run(&["verify", "poisson", "--nb", "256"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("FAIL poisson::"));
}

#[test]
fn verify_all_passes() {
    let o = run(&["verify", "all"]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn sweep_identity_all_convergent() {
    let dir = tempfile::tempdir().unwrap();
    let map = write_map(dir.path(), "map.json", r#"{"kind": "identity"}"#);
    let out = dir.path().join("sweep.csv");
    let o = run(&["sweep", "--map", &map, "--lambda", "-0.5,0,1,2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "lambda,J,iii_dyadic_partial,iii_dyadic_class,iv_partial,iv_class,v_partial,v_class");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4 * 9);
    assert!(rows.iter().all(|r| r.matches(",convergent").count() == 3));
}

#[test]
fn sweep_power_monotone_in_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let map = write_map(dir.path(), "map.json", r#"{"kind": "power", "params": {"p": 3}}"#);
    let o = run(&["sweep", "--map", &map, "--conditions", "iv,v"]);
    assert!(o.status.success());
    let csv = stdout(&o);
    let rows: Vec<Vec<String>> = csv.lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect();
    for j in 6..=14 {
        for col in [2, 4] {
            let vals: Vec<f64> =
                rows.iter().filter(|r| r[1] == j.to_string()).map(|r| r[col].parse().unwrap()).collect();
            assert_eq!(vals.len(), 4);
            assert!(vals.windows(2).all(|w| w[1] >= w[0]), "J={j} col={col}: {vals:?}");
        }
    }
}

#[test]
fn cusp_demo_writes_data() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["cusp-demo", "--resolution", "32", "--seed", "4", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("internal chord-arc (sampled)"));
    let poly = std::fs::read_to_string(dir.path().join("cusp_polygon.txt")).unwrap();
    assert!(poly.lines().count() > 100);
    let pairs = std::fs::read_to_string(dir.path().join("cusp_pairs.csv")).unwrap();
    assert!(pairs.starts_with("x1,y1,x2,y2,arc,chord,internal\n"));
    assert!(run(&["cusp-demo", "--resolution", "8"]).status.code() == Some(1));
}
