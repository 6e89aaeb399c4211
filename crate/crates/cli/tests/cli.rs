use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fcir(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fcir")).args(args).current_dir(dir).output().expect("binary runs")
}

/// Runs a whitespace-separated command line.
fn fcir_line(line: &str, dir: &Path) -> Output {
    fcir(&line.split_whitespace().collect::<Vec<_>>(), dir)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(str::to_owned).collect()
}

const SMALL: [&str; 10] = ["--a", "1", "--sigma", "1", "--t-end", "1", "--dt", "0.01", "--hurst", "0.4"];

#[test]
fn simulate_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let o = fcir_line(
        "simulate --a 1 --k 1 --sigma 1 --hurst 0.6 --x0 1 --t-end 10 --dt 0.001 \
         --paths 50 --seed 42 --out paths.csv",
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = lines(&dir.path().join("paths.csv"));
    assert_eq!(rows[0], "path_id,t,y,x");
    assert_eq!(rows.len(), 1 + 50 * 10_001);
    assert!(rows.last().unwrap().starts_with("49,10.0,"));
}

#[test]
fn dump_paths_limits_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["simulate", "--k", "1", "--paths", "20", "--dump-paths", "3", "--out", "p.csv"];
    args.extend(SMALL);
    let o = fcir(&args, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(lines(&dir.path().join("p.csv")).len(), 1 + 3 * 101);
}

#[test]
fn missing_hurst_is_rejected_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = fcir(
        &["simulate", "--a", "1", "--k", "1", "--sigma", "1", "--paths", "2", "--out", "p.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--hurst"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn hurst_out_of_range_names_interval() {
    let dir = tempfile::tempdir().unwrap();
    let o = fcir(
        &["hitprob", "--a", "1", "--k", "1", "--sigma", "1", "--hurst", "1.2", "--out", "s.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("(0, 1)"), "{}", stderr(&o));
    assert!(!dir.path().join("s.csv").exists());
}

#[test]
fn validation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 5] = [
        &["compare", "--k1", "3", "--k2", "1"],
        &["hitprob", "--k", "1", "--paths", "0"],
        &["sweep", "--ks", "1,0.5"],
        &["hitprob", "--k", "1", "--fbm-backend", "cholesky"],
        &["residual", "--k", "1", "--dts", "0.03,0.02"],
    ];
    for case in cases {
        let mut args = case.to_vec();
        args.extend(SMALL);
        let o = fcir(&args, dir.path());
        assert_eq!(o.status.code(), Some(1), "{case:?}: {}", stderr(&o));
    }
    let o = fcir(&["hitprob", "--no-such-flag"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(fcir(&["--help"], dir.path()).status.success());
}

#[test]
fn unwritable_output_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["hitprob", "--k", "1", "--paths", "5", "--out", "missing/dir/s.csv"];
    args.extend(SMALL);
    let o = fcir(&args, dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn hitprob_is_deterministic_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &str, workers: &str| {
        let mut args = vec!["hitprob", "--k", "0.5", "--paths", "400", "--workers", workers, "--out", out];
        args.extend(SMALL);
        let o = fcir(&args, dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read(dir.path().join(out)).unwrap()
    };
    let first = run("a.csv", "1");
    assert_eq!(first, run("b.csv", "1"));
    assert_eq!(first, run("c.csv", "3"));
    let text = String::from_utf8(first).unwrap();
    assert!(
        text.starts_with("label,a,k,sigma,H,x0,T,dt,n_paths,n_hits,fraction,ci_low,ci_high,seed\nhitprob,")
    );
}

#[test]
fn sweep_rows_are_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["sweep", "--ks", "0.5,1,3", "--paths", "500", "--out", "sweep.csv"];
    args.extend(SMALL);
    let o = fcir(&args, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = lines(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 4);
    let fractions: Vec<f64> =
        rows[1..].iter().map(|r| r.split(',').nth(10).unwrap().parse().unwrap()).collect();
    assert!(fractions.windows(2).all(|w| w[1] <= w[0]), "{fractions:?}");
    assert!(rows[1].starts_with("sweep_k0.5,"));
}

#[test]
fn residual_medians_decrease() {
    let dir = tempfile::tempdir().unwrap();
    let o = fcir_line(
        "residual --a 1 --k 1 --sigma 1 --hurst 0.7 --x0 1 --t-end 1 \
         --dts 0.004,0.002,0.001 --paths 100 --out r.csv",
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = lines(&dir.path().join("r.csv"));
    assert_eq!(rows[0], "dt,median_residual,q90_residual,n_paths");
    let medians: Vec<f64> = rows[1..].iter().map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(medians.len(), 3);
    assert!(medians.windows(2).all(|w| w[1] < w[0]), "{medians:?}");
}

#[test]
fn compare_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["compare", "--k1", "1", "--k2", "3", "--paths", "50", "--out", "c.csv"];
    args.extend(SMALL);
    let o = fcir(&args, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = lines(&dir.path().join("c.csv"));
    assert_eq!(rows[0], "k1,k2,n_paths,n_order_violations,n_tau_violations,max_violation");
    assert!(rows[1].starts_with("1.0,3.0,50,"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("cfg.json"),
        r#"{"a": 1, "k": 1, "sigma": 1, "hurst": 0.4, "t-end": 1, "dt": 0.01, "paths": 30, "seed": 7}"#,
    )
    .unwrap();
    let o = fcir(&["hitprob", "--config", "cfg.json", "--k", "2", "--out", "s.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let row = &lines(&dir.path().join("s.csv"))[1];
    assert!(row.starts_with("hitprob,1.0,2.0,1.0,0.4,1.0,1.0,0.01,30,"), "{row}");
    assert!(row.ends_with(",7"));

    fs::write(dir.path().join("bad.json"), r#"{"hurts": 0.4}"#).unwrap();
    let o = fcir(&["hitprob", "--config", "bad.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = fcir(&["hitprob", "--config", "absent.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn repro_appendix_writes_manifest_and_paths() {
    let dir = tempfile::tempdir().unwrap();
    let o = fcir(&["repro-appendix", "--paths", "100", "--dump-paths", "2", "--out-dir", "out"], dir.path());
    let code = o.status.code().unwrap();
    assert!(code == 0 || code == 3, "{}", stderr(&o));
    let out = dir.path().join("out");
    let manifest = lines(&out.join("manifest.csv"));
    assert_eq!(manifest.len(), 9);
    assert!(manifest[0].ends_with(",expected,pass"));
    let any_fail = manifest[1..].iter().any(|r| r.ends_with(",false"));
    assert_eq!(code == 3, any_fail);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).count(), 8);
    for label in ["h0.6_k1_s1", "h0.2_k3_s1"] {
        assert_eq!(lines(&out.join(format!("{label}.csv"))).len(), 1 + 2 * 10_001);
    }
}
