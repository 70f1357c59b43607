use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ris_sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ris-sim")).args(args).output().expect("binary runs")
}

fn write_spec(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn gen_spec(experiment: &str) -> String {
    let out = ris_sim(&["gen-spec", experiment]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn run(spec: &str, out_dir: &Path, extra: &[&str]) {
    let mut args = vec!["run", spec, "--out-dir", out_dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = ris_sim(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn nulling_template_covers_every_sweep_point() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), "nulling.toml", &gen_spec("nulling_prob"));
    run(&spec, tmp.path(), &["--trials", "3", "--seed", "9"]);

    let summary = fs::read_to_string(tmp.path().join("nulling_prob_summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(lines.next(), Some("q,alpha_max_sq_db,success_prob,trials"));
    assert_eq!(lines.count(), 13 * 4);

    let rows = fs::read_to_string(tmp.path().join("nulling_prob.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 13 * 4 * 3);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("nulling_prob.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["trials"], 3);
    assert_eq!(manifest["spec_sha256"].as_str().unwrap().len(), 64);

    let out = ris_sim(&["summarize", tmp.path().join("nulling_prob.csv").to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1 + 13 * 4);
}

#[test]
fn reruns_are_byte_identical_across_worker_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(
        tmp.path(),
        "small.toml",
        "experiment = \"sumrate_vs_pk\"\ntrials = 3\nschemes = [\"srb_one_loop\", \"srb_one_loop_zs\", \"rb_fixed_active\"]\n\n\
         [sweep]\nalpha_max_sq_db = [30.0]\np_k_dbm = [15.0, 25.0]\n\n[base]\nq1 = 2\nq2 = 2\n",
    );
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    run(&spec, &a, &["--workers", "1"]);
    run(&spec, &b, &["--workers", "3"]);
    run(&spec, &c, &["--workers", "1", "--seed", "77"]);
    let first = fs::read(a.join("sumrate_vs_pk.csv")).unwrap();
    assert_eq!(first, fs::read(b.join("sumrate_vs_pk.csv")).unwrap());
    assert_ne!(first, fs::read(c.join("sumrate_vs_pk.csv")).unwrap());
    assert_eq!(String::from_utf8(first).unwrap().lines().count(), 1 + 2 * 3 * 3);
}

#[test]
fn malformed_spec_reports_position_and_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), "bad.toml", "experiment = \"nulling_prob\"\ntrials = \"many\"\n");
    let out = ris_sim(&["run", &spec, "--out-dir", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
    assert!(err.contains("column"), "{err}");

    let spec = write_spec(tmp.path(), "unknown.toml", "experiment = \"nulling_prob\"\nfrobnicate = 1\n");
    let out = ris_sim(&["run", &spec]);
    assert_eq!(out.status.code(), Some(2));

    let spec = write_spec(
        tmp.path(),
        "axes.toml",
        "experiment = \"nulling_prob\"\n[sweep]\nq = [8]\nalpha_max_sq_db = [0.0]\np_k_dbm = [10.0]\n",
    );
    assert_eq!(ris_sim(&["run", &spec]).status.code(), Some(2));
    assert_eq!(ris_sim(&["gen-spec", "nope"]).status.code(), Some(2));
}

#[test]
fn missing_spec_file_is_an_io_error() {
    let out = ris_sim(&["run", "/nonexistent/spec.toml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn summary_pairs_schemes_over_shared_trials() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("pm.csv");
    fs::write(
        &csv,
        "trial,alpha_max_sq_db,rate_req_bps_hz,scheme,status,feasible,power_w,active_res,dca_iters,outer_iters\n\
         0,10,0.3,srb,optimal,true,1.0,3,2,4\n\
         0,10,0.3,rb_fully_active,optimal,true,2.0,32,1,1\n\
         1,10,0.3,srb,optimal,true,1.5,4,2,3\n\
         1,10,0.3,rb_fully_active,optimal,true,3.5,32,1,1\n\
         2,10,0.3,srb,infeasible,false,NaN,0,0,1\n\
         2,10,0.3,rb_fully_active,infeasible,false,NaN,0,0,1\n",
    )
    .unwrap();
    let out_path = tmp.path().join("summary.csv");
    let out = ris_sim(&["summarize", csv.to_str().unwrap(), "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let mut reader = csv::Reader::from_path(&out_path).unwrap();
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][col("scheme")], "srb");
    assert_eq!(&rows[0][col("paired_ref")], "");
    assert_eq!(&rows[1][col("paired_ref")], "srb");
    assert_eq!(&rows[1][col("paired_n")], "2");
    assert_eq!(rows[1][col("paired_diff_mean")].parse::<f64>().unwrap(), 1.5);
    let success: f64 = rows[0][col("success_prob")].parse().unwrap();
    assert!((success - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn convergence_run_emits_trajectories() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(
        tmp.path(),
        "conv.toml",
        "experiment = \"sumrate_convergence\"\ntrials = 2\n\n[sweep]\nalpha_max_sq_db = [30.0]\n\n[base]\nq1 = 2\nq2 = 2\n",
    );
    run(&spec, tmp.path(), &[]);
    let mut reader = csv::Reader::from_path(tmp.path().join("sumrate_convergence.csv")).unwrap();
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        ["trial", "alpha_max_sq_db", "scheme", "status", "iteration", "sum_rate"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    for trial in ["0", "1"] {
        for scheme in ["srb_one_loop", "srb_two_loop"] {
            let traj: Vec<f64> = rows
                .iter()
                .filter(|r| &r[0] == trial && &r[2] == scheme)
                .map(|r| r[5].parse().unwrap())
                .collect();
            assert!(traj.len() >= 2, "{scheme} trial {trial}");
            for w in traj.windows(2) {
                assert!(w[1] >= w[0] * (1.0 - 1e-8));
            }
        }
    }
}
