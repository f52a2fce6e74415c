use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ipr_rmt::ensembles::EnsembleSpec;
use ipr_rmt::experiments::{spectrum_ipr_map, RunConfig};
use ipr_rmt_cli::error::CliError;
use ipr_rmt_cli::output::{read_records_csv, with_output, write_records_csv};

fn ipr_rmt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ipr-rmt")).args(args).env_remove("IPR_RMT_SEED").output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(ipr_rmt(&["sample-spectrum", "--N", "4", "--bogus"]).status.code(), Some(1));
    assert_eq!(ipr_rmt(&["sample-spectrum", "--N", "4", "--tau", "2"]).status.code(), Some(1));
    assert_eq!(ipr_rmt(&["sample-spectrum", "--tau", "0.5"]).status.code(), Some(1));
    assert_eq!(ipr_rmt(&["theory-density", "--q", "2"]).status.code(), Some(1));
    assert_eq!(ipr_rmt(&["theory-density", "--q", "2", "--y", "1", "--grid", "1:2"]).status.code(), Some(1));
    assert_eq!(
        ipr_rmt(&["compare", "--ensemble", "ginibre-complex", "--N", "8", "--y", "1", "--seed", "1"]).status.code(),
        Some(1)
    );
    assert_eq!(ipr_rmt(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_config_is_a_usage_error() {
    let out = ipr_rmt(&["theory-mean", "--config", "/nonexistent/settings.json", "--q", "2", "--y", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("settings.json");
    fs::write(&path, r#"{"q": [2], "y": 1.0, "colour": "blue"}"#).unwrap();
    let out = ipr_rmt(&["theory-mean", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn density_table_has_expected_shape_and_mass() {
    let text = stdout(&ipr_rmt(&["theory-density", "--q", "2", "--y", "0.5", "--tau", "0", "--grid", "2:3:3"]));
    let rows = csv_rows(&text);
    assert_eq!(rows[0], ["x", "density"]);
    assert_eq!(rows.len(), 4);
    let xs: Vec<f64> = rows[1..].iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(xs, [2.0, 2.5, 3.0]);
    assert_eq!(rows[1][1].parse::<f64>().unwrap(), 0.0);
    assert!(rows[2][1].parse::<f64>().unwrap() > 0.0);

    // The default grid spans the support.
    let text = stdout(&ipr_rmt(&["theory-density", "--q", "2", "--y", "1.5", "--tau", "0.3"]));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 501);
    assert_eq!((rows[1][0].as_str(), rows[500][0].as_str()), ("2.0", "3.0"));

    // Away from the integrable edge singularities, the integrated density matches the CDF table.
    let args = ["--q", "2", "--y", "1.5", "--tau", "0.3", "--grid", "2.2:2.8:4001"];
    let density = stdout(&ipr_rmt(&[&["theory-density"][..], &args].concat()));
    let pts: Vec<(f64, f64)> =
        csv_rows(&density)[1..].iter().map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap())).collect();
    let mass: f64 = pts.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum();
    let cdf = stdout(&ipr_rmt(&[&["theory-cdf"][..], &args].concat()));
    let cdf = csv_rows(&cdf);
    let expected = cdf[4001][1].parse::<f64>().unwrap() - cdf[1][1].parse::<f64>().unwrap();
    assert!((mass - expected).abs() < 1e-6, "mass {mass} vs {expected}");
}

#[test]
fn cdf_table_is_monotone_from_zero_to_one() {
    let text = stdout(&ipr_rmt(&["theory-cdf", "--q", "3", "--y", "1", "--grid", "6:15:50"]));
    let rows = csv_rows(&text);
    assert_eq!(rows[0], ["x", "cdf"]);
    let f: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(f[0].abs() < 1e-12 && (f[f.len() - 1] - 1.0).abs() < 1e-12);
    assert!(f.windows(2).all(|w| w[1] >= w[0] - 1e-14));
}

#[test]
fn theory_mean_reports_limit_and_finite_size() {
    let text = stdout(&ipr_rmt(&["theory-mean", "--q", "2", "--y", "0.5", "--N", "100"]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let limit = v["limit_mean"].as_f64().unwrap();
    let finite = v["finite_n_mean"].as_f64().unwrap();
    assert!(limit > 2.0 && limit < 3.0);
    // The finite-size mean carries the factor N/(N+2) for q = 2.
    assert!((finite - limit * 100.0 / 102.0).abs() < 1e-12, "{finite} vs {limit}");
}

#[test]
fn theory_samples_lie_in_the_support() {
    let text = stdout(&ipr_rmt(&["theory-sample", "--q", "2", "--y", "0.8", "--count", "500", "--seed", "3"]));
    let rows = csv_rows(&text);
    assert_eq!(rows[0], ["ell"]);
    assert_eq!(rows.len(), 501);
    assert!(rows[1..].iter().all(|r| (2.0..=3.0).contains(&r[0].parse::<f64>().unwrap())));
}

#[test]
fn records_csv_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spectrum.csv");
    let out = ipr_rmt(&[
        "sample-spectrum",
        "--N",
        "12",
        "--tau",
        "0.3",
        "--trials",
        "3",
        "--q",
        "2,4",
        "--seed",
        "17",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let read = read_records_csv(fs::File::open(&path).unwrap()).unwrap();

    let spec = EnsembleSpec::elliptic(12, 0.3);
    spec.validate().unwrap();
    let direct = spectrum_ipr_map(&RunConfig::new(spec, 3, vec![2, 4], 17)).unwrap();
    assert_eq!(read.len(), direct.len());
    // Each retained non-real eigenvalue stands for a conjugate pair.
    assert_eq!(read.iter().map(|r| if r.is_real_eig { 1 } else { 2 }).sum::<usize>(), 36);
    for (a, b) in read.iter().zip(&direct) {
        assert_eq!((a.trial_id, a.index, a.is_real_eig), (b.trial_id, b.index, b.is_real_eig));
        assert!((a.re_lambda - b.re_lambda).abs() <= 1e-12);
        assert!((a.im_lambda - b.im_lambda).abs() <= 1e-12);
        assert!((a.residual - b.residual).abs() <= 1e-12);
        for q in [2, 4] {
            assert!((a.ipr[&q] - b.ipr[&q]).abs() <= 1e-12);
        }
    }
}

#[test]
fn zero_records_give_a_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    write_records_csv(&[], &[2, 3], Some(&path)).unwrap();
    assert_eq!(fs::read_to_string(&path).unwrap(), "trial,idx,re_lambda,im_lambda,is_real,ipr_q2,ipr_q3,residual\n");
    assert!(read_records_csv(fs::File::open(&path).unwrap()).unwrap().is_empty());
}

#[test]
fn failed_output_leaves_no_partial_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("partial.csv");
    let result = with_output(Some(&path), |w| {
        writeln!(w, "a,b")?;
        Err(CliError::Runtime("interrupted".into()))
    });
    assert!(result.is_err());
    assert!(!path.exists());
}

#[test]
fn echoed_settings_replay_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let first = ipr_rmt(&["sample-spectrum", "--N", "10", "--tau", "0.5", "--trials", "4", "--q", "2,3"]);
    let echoed = String::from_utf8(first.stderr.clone()).unwrap();
    let config = dir.path().join("replay.json");
    fs::write(&config, echoed.lines().next().unwrap()).unwrap();
    let second = ipr_rmt(&["sample-spectrum", "--config", config.to_str().unwrap()]);
    assert_eq!(stdout(&first), stdout(&second));
}

#[test]
fn seed_from_environment_matches_flag() {
    let flag = stdout(&ipr_rmt(&["sample-spectrum", "--N", "6", "--trials", "2", "--seed", "99"]));
    let env = Command::new(env!("CARGO_BIN_EXE_ipr-rmt"))
        .args(["sample-spectrum", "--N", "6", "--trials", "2"])
        .env("IPR_RMT_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(flag, stdout(&env));
}

#[test]
fn worker_count_does_not_change_output() {
    let run = |workers: &str| {
        stdout(&ipr_rmt(&[
            "sample-spectrum",
            "--ensemble",
            "permutation-sum",
            "--N",
            "9",
            "--d",
            "3",
            "--trials",
            "13",
            "--q",
            "2",
            "--seed",
            "5",
            "--workers",
            workers,
        ]))
    };
    let one = run("1");
    assert_eq!(one, run("3"));
    assert_eq!(one, run("8"));
}

fn count_circles(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().matches("<circle").count()
}

#[test]
fn figure_draws_every_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("scatter.svg");
    let out = ipr_rmt(&[
        "figure",
        "--ensemble",
        "ginibre-complex",
        "--N",
        "16",
        "--trials",
        "2",
        "--seed",
        "4",
        "--out",
        svg.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<?xml") && text.trim_end().ends_with("</svg>"));
    assert_eq!(count_circles(&svg), 32);
}

#[test]
fn real_spectra_are_mirrored_in_the_scatter() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("spectrum.csv");
    let svg = dir.path().join("scatter.svg");
    let out = ipr_rmt(&[
        "sample-spectrum",
        "--N",
        "20",
        "--trials",
        "2",
        "--seed",
        "8",
        "--out",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let records = read_records_csv(fs::File::open(&csv).unwrap()).unwrap();
    let complex = records.iter().filter(|r| !r.is_real_eig).count();
    assert_eq!(count_circles(&svg), records.len() + complex);
    // Only the upper half-plane member of each conjugate pair is kept.
    assert_eq!(records.len() + complex, 40);
}

#[test]
fn convergence_table_lists_each_dimension() {
    let text = stdout(&ipr_rmt(&[
        "convergence",
        "--q",
        "2",
        "--y",
        "1",
        "--tau",
        "0.2",
        "--N",
        "32,64",
        "--trials",
        "300",
        "--seed",
        "2",
    ]));
    let rows = csv_rows(&text);
    assert_eq!(rows[0], ["N", "mean", "std", "std_error", "theory_mean"]);
    assert_eq!(rows[1][0], "32");
    assert_eq!(rows[2][0], "64");
    for r in &rows[1..] {
        let (mean, se, theory): (f64, f64, f64) = (r[1].parse().unwrap(), r[3].parse().unwrap(), r[4].parse().unwrap());
        assert!((mean - theory).abs() < 5.0 * se, "{r:?}");
    }
}

#[test]
fn fixed_mixing_requires_both_amplitudes() {
    assert_eq!(ipr_rmt(&["convergence", "--q", "2", "--s", "0.5", "--N", "16"]).status.code(), Some(1));
}
