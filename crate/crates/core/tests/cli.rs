use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_postwidder"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(o: &Output) -> Vec<Vec<String>> {
    stdout(o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn stable_density_at_one() {
    let o = run(&["--dist", "alpha-stable:alpha=0.5,c=1", "--func", "pdf", "--x", "1", "--tol", "1e-6"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().next().unwrap(), "x,value,abs_err,rel_err,points_used,converged,clamped");
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 1);
    let v: f64 = rows[0][1].parse().unwrap();
    assert!((v - 0.219696).abs() < 5e-7, "{v}");
    assert_eq!(rows[0][5], "true");
}

#[test]
fn chi_squared_cdf() {
    let o = run(&["--dist", "chi2:weights=1", "--func", "cdf", "--x", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: f64 = csv_rows(&o)[0][1].parse().unwrap();
    assert!((v - 0.683).abs() < 5e-4);
}

#[test]
fn linear_grid_records() {
    let o = run(&["--dist", "chi2", "--x-min", "0.05", "--x-max", "2", "--steps", "40"]);
    assert_eq!(o.status.code(), Some(0));
    let xs: Vec<f64> = csv_rows(&o).iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(xs.len(), 40);
    assert!(xs.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(xs[0], 0.05);
}

#[test]
fn records_sorted_by_x() {
    let o = run(&["--dist", "inverse-gaussian", "--x", "2,0.5,1"]);
    let xs: Vec<f64> = csv_rows(&o).iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(xs, vec![0.5, 1.0, 2.0]);
}

#[test]
fn csv_and_json_agree() {
    let args = ["--dist", "ou-gamma:eta=1,kappa=1,theta=1", "--x", "0.5,1,2", "--func", "cdf"];
    let c = run(&args);
    let mut json_args = args.to_vec();
    json_args.extend(["--output", "json"]);
    let j = run(&json_args);
    assert_eq!(c.status.code(), j.status.code());
    let rows = csv_rows(&c);
    let parsed: serde_json::Value = serde_json::from_slice(&j.stdout).unwrap();
    let arr = parsed.as_array().unwrap();
    assert_eq!(arr.len(), rows.len());
    for (row, obj) in rows.iter().zip(arr) {
        for (i, key) in ["x", "value", "abs_err", "rel_err"].iter().enumerate() {
            assert_eq!(row[i].parse::<f64>().unwrap(), obj[key].as_f64().unwrap(), "{key}");
        }
        assert_eq!(row[4], obj["points_used"].to_string());
        assert_eq!(row[5], obj["converged"].to_string());
        assert_eq!(row[6], obj["clamped"].to_string());
    }
}

#[test]
fn output_path() {
    let path = std::env::temp_dir().join(format!("postwidder-cli-{}.csv", std::process::id()));
    let o = run(&["--dist", "chi2", "--x", "1", "--output-path", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn unknown_distribution_lists_names() {
    let o = run(&["--dist", "weibull", "--x", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    for name in postwidder::models::CATALOG_NAMES {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn argument_errors_exit_one() {
    for args in [
        vec!["--x", "1"],
        vec!["--dist", "chi2", "--x", "1", "--func", "quantile"],
        vec!["--dist", "chi2", "--x-min", "0", "--x-max", "1"],
        vec!["--dist", "chi2", "--x", "1", "--tol", "-1"],
        vec!["--dist", "alpha-stable:alpha=0.5,c=1,bogus=2", "--x", "1"],
    ] {
        assert_eq!(run(&args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn invalid_model_exits_two() {
    let o = run(&["--dist", "alpha-stable:alpha=1.2", "--x", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unconverged_points_exit_three() {
    let o = run(&["--dist", "chi2", "--x", "1,2", "--tol", "1e-9", "--max-points", "3", "--precision", "double"]);
    assert_eq!(o.status.code(), Some(3));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[5] == "false"));
}

#[test]
fn tight_tolerance_promotes_precision() {
    let o = run(&["--dist", "alpha-stable:alpha=0.5", "--x", "1", "--tol", "1e-13"]);
    assert_eq!(o.status.code(), Some(0));
    let err = String::from_utf8(o.stderr.clone()).unwrap();
    assert!(err.contains("extended"), "{err}");
    let v: f64 = csv_rows(&o)[0][1].parse().unwrap();
    assert!((v - 0.219695644733861).abs() < 1e-14);
}

#[test]
fn help_and_version_exit_zero() {
    let h = run(&["--help"]);
    assert_eq!(h.status.code(), Some(0));
    let text = stdout(&h);
    for flag in ["--dist", "--func", "--method", "--tol", "--precision", "--x-min", "--spacing", "--output-path"] {
        assert!(text.contains(flag), "{flag}");
    }
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}
