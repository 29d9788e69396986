use std::process::{Command, Output};

fn fbl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fbl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(rows: &[Vec<String>], name: &str) -> usize {
    rows[0].iter().position(|h| h == name).unwrap()
}

#[test]
fn gaussian_volume_converse_point() {
    let o = fbl(&[
        "bound", "--source", "gms", "--sigma2", "1", "--d", "0.25", "--eps", "1e-2", "--n", "1000",
        "--bound", "volume-converse", "--format", "csv",
    ]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    let rate: f64 = rows[1][column(&rows, "rate_bits")].parse().unwrap();
    assert!((1.07..=1.08).contains(&rate), "{rate}");
    assert_eq!(rows[1][column(&rows, "kind")], "converse");
}

#[test]
fn equiprobable_achievability_exceeds_rate_distortion() {
    let o = fbl(&[
        "bound", "--source", "bms", "--p", "0.5", "--d", "0.11", "--eps", "1e-2", "--n", "100",
        "--bound", "ebms-ach", "--format", "csv",
    ]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    let rate: f64 = rows[1][column(&rows, "rate_bits")].parse().unwrap();
    assert!(rate.is_finite() && rate > 0.5);
}

#[test]
fn nats_switch_changes_units() {
    let base = [
        "bound", "--source", "bes", "--delta", "0.1", "--d", "0.1", "--eps", "0.1", "--n", "200",
        "--bound", "bes-conv", "--format", "csv",
    ];
    let bits = csv_rows(&stdout(&fbl(&base)));
    let mut with_nats = base.to_vec();
    with_nats.push("--nats");
    let nats = csv_rows(&stdout(&fbl(&with_nats)));
    let b: f64 = bits[1][column(&bits, "rate_bits")].parse().unwrap();
    let n: f64 = nats[1][column(&nats, "rate_nats")].parse().unwrap();
    assert!((n - b * std::f64::consts::LN_2).abs() < 1e-9);
}

#[test]
fn distortion_mode_inverts_rate_mode() {
    let o = fbl(&[
        "bound", "--source", "gms", "--sigma2", "1", "--rate", "1", "--eps", "1e-2", "--n", "500",
        "--bound", "volume-converse", "--format", "csv",
    ]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    let d: f64 = rows[1][column(&rows, "d")].parse().unwrap();
    // a converse distortion lies above the asymptotic limit 2^{-2R} = 1/4
    assert!(d > 0.25 && d < 0.35, "{d}");
}

#[test]
fn usage_and_domain_errors_exit_2() {
    let missing = fbl(&[
        "bound", "--source", "bms", "--d", "0.11", "--eps", "1e-2", "--n", "100", "--bound", "ebms-ach",
    ]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("--p"));

    let unknown = fbl(&[
        "bound", "--source", "bms", "--p", "0.4", "--d", "0.11", "--eps", "1e-2", "--n", "100",
        "--bound", "no-such-bound",
    ]);
    assert_eq!(unknown.status.code(), Some(2));

    let out_of_range = fbl(&[
        "bound", "--source", "bms", "--p", "0.4", "--d", "0.11", "--eps", "1.5", "--n", "100",
        "--bound", "bms-ach",
    ]);
    assert_eq!(out_of_range.status.code(), Some(2));

    let wrong_source = fbl(&[
        "bound", "--source", "bms", "--p", "0.4", "--d", "0.11", "--eps", "0.1", "--n", "100",
        "--bound", "ebms-ach",
    ]);
    assert_eq!(wrong_source.status.code(), Some(2));

    assert_eq!(fbl(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn type_budget_exits_3() {
    let o = fbl(&[
        "bound", "--source", "dms", "--pmf", "0.25,0.25,0.25,0.25", "--d", "0.1", "--eps", "1e-2",
        "--n", "1000", "--bound", "dms-ht-conv",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
}

#[test]
fn sweep_is_sorted_deterministic_and_reports_errors_as_rows() {
    let args = [
        "sweep", "--source", "bms", "--p", "0.4", "--d", "0.11", "--eps", "1e-2", "--n", "10:50:20",
        "--bounds", "bms-tilted-conv,bms-cc-ach,approx",
    ];
    let a = fbl(&args);
    let b = fbl(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let rows = csv_rows(&stdout(&a));
    assert_eq!(rows[0], ["n", "bound", "kind", "rate_bits"]);
    assert_eq!(rows.len(), 1 + 3 * 3);
    let keys: Vec<(u64, String)> = rows[1..]
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].clone()))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    // the constant-composition bound is vacuous at n = 10 for these parameters
    let cc10 = rows.iter().find(|r| r[0] == "10" && r[1] == "bms-cc-ach").unwrap();
    assert_eq!(cc10[2], "error");
    assert_eq!(cc10[3], "");
}

#[test]
fn csv_numbers_have_at_most_12_significant_digits() {
    let o = fbl(&[
        "sweep", "--source", "gms", "--sigma2", "1", "--d", "0.25", "--eps", "1e-2", "--n",
        "100:300:100",
    ]);
    for row in csv_rows(&stdout(&o)).iter().skip(1) {
        let digits = row[3].chars().take_while(|c| *c != 'e').filter(|c| c.is_ascii_digit());
        let sig: String = digits.skip_while(|c| *c == '0').collect();
        assert!(sig.len() <= 12, "{row:?}");
    }
}

#[test]
fn figure_writes_csv_with_full_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = fbl(&["figure", "fig6", "--out", out]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("fig6.csv")).unwrap();
    let rows = csv_rows(&text);
    // three curves over thirteen blocklengths
    assert_eq!(rows.len() - 1, 3 * 13);
    assert!(!dir.path().join("fig6.svg").exists());
}

#[test]
fn curve_figure_with_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = fbl(&["figure", "fig4", "--out", out, "--svg"]);
    assert!(o.status.success());
    let rows = csv_rows(&std::fs::read_to_string(dir.path().join("fig4.csv")).unwrap());
    assert_eq!(rows[0][0], "d");
    assert_eq!(rows.len() - 1, 39);
    // the rate-distortion function decreases along the grid
    let rates: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(rates.windows(2).all(|w| w[1] <= w[0]));
    let svg = std::fs::read_to_string(dir.path().join("fig4.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(!svg.contains("href") && !svg.contains("<image"));
    assert!(svg.contains("polyline"));
    assert_eq!(fbl(&["figure", "fig7", "--out", out]).status.code(), Some(2));
}

#[test]
fn plan_gaussian_distortion_mode() {
    let o = fbl(&[
        "plan", "--source", "gms", "--sigma2", "1", "--mode", "distortion", "--rate", "1", "--eps",
        "1e-2", "--excess", "0.1", "--format", "csv",
    ]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    let n: f64 = rows[1][column(&rows, "n")].parse().unwrap();
    assert!((n - 1082.3).abs() < 0.5, "{n}");
    let sf: f64 = rows[1][column(&rows, "source_factor")].parse().unwrap();
    assert_eq!(sf, 2.0);
}

#[test]
fn plan_zero_dispersion_flag() {
    let o = fbl(&["plan", "--source", "bms", "--p", "0.5", "--d", "0", "--eps", "1e-2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("zero dispersion"));
    assert!(text.lines().any(|l| l.starts_with("blocklength") && l.trim_end().ends_with(" 0")));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# defaults\nsource = bes\ndelta = 0.1\nd = 0.1\neps = 0.5\nn = 300\nbound = bes-conv\nformat = csv\n",
    )
    .unwrap();
    let out = dir.path().join("point.csv");
    let o = fbl(&[
        "bound",
        "--config",
        cfg.to_str().unwrap(),
        "--eps",
        "0.1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(rows[1][column(&rows, "eps")], "0.1");
    assert_eq!(rows[1][column(&rows, "n")], "300");

    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "just words\n").unwrap();
    let o = fbl(&["plan", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = fbl(&["plan", "--config", dir.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_passes_with_fixed_seed() {
    let o = fbl(&["verify", "--trials", "40000", "--seed", "7", "--threads", "2"]);
    let text = stdout(&o);
    assert!(o.status.success(), "{text}");
    assert!(text.lines().all(|l| l.starts_with("PASS")));
    assert_eq!(text.lines().count(), 32 + 6 + 3);
}
