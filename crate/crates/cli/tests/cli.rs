use std::process::{Command, Output};

use tunepriv::accountant::AccountantReport;
use tunepriv::audit::AuditReport;
use tunepriv::discrete::{CampaignReport, PureTightness};

fn tunepriv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tunepriv"))
        .args(args)
        .env_remove("TUNEPRIV_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json_field(text: &str, key: &str) -> f64 {
    let v: serde_json::Value = serde_json::from_str(text).unwrap();
    v[key].as_f64().unwrap()
}

#[test]
fn accountant_point_mass_one_is_the_base_curve() {
    let o = tunepriv(&[
        "accountant",
        "--base",
        "gdp:mu=1",
        "--xi",
        "pointmass:k=1",
        "--delta-h",
        "1e-5",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    assert!((json_field(&s, "eps_h") - 4.36).abs() < 0.02);
    assert_eq!(json_field(&s, "log_ratio"), 0.0);
}

#[test]
fn accountant_tnb_adds_the_log_ratio() {
    let o = tunepriv(&[
        "accountant",
        "--base",
        "gdp:mu=1",
        "--xi",
        "tnb:eta=1,nu=1e-2",
        "--delta-h",
        "1e-3",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let eps = json_field(&s, "eps_h");
    assert!((eps - json_field(&s, "eps_base") - json_field(&s, "log_ratio")).abs() < 1e-12);
    assert!((eps - 7.66).abs() < 0.05, "{eps}");
}

#[test]
fn accountant_text_lists_every_quantity() {
    let o = tunepriv(&[
        "accountant",
        "--base",
        "gdp:mu=1",
        "--xi",
        "tnb:eta=1,nu=1e-2",
        "--delta-h",
        "1e-3",
    ]);
    let s = stdout(&o);
    for key in ["eps_h", "delta_h", "eps_base", "log_ratio", "argmax_a"] {
        assert!(s.lines().any(|l| l.starts_with(key)), "{key} missing in\n{s}");
    }
}

#[test]
fn infinite_epsilon_exits_3() {
    // per-run δ falls below the curve's own δ
    let o = tunepriv(&[
        "accountant",
        "--base",
        "epsdelta:eps=1,delta=1e-3",
        "--xi",
        "pointmass:k=2",
        "--delta-h",
        "1e-3",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("inf"));
}

#[test]
fn malformed_xi_exits_2_naming_the_token() {
    let o = tunepriv(&[
        "accountant",
        "--base",
        "gdp:mu=1",
        "--xi",
        "tnb:eta=1,nu=zero",
        "--delta-h",
        "1e-5",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nu=zero"), "{}", stderr(&o));

    let o = tunepriv(&[
        "accountant",
        "--base",
        "gdp:sigma=1",
        "--xi",
        "pointmass:k=1",
        "--delta-h",
        "1e-5",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sigma"));
}

#[test]
fn out_of_domain_parameter_exits_2() {
    let o = tunepriv(&[
        "accountant",
        "--base",
        "gdp:mu=1",
        "--xi",
        "tnb:eta=1,nu=1.5",
        "--delta-h",
        "1e-5",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn zero_trials_exits_2() {
    let o = tunepriv(&["audit", "--eps-b", "1", "--xi", "pointmass:k=1", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = tunepriv(&["audit", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn json_round_trips_through_the_library_types() {
    let o = tunepriv(&[
        "accountant",
        "--base",
        "gdp:mu=0.7",
        "--xi",
        "tnb:eta=0,nu=0.05",
        "--delta-h",
        "1e-4",
        "--format",
        "json",
    ]);
    let s = stdout(&o);
    let r: AccountantReport<f64> = serde_json::from_str(&s).unwrap();
    assert_eq!(serde_json::to_string_pretty(&r).unwrap() + "\n", s);

    let o = tunepriv(&[
        "accountant",
        "--base",
        "epsdelta:eps=1,delta=1e-3",
        "--xi",
        "pointmass:k=2",
        "--delta-h",
        "1e-3",
        "--format",
        "json",
    ]);
    let s = stdout(&o);
    let r: AccountantReport<f64> = serde_json::from_str(&s).unwrap();
    assert!(r.eps_h.is_infinite());
    assert_eq!(serde_json::to_string_pretty(&r).unwrap() + "\n", s);

    let o = tunepriv(&[
        "audit",
        "--eps-b",
        "1",
        "--xi",
        "pointmass:k=2",
        "--trials",
        "20000",
        "--thresholds",
        "16",
    ]);
    let s = stdout(&o);
    let r: AuditReport = serde_json::from_str(&s).unwrap();
    assert_eq!(r.trials, 20000);
    assert_eq!(serde_json::to_string_pretty(&r).unwrap() + "\n", s);

    let o = tunepriv(&["tightness", "pure", "--format", "json"]);
    let s = stdout(&o);
    let r: PureTightness = serde_json::from_str(&s).unwrap();
    assert_eq!(serde_json::to_string_pretty(&r).unwrap() + "\n", s);

    let o = tunepriv(&["theorem4", "--instances", "50", "--format", "json"]);
    let s = stdout(&o);
    let r: CampaignReport = serde_json::from_str(&s).unwrap();
    assert_eq!(serde_json::to_string_pretty(&r).unwrap() + "\n", s);
}

fn significant_digits(field: &str) -> usize {
    let mantissa = field.split('e').next().unwrap();
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    digits.trim_start_matches('0').len()
}

#[test]
fn compare_csv_has_fixed_columns_and_six_digits() {
    let o = tunepriv(&[
        "compare",
        "--eps-b",
        "1,4",
        "--xi",
        "tnb:eta=1,nu=1e-3",
        "--xi",
        "pointmass:k=1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    let mut lines = s.lines();
    assert_eq!(lines.next().unwrap(), "eps_b,tau,eta,nu,E_xi,eps_ours,eps_prior,reason");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(r.len(), 8);
        for f in &r[..7] {
            if *f != "NA" {
                assert!(significant_digits(f) <= 6, "{f}");
                f.parse::<f64>().unwrap();
            }
        }
    }
    assert!(significant_digits(rows[0][5]) == 6);
    // ε_B = 4, TNB(1, 1e-3)
    let ours: f64 = rows[2][5].parse().unwrap();
    assert!((ours - 8.95).abs() < 0.15, "{ours}");
    // the prior bound does not apply to a point mass
    assert_eq!(rows[1][6], "NA");
    assert!(!rows[1][7].is_empty());
    let base_like: f64 = rows[1][5].parse().unwrap();
    assert!((base_like - 1.0).abs() < 0.2);
}

#[test]
fn compare_first_budget_row() {
    let mut args = vec!["compare", "--eps-b", "1"];
    for xi in [
        "tnb:eta=0,nu=1e-2",
        "tnb:eta=1,nu=1e-2",
        "tnb:eta=1,nu=1e-3",
        "tnb:eta=2,nu=1e-3",
    ] {
        args.extend(["--xi", xi]);
    }
    let s = stdout(&tunepriv(&args));
    let ours = [1.55, 2.06, 2.54, 3.18];
    let prior = [1.86, 2.65, 3.09, 3.99];
    for (i, line) in s.lines().skip(1).enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        let o: f64 = f[5].parse().unwrap();
        let p: f64 = f[6].parse().unwrap();
        assert!((o - ours[i]).abs() <= 0.1, "ours {o} vs {}", ours[i]);
        assert!((p - prior[i]).abs() <= 0.1, "prior {p} vs {}", prior[i]);
    }
}

#[test]
fn compare_with_no_run_counts_prints_header_only() {
    let o = tunepriv(&["compare", "--eps-b", "1,2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "eps_b,tau,eta,nu,E_xi,eps_ours,eps_prior,reason\n");
}

#[test]
fn compare_reports_na_instead_of_failing() {
    // a negative budget cannot be calibrated
    let o = tunepriv(&["compare", "--eps-b=-1", "--xi", "tnb:eta=1,nu=1e-2"]);
    assert_eq!(o.status.code(), Some(0));
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    let f: Vec<&str> = row.split(',').collect();
    assert_eq!(f.len(), 8);
    assert_eq!((f[5], f[6]), ("NA", "NA"));
    assert!(!f[7].is_empty());
}

#[test]
fn compare_with_audit_adds_the_lower_bound_column() {
    let o = tunepriv(&[
        "compare",
        "--eps-b",
        "1",
        "--xi",
        "pointmass:k=1",
        "--audit-trials",
        "20000",
    ]);
    let s = stdout(&o);
    assert!(s.starts_with("eps_b,tau,eta,nu,E_xi,eps_ours,eps_prior,eps_lower,reason\n"));
    let f: Vec<&str> = s.lines().nth(1).unwrap().split(',').collect();
    let lower: f64 = f[7].parse().unwrap();
    assert!((0.0..1.5).contains(&lower));
}

#[test]
fn out_flag_writes_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.txt");
    let o = tunepriv(&["tightness", "pure", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("2.96453"));
    assert!(text.contains("0.99108"));
}

#[test]
fn audit_sweep_file_and_csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = dir.path().join("sweep.csv");
    let o = tunepriv(&[
        "audit",
        "--base",
        "dpsgd:sigma=100,tau=1,n=1000",
        "--xi",
        "pointmass:k=1",
        "--trials",
        "10000",
        "--thresholds",
        "8",
        "--sweep",
        sweep.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let written = std::fs::read_to_string(&sweep).unwrap();
    assert_eq!(written, stdout(&o));
    assert!(written.starts_with("threshold,fp,fn,fp_upper,fn_upper,eps_lower\n"));
}

#[test]
fn audit_is_deterministic_and_thread_independent() {
    let args = [
        "audit",
        "--eps-b",
        "2",
        "--xi",
        "tnb:eta=1,nu=0.1",
        "--trials",
        "150000",
        "--seed",
        "9",
    ];
    let a = tunepriv(&args);
    let mut with_threads = args.to_vec();
    with_threads.extend(["--threads", "1"]);
    let b = tunepriv(&with_threads);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn tightness_outputs() {
    let s = stdout(&tunepriv(&["tightness", "pure"]));
    assert!(s.contains("eps_tuned      2.96453 (at B)"), "{s}");
    assert!(s.contains("generic_bound  3"));
    let s = stdout(&tunepriv(&["tightness", "approx", "--format", "json"]));
    assert!((json_field(&s, "eps_predicted") - 3.11).abs() < 0.01);
}

#[test]
fn theorem4_campaign_passes() {
    let o = tunepriv(&["theorem4", "--instances", "200", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("passed     200"));
}
