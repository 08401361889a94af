use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/hong2005.json")
}

fn piv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_piv"))
        .args(args)
        .env_remove("PIV_SEED")
        .output()
        .unwrap()
}

fn with_fixture(sub: &str, rest: &[&str]) -> Output {
    let cfg = fixture();
    let mut args = vec![sub, "--config", cfg.to_str().unwrap()];
    args.extend_from_slice(rest);
    piv(&args)
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "exit {:?}: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

#[test]
fn point_piv_text() {
    let out = stdout(&with_fixture(
        "piv",
        &["--treated-un", "45.78", "--control-un", "45.2"],
    ));
    assert!(out.contains("PIV = 0.7724"), "{out}");
    assert!(out.contains("inputs: Ytob 36.77 Ycob 45.78"), "{out}");
    assert!(out.contains("direction: negative"), "{out}");
}

#[test]
fn point_piv_json_matches_library() {
    let v = json(&with_fixture(
        "piv",
        &[
            "--treated-un",
            "45.78",
            "--control-un",
            "45.2",
            "--output",
            "json",
        ],
    ));
    let study = piv::study::ObservedStudy {
        mean_treated_obs: 36.77,
        mean_control_obs: 45.78,
        var_treated: 143.26,
        var_control: 138.83,
        n_obs: 7639,
        prop_treated: 0.0617,
    };
    let lib = piv::engine::piv(
        &study,
        45.78,
        45.2,
        &piv::study::ThresholdSpec::default(),
        piv::study::EffectDirection::NegativeSignificant,
    )
    .unwrap();
    let r = &v["result"];
    assert_eq!(r["piv"].as_f64().unwrap(), lib.piv.value());
    assert_eq!(r["probit_value"].as_f64().unwrap(), lib.probit_value);
    assert_eq!(r["delta_hat_ideal"].as_f64().unwrap(), lib.delta_hat_ideal);
    assert_eq!(r["se_ideal"].as_f64().unwrap(), lib.se_ideal);
    assert_eq!(r["t_ratio"].as_f64().unwrap(), lib.t_ratio);
    assert_eq!(r["threshold_value"].as_f64().unwrap(), lib.threshold_value);
    assert_eq!(r["direction"], "negative");
    assert_eq!(v["provenance"]["tool"], "piv");
    assert_eq!(v["provenance"]["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["provenance"]["inputs"]["study"]["n_obs"], 7639);
}

#[test]
fn json_is_byte_stable() {
    let args = [
        "--treated-un",
        "45.78",
        "--control-un",
        "45.2",
        "--replications",
        "20000",
        "--seed",
        "99",
        "--output",
        "json",
    ];
    let a = with_fixture("simulate", &args);
    let b = with_fixture("simulate", &args);
    assert_eq!(stdout(&a), stdout(&b));
    let v = json(&a);
    assert_eq!(v["provenance"]["seed"], 99);
    assert!(v["provenance"]["rng"].as_str().unwrap().contains("ChaCha8"));
}

#[test]
fn seed_from_environment() {
    let cfg = fixture();
    let run = |seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_piv"));
        cmd.args([
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--treated-un",
            "45.78",
            "--replications",
            "5000",
            "--output",
            "json",
        ]);
        match seed {
            Some(s) => cmd.env("PIV_SEED", s),
            None => cmd.env_remove("PIV_SEED"),
        };
        json(&cmd.output().unwrap())
    };
    assert_eq!(run(Some("123"))["provenance"]["seed"], 123);
    assert_eq!(run(None)["provenance"]["seed"], piv::oracle::DEFAULT_SEED);
}

#[test]
fn table_reproduces_reference_rows() {
    let out = stdout(&with_fixture(
        "table",
        &[
            "--control-un",
            "45.2",
            "--levels",
            "0.1:0.9:0.1",
            "--output",
            "csv",
        ],
    ));
    let table: piv::report::ThresholdTable = piv::report::Dataset::from_csv(&out).unwrap();
    let reference = [
        (0.1, 46.19, -0.13),
        (0.2, 46.11, -0.21),
        (0.3, 46.04, -0.28),
        (0.4, 45.98, -0.33),
        (0.5, 45.93, -0.38),
        (0.6, 45.88, -0.43),
        (0.7, 45.83, -0.48),
        (0.8, 45.76, -0.54),
        (0.9, 45.67, -0.62),
    ];
    assert_eq!(table.rows.len(), 9);
    for (row, (level, t, d)) in table.rows.iter().zip(reference) {
        assert!((row.piv_level - level).abs() < 1e-12);
        assert!((row.treated_un_threshold - t).abs() <= 0.01, "{row:?}");
        assert!((row.delta_hat_ideal - d).abs() <= 0.01, "{row:?}");
    }
}

#[test]
fn table_text_golden() {
    let out = stdout(&with_fixture("table", &["--levels", "0.5,0.8"]));
    let tail: Vec<&str> = out.lines().skip(3).collect();
    assert_eq!(
        tail,
        [
            "     PIV        Ytun    delta_id",
            "     0.5       45.93     -0.3766",
            "     0.8       45.76     -0.5384",
        ]
    );
}

#[test]
fn report_golden() {
    let out = stdout(&with_fixture("report", &[]));
    assert!(
        out.contains("probit(PIV) = 0.321·Ycun - 4.883·Ytun + 209.767"),
        "{out}"
    );
    assert!(out.contains("probit(PIV) = 224.280 - 4.883·Ytun"), "{out}");
    assert!(out.contains("Step 7 (verdict): borderline"), "{out}");
    assert_eq!(out.matches("Step ").count(), 8);
}

#[test]
fn bound_and_invert() {
    let v = json(&with_fixture("bound", &["--output", "json"]));
    let lower = v["bounds"]["lower"]["piv"].as_f64().unwrap();
    assert!((lower - 0.77).abs() < 0.005);
    let v = json(&with_fixture(
        "invert",
        &["--target", "0.8", "--output", "json"],
    ));
    assert!((v["inversion"]["treated_un"].as_f64().unwrap() - 45.76).abs() < 0.01);
}

#[test]
fn grid_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("grid.csv");
    let svg_path = dir.path().join("grid.svg");
    for (fmt, path) in [("csv", &csv_path), ("svg", &svg_path)] {
        let o = with_fixture(
            "grid",
            &[
                "--control-range",
                "36.77:45.78",
                "--resolution",
                "41",
                "--output",
                fmt,
                "--out",
                path.to_str().unwrap(),
            ],
        );
        assert_eq!(stdout(&o), "");
    }
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let grid: piv::report::ContourGrid = piv::report::Dataset::from_csv(&csv).unwrap();
    assert_eq!(grid.rows.len(), 41 * 41);
    assert!(csv.lines().any(|l| l == "control_un,treated_un,probit,piv"));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains(r#"data-level="0.8""#));
}

#[test]
fn power_outputs() {
    let v = json(&with_fixture(
        "power",
        &["--treated-un", "45.76", "--output", "json"],
    ));
    assert!((v["shaded_mass_cdf"].as_f64().unwrap() - 0.8).abs() < 0.01);
    let svg = stdout(&with_fixture(
        "power",
        &["--treated-un", "45.76", "--output", "svg"],
    ));
    assert!(svg.contains(r#"class="threshold""#));
}

#[test]
fn simulate_curve_csv() {
    let out = stdout(&with_fixture(
        "simulate",
        &[
            "--grid",
            "45.67,45.93,46.19",
            "--replications",
            "10000",
            "--output",
            "csv",
        ],
    ));
    assert!(out.contains("# seed: 20050205"), "{out}");
    let header = out.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(
        header,
        "treated_un,piv,piv_hat,mc_stderr,t_ratio,delta_hat_ideal"
    );
}

#[test]
fn flags_override_config() {
    let v = json(&with_fixture(
        "piv",
        &[
            "--treated-un",
            "45.78",
            "--n-obs",
            "10000",
            "--alpha",
            "0.01",
            "--output",
            "json",
        ],
    ));
    let inputs = &v["provenance"]["inputs"];
    assert_eq!(inputs["study"]["n_obs"], 10000);
    let critical = inputs["threshold"]["statistical"]["critical"]
        .as_f64()
        .unwrap();
    assert!((critical - 2.575_829_303_548_901).abs() < 1e-9);
}

#[test]
fn config_only_from_flags() {
    let out = stdout(&piv(&[
        "piv",
        "--mean-treated-obs",
        "36.77",
        "--mean-control-obs",
        "45.78",
        "--var-treated",
        "143.26",
        "--var-control",
        "138.83",
        "--n-obs",
        "7639",
        "--prop-treated",
        "0.0617",
        "--treated-un",
        "45.78",
        "--control-un",
        "45.2",
    ]));
    assert!(out.contains("PIV = 0.7724"));
}

#[test]
fn validation_error_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = std::fs::read_to_string(fixture())
        .unwrap()
        .replace("143.26", "-1");
    std::fs::write(&bad, text).unwrap();
    let o = piv(&[
        "piv",
        "--config",
        bad.to_str().unwrap(),
        "--treated-un",
        "45.78",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("var_treated"));
}

#[test]
fn degenerate_math_exits_3() {
    // zero observed effect: no direction to infer
    let o = with_fixture(
        "piv",
        &["--mean-treated-obs", "45.78", "--treated-un", "45.78"],
    );
    assert_eq!(o.status.code(), Some(3));
    // PIV of exactly 1 cannot be inverted
    let o = with_fixture("invert", &["--target", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn io_error_exits_1() {
    let o = piv(&["piv", "--config", "/nonexistent/hong.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(
        with_fixture("piv", &["--output", "csv", "--treated-un", "45.78"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(piv(&["frobnicate"]).status.code(), Some(2));
    // a point-only subcommand with an interval belief
    assert_eq!(with_fixture("piv", &[]).status.code(), Some(2));
}
