use std::process::{Command, Output};

fn fhle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fhle")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn classify_examples() {
    let out = fhle(&["classify", "--n", "3", "--s", "0.5", "--a", "1", "--p", "4"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["verdict"], "SupercriticalTheoremApplies");
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["p_sobolev"], 3.0);
    assert!(v["jl_threshold"].is_null());

    let v = json(&fhle(&["classify", "--n", "3", "--s", "0.5", "--a", "1", "--p", "2"]));
    assert_eq!(v["verdict"], "Subcritical");

    let out = fhle(&["classify", "--n", "3", "--s", "1.0", "--a", "1", "--p", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("s=1 unsupported"));
}

#[test]
fn classify_reports_threshold_when_present() {
    let v = json(&fhle(&["classify", "--n", "10", "--s", "0.5", "--p", "2"]));
    let pc = v["jl_threshold"].as_f64().unwrap();
    assert!((pc - 3.179107535442).abs() < 1e-9, "{pc}");
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn sweep_over_p_has_positive_margins() {
    let out = fhle(&["sweep", "--axis", "p", "--lo", "3.01", "--hi", "100", "--count", "64", "--spacing", "geometric", "--n", "3", "--s", "0.5", "--a", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), "axis_value,p_sobolev,margin,verdict,lambda_alpha,amplitude_A");
    let rows = rows(&text);
    assert_eq!(rows.len(), 64);
    assert!(rows.iter().all(|r| r[2].parse::<f64>().unwrap() > 0.0));
}

#[test]
fn sweep_over_dimension_flips_once() {
    let out = fhle(&["sweep", "--axis", "n", "--lo", "3", "--hi", "30", "--count", "28", "--s", "0.5", "--a", "0", "--p", "10"]);
    assert!(out.status.success());
    let rows = rows(&stdout(&out));
    assert_eq!(rows.len(), 28);
    let flips: Vec<usize> = rows.windows(2).enumerate().filter(|(_, w)| w[0][3] != w[1][3]).map(|(k, _)| k).collect();
    assert_eq!(flips.len(), 1);
    let k = flips[0];
    assert_eq!(rows[k][3], "SupercriticalTheoremApplies");
    assert_eq!(rows[k + 1][3], "SupercriticalTheoremSilent");
    let (m0, m1): (f64, f64) = (rows[k][2].parse().unwrap(), rows[k + 1][2].parse().unwrap());
    assert!(m0 > 0.0 && m1 < 0.0);
}

#[test]
fn sweep_rejects_empty_range() {
    let out = fhle(&["sweep", "--axis", "p", "--lo", "4", "--hi", "3", "--count", "5", "--n", "3", "--s", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = fhle(&["sweep", "--axis", "p", "--lo", "3", "--hi", "4", "--count", "1", "--n", "3", "--s", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_config_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"axis": "s", "lo": 0.1, "hi": 0.9, "count": 5, "n": 4, "a": 1, "p": 6}"#).unwrap();
    let a = fhle(&["sweep", "--config", cfg.to_str().unwrap()]);
    let b = fhle(&["sweep", "--axis", "s", "--lo", "0.1", "--hi", "0.9", "--count", "5", "--n", "4", "--a", "1", "--p", "6"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    // explicit flags override the file
    let c = fhle(&["sweep", "--config", cfg.to_str().unwrap(), "--count", "3"]);
    assert_eq!(rows(&stdout(&c)).len(), 3);
}

#[test]
fn missing_config_is_an_io_failure() {
    let out = fhle(&["classify", "--config", "/nonexistent/fhle.conf"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_constants_lines() {
    let out = fhle(&["verify", "constants"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("κ_s·κ_{1−s}=1 PASS"));
    assert!(text.contains("λ(0)=Λ PASS"));
}

#[test]
fn verify_kernels_and_extension() {
    let text = stdout(&fhle(&["verify", "kernels"]));
    assert!(text.lines().any(|l| l.starts_with("A/hardy_integral=λ(α)/Λ") && l.contains("PASS") && l.contains("tolerance 1.0e-4")));
    let text = stdout(&fhle(&["verify", "extension"]));
    assert!(text.lines().any(|l| l.starts_with("trace identity") && l.contains("PASS") && l.contains("tolerance 1.0e-2")));
}

#[test]
fn verify_json_has_schema() {
    let v = json(&fhle(&["verify", "estimates", "--json"]));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["failed"], 0);
}

#[test]
fn jl_finds_the_root_at_dimension_ten() {
    let v = json(&fhle(&["jl", "--n", "10", "--s", "0.5", "--json"]));
    let roots = v["roots"].as_array().unwrap();
    assert_eq!(roots.len(), 1);
    assert!(roots[0]["residual"].as_f64().unwrap().abs() < 1e-8);
    let v = json(&fhle(&["jl", "--n", "3", "--s", "0.5", "--a", "1", "--json"]));
    assert!(v["roots"].as_array().unwrap().is_empty());
}

#[test]
fn kernel_table_and_identity() {
    let text = stdout(&fhle(&["kernel", "--n", "3", "--s", "0.5", "--alpha", "1", "--c", "0"]));
    let k: f64 = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((k - 0.5).abs() < 1e-10);
    let v = json(&fhle(&["kernel", "--n", "3", "--s", "0.5", "--a", "1", "--p", "4", "--json"]));
    let id = &v["identity"];
    let (r, t) = (id["ratio"].as_f64().unwrap(), id["lambda_over_hardy"].as_f64().unwrap());
    assert!((r - t).abs() < 1e-4 * t);
}

#[test]
fn extend_writes_field_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("field.csv");
    let trace = dir.path().join("trace.csv");
    let out = fhle(&["extend", "--n", "1", "--s", "0.5", "--r-max", "3", "--output", field.to_str().unwrap(), "--trace", trace.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&field).unwrap();
    assert_eq!(text.lines().next().unwrap(), "r,y,value");
    assert!(text.lines().skip(1).all(|l| l.split(',').count() == 3));
    let text = std::fs::read_to_string(&trace).unwrap();
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let exact = (1.0 - v[0] * v[0]) / ((1.0 + v[0] * v[0]) * (1.0 + v[0] * v[0]));
        assert!((v[1] - exact).abs() < 1e-3);
    }
}

#[test]
fn extend_reads_sampled_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("u.csv");
    let mut text = String::from("r,u\n");
    for k in 0..=200 {
        let r = k as f64 * 0.1;
        text.push_str(&format!("{r},{}\n", 1.0 / (1.0 + r * r)));
    }
    std::fs::write(&input, &text).unwrap();
    let ok = fhle(&["extend", "--n", "1", "--s", "0.5", "--r-max", "2", "--input", input.to_str().unwrap(), "--tail-exponent", "2", "--json"]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "r,u\n0,1\nzero,2\n").unwrap();
    assert_eq!(fhle(&["extend", "--n", "1", "--s", "0.5", "--input", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn energy_curve_csv() {
    let out = fhle(&["energy", "--field", "homogeneous", "--n", "3", "--s", "0.5", "--p", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("lambda,E,part_bulk,part_nonlinear,part_sphere_1"));
    let e: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(e.len(), 7);
    assert!(e.iter().all(|v| (v - e[0]).abs() < 1e-10 * e[0].abs()));
}

#[test]
fn thread_cap_does_not_change_output() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_fhle"))
            .env("FHLE_THREADS", threads)
            .args(["sweep", "--axis", "a", "--lo", "0", "--hi", "2", "--count", "9", "--n", "5", "--s", "0.3", "--p", "3"])
            .output()
            .unwrap()
    };
    let (a, b) = (run("1"), run("4"));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(run("zero").status.code(), Some(2));
}
