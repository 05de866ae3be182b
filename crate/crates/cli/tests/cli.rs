use std::process::{Command, Output};

use serde_json::Value;

fn lft(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lft")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is json")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn diamond_example() {
    let o = lft(&["diamond", "--P", r#"{"lambda":2,"A":[[2]],"b":[1],"c":[3],"d":5}"#]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["lambda"], 2.0);
    assert_eq!(v["A"][0][0], 0.25);
    assert_eq!(v["b"][0], -0.75);
    assert_eq!(v["c"][0], -0.5);
    assert_eq!(v["d"], -3.5);
}

#[test]
fn diamond_random_lists_pairs() {
    let o = lft(&["diamond", "--P-random", "3", "--dim", "2", "--seed", "4"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v.as_array().unwrap().len(), 3);
    assert_eq!(v[0]["P"]["A"].as_array().unwrap().len(), 2);
}

#[test]
fn theorem_on_quadratic_passes() {
    let o = lft(&["verify", "theorem", "--fn", "quadratic", "--P-random", "100", "--seed", "7"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["status"], "pass");
    assert!(v["checks"][0]["worst_violation"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn theorem_single_parameter_lists_probes() {
    let o = lft(&[
        "verify",
        "theorem",
        "--fn",
        "exp",
        "--engine",
        "newton",
        "--P",
        r#"{"lambda":2,"A":[[2]],"b":[1],"c":[3],"d":5}"#,
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["engine"], "newton");
    assert_eq!(v["probes"].as_array().unwrap().len(), 41);
}

#[test]
fn exit_code_follows_report_status() {
    let o = lft(&["verify", "theorem", "--fn", "exp", "--engine", "grid-fast", "--P-random", "5", "--tol", "1e-300"]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["status"], "fail");

    let o = lft(&["verify", "involution", "--P-random", "50"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["status"], "pass");
}

#[test]
fn conjugate_of_exp_approximates_entropy() {
    let o = lft(&["conjugate", "--fn", "exp", "--grid", "-3:3:601", "--engine", "grid-fast"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.starts_with("axis0,value\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 601);
    for row in &rows {
        let eta: f64 = row[0].parse().unwrap();
        let value: f64 = row[1].parse().unwrap();
        let exact = eta * eta.ln() - eta;
        // grid spacing 0.01 bounds the sampling error by eta * spacing² / 8
        assert!((value - exact).abs() <= 1e-4 * eta.max(1.0), "{eta}: {value} vs {exact}");
    }
}

#[test]
fn conjugate_engines_agree_on_dual_grid() {
    let run = |engine: &str| {
        let o =
            lft(&["conjugate", "--fn", "power-norm{p=3}", "--grid", "-2:2:401", "--dual-grid", "-1:1:21", "--engine", engine]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        csv_rows(&stdout(&o)).into_iter().map(|r| r[1].parse::<f64>().unwrap()).collect::<Vec<_>>()
    };
    let closed = run("closed");
    for engine in ["newton", "grid-brute", "grid-fast"] {
        for (a, b) in closed.iter().zip(run(engine)) {
            assert!((a - b).abs() < 1e-3, "{engine}: {a} vs {b}");
        }
    }
}

#[test]
fn plotdata_has_all_curves() {
    let o = lft(&["plotdata", "--fn", "exp-abs", "--with-conjugate", "--with-subgradients", "--grid", "-3:3:601"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.starts_with("curve,x,value\n"));
    let rows = csv_rows(&text);
    for curve in ["primal", "conjugate", "subgradient-lower", "subgradient-upper"] {
        assert_eq!(rows.iter().filter(|r| r[0] == curve).count(), 601, "{curve}");
    }
    let upper_at_one = rows.iter().find(|r| r[0] == "subgradient-upper" && r[1] == "1").unwrap();
    let slope: f64 = upper_at_one[2].parse().unwrap();
    assert!((slope - (1f64.exp() - 1.0)).abs() < 1e-5);
}

#[test]
fn outputs_are_deterministic() {
    let runs = [
        vec!["verify", "convexity", "--P-random", "3", "--seed", "11", "--format", "csv"],
        vec!["deform", "--fn", "exp", "--P-random", "1", "--seed", "5", "--grid", "-1:1:11", "--format", "json"],
        vec!["plotdata", "--fn", "exp", "--with-conjugate", "--grid", "-2:2:101"],
    ];
    for args in runs {
        let a = lft(&args);
        let b = lft(&args);
        assert_eq!(code(&a), code(&b));
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn deform_samples_deformed_function() {
    let o = lft(&["deform", "--fn", "quadratic", "--P", r#"{"lambda":2,"A":[[2]],"b":[1],"c":[3],"d":5}"#, "--grid", "0:1:3"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&stdout(&o));
    // 2·½(2θ+1)² + 3θ + 5
    for row in rows {
        let t: f64 = row[0].parse().unwrap();
        let v: f64 = row[1].parse().unwrap();
        assert!((v - ((2.0 * t + 1.0).powi(2) + 3.0 * t + 5.0)).abs() < 1e-12);
    }
}

#[test]
fn divergence_single_and_batch() {
    let o = lft(&["divergence", "--fn", "quadratic", "--theta", "3", "--eta", "1"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    for key in ["bregman_primal", "bregman_dual", "fenchel_young"] {
        assert!((v[key].as_f64().unwrap() - 2.0).abs() < 1e-12, "{key}");
    }

    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("points.csv");
    std::fs::write(&input, "theta0,eta0\n3,1\n0.5,-1\n").unwrap();
    let out = dir.path().join("div.csv");
    let o = lft(&["divergence", "--fn", "quadratic", "--batch", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("theta0,eta0,bregman_primal,bregman_dual,fenchel_young\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][2].parse::<f64>().unwrap(), 1.125);
}

#[test]
fn config_aliases_and_tolerances() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    std::fs::write(&path, r#"{"aliases": {"e": "exp"}, "tolerances": {"involution": 1e-300}}"#).unwrap();
    let cfg = path.to_str().unwrap();

    let o = lft(&["conjugate", "--fn", "e", "--grid", "-1:1:5", "--config", cfg]);
    assert_eq!(code(&o), 0);

    let o = lft(&["verify", "involution", "--P-random", "20", "--config", cfg]);
    assert_eq!(code(&o), 1);
    let o = lft(&["verify", "involution", "--P-random", "20", "--config", cfg, "--tol", "1e-10"]);
    assert_eq!(code(&o), 0);

    std::fs::write(&path, r#"{"tolerances": {"nonsense": 1}}"#).unwrap();
    let o = lft(&["verify", "involution", "--config", cfg]);
    assert_eq!(code(&o), 2);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["frobnicate"],
        vec!["conjugate"],
        vec!["conjugate", "--fn", "exp", "--grid", "3:-3:10"],
        vec!["conjugate", "--fn", "no-such-function"],
        vec!["diamond", "--P", "{\"lambda\":1}"],
        vec!["verify", "legendre-type"],
        vec!["verify", "theorem", "--engine", "warp"],
    ] {
        assert_eq!(code(&lft(&args)), 2, "{args:?}");
    }
}

#[test]
fn numeric_failures_exit_three_with_json() {
    let o = lft(&["conjugate", "--fn", "rockafellar-2d", "--grid", "0:1:5,0.1:1:5", "--engine", "grid-fast"]);
    assert_eq!(code(&o), 3);
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "unsupported");
    assert_eq!(err["exit_code"], 3);

    let o = lft(&["conjugate", "--fn", "rockafellar-2d", "--grid", "0:1:5,0.1:1:5", "--engine", "closed"]);
    assert_eq!(code(&o), 3);
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "no-rule");
}
