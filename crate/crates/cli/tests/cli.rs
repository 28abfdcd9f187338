use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracflight"))
        .args(args)
        .env_remove("FRACFLIGHT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_rows(s: &str) -> Vec<&str> {
    s.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn telegraph_density_grid() {
    let o = run(&["telegraph", "density", "--alpha", "0.5", "--lambda", "1", "--c", "1", "--t", "2", "--grid", "401"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("# alpha=5.0000000000000000e-1\n"));
    assert!(s.contains("# grid=401\n"));
    assert!(s.contains("# singular_weight="));
    assert!(s.contains("# version="));
    let rows = data_rows(&s);
    assert_eq!(rows.len(), 401);
    let xs: Vec<f64> = rows.iter().map(|r| r.split(',').next().unwrap().parse().unwrap()).collect();
    assert!(xs[0] > -2.0 && xs[400] < 2.0);
    // symmetric density
    let first: f64 = rows[0].split(',').nth(1).unwrap().parse().unwrap();
    let last: f64 = rows[400].split(',').nth(1).unwrap().parse().unwrap();
    assert!((first - last).abs() <= 1e-12 * first);
}

#[test]
fn log_scale_transforms_the_density() {
    let base = ["telegraph", "density", "--alpha", "0.7", "--lambda", "1", "--c", "1", "--t", "1", "--grid", "5"];
    let plain = stdout(&run(&base));
    let mut args = base.to_vec();
    args.push("--log-scale");
    let logged = stdout(&run(&args));
    for (a, b) in data_rows(&plain).iter().zip(data_rows(&logged)) {
        let p: f64 = a.split(',').nth(1).unwrap().parse().unwrap();
        let l: f64 = b.split(',').nth(1).unwrap().parse().unwrap();
        assert!((p.log10() - l).abs() < 1e-15);
    }
}

#[test]
fn alpha_sweep_by_default() {
    let s = stdout(&run(&["telegraph", "density", "--lambda", "1", "--c", "1", "--t", "1", "--grid", "3"]));
    assert!(s.lines().any(|l| l == "alpha,x,ac_density"));
    assert_eq!(data_rows(&s).len(), 15);
}

#[test]
fn shape_classification() {
    let o = run(&["telegraph", "shape", "--alpha", "0.3333", "--k", "3", "--parity", "even"]);
    assert_eq!(stdout(&o), "uniform\n");
    let o = run(&["telegraph", "shape", "--alpha", "0.2", "--k", "1", "--parity", "odd"]);
    assert_eq!(stdout(&o), "arcsine\n");
    let o = run(&["telegraph", "shape", "--alpha", "1", "--k", "2", "--parity", "even"]);
    assert_eq!(stdout(&o), "bell\n");
}

#[test]
fn verify_all_json() {
    let o = run(&["verify", "all", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["max_residual"].as_f64().unwrap() <= 1e-9);
    let cases = v["cases"].as_array().unwrap();
    assert!(cases.len() >= 80);
    assert!(cases.iter().all(|c| c["report"]["ledger"].as_array().is_some_and(|l| !l.is_empty())));
}

#[test]
fn verify_failure_exits_three() {
    // at this tolerance even rounding counts as failure
    let o = run(&["verify", "kg1d-iterate", "--alpha", "0.3", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("# passed=false"));
}

#[test]
fn exit_codes() {
    let o = run(&["telegraph", "density", "--alpha", "1.5", "--lambda", "1", "--c", "1", "--t", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("α must lie in (0, 1]"));
    assert_eq!(run(&["verify", "no-such-case"]).status.code(), Some(2));
    assert_eq!(run(&["specfun", "eval", "--fn", "gamma", "--x", "-2"]).status.code(), Some(2));
    assert_eq!(run(&["specfun", "eval", "--fn", "ml", "--alpha", "0.5", "--x", "1e6"]).status.code(), Some(3));
    assert_eq!(run(&["telegraph", "bogus"]).status.code(), Some(2));
}

#[test]
fn sampling_is_independent_of_workers() {
    let base = ["telegraph", "sample", "--alpha", "0.6", "--lambda", "1", "--c", "1", "--t", "1", "-n", "20000", "--seed", "11"];
    let one = run(&[&base[..], &["--workers", "1"]].concat());
    let four = run(&[&base[..], &["--workers", "4"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(data_rows(&stdout(&one)).len(), 20000);
}

#[test]
fn seed_from_environment() {
    let args = ["fpp", "sample", "--alpha", "0.5", "--lambda", "2", "--t", "1", "-n", "50"];
    let a = Command::new(env!("CARGO_BIN_EXE_fracflight")).args(args).env("FRACFLIGHT_SEED", "5").output().unwrap();
    let b = Command::new(env!("CARGO_BIN_EXE_fracflight")).args(args).env("FRACFLIGHT_SEED", "6").output().unwrap();
    let sa = stdout(&a);
    assert!(sa.contains("# seed=5\n"));
    assert_ne!(data_rows(&sa), data_rows(&stdout(&b)));
    let c = run(&[&args[..], &["--seed", "5"]].concat());
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn help_shows_formulas() {
    for (cmd, needle) in [
        (vec!["telegraph", "density"], "E_{α,1}(λt^α)"),
        (vec!["telegraph", "shape"], "αk-1"),
        (vec!["planar", "density"], "αn/(2π(ct)^{αn})"),
        (vec!["planar", "thinned"], "(ct+α(w-ct))^{n-1}"),
        (vec!["planar", "project"], "Γ((αk+1)/2)²"),
        (vec!["flight", "ndim"], "Γ((kα+N)/2)"),
        (vec!["flight", "4d"], "E_{α/2,α/2-1}"),
        (vec!["fpp", "pmf"], "Γ(αk+1)"),
        (vec!["mcbride", "monomial"], "Γ(b_k+β/m+1)"),
        (vec!["mcbride", "ek"], "Γ(η+β/m+1)"),
        (vec!["specfun", "eval"], "E_{α,β}(x)"),
        (vec!["verify"], "L^α u = μ u + f"),
    ] {
        let mut args = cmd.clone();
        args.push("--help");
        let o = run(&args);
        assert!(o.status.success());
        assert!(stdout(&o).contains(needle), "{cmd:?} help lacks {needle}");
    }
}

#[test]
fn other_subcommands() {
    let s = stdout(&run(&["mcbride", "monomial", "--op", "bessel-2d", "--alpha", "1", "--beta", "2"]));
    let row: Vec<f64> = data_rows(&s)[0].split(',').map(|v| v.parse().unwrap()).collect();
    assert!((row[1] - 6.0).abs() < 1e-13 && row[2] == 0.0);
    let s = stdout(&run(&["mcbride", "ek", "--m", "1", "--eta", "0", "--alpha", "0.5", "--beta", "0", "--x", "1"]));
    let row: Vec<f64> = data_rows(&s)[0].split(',').map(|v| v.parse().unwrap()).collect();
    assert!((row[1] - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-12 && (row[2] - row[1]).abs() < 1e-8);
    let s = stdout(&run(&["fpp", "pmf", "--alpha", "1", "--lambda", "1", "--t", "1", "--kmax", "2"]));
    let p0: f64 = data_rows(&s)[0].split(',').nth(1).unwrap().parse().unwrap();
    assert!((p0 - (-1f64).exp()).abs() < 1e-15);
    let s = stdout(&run(&["specfun", "eval", "--fn", "i0", "--x", "2"]));
    assert!(data_rows(&s)[0].starts_with("2.0000000000000000e0,2.27958530233606"));
    for args in [
        vec!["planar", "density", "--alpha", "0.6", "--lambda", "1", "--c", "1", "--t", "1", "--grid", "7"],
        vec!["planar", "project", "--alpha", "0.6", "--lambda", "1", "--c", "1", "--t", "1", "--grid", "7"],
        vec!["planar", "thinned", "--alpha", "0.5", "--c", "1", "--t", "1", "-n", "5", "--grid", "7"],
        vec!["planar", "thinned", "--alpha", "0.5", "--c", "1", "--t", "1", "--lambda", "1", "--mixing", "fractional", "--grid", "7"],
        vec!["flight", "ndim", "--dim", "3", "--alpha", "0.5", "--c", "1", "--t", "1", "--k", "2", "--grid", "7"],
        vec!["flight", "ndim", "--dim", "3", "--alpha", "0.5", "--c", "1", "--t", "1", "--solution", "--grid", "7"],
        vec!["flight", "4d", "--alpha", "1.5", "--lambda", "1", "--c", "1", "--t", "1", "--grid", "7"],
    ] {
        let o = run(&args);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(data_rows(&stdout(&o)).len(), 7, "{args:?}");
    }
    let s = stdout(&run(&["planar", "sample", "--alpha", "0.6", "--lambda", "1", "--c", "1", "--t", "1", "-n", "10"]));
    assert_eq!(data_rows(&s).len(), 10);
    let s = stdout(&run(&["flight", "4d", "--alpha", "2", "--lambda", "1", "--c", "1", "--t", "1", "--sample", "10"]));
    assert_eq!(data_rows(&s).len(), 10);
    let o = run(&["planar", "thinned", "--alpha", "0.5", "--c", "1", "--t", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn json_format() {
    let o = run(&["fpp", "pmf", "--alpha", "0.5", "--lambda", "1", "--t", "1", "--kmax", "3", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["columns"][1], "pmf");
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    assert_eq!(v["meta"]["kmax"], "3");
}
