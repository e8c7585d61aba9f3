use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("thermoform").chain(args.iter().copied());
    let code = thermoform_cli::run(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn verify_vp_on_golden_mean() {
    let r = run(&["verify-vp", &fixture("golden.model")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = json(&r.stdout);
    let res = &doc["result"];
    let log_g = ((1.0 + 5f64.sqrt()) / 2.0).ln();
    let spectral = res["spectral"].as_f64().unwrap();
    let constructed = res["constructed"]["value"].as_f64().unwrap();
    let optimizer = res["optimizer"]["value"].as_f64().unwrap();
    let comb = res["combinatorial"].as_array().unwrap();
    let last = comb.last().unwrap();
    let n = last["n"].as_f64().unwrap();
    assert!((spectral - log_g).abs() < 1e-12);
    assert!((constructed - log_g).abs() < 1e-10);
    assert!((optimizer - log_g).abs() < 1e-3);
    assert!((last["matrix_power"].as_f64().unwrap() - log_g).abs() <= 5.0 / n);
    assert!(res["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
    assert_eq!(doc["config"]["seed"], 20240601);
    assert_eq!(doc["config"]["n_max"], 12);
    assert!(r.stderr.contains("4/4 checks passed"));
}

#[test]
fn empty_row_is_an_input_error() {
    let r = run(&["validate", &fixture("bad.model")]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("EmptyRow(0)"), "{}", r.stderr);
    assert!(r.stdout.is_empty());
}

#[test]
fn duplicate_edges_and_unknown_fields_are_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let dup = dir.path().join("dup.model");
    std::fs::write(&dup, "{\"states\": 1, \"edges\": [{\"from\": 1, \"to\": 1}, {\"from\": 1, \"to\": 1}]}").unwrap();
    let r = run(&["validate", "--input", dup.to_str().unwrap()]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("ParseError"));
    let extra = dir.path().join("extra.model");
    std::fs::write(&extra, "{\"states\": 1, \"edges\": [], \"colour\": 3}").unwrap();
    let r = run(&["validate", extra.to_str().unwrap()]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("unknown field"));
    let r = run(&["validate", dir.path().join("missing.model").to_str().unwrap()]);
    assert_eq!(r.code, 1);
}

#[test]
fn exact_backward_tree_has_4096_atoms() {
    let r = run(&["backward", "--p", "1", "--q", "2", "--c", "0", "--x", "2", "--n", "12", "--mode", "exact"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let lines: Vec<&str> = r.stdout.lines().collect();
    assert_eq!(lines.len(), 4096);
    for line in &lines {
        let f: Vec<f64> = line.split(' ').map(|t| t.parse().unwrap()).collect();
        assert_eq!(f.len(), 3);
        assert!(((f[0] * f[0] + f[1] * f[1]).sqrt() - 1.0).abs() < 1e-3);
        assert!((f[2] + 12.0 * 2f64.ln()).abs() < 1e-12);
    }
    assert!(r.stderr.contains("hyperbolicity"));
}

#[test]
fn sampled_runs_are_reproducible() {
    let args = ["backward", "--p", "2", "--q", "3", "--c", "0.1", "--n", "9", "--mode", "sampled", "--samples", "500"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    let mut seeded = args.to_vec();
    seeded.extend(["--seed", "7"]);
    assert_ne!(run(&seeded).stdout, a.stdout);

    let dir = tempfile::tempdir().unwrap();
    let (p1, p2) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
    for p in [&p1, &p2] {
        let r = run(&["sample", &fixture("golden.model"), "--n", "200", "--output", p.to_str().unwrap()]);
        assert_eq!(r.code, 0);
        assert!(r.stdout.starts_with("sample: 200 states"));
    }
    let text = std::fs::read_to_string(&p1).unwrap();
    assert_eq!(text, std::fs::read_to_string(&p2).unwrap());
    assert!(text.starts_with("# seed=20240601 generator=chacha20"));
    assert_eq!(text.lines().count(), 201);
}

#[test]
fn complex_config_file_and_report() {
    let r = run(&["backward", "--input", &fixture("basilica.json"), "--format", "report"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = json(&r.stdout);
    assert_eq!(doc["config"]["potential"]["kind"], "geometric");
    assert_eq!(doc["config"]["mode"], "exact");
    assert_eq!(doc["config"]["seed"], 20240601);
    assert_eq!(doc["result"]["atoms"], 256);
    assert!((doc["result"]["total_mass"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(doc["warnings"][0].as_str().unwrap().contains("hyperbolicity"));
    // flags override the file
    let r = run(&["backward", "--input", &fixture("basilica.json"), "--n", "3", "--format", "report"]);
    assert_eq!(json(&r.stdout)["result"]["atoms"], 8);
}

#[test]
fn julia_and_rasterize() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = dir.path().join("cloud.txt");
    let r = run(&["julia", "--p", "1", "--q", "2", "--c", "-1", "--output", cloud.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let r = run(&["rasterize", cloud.to_str().unwrap(), "--resolution", "16,8"]);
    assert_eq!(r.code, 0);
    let mut lines = r.stdout.lines();
    assert_eq!(lines.next(), Some("P2"));
    assert_eq!(lines.next(), Some("16 8"));
    assert_eq!(lines.next(), Some("65535"));
    let values: Vec<u32> = lines.flat_map(|l| l.split(' ').map(|v| v.parse::<u32>().unwrap())).collect();
    assert_eq!(values.len(), 128);
    assert_eq!(values.iter().max(), Some(&65535));
    let r = run(&["rasterize", cloud.to_str().unwrap(), "--format", "report"]);
    assert_eq!(json(&r.stdout)["result"]["out_of_bounds"], 0.0);
}

#[test]
fn other_model_commands() {
    let g = fixture("golden.model");
    let r = run(&["pressure", &g, "--n", "6", "--format", "csv"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.starts_with("n,matrix_power,enumeration\n1,"));
    assert_eq!(r.stdout.lines().count(), 7);
    let r = run(&["equilibrium", &g]);
    assert_eq!(r.code, 0);
    let doc = json(&r.stdout);
    assert!((doc["result"]["gibbs"]["constant"].as_f64().unwrap()).is_finite());
    assert_eq!(doc["result"]["transfer"]["converged"], true);
    let r = run(&["equilibrium", &g, "--format", "csv", "--n", "3"]);
    assert!(r.stdout.starts_with("orbit,m_mass,mu_mass,gibbs_dev\n"));
    let r = run(&["entropy", &g]);
    assert_eq!(r.code, 0);
    assert_eq!(json(&r.stdout)["result"]["kernel_source"], "equilibrium");
    let r = run(&["rokhlin", &g]);
    assert_eq!(r.code, 0);
    assert_eq!(json(&r.stdout)["result"]["passed"], true);
}

#[test]
fn failures_map_to_exit_codes() {
    let g = fixture("golden.model");
    let r = run(&["rokhlin", &g, "--tol", "1e-300"]);
    assert_eq!(r.code, 2, "{}", r.stderr);
    assert_eq!(run(&["validate", &g, "--tol", "0"]).code, 1);
    assert_eq!(run(&["validate", &g, "--format", "pgm"]).code, 1);
    assert_eq!(run(&["backward", "--p", "3", "--q", "2"]).code, 1);
    assert_eq!(run(&["backward", "--p", "1", "--q", "2", "--n", "30", "--mode", "exact"]).code, 1);
    assert_eq!(run(&["no-such-command"]).code, 1);
    assert_eq!(run(&["--help"]).code, 0);
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_thermoform");
    let ok = Command::new(bin).args(["validate", &fixture("golden.model")]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = Command::new(bin).args(["validate", &fixture("bad.model")]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("EmptyRow(0)"));
}
