use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use zar_core::residuals::compute;
use zar_core::{ResidualKind, ZarFit};

const EXAM_CONFIG: &str = r#"
family = "beta"
response = "essay"
id = "id"

[mu]
covariates = ["natural_sciences", "human_sciences", "language", "mathematics", "male", "age_over_25"]

[alpha]
covariates = ["human_sciences", "language", "age_over_25"]
"#;

const GAMMA_CONFIG: &str = r#"
family = "gamma"
response = "y"

[mu]
covariates = ["x"]
"#;

fn zar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zar")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

struct Work {
    dir: TempDir,
}

impl Work {
    fn new() -> Self {
        Self { dir: TempDir::new().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, text: &str) -> String {
        let p = self.path(name);
        fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    }

    fn s(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }

    /// Synthetic exam data plus its config.
    fn exam(&self, n: usize) -> (String, String) {
        let data = self.s("exam.csv");
        let o = zar(&["synth", "--n", &n.to_string(), "--seed", "11", "--out", &data]);
        assert!(o.status.success(), "{}", stderr(&o));
        (self.write("exam.toml", EXAM_CONFIG), data)
    }

    fn fit(&self, config: &str, data: &str, out: &str) -> Output {
        zar(&["fit", "--config", config, "--data", data, "--out", out])
    }
}

fn read(p: impl AsRef<Path>) -> String {
    fs::read_to_string(p).unwrap()
}

#[test]
fn fit_then_diagnose_reproduces_library_residuals() {
    let w = Work::new();
    let (cfg, data) = w.exam(400);
    let out = w.s("out");
    let o = w.fit(&cfg, &data, &out);
    assert!(o.status.success(), "{}", stderr(&o));

    let o = zar(&["diagnose", "--config", &cfg, "--data", &data, "--out", &out, "--seed", "9", "--kinds", "rq,zaqr"]);
    assert!(o.status.success(), "{}", stderr(&o));

    let fit: ZarFit = serde_json::from_str(&read(w.path("out/fit.json"))).unwrap();
    let rq = compute(&fit, None, ResidualKind::RandomizedQuantile, 9).unwrap();
    let zq = compute(&fit, None, ResidualKind::ZAQR, 9).unwrap();

    let text = read(w.path("out/residuals.csv"));
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "id,y,mu,phi,alpha,rq,zaqr");
    let mut zeros = 0;
    for (i, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[5].parse::<f64>().unwrap().to_bits(), rq.values[i].unwrap().to_bits());
        match zq.values[i] {
            Some(v) => assert_eq!(cells[6].parse::<f64>().unwrap().to_bits(), v.to_bits()),
            None => {
                assert_eq!(cells[1], "0");
                assert_eq!(cells[6], "");
                zeros += 1;
            }
        }
    }
    assert!(zeros > 0);

    let plot = read(w.path("out/plot_zaqr.csv"));
    assert_eq!(plot.lines().next().unwrap(), "id,mu_hat,residual");
    assert_eq!(plot.lines().count() - 1, 400 - zeros);
}

#[test]
fn fit_report_has_table_columns() {
    let w = Work::new();
    let (cfg, data) = w.exam(300);
    let out = w.s("out");
    let o = w.fit(&cfg, &data, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = read(w.path("out/report.txt"));
    let header = report.lines().find(|l| l.starts_with("Equation")).unwrap();
    let cols: Vec<&str> = header.split("  ").map(str::trim).filter(|s| !s.is_empty()).collect();
    assert_eq!(cols, ["Equation", "Variable", "Estimate", "Standard error", "P-value"]);
    assert!(report.contains("< 0.0001"));
    let wald = read(w.path("out/wald.csv"));
    assert_eq!(wald.lines().next().unwrap(), "equation,variable,estimate,std_error,z,p_value");
    // 7 mu + 1 phi + 4 alpha coefficients.
    assert_eq!(wald.lines().count(), 13);
}

#[test]
fn commands_are_byte_deterministic() {
    let w = Work::new();
    let (cfg, data) = w.exam(200);
    for out in ["a", "b"] {
        let out = w.s(out);
        assert!(w.fit(&cfg, &data, &out).status.success());
        let o = zar(&["diagnose", "--config", &cfg, "--data", &data, "--out", &out, "--seed", "4"]);
        assert!(o.status.success(), "{}", stderr(&o));
        let o = zar(&["envelope", "--config", &cfg, "--data", &data, "--out", &out, "--seed", "4", "--replicates", "19"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["fit.json", "wald.csv", "residuals.csv", "plot_rq.csv", "envelope_zaqr.csv"] {
        assert_eq!(fs::read(w.path("a").join(f)).unwrap(), fs::read(w.path("b").join(f)).unwrap(), "{f}");
    }
    let o = zar(&["diagnose", "--config", &cfg, "--data", &data, "--out", &w.s("c"), "--fit", &w.s("a/fit.json"), "--seed", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_ne!(read(w.path("a/residuals.csv")), read(w.path("c/residuals.csv")));
}

#[test]
fn envelope_columns_are_ordered() {
    let w = Work::new();
    let (cfg, data) = w.exam(150);
    let out = w.s("out");
    assert!(w.fit(&cfg, &data, &out).status.success());
    let o = zar(&["envelope", "--config", &cfg, "--data", &data, "--out", &out, "--replicates", "19", "--band", "minmax", "--kind", "rq"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = read(w.path("out/envelope_rq.csv"));
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "i,score,lower,median,upper,observed");
    let mut n = 0;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(v[2] <= v[3] && v[3] <= v[4], "{line}");
        n += 1;
    }
    assert_eq!(n, 150);

    let o = zar(&["envelope", "--config", &cfg, "--data", &data, "--out", &out, "--replicates", "18"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn simulate_writes_report_independent_of_workers() {
    let w = Work::new();
    let cfg = w.write("sim.toml", "[scenario]\npreset = 'zabe-scenario-1'\nn = 40\n");
    for (out, workers) in [("w1", "1"), ("w3", "3")] {
        let o = zar(&["simulate", "--config", &cfg, "--out", &w.s(out), "--seed", "2", "--reps", "60", "--workers", workers, "--kinds", "zaqr,rq"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["summary.csv", "observations.csv", "metadata.json"] {
        assert_eq!(fs::read(w.path("w1").join(f)).unwrap(), fs::read(w.path("w3").join(f)).unwrap(), "{f}");
    }
    let summary = read(w.path("w1/summary.csv"));
    assert_eq!(summary.lines().next().unwrap(), "residual,interval,theoretical,min,q1,median,mean,q3,max");
    assert_eq!(summary.lines().count(), 1 + 2 * 6);
    let meta: serde_json::Value = serde_json::from_str(&read(w.path("w1/metadata.json"))).unwrap();
    assert_eq!(meta["seed"], 2);
    assert_eq!(meta["reps"], 60);
    assert_eq!(meta["scenario_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn simulate_with_covariates_from_data() {
    let w = Work::new();
    let x: String = (0..30).map(|i| format!("{}\n", i as f64 / 29.0)).collect();
    let data = w.write("x.csv", &format!("x\n{x}"));
    let cfg = w.write(
        "s.toml",
        "family = 'gamma'\n[mu]\ncovariates = ['x']\n[scenario]\ntruth = { mu = [0.2, 0.5], phi = [-1.0], alpha = [-1.0] }\nthresholds = [-2.0, 2.0]\n",
    );
    let o = zar(&["simulate", "--config", &cfg, "--data", &data, "--out", &w.s("o"), "--reps", "40"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(read(w.path("o/summary.csv")).lines().count(), 3);
}

#[test]
fn exit_codes() {
    let w = Work::new();
    let gamma = w.write("g.toml", GAMMA_CONFIG);
    let out = w.s("out");

    // Usage errors.
    assert_eq!(zar(&["fit", "--config", &gamma]).status.code(), Some(1));
    assert_eq!(zar(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(zar(&["--help"]).status.code(), Some(0));
    let bad = w.write("bad.toml", "family = 'gamma'\nresponse = 'y'\ncolour = 'red'\n");
    let ok_data = w.write("ok.csv", "y,x\n0,1\n1.5,2\n0.5,3\n2.5,4\n0,5\n3.5,6\n");
    assert_eq!(w.fit(&bad, &ok_data, &out).status.code(), Some(1));

    // Data errors, with the offending line.
    let malformed = w.write("m.csv", "y,x\n0,1\n1.5,abc\n");
    let o = w.fit(&gamma, &malformed, &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    let ragged = w.write("r.csv", "y,x\n0,1\n1.5\n");
    assert!(stderr(&w.fit(&gamma, &ragged, &out)).contains("line 3"));
    let constant = w.write("c.csv", "y,x\n0,1\n2,2\n2,3\n0,4\n2,5\n");
    let o = w.fit(&gamma, &constant, &out);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("equal"));
    let missing = w.write("n.csv", "y,z\n0,1\n1,2\n");
    assert_eq!(w.fit(&gamma, &missing, &out).status.code(), Some(2));
    assert_eq!(w.fit(&gamma, &w.s("absent.csv"), &out).status.code(), Some(2));

    // Non-convergence.
    let tight = w.write("t.toml", &format!("{GAMMA_CONFIG}\n[fit]\nmax_iter = 1\n"));
    let o = w.fit(&tight, &ok_data, &out);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(w.path("out/fit.json").exists());

    // Unknown residual kind, and data that do not belong to the fit.
    assert!(w.fit(&gamma, &ok_data, &out).status.success());
    let o = zar(&["diagnose", "--config", &gamma, "--data", &ok_data, "--out", &out, "--kinds", "bogus"]);
    assert_eq!(o.status.code(), Some(1));
    let other = w.write("o.csv", "y,x\n0,1\n1.5,2\n0.5,3\n2.5,4\n0,5\n3.6,6\n");
    let o = zar(&["diagnose", "--config", &gamma, "--data", &other, "--out", &out]);
    assert_eq!(o.status.code(), Some(2));
}
