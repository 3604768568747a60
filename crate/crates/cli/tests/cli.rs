//! End-to-end runs of the `matsync` binary on temporary documents.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use matsync_cli::document::{GainsDocument, SpecDocument};
use proptest::prelude::*;
use tempfile::TempDir;

fn matsync(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_matsync"))
        .args(args)
        .env_remove("MATSYNC_TOL")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn example(dir: &TempDir, name: &str) -> PathBuf {
    let path = dir.path().join(format!("{name}.toml"));
    let out = matsync(&["example", name, "--out", s(&path)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    path
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn verdict(trace: &str) -> &str {
    let line = trace.lines().last().unwrap();
    let rest = line.strip_prefix("# verdict: ").expect("verdict line last");
    rest.split_whitespace().next().unwrap()
}

/// `(alpha, rho)` rows of a sweep file.
fn sweep_rows(text: &str) -> Vec<(f64, f64)> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let mut it = l.split_whitespace().map(|v| v.parse::<f64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect()
}

#[test]
fn example_without_name_lists_builtins() {
    let out = matsync(&["example"]);
    assert_eq!(code(&out), 0);
    let names: Vec<_> = stdout(&out).lines().map(|l| l.split('\t').next().unwrap().to_string()).collect();
    for name in ["counterexample_asym", "chain5", "mass_spring_demo", "lc_demo", "rotation_ring", "complete3"] {
        assert!(names.iter().any(|n| n == name), "{name} missing");
    }
    assert_eq!(code(&matsync(&["example", "nope"])), 1);
}

#[test]
fn chain5_check_reports_margin_failure() {
    let dir = TempDir::new().unwrap();
    let spec = example(&dir, "chain5");
    let out = matsync(&["check", "--spec", s(&spec)]);
    assert_eq!(code(&out), 2);
    let report: toml::Table = stdout(&out).parse().unwrap();
    assert_eq!(report["connected"].as_bool(), Some(true));
    assert_eq!(report["theorem1_hypotheses"].as_bool(), Some(false));
    let cl = report["cl_detectability"].as_table().unwrap();
    assert_eq!(cl["feasible"].as_bool(), Some(true));
    assert_eq!(cl["condition14_holds"].as_bool(), Some(false));
    assert!((report["lambda2"].as_float().unwrap() - 0.0763932).abs() < 1e-6);
    assert!((cl["eps"].as_float().unwrap() - 0.0046905).abs() < 1e-6);
}

#[test]
fn complete3_check_passes() {
    let dir = TempDir::new().unwrap();
    let spec = example(&dir, "complete3");
    let out = matsync(&["check", "--spec", s(&spec), "--recipe", "theorem1"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn counterexample_diverges_with_exit_3() {
    let dir = TempDir::new().unwrap();
    let spec = dir.path().join("ce.toml");
    let gains = dir.path().join("ce.gains.toml");
    let out = matsync(&["example", "counterexample_asym", "--out", s(&spec), "--gains-out", s(&gains)]);
    assert_eq!(code(&out), 0);
    let trace = dir.path().join("ce.csv");
    let out = matsync(&["simulate", "--spec", s(&spec), "--gains", s(&gains), "--out", s(&trace)]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    let text = fs::read_to_string(&trace).unwrap();
    assert_eq!(verdict(&text), "diverged");
    assert!(text.starts_with("t,x_1,x_2,x_3,x_4,x_5,x_6,sync_error,disagreement\n"));
    // The certified recipe refuses the asymmetric weights outright.
    let out = matsync(&["gains", "--spec", s(&spec), "--recipe", "theorem1"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn mass_spring_alg1_converges() {
    let dir = TempDir::new().unwrap();
    let spec = example(&dir, "mass_spring_demo");
    let out = matsync(&["simulate", "--spec", s(&spec), "--recipe", "alg1", "--horizon", "200", "--step", "0.01"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(verdict(&stdout(&out)), "converged");
}

#[test]
fn builder_document_uses_physical_coupling() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "lc.toml",
        r#"
q = 3
time_domain = "ct"

[builder]
kind = "lc"
capacitors = [1.0, 0.5, 2.0]
inductors = [1.0, 1.5]

[[builder.couplings]]
i = 1
j = 2
values = [0.5, 0.5]

[[builder.couplings]]
i = 2
j = 3
values = [0.3, 0.3]
"#,
    );
    let out = matsync(&["simulate", "--spec", s(&spec), "--horizon", "150", "--step", "0.01"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(verdict(&stdout(&out)), "converged");
}

#[test]
fn infeasible_theorem1_exits_2() {
    let dir = TempDir::new().unwrap();
    // Both modes unstable, only the first one measured: no common P exists.
    let spec = write(
        &dir,
        "bad.toml",
        r#"
q = 2
time_domain = "ct"
A = [[1.0, 0.0], [0.0, 1.0]]

[[edges]]
i = 1
j = 2
C = [[1.0, 0.0]]
mirror = true
"#,
    );
    let out = matsync(&["gains", "--spec", s(&spec), "--recipe", "theorem1"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("CL-detectability not established"), "{}", stderr(&out));
    let out = matsync(&["sweep", "--spec", s(&spec)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn alg2_on_rotation_ring_reports_eps_bar_and_converges() {
    let dir = TempDir::new().unwrap();
    let spec = example(&dir, "rotation_ring");
    let gains = dir.path().join("g.toml");
    let out = matsync(&["gains", "--spec", s(&spec), "--recipe", "alg2", "--out", s(&gains)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = GainsDocument::parse(&fs::read_to_string(&gains).unwrap()).unwrap();
    let eps_bar = doc.eps_bar.expect("eps_bar recorded");
    assert!(eps_bar.is_finite() && eps_bar > 0.0);
    let out = matsync(&["simulate", "--spec", s(&spec), "--gains", s(&gains), "--horizon", "2000"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(verdict(&stdout(&out)), "converged");
}

#[test]
fn sweeps_match_library_values() {
    let dir = TempDir::new().unwrap();
    let chain = example(&dir, "chain5");
    let out = matsync(&["sweep", "--spec", s(&chain)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows = sweep_rows(&stdout(&out));
    assert_eq!(rows.len(), 50);
    assert!((rows[0].0 - 0.1).abs() < 1e-15 && (rows[49].0 - 100.0).abs() < 1e-12);
    assert!(rows.iter().all(|&(_, rho)| rho >= 0.0408), "{rows:?}");

    let complete = example(&dir, "complete3");
    let out = matsync(&["sweep", "--spec", s(&complete), "--points", "1"]);
    let rows = sweep_rows(&stdout(&out));
    assert_eq!(rows.len(), 1);
    assert!(rows[0].1 < 0.0);
    assert!(stdout(&out).lines().last().unwrap().starts_with("# min rho = "));
}

#[test]
fn edgeless_spec_is_not_connected() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "lonely.toml", "q = 3\ntime_domain = \"ct\"\nA = [[0.0, 1.0], [-1.0, 0.0]]\n");
    let out = matsync(&["check", "--spec", s(&spec)]);
    assert_eq!(code(&out), 2);
    let report: toml::Table = stdout(&out).parse().unwrap();
    assert_eq!(report["connected"].as_bool(), Some(false));
    assert!(report.get("lambda2").is_none());
}

#[test]
fn malformed_input_exits_1_and_names_the_field() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "bad.toml",
        "q = 3\ntime_domain = \"ct\"\nA = [[0.0]]\n[[edges]]\ni = 1\nj = 4\nC = [[1.0]]\n",
    );
    let out = matsync(&["check", "--spec", s(&spec)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("edges[1].j"), "{}", stderr(&out));
    assert_eq!(code(&matsync(&["check", "--spec", "/nonexistent.toml"])), 1);
}

#[test]
fn explicit_initial_state_file() {
    let dir = TempDir::new().unwrap();
    let spec = example(&dir, "complete3");
    let x0 = write(&dir, "x0.txt", "1 0\n0 1\n-1, 0.5\n");
    let out = matsync(&["simulate", "--spec", s(&spec), "--recipe", "theorem1", "--x0", s(&x0), "--horizon", "1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let first = text.lines().nth(1).unwrap();
    let values: Vec<f64> = first.split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(&values[..7], &[0.0, 1.0, 0.0, 0.0, 1.0, -1.0, 0.5]);

    let short = write(&dir, "short.txt", "1 2 3");
    let out = matsync(&["simulate", "--spec", s(&spec), "--recipe", "theorem1", "--x0", s(&short)]);
    assert_eq!(code(&out), 1);
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let spec = example(&dir, "complete3");
    let run = || {
        let out = matsync(&["simulate", "--spec", s(&spec), "--recipe", "theorem1", "--seed", "7", "--horizon", "5"]);
        assert_eq!(code(&out), 0);
        out.stdout
    };
    assert_eq!(run(), run());
    let gains = || matsync(&["gains", "--spec", s(&spec), "--recipe", "theorem1", "--seed", "3"]).stdout;
    assert_eq!(gains(), gains());
}

#[test]
fn exported_examples_reload_to_the_same_spec() {
    for name in matsync::simulation::BUILTIN_NAMES {
        let ex = matsync::builtin_example(name).unwrap();
        let text = SpecDocument::from_spec(&ex.spec, ex.p.as_ref()).to_toml().unwrap();
        let back = SpecDocument::parse(&text).unwrap().load().unwrap();
        assert_eq!(back.spec, ex.spec, "{name}");
        assert_eq!(back.p, ex.p, "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spec_documents_round_trip(
        q in 2usize..=4,
        n in 1usize..=3,
        values in proptest::collection::vec(-1e6f64..1e6, 64),
        mask in proptest::collection::vec(any::<bool>(), 16),
    ) {
        let mut it = values.iter().copied().cycle();
        let a = nalgebra::DMatrix::from_fn(n, n, |_, _| it.next().unwrap());
        let mut spec = matsync::ArraySpec::new(q, a, matsync::TimeDomain::Discrete).unwrap();
        for i in 0..q {
            for j in 0..q {
                if i != j && mask[i * q + j] {
                    let c = nalgebra::DMatrix::from_fn(1, n, |_, _| it.next().unwrap());
                    spec.set_output(i, j, c).unwrap();
                }
            }
        }
        let doc = SpecDocument::from_spec(&spec, None);
        let text = doc.to_toml().unwrap();
        let back = SpecDocument::parse(&text).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(back.load().unwrap().spec, spec);
    }
}

#[test]
fn counterexample_check_flags_asymmetry() {
    let dir = TempDir::new().unwrap();
    let spec = example(&dir, "counterexample_asym");
    let out = matsync(&["check", "--spec", s(&spec)]);
    assert_eq!(code(&out), 2);
    let report: toml::Table = stdout(&out).parse().unwrap();
    assert_eq!(report["symmetric"].as_bool(), Some(false));
    assert_eq!(report["connected"].as_bool(), Some(true));
}

#[test]
fn synchronized_start_converges() {
    let dir = TempDir::new().unwrap();
    let spec = dir.path().join("ce.toml");
    let gains = dir.path().join("ce.gains.toml");
    matsync(&["example", "counterexample_asym", "--out", s(&spec), "--gains-out", s(&gains)]);
    // Even the asymmetric array leaves the synchronization subspace invariant.
    let x0 = write(&dir, "x0.txt", "0.3 -1.2 0.3 -1.2 0.3 -1.2");
    let out = matsync(&["simulate", "--spec", s(&spec), "--gains", s(&gains), "--x0", s(&x0), "--horizon", "5"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(verdict(&text), "converged");
    let sync_col = 7;
    for row in text.lines().skip(1).filter(|l| !l.starts_with('#')) {
        let v: f64 = row.split(',').nth(sync_col).unwrap().parse().unwrap();
        assert!(v <= 1e-12, "{row}");
    }
}
