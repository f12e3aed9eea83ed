use std::path::Path;
use std::process::{Command, Output};

use krc_cli::report::Results;
use krc_cli::Report;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_krc");

const TWO_POINT: &str = r#"{
  "version": 1,
  "labels": ["a", "b"],
  "cost": "discrete",
  "measures": {"mu": [0.7, 0.3], "nu": [0.4, 0.6]},
  "families": {
    "F": {"omega_labels": ["u", "v"], "weights": [0.5, 0.5], "margins": [[1, 0], [0.5, 0.5]]},
    "G": {"omega_labels": ["u", "v"], "weights": [0.5, 0.5], "margins": [[0, 1], [0.5, 0.5]]}
  },
  "joints": {
    "diag": {"omega_labels": ["w0", "w1"], "table": [[0.5, 0], [0, 0.5]]},
    "prod": {"omega_labels": ["w0", "w1"], "table": [[0.12, 0.18], [0.28, 0.42]]}
  },
  "chains": {
    "flip": {"transition": [[0.75, 0.25], [0.25, 0.75]], "init": [0.5, 0.5]},
    "still": {"transition": [[1, 0], [0, 1]], "init": [0.3, 0.7]},
    "rank1": {"transition": [[0.2, 0.8], [0.2, 0.8]], "init": [0.5, 0.5]}
  }
}"#;

const UNTIGHT: &str = r#"{
  "labels": ["0", "1", "2"],
  "cost": [[0, 1, 5], [1, 0, 1], [5, 1, 0]],
  "measures": {"mu": [1, 0, 0], "nu": [0, 0, 1]}
}"#;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn krc(dir: &Path, contents: &str, args: &[&str]) -> Run {
    let file = dir.join("problem.json");
    std::fs::write(&file, contents).unwrap();
    let mut cmd = Command::new(BIN);
    cmd.arg(args[0]).arg(&file).args(&args[1..]);
    finish(cmd.output().unwrap())
}

fn finish(out: Output) -> Run {
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn report(run: &Run) -> Report {
    serde_json::from_str(&run.stdout).unwrap()
}

#[test]
fn validate_reports_tightness() {
    let dir = TempDir::new().unwrap();
    let r = krc(dir.path(), TWO_POINT, &["validate", "--json"]);
    assert_eq!(r.code, 0);
    let Results::Validate(v) = report(&r).results else { panic!() };
    assert!(v.tight);
    assert!(v.objects.iter().all(|o| o.error.is_none()));

    let r = krc(dir.path(), UNTIGHT, &["validate", "--json"]);
    assert_eq!(r.code, 1);
    let Results::Validate(v) = report(&r).results else { panic!() };
    assert!(!v.tight);
    assert_eq!(v.worst_pair, ["0".to_string(), "2".to_string()]);
    assert_eq!(v.gap, 3.0);
}

#[test]
fn validate_flags_invalid_objects() {
    let dir = TempDir::new().unwrap();
    let text = TWO_POINT.replace("[0.4, 0.6]", "[0.4, 0.5]");
    let r = krc(dir.path(), &text, &["validate", "--json"]);
    assert_eq!(r.code, 1);
    let Results::Validate(v) = report(&r).results else { panic!() };
    let bad: Vec<_> = v.objects.iter().filter(|o| o.error.is_some()).collect();
    assert_eq!(bad.len(), 1);
    assert_eq!(bad[0].name, "nu");
}

#[test]
fn malformed_json_is_an_input_error_with_position() {
    let dir = TempDir::new().unwrap();
    let r = krc(dir.path(), "{\"labels\": [\"a\",\n  ]", &["validate"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("line 2"), "{}", r.stderr);
}

#[test]
fn unknown_names_are_input_errors() {
    let dir = TempDir::new().unwrap();
    assert_eq!(krc(dir.path(), TWO_POINT, &["ot", "--mu", "mu", "--nu", "zz"]).code, 2);
    assert_eq!(krc(dir.path(), TWO_POINT, &["tau", "--joint", "zz"]).code, 2);
    // two joints in the file: the name is required
    assert_eq!(krc(dir.path(), TWO_POINT, &["tau"]).code, 2);
    assert_eq!(krc(dir.path(), TWO_POINT, &["tau", "--joint", "diag", "--bound", "zz"]).code, 2);
}

#[test]
fn ot_two_point() {
    let dir = TempDir::new().unwrap();
    let r = krc(dir.path(), TWO_POINT, &["ot", "--json", "--mu", "mu", "--nu", "nu", "--dual"]);
    assert_eq!(r.code, 0);
    let Results::Ot(o) = report(&r).results else { panic!() };
    assert!((o.value - 0.3).abs() <= 1e-12);
    assert!(o.gap.abs() <= 1e-9);
    assert!(o.potential.is_some());
    assert!((o.value - o.half_variation).abs() <= 1e-12);

    let r = krc(dir.path(), TWO_POINT, &["ot", "--json", "--mu", "mu", "--nu", "mu"]);
    let Results::Ot(o) = report(&r).results else { panic!() };
    assert_eq!(o.value, 0.0);
    assert!(o.potential.is_none());
}

#[test]
fn ot_over_families() {
    let dir = TempDir::new().unwrap();
    let r = krc(dir.path(), TWO_POINT, &["ot", "--json", "--mu", "F", "--nu", "G", "--dual"]);
    assert_eq!(r.code, 0);
    let Results::ParamOt(p) = report(&r).results else { panic!() };
    assert_eq!(p.per_atom, vec![1.0, 0.0]);
    assert!((p.total - 0.5).abs() <= 1e-12);
    assert!((p.glued_cost - p.total).abs() <= 1e-12);
    assert!(p.gap.abs() <= 1e-9);
}

#[test]
fn untight_cost_exits_one_unless_closed() {
    let dir = TempDir::new().unwrap();
    let r = krc(dir.path(), UNTIGHT, &["ot", "--mu", "mu", "--nu", "nu"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("--closure"));

    let r = krc(dir.path(), UNTIGHT, &["ot", "--json", "--closure", "--mu", "mu", "--nu", "nu"]);
    assert_eq!(r.code, 0);
    assert!(r.stderr.contains("warning"));
    let rep = report(&r);
    assert_eq!(rep.warnings.len(), 1);
    let Results::Ot(o) = rep.results else { panic!() };
    assert_eq!(o.value, 2.0);
}

#[test]
fn tau_examples() {
    let dir = TempDir::new().unwrap();
    let r = krc(dir.path(), TWO_POINT, &["tau", "--json", "--joint", "prod", "--beta"]);
    let Results::Tau(t) = report(&r).results else { panic!() };
    assert!(t.tau.abs() <= 1e-12);
    assert!(t.beta.unwrap().abs() <= 1e-12);

    let r = krc(dir.path(), TWO_POINT, &["tau", "--json", "--joint", "diag", "--beta", "--bound", "min"]);
    assert_eq!(r.code, 0);
    let Results::Tau(t) = report(&r).results else { panic!() };
    assert!((t.tau - 0.5).abs() <= 1e-12);
    assert!((t.beta.unwrap() - 0.5).abs() <= 1e-12);
    let b = t.bound.unwrap();
    assert!(b.holds && b.bounded_holds);

    let r = krc(dir.path(), TWO_POINT, &["tau", "--json", "--joint", "diag", "--bound", "b"]);
    let Results::Tau(t) = report(&r).results else { panic!() };
    assert_eq!(t.bound.unwrap().x0, "b");
    assert!(t.beta.is_none());
}

#[test]
fn reconstruct_examples() {
    let dir = TempDir::new().unwrap();
    let r = krc(dir.path(), TWO_POINT, &["reconstruct", "--json", "--joint", "diag"]);
    assert_eq!(r.code, 0);
    let Results::Reconstruct(c) = report(&r).results else { panic!() };
    assert!((c.expected_cost - 0.5).abs() <= 1e-12);
    assert!(c.independence_deviation <= 1e-9);
    assert!(c.marginal_residual <= 1e-9);

    let r = krc(dir.path(), TWO_POINT, &["reconstruct", "--json", "--joint", "prod"]);
    let Results::Reconstruct(c) = report(&r).results else { panic!() };
    assert!(c.expected_cost.abs() <= 1e-12);
}

#[test]
fn fixed_seed_gives_identical_csv() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let r = krc(
            dir.path(),
            TWO_POINT,
            &["reconstruct", "--joint", "diag", "--sample", "500", "--seed", "9", "--csv", out.to_str().unwrap()],
        );
        assert_eq!(r.code, 0);
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    assert!(a.starts_with(b"omega_label,x_label,y_label,u\n"));
    assert_eq!(a.iter().filter(|c| **c == b'\n').count(), 501);
}

#[test]
fn chain_examples() {
    let dir = TempDir::new().unwrap();
    let r = krc(dir.path(), TWO_POINT, &["chain", "--json", "--chain", "flip", "--steps", "6"]);
    let Results::Chain(c) = report(&r).results else { panic!() };
    for (k, t) in c.tau.iter().enumerate() {
        assert!((t - krc_oracles::two_state_tau(0.25, k as u32 + 1)).abs() <= 1e-12);
    }

    let r = krc(dir.path(), TWO_POINT, &["chain", "--json", "--chain", "still", "--steps", "5"]);
    let Results::Chain(c) = report(&r).results else { panic!() };
    assert!(c.tau.iter().all(|t| *t == c.tau[0]) && c.tau[0] > 0.0);

    let r = krc(dir.path(), TWO_POINT, &["chain", "--json", "--chain", "rank1", "--steps", "5"]);
    let Results::Chain(c) = report(&r).results else { panic!() };
    assert!(c.tau.iter().all(|t| t.abs() <= 1e-15));
}

#[test]
fn json_reports_round_trip_and_repeat() {
    let dir = TempDir::new().unwrap();
    let runs: &[&[&str]] = &[
        &["validate", "--json"],
        &["ot", "--json", "--mu", "mu", "--nu", "nu", "--dual"],
        &["ot", "--json", "--mu", "F", "--nu", "G", "--dual"],
        &["tau", "--json", "--joint", "diag", "--beta", "--bound", "min"],
        &["reconstruct", "--json", "--joint", "diag", "--sample", "50", "--seed", "3"],
        &["chain", "--json", "--chain", "flip", "--steps", "12"],
    ];
    for args in runs {
        let first = krc(dir.path(), TWO_POINT, args);
        let rep = report(&first);
        let again: Report = serde_json::from_str(&serde_json::to_string(&rep).unwrap()).unwrap();
        assert_eq!(again, rep);
        let second = report(&krc(dir.path(), TWO_POINT, args));
        assert_eq!(second.results, rep.results);
        assert_eq!(second.inputs_digest, rep.inputs_digest);
    }
}

#[test]
fn thread_count_from_environment() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("problem.json");
    std::fs::write(&file, TWO_POINT).unwrap();
    let run = |threads: &str| {
        finish(
            Command::new(BIN)
                .env("KRC_THREADS", threads)
                .args(["ot", "--json", "--mu", "F", "--nu", "G"])
                .arg(&file)
                .output()
                .unwrap(),
        )
    };
    let one = run("1");
    assert_eq!(one.code, 0);
    assert_eq!(report(&one).results, report(&run("4")).results);
    assert_eq!(run("zero").code, 2);
}

#[test]
fn text_output_mentions_value() {
    let dir = TempDir::new().unwrap();
    let r = krc(dir.path(), TWO_POINT, &["ot", "--mu", "mu", "--nu", "nu"]);
    assert!(r.stdout.contains("KR(mu, nu)"));
}

#[test]
fn joint_column_labels_must_match_the_space() {
    let dir = TempDir::new().unwrap();
    let ok = TWO_POINT.replace(r#""diag": {"omega_labels""#, r#""diag": {"s_labels": ["a", "b"], "omega_labels""#);
    assert_eq!(krc(dir.path(), &ok, &["tau", "--joint", "diag"]).code, 0);
    let swapped = TWO_POINT.replace(r#""diag": {"omega_labels""#, r#""diag": {"s_labels": ["b", "a"], "omega_labels""#);
    let r = krc(dir.path(), &swapped, &["tau", "--joint", "diag"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("s_labels"));
}
