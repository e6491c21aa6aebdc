use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use truncfrac_cli::config::{DomainShape, DEFAULT_T_END};
use truncfrac_cli::{parse_config, ConfigError, Experiment, Settings};

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn truncfrac(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_truncfrac"))
        .args(args)
        .arg("--out")
        .arg(out)
        .current_dir(repo_root())
        .output()
        .unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn field_error(e: ConfigError) -> (&'static str, String) {
    match e {
        ConfigError::Field { field, reason } => (field, reason),
        other => panic!("expected a field error, got {other}"),
    }
}

#[test]
fn flags_fill_in_defaults() {
    let flags = Settings {
        domain: Some(DomainShape::Ball),
        s: Some(0.75),
        h: Some(0.05),
        ..Settings::default()
    };
    let c = parse_config(Experiment::Eigen, flags).unwrap();
    assert_eq!((c.s, c.gamma, c.h, c.directions, c.seed), (0.75, 0.3, 0.05, 64, 42));
    assert_eq!(c.t_end, DEFAULT_T_END);
    assert_eq!((c.domain.a, c.domain.b), (1.0, 1.0));
    assert_eq!(c.out, PathBuf::from("out/eigen"));
}

#[test]
fn order_outside_the_unit_interval_is_rejected() {
    for s in [1.5, 0.0, 1.0, -0.2, f64::NAN] {
        let flags = Settings {
            s: Some(s),
            ..Settings::default()
        };
        let (field, reason) = field_error(parse_config(Experiment::Eigen, flags).unwrap_err());
        assert_eq!(field, "s");
        assert!(reason.contains("s must lie in (0,1)"), "{reason}");
    }
}

#[test]
fn config_file_gamma_is_checked_for_regularity_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(&path, "s = 0.75\ngamma = 0.6\n").unwrap();
    let flags = || Settings {
        config: Some(path.clone()),
        ..Settings::default()
    };
    let (field, reason) = field_error(parse_config(Experiment::Regularity, flags()).unwrap_err());
    assert_eq!(field, "gamma");
    assert!(reason.contains("0.5"), "{reason}");
    assert_eq!(parse_config(Experiment::Elliptic, flags()).unwrap().gamma, 0.6);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(&path, "domain = \"ellipse\"\na = 1.0\nb = 0.5\nh = 0.1\nseed = 7\n").unwrap();
    let flags = Settings {
        config: Some(path),
        h: Some(0.04),
        ..Settings::default()
    };
    let c = parse_config(Experiment::Elliptic, flags).unwrap();
    assert_eq!((c.h, c.seed, c.domain.b), (0.04, 7, 0.5));
}

#[test]
fn malformed_configs_name_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(&path, "sigma = 0.5\n").unwrap();
    let flags = Settings {
        config: Some(path),
        ..Settings::default()
    };
    let err = parse_config(Experiment::Eigen, flags).unwrap_err();
    assert!(matches!(err, ConfigError::Parse { .. }));
    assert!(err.to_string().contains("sigma"), "{err}");

    let missing = Settings {
        config: Some(dir.path().join("absent.toml")),
        ..Settings::default()
    };
    assert!(matches!(parse_config(Experiment::Eigen, missing), Err(ConfigError::Io { .. })));

    let no_b = Settings {
        domain: Some(DomainShape::Ellipse),
        ..Settings::default()
    };
    assert_eq!(field_error(parse_config(Experiment::Eigen, no_b).unwrap_err()).0, "b");

    let ellipse = Settings {
        domain: Some(DomainShape::Ellipse),
        b: Some(0.5),
        ..Settings::default()
    };
    assert_eq!(field_error(parse_config(Experiment::Lowerbound, ellipse).unwrap_err()).0, "domain");

    let few = Settings {
        directions: Some(4),
        ..Settings::default()
    };
    assert_eq!(field_error(parse_config(Experiment::Eigen, few).unwrap_err()).0, "directions");

    let coarse = Settings {
        h: Some(3.0),
        ..Settings::default()
    };
    assert_eq!(field_error(parse_config(Experiment::Eigen, coarse).unwrap_err()).0, "h");
}

#[test]
fn invalid_flag_exits_nonzero_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let res = truncfrac(&["eigen", "--s", "1.5"], &out);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("`s`"));
    assert!(!out.exists());
}

#[test]
fn barrier_default_is_all_negative() {
    let dir = tempfile::tempdir().unwrap();
    let res = truncfrac(&["barrier"], dir.path());
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let r = report(dir.path());
    assert_eq!(r["status"], "ok");
    assert_eq!(r["results"]["nonnegative_samples"], 0);
    assert!(r["results"]["max_violation"].as_f64().unwrap() < 0.0);
    assert!(r["results"]["universal_integral"].as_f64().unwrap() < 0.0);
    let csv = fs::read_to_string(dir.path().join("samples.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x,y,theta_x,theta_y,d,value,scaled"));
    assert_eq!(csv.lines().count(), 1001);
}

#[test]
fn every_csv_has_a_header_and_documented_units() {
    let dir = tempfile::tempdir().unwrap();
    let res = truncfrac(&["elliptic", "--h", "0.1", "--directions", "16"], dir.path());
    assert!(res.status.success());
    let r = report(dir.path());
    let files = r["files"].as_array().unwrap();
    assert!(!files.is_empty());
    for meta in files {
        let name = meta["file"].as_str().unwrap();
        let columns: Vec<&str> = meta["columns"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
        assert!(meta["columns"].as_array().unwrap().iter().all(|c| c["unit"].is_string()));
        let text = fs::read_to_string(dir.path().join(name)).unwrap();
        assert_eq!(text.lines().next().unwrap(), columns.join(","));
    }
    let grid = fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    assert_eq!(grid.lines().next(), Some("x,y,value"));
    assert!(r["results"]["min"].as_f64().unwrap() >= 0.0);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["elliptic", "--h", "0.1", "--directions", "16"][..],
        &["barrier", "--seed", "9"][..],
        &["parabolic", "--h", "0.1", "--directions", "16", "--t-end", "1"][..],
    ] {
        let (a, b) = (dir.path().join(format!("{}-a", args[0])), dir.path().join(format!("{}-b", args[0])));
        assert!(truncfrac(args, &a).status.success());
        assert!(truncfrac(args, &b).status.success());
        let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(names.len() >= 2);
        for name in names {
            if name == "report.json" {
                continue;
            }
            assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
        }
        let (ra, rb) = (report(&a), report(&b));
        assert_eq!(ra["results"], rb["results"]);
    }
}

#[test]
fn different_seeds_draw_different_barrier_samples() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(truncfrac(&["barrier", "--seed", "1"], &a).status.success());
    assert!(truncfrac(&["barrier", "--seed", "2"], &b).status.success());
    assert_ne!(fs::read(a.join("samples.csv")).unwrap(), fs::read(b.join("samples.csv")).unwrap());
}

#[test]
fn unmet_invariant_exits_with_a_named_violation() {
    let dir = tempfile::tempdir().unwrap();
    let res = truncfrac(&["parabolic", "--h", "0.1", "--directions", "16", "--t-end", "0.01"], dir.path());
    assert_eq!(res.status.code(), Some(1));
    let r = report(dir.path());
    assert_eq!(r["status"], "violation");
    assert!(r["violations"][0].as_str().unwrap().contains("stayed above"));
    assert!(String::from_utf8_lossy(&res.stderr).contains("violation"));
}

#[test]
fn decay_on_the_shipped_disk_config_reports_the_rate() {
    let dir = tempfile::tempdir().unwrap();
    let res = truncfrac(&["decay", "--config", "configs/disk.toml"], dir.path());
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let r = report(dir.path());
    let results = &r["results"];
    let (fitted, mu1, ratio) = (results["fitted_mu"].as_f64().unwrap(), results["mu1"].as_f64().unwrap(), results["ratio"].as_f64().unwrap());
    assert!((ratio - fitted / mu1).abs() < 1e-12);
    assert!((ratio - 1.0).abs() <= 0.1, "{ratio}");
    assert_eq!(results["sandwich"]["finite"], true);
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().next(), Some("t,sup_norm"));
}
