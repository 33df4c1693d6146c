//! The command-line tool: exit codes, output formats and byte-identical
//! reruns.

use std::path::Path;
use std::process::Command;

use multitime::config::{Amplitudes, RunConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_multitime"))
}

fn run_in(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = bin().args(args).current_dir(dir).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn empty_and_malformed_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.cfg"), "# only a comment\n\n").unwrap();
    std::fs::write(dir.path().join("bad.cfg"), "omega = 2\nsigma = wide\n").unwrap();
    std::fs::write(dir.path().join("unknown.cfg"), "omega = 2\n  colour = red\n").unwrap();
    let (code, err) = run_in(dir.path(), &["verify", "--config", "empty.cfg"]);
    assert_eq!(code, 2, "{err}");
    let (code, err) = run_in(dir.path(), &["slice", "-c", "bad.cfg"]);
    assert_eq!(code, 2);
    assert!(err.contains("line 2, column 9"), "{err}");
    let (code, err) = run_in(dir.path(), &["slice", "-c", "unknown.cfg"]);
    assert_eq!(code, 2);
    assert!(err.contains("line 2, column 3") && err.contains("colour"), "{err}");
    assert_eq!(run_in(dir.path(), &["solve", "--set", "omega=-1"]).0, 2);
    assert_eq!(run_in(dir.path(), &["frobnicate"]).0, 2);
    assert_eq!(run_in(dir.path(), &["run"]).0, 2);
}

#[test]
fn numerical_failures_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // A point outside the domain (time-like separation).
    let (code, err) = run_in(dir.path(), &["solve", "-o", "out", "--set", "points=0.2 0.3 0.7 0.5"]);
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("solver"), "{err}");
    // Starting configuration outside the wedge.
    let (code, _) = run_in(dir.path(), &["trajectories", "-o", "out", "--set", "q0=0.9 0.1"]);
    assert_eq!(code, 3);
}

#[test]
fn solve_writes_tagged_component_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run_in(
        dir.path(),
        &["solve", "-o", "out", "--set", "points=0 0 0 1, 0.5 0.5 0.5 0.5, 0.2 0.3 0.4 0.7, 0.3 0.2 0.3 0.8"],
    );
    assert_eq!(code, 0, "{err}");
    let text = read(&dir.path().join("out"), "psi.csv");
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t_ph,s_ph,t_el,s_el,region,mm_re,mm_im,mp_re,mp_im,pm_re,pm_im,pp_re,pp_im");
    let tags: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(4).unwrap()).collect();
    assert_eq!(tags, ["R1", "C", "R2", "B"]);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 13));
    assert!(!text.contains('\r'));
}

#[test]
fn slice_and_verify_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run_in(dir.path(), &["slice", "-o", "s", "--set", "times=0, 0.5", "--set", "grid_n=21"]);
    assert_eq!(code, 0, "{err}");
    let s = dir.path().join("s");
    let slice = read(&s, "slice_0.5.csv");
    assert!(slice.starts_with("t,s_ph,s_el,rho,J1,J2\n"));
    assert_eq!(slice.lines().count(), 1 + 21 * 21);
    let summary: serde_json::Value = serde_json::from_str(&read(&s, "slice_summary.json")).unwrap();
    assert_eq!(summary.as_array().unwrap().len(), 2);

    let (code, err) = run_in(
        dir.path(),
        &["verify", "-o", "v", "--set", "probe_count=20", "--set", "conservation_cells=40", "--set", "mutations=false"],
    );
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&read(&dir.path().join("v"), "verify.json")).unwrap();
    assert_eq!(v["pass"], true);
    for r in v["reports"].as_array().unwrap() {
        for key in ["equation_id", "probe_count", "max_abs", "max_rel", "worst_point", "pass"] {
            assert!(r.get(key).is_some(), "missing {key}");
        }
    }
}

#[test]
fn trajectory_csv_shows_bounce_and_free_crossing() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run_in(dir.path(), &["trajectories", "-o", "t", "--set", "csv_stride=10"]);
    assert_eq!(code, 0, "{err}");
    let t = dir.path().join("t");
    let gaps = |name: &str| -> Vec<f64> {
        read(&t, name)
            .lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                f[3].parse::<f64>().unwrap() - f[2].parse::<f64>().unwrap()
            })
            .collect()
    };
    assert!(gaps("traj.csv").iter().all(|&g| g > 0.0));
    assert!(gaps("traj_free.csv").iter().any(|&g| g < 0.0));
    let last = read(&t, "traj.csv").lines().last().unwrap().to_string();
    assert!(last.ends_with(",reached_tmax"), "{last}");
}

#[test]
fn reruns_are_byte_identical() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let cfg = "experiment = ensemble\nn = 12\nseed = 3\ncheckpoints = 0.1, 0.2\nt_max = 0.2\nmarginal_cells = 60\ncsv_stride = 20\n";
    for d in &dirs {
        std::fs::write(d.path().join("ens.cfg"), cfg).unwrap();
    }
    let runs: [(&str, &[&str], &[&str]); 4] = [
        ("run", &["-c", "ens.cfg"], &["ensemble.json", "ensemble_traj.csv", "run_config.json"]),
        (
            "trajectories",
            &["--set", "t_max=0.3", "--set", "q0=0.02 0.98, 0.1 0.9"],
            &["traj.csv", "traj_free.csv", "trajectories.json"],
        ),
        ("slice", &["--set", "times=0.4", "--set", "grid_n=15"], &["slice_0.4.csv", "slice_summary.json"]),
        ("solve", &["--set", "times=0.3", "--set", "grid_n=9"], &["psi.csv"]),
    ];
    for (cmd, extra, files) in runs {
        let mut contents = Vec::new();
        for d in &dirs {
            let mut args = vec![cmd, "-o", cmd];
            args.extend_from_slice(extra);
            let (code, err) = run_in(d.path(), &args);
            assert_eq!(code, 0, "{cmd}: {err}");
            contents.push(files.iter().map(|f| read(&d.path().join(cmd), f)).collect::<Vec<_>>());
        }
        assert_eq!(contents[0], contents[1], "{cmd} output differs between runs");
    }
}

#[test]
fn config_keys_round_trip() {
    let cfg = RunConfig::parse(
        "experiment = slice\namplitudes_re = 1 0.5 0.5 1\namplitudes_im = 0 0 0 0.2\ncache_mode = direct\ninteraction = free\n",
    )
    .unwrap();
    assert_eq!(cfg.amplitudes, Amplitudes::Explicit([(1.0, 0.0), (0.5, 0.0), (0.5, 0.0), (1.0, 0.2)]));
    assert!(RunConfig::parse("amplitudes = equal\namplitudes_re = 1 1 1 1\n").is_err());
    assert!(RunConfig::parse("rapidity = 2\n").is_err());
    assert!(RunConfig::parse("grid_n = 1\n").is_err());
}
