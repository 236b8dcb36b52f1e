use hvpopt_harness::config::ExperimentConfig;
use hvpopt_harness::experiment::{lowerbound_command, solve_or_sweep};
use std::path::Path;

fn solve_config(out: &Path) -> ExperimentConfig {
    let json = format!(
        r#"{{
  "command": "solve",
  "instance": {{ "dim": 3, "problem": {{ "kind": "lambda_sum", "centers": [0.5, -1.0, 1.5] }}, "sigma1": 1.0, "sigma2": 1.0, "sigma2_as": 1.0 }},
  "solver": {{ "algorithm": "sosp_cubic", "gamma": 0.5, "overrides": {{ "T": 100 }} }},
  "epsilon_grid": [0.3, 0.2],
  "replications": 3,
  "seed": 7,
  "output": {:?}
}}"#,
        out
    );
    let cfg: ExperimentConfig = serde_json::from_str(&json).unwrap();
    cfg.validate().unwrap();
    cfg
}

#[test]
fn solve_outputs_are_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    solve_or_sweep(&solve_config(a.path())).unwrap();
    solve_or_sweep(&solve_config(b.path())).unwrap();
    for f in ["results.csv", "first_passage.csv", "warnings.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        assert_eq!(x, std::fs::read(b.path().join(f)).unwrap(), "{f}");
        assert!(!x.is_empty());
    }
    let results = std::fs::read_to_string(a.path().join("results.csv")).unwrap();
    // Header plus one row per (ε, replication).
    assert_eq!(results.lines().count(), 1 + 6);
    assert!(a.path().join("manifest.json").exists());
}

#[test]
fn sweep_fits_a_slope() {
    let dir = tempfile::tempdir().unwrap();
    let json = format!(
        r#"{{
  "command": "sweep",
  "instance": {{ "dim": 1, "problem": {{ "kind": "lambda_ramp", "u0": 1.0 }}, "sigma1": 1.0, "sigma2": 1.0 }},
  "solver": {{ "algorithm": "sgd_hvp_rvr" }},
  "epsilon_grid": [0.4, 0.2],
  "replications": 5,
  "stop_at_first_passage": true,
  "output": {:?}
}}"#,
        dir.path()
    );
    let cfg: ExperimentConfig = serde_json::from_str(&json).unwrap();
    cfg.validate().unwrap();
    let s = solve_or_sweep(&cfg).unwrap();
    let fit = s.fit.expect("two points retained");
    assert_eq!(fit.points, 2);
    assert!(fit.slope < 0.0);
}

#[test]
fn lowerbound_writes_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let json = format!(
        r#"{{
  "command": "lowerbound",
  "lowerbound": {{ "construction": {{ "kind": "direct", "chain": "eps_chain", "t": 8, "rho": 1.0 }}, "delta": 0.1 }},
  "replications": 4,
  "output": {:?}
}}"#,
        dir.path()
    );
    let cfg: ExperimentConfig = serde_json::from_str(&json).unwrap();
    let s = lowerbound_command(&cfg).unwrap();
    assert_eq!(s.deadline_failure_fraction, 0.0);
    assert_eq!(s.median_completion, 8.0);
    assert!(dir.path().join("trajectories.csv").exists());
}
