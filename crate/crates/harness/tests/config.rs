use hvpopt_harness::config::{build_instance, Algorithm, Command, ExperimentConfig};
use std::path::PathBuf;

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn parse(json: &str) -> anyhow::Result<ExperimentConfig> {
    let cfg: ExperimentConfig = serde_json::from_str(json)?;
    cfg.validate()?;
    Ok(cfg)
}

const SOLVE: &str = r#"{
  "command": "solve",
  "instance": { "dim": 2, "problem": { "kind": "quadratic", "diag": [1.0, 2.0] }, "sigma1": 0.5, "sigma2": 0.5 },
  "solver": { "algorithm": "sgd_hvp_rvr" },
  "epsilon_grid": [0.1]
}"#;

#[test]
fn shipped_configs_load_and_round_trip() {
    let mut n = 0;
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e:#}", path.display()));
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg, "{}", path.display());
        n += 1;
    }
    assert!(n >= 6);
}

#[test]
fn defaults_fill_in() {
    let cfg = parse(SOLVE).unwrap();
    assert_eq!(cfg.command, Command::Solve);
    assert_eq!(cfg.replications, 1);
    assert_eq!(cfg.seed, 0);
    assert!(!cfg.timing);
    assert_eq!(cfg.solver.unwrap().algorithm, Algorithm::SgdHvpRvr);
}

#[test]
fn quadratic_constants_are_derived() {
    let cfg = parse(SOLVE).unwrap();
    let inst = build_instance(cfg.instance.as_ref().unwrap(), 0.1).unwrap();
    assert_eq!(inst.regularity.l1, 2.0);
    assert_eq!(inst.regularity.delta, 0.0);
}

#[test]
fn invalid_configs_are_rejected() {
    let cases = [
        SOLVE.replace("[0.1]", "[0.1, 0.2]"),
        SOLVE.replace("[0.1]", "[]"),
        SOLVE.replace("[0.1]", "[-0.1]"),
        SOLVE.replace("\"sgd_hvp_rvr\"", "\"sosp_hvp\""),
        SOLVE.replace("\"command\": \"solve\"", "\"command\": \"sweep\""),
        SOLVE.replace("\"sigma2\": 0.5", "\"sigma2\": 0.5, \"typo\": 1"),
        SOLVE.replace("\"epsilon_grid\"", "\"replications\": 0, \"epsilon_grid\""),
        r#"{ "command": "lowerbound" }"#.to_string(),
        r#"{ "command": "lowerbound", "lowerbound": { "construction": { "kind": "direct", "chain": "eps_chain", "t": 5, "rho": 0.5 }, "delta": 1.5 } }"#.to_string(),
    ];
    for c in cases {
        assert!(parse(&c).is_err(), "{c}");
    }
}

#[test]
fn mismatched_diagonal_length_fails_at_build() {
    let cfg = parse(&SOLVE.replace("[1.0, 2.0]", "[1.0, 2.0, 3.0]")).unwrap();
    assert!(build_instance(cfg.instance.as_ref().unwrap(), 0.1).is_err());
}
