use std::path::{Path, PathBuf};
use std::process::Command;

use dbie_cli::config::{ExperimentKind, ParamGrid, ProblemKind};
use dbie_cli::{preset, RunConfig, PRESETS};

fn scratch(name: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("dbie-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&p).unwrap();
    p
}

fn dbie(args: &[&str], dir: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_dbie")).args(args).current_dir(dir).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into(), String::from_utf8_lossy(&out.stderr).into())
}

const SMALL: &str = r#"{
  "name": "small",
  "problem": "dirac1",
  "curve": { "family": "flat" },
  "m": 1.0,
  "energy": 0.5,
  "sources": [{ "location": [0.0, 2.0] }],
  "discretization": { "order": 8, "max_panel": 2.0 },
  "experiments": [
    { "kind": "grid", "grid": { "nx": 4, "ny": 3, "x0": -1.0, "y0": -1.0, "dx": 0.5, "dy": 1.0 } },
    { "kind": "sweep", "param": "energy", "grid": { "values": [0.3, 0.6] },
      "observable": { "type": "field", "point": [-3.0, 0.5], "component": 0 } }
  ]
}"#;

#[test]
fn presets_parse_and_validate() {
    let names: Vec<&str> = PRESETS.iter().map(|p| p.0).collect();
    assert_eq!(names, ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7"]);
    for (name, text) in PRESETS {
        let cfg = preset(name).unwrap();
        assert_eq!(cfg.name, name);
        // the shipped files are the embedded ones
        let disk = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets").join(format!("{name}.json"))).unwrap();
        assert_eq!(disk, text);
        match cfg.problem {
            ProblemKind::Kg => cfg.kg_problem(&cfg.discretization).unwrap(),
            _ => {
                cfg.dirac_problem(&cfg.discretization).unwrap();
                continue;
            }
        };
    }
    assert!(preset("fig8").is_err());
    let fig7 = preset("fig7").unwrap();
    let ExperimentKind::Sweep { grid, .. } = &fig7.experiments[0].kind else { panic!() };
    assert!(grid.points().contains(&std::f64::consts::FRAC_PI_4));
}

#[test]
fn config_round_trips_and_hash_is_stable() {
    let a = RunConfig::from_json(SMALL).unwrap();
    let b = RunConfig::from_json(&serde_json::to_string(&a).unwrap()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.hash(), b.hash());
    assert_eq!(a.hash().len(), 64);
    assert_ne!(a.hash(), a.with_energy(0.4).hash());
}

#[test]
fn param_grid_merges_and_sorts() {
    let g = ParamGrid { values: vec![0.5, 0.0], linspace: Some((0.0, 1.0, 5)) };
    assert_eq!(g.points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
}

#[test]
fn validation_errors() {
    let bad = [
        SMALL.replace("\"energy\": 0.5", "\"energy\": 1.5"),
        SMALL.replace("\"family\": \"flat\"", "\"family\": \"nope\""),
        SMALL.replace("\"m\": 1.0,", ""),
        SMALL.replace("\"dirac1\"", "\"dirac2\""),
        SMALL.replace("\"sources\": [{ \"location\": [0.0, 2.0] }]", "\"sources\": []"),
        SMALL.replace("\"max_panel\": 2.0", "\"max_panel\": 2.0, \"bogus\": 1"),
        SMALL.replace("\"param\": \"energy\"", "\"param\": \"distance\""),
    ];
    for (k, text) in bad.iter().enumerate() {
        let r = RunConfig::from_json(text).and_then(|c| c.curves().map(|_| c));
        assert!(r.is_err(), "case {k} accepted");
    }
}

#[test]
fn anchored_sources_pick_their_side() {
    let text = r#"{
      "problem": "dirac2",
      "curve_pair": { "family": "parallel_lines", "params": { "d": 1.0 } },
      "m": 2.0, "energy": 0.8,
      "sources": [
        { "anchor": { "interface": 1, "s": 0.0, "offset": -1.0 } },
        { "anchor": { "interface": 1, "s": 0.0, "offset": 0.5 } },
        { "anchor": { "interface": 2, "s": 1.0, "offset": 2.0 } }
      ]
    }"#;
    let cfg = RunConfig::from_json(text).unwrap();
    let spec = cfg.dirac_problem(&cfg.discretization).unwrap();
    let got: Vec<_> = spec.sources.iter().map(|s| (s.location, s.region.name())).collect();
    assert_eq!(got, [([0.0, -1.5], "omega0"), ([0.0, 0.0], "omega1"), ([1.0, 2.5], "omega2")]);
    let bad = text.replace("\"interface\": 2", "\"interface\": 3");
    assert!(RunConfig::from_json(&bad).unwrap().dirac_problem(&cfg.discretization).is_err());
}

#[test]
fn binary_runs_and_is_deterministic() {
    let dir = scratch("det");
    std::fs::write(dir.join("c.json"), SMALL).unwrap();
    let (code, stdout, stderr) = dbie(&["run", "--config", "c.json", "--out", "a"], &dir);
    assert_eq!(code, 0, "{stderr}");
    let meta: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(meta["experiments"].as_array().unwrap().len(), 2);
    for f in ["field.dbiegrid", "sweep_energy.csv", "metadata.json"] {
        assert!(dir.join("a").join(f).exists(), "{f}");
    }
    let (code, _, _) = dbie(&["run", "--config", "c.json", "--out", "b", "--threads", "1"], &dir);
    assert_eq!(code, 0);
    for f in ["field.dbiegrid", "sweep_energy.csv", "metadata.json"] {
        assert_eq!(std::fs::read(dir.join("a").join(f)).unwrap(), std::fs::read(dir.join("b").join(f)).unwrap(), "{f}");
    }
    let (code, _, _) = dbie(&["solve", "--config", "c.json", "--out", "s"], &dir);
    assert_eq!(code, 0);
    let rows = dbie::solve::read_density_csv(&dir.join("s/density.csv")).unwrap();
    assert!(!rows.is_empty());
    let sweep = dbie::field::read_param_csv(&dir.join("a/sweep_energy.csv")).unwrap();
    assert_eq!(sweep.iter().map(|r| r.0).collect::<Vec<_>>(), [0.3, 0.6]);
    // --tol changes the effective config and therefore the hash
    let (code, stdout, _) = dbie(&["solve", "--config", "c.json", "--out", "t", "--tol", "1e-9"], &dir);
    assert_eq!(code, 0);
    let m2: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_ne!(m2["config_hash"], meta["config_hash"]);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn exit_codes() {
    let dir = scratch("codes");
    std::fs::write(dir.join("bad.json"), SMALL.replace("\"energy\": 0.5", "\"energy\": 1.5")).unwrap();
    let (code, _, stderr) = dbie(&["solve", "--config", "bad.json"], &dir);
    assert_eq!(code, 2);
    let rec: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(rec["error"]["kind"], "precondition");
    assert_eq!(dbie(&["solve"], &dir).0, 2);
    assert_eq!(dbie(&["solve", "--config", "missing.json"], &dir).0, 2);
    assert_eq!(dbie(&["preset", "fig9"], &dir).0, 2);
    std::fs::write(dir.join("c.json"), SMALL).unwrap();
    assert_eq!(dbie(&["converge", "--config", "c.json", "--out", "o"], &dir).0, 2);
    // source declared on the wrong side of the interface
    std::fs::write(dir.join("side.json"), SMALL.replace("[0.0, 2.0] }", "[0.0, 2.0], \"region\": \"omega1\" }")).unwrap();
    assert_eq!(dbie(&["solve", "--config", "side.json", "--out", "o"], &dir).0, 2);
    // every row fails numerically: no edge-mode signal reaches the window
    let far = r#"{
      "problem": "dirac2",
      "curve_pair": { "family": "parallel_lines", "params": { "d": 1.0 } },
      "m": 2.0, "energy": 0.8,
      "sources": [{ "location": [0.0, -40.0], "region": "omega0" }],
      "discretization": { "order": 8, "max_panel": 2.0 },
      "experiments": [{ "kind": "sweep", "param": "distance", "grid": { "values": [1.0] },
                        "observable": { "type": "transmission" } }]
    }"#;
    std::fs::write(dir.join("far.json"), far).unwrap();
    let (code, _, stderr) = dbie(&["sweep", "--config", "far.json", "--out", "o"], &dir);
    assert_eq!(code, 3, "{stderr}");
    std::fs::remove_dir_all(&dir).ok();
}
