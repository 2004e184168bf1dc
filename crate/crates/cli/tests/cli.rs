use std::path::Path;
use std::process::{Command, Output};

use bipartite_cli::table::parse_csv;
use bipartite_lindblad::{simulate, BathSpec, NbarMapping, SystemKind, SystemSpec, TimeGrid};

fn bipartite(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bipartite"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn steady_value(text: &str, key: &str) -> f64 {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .find_map(|l| {
            let (k, v) = l.split_once('=')?;
            (k.trim() == key).then(|| v.trim().parse().unwrap())
        })
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
}

#[test]
fn rwa_qubits_at_zero_temperature_stay_empty() {
    let out = bipartite(&["simulate", "--system", "qq", "--rwa", "--temp", "0"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = parse_csv(&stdout(&out)).unwrap();
    assert_eq!(csv.names, ["n1", "n2"]);
    assert_eq!(csv.times.len(), 5001);
    assert_eq!(*csv.times.last().unwrap(), 50.0);
    for name in ["n1", "n2"] {
        assert!(csv.series(name).unwrap().iter().all(|v| v.abs() <= 1e-10));
    }
    assert_eq!(csv.comment("nbar"), Some("bose"));
    assert_eq!(csv.comment("system"), Some("qq"));
    assert_eq!(csv.comment("rwa"), Some("true"));
    assert_eq!(csv.comment("initial_state"), Some("ground"));
    assert!(csv.comments[0].starts_with("bipartite "));
}

#[test]
fn csv_is_deterministic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &Path| {
        vec![
            "simulate".to_string(),
            "--system".into(),
            "qo".into(),
            "--temp".into(),
            "2".into(),
            "--fock-dim".into(),
            "6".into(),
            "--tmax".into(),
            "5".into(),
            "--out".into(),
            p.display().to_string(),
        ]
    };
    for p in [&a, &b] {
        let argv = args(p);
        let out = bipartite(&argv.iter().map(String::as_str).collect::<Vec<_>>());
        assert!(out.status.success(), "{}", stderr(&out));
        assert!(out.stdout.is_empty());
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert!(!text.contains('\r'));

    let spec = SystemSpec::resonant(SystemKind::QubitOsc, false).with_fock_dim(6);
    let grid = TimeGrid::new(0.0, 5.0, 0.01).unwrap();
    let reference = simulate(&spec, &BathSpec::weak(2.0, NbarMapping::Bose), &grid).unwrap();
    let parsed = parse_csv(&text).unwrap();
    assert_eq!(parsed.times.len(), reference.len());
    for (k, series) in reference.values.iter().enumerate() {
        for (x, y) in series.iter().zip(&parsed.values[k]) {
            assert!((x - y).abs() <= 5e-9 * x.abs().max(1e-300), "{x} vs {y}");
        }
    }
    for (x, y) in reference.times.iter().zip(&parsed.times) {
        assert!((x - y).abs() <= 5e-9 * x.abs());
    }
}

#[test]
fn strong_coupling_warns_but_runs() {
    let out = bipartite(&["simulate", "--system", "qq", "--g", "0.4", "--tmax", "1"]);
    assert!(out.status.success());
    let err = stderr(&out);
    assert!(err.contains("warning"), "{err}");
    assert!(err.contains("0.3"), "{err}");
    let quiet = bipartite(&["simulate", "--system", "qq", "--tmax", "1"]);
    assert!(!stderr(&quiet).contains("warning"));
}

#[test]
fn config_errors_exit_with_status_two() {
    for args in [
        &["simulate", "--dt", "0.03", "--tmax", "1"][..],
        &["simulate", "--system", "xx"],
        &["simulate", "--nbar", "planck"],
        &["simulate", "--g", "-1"],
        &["simulate", "--system", "oo", "--fock-dim", "1"],
        &["steady", "--gamma", "-0.1"],
        &["reproduce", "7c"],
    ] {
        let out = bipartite(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
    let missing = bipartite(&["simulate", "--config", "/nonexistent/scenario.conf"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn config_file_with_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("scenario.conf");
    std::fs::write(
        &conf,
        "# committed scenario\nsystem = qo\nrwa = true\ntemp = 2   # warm bath\nnbar = direct\nfock_dim = 5\ntmax = 2\n",
    )
    .unwrap();
    let conf = conf.display().to_string();
    let out = bipartite(&["simulate", "--config", &conf, "--temp", "0", "--rwa", "false"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = parse_csv(&stdout(&out)).unwrap();
    assert_eq!(csv.comment("system"), Some("qo"));
    assert_eq!(csv.comment("temperature"), Some("0"));
    assert_eq!(csv.comment("rwa"), Some("false"));
    assert_eq!(csv.comment("nbar"), Some("direct"));
    assert_eq!(csv.comment("fock_dim"), Some("5"));
    assert_eq!(csv.comment("t_max"), Some("2"));

    let bad = dir.path().join("bad.conf");
    std::fs::write(&bad, "colour = blue\n").unwrap();
    let out = bipartite(&["simulate", "--config", &bad.display().to_string()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("colour"));
}

#[test]
fn divergence_exits_with_status_three() {
    let out = bipartite(&["simulate", "--system", "qq", "--dt", "2.5"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("dt"));
}

#[test]
fn steady_occupations() {
    let cold = bipartite(&["steady", "--system", "qq", "--rwa", "--temp", "0"]);
    assert!(cold.status.success());
    assert_eq!(steady_value(&stdout(&cold), "n1"), 0.0);
    assert_eq!(steady_value(&stdout(&cold), "n2"), 0.0);

    // Under RWA at resonance the thermal product state is stationary, so each
    // qubit sits at N/(2N+1).
    let product = |n: f64| n / (2.0 * n + 1.0);
    for g in ["0", "0.2"] {
        let direct = bipartite(&["steady", "--system", "qq", "--rwa", "--temp", "2", "--nbar", "direct", "--g", g]);
        let text = stdout(&direct);
        assert!((steady_value(&text, "n1") - product(2.0)).abs() < 1e-8, "{text}");
        assert!((steady_value(&text, "n2") - 0.4).abs() < 1e-8);

        let bose = bipartite(&["steady", "--system", "qq", "--rwa", "--temp", "2", "--nbar", "bose", "--g", g]);
        let n = 1.0 / (0.5f64.exp() - 1.0);
        assert!((steady_value(&stdout(&bose), "n1") - product(n)).abs() < 1e-8);
        assert!((steady_value(&stdout(&bose), "n1") - 0.377540).abs() < 1e-6);
    }
}

#[test]
fn steady_reduces_oversized_truncation() {
    let out = bipartite(&["steady", "--system", "oo", "--rwa", "--temp", "0"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let err = stderr(&out);
    assert!(err.contains("fock_dim 20 reduced to 8"), "{err}");
    assert!(stdout(&out).contains("# fock_dim = 8"));
    assert_eq!(steady_value(&stdout(&out), "n1"), 0.0);
}

#[test]
fn degenerate_steady_state_exits_with_status_four() {
    let out = bipartite(&["steady", "--system", "qq", "--gamma", "0", "--kappa", "0"]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

#[test]
fn reproduce_writes_two_csvs_and_an_overlay() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("figs");
    let out = bipartite(&["reproduce", "6a", "--out", &out_dir.display().to_string(), "--tmax", "20"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let listed = stdout(&out);
    for name in ["fig6a_rwa.csv", "fig6a_full.csv", "fig6a.svg"] {
        assert!(out_dir.join(name).exists());
        assert!(listed.contains(name));
    }
    let rwa = parse_csv(&std::fs::read_to_string(out_dir.join("fig6a_rwa.csv")).unwrap()).unwrap();
    let full = parse_csv(&std::fs::read_to_string(out_dir.join("fig6a_full.csv")).unwrap()).unwrap();
    assert_eq!(rwa.comment("nbar"), Some("direct"));
    assert_eq!(full.comment("figure"), Some("6a"));
    assert_eq!(full.comment("rwa"), Some("false"));
    assert!(rwa.values.iter().flatten().all(|v| v.abs() <= 1e-10));
    // Cavity and qubit follow visibly different curves.
    let (cavity, qubit) = (full.series("n1").unwrap(), full.series("n2").unwrap());
    let gap = cavity.iter().zip(qubit).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(gap > 1e-3, "{gap}");

    let svg = std::fs::read_to_string(out_dir.join("fig6a.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 4);
    for color in ["red", "black", "blue", "green"] {
        assert!(svg.contains(&format!("stroke=\"{color}\"")));
    }
}

#[test]
fn reproduce_warm_qubits_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let out = bipartite(&["reproduce", "4b", "--out", &d.display().to_string()]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    for name in ["fig4b_rwa.csv", "fig4b_full.csv", "fig4b.svg"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap());
    }
    let full = parse_csv(&std::fs::read_to_string(a.join("fig4b_full.csv")).unwrap()).unwrap();
    assert_eq!(full.comment("temperature"), Some("2"));
    assert_eq!(full.times.len(), 5001);
}

#[test]
fn svg_is_well_formed_standalone_svg11() {
    let dir = tempfile::tempdir().unwrap();
    let out = bipartite(&["reproduce", "5b", "--out", &dir.path().display().to_string(), "--fock-dim", "4", "--tmax", "2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let svg = std::fs::read_to_string(dir.path().join("fig5b.svg")).unwrap();
    assert!(svg.starts_with("<?xml version=\"1.0\""));
    assert!(svg.contains("-//W3C//DTD SVG 1.1//EN"));
    assert!(!svg.contains("href"));
    let opts = roxmltree::ParsingOptions {
        allow_dtd: true,
        ..Default::default()
    };
    let doc = roxmltree::Document::parse_with_options(&svg, opts).expect("well-formed XML");
    let root = doc.root_element();
    assert_eq!(root.tag_name().name(), "svg");
    assert_eq!(root.tag_name().namespace(), Some("http://www.w3.org/2000/svg"));
    assert_eq!(root.attribute("version"), Some("1.1"));
    let polylines: Vec<_> = root.descendants().filter(|n| n.has_tag_name("polyline")).collect();
    assert_eq!(polylines.len(), 4);
    for p in polylines {
        let points = p.attribute("points").unwrap();
        assert_eq!(points.split(' ').count(), 201);
        assert!(points.split([' ', ',']).all(|v| v.parse::<f64>().unwrap().is_finite()));
    }
    // Legend entries for every curve.
    let texts: Vec<&str> = root.descendants().filter(|n| n.has_tag_name("text")).filter_map(|n| n.text()).collect();
    assert_eq!(texts.iter().filter(|t| t.contains("(RWA)") || t.contains("(full)")).count(), 4);
}

#[test]
fn simulate_emits_svg_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("run.svg");
    let out = bipartite(&["simulate", "--system", "qq", "--tmax", "3", "--svg", &svg.display().to_string()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 2);
    assert!(parse_csv(&stdout(&out)).is_ok());
}

#[test]
fn validate_passes_at_default_step() {
    let out = bipartite(&["validate"]);
    assert!(out.status.success(), "{}\n{}", stdout(&out), stderr(&out));
    let report = stdout(&out);
    let checks = report.lines().filter(|l| l.starts_with("[PASS]") || l.starts_with("[FAIL]")).count();
    assert!(checks >= 12, "{report}");
    assert!(!report.lines().any(|l| l.starts_with("[FAIL]")));
}

#[test]
fn validate_fails_with_coarse_step() {
    let out = bipartite(&["validate", "--dt", "0.5"]);
    assert!(!out.status.success());
    assert!(stdout(&out).lines().any(|l| l.starts_with("[FAIL]")));
}
