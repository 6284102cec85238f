use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use quadrelax_cli::report::{Section, Value};
use quadrelax_cli::{parse_document, parse_invocation, Document};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadrelax")).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> Document {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    parse_document(&String::from_utf8(out.stdout).unwrap(), Path::new("<stdout>")).unwrap()
}

fn num(doc: &Document, section: &str, key: &str) -> f64 {
    match doc.get_value(section, key) {
        Some(Value::Num(x)) => *x,
        Some(Value::Int(i)) => *i as f64,
        other => panic!("{section}.{key}: {other:?}"),
    }
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn parses_documented_invocations() {
    use quadrelax_cli::args::{Command as C, InitialState, Orders};
    let cli = parse_invocation(["quadrelax", "rates", "--config", "theo.cfg", "--q", "all"]).unwrap();
    assert!(matches!(cli.command, C::Rates(ref a) if a.q == Orders::All));
    assert_eq!(cli.config, Some(PathBuf::from("theo.cfg")));

    let cli = parse_invocation(["quadrelax", "evolve", "--state", "noon", "--t-max", "1e-3", "--points", "500"]).unwrap();
    match cli.command {
        C::Evolve(a) => {
            assert_eq!(a.state, InitialState::Noon);
            assert_eq!(a.t_max, 1e-3);
            assert_eq!(a.points, 500);
        }
        other => panic!("{other:?}"),
    }

    let cli =
        parse_invocation(["quadrelax", "fit", "--long", "long.csv", "--trans", "trans.csv", "--quad-freq", "5969"]).unwrap();
    assert_eq!(cli.physics.quad_freq, Some(5969.0));
    assert!(matches!(cli.command, C::Fit(ref a) if a.long == Some(PathBuf::from("long.csv"))));

    assert!(parse_invocation(["quadrelax", "rates", "--nope"]).is_err());
    assert!(parse_invocation(["quadrelax", "bloch", "--long", "a", "--trans", "b"]).is_err());
}

#[test]
fn rates_reproduce_quintuple_row() {
    let doc = run_ok(&["rates", "--config", path(&data("theo.cfg")), "--q", "all"]);
    let t = doc.get_table("rates").unwrap();
    let row = t.rows.iter().find(|r| r[0] == 7.0).unwrap();
    assert_eq!(row[1], 1.0);
    // 4 significant figures in the report, 0.1 % against the tabulated row
    assert!((row[2] / 21.69e3 - 1.0).abs() < 1e-3, "{}", row[2]);
    assert!((row[3] / 46.10e-6 - 1.0).abs() < 1e-3, "{}", row[3]);
    assert_eq!(t.rows.len(), 36);
}

#[test]
fn rates_raw_precision() {
    let doc = run_ok(&["rates", "--config", path(&data("theo.cfg")), "--q", "7", "--raw"]);
    let r = doc.get_table("rates").unwrap().rows[0][2];
    assert!((r / 21.69e3 - 1.0).abs() < 1e-3);
    assert_ne!(r, 2.169e4);
}

#[test]
fn flags_override_config() {
    let doc = run_ok(&["rates", "--config", path(&data("theo.cfg")), "--q", "7", "--j0", "1e-9", "--j1", "2e-9", "--j2", "3e-9"]);
    assert_eq!(num(&doc, "run", "j1_s"), 2e-9);
    // -(21 J1 + 7 J2) C with C from nu_Q = 266 kHz
    let c = num(&doc, "run", "c_hz2");
    let r = doc.get_table("rates").unwrap().rows[0][2];
    assert!((r / ((21.0 * 2e-9 + 7.0 * 3e-9) * c) - 1.0).abs() < 2e-3);
}

#[test]
fn validate_summary_line() {
    let out = run(&["validate"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().find(|l| l.starts_with("summary = ")).unwrap();
    assert!(line.starts_with("summary = max relative deviation"), "{line}");
    assert!(line.ends_with("< 1e-10"), "{line}");
    let doc = parse_document(&text, Path::new("v")).unwrap();
    assert_eq!(doc.get_table("printed_deviations").unwrap().rows.len(), 5);

    let doc = run_ok(&["validate", "--j0", "8.2e-9", "--j1", "3.3e-9", "--j2", "1.2e-9"]);
    assert!(num(&doc, "validate", "max_rel_corrected") < 1e-10);
    assert_eq!(num(&doc, "validate", "triples"), 1.0);
}

#[test]
fn fit_recovers_rate_scales_from_bundled_curves() {
    let doc = run_ok(&["fit", "--config", path(&data("exp.cfg"))]);
    for (k, want) in [("B0", 83.0), ("B1", 3.8), ("B2", 0.18)] {
        let got = num(&doc, "params", k);
        assert!((got / want - 1.0).abs() < 0.03, "{k} = {got}");
    }
    assert_eq!(doc.get_value("fit", "converged"), Some(&Value::Text("true".into())));
    for name in ["modes_longitudinal", "modes_transverse"] {
        assert_eq!(doc.get_table(name).unwrap().rows.len(), 8 - usize::from(name.ends_with("transverse")));
    }
    let plot = doc.get_table("plot_transverse").unwrap();
    assert_eq!(plot.header, ["t_seconds", "data", "model"]);
    assert_eq!(plot.rows.len(), 265);
}

#[test]
fn fit_with_flags_only() {
    let doc = run_ok(&[
        "fit",
        "--long",
        path(&data("long.csv")),
        "--trans",
        path(&data("trans.csv")),
        "--quad-freq",
        "5969",
        "--init",
        "B0=90,b1=4,B2=0.2",
        "--starts",
        "4",
    ]);
    assert_eq!(num(&doc, "start", "B0"), 90.0);
    assert!((num(&doc, "params", "B0") / 83.0 - 1.0).abs() < 0.03);
}

#[test]
fn reports_are_deterministic() {
    let cfg = data("exp.cfg");
    let a = run(&["fit", "--config", path(&cfg), "--seed", "7", "--starts", "6"]);
    let b = run(&["fit", "--config", path(&cfg), "--seed", "7", "--starts", "6"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let a = run(&["evolve", "--config", path(&data("theo.cfg")), "--t-max", "2e-4", "--points", "50", "--raw"]);
    let b = run(&["evolve", "--config", path(&data("theo.cfg")), "--t-max", "2e-4", "--points", "50", "--raw"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_directory_tables_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "evolve",
        "--config",
        path(&data("theo.cfg")),
        "--t-max",
        "1e-3",
        "--points",
        "20",
        "--elements",
        "11,81",
        "--raw",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(dir.path().join("evolve.txt")).unwrap();
    let doc = parse_document(&text, Path::new("evolve.txt")).unwrap();
    assert_eq!(doc.render(true), text);
    let table = doc.get_table("trajectory").unwrap();
    assert_eq!(table.header, ["t_seconds", "re_11", "re_81", "im_81"]);

    let mut rdr = csv::Reader::from_path(dir.path().join("trajectory.csv")).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, table.header);
    let rows: Vec<Vec<f64>> =
        rdr.records().map(|r| r.unwrap().iter().map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(&rows, &table.rows);
    // NOON coherence at t = 0
    assert!((rows[0][2] - 0.5).abs() < 1e-15);
}

#[test]
fn every_command_report_reparses() {
    let theo = data("theo.cfg");
    let exp = data("exp.cfg");
    let long = data("long.csv");
    let trans = data("trans.csv");
    let invocations: Vec<Vec<&str>> = vec![
        vec!["rates", "--config", path(&theo)],
        vec!["evolve", "--config", path(&theo), "--t-max", "1e-4", "--points", "8"],
        vec!["bloch", "--long", path(&long)],
        vec!["bloch", "--config", path(&exp), "--trans", path(&trans)],
        vec!["ilt", "--curve", path(&trans), "--points", "24"],
        vec!["validate"],
    ];
    for args in invocations {
        for raw in [false, true] {
            let mut a = args.clone();
            if raw {
                a.push("--raw");
            }
            let out = run(&a);
            assert_eq!(out.status.code(), Some(0), "{a:?}: {}", String::from_utf8_lossy(&out.stderr));
            let text = String::from_utf8(out.stdout).unwrap();
            let doc = parse_document(&text, Path::new("r")).unwrap();
            assert_eq!(doc.command, args[0]);
            assert_eq!(doc.render(raw), text, "{a:?}");
            assert!(doc.sections.iter().any(|(_, s)| matches!(s, Section::Table(_))));
        }
    }
}

#[test]
fn bloch_reports_time_constants() {
    let doc = run_ok(&["bloch", "--trans", path(&data("trans.csv"))]);
    let t2 = num(&doc, "bloch", "t2_s");
    assert!(t2 > 5e-3 && t2 < 20e-3, "{t2}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["rates", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
    // no density source
    let out = run(&["rates", "--quad-freq", "266e3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("spectral densities missing"));
    // two density sources
    let out = run(&[
        "rates",
        "--quad-freq",
        "266e3",
        "--larmor-freq",
        "47.24e6",
        "--correlation-time",
        "4.1e-9",
        "--j0",
        "1e-9",
        "--j1",
        "1e-9",
        "--j2",
        "1e-9",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(run(&["bloch"]).status.code(), Some(2));
}

#[test]
fn data_errors_exit_3_and_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "# comment\nt_seconds,amplitude\n0.001,0.9\n0.002,abc\n").unwrap();
    let out = run(&["bloch", "--trans", path(&bad)]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(&format!("{}:4:", bad.display())), "{err}");

    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "quad_freq = 5969\ncolour = blue\n").unwrap();
    let out = run(&["validate", "--config", path(&cfg)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("run.cfg:2:"));

    let out = run(&["bloch", "--trans", path(&dir.path().join("missing.csv"))]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn computation_failures_exit_1() {
    let out = run(&["rates", "--config", path(&data("theo.cfg")), "--spin", "5"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["rates", "--config", path(&data("theo.cfg")), "--q", "9"]);
    assert_eq!(out.status.code(), Some(1));
    // a constant curve has no recoverable time constant
    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("flat.csv");
    let body: String = (1..=10).map(|k| format!("{},1\n", k as f64 * 1e-3)).collect();
    std::fs::write(&flat, format!("t_seconds,amplitude\n{body}")).unwrap();
    assert_eq!(run(&["bloch", "--long", path(&flat)]).status.code(), Some(1));
}

#[test]
fn equilibrium_file_populations() {
    let dir = tempfile::tempdir().unwrap();
    let pops = dir.path().join("pops.csv");
    std::fs::write(&pops, "population\n0.5\n0.5\n0\n0\n0\n0\n0\n0\n").unwrap();
    let doc = run_ok(&[
        "evolve",
        "--config",
        path(&data("theo.cfg")),
        "--equilibrium",
        "file",
        "--equilibrium-file",
        path(&pops),
        "--state",
        "uniform",
        "--t-max",
        "0.05",
        "--points",
        "3",
        "--elements",
        "11,22,33",
        "--raw",
    ]);
    let last = doc.get_table("trajectory").unwrap().rows.last().unwrap().clone();
    assert!((last[1] - 0.5).abs() < 1e-9 && (last[2] - 0.5).abs() < 1e-9 && last[3].abs() < 1e-9, "{last:?}");

    std::fs::write(&pops, "population\n0.5\n0.5\n").unwrap();
    let out = run(&["evolve", "--config", path(&data("theo.cfg")), "--equilibrium", "file", "--equilibrium-file", path(&pops), "--t-max", "1e-3"]);
    assert_eq!(out.status.code(), Some(3));
}
