use std::path::Path;
use std::process::{Command, Output};

fn regvar(dir: &Path, args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_regvar"));
    cmd.current_dir(dir).args(args);
    match threads {
        Some(t) => cmd.env("REGVAR_THREADS", t),
        None => cmd.env_remove("REGVAR_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

const ANALYZE: &str = r#"
seed = 5
[analyze]
f = "pow_slowvar(1.7, log2)"
n = 100000
lattice_points = 81
[analyze.test_set]
base = [1.0, 2.0]
hole_fraction = 0.1
"#;

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.toml", ANALYZE);
    let one = regvar(dir.path(), &["analyze", "--config", &cfg], Some("1"));
    let four = regvar(dir.path(), &["analyze", "--config", &cfg], Some("4"));
    let again = regvar(dir.path(), &["analyze", "--config", &cfg], None);
    assert_eq!(code(&one), 0, "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, again.stdout);
    let v: serde_json::Value = serde_json::from_slice(&one.stdout).unwrap();
    assert_eq!(v["version"], "regvar-report/1");
    assert_eq!(v["seed"], 5);
    assert_eq!(v["config"]["lattice_points"], 81);
    assert!(v["accounting"].get("wall_clock_seconds").is_none());
    assert!((v["result"]["kappa_hat"].as_f64().unwrap() - 1.7).abs() < 1e-6);
}

#[test]
fn timing_is_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.toml", ANALYZE);
    let o = regvar(dir.path(), &["analyze", "--config", &cfg, "--timing"], None);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["accounting"]["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn seed_flag_overrides_config_and_moves_spikes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "e.toml", "seed = 1\n[esslim]\nf = \"spiked(decay(2, 1), 0.001, 100)\"\n");
    let a = regvar(dir.path(), &["esslim", "--config", &cfg], None);
    let b = regvar(dir.path(), &["esslim", "--config", &cfg, "--seed", "2"], None);
    assert_eq!(code(&a), 0);
    let (va, vb): (serde_json::Value, serde_json::Value) =
        (serde_json::from_slice(&a.stdout).unwrap(), serde_json::from_slice(&b.stdout).unwrap());
    assert_eq!(va["result"]["spikes"][0]["seed"], 1);
    assert_eq!(vb["result"]["spikes"][0]["seed"], 2);
    assert_ne!(va["result"]["ess_lim"]["epsilon_profile"], vb["result"]["ess_lim"]["epsilon_profile"]);
}

#[test]
fn exit_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, cmd: &str, text: &str| {
        let cfg = write(dir.path(), name, text);
        regvar(dir.path(), &[cmd, "--config", &cfg], None)
    };
    let base = "[analyze]\nn = 20000\nlattice_points = 41\nuct = false\n";
    assert_eq!(code(&run("ok.toml", "analyze", &format!("{base}f = \"const(3)\"\n"))), 0);
    assert_eq!(code(&run("osc.toml", "analyze", &format!("{base}f = \"sin_osc\"\n"))), 3);
    write(dir.path(), "ones.csv", &format!("n,value\n{}", (1..=20000).map(|n| format!("{n},1\n")).collect::<String>()));
    assert_eq!(code(&run("triv.toml", "analyze", &format!("{base}f = \"const(0)\"\na_n = \"csv:ones.csv\"\n"))), 4);
    let holes = "[analyze.test_set]\nbase = [1.0, 2.0]\nholes = [[1.01, 1.99]]\n";
    assert_eq!(code(&run("empty.toml", "analyze", &format!("{base}f = \"const(3)\"\ns_span = 0\n{holes}"))), 5);
    let solve = "[sequences]\nn = 1000\n[sequences.solve]\nphi = \"identity\"\nlambda = 1.0\na = 1.0\nb = 1e-9\n";
    assert_eq!(code(&run("nb.toml", "sequences", solve)), 6);

    let bad = run("bad.toml", "analyze", &format!("{base}f = \"log\"\ncolour = 1\n"));
    assert_eq!(code(&bad), 2);
    let msg = String::from_utf8_lossy(&bad.stderr);
    assert!(msg.contains("colour") && msg.contains("line"), "{msg}");
    assert_eq!(code(&run("tol.toml", "analyze", &format!("{base}f = \"log\"\nosc_tol = 0\n"))), 2);
    assert_eq!(code(&run("fn.toml", "analyze", &format!("{base}f = \"nonsense(1)\"\n"))), 2);
    assert_eq!(code(&run("none.toml", "phi", "")), 2);
    assert_eq!(code(&regvar(dir.path(), &["analyze", "--config", "missing.toml"], None)), 1);
}

#[test]
fn csv_round_trip_gives_identical_results() {
    let dir = tempfile::tempdir().unwrap();
    let table = write(dir.path(), "t.toml", "[table]\nf = \"pow_slowvar(1.7, log2)\"\nx_lo = 1.0\nx_hi = 40000.0\npoints = 4000\n");
    let first = regvar(dir.path(), &["table", "--config", &table, "--out", "f1.csv"], None);
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    let reexport = write(dir.path(), "r.toml", "[table]\nf = \"csv:f1.csv\"\nx_lo = 1.0\nx_hi = 40000.0\npoints = 4000\n");
    regvar(dir.path(), &["table", "--config", &reexport, "--out", "f2.csv"], None);
    let (a, b) = (std::fs::read(dir.path().join("f1.csv")).unwrap(), std::fs::read(dir.path().join("f2.csv")).unwrap());
    assert_eq!(a, b);

    let analyze = |csv: &str| {
        let cfg = write(dir.path(), "an.toml", &format!("[analyze]\nf = \"csv:{csv}\"\nn = 10000\nlattice_points = 41\n"));
        let o = regvar(dir.path(), &["analyze", "--config", &cfg], None);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let mut v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v["config"]["f"] = serde_json::Value::Null;
        v["result"]
            .as_object_mut()
            .unwrap()
            .retain(|k, _| k != "diagnostics");
        v
    };
    let (ra, rb) = (analyze("f1.csv"), analyze("f2.csv"));
    assert_eq!(ra["result"], rb["result"]);
    assert!((ra["result"]["kappa_hat"].as_f64().unwrap() - 1.7).abs() < 0.05);
}

#[test]
fn verify_fe_prints_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "v.toml", "[verify_fe]\ntrials = 200\nt = 3.0\nkappa = [2.0]\n");
    let o = regvar(dir.path(), &["verify-fe", "--config", &cfg, "--format", "text"], None);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("result.table[2].cells = [kappa*log(t), (t^kappa-1)/s, t^kappa]"), "{text}");
    assert!(text.contains("result.cells[8].value_at_t = 9\n"));
    assert!(text.contains("result.exact = true"));

    let broken = write(dir.path(), "b.toml", "[verify_fe]\ntrials = 200\nbroken = true\n");
    let o = regvar(dir.path(), &["verify-fe", "--config", &broken], None);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["exact"], false);
    assert!(v["result"]["max_residual"].as_f64().unwrap() > 1e-4);
}

#[test]
fn sample_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            regvar_cli::config::RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert_eq!(seen, 8);
}
