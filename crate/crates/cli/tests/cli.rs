use proptest::prelude::*;
use staircase::energy::SurfaceMode;
use staircase::quad::QuadSettings;
use staircase::scaling::{Constructor, ParamRule};
use staircase_cli::{parse_constructor, parse_matrix, parse_rat, run, Command, EpsGrid, ExperimentConfig, THREADS_ENV};
use std::process::{Command as Proc, Output};

fn bin(args: &[&str]) -> Output {
    Proc::new(env!("CARGO_BIN_EXE_staircase")).args(args).env_remove(THREADS_ENV).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn classify_examples() {
    let o = bin(&["classify", "--A", "diag:1,0", "--B", "diag:0,0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "degenerate, a=b=e1\n");
    let o = bin(&["classify", "--A", "diag:1,1", "--B", "diag:0,0"]);
    assert!(stdout(&o).starts_with("incompatible"));
    let o = bin(&["classify", "--A", "full:0,1,1,0", "--B", "diag:0,0"]);
    assert!(stdout(&o).starts_with("non-degenerate"));
    // A = B has no classification.
    let o = bin(&["classify", "--A", "diag:1,0", "--B", "diag:1,0"]);
    assert!(!o.status.success() && stderr(&o).contains("coincide"));
}

#[test]
fn exponents_table() {
    let o = bin(&["exponents", "--m", "3", "--p", "2"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 5 * 3);
    let sigs: std::collections::BTreeSet<&str> = rows.iter().map(|r| r.split(',').nth(1).unwrap()).collect();
    assert_eq!(sigs.len(), 5);
    assert!(rows.contains(&"3,121,3,2,dirichlet,2,1,2"));
    assert!(rows.contains(&"3,121,1,2,dirichlet,1,4,5"));
    let both = stdout(&bin(&["exponents", "--m", "2", "--p", "1,3/2", "--bc", "both"]));
    assert_eq!(both.lines().count(), 2 + 3 * 2 * 2 * 2);
    assert!(both.lines().any(|l| l.starts_with("2,12,2,3/2,dirichlet,1,")));
    assert!(both.lines().any(|l| l.starts_with("2,12,1,1,periodic,1,1,1")));
}

#[test]
fn cylinder_scan_slope() {
    let o = bin(&["scan", "--construction", "cylinder", "--p", "2", "--eps", "1e-6:1e-2:9"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let slope: f64 = out.lines().nth(1).unwrap().split_whitespace().find_map(|t| t.strip_prefix("slope=")).unwrap().parse().unwrap();
    assert!((slope - 0.8).abs() < 0.07, "{slope}");
    assert_eq!(out.lines().filter(|l| l.starts_with("cylinder3d,")).count(), 9);
}

#[test]
fn errors_exit_nonzero_with_diagnostics() {
    let o = bin(&["scan", "--construction", "twodir", "--bogus"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("Usage"));
    let o = bin(&["energy", "--construction", "twodir", "--n", "3"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("N > 4L/H required"), "{}", stderr(&o));
    let o = bin(&["scan", "--construction", "onedir", "--eps", "1e-3:1e-2:6"]);
    assert!(!o.status.success() && stderr(&o).contains("decades"));
    let o = bin(&["wells", "--signature", "11"]);
    assert!(!o.status.success() && stderr(&o).contains("consecutive degenerate"));
    let o = bin(&["classify", "--A", "diag:1,0", "--B", "full:1,2,3"]);
    assert!(!o.status.success() && stderr(&o).contains("d² entries"));
    let o = Proc::new(env!("CARGO_BIN_EXE_staircase")).args(["exponents", "--m", "2"]).env(THREADS_ENV, "many").output().unwrap();
    assert!(!o.status.success() && stderr(&o).contains(THREADS_ENV));
}

#[test]
fn every_subcommand_succeeds() {
    let runs: [&[&str]; 8] = [
        &["wells", "--signature", "12"],
        &["hull", "--signature", "121"],
        &["classify", "--A", "diag:1,-1", "--B", "diag:0,0"],
        &["construct", "--construction", "onedir", "--n", "6", "--grid", "8"],
        &["energy", "--construction", "twodir", "--eps", "1e-3"],
        &["spectral", "--signature", "12", "--level", "2", "--grid", "8"],
        &["scan", "--construction", "onedir", "--eps", "1e-5:1e-2:5"],
        &["exponents", "--m", "4"],
    ];
    for args in runs {
        let o = bin(args);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
        assert!(!o.stdout.is_empty());
    }
    let wells: serde_json::Value = serde_json::from_slice(&bin(&["wells", "--signature", "12"]).stdout).unwrap();
    assert_eq!(wells["wells"][2], serde_json::json!([0.5, 1.0, -1.0]));
    let hull = stdout(&bin(&["hull", "--signature", "12"]));
    assert!(hull.contains("\n2,2,0.5;0;0,0;1;-1\n"));
    let grid = stdout(&bin(&["construct", "--construction", "onedir", "--n", "6", "--grid", "8"]));
    assert_eq!(grid.lines().nth(1), Some("x,y,u_x,u_y,e_xx,e_xy,e_yy,well"));
    assert_eq!(grid.lines().count(), 2 + 64);
}

#[test]
fn spectral_reports() {
    let json: serde_json::Value =
        serde_json::from_slice(&bin(&["spectral", "--construction", "twodir", "--n", "8", "--grid", "32", "--signature", "2", "--level", "1"]).stdout).unwrap();
    assert_eq!(json["lower_bound"]["holds"], true);
    assert_eq!(json["coercivity"]["holds"], true);
    assert!(json["hermitian_defect"].as_f64().unwrap() < 1e-12);
    let csv = stdout(&bin(&["spectral", "--signature", "12", "--level", "1", "--grid", "8", "--format", "csv"]));
    assert_eq!(csv.lines().count(), 1 + 100);
    // Dimension mismatch between family and field.
    let o = bin(&["spectral", "--construction", "twodir", "--n", "8", "--signature", "12", "--level", "1"]);
    assert!(!o.status.success());
}

#[test]
fn config_files_reproduce_flag_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scan.toml");
    let out_a = dir.path().join("a.csv");
    let args = ["scan", "--construction", "onedir", "--eps", "1e-5:1e-2:5", "--save-config", cfg.to_str().unwrap(), "-o", out_a.to_str().unwrap()];
    assert!(bin(&args).status.success());
    let text = std::fs::read_to_string(&cfg).unwrap();
    let parsed = ExperimentConfig::from_toml(&text).unwrap();
    assert_eq!(parsed.command, Command::Scan);
    assert_eq!(parsed.construction, Some(Constructor::Branch2dOneDir));
    let out_b = dir.path().join("b.csv");
    assert!(bin(&["run", "--config", cfg.to_str().unwrap(), "-o", out_b.to_str().unwrap()]).status.success());
    let (a, b) = (std::fs::read(&out_a).unwrap(), std::fs::read(&out_b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
    // Thread count does not change the bytes.
    let out_c = dir.path().join("c.csv");
    let one = Proc::new(env!("CARGO_BIN_EXE_staircase"))
        .args(["run", "--config", cfg.to_str().unwrap(), "-o", out_c.to_str().unwrap()])
        .env(THREADS_ENV, "1")
        .output()
        .unwrap();
    assert!(one.status.success());
    assert_eq!(std::fs::read(&out_c).unwrap(), a);
    assert!(ExperimentConfig::from_toml("command = \"scan\"\nunknown = 1\n").is_err());
}

#[test]
fn literals_and_rationals() {
    let m = parse_matrix("full:1,2,2,-3").unwrap();
    assert_eq!((m[(0, 1)], m[(1, 1)]), (2.0, -3.0));
    assert_eq!(parse_matrix("diag:0.5,1,-1").unwrap().nrows(), 3);
    assert!(parse_matrix("1,2").is_err());
    assert!(parse_matrix("diag:a").is_err());
    assert_eq!(parse_rat("3/2").unwrap(), staircase::scaling::Rat::new(3, 2));
    assert_eq!(parse_rat("1.5").unwrap(), staircase::scaling::Rat::new(3, 2));
    assert!(parse_rat("1/0").is_err());
    assert_eq!(parse_constructor("Nested").unwrap(), Constructor::NestedSecondOrder);
    assert_eq!(parse_constructor("cuboid3D").unwrap(), Constructor::Cuboid3d);
    assert_eq!("1e-6:1e-2:9".parse::<EpsGrid>().unwrap().values().len(), 9);
    assert!("1e-6:1e-2".parse::<EpsGrid>().is_err());
    assert!("-1".parse::<EpsGrid>().is_err());
}

#[test]
fn runs_are_deterministic() {
    let mut cfg = ExperimentConfig::new(Command::Spectral);
    cfg.signature = Some("21".into());
    cfg.level = Some(2);
    cfg.grid = 8;
    cfg.seed = 42;
    assert_eq!(run(&cfg).unwrap(), run(&cfg).unwrap());
    let first = run(&cfg).unwrap();
    cfg.seed = 43;
    assert_ne!(run(&cfg).unwrap(), first);
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![any::<f64>().prop_filter("finite", |x| x.is_finite()), -1e3f64..1e3, Just(0.0), Just(-0.0), Just(f64::MIN_POSITIVE)]
}

fn configs() -> impl Strategy<Value = ExperimentConfig> {
    (
        0usize..8,
        proptest::option::of("[12]{1,6}"),
        proptest::option::of(1usize..7),
        (finite(), finite(), 1usize..20, 0..=i64::MAX as u64),
        proptest::option::of(0usize..5),
        proptest::option::of(1u64..500),
        (finite(), finite(), finite(), 0usize..3),
        (1usize..12, finite(), finite(), any::<bool>()),
    )
        .prop_map(|(cmd, signature, ell, (kappa, mu, grid, seed), c, n, (ra, rb, eps, rk), (order, rtol, atol, perim))| {
            let command = [
                Command::Wells,
                Command::Hull,
                Command::Classify,
                Command::Construct,
                Command::Energy,
                Command::Spectral,
                Command::Scan,
                Command::Exponents,
            ][cmd];
            let mut cfg = ExperimentConfig::new(command);
            cfg.signature = signature;
            cfg.ell = ell;
            cfg.kappa = kappa;
            cfg.mu = mu;
            cfg.grid = grid;
            cfg.seed = seed;
            cfg.construction = c.map(|i| Constructor::ALL[i]);
            cfg.n = n;
            cfg.eps = Some(EpsGrid { min: eps, max: ra, points: grid });
            cfg.rule = match rk {
                0 => None,
                1 => Some(ParamRule::Stripes { prefactor: ra, exponent: rb }),
                _ => Some(ParamRule::Scales { a: ra, b: rb }),
            };
            cfg.quad = QuadSettings { order, refined: order + 2, rtol, atol, max_depth: order / 2 };
            cfg.surface = if perim { SurfaceMode::PhasePerimeter } else { SurfaceMode::HessianTv };
            cfg.p = "3/2".into();
            cfg.a = Some("diag:1,0".into());
            cfg
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    // Parsed back, every float keeps its bit pattern.
    #[test]
    fn config_round_trips_bit_exactly(cfg in configs()) {
        let text = cfg.to_toml().unwrap();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        prop_assert_eq!(back.kappa.to_bits(), cfg.kappa.to_bits());
        prop_assert_eq!(back.mu.to_bits(), cfg.mu.to_bits());
        prop_assert_eq!(back.quad.rtol.to_bits(), cfg.quad.rtol.to_bits());
        prop_assert_eq!(back.eps.unwrap().min.to_bits(), cfg.eps.unwrap().min.to_bits());
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_toml().unwrap(), text);
    }
}
