use iga_core::discretization::BenchmarkSpec;
use iga_pmg::{parse_config, run, to_csv, to_markdown, write_outputs, Mode, ResultRow, ResultTable, RunOptions, Status};
use std::process::Command;

const SMALL: &str = "benchmark = 2\np = 2, 3\nh = 3, 4\nsmoother = ilut, gs\n";

#[test]
fn split_config_gives_twelve_patches() {
    let c = parse_config("benchmark = 3\nsplit = 1\n").unwrap();
    let spec = BenchmarkSpec::new(c.benchmark).unwrap();
    assert_eq!(spec.domain(2, c.h[0], c.split).unwrap().num_patches(), 12);
}

#[test]
fn reruns_are_byte_identical() {
    let c = parse_config(SMALL).unwrap();
    let a = run(&c, &RunOptions::default()).unwrap();
    let b = run(&c, &RunOptions::default()).unwrap();
    assert_eq!(to_csv(&a, false), to_csv(&b, false));
    assert_eq!(to_markdown(&a), to_markdown(&b));
    let other = run(
        &c,
        &RunOptions {
            seed: Some(7),
            ..Default::default()
        },
    )
    .unwrap();
    let hist = |t: &ResultTable| t.rows[1].residuals.clone();
    assert_ne!(hist(&a), hist(&other));
}

#[test]
fn rows_follow_configuration_order() {
    let table = run(&parse_config(SMALL).unwrap(), &RunOptions::default()).unwrap();
    let keys: Vec<(usize, u32, String)> = table.rows.iter().map(|r| (r.p, r.h_exp, r.variant.clone())).collect();
    let mut expected = Vec::new();
    for p in [2, 3] {
        for h in [3, 4] {
            for s in ["ilut", "gs"] {
                expected.push((p, h, s.to_string()));
            }
        }
    }
    assert_eq!(keys, expected);
    for r in &table.rows {
        assert_eq!(r.status, Status::Converged);
        assert_eq!(r.residuals.len(), r.value.unwrap() as usize + 1);
        if r.variant == "ilut" {
            assert!(r.residuals.windows(2).all(|w| w[1] < w[0]), "{:?}", r.residuals);
        }
    }
}

#[test]
fn outputs_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let table = run(&parse_config("benchmark = 1\np = 2\nh = 3\nsmoother = ilut\n").unwrap(), &RunOptions::default()).unwrap();
    write_outputs(&table, dir.path()).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "benchmark,p,h_exp,smoother,mode,value,status,setup_s,solve_s");
    assert!(lines.next().unwrap().starts_with("1,2,3,ilut,standalone,"));
    let res = std::fs::read_to_string(dir.path().join("residuals_b1_p2_h3_ilut_standalone.txt")).unwrap();
    let values: Vec<f64> = res.lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(values[0], 1.0);
    assert!(*values.last().unwrap() <= 1e-8);
    assert!(std::fs::read_to_string(dir.path().join("results.md")).unwrap().contains("| 2^-3 |"));
}

#[test]
fn divergence_is_a_dash() {
    let row = ResultRow {
        benchmark: 1,
        p: 4,
        h_exp: 6,
        variant: "gs".into(),
        mode: Mode::Standalone,
        value: Some(37.0),
        status: Status::Diverged,
        setup_seconds: 0.0,
        solve_seconds: 0.0,
        residuals: vec![1.0, 1e11],
        artifact: None,
    };
    assert_eq!(row.display_value(), "-");
    let table = ResultTable { rows: vec![row] };
    assert!(to_csv(&table, false).contains(",-,diverged,"));
    assert!(to_markdown(&table).contains("| 2^-6 | - |"));
}

#[test]
fn analysis_modes_write_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let spectrum = run(&parse_config("mode = spectrum\np = 2\nh = 3\nsmoother = gs, ilut\n").unwrap(), &RunOptions::default()).unwrap();
    let (gs, ilut) = (spectrum.rows[0].value.unwrap(), spectrum.rows[1].value.unwrap());
    assert!(ilut < gs && gs < 1.0);
    write_outputs(&spectrum, dir.path()).unwrap();
    let cloud = std::fs::read_to_string(dir.path().join("b1_p2_h3_gs_spectrum.csv")).unwrap();
    assert!(cloud.starts_with("re,im\n"));

    let cond = run(
        &parse_config("mode = condition\np = 2\nh = 3\ncoarse_operator = galerkin, rediscretize\n").unwrap(),
        &RunOptions::default(),
    )
    .unwrap();
    assert_eq!(cond.rows[0].variant, "galerkin");
    assert!(cond.rows[0].value.unwrap() > cond.rows[1].value.unwrap());

    let red = run(&parse_config("mode = reduction\np = 2\nh = 2\nsmoother = ilut\n").unwrap(), &RunOptions::default()).unwrap();
    assert!(red.rows[0].artifact.as_ref().unwrap().starts_with("mode,eigenvalue,r_smoother,r_cgc\n"));
}

#[test]
fn failures_stay_in_their_rows() {
    // p = 1 has no coarse operator to condition; the sweep still returns both rows.
    let table = run(&parse_config("mode = condition\np = 1, 2\nh = 3\n").unwrap(), &RunOptions::default()).unwrap();
    assert!(matches!(table.rows[0].status, Status::Failed(_)));
    assert_eq!(table.rows[1].status, Status::Ok);
}

#[test]
fn binary_runs_and_reports_config_errors() {
    let exe = env!("CARGO_BIN_EXE_iga-pmg");
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.cfg");
    std::fs::write(&cfg, "benchmark = 2\np = 2\nh = 3\n").unwrap();
    let out = dir.path().join("out");
    let status = Command::new(exe)
        .args(["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "3", "--threads", "1", "--dump-matrices"])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("results.csv").exists());
    assert!(out.join("matrices").join("A_b2_p2_h3.mtx").exists());

    let table = Command::new(exe).args(["table", cfg.to_str().unwrap()]).output().unwrap();
    assert!(table.status.success());
    assert!(String::from_utf8(table.stdout).unwrap().contains("### Benchmark 2, standalone"));

    std::fs::write(&cfg, "smoother = jacobi\n").unwrap();
    let bad = Command::new(exe).args(["table", cfg.to_str().unwrap()]).output().unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8(bad.stderr).unwrap().contains("smoother"));
}

#[test]
fn shipped_table_configs_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../tables");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "cfg") {
            parse_config(&std::fs::read_to_string(&path).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 10);
}
