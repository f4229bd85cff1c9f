use std::path::Path;
use std::process::{Command, Output};

fn gravtime(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gravtime"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Header and numeric rows of a CSV with `#` metadata lines.
fn parse(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn fig1_kernel_classes() {
    let o = gravtime(&["figures", "fig1", "--grid-points", "201"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("# command = figures fig1\n"));
    assert!(text.contains("# units = "));
    let (header, rows) = parse(&text);
    assert_eq!(header, ["u", "R_lorentzian", "R_freefall", "R_opto"]);
    assert_eq!(rows.len(), 201);
    assert_eq!(num(&rows[0][0]), -10.0);
    assert_eq!(num(&rows[200][0]), 10.0);
    let mid = &rows[100];
    assert_eq!(num(&mid[0]), 0.0);
    assert_eq!([num(&mid[1]), num(&mid[2]), num(&mid[3])], [1.0, 1.0, 0.9375]);
    for row in &rows {
        let u = num(&row[0]);
        assert!((num(&row[1]) - 1.0 / (1.0 + u * u)).abs() < 1e-15);
        assert!(num(&row[2]) >= 0.64 - 1e-12);
    }
}

#[test]
fn csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let o = gravtime(&["kc", "--T", "0.26", "--grid-points", "17", "--out", path.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(path).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let (_, rows) = parse(std::str::from_utf8(&a).unwrap());
    assert_eq!(rows.len(), 17);
}

#[test]
fn validation_errors_exit_one() {
    let o = gravtime(&["kc", "--k0", "-1"]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("InvalidParameter") && e.contains("k0"), "{e}");

    let o = gravtime(&["kc", "--contrast", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("contrast"));

    let o = gravtime(&["freefall", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "kzero = 3\n").unwrap();
    let o = gravtime(&["kc", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("kzero"));
}

#[test]
fn numerical_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ff.csv");
    let o = gravtime(&[
        "freefall",
        "--grid-points",
        "3",
        "--t",
        "1",
        "--oracle",
        "--tol",
        "1e-30",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("CheckFailed"));
    let (header, rows) = parse(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(rows.len(), 3);
    let res = header.iter().position(|h| h == "oracle_residual").unwrap();
    assert!(rows.iter().all(|r| num(&r[res]) < 1e-5));

    let ok = gravtime(&["freefall", "--grid-points", "3", "--t", "1", "--oracle"]);
    assert!(ok.status.success(), "{}", stderr(&ok));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "k0 = 2.0\nT = 1\ng = 1\nsigma-v = 1\nprior_dt = 0.5\n").unwrap();
    let o = gravtime(&["kc", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("# k0 = 2.0") && text.contains("# units = SI"));
    let (header, rows) = parse(&text);
    let col = |n: &str| header.iter().position(|h| h == n).unwrap();
    assert_eq!(num(&rows[0][col("f_gg_full")]), 4.0);
    assert_eq!(num(&rows[0][col("retention_full")]), 0.5);
    assert_eq!(num(&rows[0][col("f_eff_int_reg")]), 0.8);

    let o = gravtime(&["kc", "--config", cfg.to_str().unwrap(), "--k0", "1"]);
    let (_, rows) = parse(&stdout(&o));
    assert_eq!(num(&rows[0][col("f_gg_full")]), 1.0);
}

#[test]
fn records_format() {
    let o = gravtime(&["kernel", "dictionary", "--format", "records"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let lines: Vec<serde_json::Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0]["meta"]["command"], "kernel dictionary");
    let full = lines.iter().find(|v| v["platform"] == "KC full state").unwrap();
    assert_eq!(full["alpha0"], 0.0);
    assert_eq!(full["alpha1"], 1.0);
    assert!((full["retention"].as_f64().unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn dictionary_rows() {
    let o = gravtime(&["kernel", "dictionary", "--sigma", "1", "--t", "2", "--u", "0"]);
    let (header, rows) = parse(&stdout(&o));
    let col = |n: &str| header.iter().position(|h| h == n).unwrap();
    let ff = &rows[0];
    assert_eq!(ff[col("platform")], "free fall");
    assert!((num(&ff[col("g_star")]) - 0.5).abs() < 1e-15);
    // α1 = (2σ²t²)^{1/2}/√F_gg with F_gg = 16 at σ = 1, t = 2.
    assert!((num(&ff[col("alpha1")]) - 8f64.sqrt() / 4.0).abs() < 1e-15);
    for r in &rows[..3] {
        assert_eq!(num(&r[col("retention")]), 1.0);
    }
}

#[test]
fn experiments_golden_numbers() {
    let o = gravtime(&["experiments", "table"]);
    assert!(o.status.success());
    let (header, rows) = parse(&stdout(&o));
    let col = |n: &str| header.iter().position(|h| h == n).unwrap();
    let aqg = rows.iter().find(|r| r[0] == "AQG").unwrap();
    assert!((num(&aqg[col("retention_kc")]) / 5.5e-4 - 1.0).abs() < 0.02);
    assert!((num(&aqg[col("localization_half_pm")]) / 621.0 - 1.0).abs() < 0.02);
    let miga = rows.iter().find(|r| r[0] == "MIGA").unwrap();
    assert!(!miga[col("caveat")].is_empty());
}

#[test]
fn fig3_markers() {
    let o = gravtime(&["figures", "fig3", "--grid-points", "25"]);
    assert!(o.status.success());
    let (header, rows) = parse(&stdout(&o));
    let col = |n: &str| header.iter().position(|h| h == n).unwrap();
    let markers: Vec<f64> = rows
        .iter()
        .filter(|r| r[col("kind")] == "marker")
        .map(|r| num(&r[col("t_int_s")]))
        .collect();
    assert_eq!(markers, [0.06, 0.1, 0.16, 0.25, 0.25]);
    for r in rows.iter().filter(|r| r[col("kind")] == "curve") {
        let t = num(&r[col("t_int_s")]);
        let proxy = num(&r[col("retention_freefall_proxy")]);
        assert!(proxy > 0.95);
        if t > 0.1 {
            assert!(proxy > 0.999);
            if num(&r[col("t_src_K")]) >= 1e-6 {
                assert!(num(&r[col("retention_kc")]) < 1e-3);
            }
        }
    }
}

#[test]
fn fig2_revival_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig2.csv");
    let o = gravtime(&["figures", "fig2", "--u-points", "5", "--grid-points", "9", "--out", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(Path::new(&path)).unwrap();
    assert!(text.contains("# revival_times = 6.283185307179586 12.566370614359172"));
    let (header, rows) = parse(&text);
    assert_eq!(header, ["u", "t", "g", "rho2", "retention", "degradation"]);
    assert_eq!(rows.len(), 45);
    let at_revival: Vec<&Vec<String>> = rows
        .iter()
        .filter(|r| num(&r[1]) == 2.0 * std::f64::consts::PI)
        .collect();
    assert_eq!(at_revival.len(), 5);
    for r in at_revival {
        assert!(num(&r[3]) < 1e-12, "{r:?}");
    }
    for r in &rows {
        let rho2 = num(&r[3]);
        assert!((0.0..=1.0).contains(&rho2));
        assert!((num(&r[5]) - ((1.0 - rho2).powf(-0.5) - 1.0)).abs() < 1e-9);
    }
}

#[test]
fn verify_writes_records() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("verify.jsonl");
    let o = gravtime(&["verify", "--out", path.to_str().unwrap()]);
    let reports =
        gravtime_core::oracle::report::read_records(std::io::BufReader::new(std::fs::File::open(&path).unwrap()))
            .unwrap();
    assert!(!reports.is_empty());
    let failed = reports.iter().filter(|r| !r.passed).count();
    assert_eq!(o.status.code(), Some(if failed == 0 { 0 } else { 2 }));
    let e = stderr(&o);
    for c in gravtime_core::verify::CRITERIA {
        assert!(e.contains(c.name), "{e}");
    }
}
