use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const TABLE_TOLERANCE: f64 = 0.05;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_redcbc"));
    cmd.env_remove("REDCBC_JOBS");
    cmd
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    if !out.status.success() {
        eprintln!("stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    out
}

fn construct(dir: &Path, config: &Path, out: &str) -> Output {
    run(bin()
        .arg("construct")
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(dir.join(out)))
}

fn verify(vector: &Path, config: &Path) -> Output {
    run(bin().arg("verify").arg(vector).arg("--config").arg(config))
}

fn table_cell_config(m: u32, s: usize) -> String {
    format!(
        r#"{{"mode": "korobov", "base": 2, "alpha": 2, "m": {m}, "s": {s},
            "weights": "j^-3", "reduction": "floor(1.5*log2(j))", "algorithm": "fast",
            "lambdas": [1.0, 0.75]}}"#
    )
}

fn report(dir: &Path, out: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(out).join("report.json")).unwrap()).unwrap()
}

/// Rows of a table CSV as `(m, s, log10_error)`.
fn csv_errors(path: &Path) -> Vec<(u32, usize, String)> {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[3].parse().unwrap(), f[4].parse().unwrap(), f[6].to_string())
        })
        .collect()
}

#[test]
fn construct_reproduces_table_cells() {
    let dir = TempDir::new().unwrap();
    for (m, s, target) in [(10u32, 10usize, -1.89), (12, 50, -2.31)] {
        let cfg = write_config(dir.path(), &format!("c{m}.json"), &table_cell_config(m, s));
        let out = construct(dir.path(), &cfg, &format!("o{m}"));
        assert!(out.status.success());
        let r = report(dir.path(), &format!("o{m}"));
        let got = r["log10_error"].as_f64().unwrap();
        assert!((got - target).abs() <= TABLE_TOLERANCE, "m={m} s={s}: {got}");
        assert_eq!(r["hardware_dependent"], Value::Bool(true));
        assert_eq!(r["bounds"].as_array().unwrap().len(), 2);
        assert!(r["bounds"].as_array().unwrap().iter().all(|b| b["holds"] == true));
        assert!(r["cost_model"]["predicted"].as_u64().unwrap() > 0);
        assert!(r["counters"]["candidate_evaluations"].as_u64().unwrap() > 0);
    }
}

#[test]
fn single_dimension_vector_file() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", &table_cell_config(8, 1));
    assert!(construct(dir.path(), &cfg, "o").status.success());
    let text = fs::read_to_string(dir.path().join("o/vector.txt")).unwrap();
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body, vec!["1 0 1 1"]);
    assert!(text.starts_with("# korobov 2 8 2\n# weights rule j^-3\n# squared_error "));
    assert!(!text.contains('\r'));
}

#[test]
fn round_trip_and_tampering() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", &table_cell_config(10, 12));
    assert!(construct(dir.path(), &cfg, "o").status.success());
    let vector = dir.path().join("o/vector.txt");
    assert_eq!(verify(&vector, &cfg).status.code(), Some(0));

    let text = fs::read_to_string(&vector).unwrap();

    // coordinate 2 has w = 1, so its candidates are the odd numbers below 2^9
    let lines: Vec<String> = text
        .lines()
        .map(|l| {
            if l.starts_with("2 ") {
                let f: Vec<&str> = l.split(' ').collect();
                format!("{} {} {} {}", f[0], f[1], 600, f[3])
            } else {
                l.to_string()
            }
        })
        .collect();
    let bad_z = dir.path().join("bad_z.txt");
    fs::write(&bad_z, lines.join("\n") + "\n").unwrap();
    let out = verify(&bad_z, &cfg);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("z_2"));

    let e2_line = text.lines().find(|l| l.starts_with("# squared_error ")).unwrap();
    let e2: f64 = e2_line["# squared_error ".len()..].parse().unwrap();
    let perturbed = text.replace(e2_line, &format!("# squared_error {:e}", e2 * (1.0 + 1e-6)));
    let bad_e = dir.path().join("bad_e.txt");
    fs::write(&bad_e, perturbed).unwrap();
    let out = verify(&bad_e, &cfg);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("squared_error"));

    let bad_schema = dir.path().join("bad_schema.txt");
    fs::write(&bad_schema, text.replace("# korobov", "# lattice")).unwrap();
    assert_eq!(verify(&bad_schema, &cfg).status.code(), Some(2));
}

#[test]
fn constructions_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", &table_cell_config(9, 20));
    assert!(construct(dir.path(), &cfg, "a").status.success());
    assert!(construct(dir.path(), &cfg, "b").status.success());
    let a = fs::read(dir.path().join("a/vector.txt")).unwrap();
    let b = fs::read(dir.path().join("b/vector.txt")).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        report(dir.path(), "a")["squared_error"],
        report(dir.path(), "b")["squared_error"]
    );
}

#[test]
fn table_grid_matches_published_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "grid.json",
        r#"{"mode": "korobov", "base": 2, "alpha": 2, "m_list": [12, 10], "s_list": [50, 10, 20],
            "weights": "j^-3", "reduction": "floor(1.5*log2(j))"}"#,
    );
    let out = run(bin()
        .args(["table", "--jobs", "3", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path()));
    assert!(out.status.success());
    let path = dir.path().join("table.csv");
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with(
        "mode,b,alpha,m,s,algorithm,log10_error,seconds,candidate_evals,predicted_cost\n"
    ));
    let rows = csv_errors(&path);
    let expected = [
        (10, 10, -1.89),
        (10, 20, -1.85),
        (10, 50, -1.79),
        (12, 10, -2.39),
        (12, 20, -2.35),
        (12, 50, -2.31),
    ];
    assert_eq!(rows.len(), expected.len());
    for ((m, s, e), (em, es, target)) in rows.iter().zip(expected) {
        assert_eq!((*m, *s), (em, es));
        let got: f64 = e.parse().unwrap();
        assert!((got - target).abs() <= TABLE_TOLERANCE, "m={m} s={s}: {got}");
    }
}

#[test]
fn table_without_reduction_and_empty_grid() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "zero.json",
        r#"{"mode": "korobov", "base": 2, "alpha": 2, "m": 10, "s": 10,
            "weights": "j^-3", "reduction": [0,0,0,0,0,0,0,0,0,0], "table_file": "zero.csv"}"#,
    );
    let out = run(bin()
        .args(["table", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .env("REDCBC_JOBS", "2"));
    assert!(out.status.success());
    let rows = csv_errors(&dir.path().join("zero.csv"));
    let got: f64 = rows[0].2.parse().unwrap();
    assert!((got + 1.90).abs() <= TABLE_TOLERANCE, "{got}");

    let cfg = write_config(
        dir.path(),
        "empty.json",
        r#"{"mode": "korobov", "base": 2, "alpha": 2, "m_list": [], "s_list": [5],
            "weights": "j^-3", "table_file": "empty.csv"}"#,
    );
    let out = run(bin().args(["table", "--config"]).arg(&cfg).arg("--out").arg(dir.path()));
    assert!(out.status.success());
    assert_eq!(
        fs::read_to_string(dir.path().join("empty.csv")).unwrap(),
        "mode,b,alpha,m,s,algorithm,log10_error,seconds,candidate_evals,predicted_cost\n"
    );
}

#[test]
fn fast_and_naive_tables_agree() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "small.json",
        r#"{"mode": "korobov", "base": 3, "alpha": 2, "m_list": [2, 4, 6], "s_list": [1, 3, 6],
            "weights": "0.7*j^-2", "reduction": "floor(log3(j))"}"#,
    );
    let mut tables = Vec::new();
    for algo in ["fast", "naive"] {
        let out_dir = dir.path().join(algo);
        let out = run(bin()
            .args(["table", "--algorithm", algo, "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out_dir));
        assert!(out.status.success());
        tables.push(csv_errors(&out_dir.join("table.csv")));
    }
    assert_eq!(tables[0].len(), 9);
    assert_eq!(tables[0], tables[1]);
}

#[test]
fn polynomial_round_trip() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "poly.json",
        r#"{"mode": "polynomial", "base": 2, "alpha": 2, "m": 8, "s": 12,
            "weights": [1.0, 0.5, 0.25, 0.2, 0.1, 0.1, 0.05, 0.05, 0.05, 0.01, 0.01, 0.01],
            "reduction": "floor(log2(j))", "lambdas": [1.0, 0.8]}"#,
    );
    assert!(construct(dir.path(), &cfg, "o").status.success());
    let text = fs::read_to_string(dir.path().join("o/vector.txt")).unwrap();
    assert!(text.starts_with("# polynomial 2 8 2\n"));
    assert_eq!(verify(&dir.path().join("o/vector.txt"), &cfg).status.code(), Some(0));

    // alpha is part of the header and must agree with the configuration
    let other = write_config(
        dir.path(),
        "poly3.json",
        &fs::read_to_string(&cfg).unwrap().replace("\"alpha\": 2", "\"alpha\": 3"),
    );
    assert_eq!(verify(&dir.path().join("o/vector.txt"), &other).status.code(), Some(1));
}

#[test]
fn general_weights_use_the_naive_engine() {
    let dir = TempDir::new().unwrap();
    let subsets = write_config(
        dir.path(),
        "subsets.json",
        r#"[{"subset": [1], "gamma": 1.0}, {"subset": [2], "gamma": 0.5},
            {"subset": [1, 2], "gamma": 0.3}, {"subset": [3], "gamma": 0.2},
            {"subset": [2, 3], "gamma": 0.1}]"#,
    );
    assert!(subsets.exists());
    let cfg = write_config(
        dir.path(),
        "general.json",
        r#"{"mode": "korobov", "base": 5, "alpha": 2, "m": 3, "s": 3,
            "weights": {"general_file": "subsets.json"}, "algorithm": "naive"}"#,
    );
    assert!(construct(dir.path(), &cfg, "o").status.success());
    assert_eq!(verify(&dir.path().join("o/vector.txt"), &cfg).status.code(), Some(0));

    let out = run(bin()
        .args(["construct", "--algorithm", "fast", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("f")));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_codes_for_bad_input() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (r#"{"mode": "korobov", "base": 2, "alpha": 2, "m": 6, "s": 4, "weights": "j^^3"}"#, 2),
        (r#"{"mode": "korobov", "base": 4, "alpha": 2, "m": 6, "s": 4, "weights": "j^-3"}"#, 2),
        (r#"{"mode": "korobov", "base": 2, "alpha": 3, "m": 6, "s": 4, "weights": "j^-3"}"#, 2),
        (r#"{"mode": "korobov", "base": 2, "alpha": 2, "m_list": [6, 7], "s": 4, "weights": "j^-3"}"#, 2),
        (r#"{"mode": "korobov", "base": 2, "alpha": 2, "m": 6, "s": 4, "weights": "j^-3", "lambdas": [0.2]}"#, 2),
        (r#"{"mode": "korobov", "base": 2, "alpha": 2, "m": 6, "s": 4, "weights": "j^-3", "colour": 1}"#, 2),
        (
            r#"{"mode": "korobov", "base": 2, "alpha": 2, "m": 6, "s": 4,
                "weights": {"general": [{"subset": [30], "gamma": 0.5}]}}"#,
            3,
        ),
    ];
    for (i, (json, code)) in cases.iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("bad{i}.json"), json);
        let out = construct(dir.path(), &cfg, &format!("o{i}"));
        assert_eq!(out.status.code(), Some(*code), "case {i}: {json}");
    }
    let missing = dir.path().join("missing.json");
    assert_eq!(construct(dir.path(), &missing, "x").status.code(), Some(2));
}
