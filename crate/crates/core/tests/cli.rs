use std::process::Command;

use sfwg::cli::CSV_HEADER;

fn sfwg(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_sfwg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &std::process::Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &std::process::Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn csv_output_parses_with_exact_header() {
    let o = sfwg(&["--mesh", "structured:2", "--levels", "3", "--format", "csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    assert_eq!(CSV_HEADER, "level,h,ndofs,err_tb,rate_tb,err_h1,rate_h1,err_l2,rate_l2,t_asm,t_solve");

    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(&rows[0][4], "");
    let mut last_h = f64::INFINITY;
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0].parse::<usize>().unwrap(), i + 1);
        let h: f64 = r[1].parse().unwrap();
        assert!(h < last_h);
        last_h = h;
        for c in [3, 5, 7, 9, 10] {
            assert!(r[c].parse::<f64>().unwrap() >= 0.0);
        }
        if i > 0 {
            let rate: f64 = r[4].parse().unwrap();
            assert!(rate > 0.5);
        }
    }
}

#[test]
fn markdown_has_one_row_per_level() {
    let o = sfwg(&["--method", "c0wg", "--mesh", "structured:2", "--levels", "2"]);
    assert!(o.status.success());
    let table: Vec<String> = stdout(&o).lines().filter(|l| l.starts_with('|')).map(String::from).collect();
    assert_eq!(table.len(), 2 + 2);
    assert!(table[0].contains(r"\|\|\|Q_h u−u_h\|\|\|"));
    // escaped pipes must not open extra columns
    for line in &table {
        let cells = line.replace(r"\|", "").matches('|').count() - 1;
        assert_eq!(cells, 11, "{line}");
    }
}

#[test]
fn output_file_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cols = |path: &std::path::Path| -> Vec<Vec<String>> {
        let text = std::fs::read_to_string(path).unwrap();
        text.lines()
            .skip(1)
            .map(|l| l.split(',').take(9).map(String::from).collect())
            .collect()
    };
    let mut runs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let p = dir.path().join(name);
        let o = sfwg(&[
            "--method", "c0ip", "--k", "1", "--mesh", "structured:2", "--levels", "2", "--format", "csv", "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        assert!(stdout(&o).is_empty());
        runs.push(cols(&p));
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn comparison_labels_timings() {
    let o = sfwg(&["--method", "sfc0wg,c0wg", "--mesh", "structured:2", "--levels", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("SF-C0WG") && text.contains("C0WG ‖u−u₀‖"));
    assert!(text.contains("environment-dependent"));
}

#[test]
fn cg_solver_matches_direct() {
    let run = |solver: &str| {
        let o = sfwg(&["--mesh", "structured:2", "--levels", "2", "--format", "csv", "--solver", solver, "--tol", "1e-13"]);
        assert!(o.status.success(), "{}", stderr(&o));
        let text = stdout(&o);
        let last = text.lines().last().unwrap().to_string();
        last.split(',').nth(7).unwrap().parse::<f64>().unwrap()
    };
    let (d, c) = (run("direct"), run("cg"));
    assert!((d - c).abs() < 1e-8 * d, "{d} vs {c}");
}

#[test]
fn mesh_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("square.txt");
    std::fs::write(&p, "4 2\n0 0\n1 0\n0 1\n1 1\n0 1 3\n0 3 2\n").unwrap();
    let o = sfwg(&["--mesh", p.to_str().unwrap(), "--levels", "2", "--format", "csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 3);
}

#[test]
fn errors_are_categorized() {
    let o = sfwg(&["--k", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[capability]"));

    let o = sfwg(&["--method", "sfc0wg", "--eta", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[config]"));

    let o = sfwg(&["--method", "c0ip", "--eta", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[config]"), "{}", stderr(&o));

    let o = sfwg(&["--mesh", "/nonexistent/mesh.txt"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("error[io]"));

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.txt");
    std::fs::write(&p, "3 1\n0 0\n1 0\n0 1\n0 1 7\n").unwrap();
    let o = sfwg(&["--mesh", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("error[parse]"), "{}", stderr(&o));

    // unknown flag values are rejected by the argument parser itself
    let o = sfwg(&["--format", "json"]);
    assert!(!o.status.success());
}
