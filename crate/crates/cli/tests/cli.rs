use std::path::PathBuf;
use std::process::{Command, Output};

fn symvol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symvol"))
        .args(args)
        .current_dir(workspace_root())
        .output()
        .expect("binary runs")
}

fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(stdout(o).trim()).unwrap()
}

#[test]
fn exact_values() {
    let v = json(&symvol(&["exact", "--body", "ellipsoid", "--N", "3"]));
    assert_eq!(v["value_rational"], "27/512");
    assert_eq!(v["N"], 3);
    let v = json(&symvol(&["exact", "--body", "parallelogram", "--N", "2"]));
    assert_eq!(v["value_rational"], "5/27");
    let v = json(&symvol(&["exact", "--body", "ellipse", "--N", "2"]));
    assert!(v["value_rational"].is_null());
    let x = v["value_decimal"].as_f64().unwrap();
    assert!(x.to_string().starts_with("0.1801"), "{x}");
}

#[test]
fn unsupported_exact_request_is_a_usage_error() {
    let o = symvol(&["exact", "--body", "ellipsoid", "--N", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = symvol(&["exact", "--body", "cube", "--N", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mc_is_byte_identical_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let path = dir.path().join(name);
        let p = path.to_str().unwrap();
        let args = [
            "mc", "--body", "bodies/disc.json", "--symmetric", "--N", "2", "--p", "1", "--samples", "1000000",
            "--seed", "7", "--workers", workers, "--out", p,
        ];
        assert!(symvol(&args).status.success());
        std::fs::read(path).unwrap()
    };
    let a = run("a.json", "1");
    let b = run("b.json", "1");
    let c = run("c.json", "3");
    assert_eq!(a, b);
    assert_eq!(a, c);
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["samples"], 1_000_000);
    let mean = v["mean"].as_f64().unwrap();
    let se = v["std_error"].as_f64().unwrap();
    // The N = 2 ellipse value, computed independently by the exact command.
    let exact = json(&symvol(&["exact", "--body", "ellipse", "--N", "2"]))["value_decimal"].as_f64().unwrap();
    assert!((mean - exact).abs() < 4.0 * se, "{mean} vs {exact} ± {se}");
}

#[test]
fn timing_is_opt_in() {
    let args = ["mc", "--kind", "square", "--N", "2", "--samples", "1000"];
    assert!(json(&symvol(&args)).get("elapsed_seconds").is_none());
    let mut with = args.to_vec();
    with.push("--timing");
    assert!(json(&symvol(&with))["elapsed_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn density_table_integrates_to_one() {
    for which in ["vp2", "ve2"] {
        let text = stdout(&symvol(&["density", "--which", which, "--points", "200"]));
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,density"));
        let rows: Vec<(f64, f64)> = lines
            .map(|l| {
                let (t, f) = l.split_once(',').unwrap();
                (t.parse().unwrap(), f.parse().unwrap())
            })
            .collect();
        assert_eq!(rows.len(), 200);
        assert!(rows.iter().all(|r| r.1 >= 0.0));
        let trapezoid: f64 = rows.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum();
        assert!((trapezoid - 1.0).abs() < 5e-3, "{which}: {trapezoid}");
    }
}

#[test]
fn vertex_scan_areas_are_convex() {
    let text = stdout(&symvol(&["scan", "--movement", "vertex", "--body", "bodies/hexagon.json", "--grid", "21"]));
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "area").unwrap();
    let areas: Vec<f64> = lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect();
    assert_eq!(areas.len(), 21);
    let scale = areas.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    for w in areas.windows(3) {
        assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-9 * scale);
    }
}

#[test]
fn scans_of_other_movements() {
    for movement in ["steiner", "linear"] {
        let text = stdout(&symvol(&[
            "scan", "--movement", movement, "--kind", "octagon", "--direction", "1,-2", "--grid", "7",
        ]));
        assert_eq!(text.lines().count(), 8);
    }
    let text = stdout(&symvol(&[
        "scan", "--movement", "vertex", "--kind", "hexagon", "--functional", "moment", "--N", "2", "--samples",
        "2000", "--grid", "5",
    ]));
    assert!(text.starts_with("t,moment,std_error,second_difference\n"));
}

#[test]
fn quad_and_compare() {
    let v = json(&symvol(&["quad", "--kind", "square", "--N", "3"]));
    let exact = json(&symvol(&["exact", "--body", "parallelogram", "--N", "3"]));
    let (q, e) = (v["value_decimal"].as_f64().unwrap(), exact["value_decimal"].as_f64().unwrap());
    assert!((q - e).abs() < 1e-8, "{q} vs {e}");

    let v = json(&symvol(&["compare", "--kind", "square,disc", "--N", "2", "--samples", "20000"]));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0]["mean"].as_f64() <= rows[1]["mean"].as_f64());
}

#[test]
fn squeeze_ends_at_a_parallelogram() {
    let v = json(&symvol(&["squeeze", "--kind", "octagon", "--N", "2", "--samples", "5000"]));
    assert_eq!(v["result_half_vertices"].as_array().unwrap().len(), 2);
    assert_eq!(v["steps"].as_array().unwrap().len(), 2);
}

#[test]
fn errors_and_exit_codes() {
    let o = symvol(&["mc", "--kind", "square", "--N", "2", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    let o = symvol(&["mc", "--kind", "heptagon", "--N", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = symvol(&["mc", "--kind", "square", "--N", "1", "--samples", "10"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    let o = symvol(&["mc", "--body", "bodies/missing.json", "--N", "2"]);
    assert_eq!(o.status.code(), Some(1));
    let o = symvol(&["quad", "--kind", "cube", "--N", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_lists_flags() {
    let text = stdout(&symvol(&["mc", "--help"]));
    for flag in ["--body", "--kind", "--N", "--p", "--symmetric", "--nonsymmetric", "--samples", "--seed", "--workers", "--out"] {
        assert!(text.contains(flag), "{flag} missing from help");
    }
    let text = stdout(&symvol(&["scan", "--help"]));
    for flag in ["--grid", "--movement", "--functional"] {
        assert!(text.contains(flag));
    }
    let text = stdout(&symvol(&["quad", "--help"]));
    assert!(text.contains("--tol"));
}

#[test]
fn shipped_body_files_load() {
    for entry in std::fs::read_dir(workspace_root().join("bodies")).unwrap() {
        let path = entry.unwrap().path();
        let o = symvol(&["mc", "--body", path.to_str().unwrap(), "--N", "3", "--samples", "100"]);
        assert!(o.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&o.stderr));
    }
}
