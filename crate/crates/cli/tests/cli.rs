use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::{Command, Output};

use dw_core::output::read_table;

fn dwfree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dwfree"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn column(t: &dw_core::output::Table, name: &str) -> Vec<f64> {
    let k = t.headers.iter().position(|h| h == name).unwrap();
    t.rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

fn comment<'a>(t: &'a dw_core::output::Table, key: &str) -> &'a str {
    &t.comments.iter().find(|(k, _)| k == key).unwrap().1
}

#[test]
fn squaring_map_has_interior_point_zero() {
    let out = dwfree(&["dw", "--map", "poly:0,0,1"]);
    assert_eq!(out.status.code(), Some(0));
    let t = read_table(&out.stdout[..]).unwrap();
    assert_eq!(t.rows[0][0], "interior-attracting");
    assert_eq!(column(&t, "re"), vec![0.0]);
    assert_eq!(column(&t, "im"), vec![0.0]);
    // defaults are echoed
    assert_eq!(comment(&t, "tol"), "1e-12");
    assert_eq!(comment(&t, "max_iter"), "1000000");
}

#[test]
fn bernoulli_sum_gives_arcsine() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("arcsine.csv");
    let b = data("bernoulli.spec");
    let out = dwfree(&[
        "freeconv-add",
        "--mu1",
        &b,
        "--mu2",
        &b,
        "--grid",
        "-1.9:1.9:0.01",
        "-o",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let t = read_table(std::fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(t.headers, vec!["x", "density", "defect"]);
    assert_eq!(comment(&t, "eps"), "1e-2,3e-3,1e-3,3e-4,1e-4");
    let xs = column(&t, "x");
    let ds = column(&t, "density");
    assert_eq!(xs.len(), 381);
    for (x, d) in xs.iter().zip(&ds) {
        assert!(
            (d - 1.0 / (PI * (4.0 - x * x).sqrt())).abs() < 1e-4,
            "x = {x}"
        );
    }
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(csv.with_extension("json")).unwrap())
            .unwrap();
    assert_eq!(side["atoms"].as_array().unwrap().len(), 0);
    assert_eq!(side["diagnostics"]["method"], "subordination");
}

#[test]
fn theorem1_distances_shrink() {
    let out = dwfree(&[
        "theorem1",
        "--family",
        "scaled-halfdisk",
        "--n",
        "1,10,100,1000",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let t = read_table(&out.stdout[..]).unwrap();
    let d = column(&t, "distance");
    let n = column(&t, "n");
    assert!(d.windows(2).all(|w| w[1] < w[0]));
    for (n, r) in n.iter().zip(column(&t, "re")) {
        assert!((r - (n - 1.0) / (n + 1.0)).abs() < 1e-9);
    }
    assert!(d[3] < 3e-3);
}

#[test]
fn subordinate_disk_matches_closed_form() {
    let out = dwfree(&[
        "subordinate",
        "--setting",
        "disk-one-phi",
        "--map1",
        "affine:0.5,0.5",
        "--points",
        "0,0.5i,-0.3+0.2i,1,-1,i",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let t = read_table(&out.stdout[..]).unwrap();
    let (zr, zi) = (column(&t, "z_re"), column(&t, "z_im"));
    let (wr, wi) = (column(&t, "omega1_re"), column(&t, "omega1_im"));
    for k in 0..zr.len() {
        let z = dw_core::Complex64::new(zr[k], zi[k]);
        let w = z / (2.0 - z);
        assert!(
            (w.re - wr[k]).abs() < 1e-8 && (w.im - wi[k]).abs() < 1e-8,
            "z = {z}"
        );
    }
}

#[test]
fn circle_product_with_haar_is_haar() {
    let out = dwfree(&[
        "freeconv-mult-circle",
        "--mu1",
        &data("wrapped-cauchy.spec"),
        "--mu2",
        &data("haar.spec"),
        "--grid",
        "-3:3:0.5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let t = read_table(&out.stdout[..]).unwrap();
    assert_eq!(comment(&t, "method"), "haar");
    assert!(column(&t, "density").iter().all(|&d| d == 1.0 / (2.0 * PI)));
}

#[test]
fn positive_product_runs_and_is_deterministic() {
    let args = [
        "freeconv-mult-pos",
        "--mu1",
        &data("positive-two-point.spec"),
        "--mu2",
        &data("marchenko-pastur.spec"),
        "--grid",
        "0.5:3:0.5",
    ];
    let a = dwfree(&args);
    let b = dwfree(&args);
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    assert_eq!(a.stdout, b.stdout);
    let t = read_table(&a.stdout[..]).unwrap();
    assert!(column(&t, "density")
        .iter()
        .all(|d| d.is_finite() && *d >= 0.0));
}

#[test]
fn every_subcommand_has_help() {
    for sub in [
        "dw",
        "subordinate",
        "freeconv-add",
        "freeconv-mult-circle",
        "freeconv-mult-pos",
        "theorem1",
    ] {
        let out = dwfree(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{sub}");
        assert!(String::from_utf8_lossy(&out.stdout).contains("Usage"));
    }
}

#[test]
fn exit_codes() {
    // unknown flag
    assert_eq!(
        dwfree(&["dw", "--map", "poly:0,0,1", "--bogus"])
            .status
            .code(),
        Some(2)
    );
    // invalid map
    assert_eq!(
        dwfree(&["dw", "--map", "affine:2,0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        dwfree(&["theorem1", "--family", "nope"]).status.code(),
        Some(2)
    );
    // unreadable input and unwritable output
    let missing = dwfree(&[
        "freeconv-add",
        "--mu1",
        "/nonexistent.spec",
        "--mu2",
        "/nonexistent.spec",
    ]);
    assert_eq!(missing.status.code(), Some(4));
    let out = dwfree(&[
        "dw",
        "--map",
        "poly:0,0,1",
        "-o",
        "/nonexistent/dir/out.csv",
    ]);
    assert_eq!(out.status.code(), Some(4));
    // budget too small: partial output and status 3
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("dw.csv");
    let out = dwfree(&[
        "dw",
        "--map",
        "poly:0.3,0,0.2",
        "--max-iter",
        "1",
        "-o",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let t = read_table(std::fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(t.rows[0][0], "failed");
    assert!(t.comments.iter().any(|(k, _)| k == "error"));
}
