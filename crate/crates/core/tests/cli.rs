use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use spade_core::inference::crlb;

fn spade(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spade")).args(args).output().unwrap()
}

fn read_table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

fn meta(path: &Path, key: &str) -> Option<String> {
    std::fs::read_to_string(path).unwrap().lines().find_map(|l| {
        let (k, v) = l.strip_prefix('#')?.split_once('=')?;
        (k.trim() == key).then(|| v.trim().to_string())
    })
}

fn dir_arg(dir: &Path) -> String {
    dir.display().to_string()
}

#[test]
fn crlb_curves_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = spade(&["crlb-curves", "--out-dir", &dir_arg(tmp.path()), "--k-values", "11.6,1,4"]);
    assert!(out.status.success());
    let path = tmp.path().join("crlb_curves.csv");
    let (h, rows) = read_table(&path);
    let (k, c) = (column(&h, "K"), column(&h, "crlb_per_photon"));
    let ks: Vec<f64> = rows.iter().map(|r| r[k].parse().unwrap()).collect();
    assert_eq!(ks, vec![1.0, 4.0, 11.6]);
    let cs: Vec<f64> = rows.iter().map(|r| r[c].parse().unwrap()).collect();
    assert_eq!(cs[0], 2.0);
    assert!(cs.windows(2).all(|w| w[1] < w[0]));
    assert!((cs[2] - crlb(11.6, 1.0)).abs() < 1e-12);
    let fi: f64 = rows[2][column(&h, "fi_total")].parse().unwrap();
    assert!((fi - 11.6f64.sqrt() / 2.0).abs() < 1e-12);
    assert_eq!(meta(&path, "gamma").as_deref(), Some("0.15"));
}

#[test]
fn matrices_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = spade(&["matrices", "--out-dir", &dir_arg(tmp.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, index) = read_table(&tmp.path().join("matrices.csv"));
    assert_eq!(index.len(), 5);
    let d_max: f64 = index.last().unwrap()[column(&h, "d")].parse().unwrap();
    assert!((d_max - 0.93).abs() < 1e-12);
    let masses: Vec<f64> = index.iter().map(|r| r[column(&h, "off_diagonal_mass")].parse().unwrap()).collect();
    assert_eq!(masses[0], 0.0);
    assert!(masses.windows(2).all(|w| w[1] > w[0]));
    for row in &index {
        let (mh, entries) = read_table(&tmp.path().join(&row[column(&h, "file")]));
        assert_eq!(entries.len(), 49);
        let p = column(&mh, "probability");
        let total: f64 = entries.iter().map(|e| e[p].parse::<f64>().unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
    let (mh, first) = read_table(&tmp.path().join("matrix_000.csv"));
    for e in first {
        if e[column(&mh, "k_idler")] != e[column(&mh, "k_signal")] {
            assert_eq!(e[column(&mh, "probability")], "0");
        }
    }
}

fn simulate(dir: &Path, extra: &[&str]) -> Vec<PathBuf> {
    let mut args = vec!["simulate", "--out-dir"];
    let d = dir_arg(dir);
    args.push(&d);
    args.extend_from_slice(extra);
    let out = spade(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with("counts_"))
        .collect();
    files.sort();
    files
}

fn estimates(dir: &Path, files: &[PathBuf], calibrate: bool) -> Vec<(f64, f64)> {
    let out_dir = dir.join("est");
    let mut args: Vec<String> = vec!["estimate".into(), "--out-dir".into(), dir_arg(&out_dir)];
    if calibrate {
        args.push("--calibrate".into());
    }
    args.extend(files.iter().map(|f| dir_arg(f)));
    let out = Command::new(env!("CARGO_BIN_EXE_spade")).args(&args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = read_table(&out_dir.join("estimates.csv"));
    rows.iter()
        .map(|r| {
            assert_eq!(r[column(&h, "status")], "ok");
            (r[column(&h, "label_d")].parse().unwrap(), r[column(&h, "d_hat")].parse().unwrap())
        })
        .collect()
}

#[test]
fn estimate_round_trip_on_ideal_data() {
    let tmp = tempfile::tempdir().unwrap();
    let files = simulate(tmp.path(), &["--seed", "3"]);
    assert_eq!(files.len(), 30);
    let pairs = estimates(tmp.path(), &files, false);
    let mean_abs = pairs.iter().map(|(t, e)| (t - e).abs()).sum::<f64>() / pairs.len() as f64;
    assert!(mean_abs < 0.01, "{mean_abs}");
}

#[test]
fn estimate_with_and_without_calibration() {
    let tmp = tempfile::tempdir().unwrap();
    let files = simulate(tmp.path(), &["--alpha", "0.8", "--beta", "0.01", "--seed", "4"]);
    let raw = estimates(tmp.path(), &files, false);
    let raw_err = raw.iter().map(|(t, e)| (t - e).abs()).sum::<f64>() / raw.len() as f64;
    let fixed = estimates(tmp.path(), &files, true);
    let fixed_err = fixed.iter().map(|(t, e)| (t - e).abs()).sum::<f64>() / fixed.len() as f64;
    assert!(raw_err > 0.1, "{raw_err}");
    assert!(fixed_err < 0.03, "{fixed_err}");
    assert!(tmp.path().join("est").join("calibration.csv").exists());
}

#[test]
fn estimate_rejects_bad_files() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty_counts.csv");
    std::fs::write(&empty, "# separation = 0.1\n").unwrap();
    let out = spade(&["estimate", "--out-dir", &dir_arg(tmp.path()), &dir_arg(&empty)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty_counts.csv"));

    let unlabeled = tmp.path().join("unlabeled.csv");
    std::fs::write(&unlabeled, "0,0,0,0,10\n0,0,1,0,2\n").unwrap();
    let out = spade(&["estimate", "--calibrate", "--out-dir", &dir_arg(tmp.path()), &dir_arg(&unlabeled)]);
    assert_eq!(out.status.code(), Some(2));
    let out = spade(&["estimate", "--out-dir", &dir_arg(tmp.path()), &dir_arg(&unlabeled)]);
    assert!(out.status.success());
}

#[test]
fn compare_header_and_ordering() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["compare", "--out-dir", &dir_arg(tmp.path()), "--sep-start", "0.05", "--sep-stop", "0.05", "--trials", "40"];
    let out = spade(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let path = tmp.path().join("compare.csv");
    assert_eq!(meta(&path, "photons").as_deref(), Some("37000"));
    assert_eq!(meta(&path, "projections").as_deref(), Some("49"));
    assert_eq!(meta(&path, "pixels").as_deref(), Some("50"));
    assert_eq!(meta(&path, "gamma").as_deref(), Some("0.15"));
    assert!(meta(&path, "spade_version").is_some());
    let (h, rows) = read_table(&path);
    let se = |m: &str| -> f64 {
        let r = rows.iter().find(|r| r[column(&h, "method")] == m).unwrap();
        r[column(&h, "std_err_delta")].parse().unwrap()
    };
    assert!(se("spade") < se("direct_gaussian"));
    assert!(se("spade") < se("direct_spdc"));

    let first = std::fs::read(&path).unwrap();
    assert!(spade(&args).status.success());
    assert_eq!(std::fs::read(&path).unwrap(), first);
}

#[test]
fn config_file_and_flag_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, "gamma = 0.5\nsep_stop = 0.2325\n").unwrap();
    let out = spade(&["matrices", "--config", &dir_arg(&cfg), "--out-dir", &dir_arg(tmp.path()), "--gamma", "0.3"]);
    assert!(out.status.success());
    let path = tmp.path().join("matrices.csv");
    assert_eq!(meta(&path, "gamma").as_deref(), Some("0.3"));
    assert_eq!(read_table(&path).1.len(), 2);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(spade(&["compare", "--gamma", "0.2", "--pump-waist-um", "40"]).status.code(), Some(1));
    assert_eq!(spade(&["matrices", "--sep-step", "0"]).status.code(), Some(1));
    assert_eq!(spade(&["matrices", "--config", "/nonexistent/run.cfg"]).status.code(), Some(1));
    assert_eq!(spade(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(spade(&["--help"]).status.code(), Some(0));
}

#[test]
fn physical_source_parameters() {
    let tmp = tempfile::tempdir().unwrap();
    let out = spade(&[
        "crlb-curves",
        "--out-dir",
        &dir_arg(tmp.path()),
        "--pump-waist-um",
        "40",
        "--crystal-length-mm",
        "0.5",
        "--pump-wavelength-nm",
        "405",
    ]);
    assert!(out.status.success());
    let g: f64 = meta(&tmp.path().join("crlb_curves.csv"), "gamma").unwrap().parse().unwrap();
    assert!((g - 0.142).abs() < 1e-3);
}
