use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use circlaw_cli::main_with_args;
use circlaw_cli::svg::{
    radial_cdf_csv, render_radial_cdf, render_scatter, render_sv_profile, scatter_csv, sv_profile_csv, BoundCurve,
    Overlay,
};
use circlaw_core::hermitization::{esd, ReferenceLaw};
use circlaw_core::Complex64;

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Compares `actual` with a golden file; `CIRCLAW_BLESS=1` rewrites it.
fn check_golden(name: &str, actual: &str) {
    let path = golden_dir().join(name);
    if std::env::var_os("CIRCLAW_BLESS").is_some() {
        fs::write(&path, actual).unwrap();
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(expected == actual, "{name} differs from its golden file");
}

fn ring() -> Vec<Complex64> {
    (0..8)
        .map(|k| Complex64::from_polar(0.9, k as f64 * std::f64::consts::FRAC_PI_4) + Complex64::new(0.2, 0.1))
        .collect()
}

#[test]
fn scatter_golden() {
    let mu = esd(&ring());
    check_golden("scatter.svg", &render_scatter(&mu, &Overlay::unit_circle()));
    check_golden("scatter.csv", &scatter_csv(&mu));
}

#[test]
fn sv_profile_golden() {
    let svals = [3.0, 2.0, 1.0, 0.5, 0.1, 1e-3, 0.0];
    let bounds = vec![
        BoundCurve {
            name: "smin".into(),
            points: vec![(7, 1e-6)],
        },
        BoundCurve {
            name: "cook-anti".into(),
            points: (1..=3).map(|k| (k, 0.1 * (7 - k) as f64 / 7.0)).collect(),
        },
        BoundCurve {
            name: "inter-sv".into(),
            points: vec![(5, 0.05), (6, 0.02)],
        },
    ];
    check_golden("sv_profile.svg", &render_sv_profile(&svals, &bounds));
    check_golden("sv_profile.csv", &sv_profile_csv(&svals, &bounds));
}

#[test]
fn radial_cdf_golden() {
    let mu = esd(&ring());
    check_golden("radial_cdf.svg", &render_radial_cdf(&mu, &ReferenceLaw::Circular));
    check_golden("radial_cdf.csv", &radial_cdf_csv(&mu, &ReferenceLaw::Circular));
    let km = esd(&ring().iter().map(|z| z * 2.0).collect::<Vec<_>>());
    check_golden(
        "radial_cdf_km.svg",
        &render_radial_cdf(&km, &ReferenceLaw::KestenMcKay { d: 4 }),
    );
}

#[test]
fn renderers_tolerate_degenerate_input() {
    let empty = esd(&[]);
    assert!(render_scatter(&empty, &Overlay::unit_circle()).ends_with("</svg>\n"));
    assert!(render_radial_cdf(&empty, &ReferenceLaw::Circular).ends_with("</svg>\n"));
    assert!(render_sv_profile(&[0.0, 0.0], &[]).ends_with("</svg>\n"));
    assert!(render_sv_profile(&[], &[]).ends_with("</svg>\n"));
}

struct Run {
    dir: tempfile::TempDir,
}

impl Run {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn config(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn exec(&self, kind: &str, config: &Path, out: &str, extra: &[&str]) -> i32 {
        let out = self.dir.path().join(out);
        let mut args = vec![
            "circlaw".to_string(),
            kind.to_string(),
            "--config".into(),
            config.display().to_string(),
            "--out".into(),
            out.display().to_string(),
        ];
        args.extend(extra.iter().map(|s| s.to_string()));
        main_with_args(args)
    }

    fn artifacts(&self, out: &str) -> BTreeMap<String, Vec<u8>> {
        let dir = self.dir.path().join(out);
        let Ok(entries) = fs::read_dir(&dir) else {
            return BTreeMap::new();
        };
        entries
            .map(|e| e.unwrap())
            .map(|e| (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap()))
            .filter(|(name, _)| name != "timing.txt")
            .collect()
    }
}

#[test]
fn config_errors_exit_with_2() {
    let r = Run::new();
    let cases = [
        "schema = 1\nn = 10\nd = 3\ntypo = 1\n",
        "schema = 1\nn = 3\nd = 10\n",
        "schema = 1\nn = 10\nd = 3\ntrials = 0\n",
        "n = 10\nd = 3\n",
        "schema = 1\nn = ten\nd = 3\n",
    ];
    for (k, text) in cases.iter().enumerate() {
        let cfg = r.config(&format!("bad{k}.conf"), text);
        assert_eq!(r.exec("sample", &cfg, &format!("out{k}"), &[]), 2, "{text}");
        assert!(r.artifacts(&format!("out{k}")).is_empty());
    }
    assert_eq!(r.exec("sample", &r.dir.path().join("missing.conf"), "x", &[]), 2);
    let cfg = r.config("ok.conf", "schema = 1\nn = 10\nd = 3\n");
    assert_eq!(r.exec("sample", &cfg, "y", &["--threads", "0"]), 2);
    assert_eq!(main_with_args(["circlaw", "no-such-kind", "--config", "x"]), 2);
}

#[test]
fn kernel_failure_exits_with_3_and_leaves_nothing() {
    let r = Run::new();
    // No QR sweeps at all: the eigenvalue solver cannot converge, after the
    // sampled matrices have already been written.
    let cfg = r.config("spec.conf", "schema = 1\nn = 12\nd = 3\ntrials = 2\neig_sweeps = 0\n");
    assert_eq!(r.exec("spectrum", &cfg, "out", &[]), 3);
    assert!(r.artifacts("out").is_empty());
    let leftovers: Vec<_> = fs::read_dir(r.dir.path().join("out")).unwrap().collect();
    assert!(leftovers.is_empty());
}

#[test]
fn all_ones_spectrum_from_file() {
    let r = Run::new();
    fs::write(
        r.dir.path().join("ones.txt"),
        "5 5\n0 1 2 3 4\n0 1 2 3 4\n0 1 2 3 4\n0 1 2 3 4\n0 1 2 3 4\n",
    )
    .unwrap();
    let cfg = r.config("spec.conf", "schema = 1\nkind = spectrum\nmatrix = ones.txt\n");
    assert_eq!(r.exec("spectrum", &cfg, "out", &[]), 0);
    let arts = r.artifacts("out");
    let csv = String::from_utf8(arts["spectrum_0000.csv"].clone()).unwrap();
    let eigs: Vec<(f64, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(eigs.len(), 5);
    assert!((eigs[0].0 - 5.0).abs() < 1e-10 && eigs[0].1.abs() < 1e-10);
    assert!(eigs[1..].iter().all(|&(re, im)| re.abs() < 1e-10 && im.abs() < 1e-10));
    let run: serde_json::Value = serde_json::from_slice(&arts["run.json"]).unwrap();
    assert_eq!(run["inputs"][0]["path"], "ones.txt");
    assert!(arts.contains_key("spectrum_0000.svg"));
}

#[test]
fn thread_count_does_not_change_artifacts() {
    let r = Run::new();
    let cfg = r.config(
        "c.conf",
        "schema = 1\nn = 60\nd = 4\ntrials = 5\nseed = 3\nz = 0.5, 1.5i\n",
    );
    assert_eq!(r.exec("circular-law", &cfg, "one", &["--threads", "1"]), 0);
    assert_eq!(r.exec("circular-law", &cfg, "three", &["--threads", "3"]), 0);
    let (a, b) = (r.artifacts("one"), r.artifacts("three"));
    assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>());
    assert!(a == b);
    for name in [
        "eigenvalues.svg",
        "eigenvalues.csv",
        "radial_cdf.svg",
        "radial_cdf.csv",
        "potential.csv",
    ] {
        assert!(a.contains_key(name), "{name}");
    }
}

#[test]
fn overrides_enter_the_config_hash() {
    let r = Run::new();
    let cfg = r.config("s.conf", "schema = 1\nn = 8\nd = 2\nseed = 1\n");
    assert_eq!(r.exec("sample", &cfg, "a", &[]), 0);
    assert_eq!(r.exec("sample", &cfg, "b", &["--seed", "2", "--trials", "3"]), 0);
    let ra: serde_json::Value = serde_json::from_slice(&r.artifacts("a")["run.json"]).unwrap();
    let rb: serde_json::Value = serde_json::from_slice(&r.artifacts("b")["run.json"]).unwrap();
    assert_ne!(ra["config_hash"], rb["config_hash"]);
    assert_eq!(rb["config"]["seed"], "2");
    assert_eq!(rb["seeds"].as_array().unwrap().len(), 3);
    assert_eq!(r.artifacts("b").keys().filter(|k| k.starts_with("matrix_")).count(), 3);
}

#[test]
fn report_verifies_and_detects_tampering() {
    let r = Run::new();
    let cfg = r.config("s.conf", "schema = 1\nn = 8\nd = 2\ntrials = 2\n");
    assert_eq!(r.exec("sample", &cfg, "runs/s", &[]), 0);
    let rep = r.config("r.conf", "schema = 1\ninputs = runs/s\n");
    assert_eq!(r.exec("report", &rep, "rep1", &[]), 0);
    let j: serde_json::Value = serde_json::from_slice(&r.artifacts("rep1")["report.json"]).unwrap();
    assert_eq!(j["all_verified"], true);
    fs::write(r.dir.path().join("runs/s/matrix_0000.txt"), "tampered").unwrap();
    assert_eq!(r.exec("report", &rep, "rep2", &[]), 0);
    let j: serde_json::Value = serde_json::from_slice(&r.artifacts("rep2")["report.json"]).unwrap();
    assert_eq!(j["all_verified"], false);
    let missing = r.config("m.conf", "schema = 1\ninputs = runs/none\n");
    assert_eq!(r.exec("report", &missing, "rep3", &[]), 2);
}
