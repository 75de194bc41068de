use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use num_complex::Complex64;

const LATTICE: &str = r#"[lattice]
eps_t = 1.0
eps_x = 0.5
l_t = 3
l_x = 3
big_l_t = 9
big_l_x = 9
dim = 1
"#;

struct Run {
    code: Option<i32>,
    stdout: String,
    stderr: String,
    out: PathBuf,
}

fn run_in(dir: &Path, toml: &str, extra: &[&str]) -> Run {
    let cfg = dir.join("job.toml");
    std::fs::write(&cfg, toml).unwrap();
    let out = dir.join("out");
    let o: Output = Command::new(env!("CARGO_BIN_EXE_blochlat"))
        .arg("--config")
        .arg(&cfg)
        .arg("--output")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    Run {
        code: o.status.code(),
        stdout: String::from_utf8_lossy(&o.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&o.stderr).into_owned(),
        out,
    }
}

fn summary(run: &Run) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(run.out.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn explicit_kernel_fibers_match_direct_formula() {
    let dir = tempfile::tempdir().unwrap();
    // One entry: a(0, d) = v with d = (1, -1).
    std::fs::write(
        dir.path().join("k.csv"),
        "row_0,row_1,offset_0,offset_1,re,im\n0,0,1,-1,2.0,1.0\n",
    )
    .unwrap();
    let toml = format!("{LATTICE}[kernel]\nkind = \"explicit\"\npath = \"k.csv\"\n[task]\nname = \"fibers\"\n");
    let run = run_in(dir.path(), &toml, &[]);
    assert_eq!(run.code, Some(0), "{}", run.stderr);
    assert_eq!(run.stdout.lines().count(), 2);

    let text = std::fs::read_to_string(run.out.join("fibers.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k_index_0,k_index_1,ell_row,ell_col,re,im"));
    let v = Complex64::new(2.0, 1.0);
    let eps = [1.0, 0.5];
    let d = [1.0, -1.0];
    let mut rows = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let j: Vec<f64> = f[..2].iter().map(|s| s.parse().unwrap()).collect();
        let col: usize = f[3].parse().unwrap();
        let m = [(col / 3) as f64, (col % 3) as f64];
        // Fiber of a single entry at u = 0: vol_f/|B| · v · e^{i(k + ℓ')·d}.
        let phase: f64 = (0..2)
            .map(|a| (2.0 * PI * j[a] / (eps[a] * 9.0) + 2.0 * PI * m[a] / (eps[a] * 3.0)) * d[a] * eps[a])
            .sum();
        let want = v * Complex64::from_polar(0.5 / 9.0, phase);
        let got = Complex64::new(f[4].parse().unwrap(), f[5].parse().unwrap());
        assert!((got - want).norm() < 1e-14, "{line}: want {want}");
        rows += 1;
    }
    assert_eq!(rows, 9 * 81);
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    for (toml, field) in [
        (format!("{LATTICE}[task]\nname = \"verify\"\n[params]\nstrip_sampels = 5\n"), "params.strip_sampels"),
        (format!("{LATTICE}[task]\nname = \"verify\"\n[params]\nm = 0.1\n"), "params.m"),
        (format!("{LATTICE}[kernel]\nkind = \"random\"\nsupport_radius = 5\n[task]\nname = \"norms\"\n"), "kernel.support_radius"),
        (format!("{}[task]\nname = \"verify\"\n", LATTICE.replace("big_l_t = 9", "big_l_t = 10")), "lattice.big_l_t"),
        (format!("{}[kernel]\nkind = \"naive_qstarq\"\n[task]\nname = \"norms\"\n", LATTICE.replace("l_x = 3\n", "l_x = 2\n").replace("big_l_x = 9", "big_l_x = 8")), "kernel.kind"),
        (format!("{LATTICE}[kernel]\nkind = \"explicit\"\npath = \"k.csv\"\n[task]\nname = \"fibers\"\n[params.contour]\ncenter = [0.0, 0.0]\n"), "params.contour"),
    ] {
        let run = run_in(dir.path(), &toml, &[]);
        assert_eq!(run.code, Some(2), "{toml}\n{}", run.stderr);
        assert!(run.stderr.contains(&format!("`{field}`")), "{field}: {}", run.stderr);
    }
}

#[test]
fn bad_explicit_file_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("k.csv"),
        "row_0,row_1,offset_0,offset_1,re,im\n0,0,0,0,1,0\n1,1,0,0,1,0\n0,0,0,0,3,0\n",
    )
    .unwrap();
    let toml = format!("{LATTICE}[kernel]\nkind = \"explicit\"\npath = \"k.csv\"\n[task]\nname = \"fibers\"\n");
    let run = run_in(dir.path(), &toml, &[]);
    assert_eq!(run.code, Some(2));
    assert!(run.stderr.contains("k.csv:4: duplicate"), "{}", run.stderr);
}

#[test]
fn io_errors_have_their_own_code() {
    let dir = tempfile::tempdir().unwrap();
    let missing = format!("{LATTICE}[kernel]\nkind = \"explicit\"\npath = \"absent.csv\"\n[task]\nname = \"fibers\"\n");
    assert_eq!(run_in(dir.path(), &missing, &[]).code, Some(3));

    let blocked = tempfile::tempdir().unwrap();
    std::fs::write(blocked.path().join("out"), "a file where the output directory should go").unwrap();
    let toml = format!("{LATTICE}[kernel]\nkind = \"random\"\nsupport_radius = 1\n[task]\nname = \"norms\"\n");
    assert_eq!(run_in(blocked.path(), &toml, &[]).code, Some(3));
}

#[test]
fn seed_controls_random_kernels() {
    let toml = format!("{LATTICE}[kernel]\nkind = \"random\"\nsupport_radius = 2\n[task]\nname = \"norms\"\n[params]\nseed = 5\n");
    let norms = |extra: &[&str]| {
        let dir = tempfile::tempdir().unwrap();
        let run = run_in(dir.path(), &toml, extra);
        assert_eq!(run.code, Some(0), "{}", run.stderr);
        std::fs::read_to_string(run.out.join("norms.csv")).unwrap()
    };
    let a = norms(&[]);
    assert_eq!(a, norms(&["--seed", "5"]));
    assert_ne!(a, norms(&["--seed", "6"]));
}

#[test]
fn funcalc_polynomial_and_verbose_timing() {
    let dir = tempfile::tempdir().unwrap();
    let toml = format!(
        "{LATTICE}[kernel]\nkind = \"smooth_qstarq\"\nexponent = 2\n[task]\nname = \"funcalc\"\n[params]\nfunction = \"polynomial\"\ncoefficients = [0.5, [0.0, 1.0], -0.25]\n"
    );
    let run = run_in(dir.path(), &toml, &["--verbose"]);
    assert_eq!(run.code, Some(0), "{}", run.stderr);
    let s = summary(&run);
    assert!(s["elapsed_ms"].is_u64());
    let names: Vec<&str> = s["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"configured_function_matches_dense"));
    assert!(names.contains(&"configured_function_norm_le_contour_bound"));
    let rows = std::fs::read_to_string(run.out.join("funcalc.csv")).unwrap().lines().count();
    assert_eq!(rows, 1 + 9 * 81);
}

#[test]
fn inverse_with_zero_inside_contour_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let toml = format!(
        "{LATTICE}[kernel]\nkind = \"naive_qstarq\"\n[task]\nname = \"funcalc\"\n[params]\nfunction = \"inverse\"\n"
    );
    let run = run_in(dir.path(), &toml, &[]);
    assert_eq!(run.code, Some(4), "{}", run.stderr);
    assert!(!run.out.join("summary.json").exists());
}

#[test]
fn decay_task_reports_the_chain() {
    let dir = tempfile::tempdir().unwrap();
    let toml = format!("{LATTICE}[kernel]\nkind = \"naive_qstarq\"\n[task]\nname = \"decay\"\n");
    let run = run_in(dir.path(), &toml, &[]);
    assert_eq!(run.code, Some(0), "{}", run.stderr);
    let s = summary(&run);
    assert_eq!(s["elapsed_ms"], serde_json::Value::Null);
    for c in s["checks"].as_array().unwrap() {
        assert_eq!(c["anchor"], "lemBOlonelinfty.b");
        assert!(c["lhs"].as_f64().unwrap() <= c["rhs"].as_f64().unwrap());
    }
    assert!(run.stdout.lines().all(|l| l.starts_with("PASS [lemBOlonelinfty.b]")));
}
