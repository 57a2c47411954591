use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use apollonian::cli_io::CACHE_DIR_ENV;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apollonian"))
        .args(args)
        .current_dir(dir)
        .env(CACHE_DIR_ENV, dir.join("cache"))
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("exp.conf"),
        "# bounded packing, small cutoff\npacking = bounded\ncutoff = curvature:500\nt_min = 1e-5\noutput = first\n",
    )
    .unwrap();
    let gen = run(d, &["gen", "--config", "exp.conf"]);
    assert_eq!(code(&gen), 0, "{}", String::from_utf8_lossy(&gen.stderr));
    assert!(fs::read_dir(d.join("cache")).unwrap().count() == 1);
    let count = run(d, &["count", "--config", "exp.conf", "--set", "metric=spherical", "--workers", "2"]);
    assert_eq!(code(&count), 0, "{}", String::from_utf8_lossy(&count.stderr));
    let manifest = fs::read_to_string(d.join("first/manifest.json")).unwrap();
    assert!(manifest.contains("metric = spherical"));
    assert!(!manifest.contains("workers"));
    let stdout = String::from_utf8_lossy(&count.stdout);
    assert!(stdout.contains("count.csv"));
    let csv = fs::read_to_string(d.join("first/count.csv")).unwrap();
    assert!(csv.starts_with("t,count,valid\n"));
}

#[test]
fn exit_codes_follow_error_categories() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&run(d, &["count", "--set", "colour=red"])), 1);
    assert_eq!(code(&run(d, &["count", "--set", "nonsense"])), 1);
    assert_eq!(code(&run(d, &["count", "--config", "missing.conf"])), 1);
    assert_eq!(code(&run(d, &["count"])), 1);
    // a sphere packing has no circle rendering
    let sphere = ["--set", "packing=sphere", "--set", "arithmetic=float", "--set", "cutoff=curvature:5"];
    assert_eq!(code(&run(d, &[&["gen"][..], &sphere].concat())), 0);
    assert_eq!(code(&run(d, &[&["render"][..], &sphere].concat())), 2);
    let cache = fs::read_dir(d.join("cache")).unwrap().next().unwrap().unwrap().path();
    fs::write(&cache, b"APKG garbage").unwrap();
    assert_eq!(code(&run(d, &[&["render"][..], &sphere].concat())), 3);
}

#[test]
fn failed_runs_leave_no_result_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run(d, &["fit", "--set", "output=res", "--set", "fit_source=counts", "--set", "input=nope.csv"]);
    assert_eq!(code(&out), 1);
    assert!(!d.join("res").exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = ["--set", "packing=strip", "--set", "cutoff=curvature:300", "--set", "viewport=-1.2,1.2,-2,2"];
    assert_eq!(code(&run(d, &[&["gen"][..], &args].concat())), 0);
    for (i, w) in ["1", "3"].iter().enumerate() {
        let out = format!("output=r{i}");
        let o = run(d, &[&["render", "--workers", w, "--set", &out][..], &args].concat());
        assert_eq!(code(&o), 0);
    }
    for f in ["render.svg", "manifest.json"] {
        assert_eq!(fs::read(d.join("r0").join(f)).unwrap(), fs::read(d.join("r1").join(f)).unwrap());
    }
}
