//! End-to-end checks of the command-line front end: flows, outputs, and the
//! documented exit codes (0 success, 1 verification failure, 2 invalid input).

use std::process::Command;

use unimesh::curve::Spline;
use unimesh::geometry::{structured_acute_mesh, Point2};
use unimesh::io;

fn unimesh_cmd() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_unimesh"));
    // keep a stray environment override from redirecting output
    cmd.env_remove("UNIMESH_OUT");
    cmd
}

#[test]
fn conform_writes_outputs_and_reports_quality() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = structured_acute_mesh(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0), 20).unwrap();
    io::write_mesh(dir.path().join("in.mesh"), &mesh).unwrap();
    let knots: Vec<Point2> = (0..=6)
        .map(|k| Point2::new(0.2 + 0.1 * k as f64, 0.5 + 0.013))
        .collect();
    io::write_curve(dir.path().join("in.curve"), &Spline::fit(&knots, false).unwrap()).unwrap();

    let out = unimesh_cmd()
        .args(["conform", "--mesh"])
        .arg(dir.path().join("in.mesh"))
        .arg("--curve")
        .arg(dir.path().join("in.curve"))
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout.contains("min quality:"), "stdout: {stdout}");
    assert!(dir.path().join("out/conformed.mesh").exists());
    assert!(dir.path().join("out/conformed.vtk").exists());

    // the written mesh is readable and its quality command runs
    let out = unimesh_cmd()
        .args(["quality", "--mesh"])
        .arg(dir.path().join("out/conformed.mesh"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("min quality"));
}

#[test]
fn verify_patch_suite_passes() {
    let out = unimesh_cmd()
        .args(["verify", "--suite", "patch"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("patch: PASS"));
}

#[test]
fn invalid_input_exits_with_code_2() {
    // unknown suite
    let out = unimesh_cmd()
        .args(["verify", "--suite", "nonsense"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // missing flag
    let out = unimesh_cmd().arg("conform").output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // malformed mesh file
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.mesh"), "not a mesh\n").unwrap();
    let out = unimesh_cmd()
        .args(["quality", "--mesh"])
        .arg(dir.path().join("bad.mesh"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // unknown command
    let out = unimesh_cmd().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
