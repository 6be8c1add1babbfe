//! Compiles and runs a small C program against the generated header and the static library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include "sbfem_seepage.h"
#include <stdio.h>
#include <math.h>

int main(int argc, char **argv) {
    SbfemModel *model = NULL;
    if (sbfem_model_load(argv[1], NULL, &model) != SBFEM_STATUS_OK) return 10;
    SbfemSolution *sol = NULL;
    if (sbfem_solve_steady(model, &sol) != SBFEM_STATUS_OK) return 11;
    double head, qx, qy;
    if (sbfem_solution_sample(sol, 0.5, 1.0, &head, &qx, &qy) != SBFEM_STATUS_OK) return 12;
    if (fabs(head - 5.0) > 1e-12) return 13;
    if (sbfem_solution_sample(sol, 5.0, 5.0, &head, &qx, &qy) != SBFEM_STATUS_MODEL) return 14;
    char msg[256];
    if (sbfem_last_error_message(msg, sizeof msg) == 0) return 15;
    sbfem_solution_free(sol);
    sbfem_model_free(model);
    printf("ok\n");
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libsbfem_seepage_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let exe = dir.path().join("main");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let fixture = manifest.join("../core/tests/fixtures/column.json");
    let out = Command::new(&exe).arg(fixture).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "ok\n");
}
