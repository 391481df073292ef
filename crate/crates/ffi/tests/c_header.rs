//! Compiles a C program against the generated header and the shared library.

use std::path::PathBuf;
use std::process::Command;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = manifest.join("include/mixcurv.h");
    assert!(header.exists(), "header not generated");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in ["mixcurv_scenario_from_preset", "mixcurv_check", "mixcurv_last_error_message", "MIXCURV_STATUS_OK"] {
        assert!(text.contains(sym), "{sym} missing from header");
    }

    // target/<profile>/deps/<test> -> target/<profile>
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().unwrap().parent().unwrap().to_path_buf();
    if !lib_dir.join("libmixcurv_ffi.so").exists() && !lib_dir.join("libmixcurv_ffi.dylib").exists() {
        eprintln!("shared library not found in {}; C link check skipped", lib_dir.display());
        return;
    }
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("mixcurv_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg("-L")
        .arg(&lib_dir)
        .args(["-lmixcurv_ffi", "-lm", "-o"])
        .arg(&out)
        .status();
    let Ok(status) = status else {
        eprintln!("no C compiler; C link check skipped");
        return;
    };
    assert!(status.success(), "C smoke program failed to compile");
    let run = Command::new(&out).env("LD_LIBRARY_PATH", &lib_dir).output().unwrap();
    assert!(run.status.success(), "smoke exited with {:?}: {}", run.status, String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
