//! Compiles and runs `tests/smoke.c` against the generated header and the
//! static library, exercising the ABI from real C. Skips quietly when no C
//! compiler is on the path.

use std::path::PathBuf;
use std::process::Command;

#[test]
fn c_program_links_and_runs() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler available");
        return;
    }
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include = crate_dir.join("include");
    let source = crate_dir.join("tests").join("smoke.c");
    // the staticlib lands next to this test binary's deps directory
    let mut lib = std::env::current_exe().unwrap();
    lib.pop(); // test binary name
    lib.pop(); // deps/
    let staticlib = lib.join("libncsys_ffi.a");
    assert!(
        staticlib.exists(),
        "static library missing at {}",
        staticlib.display()
    );
    let exe = std::env::temp_dir().join(format!("ncsys-c-smoke-{}", std::process::id()));
    let compile = Command::new(&cc)
        .arg(&source)
        .arg("-I")
        .arg(&include)
        .arg(&staticlib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .expect("compiler runs");
    assert!(
        compile.status.success(),
        "compilation failed: {}",
        String::from_utf8_lossy(&compile.stderr)
    );
    let run = Command::new(&exe).output().expect("smoke binary runs");
    assert!(
        run.status.success(),
        "smoke binary failed: {}",
        String::from_utf8_lossy(&run.stderr)
    );
    let _ = std::fs::remove_file(&exe);
}
