//! Compiles tests/c/smoke.c against the generated header and the static
//! library, then runs it.

use std::path::PathBuf;
use std::process::Command;

fn static_lib() -> PathBuf {
    // test binaries live in target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().join("libfinsler_ffi.a")
}

#[test]
fn c_program_links_and_runs() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let lib = static_lib();
    assert!(lib.exists(), "missing {}", lib.display());
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("finsler_smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .expect("C compiler available");
    assert!(status.success(), "compile failed");
    let run = Command::new(&out).output().unwrap();
    assert!(
        run.status.success(),
        "exit {:?}: {}",
        run.status,
        String::from_utf8_lossy(&run.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
