use std::path::Path;
use std::process::Command;

#[test]
fn c_caller_compiles_against_header() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(dir.join("tests/c/smoke.c"))
        .status()
        .expect("a C compiler named cc on PATH");
    assert!(status.success());
}
