use std::process::Command;

fn main() {
    println!("cargo:rerun-if-env-changed=SUBPLANCK_BUILD_ID");
    println!("cargo:rerun-if-changed=../../.git/HEAD");
    println!("cargo:rerun-if-changed=../../.git/index");
    let version = std::env::var("CARGO_PKG_VERSION").unwrap_or_default();
    let id = std::env::var("SUBPLANCK_BUILD_ID").ok().unwrap_or_else(|| {
        let describe = Command::new("git")
            .args(["describe", "--tags", "--always", "--dirty"])
            .output()
            .ok()
            .filter(|o| o.status.success())
            .and_then(|o| String::from_utf8(o.stdout).ok())
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty());
        match describe {
            Some(d) => format!("v{version}-{d}"),
            None => format!("v{version}"),
        }
    });
    println!("cargo:rustc-env=SUBPLANCK_BUILD_ID={id}");
}
