//! Test support: reference computations written independently of the
//! `smm-core` scoring and planning code, plus seeded random generators for
//! models and assessments.
//!
//! Nothing here calls into `smm_core::scoring` or `smm_core::planner`.

pub mod gen;
pub mod oracle;

use std::path::PathBuf;

/// Workspace root, for locating shipped fixtures.
pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .expect("workspace root")
}

pub fn fixture(name: &str) -> PathBuf {
    workspace_root().join("fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    let path = fixture(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
