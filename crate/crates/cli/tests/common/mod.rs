#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

pub fn corpus(name: &str) -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/corpus")).join(name)
}

pub fn corpus_text(name: &str) -> String {
    std::fs::read_to_string(corpus(name)).unwrap()
}

/// Write `src` to a fresh file and return its path with the guard keeping it alive.
pub fn temp_spec(src: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.eflint");
    std::fs::write(&path, src).unwrap();
    (dir, path)
}

pub fn normspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_normspec")).args(args).env_remove("NORMSPEC_ATOM_CAP").output().unwrap()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}
