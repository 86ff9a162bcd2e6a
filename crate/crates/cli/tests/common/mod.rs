#![allow(dead_code)]

use std::path::{Path, PathBuf};

use mtagd_core::{EdgeWeights, Mtkg};

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the CLI in-process.
pub fn mtagd(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("mtagd").chain(args.iter().copied());
    let code = mtagd_cli::run(argv, &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

pub fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

pub fn write_mtkg(dir: &Path, name: &str, g: &Mtkg) -> String {
    write(dir, name, &mtagd_core::io::save_mtkg(g))
        .to_str()
        .unwrap()
        .to_string()
}

/// Uni-directional 3-cycle A -> B -> C -> A.
pub fn three_cycle() -> Mtkg {
    let w = EdgeWeights::new(1, 0, 0);
    Mtkg::builder()
        .uni("A", "B", w)
        .uni("B", "C", w)
        .uni("C", "A", w)
        .build()
        .unwrap()
}
