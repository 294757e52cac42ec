#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_inftorus")
}

pub fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

pub fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(bin())
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

pub fn report(out: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

pub const ONE_SQRT2: &str = r#"{"basis": [{"id": "sqrt2"}], "prefix": [[["1", "1/1"]], [["sqrt2", "1/1"]]]}"#;
pub const UNIT_TORUS_2: &str = r#"{"radii_head": [1, 1], "tail": {"kind": "zero"}}"#;
pub const GEOMETRIC: &str = r#"{"tail": {"kind": "geometric", "first": 0.5, "ratio": 0.5}}"#;
