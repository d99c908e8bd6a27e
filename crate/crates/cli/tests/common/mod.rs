#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// Deterministic quarterly GDP (1959Q1 onwards) and monthly M2 in FRED's
/// layout, with smooth growth plus bounded wiggles.
pub fn write_inputs(dir: &Path, quarters: usize) -> (PathBuf, PathBuf) {
    let mut gdp = String::from("DATE,GDP\n");
    for i in 0..quarters {
        let m = 1959 * 12 + 3 * i;
        let v = 506.0 * (0.016 * i as f64 + 0.012 * (1.3 * i as f64).sin()).exp();
        gdp.push_str(&format!("{}-{:02}-01,{v:.3}\n", m / 12, m % 12 + 1));
    }
    let mut m2 = String::from("DATE,M2SL\n");
    for j in 0..quarters * 3 {
        let m = 1959 * 12 + j;
        let v = 286.6 * (0.0056 * j as f64 + 0.006 * (0.7 * j as f64).cos()).exp();
        m2.push_str(&format!("{}-{:02}-01,{v:.1}\n", m / 12, m % 12 + 1));
    }
    let g = dir.join("GDP.csv");
    let m = dir.join("M2SL.csv");
    fs::write(&g, gdp).unwrap();
    fs::write(&m, m2).unwrap();
    (g, m)
}

pub fn velergo(args: &[&str], threads: Option<usize>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_velergo"));
    cmd.args(args);
    if let Some(n) = threads {
        cmd.env("RAYON_NUM_THREADS", n.to_string());
    }
    cmd.output().expect("binary runs")
}

/// Every regular file in `dir`, by name.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}
