#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};
use std::{env, fs};

pub struct Case {
    pub name: &'static str,
    pub ext: &'static str,
    pub args: &'static [&'static str],
}

pub const CASES: &[Case] = &[
    Case {
        name: "wh",
        ext: "json",
        args: &["--seed", "7", "wh"],
    },
    Case {
        name: "wh_small",
        ext: "csv",
        args: &[
            "--seed",
            "11",
            "--output",
            "csv",
            "wh",
            "--trials",
            "50",
            "--automorphisms",
            "20",
            "--perturbations",
            "10",
            "--max-n",
            "2",
        ],
    },
    Case {
        name: "metric",
        ext: "json",
        args: &["metric", "--d", "1,0.5,0.5,0.5"],
    },
    Case {
        name: "metric_null",
        ext: "json",
        args: &["metric", "--d", "1,1,0,0", "--r", "2"],
    },
    Case {
        name: "transform",
        ext: "json",
        args: &["transform", "--v", "0.6", "--f", "0", "--r", "0", "--d", "1,0,0,0"],
    },
    Case {
        name: "transform_mixed",
        ext: "json",
        args: &[
            "--seed",
            "3",
            "transform",
            "--v",
            "0.3",
            "--f",
            "-0.2",
            "--r",
            "0.4",
            "--c",
            "2",
            "--b",
            "0.5",
            "--d",
            "1,-0.5,0.25,2",
            "--trials",
            "2000",
        ],
    },
    Case {
        name: "nullcone",
        ext: "csv",
        args: &["nullcone", "--r", "0", "--c", "1", "--b", "1", "--count", "4"],
    },
    Case {
        name: "nullcone_power",
        ext: "json",
        args: &[
            "--output", "json", "nullcone", "--r", "1", "--c", "2", "--b", "0.5", "--count", "8",
        ],
    },
    Case {
        name: "contract",
        ext: "csv",
        args: &["contract", "--v", "0.5", "--f", "0.8", "--r", "0.3"],
    },
    Case {
        name: "planck_natural",
        ext: "json",
        args: &["planck", "--c", "1", "--b", "1", "--hbar", "1"],
    },
    Case {
        name: "planck_codata",
        ext: "json",
        args: &["planck"],
    },
    Case {
        name: "planck_csv",
        ext: "csv",
        args: &["--output", "csv", "planck", "--alpha-g", "1e-17"],
    },
    Case {
        name: "hamilton_zero",
        ext: "json",
        args: &["hamilton", "verify", "--system", "zero", "--steps", "2000"],
    },
    Case {
        name: "hamilton_free",
        ext: "json",
        args: &["hamilton", "verify", "--system", "free", "--p", "2", "--steps", "2000"],
    },
    Case {
        name: "hamilton_harmonic",
        ext: "json",
        args: &["hamilton", "verify", "--system", "harmonic", "--steps", "2000"],
    },
    Case {
        name: "hamilton_driven",
        ext: "json",
        args: &[
            "hamilton", "verify", "--system", "driven", "--p", "0.3", "--t", "0.5", "--steps", "2000",
        ],
    },
    Case {
        name: "hamilton_file",
        ext: "json",
        args: &["hamilton", "verify", "--file", "@golden/driven.json", "--steps", "2000"],
    },
];

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

pub fn run(args: &[&str]) -> Output {
    let args: Vec<String> = args
        .iter()
        .map(|a| match a.strip_prefix("@golden/") {
            Some(rest) => golden_dir().join(rest).display().to_string(),
            None => a.to_string(),
        })
        .collect();
    Command::new(env!("CARGO_BIN_EXE_reciprocal"))
        .args(&args)
        .env_remove("RECIPROCAL_TOL")
        .output()
        .expect("binary runs")
}

/// Runs a case and compares stdout byte for byte with its golden file.
/// With `UPDATE_GOLDEN=1` the file is rewritten instead.
pub fn check(case: &Case) -> Result<(), String> {
    let out = run(case.args);
    if !out.status.success() {
        return Err(format!(
            "{}: exit {:?}: {}",
            case.name,
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    let path = golden_dir().join(format!("{}.{}", case.name, case.ext));
    if env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, &out.stdout).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let expected = fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected != out.stdout {
        return Err(format!(
            "{} differs from golden\n--- expected\n{}\n--- actual\n{}",
            case.name,
            String::from_utf8_lossy(&expected),
            String::from_utf8_lossy(&out.stdout)
        ));
    }
    Ok(())
}
