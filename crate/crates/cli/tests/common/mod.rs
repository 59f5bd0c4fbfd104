#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const BIN: &str = env!("CARGO_BIN_EXE_anelkin");

/// Dislocation fixture ring: grid vertices (1,1)-(7,7) of the 8 x 8 grid, counter-clockwise.
pub const RING_8: &str = "10,11,12,13,14,15,16,25,34,43,52,61,70,69,68,67,66,65,64,55,46,37,28,19,10";

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// A scratch directory holding copies of every fixture.
pub fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for entry in fs::read_dir(fixtures()).unwrap() {
        let path = entry.unwrap().path();
        fs::copy(&path, dir.path().join(path.file_name().unwrap())).unwrap();
    }
    dir
}

pub fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("ANELKIN_CONFIG")
        .output()
        .unwrap()
}

/// Numbers may differ in the last bits across platforms (transcendental functions come
/// from the system math library); everything else must match exactly.
pub fn same_up_to_rounding(expected: &str, actual: &str) -> bool {
    if expected == actual {
        return true;
    }
    let split = |s: &str| -> Vec<String> {
        s.split(|c: char| c.is_whitespace() || "[]{}(),:;\"=<>/".contains(c))
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect()
    };
    let (a, b) = (split(expected), split(actual));
    a.len() == b.len()
        && a.iter().zip(&b).all(|(x, y)| {
            if x == y {
                return true;
            }
            match (x.parse::<f64>(), y.parse::<f64>()) {
                (Ok(u), Ok(v)) => (u - v).abs() <= 1e-12 * u.abs().max(v.abs()).max(1e-300),
                _ => false,
            }
        })
}

pub fn golden(name: &str) -> String {
    let path = golden_dir().join(name);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// A golden-file case: arguments, expected exit code, golden name of stdout and of any
/// files the command writes.
pub struct GoldenCase {
    pub args: &'static [&'static str],
    pub code: i32,
    pub stdout: &'static str,
    pub files: &'static [(&'static str, &'static str)],
}

pub const GOLDEN_CASES: &[GoldenCase] = &[
    GoldenCase {
        args: &["check", "random.json"],
        code: 2,
        stdout: "check_random.json",
        files: &[],
    },
    GoldenCase {
        args: &["check", "dislocation.json"],
        code: 2,
        stdout: "check_dislocation.json",
        files: &[],
    },
    GoldenCase {
        args: &["decompose", "random.json", "--out", "split"],
        code: 0,
        stdout: "decompose_random.json",
        files: &[
            ("split-compatible.json", "decompose_random-compatible.json"),
            ("split-embodiment.json", "decompose_random-embodiment.json"),
        ],
    },
    GoldenCase {
        args: &["equiv", "random.json", "--affine", "0,-2,1,0.5;3,-4"],
        code: 0,
        stdout: "equiv_affine.json",
        files: &[],
    },
    GoldenCase {
        args: &["equiv", "random.json", "perturbed.json"],
        code: 2,
        stdout: "equiv_perturbed.json",
        files: &[],
    },
    GoldenCase {
        args: &["synth", "dislocation", "--b", "1,0", "--grid", "8"],
        code: 0,
        stdout: "synth_dislocation.json",
        files: &[],
    },
    GoldenCase {
        args: &["synth", "quasicrystal", "--points", "20"],
        code: 0,
        stdout: "synth_quasicrystal.csv",
        files: &[],
    },
    GoldenCase {
        args: &["synth", "random", "--seed", "5", "--cells", "12"],
        code: 0,
        stdout: "synth_random.json",
        files: &[],
    },
    GoldenCase {
        args: &["burgers", "dislocation.json", "--loop", RING_8],
        code: 0,
        stdout: "burgers_dislocation.json",
        files: &[],
    },
    GoldenCase {
        args: &["groupoid", "family.json"],
        code: 0,
        stdout: "groupoid_family.json",
        files: &[],
    },
    GoldenCase {
        args: &["report", "dislocation.json", "--loop", RING_8],
        code: 0,
        stdout: "report_dislocation.svg",
        files: &[],
    },
];

/// Runs a case twice in fresh workspaces. Returns the produced (golden name, text) pairs
/// of the first run, or a description of the first instability.
pub fn run_case_twice(case: &GoldenCase) -> Result<Vec<(&'static str, String)>, String> {
    let mut runs = Vec::new();
    for _ in 0..2 {
        let dir = workspace();
        let out = run(dir.path(), case.args);
        if out.status.code() != Some(case.code) {
            return Err(format!(
                "{:?}: exit {:?}, expected {}: {}",
                case.args,
                out.status.code(),
                case.code,
                String::from_utf8_lossy(&out.stderr)
            ));
        }
        let mut produced = vec![(case.stdout, String::from_utf8(out.stdout).map_err(|e| e.to_string())?)];
        for (file, name) in case.files {
            let text = fs::read_to_string(dir.path().join(file)).map_err(|e| format!("{file}: {e}"))?;
            produced.push((*name, text));
        }
        runs.push(produced);
    }
    if runs[0] != runs[1] {
        return Err(format!("{:?}: output differs between two runs", case.args));
    }
    Ok(runs.swap_remove(0))
}
